"""
How many modes are enough?
==========================

Sweep the cutoff M on a fixed grid.  The total error against the exact
solution levels off once the finite-difference error dominates, while the
reduction error against the finite-difference solution keeps falling.
"""

import math

from lowmode import (
    assemble_operator,
    assemble_rhs,
    condition_number,
    discrete_l2_norm,
    make_grid,
    manufactured_problem,
    reduced_solve,
    sample_field,
    solve_direct,
    solve_full_basis,
)

prob = manufactured_problem("example1")
grid = make_grid(127)
A = assemble_operator(grid, prob.kappa)
F = assemble_rhs(grid, prob.f)
u = sample_field(grid, prob.u_exact)
u_fd = solve_direct(A, F).solution

print(f"{'M':>3} {'K':>5} {'||u-u_RD||':>12} {'||u_FD-u_RD||':>14} {'cond':>8} {'sqrt(log M)/M':>14}")
for M in (2, 4, 6, 8, 12, 16):
    r = reduced_solve(grid, A, F, M)
    print(f"{M:3d} {M * M:5d} {discrete_l2_norm(grid, u - r.u):12.4e} "
          f"{discrete_l2_norm(grid, u_fd - r.u):14.4e} {condition_number(r.system.A_LL):8.2f} "
          f"{math.sqrt(math.log(M)) / M:14.4f}")

# keeping every mode reproduces the finite-difference solution; the full
# basis is applied with sine transforms instead of a dense N x N matrix
full = solve_full_basis(grid, A, F)
print(f"M = m = {grid.m}: ||u_FD - u_RD|| = {discrete_l2_norm(grid, u_fd - full.u):.2e}")
