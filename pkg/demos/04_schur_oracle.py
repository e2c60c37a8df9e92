"""
What truncation throws away: the Schur complement
=================================================

On a small grid the whole operator can be rotated into the sine basis.
Splitting it into low (p, q <= M) and high modes shows how strongly the
two groups couple, how far the reduced matrix A_LL is from the exact Schur
complement S, and that ||S - A_LL|| <= ||A_LH||**2 / alpha_H.
"""

import numpy as np

from lowmode import assemble_operator, make_grid, manufactured_problem, schur_decay_report

grid = make_grid(31)
for name in ("laplace", "example1"):
    A = assemble_operator(grid, manufactured_problem(name).kappa)
    rep = schur_decay_report(A, grid, cutoffs=(2, 4, 8, 12))
    print(f"\n{name}")
    print(f"{'M':>3} {'||A_LH||':>10} {'alpha_H':>8} {'||S-A_LL||':>11} {'bound':>10}")
    for r in rep.rows:
        print(f"{r.M:3d} {r.coupling_norm:10.3e} {r.alpha_H:8.4f} {r.gap:11.3e} {r.bound_rhs:10.3e}")

# for kappa = 1 the sine modes are exact eigenvectors, so nothing couples.
# For the oscillatory coefficient the coupling does not shrink with M: the
# (2, 2) harmonic of kappa links modes p and p + 2 on either side of any cutoff.
print("\nbound holds in every row:", all(r.gap <= r.bound_rhs for r in rep.rows))
print("coupling norms:", np.round([r.coupling_norm for r in rep.rows], 4))
