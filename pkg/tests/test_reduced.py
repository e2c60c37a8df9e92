import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from lowmode import (
    DefinitenessFailure,
    InvalidArgument,
    assemble_operator,
    assemble_rhs,
    build_basis,
    condition_number,
    energy_norm,
    lift,
    make_grid,
    manufactured_problem,
    project_system,
    reduced_solve,
    sample_field,
    solve_direct,
    solve_full_basis,
    solve_reduced,
)
from lowmode.experiments.runners import best_approximation_margin, galerkin_residual
from lowmode.reduced import MAX_DENSE_K, ReducedSystem
from lowmode.spectral import discrete_eigenvalue


def one(x, y):
    return np.ones_like(x)


def sinsin(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def test_unit_coefficient_raw_system_is_diagonal():
    g = make_grid(20)
    A = assemble_operator(g, one)
    b = build_basis(g, 5, "raw")
    rs = project_system(A, np.zeros(g.N), b)
    lam = discrete_eigenvalue(b.modes[:, 0], b.modes[:, 1], g.h)
    expect = np.diag(((g.m + 1) / 2) ** 2 * lam)
    assert np.max(np.abs(rs.A_LL - expect)) <= 1e-12 * expect.max()
    assert np.array_equal(rs.f_M, np.zeros(25))


def test_example1_m255_condition_at_two_modes(case):
    c = case("example1", 255)
    rs = project_system(c.A, c.F, build_basis(c.grid, 2, "mass"))
    assert condition_number(rs.A_LL) == pytest.approx(4.0005, abs=0.1)


def test_project_dimension_mismatch():
    g = make_grid(6)
    b = build_basis(make_grid(5), 2)
    with pytest.raises(InvalidArgument):
        project_system(assemble_operator(g, one), np.zeros(g.N), b)


def test_dense_limit():
    g = make_grid(40)
    with pytest.raises(InvalidArgument):
        project_system(assemble_operator(g, one), np.zeros(g.N), build_basis(g, 33))
    assert 32 * 32 <= MAX_DENSE_K


def _system(A_LL, f):
    return ReducedSystem(np.asarray(A_LL, float), np.asarray(f, float), None)


def test_solve_reduced_examples(rng):
    e1 = np.eye(4)[0]
    assert np.allclose(solve_reduced(_system(np.eye(4), e1)), e1)
    d = np.array([1.0, 3.0, 7.0])
    f = np.array([2.0, -1.0, 5.0])
    assert np.allclose(solve_reduced(_system(np.diag(d), f)), f / d, rtol=1e-15)
    X = rng.standard_normal((16, 16))
    S = X @ X.T + 16 * np.eye(16)
    f = rng.standard_normal(16)
    z = solve_reduced(_system(S, f))
    assert np.linalg.norm(S @ z - f) <= 1e-12 * np.linalg.norm(f)


def test_solve_reduced_indefinite():
    with pytest.raises(DefinitenessFailure):
        solve_reduced(_system(np.diag([1.0, -1.0]), [1.0, 1.0]))


def test_lift_examples():
    g = make_grid(9)
    b = build_basis(g, 3, "raw")
    assert np.array_equal(lift(b, np.zeros(9)), np.zeros(g.N))
    e = np.zeros(9)
    e[b.column(1, 1)] = 1
    assert np.allclose(lift(b, e), sample_field(g, sinsin), atol=1e-15)
    with pytest.raises(InvalidArgument):
        lift(b, np.zeros(8))


@pytest.mark.parametrize("M", [1, 3, 8])
def test_single_mode_exactness(M):
    g = make_grid(63)
    A = assemble_operator(g, one)
    F = sample_field(g, lambda x, y: 2 * np.pi ** 2 * sinsin(x, y))
    u_fd = solve_direct(A, F).solution
    u_rd = reduced_solve(g, A, F, M).u
    assert np.max(np.abs(u_rd - u_fd)) <= 1e-10


def test_energy_norm_examples():
    g = make_grid(15)
    A = assemble_operator(g, one)
    assert energy_norm(A, np.zeros(g.N)) == 0.0
    v = sample_field(g, lambda x, y: np.sin(2 * np.pi * x) * np.sin(5 * np.pi * y))
    lam = discrete_eigenvalue(2, 5, g.h)
    assert energy_norm(A, v) == pytest.approx(np.sqrt(lam) * np.linalg.norm(v), rel=1e-12)
    assert energy_norm(A, 2 * v) == pytest.approx(2 * energy_norm(A, v), rel=1e-15)


def test_energy_norm_negative_radicand():
    with pytest.raises(DefinitenessFailure):
        energy_norm(np.diag([1.0, -2.0]), np.array([0.0, 1.0]))
    with pytest.raises(InvalidArgument):
        energy_norm(np.eye(3), np.ones(2))


def test_condition_number_examples():
    assert condition_number(np.eye(5)) == 1.0
    g = make_grid(255)
    rs = project_system(assemble_operator(g, one), np.zeros(g.N), build_basis(g, 2, "mass"))
    ratio = discrete_eigenvalue(2, 2, g.h) / discrete_eigenvalue(1, 1, g.h)
    assert condition_number(rs.A_LL) == pytest.approx(ratio, rel=1e-12)
    assert ratio == pytest.approx(4.0, rel=1e-4)
    with pytest.raises(DefinitenessFailure):
        condition_number(np.diag([0.0, 1.0]))


def test_condition_number_example1_m256(case):
    c = case("example1", 256)
    rs = project_system(c.A, c.F, build_basis(c.grid, 8, "mass"))
    assert condition_number(rs.A_LL) == pytest.approx(66.8, rel=0.10)


def test_condition_mesh_independent_and_growing_in_K(case):
    conds = []
    for m in (63, 127, 255):
        c = case("example1", m)
        conds.append(condition_number(project_system(c.A, c.F, build_basis(c.grid, 8, "mass")).A_LL))
    assert (max(conds) - min(conds)) / min(conds) < 0.05
    c = case("example1", 63)
    byM = [condition_number(project_system(c.A, c.F, build_basis(c.grid, M, "mass")).A_LL)
           for M in (2, 4, 8, 12)]
    assert all(a < b for a, b in zip(byM, byM[1:]))


@pytest.mark.parametrize("name", ["example1", "example2", "laplace"])
def test_galerkin_orthogonality_and_best_approximation(case, name, rng):
    c = case(name, 63)
    u_fd = solve_direct(c.A, c.F).solution
    for M in (2, 5, 8):
        sol = reduced_solve(c.grid, c.A, c.F, M)
        assert galerkin_residual(c.A, c.F, sol.system.basis, sol.u) <= 1e-9
        assert best_approximation_margin(c.A, sol.system.basis, u_fd, sol.z, rng) >= -1e-12


def test_best_approximation_tiny_perturbations(case, rng):
    # second-order energy growth should still be visible above round-off
    c = case("example2", 31)
    u_fd = solve_direct(c.A, c.F).solution
    sol = reduced_solve(c.grid, c.A, c.F, 6)
    base = energy_norm(c.A, u_fd - sol.u)
    for s in (1e-6, 1e-4, 1e-2):
        w = sol.z + s * rng.standard_normal(sol.z.shape)
        assert energy_norm(c.A, u_fd - sol.system.basis.B @ w) >= base - 1e-12


@pytest.mark.parametrize("name", ["example1", "example2"])
def test_full_basis_exactness_dense(name):
    # K = N is small enough here to form the dense reduced system
    prob = manufactured_problem(name)
    g = make_grid(15)
    A = assemble_operator(g, prob.kappa)
    F = assemble_rhs(g, prob.f)
    u_fd = solve_direct(A, F).solution
    dense = reduced_solve(g, A, F, g.m)
    assert np.max(np.abs(dense.u - u_fd)) <= 1e-9 * np.max(np.abs(u_fd))
    fast = solve_full_basis(g, A, F)
    assert np.max(np.abs(fast.u - u_fd)) <= 1e-9 * np.max(np.abs(u_fd))
    assert np.allclose(fast.z, dst_coeffs(g, dense), rtol=1e-8, atol=1e-12)


def dst_coeffs(g, sol):
    # dense solution coefficients in the mass basis map to raw coefficients by the factor 2
    return 2.0 * sol.z


def test_full_basis_exactness_large(case):
    c = case("example1", 255)
    u_fd = solve_direct(c.A, c.F).solution
    u = solve_full_basis(c.grid, c.A, c.F).u
    assert np.max(np.abs(u - u_fd)) <= 1e-9 * np.max(np.abs(u_fd))


def test_projector_idempotence(case):
    c = case("example2", 31)
    sol = reduced_solve(c.grid, c.A, c.F, 7)
    b = sol.system.basis
    # re-project the lifted solution onto V_M (mass inner product)
    z2 = c.grid.h ** 2 * (b.B.T @ sol.u)
    assert np.max(np.abs(z2 - sol.z)) <= 1e-12 * np.max(np.abs(sol.z))
    # and solving with F replaced by A u_RD returns the same z
    again = reduced_solve(c.grid, c.A, c.A @ sol.u, 7, basis=b)
    assert np.max(np.abs(again.z - sol.z)) <= 1e-12 * np.max(np.abs(sol.z))


def test_timings_recorded(case):
    c = case("example1", 31)
    t = reduced_solve(c.grid, c.A, c.F, 4).timings
    assert set(t) == {"basis", "project", "solve", "lift", "total"}
    assert t["total"] >= t["project"] >= 0


@settings(max_examples=20, deadline=None)
@given(m=st.integers(3, 24), M=st.integers(1, 3), amp=st.floats(-0.9, 0.9),
       fx=st.integers(1, 6), seed=st.integers(0, 2 ** 32 - 1))
def test_galerkin_properties_random_coefficients(m, M, amp, fx, seed):
    g = make_grid(m)
    kappa = lambda x, y: 1 + amp * np.sin(fx * np.pi * x) * np.cos(np.pi * y)  # noqa: E731
    A = assemble_operator(g, kappa)
    F = np.random.default_rng(seed).standard_normal(g.N)
    sol = reduced_solve(g, A, F, M)
    assert galerkin_residual(A, F, sol.system.basis, sol.u) <= 1e-9
    # u_RD is the A-orthogonal projection of u_FD: energy Pythagoras
    u_fd = scipy.linalg.solve(A.toarray(), F, assume_a="pos")
    e2 = energy_norm(A, u_fd) ** 2
    assert energy_norm(A, sol.u) ** 2 + energy_norm(A, u_fd - sol.u) ** 2 == pytest.approx(e2, rel=1e-9)
