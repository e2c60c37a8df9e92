"""Experiment drivers that regenerate the convergence, mode-sweep,
conditioning, solver-comparison and Schur-decay tables."""

import contextlib
import datetime
import math
from pathlib import Path

import numpy as np

from .. import __version__
from ..assembly import assemble_operator, assemble_rhs, manufactured_problem
from ..baselines import solve_cg, solve_deflated_cg, solve_direct
from ..errors import ConsistencyFailure, ConvergenceFailure, GridIncompatible, LowModeError
from ..grid import discrete_l2_norm, make_grid, sample_field
from ..multigrid import build_mg_hierarchy, mg_preconditioned_cg
from ..reduced import condition_number, energy_norm, project_system, reduced_solve, solve_full_basis
from ..schur import reduced_vs_schur_solution, schur_decay_report, transform_full
from ..spectral import build_basis
from ..timing import fit_exponent, median_time
from .config import RunConfig
from .tables import PlotSpec, ResultTable, emit_csv, emit_plot

__all__ = [
    "ConsistencyFailure",
    "run_convergence",
    "run_mode_sweep",
    "run_conditioning",
    "run_solver_comparison",
    "run_schur_decay",
    "run_experiment",
    "galerkin_residual",
    "best_approximation_margin",
]

SPEEDUP_DEFINITION = (
    "speedup = median direct time (band setup + factorization + solve, assembly excluded) / "
    "median reduced time (basis build + projection + dense solve + lift)"
)
N_COMPETITORS = 100


def _provenance(config: RunConfig) -> dict:
    return {
        "config_hash": config.hash(),
        "config": config.to_dict(),
        "code_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


@contextlib.contextmanager
def _keep_partial(table):
    """Attach the rows gathered so far to any package error raised inside."""
    try:
        yield
    except LowModeError as exc:
        exc.partial_table = table
        raise


def _setup(problem_name, m, averaging="midpoint"):
    prob = manufactured_problem(problem_name)
    grid = make_grid(m)
    A = assemble_operator(grid, prob.kappa, averaging)
    F = assemble_rhs(grid, prob.f)
    u = sample_field(grid, prob.u_exact)
    return prob, grid, A, F, u


def galerkin_residual(A, F, basis, u_rd) -> float:
    """``||B.T (F - A u_RD)||_inf / ||B.T F||_inf``."""
    B = basis.B
    num = np.max(np.abs(B.T @ (F - A @ u_rd)))
    den = np.max(np.abs(B.T @ F))
    return float(num / den) if den > 0 else float(num)


def best_approximation_margin(A, basis, u_fd, z, rng, n: int = N_COMPETITORS) -> float:
    """Smallest ``||u_FD - B w||_A - ||u_FD - B z||_A`` over random competitors ``w``.

    Competitors perturb ``z`` at relative sizes from ``1e-3`` to ``1``; a
    negative result would mean some competitor beat the Galerkin solution.
    """
    base = energy_norm(A, u_fd - basis.B @ z)
    zscale = float(np.max(np.abs(z))) or 1.0
    sizes = np.logspace(-3, 0, n) * zscale
    margins = []
    for s in sizes:
        w = z + s * rng.standard_normal(z.shape)
        margins.append(energy_norm(A, u_fd - basis.B @ w) - base)
    return float(min(margins))


def _order(e_prev, e, h_prev, h):
    return math.log(e_prev / e) / math.log(h_prev / h)


def run_convergence(config: RunConfig) -> ResultTable:
    """FD and reduced L2 errors, observed orders and speed-up per grid."""
    cols = ["problem", "m", "h", "N", "M", "K", "err_fd", "err_rd", "rel_diff", "order_fd",
            "order_rd", "galerkin_residual", "best_approx_margin", "t_direct", "t_reduced", "speedup"]
    table = ResultTable("convergence", cols, provenance=_provenance(config),
                        timing_columns=("t_direct", "t_reduced", "speedup"),
                        notes={"speedup_definition": SPEEDUP_DEFINITION})
    rng = np.random.default_rng(config.seed)
    prev = {}
    with _keep_partial(table):
        for m in config.grids:
            _, grid, A, F, u_exact = _setup(config.problem, m, config.averaging)
            t_dir, direct = median_time(lambda: solve_direct(A, F, config.direct_method), config.repetitions)
            u_fd = direct.solution
            err_fd = discrete_l2_norm(grid, u_fd - u_exact)
            for M in config.cutoffs:
                t_red, red = median_time(
                    lambda: (lambda r: (r, r.timings["total"]))(reduced_solve(grid, A, F, M)),
                    config.repetitions,
                )
                basis = red.system.basis
                err_rd = discrete_l2_norm(grid, red.u - u_exact)
                order_fd = order_rd = None
                if M in prev:
                    pe_fd, pe_rd, ph = prev[M]
                    order_fd = _order(pe_fd, err_fd, ph, grid.h)
                    order_rd = _order(pe_rd, err_rd, ph, grid.h)
                prev[M] = (err_fd, err_rd, grid.h)
                table.add(
                    problem=config.problem, m=m, h=grid.h, N=grid.N, M=M, K=M * M,
                    err_fd=err_fd, err_rd=err_rd, rel_diff=abs(err_fd - err_rd) / err_fd,
                    order_fd=order_fd, order_rd=order_rd,
                    galerkin_residual=galerkin_residual(A, F, basis, red.u),
                    best_approx_margin=best_approximation_margin(A, basis, u_fd, red.z, rng),
                    t_direct=t_dir, t_reduced=t_red, speedup=t_dir / t_red,
                )
    for M in config.cutoffs:
        sub = table.where(M=M)
        if len(sub) >= 2:
            table.notes[f"exponent_direct_M{M}"] = fit_exponent(sub.column("N"), sub.column("t_direct"))
            table.notes[f"exponent_reduced_M{M}"] = fit_exponent(sub.column("N"), sub.column("t_reduced"))
    return table


def run_mode_sweep(config: RunConfig) -> ResultTable:
    """Total and reduction error against the cutoff on one fixed grid.

    The reference ``C sqrt(log M)/M`` is anchored at the smallest cutoff
    (which must be >= 2).  A final ``M = m`` row uses the full sine basis
    through :func:`~lowmode.reduced.solve_full_basis`.
    """
    m = config.grids[0]
    cols = ["problem", "m", "M", "K", "route", "err_total", "err_reduction",
            "ref_total", "ref_reduction"]
    table = ResultTable("mode-sweep", cols, provenance=_provenance(config))
    _, grid, A, F, u_exact = _setup(config.problem, m, config.averaging)
    u_fd = solve_direct(A, F, config.direct_method).solution
    cutoffs = sorted(config.cutoffs)
    M1 = cutoffs[0]
    if M1 < 2:
        raise GridIncompatible("the sqrt(log M)/M reference needs the smallest cutoff >= 2")
    c_tot = c_red = None
    with _keep_partial(table):
        for M in cutoffs:
            red = reduced_solve(grid, A, F, M)
            e_tot = discrete_l2_norm(grid, u_exact - red.u)
            e_red = discrete_l2_norm(grid, u_fd - red.u)
            if c_tot is None:
                c_tot = e_tot / (math.sqrt(math.log(M1)) / M1)
                c_red = e_red / (math.sqrt(math.log(M1)) / M1)
            rate = math.sqrt(math.log(M)) / M
            table.add(problem=config.problem, m=m, M=M, K=M * M, route="dense", err_total=e_tot,
                      err_reduction=e_red, ref_total=c_tot * rate, ref_reduction=c_red * rate)

    with _keep_partial(table):
        mf = config.full_basis_m or m
        if mf == m:
            gf, Af, Ff, uf_exact, uf_fd = grid, A, F, u_exact, u_fd
        else:
            _, gf, Af, Ff, uf_exact = _setup(config.problem, mf, config.averaging)
            uf_fd = solve_direct(Af, Ff, config.direct_method).solution
        full = solve_full_basis(gf, Af, Ff, lambda A_, b: solve_direct(A_, b, config.direct_method).solution)
        rate = math.sqrt(math.log(mf)) / mf
        table.add(problem=config.problem, m=mf, M=mf, K=mf * mf, route="full-basis",
                  err_total=discrete_l2_norm(gf, uf_exact - full.u),
                  err_reduction=discrete_l2_norm(gf, uf_fd - full.u),
                  ref_total=c_tot * rate, ref_reduction=c_red * rate)
    return table


def run_conditioning(config: RunConfig) -> ResultTable:
    """Condition numbers of the mass-orthonormal reduced operator.

    Runs the configured coefficient and, for the record, the other
    manufactured coefficient.  The ``mesh`` block repeats ``M = 8`` (or the
    middle cutoff) on ``config.mesh_grids``.
    """
    cols = ["block", "problem", "m", "M", "K", "cond_interp", "cond_proj", "cond_rel_diff", "l2_error"]
    table = ResultTable("conditioning", cols, provenance=_provenance(config))
    problems = [config.problem] + [p for p in ("example1", "example2") if p != config.problem]
    M_mesh = 8 if 8 in config.cutoffs else sorted(config.cutoffs)[len(config.cutoffs) // 2]

    def row(block, name, m, M):
        _, grid, A, F, u_exact = _setup(name, m, config.averaging)
        interp = build_basis(grid, M, "mass", "interp")
        proj = build_basis(grid, M, "mass", "proj")
        red = reduced_solve(grid, A, F, M, basis=interp)
        c_i = condition_number(red.system.A_LL)
        c_p = condition_number(project_system(A, F, proj).A_LL)
        table.add(block=block, problem=name, m=m, M=M, K=M * M, cond_interp=c_i, cond_proj=c_p,
                  cond_rel_diff=abs(c_i - c_p) / c_i,
                  l2_error=discrete_l2_norm(grid, red.u - u_exact))

    with _keep_partial(table):
        for name in problems:
            for M in config.cutoffs:
                row("sweep", name, config.grids[0], M)
            for m in config.mesh_grids:
                row("mesh", name, m, M_mesh)
    return table


def run_solver_comparison(config: RunConfig) -> ResultTable:
    """Direct, reduced, MG-preconditioned CG, plain CG and deflated CG per grid.

    Full-system solvers must agree pairwise to ``1e-6`` relative (max norm);
    a disagreement raises :class:`ConsistencyFailure`.  The reduced solution
    is a different approximation and its distance is only recorded.
    ``mg_it_laplace`` repeats the MG-PCG solve with a unit coefficient.
    """
    cols = ["problem", "m", "N", "M", "t_direct", "t_reduced", "t_mg", "mg_it", "t_cg", "cg_it",
            "t_deflated", "deflated_it", "mg_it_laplace", "max_pairwise_diff", "reduced_diff",
            "speedup", "status"]
    table = ResultTable("compare-solvers", cols, provenance=_provenance(config),
                        timing_columns=("t_direct", "t_reduced", "t_mg", "t_cg", "t_deflated", "speedup"),
                        notes={"speedup_definition": SPEEDUP_DEFINITION})
    M = config.cutoffs[0]
    reps = config.repetitions
    with _keep_partial(table):
        for m in config.grids:
            prob, grid, A, F, _ = _setup(config.problem, m, config.averaging)
            status = []
            t_dir, direct = median_time(lambda: solve_direct(A, F, config.direct_method), reps)
            t_red, red = median_time(
                lambda: (lambda r: (r, r.timings["total"]))(reduced_solve(grid, A, F, M)), reps)

            def mg_run(A=A, F=F, kappa=prob.kappa):
                hier = build_mg_hierarchy(grid, kappa, averaging=config.averaging)
                return mg_preconditioned_cg(A, F, hier, config.tol, config.max_iter)

            sols = {"direct": direct.solution}
            iters = {}
            times = {}
            for key, fn in (
                ("mg", mg_run),
                ("cg", lambda: solve_cg(A, F, config.tol, config.max_iter)),
                ("deflated", lambda: solve_deflated_cg(A, F, build_basis(grid, M, "mass"),
                                                       config.tol, config.max_iter)),
            ):
                try:
                    t, rep = median_time(fn, reps if key != "cg" else 1)
                    sols[key], iters[key], times[key] = rep.solution, rep.iterations, t
                except ConvergenceFailure as exc:
                    status.append(f"{key}:no-convergence")
                    iters[key], times[key] = exc.report.iterations if exc.report else -1, float("inf")

            lap = manufactured_problem("laplace")
            try:
                lap_rep = mg_preconditioned_cg(
                    assemble_operator(grid, lap.kappa), assemble_rhs(grid, lap.f),
                    build_mg_hierarchy(grid, lap.kappa), config.tol, config.max_iter)
                mg_lap = lap_rep.iterations
            except ConvergenceFailure:
                status.append("mg-laplace:no-convergence")
                mg_lap = -1

            unorm = float(np.max(np.abs(direct.solution)))
            keys = list(sols)
            pair = max(
                (float(np.max(np.abs(sols[a] - sols[b]))) / unorm
                 for i, a in enumerate(keys) for b in keys[i + 1:]),
                default=0.0,
            )
            if pair > 1e-6:
                raise ConsistencyFailure(f"full-system solvers disagree by {pair:.3e} on m={m}")
            table.add(
                problem=config.problem, m=m, N=grid.N, M=M, t_direct=t_dir, t_reduced=t_red,
                t_mg=times["mg"], mg_it=iters["mg"], t_cg=times["cg"], cg_it=iters["cg"],
                t_deflated=times["deflated"], deflated_it=iters["deflated"], mg_it_laplace=mg_lap,
                max_pairwise_diff=pair,
                reduced_diff=float(np.max(np.abs(red.u - direct.solution))) / unorm,
                speedup=t_dir / t_red, status=";".join(status) or "ok",
            )
    return table


def run_schur_decay(config: RunConfig) -> ResultTable:
    """Coupling norms, Schur gaps and the condensation error per cutoff.

    Runs the configured coefficient and the constant coefficient
    (``laplace``), for which every coupling quantity must vanish.
    """
    m = config.grids[0]
    cols = ["problem", "m", "M", "lambda_next", "coupling_norm", "alpha_H", "gap", "bound_rhs",
            "bound_holds", "diff_energy"]
    table = ResultTable("schur-decay", cols, provenance=_provenance(config))
    names = [config.problem] + (["laplace"] if config.problem != "laplace" else [])
    with _keep_partial(table):
        for name in names:
            _, grid, A, F, _ = _setup(name, m, config.averaging)
            blocked = transform_full(A, grid)
            report = schur_decay_report(A, grid, config.cutoffs, blocked=blocked)
            for r in report.rows:
                _, _, diff = reduced_vs_schur_solution(blocked, A, F, r.M)
                table.add(problem=name, m=m, M=r.M, lambda_next=r.lambda_next,
                          coupling_norm=r.coupling_norm, alpha_H=r.alpha_H, gap=r.gap,
                          bound_rhs=r.bound_rhs, bound_holds=bool(r.gap <= r.bound_rhs + 1e-8),
                          diff_energy=diff)
            table.notes[f"slope_{name}"] = report.slope
    return table


RUNNERS = {
    "convergence": run_convergence,
    "mode-sweep": run_mode_sweep,
    "conditioning": run_conditioning,
    "compare-solvers": run_solver_comparison,
    "schur-decay": run_schur_decay,
}

PLOTS = {
    "convergence": PlotSpec("h", ["err_fd", "err_rd"], "grid spacing h", "L2 error",
                            "L2 error convergence", labels=["finite difference", "reduced"],
                            guide=(2.0, "slope 2"), group="M"),
    "mode-sweep": PlotSpec("M", ["err_total", "err_reduction", "ref_total"], "spectral cutoff M",
                           "L2 error", "Error versus spectral cutoff",
                           labels=["||u - u_RD||", "||u_FD - u_RD||", "C sqrt(log M)/M"]),
    "conditioning": PlotSpec("K", ["cond_interp", "cond_proj"], "reduced dimension K",
                             "condition number", "Conditioning of the reduced operator",
                             labels=["interp", "proj"], group="problem"),
    "compare-solvers": PlotSpec("N", ["t_direct", "t_reduced", "t_mg", "t_deflated"], "unknowns N",
                                "wall time [s]", "Solver runtimes",
                                labels=["direct", "reduced", "MG-PCG", "deflated CG"],
                                guide=(1.0, "slope 1")),
    "schur-decay": PlotSpec("lambda_next", ["coupling_norm", "gap"], "lambda_{M+1,M+1}",
                            "norm", "Low/high coupling and Schur gap",
                            labels=["||A_LH||", "||S - A_LL||"], group="problem"),
}


def run_experiment(config: RunConfig, write: bool = True):
    """Run the configured experiment; optionally write CSV, JSON and SVG outputs.

    Returns ``(table, paths)``.  If a runner fails, the rows completed so far
    are written to ``<name>.partial.csv`` before the error propagates.
    """
    out = Path(config.out_dir)
    stem = config.experiment.replace("-", "_")
    try:
        table = RUNNERS[config.experiment](config)
    except LowModeError as exc:
        partial = getattr(exc, "partial_table", None)
        if write and partial is not None:
            exc.partial_path = emit_csv(partial, out / f"{stem}.partial.csv")
        raise
    paths = []
    if write:
        paths.append(emit_csv(table, out / f"{stem}.csv"))
        paths.append(out / f"{stem}.json")
        if len(table):
            paths.append(emit_plot(table, PLOTS[config.experiment], out / f"{stem}.svg"))
    return table, paths
