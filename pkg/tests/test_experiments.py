import json
import math

import numpy as np
import pytest

from lowmode import ConsistencyFailure, InvalidArgument
from lowmode.cli import main
from lowmode.experiments import (
    OUT_ENV,
    PlotSpec,
    ResultTable,
    emit_csv,
    emit_plot,
    load_config,
    make_config,
    parse_config_text,
    read_csv,
    run_conditioning,
    run_convergence,
    run_experiment,
    run_mode_sweep,
    run_schur_decay,
    run_solver_comparison,
)
from lowmode.experiments import runners


def small(experiment, **kw):
    kw.setdefault("repetitions", 1)
    return make_config(experiment, kw)


def test_csv_roundtrip(tmp_path):
    t = ResultTable("x", ["name", "m", "err", "flag", "order"])
    t.add(name='a,"b"', m=7, err=1 / 3, flag=True, order=None)
    t.add(name="plain", m=2 ** 40, err=-2.5e-300, flag=False, order=math.pi)
    path = emit_csv(t, tmp_path / "t.csv")
    back = read_csv(path)
    assert back.columns == t.columns
    assert back.rows == t.rows
    raw = path.read_bytes()
    assert raw.count(b"\r\n") == 3
    assert b'"a,""b"""' in raw


def test_csv_float_format(tmp_path):
    t = ResultTable("x", ["v"])
    t.add(v=0.1)
    text = emit_csv(t, tmp_path / "v.csv").read_text()
    assert text.splitlines()[1] == "1.0000000000000001e-01"


def test_empty_table_header_only(tmp_path):
    t = ResultTable("x", ["a", "b"])
    path = emit_csv(t, tmp_path / "e.csv")
    assert path.read_bytes() == b"a,b\r\n"
    assert read_csv(path).rows == []


def test_schema_enforced():
    t = ResultTable("x", ["a"])
    with pytest.raises(ValueError):
        t.add(b=1)


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit_csv(ResultTable("x", ["a"]), blocker / "sub" / "t.csv")


def test_plot_has_labels_and_guide(tmp_path):
    t = ResultTable("convergence", ["h", "err"])
    for h in (1 / 16, 1 / 32, 1 / 64):
        t.add(h=h, err=h * h)
    spec = PlotSpec("h", ["err"], "grid spacing h", "L2 error", guide=(2.0, "slope 2"))
    svg = emit_plot(t, spec, tmp_path / "p.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    assert 'version="1.1"' in svg
    for text in ("grid spacing h", "L2 error", "slope 2"):
        assert text in svg


def test_config_parsing(tmp_path):
    text = """
    # desk run
    experiment = convergence
    problem = example2
    grids = 31, 63
    cutoffs = 4
    tol = 1e-9   # inline comment
    paper_scale = false
    """
    d = parse_config_text(text)
    assert d["grids"] == (31, 63) and d["tol"] == 1e-9 and d["paper_scale"] is False
    p = tmp_path / "run.cfg"
    p.write_text(text)
    cfg = load_config(p, seed=5)
    assert cfg.experiment == "convergence" and cfg.seed == 5 and cfg.problem == "example2"
    with pytest.raises(InvalidArgument):
        load_config(p, experiment="mode-sweep")
    with pytest.raises(InvalidArgument):
        parse_config_text("bogus = 1")


@pytest.mark.parametrize("bad", [dict(grids=(0, 4)), dict(grids=(7,), cutoffs=(8,)), dict(repetitions=0)])
def test_config_invariants(bad):
    with pytest.raises(InvalidArgument):
        make_config("convergence", bad)


def test_config_hash_ignores_output_location():
    a = make_config("schur-decay", dict(out_dir="x"))
    b = make_config("schur-decay", dict(out_dir="y", threads=4))
    c = make_config("schur-decay", dict(seed=1))
    assert a.hash() == b.hash() != c.hash()


def test_paper_scale_and_env(monkeypatch):
    monkeypatch.setenv(OUT_ENV, "/tmp/elsewhere")
    cfg = make_config("convergence", paper_scale=True)
    assert cfg.out_dir == "/tmp/elsewhere"
    assert cfg.grids[-1] == 2048


def _non_timing(table):
    keep = [i for i, c in enumerate(table.columns) if c not in table.timing_columns]
    return [[r[i] for i in keep] for r in table.rows]


def test_convergence_small(tmp_path):
    cfg = small("convergence", grids=(15, 31, 63), cutoffs=(4,), out_dir=str(tmp_path), seed=3)
    t, paths = run_experiment(cfg)
    assert len(t) == 3 and not t.has_nan()
    assert t.rows[0][t.columns.index("order_fd")] is None
    orders = t.column("order_fd")[1:]
    assert all(1.8 < o < 2.2 for o in orders)
    assert all(v <= 1e-9 for v in t.column("galerkin_residual"))
    assert all(v >= -1e-12 for v in t.column("best_approx_margin"))
    meta = json.loads(paths[1].read_text())
    assert meta["provenance"]["config_hash"] == cfg.hash()
    assert "speedup" in meta["notes"]["speedup_definition"]
    assert paths[2].suffix == ".svg"
    # determinism of every non-timing cell
    again = run_convergence(cfg)
    assert _non_timing(again) == _non_timing(t)
    assert _non_timing(read_csv(paths[0])) == _non_timing(t)


def test_mode_sweep_small():
    t = run_mode_sweep(small("mode-sweep", grids=(31,), cutoffs=(2, 4, 8)))
    assert t.column("route") == ["dense"] * 3 + ["full-basis"]
    assert t.column("err_reduction")[-1] <= 1e-9
    ref = t.column("ref_total")
    assert ref[0] == t.column("err_total")[0]
    with pytest.raises(Exception):
        run_mode_sweep(small("mode-sweep", grids=(31,), cutoffs=(1, 2)))


def test_conditioning_small():
    t = run_conditioning(small("conditioning", grids=(32,), cutoffs=(2, 4), mesh_grids=(15, 31)))
    assert set(t.column("problem")) == {"example1", "example2"}
    assert t.column("block").count("mesh") == 4
    assert max(t.column("cond_rel_diff")) < 5e-7


def test_solver_comparison_small():
    t = run_solver_comparison(small("compare-solvers", grids=(15, 31), cutoffs=(4,)))
    assert t.column("status") == ["ok", "ok"]
    assert all(d < c for d, c in zip(t.column("deflated_it"), t.column("cg_it")))
    assert max(t.column("max_pairwise_diff")) <= 1e-6


def test_solver_comparison_records_divergence():
    cfg = small("compare-solvers", grids=(31,), cutoffs=(4,), max_iter=5)
    t = run_solver_comparison(cfg)
    assert "cg:no-convergence" in t.column("status")[0]
    assert t.column("t_cg")[0] == math.inf


def test_consistency_failure_is_loud(monkeypatch):
    real = runners.solve_cg

    def wrong(A, F, *a, **kw):
        rep = real(A, F, *a, **kw)
        rep.solution = rep.solution * 1.01
        return rep

    monkeypatch.setattr(runners, "solve_cg", wrong)
    with pytest.raises(ConsistencyFailure):
        run_solver_comparison(small("compare-solvers", grids=(15,), cutoffs=(2,)))


def test_schur_decay_small():
    t = run_schur_decay(small("schur-decay", grids=(15,), cutoffs=(2, 4)))
    lap = t.where(problem="laplace")
    assert max(lap.column("coupling_norm") + lap.column("gap")) <= 1e-10
    assert all(t.column("bound_holds"))
    with pytest.raises(Exception):
        run_schur_decay(small("schur-decay", grids=(127,), cutoffs=(2,)))


def test_partial_table_written_on_failure(tmp_path):
    from lowmode import GridIncompatible

    # m = 30 is not 2**l - 1, so the multigrid baseline fails on the second grid
    cfg = small("compare-solvers", grids=(15, 30), cutoffs=(2,), out_dir=str(tmp_path))
    with pytest.raises(GridIncompatible) as exc:
        run_experiment(cfg)
    assert len(exc.value.partial_table) == 1
    partial = read_csv(exc.value.partial_path)
    assert partial.column("m") == [15]


def test_cli_success_and_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["schur-decay", "--grids", "7", "--cutoffs", "2,3"]) == 0
    assert (tmp_path / "env" / "schur_decay.csv").exists()
    out = tmp_path / "flag"
    assert main(["schur-decay", "--grids", "7", "--cutoffs", "2", "--out", str(out), "--seed", "7"]) == 0
    assert (out / "schur_decay.svg").exists()
    # cutoff above the grid: configuration error
    assert main(["schur-decay", "--grids", "7", "--cutoffs", "9", "--out", str(out)]) == 2
    # oracle too large: feasibility
    assert main(["schur-decay", "--grids", "127", "--cutoffs", "2", "--out", str(out)]) == 5
    # multigrid needs 2**l - 1
    assert main(["compare-solvers", "--grids", "30", "--cutoffs", "2", "--out", str(out)]) == 5
    with pytest.raises(SystemExit) as exc:
        main(["schur-decay", "--seed", "-1"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "FeasibilityError" in err


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[run]\nexperiment = conditioning\ngrids = 16\ncutoffs = 2, 3\nmesh_grids = 7, 15\n")
    assert main(["conditioning", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    t = read_csv(tmp_path / "o" / "conditioning.csv")
    assert sorted(set(t.column("M"))) == [2, 3]
    assert np.all(np.array(t.column("cond_interp")) >= 1)
