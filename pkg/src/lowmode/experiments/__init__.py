"""Experiment drivers, result tables and run configuration."""

from .config import EXPERIMENTS, OUT_ENV, RunConfig, load_config, make_config, parse_config_text
from .runners import (
    ConsistencyFailure,
    run_conditioning,
    run_convergence,
    run_experiment,
    run_mode_sweep,
    run_schur_decay,
    run_solver_comparison,
)
from .tables import PlotSpec, ResultTable, emit_csv, emit_plot, read_csv
