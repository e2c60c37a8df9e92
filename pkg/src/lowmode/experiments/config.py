"""Run configuration and its key-value file format.

A config file is plain ``key = value`` lines (``#`` starts a comment); an
optional ``[run]`` section header is accepted.  Lists are comma separated::

    experiment = convergence
    problem = example1
    grids = 63, 127, 255, 511
    cutoffs = 8
    repetitions = 5

Recognized keys are the :class:`RunConfig` field names.
"""

import configparser
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidArgument

EXPERIMENTS = ("convergence", "mode-sweep", "conditioning", "compare-solvers", "schur-decay")
OUT_ENV = "LOWMODE_OUT"

# desk-scale defaults; PAPER_SCALE overrides only what differs
DEFAULTS = {
    "convergence": dict(problem="example1", grids=(63, 127, 255, 511), cutoffs=(8,)),
    "mode-sweep": dict(problem="example1", grids=(511,), cutoffs=(2, 4, 6, 8, 12, 16)),
    "conditioning": dict(problem="example1", grids=(256,), cutoffs=(2, 4, 6, 8, 12, 16),
                         mesh_grids=(63, 127, 255)),
    "compare-solvers": dict(problem="example2", grids=(31, 63, 127, 255), cutoffs=(8,)),
    "schur-decay": dict(problem="example1", grids=(31,), cutoffs=(2, 4, 8, 12)),
}

PAPER_SCALE = {
    "convergence": dict(grids=(128, 256, 512, 1024, 2048), direct_method="superlu"),
    "mode-sweep": dict(grids=(1024,), direct_method="superlu"),
    "conditioning": dict(grids=(256,)),
    "compare-solvers": dict(grids=(31, 63, 127, 255, 511)),
    "schur-decay": dict(grids=(63,), cutoffs=(2, 4, 8, 12, 16)),
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    problem: str = "example1"
    grids: tuple = ()
    cutoffs: tuple = (8,)
    mesh_grids: tuple = (63, 127, 255)
    tol: float = 1e-10
    max_iter: int = 20000
    repetitions: int = 5
    out_dir: str = "results"
    seed: int = 0
    threads: int = 1
    direct_method: str = "banded"
    averaging: str = "midpoint"
    full_basis_m: Optional[int] = None
    paper_scale: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if any(m < 1 for m in self.grids) or any(m < 1 for m in self.mesh_grids):
            raise InvalidArgument("all grid sizes must be >= 1")
        if self.grids and any(M > min(self.grids) for M in self.cutoffs):
            raise InvalidArgument(f"cutoffs {self.cutoffs} exceed the smallest grid {min(self.grids)}")
        if self.repetitions < 1:
            raise InvalidArgument("repetitions must be >= 1")
        if self.tol <= 0:
            raise InvalidArgument("tol must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        """SHA-256 of everything except where the output goes."""
        d = self.to_dict()
        d.pop("out_dir")
        d.pop("threads")
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()


_TUPLE_FIELDS = {"grids", "cutoffs", "mesh_grids"}


def _coerce(name, raw):
    ftype = {f.name: f.type for f in dataclasses.fields(RunConfig)}.get(name)
    if ftype is None:
        raise InvalidArgument(f"unknown config key {name!r}")
    raw = raw.strip()
    if name in _TUPLE_FIELDS:
        return tuple(int(x) for x in raw.replace(";", ",").split(",") if x.strip())
    if ftype in (int, "int"):
        return int(raw)
    if ftype in (float, "float"):
        return float(raw)
    if ftype in (bool, "bool"):
        return raw.lower() in ("1", "true", "yes", "on")
    if name == "full_basis_m":
        return None if raw.lower() in ("", "none") else int(raw)
    return raw


def parse_config_text(text: str) -> dict:
    if not any(line.strip().startswith("[") for line in text.splitlines()):
        text = "[run]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(text)
    if not cp.has_section("run"):
        raise InvalidArgument("config file needs a [run] section or no sections at all")
    return {k.replace("-", "_"): _coerce(k.replace("-", "_"), v) for k, v in cp.items("run")}


def make_config(experiment: str, overrides: Optional[dict] = None, paper_scale: bool = False) -> RunConfig:
    """Merge defaults, optional paper-scale sizes and explicit overrides."""
    if experiment not in EXPERIMENTS:
        raise InvalidArgument(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    values = dict(DEFAULTS[experiment])
    if paper_scale:
        values.update(PAPER_SCALE[experiment])
        values["paper_scale"] = True
    if os.environ.get(OUT_ENV):
        values["out_dir"] = os.environ[OUT_ENV]
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values["experiment"] = experiment
    return RunConfig(**values)


def load_config(path, experiment: Optional[str] = None, paper_scale: bool = False,
                **overrides) -> RunConfig:
    """Read a config file; file values override defaults, ``overrides`` override the file.

    A subcommand ``experiment`` that contradicts the file's ``experiment``
    key is an error.
    """
    with open(path) as fh:
        values = parse_config_text(fh.read())
    named = values.pop("experiment", None)
    if experiment and named and named != experiment:
        raise InvalidArgument(f"config is for {named!r}, not {experiment!r}")
    exp = experiment or named
    if exp is None:
        raise InvalidArgument("config does not name an experiment")
    paper_scale = paper_scale or bool(values.pop("paper_scale", False))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(exp, values, paper_scale=paper_scale)
