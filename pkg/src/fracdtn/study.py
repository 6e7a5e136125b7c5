"""Convergence studies of the Galerkin DtN map against the spectral oracle.

Configuration is a flat text file, one ``section.key = value`` per line,
``#`` starting a comment.  Lists are comma separated.  Recognised keys and
their defaults (``auto`` means "derived from the operator and s"):

    operator.spec        = builtin:scaled_laplacian_1d:n=32   (required)
    study.s              = 0.25, 0.5, 0.75                    (required, non-empty)
    study.N              = 64, 128, 256, 512
    study.seed           = 0
    mesh.T               = auto        # 10 / sqrt(H-coercivity)
    mesh.gamma           = auto        # max(1, 1.5 / s)
    quadrature.substitution = DoubleExponential
    quadrature.x_min     = -700
    quadrature.x_max     = 60
    quadrature.nodes     = 400
    vertex0.schedule     = 10, 100, 1000, 10000

Every resolved value is echoed as a ``#`` comment block ahead of the table.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dtn import ExtensionSystem
from .errors import ConfigError
from .extension import ExtensionParams, c_s, poisson_apply_grid
from .io import ingest_operator
from .operator import SpaceTag, weighted_norm
from .quadrature import QuadratureRule
from .semigroup import frac_power_spectral
from .sectorial import DEFAULT_SCHEDULE
from .sobolev import GradedMesh, default_T, default_gamma

__all__ = [
    "StudyConfig",
    "StudyResult",
    "parse_config",
    "resolve_config",
    "run_convergence_study",
    "emit_profile",
    "COLUMNS",
]

COLUMNS = ("s", "N", "T", "gamma", "error_spectral", "error_bessel", "rate")

_DEFAULTS = {
    "operator.spec": None,
    "study.s": None,
    "study.N": "64, 128, 256, 512",
    "study.seed": "0",
    "mesh.T": "auto",
    "mesh.gamma": "auto",
    "quadrature.substitution": "DoubleExponential",
    "quadrature.x_min": "-700",
    "quadrature.x_max": "60",
    "quadrature.nodes": "400",
    "vertex0.schedule": ", ".join(str(n) for n in DEFAULT_SCHEDULE),
}


def parse_config(text: str) -> dict:
    """``section.key = value`` lines into a dict; duplicate or malformed lines are errors."""
    out, bad = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq or "." not in key or not key.replace(".", "").replace("_", "").isalnum():
            bad.append(f"line {lineno}: expected 'section.key = value', got {raw.strip()!r}")
            continue
        if key in out:
            bad.append(f"line {lineno}: duplicate key {key!r}")
            continue
        out[key] = val.strip()
    if bad:
        raise ConfigError("malformed configuration:\n  " + "\n  ".join(bad))
    return out


@dataclass(frozen=True)
class StudyConfig:
    operator: str
    s_values: tuple
    N_values: tuple
    seed: int = 0
    T: float | None = None
    gamma: float | None = None
    substitution: str = "DoubleExponential"
    x_min: float = -700.0
    x_max: float = 60.0
    nodes: int = 400
    schedule: tuple = DEFAULT_SCHEDULE

    def rule(self) -> QuadratureRule:
        return QuadratureRule.build(self.substitution, x_min=self.x_min, x_max=self.x_max, nodes=self.nodes)


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _auto(text, conv):
    return None if text.strip().lower() == "auto" else conv(text)


def resolve_config(cfg) -> StudyConfig:
    """Validate a parsed dict (or config text) against the schema, applying defaults."""
    if isinstance(cfg, StudyConfig):
        return cfg
    if isinstance(cfg, str):
        cfg = parse_config(cfg)
    unknown = sorted(set(cfg) - set(_DEFAULTS))
    missing = sorted(k for k, v in _DEFAULTS.items() if v is None and not str(cfg.get(k, "")).strip())
    problems = [f"unknown key {k!r}" for k in unknown] + [f"missing required key {k!r}" for k in missing]
    if problems:
        raise ConfigError("configuration errors: " + "; ".join(problems))
    merged = {k: str(cfg.get(k, v)) for k, v in _DEFAULTS.items()}
    converters = {
        "study.s": _floats, "study.N": _ints, "study.seed": int,
        "mesh.T": lambda t: _auto(t, float), "mesh.gamma": lambda t: _auto(t, float),
        "quadrature.x_min": float, "quadrature.x_max": float, "quadrature.nodes": int,
        "vertex0.schedule": _ints,
    }
    vals, bad = {}, []
    for key, conv in converters.items():
        try:
            vals[key] = conv(merged[key])
        except ValueError:
            bad.append(key)
    if bad:
        raise ConfigError("unparsable values for keys: " + ", ".join(bad))
    s_vals, N_vals = vals["study.s"], vals["study.N"]
    if not s_vals:
        raise ConfigError("study.s is empty; list at least one s in (0, 1)")
    if any(not 0 < s < 1 for s in s_vals):
        raise ConfigError("study.s entries must lie in (0, 1)")
    if not N_vals or any(n < 1 for n in N_vals):
        raise ConfigError("study.N must list positive cell counts")
    return StudyConfig(
        operator=merged["operator.spec"],
        s_values=tuple(sorted(set(s_vals))),
        N_values=tuple(sorted(set(N_vals))),
        seed=vals["study.seed"],
        T=vals["mesh.T"], gamma=vals["mesh.gamma"],
        substitution=merged["quadrature.substitution"],
        x_min=vals["quadrature.x_min"], x_max=vals["quadrature.x_max"], nodes=vals["quadrature.nodes"],
        schedule=vals["vertex0.schedule"],
    )


@dataclass
class StudyResult:
    config: StudyConfig
    rows: list
    resolved: dict
    timings: list = field(default_factory=list)

    def header_lines(self):
        return [f"# {k} = {v}" for k, v in self.resolved.items()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(line + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow(["" if v is None else repr(v) for v in (row[c] for c in COLUMNS)])
        return buf.getvalue()


def _rate(e0, e1, n0, n1):
    if not (e0 > 0 and e1 > 0):
        return None
    return math.log(e0 / e1) / math.log(n1 / n0)


def run_convergence_study(config) -> StudyResult:
    """One row per ``(s, N)``: DtN error against ``c_s A**s``, nodal error against ``U(t) A**s x``.

    ``error_spectral`` is the relative Frobenius error of the discrete DtN
    matrix; ``error_bessel`` is ``max_j |u(t_j) - U(t_j) A**s x|_H / |x|_H``
    for one seeded random trace ``x`` (for a 1x1 operator ``U(t) A**s`` is
    the Bessel profile).  On fine meshes ``error_bessel`` levels off at the
    truncation error ``|U(T) A**s x|``, since the discrete solution vanishes
    at ``T``.  ``rate`` is ``log(e_N / e_N') / log(N'/N)`` towards
    the next N of the ladder, i.e. ``log2(e_N / e_2N)`` on a doubling ladder.
    """
    if isinstance(config, (str, Path)) and Path(str(config)).is_file():
        config = Path(str(config)).read_text()
    cfg = resolve_config(config)
    timings = []

    t0 = time.perf_counter()
    A, model = ingest_operator(cfg.operator)
    timings.append(("certify", time.perf_counter() - t0))

    t0 = time.perf_counter()
    rule = cfg.rule()
    timings.append(("quadrature", time.perf_counter() - t0))

    rng = np.random.default_rng(cfg.seed)
    x = rng.standard_normal(A.n)
    if not np.all(A.matrix.imag == 0):
        x = x + 1j * rng.standard_normal(A.n)
    xnorm = float(weighted_norm(x, SpaceTag.H, model))
    eye = np.eye(A.n)

    rows = []
    t_oracle = t_solve = 0.0
    for s in cfg.s_values:
        t0 = time.perf_counter()
        ref = c_s(s) * frac_power_spectral(A, s, eye)
        ax = frac_power_spectral(A, s, x)
        t_oracle += time.perf_counter() - t0
        errs = []
        for N in cfg.N_values:
            mesh = GradedMesh.for_operator(A, s, N, T=cfg.T, gamma=cfg.gamma)
            t0 = time.perf_counter()
            sys = ExtensionSystem(A, s, mesh)
            D = sys.dtn()
            u = sys.dirichlet_nodes(x)[:, :, 0]
            t_solve += time.perf_counter() - t0
            t0 = time.perf_counter()
            U = poisson_apply_grid(A, ExtensionParams(s, rule), mesh.nodes, ax)
            t_oracle += time.perf_counter() - t0
            e_spec = float(np.linalg.norm(D - ref) / np.linalg.norm(ref))
            e_bes = float(weighted_norm((u - U).T, SpaceTag.H, model).max() / xnorm)
            errs.append(e_spec)
            rows.append(dict(s=float(s), N=int(N), T=float(mesh.T), gamma=float(mesh.gamma),
                             error_spectral=e_spec, error_bessel=e_bes, rate=None))
        base = len(rows) - len(cfg.N_values)
        for k in range(len(cfg.N_values) - 1):
            rows[base + k]["rate"] = _rate(errs[k], errs[k + 1], cfg.N_values[k], cfg.N_values[k + 1])
    timings.append(("oracle", t_oracle))
    timings.append(("galerkin", t_solve))

    rows.sort(key=lambda r: (r["s"], r["N"]))
    resolved = {
        "operator.spec": cfg.operator,
        "operator.n": A.n,
        "operator.M": repr(A.M),
        "operator.mu": repr(A.mu),
        "operator.theta": repr(A.theta),
        "study.s": ", ".join(repr(s) for s in cfg.s_values),
        "study.N": ", ".join(str(n) for n in cfg.N_values),
        "study.seed": cfg.seed,
        "mesh.T": "auto (%r)" % default_T(A) if cfg.T is None else repr(cfg.T),
        "mesh.gamma": "auto (" + ", ".join("s=%r: %r" % (s, default_gamma(s)) for s in cfg.s_values) + ")"
        if cfg.gamma is None else repr(cfg.gamma),
        "quadrature.substitution": cfg.substitution,
        "quadrature.x_min": repr(cfg.x_min),
        "quadrature.x_max": repr(cfg.x_max),
        "quadrature.nodes": cfg.nodes,
        "vertex0.schedule": ", ".join(str(n) for n in cfg.schedule),
    }
    return StudyResult(cfg, rows, resolved, timings)


def emit_profile(timings) -> str:
    """``stage,seconds`` CSV; an empty timing set gives the header alone."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "seconds"])
    items = timings.items() if isinstance(timings, dict) else timings
    for stage, secs in items:
        w.writerow([stage, "%.6f" % secs])
    return buf.getvalue()
