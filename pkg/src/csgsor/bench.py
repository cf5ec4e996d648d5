"""Reproduction harness: optimal-parameter table, iteration-count tables, spectra."""
from __future__ import annotations

import csv
import math
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .krylov import GmresConfig, block_operator, block_residual_fn, gmres_restart, gsor_preconditioned
from .linalg import estimate_rho
from .problems import EXAMPLES, ProblemSpec, build_problem
from .solvers import IterParams, gsor_solve, mhss_solve
from .theory import commuting_block_eigs, gsor_spectrum, optimal_alpha, s_eigenvalues

METHODS = ("MHSS", "GSOR", "GMRES", "GSOR_GMRES")
ALPHA_SOURCES = ("computed", "paper", "explicit")
GRID = (16, 32, 64, 128, 256, 512)

# Published optimal parameters, indexed [example][m].
PUBLISHED_ALPHA = {
    "GSOR": {
        1: dict(zip(GRID, (0.550, 0.495, 0.457, 0.432, 0.428, 0.412))),
        2: dict(zip(GRID, (0.455, 0.455, 0.455, 0.455, 0.455, 0.457))),
        3: dict(zip(GRID, (0.908, 0.776, 0.566, 0.353, 0.199, 0.105))),
        4: dict(zip(GRID, (0.862,) * 6)),
    },
    "MHSS": {
        1: dict(zip(GRID, (1.06, 0.75, 0.54, 0.40, 0.30, 0.21))),
        2: dict(zip(GRID, (0.21, 0.08, 0.04, 0.02, 0.01, 0.005))),
        3: dict(zip(GRID, (1.61, 1.01, 0.53, 0.26, 0.13, 0.07))),
        4: dict(zip(GRID, (0.37, 0.09, 0.021, 0.005, 0.002, 0.0005))),
    },
}


class ConfigError(ValueError):
    pass


def normalize_method(name: str) -> str:
    key = str(name).strip().upper().replace("-", "_")
    if key not in METHODS:
        raise ConfigError(f"unknown method {name!r}; expected one of gsor, mhss, gmres, gsor-gmres")
    return key


@dataclass
class BenchRow:
    example: int
    m: int
    method: str
    alpha_used: float
    iterations: int
    converged: bool
    final_residual: float
    wall_time_s: float = 0.0
    inner_iterations: int | None = None

    COLUMNS = ("example", "m", "method", "alpha", "iterations", "converged", "final_residual", "wall_time_s")

    def as_record(self) -> dict:
        return {
            "example": self.example,
            "m": self.m,
            "method": self.method,
            "alpha": _fmt_float(self.alpha_used),
            "iterations": self.iterations,
            "converged": str(self.converged).lower(),
            "final_residual": _fmt_float(self.final_residual),
            "wall_time_s": _fmt_float(self.wall_time_s),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "BenchRow":
        return cls(
            example=int(rec["example"]),
            m=int(rec["m"]),
            method=rec["method"],
            alpha_used=float(rec["alpha"]),
            iterations=int(rec["iterations"]),
            converged=rec["converged"].strip().lower() == "true",
            final_residual=float(rec["final_residual"]),
            wall_time_s=float(rec["wall_time_s"]),
        )


def _fmt_float(v: float) -> str:
    return repr(float(v))


@dataclass
class AlphaRow:
    example: int
    m: int
    rho: float
    alpha: float
    power_iterations: int
    published_alpha: float | None


def estimate_optimal_alpha(spec: ProblemSpec, tol: float = 1e-8, maxit: int = 1000):
    sys_, _ = build_problem(spec)
    est = estimate_rho(sys_.w_factor, sys_.T, tol, maxit)
    return est, optimal_alpha(est.rho)


def run_alpha_table(examples, m_list, tol: float = 1e-8, maxit: int = 1000) -> list[AlphaRow]:
    rows = []
    for ex in examples:
        for m in m_list:
            if m < 2:
                raise ConfigError("m must be >= 2")
            est, alpha = estimate_optimal_alpha(ProblemSpec(int(ex), int(m)), tol, maxit)
            rows.append(AlphaRow(int(ex), int(m), est.rho, alpha, est.iterations,
                                 PUBLISHED_ALPHA["GSOR"][int(ex)].get(int(m))))
    return rows


def resolve_alpha(method: str, spec: ProblemSpec, source: str, explicit: float | None = None) -> float:
    """Parameter for ``method``; GMRES takes none and gets NaN.

    MHSS has no closed-form optimum here, so ``computed`` falls back to the
    published table for it.
    """
    method = normalize_method(method)
    if method == "GMRES":
        return math.nan
    if source == "explicit":
        if explicit is None:
            raise ConfigError("alpha_source 'explicit' needs an alpha value")
        return float(explicit)
    if source == "computed" and method != "MHSS":
        return estimate_optimal_alpha(spec)[1]
    if source not in ALPHA_SOURCES:
        raise ConfigError(f"unknown alpha source {source!r}")
    table = PUBLISHED_ALPHA["MHSS" if method == "MHSS" else "GSOR"][spec.example]
    if spec.m not in table:
        raise ConfigError(f"no published alpha for example {spec.example}, m={spec.m}")
    return table[spec.m]


def solve_one(spec: ProblemSpec, method: str, alpha: float, tol: float = 1e-6,
              maxit: int = 2000, restart: int = 10) -> BenchRow:
    method = normalize_method(method)
    t0 = time.perf_counter()
    sys_, b = build_problem(spec)
    if method == "GSOR":
        _, _, rep = gsor_solve(sys_, IterParams(alpha, tol, maxit))
    elif method == "MHSS":
        _, rep = mhss_solve(sys_.W, sys_.T, b, IterParams(alpha, tol, maxit))
    elif method == "GMRES":
        op = block_operator(sys_)
        rhs = np.concatenate([sys_.p, sys_.q])
        _, rep = gmres_restart(op, rhs, GmresConfig(restart, tol, maxit), residual_fn=block_residual_fn(sys_))
    else:
        op, rhs = gsor_preconditioned(sys_, alpha)
        _, rep = gmres_restart(op, rhs, GmresConfig(restart, tol, maxit), residual_fn=block_residual_fn(sys_))
    wall = time.perf_counter() - t0
    return BenchRow(spec.example, spec.m, method, alpha, rep.iterations, rep.converged,
                    rep.final_residual, wall, rep.inner_iterations)


@dataclass
class BenchConfig:
    examples: list[int] = field(default_factory=lambda: list(EXAMPLES))
    m: list[int] = field(default_factory=lambda: [16, 32, 64])
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    tol: float = 1e-6
    maxit: int = 2000
    restart: int = 10
    alpha_source: str = "paper"
    alpha: float | None = None

    def __post_init__(self):
        self.examples = [int(e) for e in _as_list(self.examples)]
        self.m = [int(v) for v in _as_list(self.m)]
        self.methods = [normalize_method(v) for v in _as_list(self.methods)]
        for e in self.examples:
            if e not in EXAMPLES:
                raise ConfigError(f"unknown example {e}")
        if any(v < 2 for v in self.m):
            raise ConfigError("grid sizes must be >= 2")
        if self.alpha_source not in ALPHA_SOURCES:
            raise ConfigError(f"unknown alpha_source {self.alpha_source!r}")
        if self.alpha_source == "explicit" and self.alpha is None:
            raise ConfigError("alpha_source 'explicit' needs alpha")

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        data = {k.replace("-", "_"): v for k, v in data.items()}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def load_config(path) -> BenchConfig:
    """Read a flat TOML file of keys and arrays, e.g. ``m = [16, 32]``."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if any(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"{path}: config must be flat (no tables)")
    return BenchConfig.from_mapping(data)


def run_bench(config: BenchConfig) -> list[BenchRow]:
    rows = []
    for ex in config.examples:
        for m in config.m:
            spec = ProblemSpec(ex, m)
            for method in config.methods:
                alpha = resolve_alpha(method, spec, config.alpha_source, config.alpha)
                rows.append(solve_one(spec, method, alpha, config.tol, config.maxit, config.restart))
    return rows


def export_report(rows: list[BenchRow], fmt: str, path) -> None:
    if not rows:
        raise ValueError("no rows to export")
    text = report_csv(rows) if fmt == "csv" else report_markdown(rows) if fmt == "markdown" else None
    if text is None:
        raise ValueError(f"unknown report format {fmt!r}")
    Path(path).write_text(text)


def report_csv(rows: list[BenchRow]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BenchRow.COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def read_report_csv(path) -> list[BenchRow]:
    with open(path, newline="") as fh:
        return [BenchRow.from_record(rec) for rec in csv.DictReader(fh)]


def report_markdown(rows: list[BenchRow]) -> str:
    """One table per example: methods down, grid sizes across; a dagger marks non-convergence."""
    out = []
    for ex in dict.fromkeys(r.example for r in rows):
        sub = [r for r in rows if r.example == ex]
        ms = list(dict.fromkeys(r.m for r in sub))
        out.append(f"### Example {ex}\n")
        out.append("| Method | | " + " | ".join(f"{m}x{m}" for m in ms) + " |")
        out.append("|---|---|" + "---|" * len(ms))
        for method in dict.fromkeys(r.method for r in sub):
            cell = {r.m: r for r in sub if r.method == method}
            label = method.replace("_", "-")
            if method in ("GMRES", "GSOR_GMRES"):
                label = label.replace("GMRES", "GMRES(10)")
            its = [str(cell[m].iterations) if m in cell and cell[m].converged else "†" if m in cell else ""
                   for m in ms]
            alphas = ["" if m not in cell or math.isnan(cell[m].alpha_used) else f"{cell[m].alpha_used:.4g}"
                      for m in ms]
            out.append(f"| {label} | IT | " + " | ".join(its) + " |")
            if any(alphas):
                out.append("| | alpha | " + " | ".join(alphas) + " |")
        out.append("")
    return "\n".join(out)


SPECTRUM_MAX_M = 32


def spectrum_data(spec: ProblemSpec, alpha: float) -> tuple[dict[str, np.ndarray], list[str]]:
    """Eigenvalue sets ``G`` (iteration matrix), ``precondA`` and, when obtainable, ``A``."""
    if spec.m > SPECTRUM_MAX_M:
        raise ValueError(f"m={spec.m} too large for the dense spectrum oracle (max {SPECTRUM_MAX_M})")
    sys_, _ = build_problem(spec)
    mu = s_eigenvalues(sys_.W, sys_.T)
    res = gsor_spectrum(mu, alpha)
    sets = {"G": res.lam, "precondA": res.precond_eigs}
    notes = [f"example={spec.example} m={spec.m} alpha={alpha!r} n={spec.n}"]
    a_eigs = commuting_block_eigs(sys_.W, sys_.T)
    if a_eigs is None:
        notes.append("A-set omitted: W and T do not commute, so the block matrix spectrum "
                     "is not available from the symmetric oracle")
    else:
        sets["A"] = np.concatenate([a_eigs, np.conj(a_eigs)])
    return sets, notes


def export_spectrum(spec: ProblemSpec, alpha: float, path) -> dict[str, np.ndarray]:
    sets, notes = spectrum_data(spec, alpha)
    with open(path, "w", newline="") as fh:
        for note in notes:
            fh.write(f"# {note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["set", "re", "im"])
        for name in ("A", "G", "precondA"):
            for z in sets.get(name, ()):
                writer.writerow([name, repr(float(z.real)), repr(float(z.imag))])
    return sets


def read_spectrum(path) -> dict[str, np.ndarray]:
    out: dict[str, list[complex]] = {}
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        out.setdefault(rec["set"], []).append(complex(float(rec["re"]), float(rec["im"])))
    return {k: np.array(v) for k, v in out.items()}
