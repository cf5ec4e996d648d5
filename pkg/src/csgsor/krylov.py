"""Restarted GMRES and the GSOR preconditioner for the block system."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import (
    BlockSystem,
    CsrMatrix,
    DimensionError,
    SolveReport,
    SpdFactor,
    apply_block_A,
    block_residual,
    solve_spd,
    spmv,
)


@dataclass(frozen=True)
class LinearOperator:
    dim: int
    apply: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise DimensionError(f"operator of dimension {self.dim} applied to shape {v.shape}")
        return self.apply(v)


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 10
    tol: float = 1e-6
    # cap on restart cycles; one cycle is one reported iteration
    maxit: int = 2000

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")


def block_operator(sys: BlockSystem) -> LinearOperator:
    n = sys.n

    def apply(v):
        ax, ay = apply_block_A(sys, v[:n], v[n:])
        return np.concatenate([ax, ay])

    return LinearOperator(2 * n, apply)


def gsor_precond_apply(Wf: SpdFactor, T: CsrMatrix, alpha: float, r, s):
    """``(e; f) = P^{-1} A (r; s)`` with ``P = D - alpha E``.

    t = W r - T s;  u = T r + W s;  W e = t;  W f = u - alpha T e.
    """
    W = Wf.matrix
    if W is None:
        raise ValueError("factor does not carry its matrix")
    r = np.asarray(r, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if r.shape != (Wf.n,) or s.shape != (Wf.n,):
        raise DimensionError("r and s must have length n")
    Tr, Ts = spmv(T, r), spmv(T, s)
    t = spmv(W, r) - Ts
    u = Tr + spmv(W, s)
    e = solve_spd(Wf, t)
    f = solve_spd(Wf, u - alpha * spmv(T, e))
    return e, f


def gsor_precond_solve(Wf: SpdFactor, T: CsrMatrix, alpha: float, p, q):
    """``P^{-1} (p; q)``: the preconditioned right-hand side."""
    e = solve_spd(Wf, p)
    f = solve_spd(Wf, q - alpha * spmv(T, e))
    return e, f


def gsor_preconditioned(sys: BlockSystem, alpha: float, factor: SpdFactor | None = None):
    """Return ``(P^{-1} A, P^{-1} b)`` for the block system as an operator and a vector."""
    Wf = factor if factor is not None else sys.w_factor
    n = sys.n

    def apply(v):
        e, f = gsor_precond_apply(Wf, sys.T, alpha, v[:n], v[n:])
        return np.concatenate([e, f])

    e, f = gsor_precond_solve(Wf, sys.T, alpha, sys.p, sys.q)
    return LinearOperator(2 * n, apply), np.concatenate([e, f])


def block_residual_fn(sys: BlockSystem) -> Callable[[np.ndarray], float]:
    """True relative residual of the block system for a stacked iterate."""
    n = sys.n
    return lambda v: block_residual(sys, v[:n], v[n:])


def gmres_restart(op: LinearOperator, rhs, cfg: GmresConfig = GmresConfig(), x0=None,
                  residual_fn: Callable[[np.ndarray], float] | None = None):
    """GMRES(restart) with modified Gram-Schmidt and Givens rotations.

    Returns ``(x, SolveReport)``. ``report.iterations`` counts restart
    cycles (a run finishing inside the first cycle reports 1) and
    ``report.inner_iterations`` the Arnoldi steps.

    If ``residual_fn`` is given, convergence is declared on it after every
    Arnoldi step; this is how a left-preconditioned solve is stopped on the
    residual of the original system. Without it, the unpreconditioned
    residual ``||rhs - op x|| / ||rhs||`` is used.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (op.dim,):
        raise DimensionError("rhs length does not match operator dimension")
    x = np.zeros(op.dim) if x0 is None else np.array(x0, dtype=np.float64)
    nrhs = np.linalg.norm(rhs)
    report = SolveReport(inner_iterations=0)
    if nrhs == 0.0:
        report.converged, report.final_residual = True, 0.0
        return np.zeros(op.dim), report
    if residual_fn is None:
        residual_fn = lambda v: float(np.linalg.norm(rhs - op(v)) / nrhs)  # noqa: E731

    m = cfg.restart
    res = residual_fn(x)
    report.residual_history.append(res)
    if res < cfg.tol:
        report.converged, report.final_residual = True, res
        return x, report

    for cycle in range(1, cfg.maxit + 1):
        report.iterations = cycle
        r = rhs - op(x)
        beta = np.linalg.norm(r)
        if beta == 0.0:
            break
        V = np.zeros((m + 1, op.dim))
        H = np.zeros((m + 1, m))
        cs, sn = np.zeros(m), np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        x_cycle = x
        for j in range(m):
            report.inner_iterations += 1
            w = np.array(op(V[j]), dtype=np.float64)  # operator may return its input
            for i in range(j + 1):
                H[i, j] = w @ V[i]
                w -= H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            breakdown = H[j + 1, j] <= 1e-14 * beta
            if not breakdown:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                hij = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hij
            d = np.hypot(H[j, j], H[j + 1, j])
            cs[j], sn[j] = H[j, j] / d, H[j + 1, j] / d
            H[j, j], H[j + 1, j] = d, 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            report.inner_history.append(abs(g[j + 1]) / nrhs)

            coef = _back_substitute(H[: j + 1, : j + 1], g[: j + 1])
            x_cycle = x + V[: j + 1].T @ coef
            res = residual_fn(x_cycle)
            if res < cfg.tol or breakdown:
                break
        x = x_cycle
        report.residual_history.append(res)
        if res < cfg.tol:
            break
        if not np.isfinite(res):
            break
    report.final_residual = res
    report.converged = bool(res < cfg.tol)
    return x, report


def _back_substitute(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    k = len(g)
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - R[i, i + 1:] @ y[i + 1:]) / R[i, i]
    return y
