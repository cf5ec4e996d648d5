"""Stationary iterations for ``(W + iT) u = b``: GSOR on the real block form and MHSS."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    BlockSystem,
    ComplexVector,
    CsrMatrix,
    DimensionError,
    SolveReport,
    SpdFactor,
    block_residual,
    cholesky,
    identity,
    linear_combination,
    solve_spd,
    spmv,
)

DEFAULT_TOL = 1e-6
DEFAULT_MAXIT = 2000
# Iterates are abandoned once the residual grows past this factor.
DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class IterParams:
    alpha: float
    tol: float = DEFAULT_TOL
    maxit: int = DEFAULT_MAXIT

    def __post_init__(self):
        if self.alpha == 0.0 or not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite and nonzero")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")


def _start(n: int, v) -> np.ndarray:
    if v is None:
        return np.zeros(n)
    v = np.array(v, dtype=np.float64)
    if v.shape != (n,):
        raise DimensionError(f"initial guess must have length {n}")
    return v


def gsor_sweep(Wf: SpdFactor, W: CsrMatrix, T: CsrMatrix, alpha: float, x, y, p=None, q=None):
    """One GSOR step.

    Solves ``W x' = (1-a) W x + a T y + a p`` and then
    ``W y' = -a T x' + (1-a) W y + a q``. With ``p = q = None`` this is the
    homogeneous sweep, i.e. an application of the iteration matrix.
    """
    rhs = (1.0 - alpha) * spmv(W, x) + alpha * spmv(T, y)
    if p is not None:
        rhs += alpha * p
    x_new = solve_spd(Wf, rhs)
    rhs = -alpha * spmv(T, x_new) + (1.0 - alpha) * spmv(W, y)
    if q is not None:
        rhs += alpha * q
    y_new = solve_spd(Wf, rhs)
    return x_new, y_new


def _diverged(res: float, res0: float) -> bool:
    return not np.isfinite(res) or res > DIVERGENCE_FACTOR * max(res0, 1.0)


def gsor_solve(sys: BlockSystem, params: IterParams, x0=None, y0=None, factor: SpdFactor | None = None):
    """Solve the block system by GSOR; returns ``(x, y, SolveReport)``.

    Any nonzero ``alpha`` is accepted. Outside the convergence interval the
    run ends with ``converged=False``, either at ``maxit`` or as soon as the
    residual blows up.
    """
    Wf = factor if factor is not None else sys.w_factor
    x, y = _start(sys.n, x0), _start(sys.n, y0)
    report = SolveReport()
    res0 = block_residual(sys, x, y)
    res = res0
    for k in range(1, params.maxit + 1):
        x, y = gsor_sweep(Wf, sys.W, sys.T, params.alpha, x, y, sys.p, sys.q)
        res = block_residual(sys, x, y)
        report.iterations = k
        report.residual_history.append(res)
        if res < params.tol or _diverged(res, res0):
            break
    report.final_residual = res
    report.converged = bool(res < params.tol)
    return x, y, report


def shifted(A: CsrMatrix, alpha: float) -> CsrMatrix:
    """``alpha I + A`` as an explicit sparse matrix."""
    return linear_combination((1.0, A), (1.0, identity(A.n_rows, alpha)))


def mhss_step(Fw: SpdFactor, Ft: SpdFactor, W: CsrMatrix, T: CsrMatrix, alpha: float,
              u: ComplexVector, b: ComplexVector) -> ComplexVector:
    """One MHSS sweep in split real/imaginary arithmetic.

    ``(aI + W) u' = (aI - iT) u + b`` followed by
    ``(aI + T) u'' = (aI + iW) u' - i b``.
    """
    x, y = u.re, u.im
    xh = solve_spd(Fw, alpha * x + spmv(T, y) + b.re)
    yh = solve_spd(Fw, alpha * y - spmv(T, x) + b.im)
    xn = solve_spd(Ft, alpha * xh - spmv(W, yh) + b.im)
    yn = solve_spd(Ft, alpha * yh + spmv(W, xh) - b.re)
    return ComplexVector(xn, yn)


def mhss_solve(W: CsrMatrix, T: CsrMatrix, b: ComplexVector, params: IterParams,
               u0: ComplexVector | None = None):
    """MHSS iteration; returns ``(u, SolveReport)``.

    One IT is a full sweep (both half-steps). ``aI + W`` and ``aI + T`` are
    each factored once per call.
    """
    if params.alpha <= 0.0:
        raise ValueError("MHSS needs alpha > 0")
    sys = BlockSystem(W, T, b.re, b.im)
    Fw = cholesky(shifted(W, params.alpha))
    Ft = cholesky(shifted(T, params.alpha))
    u = u0 if u0 is not None else ComplexVector(np.zeros(sys.n), np.zeros(sys.n))
    if len(u) != sys.n:
        raise DimensionError("initial guess has wrong length")
    report = SolveReport()
    res0 = block_residual(sys, u.re, u.im)
    res = res0
    for k in range(1, params.maxit + 1):
        u = mhss_step(Fw, Ft, W, T, params.alpha, u, b)
        res = block_residual(sys, u.re, u.im)
        report.iterations = k
        report.residual_history.append(res)
        if res < params.tol or _diverged(res, res0):
            break
    report.final_residual = res
    report.converged = bool(res < params.tol)
    return u, report
