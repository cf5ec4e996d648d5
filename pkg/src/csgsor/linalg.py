"""Sparse kernel shared by every solver.

Matrices are carried as :class:`CsrMatrix`, vectors as 1-D float64 numpy
arrays. Complex data never appears as a complex matrix; a complex vector is
a pair of real vectors (:class:`ComplexVector`).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee


class NotPositiveDefinite(ArithmeticError):
    """Raised when a matrix that must be SPD fails a positivity check."""


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row_ptr = np.asarray(self.row_ptr, dtype=np.int64)
        col_idx = np.asarray(self.col_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if row_ptr.shape != (self.n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows + 1")
        if row_ptr[0] != 0 or row_ptr[-1] != len(col_idx) or len(values) != len(col_idx):
            raise ValueError("row_ptr does not match col_idx/values")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= self.n_cols):
            raise ValueError("column index out of range")
        # strictly increasing columns inside each row
        if len(col_idx) > 1:
            step = np.diff(col_idx)
            row_start = np.zeros(len(col_idx), dtype=bool)
            row_start[row_ptr[:-1][row_ptr[:-1] < len(col_idx)]] = True
            if np.any((step <= 0) & ~row_start[1:]):
                raise ValueError("column indices must be strictly increasing within a row")
        for name, arr in (("row_ptr", row_ptr), ("col_idx", col_idx), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return len(self.values)

    @cached_property
    def scipy(self) -> sp.csr_array:
        """Read-only scipy view used for the heavy kernels."""
        return sp.csr_array((self.values, self.col_idx, self.row_ptr), shape=self.shape)

    @classmethod
    def from_scipy(cls, A) -> "CsrMatrix":
        A = sp.csr_array(A, dtype=np.float64)
        A.sum_duplicates()
        A.sort_indices()
        return cls(A.shape[0], A.shape[1], A.indptr, A.indices, A.data)

    def to_dense(self) -> np.ndarray:
        return self.scipy.toarray()

    def diagonal(self) -> np.ndarray:
        return self.scipy.diagonal()

    def transpose(self) -> "CsrMatrix":
        return CsrMatrix.from_scipy(self.scipy.T)

    def __matmul__(self, x):
        return spmv(self, x)

    def __repr__(self) -> str:
        return f"CsrMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


def csr_from_triplets(triplets: Iterable[Sequence], n_rows: int, n_cols: int) -> CsrMatrix:
    """Assemble a CSR matrix from ``(row, col, value)`` triplets.

    Duplicate entries are summed and each row is sorted by column.
    """
    t = list(triplets)
    if t:
        rows = np.fromiter((r for r, _, _ in t), dtype=np.int64, count=len(t))
        cols = np.fromiter((c for _, c, _ in t), dtype=np.int64, count=len(t))
        vals = np.fromiter((v for _, _, v in t), dtype=np.float64, count=len(t))
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0)
    return csr_from_arrays(rows, cols, vals, n_rows, n_cols)


def csr_from_arrays(rows, cols, vals, n_rows: int, n_cols: int) -> CsrMatrix:
    """Array form of :func:`csr_from_triplets`."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("triplet arrays must have equal length")
    if len(rows) and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
        raise IndexError("triplet index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows):
        new = np.ones(len(rows), dtype=bool)
        new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(new)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=row_ptr[1:])
    return CsrMatrix(n_rows, n_cols, row_ptr, cols, vals)


def identity(n: int, scale: float = 1.0) -> CsrMatrix:
    idx = np.arange(n)
    return csr_from_arrays(idx, idx, np.full(n, float(scale)), n, n)


def diag_matrix(d) -> CsrMatrix:
    d = np.asarray(d, dtype=np.float64)
    idx = np.arange(len(d))
    return csr_from_arrays(idx, idx, d, len(d), len(d))


def tridiag(m: int, lower: float, main: float, upper: float) -> CsrMatrix:
    i = np.arange(m)
    rows = np.concatenate([i[1:], i, i[:-1]])
    cols = np.concatenate([i[:-1], i, i[1:]])
    vals = np.concatenate([np.full(m - 1, lower), np.full(m, main), np.full(m - 1, upper)])
    return csr_from_arrays(rows, cols, vals, m, m)


def _coo(A: CsrMatrix):
    rows = np.repeat(np.arange(A.n_rows), np.diff(A.row_ptr))
    return rows, A.col_idx, A.values


def linear_combination(*terms: tuple[float, CsrMatrix]) -> CsrMatrix:
    """Return ``sum(c * A for c, A in terms)`` for same-shaped matrices."""
    if not terms:
        raise ValueError("need at least one term")
    shape = terms[0][1].shape
    parts = []
    for c, A in terms:
        if A.shape != shape:
            raise DimensionError(f"shape mismatch {A.shape} vs {shape}")
        r, cidx, v = _coo(A)
        parts.append((r, cidx, c * v))
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    return csr_from_arrays(rows, cols, vals, *shape)


def scale(A: CsrMatrix, c: float) -> CsrMatrix:
    return CsrMatrix(A.n_rows, A.n_cols, A.row_ptr, A.col_idx, c * A.values)


def kron(A: CsrMatrix, B: CsrMatrix) -> CsrMatrix:
    ra, ca, va = _coo(A)
    rb, cb, vb = _coo(B)
    rows = (ra[:, None] * B.n_rows + rb[None, :]).ravel()
    cols = (ca[:, None] * B.n_cols + cb[None, :]).ravel()
    vals = (va[:, None] * vb[None, :]).ravel()
    return csr_from_arrays(rows, cols, vals, A.n_rows * B.n_rows, A.n_cols * B.n_cols)


def kron_sum(V: CsrMatrix) -> CsrMatrix:
    """``I (x) V + V (x) I`` for a square ``V``; the five-point stencil when ``V`` is tridiagonal."""
    if V.n_rows != V.n_cols:
        raise DimensionError("kron_sum needs a square matrix")
    eye = identity(V.n_rows)
    return linear_combination((1.0, kron(eye, V)), (1.0, kron(V, eye)))


def spmv(A: CsrMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != A.n_cols:
        raise DimensionError(f"cannot multiply {A.n_rows}x{A.n_cols} matrix by vector of length {x.shape}")
    return A.scipy @ x


def is_symmetric(A: CsrMatrix, rtol: float = 1e-12) -> bool:
    if A.n_rows != A.n_cols:
        return False
    S = A.scipy
    diff = abs(S - S.T).max() if A.nnz else 0.0
    ref = abs(S).max() if A.nnz else 0.0
    return diff <= rtol * ref


@dataclass(frozen=True)
class ComplexVector:
    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = np.asarray(self.re, dtype=np.float64)
        im = np.asarray(self.im, dtype=np.float64)
        if re.shape != im.shape or re.ndim != 1:
            raise DimensionError("re and im must be 1-D and of equal length")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __len__(self) -> int:
        return len(self.re)

    @classmethod
    def from_complex(cls, z) -> "ComplexVector":
        z = np.asarray(z)
        return cls(z.real.copy(), z.imag.copy())

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """The real block system ``[[W, -T], [T, W]] (x; y) = (p; q)``.

    Symmetry of ``W`` and ``T`` is checked on construction. Positive
    definiteness of ``W`` is checked by the Cholesky factorization, which is
    computed once on first use and cached.
    """

    W: CsrMatrix
    T: CsrMatrix
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        n = self.W.n_rows
        if self.W.shape != (n, n) or self.T.shape != (n, n):
            raise DimensionError("W and T must be square and of equal size")
        p = np.asarray(self.p, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        if p.shape != (n,) or q.shape != (n,):
            raise DimensionError("p and q must have length n")
        if not is_symmetric(self.W):
            raise ValueError("W is not symmetric")
        if not is_symmetric(self.T):
            raise ValueError("T is not symmetric")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.W.n_rows

    @property
    def b(self) -> ComplexVector:
        return ComplexVector(self.p, self.q)

    @cached_property
    def w_factor(self) -> "SpdFactor":
        return cholesky(self.W)


def apply_block_A(sys: BlockSystem, x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (sys.n,) or y.shape != (sys.n,):
        raise DimensionError("x and y must have length n")
    Wx, Wy = spmv(sys.W, x), spmv(sys.W, y)
    Tx, Ty = spmv(sys.T, x), spmv(sys.T, y)
    return Wx - Ty, Tx + Wy


def block_residual(sys: BlockSystem, x, y) -> float:
    """Relative residual ``||b - A u|| / ||b||`` of the complex system, in real arithmetic."""
    nb = np.hypot(np.linalg.norm(sys.p), np.linalg.norm(sys.q))
    if nb == 0.0:
        raise ValueError("right-hand side is zero; relative residual undefined")
    ax, ay = apply_block_A(sys, x, y)
    return float(np.hypot(np.linalg.norm(sys.p - ax), np.linalg.norm(sys.q - ay)) / nb)


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    final_residual: float = float("nan")
    # Krylov solvers only: total Arnoldi steps and the least-squares residual per step.
    inner_iterations: int | None = None
    inner_history: list[float] = field(default_factory=list)


def _bandwidth(A: sp.csr_array) -> int:
    C = A.tocoo()
    return int(np.max(np.abs(C.row - C.col))) if C.nnz else 0


@dataclass(frozen=True, eq=False)
class SpdFactor:
    """Cholesky factor ``L L^T = P W P^T``.

    ``perm[i]`` is the original index placed at position ``i``. The factor is
    kept in LAPACK lower band storage for the solves; :attr:`lower` rebuilds
    it as a :class:`CsrMatrix`. ``matrix`` is the factored ``W`` itself.
    """

    band: np.ndarray
    perm: np.ndarray
    matrix: CsrMatrix | None = None

    @property
    def n(self) -> int:
        return self.band.shape[1]

    @cached_property
    def lower(self) -> CsrMatrix:
        kd, n = self.band.shape[0] - 1, self.n
        rows, cols, vals = [], [], []
        for k in range(kd + 1):
            j = np.arange(n - k)
            v = self.band[k, : n - k]
            keep = v != 0.0
            rows.append(j[keep] + k)
            cols.append(j[keep])
            vals.append(v[keep])
        return csr_from_arrays(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), n, n)


def cholesky(W: CsrMatrix) -> SpdFactor:
    """Banded Cholesky after a bandwidth-reducing reordering.

    Reverse Cuthill-McKee is used when it narrows the band; otherwise the
    natural order is kept.
    """
    if W.n_rows != W.n_cols:
        raise DimensionError("cholesky needs a square matrix")
    if not is_symmetric(W):
        raise ValueError("matrix is not symmetric")
    n = W.n_rows
    A = W.scipy
    perm = np.arange(n)
    bw = _bandwidth(A)
    if n > 2:
        rcm = reverse_cuthill_mckee(sp.csr_matrix(A), symmetric_mode=True).astype(np.int64)
        Ap = A[rcm][:, rcm]
        if _bandwidth(Ap) < bw:
            perm, A, bw = rcm, Ap, _bandwidth(Ap)
    C = sp.tril(A).tocoo()
    band = np.zeros((bw + 1, n))
    band[C.row - C.col, C.col] = C.data
    try:
        L = scipy.linalg.cholesky_banded(band, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if not np.all(L[0] > 0):
        raise NotPositiveDefinite("non-positive pivot")
    return SpdFactor(L, perm, W)


def solve_spd(F: SpdFactor, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != F.n:
        raise DimensionError(f"rhs has length {rhs.shape[0]}, factor has size {F.n}")
    z = scipy.linalg.cho_solve_banded((F.band, True), rhs[F.perm], check_finite=False)
    out = np.empty_like(z)
    out[F.perm] = z
    return out


def cg_solve(A: CsrMatrix, b, tol: float = 1e-6, maxit: int = 1000, x0=None):
    """Plain conjugate gradients; returns ``(x, SolveReport)``."""
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    nb = np.linalg.norm(b)
    report = SolveReport()
    if nb == 0.0:
        report.converged, report.final_residual = True, 0.0
        return np.zeros_like(b), report
    r = b - spmv(A, x)
    d = r.copy()
    rr = r @ r
    res = np.sqrt(rr) / nb
    for k in range(1, maxit + 1):
        Ad = spmv(A, d)
        dAd = d @ Ad
        if dAd <= 0.0:
            raise NotPositiveDefinite("CG breakdown: d^T A d <= 0")
        step = rr / dAd
        x += step * d
        r -= step * Ad
        rr_new = r @ r
        res = np.sqrt(rr_new) / nb
        report.iterations = k
        report.residual_history.append(float(res))
        if res <= tol:
            break
        d = r + (rr_new / rr) * d
        rr = rr_new
    report.final_residual = float(res)
    report.converged = bool(res <= tol)
    return x, report


@dataclass
class RhoEstimate:
    rho: float
    iterations: int
    converged: bool


def _w_norm2(Wf: SpdFactor, v: np.ndarray) -> float:
    """``v^T W v`` evaluated as ``||L^T P v||^2`` from the band factor."""
    z = v[Wf.perm]
    n = Wf.n
    lt = Wf.band[0] * z
    for k in range(1, Wf.band.shape[0]):
        lt[: n - k] += Wf.band[k, : n - k] * z[k:]
    return float(lt @ lt)


def estimate_rho(Wf: SpdFactor, T: CsrMatrix, tol: float = 1e-8, maxit: int = 1000) -> RhoEstimate:
    """Power method for the spectral radius of ``S = W^{-1} T``.

    Iterates ``v <- W^{-1} T v`` from the normalized all-ones vector and
    monitors the generalized Rayleigh quotient ``|v^T T v| / v^T W v``. ``S`` is
    self-adjoint in the ``W`` inner product, so the quotient converges
    quadratically in the eigenvector error.
    """
    n = Wf.n
    if T.shape != (n, n):
        raise DimensionError("T and W must have the same size")
    t_nonzero = bool(np.any(T.values != 0.0))
    v = np.ones(n) / np.sqrt(n)
    prev = None
    est = 0.0
    zero_run = 0
    restarted = False
    for k in range(1, maxit + 1):
        w = solve_spd(Wf, spmv(T, v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            est = 0.0
        else:
            v = w / nw
            est = abs(v @ spmv(T, v)) / _w_norm2(Wf, v)
        if est == 0.0 and t_nonzero:
            zero_run += 1
            if zero_run >= 10 and not restarted:
                v = np.random.default_rng(42).standard_normal(n)
                v /= np.linalg.norm(v)
                restarted, zero_run, prev = True, 0, None
            continue
        if not t_nonzero:
            return RhoEstimate(0.0, k, True)
        if prev is not None and abs(est - prev) <= tol * est:
            return RhoEstimate(float(est), k, True)
        prev = est
    return RhoEstimate(float(est), maxit, False)


def power_method_rho_S(Wf: SpdFactor, T: CsrMatrix, tol: float = 1e-8, maxit: int = 1000) -> float:
    """Spectral radius estimate of ``W^{-1} T``; warns if the iteration did not settle."""
    res = estimate_rho(Wf, T, tol, maxit)
    if not res.converged:
        warnings.warn(f"power method not converged after {maxit} iterations", RuntimeWarning, stacklevel=2)
    return res.rho
