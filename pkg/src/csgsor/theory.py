"""Convergence theory of GSOR and a small-scale spectrum oracle.

Everything here is exact up to rounding: the spectrum of ``S = W^{-1} T``
comes from a symmetric eigenproblem, and each eigenvalue ``mu`` of ``S``
yields the two eigenvalues of the GSOR iteration matrix as the roots of

    lam^2 + (a^2 mu^2 + 2a - 2) lam + (a - 1)^2 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import CsrMatrix, NotPositiveDefinite, cholesky, is_symmetric

DENSE_ORACLE_MAX = 200


def _check_rho(rho: float) -> float:
    if not rho >= 0.0:
        raise ValueError(f"spectral radius must be nonnegative, got {rho}")
    return float(rho)


def optimal_alpha(rho: float) -> float:
    """Relaxation parameter minimizing the GSOR spectral radius."""
    rho = _check_rho(rho)
    return 2.0 / (1.0 + math.sqrt(1.0 + rho * rho))


def optimal_factor(rho: float) -> float:
    """Spectral radius of the iteration matrix at :func:`optimal_alpha`."""
    return 1.0 - optimal_alpha(rho)


def convergence_bound(rho: float) -> float:
    """GSOR converges iff ``0 < alpha < convergence_bound(rho)``."""
    rho = _check_rho(rho)
    return 2.0 / (1.0 + rho)


def jacobi_eigs_sym(A, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, so each round annihilates
    ``n // 2`` disjoint off-diagonal pairs at once. Iterates until the
    off-diagonal Frobenius norm falls below ``tol * ||A||_F``. Returned in
    ascending order.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    fro = np.linalg.norm(A)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(fro, 1.0):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    if n < 2 or fro == 0.0:
        return np.sort(np.diag(A))

    # round-robin pairing; a dummy slot makes the player count even
    players = list(range(n)) + ([-1] if n % 2 else [])
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        pairs = [(players[i], players[k - 1 - i]) for i in range(k // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]

    def off(M):
        return np.linalg.norm(M - np.diag(np.diag(M)))

    for _ in range(max_sweeps):
        if off(A) <= tol * fro:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J, rows then columns
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(A))


def similar_symmetric(W: CsrMatrix, T: CsrMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Z, L, perm)`` with ``Z = L^{-1} P T P^T L^{-T}`` symmetric and similar to ``W^{-1} T``."""
    F = cholesky(W)
    L = F.lower.to_dense()
    Tp = T.to_dense()[np.ix_(F.perm, F.perm)]
    X = scipy.linalg.solve_triangular(L, Tp, lower=True)
    Z = scipy.linalg.solve_triangular(L, X.T, lower=True)
    return 0.5 * (Z + Z.T), L, F.perm


def s_eigenvalues(W: CsrMatrix, T: CsrMatrix, method: str = "auto") -> np.ndarray:
    """Real eigenvalues of ``S = W^{-1} T`` (ascending).

    ``method="jacobi"`` uses :func:`jacobi_eigs_sym`; ``"lapack"`` uses
    ``numpy.linalg.eigvalsh`` and is what ``"auto"`` picks above
    ``DENSE_ORACLE_MAX`` unknowns.
    """
    if not is_symmetric(T):
        raise ValueError("T is not symmetric")
    if W.shape != T.shape:
        raise ValueError("W and T must have the same shape")
    Z, _, _ = similar_symmetric(W, T)
    if method == "auto":
        method = "jacobi" if Z.shape[0] <= DENSE_ORACLE_MAX else "lapack"
    if method == "jacobi":
        return jacobi_eigs_sym(Z)
    if method == "lapack":
        return np.linalg.eigvalsh(Z)
    raise ValueError(f"unknown method {method!r}")


def spectral_radius_S(W: CsrMatrix, T: CsrMatrix, method: str = "auto") -> float:
    mu = s_eigenvalues(W, T, method)
    return float(np.max(np.abs(mu))) if len(mu) else 0.0


@dataclass
class SpectrumResult:
    mu: np.ndarray
    alpha: float
    # two entries per mu, in the order of mu
    lam: np.ndarray
    precond_eigs: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.lam))) if len(self.lam) else 0.0


def gsor_roots(mu, alpha: float) -> np.ndarray:
    """Both roots of the GSOR characteristic quadratic for each ``mu``; shape ``(len(mu), 2)``."""
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero")
    mu = np.asarray(mu, dtype=np.float64)
    b = alpha * alpha * mu * mu + 2.0 * alpha - 2.0
    c = (alpha - 1.0) ** 2
    am2 = alpha * alpha * mu * mu
    f = am2 + 4.0 * alpha - 4.0
    # near the tangency f is pure rounding noise; its sign would split the
    # double root by ~sqrt(eps), so treat it as exactly zero
    f = np.where(np.abs(f) <= 8.0 * np.finfo(float).eps * (am2 + 4.0 * abs(alpha) + 4.0), 0.0, f)
    disc = am2 * f  # b^2 - 4c without the cancellation
    out = np.empty((len(mu), 2), dtype=np.complex128)
    real = disc >= 0.0
    # real roots: larger magnitude first, partner from the product c
    sq = np.sqrt(np.where(real, disc, 0.0))
    big = -(b + np.where(b >= 0.0, sq, -sq)) / 2.0
    safe = np.where(big != 0.0, big, 1.0)
    small = np.where(big != 0.0, c / safe, 0.0)
    out[:, 0] = np.where(real, big, -b / 2.0 + 0.5j * np.sqrt(np.where(real, 0.0, -disc)))
    out[:, 1] = np.where(real, small, -b / 2.0 - 0.5j * np.sqrt(np.where(real, 0.0, -disc)))
    return out


def gsor_spectrum(mu, alpha: float) -> SpectrumResult:
    """Eigenvalues of the GSOR iteration matrix and of the preconditioned matrix.

    Every eigenvalue ``lam`` of the iteration matrix maps to ``(1 - lam) / alpha``
    for the GSOR-preconditioned operator.
    """
    mu = np.asarray(mu, dtype=np.float64)
    lam = gsor_roots(mu, alpha).ravel()
    return SpectrumResult(mu=mu, alpha=float(alpha), lam=lam, precond_eigs=(1.0 - lam) / alpha)


def quadratic_residual(lam, mu, alpha: float) -> np.ndarray:
    lam = np.asarray(lam)
    mu = np.asarray(mu)
    return np.abs(lam * lam + (alpha * alpha * mu * mu + 2.0 * alpha - 2.0) * lam + (alpha - 1.0) ** 2)


def gsor_spectral_radius(mu, alpha: float) -> float:
    return gsor_spectrum(mu, alpha).spectral_radius


def commuting_block_eigs(W: CsrMatrix, T: CsrMatrix, rtol: float = 1e-10) -> np.ndarray | None:
    """Eigenvalues ``w_k + i t_k`` of ``W + iT`` when ``W`` and ``T`` commute, else ``None``.

    Commuting symmetric matrices share an orthonormal eigenbasis; a generic
    combination of the two has that basis as its own. The real block matrix
    then has eigenvalues ``w_k +- i t_k``.
    """
    Wd, Td = W.to_dense(), T.to_dense()
    comm = np.linalg.norm(Wd @ Td - Td @ Wd)
    if comm > rtol * max(np.linalg.norm(Wd) * np.linalg.norm(Td), 1e-300):
        return None
    _, Q = np.linalg.eigh(Wd + (math.sqrt(5.0) - 1.0) / 2.0 * Td)
    w = np.einsum("ij,ij->j", Q, Wd @ Q)
    t = np.einsum("ij,ij->j", Q, Td @ Q)
    # a degenerate combined eigenvalue can still mix two eigenvectors
    if np.linalg.norm(Wd @ Q - Q * w) > 1e-8 * np.linalg.norm(Wd) or \
            np.linalg.norm(Td @ Q - Q * t) > 1e-8 * max(np.linalg.norm(Td), 1e-300):
        return None
    return w + 1j * t


__all__ = [
    "NotPositiveDefinite",
    "SpectrumResult",
    "commuting_block_eigs",
    "convergence_bound",
    "gsor_roots",
    "gsor_spectral_radius",
    "gsor_spectrum",
    "jacobi_eigs_sym",
    "optimal_alpha",
    "optimal_factor",
    "quadratic_residual",
    "s_eigenvalues",
    "similar_symmetric",
    "spectral_radius_S",
]
