"""Generators for the four model problems and the ``beta - i delta`` rotation."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import (
    BlockSystem,
    ComplexVector,
    CsrMatrix,
    apply_block_A,
    csr_from_arrays,
    identity,
    kron,
    kron_sum,
    linear_combination,
    scale,
    tridiag,
)

EXAMPLES = (1, 2, 3, 4)


@dataclass(frozen=True)
class ProblemSpec:
    """Which model problem to build, and its parameters.

    ``None`` fields take the per-example defaults: ``tau = h``,
    ``omega = pi``, ``mu_damp = 0.02``, ``sigma1 = sigma2 = 100``, and
    ``normalize`` (scaling by ``h^2``) on for examples 1, 2 and 4.
    ``ex1_text_variant`` gives example 1 the same shift in ``W`` and ``T``
    instead of the ``(3 + sqrt 3)/tau`` shift in ``T``.
    """

    example: int
    m: int
    tau: float | None = None
    omega: float = math.pi
    mu_damp: float = 0.02
    sigma1: float = 100.0
    sigma2: float = 100.0
    normalize: bool | None = None
    ex1_text_variant: bool = False

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ValueError(f"unknown example {self.example!r}; expected one of {EXAMPLES}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("grid size m must be a positive integer")
        if self.tau is not None and not self.tau > 0.0:
            raise ValueError("tau must be positive")

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def n(self) -> int:
        return self.m * self.m

    @property
    def scaled(self) -> bool:
        return self.example != 3 if self.normalize is None else bool(self.normalize)


def laplacian_2d(m: int, h: float | None = None) -> CsrMatrix:
    """Five-point negative Laplacian ``I (x) V + V (x) I`` with ``V = h^-2 tridiag(-1, 2, -1)``."""
    h = 1.0 / (m + 1) if h is None else h
    return kron_sum(scale(tridiag(m, -1.0, 2.0, -1.0), h ** -2))


def _corner(m: int) -> CsrMatrix:
    """``e_1 e_m^T + e_m e_1^T``."""
    if m == 1:
        return csr_from_arrays([0], [0], [2.0], 1, 1)
    return csr_from_arrays([0, m - 1], [m - 1, 0], [1.0, 1.0], m, m)


def _matrices(spec: ProblemSpec) -> tuple[CsrMatrix, CsrMatrix]:
    m, h, n = spec.m, spec.h, spec.n
    I = identity(n)
    if spec.example == 1:
        tau = h if spec.tau is None else spec.tau
        K = laplacian_2d(m, h)
        shift_w = (3.0 - math.sqrt(3.0)) / tau
        shift_t = shift_w if spec.ex1_text_variant else (3.0 + math.sqrt(3.0)) / tau
        return linear_combination((1.0, K), (shift_w, I)), linear_combination((1.0, K), (shift_t, I))
    if spec.example == 2:
        K = laplacian_2d(m, h)
        W = linear_combination((1.0, K), (-spec.omega ** 2, I))
        T = linear_combination((spec.mu_damp, K), (10.0 * spec.omega, I))
        return W, T
    if spec.example == 3:
        V = tridiag(m, -1.0, 2.0, -1.0)
        E = _corner(m)
        Vc = linear_combination((1.0, V), (-1.0, E))
        T = kron_sum(V)
        W = linear_combination((10.0, kron_sum(Vc)), (9.0, kron(E, identity(m))))
        return W, T
    K = laplacian_2d(m, h)
    return linear_combination((1.0, K), (spec.sigma1, I)), identity(n, spec.sigma2)


def build_problem(spec: ProblemSpec) -> tuple[BlockSystem, ComplexVector]:
    """Assemble ``(W, T, p, q)`` for one of the model problems, plus ``b = p + iq``."""
    W, T = _matrices(spec)
    n = spec.n
    if spec.example == 1:
        tau = spec.h if spec.tau is None else spec.tau
        j = np.arange(1, n + 1, dtype=np.float64)
        mag = j / (tau * (j + 1.0) ** 2)
        p, q = mag, -mag  # (1 - i) j / (tau (j+1)^2)
    if spec.scaled:
        c = spec.h ** 2
        W, T = scale(W, c), scale(T, c)
        if spec.example == 1:
            p, q = c * p, c * q
    if spec.example != 1:
        # b = (1 + i) A 1, with A applied in real block form to (1, 1)
        sys0 = BlockSystem(W, T, np.zeros(n), np.zeros(n))
        ones = np.ones(n)
        ar, ai = apply_block_A(sys0, ones, np.zeros(n))
        p, q = ar - ai, ar + ai
    sys = BlockSystem(W, T, p, q)
    return sys, sys.b


def rotate_system(W: CsrMatrix, T: CsrMatrix, b: ComplexVector, beta: float, delta: float):
    """Multiply ``(W + iT) u = b`` through by ``beta - i delta``.

    Returns ``(beta W + delta T, beta T - delta W, (beta - i delta) b)``.
    """
    if beta == 0.0 and delta == 0.0:
        raise ValueError("rotation (beta, delta) must not be (0, 0)")
    Wr = linear_combination((beta, W), (delta, T))
    Tr = linear_combination((beta, T), (-delta, W))
    br = ComplexVector(beta * b.re + delta * b.im, beta * b.im - delta * b.re)
    return Wr, Tr, br


def with_m(spec: ProblemSpec, m: int) -> ProblemSpec:
    return replace(spec, m=m)
