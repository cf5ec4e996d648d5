import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from csgsor.linalg import BlockSystem, ComplexVector, cholesky, is_symmetric
from csgsor.problems import ProblemSpec, build_problem, laplacian_2d, rotate_system, with_m
from csgsor.solvers import IterParams, gsor_solve
from csgsor.theory import optimal_alpha, s_eigenvalues, spectral_radius_S

from conftest import csr, random_spd, random_sym


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(example=5, m=4), dict(example=1, m=0), dict(example=1, m=2.5),
                                    dict(example=1, m=4, tau=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ProblemSpec(**kw)

    def test_defaults(self):
        s = ProblemSpec(3, 7)
        assert s.h == pytest.approx(1 / 8) and s.n == 49 and not s.scaled
        assert ProblemSpec(2, 7).scaled
        assert with_m(s, 9).m == 9 and with_m(s, 9).example == 3


class TestGenerators:
    def test_laplacian_small(self):
        K = laplacian_2d(2).to_dense()
        ref = 9 * np.array([[4, -1, -1, 0], [-1, 4, 0, -1], [-1, 0, 4, -1], [0, -1, -1, 4]], dtype=float)
        assert_allclose(K, ref)

    def test_example4_m2_hand_values(self):
        sys, _ = build_problem(ProblemSpec(4, 2))
        W, T = sys.W.to_dense(), sys.T.to_dense()
        assert_allclose(np.diag(W), 136 / 9)
        assert_allclose(W[0, 1], -1.0)
        assert_allclose(W[0, 3], 0.0)
        assert_allclose(T, 100 / 9 * np.eye(4))

    def test_example3_small_structure(self):
        sys, _ = build_problem(ProblemSpec(3, 3))
        W, T = sys.W.to_dense(), sys.T.to_dense()
        V = 2 * np.eye(3) - np.eye(3, k=1) - np.eye(3, k=-1)
        E = np.zeros((3, 3))
        E[0, 2] = E[2, 0] = 1.0
        Vc = V - E
        I = np.eye(3)
        assert_allclose(T, np.kron(I, V) + np.kron(V, I))
        assert_allclose(W, 10 * (np.kron(I, Vc) + np.kron(Vc, I)) + 9 * np.kron(E, I))

    @pytest.mark.parametrize("example", [1, 2, 3, 4])
    @pytest.mark.parametrize("m", [1, 4, 9])
    def test_symmetric(self, example, m):
        sys, b = build_problem(ProblemSpec(example, m))
        assert is_symmetric(sys.W) and is_symmetric(sys.T)
        assert sys.n == m * m and len(b) == m * m

    def test_example3_definiteness(self):
        sys, _ = build_problem(ProblemSpec(3, 16))
        cholesky(sys.W)  # raises if not SPD
        assert np.linalg.eigvalsh(sys.T.to_dense()).min() > -1e-12

    def test_example1_alpha(self):
        sys, _ = build_problem(ProblemSpec(1, 16))
        assert optimal_alpha(spectral_radius_S(sys.W, sys.T, "lapack")) == pytest.approx(0.550, abs=0.005)

    def test_example1_text_variant(self):
        sys, _ = build_problem(ProblemSpec(1, 8, ex1_text_variant=True))
        assert_allclose(sys.W.to_dense(), sys.T.to_dense())
        assert spectral_radius_S(sys.W, sys.T) == pytest.approx(1.0, abs=1e-10)

    def test_example1_rhs(self):
        spec = ProblemSpec(1, 3)
        sys, b = build_problem(spec)
        j = np.arange(1, 10)
        ref = spec.h ** 2 * (1 - 1j) * j / (spec.h * (j + 1) ** 2)
        assert_allclose(b.to_complex(), ref)

    @pytest.mark.parametrize("example", [2, 3, 4])
    def test_rhs_from_ones_solution(self, example):
        sys, b = build_problem(ProblemSpec(example, 4))
        A = sys.W.to_dense() + 1j * sys.T.to_dense()
        assert_allclose(np.linalg.solve(A, b.to_complex()), (1 + 1j) * np.ones(16), atol=1e-10)

    @pytest.mark.parametrize("example", [1, 2, 4])
    def test_scaling_does_not_change_iterates(self, example):
        a = build_problem(ProblemSpec(example, 8, normalize=True))[0]
        b = build_problem(ProblemSpec(example, 8, normalize=False))[0]
        assert_allclose(s_eigenvalues(a.W, a.T), s_eigenvalues(b.W, b.T), rtol=1e-10, atol=1e-12)
        xa, ya, ra = gsor_solve(a, IterParams(0.4, 1e-8))
        xb, yb, rb = gsor_solve(b, IterParams(0.4, 1e-8))
        assert ra.iterations == rb.iterations
        # histories hold relative residuals, so the 1e-12 tolerance is absolute
        assert_allclose(ra.residual_history, rb.residual_history, rtol=0, atol=1e-12)
        assert_allclose(xa + 1j * ya, xb + 1j * yb, atol=1e-10)


class TestRotation:
    def test_identity_rotation(self, rng):
        W, T = csr(random_spd(rng, 4)), csr(random_sym(rng, 4))
        b = ComplexVector(rng.standard_normal(4), rng.standard_normal(4))
        Wr, Tr, br = rotate_system(W, T, b, 1.0, 0.0)
        assert_allclose(Wr.to_dense(), W.to_dense())
        assert_allclose(Tr.to_dense(), T.to_dense())
        assert_allclose(br.to_complex(), b.to_complex())

    def test_quarter_turn(self, rng):
        W, T = csr(random_spd(rng, 4)), csr(random_sym(rng, 4))
        b = ComplexVector(rng.standard_normal(4), rng.standard_normal(4))
        Wr, Tr, br = rotate_system(W, T, b, 0.0, 1.0)
        assert_allclose(Wr.to_dense(), T.to_dense())
        assert_allclose(Tr.to_dense(), -W.to_dense())
        assert_allclose(br.to_complex(), -1j * b.to_complex())

    def test_zero_rotation(self, rng):
        W = csr(random_spd(rng, 2))
        with pytest.raises(ValueError):
            rotate_system(W, W, ComplexVector(np.ones(2), np.ones(2)), 0.0, 0.0)

    def test_preserves_solution(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 9))
            W, T = random_spd(rng, n), random_sym(rng, n)
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            beta, delta = rng.uniform(-2, 2, size=2)
            Wr, Tr, br = rotate_system(csr(W), csr(T), ComplexVector.from_complex(b), beta, delta)
            u = np.linalg.solve(W + 1j * T, b)
            ur = np.linalg.solve(Wr.to_dense() + 1j * Tr.to_dense(), br.to_complex())
            assert_allclose(ur, u, atol=1e-8 * max(1.0, np.abs(u).max()))

    def test_rotated_example_solves_with_gsor(self):
        # the rotated example 4 still has an SPD real part for small delta
        sys, b = build_problem(ProblemSpec(4, 8))
        beta, delta = math.cos(0.3), math.sin(0.3)
        Wr, Tr, br = rotate_system(sys.W, sys.T, b, beta, delta)
        rs = BlockSystem(Wr, Tr, br.re, br.im)
        a = optimal_alpha(spectral_radius_S(rs.W, rs.T))
        x, y, rep = gsor_solve(rs, IterParams(a, 1e-10))
        assert rep.converged
        assert_allclose(x + 1j * y, (1 + 1j) * np.ones(64), atol=1e-7)
