import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from csgsor.linalg import cholesky, estimate_rho, identity
from csgsor.problems import ProblemSpec, build_problem
from csgsor.theory import (
    commuting_block_eigs,
    convergence_bound,
    gsor_roots,
    gsor_spectral_radius,
    gsor_spectrum,
    jacobi_eigs_sym,
    optimal_alpha,
    optimal_factor,
    quadratic_residual,
    s_eigenvalues,
    spectral_radius_S,
)

from conftest import csr, dense_block, random_spd, random_sym, random_system


def dense_gsor_matrix(W, T, alpha):
    n = W.shape[0]
    Z = np.zeros((n, n))
    D = np.block([[W, Z], [Z, W]])
    E = np.block([[Z, Z], [-T, Z]])
    F = np.block([[Z, T], [Z, Z]])
    return np.linalg.solve(D - alpha * E, (1 - alpha) * D + alpha * F)


class TestClosedForms:
    @pytest.mark.parametrize("rho, alpha", [(0.0, 1.0), (math.sqrt(3.0), 2.0 / 3.0), (math.sqrt(8.0), 0.5)])
    def test_optimal_alpha(self, rho, alpha):
        assert optimal_alpha(rho) == pytest.approx(alpha, abs=1e-15)
        assert optimal_factor(rho) == pytest.approx(1.0 - alpha, abs=1e-15)

    def test_convergence_bound(self):
        assert convergence_bound(0.0) == 2.0
        assert convergence_bound(1.0) == 1.0
        assert convergence_bound(3.0) == 0.5

    def test_rho_three_brackets_optimum(self):
        a = optimal_alpha(3.0)
        assert a == pytest.approx(2.0 / (1.0 + math.sqrt(10.0)))
        assert 0.0 < a < convergence_bound(3.0)

    @given(st.floats(0.0, 1e6))
    def test_optimum_inside_interval(self, rho):
        a = optimal_alpha(rho)
        assert 0.0 < a <= 1.0
        assert a <= convergence_bound(rho) + 1e-15

    def test_negative_rho(self):
        for f in (optimal_alpha, optimal_factor, convergence_bound):
            with pytest.raises(ValueError):
                f(-0.1)


class TestJacobi:
    def test_two_by_two(self):
        assert_allclose(jacobi_eigs_sym([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0], atol=1e-14)

    def test_diagonal_and_trivial(self):
        assert_allclose(jacobi_eigs_sym(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])
        assert_allclose(jacobi_eigs_sym([[5.0]]), [5.0])
        assert_allclose(jacobi_eigs_sym(np.zeros((3, 3))), np.zeros(3))

    def test_tridiagonal_closed_form(self):
        n = 9
        A = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        k = np.arange(1, n + 1)
        ref = 2 - 2 * np.cos(k * np.pi / (n + 1))
        assert_allclose(jacobi_eigs_sym(A), ref, atol=1e-12)

    def test_random_against_lapack(self, rng):
        for n in (2, 3, 7, 20, 41):
            A = random_sym(rng, n)
            ev = jacobi_eigs_sym(A)
            assert_allclose(ev, np.linalg.eigvalsh(A), atol=1e-11 * np.linalg.norm(A))
            assert ev.sum() == pytest.approx(np.trace(A), abs=1e-11 * n)

    def test_not_symmetric(self):
        with pytest.raises(ValueError):
            jacobi_eigs_sym([[1.0, 2.0], [0.0, 1.0]])


class TestSEigenvalues:
    def test_identity_w(self, rng):
        T = random_sym(rng, 6)
        assert_allclose(s_eigenvalues(identity(6), csr(T)), np.linalg.eigvalsh(T), atol=1e-12)

    def test_scaled_identity_w(self, rng):
        T = random_sym(rng, 5)
        assert_allclose(s_eigenvalues(identity(5, 4.0), csr(T)), np.linalg.eigvalsh(T) / 4, atol=1e-12)

    def test_general_against_generalized_eig(self, rng):
        for _ in range(5):
            sys = random_system(rng, 8)
            W, T = sys.W.to_dense(), sys.T.to_dense()
            ref = np.sort(np.linalg.eigvals(np.linalg.solve(W, T)).real)
            assert_allclose(s_eigenvalues(sys.W, sys.T), ref, atol=1e-10)
            assert_allclose(s_eigenvalues(sys.W, sys.T, "lapack"), ref, atol=1e-10)

    def test_example1_small_matches_power_method(self):
        sys, _ = build_problem(ProblemSpec(1, 4))
        rho = spectral_radius_S(sys.W, sys.T)
        est = estimate_rho(cholesky(sys.W), sys.T, tol=1e-14, maxit=100000)
        assert est.rho == pytest.approx(rho, rel=1e-6)

    def test_unknown_method(self, rng):
        sys = random_system(rng, 3)
        with pytest.raises(ValueError):
            s_eigenvalues(sys.W, sys.T, "qr")


class TestGsorSpectrum:
    def test_mu_zero(self):
        lam = gsor_roots([0.0], 0.7)[0]
        assert_allclose(lam, [0.3, 0.3], atol=1e-15)

    def test_alpha_one(self):
        # lam^2 + mu^2 lam = 0
        lam = gsor_roots([2.0], 1.0)[0]
        assert_allclose(sorted(np.abs(lam)), [0.0, 4.0], atol=1e-15)

    def test_zero_alpha_rejected(self):
        with pytest.raises(ValueError):
            gsor_roots([1.0], 0.0)

    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.428, 3.0])
    def test_tangency_double_root(self, rho):
        a = optimal_alpha(rho)
        lam = gsor_roots([rho], a)[0]
        assert_allclose(lam, [a - 1.0, a - 1.0], atol=1e-7)
        assert_allclose(np.abs(lam), 1.0 - a, atol=1e-7)

    def test_inside_and_outside_bound(self):
        mu = np.array([-2.0, 0.5, 1.5])
        bound = convergence_bound(2.0)
        assert gsor_spectral_radius(mu, 0.99 * bound) < 1.0
        assert gsor_spectral_radius(mu, 1.01 * bound) > 1.0

    def test_optimal_radius(self):
        mu = np.linspace(-1.3, 1.3, 11)
        a = optimal_alpha(1.3)
        assert gsor_spectral_radius(mu, a) == pytest.approx(1.0 - a, abs=1e-7)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=8), st.floats(-3.0, 3.0).filter(lambda a: abs(a) > 1e-3))
    def test_quadratic_residual(self, mu, alpha):
        res = gsor_spectrum(mu, alpha)
        lam = res.lam.reshape(-1, 2)
        scale = 1.0 + (alpha * alpha * np.square(mu) + abs(2 * alpha - 2)) * np.abs(lam).max(axis=1) + np.abs(lam).max(axis=1) ** 2
        for k in range(2):
            assert np.all(quadratic_residual(lam[:, k], np.asarray(mu), alpha) <= 1e-9 * scale)

    def test_matches_dense_iteration_matrix(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 7))
            sys = random_system(rng, n)
            W, T = sys.W.to_dense(), sys.T.to_dense()
            alpha = rng.uniform(0.1, 1.5)
            res = gsor_spectrum(s_eigenvalues(sys.W, sys.T), alpha)
            ref = np.linalg.eigvals(dense_gsor_matrix(W, T, alpha))
            assert_allclose(np.sort(np.abs(res.lam)), np.sort(np.abs(ref)), atol=1e-8)
            assert res.spectral_radius == pytest.approx(np.abs(ref).max(), abs=1e-8)

    def test_preconditioned_eigenvalues(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 7))
            sys = random_system(rng, n)
            W, T = sys.W.to_dense(), sys.T.to_dense()
            alpha = rng.uniform(0.1, 1.5)
            P = np.block([[W, np.zeros((n, n))], [alpha * T, W]])
            ref = np.linalg.eigvals(np.linalg.solve(P, dense_block(W, T)))
            got = gsor_spectrum(s_eigenvalues(sys.W, sys.T), alpha).precond_eigs
            # match as multisets
            for z in ref:
                assert np.min(np.abs(got - z)) < 1e-7 * max(1.0, abs(z))

    def test_s_eigenvectors_real(self, rng):
        # each mu has an eigenvector with T v = mu W v
        sys = random_system(rng, 6)
        W, T = sys.W.to_dense(), sys.T.to_dense()
        for mu in s_eigenvalues(sys.W, sys.T):
            s = np.linalg.svd(T - mu * W, compute_uv=False)
            assert s[-1] < 1e-9 * np.linalg.norm(T)

    def test_psd_t_gives_nonnegative_mu(self, rng):
        sys = random_system(rng, 7, psd_t=True)
        assert s_eigenvalues(sys.W, sys.T).min() > -1e-12


class TestCommutingEigs:
    def test_polynomials_in_k(self):
        sys, _ = build_problem(ProblemSpec(4, 4))
        z = commuting_block_eigs(sys.W, sys.T)
        assert z is not None
        ref = np.linalg.eigvals(sys.W.to_dense() + 1j * sys.T.to_dense())
        assert_allclose(np.sort_complex(z), np.sort_complex(ref), atol=1e-10)

    def test_non_commuting(self, rng):
        assert commuting_block_eigs(csr(random_spd(rng, 4)), csr(random_sym(rng, 4))) is None
