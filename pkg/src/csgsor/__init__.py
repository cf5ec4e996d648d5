"""GSOR and MHSS solvers for complex symmetric systems ``(W + iT) u = b``."""
from .linalg import (
    BlockSystem,
    ComplexVector,
    CsrMatrix,
    NotPositiveDefinite,
    SolveReport,
    SpdFactor,
    apply_block_A,
    block_residual,
    cg_solve,
    cholesky,
    csr_from_triplets,
    kron_sum,
    power_method_rho_S,
    solve_spd,
    spmv,
)
from .krylov import GmresConfig, LinearOperator, block_operator, gmres_restart, gsor_precond_apply
from .problems import ProblemSpec, build_problem, rotate_system
from .solvers import IterParams, gsor_solve, mhss_solve
from .theory import (
    convergence_bound,
    gsor_spectrum,
    jacobi_eigs_sym,
    optimal_alpha,
    optimal_factor,
    s_eigenvalues,
)

__version__ = "0.1.0"
