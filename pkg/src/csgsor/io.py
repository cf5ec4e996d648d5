"""Matrix Market and plain-text vector files."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .linalg import ComplexVector, CsrMatrix, is_symmetric


def write_matrix_market(path, A: CsrMatrix, symmetric: bool | None = None, comment: str = "") -> None:
    """Write ``A`` in coordinate real format; symmetric storage when ``A`` is symmetric."""
    if symmetric is None:
        symmetric = is_symmetric(A, rtol=0.0)
    scipy.io.mmwrite(str(path), sp.coo_matrix(A.scipy), comment=comment,
                     field="real", symmetry="symmetric" if symmetric else "general")


def read_matrix_market(path) -> CsrMatrix:
    M = scipy.io.mmread(str(path))
    if not sp.issparse(M):
        M = sp.coo_matrix(M)
    if np.iscomplexobj(M.data):
        raise ValueError(f"{path}: complex Matrix Market files are not supported")
    return CsrMatrix.from_scipy(M)


def write_vector(path, v) -> None:
    np.savetxt(path, np.asarray(v, dtype=np.float64), fmt="%.17g")


def read_vector(path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, dtype=np.float64, ndmin=1))


def write_complex_vector(path, b: ComplexVector) -> None:
    """Two columns per line: real part, imaginary part."""
    np.savetxt(path, np.column_stack([b.re, b.im]), fmt="%.17g")


def read_complex_vector(path) -> ComplexVector:
    data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (re, im)")
    return ComplexVector(data[:, 0], data[:, 1])


def export_problem(sys, b: ComplexVector, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "W.mtx", out / "T.mtx", out / "p.txt", out / "q.txt", out / "b.txt"]
    write_matrix_market(files[0], sys.W)
    write_matrix_market(files[1], sys.T)
    write_vector(files[2], sys.p)
    write_vector(files[3], sys.q)
    write_complex_vector(files[4], b)
    return files
