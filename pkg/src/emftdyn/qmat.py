"""Small dense complex linear algebra: Pauli matrices, Kronecker products,
Hermitian eigendecomposition and unitary propagation.

Conventions
-----------
Natural units (hbar = 1). The computational basis state ``|0>`` is the +1
eigenstate of sigma_z, so ``pauli("z") == diag(1, -1)``. In a Kronecker
product the left factor is the first spin.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-10

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NotHermitianError(ValueError):
    """Raised when an operation needs a Hermitian matrix and gets something else."""


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {"x", "y", "z"}.

    A fresh copy is returned, so callers may modify it.
    """
    try:
        return _PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None


def identity(dim: int = 2) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, leftmost factor first."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def basis_state(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_state("01")`` is |0>|1>."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"bit string must be non-empty and consist of 0/1, got {bits!r}")
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.all(np.abs(m - m.conj().T) <= atol))


def _check_hermitian(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within %.0e" % HERMITIAN_ATOL)
    return m


def hermitian_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : array_like, shape (n, n)
        Hermitian matrix. Entries off by more than 1e-12 from their
        conjugate transpose partner are rejected.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Real eigenvalues in ascending order.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, ``h @ v == v @ diag(w)``.

    Raises
    ------
    NotHermitianError
        If ``h`` is not square or not Hermitian.
    """
    h = _check_hermitian(h)
    # LAPACK heevd only reads one triangle; symmetrize to use both.
    hs = 0.5 * (h + h.conj().T)
    if np.isrealobj(hs):
        w, v = np.linalg.eigh(hs)
        return w, v.astype(complex)
    return np.linalg.eigh(hs)


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary ``exp(-i h t)`` built from the eigendecomposition of ``h``."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(h: np.ndarray, t: float, psi: np.ndarray) -> np.ndarray:
    """Return ``exp(-i h t) psi`` for a normalized state ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > NORM_ATOL:
        raise ValueError(f"state is not normalized (norm = {nrm!r})")
    w, v = hermitian_eig(h)
    if psi.shape != (len(w),):
        raise ValueError(f"state of shape {psi.shape} does not match a {len(w)}x{len(w)} operator")
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))


def expectation(op: np.ndarray, psi: np.ndarray) -> complex:
    """``<psi|op|psi>`` for a ket ``psi``."""
    psi = np.asarray(psi)
    return complex(np.vdot(psi, op @ psi))


def projector(psi: np.ndarray) -> np.ndarray:
    """Pure-state density matrix ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
