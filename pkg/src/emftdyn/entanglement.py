"""Partial transposition and (logarithmic) negativity of two-qubit states.

Subsystem A is always the first tensor factor. Only 2x2 (x) 2x2 states are
handled; for these the Peres-Horodecki test is necessary and sufficient.
"""

from __future__ import annotations

import numpy as np

NEGATIVE_EIG_THRESHOLD = 1e-12
DENSITY_ATOL = 1e-10


class InvalidDensityMatrix(ValueError):
    pass


def validate_density_matrix(rho: np.ndarray, atol: float = DENSITY_ATOL) -> np.ndarray:
    """Check that ``rho`` is a 4x4 Hermitian, unit-trace, positive matrix.

    Returns ``rho`` as a complex array. Raises :class:`InvalidDensityMatrix`
    otherwise.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidDensityMatrix(f"expected a 4x4 two-qubit density matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidDensityMatrix("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise InvalidDensityMatrix(f"density matrix trace is {tr!r}, not 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -atol:
        raise InvalidDensityMatrix(f"density matrix has negative eigenvalue {lam_min!r}")
    return rho


def partial_transpose(rho: np.ndarray, check: bool = True) -> np.ndarray:
    """Transpose over subsystem A.

    Element ((i, mu), (j, nu)) of the result is element ((j, mu), (i, nu))
    of ``rho``. This is an index permutation, so applying it twice returns
    the input exactly. With ``check=False`` any 4x4 matrix is accepted.
    """
    if check:
        rho = validate_density_matrix(rho)
    else:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidDensityMatrix(f"expected a 4x4 matrix, got shape {rho.shape}")
    return _pt(rho)


def _pt(rho: np.ndarray) -> np.ndarray:
    # axes of the reshaped tensor: (i, mu, j, nu)
    return rho.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)


def pt_spectrum(rho: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the partial transpose of ``rho``."""
    pt = partial_transpose(rho)
    return np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))


def negativity(rho: np.ndarray) -> float:
    """Sum of the moduli of the negative eigenvalues of the partial transpose.

    Eigenvalues in [-1e-12, 0) are treated as round-off and ignored.
    """
    lam = pt_spectrum(rho)
    neg = lam[lam < -NEGATIVE_EIG_THRESHOLD]
    return float(-neg.sum()) if neg.size else 0.0


def log_negativity(rho: np.ndarray) -> float:
    """Logarithmic negativity ``log2(2 N + 1)`` in ebits."""
    return float(np.log2(2.0 * negativity(rho) + 1.0))


def is_entangled(rho: np.ndarray) -> bool:
    return bool(pt_spectrum(rho)[0] < -NEGATIVE_EIG_THRESHOLD)


def pure_state_log_negativity(psi: np.ndarray) -> float:
    """Convenience wrapper: log-negativity of the pure two-qubit state ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError(f"expected a two-qubit state vector, got shape {psi.shape}")
    psi = psi / np.linalg.norm(psi)
    return log_negativity(np.outer(psi, psi.conj()))
