"""Exact quench dynamics of the periodic transverse Ising chain

    H(h) = -J sum_l sx_l sx_{l+1} - h sum_l sz_l

via the Jordan-Wigner mapping to free fermions, plus a dense
exact-diagonalization oracle for small rings.

Jordan-Wigner conventions (``|0>`` = sz up = empty site)::

    sz_l = 1 - 2 n_l = A_l B_l,     A_l = c_l^+ + c_l,   B_l = c_l^+ - c_l
    sx_l sx_{l+1} = B_l A_{l+1},    sy_l sy_{l+1} = -A_l B_{l+1}
    sx_l sy_{l+1} = i B_l B_{l+1},  sy_l sx_{l+1} = i A_l A_{l+1}

In the even fermion-parity sector the ring has antiperiodic fermion
boundary conditions, momenta ``k = +-(2m - 1) pi / N``. Each pair
``(k, -k)`` lives in the two-level space ``{|0>, c_k^+ c_{-k}^+ |0>}`` with

    H_k = -2J cos k + 2 (J cos k - h) s_z - 2 J sin k s_y.

Nearest-neighbour correlators follow from the two-point functions
``<c_l^+ c_{l+r}>`` and ``<c_l c_{l+r}>`` by Wick's theorem. The whole
convention set is cross-checked against :func:`dense_reference`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import qmat
from .emft import Trajectory
from .entanglement import log_negativity

DENSE_MAX_N = 12
RHO_CLIP_TOL = 1e-8


class InconsistentCorrelators(ValueError):
    """Reconstructed two-site state is not positive semidefinite."""


@dataclass(frozen=True)
class ChainSpec:
    """Periodic ring of ``N`` spins (``N`` even), even-parity sector."""

    N: int = 512
    J: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise ValueError(f"chain length must be an even integer >= 8, got {self.N!r}")
        if not self.J > 0:
            raise ValueError("J must be positive")

    @property
    def momenta(self) -> np.ndarray:
        """The ``N/2`` positive momenta ``(2m - 1) pi / N``."""
        m = np.arange(1, self.N // 2 + 1)
        return (2 * m - 1) * np.pi / self.N


@dataclass(frozen=True)
class ModeState:
    """Amplitudes of every ``(k, -k)`` pair on ``{|0>, |k, -k>}``.

    ``theta`` is the Bogoliubov angle of the pre-quench mode Hamiltonian:
    the pre-quench ground state of pair ``k`` is
    ``(sin(theta/2), -i cos(theta/2))``.
    """

    spec: ChainSpec
    k: np.ndarray
    theta: np.ndarray
    empty: np.ndarray
    paired: np.ndarray
    tau: float = 0.0

    def evolve(self, tau: float, h_post: float = 0.0) -> "ModeState":
        """Propagate every pair from this state by scaled time ``tau`` under
        field ``h_post``."""
        J = self.spec.J
        dz = 2.0 * (J * np.cos(self.k) - h_post)
        dy = -2.0 * J * np.sin(self.k)
        d = np.hypot(dz, dy)
        t = tau / J
        c, s = np.cos(d * t), np.sin(d * t)
        nz, ny = dz / d, dy / d
        # exp(-i t (dz s_z + dy s_y)), dropping the pair's global phase
        u, v = self.empty, self.paired
        u_new = (c - 1j * s * nz) * u - s * ny * v
        v_new = s * ny * u + (c + 1j * s * nz) * v
        return ModeState(self.spec, self.k, self.theta, u_new, v_new, self.tau + tau)

    def two_point(self) -> tuple[dict, dict]:
        """``F[r] = <c_l^+ c_{l+r}>`` and ``P[r] = <c_l c_{l+r}>`` for
        ``r`` in -1, 0, 1."""
        N = self.spec.N
        occ = np.abs(self.paired) ** 2
        anom = np.conj(self.empty) * self.paired
        F, P = {}, {}
        for r in (-1, 0, 1):
            F[r] = 2.0 / N * np.sum(np.cos(self.k * r) * occ)
            P[r] = 2j / N * np.sum(np.sin(self.k * r) * anom)
        return F, P


def diagonalize_modes(spec: ChainSpec, a: float) -> ModeState:
    """Even-sector ground state of ``H(a)`` as a product over momentum pairs."""
    k = spec.momenta
    dz = 2.0 * (spec.J * np.cos(k) - a)
    dy = -2.0 * spec.J * np.sin(k)
    theta = np.arctan2(dy, dz)
    empty = np.sin(theta / 2).astype(complex)
    paired = -1j * np.cos(theta / 2)
    return ModeState(spec, k, theta, empty, paired)


@dataclass(frozen=True)
class CorrelatorSet:
    """Translation-invariant nearest-neighbour Pauli expectation values.

    Parity-odd correlators (single sx, sx sz, ...) vanish identically and are
    not stored.
    """

    mz: float
    gxx: float
    gyy: float
    gzz: float
    gxy: float
    gyx: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    @classmethod
    def from_rho(cls, rho: np.ndarray) -> "CorrelatorSet":
        """Read the correlators off a two-site density matrix.

        ``mz`` is taken from the first site.
        """
        s = {ax: qmat.pauli(ax) for ax in "xyz"}
        I2 = qmat.identity(2)

        def ev(a, b):
            return float(np.trace(rho @ qmat.kron(a, b)).real)

        return cls(
            mz=ev(s["z"], I2),
            gxx=ev(s["x"], s["x"]),
            gyy=ev(s["y"], s["y"]),
            gzz=ev(s["z"], s["z"]),
            gxy=ev(s["x"], s["y"]),
            gyx=ev(s["y"], s["x"]),
        )


def _majorana(F: dict, P: dict, r: int) -> dict:
    """``<X_l Y_{l+r}>`` for X, Y in {A, B}."""
    cdcd = np.conj(P[-r])  # <c_l^+ c_m^+>
    cdc = F[r]  # <c_l^+ c_m>
    ccd = (1.0 if r == 0 else 0.0) - F[-r]  # <c_l c_m^+>
    cc = P[r]  # <c_l c_m>
    return {
        "AA": cdcd + cdc + ccd + cc,
        "AB": cdcd - cdc + ccd - cc,
        "BA": cdcd + cdc - ccd - cc,
        "BB": cdcd - cdc - ccd + cc,
    }


def correlators_from_modes(modes: ModeState) -> CorrelatorSet:
    F, P = modes.two_point()
    on = _majorana(F, P, 0)
    nn = _majorana(F, P, 1)
    mz = on["AB"]
    gzz = mz * mz - nn["AA"] * nn["BB"] + nn["AB"] * nn["BA"]
    return CorrelatorSet(
        mz=float(np.real(mz)),
        gxx=float(np.real(nn["BA"])),
        gyy=float(np.real(-nn["AB"])),
        gzz=float(np.real(gzz)),
        gxy=float(np.real(1j * nn["BB"])),
        gyx=float(np.real(1j * nn["AA"])),
    )


def quench_correlators(spec: ChainSpec, a: float, tau: float, h_post: float = 0.0) -> CorrelatorSet:
    """Nearest-neighbour correlators at scaled time ``tau = t J`` after the
    field is switched from ``a`` to ``h_post`` (zero by default)."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    modes = diagonalize_modes(spec, a)
    if tau > 0:
        modes = modes.evolve(tau, h_post)
    return correlators_from_modes(modes)


_PAULI_TERMS = None


def _pauli_terms():
    global _PAULI_TERMS
    if _PAULI_TERMS is None:
        s = {ax: qmat.pauli(ax) for ax in "xyz"}
        I2 = qmat.identity(2)
        _PAULI_TERMS = {
            "zI": qmat.kron(s["z"], I2),
            "Iz": qmat.kron(I2, s["z"]),
            "xx": qmat.kron(s["x"], s["x"]),
            "yy": qmat.kron(s["y"], s["y"]),
            "zz": qmat.kron(s["z"], s["z"]),
            "xy": qmat.kron(s["x"], s["y"]),
            "yx": qmat.kron(s["y"], s["x"]),
        }
    return _PAULI_TERMS


def two_site_rho(corr: CorrelatorSet, clip_tol: float = RHO_CLIP_TOL) -> np.ndarray:
    """Two-site density matrix ``1/4 sum <s_u s_v> s_u (x) s_v``.

    Eigenvalues in ``[-clip_tol, 0)`` are clipped to zero and the result is
    renormalized; anything more negative raises
    :class:`InconsistentCorrelators`.
    """
    t = _pauli_terms()
    rho = np.eye(4, dtype=complex)
    rho += corr.mz * (t["zI"] + t["Iz"])
    rho += corr.gxx * t["xx"] + corr.gyy * t["yy"] + corr.gzz * t["zz"]
    rho += corr.gxy * t["xy"] + corr.gyx * t["yx"]
    rho /= 4.0
    w, v = np.linalg.eigh(rho)
    if w[0] < -clip_tol:
        raise InconsistentCorrelators(f"two-site state has eigenvalue {w[0]:.3e} < -{clip_tol:g}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
        rho /= np.trace(rho).real
    return rho


# --- dense oracle -----------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _dense_operators(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Real matrices ``sum sx_l sx_{l+1}`` (periodic) and ``sum sz_l``."""
    dim = 2**N
    idx = np.arange(dim)
    bits = (idx[:, None] >> (N - 1 - np.arange(N))) & 1  # site 0 = leftmost factor
    zsum = np.diag((1 - 2 * bits).sum(axis=1).astype(float))
    xx = np.zeros((dim, dim))
    for l in range(N):
        m = N - 1 - l
        m2 = N - 1 - (l + 1) % N
        xx[idx, idx ^ (1 << m) ^ (1 << m2)] += 1.0
    return xx, zsum


@functools.lru_cache(maxsize=16)
def _dense_eig(N: int, J: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    xx, zsum = _dense_operators(N)
    return np.linalg.eigh(-J * xx - h * zsum)


def dense_state(spec: ChainSpec, a: float, tau: float, h_post: float = 0.0) -> np.ndarray:
    """Full ``2^N`` state after the quench, by dense exact diagonalization."""
    if spec.N > DENSE_MAX_N:
        raise ValueError(f"dense oracle limited to N <= {DENSE_MAX_N}, got {spec.N}")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    w0, v0 = _dense_eig(spec.N, spec.J, float(a))
    if w0[1] - w0[0] < 1e-10:
        raise ValueError("pre-quench ground state is degenerate")
    psi = v0[:, 0].astype(complex)
    if tau == 0:
        return psi
    w, v = _dense_eig(spec.N, spec.J, float(h_post))
    return v @ (np.exp(-1j * w * (tau / spec.J)) * (v.T @ psi))


def reduced_pair(psi: np.ndarray, N: int, site: int = 0) -> np.ndarray:
    """Density matrix of sites ``(site, site + 1 mod N)`` of an ``N``-spin ket."""
    t = np.asarray(psi).reshape((2,) * N)
    other = [q for q in range(N) if q not in (site, (site + 1) % N)]
    t = np.transpose(t, [site, (site + 1) % N] + other).reshape(4, -1)
    return t @ t.conj().T


def dense_reference(spec: ChainSpec, a: float, tau: float, h_post: float = 0.0) -> np.ndarray:
    """Two-site density matrix of sites (0, 1) from dense exact evolution."""
    return reduced_pair(dense_state(spec, a, tau, h_post), spec.N)


# --- trajectories -------------------------------------------------------------


def exact_entanglement_trajectory(
    spec: ChainSpec, a: float, tau_grid: Sequence[float], h_post: float = 0.0
) -> Trajectory:
    """Nearest-neighbour log-negativity along ``tau_grid``; ``C`` holds
    ``<sx_l sx_{l+1}>``."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    modes0 = diagonalize_modes(spec, a)
    C, L = [], []
    for tau in tau_grid:
        modes = modes0.evolve(float(tau), h_post) if tau > 0 else modes0
        corr = correlators_from_modes(modes)
        C.append(corr.gxx)
        L.append(log_negativity(two_site_rho(corr)))
    return Trajectory(tau_grid, C, L, np.ones(len(tau_grid), dtype=bool))


def dense_entanglement_trajectory(
    spec: ChainSpec, a: float, tau_grid: Sequence[float], h_post: float = 0.0
) -> Trajectory:
    """Same as :func:`exact_entanglement_trajectory` from the dense oracle."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    C, L = [], []
    for tau in tau_grid:
        rho = dense_reference(spec, a, float(tau), h_post)
        C.append(CorrelatorSet.from_rho(rho).gxx)
        L.append(log_negativity(rho))
    return Trajectory(tau_grid, C, L, np.ones(len(tau_grid), dtype=bool))
