import math

import numpy as np
import pytest

from emftdyn import qmat
from emftdyn.emft import (
    IntegrationError,
    QuenchProtocol,
    Trajectory,
    build_hamiltonian,
    damped_fixed_point,
    emft_entanglement_trajectory,
    evolve_fixed_point,
    evolve_fixed_point_trajectory,
    evolve_tdscf,
    static_fixed_point,
)


def closed_form_C(alpha):
    """Self-consistent correlator from the even-parity 2x2 block."""
    return math.sqrt(1 - alpha**2) if abs(alpha) < 1 else 0.0


def closed_form_L(C, tau):
    """Log-negativity of the two-level even-parity oscillation."""
    p = 0.5 * np.sqrt(np.sin(2 * C * tau) ** 2 + C**2 * np.cos(2 * C * tau) ** 2)
    return np.log2(1 + 2 * p)


def brute_map(C, a, nu=1):
    """<sx sx> in the ground state of a hand-built 4x4 EMFT Hamiltonian."""
    x = nu * C
    h = np.array([[-a, 0, 0, -x], [0, 0, -x, 0], [0, -x, 0, 0], [-x, 0, 0, a]], dtype=float)
    w, v = np.linalg.eigh(h)
    g = v[:, 0]
    return 2 * g[0] * g[3] + 2 * g[1] * g[2]


# --- protocol ---------------------------------------------------------------


@pytest.mark.parametrize("kw", [dict(a=0.0), dict(a=1.0, J=0.0), dict(a=1.0, J=-1.0), dict(a=1.0, nu_e=0), dict(a=1.0, nu_e=1.5)])
def test_protocol_validation(kw):
    with pytest.raises(ValueError):
        QuenchProtocol(**kw)


def test_protocol_scaling():
    p = QuenchProtocol.from_alpha(0.5, nu_e=2, J=1.5)
    assert p.a == pytest.approx(1.5)
    assert p.alpha == pytest.approx(0.5)
    assert p.time(3.0) == pytest.approx(1.0)


# --- Hamiltonian --------------------------------------------------------------


def test_hamiltonian_field_only():
    a = 0.7
    h = build_hamiltonian(QuenchProtocol(a=a), 0.0, a)
    assert np.allclose(h, np.diag([-a, 0, 0, a]), atol=0)


def test_hamiltonian_coupling_only():
    h = build_hamiltonian(QuenchProtocol(a=1.0), 1.0, 0.0)
    assert np.allclose(h, -np.fliplr(np.eye(4)), atol=0)


def test_hamiltonian_real_symmetric(rng):
    for _ in range(20):
        p = QuenchProtocol(a=rng.uniform(-3, 3), nu_e=int(rng.integers(1, 5)))
        h = build_hamiltonian(p, rng.uniform(-1, 1), rng.uniform(-2, 2))
        assert np.all(h.imag == 0)
        assert np.array_equal(h, h.T)


def test_hamiltonian_matches_brute_form():
    h = build_hamiltonian(QuenchProtocol(a=1.0, nu_e=3), 0.4, 0.9)
    x = 1.2
    expected = np.array([[-0.9, 0, 0, -x], [0, 0, -x, 0], [0, -x, 0, 0], [-x, 0, 0, 0.9]])
    assert np.allclose(h, expected, atol=1e-15)


def test_hamiltonian_rejects_large_C():
    with pytest.raises(ValueError):
        build_hamiltonian(QuenchProtocol(a=1.0), 1.5, 0.0)


# --- static fixed point -----------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.5, 0.594, 0.1, 0.9])
def test_static_closed_form(alpha):
    sol = static_fixed_point(QuenchProtocol.from_alpha(alpha))
    assert sol.converged
    assert abs(sol.C - closed_form_C(alpha)) <= 1e-8
    assert sol.residual <= 1e-10
    assert abs(sol.C - qmat.expectation(qmat.kron(qmat.pauli("x"), qmat.pauli("x")), sol.state).real) <= 1e-10


def test_static_value_at_0594():
    sol = static_fixed_point(QuenchProtocol.from_alpha(0.594))
    assert sol.C == pytest.approx(math.sqrt(1 - 0.594**2), abs=1e-10)
    assert sol.C == pytest.approx(0.80446504, abs=1e-8)


def test_static_above_transition_is_polarized():
    sol = static_fixed_point(QuenchProtocol.from_alpha(1.5))
    assert sol.converged and abs(sol.C) <= 1e-10
    assert np.allclose(np.abs(sol.state), np.abs(qmat.basis_state("00")), atol=1e-9)


def test_only_trivial_root_above_transition():
    # brute scan of C -> <sx sx> - C on a fine grid: single sign change at 0
    cs = np.linspace(-1, 1, 2000)  # even count: 0 is not a grid point
    g = np.array([brute_map(c, 1.5) - c for c in cs])
    roots = cs[:-1][np.sign(g[:-1]) != np.sign(g[1:])]
    assert len(roots) == 1 and abs(roots[0]) < 2e-3


def test_three_roots_below_transition():
    cs = np.linspace(-1, 1, 2000)
    g = np.array([brute_map(c, 0.5) - c for c in cs])
    roots = cs[:-1][np.sign(g[:-1]) != np.sign(g[1:])]
    assert len(roots) == 3
    assert np.allclose(roots, [-math.sqrt(0.75), 0, math.sqrt(0.75)], atol=2e-3)


def test_static_prefers_lower_energy_and_nonnegative_branch():
    p = QuenchProtocol.from_alpha(0.5)
    sol = static_fixed_point(p, seeds=(-1.0, -0.5))
    assert sol.C < 0  # only the negative branch was reachable
    best = static_fixed_point(p)
    assert best.C > 0
    assert best.energy == pytest.approx(-1.0, abs=1e-9)  # -sqrt(a^2 + x^2) = -nu J


def test_negative_field():
    sol = static_fixed_point(QuenchProtocol(a=-0.5))
    assert sol.C == pytest.approx(math.sqrt(0.75), abs=1e-9)


def test_nu_e_scaling():
    sol = static_fixed_point(QuenchProtocol.from_alpha(0.6, nu_e=4))
    assert sol.C == pytest.approx(0.8, abs=1e-9)


def test_static_nonconvergence_is_flagged():
    sol = static_fixed_point(QuenchProtocol.from_alpha(0.5), max_iter=3, seeds=(1.0,))
    assert not sol.converged
    assert sol.residual > 1e-10


def test_damped_fixed_point_on_scalar_map():
    c, _, res, it, ok = damped_fixed_point(lambda c: (math.cos(c), None), 0.0)
    assert ok and abs(c - 0.7390851332151607) <= 1e-10 and res <= 1e-10 and it > 0


@pytest.mark.parametrize("alpha", [0.5, 0.95, 1.05, 1.5])
def test_newton_acceleration_keeps_the_root(alpha):
    # plain damped iteration vs the accelerated default, same seed
    p = QuenchProtocol.from_alpha(alpha)

    def update(c):
        _, v = np.linalg.eigh(np.real(build_hamiltonian(p, c, p.a)))
        return float(v[:, 0] @ np.real(qmat.kron(qmat.pauli("x"), qmat.pauli("x"))) @ v[:, 0]), None

    fast = damped_fixed_point(update, 0.5)
    slow = damped_fixed_point(update, 0.5, newton_below=0.0, polish_steps=0)
    assert fast[4] and slow[4]
    assert fast[3] <= slow[3]
    assert fast[0] == pytest.approx(closed_form_C(alpha), abs=1e-12)
    assert abs(slow[0] - fast[0]) <= 1e-8


# --- dynamics ----------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 0.594, 0.95, 1.5])
def test_tau_zero_reproduces_static(alpha):
    p = QuenchProtocol.from_alpha(alpha)
    static = static_fixed_point(p)
    sol = evolve_fixed_point(p, 0.0)
    assert sol.C == pytest.approx(static.C, abs=1e-12)
    assert sol.log_negativity == pytest.approx(math.log2(1 + static.C), abs=1e-9)


def test_above_transition_no_dynamics():
    p = QuenchProtocol.from_alpha(1.5)
    tr = evolve_fixed_point_trajectory(p, np.linspace(0, 10, 21))
    assert np.all(np.abs(tr.C) <= 1e-10) and np.all(tr.L == 0)


def test_conserved_correlator():
    p = QuenchProtocol.from_alpha(0.594)
    tr = evolve_fixed_point_trajectory(p, np.linspace(0, 20, 101))
    assert np.max(np.abs(tr.C - closed_form_C(0.594))) <= 1e-8
    assert tr.converged.all()


@pytest.mark.parametrize("alpha", [0.2, 0.594, 0.9])
def test_trajectory_matches_closed_form(alpha):
    C = closed_form_C(alpha)
    taus = np.linspace(0, 12, 97)
    tr = emft_entanglement_trajectory(QuenchProtocol.from_alpha(alpha), taus)
    assert np.max(np.abs(tr.L - closed_form_L(C, taus))) <= 1e-8


def test_extrema_locations_at_0594():
    C = closed_form_C(0.594)
    p = QuenchProtocol.from_alpha(0.594)
    k = np.arange(8)
    crests = (np.pi / 4 + k * np.pi / 2) / C
    troughs = (k + 1) * np.pi / (2 * C)
    L_crest = emft_entanglement_trajectory(p, crests).L
    L_trough = emft_entanglement_trajectory(p, troughs).L
    assert np.allclose(L_crest, 1.0, atol=1e-9)
    assert np.allclose(L_trough, math.log2(1 + C), atol=1e-9)


def test_small_alpha_stationary_bell():
    tr = emft_entanglement_trajectory(QuenchProtocol.from_alpha(1e-4), np.linspace(0, 10, 41))
    assert np.allclose(tr.L, 1.0, atol=1e-7)


def test_scaled_time_with_coordination_number():
    # L depends on tau only through C*(alpha), whatever nu_E is
    taus = np.linspace(0, 5, 11)
    l1 = emft_entanglement_trajectory(QuenchProtocol.from_alpha(0.4, nu_e=1), taus).L
    l4 = emft_entanglement_trajectory(QuenchProtocol.from_alpha(0.4, nu_e=4), taus).L
    assert np.allclose(l1, l4, atol=1e-9)


def test_nonzero_post_field_fixed_point_is_self_consistent():
    p = QuenchProtocol.from_alpha(0.5, h_post=0.4)
    init = static_fixed_point(p)
    xx = qmat.kron(qmat.pauli("x"), qmat.pauli("x"))
    seed = init.C
    for tau in np.linspace(0, 3, 7):
        sol = evolve_fixed_point(p, tau, seed=seed, initial=init)
        assert sol.converged
        # rebuild the state independently and check the consistency equation
        psi = qmat.evolve(build_hamiltonian(p, sol.C, p.h_post), p.time(tau), init.state)
        assert abs(qmat.expectation(xx, psi).real - sol.C) <= 1e-10
        assert np.allclose(psi, sol.state, atol=1e-10)
        seed = sol.C


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        evolve_fixed_point(QuenchProtocol(a=0.5), -1.0)


# --- time-dependent self-consistent integration ----------------------------------


def test_tdscf_agrees_with_fixed_point():
    p = QuenchProtocol.from_alpha(0.594)
    taus = np.linspace(0, 20, 200)
    a = evolve_tdscf(p, taus)
    b = evolve_fixed_point_trajectory(p, taus)
    assert np.max(np.abs(a.C - b.C)) <= 1e-6
    assert np.max(np.abs(a.L - b.L)) <= 1e-6


def test_tdscf_constant_field_is_stationary():
    p = QuenchProtocol.from_alpha(0.7, h_post=0.7)
    tr = evolve_tdscf(p, np.linspace(0, 10, 51))
    assert np.ptp(tr.C) <= 1e-8 and np.ptp(tr.L) <= 1e-8


def test_tdscf_nu_e_scaling():
    taus = np.linspace(0, 6, 31)
    a = evolve_tdscf(QuenchProtocol.from_alpha(0.5, nu_e=3), taus)
    b = evolve_fixed_point_trajectory(QuenchProtocol.from_alpha(0.5, nu_e=3), taus)
    assert np.max(np.abs(a.L - b.L)) <= 1e-6


def test_tdscf_detects_drift():
    with pytest.raises(IntegrationError):
        evolve_tdscf(QuenchProtocol.from_alpha(0.5), [0.0, 50.0], max_step=2.0)


def test_tdscf_grid_must_start_at_zero():
    with pytest.raises(ValueError):
        evolve_tdscf(QuenchProtocol.from_alpha(0.5), [0.5, 1.0])


def test_tdscf_mode_dispatch():
    tr = emft_entanglement_trajectory(QuenchProtocol.from_alpha(0.5), [0, 1, 2], mode="tdscf")
    assert len(tr) == 3
    with pytest.raises(ValueError):
        emft_entanglement_trajectory(QuenchProtocol.from_alpha(0.5), [0, 1], mode="nope")


def test_trajectory_rejects_unsorted_tau():
    with pytest.raises(ValueError):
        Trajectory([0, 2, 1], [0, 0, 0], [0, 0, 0], [True] * 3)
