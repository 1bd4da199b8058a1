"""Fisher information routes, fidelities and closed forms."""

from __future__ import annotations

import numpy as np
import pytest

import fluxmet.metrology as metrology
from fluxmet.dynamics import bell_probe, dephasing_kraus
from fluxmet.errors import DimensionError, NotPsdError, NumericError
from fluxmet.metrology import (
    bell_basis_distribution_theta_free,
    cfi,
    cfi_omega_qec_closed,
    cfi_theta_qec_closed,
    cfi_trajectory_B,
    fidelity,
    fidelity_qubit,
    omega_frame_decay,
    omega_frame_decay_deriv,
    omega_frame_phase,
    omega_frame_phase_deriv,
    qfi_B_trajectory_averaged,
    qfi_fidelity_fd,
    qfi_omega_qec_closed,
    qfi_omega_unitary_controlled,
    qfi_sld,
    qfi_sld_numeric,
    qfi_theta_free_closed,
    qfi_theta_qec_closed,
    qfi_theta_unitary_controlled,
    sld,
    trajectory_distribution_B,
)
from fluxmet.qec import corrected_state_theta_closed
from fluxmet.qmat import expm, kron

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
EYE2 = np.eye(2, dtype=complex)

B, GAMMA, T = 0.1, 0.05, 5.0


def free_theta_state(theta: float, t: float = T) -> np.ndarray:
    """Bell probe through the free dephasing channel (independent route)."""
    k1, k2 = dephasing_kraus(B, GAMMA, t, theta)
    psi = bell_probe()
    rho0 = np.outer(psi, psi.conj())
    return sum(kron(k, EYE2) @ rho0 @ kron(k, EYE2).conj().T for k in (k1, k2))


# ---------------------------------------------------------------------------
# Fidelity
# ---------------------------------------------------------------------------


def test_fidelity_identical_states() -> None:
    rho = np.diag([0.3, 0.7]).astype(complex)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_pure_overlap() -> None:
    zero = np.diag([1.0, 0.0]).astype(complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    assert fidelity(zero, plus) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_fidelity_commuting_case() -> None:
    got = fidelity(np.diag([0.5, 0.5]).astype(complex), np.diag([0.9, 0.1]).astype(complex))
    assert got == pytest.approx(np.sqrt(0.45) + np.sqrt(0.05), abs=1e-12)
    assert got == pytest.approx(0.89443, abs=5e-6)


def test_fidelity_symmetric() -> None:
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r1 = a @ a.conj().T
        r1 /= np.trace(r1).real
        r2 = b @ b.conj().T
        r2 /= np.trace(r2).real
        assert abs(fidelity(r1, r2) - fidelity(r2, r1)) < 1e-10


def test_fidelity_rejects_non_psd() -> None:
    with pytest.raises(NotPsdError):
        fidelity(np.diag([1.5, -0.5]).astype(complex), np.diag([0.5, 0.5]).astype(complex))


def test_fidelity_qubit_trivial_cases() -> None:
    zero = np.diag([1.0, 0.0]).astype(complex)
    one = np.diag([0.0, 1.0]).astype(complex)
    assert fidelity_qubit(zero, zero) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_qubit(zero, one) == pytest.approx(0.0, abs=1e-12)
    assert fidelity_qubit(EYE2 / 2, EYE2 / 2) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_qubit_is_squared_fidelity() -> None:
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r1 = a @ a.conj().T
        r1 /= np.trace(r1).real
        r2 = b @ b.conj().T
        r2 /= np.trace(r2).real
        assert fidelity_qubit(r1, r2) == pytest.approx(fidelity(r1, r2) ** 2, abs=1e-10)


def test_fidelity_qubit_wrong_dimension() -> None:
    with pytest.raises(DimensionError):
        fidelity_qubit(np.eye(4, dtype=complex) / 4, np.eye(4, dtype=complex) / 4)


# ---------------------------------------------------------------------------
# SLD route
# ---------------------------------------------------------------------------


def test_sld_commuting_case() -> None:
    assert np.allclose(sld(EYE2 / 2, SIGMA3 / 2), SIGMA3, atol=1e-12)


def test_sld_pure_state_identity() -> None:
    # |psi> = cos(x)|0> + sin(x)|1>: QFI = 4 <dpsi|dpsi> = 4.
    x = 0.3
    psi = np.array([np.cos(x), np.sin(x)], dtype=complex)
    dpsi = np.array([-np.sin(x), np.cos(x)], dtype=complex)
    rho = np.outer(psi, psi.conj())
    drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
    assert qfi_sld(rho, drho).value == pytest.approx(4.0, abs=1e-10)


def test_sld_free_evolution_matrix_elements() -> None:
    theta = np.pi / 4
    rho = free_theta_state(theta)
    delta = 1e-6
    drho = (free_theta_state(theta + delta) - free_theta_state(theta - delta)) / (2 * delta)
    ell = sld(rho, drho)
    s, c = np.sin(theta), np.cos(theta)
    cb, sb = np.cos(B * T), np.sin(B * T)
    e1 = np.array([-c, s, s, c], dtype=complex) / np.sqrt(2)
    e3 = np.array([-1j * sb + cb * s, cb * c, cb * c, -1j * sb - cb * s]) / np.sqrt(2)
    e4 = np.array([cb - 1j * sb * s, -1j * sb * c, -1j * sb * c, cb + 1j * sb * s]) / np.sqrt(2)
    assert e1.conj() @ ell @ e3 == pytest.approx(-2 * cb, abs=1e-7)
    assert e1.conj() @ ell @ e4 == pytest.approx(2j * sb, abs=1e-7)
    assert e3.conj() @ ell @ e4 == pytest.approx(0.0, abs=1e-7)
    assert e3.conj() @ ell @ e3 == pytest.approx(0.0, abs=1e-7)


def test_qfi_sld_stationary_state() -> None:
    rho = np.diag([0.5, 0.5]).astype(complex)
    assert qfi_sld(rho, np.zeros((2, 2), dtype=complex)).value == 0.0


def test_qfi_sld_free_theta_value() -> None:
    res = qfi_sld_numeric(free_theta_state, np.pi / 4)
    assert res.value == pytest.approx(2 * (1 - np.exp(-0.5) * np.cos(1.0)), rel=1e-6)
    assert res.value == pytest.approx(1.34458, abs=5e-6)


def test_qfi_sld_unitary_field_estimation() -> None:
    # Bell probe, H = b sigma_3 on the probe spin: QFI over b is 4 t^2.
    psi0 = bell_probe()

    def family(b: float) -> np.ndarray:
        u = expm(-1j * b * T * kron(SIGMA3, EYE2))
        psi = u @ psi0
        return np.outer(psi, psi.conj())

    assert qfi_sld_numeric(family, B).value == pytest.approx(4 * T * T, rel=1e-6)


# ---------------------------------------------------------------------------
# Fidelity-FD route and CFI
# ---------------------------------------------------------------------------


def test_qfi_fidelity_fd_constant_family() -> None:
    rho = np.diag([0.4, 0.6]).astype(complex)
    assert qfi_fidelity_fd(lambda x: rho, 0.2).value == pytest.approx(0.0, abs=1e-8)


def test_qfi_fidelity_fd_pure_rotation() -> None:
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)

    def family(x: float) -> np.ndarray:
        psi = expm(-1j * x * SIGMA3 / 2) @ plus
        return np.outer(psi, psi.conj())

    assert qfi_fidelity_fd(family, 0.7, delta=1e-4).value == pytest.approx(1.0, rel=1e-6)


def test_qfi_fidelity_fd_corrected_family() -> None:
    def family(th: float) -> np.ndarray:
        return corrected_state_theta_closed(B, GAMMA, th, np.pi / 4, T)

    got = qfi_fidelity_fd(family, np.pi / 4, delta=1e-4).value
    assert got == pytest.approx(2.0, abs=1e-3)


def test_qfi_fidelity_fd_rejects_superunital(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(metrology, "fidelity", lambda r1, r2: 1.0 + 1e-6)
    rho = np.diag([0.5, 0.5]).astype(complex)
    with pytest.raises(NumericError):
        qfi_fidelity_fd(lambda x: rho, 0.0)


def test_cfi_constant_distribution() -> None:
    dist = bell_basis_distribution_theta_free(B, 0.0, 0.0, 0.3)
    assert cfi(lambda x: dist, 0.3).value == pytest.approx(0.0, abs=1e-10)


def test_cfi_bell_basis_free_theta() -> None:
    got = cfi(lambda th: bell_basis_distribution_theta_free(B, GAMMA, T, th), np.pi / 4)
    want = 2 * (1 - np.exp(-2 * GAMMA * T) * np.cos(2 * B * T))
    assert got.value == pytest.approx(want, rel=1e-6)


def test_cfi_trajectory_B_optimal_phase() -> None:
    beta = np.pi / 4 - B * T
    got = cfi(lambda b: trajectory_distribution_B(b, GAMMA, T, beta), B)
    assert got.value == pytest.approx(4 * T * T * np.exp(-4 * GAMMA * T), rel=1e-6)


def test_cfi_trajectory_B_monte_carlo() -> None:
    rng = np.random.default_rng(11)
    beta = np.pi / 4 - B * T
    got = cfi_trajectory_B(B, GAMMA, T, beta, 10**6, rng)
    assert got.value == pytest.approx(4 * T * T * np.exp(-4 * GAMMA * T), rel=0.05)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def test_theta_free_closed() -> None:
    assert qfi_theta_free_closed(B, 0.0, T).value == pytest.approx(4 * np.sin(B * T) ** 2, abs=1e-12)
    assert qfi_theta_free_closed(B, GAMMA, T).value == pytest.approx(1.34458, abs=5e-6)
    # Small-time fluctuation gain: J_free - J_unitary ~ 4 gamma t.
    for t in (1e-3, 1e-2):
        gain = qfi_theta_free_closed(B, GAMMA, t).value - 4 * np.sin(B * t) ** 2
        assert gain == pytest.approx(4 * GAMMA * t, rel=5e-2)


def test_theta_qec_closed_anchor_values() -> None:
    assert qfi_theta_qec_closed(B, GAMMA, T, 0.0).value == pytest.approx(2.0, abs=1e-12)
    got = qfi_theta_qec_closed(B, GAMMA, T, 0.05).value
    # Independent evaluation of the same quantity, written as the ratio form.
    x = 4 * GAMMA * T * np.sin(0.05) ** 2
    ratio_form = (
        4 * T * T * np.cos(0.05) ** 2
        * (B * B * (1 - np.exp(-x)) + 4 * GAMMA**2 * np.sin(0.05) ** 2)
        / np.expm1(x)
    )
    assert got == pytest.approx(ratio_form, rel=1e-12)
    assert got == pytest.approx(1.9913, abs=5e-5)


def test_theta_qec_closed_unitary_residual() -> None:
    for d in (0.0, 0.1, 0.4):
        got = qfi_theta_qec_closed(B, 0.0, T, d).value
        assert got == pytest.approx(4 * B * B * T * T * np.cos(d) ** 2, rel=1e-10)


def test_theta_qec_closed_second_order_expansion() -> None:
    for d in (0.01, 0.02):
        got = qfi_theta_qec_closed(B, GAMMA, T, d).value
        approx = 2.0 - 4 * B * B * d * d * T * T * (
            1 + 2 * GAMMA**2 / B**2 + GAMMA / (B * B * T) + 4 * GAMMA * T
        )
        assert abs(got - approx) <= 4.0 * d**4


def test_omega_qec_closed_anchor_values() -> None:
    assert qfi_omega_qec_closed(B, GAMMA, T, 0.0).value == pytest.approx(14.58333, abs=5e-6)
    assert qfi_omega_qec_closed(B, 0.0, T, 0.0).value == pytest.approx(B * B * T**4, rel=1e-12)


def test_omega_qec_closed_second_order_expansion() -> None:
    for d in (0.01, 0.02):
        got = qfi_omega_qec_closed(B, GAMMA, T, d).value
        approx = B**2 * T**4 + (4 / 3) * GAMMA * T**3 - (
            0.5 * B**2 * T**3
            + 0.8 * GAMMA * T**2
            + (4 / 3) * B**2 * GAMMA * T**4
            + (8 / 9) * GAMMA**2 * T**3
        ) * d * d * T**3
        assert abs(got - approx) <= 3000.0 * d**4


def test_theta_unitary_controlled() -> None:
    assert qfi_theta_unitary_controlled(B, T, 0.0).value == pytest.approx(1.0, abs=1e-12)
    assert qfi_theta_unitary_controlled(B, T, 0.1).value < 1.0
    for d in (0.05, 0.1):
        got = qfi_theta_unitary_controlled(B, T, d).value
        approx = 4 * B * B * T * T - (1 / 3) * B**4 * T**4 * d**4
        assert abs(got - approx) <= 1e-8


def test_omega_unitary_controlled() -> None:
    assert qfi_omega_unitary_controlled(B, T, 0.0).value == pytest.approx(6.25, abs=1e-12)
    assert qfi_omega_unitary_controlled(B, 0.0, 0.1).value == 0.0
    assert qfi_omega_unitary_controlled(B, T, 0.05).value == pytest.approx(6.2283, abs=5e-5)


def test_B_trajectory_averaged() -> None:
    assert qfi_B_trajectory_averaged(T, 0.0).value == pytest.approx(4 * T * T, rel=1e-12)
    assert qfi_B_trajectory_averaged(T, GAMMA).value == pytest.approx(36.788, abs=5e-4)


def test_B_trajectory_averaged_matches_sld_route() -> None:
    def family(b: float) -> np.ndarray:
        return free_theta_state_b(b)

    def free_theta_state_b(b: float) -> np.ndarray:
        k1, k2 = dephasing_kraus(b, GAMMA, T, np.pi / 4)
        psi = bell_probe()
        rho0 = np.outer(psi, psi.conj())
        return sum(kron(k, EYE2) @ rho0 @ kron(k, EYE2).conj().T for k in (k1, k2))

    got = qfi_sld_numeric(family, B).value
    assert got == pytest.approx(qfi_B_trajectory_averaged(T, GAMMA).value, rel=1e-6)


# ---------------------------------------------------------------------------
# Cross-route and ordering invariants
# ---------------------------------------------------------------------------


def test_route_agreement_grid() -> None:
    for t in range(1, 11):
        for d in (0.0, 0.05, 0.1):
            closed = qfi_theta_qec_closed(B, GAMMA, float(t), d).value

            def family(th: float, t=float(t)) -> np.ndarray:
                return corrected_state_theta_closed(B, GAMMA, th, np.pi / 4, t)

            s = qfi_sld_numeric(family, np.pi / 4 + d).value
            f = qfi_fidelity_fd(family, np.pi / 4 + d).value
            assert abs(s - f) < max(1e-4, 1e-3 * closed)
            assert s == pytest.approx(closed, rel=1e-3)
            assert f == pytest.approx(closed, rel=1e-3)


def test_cfi_never_exceeds_qfi() -> None:
    for d in (0.0, 0.02, 0.05, 0.1, 0.2):
        assert (
            cfi_theta_qec_closed(B, GAMMA, T, d).value
            <= qfi_theta_qec_closed(B, GAMMA, T, d).value + 1e-8
        )
        assert (
            cfi_omega_qec_closed(B, GAMMA, T, d).value
            <= qfi_omega_qec_closed(B, GAMMA, T, d).value + 1e-8
        )
    free = qfi_theta_free_closed(B, GAMMA, T).value
    bell = cfi(lambda th: bell_basis_distribution_theta_free(B, GAMMA, T, th), np.pi / 4).value
    assert bell <= free + 1e-8


def test_measurement_optimality_at_zero_detuning() -> None:
    assert cfi_theta_qec_closed(B, GAMMA, T, 0.0).value == pytest.approx(
        qfi_theta_qec_closed(B, GAMMA, T, 0.0).value, abs=1e-6
    )
    assert cfi_omega_qec_closed(B, GAMMA, T, 0.0).value == pytest.approx(
        qfi_omega_qec_closed(B, GAMMA, T, 0.0).value, abs=1e-6
    )


def test_measurement_optimality_curvature() -> None:
    d = 0.01
    for qfi_fn, cfi_fn in (
        (qfi_theta_qec_closed, cfi_theta_qec_closed),
        (qfi_omega_qec_closed, cfi_omega_qec_closed),
    ):
        cq = (qfi_fn(B, GAMMA, T, 0.0).value - qfi_fn(B, GAMMA, T, d).value) / d**2
        cc = (cfi_fn(B, GAMMA, T, 0.0).value - cfi_fn(B, GAMMA, T, d).value) / d**2
        assert cc == pytest.approx(cq, rel=0.05)


def test_fluctuation_advantage_exact() -> None:
    for g, t in ((0.05, 5.0), (0.2, 2.0), (0.01, 8.0)):
        adv = (
            qfi_theta_qec_closed(B, g, t, 0.0).value
            - qfi_theta_unitary_controlled(B, t, 0.0).value
        )
        assert adv == pytest.approx(4 * g * t, rel=1e-12)
        adv_omega = (
            qfi_omega_qec_closed(B, g, t, 0.0).value
            - qfi_omega_unitary_controlled(B, t, 0.0).value
        )
        assert adv_omega == pytest.approx((4 / 3) * g * t**3, rel=1e-12)


def test_fluctuation_penalty_for_field_estimation() -> None:
    for g in (0.01, 0.05, 0.2):
        for t in (1.0, 5.0):
            assert qfi_B_trajectory_averaged(t, g).value < 4 * t * t


# ---------------------------------------------------------------------------
# Rotating-frame helpers
# ---------------------------------------------------------------------------


def test_frame_helpers_crossover_continuity() -> None:
    # Series/direct switch: phase helpers at |a t| = 0.1, decay helpers at
    # |2 a t| = 0.1.  Values on both sides of each switch must agree.
    cases = (
        (omega_frame_phase, B, 1.0),
        (omega_frame_phase_deriv, B, 1.0),
        (omega_frame_decay, GAMMA, 2.0),
        (omega_frame_decay_deriv, GAMMA, 2.0),
    )
    for fn, coeff, scale in cases:
        a_switch = 0.1 / (scale * T)
        lo = fn(coeff, a_switch * (1 - 1e-9), T)
        hi = fn(coeff, a_switch * (1 + 1e-9), T)
        assert lo == pytest.approx(hi, rel=1e-6)


def test_frame_derivative_helpers_match_finite_differences() -> None:
    h = 1e-6
    for a in (0.0, 0.03, 0.4):
        fd_phase = (omega_frame_phase(B, a + h, T) - omega_frame_phase(B, a - h, T)) / (2 * h)
        assert omega_frame_phase_deriv(B, a, T) == pytest.approx(fd_phase, rel=1e-6, abs=1e-9)
        fd_decay = (omega_frame_decay(GAMMA, a + h, T) - omega_frame_decay(GAMMA, a - h, T)) / (2 * h)
        assert omega_frame_decay_deriv(GAMMA, a, T) == pytest.approx(fd_decay, rel=1e-6, abs=1e-9)
