"""Physical models and their evolution.

Two built-in models on probe+ancilla (dim 4):

* ``theta_model`` -- static field axis at angle theta: H = B*sigma_n(theta),
  one Lindblad operator sqrt(gamma)*sigma_n(theta), ancilla idle.
* ``omega_model`` -- axis rotating in the XY plane at angular frequency
  omega: sigma_n(omega, t) = cos(omega t) sigma1 - sin(omega t) sigma2.

Deterministic evolution is fixed-step RK4 on the master equation
drho/dt = -i[H, rho] + sum_k (E_k rho E_k^dag - {E_k^dag E_k, rho}/2).
The stochastic picture draws the accumulated phase Phi = B t + phi with
phi ~ Normal(0, gamma t) and averages pure-state trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InstabilityError, StepError
from .qmat import eye2, kron, sigma1, sigma2, sigma3

MatrixFn = Callable[[float], np.ndarray]


def sigma_n_theta(theta: float) -> np.ndarray:
    """Field axis cos(theta) sigma1 + sin(theta) sigma3."""
    return np.cos(theta) * sigma1 + np.sin(theta) * sigma3


def sigma_n_theta_deriv(theta: float) -> np.ndarray:
    """d sigma_n / d theta = -sin(theta) sigma1 + cos(theta) sigma3."""
    return -np.sin(theta) * sigma1 + np.cos(theta) * sigma3


def sigma_n_omega(omega: float, t: float) -> np.ndarray:
    """Rotating axis cos(omega t) sigma1 - sin(omega t) sigma2."""
    return np.cos(omega * t) * sigma1 - np.sin(omega * t) * sigma2


def bell_probe() -> np.ndarray:
    """Maximally entangled probe (|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return v


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian, Lindblad operators, and optional parameter derivatives.

    All operator entries are functions of time returning matrices, so the
    same record covers both the static theta model and the rotating omega
    model.  Derivative slots hold d/dx and d^2/dx^2 of H and of each E_k at
    the operating point; they are required by the general engine only.
    """

    dim: int
    hamiltonian: MatrixFn
    lindblads: list[MatrixFn]
    d_hamiltonian: MatrixFn | None = None
    d_lindblads: list[MatrixFn] | None = field(default=None)
    dd_hamiltonian: MatrixFn | None = None
    dd_lindblads: list[MatrixFn] | None = field(default=None)

    def __post_init__(self) -> None:
        h0 = self.hamiltonian(0.0)
        if np.max(np.abs(h0 - h0.conj().T)) > 1e-10:
            raise DomainError("hamiltonian(0) is not Hermitian")
        for name in ("d_lindblads", "dd_lindblads"):
            derivs = getattr(self, name)
            if derivs is not None and len(derivs) != len(self.lindblads):
                raise DomainError(f"{name} length {len(derivs)} != {len(self.lindblads)} lindblads")


def _const(a: np.ndarray) -> MatrixFn:
    return lambda t: a


def theta_model(B: float, gamma: float, theta: float) -> LindbladModel:
    """Probe+ancilla model with a static fluctuating field along sigma_n(theta).

    Parameters
    ----------
    B : float
        Field strength.
    gamma : float
        Fluctuation rate (>= 0); enters as Lindblad operator sqrt(gamma)*sigma_n.
    theta : float
        Field axis angle.
    """
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    sn = kron(sigma_n_theta(theta), eye2)
    sm = kron(sigma_n_theta_deriv(theta), eye2)
    root = np.sqrt(gamma)
    return LindbladModel(
        dim=4,
        hamiltonian=_const(B * sn),
        lindblads=[_const(root * sn)],
        d_hamiltonian=_const(B * sm),
        d_lindblads=[_const(root * sm)],
        dd_hamiltonian=_const(-B * sn),
        dd_lindblads=[_const(-root * sn)],
    )


def omega_model(B: float, gamma: float, omega: float) -> LindbladModel:
    """Probe+ancilla model whose field axis rotates in the XY plane at omega."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    root = np.sqrt(gamma)

    def sn4(t: float) -> np.ndarray:
        return kron(sigma_n_omega(omega, t), eye2)

    def dsn4(t: float) -> np.ndarray:
        # d sigma_n / d omega = -t (sin(omega t) sigma1 + cos(omega t) sigma2)
        return kron(-t * (np.sin(omega * t) * sigma1 + np.cos(omega * t) * sigma2), eye2)

    def ddsn4(t: float) -> np.ndarray:
        # d^2 sigma_n / d omega^2 = -t^2 sigma_n(omega, t)
        return -(t**2) * sn4(t)

    return LindbladModel(
        dim=4,
        hamiltonian=lambda t: B * sn4(t),
        lindblads=[lambda t: root * sn4(t)],
        d_hamiltonian=lambda t: B * dsn4(t),
        d_lindblads=[lambda t: root * dsn4(t)],
        dd_hamiltonian=lambda t: B * ddsn4(t),
        dd_lindblads=[lambda t: root * ddsn4(t)],
    )


def _dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a.conj(), -1, -2)


def lindblad_rhs(model: LindbladModel, rho: np.ndarray, t: float) -> np.ndarray:
    h = model.hamiltonian(t)
    out = -1j * (h @ rho - rho @ h)
    for lf in model.lindblads:
        e = lf(t)
        ede = e.conj().T @ e
        out = out + e @ rho @ e.conj().T - 0.5 * (ede @ rho + rho @ ede)
    return out


def _rk4_step(model: LindbladModel, rho: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = lindblad_rhs(model, rho, t)
    k2 = lindblad_rhs(model, rho + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = lindblad_rhs(model, rho + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = lindblad_rhs(model, rho + dt * k3, t + dt)
    return rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def lindblad_evolve(
    model: LindbladModel,
    rho0: np.ndarray,
    t: float,
    dt: float = 1e-3,
    t0: float = 0.0,
    trace_tol: float = 1e-6,
) -> np.ndarray:
    """Evolve ``rho0`` for duration ``t`` starting at absolute time ``t0``.

    ``rho0`` may be a single (d, d) state or a stacked (..., d, d) batch; the
    integrator broadcasts over leading axes.  Each step re-symmetrizes the
    state and checks trace drift against ``trace_tol``.
    """
    if dt <= 0:
        raise StepError(f"dt must be positive, got {dt}")
    if t < 0:
        raise DomainError(f"duration must be >= 0, got {t}")
    rho = np.array(rho0, dtype=complex)
    if rho.shape[-1] != model.dim or rho.shape[-2] != model.dim:
        raise StepError(f"state shape {rho.shape} does not match model dim {model.dim}")
    if t == 0:
        return rho
    if dt > t * (1 + 1e-12):
        raise StepError(f"dt={dt} exceeds duration t={t}")
    n_steps = int(round(t / dt))
    if abs(n_steps * dt - t) > 1e-9:
        raise StepError(f"duration t={t} is not an integer multiple of dt={dt}")
    for k in range(n_steps):
        rho = _rk4_step(model, rho, t0 + k * dt, dt)
        rho = 0.5 * (rho + _dagger(rho))
        drift = np.max(np.abs(np.einsum("...ii->...", rho).real - 1.0))
        if drift > trace_tol:
            raise InstabilityError(f"trace drifted by {drift:.3e} at step {k + 1}")
    return rho


# ---------------------------------------------------------------------------
# Stochastic phase picture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryPhase:
    """Accumulated precession phase Phi = B t + integral of the noise."""

    phi: float
    t: float

    def __post_init__(self) -> None:
        if self.t < 0:
            raise DomainError(f"duration must be >= 0, got {self.t}")


def sample_phase(B: float, gamma: float, t: float, rng: np.random.Generator) -> TrajectoryPhase:
    """Draw one accumulated phase: B t plus Normal(0, gamma t)."""
    phis = sample_phases(B, gamma, t, 1, rng)
    return TrajectoryPhase(phi=float(phis[0]), t=t)


def sample_phases(B: float, gamma: float, t: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized phase draws; deterministic for a fixed generator state."""
    if t < 0:
        raise DomainError(f"duration must be >= 0, got {t}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if gamma * t == 0:
        return np.full(n, B * t)
    return B * t + rng.normal(0.0, np.sqrt(gamma * t), size=n)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Monte-Carlo state average with entrywise standard errors."""

    mean: np.ndarray
    sem_real: np.ndarray
    sem_imag: np.ndarray
    n: int


def _phase_states(theta: float, phis: np.ndarray) -> np.ndarray:
    """Pure states exp(-i Phi sigma_n x I)|bell> for a batch of phases."""
    psi0 = bell_probe()
    rotated = kron(sigma_n_theta(theta), eye2) @ psi0
    return np.cos(phis)[:, None] * psi0 - 1j * np.sin(phis)[:, None] * rotated


def trajectory_average_state(
    B: float, gamma: float, t: float, theta: float, n: int, rng: np.random.Generator
) -> TrajectoryEnsemble:
    """Average n sampled-phase pure states of the theta model Bell probe."""
    phis = sample_phases(B, gamma, t, n, rng)
    psi = _phase_states(theta, phis)
    projectors = psi[:, :, None] * psi[:, None, :].conj()
    mean = projectors.mean(axis=0)
    sem_real = projectors.real.std(axis=0, ddof=1) / np.sqrt(n)
    sem_imag = projectors.imag.std(axis=0, ddof=1) / np.sqrt(n)
    return TrajectoryEnsemble(mean=mean, sem_real=sem_real, sem_imag=sem_imag, n=n)


def trajectory_outcome_probability(
    B: float, gamma: float, t: float, beta: float, n: int, rng: np.random.Generator
) -> float:
    """Monte-Carlo estimate of the first-outcome probability cos^2(Phi + beta)."""
    phis = sample_phases(B, gamma, t, n, rng)
    return float(np.mean(np.cos(phis + beta) ** 2))


def sample_omega_trajectories(
    B: float,
    gamma: float,
    omega: float,
    t: float,
    dt: float,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Euler-Maruyama pure-state trajectories for the rotating-axis model.

    Each step applies exp(-i (B dt + sqrt(gamma dt) N) sigma_n(omega, tau) x I)
    with the axis frozen at the left endpoint tau; the white-noise increments
    reproduce the master equation to first order in dt.  Returns an (n, 4)
    array of final states.
    """
    n_steps = int(round(t / dt))
    if abs(n_steps * dt - t) > 1e-9:
        raise StepError(f"duration t={t} is not an integer multiple of dt={dt}")
    psi = np.tile(bell_probe(), (n, 1))
    for k in range(n_steps):
        tau = k * dt
        angles = B * dt + np.sqrt(gamma * dt) * rng.normal(size=n)
        m = kron(sigma_n_omega(omega, tau), eye2)
        psi = np.cos(angles)[:, None] * psi - 1j * np.sin(angles)[:, None] * (psi @ m.T)
    return psi


def dephasing_kraus(B: float, gamma: float, t: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair of the free theta-model channel on the probe spin.

    K1 = sqrt((1+eta)/2) exp(-i B sigma_n t) and
    K2 = sqrt((1-eta)/2) sigma_n exp(-i B sigma_n t), eta = exp(-2 gamma t);
    K1^dag K1 + K2^dag K2 = I exactly.
    """
    if t < 0:
        raise DomainError(f"duration must be >= 0, got {t}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    sn = sigma_n_theta(theta)
    u = np.cos(B * t) * eye2 - 1j * np.sin(B * t) * sn
    eta = np.exp(-2 * gamma * t)
    k1 = np.sqrt((1 + eta) / 2) * u
    k2 = np.sqrt((1 - eta) / 2) * (sn @ u)
    return k1, k2
