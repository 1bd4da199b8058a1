"""Adaptive error-correction machinery.

Two concrete codes: a static one for the field-angle task and a rotating one
for the rotation-frequency task.  Both protect a two-dimensional code space
of the probe+ancilla pair against the parameter-correlated noise axis at the
current estimate; recovery is the two-operator Kraus set {P, P sigma_n}.

The general engine (``check_qec_conditions`` -> ``expansion_superoperators``
-> ``asymptotic_qfi``) takes any model with explicit first and second
parameter derivatives and produces the second-order expansion of the
recovered dynamics around the operating point, L = L0 + L1 dx + L2 dx^2,
together with the asymptotic information rate
J = 4 t^2 Var(H_eff) - 4 t <L2>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import LindbladModel, lindblad_evolve, sigma_n_omega, sigma_n_theta
from .errors import (
    ConfigError,
    DegenerateErrorSpaceError,
    DomainError,
    LeakageError,
    NumericError,
    QecConditionError,
    StepError,
)
from .metrology import FisherResult, omega_frame_decay, omega_frame_phase
from .qmat import expm, eye2, kron, polar_isometry

VectorFn = Callable[[float], np.ndarray]
MatrixFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class QecCode:
    """Code basis, projector and recovery Kraus set, all as functions of time.

    ``frame_generator`` is the Hermitian generator G of the inter-step frame
    rotation U(dt) = exp(+i G dt) that carries the code space from t to t+dt;
    it is None for static codes.
    """

    c0: VectorFn
    c1: VectorFn
    projector: MatrixFn
    recovery_kraus: Callable[[float], list[np.ndarray]] | None
    frame_generator: np.ndarray | None = None

    def basis(self, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        return self.c0(t), self.c1(t)


def _outer(v: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    w = v if w is None else w
    return v[:, None] * w[None, :].conj()


def theta_code(theta_hat: float) -> QecCode:
    """Static code for the field-angle task at estimate theta_hat.

    The code words are doubled eigenvectors of the Hamiltonian's angle
    derivative; their equal superposition is the maximally entangled probe.
    Recovery is {P, P (sigma_n x I)} with the noise axis at theta_hat.
    """
    half = theta_hat / 2
    plus = np.array([-np.cos(half), np.sin(half)], dtype=complex)
    minus = np.array([np.sin(half), np.cos(half)], dtype=complex)
    c0 = np.kron(plus, plus)
    c1 = np.kron(minus, minus)
    proj = _outer(c0) + _outer(c1)
    sn4 = kron(sigma_n_theta(theta_hat), eye2)
    kraus = [proj, proj @ sn4]
    return QecCode(
        c0=lambda t: c0,
        c1=lambda t: c1,
        projector=lambda t: proj,
        recovery_kraus=lambda t: kraus,
    )


def omega_code(omega_hat: float) -> QecCode:
    """Rotating code for the rotation-frequency task at estimate omega_hat.

    At t = 0 the code words pair the two rotation-axis-derivative eigenstates
    with orthogonal ancilla states; at later times every ingredient is the
    t = 0 one conjugated by exp(+i omega_hat t sigma3 / 2) on the probe.
    """
    plus0 = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2)
    minus0 = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)
    e0 = np.array([1.0, 0.0], dtype=complex)
    e1 = np.array([0.0, 1.0], dtype=complex)
    c0_0 = np.kron(plus0, e0)
    c1_0 = np.kron(minus0, e1)

    def rot4(t: float) -> np.ndarray:
        ph = np.exp(0.5j * omega_hat * t)
        return kron(np.diag([ph, ph.conj()]), eye2)

    def c0(t: float) -> np.ndarray:
        return rot4(t) @ c0_0

    def c1(t: float) -> np.ndarray:
        return rot4(t) @ c1_0

    def projector(t: float) -> np.ndarray:
        return _outer(c0(t)) + _outer(c1(t))

    def recovery(t: float) -> list[np.ndarray]:
        proj = projector(t)
        return [proj, proj @ kron(sigma_n_omega(omega_hat, t), eye2)]

    return QecCode(
        c0=c0,
        c1=c1,
        projector=projector,
        recovery_kraus=recovery,
        frame_generator=0.5 * omega_hat * kron(np.diag([1.0, -1.0]).astype(complex), eye2),
    )


def code_probe(code: QecCode, t: float = 0.0) -> np.ndarray:
    """Equal superposition (|c0> + |c1>)/sqrt(2) of the code words."""
    c0, c1 = code.basis(t)
    return (c0 + c1) / np.sqrt(2)


def apply_recovery(code: QecCode, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Apply the code's recovery channel; fails on trace leakage.

    Trace loss above 1e-6 means the state had weight outside the span of the
    code and its correctable error space.
    """
    if code.recovery_kraus is None:
        raise ConfigError("code has no recovery Kraus set")
    out = np.zeros_like(rho)
    for k in code.recovery_kraus(t):
        out += k @ rho @ k.conj().T
    loss = abs(np.trace(out).real - np.trace(rho).real)
    if loss > 1e-6:
        raise LeakageError(f"recovery lost trace {loss:.3e}: error space not fully spanned")
    return 0.5 * (out + out.conj().T)


def _recovery_intervals(t: float, dt: float, n_recoveries: int | None) -> tuple[int, float]:
    if n_recoveries is None:
        n_recoveries = int(round(t / dt))
    if n_recoveries < 1:
        raise StepError(f"n_recoveries must be >= 1, got {n_recoveries}")
    interval = t / n_recoveries
    steps = int(round(interval / dt))
    if steps < 1 or abs(steps * dt - interval) > 1e-9:
        raise StepError(f"dt={dt} does not divide the recovery interval {interval}")
    return n_recoveries, interval


def corrected_evolve_theta(
    B: float,
    gamma: float,
    theta: float,
    theta_hat: float,
    t: float,
    dt: float = 1e-3,
    n_recoveries: int | None = None,
) -> np.ndarray:
    """Stepwise evolve-and-recover dynamics for the field-angle task.

    Starts from the code-word superposition probe, alternates master-equation
    evolution over t/n_recoveries with recovery at the estimate theta_hat.
    Converges first-order in the recovery interval to
    ``corrected_state_theta_closed``.
    """
    from .dynamics import theta_model

    model = theta_model(B, gamma, theta)
    code = theta_code(theta_hat)
    rho = _outer(code_probe(code))
    n_rec, interval = _recovery_intervals(t, dt, n_recoveries)
    for _ in range(n_rec):
        rho = lindblad_evolve(model, rho, interval, dt)
        rho = apply_recovery(code, rho)
    return rho


def corrected_state_theta_closed(
    B: float, gamma: float, theta: float, theta_hat: float, t: float
) -> np.ndarray:
    """Continuous-recovery corrected state for the field-angle task.

    The code-space coherence decays as exp(-g t) with
    g = 2i B sin(dtheta) + 2 gamma sin^2(dtheta), dtheta = theta - theta_hat.
    """
    code = theta_code(theta_hat)
    c0, c1 = code.basis()
    d = theta - theta_hat
    g = 2j * B * np.sin(d) + 2 * gamma * np.sin(d) ** 2
    coh = np.exp(-g * t)
    return 0.5 * (_outer(c0) + _outer(c1) + coh * _outer(c0, c1) + np.conj(coh) * _outer(c1, c0))


def corrected_evolve_omega(
    B: float,
    gamma: float,
    omega: float,
    omega_hat: float,
    t: float,
    dt: float = 1e-3,
    n_recoveries: int | None = None,
) -> np.ndarray:
    """Stepwise corrected dynamics for the rotation-frequency task.

    Per interval [tau, tau+dt']: evolve under the rotating-axis master
    equation, recover with the code frozen at tau, then advance the code
    frame with U = exp(+i G dt').
    """
    from .dynamics import omega_model

    model = omega_model(B, gamma, omega)
    code = omega_code(omega_hat)
    rho = _outer(code_probe(code, 0.0))
    n_rec, interval = _recovery_intervals(t, dt, n_recoveries)
    frame = expm(1j * interval * code.frame_generator)
    for k in range(n_rec):
        tau = k * interval
        rho = lindblad_evolve(model, rho, interval, dt, t0=tau)
        rho = apply_recovery(code, rho, tau)
        rho = frame @ rho @ frame.conj().T
    return rho


def corrected_state_omega_closed(
    B: float, gamma: float, omega: float, omega_hat: float, t: float
) -> np.ndarray:
    """Continuous-recovery corrected state for the rotation-frequency task.

    In the co-rotating frame the code-space coherence is
    exp(-(i*phase + decay)) with the closed-form phase and decay integrals;
    the lab-frame state re-expresses that coherence on the time-t code words.
    """
    code = omega_code(omega_hat)
    c0, c1 = code.basis(t)
    a = omega - omega_hat
    coh = np.exp(-omega_frame_decay(gamma, a, t) - 1j * omega_frame_phase(B, a, t))
    return 0.5 * (_outer(c0) + _outer(c1) + coh * _outer(c0, c1) + np.conj(coh) * _outer(c1, c0))


# ---------------------------------------------------------------------------
# General engine
# ---------------------------------------------------------------------------


@dataclass
class L2Action:
    """Second-order superoperator in explicit commutator-plus-Kraus form.

    apply(rho) = -i[generator, rho]
                 + sum_k (a_k rho a_k^dag - {anti_k, rho}/2)
                 + sum_kj b_kj rho b_kj^dag
    """

    generator: np.ndarray
    kraus_a: list[np.ndarray]
    anticommutators: list[np.ndarray]
    kraus_b: list[np.ndarray]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.generator @ rho - rho @ self.generator)
        for a, g in zip(self.kraus_a, self.anticommutators):
            out = out + a @ rho @ a.conj().T - 0.5 * (g @ rho + rho @ g)
        for b in self.kraus_b:
            out = out + b @ rho @ b.conj().T
        return out


@dataclass
class GeneralQecReport:
    """Outputs of the error-correction conditions and expansion engine."""

    alpha: np.ndarray
    beta: np.ndarray
    d: np.ndarray
    projector: np.ndarray
    residual_alpha: float
    residual_beta: float
    orthogonalized: bool = False
    active: list[int] = field(default_factory=list)
    isometries: list[np.ndarray] | None = None
    l0_generator: np.ndarray | None = None
    l1_generator: np.ndarray | None = None
    l2_action: L2Action | None = None
    control_hamiltonian: np.ndarray | None = None
    qfi_asymptotic: float | None = None


def _project_scalar(proj: np.ndarray, op: np.ndarray, rank: float) -> tuple[complex, float]:
    """Best scalar s with P op P = s P, plus the residual of that relation."""
    s = np.trace(proj @ op) / rank
    residual = float(np.max(np.abs(proj @ op @ proj - s * proj)))
    return complex(s), residual


def check_qec_conditions(
    model: LindbladModel, code: QecCode, tol: float = 1e-8, t: float = 0.0
) -> GeneralQecReport:
    """Verify P E_k P = alpha_k P and P E_k^dag E_j P = beta_kj P.

    Returns the extracted alpha vector, beta matrix and error weights
    d_kk = beta_kk - |alpha_k|^2.  Raises :class:`QecConditionError` naming
    the offending operators if any residual exceeds ``tol``.
    """
    proj = code.projector(t)
    rank = np.trace(proj).real
    ops = [lf(t) for lf in model.lindblads]
    n = len(ops)
    alpha = np.zeros(n, dtype=complex)
    beta = np.zeros((n, n), dtype=complex)
    bad: list[tuple[str, float]] = []
    res_a = 0.0
    res_b = 0.0
    for k, e in enumerate(ops):
        alpha[k], r = _project_scalar(proj, e, rank)
        res_a = max(res_a, r)
        if r > tol:
            bad.append((f"E_{k}", r))
    for k in range(n):
        for j in range(n):
            beta[k, j], r = _project_scalar(proj, ops[k].conj().T @ ops[j], rank)
            res_b = max(res_b, r)
            if r > tol:
                bad.append((f"E_{k}^dag E_{j}", r))
    if bad:
        worst = max(bad, key=lambda kv: kv[1])
        raise QecConditionError(
            f"code fails the error-correction conditions: {worst[0]} has residual "
            f"{worst[1]:.3e} > tol {tol:.1e}",
            residuals=bad,
        )
    d = np.real(np.diag(beta)) - np.abs(alpha) ** 2
    return GeneralQecReport(
        alpha=alpha, beta=beta, d=d, projector=proj, residual_alpha=res_a, residual_beta=res_b
    )


def _evaluate_derivatives(model: LindbladModel, t: float):
    if model.d_hamiltonian is None or model.d_lindblads is None:
        raise ConfigError("model has no first-derivative operators", field="d_hamiltonian")
    if model.dd_hamiltonian is None or model.dd_lindblads is None:
        raise ConfigError("model has no second-derivative operators", field="dd_hamiltonian")
    return (
        model.hamiltonian(t),
        [f(t) for f in model.lindblads],
        model.d_hamiltonian(t),
        [f(t) for f in model.d_lindblads],
        model.dd_hamiltonian(t),
        [f(t) for f in model.dd_lindblads],
    )


def expansion_superoperators(
    model: LindbladModel,
    code: QecCode,
    tol: float = 1e-8,
    deg_tol: float = 1e-12,
    t: float = 0.0,
) -> GeneralQecReport:
    """Second-order expansion L0 + L1 dx + L2 dx^2 of the recovered dynamics.

    Requires first and second derivative operators on the model.  Error
    operators with non-orthogonal leakage directions (off-diagonal Gram
    matrix beta - alpha* alpha) are first recombined by the Gram
    eigenbasis, which leaves the Lindblad dissipator invariant; directions of
    zero weight (d_kk below ``deg_tol``) are dropped from the recovery
    provided they do not couple to the first-derivative operators.
    """
    h, ops, dh, dops, ddh, ddops = _evaluate_derivatives(model, t)
    report = check_qec_conditions(model, code, tol=tol, t=t)
    proj = report.projector
    alpha, beta = report.alpha, report.beta

    gram = beta - np.outer(alpha.conj(), alpha)
    if np.max(np.abs(gram - np.diag(np.diag(gram)))) > tol:
        # Unitary recombination E_l <- sum_k W_kl E_k diagonalizes the Gram
        # matrix and leaves sum_k E_k rho E_k^dag unchanged.
        _, w = np.linalg.eigh(gram)
        ops = [sum(w[k, l] * ops[k] for k in range(len(ops))) for l in range(len(ops))]
        dops = [sum(w[k, l] * dops[k] for k in range(len(dops))) for l in range(len(dops))]
        ddops = [sum(w[k, l] * ddops[k] for k in range(len(ddops))) for l in range(len(ddops))]
        rank = np.trace(proj).real
        alpha = np.array([_project_scalar(proj, e, rank)[0] for e in ops])
        beta = np.array(
            [[_project_scalar(proj, ek.conj().T @ ej, rank)[0] for ej in ops] for ek in ops]
        )
        report.orthogonalized = True
    d = np.real(np.diag(beta)) - np.abs(alpha) ** 2
    report.alpha, report.beta, report.d = alpha, beta, d

    eye = np.eye(model.dim, dtype=complex)
    active: list[int] = []
    isometries: list[np.ndarray] = []
    for k, e in enumerate(ops):
        if d[k] > deg_tol:
            m = (eye - proj) @ e @ proj
            iso = polar_isometry(m, proj, tol=max(tol, 10 * np.sqrt(deg_tol)))
            active.append(k)
            isometries.append(iso.u)
        else:
            # A weightless direction may not feed the 1/sqrt(d) cross term.
            for j, de in enumerate(dops):
                coupling = proj @ (e.conj().T @ de - np.conj(alpha[k]) * de) @ proj
                if np.max(np.abs(coupling)) > tol:
                    raise DegenerateErrorSpaceError(
                        f"error operator {k} has zero weight but couples to derivative {j}"
                    )

    def sandwich(op: np.ndarray) -> np.ndarray:
        return proj @ op @ proj

    drift = sum(
        e.conj().T @ de - de.conj().T @ e for e, de in zip(ops, dops)
    ) if ops else np.zeros_like(h)
    h_eff = sandwich(dh + 0.5j * drift)
    h_eff = 0.5 * (h_eff + h_eff.conj().T)

    # The i/2 combination keeps the second-order commutator generator
    # Hermitian; without it the expansion would not preserve Hermiticity.
    drift2 = sum(
        e.conj().T @ dde - dde.conj().T @ e for e, dde in zip(ops, ddops)
    ) if ops else np.zeros_like(h)
    n2 = 0.5 * sandwich(ddh + 0.5j * drift2)
    n2 = 0.5 * (n2 + n2.conj().T)

    kraus_a = [sandwich(de) for de in dops]
    anticomms = [sandwich(de.conj().T @ de) for de in dops]
    kraus_b = [sandwich(u.conj().T @ de) for u in isometries for de in dops]

    report.active = active
    report.isometries = isometries
    report.l0_generator = sandwich(h)
    report.l1_generator = h_eff
    report.l2_action = L2Action(
        generator=n2, kraus_a=kraus_a, anticommutators=anticomms, kraus_b=kraus_b
    )
    report.control_hamiltonian = -sandwich(h)
    return report


def asymptotic_qfi(report: GeneralQecReport, psi: np.ndarray, t: float) -> FisherResult:
    """Information rate J = 4 t^2 Var_psi(H_eff) - 4 t <psi|L2(|psi><psi|)|psi>.

    ``psi`` must be a normalized vector in the code space.  The first-order
    expectation <psi|L1(|psi><psi|)|psi> is verified to vanish and the L2
    expectation to be non-positive (both within 1e-10).
    """
    if report.l1_generator is None or report.l2_action is None:
        raise ConfigError("report lacks expansion data; run expansion_superoperators first")
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise DomainError("probe vector is not normalized")
    outside = psi - report.projector @ psi
    if np.linalg.norm(outside) > 1e-10:
        raise DomainError("probe vector is not in the code space")
    h_eff = report.l1_generator
    mean = np.vdot(psi, h_eff @ psi).real
    var = np.vdot(psi, h_eff @ h_eff @ psi).real - mean**2
    rho = _outer(psi)
    l1_val = np.vdot(psi, (-1j) * (h_eff @ rho - rho @ h_eff) @ psi)
    if abs(l1_val) > 1e-10:
        raise NumericError(f"first-order expectation {l1_val!r} does not vanish")
    l2_val = np.vdot(psi, report.l2_action.apply(rho) @ psi).real
    if -l2_val < -1e-10:
        raise NumericError(f"second-order expectation {l2_val!r} is positive")
    value = 4.0 * t * t * var - 4.0 * t * l2_val
    report.qfi_asymptotic = float(value)
    return FisherResult(value=float(value), method="closed_form", params={"t": t})


def expansion_evolve(
    report: GeneralQecReport,
    rho0: np.ndarray,
    dx: float,
    t: float,
    dt: float = 1e-3,
    apply_control: bool = True,
) -> np.ndarray:
    """Evolve a code-space state under L0 + L1 dx + L2 dx^2 for duration t.

    With ``apply_control`` the zeroth-order generator is cancelled by the
    control Hamiltonian, leaving the detuning-driven dynamics only.
    """
    if report.l1_generator is None or report.l2_action is None:
        raise ConfigError("report lacks expansion data; run expansion_superoperators first")
    h = report.l0_generator.copy()
    if apply_control:
        h = h + report.control_hamiltonian
    h = h + dx * report.l1_generator

    def rhs(rho: np.ndarray) -> np.ndarray:
        return -1j * (h @ rho - rho @ h) + dx * dx * report.l2_action.apply(rho)

    n_steps = int(round(t / dt))
    if n_steps < 1 or abs(n_steps * dt - t) > 1e-9:
        raise StepError(f"duration t={t} is not an integer multiple of dt={dt}")
    rho = np.array(rho0, dtype=complex)
    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
    return rho
