"""Command-line front end: sweeps, campaigns, the general engine and plots.

Subcommands
-----------
qfi-theta    information-vs-time table for the angle task
qfi-omega    information-vs-time table for the frequency task
adapt        adaptive-estimation campaign from a JSON config
general-qec  run the expansion engine on a model file
plot         render a CSV table as an SVG line chart

All numeric output is deterministic given (config, seed, version).  CSV
files carry '#'-prefixed metadata (command, config hash, seed, version) and
17-significant-digit values so they round-trip losslessly.  Exit codes:
0 success, 2 config/input error, 3 recovery-condition violation, 4 numeric
cross-check failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import __version__
from .dynamics import LindbladModel, bell_probe, dephasing_kraus, sigma_n_theta
from .errors import (
    ConfigError,
    CrossCheckError,
    DomainError,
    FluxmetError,
    LeakageError,
    NumericError,
    QecConditionError,
    StepError,
)
from .estimation import (
    AdaptiveConfig,
    STRATEGIES,
    campaign_estimates,
)
from .metrology import (
    _f1,
    _g1,
    qfi_omega_qec_closed,
    qfi_omega_unitary_controlled,
    qfi_sld_numeric,
    qfi_theta_free_closed,
    qfi_theta_qec_closed,
    qfi_theta_unitary_controlled,
)
from .qec import (
    QecCode,
    asymptotic_qfi,
    code_probe,
    corrected_state_omega_closed,
    corrected_state_theta_closed,
    expansion_superoperators,
)
from .qmat import expm, eye2, kron, sigma1, sigma2

_CROSSCHECK_RTOL = 1e-3
_CROSSCHECK_SAMPLES = 5


# ---------------------------------------------------------------------------
# Curve tables
# ---------------------------------------------------------------------------


@dataclass
class CurveTable:
    """Rectangular numeric table with '#'-comment metadata."""

    columns: list[str]
    rows: np.ndarray
    metadata: dict[str, str]

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ConfigError(
                f"table shape {self.rows.shape} does not match {len(self.columns)} columns"
            )


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fluxmet-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(table: CurveTable, path: str) -> None:
    """Write the table; atomic (temp file + rename), 17 significant digits."""
    lines = [f"# {k}: {v}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(f"{x:.17g}" for x in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path: str) -> CurveTable:
    """Parse a table written by :func:`write_csv`."""
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError as exc:
                raise ConfigError(f"bad numeric row in {path}: {line!r}") from exc
    if header is None or not rows:
        raise ConfigError(f"no data rows in {path}")
    width = len(header)
    if any(len(r) != width for r in rows):
        raise ConfigError(f"ragged rows in {path}")
    return CurveTable(columns=header, rows=np.array(rows), metadata=metadata)


def _config_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _metadata(command: str, params: dict, seed: int | None) -> dict[str, str]:
    return {
        "command": command,
        "config": _config_hash(params),
        "seed": str(seed if seed is not None else ""),
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# Cross-check gate
# ---------------------------------------------------------------------------


def _check_pair(label: str, closed: float, numeric: float) -> None:
    scale = max(abs(closed), abs(numeric), 1e-9)
    if abs(closed - numeric) / scale > _CROSSCHECK_RTOL:
        raise CrossCheckError(
            f"{label}: closed form {closed:.6e} vs numeric {numeric:.6e} "
            f"disagree beyond {_CROSSCHECK_RTOL:g} relative"
        )


def _sample_times(ts: np.ndarray) -> np.ndarray:
    positive = ts[ts > 1e-9]
    if positive.size == 0:
        return positive
    idx = np.unique(np.linspace(0, positive.size - 1, _CROSSCHECK_SAMPLES).astype(int))
    return positive[idx]


def _crosscheck_theta(B: float, gamma: float, ts: np.ndarray, dthetas: list[float]) -> None:
    theta_hat = np.pi / 4
    bell = bell_probe()
    rho0 = np.outer(bell, bell.conj())
    sn_hat = kron(sigma_n_theta(theta_hat), eye2)
    for t in _sample_times(ts):
        def free_state(th: float) -> np.ndarray:
            out = np.zeros_like(rho0)
            for k2 in dephasing_kraus(B, gamma, t, th):
                k4 = kron(k2, eye2)
                out += k4 @ rho0 @ k4.conj().T
            return out

        _check_pair(
            f"free t={t:g}",
            qfi_theta_free_closed(B, gamma, t).value,
            qfi_sld_numeric(free_state, theta_hat).value,
        )

        def unitary_state(th: float) -> np.ndarray:
            h = B * (kron(sigma_n_theta(th), eye2) - sn_hat)
            psi = expm(-1j * t * h) @ bell
            return np.outer(psi, psi.conj())

        _check_pair(
            f"unitary t={t:g}",
            qfi_theta_unitary_controlled(B, t, 0.0).value,
            qfi_sld_numeric(unitary_state, theta_hat).value,
        )

        for dth in dthetas:
            def qec_state(th: float, dth: float = dth) -> np.ndarray:
                return corrected_state_theta_closed(B, gamma, th, theta_hat, t)

            _check_pair(
                f"qec dtheta={dth:g} t={t:g}",
                qfi_theta_qec_closed(B, gamma, t, dth).value,
                qfi_sld_numeric(qec_state, theta_hat + dth).value,
            )


def _crosscheck_omega(B: float, gamma: float, ts: np.ndarray, domegas: list[float]) -> None:
    omega_hat = 0.5
    bell = bell_probe()
    for t in _sample_times(ts):
        def unitary_state(om: float) -> np.ndarray:
            # Control-frame average of the detuning Hamiltonian, time
            # pre-integrated into the axis components.
            a = om - omega_hat
            z = a * t
            v1 = -t * _g1(z)
            v2 = -a * t * t * _f1(z)
            psi = expm(-1j * B * kron(v1 * sigma1 + v2 * sigma2, eye2)) @ bell
            return np.outer(psi, psi.conj())

        _check_pair(
            f"unitary t={t:g}",
            qfi_omega_unitary_controlled(B, t, 0.0).value,
            qfi_sld_numeric(unitary_state, omega_hat).value,
        )

        for dom in domegas:
            def qec_state(om: float) -> np.ndarray:
                return corrected_state_omega_closed(B, gamma, om, omega_hat, t)

            _check_pair(
                f"qec domega={dom:g} t={t:g}",
                qfi_omega_qec_closed(B, gamma, t, dom).value,
                qfi_sld_numeric(qec_state, omega_hat + dom).value,
            )


# ---------------------------------------------------------------------------
# Sweep commands
# ---------------------------------------------------------------------------


def cmd_qfi_theta(
    B: float,
    gamma: float,
    t_max: float,
    n_points: int,
    dtheta_list: list[float],
    out_path: str | None,
) -> CurveTable:
    """Information-vs-time table for the angle task.

    Columns: t, the unitary-control baseline 4B^2t^2, one corrected-dynamics
    column per detuning, and the free-evolution value.  Closed forms are
    cross-checked against the eigendecomposition route at sample times before
    anything is written.
    """
    if t_max <= 0:
        raise DomainError(f"t_max must be > 0, got {t_max}")
    ts = np.linspace(0.0, t_max, n_points)
    _crosscheck_theta(B, gamma, ts, dtheta_list)
    cols = ["t", "qfi_unitary"]
    cols += [f"qfi_qec_dtheta_{d:g}" for d in dtheta_list]
    cols.append("qfi_free")
    rows = np.zeros((len(ts), len(cols)))
    rows[:, 0] = ts
    for i, t in enumerate(ts):
        rows[i, 1] = qfi_theta_unitary_controlled(B, t, 0.0).value
        for j, d in enumerate(dtheta_list):
            rows[i, 2 + j] = qfi_theta_qec_closed(B, gamma, t, d).value
        rows[i, -1] = qfi_theta_free_closed(B, gamma, t).value
    params = {
        "B": B,
        "gamma": gamma,
        "t_max": t_max,
        "n_points": n_points,
        "dtheta_list": list(dtheta_list),
    }
    table = CurveTable(columns=cols, rows=rows, metadata=_metadata("qfi-theta", params, None))
    if out_path is not None:
        write_csv(table, out_path)
    return table


def cmd_qfi_omega(
    B: float,
    gamma: float,
    t_max: float,
    n_points: int,
    domega_list: list[float],
    out_path: str | None,
) -> CurveTable:
    """Information-vs-time table for the frequency task.

    Columns: t, the unitary baseline B^2t^4 and one corrected-dynamics
    column per detuning, cross-checked like the angle sweep.
    """
    if t_max <= 0:
        raise DomainError(f"t_max must be > 0, got {t_max}")
    ts = np.linspace(0.0, t_max, n_points)
    _crosscheck_omega(B, gamma, ts, domega_list)
    cols = ["t", "qfi_unitary"]
    cols += [f"qfi_qec_domega_{d:g}" for d in domega_list]
    rows = np.zeros((len(ts), len(cols)))
    rows[:, 0] = ts
    for i, t in enumerate(ts):
        rows[i, 1] = qfi_omega_unitary_controlled(B, t, 0.0).value
        for j, d in enumerate(domega_list):
            rows[i, 2 + j] = qfi_omega_qec_closed(B, gamma, t, d).value
    params = {
        "B": B,
        "gamma": gamma,
        "t_max": t_max,
        "n_points": n_points,
        "domega_list": list(domega_list),
    }
    table = CurveTable(columns=cols, rows=rows, metadata=_metadata("qfi-omega", params, None))
    if out_path is not None:
        write_csv(table, out_path)
    return table


# ---------------------------------------------------------------------------
# Adaptive campaigns
# ---------------------------------------------------------------------------

_ADAPT_SCHEMA = {
    "true_value": float,
    "initial_guess": float,
    "m": int,
    "rounds": int,
    "t": float,
    "B": float,
    "gamma": float,
    "grid": list,
    "seed": int,
    "repetitions": int,
    "strategies": list,
}
_ADAPT_REQUIRED = ("true_value", "initial_guess", "repetitions")


def _load_adapt_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    for key, value in raw.items():
        if key not in _ADAPT_SCHEMA:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        want = _ADAPT_SCHEMA[key]
        if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            continue
        if not isinstance(value, want) or isinstance(value, bool):
            raise ConfigError(f"config key {key!r} must be {want.__name__}", field=key)
    for key in _ADAPT_REQUIRED:
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}", field=key)
    strategies = raw.get("strategies", list(STRATEGIES))
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}", field="strategies")
    raw["strategies"] = strategies
    return raw


def _strategy_out_path(out_path: str, strategy: str) -> str:
    base, ext = os.path.splitext(out_path)
    return f"{base}.{strategy}{ext or '.csv'}"


def _crb_value(task: str, strategy: str, cfg: AdaptiveConfig) -> float:
    mk = cfg.m * cfg.rounds
    B, g, t = cfg.B, cfg.gamma, cfg.t
    if task == "theta":
        j = 4 * B * B * t * t + (4 * g * t if strategy == "qec_corrected" else 0.0)
    else:
        j = B * B * t**4 + ((4.0 / 3.0) * g * t**3 if strategy == "qec_corrected" else 0.0)
    return 1.0 / (mk * j)


def cmd_adapt(
    task: str,
    config_path: str,
    out_path: str,
    seed: int | None = None,
    reps: int | None = None,
    strategy: str | None = None,
) -> dict[str, CurveTable]:
    """Run the adaptive campaign described by a JSON config.

    Writes one CSV per strategy (suffix inserted before the extension) with
    columns round, estimate_mean, mse and the constant Cramer-Rao line
    1/(m*K*J).  Returns the tables keyed by strategy.  seed, reps and
    strategy override the corresponding config entries when given.
    """
    if task not in ("theta", "omega"):
        raise ConfigError(f"unknown task {task!r}; expected 'theta' or 'omega'", field="task")
    raw = _load_adapt_config(config_path)
    if reps is None:
        reps = raw["repetitions"]
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("repetitions must be a positive integer", field="repetitions")
    if seed is None:
        seed = raw.get("seed", 0)
    if strategy is not None:
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {strategy!r}", field="strategy")
        strategies = [strategy]
    else:
        strategies = raw["strategies"]
    tables: dict[str, CurveTable] = {}
    for strategy in strategies:
        kwargs = {
            k: raw[k] for k in ("true_value", "initial_guess", "m", "rounds", "t", "B", "gamma")
            if k in raw
        }
        if "grid" in raw:
            kwargs["grid"] = tuple(raw["grid"])
        try:
            cfg = AdaptiveConfig(seed=seed, strategy=strategy, **kwargs)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        estimates = campaign_estimates(cfg, reps, task=task)
        mse = np.mean((estimates - cfg.true_value) ** 2, axis=0)
        mean = np.mean(estimates, axis=0)
        rounds = np.arange(cfg.rounds + 1, dtype=float)
        crb = np.full_like(rounds, _crb_value(task, strategy, cfg))
        rows = np.column_stack([rounds, mean, mse, crb])
        params = dict(raw, strategy=strategy, task=task, seed=seed)
        table = CurveTable(
            columns=["round", "estimate_mean", "mse", "crb_line"],
            rows=rows,
            metadata=_metadata("adapt", params, seed),
        )
        write_csv(table, _strategy_out_path(out_path, strategy))
        tables[strategy] = table
    return tables


# ---------------------------------------------------------------------------
# General engine
# ---------------------------------------------------------------------------


def _complex_from_json(obj, field: str) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ConfigError(f"{field}: entries must be [re, im] pairs", field=field)
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix_from_json(obj, dim: int, field: str) -> np.ndarray:
    mat = _complex_from_json(obj, field)
    if mat.shape != (dim, dim):
        raise ConfigError(f"{field}: expected {dim}x{dim} matrix, got {mat.shape}", field=field)
    return mat


def _vector_from_json(obj, dim: int, field: str) -> np.ndarray:
    vec = _complex_from_json(obj, field)
    if vec.shape != (dim,):
        raise ConfigError(f"{field}: expected length-{dim} vector, got {vec.shape}", field=field)
    return vec


_MODEL_KEYS = {
    "dim",
    "hamiltonian",
    "lindblads",
    "d_hamiltonian",
    "d_lindblads",
    "dd_hamiltonian",
    "dd_lindblads",
    "code_c0",
    "code_c1",
}


def resolve_model_path(name: str) -> str:
    """Resolve a path or the bare name of a bundled model file."""
    if os.path.exists(name):
        return name
    stem = name if name.endswith(".json") else name + ".json"
    ref = resources.files("fluxmet.models").joinpath(stem)
    if ref.is_file():
        return str(ref)
    raise ConfigError(f"model file {name!r} not found (not a path or bundled model)")


def load_model_file(path: str) -> tuple[LindbladModel, QecCode]:
    """Parse a model document into a constant-operator model and its code."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("model file must be a JSON object")
    unknown = set(raw) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}", field=sorted(unknown)[0])
    missing = _MODEL_KEYS - set(raw)
    if missing:
        raise ConfigError(f"model file missing keys {sorted(missing)}", field=sorted(missing)[0])
    dim = raw["dim"]
    if not isinstance(dim, int) or dim < 2:
        raise ConfigError("dim must be an integer >= 2", field="dim")

    def const(m: np.ndarray):
        return lambda t: m

    h = _matrix_from_json(raw["hamiltonian"], dim, "hamiltonian")
    ls = [_matrix_from_json(m, dim, f"lindblads[{i}]") for i, m in enumerate(raw["lindblads"])]
    dh = _matrix_from_json(raw["d_hamiltonian"], dim, "d_hamiltonian")
    dls = [
        _matrix_from_json(m, dim, f"d_lindblads[{i}]") for i, m in enumerate(raw["d_lindblads"])
    ]
    ddh = _matrix_from_json(raw["dd_hamiltonian"], dim, "dd_hamiltonian")
    ddls = [
        _matrix_from_json(m, dim, f"dd_lindblads[{i}]")
        for i, m in enumerate(raw["dd_lindblads"])
    ]
    model = LindbladModel(
        dim=dim,
        hamiltonian=const(h),
        lindblads=[const(m) for m in ls],
        d_hamiltonian=const(dh),
        d_lindblads=[const(m) for m in dls],
        dd_hamiltonian=const(ddh),
        dd_lindblads=[const(m) for m in ddls],
    )
    c0 = _vector_from_json(raw["code_c0"], dim, "code_c0")
    c1 = _vector_from_json(raw["code_c1"], dim, "code_c1")
    for name, v in (("code_c0", c0), ("code_c1", c1)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ConfigError(f"{name} is not normalized", field=name)
    if abs(np.vdot(c0, c1)) > 1e-8:
        raise ConfigError("code words are not orthogonal", field="code_c1")
    proj = np.outer(c0, c0.conj()) + np.outer(c1, c1.conj())
    code = QecCode(
        c0=lambda t: c0, c1=lambda t: c1, projector=lambda t: proj, recovery_kraus=None
    )
    return model, code


def _parse_probe(spec: str, code: QecCode) -> np.ndarray:
    if spec == "plus":
        return code_probe(code)
    try:
        a_str, b_str = spec.split(",")
        a, b = complex(a_str), complex(b_str)
    except ValueError as exc:
        raise ConfigError(
            f"probe spec {spec!r} is neither 'plus' nor 'a,b' amplitudes", field="probe"
        ) from exc
    c0, c1 = code.basis()
    v = a * c0 + b * c1
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ConfigError("probe amplitudes are all zero", field="probe")
    return v / norm


def cmd_general_qec(
    model_path: str, probe_spec: str, t: float, out_path: str | None
) -> dict:
    """Run conditions check, expansion and asymptotic information on a model.

    Emits a JSON report with alpha, beta, d, the spectrum of the effective
    generator, the second-order expectation and the information value.
    """
    model, code = load_model_file(resolve_model_path(model_path))
    report = expansion_superoperators(model, code)
    psi = _parse_probe(probe_spec, code)
    result = asymptotic_qfi(report, psi, t)
    h_spec = np.linalg.eigvalsh(report.l1_generator)
    rho = np.outer(psi, psi.conj())
    l2_val = float(np.vdot(psi, report.l2_action.apply(rho) @ psi).real)
    doc = {
        "model": os.path.basename(model_path),
        "t": t,
        "probe": probe_spec,
        "alpha": [[z.real, z.imag] for z in report.alpha],
        "beta": [[[z.real, z.imag] for z in row] for row in report.beta],
        "d": [float(x) for x in report.d],
        "h_eff_spectrum": [float(x) for x in h_spec],
        "l2_expectation": l2_val,
        "qfi_asymptotic": result.value,
        "orthogonalized": report.orthogonalized,
        "version": __version__,
    }
    if out_path is not None:
        _atomic_write(out_path, json.dumps(doc, indent=2) + "\n")
    return doc


# ---------------------------------------------------------------------------
# Plot
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 640, 480
_ML, _MR, _MT, _MB = 60, 20, 20, 45


def _scale(vals: np.ndarray, lo_px: float, hi_px: float) -> np.ndarray:
    vmin, vmax = float(np.min(vals)), float(np.max(vals))
    if vmax - vmin < 1e-300:
        vmax = vmin + 1.0
    return lo_px + (vals - vmin) * (hi_px - lo_px) / (vmax - vmin)


def cmd_plot(csv_path: str, out_svg: str) -> None:
    """Render a curve table as a single SVG line chart.

    One polyline per numeric column against the first column; legend built
    from the header names.  Output bytes depend only on the input CSV.
    """
    table = read_csv(csv_path)
    x = table.rows[:, 0]
    xs = _scale(x, _ML, _W - _MR)
    ys_all = table.rows[:, 1:]
    ys_px = _H - _MB - (_scale(ys_all.ravel(), 0.0, _H - _MT - _MB).reshape(ys_all.shape))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) // 2}" y="{_H - 10}" font-size="13" '
        f'text-anchor="middle">{table.columns[0]}</text>',
    ]
    for j in range(ys_all.shape[1]):
        color = _PALETTE[j % len(_PALETTE)]
        pts = " ".join(f"{xs[i]:.2f},{ys_px[i, j]:.2f}" for i in range(len(x)))
        parts.append(f'<polyline fill="none" stroke="{color}" points="{pts}"/>')
        parts.append(
            f'<text x="{_W - _MR - 150}" y="{_MT + 16 * (j + 1)}" font-size="12" '
            f'fill="{color}">{table.columns[j + 1]}</text>'
        )
    parts.append("</svg>")
    _atomic_write(out_svg, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _default_seed() -> int | None:
    """Seed from the environment, or None so the config (or 0) decides."""
    env = os.environ.get("FLUXMET_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"FLUXMET_SEED must be an integer, got {env!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxmet",
        description="Fluctuation-enhanced metrology: sweeps, campaigns and plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi-theta", help="information-vs-time table, angle task")
    p.add_argument("--B", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--dtheta", type=float, action="append", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("qfi-omega", help="information-vs-time table, frequency task")
    p.add_argument("--B", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--domega", type=float, action="append", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("adapt", help="adaptive estimation campaign from a config file")
    p.add_argument("task", choices=("theta", "omega"))
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--strategy", choices=STRATEGIES, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("general-qec", help="expansion engine on a model file")
    p.add_argument("model")
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--probe", default="plus")
    p.add_argument("--out", default=None)

    p = sub.add_parser("plot", help="render a CSV table to SVG")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "qfi-theta":
            dthetas = args.dtheta if args.dtheta is not None else [0.0, 0.05, 0.1]
            cmd_qfi_theta(args.B, args.gamma, args.t_max, args.points, dthetas, args.out)
        elif args.command == "qfi-omega":
            domegas = args.domega if args.domega is not None else [0.0, 0.05, 0.1]
            cmd_qfi_omega(args.B, args.gamma, args.t_max, args.points, domegas, args.out)
        elif args.command == "adapt":
            seed = args.seed if args.seed is not None else _default_seed()
            cmd_adapt(
                args.task, args.config, args.out,
                seed=seed, reps=args.reps, strategy=args.strategy,
            )
        elif args.command == "general-qec":
            doc = cmd_general_qec(args.model, args.probe, args.t, args.out)
            print(f"asymptotic QFI at t={args.t:g}: {doc['qfi_asymptotic']:.12g}")
        elif args.command == "plot":
            cmd_plot(args.csv, args.out)
    except QecConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name, residual in exc.residuals:
            print(f"  {name}: residual {residual:.3e}", file=sys.stderr)
        return 3
    except LeakageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CrossCheckError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, DomainError, StepError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FluxmetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
