"""Dense complex linear algebra for small dimensions (2, 4, up to 16).

All matrices are plain ``numpy.ndarray`` of ``complex128``; this module only
adds the contract checks and conventions the rest of the package relies on.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, NonHermitianError, NonIsotropicError, NotPsdError

MAX_DIM = 16

sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
sigma2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
sigma3 = np.array([[1, 0], [0, -1]], dtype=complex)
eye2 = np.eye(2, dtype=complex)


def _as_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix has non-finite entries")
    return a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the package's dimension cap."""
    a = _as_square(a)
    b = _as_square(b)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise DimensionError(f"kron result dimension {dim} exceeds {MAX_DIM}")
    return np.kron(a, b)


def hermitian_eig(h: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : ndarray
        Hermitian matrix; ``max |h - h^dag|`` must be below ``tol``.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending; eigenvectors as columns, orthonormal.
    """
    h = _as_square(h)
    defect = np.max(np.abs(h - h.conj().T))
    if defect >= tol:
        raise NonHermitianError(f"matrix is not Hermitian: max |h - h^dag| = {defect:.3e}")
    w, v = np.linalg.eigh(h)
    return w, v


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring via scipy)."""
    return scipy.linalg.expm(_as_square(a))


def sqrtm_psd(rho: np.ndarray, neg_tol: float = 1e-8, clamp_tol: float = 1e-10) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues in ``[-clamp_tol, 0)`` are treated as integrator round-off and
    clamped to zero; anything below ``-neg_tol`` raises :class:`NotPsdError`.
    """
    w, v = hermitian_eig(rho)
    if w[0] < -neg_tol:
        raise NotPsdError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def partial_trace(rho: np.ndarray, keep: Literal["first", "second"]) -> np.ndarray:
    """Trace out one qubit of a two-qubit (4x4) operator."""
    rho = _as_square(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"partial_trace expects dim 4, got {rho.shape[0]}")
    r = rho.reshape(2, 2, 2, 2)
    if keep == "first":
        return np.einsum("ikjk->ij", r)
    if keep == "second":
        return np.einsum("kikj->ij", r)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a state."""
    rho = _as_square(rho)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NonHermitianError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise DomainError(f"density matrix trace is {tr!r}, expected 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -tol:
        raise NotPsdError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return rho


class PolarIsometry(NamedTuple):
    u: np.ndarray
    scale: float
    degenerate: bool


def polar_isometry(m: np.ndarray, code_projector: np.ndarray, tol: float = 1e-8) -> PolarIsometry:
    """Polar factorization ``m = scale * u * P`` of an error operator.

    ``m`` must satisfy ``m.H @ m = scale**2 * P`` within ``tol`` (the noise
    acts isotropically on the code space).  ``u`` is a unitary mapping the
    code basis onto the orthonormal images ``m|c_i> / scale``; its action
    outside the code space is an arbitrary completion.

    Returns
    -------
    PolarIsometry
        ``(u, scale, degenerate)``; ``degenerate`` is True when ``m`` is the
        zero operator, in which case ``u`` is the identity.
    """
    m = _as_square(m)
    p = _as_square(code_projector)
    rank = np.trace(p).real
    g = m.conj().T @ m
    scale_sq = np.trace(g).real / rank
    if np.max(np.abs(g - scale_sq * p)) > tol:
        raise NonIsotropicError(
            "m.H @ m is not proportional to the code projector "
            f"(residual {np.max(np.abs(g - scale_sq * p)):.3e} > tol {tol:.1e})"
        )
    if scale_sq <= tol**2:
        return PolarIsometry(np.eye(m.shape[0], dtype=complex), 0.0, True)
    scale = float(np.sqrt(scale_sq))

    # Orthonormal code basis from the projector's unit-eigenvalue space.
    w, v = hermitian_eig(p)
    code = v[:, w > 0.5]
    images = m @ code / scale
    overlap = images.conj().T @ images
    if np.max(np.abs(overlap - np.eye(code.shape[1]))) > max(tol, 1e-10):
        raise NonIsotropicError("images of the code basis are not orthonormal")

    u = images @ code.conj().T
    # Complete u to a full unitary: map the orthocomplement of the code space
    # onto an orthonormal completion of the image columns (QR extension).
    dim = m.shape[0]
    code_rest = v[:, w <= 0.5]
    q, _ = np.linalg.qr(np.hstack([images, np.eye(dim, dtype=complex)]))
    img_rest = q[:, code.shape[1] : dim]
    u = u + img_rest @ code_rest.conj().T
    return PolarIsometry(u, scale, False)
