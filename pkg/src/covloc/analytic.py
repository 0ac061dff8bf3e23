"""Exact mean and covariance evolution of the linear lattice model.

The drift matrix A of the linear model is symmetric circulant, so its
eigendecomposition gives closed forms for e^{At} m0 and for

    C(t) = e^{At} C0 e^{At} + sigma_u^2 Q diag((e^{2 lambda t} - 1)/(2 lambda)) Q^T.

The integrated-noise kernel is evaluated with expm1 to stay accurate for
|lambda t| << 1.  A circulant FFT route provides a second, independent
implementation for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import BlockCovariance, ContractViolationError
from .models import LinearParams


class NumericalError(RuntimeError):
    """A dense linear-algebra step failed validation."""


@dataclass(frozen=True)
class LinearSystemMatrix:
    """Drift matrix of the linear model with its cached eigendecomposition."""

    params: LinearParams
    n_blocks: int
    a_matrix: np.ndarray  # (N, N)
    eigenvalues: np.ndarray  # (N,)
    eigenvectors: np.ndarray  # (N, N), orthogonal columns


def build_system_matrix(params: LinearParams, n: int) -> LinearSystemMatrix:
    """A = -a I + d_u * (circulant second difference) + (w/N) * ones - w I."""
    if n < 3:
        raise ContractViolationError(f"need n >= 3, got {n}")
    lap = -2.0 * np.eye(n)
    idx = np.arange(n)
    lap[idx, (idx + 1) % n] = 1.0
    lap[idx, (idx - 1) % n] = 1.0
    a_matrix = (
        -params.a * np.eye(n)
        + params.d_u * lap
        + (params.w / n) * np.ones((n, n))
        - params.w * np.eye(n)
    )
    eigenvalues, eigenvectors = np.linalg.eigh(a_matrix)
    recon = (eigenvectors * eigenvalues) @ eigenvectors.T
    err = np.linalg.norm(recon - a_matrix) / max(np.linalg.norm(a_matrix), 1e-300)
    if err > 1e-10:
        raise NumericalError(f"eigendecomposition reconstruction error {err:.3e}")
    if eigenvalues.max() >= 0:
        raise NumericalError(
            f"drift matrix must be negative definite, max eigenvalue {eigenvalues.max():.3e}"
        )
    for arr in (a_matrix, eigenvalues, eigenvectors):
        arr.flags.writeable = False
    return LinearSystemMatrix(
        params=params,
        n_blocks=n,
        a_matrix=a_matrix,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


def _noise_kernel(lam: np.ndarray, t: float) -> np.ndarray:
    """(e^{2 lambda t} - 1) / (2 lambda), with the lambda -> 0 limit t."""
    lam = np.asarray(lam, dtype=float)
    out = np.full(lam.shape, float(t))
    nz = lam != 0.0
    out[nz] = np.expm1(2.0 * lam[nz] * t) / (2.0 * lam[nz])
    return out


def analytic_mean(sys: LinearSystemMatrix, u0: np.ndarray, t: float) -> np.ndarray:
    """e^{At} u0."""
    if t < 0:
        raise ContractViolationError(f"t must be nonnegative, got {t}")
    u0 = np.asarray(u0, dtype=float)
    v = sys.eigenvectors
    return (v * np.exp(sys.eigenvalues * t)) @ (v.T @ u0)


def analytic_covariance(
    sys: LinearSystemMatrix,
    cov0: np.ndarray | None,
    sigma_u: float,
    t: float,
) -> BlockCovariance:
    """Covariance of the linear lattice at time t from initial covariance cov0.

    The initial covariance is propagated symmetrically, e^{At} cov0 e^{At};
    cov0=None is a zero initial covariance.
    """
    if t < 0:
        raise ContractViolationError(f"t must be nonnegative, got {t}")
    n = sys.n_blocks
    v = sys.eigenvectors
    total = sigma_u**2 * ((v * _noise_kernel(sys.eigenvalues, t)) @ v.T)
    if cov0 is not None:
        cov0 = np.asarray(cov0, dtype=float)
        if cov0.shape != (n, n):
            raise ContractViolationError(f"cov0 must be ({n}, {n}), got {cov0.shape}")
        propagator = (v * np.exp(sys.eigenvalues * t)) @ v.T
        total = total + propagator @ cov0 @ propagator.T
    return BlockCovariance(total, n_blocks=n, block_dim=1)


def circulant_covariance_row(params: LinearParams, n: int, t: float) -> np.ndarray:
    """First covariance row by the FFT route (zero initial covariance).

    Independent of the dense path: the circulant eigenvalues come from the
    FFT of the first row of A, and the covariance row from the inverse FFT of
    the per-mode noise kernels.
    """
    row = np.full(n, params.w / n)
    row[0] += -params.a - 2.0 * params.d_u - params.w
    row[1] += params.d_u
    row[-1] += params.d_u
    lam = np.fft.fft(row).real
    kernels = params.sigma_u**2 * _noise_kernel(lam, t)
    cov_row = np.fft.ifft(kernels).real
    return cov_row
