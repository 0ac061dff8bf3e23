"""Reference models: the damped linear lattice and the stochastic FHN lattice.

Both constructors return LatticeModelSpec instances whose drift callables are
vectorized over arbitrary leading axes, with closed-form coupling constants
attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import ContractViolationError, LatticeModelSpec, LipschitzConstants


class PresetNotFoundError(LookupError):
    """Unknown regime preset name."""


@dataclass(frozen=True)
class LinearParams:
    """Damped diffusive lattice with mean-field coupling, scalar blocks."""

    a: float = 1.0
    d_u: float = 0.0
    w: float = 0.0
    sigma_u: float = 0.5

    def __post_init__(self):
        if self.a <= 0:
            raise ContractViolationError(f"damping a must be positive, got {self.a}")
        if self.d_u < 0 or self.w < 0:
            raise ContractViolationError("d_u and w must be nonnegative")
        if self.sigma_u <= 0:
            raise ContractViolationError(f"sigma_u must be positive, got {self.sigma_u}")


@dataclass(frozen=True)
class FhnParams:
    """Stochastically coupled FitzHugh-Nagumo lattice, (u, v) blocks.

    epsilon is the fast/slow timescale ratio, a > 1 puts the rest point on
    the stable branch, delta1/delta2 are the activator/inhibitor noise
    amplitudes.
    """

    epsilon: float = 0.01
    a: float = 1.05
    d_u: float = 0.0
    w: float = 0.0
    delta1: float = 0.4
    delta2: float = 0.4

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ContractViolationError(f"epsilon must be positive, got {self.epsilon}")
        if self.d_u < 0 or self.w < 0:
            raise ContractViolationError("d_u and w must be nonnegative")
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ContractViolationError("noise amplitudes must be positive")

    def rest_point(self) -> tuple[float, float]:
        """Deterministic fixed point (u*, v*) = (-a, -a + a^3/3)."""
        return (-self.a, -self.a + self.a**3 / 3.0)


@dataclass(frozen=True)
class RegimePreset:
    name: str
    params: FhnParams
    description: str


def linear_model(
    params: LinearParams,
    n: int,
    m0: float = 0.0,
    sigma0: float = 0.0,
) -> LatticeModelSpec:
    """Linear lattice: du_i = (-a u_i + d_u (u_{i+1} - 2u_i + u_{i-1}) + w (ubar - u_i)) dt + sigma_u dW_i.

    The mean-field coupling is split as a local -w*u_i term inside the drift
    plus a lattice-averaged w*u_j contribution, so the generic
    (1/N) sum_j h(x_j) structure reproduces w*(ubar - u_i) exactly.
    """
    a, d_u, w = params.a, params.d_u, params.w

    def drift(t, x_prev, x_self, x_next):
        return -(a + w) * x_self + d_u * (x_prev + x_next - 2.0 * x_self)

    def mean_field(t, x):
        return w * x

    return LatticeModelSpec(
        n_blocks=n,
        block_dim=1,
        drift=drift,
        mean_field=mean_field,
        sigma=np.array([[params.sigma_u]]),
        sigma0=np.array([[sigma0]]),
        m0=np.array([m0]),
        lipschitz=LipschitzConstants(-a - 2.0 * d_u - w, d_u, w),
        label=f"linear(a={a}, d_u={d_u}, w={w}, sigma_u={params.sigma_u})",
    )


def fhn_model(
    params: FhnParams,
    n: int,
    m0: tuple[float, float] | None = None,
    sigma0: np.ndarray | None = None,
) -> LatticeModelSpec:
    """Stochastic FHN lattice with diffusive and mean-field coupling.

    Simulated form (per block, after dividing the activator equation by
    epsilon):

        du_i = eps^-1 (u_i - u_i^3/3 - v_i + d_u (u_{i+1} - 2u_i + u_{i-1})
                       + w (ubar - u_i)) dt + (delta1/sqrt(eps)) dW_u,
        dv_i = (u_i + a) dt + delta2 dW_v.

    The attached coupling constants and the bound-side ||sigma^2||_F use the
    rescaled-inhibitor convention under which the cross terms of the
    self-Jacobian are antisymmetric; covariances of u are identical in both
    conventions.  Default initial law: a point mass at the rest point.
    """
    eps, a, d_u, w = params.epsilon, params.a, params.d_u, params.w
    inv_eps = 1.0 / eps

    def drift(t, x_prev, x_self, x_next):
        u = x_self[..., 0]
        v = x_self[..., 1]
        up = x_next[..., 0]
        um = x_prev[..., 0]
        out = np.empty_like(x_self)
        out[..., 0] = inv_eps * (
            u - u * u * u / 3.0 - v + d_u * (up + um - 2.0 * u) - w * u
        )
        out[..., 1] = u + a
        return out

    def mean_field(t, x):
        out = np.zeros_like(x)
        if w:
            out[..., 0] = inv_eps * w * x[..., 0]
        return out

    if m0 is None:
        m0 = params.rest_point()
    if sigma0 is None:
        sigma0 = np.zeros((2, 2))
    sigma0 = np.asarray(sigma0, dtype=float)
    # Bound convention rescales the inhibitor by sqrt(eps); for diagonal
    # initial noise that multiplies the v-amplitude by eps^-1/2.
    s0u, s0v = sigma0[0, 0], sigma0[1, 1]
    bound_sigma0 = math.sqrt(s0u**4 + (s0v / math.sqrt(eps)) ** 4)
    return LatticeModelSpec(
        n_blocks=n,
        block_dim=2,
        drift=drift,
        mean_field=mean_field,
        sigma=np.diag([params.delta1 / math.sqrt(eps), params.delta2]),
        sigma0=sigma0,
        m0=np.asarray(m0, dtype=float),
        lipschitz=LipschitzConstants(
            inv_eps * max(1.0 - 2.0 * d_u - w, 0.0), inv_eps * d_u, inv_eps * w
        ),
        label=f"fhn(eps={eps}, a={a}, d_u={d_u}, w={w})",
        bound_sigma_sq_frob=math.sqrt(params.delta1**4 + params.delta2**4) / eps,
        bound_sigma0_sq_frob=bound_sigma0,
    )


_PRESET_TABLE = [
    # diffusion-only ladder
    ("diffusion-strongly-mixed", 0.02, 0.0, "strongly mixed, d_u=0.02, w=0"),
    ("diffusion-weakly-coherent", 0.5, 0.0, "weakly coherent, d_u=0.5, w=0"),
    ("diffusion-strongly-coherent", 10.0, 0.0, "strongly coherent, d_u=10, w=0"),
    # mean-field-only ladder
    ("meanfield-weak", 0.0, 0.1, "weak mean field, w=0.1, d_u=0"),
    ("meanfield-moderate", 0.0, 0.3, "moderate mean field, w=0.3, d_u=0"),
    ("meanfield-strong", 0.0, 0.5, "strong mean field, w=0.5, d_u=0"),
    # combined-comparison regimes (a)-(f)
    ("regime-a", 10.0, 0.0, "strong diffusion, no mean field"),
    ("regime-b", 0.0, 0.5, "strong mean field, no diffusion"),
    ("regime-c", 0.5, 0.3, "moderate diffusion, moderate mean field"),
    ("regime-d", 0.5, 0.1, "moderate diffusion, weak mean field"),
    ("regime-e", 0.0, 0.3, "moderate mean field, no diffusion"),
    ("regime-f", 0.5, 0.0, "moderate diffusion, no mean field"),
]

REGIMES: dict[str, RegimePreset] = {
    name: RegimePreset(name, FhnParams(d_u=d_u, w=w), desc)
    for name, d_u, w, desc in _PRESET_TABLE
}


def regime(name: str) -> RegimePreset:
    """Look up a named FHN regime preset with the exact published parameters."""
    try:
        return REGIMES[name]
    except KeyError:
        valid = ", ".join(sorted(REGIMES))
        raise PresetNotFoundError(f"unknown regime {name!r}; valid names: {valid}") from None


def default_step_size(params: LinearParams | FhnParams) -> float:
    """Stability-aware Euler step defaults.

    FHN: eps/100 resolves the fast variable.  Linear: 0.1 over the stiffest
    drift rate a + 4 d_u + w, capped at 1e-3.
    """
    if isinstance(params, FhnParams):
        return params.epsilon / 100.0
    return min(1e-3, 0.1 / (params.a + 4.0 * params.d_u + params.w))


def build_model(params: LinearParams | FhnParams, n: int) -> LatticeModelSpec:
    """Dispatch a parameter set to its model constructor."""
    if isinstance(params, FhnParams):
        return fhn_model(params, n)
    return linear_model(params, n)
