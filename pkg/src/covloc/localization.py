"""Banded truncation of block covariances and principled bandwidth selection.

Truncation is hard (an indicator on the ring distance) and acts at whole
q x q block granularity: within-block structure at one site is never split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import BlockCovariance, ContractViolationError, cyclic_distance_matrix


@dataclass(frozen=True)
class LocalizationPlan:
    """A bandwidth and sample-size choice for a target accuracy.

    ``c_constant`` is the universal constant of the sample-size tail bound;
    it is not specified by the theory, so it is a user-settable knob rather
    than invented precision.  ``bound_insufficient`` is set when the error
    bound cannot reach the target within the maximal bandwidth floor(N/2).
    """

    bandwidth: int
    epsilon: float
    recommended_k: int
    c_constant: float = 1.0
    bound_insufficient: bool = False


def localize(c: BlockCovariance, l: int) -> BlockCovariance:
    """Zero every block with ring distance > l; idempotent, symmetry preserving.

    Bandwidths at or above floor(N/2) leave the matrix unchanged (no pair of
    blocks is that far apart).  Negative bandwidths are out of range.
    """
    if l < 0:
        raise ContractViolationError(f"bandwidth must be nonnegative, got {l}")
    mask = cyclic_distance_matrix(c.n_blocks) <= l
    q = c.block_dim
    full_mask = np.kron(mask, np.ones((q, q), dtype=bool))
    return BlockCovariance(np.where(full_mask, c.data, 0.0), c.n_blocks, c.block_dim)


def localization_error_bound(l: int, beta: float, local_coefficient: float) -> float:
    """l2-error bound for truncation at bandwidth l: 2 c e^{-beta l} / (1 - e^{-beta}).

    Valid when the covariance obeys the local decay |C_ij| <= c e^{-beta d(i,j)}.
    """
    if beta <= 0:
        raise ContractViolationError(f"beta must be positive, got {beta}")
    if l < 0:
        raise ContractViolationError(f"bandwidth must be nonnegative, got {l}")
    if local_coefficient < 0:
        raise ContractViolationError("local_coefficient must be nonnegative")
    return 2.0 * local_coefficient * math.exp(-beta * l) / (1.0 - math.exp(-beta))


def choose_bandwidth(
    epsilon: float,
    beta: float,
    local_coefficient: float,
    n_blocks: int | None = None,
) -> int:
    """Smallest bandwidth whose truncation-error bound is at most epsilon.

    With ``n_blocks`` given the result is capped at floor(N/2) (beyond which
    truncation does nothing); use a LocalizationPlan to see whether the cap
    was hit.
    """
    if epsilon <= 0:
        raise ContractViolationError(f"epsilon must be positive, got {epsilon}")
    if localization_error_bound(0, beta, local_coefficient) <= epsilon:
        l = 0
    else:
        # invert e^{-beta l} <= eps (1 - e^-beta) / (2 c), then fix up float edges
        target = epsilon * (1.0 - math.exp(-beta)) / (2.0 * local_coefficient)
        l = max(0, math.ceil(-math.log(target) / beta))
        while l > 0 and localization_error_bound(l - 1, beta, local_coefficient) <= epsilon:
            l -= 1
        while localization_error_bound(l, beta, local_coefficient) > epsilon:
            l += 1
    if n_blocks is not None:
        l = min(l, n_blocks // 2)
    return l


def recommended_sample_size(
    epsilon: float,
    l: int,
    n: int,
    cov_norm: float,
    delta: float,
    c_constant: float = 1.0,
) -> int:
    """Smallest K making the banded-estimation failure probability <= delta.

    Inverts 8 exp(2 log N - c K min{eps / (2 L |C|), eps^2 / (4 L^2 |C|^2)})
    for K; bandwidth 0 is treated as 1 in the denominator.  Never below 2.
    """
    if min(epsilon, n, cov_norm, delta, c_constant) <= 0 or delta >= 1:
        raise ContractViolationError("all inputs must be positive with delta < 1")
    if l < 0:
        raise ContractViolationError(f"bandwidth must be nonnegative, got {l}")
    l_eff = max(l, 1)
    rate = c_constant * min(
        epsilon / (2.0 * l_eff * cov_norm),
        epsilon**2 / (4.0 * l_eff**2 * cov_norm**2),
    )
    k = math.ceil((2.0 * math.log(n) + math.log(8.0 / delta)) / rate)
    return max(k, 2)


def plan_localization(
    epsilon: float,
    beta: float,
    local_coefficient: float,
    n_blocks: int,
    cov_norm: float,
    delta: float = 0.05,
    c_constant: float = 1.0,
) -> LocalizationPlan:
    """Bandwidth plus sample-size plan for a target accuracy epsilon."""
    uncapped = choose_bandwidth(epsilon, beta, local_coefficient)
    cap = n_blocks // 2
    bandwidth = min(uncapped, cap)
    return LocalizationPlan(
        bandwidth=bandwidth,
        epsilon=epsilon,
        recommended_k=recommended_sample_size(
            epsilon, bandwidth, n_blocks, cov_norm, delta, c_constant
        ),
        c_constant=c_constant,
        bound_insufficient=uncapped > cap,
    )
