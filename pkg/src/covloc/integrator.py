"""Reproducible Euler-Maruyama stepping for single paths and parallel ensembles.

Reproducibility contract: sample j's entire noise stream is a pure function
of (master_seed, j), realized by a counter-based Philox generator keyed with
the pair.  Results are therefore bit-identical across worker counts and
execution orders; reductions over samples happen in fixed index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import ContractViolationError, LatticeModelSpec

SAMPLE_INITIAL_LAW = "sample-initial-law"

# Finite-ness is checked every _CHECK_EVERY steps and at the end; NaNs and
# infs persist under the update, so nothing escapes detection.
_CHECK_EVERY = 8
# Noise is pre-generated in blocks of steps sized to keep the buffer small;
# block size never affects results (each sample is one continuous stream).
_NOISE_BUDGET = 8_000_000  # doubles per buffer
_CHUNK_SAMPLES = 256


class NumericalBlowupError(RuntimeError):
    """A state or drift evaluation left the finite range."""

    def __init__(self, time: float, block_index: int, sample_index: int | None = None):
        self.time = time
        self.block_index = block_index
        self.sample_index = sample_index
        where = f"block {block_index}"
        if sample_index is not None:
            where = f"sample {sample_index}, " + where
        super().__init__(f"non-finite state at t={time:.6g} ({where}); reduce the step size")


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon, and the master seed all randomness derives from."""

    step_size: float
    t_end: float
    master_seed: int

    def __post_init__(self):
        if self.step_size <= 0:
            raise ContractViolationError(f"step_size must be positive, got {self.step_size}")
        if self.t_end < 0:
            raise ContractViolationError(f"t_end must be nonnegative, got {self.t_end}")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ContractViolationError("master_seed must fit in 64 unsigned bits")
        ratio = self.t_end / self.step_size
        if abs(ratio - round(ratio)) > 1e-9:
            raise ContractViolationError(
                f"t_end/step_size = {ratio!r} is not an integer step count"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.step_size))


@dataclass(frozen=True)
class EnsembleState:
    """K independent lattice states at a common time, with seed provenance."""

    samples: np.ndarray  # (K, N, q), read-only
    time: float
    seeds: tuple[int, ...]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 3:
            raise ContractViolationError(f"samples must be (K, N, q), got {samples.shape}")
        if len(self.seeds) != samples.shape[0]:
            raise ContractViolationError("one derived seed per sample is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ContractViolationError("derived seeds must be pairwise distinct")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    def component(self, c: int = 1) -> np.ndarray:
        """(K, N) view of one block component, 1-based."""
        return self.samples[:, :, c - 1]


def sample_stream_key(master_seed: int, sample_index: int) -> int:
    """128-bit Philox key for one sample: (master_seed << 64) | sample_index."""
    return (int(master_seed) << 64) | int(sample_index)


def _sample_generator(master_seed: int, sample_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=sample_stream_key(master_seed, sample_index)))


def _drift_term(model: LatticeModelSpec, t: float, state: np.ndarray) -> np.ndarray:
    """Local drift plus lattice-averaged mean field; state is (..., N, q)."""
    x_prev = np.roll(state, 1, axis=-2)
    x_next = np.roll(state, -1, axis=-2)
    total = model.drift(t, x_prev, state, x_next)
    total = total + model.mean_field(t, state).mean(axis=-2, keepdims=True)
    return total


def _first_bad_block(state: np.ndarray) -> tuple[int, int | None]:
    """1-based (block, sample) of the first non-finite entry."""
    bad = np.argwhere(~np.isfinite(state))
    first = bad[0]
    if state.ndim == 3:
        return int(first[1]) + 1, int(first[0])
    return int(first[-2]) + 1, None


def euler_step(
    state: np.ndarray,
    t: float,
    model: LatticeModelSpec,
    h: float,
    noise: np.ndarray,
) -> np.ndarray:
    """One explicit Euler-Maruyama step for a single (N, q) lattice state.

    ``noise`` is an (N, q) standard normal draw; the update is
    state + h * (drift + mean field) + sqrt(h) * noise @ sigma^T applied
    block-wise.  Deterministic given (state, t, noise).
    """
    if h <= 0:
        raise ContractViolationError(f"h must be positive, got {h}")
    state = np.asarray(state, dtype=float)
    noise = np.asarray(noise, dtype=float)
    expected = (model.n_blocks, model.block_dim)
    if state.shape != expected or noise.shape != expected:
        raise ContractViolationError(
            f"state and noise must have shape {expected}, got {state.shape} and {noise.shape}"
        )
    if not np.isfinite(state).all():
        block, _ = _first_bad_block(state)
        raise NumericalBlowupError(t, block)
    with np.errstate(over="ignore", invalid="ignore"):
        out = state + h * _drift_term(model, t, state) + math.sqrt(h) * (noise @ model.sigma.T)
    if not np.isfinite(out).all():
        block, _ = _first_bad_block(out)
        raise NumericalBlowupError(t + h, block)
    return out


@dataclass(frozen=True)
class PathResult:
    """States of one path captured at the requested output times."""

    times: np.ndarray  # (T,)
    states: np.ndarray  # (T, N, q)


def _resolve_output_steps(config: IntegratorConfig, output_times) -> list[int]:
    if output_times is None:
        output_times = [config.t_end]
    steps = []
    for t in output_times:
        ratio = t / config.step_size if config.step_size else 0.0
        k = int(round(ratio))
        if abs(ratio - k) > 1e-9 or not (0 <= k <= config.n_steps):
            raise ContractViolationError(
                f"output time {t} is not a multiple of h within [0, t_end]"
            )
        steps.append(k)
    if steps != sorted(steps):
        raise ContractViolationError("output times must be nondecreasing")
    return steps


def _initial_state(model, gen, initial):
    n, q = model.n_blocks, model.block_dim
    if isinstance(initial, str):
        if initial != SAMPLE_INITIAL_LAW:
            raise ContractViolationError(f"unknown initial condition {initial!r}")
        zeta = gen.standard_normal((n, q))
        return model.m0 + zeta @ model.sigma0.T
    state = np.asarray(initial, dtype=float)
    if state.shape != (n, q):
        raise ContractViolationError(f"initial state must be ({n}, {q}), got {state.shape}")
    return state.copy()


def simulate_path(
    model: LatticeModelSpec,
    config: IntegratorConfig,
    initial=SAMPLE_INITIAL_LAW,
    output_times=None,
) -> PathResult:
    """Integrate one path; a deterministic function of (model, config, initial).

    ``initial`` is an (N, q) array or the literal "sample-initial-law", in
    which case the initial state is drawn from N(m0, sigma0 sigma0^T) using
    the path's own stream.  Output times must be multiples of the step size.
    """
    out_steps = _resolve_output_steps(config, output_times)
    gen = _sample_generator(config.master_seed, 0)
    state = _initial_state(model, gen, initial)
    if not np.isfinite(state).all():
        block, _ = _first_bad_block(state)
        raise NumericalBlowupError(0.0, block)
    h = config.step_size
    records = {}
    if 0 in out_steps:
        records[0] = state.copy()
    n, q = model.n_blocks, model.block_dim
    for k in range(config.n_steps):
        noise = gen.standard_normal((n, q))
        state = euler_step(state, k * h, model, h, noise)
        if (k + 1) in out_steps:
            records[k + 1] = state.copy()
    times = np.array([s * h for s in out_steps])
    states = np.stack([records[s] for s in out_steps]) if out_steps else np.empty((0, n, q))
    return PathResult(times=times, states=states)


def _simulate_chunk(model, config, sample_lo, sample_hi, snapshot_steps=None):
    """Advance samples [sample_lo, sample_hi) to t_end.

    Returns {step: (C, N, q) states} for the requested snapshot steps
    (default: final step only).  Noise for the next step-block is generated
    on a helper thread while the current block is being stepped; generation
    order within each sample's stream is unaffected.
    """
    n, q, h = model.n_blocks, model.block_dim, config.step_size
    n_steps = config.n_steps
    snapshot_steps = {n_steps} if snapshot_steps is None else set(snapshot_steps)
    count = sample_hi - sample_lo
    gens = [_sample_generator(config.master_seed, j) for j in range(sample_lo, sample_hi)]

    state = np.empty((count, n, q))
    for c, gen in enumerate(gens):
        state[c] = _initial_state(model, gen, SAMPLE_INITIAL_LAW)

    block_steps = max(1, min(256, _NOISE_BUDGET // max(1, count * n * q)))
    sqrt_h = math.sqrt(h)
    sigma_t = model.sigma.T

    def generate(lo, hi):
        buf = np.empty((count, hi - lo, n, q))
        for c, gen in enumerate(gens):
            gen.standard_normal(out=buf[c])
        return buf

    snapshots = {}
    if 0 in snapshot_steps:
        snapshots[0] = state.copy()

    with ThreadPoolExecutor(max_workers=1) as prefetch, np.errstate(
        over="ignore", invalid="ignore"
    ):
        step = 0
        pending = prefetch.submit(generate, 0, min(block_steps, n_steps)) if n_steps else None
        while step < n_steps:
            hi = min(step + block_steps, n_steps)
            noise = pending.result()
            nxt = min(hi + block_steps, n_steps)
            pending = prefetch.submit(generate, hi, nxt) if hi < n_steps else None
            for b in range(hi - step):
                t = (step + b) * h
                state = (
                    state
                    + h * _drift_term(model, t, state)
                    + sqrt_h * (noise[:, b] @ sigma_t)
                )
                k = step + b + 1
                if k % _CHECK_EVERY == 0 or k == n_steps:
                    if not np.isfinite(state).all():
                        block, local = _first_bad_block(state)
                        raise NumericalBlowupError(k * h, block, sample_lo + local)
                if k in snapshot_steps:
                    snapshots[k] = state.copy()
            step = hi
    return snapshots


def simulate_ensemble(
    model: LatticeModelSpec,
    config: IntegratorConfig,
    n_samples: int,
    n_workers: int = 1,
    output_times=None,
) -> EnsembleState | list[EnsembleState]:
    """Integrate K independent samples of the lattice SDE to t_end.

    Per-sample noise streams are derived from (master_seed, sample index), so
    the result is independent of chunking, scheduling, and ``n_workers``.
    With ``output_times`` given, returns one EnsembleState per time
    (nondecreasing multiples of h); otherwise a single EnsembleState at t_end.
    """
    if n_samples < 1:
        raise ContractViolationError(f"n_samples must be >= 1, got {n_samples}")
    snapshot_steps = _resolve_output_steps(config, output_times)
    want_list = output_times is not None
    n, q = model.n_blocks, model.block_dim
    out = {s: np.empty((n_samples, n, q)) for s in snapshot_steps}

    bounds = [(lo, min(lo + _CHUNK_SAMPLES, n_samples)) for lo in range(0, n_samples, _CHUNK_SAMPLES)]

    def run(span):
        lo, hi = span
        return lo, hi, _simulate_chunk(model, config, lo, hi, snapshot_steps)

    if n_workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, bounds))
    else:
        results = [run(span) for span in bounds]
    for lo, hi, snaps in results:
        for s in snapshot_steps:
            out[s][lo:hi] = snaps[s]

    seeds = tuple(sample_stream_key(config.master_seed, j) for j in range(n_samples))
    states = [
        EnsembleState(samples=out[s], time=s * config.step_size, seeds=seeds)
        for s in snapshot_steps
    ]
    return states if want_list else states[0]
