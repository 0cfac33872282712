"""Seeded trajectory simulation.

Chains are vectorized: a block of per-step map parameters is drawn one
chain at a time from that chain's own counter-based stream (so results
are independent of threading and chunking), then the active kernel
backend advances all chains through the block.  Forward orbits, affine
envelope sandwiches, coupled pairs and the normalized ratio all share
this machinery; backward composition keeps its sampled maps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from ._kernels import backend as _backend
from ._kernels import get_backend
from .affine import GroupElement, compose
from .maps import FamilySpec, MapSample
from .rng import chain_rng

__all__ = [
    "TrajectoryConfig",
    "TrajectoryResult",
    "EnvelopeResult",
    "CoupledResult",
    "RatioResult",
    "OverflowGuardError",
    "SandwichError",
    "MonotoneRatioError",
    "simulate_forward",
    "simulate_backward",
    "simulate_envelopes",
    "coupled_pair",
    "normalized_ratio",
    "iter_value_blocks",
    "parallel_chunks",
]

OVERFLOW_LIMIT = 1e300


class OverflowGuardError(RuntimeError):
    """A trajectory left the representable range."""


class SandwichError(AssertionError):
    """Z <= X <= Y failed: the family's (A, B) assignment is wrong."""


class MonotoneRatioError(AssertionError):
    """X_n / (A_1...A_n) decreased under audited condition (2)."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """A fully seeded simulation request.

    Records are kept at every step up to `dense_until`, then every
    `record_stride` steps (late-time thinning keeps memory bounded while
    the tails still get samples).
    """

    seed: int
    steps: int
    n_chains: int = 1
    initial: float | Sequence[float] = 1.0
    record_stride: int = 1
    dense_until: int = 10_000
    block_len: int = 4096

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    def initial_vector(self) -> np.ndarray:
        x0 = np.asarray(self.initial, dtype=float)
        if x0.ndim == 0:
            return np.full(self.n_chains, float(x0))
        if len(x0) != self.n_chains:
            raise ValueError("initial_points length must equal n_chains")
        return x0.copy()

    def recorded_steps(self) -> np.ndarray:
        n = np.arange(1, self.steps + 1)
        keep = (n <= self.dense_until) | ((n - self.dense_until) % self.record_stride == 0)
        return n[keep]


def _check_overflow(block: np.ndarray, start: int):
    m = np.abs(block).max()
    if not (m <= OVERFLOW_LIMIT):
        j, i = np.unravel_index(int(np.nanargmax(np.abs(block))), block.shape)
        raise OverflowGuardError(
            f"|x| exceeded {OVERFLOW_LIMIT:g} at step {start + j + 1}, chain {i}")


def _stack_params(spec: FamilySpec, rngs, k: int) -> dict:
    per_chain = [spec.draw_params(rng, k) for rng in rngs]
    return {name: np.ascontiguousarray(np.stack([p[name] for p in per_chain], axis=1))
            for name in per_chain[0]}


def _kernel_args(spec: FamilySpec, params: dict) -> tuple:
    if spec.kernel == "interval_mix_block":
        return (params["alin"], spec.t)
    return tuple(params[name] for name in spec.param_names)


def _run_kernel(spec: FamilySpec, kern, states: np.ndarray, params: dict,
                out: np.ndarray):
    fn = getattr(kern, spec.kernel)
    fn(states, *_kernel_args(spec, params), out)


def iter_value_blocks(
    spec: FamilySpec,
    config: TrajectoryConfig,
    chain_range: tuple[int, int] | None = None,
    backend_name: str | None = None,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_step, values_block) at full resolution.

    values_block has shape (k, n) holding X_(start+1) .. X_(start+k) for
    the chains in chain_range.  States evolve in the family's latent
    coordinate; yielded values are in the observable one.
    """
    kern = get_backend(backend_name) if backend_name else _backend
    lo, hi = chain_range if chain_range is not None else (0, config.n_chains)
    n = hi - lo
    rngs = [chain_rng(config.seed, c) for c in range(lo, hi)]
    x0 = config.initial_vector()[lo:hi]
    if spec.kernel is None:
        yield from _iter_generic_blocks(spec, config, rngs, x0)
        return
    states = np.ascontiguousarray(spec.state_from_value(x0), dtype=float)
    out = np.empty((config.block_len, n))
    done = 0
    while done < config.steps:
        k = min(config.block_len, config.steps - done)
        params = _stack_params(spec, rngs, k)
        _run_kernel(spec, kern, states, params, out[:k])
        values = np.asarray(spec.values_from_states(out[:k]))
        _check_overflow(values, done)
        yield done, values
        done += k


def _iter_generic_blocks(spec, config, rngs, x0):
    # python-only families (e.g. Galton-Watson): one sampled map per
    # chain per step; fine for the modest budgets these families see
    states = np.asarray(x0, dtype=float).copy()
    done = 0
    while done < config.steps:
        k = min(config.block_len, config.steps - done)
        vals = np.empty((k, len(states)))
        for j in range(k):
            for i, rng in enumerate(rngs):
                m = spec.sample_map(rng)
                states[i] = float(m.evaluate(states[i]))
            vals[j] = states
        _check_overflow(vals, done)
        yield done, vals
        done += k


@dataclass
class TrajectoryResult:
    steps: np.ndarray          # recorded step indices (n_rec,)
    values: np.ndarray         # recorded values (n_rec, n_chains)
    final: np.ndarray          # state after the last step (n_chains,)
    config: TrajectoryConfig


def _record_mask(config: TrajectoryConfig, start: int, k: int) -> np.ndarray:
    n = np.arange(start + 1, start + k + 1)
    return (n <= config.dense_until) | ((n - config.dense_until) % config.record_stride == 0)


def simulate_forward(spec: FamilySpec, config: TrajectoryConfig) -> TrajectoryResult:
    """Forward orbits; deterministic given (spec, seed)."""
    rec = []
    final = None
    for start, values in iter_value_blocks(spec, config):
        mask = _record_mask(config, start, values.shape[0])
        rec.append(values[mask])
        final = values[-1].copy()
    return TrajectoryResult(config.recorded_steps(), np.concatenate(rec), final, config)


def simulate_backward(spec: FamilySpec, config: TrajectoryConfig, x: float) -> np.ndarray:
    """Backward compositions Psi_1 ... Psi_n(x) for n = 0..steps.

    Retains the sampled maps; the n-th value recomposes through them, so
    cost grows quadratically (use the affine right-walk machinery for
    large horizons).  Single chain per seed stream.
    """
    if config.steps > 20_000 and spec.name != "affine":
        raise ValueError("generic backward composition is quadratic; keep steps <= 20000")
    rng = chain_rng(config.seed, 0)
    out = np.empty(config.steps + 1)
    out[0] = x
    if spec.name == "affine":
        # backward value = R_n acting on x, R_n = R_(n-1) * g_n
        g = GroupElement(0.0, 1.0)
        for n in range(1, config.steps + 1):
            p = spec.draw_params(rng, 1)
            g = compose(g, GroupElement(float(p["b"][0]), float(p["a"][0])))
            out[n] = g(x)
        return out
    maps: list[MapSample] = []
    for n in range(1, config.steps + 1):
        maps.append(spec.sample_map(rng))
        v = x
        for m in reversed(maps):
            v = float(m.evaluate(v))
        out[n] = v
    return out


@dataclass
class EnvelopeResult:
    steps: np.ndarray
    z: np.ndarray
    x: np.ndarray
    y: np.ndarray
    config: TrajectoryConfig


def simulate_envelopes(spec: FamilySpec, config: TrajectoryConfig) -> EnvelopeResult:
    """Drive X together with its affine envelopes Z_n = A Z - B and
    Y_n = A Y + B from the same sampled maps; any sandwich violation is a
    hard failure."""
    if spec.kernel is None:
        raise ValueError("envelope simulation needs a kernel family")
    kern = _backend
    n = config.n_chains
    rngs = [chain_rng(config.seed, c) for c in range(n)]
    x0 = config.initial_vector()
    xs = np.ascontiguousarray(spec.state_from_value(x0), dtype=float)
    zs = x0.copy()
    ys = x0.copy()
    k0 = config.block_len
    out_x = np.empty((k0, n))
    out_z = np.empty((k0, n))
    out_y = np.empty((k0, n))
    rec_s, rec_z, rec_x, rec_y = [], [], [], []
    done = 0
    while done < config.steps:
        k = min(k0, config.steps - done)
        params = _stack_params(spec, rngs, k)
        a, b = spec.envelope_ab(params)
        a = np.ascontiguousarray(a)
        _run_kernel(spec, kern, xs, params, out_x[:k])
        kern.affine_block(zs, a, np.ascontiguousarray(-b), out_z[:k])
        kern.affine_block(ys, a, np.ascontiguousarray(b), out_y[:k])
        vals = np.asarray(spec.values_from_states(out_x[:k]))
        _check_overflow(vals, done)
        bad = (out_z[:k] > vals) | (vals > out_y[:k])
        if bad.any():
            j, i = np.argwhere(bad)[0]
            raise SandwichError(
                f"sandwich violated at step {done + j + 1}, chain {i}: "
                f"z={out_z[j, i]:.6g}, x={vals[j, i]:.6g}, y={out_y[j, i]:.6g}")
        mask = _record_mask(config, done, k)
        rec_z.append(out_z[:k][mask])
        rec_x.append(vals[mask])
        rec_y.append(out_y[:k][mask])
        done += k
    return EnvelopeResult(config.recorded_steps(), np.concatenate(rec_z),
                          np.concatenate(rec_x), np.concatenate(rec_y), config)


@dataclass
class CoupledResult:
    steps: np.ndarray
    d: np.ndarray                  # recorded 1_K(X^x) |X^x - X^y|, (n_rec, n_chains)
    raw_gap: np.ndarray            # recorded |X^x - X^y| without the window factor
    log_prod_a: np.ndarray         # recorded log(A_1...A_n), same shape
    mean_final: float              # replica mean of d at the last step
    config: TrajectoryConfig


def coupled_pair(
    spec: FamilySpec,
    x: float,
    y: float,
    window: tuple[float, float],
    config: TrajectoryConfig,
) -> CoupledResult:
    """Two orbits under common randomness and their localized distance."""
    if spec.kernel is None:
        raise ValueError("coupled simulation needs a kernel family")
    kern = _backend
    n = config.n_chains
    rngs = [chain_rng(config.seed, c) for c in range(n)]
    sx = np.ascontiguousarray(spec.state_from_value(np.full(n, float(x))))
    sy = np.ascontiguousarray(spec.state_from_value(np.full(n, float(y))))
    out_x = np.empty((config.block_len, n))
    out_y = np.empty((config.block_len, n))
    lo, hi = window
    logprod = np.zeros(n)
    rec, rec_gap, rec_lp = [], [], []
    done = 0
    d_last = None
    while done < config.steps:
        k = min(config.block_len, config.steps - done)
        params = _stack_params(spec, rngs, k)
        _run_kernel(spec, kern, sx, params, out_x[:k])
        _run_kernel(spec, kern, sy, params, out_y[:k])
        vx = np.asarray(spec.values_from_states(out_x[:k]))
        vy = np.asarray(spec.values_from_states(out_y[:k]))
        _check_overflow(vx, done)
        a, _ = spec.envelope_ab(params)
        lp = logprod + np.cumsum(np.log(a), axis=0)
        gap = np.abs(vx - vy)
        d = gap * ((vx >= lo) & (vx <= hi))
        mask = _record_mask(config, done, k)
        rec.append(d[mask])
        rec_gap.append(gap[mask])
        rec_lp.append(lp[mask])
        logprod = lp[-1]
        d_last = d[-1]
        done += k
    return CoupledResult(config.recorded_steps(), np.concatenate(rec),
                         np.concatenate(rec_gap), np.concatenate(rec_lp),
                         float(d_last.mean()), config)


@dataclass
class RatioResult:
    steps: np.ndarray
    log_ratio: np.ndarray            # recorded log(X_n / A_1...A_n)
    violations: int
    worst_drop: float
    first_crossing: dict             # M -> per-chain first step with ratio > M (-1 censored)
    config: TrajectoryConfig


def normalized_ratio(
    spec: FamilySpec,
    y: float,
    config: TrajectoryConfig,
    thresholds: Sequence[float] = (1e6,),
    tol: float = 1e-12,
) -> RatioResult:
    """rho_n = X_n^y / (A_1...A_n), tracked in log space.

    Under the sandwich condition A x <= psi(x) the sequence is
    nondecreasing; a decrease beyond `tol` raises.  Also reports the
    first n with rho_n > M for each threshold.
    """
    if spec.kernel is None:
        raise ValueError("normalized ratio needs a kernel family")
    kern = _backend
    n = config.n_chains
    rngs = [chain_rng(config.seed, c) for c in range(n)]
    states = np.ascontiguousarray(spec.state_from_value(np.full(n, float(y))))
    out = np.empty((config.block_len, n))
    log_prod = np.zeros(n)
    prev = np.full(n, -np.inf) if y == 0 else np.full(n, math.log(y))
    logs_m = {float(m): np.log(m) for m in thresholds}
    crossing = {float(m): np.full(n, -1, dtype=np.int64) for m in thresholds}
    violations = 0
    worst = 0.0
    rec = []
    done = 0
    while done < config.steps:
        k = min(config.block_len, config.steps - done)
        params = _stack_params(spec, rngs, k)
        _run_kernel(spec, kern, states, params, out[:k])
        vals = np.asarray(spec.values_from_states(out[:k]))
        _check_overflow(vals, done)
        a, _ = spec.envelope_ab(params)
        cum = log_prod + np.cumsum(np.log(a), axis=0)
        with np.errstate(divide="ignore"):
            lr = np.where(vals > 0, np.log(np.maximum(vals, 1e-310)), -np.inf) - cum
        block_prev = np.vstack([prev, lr[:-1]])
        drop = block_prev - lr
        bad = np.isfinite(drop) & (drop > tol)
        if bad.any():
            violations += int(bad.sum())
            worst = max(worst, float(drop[bad].max()))
        for m, lm in logs_m.items():
            c = crossing[m]
            hits = (lr > lm) & (c[None, :] < 0)
            anyhit = hits.any(axis=0)
            first = np.argmax(hits, axis=0)
            c[anyhit] = done + 1 + first[anyhit]
        mask = _record_mask(config, done, k)
        rec.append(lr[mask])
        prev = lr[-1]
        log_prod = cum[-1]
        done += k
    if violations:
        raise MonotoneRatioError(
            f"{violations} monotonicity violations (worst drop {worst:.3g}); "
            "condition (2) audit should have caught this family")
    return RatioResult(config.recorded_steps(), np.concatenate(rec), violations,
                       worst, crossing, config)


def parallel_chunks(
    worker: Callable[[tuple[int, int]], object],
    n_chains: int,
    threads: int,
) -> list:
    """Run `worker` over contiguous chain ranges; results in range order.

    Per-chain streams make the output independent of the partition, so
    `threads` only affects speed.
    """
    threads = max(1, threads)
    n_chunks = min(n_chains, max(threads, min(4 * threads, n_chains)))
    bounds = np.linspace(0, n_chains, n_chunks + 1).astype(int)
    ranges = [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_chunks)
              if bounds[i + 1] > bounds[i]]
    if threads == 1:
        return [worker(r) for r in ranges]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, ranges))
