"""Forward and backward iteration engines.

Backward iteration composes fresh draws innermost, so the iterate is a.s.
Cauchy once the running Lipschitz product is small; we stop at the first
depth where product * oscillation-envelope < tol and return that bound as
a residual certificate.

Batches run in fixed blocks, one counter-based stream per block, merged
by block index: results are a pure function of (spec, master_seed, count)
no matter how many worker threads execute the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import CapacityError, ConvergenceError, PreconditionError
from .randomness import stream

DEFAULT_TOL = 1e-9
DEFAULT_MAX_DEPTH = 10**5
BLOCK_SIZE = 16384

_Q_CAP = 0.95  # contraction-rate clip for the oscillation envelope
_R_ENVELOPE = 1e9  # hard cap on the oscillation envelope
_STORAGE_CAP = 1 << 27  # stored draw scalars per block, memory guard


@dataclass(frozen=True)
class Trajectory:
    """Forward path: states[k] = X_k, partial_sums[k] = X_1 + ... + X_k."""

    states: np.ndarray
    partial_sums: np.ndarray


@dataclass(frozen=True)
class StationaryBatch:
    samples: np.ndarray
    stop_depths: np.ndarray
    residual_bounds: np.ndarray
    tol: float


def _as_points(spec, x0, count):
    d = models.point_dim(spec)
    x0 = np.asarray(x0, dtype=float)
    if d == 1:
        return np.broadcast_to(x0, (count,)).copy()
    return np.broadcast_to(x0, (count, d)).copy()


def _where_points(spec, mask, a, b):
    if models.point_dim(spec) == 1:
        return np.where(mask, a, b)
    return np.where(mask[:, None], a, b)


# ---------------------------------------------------------------------------
# forward iteration


def forward_chain(spec, x0, n, rng):
    """Iterate X_k = psi_{theta_k}(X_{k-1}); returns the full path."""
    d = models.point_dim(spec)
    shape = (n + 1,) if d == 1 else (n + 1, d)
    states = np.empty(shape)
    sums = np.empty(shape)
    x = np.asarray(x0, dtype=float) if d > 1 else float(x0)
    states[0] = x
    sums[0] = 0.0
    running = np.zeros(d) if d > 1 else 0.0
    for k in range(1, n + 1):
        theta = models.sample_theta(spec, rng)
        x = models.apply(spec, theta, x)
        running = running + x
        states[k] = x
        sums[k] = running
    return Trajectory(states, sums)


def _forward_block(spec, x0, n, rng, count, want_sums):
    z = _as_points(spec, x0, count)
    acc = np.zeros_like(z) if want_sums else None
    for _ in range(n):
        theta = models.sample_theta(spec, rng, count)
        z = models.apply(spec, theta, z)
        if want_sums:
            acc += z
    return acc if want_sums else z


def _run_blocks(worker, count, block_size, threads):
    starts = list(range(0, count, block_size))
    jobs = [(b, min(block_size, count - s)) for b, s in enumerate(starts)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: worker(*j), jobs))
    else:
        parts = [worker(*j) for j in jobs]
    return parts


def birkhoff_sums(spec, x0, n, replicas, master_seed, threads=1, block_size=BLOCK_SIZE):
    """S_n = X_1 + ... + X_n for `replicas` independent chains."""

    def worker(block, size):
        rng = stream(master_seed, block, "birkhoff")
        return _forward_block(spec, x0, n, rng, size, want_sums=True)

    return np.concatenate(_run_blocks(worker, replicas, block_size, threads))


def forward_endpoints(spec, x0, n, count, master_seed, threads=1, block_size=BLOCK_SIZE):
    """X_n for `count` independent forward chains (law comparison helper)."""

    def worker(block, size):
        rng = stream(master_seed, block, "forward")
        return _forward_block(spec, x0, n, rng, size, want_sums=False)

    return np.concatenate(_run_blocks(worker, count, block_size, threads))


# ---------------------------------------------------------------------------
# backward iteration


def _backward_block(spec, x0, tol, max_depth, rng, count):
    """Certified backward samples for one block; returns (points, depths, bounds)."""
    x0_pts = _as_points(spec, x0, count)
    log_prod = np.zeros(count)
    osc_max = np.zeros(count)
    depth = np.zeros(count, dtype=np.int64)
    cert = np.full(count, np.inf)
    draws = []
    active = np.ones(count, dtype=bool)
    n_param = len(models.required_params(spec.family, spec.dimension))

    step = 0
    while step < max_depth:
        step += 1
        if step * count * n_param > _STORAGE_CAP:
            raise CapacityError(
                "backward draw storage guard tripped; lower max_depth, tol "
                "or the block size"
            )
        theta = models.sample_theta(spec, rng, count)
        draws.append(theta)
        lip = np.asarray(models.lipschitz_bound(spec, theta), dtype=float)
        osc = models.radius(spec, models.apply(spec, theta, x0_pts) - x0_pts)
        with np.errstate(divide="ignore"):
            log_prod += np.log(lip)
        np.maximum(osc_max, osc, out=osc_max)
        q = np.minimum(np.exp(log_prod / step), _Q_CAP)
        envelope = np.minimum(osc_max / (1.0 - q), _R_ENVELOPE)
        bound = np.exp(log_prod) * envelope
        newly = active & (bound < tol)
        depth[newly] = step
        cert[newly] = bound[newly]
        active &= ~newly
        if not active.any():
            break
    if active.any():
        worst = float(np.min(np.exp(log_prod[active])))
        raise ConvergenceError(
            f"backward iteration hit max_depth={max_depth} with running "
            f"bound still {worst:.3e} * envelope >= tol={tol}"
        )

    # replay innermost-first: member i uses draws 1..depth[i]
    z = x0_pts.copy()
    for j in range(len(draws) - 1, -1, -1):
        y = models.apply(spec, draws[j], z)
        z = _where_points(spec, depth >= j + 1, y, z)
    return z, depth, cert


def backward_sample(spec, x0, tol=DEFAULT_TOL, max_depth=DEFAULT_MAX_DEPTH, rng=None):
    """One backward iterate: returns (point, depth, residual_bound)."""
    if rng is None:
        raise PreconditionError("backward_sample needs an explicit stream")
    pts, depths, certs = _backward_block(spec, x0, tol, max_depth, rng, 1)
    point = pts[0] if models.point_dim(spec) > 1 else float(pts[0])
    return point, int(depths[0]), float(certs[0])


def stationary_batch(
    spec,
    count,
    tol=DEFAULT_TOL,
    master_seed=0,
    max_depth=DEFAULT_MAX_DEPTH,
    x0=None,
    threads=1,
    block_size=BLOCK_SIZE,
):
    """`count` certified draws from the stationary law, deterministically.

    Block b uses the (master_seed, b, "stationary") stream; merging is by
    block index, so thread count cannot change a single output bit.
    """
    if count <= 0:
        raise PreconditionError("count must be positive")
    if x0 is None:
        x0 = models.zero_point(spec)

    def worker(block, size):
        rng = stream(master_seed, block, "stationary")
        return _backward_block(spec, x0, tol, max_depth, rng, size)

    parts = _run_blocks(worker, count, block_size, threads)
    samples = np.concatenate([p[0] for p in parts])
    depths = np.concatenate([p[1] for p in parts])
    certs = np.concatenate([p[2] for p in parts])
    return StationaryBatch(samples, depths, certs, tol)


# ---------------------------------------------------------------------------
# paired redraws used by tail functionals


def paired_theta(spec, batch_size, master_seed, purpose="pairs"):
    """Fresh theta draws independent of (and sized to) a stationary batch."""
    rng = stream(master_seed, 0, purpose)
    return models.sample_theta(spec, rng, batch_size)
