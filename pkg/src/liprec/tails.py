"""Heavy-tail measurements on stationary samples.

The centerpiece is the pairwise tail-constant estimator
C = E(|psi_theta(S)|^alpha - |M_theta S|^alpha) / (alpha m_alpha)
with theta drawn fresh and *paired* against each stationary sample: both
terms must see the same (theta, S) or the cancellation that makes the
expectation finite is destroyed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import PreconditionError
from .randomness import stream

MOM_BLOCKS = 32


def default_hill_k(n):
    """floor(n^(2/3)), via the exact integer condition k^3 <= n^2."""
    k = int(round(n ** (2.0 / 3.0)))
    while k**3 > n**2:
        k -= 1
    while (k + 1) ** 3 <= n**2:
        k += 1
    return k


def survival_curve(samples, t_grid, alpha):
    """Rows (t, p_hat, t^alpha * p_hat) with p_hat = P(sample > t)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    rows = []
    for t in t_grid:
        p = 1.0 - np.searchsorted(x, t, side="right") / n
        rows.append((float(t), float(p), float(t**alpha * p)))
    return rows


def hill_estimator(samples, k):
    """Hill estimate of the tail index from the top k order statistics."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if not 1 <= k < n:
        raise PreconditionError(f"hill needs 1 <= k < n, got k={k}, n={n}")
    top = np.partition(x, n - k - 1)[n - k - 1 :]
    top.sort()
    cutoff = top[0]
    if cutoff <= 0:
        raise PreconditionError("hill cutoff order statistic is nonpositive")
    log_excess = np.log(top[1:] / cutoff)
    total = float(log_excess.sum())
    if total <= 0:
        raise PreconditionError("hill log-excesses are all zero (tied samples)")
    return k / total


def hill_curve(samples, ks):
    return [(int(k), float(hill_estimator(samples, int(k)))) for k in ks]


def plateau_window(samples, lo_q=0.99, hi_q=0.9999):
    """Default diagnostic window: between those two radius quantiles."""
    x = np.asarray(samples, dtype=float)
    lo, hi = np.quantile(x, [lo_q, hi_q])
    if not 0 < lo < hi:
        raise PreconditionError("plateau window is degenerate for these samples")
    return float(lo), float(hi)


def empirical_tail_constant(samples, alpha, window=None, grid_points=32):
    """Median of t^alpha P(sample > t) over a log grid in the window."""
    if window is None:
        window = plateau_window(samples)
    grid = np.geomspace(window[0], window[1], grid_points)
    rows = survival_curve(samples, grid, alpha)
    return float(np.median([r[2] for r in rows]))


# ---------------------------------------------------------------------------
# the explicit tail constant


def _mom_se(values, blocks=MOM_BLOCKS):
    """Robust standard error of the mean via block medians.

    Block means are computed on a contiguous split; their median absolute
    deviation, normal-scaled, replaces the raw std which is unstable when
    the summands are themselves heavy-tailed.
    """
    values = np.asarray(values, dtype=float)
    usable = (len(values) // blocks) * blocks
    means = values[:usable].reshape(blocks, -1).mean(axis=1)
    center = np.median(means)
    mad = np.median(np.abs(means - center))
    return 1.4826 * float(mad) / math.sqrt(blocks), means


@dataclass(frozen=True)
class GoldieEstimate:
    constant: float
    se: float
    alpha: float
    m_alpha: float
    se_unreliable: bool = False


def goldie_constant(spec, batch_samples, alpha, m_alpha, master_seed=0, purpose="goldie"):
    """Pairwise estimator of the tail constant; returns a GoldieEstimate."""
    if alpha <= 0 or m_alpha <= 0:
        raise PreconditionError("goldie_constant needs alpha > 0 and m_alpha > 0")
    x = np.asarray(batch_samples)
    n = len(x)
    theta = models.sample_theta(spec, stream(master_seed, 0, purpose), n)
    lhs = models.radius(spec, models.apply(spec, theta, x)) ** alpha
    rhs = models.radius(spec, models.linear_apply(spec, theta, x)) ** alpha
    d = (lhs - rhs) / (alpha * m_alpha)
    value = float(d.mean())
    se, block_means = _mom_se(d)
    spread = np.abs(block_means - np.median(block_means))
    mad = np.median(spread)
    unreliable = bool(alpha >= 2 and mad > 0 and spread.max() > 20 * mad)
    return GoldieEstimate(value, se, float(alpha), float(m_alpha), unreliable)


def sigma_mass(tail_constant, alpha):
    """Total mass of the spherical part of the tail measure: alpha * C."""
    return alpha * tail_constant


def direction_masses(samples, alpha, tail_constant, dim=1, hi_q=0.999, bins=64):
    """Apportion sigma_mass over directions of the largest samples.

    d=1 splits exactly over {+1, -1}; d>=2 uses `bins` per angular
    coordinate. Directions carrying no large samples get zero mass.
    """
    total = sigma_mass(tail_constant, alpha)
    x = np.asarray(samples, dtype=float)
    if dim == 1:
        cut = np.quantile(np.abs(x), hi_q)
        big = x[np.abs(x) >= cut]
        frac_plus = float(np.mean(big > 0)) if len(big) else 0.5
        return np.array([1.0, -1.0]), np.array(
            [total * frac_plus, total * (1.0 - frac_plus)]
        )
    r = np.linalg.norm(x, axis=-1)
    cut = np.quantile(r, hi_q)
    big = x[r >= cut]
    u = big / np.linalg.norm(big, axis=-1, keepdims=True)
    if dim == 2:
        ang = np.arctan2(u[:, 1], u[:, 0])
        hist, edges = np.histogram(ang, bins=bins, range=(-np.pi, np.pi))
        centers = 0.5 * (edges[:-1] + edges[1:])
        dirs = np.stack([np.cos(centers), np.sin(centers)], axis=-1)
        weights = hist / hist.sum()
        keep = weights > 0
        return dirs[keep], total * weights[keep]
    az = np.arctan2(u[:, 1], u[:, 0])
    el = np.arcsin(np.clip(u[:, 2], -1, 1))
    hist, az_e, el_e = np.histogram2d(
        az, el, bins=bins, range=[(-np.pi, np.pi), (-np.pi / 2, np.pi / 2)]
    )
    az_c = 0.5 * (az_e[:-1] + az_e[1:])
    el_c = 0.5 * (el_e[:-1] + el_e[1:])
    aa, ee = np.meshgrid(az_c, el_c, indexing="ij")
    dirs = np.stack(
        [np.cos(ee) * np.cos(aa), np.cos(ee) * np.sin(aa), np.sin(ee)], axis=-1
    ).reshape(-1, 3)
    weights = (hist / hist.sum()).reshape(-1)
    keep = weights > 0
    return dirs[keep], total * weights[keep]


# ---------------------------------------------------------------------------
# stationary moment identity


def moment_identity_residual(spec, s, batch_samples, kappa_s, master_seed=0):
    """Normalized residual of E|S|^s (1 - kappa(s)) = E(|psi(S)|^s - |MS|^s).

    Computed as one mean of per-pair differences, so the correlation
    between the two sides cancels inside the standard error. Requires
    s below the tail exponent (kappa_s < 1).
    """
    if not kappa_s < 1.0:
        raise PreconditionError(
            f"moment identity needs kappa(s) < 1, got {kappa_s}; s is at or "
            "beyond the tail exponent"
        )
    x = np.asarray(batch_samples)
    n = len(x)
    theta = models.sample_theta(spec, stream(master_seed, 0, "identity"), n)
    r = models.radius(spec, x)
    lhs = r**s * (1.0 - kappa_s)
    rhs = (
        models.radius(spec, models.apply(spec, theta, x)) ** s
        - models.radius(spec, models.linear_apply(spec, theta, x)) ** s
    )
    diff = lhs - rhs
    se = float(diff.std() / math.sqrt(n))
    mean = float(diff.mean())
    z = abs(mean) / se if se > 0 else math.inf if mean else 0.0
    return z, mean, se


def moment_upper_bound(n_moment_beta, kappa_beta, beta):
    """(E|N|^beta)^(1/beta) / (1 - kappa(beta)^(1/beta)); needs kappa < 1."""
    if not 0 < beta:
        raise PreconditionError("beta must be positive")
    if not kappa_beta < 1.0:
        raise PreconditionError("moment bound needs kappa(beta) < 1")
    return n_moment_beta ** (1.0 / beta) / (1.0 - kappa_beta ** (1.0 / beta))


# ---------------------------------------------------------------------------
# assembled report


@dataclass(frozen=True)
class TailReport:
    alpha: float
    m_alpha: float
    goldie: GoldieEstimate
    sigma_mass: float
    survival: list = field(default_factory=list)
    hill: list = field(default_factory=list)
    plateau: tuple = (0.0, 0.0)
    plateau_deviation: float = math.nan
    flags: tuple = ()


def tail_report(
    spec,
    batch_samples,
    alpha,
    m_alpha,
    master_seed=0,
    t_points=32,
    hill_points=24,
):
    """Survival grid, Hill ladder, tail constant and plateau diagnostics."""
    radii = models.radius(spec, np.asarray(batch_samples))
    est = goldie_constant(spec, batch_samples, alpha, m_alpha, master_seed)
    window = plateau_window(radii)
    t_grid = np.geomspace(window[0], window[1], t_points)
    surv = survival_curve(radii, t_grid, alpha)
    n = len(radii)
    k_top = default_hill_k(n)
    ks = np.unique(np.geomspace(max(8, k_top // 64), k_top, hill_points).astype(int))
    hill = hill_curve(radii, ks)
    if est.constant > 0:
        dev = max(abs(r[2] / est.constant - 1.0) for r in surv)
    else:
        dev = math.nan
    flags = []
    if est.se_unreliable:
        flags.append("se unreliable")
    if not est.constant > 0:
        flags.append("nonpositive tail constant")
    return TailReport(
        alpha=float(alpha),
        m_alpha=float(m_alpha),
        goldie=est,
        sigma_mass=sigma_mass(est.constant, alpha),
        survival=surv,
        hill=hill,
        plateau=window,
        plateau_deviation=float(dev),
        flags=tuple(flags),
    )
