"""Cramér condition: moment generating curve kappa(s) = E|M|^s, its root,
and the assumption checkers that gate the heavy-tail machinery.

kappa is computed in closed form whenever the |M| law stays inside the
distribution algebra; otherwise a common-random-number Monte Carlo
estimate is used so the root bisection sees a monotone curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import models
from . import randomness as rnd
from .errors import BracketError, MomentDivergenceError, PreconditionError

CLOSED_FORM_TOL = 1e-6
MONTE_CARLO_TOL = 1e-3


def _closed_kappa(m_law, s):
    return rnd.abs_moment(m_law, s)


def kappa(m_law, s, mode="auto", rng=None, n_samples=rnd.DEFAULT_MC_SAMPLES):
    """E|M|^s -> (value, standard_error). se is 0 for closed forms.

    A non-finite Monte Carlo mean is returned as (inf, inf): divergence
    beyond the finite-moment range is a signal, not a crash.
    """
    if mode not in ("auto", "closed_form", "monte_carlo"):
        raise PreconditionError(f"unknown kappa mode {mode!r}")
    closed = _closed_kappa(m_law, s) if mode != "monte_carlo" else None
    if closed is not None:
        return closed, 0.0
    if mode == "closed_form":
        raise PreconditionError(f"no closed-form moments for kind {m_law.kind!r}")
    if rng is None:
        raise PreconditionError("monte carlo kappa needs a stream")
    return rnd.mc_abs_moment(m_law, s, rng, n_samples)


def kappa_curve(m_law, s_grid, mode="auto", rng=None, n_samples=rnd.DEFAULT_MC_SAMPLES):
    """Rows (s, kappa, se) over the grid, sharing one sample set in MC mode."""
    s_grid = [float(s) for s in s_grid]
    if mode != "monte_carlo" and all(_closed_kappa(m_law, s) is not None for s in s_grid):
        return [(s, _closed_kappa(m_law, s), 0.0) for s in s_grid]
    if rng is None:
        raise PreconditionError("monte carlo kappa curve needs a stream")
    x = np.abs(rnd.sample(m_law, rng, n_samples))
    rows = []
    for s in s_grid:
        with np.errstate(over="ignore"):
            p = x**s
        if not np.all(np.isfinite(p)):
            rows.append((s, math.inf, math.inf))
        else:
            rows.append((s, float(p.mean()), float(p.std() / math.sqrt(len(p)))))
    return rows


def solve_cramer(
    m_law,
    bracket,
    tol=None,
    mode="auto",
    rng=None,
    n_samples=rnd.DEFAULT_MC_SAMPLES,
):
    """Root of kappa(s) = 1 on s > 0 by bisection.

    Closed-form laws bisect the exact curve (tol 1e-6). Otherwise a single
    sample batch is drawn up front and reused at every bisection point
    (common random numbers keep the empirical curve convex), tol 1e-3.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise PreconditionError("bracket must satisfy 0 < lo < hi")

    closed = mode != "monte_carlo" and _closed_kappa(m_law, 1.0) is not None
    if mode == "closed_form" and not closed:
        raise PreconditionError(f"no closed-form moments for kind {m_law.kind!r}")
    if closed:
        def kap(s):
            return _closed_kappa(m_law, s)

        tol = CLOSED_FORM_TOL if tol is None else tol
    else:
        if rng is None:
            raise PreconditionError("monte carlo solve needs a stream")
        x = np.abs(rnd.sample(m_law, rng, n_samples))
        logx = np.where(x > 0, np.log(np.maximum(x, 1e-300)), -np.inf)

        def kap(s):
            with np.errstate(over="ignore"):
                p = np.exp(s * logx)
            m = float(np.mean(p))
            return m if math.isfinite(m) else math.inf

        tol = MONTE_CARLO_TOL if tol is None else tol

    k_hi = kap(hi)
    if not math.isfinite(k_hi):
        raise MomentDivergenceError(
            f"kappa diverges at s={hi}; the root bracket crosses the finite-moment range"
        )
    k_lo = kap(lo)
    if not (k_lo < 1.0 < k_hi):
        raise BracketError(
            f"no Cramér root in bracket: kappa({lo})={k_lo:.6g}, kappa({hi})={k_hi:.6g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kap(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def m_alpha(m_law, alpha, mode="auto", rng=None, n_samples=rnd.DEFAULT_MC_SAMPLES):
    """(E(|M|^alpha log|M|), se); must be positive at the Cramér root."""
    if mode not in ("auto", "closed_form", "monte_carlo"):
        raise PreconditionError(f"unknown m_alpha mode {mode!r}")
    value = se = None
    if mode != "monte_carlo":
        closed = rnd.abs_log_moment(m_law, alpha)
        if closed is not None:
            value, se = closed, 0.0
        elif mode == "closed_form":
            raise PreconditionError(f"no closed-form moments for kind {m_law.kind!r}")
    if value is None:
        if rng is None:
            raise PreconditionError("monte carlo m_alpha needs a stream")
        x = np.abs(rnd.sample(m_law, rng, n_samples))
        term = np.where(x > 0, x**alpha * np.log(np.maximum(x, 1e-300)), 0.0)
        value = float(term.mean())
        se = float(term.std() / math.sqrt(len(term)))
    if value <= 0:
        raise PreconditionError(
            f"m_alpha = {value:.6g} <= 0: alpha is not a valid Cramér exponent "
            "for this law"
        )
    return value, se


def s_infinity_probe(m_law, rng=None, n_samples=10**5, max_rungs=24):
    """Lower bound for the finite-moment range sup via a geometric ladder.

    Closed-form laws in the algebra have every moment finite: returns inf.
    Monte Carlo mode climbs s = 1, 2, 4, ... until overflow or a relative
    standard error above 50%, and reports the last reliable rung.
    """
    if _closed_kappa(m_law, 1.0) is not None:
        return math.inf
    if rng is None:
        raise PreconditionError("monte carlo probe needs a stream")
    last_good = 0.0
    s = 1.0
    for _ in range(max_rungs):
        value, se = rnd.mc_abs_moment(m_law, s, rng, n_samples)
        if not math.isfinite(value) or se > 0.5 * value:
            break
        last_good = s
        s *= 2.0
    return last_good


# ---------------------------------------------------------------------------
# assumption checkers


@dataclass(frozen=True)
class CheckReport:
    name: str
    value: float
    se: float
    passed: bool
    detail: str = ""


def check_contraction(spec, n_samples, rng):
    """Estimate E log L_theta; PASS iff mean + 3 se < 0."""
    theta = models.sample_theta(spec, rng, n_samples)
    lip = np.asarray(models.lipschitz_bound(spec, theta), dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log(lip)
    mean = float(logs.mean())
    se = float(logs.std() / math.sqrt(n_samples))
    return CheckReport("contraction", mean, se, mean + 3 * se < 0, "E log L + 3 se < 0")


def check_cancellation(spec, batch_samples, n_theta, rng, tol=1e-10):
    """|psi(x) - M x| <= |N| on sampled stationary points.

    Violations are reported, not raised: a positive fraction is the
    expected outcome when the support assumption itself fails.
    """
    x = np.asarray(batch_samples)
    idx = np.arange(n_theta) % len(x)
    x = x[idx]
    theta = models.sample_theta(spec, rng, n_theta)
    gap = models.radius(
        spec, models.apply(spec, theta, x) - models.linear_apply(spec, theta, x)
    )
    excess = gap - np.asarray(models.cancellation_bound(spec, theta), dtype=float)
    worst = float(excess.max())
    frac = float(np.mean(excess > tol))
    return CheckReport(
        "cancellation", worst, 0.0, worst <= tol, f"violating fraction {frac:.3g}"
    )


def check_smoothness(spec, x_grid, t_grid, n_theta, rng, tol=1e-10):
    """sup |t psi(x/t) - limit_map(x)| - t Q over grids; PASS iff <= tol."""
    theta = models.sample_theta(spec, rng, n_theta)
    shaped = models.ThetaDraw(
        theta.family,
        {k: np.reshape(v, (n_theta, 1)) for k, v in theta.values.items()},
    )
    x = np.asarray(x_grid, dtype=float)
    q = np.reshape(models.smoothness_bound(spec, theta), (n_theta, 1))
    worst = -math.inf
    for t in t_grid:
        if not 0 < t <= 1:
            raise PreconditionError("smoothness grid needs t in (0, 1]")
        gap = models.radius(
            spec,
            models.apply_dilated(spec, shaped, x, t) - models.limit_map(spec, shaped, x),
        )
        worst = max(worst, float((gap - t * q).max()))
    return CheckReport("smoothness", worst, 0.0, worst <= tol, "dilated-map envelope")


def nontriviality_probe(
    n_law, m_law, s_grid, rng=None, n_samples=rnd.DEFAULT_MC_SAMPLES
):
    """Rows (s, E|N|^s / kappa(s), (ratio)^(1/s)) plus a boundedness flag.

    A root staying bounded along the grid is evidence that the moment
    ratio condition holds with room to spare; steep growth flags risk.
    """
    rows = []
    for s in s_grid:
        num = rnd.abs_moment(n_law, s)
        if num is None:
            if rng is None:
                raise PreconditionError("probe needs a stream for sampled laws")
            num, _ = rnd.mc_abs_moment(n_law, s, rng, n_samples)
        den, _ = kappa(m_law, s, rng=rng, n_samples=n_samples)
        ratio = num / den
        rows.append((float(s), float(ratio), float(ratio ** (1.0 / s))))
    roots = [r[2] for r in rows]
    bounded = roots[-1] <= 1.5 * max(roots[0], 1e-300) if len(roots) > 1 else True
    return rows, bounded


# ---------------------------------------------------------------------------
# assembled report


@dataclass(frozen=True)
class CramerReport:
    s_grid: tuple
    kappa_values: tuple
    kappa_se: tuple
    alpha: float
    m_alpha: float
    m_alpha_se: float
    s_infinity_lower_bound: float
    method: str
    solver_tolerance: float


def cramer_report(
    m_law,
    s_grid,
    bracket,
    tol=None,
    mode="auto",
    master_seed=0,
    n_samples=rnd.DEFAULT_MC_SAMPLES,
):
    """Solve the Cramér problem and bundle curve, root and diagnostics."""
    closed = mode != "monte_carlo" and _closed_kappa(m_law, 1.0) is not None
    method = "closed_form" if closed else "monte_carlo"
    solver_tol = tol if tol is not None else (CLOSED_FORM_TOL if closed else MONTE_CARLO_TOL)
    grid_rng = None if closed else rnd.stream(master_seed, 0, "kappa-grid")
    curve = kappa_curve(m_law, s_grid, mode=mode, rng=grid_rng, n_samples=n_samples)
    alpha = solve_cramer(
        m_law, bracket, tol=solver_tol, mode=mode,
        rng=rnd.stream(master_seed, 0, "cramer-root"), n_samples=n_samples,
    )
    ma, ma_se = m_alpha(
        m_law, alpha, mode=mode, rng=rnd.stream(master_seed, 0, "m-alpha"),
        n_samples=n_samples,
    )
    s_inf = s_infinity_probe(
        m_law, rng=None if closed else rnd.stream(master_seed, 0, "s-infinity")
    )
    return CramerReport(
        s_grid=tuple(float(s) for s in s_grid),
        kappa_values=tuple(r[1] for r in curve),
        kappa_se=tuple(r[2] for r in curve),
        alpha=float(alpha),
        m_alpha=float(ma),
        m_alpha_se=float(ma_se),
        s_infinity_lower_bound=float(s_inf),
        method=method,
        solver_tolerance=float(solver_tol),
    )
