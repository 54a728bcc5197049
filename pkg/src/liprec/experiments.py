"""Experiment runners behind the CLI verbs.

Each runner takes a parsed Config plus (out_dir, seed, threads), computes
its tables, writes CSV files with fixed headers, optionally SVG figures,
and appends one JSON line per stage to manifest.jsonl carrying the config
digest, the seed, wall time and a sha256 per output file. All sampled
stages draw from block-indexed streams, so the thread count never changes
an output byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time

import numpy as np

from . import chains, cramer, models, stable, support, svgplots, tails
from . import config as cfgmod
from . import randomness as rnd
from ._version import VERSION
from .config import get_bool, get_float, get_floats, get_int, get_str
from .errors import AssertionFlagError, ConfigError, PreconditionError
from .randomness import stream

DEFAULT_COUNT = 65536
DEFAULT_TOL = 1e-9


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(out_dir, name, header, rows):
    """Write a table and return its sha256; floats use repr for exact
    round-trips and byte-stable output."""
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _append_manifest(out_dir, record):
    with open(os.path.join(out_dir, "manifest.jsonl"), "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


class _Stage:
    """Times a stage and logs its outputs to the manifest."""

    def __init__(self, out_dir, name, digest, seed, threads):
        self.out_dir = out_dir
        self.name = name
        self.digest = digest
        self.seed = seed
        self.threads = threads
        self.outputs = {}

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def add(self, name, sha):
        self.outputs[name] = sha

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            return False
        _append_manifest(
            self.out_dir,
            {
                "stage": self.name,
                "config_digest": self.digest,
                "seed": self.seed,
                "threads": self.threads,
                "version": VERSION,
                "wall_s": round(time.perf_counter() - self.t0, 6),
                "outputs": self.outputs,
            },
        )
        return False


def _prologue(cfg, out_dir, seed):
    spec = cfgmod.build_model(cfg)
    digest = cfgmod.config_digest(cfg, VERSION)
    if seed is None:
        seed = get_int(cfg, "experiment", "seed", default=0)
    os.makedirs(out_dir, exist_ok=True)
    return spec, digest, int(seed)


def _point_header(dim):
    return [f"x{i + 1}" for i in range(dim)]


def _want_svg(cfg):
    return get_bool(cfg, "output", "svg", default=False)


# ---------------------------------------------------------------------------
# alpha resolution and assertion gates shared by tail and limit runs


def _resolve_alpha(cfg, spec, seed):
    """(alpha, m_alpha, method) from config: explicit number or solved root."""
    text = get_str(cfg, "experiment", "alpha", default="solve")
    m_law = models.linear_scale_law(spec)
    mode = get_str(cfg, "experiment", "mode", default="auto")
    n_samples = get_int(cfg, "experiment", "mc_samples", default=rnd.DEFAULT_MC_SAMPLES)
    if text == "solve":
        if m_law is None:
            raise ConfigError(
                "no representable scale law for this model; set alpha explicitly"
            )
        bracket = get_floats(cfg, "experiment", "bracket", default=(0.05, 8.0))
        alpha = cramer.solve_cramer(
            m_law,
            bracket,
            mode=mode,
            rng=stream(seed, 0, "alpha-solve"),
            n_samples=n_samples,
        )
        method = "solved"
    else:
        try:
            alpha = float(text)
        except ValueError:
            raise ConfigError(
                f"[experiment] alpha must be a number or 'solve', got {text!r}"
            ) from None
        method = "given"
    if m_law is not None:
        m_al, _ = cramer.m_alpha(
            m_law, alpha, mode=mode, rng=stream(seed, 0, "m-alpha"), n_samples=n_samples
        )
    else:
        th = models.sample_theta(spec, stream(seed, 0, "m-alpha"), n_samples)
        m = np.asarray(models.m_scale(spec, th), dtype=float)
        pos = m[m > 0]
        vals = pos**alpha * np.log(pos)
        m_al = float(vals.mean())
        if not m_al > 0:
            raise PreconditionError("sampled E M^alpha log M is not positive")
    return float(alpha), float(m_al), method


def _require_nonarithmetic(cfg, spec):
    m_law = models.linear_scale_law(spec)
    if m_law is None:
        return
    if rnd.arithmetic_risk(m_law) and not get_bool(cfg, "assertions", "nonarithmetic"):
        raise AssertionFlagError(
            "the scale law has at most two atoms and may generate an arithmetic "
            "subgroup; set [assertions] nonarithmetic = true to run tail or "
            "limit experiments on it"
        )


def _require_linearity(cfg, spec, samples):
    if spec.family == "affine" or models.point_dim(spec) > 1:
        return
    x = np.asarray(samples)
    if (x > 0).any() and (x < 0).any():
        if not get_bool(cfg, "assertions", "linear_on_support"):
            raise AssertionFlagError(
                "the sampled stationary support is two-sided but this family's "
                "one-step maps are not linear on it; set [assertions] "
                "linear_on_support = true to run the limit experiment anyway"
            )


def _closed_center(spec):
    """E S for scalar affine models with closed-form means, else None."""
    if spec.family != "affine" or spec.dimension != 1:
        return None
    em = rnd.signed_mean(spec.laws["scale"])
    en = rnd.signed_mean(spec.laws["shift"])
    if em is None or en is None or not abs(em) < 1:
        return None
    return en / (1.0 - em)


# ---------------------------------------------------------------------------
# the six runners


def run_cramer(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    m_law = models.linear_scale_law(spec)
    if m_law is None:
        raise ConfigError("no representable scale law; the moment curve needs one")
    bracket = get_floats(cfg, "experiment", "bracket", default=(0.05, 8.0))
    s_grid = get_floats(cfg, "experiment", "s_grid", default=None)
    if s_grid is None:
        s_grid = tuple(np.linspace(bracket[0], bracket[1], 25))
    mode = get_str(cfg, "experiment", "mode", default="auto")
    n_samples = get_int(cfg, "experiment", "mc_samples", default=rnd.DEFAULT_MC_SAMPLES)
    tol = get_float(cfg, "experiment", "solver_tol", default=-1.0)
    with _Stage(out_dir, "cramer", digest, seed, threads) as st:
        rep = cramer.cramer_report(
            m_law,
            s_grid,
            bracket,
            tol=None if tol <= 0 else tol,
            mode=mode,
            master_seed=seed,
            n_samples=n_samples,
        )
        st.add(
            "cramer.csv",
            write_csv(
                out_dir,
                "cramer.csv",
                ["s", "kappa", "se"],
                zip(rep.s_grid, rep.kappa_values, rep.kappa_se),
            ),
        )
        st.add(
            "cramer_solution.csv",
            write_csv(
                out_dir,
                "cramer_solution.csv",
                ["alpha", "m_alpha", "s_infinity_lower_bound", "method", "solver_tolerance"],
                [
                    (
                        rep.alpha,
                        rep.m_alpha,
                        rep.s_infinity_lower_bound,
                        rep.method,
                        rep.solver_tolerance,
                    )
                ],
            ),
        )
        if _want_svg(cfg):
            svgplots.kappa_plot(
                os.path.join(out_dir, "kappa.svg"),
                rep.s_grid,
                rep.kappa_values,
                rep.alpha,
            )
    return {"alpha": rep.alpha, "m_alpha": rep.m_alpha, "report": rep}


def run_simulate(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    count = get_int(cfg, "experiment", "count", default=DEFAULT_COUNT)
    tol = get_float(cfg, "experiment", "tol", default=DEFAULT_TOL)
    max_depth = get_int(cfg, "experiment", "max_depth", default=chains.DEFAULT_MAX_DEPTH)
    mode = get_str(cfg, "experiment", "sampler", default="backward")
    x0_cfg = get_floats(cfg, "experiment", "x0", default=None)
    dim = models.point_dim(spec)
    x0 = models.zero_point(spec) if x0_cfg is None else (
        float(x0_cfg[0]) if dim == 1 else np.asarray(x0_cfg, dtype=float)
    )
    with _Stage(out_dir, "simulate", digest, seed, threads) as st:
        if mode == "backward":
            batch = chains.stationary_batch(
                spec, count, tol=tol, master_seed=seed, max_depth=max_depth,
                x0=x0, threads=threads,
            )
            pts = np.asarray(batch.samples)
            cols = pts[:, None] if dim == 1 else pts
            rows = [
                tuple(cols[i]) + (int(batch.stop_depths[i]), float(batch.residual_bounds[i]))
                for i in range(count)
            ]
            header = _point_header(dim) + ["stop_depth", "residual_bound"]
            result = {"samples": batch.samples, "batch": batch}
        elif mode == "forward":
            n = get_int(cfg, "experiment", "n", default=1024)
            pts = np.asarray(chains.forward_endpoints(spec, x0, n, count, seed, threads))
            cols = pts[:, None] if dim == 1 else pts
            rows = [tuple(c) for c in cols]
            header = _point_header(dim)
            result = {"samples": pts}
        else:
            raise ConfigError(f"[experiment] sampler must be backward or forward, got {mode!r}")
        st.add("samples.csv", write_csv(out_dir, "samples.csv", header, rows))
    return result


def run_tail(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    _require_nonarithmetic(cfg, spec)
    count = get_int(cfg, "experiment", "count", default=DEFAULT_COUNT)
    tol = get_float(cfg, "experiment", "tol", default=DEFAULT_TOL)
    t_points = get_int(cfg, "experiment", "t_points", default=32)
    hill_points = get_int(cfg, "experiment", "hill_points", default=24)
    with _Stage(out_dir, "tail", digest, seed, threads) as st:
        alpha, m_al, _ = _resolve_alpha(cfg, spec, seed)
        batch = chains.stationary_batch(
            spec, count, tol=tol, master_seed=seed, threads=threads
        )
        rep = tails.tail_report(
            spec, batch.samples, alpha, m_al, master_seed=seed,
            t_points=t_points, hill_points=hill_points,
        )
        st.add(
            "tail_survival.csv",
            write_csv(out_dir, "tail_survival.csv", ["t", "p_hat", "t_alpha_p"], rep.survival),
        )
        st.add(
            "hill.csv",
            write_csv(out_dir, "hill.csv", ["k", "alpha_hat"], rep.hill),
        )
        st.add(
            "goldie.csv",
            write_csv(
                out_dir,
                "goldie.csv",
                ["C", "se", "alpha", "m_alpha"],
                [(rep.goldie.constant, rep.goldie.se, rep.alpha, rep.m_alpha)],
            ),
        )
        if _want_svg(cfg):
            svgplots.survival_plot(
                os.path.join(out_dir, "survival.svg"), rep.survival, alpha, rep.goldie.constant
            )
            svgplots.hill_plot(os.path.join(out_dir, "hill.svg"), rep.hill, alpha)
    return {"report": rep, "samples": batch.samples, "alpha": alpha}


def run_limit(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    if models.point_dim(spec) != 1:
        raise ConfigError("the limit experiment is one-dimensional")
    _require_nonarithmetic(cfg, spec)
    n = get_int(cfg, "experiment", "n")
    replicas = get_int(cfg, "experiment", "replicas")
    count = get_int(cfg, "experiment", "count", default=DEFAULT_COUNT)
    tol = get_float(cfg, "experiment", "tol", default=DEFAULT_TOL)
    center_text = get_str(cfg, "experiment", "center", default="auto")
    with _Stage(out_dir, "limit", digest, seed, threads) as st:
        alpha, m_al, _ = _resolve_alpha(cfg, spec, seed)
        pilot = chains.stationary_batch(
            spec, count, tol=tol, master_seed=seed, threads=threads
        )
        _require_linearity(cfg, spec, pilot.samples)
        params0 = stable.limit_params(alpha)
        center = 0.0
        if params0.regime in ("mid", "eq2"):
            if center_text == "auto":
                closed = _closed_center(spec)
                center = float(pilot.samples.mean()) if closed is None else closed
            elif center_text == "stationary_mean":
                center = float(pilot.samples.mean())
            else:
                try:
                    center = float(center_text)
                except ValueError:
                    raise ConfigError(
                        f"[experiment] center must be a number, 'auto' or "
                        f"'stationary_mean', got {center_text!r}"
                    ) from None
        params = stable.limit_params(alpha, center)
        sums = chains.birkhoff_sums(
            spec, models.zero_point(spec), n, replicas, seed, threads=threads
        )
        xi_value = stable.xi(1.0 / n, pilot.samples) if params.regime == "eq1" else None
        norm = stable.normalize_birkhoff(sums, n, params, xi_value)
        st.add(
            "limit_samples.csv",
            write_csv(
                out_dir,
                "limit_samples.csv",
                ["replica", "value"],
                list(enumerate(norm.tolist())),
            ),
        )
        if params.regime == "eq2":
            chk = stable.gaussian_check(norm)
            st.add(
                "limit_fit.csv",
                write_csv(
                    out_dir,
                    "limit_fit.csv",
                    ["statistic", "value"],
                    [
                        ("ks_stat", chk.ks_stat),
                        ("ks_critical", chk.ks_critical),
                        ("skewness", chk.skewness),
                        ("excess_kurtosis", chk.excess_kurtosis),
                        ("passed", chk.passed),
                    ],
                ),
            )
            fit = None
            t_grid = stable.stable_index_fit(norm).t_values
            result_extra = {"gaussian": chk}
        else:
            fit = stable.stable_index_fit(norm)
            t_grid = fit.t_values
            st.add(
                "limit_fit.csv",
                write_csv(
                    out_dir,
                    "limit_fit.csv",
                    ["statistic", "value"],
                    [
                        ("alpha_hat", fit.alpha_hat),
                        ("intercept", fit.intercept),
                        ("window_lo", float(fit.t_values[0])),
                        ("window_hi", float(fit.t_values[-1])),
                    ],
                ),
            )
            result_extra = {"fit": fit}
        cf_rows = stable.empirical_cf(norm, t_grid)
        st.add(
            "cf.csv",
            write_csv(out_dir, "cf.csv", ["t", "v_index", "re", "im", "se"], cf_rows),
        )
        if _want_svg(cfg):
            mods = [math.hypot(r[2], r[3]) for r in cf_rows]
            svgplots.cf_plot(
                os.path.join(out_dir, "cf.svg"),
                [r[0] for r in cf_rows],
                mods,
                None if fit is None else fit.alpha_hat,
                None if fit is None else fit.intercept,
            )
            if params.regime == "eq2":
                svgplots.qq_plot(os.path.join(out_dir, "qq.svg"), norm)
    return {
        "normalized": norm,
        "params": params,
        "alpha": alpha,
        "pilot": pilot.samples,
        **result_extra,
    }


def run_support(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    max_depth = get_int(cfg, "experiment", "max_cloud_depth", default=12)
    epsilon = get_float(cfg, "experiment", "epsilon", default=1e-6)
    count = get_int(cfg, "experiment", "count", default=10000)
    tol = get_float(cfg, "experiment", "tol", default=DEFAULT_TOL)
    word_guard = get_int(cfg, "experiment", "word_guard", default=support.WORD_GUARD)
    dim = models.point_dim(spec)
    with _Stage(out_dir, "support", digest, seed, threads) as st:
        cloud = support.enumerate_fixed_points(spec, max_depth, word_guard=word_guard)
        batch = chains.stationary_batch(
            spec, count, tol=tol, master_seed=seed, threads=threads
        )
        cov = support.coverage_check(cloud, batch.samples, epsilon)
        frontier = support.closure_frontier(spec, cloud)
        pts = np.asarray(cloud.points)
        cols = pts[:, None] if dim == 1 else pts
        st.add(
            "support.csv",
            write_csv(
                out_dir,
                "support.csv",
                _point_header(dim) + ["depth"],
                [tuple(cols[i]) + (int(cloud.depths[i]),) for i in range(len(pts))],
            ),
        )
        st.add(
            "support_coverage.csv",
            write_csv(
                out_dir,
                "support_coverage.csv",
                ["fraction_covered", "max_distance", "epsilon", "count", "frontier_escape"],
                [(cov.fraction_covered, cov.max_distance, cov.epsilon, cov.count, frontier)],
            ),
        )
        if _want_svg(cfg) and dim <= 2:
            svgplots.cloud_plot(os.path.join(out_dir, "cloud.svg"), cloud.points)
    return {"cloud": cloud, "coverage": cov, "frontier": frontier}


def run_check(cfg, out_dir, seed=None, threads=1):
    spec, digest, seed = _prologue(cfg, out_dir, seed)
    n_theta = get_int(cfg, "experiment", "mc_samples", default=100000)
    count = get_int(cfg, "experiment", "count", default=4096)
    tol = get_float(cfg, "experiment", "tol", default=DEFAULT_TOL)
    with _Stage(out_dir, "check", digest, seed, threads) as st:
        rng = stream(seed, 0, "check")
        reports = [cramer.check_contraction(spec, n_theta, rng)]
        batch = chains.stationary_batch(
            spec, count, tol=tol, master_seed=seed, threads=threads
        )
        reports.append(cramer.check_cancellation(spec, batch.samples, 256, rng))
        radii = models.radius(spec, np.asarray(batch.samples))
        x_hi = float(np.quantile(radii, 0.9)) + 1.0
        x_grid = np.linspace(0.0, x_hi, 5)
        t_grid = np.linspace(0.25, 1.0, 4)
        reports.append(cramer.check_smoothness(spec, x_grid, t_grid, 256, rng))
        m_law = models.linear_scale_law(spec)
        n_law = models.cancellation_law(spec)
        if m_law is not None and n_law is not None:
            s_grid = get_floats(cfg, "experiment", "s_grid", default=(0.25, 0.5, 1.0, 2.0))
            rows, bounded = cramer.nontriviality_probe(
                n_law, m_law, s_grid, rng=rng, n_samples=n_theta
            )
            reports.append(
                cramer.CheckReport(
                    name="moment_ratio_bounded",
                    value=rows[-1][2],
                    se=0.0,
                    passed=bool(bounded),
                    detail=f"root at s={rows[-1][0]:g}",
                )
            )
        if m_law is not None:
            risk = rnd.arithmetic_risk(m_law)
            reports.append(
                cramer.CheckReport(
                    name="nonarithmetic_scale",
                    value=float(rnd.atom_count(m_law) or -1),
                    se=0.0,
                    passed=not risk,
                    detail="atom count; -1 means continuous",
                )
            )
        st.add(
            "check.csv",
            write_csv(
                out_dir,
                "check.csv",
                ["name", "value", "se", "passed", "detail"],
                [(r.name, r.value, r.se, r.passed, r.detail) for r in reports],
            ),
        )
    return {"reports": reports, "passed": all(r.passed for r in reports)}


RUNNERS = {
    "cramer": run_cramer,
    "simulate": run_simulate,
    "tail": run_tail,
    "limit": run_limit,
    "support": run_support,
    "check": run_check,
}
