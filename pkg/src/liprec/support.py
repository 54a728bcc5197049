"""Stationary support geometry for atomic parameter laws.

The support of the stationary law is the closure of the fixed points of
contracting finite compositions. Enumerating words of atoms
breadth-first, solving each contracting word's fixed point with a Banach
certificate, and dissolving duplicates gives a point cloud that is exact
up to the certificate tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import models
from .errors import CapacityError, ConvergenceError, PreconditionError

WORD_GUARD = 10**6
PRUNE_PRODUCT = 1e6
FIXPOINT_TOL = 1e-10
DEDUPE_TOL = 1e-8
_MAX_BANACH_ITER = 10000


@dataclass(frozen=True)
class SupportCloud:
    points: np.ndarray
    depths: np.ndarray
    dedupe_tol: float
    fixpoint_tol: float


@dataclass(frozen=True)
class CoverageReport:
    fraction_covered: float
    max_distance: float
    epsilon: float
    count: int


def compose(spec, word, x):
    """Apply the composition word[0] o word[1] o ... o word[-1] to x."""
    for theta in reversed(word):
        x = models.apply(spec, theta, x)
    return x


def fixed_point(spec, word, x0=None, tol=FIXPOINT_TOL, max_iter=_MAX_BANACH_ITER):
    """Fixed point of a contracting composition, within tol (certified).

    Stops when the step shrinks below tol * (1 - L) / L, the a posteriori
    Banach bound for the composition's Lipschitz product L.
    """
    if not word:
        raise PreconditionError("empty composition word")
    lip = math.prod(float(models.lipschitz_bound(spec, th)) for th in word)
    if not lip < 1.0:
        raise PreconditionError(f"composition is not contracting (L = {lip:.6g})")
    x = models.zero_point(spec) if x0 is None else x0
    threshold = tol * (1.0 - lip) / lip if lip > 0 else math.inf
    for _ in range(max_iter):
        nxt = compose(spec, word, x)
        step = float(models.radius(spec, nxt - x))
        x = nxt
        if step <= threshold:
            return x
    raise ConvergenceError(
        f"fixed-point iteration did not certify within {max_iter} steps "
        f"(L = {lip:.6g})"
    )


def enumerate_fixed_points(
    spec,
    max_depth,
    fixpoint_tol=FIXPOINT_TOL,
    dedupe_tol=DEDUPE_TOL,
    word_guard=WORD_GUARD,
    prune_product=PRUNE_PRODUCT,
):
    """Breadth-first word enumeration -> deduplicated fixed-point cloud.

    Expansive prefixes are kept (their extensions may contract) until the
    Lipschitz product exceeds `prune_product`; fixed points are only
    solved for words with product < 1.
    """
    atoms = [th for th, _ in models.theta_atoms(spec)]
    if not atoms:
        raise PreconditionError("no atoms to enumerate")
    lips = [float(models.lipschitz_bound(spec, th)) for th in atoms]
    d = models.point_dim(spec)

    points, depths = [], []
    frontier = [((), 1.0)]
    examined = 0
    for depth in range(1, max_depth + 1):
        nxt = []
        for word_idx, prod in frontier:
            for i, theta in enumerate(atoms):
                examined += 1
                if examined > word_guard:
                    raise CapacityError(
                        f"word enumeration exceeded the {word_guard} guard at "
                        f"depth {depth}"
                    )
                new_prod = prod * lips[i]
                new_idx = word_idx + (i,)
                if new_prod < 1.0:
                    word = [atoms[j] for j in new_idx]
                    pt = fixed_point(spec, word, tol=fixpoint_tol)
                    points.append(np.atleast_1d(np.asarray(pt, dtype=float)))
                    depths.append(depth)
                if new_prod <= prune_product:
                    nxt.append((new_idx, new_prod))
        frontier = nxt
        if not frontier:
            break

    if not points:
        raise ConvergenceError(
            f"no contracting word found up to depth {max_depth}"
        )
    pts = np.vstack(points)
    deps = np.asarray(depths)
    keep_pts, keep_deps = [], []
    for p, dep in zip(pts, deps):
        if all(np.linalg.norm(p - q) > dedupe_tol for q in keep_pts):
            keep_pts.append(p)
            keep_deps.append(dep)
    cloud_pts = np.vstack(keep_pts)
    if d == 1:
        cloud_pts = cloud_pts[:, 0]
    return SupportCloud(
        points=cloud_pts,
        depths=np.asarray(keep_deps),
        dedupe_tol=float(dedupe_tol),
        fixpoint_tol=float(fixpoint_tol),
    )


def _as_2d(points):
    p = np.asarray(points, dtype=float)
    return p[:, None] if p.ndim == 1 else p


def coverage_check(cloud, samples, epsilon):
    """Fraction of samples within epsilon of the cloud, and the worst gap."""
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    tree = cKDTree(_as_2d(cloud.points))
    dist, _ = tree.query(_as_2d(samples), k=1)
    return CoverageReport(
        fraction_covered=float(np.mean(dist <= epsilon)),
        max_distance=float(dist.max()),
        epsilon=float(epsilon),
        count=int(len(dist)),
    )


def closure_frontier(spec, cloud):
    """Fraction of (atom, point) images that escape the cloud.

    The support is closed under every atom map, so a deep-enough cloud
    drives this fraction to zero; it is the convergence diagnostic for
    enumerate_fixed_points.
    """
    atoms = [th for th, _ in models.theta_atoms(spec)]
    pts = _as_2d(cloud.points)
    d = pts.shape[1]
    tree = cKDTree(pts)
    escaped = 0
    total = 0
    for theta in atoms:
        x = pts[:, 0] if d == 1 else pts
        img = _as_2d(models.apply(spec, theta, x))
        dist, _ = tree.query(img, k=1)
        escaped += int(np.sum(dist > cloud.dedupe_tol))
        total += len(dist)
    return escaped / total if total else 0.0
