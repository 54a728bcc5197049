import numpy as np
import pytest

from liprec import models, randomness as rnd, support
from liprec.chains import stationary_batch
from liprec.errors import CapacityError, PreconditionError


def test_letac_support_is_two_points(letac_spec):
    # a max(x, 1/2) + c with a in {1/3, 2}, c = -1: every contracting
    # word lands on one of the two fixed points -5/6 and 0
    cloud = support.enumerate_fixed_points(letac_spec, max_depth=6)
    got = np.sort(cloud.points)
    assert got.shape == (2,)
    assert got[0] == pytest.approx(-5.0 / 6.0, abs=1e-9)
    assert got[1] == pytest.approx(0.0, abs=1e-9)


def test_enumeration_idempotent_in_depth(letac_spec):
    a = support.enumerate_fixed_points(letac_spec, max_depth=4)
    b = support.enumerate_fixed_points(letac_spec, max_depth=7)
    assert len(a.points) == len(b.points)
    assert np.allclose(np.sort(a.points), np.sort(b.points), atol=1e-9)


def _two_atom_affine():
    # x/2 and x/2 + 1/2: support is the full interval [0, 1], so finite
    # clouds always leave some images uncovered
    return models.make_model(
        "affine",
        laws={
            "scale": rnd.constant(0.5),
            "shift": rnd.discrete(atoms=(0.0, 0.5), weights=(0.5, 0.5)),
        },
    )


def test_frontier_escape_decays_on_finite_support(letac_spec):
    # depth 1 finds only -5/6 (the a = 2 atom expands); mapping it by
    # that atom lands on 0, which escapes until depth picks it up
    shallow = support.enumerate_fixed_points(letac_spec, max_depth=1)
    deep = support.enumerate_fixed_points(letac_spec, max_depth=6)
    esc_shallow = support.closure_frontier(letac_spec, shallow)
    esc_deep = support.closure_frontier(letac_spec, deep)
    assert esc_shallow == pytest.approx(0.5)
    assert esc_deep == 0.0


def test_frontier_escape_flags_interval_support():
    # support [0, 1] is a continuum: any finite cloud leaves most atom
    # images farther than the dedupe tolerance from the cloud
    spec = _two_atom_affine()
    cloud = support.enumerate_fixed_points(spec, max_depth=8)
    assert support.closure_frontier(spec, cloud) > 0.3


def test_interval_support_endpoints():
    spec = _two_atom_affine()
    cloud = support.enumerate_fixed_points(spec, max_depth=5)
    assert np.all(cloud.points >= -1e-9)
    assert np.all(cloud.points <= 1.0 + 1e-9)
    # endpoints are the fixed points of the two pure words
    assert np.min(np.abs(cloud.points - 0.0)) < 1e-9
    assert np.min(np.abs(cloud.points - 1.0)) < 1e-9


def test_letac_batch_lands_on_cloud(letac_spec, letac_batch_10k):
    cloud = support.enumerate_fixed_points(letac_spec, max_depth=6)
    rep = support.coverage_check(cloud, letac_batch_10k.samples, epsilon=1e-6)
    assert rep.fraction_covered == 1.0
    assert rep.max_distance <= 1e-6
    assert rep.count == len(letac_batch_10k.samples)


def test_extremal_atomic_support():
    # max(x/4, b) with b in {1, 2}: fixed points are x = b, and both
    # atoms map {1, 2} into itself, so the support is exactly {1, 2}
    spec = models.make_model(
        "extremal",
        laws={
            "a": rnd.constant(0.25),
            "b": rnd.discrete(atoms=(1.0, 2.0), weights=(0.5, 0.5)),
        },
    )
    cloud = support.enumerate_fixed_points(spec, max_depth=6)
    assert np.allclose(np.sort(cloud.points), [1.0, 2.0], atol=1e-9)
    batch = stationary_batch(spec, 4096, master_seed=6)
    rep = support.coverage_check(cloud, batch.samples, epsilon=1e-6)
    assert rep.fraction_covered == 1.0


def test_word_guard_capacity():
    spec = _two_atom_affine()
    with pytest.raises(CapacityError):
        support.enumerate_fixed_points(spec, max_depth=30, word_guard=100)


def test_nonatomic_law_rejected(bench_spec):
    with pytest.raises(PreconditionError):
        support.enumerate_fixed_points(bench_spec, max_depth=4)


def test_fixed_point_certificate(letac_spec):
    atoms = [th for th, _ in models.theta_atoms(letac_spec)]
    contracting = [th for th in atoms if models.lipschitz_bound(letac_spec, th) < 1]
    word = [contracting[0]]
    x = support.fixed_point(letac_spec, word, tol=1e-12)
    fx = support.compose(letac_spec, word, x)
    assert abs(fx - x) <= 1e-11


def test_fixed_point_rejects_expansion(letac_spec):
    atoms = [th for th, _ in models.theta_atoms(letac_spec)]
    expanding = [th for th in atoms if models.lipschitz_bound(letac_spec, th) > 1]
    with pytest.raises(PreconditionError):
        support.fixed_point(letac_spec, [expanding[0]])
    with pytest.raises(PreconditionError):
        support.fixed_point(letac_spec, [])


def test_coverage_check_guards(letac_spec):
    cloud = support.enumerate_fixed_points(letac_spec, max_depth=4)
    with pytest.raises(PreconditionError):
        support.coverage_check(cloud, np.zeros(4), epsilon=0.0)


def test_two_dimensional_cloud():
    spec = models.make_model(
        "affine",
        dimension=2,
        laws={
            "scale": rnd.constant(0.5),
            "angle": rnd.discrete(atoms=(0.0, 1.5707963267948966), weights=(0.5, 0.5)),
            "shift_1": rnd.constant(1.0),
            "shift_2": rnd.constant(0.0),
        },
    )
    cloud = support.enumerate_fixed_points(spec, max_depth=5)
    assert cloud.points.shape[1] == 2
    batch = stationary_batch(spec, 2048, master_seed=8)
    rep = support.coverage_check(cloud, batch.samples, epsilon=0.2)
    assert rep.fraction_covered > 0.5  # depth-5 cloud, coarse epsilon
