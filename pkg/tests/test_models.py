import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liprec import models, randomness as rnd
from liprec.errors import ConfigError, DomainError
from liprec.randomness import stream


def _catalog():
    """One representative spec per family, continuous laws where natural."""
    return {
        "affine": models.make_model(
            "affine",
            laws={"scale": rnd.lognormal(-0.6, 0.7), "shift": rnd.normal(0.3, 1.0)},
        ),
        "extremal": models.make_model(
            "extremal",
            laws={"a": rnd.lognormal(-0.75, 1.0), "b": rnd.uniform(0.5, 1.5)},
        ),
        "letac": models.make_model(
            "letac",
            laws={
                "a": rnd.lognormal(-0.8, 0.5),
                "b": rnd.uniform(0.0, 0.5),
                "c": rnd.normal(0.0, 0.5),
            },
        ),
        "sqrt_quadratic": models.make_model(
            "sqrt_quadratic",
            laws={
                "a": rnd.uniform(0.2, 0.7),
                "b": rnd.uniform(-0.2, 0.2),
                "c": rnd.uniform(0.5, 1.0),
            },
        ),
        "arch1": models.make_model(
            "arch1",
            laws={"a": rnd.normal(0.0, 0.6)},
            constants={"gamma": 0.3, "beta": 0.8, "lambda": 0.25},
        ),
    }


CATALOG = _catalog()
N_DRAWS = 10_000


@pytest.mark.parametrize("family", sorted(CATALOG))
def test_lipschitz_bound_sampled(family):
    spec = CATALOG[family]
    g = stream(41, 0, f"lip-{family}")
    th = models.sample_theta(spec, g, N_DRAWS)
    x = g.normal(scale=3.0, size=N_DRAWS)
    y = g.normal(scale=3.0, size=N_DRAWS)
    lhs = np.abs(models.apply(spec, th, x) - models.apply(spec, th, y))
    rhs = models.lipschitz_bound(spec, th) * np.abs(x - y)
    assert np.all(lhs <= rhs + 1e-10)


@pytest.mark.parametrize("family", sorted(CATALOG))
def test_dilation_approaches_limit_map(family):
    spec = CATALOG[family]
    g = stream(43, 0, f"dil-{family}")
    th = models.sample_theta(spec, g, N_DRAWS)
    x = g.normal(scale=2.0, size=N_DRAWS)
    t = g.uniform(1e-6, 1.0, size=N_DRAWS)
    lhs = np.abs(models.apply_dilated(spec, th, x, t) - models.limit_map(spec, th, x))
    rhs = t * models.smoothness_bound(spec, th)
    assert np.all(lhs <= rhs + 1e-10)


@pytest.mark.parametrize("family", sorted(CATALOG))
def test_dilated_at_one_is_apply_bitwise(family):
    spec = CATALOG[family]
    g = stream(47, 0, f"one-{family}")
    th = models.sample_theta(spec, g, N_DRAWS)
    x = g.normal(scale=4.0, size=N_DRAWS)
    assert np.array_equal(models.apply_dilated(spec, th, x, 1.0), models.apply(spec, th, x))


@pytest.mark.parametrize("family", sorted(CATALOG))
def test_cancellation_bound_on_positive_axis(family):
    # (H2) on the nonnegative axis, where every catalog family's
    # stationary support lives for these parameter choices
    spec = CATALOG[family]
    g = stream(53, 0, f"canc-{family}")
    th = models.sample_theta(spec, g, N_DRAWS)
    x = g.uniform(0.0, 5.0, size=N_DRAWS)
    lhs = np.abs(models.apply(spec, th, x) - models.linear_apply(spec, th, x))
    assert np.all(lhs <= models.cancellation_bound(spec, th) + 1e-10)


def test_cancellation_fails_off_support_for_extremal():
    # max(ax, b) is affine-like only on x >= 0: at negative x the defect
    # exceeds 2|b| as soon as a is large enough
    spec = CATALOG["extremal"]
    g = stream(59, 0, "canc-neg")
    th = models.sample_theta(spec, g, 2000)
    x = np.full(2000, -5.0)
    lhs = np.abs(models.apply(spec, th, x) - models.linear_apply(spec, th, x))
    assert np.any(lhs > models.cancellation_bound(spec, th) + 1e-10)


@pytest.mark.parametrize("family", sorted(CATALOG))
def test_limit_map_positive_homogeneity(family):
    spec = CATALOG[family]
    g = stream(61, 0, f"hom-{family}")
    th = models.sample_theta(spec, g, N_DRAWS)
    x = g.normal(scale=2.0, size=N_DRAWS)
    for s in (0.25, 1.0, 7.5):
        a = models.limit_map(spec, th, s * x)
        b = s * models.limit_map(spec, th, x)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(-50, 50))
def test_extremal_homogeneity_pointwise(s, x):
    spec = CATALOG["extremal"]
    th = models.ThetaDraw("extremal", {"a": 0.7, "b": 1.3})
    lhs = models.limit_map(spec, th, s * x)
    rhs = s * models.limit_map(spec, th, x)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_rotation_preserves_length_d2():
    spec = models.make_model(
        "affine",
        dimension=2,
        laws={
            "scale": rnd.constant(1.0),
            "angle": rnd.uniform(-math.pi, math.pi),
            "shift_1": rnd.constant(0.0),
            "shift_2": rnd.constant(0.0),
        },
    )
    g = stream(67, 0, "rot2")
    th = models.sample_theta(spec, g, 500)
    x = g.normal(size=(500, 2))
    y = models.apply(spec, th, x)
    assert np.allclose(np.linalg.norm(y, axis=1), np.linalg.norm(x, axis=1), rtol=1e-12)


def test_rotation_preserves_length_and_axis_d3():
    axis = (0.0, 0.0, 1.0)
    spec = models.make_model(
        "affine",
        dimension=3,
        laws={
            "scale": rnd.constant(1.0),
            "angle": rnd.uniform(-math.pi, math.pi),
            "shift_1": rnd.constant(0.0),
            "shift_2": rnd.constant(0.0),
            "shift_3": rnd.constant(0.0),
        },
        constants={"axis": axis},
    )
    g = stream(71, 0, "rot3")
    th = models.sample_theta(spec, g, 500)
    x = g.normal(size=(500, 3))
    y = models.apply(spec, th, x)
    assert np.allclose(np.linalg.norm(y, axis=1), np.linalg.norm(x, axis=1), rtol=1e-12)
    # the rotation axis component is untouched
    assert np.allclose(y[:, 2], x[:, 2], rtol=1e-12)


def test_sqrt_quadratic_discriminant_guard():
    spec = CATALOG["sqrt_quadratic"]
    bad = models.ThetaDraw("sqrt_quadratic", {"a": 1.0, "b": 4.0, "c": 1.0})
    with pytest.raises(DomainError):
        models.apply(spec, bad, np.array([0.5]))


def test_sqrt_quadratic_rejection_exhaustion():
    spec = models.make_model(
        "sqrt_quadratic",
        laws={
            "a": rnd.constant(1.0),
            "b": rnd.constant(4.0),  # b^2 >= 4ac always: rejection can never succeed
            "c": rnd.constant(1.0),
        },
    )
    with pytest.raises(ConfigError):
        models.sample_theta(spec, stream(73, 0, "rej"), 8)


def test_arch1_requires_symmetric_innovation():
    with pytest.raises(ConfigError):
        models.make_model(
            "arch1",
            laws={"a": rnd.lognormal(0.0, 1.0)},  # positive law, not symmetric
            constants={"gamma": 0.3, "beta": 0.8, "lambda": 0.25},
        )


def test_make_model_validates_parameters():
    with pytest.raises(ConfigError):
        models.make_model("extremal", laws={"a": rnd.constant(0.5)})  # b missing
    with pytest.raises(ConfigError):
        models.make_model(
            "extremal",
            laws={"a": rnd.constant(0.5), "b": rnd.constant(1.0), "z": rnd.constant(0.0)},
        )
    with pytest.raises(ConfigError):
        models.make_model("nosuch", laws={})
    with pytest.raises(ConfigError):
        models.make_model(
            "extremal",
            dimension=2,
            laws={"a": rnd.constant(0.5), "b": rnd.constant(1.0)},
        )


def test_theta_bounds_match_family_formulas():
    spec = CATALOG["arch1"]
    th = models.ThetaDraw("arch1", {"a": -1.5})
    assert models.lipschitz_bound(spec, th) == pytest.approx(0.3 + math.sqrt(0.25) * 1.5)
    assert models.cancellation_bound(spec, th) == pytest.approx(math.sqrt(0.8) * 1.5)
    e_th = models.ThetaDraw("extremal", {"a": 0.4, "b": -2.0})
    e_spec = CATALOG["extremal"]
    assert models.lipschitz_bound(e_spec, e_th) == 0.4
    assert models.cancellation_bound(e_spec, e_th) == pytest.approx(4.0)
    assert models.smoothness_bound(e_spec, e_th) == pytest.approx(2.0)
