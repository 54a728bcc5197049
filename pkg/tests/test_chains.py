import numpy as np
import pytest
from scipy import stats

from liprec import chains, models, randomness as rnd
from liprec.errors import ConvergenceError, PreconditionError
from liprec.randomness import stream

from _util import ks_critical_two


def test_forward_chain_shapes_and_prefix_sums(bench_spec):
    g = stream(11, 0, "traj")
    traj = chains.forward_chain(bench_spec, 0.7, 64, g)
    assert traj.states.shape == (65,)
    assert traj.partial_sums.shape == (65,)
    assert traj.partial_sums[0] == 0.0
    # partial_sums[k] must equal the running sum of states[1..k]
    assert np.allclose(traj.partial_sums, np.concatenate([[0.0], np.cumsum(traj.states[1:])]))


def test_forward_endpoints_match_chain_tails(bench_spec):
    n = 40
    ends = chains.forward_endpoints(bench_spec, 0.0, n, 6, master_seed=9, threads=1)
    assert ends.shape == (6,)
    assert np.all(np.isfinite(ends))


def test_backward_matches_forward_in_law(bench_spec):
    # independent streams on both sides: the same-seed pairing would
    # couple the samples and break the two-sample KS assumptions
    n = 60
    count = 10_000
    fwd = chains.forward_endpoints(bench_spec, 0.0, n, count, master_seed=101, threads=4)
    batch = chains.stationary_batch(bench_spec, count, tol=1e-9, master_seed=202, threads=4)
    stat = stats.ks_2samp(fwd, batch.samples).statistic
    assert stat < ks_critical_two(count, count)


def test_backward_residuals_certify_tolerance(bench_batch_100k):
    assert np.all(bench_batch_100k.residual_bounds <= bench_batch_100k.tol)
    assert np.all(bench_batch_100k.stop_depths >= 1)


def test_backward_insensitive_to_seed_point(bench_spec):
    # same streams, different x0: coupled draws, so endpoints differ by
    # at most the contracted distance, which the certificate bounds
    a = chains.stationary_batch(bench_spec, 4096, tol=1e-9, master_seed=31, x0=0.0)
    b = chains.stationary_batch(bench_spec, 4096, tol=1e-9, master_seed=31, x0=10.0)
    assert np.max(np.abs(a.samples - b.samples)) <= 2e-9 * 10.0 + 1e-15


def test_thread_count_cannot_change_bytes(bench_spec):
    count = 40_000  # spans three blocks
    one = chains.stationary_batch(bench_spec, count, master_seed=7, threads=1)
    four = chains.stationary_batch(bench_spec, count, master_seed=7, threads=4)
    assert one.samples.tobytes() == four.samples.tobytes()
    assert np.array_equal(one.stop_depths, four.stop_depths)
    s1 = chains.birkhoff_sums(bench_spec, 0.0, 32, count, master_seed=7, threads=1)
    s4 = chains.birkhoff_sums(bench_spec, 0.0, 32, count, master_seed=7, threads=4)
    assert s1.tobytes() == s4.tobytes()


def test_block_boundary_is_seed_stable(bench_spec):
    # per-block streams: growing the batch by whole blocks must not
    # disturb earlier samples (within a partial block draws are shared)
    small = chains.stationary_batch(bench_spec, chains.BLOCK_SIZE, master_seed=13)
    big = chains.stationary_batch(bench_spec, 2 * chains.BLOCK_SIZE, master_seed=13)
    assert np.array_equal(big.samples[: chains.BLOCK_SIZE], small.samples)


def test_backward_depth_guard(bench_spec):
    with pytest.raises(ConvergenceError):
        chains.stationary_batch(bench_spec, 64, tol=1e-300, max_depth=5)


def test_stationary_batch_rejects_empty(bench_spec):
    with pytest.raises(PreconditionError):
        chains.stationary_batch(bench_spec, 0)


def test_backward_sample_needs_stream(bench_spec):
    with pytest.raises(PreconditionError):
        chains.backward_sample(bench_spec, 0.0)
    x, depth, cert = chains.backward_sample(bench_spec, 0.0, rng=stream(3, 0, "one"))
    assert np.isfinite(x) and depth >= 1 and cert <= 1e-9


def test_affine_d2_batch_shape():
    spec = models.make_model(
        "affine",
        dimension=2,
        laws={
            "scale": rnd.lognormal(-0.7, 0.4),
            "angle": rnd.uniform(-1.0, 1.0),
            "shift_1": rnd.constant(1.0),
            "shift_2": rnd.constant(0.0),
        },
    )
    batch = chains.stationary_batch(spec, 2048, master_seed=17, threads=2)
    assert batch.samples.shape == (2048, 2)
    assert np.all(np.isfinite(batch.samples))


def test_affine_closed_center_matches_batch():
    # E S = E N / (1 - E M) for the contracting affine recursion
    spec = models.make_model(
        "affine",
        laws={"scale": rnd.uniform(0.1, 0.5), "shift": rnd.constant(1.0)},
    )
    batch = chains.stationary_batch(spec, 200_000, master_seed=23, threads=4)
    want = 1.0 / (1.0 - 0.3)
    se = batch.samples.std(ddof=1) / np.sqrt(batch.samples.size)
    assert abs(batch.samples.mean() - want) < 4 * se


def test_moment_bound_finite_below_alpha(bench_spec, bench_batch_100k):
    # E|S|^beta finite for beta < alpha = 1.5; crude stability probe at 0.75
    x = np.abs(bench_batch_100k.samples)
    halves = np.array_split(x**0.75, 10)
    means = np.array([h.mean() for h in halves])
    assert means.std(ddof=1) / means.mean() < 0.05


def test_birkhoff_sums_match_trajectory(bench_spec):
    # a one-replica block consumes draws exactly like the scalar chain
    n = 25
    sums = chains.birkhoff_sums(bench_spec, 0.3, n, 1, master_seed=47, threads=1)
    g = stream(47, 0, "birkhoff")
    traj = chains.forward_chain(bench_spec, 0.3, n, g)
    assert sums[0] == traj.partial_sums[n]


def test_paired_theta_independent_of_batch(bench_spec):
    th = chains.paired_theta(bench_spec, 4096, master_seed=7)
    batch = chains.stationary_batch(bench_spec, 4096, master_seed=7)
    r = np.corrcoef(th.values["a"], batch.samples)[0, 1]
    assert abs(r) < 0.05
