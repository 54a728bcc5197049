"""Birkhoff sums of a heavy-tailed chain and their stable limit.

For the affine chain X = A X' + 1 with A ~ lognormal(-0.75, 1) the
partial sums, recentered and scaled by n^(1/alpha) with alpha = 1.5,
approach an alpha-stable law. The index is read off the empirical
characteristic function: log(-log|E e^{itZ}|) is linear in log t with
slope alpha. The limit's own constant C(v) has a closed form in the
pure power-law case, which the last section reproduces.
"""

import math

import numpy as np

from liprec import chains, models, stable
from liprec import randomness as rnd
from liprec.randomness import stream

ALPHA = 1.5
spec = models.make_model(
    "affine", laws={"scale": rnd.lognormal(-0.75, 1.0), "shift": rnd.constant(1.0)}
)
center = 1.0 / (1.0 - math.exp(-0.25))  # E S = E N / (1 - E M), closed for affine
params = stable.limit_params(ALPHA, center=center)
print(f"regime {params.regime}: scale n^(-1/{ALPHA}), center {center:.4f} per step")

n, reps = 4000, 8000
sums = chains.birkhoff_sums(spec, 0.0, n, reps, master_seed=31, threads=4)
norm = stable.normalize_birkhoff(sums, n, params)
fit = stable.stable_index_fit(norm)
print(f"{reps} replicas of length {n}: index fit alpha_hat = {fit.alpha_hat:.3f}")

print("\ncharacteristic function on the fitted window:")
for t, _, re, im, se in stable.empirical_cf(norm, fit.t_values[::2]):
    mod = math.hypot(re, im)
    print(f"  t={t:7.4f}  |CF|={mod:.4f}  (se {se:.4f})")

ref = stable.sample_stable_symmetric(ALPHA, reps, stream(32, 0, "demo"))
rfit = stable.stable_index_fit(ref, t_window=(fit.t_values[0], fit.t_values[-1]))
print(f"reference symmetric stable sampler on the same window: {rfit.alpha_hat:.3f}")

# pure power law P(S > t) = 2 t^(-1/2): C(v) = Gamma(-1/2) e^(-i pi/4) at v = 1
u = stream(1012, 0, "pareto").random(400_000)
x = 4.0 * u**-2.0
est = stable.c_alpha(
    1.0, 0.5, x, tail_constant=2.0, kernel=stable.FlatKernel(dim=1),
    g_schedule=(0.25, 0.125), outer_reps=256, master_seed=1012,
)
want = complex(-2.5066282746310005, 2.5066282746310005)
print(f"\nclosed-form check at alpha = 1/2:")
print(f"  estimated C(1) = {est.value:.4f} +/- {est.se:.4f}")
print(f"  Gamma(-1/2) e^(-i pi/4) = {want:.4f}")

print("\nat alpha = 2 the scaling gains a sqrt(log n) and convergence to the")
print("normal limit is logarithmic; expect visibly heavy shape statistics at")
print("any chain length a desktop can reach (see README for the margin).")
