"""Standing-assumption probes, and what tripping one looks like.

Every tail statement downstream leans on a short list of checkable
hypotheses: contraction on average, a bounded cancellation term,
dilation smoothness, a nontrivial moment ratio, and a nonarithmetic
scale law. The battery runs them on the extremal benchmark, then on
two models built to fail specific probes.
"""

import numpy as np

from liprec import chains, cramer, models
from liprec import randomness as rnd
from liprec.randomness import stream


def battery(name, spec, seed=21):
    rng = stream(seed, 0, "check")
    batch = chains.stationary_batch(spec, 4096, tol=1e-9, master_seed=seed, threads=2)
    reports = [
        cramer.check_contraction(spec, 100_000, rng),
        cramer.check_cancellation(spec, batch.samples, 256, rng),
        cramer.check_smoothness(
            spec, np.linspace(0.0, 5.0, 5), np.linspace(0.25, 1.0, 4), 256, rng
        ),
    ]
    m_law = models.linear_scale_law(spec)
    print(f"\n{name}:")
    for r in reports:
        print(f"  {'PASS' if r.passed else 'FAIL'} {r.name:16s} value={r.value:9.4g}  {r.detail}")
    if m_law is not None:
        risk = rnd.arithmetic_risk(m_law)
        atoms = rnd.atom_count(m_law)
        print(
            f"  {'FAIL' if risk else 'PASS'} nonarithmetic     "
            f"atoms={atoms if atoms else 'continuous'}"
        )
        if risk:
            print("       two-atom scale laws can sit on a geometric grid; the")
            print("       CLI refuses tail runs unless [assertions] nonarithmetic")
            print("       = true acknowledges the risk.")


bench = models.make_model(
    "extremal", laws={"a": rnd.lognormal(-0.75, 1.0), "b": rnd.constant(1.0)}
)
battery("extremal benchmark", bench)

grid = models.make_model(
    "affine",
    laws={
        "scale": rnd.discrete((1.0 / 3.0, 2.0), (0.75, 0.25)),
        "shift": rnd.constant(1.0),
    },
)
battery("two-atom scale law (arithmetic risk)", grid)

expanding = models.make_model(
    "affine",
    laws={"scale": rnd.lognormal(0.4, 0.1), "shift": rnd.constant(1.0)},
)
rng = stream(23, 0, "check")
r = cramer.check_contraction(expanding, 100_000, rng)
print("\nexpanding chain (E log|M| > 0):")
print(f"  {'PASS' if r.passed else 'FAIL'} {r.name} value={r.value:.4f}  {r.detail}")
print("  no stationary law exists; backward iteration would never certify.")
