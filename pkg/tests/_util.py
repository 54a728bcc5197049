"""Shared numeric helpers for the test suite."""

import math

KS_C99 = 1.6276236115189503  # sqrt(-ln(0.005)/2)


def ks_critical_one(n, c=KS_C99):
    return c / math.sqrt(n)


def ks_critical_two(n, m, c=KS_C99):
    return c * math.sqrt((n + m) / (n * m))
