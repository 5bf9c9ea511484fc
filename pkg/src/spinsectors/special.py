"""Scalar special functions shared across the package."""

import math

EULER_GAMMA = 0.5772156649015328606065

# B_{2n}/(2n) for n = 1..7, the tail of the de Moivre expansion of psi(x).
_PSI_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

_PSI_SHIFT = 10.0


def digamma(x):
    """Digamma function psi(x) = d/dx ln Gamma(x) for x > 0.

    Small arguments are shifted upward with psi(x+1) = psi(x) + 1/x until the
    asymptotic series applies; accurate to ~1e-14 absolute on x >= 1e-6.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _PSI_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    u = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_PSI_TAIL):
        tail = (tail + c) * u
    return acc + math.log(x) - 0.5 / x - tail


def log_binomial(n, k):
    """ln C(n, k) for integers 0 <= k <= n, via lgamma."""
    if k < 0 or k > n:
        raise ValueError(f"binomial index out of range: C({n}, {k})")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def entropy_nats(weights, floor=1e-14):
    """Shannon entropy -sum w ln w in nats, dropping weights below `floor`."""
    s = 0.0
    for w in weights:
        if w > floor:
            s -= w * math.log(w)
    return max(s, 0.0)
