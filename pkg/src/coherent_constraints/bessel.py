"""Modified Bessel function I0 of complex argument by its power series."""
from __future__ import annotations

GUARD_RADIUS = 50.0


def bessel_i0(z: complex, *, guard: float = GUARD_RADIUS) -> complex:
    r"""Modified Bessel function of the first kind, order zero.

    .. math:: I_0(z) = \sum_{k \ge 0} \frac{(z^2/4)^k}{(k!)^2}

    Summation stops once a term falls below ``1e-17`` of the partial sum.
    The function is even, so either square-root branch of an argument gives
    the same value.

    Raises
    ------
    ValueError
        If ``|z|`` exceeds ``guard``; cancellation for large imaginary
        arguments makes the series untrustworthy there.
    """
    z = complex(z)
    if abs(z) > guard:
        raise ValueError(f"|z| = {abs(z):.3g} exceeds the series guard radius {guard}")
    quarter = z * z / 4.0
    term = 1.0 + 0j
    total = term
    k = 0
    while True:
        k += 1
        term *= quarter / (k * k)
        total += term
        if abs(term) < 1e-17 * abs(total) or term == 0:
            return total
