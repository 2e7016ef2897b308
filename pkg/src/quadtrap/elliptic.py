"""Complete elliptic integrals by the arithmetic-geometric mean."""

from __future__ import annotations

import math

from .errors import DomainError

MAX_ITER = 64
TOL = 1e-15


def _agm(m: float):
    """AGM of (1, sqrt(1-m)).

    Returns ``(K, T)`` where ``T = sum_{n>=1} 2**(n-1) * c_n**2 / m**2``.
    The ``c_n`` are produced by the recurrence c_{n+1} = c_n**2 / (4 a_{n+1}),
    starting from c_1 = m / (2 (1 + b_0)), so ``T`` carries no cancellation as
    m -> 0 (T -> 1/16).
    """
    a = 1.0
    b = math.sqrt(1.0 - m)
    c_over_m = 1.0 / (2.0 * (1.0 + b))  # c_1 / m
    a, b = (a + b) / 2, math.sqrt(a * b)
    total = c_over_m * c_over_m
    weight = 1.0
    c = c_over_m * m
    for _ in range(MAX_ITER):
        if abs(a - b) <= TOL * a:
            break
        # c_{n+1} / m = (c_n / m) * c_n / (4 a_{n+1}),  a_{n+1} = (a_n + b_n) / 2
        a_next = (a + b) / 2
        c_over_m = c_over_m * c / (4.0 * a_next)
        c = c_over_m * m
        weight *= 2.0
        total += weight * c_over_m * c_over_m
        a, b = a_next, math.sqrt(a * b)
    else:  # pragma: no cover - quadratic convergence never needs 64 steps
        raise DomainError("AGM failed to converge")
    K = math.pi / (2.0 * a)
    return K, total


def _check(m: float):
    if not math.isfinite(m) or m < 0.0:
        raise DomainError(f"parameter m must satisfy 0 <= m < 1, got {m!r}")
    if m >= 1.0:
        raise DomainError(f"K(m) diverges at m >= 1 (m={m!r})")


def elliptic_ke(m: float) -> tuple[float, float]:
    """Complete elliptic integrals K(m) and E(m) with parameter m = k**2."""
    _check(m)
    K, T = _agm(m)
    E = K * (1.0 - m / 2.0 - m * m * T)
    return K, E


def elliptic_kt(m: float) -> tuple[float, float]:
    """K(m) together with the AGM tail sum used by the loop-field formula.

    With ``T`` as returned, E = K (1 - m/2 - m**2 T) and
    (E - (1-m) K) / m - E / 2 = m K (1/4 - T (1 - m/2)).
    """
    _check(m)
    return _agm(m)
