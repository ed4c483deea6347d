"""Angular-momentum algebra and the special functions the rest of the package uses.

Only integer angular momenta are supported.  The 3j symbol is evaluated with
Racah's single-sum formula in exact rational arithmetic, so small-j values are
exact up to the final square root.
"""

import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "AngularIndex",
    "wigner3j",
    "clebsch_gordan",
    "reduced_c",
    "spherical_bessel",
    "legendre",
    "triangle",
]


class AngularIndex:
    """A partial-wave label ``(l, m)`` with ``|m| <= l``."""

    __slots__ = ("l", "m")

    def __init__(self, l, m):
        if l < 0 or abs(m) > l:
            raise ValueError(f"invalid angular index (l={l}, m={m})")
        self.l = int(l)
        self.m = int(m)

    def __iter__(self):
        return iter((self.l, self.m))

    def __eq__(self, other):
        return isinstance(other, AngularIndex) and (self.l, self.m) == (other.l, other.m)

    def __hash__(self):
        return hash((self.l, self.m))

    def __repr__(self):
        return f"AngularIndex(l={self.l}, m={self.m})"


def triangle(a, b, c):
    return abs(a - b) <= c <= a + b


@lru_cache(maxsize=65536)
def _wigner3j_exact(j1, j2, j3, m1, m2, m3):
    # returns (sign, value**2) as an exact Fraction
    f = math.factorial
    delta = Fraction(f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3),
                     f(j1 + j2 + j3 + 1))
    pref = delta * (f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2)
                    * f(j3 + m3) * f(j3 - m3))
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (f(k) * f(j3 - j2 + k + m1) * f(j3 - j1 + k - m2)
               * f(j1 + j2 - j3 - k) * f(j1 - k - m1) * f(j2 - k + m2))
        s += Fraction((-1) ** k, den)
    if s == 0:
        return 0, Fraction(0)
    sign = (1 if s > 0 else -1) * (-1) ** (j1 - j2 - m3)
    return sign, s * s * pref


def wigner3j(j1, j2, j3, m1, m2, m3):
    """Wigner 3j symbol for integer arguments; 0 on any selection-rule failure."""
    if m1 + m2 + m3 != 0:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if min(j1, j2, j3) < 0 or not triangle(j1, j2, j3):
        return 0.0
    if m1 == m2 == m3 == 0 and (j1 + j2 + j3) % 2:
        return 0.0
    sign, sq = _wigner3j_exact(j1, j2, j3, m1, m2, m3)
    if sign == 0:
        return 0.0
    return sign * math.sqrt(sq)


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """<j1 m1 j2 m2 | J M> in the Condon-Shortley convention."""
    if m1 + m2 != M or abs(M) > J:
        return 0.0
    w = wigner3j(j1, j2, J, m1, m2, -M)
    if w == 0.0:
        return 0.0
    return (-1) ** (j1 - j2 + M) * math.sqrt(2 * J + 1) * w


def reduced_c(l, L, l_p):
    """Reduced matrix element <l||C^(L)||l'> of the normalized spherical harmonic."""
    if (l + L + l_p) % 2 or not triangle(l, L, l_p):
        return 0.0
    return (-1) ** l * math.sqrt((2 * l + 1) * (2 * l_p + 1)) * wigner3j(l, L, l_p, 0, 0, 0)


def _double_factorial_odd(n):
    # (2n+1)!!
    out = 1
    for k in range(3, 2 * n + 2, 2):
        out *= k
    return out


def _j_series(l, x):
    x2 = -0.5 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= x2 / (k * (2 * l + 2 * k + 1))
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total * x ** l / _double_factorial_odd(l)


def _j_downward(l, x):
    # Miller's algorithm, normalized against j_0
    start = l + 30 + int(math.sqrt(40 * (l + 1)))
    f_next, f = 0.0, 1e-300
    target = 0.0
    for n in range(start, 0, -1):
        f_prev = (2 * n + 1) / x * f - f_next
        f_next, f = f, f_prev
        if n - 1 == l:
            target = f
        if abs(f) > 1e250:
            f *= 1e-250
            f_next *= 1e-250
            target *= 1e-250
    # f now holds the unnormalized j_0
    return target * (math.sin(x) / x) / f


def _j_upward(l, x):
    s, c = math.sin(x), math.cos(x)
    j0 = s / x
    if l == 0:
        return j0
    j1 = s / (x * x) - c / x
    for n in range(1, l):
        j0, j1 = j1, (2 * n + 1) / x * j1 - j0
    return j1


def _n_upward(l, x):
    s, c = math.sin(x), math.cos(x)
    n0 = -c / x
    if l == 0:
        return n0
    n1 = -c / (x * x) - s / x
    for n in range(1, l):
        n0, n1 = n1, (2 * n + 1) / x * n1 - n0
    return n1


def spherical_bessel(kind, l, x):
    """Spherical Bessel ``j_l(x)`` (kind ``"j"``) or Neumann ``n_l(x)`` (kind ``"n"``).

    ``j_l`` uses a power series for ``x <= 1``, downward (Miller) recursion for
    ``1 < x < l`` and upward recursion otherwise.  ``n_l`` always recurses upward.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    x = float(x)
    if kind == "j":
        if x < 0:
            raise ValueError("spherical_bessel: x must be >= 0 for j_l")
        if x == 0.0:
            return 1.0 if l == 0 else 0.0
        if x <= 1.0 and l > 0:
            return _j_series(l, x)
        if x < l:
            return _j_downward(l, x)
        return _j_upward(l, x)
    if kind == "n":
        if x <= 0:
            raise ValueError("spherical_bessel: n_l is singular at x <= 0")
        return _n_upward(l, x)
    raise ValueError(f"unknown kind {kind!r}; expected 'j' or 'n'")


def legendre(L, u):
    """Legendre polynomial P_L(u) by the three-term recurrence."""
    if L < 0:
        raise ValueError("L must be non-negative")
    p0, p1 = 1.0, float(u)
    if L == 0:
        return p0
    for n in range(1, L):
        p0, p1 = p1, ((2 * n + 1) * u * p1 - n * p0) / (n + 1)
    return p1
