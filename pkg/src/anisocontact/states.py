"""Relative-motion harmonic-oscillator eigenstates (Hermite-Gaussians).

The relative coordinate carries the reduced mass mu = M/2, so the Gaussian
width along axis i is sqrt(hbar / (mu omega_i)) = sqrt(2 / omega_i).
"""

import math
from functools import lru_cache

from .errors import CapExceeded

__all__ = ["HermiteGaussian3D", "evaluate", "deriv_at_origin", "DERIVATIVE_CAP"]

DERIVATIVE_CAP = 12


@lru_cache(maxsize=None)
def _hermite_coeffs(n):
    # physicists' H_n, integer coefficients in ascending powers
    h0, h1 = (1,), (0, 2)
    if n == 0:
        return h0
    for k in range(1, n):
        nxt = [0] * (k + 2)
        for i, c in enumerate(h1):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(h0):
            nxt[i] -= 2 * k * c
        h0, h1 = h1, tuple(nxt)
    return h1


@lru_cache(maxsize=None)
def _shape_derivative_at_zero(n, a):
    """a-th derivative at u=0 of H_n(u) exp(-u^2/2); exact integer."""
    poly = list(_hermite_coeffs(n))
    for _ in range(a):
        # (P e^{-u^2/2})' = (P' - u P) e^{-u^2/2}
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            if i:
                nxt[i - 1] += i * c
            nxt[i + 1] -= c
        poly = nxt
    return poly[0]


def _norm_1d(n, width):
    return (2.0 ** n * math.factorial(n) * math.sqrt(math.pi) * width) ** -0.5


def _hermite(n, u):
    h0, h1 = 1.0, 2.0 * u
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, 2.0 * u * h1 - 2.0 * k * h0
    return h1


class HermiteGaussian3D:
    """Product of normalized 1-D oscillator eigenfunctions."""

    __slots__ = ("n", "widths")

    def __init__(self, n=(0, 0, 0), widths=(1.0, 1.0, 1.0)):
        n = tuple(int(v) for v in n)
        widths = tuple(float(w) for w in widths)
        if len(n) != 3 or len(widths) != 3:
            raise ValueError("need three quantum numbers and three widths")
        if any(v < 0 for v in n) or any(not w > 0 for w in widths):
            raise ValueError(f"invalid state n={n}, widths={widths}")
        self.n = n
        self.widths = widths

    @classmethod
    def from_trap(cls, trap, n=None):
        """Relative-motion eigenstate of ``trap``; quantum numbers default to the trap's."""
        n = trap.quanta if n is None else n
        return cls(n, tuple(math.sqrt(2.0 / w) for w in trap.omegas))

    @property
    def parity(self):
        return (-1) ** sum(self.n)

    def energy(self, omegas):
        return sum(w * (k + 0.5) for w, k in zip(omegas, self.n))

    def __eq__(self, other):
        return isinstance(other, HermiteGaussian3D) and (self.n, self.widths) == (other.n, other.widths)

    def __hash__(self):
        return hash((self.n, self.widths))

    def __repr__(self):
        return f"HermiteGaussian3D(n={self.n}, widths={self.widths})"


def evaluate(psi, r):
    out = 1.0
    for n, w, x in zip(psi.n, psi.widths, r):
        u = x / w
        out *= _norm_1d(n, w) * _hermite(n, u) * math.exp(-0.5 * u * u)
    return out


def deriv_at_origin(psi, idx):
    """d^a/dx^a d^b/dy^b d^c/dz^c psi at r = 0, exact per axis."""
    if sum(idx) > DERIVATIVE_CAP:
        raise CapExceeded(f"derivative order {sum(idx)} exceeds cap {DERIVATIVE_CAP}")
    out = 1.0
    for n, w, a in zip(psi.n, psi.widths, idx):
        if (n + a) % 2:
            return 0.0
        out *= _norm_1d(n, w) * _shape_derivative_at_zero(n, a) / w ** a
    return out
