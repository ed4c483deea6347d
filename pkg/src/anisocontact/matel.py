"""Matrix elements of a pseudopotential between oscillator states.

``expectation`` contracts every block's derivative terms with exact origin
derivatives of the two states.  ``fd_oracle`` repeats the contraction with
central finite differences of plain point evaluations, as an independent check.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .states import deriv_at_origin, evaluate

__all__ = ["MatrixElementResult", "expectation", "fd_oracle", "central_weights", "fd_derivative"]


@dataclass(frozen=True)
class MatrixElementResult:
    value: complex
    blocks: tuple  # ((J, l, l'), complex) in block order

    def breakdown(self):
        return dict(self.blocks)


def _block_value(block, bra, ket, deriv):
    acc = 0.0j
    for (bi, ki), c in sorted(block.op.terms.items()):
        d_bra = deriv(bra, bi)
        if d_bra == 0.0:
            continue
        d_ket = deriv(ket, ki)
        if d_ket == 0.0:
            continue
        # states are real, so the bra-side conjugation is trivial
        acc += c * d_bra * d_ket
    return block.T * acc


def _contract(V, bra, ket, deriv):
    parts = [(b.key, _block_value(b, bra, ket, deriv)) for b in V.blocks]
    total = 0.0j
    for _, v in parts:
        total += v
    return total, tuple(parts)


def expectation(V, bra, ket):
    """<bra| V |ket> = sum_blocks T sum_terms c d^bra psi_bra(0) d^ket psi_ket(0)."""
    total, parts = _contract(V, bra, ket, deriv_at_origin)
    return MatrixElementResult(total, parts)


@lru_cache(maxsize=None)
def _weights_exact(order):
    p = (order + 1) // 2
    nodes = list(range(-p, p + 1))
    n = len(nodes)
    # Vandermonde system sum_j w_j x_j^k = order! delta_{k,order}
    A = [[Fraction(x) ** k for x in nodes] for k in range(n)]
    b = [Fraction(math.factorial(order) if k == order else 0) for k in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
                b[r] -= f * b[col]
    return tuple((x, b[i] / A[i][i]) for i, x in enumerate(nodes) if b[i] != 0)


def central_weights(order):
    """Second-order central-difference stencil for d^order/dx^order as (offset, weight) pairs."""
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    return tuple((x, float(w)) for x, w in _weights_exact(order))


def fd_derivative(psi, idx, h):
    """Mixed derivative of psi at the origin from tensor-product central stencils."""
    wx, wy, wz = (central_weights(a) for a in idx)
    acc = 0.0
    for i, a in wx:
        for j, b in wy:
            for k, c in wz:
                acc += a * b * c * evaluate(psi, (i * h, j * h, k * h))
    return acc / h ** sum(idx)


def _fd_at(V, bra, ket, h):
    cache = {}

    def deriv(psi, idx):
        key = (id(psi), idx)
        if key not in cache:
            cache[key] = fd_derivative(psi, idx, h)
        return cache[key]

    return _contract(V, bra, ket, deriv)[0]


def fd_oracle(V, bra, ket, h=None, richardson=True):
    """Finite-difference estimate of ``expectation(V, bra, ket).value``.

    The default step is 1e-3 times the narrowest state width.  With
    ``richardson`` the O(h^2) estimates at h and h/2 are combined once.
    """
    if h is None:
        h = 1e-3 * min(bra.widths + ket.widths)
    if not h > 0:
        raise ValueError("step h must be positive")
    coarse = _fd_at(V, bra, ket, h)
    if not richardson:
        return coarse
    fine = _fd_at(V, bra, ket, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0
