"""Contact pseudopotential assembled from a K-matrix.

The operator is a sum of blocks ``T_J(l, l') delta(r) {C^l(bra grad/k_c) x
C^l'(ket grad/k_c)}_{J0}``.  Blocks are kept separate so that each (J, l, l')
contribution can be inspected or evaluated on its own.  Units: hbar = M = 1.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .angular import clebsch_gordan, reduced_c, triangle
from .errors import OddJ, TriangleViolation
from .kmatrix import born_radial_integral, validate
from .operators import (
    TwoSidedOperator,
    c_tensor_nabla,
    homogenized_legendre_dot,
    render,
    tensor_product,
)

__all__ = [
    "Block",
    "PseudoPotentialOperator",
    "CouplingTable",
    "OnShellWarning",
    "coupling_T",
    "coupling_table",
    "assemble_general",
    "assemble_isotropic",
    "assemble_born",
    "truncated_dipolar",
    "kernel",
]

T_CUTOFF = 1e-14
ON_SHELL_RTOL = 1e-6


class OnShellWarning(UserWarning):
    """The K-matrix wavenumber differs from the collision momentum."""


@dataclass(frozen=True)
class Block:
    J: int
    l: int
    l_p: int
    T: float
    op: TwoSidedOperator

    @property
    def key(self):
        return (self.J, self.l, self.l_p)

    def weighted(self):
        return self.op.scaled(self.T)


class PseudoPotentialOperator:
    """Ordered collection of (J, l, l') blocks at collision momentum ``k_c``."""

    def __init__(self, k_c, blocks=(), provenance="general"):
        if not k_c > 0:
            raise ValueError("k_c must be positive")
        self.k_c = float(k_c)
        blocks = tuple(blocks)
        for b in blocks:
            if b.J % 2 or not triangle(b.l, b.l_p, b.J) or (b.l + b.l_p) % 2:
                raise ValueError(f"block {b.key} breaks the even-J / triangle / parity rules")
            if not math.isfinite(b.T):
                raise ValueError(f"block {b.key} has non-finite T")
        self.blocks = blocks
        self.provenance = provenance

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def keys(self):
        return [b.key for b in self.blocks]

    def collected_blocks(self):
        """{(J, l, l'): T * op}, summing blocks that share a label."""
        out = {}
        for b in self.blocks:
            w = b.weighted()
            out[b.key] = out[b.key] + w if b.key in out else w
        return out

    def total(self):
        """Single term map sum_blocks T * op."""
        acc = TwoSidedOperator({}, self.k_c)
        for b in self.blocks:
            acc = acc + b.weighted()
        return acc

    def to_text(self, format="text"):
        lines = [f"# provenance={self.provenance} kc={self.k_c!r} blocks={len(self.blocks)}"]
        for b in self.blocks:
            lines.append(f"[J={b.J} l={b.l} lp={b.l_p}] T={b.T!r}")
            lines.append(render(b.op, format).rstrip("\n"))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"PseudoPotentialOperator(k_c={self.k_c!r}, provenance={self.provenance!r}, "
                f"blocks={self.keys()})")


class CouplingTable:
    """Map (J, l, l') -> T_J(l, l') at a fixed k_c."""

    def __init__(self, k_c, rows):
        self.k_c = float(k_c)
        self.rows = dict(sorted(rows.items()))

    def __getitem__(self, key):
        return self.rows[key]

    def to_csv(self):
        lines = ["J,l,lp,T"]
        lines += [f"{J},{l},{lp},{T!r}" for (J, l, lp), T in self.rows.items()]
        return "\n".join(lines) + "\n"

    def to_text(self):
        lines = [f"# kc={self.k_c!r}", f"{'J':>3} {'l':>3} {'lp':>3}  T"]
        lines += [f"{J:>3} {l:>3} {lp:>3}  {T:.12g}" for (J, l, lp), T in self.rows.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text, k_c):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "J,l,lp,T":
            raise ValueError("coupling CSV must start with the header 'J,l,lp,T'")
        rows = {}
        for ln in lines[1:]:
            J, l, lp, T = ln.split(",")
            rows[(int(J), int(l), int(lp))] = float(T)
        return cls(k_c, rows)


def coupling_T(J, l, l_p, K, k_c):
    """T_J(l, l'; k_c) = -4 pi sqrt((2l+1)(2l'+1)) sum_m (-1)^m <l m l' -m|J 0> K^{l'm}_{lm} / k_c."""
    if not triangle(l, l_p, J):
        raise TriangleViolation(f"J={J} outside |l-l'| <= J <= l+l' for (l, l')=({l}, {l_p})")
    if J % 2:
        raise OddJ(f"odd J={J} does not enter the pseudopotential")
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    acc = 0.0
    for m in range(-min(l, l_p), min(l, l_p) + 1):
        k_entry = K.entry(l, m, l_p, m)
        if k_entry == 0.0:
            continue
        acc += (-1) ** m * clebsch_gordan(l, m, l_p, -m, J, 0) * k_entry
    # adding 0.0 turns a signed zero into +0.0 for clean tables
    return -4.0 * math.pi * math.sqrt((2 * l + 1) * (2 * l_p + 1)) * acc / k_c + 0.0


def _check_on_shell(K, k_c):
    if abs(K.k - k_c) > ON_SHELL_RTOL * k_c:
        warnings.warn(f"K-matrix given at k={K.k!r} but assembled at k_c={k_c!r}",
                      OnShellWarning, stacklevel=3)


def _nonzero_pairs(K, l_max):
    pairs = set()
    for l, _, lp, _ in K.entries:
        if l <= l_max and lp <= l_max:
            pairs.add((l, lp))
    return sorted(pairs)


def coupling_table(K, l_max, k_c):
    """All T_J for every (l, l') block of K with l, l' <= l_max, zeros included."""
    validate(K)
    _check_on_shell(K, k_c)
    rows = {}
    for l, lp in _nonzero_pairs(K, l_max):
        for J in range(abs(l - lp), l + lp + 1, 2):
            rows[(J, l, lp)] = coupling_T(J, l, lp, K, k_c)
    return CouplingTable(k_c, rows)


def assemble_general(K, l_max, k_c):
    """Pseudopotential for an arbitrary valid K-matrix; no truncation in J."""
    validate(K)
    _check_on_shell(K, k_c)
    blocks = []
    for l, lp in _nonzero_pairs(K, l_max):
        for J in range(abs(l - lp), l + lp + 1, 2):
            T = coupling_T(J, l, lp, K, k_c)
            if abs(T) > T_CUTOFF:
                blocks.append(Block(J, l, lp, T, tensor_product(l, lp, J, k_c)))
    blocks.sort(key=lambda b: b.key)
    return PseudoPotentialOperator(k_c, blocks, "general")


def assemble_isotropic(shifts, l_max, k_c):
    """Omont form: sum_l 4 pi (2l+1) (-tan delta_l / k_c) delta(r) P_l(bra grad . ket grad / k_c^2)."""
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    blocks = []
    for l, delta in enumerate(shifts):
        if l > l_max:
            break
        t = math.tan(delta)
        if t == 0.0:
            continue
        T = 4.0 * math.pi * (2 * l + 1) * (-t / k_c)
        blocks.append(Block(0, l, l, T, homogenized_legendre_dot(l, k_c)))
    return PseudoPotentialOperator(k_c, blocks, "isotropic")


def assemble_born(V, l_max, k_c):
    """First-order pseudopotential of V_L(r) P_L(cos theta); only J = L blocks appear.

    Uses the Wigner-Eckart form T_L = -4 pi sqrt((2l+1)(2l'+1)/(2L+1)) (-1)^l'
    <l||K^(L)||l'> / k_c with <l||K^(L)||l'> = -k_c I_{ll'} <l||C^L||l'>.
    """
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    L = V.L
    radial = {}
    blocks = []
    for l in range(l_max + 1):
        for lp in range(l_max + 1):
            red_c = reduced_c(l, L, lp)
            if red_c == 0.0:
                continue
            pair = (min(l, lp), max(l, lp))
            if pair not in radial:
                radial[pair] = born_radial_integral(V, l, lp, k_c)
            reduced_k = -k_c * radial[pair] * red_c
            T = (-4.0 * math.pi * math.sqrt((2 * l + 1) * (2 * lp + 1) / (2 * L + 1))
                 * (-1) ** lp * reduced_k / k_c)
            if abs(T) > T_CUTOFF:
                blocks.append(Block(L, l, lp, T, tensor_product(l, lp, L, k_c)))
    return PseudoPotentialOperator(k_c, blocks, "born")


def truncated_dipolar(a_ss, a_sd, k_c, gauge="tensor"):
    """4 pi delta(r) {a_ss + sqrt5 a_sd [bracket]} in the zero or tensor gauge.

    tensor: bracket = (1/k_c^2)[-(bra Lap + ket Lap)/2 + 3/2 (bra dz^2 + ket dz^2)]
    zero:   bracket = 1 + 3/(2 k_c^2) (bra dz^2 + ket dz^2)

    The s-d part is split into a ket-side block (J=2, 0, 2) and a bra-side
    block (J=2, 2, 0), each carrying T = 4 pi sqrt5 a_sd.
    """
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    if gauge not in ("zero", "tensor"):
        raise ValueError(f"gauge must be 'zero' or 'tensor', got {gauge!r}")
    origin = (0, 0, 0)
    blocks = []
    if a_ss != 0.0:
        blocks.append(Block(0, 0, 0, 4.0 * math.pi * a_ss,
                            TwoSidedOperator({(origin, origin): 1.0}, k_c)))
    if a_sd != 0.0:
        inv = 1.0 / k_c ** 2
        if gauge == "tensor":
            side = {(2, 0, 0): -0.5 * inv, (0, 2, 0): -0.5 * inv, (0, 0, 2): inv}
        else:
            side = {origin: 0.5, (0, 0, 2): 1.5 * inv}
        T = 4.0 * math.pi * math.sqrt(5.0) * a_sd
        blocks.append(Block(2, 0, 2, T, TwoSidedOperator({(origin, i): c for i, c in side.items()}, k_c)))
        blocks.append(Block(2, 2, 0, T, TwoSidedOperator({(i, origin): c for i, c in side.items()}, k_c)))
    return PseudoPotentialOperator(k_c, blocks, f"truncated_dipolar({gauge})")


@lru_cache(maxsize=512)
def _c_items(l, m):
    return tuple(c_tensor_nabla(l, m, 1.0).terms.items())


def _ylm(l, m, unit):
    x, y, z = unit
    val = sum(c * x ** a * y ** b * z ** e for (a, b, e), c in _c_items(l, m))
    return math.sqrt((2 * l + 1) / (4.0 * math.pi)) * val


def _unit(v):
    v = tuple(float(c) for c in v)
    if abs(math.sqrt(sum(c * c for c in v)) - 1.0) > 1e-12:
        raise ValueError(f"expected a unit vector, got {v}")
    return v


def kernel(K, khat, kphat, k_c):
    """On-shell momentum kernel -(2/pi) sum i^{l'-l} K_{lm}^{l'm'}/k_c Y*_{l'm'}(k') Y_{lm}(k)."""
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    khat, kphat = _unit(khat), _unit(kphat)
    total = 0.0j
    for (l, m, lp, mp), value in sorted(K.entries.items()):
        phase = 1j ** ((lp - l) % 4)
        total += phase * value / k_c * _ylm(lp, mp, kphat).conjugate() * _ylm(l, m, khat)
    return -2.0 / math.pi * total
