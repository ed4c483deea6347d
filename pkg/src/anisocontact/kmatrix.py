"""On-shell reactance (K) matrices and the providers that build them.

Entries are keyed ``(l, m, l', m')`` and stored in full, mirrors included, so
that :func:`validate` can detect a broken symmetry.  Constructors that take
canonical rows (``m >= 0``, ``l <= l'``) fill the mirrors themselves.

Units: hbar = M = 1 throughout.
"""

import math
import re
import warnings
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy import integrate

from .angular import reduced_c, spherical_bessel, triangle, wigner3j
from .errors import (
    DivergentIntegral,
    DivergentTangent,
    LongRange,
    ParseError,
    QuadratureFailure,
    SelectionRule,
    SymmetryViolation,
)

__all__ = [
    "KMatrix",
    "RadialPotential",
    "validate",
    "isotropic",
    "born_radial_integral",
    "born_kmatrix",
    "born_dipolar_reduced",
    "scattering_lengths",
    "angular_c0",
    "load_kmatrix",
    "save_kmatrix",
    "dumps_kmatrix",
    "loads_kmatrix",
]


class KMatrix:
    """Reactance matrix at a single wavenumber ``k``.

    Zero entries are not stored; :meth:`entry` returns 0.0 for them.
    """

    __slots__ = ("k", "l_max", "_entries")

    def __init__(self, k, l_max, entries=None):
        self.k = float(k)
        self.l_max = int(l_max)
        clean = {}
        for key, value in (entries or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != 4:
                raise ValueError(f"K-matrix key must be (l, m, l', m'), got {key}")
            value = float(value)
            if value != 0.0:
                clean[key] = value
        self._entries = MappingProxyType(clean)

    @classmethod
    def from_canonical(cls, k, l_max, rows):
        """Build from canonical rows ``{(l, m, l', m'): value}`` with m >= 0 and l <= l'.

        Each row is copied to its (l <-> l') and (m -> -m) mirrors.
        """
        full = {}
        for (l, m, lp, mp), value in rows.items():
            for key in {(l, m, lp, mp), (lp, mp, l, m), (l, -m, lp, -mp), (lp, -mp, l, -m)}:
                full[key] = value
        return cls(k, l_max, full)

    @property
    def entries(self):
        return self._entries

    def entry(self, l, m, lp, mp):
        return self._entries.get((l, m, lp, mp), 0.0)

    def canonical(self):
        """Canonical rows (m >= 0, l <= l') in sorted order."""
        return {key: self._entries[key] for key in sorted(self._entries)
                if key[1] >= 0 and key[0] <= key[2]}

    def is_zero(self):
        return not self._entries

    def restricted(self, pairs):
        """Copy keeping only entries whose unordered (l, l') pair is in ``pairs``."""
        wanted = {tuple(sorted(p)) for p in pairs}
        kept = {key: v for key, v in self._entries.items()
                if tuple(sorted((key[0], key[2]))) in wanted}
        return KMatrix(self.k, self.l_max, kept)

    def with_entry(self, key, value):
        """Copy with a single raw entry replaced (no mirror filling)."""
        new = dict(self._entries)
        new[tuple(key)] = value
        return KMatrix(self.k, self.l_max, new)

    def __eq__(self, other):
        if not isinstance(other, KMatrix):
            return NotImplemented
        return (self.k, self.l_max, dict(self._entries)) == (other.k, other.l_max, dict(other._entries))

    def __repr__(self):
        return f"KMatrix(k={self.k!r}, l_max={self.l_max}, n_entries={len(self._entries)})"


@dataclass(frozen=True)
class RadialPotential:
    """Radial strength V_L(r) of an axially symmetric term V_L(r) P_L(cos theta).

    Either a power law ``coefficient / r**exponent`` or a table ``(r, values)``.
    """

    L: int
    coefficient: float = None
    exponent: float = None
    r: tuple = None
    values: tuple = None

    def __post_init__(self):
        if self.L < 0 or self.L % 2:
            raise ValueError(f"anisotropy rank L must be even and >= 0, got {self.L}")
        if self.is_tabulated:
            if self.coefficient is not None or self.exponent is not None:
                raise ValueError("give either a power law or a table, not both")
            r = np.asarray(self.r, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2:
                raise ValueError("tabulated potential needs matching 1-D r and V arrays of length >= 2")
            if np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ValueError("table radii must be positive and strictly increasing")
            object.__setattr__(self, "r", tuple(r.tolist()))
            object.__setattr__(self, "values", tuple(v.tolist()))
        else:
            if self.coefficient is None or self.exponent is None:
                raise ValueError("power-law potential needs coefficient and exponent")
            if not self.exponent > 2:
                raise LongRange(f"exponent s={self.exponent} <= 2 is a true long-range tail")

    @property
    def is_tabulated(self):
        return self.r is not None

    @classmethod
    def power_law(cls, L, coefficient, exponent):
        return cls(L=L, coefficient=float(coefficient), exponent=float(exponent))

    @classmethod
    def dipolar(cls, D):
        """Aligned point dipoles: D^2 (1 - 3 cos^2 theta) / r^3 = -2 D^2 P_2(cos theta) / r^3."""
        return cls(L=2, coefficient=-2.0 * D * D, exponent=3.0)

    @classmethod
    def tabulated(cls, L, r, values):
        return cls(L=L, r=tuple(r), values=tuple(values))

    def __call__(self, r):
        if self.is_tabulated:
            return float(np.interp(math.log(r), np.log(self.r), self.values))
        return self.coefficient / r ** self.exponent


# -- validation ---------------------------------------------------------------

def _close(a, b):
    return abs(a - b) <= 1e-12 * max(abs(a), abs(b))


def validate(K):
    """Raise :class:`SymmetryViolation` unless every K-matrix invariant holds."""
    entries = K.entries
    for key in sorted(entries):
        l, m, lp, mp = key
        value = entries[key]
        if not math.isfinite(value):
            raise SymmetryViolation("finite", key)
        if l < 0 or lp < 0 or abs(m) > l or abs(mp) > lp or max(l, lp) > K.l_max:
            raise SymmetryViolation("range", key)
        if m != mp:
            raise SymmetryViolation("m_selection", key)
        if (l + lp) % 2:
            raise SymmetryViolation("parity", key)
    # mirror checks against the canonical representative of each orbit
    keys = set(entries)
    for l, m, lp, _ in list(keys):
        keys.add((min(l, lp), abs(m), max(l, lp), abs(m)))
    for key in sorted(keys):
        l, m, lp, _ = key
        canon = (min(l, lp), abs(m), max(l, lp), abs(m))
        if key == canon:
            continue
        if not _close(entries.get(key, 0.0), entries.get(canon, 0.0)):
            swapped = l > lp
            rule = "symmetry" if swapped else "m_reflection"
            raise SymmetryViolation(rule, key)


# -- providers ------------------------------------------------------------------

def isotropic(shifts, k):
    """Diagonal K-matrix tan(delta_l) for every |m| <= l."""
    if not k > 0:
        raise ValueError("k must be positive")
    shifts = [float(d) for d in shifts]
    rows = {}
    for l, delta in enumerate(shifts):
        if not math.isfinite(delta):
            raise DivergentTangent(f"phase shift delta_{l} is not finite")
        if abs(math.cos(delta)) < 1e-15:
            raise DivergentTangent(f"tan(delta_{l}) diverges (delta = pi/2 mod pi)")
        t = math.tan(delta)
        for m in range(l + 1):
            rows[(l, m, l, m)] = t
    return KMatrix.from_canonical(k, max(len(shifts) - 1, 0), rows)


def angular_c0(l, m, lp, L):
    """<l m | C^L_0 | l' m> via the Wigner-Eckart theorem."""
    return (-1) ** (l - m) * wigner3j(l, L, lp, -m, 0, m) * reduced_c(l, L, lp)


def _hankel_coefficients(l):
    # j_l(t) = [sin(t - l pi/2) P(1/t) + cos(t - l pi/2) Q(1/t)] / t, exact
    P = [0.0] * (l + 1)
    Q = [0.0] * (l + 1)
    for n in range(l + 1):
        a = math.factorial(l + n) / (2 ** n * math.factorial(n) * math.factorial(l - n))
        if n % 2 == 0:
            P[n] = (-1) ** (n // 2) * a
        else:
            Q[n] = (-1) ** ((n - 1) // 2) * a
    return P, Q


def _polymul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _tail_integral(l, lp, s, T):
    """Exact integral of j_l(t) j_l'(t) t^(2-s) over [T, inf)."""
    P1, Q1 = _hankel_coefficients(l)
    P2, Q2 = _hankel_coefficients(lp)
    # polynomials in 1/t
    pp_qq = [x + y for x, y in zip(_polymul(P1, P2), _polymul(Q1, Q2))]
    pq_qp = [x - y for x, y in zip(_polymul(P1, Q2), _polymul(Q1, P2))]
    qq_pp = [y - x for x, y in zip(_polymul(P1, P2), _polymul(Q1, Q2))]
    pqs = [x + y for x, y in zip(_polymul(P1, Q2), _polymul(Q1, P2))]
    a = l * math.pi / 2
    b = lp * math.pi / 2
    phi = l + lp  # phase (a + b) in units of pi/2
    n_max = len(pp_qq) - 1
    p_max = s + n_max

    ctx = MPContext()
    ctx.dps = 30 + int(math.ceil(p_max * math.log10(max(T, 10.0))))
    Tm = ctx.mpf(T)
    e2 = ctx.expj(2 * Tm)
    frac = s - math.floor(s)
    if frac == 0.0:
        p0 = 1
        si, ci = ctx.si(2 * Tm), ctx.ci(2 * Tm)
        J = -ci + 1j * (ctx.pi / 2 - si)
    else:
        p0 = 1 + frac
        J = Tm ** (1 - p0) * ctx.expint(p0, -2j * Tm)
    osc = {}
    p = p0
    while p <= p_max + 1e-9:
        osc[round(p, 9)] = J
        p += 1
        J = (e2 * Tm ** (1 - p) + 2j * J) / (p - 1)

    total = ctx.mpf(0)
    rot = ctx.expj(-ctx.pi / 2 * phi)  # e^{-i(a+b)}
    c_ba, s_ba = math.cos(b - a), math.sin(b - a)
    for n in range(n_max + 1):
        p = s + n
        flat = c_ba * pp_qq[n] + s_ba * pq_qp[n]
        if flat:
            total += flat * Tm ** (1 - p) / (p - 1)
        if qq_pp[n] or pqs[n]:
            Jp = rot * osc[round(p, 9)]
            total += qq_pp[n] * ctx.re(Jp) + pqs[n] * ctx.im(Jp)
    return float(total / 2)


def _integrand_power(l, lp, s):
    def f(t):
        return spherical_bessel("j", l, t) * spherical_bessel("j", lp, t) * t ** (2.0 - s)
    return f


def _power_law_dimensionless(l, lp, s, rtol):
    alpha = l + lp + 2 - s
    if not alpha > -1:
        raise DivergentIntegral(
            f"integral of j_{l} j_{lp} t^(2-s) diverges at the origin for s={s}")
    T = max(50.0, 20.0 * (l + lp))
    # near the origin factor out t^alpha so quad sees a smooth function
    norm = 1.0 / (_double_fact(2 * l + 1) * _double_fact(2 * lp + 1))

    def smooth(t):
        if t == 0.0:
            return norm
        return spherical_bessel("j", l, t) * spherical_bessel("j", lp, t) / t ** (l + lp)

    pieces = []
    val, err = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(alpha, 0.0),
                              epsabs=1e-15, epsrel=1e-12, limit=200)
    pieces.append((val, err))
    f = _integrand_power(l, lp, s)
    edges = np.concatenate([[1.0], np.arange(math.pi, T, math.pi), [T]])
    edges = np.unique(edges)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
        pieces.append((val, err))
    head = math.fsum(v for v, _ in pieces)
    err = sum(e for _, e in pieces)
    total = head + _tail_integral(l, lp, s, T)
    scale = sum(abs(v) for v, _ in pieces)
    if err > rtol * abs(total) and err > 1e-15 * scale:
        raise QuadratureFailure(
            f"quadrature error estimate {err:.3g} exceeds tolerance for (l, l')=({l}, {lp})")
    return total


def _double_fact(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def born_radial_integral(V, l, l_p, k, rtol=1e-10):
    """I_{l l'}(k) = int_0^inf x^2 V_L(x) j_l(kx) j_l'(kx) dx."""
    if not k > 0:
        raise ValueError("k must be positive")
    if V.is_tabulated:
        return _tabulated_integral(V, l, l_p, k)
    if V.coefficient == 0.0:
        return 0.0
    s = V.exponent
    dimless = _power_law_dimensionless(min(l, l_p), max(l, l_p), s, rtol)
    return V.coefficient * k ** (s - 3.0) * dimless


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _tabulated_integral(V, l, l_p, k):
    warnings.warn(
        "tabulated potential integrated only over its table support; "
        "the asymptotic tail beyond r_max is not included",
        RuntimeWarning, stacklevel=3)
    r = np.asarray(V.r)
    v = np.asarray(V.values)
    logr = np.log(r)
    total = 0.0
    # Gauss-Legendre on sub-pieces no longer than a quarter period of the Bessel product
    for i in range(r.size - 1):
        a, b = r[i], r[i + 1]
        n_sub = max(1, math.ceil((b - a) * k / (math.pi / 4)))
        edges = np.linspace(a, b, n_sub + 1)
        slope = (v[i + 1] - v[i]) / (logr[i + 1] - logr[i])
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            for t, w in zip(0.5 * (hi + lo) + half * _GL_NODES, _GL_WEIGHTS):
                pot = v[i] + slope * (math.log(t) - logr[i])
                total += w * half * t * t * pot * (spherical_bessel("j", l, k * t)
                                                    * spherical_bessel("j", l_p, k * t))
    return total


def born_kmatrix(V, l_max, k):
    """First-order K-matrix of the potential V_L(r) P_L(cos theta).

    K_{lm}^{l'm} = -k I_{ll'} <l m|C^L_0|l' m>  (hbar = M = 1).
    """
    if not k > 0:
        raise ValueError("k must be positive")
    L = V.L
    rows = {}
    if not V.is_tabulated and V.coefficient == 0.0:
        return KMatrix(k, l_max)
    for l in range(l_max + 1):
        for lp in range(l, l_max + 1):
            if (l + lp + L) % 2 or not triangle(l, L, lp):
                continue
            if reduced_c(l, L, lp) == 0.0:
                continue
            I = born_radial_integral(V, l, lp, k)
            for m in range(min(l, lp) + 1):
                ang = angular_c0(l, m, lp, L)
                if ang != 0.0:
                    rows[(l, m, lp, m)] = -k * I * ang
    return KMatrix.from_canonical(k, l_max, rows)


def born_dipolar_reduced(l, l_p, D, k):
    """Reduced element <l||K^(2)||l'> of the first-order dipolar K-matrix.

    Sign follows from V_2 = -2 D^2 / r^3 through the radial integral, which
    yields a_sd = -D^2 / (6 sqrt 5).
    """
    if l < 0 or l_p < 0 or (l, l_p) == (0, 0):
        raise SelectionRule(f"dipolar coupling forbids (l, l') = ({l}, {l_p})")
    if l_p == l:
        bracket = 1.0 / (l * (l + 1))
    elif l_p == l + 2:
        bracket = 1.0 / (3 * (l + 1) * (l + 2))
    elif l_p == l - 2:
        bracket = 1.0 / (3 * l * (l - 1))
    else:
        raise SelectionRule(f"dipolar coupling needs l' in {{l, l +/- 2}}, got ({l}, {l_p})")
    return D * D * k * reduced_c(l, 2, l_p) * bracket


def scattering_lengths(K):
    """(a_ss, a_sd) = (-K^{00}_{00}/k, -K^{20}_{00}/k)."""
    return -K.entry(0, 0, 0, 0) / K.k, -K.entry(0, 0, 2, 0) / K.k


# -- file IO ----------------------------------------------------------------------

_HEADER = re.compile(r"^#\s*k\s*=\s*(\S+)\s+l_max\s*=\s*(\S+)\s*$")


def dumps_kmatrix(K):
    lines = [f"# k={K.k!r} l_max={K.l_max}"]
    for (l, m, lp, mp), v in K.canonical().items():
        lines.append(f"{l} {m} {lp} {mp} {v!r}")
    return "\n".join(lines) + "\n"


def loads_kmatrix(text):
    k = l_max = None
    rows = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER.match(line)
            if match:
                if k is not None:
                    raise ParseError("duplicate header", lineno)
                try:
                    k = float(match.group(1))
                    l_max = int(match.group(2))
                except ValueError:
                    raise ParseError(f"bad header {line!r}", lineno) from None
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ParseError(f"expected 5 fields 'l m l' m' value', got {len(fields)}", lineno)
        try:
            l, m, lp, mp = (int(x) for x in fields[:4])
            value = float(fields[4])
        except ValueError:
            raise ParseError(f"cannot parse row {line!r}", lineno) from None
        if m < 0 or mp < 0 or l > lp:
            raise ParseError("non-canonical row (need m >= 0 and l <= l')", lineno)
        if (l, m, lp, mp) in rows:
            raise ParseError(f"duplicate row {(l, m, lp, mp)}", lineno)
        rows[(l, m, lp, mp)] = value
    if k is None:
        raise ParseError("missing header '# k=<value> l_max=<n>'", 1)
    K = KMatrix.from_canonical(k, l_max, rows)
    validate(K)
    return K


def save_kmatrix(K, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_kmatrix(K))


def load_kmatrix(path):
    with open(path, encoding="utf-8") as fh:
        return loads_kmatrix(fh.read())
