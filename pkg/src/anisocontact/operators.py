"""Derivative polynomials built from C-tensors of the gradient.

A :class:`DerivativePolynomial` maps a Cartesian multi-index ``(a, b, c)``
(standing for d^a/dx^a d^b/dy^b d^c/dz^c) to a complex coefficient.  A
:class:`TwoSidedOperator` pairs a bra-side multi-index with a ket-side one.
Coefficients already include the ``1/k_c**order`` scaling.
"""

import math
import re
from fractions import Fraction

from .angular import clebsch_gordan, triangle
from .errors import OddJ, ParseError, TriangleViolation

__all__ = [
    "DerivativePolynomial",
    "TwoSidedOperator",
    "c_tensor_nabla",
    "tensor_product",
    "nested_representation",
    "homogenized_legendre_dot",
    "render",
    "parse_machine",
]

_PRUNE = 1e-13


def _prune(terms):
    if not terms:
        return {}
    big = max(abs(c) for c in terms.values())
    cut = _PRUNE * big
    return {k: complex(c) for k, c in terms.items() if abs(c) > cut}


def _add_index(i, j):
    return (i[0] + j[0], i[1] + j[1], i[2] + j[2])


class _TermMap:
    __slots__ = ("terms", "k_c")

    def __init__(self, terms, k_c=1.0, prune=True):
        self.k_c = float(k_c)
        self.terms = _prune(terms) if prune else {k: complex(v) for k, v in terms.items() if v != 0}

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_items())

    def coefficient(self, key):
        return self.terms.get(key, 0.0)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def max_abs_diff(self, other):
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coefficient(k) - other.coefficient(k)) for k in keys), default=0.0)

    def close_to(self, other, tol=1e-12):
        return type(self) is type(other) and self.max_abs_diff(other) < tol

    def scaled(self, factor):
        return type(self)({k: factor * v for k, v in self.terms.items()}, self.k_c)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return type(self)(out, self.k_c)

    def __eq__(self, other):
        return type(self) is type(other) and self.k_c == other.k_c and self.terms == other.terms

    def __repr__(self):
        return f"{type(self).__name__}({len(self.terms)} terms, k_c={self.k_c!r})"


class DerivativePolynomial(_TermMap):
    """One-sided derivative polynomial (acts on the ket)."""

    def orders(self):
        return {sum(k) for k in self.terms}

    def conj(self):
        return DerivativePolynomial({k: v.conjugate() for k, v in self.terms.items()}, self.k_c)

    def __mul__(self, other):
        out = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                key = _add_index(i, j)
                out[key] = out.get(key, 0.0) + a * b
        return DerivativePolynomial(out, self.k_c)

    def evaluate(self, vec):
        """Substitute a Cartesian vector for the gradient."""
        x, y, z = (float(v) for v in vec)
        return sum(c * x ** a * y ** b * z ** e for (a, b, e), c in self.terms.items())


class TwoSidedOperator(_TermMap):
    """Bra-ket derivative operator; keys are ``(bra_index, ket_index)``."""

    def bra_orders(self):
        return {sum(k[0]) for k in self.terms}

    def ket_orders(self):
        return {sum(k[1]) for k in self.terms}

    def __mul__(self, other):
        out = {}
        for (bi, ki), a in self.terms.items():
            for (bj, kj), b in other.terms.items():
                key = (_add_index(bi, bj), _add_index(ki, kj))
                out[key] = out.get(key, 0.0) + a * b
        return TwoSidedOperator(out, self.k_c)

    @classmethod
    def outer(cls, bra, ket):
        out = {}
        for i, a in bra.terms.items():
            for j, b in ket.terms.items():
                out[(i, j)] = out.get((i, j), 0.0) + a * b
        return cls(out, ket.k_c, prune=False)


# -- exact Gaussian-rational polynomials for the C-tensor expansion ----------------

def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gpoly_mul(p, q):
    out = {}
    for i, a in p.items():
        for j, b in q.items():
            key = _add_index(i, j)
            re_, im_ = _gmul(a, b)
            old = out.get(key, (Fraction(0), Fraction(0)))
            out[key] = (old[0] + re_, old[1] + im_)
    return out


def _gpoly_pow(p, n):
    out = {(0, 0, 0): (Fraction(1), Fraction(0))}
    for _ in range(n):
        out = _gpoly_mul(out, p)
    return out


_HALF = Fraction(1, 2)
# (1/sqrt 2) * nabla_{+1}, (1/sqrt 2) * nabla_{-1}, nabla_0 -- all rational
_NABLA_P = {(1, 0, 0): (-_HALF, Fraction(0)), (0, 1, 0): (Fraction(0), -_HALF)}
_NABLA_M = {(1, 0, 0): (_HALF, Fraction(0)), (0, 1, 0): (Fraction(0), -_HALF)}
_NABLA_0 = {(0, 0, 1): (Fraction(1), Fraction(0))}


def c_tensor_nabla(l, m, k_c=1.0):
    """C^l_m(grad / k_c) expanded into Cartesian derivative monomials."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"need |m| <= l, got (l, m) = ({l}, {m})")
    if not k_c > 0:
        raise ValueError("k_c must be positive")
    exact = {}
    f = math.factorial
    for q in range(0, l + 1):
        p = q + m
        r = l - p - q
        if p < 0 or r < 0:
            continue
        w = Fraction(1, f(p) * f(q) * f(r))
        mono = _gpoly_mul(_gpoly_mul(_gpoly_pow(_NABLA_P, p), _gpoly_pow(_NABLA_M, q)),
                          _gpoly_pow(_NABLA_0, r))
        for key, (re_, im_) in mono.items():
            old = exact.get(key, (Fraction(0), Fraction(0)))
            exact[key] = (old[0] + w * re_, old[1] + w * im_)
    norm = math.sqrt(f(l - m) * f(l + m)) / k_c ** l
    terms = {k: norm * complex(float(re_), float(im_)) for k, (re_, im_) in exact.items()
             if re_ or im_}
    return DerivativePolynomial(terms, k_c, prune=False)


def tensor_product(l, l_p, J, k_c=1.0):
    """M = 0 component of {C^l(bra grad/k_c) x C^l'(ket grad/k_c)}_J."""
    if not triangle(l, l_p, J):
        raise TriangleViolation(f"J={J} outside |l-l'| <= J <= l+l' for (l, l')=({l}, {l_p})")
    if J % 2:
        raise OddJ(f"odd J={J} does not enter the axially symmetric pseudopotential")
    out = {}
    for m in range(-min(l, l_p), min(l, l_p) + 1):
        cg = clebsch_gordan(l, m, l_p, -m, J, 0)
        if cg == 0.0:
            continue
        block = TwoSidedOperator.outer(c_tensor_nabla(l, m, k_c), c_tensor_nabla(l_p, -m, k_c))
        for key, v in block.terms.items():
            out[key] = out.get(key, 0.0) + cg * v
    return TwoSidedOperator(out, k_c)


_NABLA_SPHERICAL = {
    1: DerivativePolynomial({(1, 0, 0): -1 / math.sqrt(2), (0, 1, 0): -1j / math.sqrt(2)}),
    -1: DerivativePolynomial({(1, 0, 0): 1 / math.sqrt(2), (0, 1, 0): -1j / math.sqrt(2)}),
    0: DerivativePolynomial({(0, 0, 1): 1.0}),
}


def nested_representation(l, m, k_c=1.0):
    """C^l_m(grad / k_c) from iterated couplings {...{{grad x grad}_2 x grad}_3 ... x grad}_lm.

    The rank is raised by one at every step; lower intermediate ranks of a
    product of commuting gradients either vanish or carry Laplacians.
    """
    if l < 0 or abs(m) > l:
        raise ValueError(f"need |m| <= l, got (l, m) = ({l}, {m})")
    if l == 0:
        return DerivativePolynomial({(0, 0, 0): 1.0}, k_c)
    # level[j][M] holds the rank-j coupled product of j gradients
    level = {mu: poly for mu, poly in _NABLA_SPHERICAL.items()}
    for j in range(2, l + 1):
        nxt = {}
        for M in range(-j, j + 1):
            acc = DerivativePolynomial({})
            for mu in (-1, 0, 1):
                prev = level.get(M - mu)
                if prev is None:
                    continue
                cg = clebsch_gordan(j - 1, M - mu, 1, mu, j, M)
                if cg:
                    acc = acc + (prev * _NABLA_SPHERICAL[mu]).scaled(cg)
            nxt[M] = acc
        level = nxt
    odd_df = 1
    for k in range(1, 2 * l, 2):
        odd_df *= k
    factor = math.sqrt(odd_df / math.factorial(l)) / k_c ** l
    return DerivativePolynomial({k: factor * v for k, v in level[m].terms.items()}, k_c)


def _legendre_coefficients(l):
    # exact power-series coefficients of P_l
    p0, p1 = [Fraction(1)], [Fraction(0), Fraction(1)]
    if l == 0:
        return p0
    for n in range(1, l):
        nxt = [Fraction(0)] * (n + 2)
        for i, c in enumerate(p1):
            nxt[i + 1] += Fraction(2 * n + 1, n + 1) * c
        for i, c in enumerate(p0):
            nxt[i] -= Fraction(n, n + 1) * c
        p0, p1 = p1, nxt
    return p1


def homogenized_legendre_dot(l, k_c=1.0):
    """P_l(bra grad . ket grad / k_c^2), every term padded to bra/ket degree (l, l).

    The power u^k of u = bra.ket is multiplied by (bra.bra * ket.ket)^((l-k)/2).
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    dot = TwoSidedOperator({((1, 0, 0), (1, 0, 0)): 1.0, ((0, 1, 0), (0, 1, 0)): 1.0,
                            ((0, 0, 1), (0, 0, 1)): 1.0}, k_c)
    lap_pair = TwoSidedOperator({(b, k): 1.0 for b in ((2, 0, 0), (0, 2, 0), (0, 0, 2))
                                 for k in ((2, 0, 0), (0, 2, 0), (0, 0, 2))}, k_c)
    one = TwoSidedOperator({((0, 0, 0), (0, 0, 0)): 1.0}, k_c)
    total = {}
    for power, coeff in enumerate(_legendre_coefficients(l)):
        if not coeff:
            continue
        term = one
        for _ in range(power):
            term = term * dot
        for _ in range((l - power) // 2):
            term = term * lap_pair
        for key, v in term.terms.items():
            total[key] = total.get(key, 0.0) + float(coeff) * v
    scale = 1.0 / k_c ** (2 * l)
    return TwoSidedOperator({k: v * scale for k, v in total.items()}, k_c)


# -- rendering -----------------------------------------------------------------------

def _surd(x):
    """Write |x| as q * sqrt(d) with q rational and d square-free, or None."""
    if x == 0:
        return Fraction(0), 1
    sq = Fraction(x * x).limit_denominator(10 ** 7)
    if sq == 0 or abs(float(sq) - x * x) > 1e-11 * x * x:
        return None
    # sqrt(n/m) = sqrt(n*m)/m, then pull squares out of n*m
    num, den = sq.numerator * sq.denominator, sq.denominator
    a = 1
    rest = num
    f = 2
    while f * f <= rest:
        while rest % (f * f) == 0:
            rest //= f * f
            a *= f
        f += 1
    d = rest
    q = Fraction(a, den)
    if abs(float(q) * math.sqrt(d) - abs(x)) > 1e-10 * abs(x):
        return None
    return q, d


def _common_factor(values):
    """Positive factor g*sqrt(d) leaving Gaussian integers, or None."""
    parts = []
    for v in values:
        for x in (v.real, v.imag):
            if abs(x) > 0:
                s = _surd(x)
                if s is None:
                    return None
                parts.append(s)
    if not parts:
        return None
    ds = {d for _, d in parts}
    if len(ds) != 1:
        return None
    d = ds.pop()
    num = 0
    den = 1
    for q, _ in parts:
        num = math.gcd(num, q.numerator)
        den = den * q.denominator // math.gcd(den, q.denominator)
    g = Fraction(num, den)
    return g, d


def _fmt_factor(g, d, latex=False):
    if d == 1:
        if g.denominator == 1:
            return None if g == 1 else str(g.numerator)
        return (rf"\frac{{{g.numerator}}}{{{g.denominator}}}" if latex
                else f"{g.numerator}/{g.denominator}")
    root = rf"\sqrt{{{d}}}" if latex else f"sqrt({d})"
    head = root if g.numerator == 1 else (f"{g.numerator}{root}" if latex else f"{g.numerator}*{root}")
    if g.denominator == 1:
        return head
    return rf"\frac{{{head}}}{{{g.denominator}}}" if latex else f"{head}/{g.denominator}"


def _fmt_gauss(re_, im_):
    """Render an integer Gaussian coefficient; returns (sign, body) with body '' for unity."""
    if im_ == 0:
        sign = "-" if re_ < 0 else "+"
        mag = abs(re_)
        return sign, "" if mag == 1 else str(mag)
    if re_ == 0:
        sign = "-" if im_ < 0 else "+"
        mag = abs(im_)
        return sign, "i" if mag == 1 else f"{mag}i"
    im_part = f"+{im_}i" if im_ > 0 else f"-{-im_}i"
    return "+", f"({re_}{im_part})"


def _fmt_float(c):
    """(sign, body) for a coefficient that has no exact surd form."""
    if c.imag == 0:
        return ("-" if c.real < 0 else "+"), f"{abs(c.real):.12g}"
    if c.real == 0:
        return ("-" if c.imag < 0 else "+"), f"{abs(c.imag):.12g}i"
    return "+", f"({c.real:.12g}{c.imag:+.12g}i)"


def _mono_text(idx):
    a, b, c = idx
    if a + b + c == 0:
        return "1"
    return "D" + "x" * a + "y" * b + "z" * c


def _mono_latex(idx, side=None):
    parts = []
    for axis, n in zip("xyz", idx):
        if n == 0:
            continue
        base = rf"\partial_{axis}"
        if side == "bra":
            base = rf"\overleftarrow{{\partial}}_{axis}"
        elif side == "ket":
            base = rf"\overrightarrow{{\partial}}_{axis}"
        parts.append(base if n == 1 else f"{base}^{{{n}}}")
    return " ".join(parts)


def _group_by_degree(op):
    groups = {}
    for key, c in op.sorted_items():
        deg = sum(key) if isinstance(op, DerivativePolynomial) else sum(key[0]) + sum(key[1])
        groups.setdefault(deg, []).append((key, c * op.k_c ** deg))
    return [groups[d] for d in sorted(groups)], sorted(groups)


def _render_group_text(items, deg, two_sided):
    def mono(key):
        if two_sided:
            return f"{_mono_text(key[0])}<>{_mono_text(key[1])}"
        return _mono_text(key)

    fac = _common_factor([c for _, c in items])
    body = []
    if fac is not None:
        g, d = fac
        scale = float(g) * math.sqrt(d)
        for key, c in items:
            re_, im_ = round(c.real / scale), round(c.imag / scale)
            sign, coeff = _fmt_gauss(re_, im_)
            m = mono(key)
            text = f"{coeff} {m}" if coeff else m
            if coeff and m == "1":
                text = coeff
            body.append((sign, text))
        head = _fmt_factor(g, d)
    else:
        head = None
        for key, c in items:
            sign, coeff = _fmt_float(c)
            body.append((sign, f"{coeff} {mono(key)}"))
    inner = ""
    for i, (sign, text) in enumerate(body):
        if i == 0:
            inner = ("-" if sign == "-" else "") + text
        else:
            inner += f" {sign} {text}"
    out = f"({head})({inner})" if head else (f"({inner})" if len(body) > 1 or deg else inner)
    if deg:
        out += "/kc" if deg == 1 else f"/kc^{deg}"
    return out


def _divide_linear(poly, sigma):
    """Divide a {(a,b,c): coeff} polynomial by (x + sigma*i*y); None if not divisible."""
    root = -sigma * 1j  # x = root * y
    by_x = {}
    for (a, b, c), v in poly.items():
        by_x.setdefault(a, {})[(b, c)] = v
    top = max(by_x)
    quotient = {}
    carry = {}
    for a in range(top, 0, -1):
        # Q_{a-1} = R_a + root*y*Q_a
        row = dict(by_x.get(a, {}))
        for (b, c), v in carry.items():
            row[(b + 1, c)] = row.get((b + 1, c), 0.0) + root * v
        quotient[a - 1] = row
        carry = row
    remainder = dict(by_x.get(0, {}))
    for (b, c), v in carry.items():
        remainder[(b + 1, c)] = remainder.get((b + 1, c), 0.0) + root * v
    scale = max(abs(v) for v in poly.values())
    if any(abs(v) > 1e-10 * scale for v in remainder.values()):
        return None
    out = {}
    for a, row in quotient.items():
        for (b, c), v in row.items():
            if abs(v) > 1e-12 * scale:
                out[(a, b, c)] = v
    return out


def _factor_one_sided(terms):
    """Split off powers of (d_x + s i d_y) and d_z."""
    rest = dict(terms)
    zpow = min(k[2] for k in rest)
    if zpow:
        rest = {(a, b, c - zpow): v for (a, b, c), v in rest.items()}
    linear = None
    for sigma in (1, -1):
        n = 0
        while True:
            if all(sum(k) == 0 for k in rest):
                break
            q = _divide_linear(rest, sigma)
            if q is None:
                break
            rest = q
            n += 1
        if n:
            linear = (sigma, n)
            break
    return linear, zpow, rest


def _render_latex(op):
    two_sided = isinstance(op, TwoSidedOperator)
    groups, degrees = _group_by_degree(op)
    chunks = []
    for items, deg in zip(groups, degrees):
        terms = dict(items)
        linear = None
        zpow = 0
        if not two_sided:
            linear, zpow, terms = _factor_one_sided(terms)
        ordered = sorted(terms.items(), key=lambda kv: kv[0], reverse=True)
        fac = _common_factor([c for _, c in ordered])
        pieces = []
        if fac is not None:
            g, d = fac
            scale = float(g) * math.sqrt(d)
            head = _fmt_factor(g, d, latex=True)
        else:
            scale = 1.0
            head = None
        for key, c in ordered:
            if fac is not None:
                sign, coeff = _fmt_gauss(round(c.real / scale), round(c.imag / scale))
            else:
                sign, coeff = _fmt_float(c)
            if two_sided:
                mono = " ".join(filter(None, [_mono_latex(key[0], "bra"), _mono_latex(key[1], "ket")]))
            else:
                mono = _mono_latex(key)
            text = " ".join(filter(None, [coeff, mono])) or "1"
            pieces.append((sign, text))
        lead = ""
        if len(pieces) == 1 and ordered[0][0] == (0, 0, 0) and (linear or zpow):
            # constant remainder: fold it into the prefactor
            sign, text = pieces[0]
            lead = "-" if sign == "-" else ""
            if text != "1":
                head = f"{head} {text}" if head else text
            inner = ""
        else:
            inner = ""
            for i, (sign, text) in enumerate(pieces):
                inner = (("-" if sign == "-" else "") + text) if i == 0 else inner + f" {sign} {text}"
        factors = [head] if head else []
        if linear:
            sigma, n = linear
            sgn = "+" if sigma > 0 else "-"
            power = "" if n == 1 else f"^{{{n}}}"
            factors.append(rf"(\partial_x {sgn} i\partial_y){power}")
        if zpow:
            factors.append(r"\partial_z" if zpow == 1 else rf"\partial_z^{{{zpow}}}")
        if inner or not factors:
            factors.append(rf"\left({inner}\right)" if len(pieces) > 1 else (inner or "1"))
        chunk = lead + " ".join(factors)
        if deg:
            chunk = rf"{chunk} / k_c" if deg == 1 else rf"{chunk} / k_c^{{{deg}}}"
        chunks.append(chunk)
    return _join_signed(chunks) if chunks else "0"


def _join_signed(chunks):
    out = chunks[0]
    for chunk in chunks[1:]:
        out += f" - {chunk[1:]}" if chunk.startswith("-") else f" + {chunk}"
    return out


def _render_text(op):
    two_sided = isinstance(op, TwoSidedOperator)
    groups, degrees = _group_by_degree(op)
    if not groups:
        return "0"
    return _join_signed([_render_group_text(items, deg, two_sided)
                         for items, deg in zip(groups, degrees)])


def _render_machine(op):
    lines = [f"# kc={op.k_c!r}"]
    if isinstance(op, TwoSidedOperator):
        lines.append("# kind=two-sided")
        for (b, k), c in op.sorted_items():
            lines.append(f"bra:{b[0]},{b[1]},{b[2]} ket:{k[0]},{k[1]},{k[2]} {c.real!r} {c.imag!r}")
    else:
        lines.append("# kind=one-sided")
        for k, c in op.sorted_items():
            lines.append(f"ket:{k[0]},{k[1]},{k[2]} {c.real!r} {c.imag!r}")
    return "\n".join(lines) + "\n"


def render(op, format="text"):
    """Deterministic rendering as ``text``, ``latex`` or ``machine``.

    Coefficients are shown multiplied by ``k_c**order`` with the ``/kc^order``
    written out, so Table-I style entries read naturally.
    """
    if format == "text":
        return _render_text(op)
    if format == "latex":
        return _render_latex(op)
    if format == "machine":
        return _render_machine(op)
    raise ValueError(f"unknown format {format!r}")


_IDX = re.compile(r"^(bra|ket):(\d+),(\d+),(\d+)$")


def parse_machine(text):
    """Inverse of ``render(op, "machine")``."""
    k_c = None
    kind = None
    terms = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("kc="):
                k_c = float(body[3:])
            elif body.startswith("kind="):
                kind = body[5:]
            continue
        fields = line.split()
        try:
            if kind == "two-sided":
                if len(fields) != 4:
                    raise ValueError
                b, k = _IDX.match(fields[0]), _IDX.match(fields[1])
                if not (b and k and b.group(1) == "bra" and k.group(1) == "ket"):
                    raise ValueError
                key = (tuple(int(x) for x in b.groups()[1:]), tuple(int(x) for x in k.groups()[1:]))
            else:
                if len(fields) != 3:
                    raise ValueError
                k = _IDX.match(fields[0])
                if not (k and k.group(1) == "ket"):
                    raise ValueError
                key = tuple(int(x) for x in k.groups()[1:])
            value = complex(float(fields[-2]), float(fields[-1]))
        except (ValueError, AttributeError):
            raise ParseError(f"malformed operator line {line!r}", lineno) from None
        if key in terms:
            raise ParseError(f"duplicate term {key}", lineno)
        terms[key] = value
    if k_c is None:
        raise ParseError("missing '# kc=<value>' header", 1)
    cls = TwoSidedOperator if kind == "two-sided" else DerivativePolynomial
    return cls(terms, k_c, prune=False)
