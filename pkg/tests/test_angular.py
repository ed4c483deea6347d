import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisocontact.angular import (
    AngularIndex,
    clebsch_gordan,
    legendre,
    reduced_c,
    spherical_bessel,
    wigner3j,
)

from _oracles import racah_3j


@pytest.mark.parametrize("args, expected", [
    ((0, 2, 2, 0, 0, 0), 1 / math.sqrt(5)),
    ((1, 1, 1, 0, 0, 0), 0.0),
    ((0, 0, 0, 0, 0, 0), 1.0),
])
def test_wigner3j_examples(args, expected):
    assert wigner3j(*args) == pytest.approx(expected, abs=1e-12)


def test_wigner3j_selection_rules_return_zero():
    assert wigner3j(1, 1, 1, 1, 1, 0) == 0.0
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner3j(2, 2, 2, 3, -3, 0) == 0.0


@pytest.mark.parametrize("args, expected", [
    ((0, 0, 2, 0, 2, 0), 1.0),
    ((0, 0, 0, 0, 0, 0), 1.0),
    ((1, 0, 1, 0, 0, 0), -1 / math.sqrt(3)),
])
def test_clebsch_gordan_examples(args, expected):
    assert clebsch_gordan(*args) == pytest.approx(expected, abs=1e-12)


def test_clebsch_gordan_matches_3j_phase():
    for j1, j2, J in itertools.product(range(4), repeat=3):
        for m1 in range(-j1, j1 + 1):
            for m2 in range(-j2, j2 + 1):
                M = m1 + m2
                if abs(M) > J:
                    continue
                ref = (-1) ** (j1 - j2 + M) * math.sqrt(2 * J + 1) * racah_3j(j1, j2, J, m1, m2, -M)
                assert clebsch_gordan(j1, m1, j2, m2, J, M) == pytest.approx(ref, abs=1e-13)


@pytest.mark.parametrize("args, expected", [
    ((0, 2, 2), 1.0),
    ((2, 0, 2), math.sqrt(5)),
    ((0, 2, 0), 0.0),
])
def test_reduced_c_examples(args, expected):
    assert reduced_c(*args) == pytest.approx(expected, abs=1e-12)


def test_3j_orthogonality():
    for j1, j2 in itertools.product(range(9), repeat=2):
        for j3 in range(abs(j1 - j2), min(j1 + j2, 8) + 1):
            for m3 in range(-j3, j3 + 1):
                total = sum(wigner3j(j1, j2, j3, m1, -m1 - m3, m3) ** 2
                            for m1 in range(-j1, j1 + 1))
                assert (2 * j3 + 1) * total == pytest.approx(1.0, abs=1e-12)


@st.composite
def valid_3j(draw, jmax=10):
    j1 = draw(st.integers(0, jmax))
    j2 = draw(st.integers(0, jmax))
    j3 = draw(st.integers(abs(j1 - j2), min(j1 + j2, jmax)))
    m1 = draw(st.integers(-j1, j1))
    lo, hi = max(-j2, -j3 - m1), min(j2, j3 - m1)
    m2 = draw(st.integers(lo, hi))
    return j1, j2, j3, m1, m2, -m1 - m2


@given(valid_3j())
@settings(max_examples=150, deadline=None)
def test_3j_column_symmetries(t):
    j1, j2, j3, m1, m2, m3 = t
    w = wigner3j(*t)
    sign = (-1) ** (j1 + j2 + j3)
    assert wigner3j(j2, j3, j1, m2, m3, m1) == pytest.approx(w, abs=1e-13)
    assert wigner3j(j3, j1, j2, m3, m1, m2) == pytest.approx(w, abs=1e-13)
    assert wigner3j(j2, j1, j3, m2, m1, m3) == pytest.approx(sign * w, abs=1e-13)
    assert wigner3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(sign * w, abs=1e-13)


@given(valid_3j())
@settings(max_examples=100, deadline=None)
def test_3j_against_racah_oracle(t):
    assert wigner3j(*t) == pytest.approx(racah_3j(*t), abs=1e-12)


def test_reduced_c_swap_consistency():
    for l, L, lp in itertools.product(range(7), range(0, 7), range(7)):
        assert reduced_c(l, L, lp) == pytest.approx((-1) ** (l - lp) * reduced_c(lp, L, l), abs=1e-13)


def test_spherical_bessel_examples():
    assert abs(spherical_bessel("j", 0, math.pi)) < 1e-14
    assert spherical_bessel("j", 1, 1.0) == pytest.approx(math.sin(1) - math.cos(1), rel=1e-13)
    assert abs(spherical_bessel("n", 0, math.pi / 2)) < 1e-14
    assert spherical_bessel("j", 0, 0.0) == 1.0
    assert spherical_bessel("j", 3, 0.0) == 0.0


def test_spherical_bessel_domain_errors():
    with pytest.raises(ValueError):
        spherical_bessel("n", 2, 0.0)
    with pytest.raises(ValueError):
        spherical_bessel("j", 2, -1.0)
    with pytest.raises(ValueError):
        spherical_bessel("y", 2, 1.0)


def test_spherical_bessel_against_mpmath():
    rng = np.random.default_rng(7)
    for _ in range(400):
        l = int(rng.integers(0, 13))
        x = float(10 ** rng.uniform(-3, 3))
        pref = mpmath.sqrt(mpmath.pi / (2 * x))
        rj = float(pref * mpmath.besselj(l + 0.5, x))
        rn = float(pref * mpmath.bessely(l + 0.5, x))
        envelope = math.hypot(rj, rn)
        for kind, ref in (("j", rj), ("n", rn)):
            scale = abs(ref) if x < l else envelope
            assert abs(spherical_bessel(kind, l, x) - ref) <= 1e-12 * scale, (kind, l, x)


@given(st.integers(1, 10), st.floats(0.1, 100.0))
@settings(max_examples=200, deadline=None)
def test_bessel_wronskian(l, x):
    lhs = (spherical_bessel("j", l, x) * spherical_bessel("n", l - 1, x)
           - spherical_bessel("j", l - 1, x) * spherical_bessel("n", l, x))
    assert lhs == pytest.approx(1 / x ** 2, rel=1e-10)


def test_legendre_examples():
    assert legendre(2, 1.0) == 1.0
    assert legendre(2, 0.0) == -0.5


@given(st.floats(-3.0, 3.0))
def test_legendre_explicit_polynomials(u):
    explicit = [1.0, u, (3 * u ** 2 - 1) / 2, (5 * u ** 3 - 3 * u) / 2,
                (35 * u ** 4 - 30 * u ** 2 + 3) / 8]
    for L, ref in enumerate(explicit):
        assert legendre(L, u) == pytest.approx(ref, abs=1e-13 * max(1.0, abs(u) ** L))


def test_angular_index():
    idx = AngularIndex(2, -1)
    assert tuple(idx) == (2, -1)
    assert idx == AngularIndex(2, -1)
    with pytest.raises(ValueError):
        AngularIndex(1, 2)
