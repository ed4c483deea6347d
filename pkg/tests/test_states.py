import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisocontact.errors import CapExceeded
from anisocontact.states import HermiteGaussian3D, deriv_at_origin, evaluate
from anisocontact.trap import TrapConfig

from _oracles import momentum_moment_1d

widths = st.tuples(*[st.floats(0.3, 3.0)] * 3)
quanta = st.tuples(*[st.integers(0, 2)] * 3)


def test_widths_use_reduced_mass():
    psi = HermiteGaussian3D.from_trap(TrapConfig(1.0, 2.0, 0.5, 0, 1, 0))
    assert psi.widths == pytest.approx((math.sqrt(2), 1.0, 2.0))
    assert psi.n == (0, 1, 0)
    assert HermiteGaussian3D.from_trap(TrapConfig(), (1, 0, 2)).n == (1, 0, 2)


def test_evaluate_examples():
    w = (1.2, 0.7, 2.0)
    g = HermiteGaussian3D((0, 0, 0), w)
    assert evaluate(g, (0, 0, 0)) == pytest.approx(np.prod([(math.pi * l * l) ** -0.25 for l in w]))
    assert evaluate(HermiteGaussian3D((0, 0, 1), w), (0, 0, 0)) == 0.0
    r = (0.3, -0.4, 0.9)
    assert evaluate(g, r) == pytest.approx(evaluate(g, tuple(-x for x in r)))


@given(quanta, widths, st.tuples(*[st.floats(-2, 2)] * 3))
def test_parity(n, w, r):
    psi = HermiteGaussian3D(n, w)
    assert evaluate(psi, tuple(-x for x in r)) == pytest.approx(psi.parity * evaluate(psi, r), abs=1e-14)


def psi_1d(n, width, x):
    # the unit-width ground-state factors along y and z contribute pi^(-1/4) each at 0
    return evaluate(HermiteGaussian3D((n, 0, 0), (width, 1.0, 1.0)), (x, 0.0, 0.0)) * math.sqrt(math.pi)


@pytest.mark.parametrize("n", range(8))
@pytest.mark.parametrize("width", [0.6, 1.7])
def test_normalization_gauss_hermite(n, width):
    u, wts = np.polynomial.hermite.hermgauss(40)
    # int psi^2 dx with x = width * u; the Gauss-Hermite weight exp(-u^2) is divided back out
    total = width * sum(w * psi_1d(n, width, width * ui) ** 2 * math.exp(ui * ui) for ui, w in zip(u, wts))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_derivative_examples():
    w = (1.1, 0.9, 1.6)
    g = HermiteGaussian3D((0, 0, 0), w)
    psi0 = evaluate(g, (0, 0, 0))
    assert deriv_at_origin(g, (0, 0, 2)) == pytest.approx(-psi0 / w[2] ** 2, rel=1e-14)
    assert deriv_at_origin(g, (1, 0, 0)) == 0.0
    assert deriv_at_origin(g, (0, 0, 0)) == pytest.approx(psi0, rel=1e-14)


def test_derivative_cap():
    g = HermiteGaussian3D()
    deriv_at_origin(g, (6, 4, 2))
    with pytest.raises(CapExceeded):
        deriv_at_origin(g, (7, 4, 2))


@given(quanta, widths, st.tuples(*[st.integers(0, 4)] * 3))
def test_parity_zero(n, w, idx):
    psi = HermiteGaussian3D(n, w)
    if any((ni + a) % 2 for ni, a in zip(n, idx)):
        assert deriv_at_origin(psi, idx) == 0.0


@given(quanta, widths, st.lists(st.integers(0, 2), min_size=3, max_size=3).filter(lambda v: sum(v) <= 4))
@settings(max_examples=150, deadline=None)
def test_momentum_moment_oracle(n, w, idx):
    psi = HermiteGaussian3D(n, w)
    ref = 1.0 + 0j
    for ni, wi, a in zip(n, w, idx):
        ref *= momentum_moment_1d(ni, wi, a)
    got = deriv_at_origin(psi, tuple(idx))
    assert abs(got - ref) < 1e-8
    assert abs(ref.imag) < 1e-12


def test_momentum_moment_oracle_high_orders():
    psi = HermiteGaussian3D((2, 1, 0), (0.8, 1.3, 2.2))
    for idx in [(4, 3, 2), (2, 5, 4), (6, 1, 0)]:
        ref = 1.0
        for ni, wi, a in zip(psi.n, psi.widths, idx):
            ref *= momentum_moment_1d(ni, wi, a)
        assert deriv_at_origin(psi, idx) == pytest.approx(ref.real, rel=1e-10)


def test_state_validation():
    with pytest.raises(ValueError):
        HermiteGaussian3D((0, -1, 0))
    with pytest.raises(ValueError):
        HermiteGaussian3D((0, 0, 0), (1.0, 0.0, 1.0))
