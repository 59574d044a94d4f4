from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varfrac.errors import DomainError, SpecError
from varfrac.expansion import ExpansionParams, approx, coeffs, moments
from varfrac.fracops import OperatorSpec, caputo
from varfrac.functions import OrderFn, ScalarFn

ORDER_A = OrderFn.univariate(lambda t: (50 * t + 49) / 100, lambda t: np.full_like(t, 0.5))
ORDER_B = OrderFn.univariate(lambda t: (t + 5) / 10, lambda t: np.full_like(t, 0.1))
ORDERS = {"(50t+49)/100": ORDER_A, "(t+5)/10": ORDER_B}
GRID = np.linspace(0.1, 0.9, 9)


def direct(order, x, t, variant, side="left"):
    return caputo(OperatorSpec(side, "caputo", order, 0.0, 1.0, variant, 1, "frozen"), x, t)


def test_coefficient_example():
    order = OrderFn.const(0.3)
    c = coeffs(ExpansionParams(1, 1, order), 0.5)
    al = 0.3
    assert c.A[0] == pytest.approx((1 + math.gamma(al) / math.gamma(al - 1)) / math.gamma(2 - al), rel=1e-14)
    assert c.B[0] == pytest.approx(1 / math.gamma(1 - al), rel=1e-14)
    r = coeffs(ExpansionParams(1, 4, order, "right"), 0.5)
    left = coeffs(ExpansionParams(1, 4, order), 0.5)
    assert r.C[0] == pytest.approx(-left.A[0], rel=1e-15)
    assert np.all(np.isfinite(left.B)) and r.A is None


def test_moments():
    p = ExpansionParams(1, 6, ORDER_A)
    m = moments(p, ScalarFn.poly([0, 1]), 0.7, 6)
    for k in range(1, 7):
        assert m[k] == pytest.approx(0.7**k / k, rel=1e-13)
    assert np.all(moments(p, ScalarFn.const(2.0), 0.7, 6).values == 0.0)
    assert np.all(moments(p, ScalarFn.poly([0, 1]), 0.0, 6).values == 0.0)


@pytest.mark.parametrize("variant", ["I", "II", "III"])
def test_constants_map_to_zero(variant):
    val, eb = approx(ExpansionParams(1, 4, ORDER_B), ScalarFn.const(3.0), 0.5, variant)
    assert val == 0.0 and eb.value == 0.0


def test_linear_function_is_exact():
    x = ScalarFn.poly([1, 2])
    for name, order in ORDERS.items():
        for t in GRID:
            val, eb = approx(ExpansionParams(1, 2, order), x, t)
            assert eb.value == 0.0
            assert val == pytest.approx(direct(order, x, t, "III"), abs=1e-7)


@pytest.mark.parametrize("variant", ["I", "II"])
def test_constant_order_variants_equal_type_iii(variant):
    order = OrderFn.const(0.45)
    x = ScalarFn.poly([0, 1, 2, -1])
    for N in (2, 5):
        base, _ = approx(ExpansionParams(1, N, order), x, 0.6)
        val, _ = approx(ExpansionParams(1, N, order), x, 0.6, variant)
        assert val == pytest.approx(base, abs=1e-14)


@pytest.mark.parametrize("variant", ["I", "II", "III"])
@pytest.mark.parametrize("name", list(ORDERS))
@settings(max_examples=6)
@given(coeffs_=st.lists(st.integers(-4, 4), min_size=3, max_size=5))
def test_bound_dominates_error(variant, name, coeffs_):
    order = ORDERS[name]
    x = ScalarFn.poly([float(c) for c in coeffs_])
    for t in GRID:
        ref = direct(order, x, t, variant)
        for N in (2, 4, 6, 8):
            val, eb = approx(ExpansionParams(1, N, order), x, t, variant)
            assert abs(val - ref) <= eb.value + 1e-8


@pytest.mark.parametrize("variant", ["I", "II", "III"])
def test_named_setups(variant):
    x = ScalarFn.poly([0, 0, 1])
    for order in ORDERS.values():
        ref = direct(order, x, 0.5, variant)
        for N in (2, 4, 6):
            val, eb = approx(ExpansionParams(1, N, order), x, 0.5, variant)
            assert abs(val - ref) <= eb.value


@pytest.mark.parametrize("variant", ["I", "II", "III"])
def test_bound_decays(variant):
    x = ScalarFn(np.exp, (np.exp,) * 4, 99)
    for order in ORDERS.values():
        b = [approx(ExpansionParams(1, N, order), x, 0.6, variant)[1].value for N in range(2, 33)]
        assert all(q < p for p, q in zip(b, b[1:]))
        if variant == "III":
            # the printed bound scales as N^-(1 - alpha)
            m = 1 - float(order.bar(0.6))
            assert b[-1] / b[0] == pytest.approx((2 / 32) ** m, rel=1e-12)


@pytest.mark.parametrize("variant", ["I", "II", "III"])
def test_left_right_mirror(variant):
    a, b = 0.0, 1.0
    x = ScalarFn(np.exp, (np.exp,) * 4, 99)
    xm = ScalarFn(
        lambda t: np.exp(a + b - np.asarray(t)),
        tuple((lambda k: lambda t: (-1.0) ** k * np.exp(a + b - np.asarray(t)))(k) for k in range(1, 5)),
        99,
    )
    for order in ORDERS.values():
        for t in (0.3, 0.55, 0.8):
            right, _ = approx(ExpansionParams(1, 5, order, "right"), x, t, variant)
            left, _ = approx(ExpansionParams(1, 5, order.mirrored(a, b)), xm, a + b - t, variant)
            assert right == pytest.approx(left, abs=1e-8)


def test_right_side_against_direct():
    x = ScalarFn.poly([1, 0, -1, 1])
    for variant in ("I", "II", "III"):
        ref = direct(ORDER_B, x, 0.4, variant, "right")
        val, eb = approx(ExpansionParams(1, 6, ORDER_B, "right"), x, 0.4, variant)
        assert abs(val - ref) <= eb.value + 1e-8


def test_validation():
    with pytest.raises(SpecError):
        ExpansionParams(2, 1, ORDER_A)
    with pytest.raises(SpecError):
        ExpansionParams(1, 3, OrderFn.bivariate(lambda t, tau: 0.5 + 0 * t))
    with pytest.raises(DomainError):
        approx(ExpansionParams(1, 3, ORDER_A), ScalarFn.poly([0, 1]), 1.0)
    with pytest.raises(SpecError):
        approx(ExpansionParams(1, 3, ORDER_A), ScalarFn.poly([0, 1]), 0.5, "IV")
