from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varfrac.errors import DomainError, SpecError
from varfrac.fracops import (
    CombinedSpec,
    KernelParams,
    KernelSpec,
    OperatorSpec,
    caputo,
    caputo_partial,
    combined_caputo,
    dual_rl_derivative,
    generalized_ap,
    generalized_bp,
    generalized_kp,
    grunwald_letnikov,
    riesz_caputo,
    rl_derivative,
    rl_integral,
    verify_ibp,
)
from varfrac.functions import OrderFn, ScalarFn
from varfrac.specfun import gamma_fn

SQPI = math.sqrt(math.pi)


def lin(c0, c1):
    return OrderFn.univariate(lambda t: c0 + c1 * t, lambda t: np.full_like(t, c1))


WORKED_ORDER = OrderFn.bivariate(lambda t, tau: (t**2 + tau**2) / 4)
T4_ORDER = OrderFn.univariate(lambda t: t**2 / 2, lambda t: t)

# Regularized high-precision reference: substituting u = v^(1/alpha0) removes
# the varying-exponent endpoint singularity, then mpmath quad at 30 digits.
LFI_REF = 0.266945166832149
RFI_REF = 0.462579574317990
CC_REF = 0.715335130599627


def test_worked_integrals_against_precise_reference():
    x = ScalarFn.poly([0, 0, 1])
    left = OperatorSpec("left", "rl_integral", WORKED_ORDER, 0.0, 1.0)
    right = OperatorSpec("right", "rl_integral", WORKED_ORDER, 0.0, 1.0)
    assert rl_integral(left, x, 0.6) == pytest.approx(LFI_REF, abs=1e-10)
    assert rl_integral(right, x, 0.6) == pytest.approx(RFI_REF, abs=1e-10)


def test_worked_combined_against_precise_reference():
    # the published script divides by 0.4 rather than 4
    c = CombinedSpec(
        OrderFn.bivariate(lambda t, tau: (t**2 + tau**2) / 0.4),
        OrderFn.bivariate(lambda t, tau: (t + tau) / 3),
        0.8, 0.2, 0.0, 1.0,
    )
    assert combined_caputo(c, ScalarFn.poly([0, 1]), 0.4) == pytest.approx(CC_REF, abs=1e-10)


def test_rl_integral_of_t():
    spec = OperatorSpec("left", "rl_integral", OrderFn.const(0.5), 0.0, 2.0)
    assert rl_integral(spec, ScalarFn.poly([0, 1]), 1.0) == pytest.approx(1 / math.gamma(2.5), abs=1e-10)
    assert 1 / math.gamma(2.5) == pytest.approx(0.752253, abs=1e-6)


def test_rl_integral_outside_domain():
    spec = OperatorSpec("left", "rl_integral", OrderFn.const(0.5), 0.0, 1.0)
    with pytest.raises(DomainError):
        rl_integral(spec, ScalarFn.poly([0, 1]), 1.5)


@pytest.mark.parametrize("t0", [0.25, 0.5, 1.0])
def test_half_derivative_of_t(t0):
    spec = OperatorSpec("left", "rl_derivative", OrderFn.const(0.5), 0.0, 2.0)
    assert rl_derivative(spec, ScalarFn.poly([0, 1]), t0) == pytest.approx(2 * math.sqrt(t0) / SQPI, rel=1e-8)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_rl_derivative_of_constant(alpha):
    spec = OperatorSpec("left", "rl_derivative", OrderFn.const(alpha), 0.0, 1.0)
    want = 3.0 * 0.6 ** (-alpha) / math.gamma(1 - alpha)
    assert rl_derivative(spec, ScalarFn.const(3.0), 0.6) == pytest.approx(want, rel=1e-8)


def test_table_example_point():
    spec = OperatorSpec("left", "caputo", T4_ORDER, 0.0, 1.0)
    assert caputo(spec, ScalarFn.poly([0, 0, 0, 0, 1]), 0.5) == pytest.approx(0.082132144921157, abs=1e-12)


ORDERS = [OrderFn.const(0.4), lin(0.2, 0.5), T4_ORDER]


@pytest.mark.parametrize("variant", ["I", "II", "III"])
@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("k", range(len(ORDERS)))
def test_constant_annihilation(variant, side, k):
    spec = OperatorSpec(side, "caputo", ORDERS[k], 0.0, 1.0, variant)
    for t in (0.2, 0.5, 0.8):
        assert abs(caputo(spec, ScalarFn.const(7.0), t)) <= 1e-9


@pytest.mark.parametrize("side", ["left", "right"])
def test_variant_coincidence_at_constant_order(side):
    order = OrderFn.const(0.35)
    x = ScalarFn(np.exp, (np.exp,) * 4, 99)
    for t in np.linspace(0.05, 0.95, 20):
        ops = {v: caputo(OperatorSpec(side, "caputo", order, 0.0, 1.0, v), x, t) for v in ("I", "II", "III")}
        assert abs(ops["I"] - ops["III"]) <= 1e-7
        assert abs(ops["II"] - ops["III"]) <= 1e-7


@pytest.mark.parametrize("variant", ["I", "II", "III"])
def test_left_endpoint_vanishing(variant):
    x = ScalarFn.poly([0, 1, 1])
    spec = OperatorSpec("left", "caputo", lin(0.3, 0.4), 0.0, 1.0, variant)
    vals = [abs(caputo(spec, x, 10.0**-k)) for k in (2, 3, 4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2


@settings(max_examples=10)
@given(c1=st.floats(-2, 2), c2=st.floats(-2, 2), variant=st.sampled_from(["I", "II", "III"]), side=st.sampled_from(["left", "right"]))
def test_linearity(c1, c2, variant, side):
    x1 = ScalarFn.poly([1, 2, 0, 1])
    x2 = ScalarFn(np.sin, (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin), 99)
    combo = ScalarFn(
        lambda t: c1 * x1(t) + c2 * x2(t),
        tuple((lambda k: (lambda t: c1 * x1.deriv(k, t) + c2 * x2.deriv(k, t)))(k) for k in range(1, 5)),
        99,
    )
    spec = OperatorSpec(side, "caputo", lin(0.2, 0.5), 0.0, 1.0, variant)
    t = 0.45
    lhs = caputo(spec, combo, t)
    rhs = c1 * caputo(spec, x1, t) + c2 * caputo(spec, x2, t)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_linearity_integral_and_rl():
    x1, x2 = ScalarFn.poly([0, 1]), ScalarFn.poly([1, 0, 1])
    both = ScalarFn.poly([2, 3, 2])
    for fam in ("rl_integral", "rl_derivative"):
        spec = OperatorSpec("left", fam, WORKED_ORDER, 0.0, 1.0)
        assert rl_or(spec, both) == pytest.approx(3 * rl_or(spec, x1) + 2 * rl_or(spec, x2), abs=1e-9)


def rl_or(spec, x, t=0.55):
    return rl_integral(spec, x, t) if spec.family == "rl_integral" else rl_derivative(spec, x, t)


@pytest.mark.parametrize("order", [lin(0.2, 0.5), T4_ORDER, lin(0.7, -0.4)])
def test_rl_caputo_relation_when_x_vanishes_at_a(order):
    x = ScalarFn.poly([0, 1, -0.5, 0.25])
    for t in (0.3, 0.6, 0.9):
        rl = rl_derivative(OperatorSpec("left", "rl_derivative", order, 0.0, 1.0, "I"), x, t)
        cap = caputo(OperatorSpec("left", "caputo", order, 0.0, 1.0, "I"), x, t)
        assert abs(rl - cap) <= 1e-7


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_grunwald_letnikov_cross_check(alpha):
    x = ScalarFn(lambda t: np.exp(t / 2), tuple((lambda k: lambda t: 0.5**k * np.exp(t / 2))(k) for k in range(1, 5)), 99)
    for t in (0.5, 1.0):
        cap = caputo(OperatorSpec("left", "caputo", OrderFn.const(alpha), 0.0, 1.5), x, t)
        corr = float(x(0.0)) * t ** (-alpha) / math.gamma(1 - alpha)
        assert grunwald_letnikov(alpha, x, 0.0, t, 1e-4) == pytest.approx(cap + corr, abs=5e-3)


def test_grunwald_letnikov_examples():
    assert grunwald_letnikov(0.5, ScalarFn.poly([0, 1]), 0.0, 1.0, 1e-4) == pytest.approx(2 / SQPI, abs=1e-3)
    g = grunwald_letnikov(0.5, ScalarFn.poly([0, 0, 1]), 0.0, 0.8, 1e-4)
    assert g == pytest.approx(2 / math.gamma(2.5) * 0.8**1.5, abs=1e-3)
    with pytest.raises(DomainError):
        grunwald_letnikov(0.5, ScalarFn.poly([0, 1]), 0.0, 1.0, 0.3)


def test_partial_derivatives():
    spec = OperatorSpec("left", "caputo", T4_ORDER, 0.0, 1.0)
    assert caputo_partial(0, spec, lambda t1, t2: t2, (0.5, 0.3)) == pytest.approx(0.0, abs=1e-12)
    got = caputo_partial(0, spec, lambda t1, t2: t1**4, (0.5, 0.3), derivs=(lambda t1, t2: 4 * t1**3,))
    assert got == pytest.approx(0.082132144921157, abs=1e-10)
    order = lin(0.3, 0.5)
    u = lambda x, t: t**2 * np.sin(2 * np.pi * x)
    du = lambda x, t: 2 * t * np.sin(2 * np.pi * x)
    got = caputo_partial(1, OperatorSpec("left", "caputo", order, 0.0, 1.0), u, (0.2, 0.7), derivs=(du,))
    al = 0.3 + 0.5 * 0.7
    assert got == pytest.approx(math.sin(0.4 * math.pi) * 2 / math.gamma(3 - al) * 0.7 ** (2 - al), rel=1e-9)
    with pytest.raises(SpecError):
        caputo_partial(2, spec, u, (0.2, 0.7))


def test_combined_degenerate_and_closed_form():
    alpha = OrderFn.bivariate(lambda t, tau: (t**2 + tau**2) / 4)
    beta = OrderFn.bivariate(lambda t, tau: (t + tau) / 3)
    x = ScalarFn.poly([0, 1, 1])
    only_left = combined_caputo(CombinedSpec(alpha, beta, 1.0, 0.0, 0.0, 1.0), x, 0.4)
    assert only_left == pytest.approx(caputo(OperatorSpec("left", "caputo", alpha, 0.0, 1.0), x, 0.4), abs=1e-14)
    # orders alpha(t) on the left and beta(tau) on the right: for x = t each side is a power law
    a_t = lambda t, tau: 0.2 + 0.5 * np.asarray(t) + 0 * np.asarray(tau)
    b_tau = lambda t, tau: 0.3 + 0.4 * np.asarray(tau) + 0 * np.asarray(t)
    c = CombinedSpec(OrderFn.bivariate(a_t), OrderFn.bivariate(b_tau), 0.5, 0.5, 0.0, 1.0)
    t = 0.35
    at, bt = 0.2 + 0.5 * t, 0.3 + 0.4 * t
    # the right kernel carries beta(tau, t) = beta(t) at fixed t, and d/dt of x = t is 1 on both sides
    want = t ** (1 - at) / (2 * math.gamma(2 - at)) - (1 - t) ** (1 - bt) / (2 * math.gamma(2 - bt))
    assert combined_caputo(c, ScalarFn.poly([0, 1]), t) == pytest.approx(want, abs=1e-10)
    with pytest.raises(SpecError):
        CombinedSpec(alpha, beta, 0.0, 0.0, 0.0, 1.0)


def test_dual_rl():
    half = OrderFn.const(0.5)
    zero = ScalarFn.const(0.0)
    c = CombinedSpec(half, half, 0.5, 0.5, 0.0, 1.0)
    assert dual_rl_derivative(c, 1.0, zero, 0.4) == 0.0
    t = 0.4
    left = 2 * math.sqrt(t) / SQPI
    # tau = 1 - (1 - tau), each piece a right power law
    right = (1 - t) ** -0.5 / math.gamma(0.5) - (1 - t) ** 0.5 / math.gamma(1.5)
    x = ScalarFn.poly([0, 1])
    got = dual_rl_derivative(c, 1.0, x, t)
    assert got == pytest.approx(0.5 * left + 0.5 * right, rel=1e-8)
    only_left = dual_rl_derivative(CombinedSpec(half, half, 0.0, 1.0, 0.0, 1.0), 1.0, x, t)
    assert only_left == pytest.approx(left, rel=1e-8)
    with pytest.raises(DomainError):
        dual_rl_derivative(c, 1.5, x, t)


def test_riesz():
    assert riesz_caputo(0.5, ScalarFn.const(2.0), 0.0, 1.0, 0.3) == pytest.approx(0.0, abs=1e-12)
    near_one = riesz_caputo(0.999999, ScalarFn.poly([0, 1]), 0.0, 1.0, 0.5)
    assert near_one == pytest.approx(1.0, abs=1e-4)
    t = 0.5
    left = 2 / math.gamma(2.5) * t**1.5
    # right Caputo of t^2 = (1 - s)^2 - 2(1 - s) + 1 in powers of (1 - t)
    right = 2 / math.gamma(2.5) * (1 - t) ** 1.5 - 2 / math.gamma(1.5) * (1 - t) ** 0.5
    assert riesz_caputo(0.5, ScalarFn.poly([0, 0, 1]), 0.0, 1.0, t) == pytest.approx(0.5 * (left - right), abs=1e-10)


@pytest.mark.parametrize("alpha", [0.4, 0.8])
def test_generalized_kernels_reduce_to_rl(alpha):
    x = ScalarFn.poly([1, 2, 0.5])
    order = OrderFn.const(alpha)
    for t in (0.3, 0.7):
        kp = generalized_kp(KernelSpec.rl(alpha, KernelParams(0.0, 1.0, 1.0, 0.0)), x, t)
        assert kp == pytest.approx(rl_integral(OperatorSpec("left", "rl_integral", order, 0.0, 1.0), x, t), abs=1e-11)
        kp = generalized_kp(KernelSpec.rl(alpha, KernelParams(0.0, 1.0, 0.0, 1.0)), x, t)
        assert kp == pytest.approx(rl_integral(OperatorSpec("right", "rl_integral", order, 0.0, 1.0), x, t), abs=1e-11)
    assert generalized_kp(KernelSpec.rl(alpha, KernelParams(0.0, 1.0, 0.0, 0.0)), x, 0.5) == 0.0


def test_generalized_ap_bp():
    # with the RL kernel of order 1 - alpha, A_P is the RL derivative and B_P the Caputo derivative
    alpha = 0.4
    k = KernelSpec.rl(1 - alpha, KernelParams(0.0, 1.0, 1.0, 0.0))
    x = ScalarFn.poly([1, 2, 0.5])
    order = OrderFn.const(alpha)
    t = 0.6
    assert generalized_ap(k, x, t) == pytest.approx(rl_derivative(OperatorSpec("left", "rl_derivative", order, 0.0, 1.0), x, t), rel=1e-8)
    assert generalized_bp(k, x, t) == pytest.approx(caputo(OperatorSpec("left", "caputo", order, 0.0, 1.0), x, t), rel=1e-10)


IBP_CASES = [
    (OrderFn.const(0.5), ScalarFn.poly([0, 1, 1]), ScalarFn.poly([1, 0, 1]), 1),
    (OrderFn.bivariate(lambda t, tau: (t + tau + 1) / 6), ScalarFn.poly([1, 2]), ScalarFn.poly([0, 0, 1]), 1),
    (OrderFn.univariate(lambda t: (t + 5) / 10, lambda t: np.full_like(t, 0.1)),
     ScalarFn(np.sin, (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin), 99), ScalarFn.poly([2, -1]), 1),
    (OrderFn.bivariate(lambda t, tau: 1 + (t + tau + 1) / 6, n=2), ScalarFn.poly([0, 0, 1, 1]), ScalarFn.poly([1, -2, 1]), 2),
    (OrderFn.const(1.4, n=2), ScalarFn(np.exp, (np.exp,) * 4, 99), ScalarFn.poly([0, 1, -1]), 2),
]


@pytest.mark.parametrize("case", range(len(IBP_CASES)))
def test_integration_by_parts_battery(case):
    order, x, y, n = IBP_CASES[case]
    assert verify_ibp(order, x, y, n) <= 1e-6


def test_integration_by_parts_examples():
    vanish = ScalarFn.poly([0, 1, -1])
    assert verify_ibp(OrderFn.const(0.3), vanish, ScalarFn.poly([1, 1]), 1) <= 1e-6
    order = OrderFn.bivariate(lambda t, tau: 0.5 + 0.2 * np.asarray(tau) + 0 * np.asarray(t))
    assert verify_ibp(order, vanish, ScalarFn.const(1.0), 1) <= 1e-6
    assert verify_ibp(order, vanish, ScalarFn.const(0.0), 1) == pytest.approx(0.0, abs=1e-12)


def test_spec_validation():
    with pytest.raises(SpecError):
        OperatorSpec("left", "caputo", OrderFn.const(1.4, n=2), 0.0, 1.0)
    with pytest.raises(SpecError):
        OperatorSpec("left", "caputo", OrderFn.const(0.4), 1.0, 0.0)
    with pytest.raises(SpecError):
        caputo(OperatorSpec("left", "caputo", WORKED_ORDER, 0.0, 1.0, "I"), ScalarFn.poly([0, 1]), 0.5)
