"""Special functions against values frozen from mpmath at 30 digits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varfrac.errors import DomainError, NonConvergenceError, PoleError
from varfrac.specfun import MLParams, beta_fn, digamma_fn, gamma_fn, lgamma_abs, mittag_leffler, rgamma

GAMMA = [
    (0.1, 9.5135076986687313), (0.5, 1.772453850905516), (1.5, 0.88622692545275801),
    (2.5, 1.329340388179137), (3.7, 4.170651783796604), (7.25, 1155.3810139199897),
    (12.0, 39916800.0), (-0.5, -3.5449077018110321), (-1.5, 2.3632718012073547),
    (-2.3, -1.4471073942559181),
]
LGAMMA = [
    (0.1, 2.2527126517342059), (0.5, 0.57236494292470009), (3.7, 1.4280723266653881),
    (25.5, 56.389167643719947), (150.0, 600.00947055532743), (-2.3, 0.36956666345500804),
]
DIGAMMA = [
    (0.1, -10.423754940411076), (0.5, -1.9635100260214235), (1.0, -0.57721566490153286),
    (2.5, 0.70315664064524319), (6.5, 1.7929113303999329), (30.0, 3.3844381326855249),
    (-0.5, 0.036489973978576521), (-2.3, 3.3173231575618227),
]
BETA = [
    (0.5, 0.5, 3.1415926535897932), (2.0, 3.0, 0.083333333333333333),
    (0.3, 1.7, 2.7182554542156534), (4.5, 0.25, 2.5426012647681162),
]
ML = [
    (0.5, 1, 1.0, 5.0089800807622835), (0.5, 1, -2.0, 0.25539567631050574),
    (1.5, 1, 3.0, 5.4046107159010302), (0.8, 1.2, -1.0, 0.49122310471753181),
    (2, 1, 4.0, 3.7621956910836315), (0.3, 0.7, 0.5, 1.8013910788445657),
]


@pytest.mark.parametrize("t, want", GAMMA)
def test_gamma_matches_mpmath(t, want):
    assert gamma_fn(t) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("t, want", LGAMMA)
def test_lgamma_matches_mpmath(t, want):
    assert lgamma_abs(t) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("t, want", DIGAMMA)
def test_digamma_matches_mpmath(t, want):
    assert digamma_fn(t) == pytest.approx(want, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("t, u, want", BETA)
def test_beta_matches_mpmath(t, u, want):
    assert beta_fn(t, u) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("a, b, z, want", ML)
def test_mittag_leffler_matches_mpmath(a, b, z, want):
    assert mittag_leffler(MLParams(a, b), z) == pytest.approx(want, rel=1e-12)


def test_gamma_examples():
    assert gamma_fn(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)
    assert gamma_fn(0.5) ** 2 == pytest.approx(beta_fn(0.5, 0.5), rel=1e-13)


def test_digamma_examples():
    assert digamma_fn(2.0) == pytest.approx(digamma_fn(1.0) + 1.0, rel=1e-14)
    assert digamma_fn(1.5) == pytest.approx(digamma_fn(0.5) + 2.0, rel=1e-14)
    # derivative of ln Gamma at 1 by a central difference
    h = 1e-5
    fd = (lgamma_abs(1 + h) - lgamma_abs(1 - h)) / (2 * h)
    assert digamma_fn(1.0) == pytest.approx(fd, abs=1e-9)


def test_beta_examples():
    assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert beta_fn(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-14)
    assert beta_fn(2.0, 0.5) == pytest.approx(4 / 3, rel=1e-14)


def test_mittag_leffler_examples():
    assert mittag_leffler(MLParams(1.0, 1.0), 1.0) == pytest.approx(math.e, rel=1e-14)
    assert mittag_leffler(MLParams(2.0), 0.0) == 1.0
    # E_{1/2}(t) = exp(t^2) erfc(-t)
    t = 0.2
    assert mittag_leffler(MLParams(0.5), t) == pytest.approx(math.exp(t * t) * math.erfc(-t), rel=1e-13)


def test_vectorised_shapes():
    t = np.linspace(0.5, 3.0, 6).reshape(2, 3)
    assert gamma_fn(t).shape == (2, 3)
    assert isinstance(gamma_fn(2.0), float)


@pytest.mark.parametrize("fn", [gamma_fn, digamma_fn])
@pytest.mark.parametrize("pole", [0.0, -1.0, -4.0])
def test_poles_raise(fn, pole):
    with pytest.raises(PoleError):
        fn(pole)


def test_rgamma_is_zero_at_poles():
    assert rgamma(np.array([0.0, -1.0, -3.0])).tolist() == [0.0, 0.0, 0.0]
    assert rgamma(0.5) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)


def test_bad_parameters():
    with pytest.raises(DomainError):
        MLParams(0.0)
    with pytest.raises(DomainError):
        beta_fn(-0.5, 1.0)


def test_mittag_leffler_cap():
    with pytest.raises(NonConvergenceError):
        mittag_leffler(MLParams(0.5), 4.0, cap=5)


@given(st.floats(0.1, 20.0))
def test_gamma_recurrence(t):
    assert abs(gamma_fn(t + 1) - t * gamma_fn(t)) <= 1e-12 * gamma_fn(t + 1)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_beta_symmetric(t, u):
    assert abs(beta_fn(t, u) - beta_fn(u, t)) <= 1e-13 * beta_fn(t, u)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_beta_gamma_identity(t, u):
    lhs = beta_fn(t, u) * gamma_fn(t + u)
    rhs = gamma_fn(t) * gamma_fn(u)
    assert abs(lhs - rhs) <= 1e-11 * rhs


@given(st.floats(-2.0, 2.0))
def test_e1_is_exp(t):
    assert abs(mittag_leffler(MLParams(1.0, 1.0), t) - math.exp(t)) <= 1e-10


@given(st.floats(-3.0, 3.0))
def test_e2_is_cosh(t):
    assert mittag_leffler(MLParams(2.0), t * t) == pytest.approx(math.cosh(t), rel=1e-12)


@given(st.floats(0.2, 30.0))
def test_digamma_recurrence(t):
    assert digamma_fn(t + 1) == pytest.approx(digamma_fn(t) + 1 / t, rel=1e-12, abs=1e-13)
