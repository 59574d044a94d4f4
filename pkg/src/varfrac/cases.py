"""The worked variational examples, as (problem, candidate) pairs.

Where the source leaves the orders or the interval open, the choices are
recorded in the function docstrings.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import fracops
from .fracops import CombinedSpec
from .functions import OrderFn, ScalarFn
from .specfun import rgamma
from .varcalc import Candidate, Lagrangian, VariationalProblem, find_free_time, herglotz_z, _Path

HALF = 0.5


def _zeros(*args):
    return np.zeros(np.broadcast_shapes(*(np.shape(v) for v in args)))


def _first_order_pair(b: float) -> tuple[OrderFn, OrderFn]:
    """alpha(t, tau) = t^2/2 and beta(t, tau) = (tau + 1)/4."""
    alpha = OrderFn.univariate(lambda t: t**2 / 2.0, lambda t: np.asarray(t, float), "first")
    beta = OrderFn.univariate(lambda t: (t + 1.0) / 4.0, lambda t: np.full_like(np.asarray(t, float), 0.25), "second")
    return alpha, beta


def power_part(alpha: OrderFn, beta: OrderFn, b: float) -> Callable:
    """S(t) = t^(1-alpha)/(2 Gamma(2-alpha)) - (b-t)^(1-beta)/(2 Gamma(2-beta)), the combined derivative of t."""

    def S(t):
        t = np.asarray(t, dtype=float)
        al, be = alpha.bar(t), beta.bar(t)
        return t ** (1 - al) * rgamma(2 - al) / 2.0 - (b - t) ** (1 - be) * rgamma(2 - be) / 2.0

    return S


def _terminal_square() -> Lagrangian:
    """phi(t, x) = t^2."""
    return Lagrangian(lambda t, x: np.asarray(t, float) ** 2 + 0.0 * np.asarray(x), 2,
                      {1: lambda t, x: 2.0 * np.asarray(t, float) + 0.0 * np.asarray(x), 2: _zeros})


def fundamental_example() -> tuple[VariationalProblem, Candidate]:
    """L = 2 alpha - 1 + (d - S)^2 on [0, 10], T = 1, x = t."""
    b = 10.0
    alpha, beta = _first_order_pair(b)
    S = power_part(alpha, beta, b)
    L = Lagrangian(
        lambda t, x, d: 2.0 * alpha.bar(t) - 1.0 + (d - S(t)) ** 2,
        3,
        {2: _zeros, 3: lambda t, x, d: 2.0 * (d - S(t))},
    )
    c = CombinedSpec(alpha, beta, HALF, HALF, 0.0, b)
    return VariationalProblem("fundamental", c, L, x_a=0.0), Candidate(ScalarFn.poly([0.0, 1.0]), 1.0)


def higher_order_example() -> tuple[VariationalProblem, Candidate]:
    """L = d2^2 + (x - p)^2 - t - 1, phi = T^2, p(t) = 1 + 2t on [0, 2].

    Orders: (t + tau + 1)/6 for the first-order slot and one more than that
    for the second-order slot, equal on both sides.
    """
    b = 2.0
    o1 = OrderFn.bivariate(lambda t, tau: (t + tau + 1.0) / 6.0, 1)
    o2 = OrderFn.bivariate(lambda t, tau: 1.0 + (t + tau + 1.0) / 6.0, 2)
    specs = (CombinedSpec(o1, o1, HALF, HALF, 0.0, b, 1), CombinedSpec(o2, o2, HALF, HALF, 0.0, b, 2))
    p = lambda t: 1.0 + 2.0 * np.asarray(t, float)
    L = Lagrangian(
        lambda t, x, d1, d2: d2**2 + (x - p(t)) ** 2 - t - 1.0,
        4,
        {2: lambda t, x, d1, d2: 2.0 * (x - p(t)), 3: _zeros, 4: lambda t, x, d1, d2: 2.0 * d2 + 0.0 * t},
    )
    prob = VariationalProblem("higher2", specs, L, phi=_terminal_square(), x_a=(1.0, 2.0))
    return prob, Candidate(ScalarFn.poly([1.0, 2.0]), 1.0)


def delay_example() -> tuple[VariationalProblem, Candidate]:
    """f(t) = t^2, sigma = 1, T = 2 on [0, 3]; alpha = beta = (t + tau + 1)/8."""
    b = 3.0
    order = OrderFn.bivariate(lambda t, tau: (t + tau + 1.0) / 8.0)
    c = CombinedSpec(order, order, HALF, HALF, 0.0, b)
    f = ScalarFn.poly([0.0, 0.0, 1.0])
    memo: dict = {}

    def fhat(t):
        t = np.atleast_1d(np.asarray(t, float))
        out = np.empty(t.shape)
        for j, s in enumerate(t.flat):
            v = memo.get(float(s))
            if v is None:
                v = memo[float(s)] = fracops.combined_caputo(c, f, float(s))
            out.flat[j] = v
        return out

    L = Lagrangian(
        lambda t, x, d, xd: (d - fhat(t)) ** 2 + (x - f(t)) ** 2 + (xd - f(np.asarray(t) - 1.0)) ** 2 - t - 2.0,
        4,
        {
            2: lambda t, x, d, xd: 2.0 * (x - f(t)),
            3: lambda t, x, d, xd: 2.0 * (d - fhat(t)),
            4: lambda t, x, d, xd: 2.0 * (xd - f(np.asarray(t) - 1.0)),
        },
    )
    prob = VariationalProblem("delay", c, L, phi=_terminal_square(), sigma=1.0, history=f)
    return prob, Candidate(f, 2.0)


def iso_example(fixed: bool = False) -> tuple[VariationalProblem, Candidate]:
    """L = alpha + d^2 + S^2 and g = d S with lambda = 2, so F = alpha + (d - S)^2; x = t.

    With ``fixed`` the constraint runs over the whole interval (int g = C)
    and the interval is [0, 1] with T = b = 1; otherwise [0, 10], T = 1 and
    the constraint has the free upper limit psi(T) = int_0^T S^2. The first
    transversality condition cannot vanish and is reported uncounted.
    """
    b = 1.0 if fixed else 10.0
    alpha, beta = _first_order_pair(b)
    S = power_part(alpha, beta, b)
    L = Lagrangian(
        lambda t, x, d: alpha.bar(t) + d**2 + S(t) ** 2,
        3,
        {2: _zeros, 3: lambda t, x, d: 2.0 * d + 0.0 * t},
    )
    g = Lagrangian(lambda t, x, d: d * S(t), 3, {2: _zeros, 3: lambda t, x, d: S(t) + 0.0 * d})
    c = CombinedSpec(alpha, beta, HALF, HALF, 0.0, b)
    if fixed:
        prob = VariationalProblem("isoperimetric", c, L, g=g, C=0.0, x_a=0.0, uncounted=("CT1",))
    else:
        psi = ScalarFn(lambda t: np.full_like(np.asarray(t, float), np.nan), (lambda t: S(t) ** 2,), 1)
        prob = VariationalProblem("isoperimetric", c, L, g=g, psi=psi, x_a=0.0, uncounted=("CT1",))
    return prob, Candidate(ScalarFn.poly([0.0, 1.0]), 1.0, 2.0)


def holonomic_example() -> tuple[VariationalProblem, Candidate]:
    """L = alpha + (d1 - S)^2 + d2^2, g = x1 + x2 - t - 1 on [0, 10], T = 1; x1 = t, x2 = 1, lambda = 0.

    The first transversality condition reduces to alpha(T) = 0 and is reported uncounted.
    """
    b = 10.0
    alpha, beta = _first_order_pair(b)
    S = power_part(alpha, beta, b)
    L = Lagrangian(
        lambda t, x1, x2, d1, d2: alpha.bar(t) + (d1 - S(t)) ** 2 + d2**2,
        5,
        {
            2: _zeros,
            3: _zeros,
            4: lambda t, x1, x2, d1, d2: 2.0 * (d1 - S(t)),
            5: lambda t, x1, x2, d1, d2: 2.0 * d2 + 0.0 * t,
        },
    )
    ones = lambda t, x1, x2: np.ones(np.broadcast_shapes(np.shape(t), np.shape(x1)))
    g = Lagrangian(lambda t, x1, x2: x1 + x2 - t - 1.0, 3, {2: ones, 3: ones})
    c = CombinedSpec(alpha, beta, HALF, HALF, 0.0, b)
    prob = VariationalProblem("holonomic", c, L, g=g, x_a=(0.0, 1.0), uncounted=("CT1",))
    cand = Candidate((ScalarFn.poly([0.0, 1.0]), ScalarFn.const(1.0)), 1.0, lambda t: 0.0 * np.asarray(t, float))
    return prob, cand


def _herglotz_orders() -> CombinedSpec:
    """alpha(t, tau) = (t + 1)/5, beta(t, tau) = (tau + 2)/6 on [0, 3]."""
    alpha = OrderFn.univariate(lambda t: (t + 1.0) / 5.0, lambda t: np.full_like(np.asarray(t, float), 0.2), "first")
    beta = OrderFn.univariate(lambda t: (t + 2.0) / 6.0, lambda t: np.full_like(np.asarray(t, float), 1 / 6), "second")
    return CombinedSpec(alpha, beta, HALF, HALF, 0.0, 3.0)


def herglotz_example(which: int) -> tuple[VariationalProblem, Candidate]:
    """The three Herglotz examples on [0, 3]; for the first, T is the root of L(T) = 0 along the computed z."""
    c = _herglotz_orders()
    if which == 1:
        L = Lagrangian(
            lambda t, x, d, z: d**2 + z + t**2 - 1.0,
            4,
            {2: _zeros, 3: lambda t, x, d, z: 2.0 * d + 0.0 * t, 4: lambda t, x, d, z: np.ones(np.shape(t))},
        )
        prob = VariationalProblem("herglotz", c, L, x_a=1.0, z_a=0.0)
        cand = Candidate(ScalarFn.const(1.0), 1.5)
        return prob, Candidate(cand.x, herglotz_free_time(prob, cand, (1.0, 2.0)))
    if which == 2:
        L = Lagrangian(
            lambda t, x, d, z: (t - 1.0) * (x**2 + z**2 + 1.0),
            4,
            {2: lambda t, x, d, z: 2.0 * (t - 1.0) * x, 3: _zeros, 4: lambda t, x, d, z: 2.0 * (t - 1.0) * z},
        )
        return VariationalProblem("herglotz", c, L, x_a=0.0, z_a=0.0), Candidate(ScalarFn.const(0.0), 1.0)
    if which == 3:
        f = power_part(c.alpha, c.beta, c.b)
        L = Lagrangian(
            lambda t, x, d, z: (d - f(t)) ** 2 + t**2 - 1.0,
            4,
            {2: _zeros, 3: lambda t, x, d, z: 2.0 * (d - f(t)), 4: _zeros},
        )
        return VariationalProblem("herglotz", c, L, x_a=0.0, z_a=0.0), Candidate(ScalarFn.poly([0.0, 1.0]), 1.0)
    raise ValueError(f"no Herglotz example {which}")


def herglotz_free_time(prob: VariationalProblem, cand: Candidate, bracket) -> float:
    """Root of T -> L(T) along the candidate's z trajectory."""
    path = _Path(prob, cand, fracops.DEFAULT)
    path.z = herglotz_z(prob, cand, path=path)
    return find_free_time(lambda T: float(path.L(T)[0]), bracket)


EXAMPLES = {
    "fundamental": fundamental_example,
    "higher-order": higher_order_example,
    "delay": delay_example,
    "iso": iso_example,
    "holonomic": holonomic_example,
    "herglotz-1": lambda: herglotz_example(1),
    "herglotz-2": lambda: herglotz_example(2),
    "herglotz-3": lambda: herglotz_example(3),
}
