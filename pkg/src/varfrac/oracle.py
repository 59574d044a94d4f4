"""Closed-form reference values and identity checks for the operators.

These are the independent oracles used to test ``fracops`` and
``expansion``: power-function formulas, the relations linking the three
Caputo variants, and the vanishing of the derivatives at the initial point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import fracops
from .errors import DomainError, SpecError
from .fracops import OperatorSpec, side_integral
from .functions import OrderFn, ScalarFn, as_scalar_fn
from .quad import DEFAULT, QuadConfig
from .specfun import digamma_fn, gamma_fn, rgamma

Relation = Literal["eq1", "eq2", "eq1-right", "eq2-right"]


@dataclass(frozen=True)
class PowerCase:
    """x(t) = (t - a)^gamma on the left, (b - t)^gamma on the right."""

    gamma_exp: float
    side: Literal["left", "right"]
    variant: Literal["I", "II", "III"]
    order: OrderFn
    a: float = 0.0
    b: float = 1.0
    n: int = 1
    family: Literal["caputo", "rl_integral", "rl_derivative"] = "caputo"

    def __post_init__(self):
        if self.order.univariate_in is None:
            raise SpecError("power formulas need a single-variable order")
        if self.family == "caputo":
            if not self.gamma_exp > self.n - 1:
                raise DomainError(f"need gamma > n - 1 = {self.n - 1}")
            if self.variant != "III" and not self.gamma_exp > 0:
                raise DomainError("variants I and II need gamma > 0")
        elif not self.gamma_exp > -1:
            raise DomainError("need gamma > -1")
        if self.family != "caputo" and self.side != "left":
            raise SpecError("the Riemann-Liouville power formulas are only available on the left")
        if self.variant != "III" and self.n != 1:
            raise SpecError("variants I and II are first-order only")

    def function(self) -> ScalarFn:
        if self.side == "left":
            return ScalarFn.power(self.gamma_exp, self.a)
        return ScalarFn.power(self.gamma_exp, right_end=self.b)


def power_value(case: PowerCase, t: float) -> float:
    """The closed form for the operator applied to the power function."""
    if not case.a < t < case.b:
        raise DomainError(f"t = {t} outside ({case.a}, {case.b})")
    g = case.gamma_exp
    al = float(case.order.bar(t))
    d = (t - case.a) if case.side == "left" else (case.b - t)
    if case.family == "rl_integral":
        return float(gamma_fn(g + 1) * rgamma(g + al + 1)) * d ** (g + al)
    base = float(gamma_fn(g + 1) * rgamma(g - al + 1)) * d ** (g - al)
    variant = "I" if case.family == "rl_derivative" else case.variant
    if variant == "III":
        return base
    dal = float(case.order.dbar(t))
    bracket = math.log(d) - float(digamma_fn(g - al + 2))
    if variant == "I":
        bracket += float(digamma_fn(1 - al))
    corr = dal * float(gamma_fn(g + 1) * rgamma(g - al + 2)) * d ** (g - al + 1) * bracket
    return base - corr if case.side == "left" else base + corr


def relation_residual(
    which: Relation,
    x,
    order: OrderFn,
    t: float,
    a: float = 0.0,
    b: float = 1.0,
    cfg: QuadConfig = DEFAULT,
) -> float:
    """|LHS - RHS| of a relation between Caputo variants.

    eq1: type I = type III + alpha'/Gamma(2-alpha) int dist^{1-alpha} x' [1/(1-alpha) - ln dist]
    eq2: type I = type II -/+ alpha' Psi(1-alpha)/Gamma(1-alpha) int dist^{-alpha} (x - x(end))
    The right-sided forms flip the sign of the eq2 correction and keep eq1's.
    """
    if which not in ("eq1", "eq2", "eq1-right", "eq2-right"):
        raise SpecError(f"unknown relation {which!r}")
    x = as_scalar_fn(x)
    side = "right" if which.endswith("right") else "left"
    al = float(order.bar(t))
    dal = float(order.dbar(t))
    op = lambda v: fracops.caputo(OperatorSpec(side, "caputo", order, a, b, v, 1, "frozen"), x, t, cfg)
    lhs = op("I")
    expo = lambda tau: np.full_like(np.asarray(tau, float), 1.0 - al)
    if which.startswith("eq1"):
        def f(tau):
            tau = np.asarray(tau, float)
            dist = np.abs(t - tau)
            with np.errstate(divide="ignore"):
                lg = np.where(dist > 0, np.log(np.where(dist > 0, dist, 1.0)), 0.0)
            return np.asarray(x.deriv(1, tau)) * (1.0 / (1.0 - al) - lg)

        corr = dal * float(rgamma(2 - al)) * side_integral(side, a, b, t, expo, f, cfg).value
        rhs = op("III") + corr
    else:
        ref = float(x(a if side == "left" else b))
        expo0 = lambda tau: np.full_like(np.asarray(tau, float), -al)
        mom = side_integral(side, a, b, t, expo0, lambda tau: np.asarray(x(tau)) - ref, cfg).value
        corr = dal * float(digamma_fn(1 - al) * rgamma(1 - al)) * mom
        rhs = op("II") - corr if side == "left" else op("II") + corr
    return abs(lhs - rhs)


@dataclass(frozen=True)
class VanishReport:
    """Values of the three variants at distances 10^-k from the endpoint."""

    distances: tuple
    values: np.ndarray  # rows: distance, columns: variant I, II, III
    max_abs: float

    def decreasing(self) -> bool:
        m = np.max(np.abs(self.values), axis=1)
        return bool(np.all(np.diff(m) <= 1e-15))


def boundary_vanish_check(
    x,
    order: OrderFn,
    side: Literal["left", "right"] = "left",
    a: float = 0.0,
    b: float = 1.0,
    cfg: QuadConfig = DEFAULT,
) -> VanishReport:
    """Evaluate the three Caputo variants ever closer to the initial point."""
    x = as_scalar_fn(x)
    dists = (1e-2, 1e-3, 1e-4)
    rows = []
    for h in dists:
        t = a + h if side == "left" else b - h
        rows.append(
            [
                fracops.caputo(OperatorSpec(side, "caputo", order, a, b, v, 1, "frozen"), x, t, cfg)
                for v in ("I", "II", "III")
            ]
        )
    vals = np.array(rows)
    return VanishReport(dists, vals, float(np.max(np.abs(vals[-1]))))
