"""Function containers shared by every module.

``ScalarFn`` wraps a vectorised real function of one variable together
with whatever derivatives are known in closed form. ``OrderFn`` wraps a
fractional order alpha(t, tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .errors import DomainError, SmoothnessError, SpecError

Univariate = Optional[Literal["first", "second"]]


def _as_array_like(value, t) -> np.ndarray:
    """Broadcast a callable's result to the shape of its input."""
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(np.asarray(value, dtype=float), t.shape).astype(float)


@dataclass(frozen=True)
class ScalarFn:
    """A real function of one variable.

    ``derivs[k-1]`` is the k-th derivative when known analytically. Up to
    ``smoothness`` derivatives may be requested; missing ones fall back to
    numerical differentiation (orders one and two only).
    """

    f: Callable
    derivs: tuple = ()
    smoothness: int = 2
    domain: tuple[float, float] = (-math.inf, math.inf)
    name: str = ""

    def __call__(self, t):
        out = _as_array_like(self.f(np.asarray(t, dtype=float)), t)
        return float(out) if out.ndim == 0 else out

    def deriv(self, k: int, t):
        if k == 0:
            return self(t)
        if k <= len(self.derivs):
            out = _as_array_like(self.derivs[k - 1](np.asarray(t, dtype=float)), t)
            return float(out) if out.ndim == 0 else out
        if k > self.smoothness:
            raise SmoothnessError(
                f"derivative of order {k} requested from a C^{self.smoothness} function"
            )
        if k > 2:
            raise SmoothnessError(f"no analytic derivative of order {k} supplied")
        from .quad import diff_numeric

        lower = self.deriv_fn(k - 1) if k > 1 else self
        ts = np.asarray(t, dtype=float)
        vals = np.array([diff_numeric(lower, float(s), 1, domain=self.domain) for s in ts.ravel()])
        return float(vals[0]) if ts.ndim == 0 else vals.reshape(ts.shape)

    def deriv_fn(self, k: int) -> "ScalarFn":
        """The k-th derivative as a ScalarFn of its own."""
        if k == 0:
            return self
        return ScalarFn(
            lambda t, k=k: self.deriv(k, t),
            derivs=tuple(
                (lambda t, j=j: self.derivs[j](t)) for j in range(k, len(self.derivs))
            ),
            smoothness=max(self.smoothness - k, 0),
            domain=self.domain,
            name=f"{self.name}^({k})" if self.name else "",
        )

    def shifted(self, c: float) -> "ScalarFn":
        """x - c, same derivatives."""
        return ScalarFn(lambda t: self(t) - c, self.derivs, self.smoothness, self.domain)

    def scaled(self, c: float) -> "ScalarFn":
        return ScalarFn(
            lambda t: c * np.asarray(self(t)),
            tuple((lambda t, d=d: c * np.asarray(d(t))) for d in self.derivs),
            self.smoothness,
            self.domain,
        )

    @staticmethod
    def const(c: float) -> "ScalarFn":
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return ScalarFn(lambda t: np.full_like(np.asarray(t, dtype=float), c), (zero,) * 4, 99)

    @staticmethod
    def poly(coeffs: Sequence[float]) -> "ScalarFn":
        """Polynomial with coefficients in increasing degree."""
        p = np.polynomial.Polynomial(coeffs)
        ds = []
        q = p
        for _ in range(6):
            q = q.deriv()
            ds.append(q)
        return ScalarFn(p, tuple(ds), 99, name=f"poly{tuple(coeffs)}")

    @staticmethod
    def power(gamma: float, a: float = 0.0, right_end: Optional[float] = None) -> "ScalarFn":
        """(t - a)^gamma, or (b - t)^gamma when ``right_end`` is given."""
        sign = 1.0
        if right_end is None:
            base = lambda t: np.asarray(t, dtype=float) - a
            dom = (a, math.inf)
        else:
            base = lambda t: right_end - np.asarray(t, dtype=float)
            sign = -1.0
            dom = (-math.inf, right_end)

        def make(k):
            if float(gamma).is_integer() and k > gamma:
                return lambda t: np.zeros_like(base(t))
            c = math.prod(gamma - j for j in range(k)) * sign**k
            return lambda t: c * np.power(np.maximum(base(t), 0.0), gamma - k)

        return ScalarFn(make(0), tuple(make(k) for k in range(1, 5)), 4, dom, name=f"power{gamma}")

    @staticmethod
    def wrap(f: Callable, smoothness: int = 2, domain=(-math.inf, math.inf)) -> "ScalarFn":
        return ScalarFn(f, (), smoothness, domain)


def as_scalar_fn(x) -> ScalarFn:
    if isinstance(x, ScalarFn):
        return x
    if callable(x):
        return ScalarFn.wrap(x)
    return ScalarFn.const(float(x))


@dataclass(frozen=True)
class OrderFn:
    """A fractional order alpha(t, tau) with values in (range_low, range_high).

    ``univariate_in`` declares that only one argument matters: "first" for
    alpha(t, tau) = abar(t), "second" for alpha(t, tau) = abar(tau). In both
    cases ``bar(t)`` returns abar(t). ``derivative`` is abar'(t).
    """

    eval: Callable
    range_low: int = 0
    range_high: int = 1
    univariate_in: Univariate = None
    derivative: Optional[Callable] = None
    name: str = field(default="", compare=False)

    def __call__(self, t, tau):
        t = np.asarray(t, dtype=float)
        tau = np.asarray(tau, dtype=float)
        out = np.asarray(self.eval(t, tau), dtype=float)
        out = np.broadcast_to(out, np.broadcast_shapes(t.shape, tau.shape)).astype(float)
        return float(out) if out.ndim == 0 else out

    @property
    def n(self) -> int:
        return self.range_high

    def bar(self, t):
        if self.univariate_in is None:
            raise SpecError("single-variable order requested from a bivariate OrderFn")
        return self(t, t)

    def dbar(self, t):
        if self.derivative is None:
            raise SpecError("order derivative alpha'(t) is required but was not supplied")
        out = _as_array_like(self.derivative(np.asarray(t, dtype=float)), t)
        return float(out) if out.ndim == 0 else out

    def check(self, values, what: str = "order") -> None:
        v = np.asarray(values)
        if np.any(v < self.range_low) or np.any(v > self.range_high):
            bad = v[(v < self.range_low) | (v > self.range_high)].flat[0]
            raise DomainError(
                f"{what} value {bad:g} outside [{self.range_low}, {self.range_high}]"
            )

    def as_bivariate(self) -> "OrderFn":
        """Same values, with the single-variable declaration dropped."""
        return OrderFn(self.eval, self.range_low, self.range_high, None, self.derivative, self.name)

    def complement(self, k: int) -> "OrderFn":
        """k - alpha(t, tau), used for the integrals of order 1 - alpha."""
        return OrderFn(
            lambda t, tau: k - np.asarray(self.eval(t, tau)),
            max(k - self.range_high, 0),
            k - self.range_low,
            self.univariate_in,
            None if self.derivative is None else (lambda t: -np.asarray(self.derivative(t))),
        )

    def mirrored(self, a: float, b: float) -> "OrderFn":
        """alpha(a + b - t): the order seen after reflecting the interval."""
        f = lambda t, tau: self.eval(a + b - np.asarray(t), a + b - np.asarray(tau))
        d = None if self.derivative is None else (lambda t: -np.asarray(self.derivative(a + b - np.asarray(t))))
        return OrderFn(f, self.range_low, self.range_high, self.univariate_in, d)

    @staticmethod
    def const(c: float, n: int = 1) -> "OrderFn":
        return OrderFn(
            lambda t, tau: np.full(np.broadcast_shapes(np.shape(t), np.shape(tau)), float(c)),
            n - 1,
            n,
            "first",
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            name=f"const{c}",
        )

    @staticmethod
    def univariate(
        fn: Callable,
        deriv: Optional[Callable] = None,
        which: Literal["first", "second"] = "first",
        n: int = 1,
    ) -> "OrderFn":
        if which == "first":
            ev = lambda t, tau: fn(np.broadcast_arrays(np.asarray(t, float), np.asarray(tau, float))[0])
        else:
            ev = lambda t, tau: fn(np.broadcast_arrays(np.asarray(tau, float), np.asarray(t, float))[0])
        return OrderFn(ev, n - 1, n, which, deriv)

    @staticmethod
    def bivariate(fn: Callable, n: int = 1) -> "OrderFn":
        return OrderFn(fn, n - 1, n, None, None)
