"""Expansion of variable-order Caputo derivatives in integer derivatives and moments.

The operator is replaced by a finite sum of integer-order derivatives of x
at the evaluation point plus weighted moment integrals

    V_p(t) = int_a^t (tau - a)^(p - n) x'(tau) dtau      (left)
    W_p(t) = int_t^b (b - tau)^(p - n) x'(tau) dtau      (right)

which, unlike the original kernel, have no singularity. Each ``approx_*``
function returns the truncated sum together with the a-priori error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, SpecError
from .functions import OrderFn, ScalarFn, as_scalar_fn
from .quad import _legendre
from .specfun import digamma_fn, gamma_fn, rgamma

L_SAMPLES = 512
MOMENT_NODES = 48


@dataclass(frozen=True)
class ExpansionParams:
    n: int
    N: int
    order: OrderFn
    side: Literal["left", "right"] = "left"
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise SpecError("n must be at least 1")
        if self.N < self.n:
            raise SpecError(f"truncation N = {self.N} must be >= n = {self.n}")
        if self.order.univariate_in is None:
            raise SpecError("the expansion needs a single-variable order alpha(t)")
        if self.side not in ("left", "right"):
            raise SpecError(f"unknown side {self.side!r}")
        if not self.a < self.b:
            raise SpecError("need a < b")


@dataclass(frozen=True)
class ExpansionCoeffs:
    """First block over p = 1..n (A or C), second over p = n..N (B or D)."""

    first: np.ndarray
    second: np.ndarray
    side: str

    @property
    def A(self):
        return self.first if self.side == "left" else None

    @property
    def B(self):
        return self.second if self.side == "left" else None

    @property
    def C(self):
        return self.first if self.side == "right" else None

    @property
    def D(self):
        return self.second if self.side == "right" else None


@dataclass(frozen=True)
class MomentState:
    """values[j] is the moment of index n + j (V on the left, W on the right)."""

    values: np.ndarray
    n: int
    t: float

    def __getitem__(self, p: int) -> float:
        return float(self.values[p - self.n])


@dataclass(frozen=True)
class ErrorBound:
    L: dict  # p -> max |x^(p)| over the relevant interval (M on the right)
    value: float


def _alpha(params: ExpansionParams, t: float) -> float:
    al = float(params.order.bar(t))
    if not 0.0 < al < 1.0:
        raise DomainError(f"order {al:g} at t = {t} is outside (0, 1)")
    return al


def _dist(params: ExpansionParams, t: float) -> float:
    if not params.a < t < params.b:
        raise DomainError(f"t = {t} must be interior to ({params.a}, {params.b})")
    return t - params.a if params.side == "left" else params.b - t


def coeffs(params: ExpansionParams, t: float) -> ExpansionCoeffs:
    n, N = params.n, params.N
    al = _alpha(params, t)
    # Gamma(al - n + l) / (l - n + p)! grows by (al - n + l) / (l - n + p + 1) per step in l,
    # which keeps large N free of factorial overflow
    first = np.empty(n)
    for p in range(1, n + 1):
        l0 = n - p + 1
        r = float(gamma_fn(al - n + l0))
        tail = 0.0
        for l in range(l0, N + 1):
            tail += r
            r *= (al - n + l) / (l - n + p + 1)
        first[p - 1] = (1.0 + tail * float(rgamma(al - p))) * float(rgamma(p + 1 - al))
    second = np.empty(N - n + 1)
    r = float(gamma_fn(al))
    for p in range(n, N + 1):
        second[p - n] = r
        r *= (al - n + p) / (p - n + 1)
    second *= float(rgamma(1 - al) * rgamma(al))
    if params.side == "right":
        first = first * (-1.0) ** np.arange(1, n + 1)
        second = -second
    return ExpansionCoeffs(first, second, params.side)


def moments(params: ExpansionParams, x, t: float, p_max: int) -> MomentState:
    """V_p (left) or W_p (right) for p = n..p_max by Gauss-Legendre quadrature."""
    x = as_scalar_fn(x)
    n = params.n
    if p_max < n:
        raise SpecError("p_max must be >= n")
    lo, hi = (params.a, t) if params.side == "left" else (t, params.b)
    if hi <= lo:
        return MomentState(np.zeros(p_max - n + 1), n, t)
    xg, wg = _legendre(MOMENT_NODES)
    half = 0.5 * (hi - lo)
    tau = lo + half * (1.0 + xg)
    w = half * wg * np.asarray(x.deriv(1, tau))
    base = (tau - params.a) if params.side == "left" else (params.b - tau)
    powers = base[None, :] ** np.arange(0, p_max - n + 1)[:, None]
    return MomentState(powers @ w, n, t)


def derivative_bound(x: ScalarFn, p: int, lo: float, hi: float) -> float:
    """max |x^(p)| on [lo, hi]: dense sampling, then a bounded local search."""
    ts = np.linspace(lo, hi, L_SAMPLES)
    vals = np.abs(np.asarray(x.deriv(p, ts), dtype=float))
    k = int(np.argmax(vals))
    best = float(vals[k])
    if best == 0.0:
        return 0.0
    left, right = ts[max(k - 1, 0)], ts[min(k + 1, ts.size - 1)]
    if right > left:
        res = minimize_scalar(
            lambda s: -abs(float(x.deriv(p, s))), bounds=(left, right), method="bounded",
            options={"xatol": 1e-12 * max(1.0, hi - lo)},
        )
        best = max(best, -float(res.fun))
    return best


def _base_bound(params: ExpansionParams, x: ScalarFn, t: float, al: float, d: float, L: dict) -> float:
    n, N = params.n, params.N
    lo, hi = (params.a, t) if params.side == "left" else (t, params.b)
    L[n + 1] = derivative_bound(x, n + 1, lo, hi)
    m = n - al
    return L[n + 1] * math.exp(m * m + m) / (float(gamma_fn(n + 1 - al)) * N**m * m) * d ** (n + 1 - al)


def approx_typeIII(params: ExpansionParams, x, t: float) -> tuple[float, ErrorBound]:
    x = as_scalar_fn(x)
    d = _dist(params, t)
    al = _alpha(params, t)
    c = coeffs(params, t)
    n, N = params.n, params.N
    mom = moments(params, x, t, N)
    val = 0.0
    for p in range(1, n + 1):
        val += c.first[p - 1] * d ** (p - al) * float(x.deriv(p, t))
    for p in range(n, N + 1):
        val += c.second[p - n] * d ** (n - p - al) * mom[p]
    L: dict = {}
    bound = _base_bound(params, x, t, al, d, L)
    return val, ErrorBound(L, bound)


def _binom_weights(al: float, N: int) -> np.ndarray:
    """C(1 - alpha, p) for p = 0..N."""
    c = np.empty(N + 1)
    c[0] = 1.0
    for p in range(1, N + 1):
        c[p] = c[p - 1] * (1.0 - al - p + 1.0) / p
    return c


def _approx_corrected(params: ExpansionParams, x, t: float, lead: float) -> tuple[float, ErrorBound]:
    """Type III plus the alpha' correction with leading factor ``lead`` (1/(1-alpha) or Psi(2-alpha))."""
    if params.n != 1:
        raise SpecError("variants I and II are expanded for n = 1 only")
    x = as_scalar_fn(x)
    base, eb = approx_typeIII(params, x, t)
    d = _dist(params, t)
    al = _alpha(params, t)
    dal = float(params.order.dbar(t))
    n, N = params.n, params.N
    mom = moments(params, x, t, n + 2 * N)
    cw = _binom_weights(al, N)
    sgn = (-1.0) ** np.arange(N + 1)
    lg = math.log(d)
    s1 = sum(cw[p] * sgn[p] * d ** (-p) * mom[n + p] for p in range(N + 1))
    s2 = 0.0
    for p in range(N + 1):
        inner = sum(mom[n + p + r] / (r * d ** (p + r)) for r in range(1, N + 1))
        s2 += cw[p] * sgn[p] * inner
    corr = dal * d ** (1 - al) * float(rgamma(2 - al)) * ((lead - lg) * s1 + s2)
    lo, hi = (params.a, t) if params.side == "left" else (t, params.b)
    L = dict(eb.L)
    L[1] = derivative_bound(x, 1, lo, hi)
    m = 1.0 - al
    extra = (
        abs(dal) * L[1] * math.exp(m * m + m) / (float(gamma_fn(2 - al)) * N**m * m)
        * (abs(lead - lg) + 1.0 / N) * d ** (2 - al)
    )
    return base + corr, ErrorBound(L, eb.value + extra)


def approx_typeI(params: ExpansionParams, x, t: float) -> tuple[float, ErrorBound]:
    al = _alpha(params, t)
    return _approx_corrected(params, x, t, 1.0 / (1.0 - al))


def approx_typeII(params: ExpansionParams, x, t: float) -> tuple[float, ErrorBound]:
    al = _alpha(params, t)
    return _approx_corrected(params, x, t, float(digamma_fn(2 - al)))


def approx(params: ExpansionParams, x, t: float, variant: str = "III") -> tuple[float, ErrorBound]:
    fn = {"I": approx_typeI, "II": approx_typeII, "III": approx_typeIII}.get(variant)
    if fn is None:
        raise SpecError(f"unknown variant {variant!r}")
    return fn(params, x, t)
