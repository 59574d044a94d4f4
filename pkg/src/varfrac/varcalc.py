"""Residuals of the necessary optimality conditions for fractional variational problems.

Given a problem and a candidate (x, T), every Euler-Lagrange equation is
evaluated on a grid of interior points and every transversality condition
at its point, and the absolute values are collected in a ``ResidualReport``.

Composite functions such as t -> d3 L(t, x(t), D x(t)) are tabulated on
Chebyshev nodes and interpolated before the outer fractional operators act
on them. On [T, b] the difference of the two left derivatives, from a and
from T, is evaluated through the identity

    aD_t^beta Q - TD_t^beta Q = d/dt int_a^T k_beta(t, tau) Q(tau) dtau,

which only involves Q on [a, T]. The same cancellation gives the brackets
at t = b.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import BarycentricInterpolator, CubicHermiteSpline, CubicSpline

from . import fracops
from .errors import DomainError, InstabilityError, SpecError
from .fracops import CombinedSpec, OperatorSpec
from .functions import OrderFn, ScalarFn, as_scalar_fn
from .quad import DEFAULT, QuadConfig, QuadResult, SingularIntegrand, _legendre, diff_numeric, integrate_singular
from .specfun import rgamma

Kind = Literal["fundamental", "higher2", "delay", "isoperimetric", "holonomic", "herglotz"]
Terminal = Literal["free", "vertical", "horizontal", "curve"]

ARITY = {"fundamental": 3, "higher2": 4, "delay": 4, "isoperimetric": 3, "holonomic": 5, "herglotz": 4}
CHEB_NODES = 64
RK_STEPS = 2048
BLOWUP = 1e6
DEFAULT_TOL = 1e-4
GRID_POINTS = 9
QUAD_PANELS = 8


# --- Lagrangians -------------------------------------------------------------


@dataclass(frozen=True)
class Lagrangian:
    """A function of (t, *args) with optional analytic partials, indexed from 1 as in d_i L."""

    f: Callable
    arity: int
    partials: Mapping[int, Callable] = field(default_factory=dict)

    def __call__(self, *args):
        self._check(args)
        return np.asarray(self.f(*args), dtype=float)

    def _check(self, args) -> None:
        if len(args) != self.arity:
            raise SpecError(f"expected {self.arity} arguments, got {len(args)}")

    def partial(self, i: int, *args):
        self._check(args)
        if not 1 <= i <= self.arity:
            raise SpecError(f"no argument {i} in a function of {self.arity} arguments")
        fn = self.partials.get(i)
        if fn is not None:
            shape = np.broadcast_shapes(*(np.shape(v) for v in args))
            return np.broadcast_to(np.asarray(fn(*args), dtype=float), shape).astype(float)
        return _numeric_partial(self.f, i, args)

    @staticmethod
    def zero(arity: int) -> "Lagrangian":
        z = lambda *a: np.zeros(np.broadcast_shapes(*(np.shape(v) for v in a)))
        return Lagrangian(z, arity, {i: z for i in range(1, arity + 1)})


def _numeric_partial(f: Callable, i: int, args) -> np.ndarray:
    """Central difference in argument i with one Richardson step."""
    args = [np.asarray(v, dtype=float) for v in args]
    v = args[i - 1]
    h = 1e-3 * (1.0 + np.abs(v))

    def central(step):
        up = list(args)
        dn = list(args)
        up[i - 1] = v + step
        dn[i - 1] = v - step
        return (np.asarray(f(*up), float) - np.asarray(f(*dn), float)) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


# --- problems and candidates ---------------------------------------------------


@dataclass(frozen=True)
class VariationalProblem:
    """Problem data; only the fields belonging to ``kind`` may be set.

    ``combined`` is one CombinedSpec, or for ``higher2`` a pair (orders in
    (0, 1) and (1, 2)). ``phi`` is the terminal cost phi(t, x) (phi(t, x1, x2)
    for holonomic problems). ``uncounted`` names conditions that are reported
    but excluded from the pass/fail verdict.
    """

    kind: Kind
    combined: Union[CombinedSpec, tuple]
    L: Lagrangian
    phi: Optional[Lagrangian] = None
    sigma: Optional[float] = None
    history: Optional[ScalarFn] = None
    g: Optional[Lagrangian] = None
    psi: Optional[ScalarFn] = None
    C: Optional[float] = None
    terminal: Terminal = "free"
    curve: Optional[ScalarFn] = None
    x_a: Optional[Union[float, tuple]] = None
    z_a: float = 0.0
    uncounted: tuple = ()

    def __post_init__(self):
        if self.kind not in ARITY:
            raise SpecError(f"unknown problem kind {self.kind!r}")
        if self.L.arity != ARITY[self.kind]:
            raise SpecError(f"a {self.kind} Lagrangian takes {ARITY[self.kind]} arguments, not {self.L.arity}")
        specs = self.specs
        if self.kind == "higher2":
            if len(specs) != 2 or [s.n for s in specs] != [1, 2]:
                raise SpecError("higher-order problems need specs with n = 1 and n = 2")
        elif len(specs) != 1 or specs[0].n != 1:
            raise SpecError("a single first-order CombinedSpec is expected")
        if self.phi is not None and self.phi.arity != (3 if self.kind == "holonomic" else 2):
            raise SpecError("terminal cost has the wrong arity")
        if (self.sigma is not None or self.history is not None) != (self.kind == "delay"):
            raise SpecError("delay and history are set exactly for delay problems")
        if self.kind == "delay" and not (self.sigma and self.sigma > 0):
            raise SpecError("the delay sigma must be positive")
        if (self.g is not None) != (self.kind in ("isoperimetric", "holonomic")):
            raise SpecError("a constraint g is set exactly for isoperimetric and holonomic problems")
        if self.kind == "isoperimetric":
            if (self.psi is None) == (self.C is None):
                raise SpecError("give either psi(T) or the constant C")
            if self.g.arity != 3:
                raise SpecError("isoperimetric g takes (t, x, d)")
        elif self.psi is not None or self.C is not None:
            raise SpecError("psi and C belong to isoperimetric problems")
        if self.kind == "holonomic" and self.g.arity != 3:
            raise SpecError("holonomic g takes (t, x1, x2)")
        if self.terminal != "free" and self.kind != "fundamental":
            raise SpecError("terminal-set variants are available for the fundamental problem only")
        if (self.terminal == "curve") != (self.curve is not None):
            raise SpecError("a terminal curve is given exactly when terminal = 'curve'")

    @property
    def specs(self) -> tuple:
        return self.combined if isinstance(self.combined, tuple) else (self.combined,)

    @property
    def a(self) -> float:
        return self.specs[0].a

    @property
    def b(self) -> float:
        return self.specs[0].b

    @property
    def terminal_cost(self) -> Lagrangian:
        return self.phi or Lagrangian.zero(3 if self.kind == "holonomic" else 2)


@dataclass(frozen=True)
class Candidate:
    """x (a pair for holonomic problems), terminal time T and multiplier(s).

    ``lam`` is a constant (isoperimetric), a function of t (holonomic) or a
    pair (lambda0, lambda) for the abnormal isoperimetric case.
    """

    x: Union[ScalarFn, tuple]
    T: float
    lam: Union[None, float, Callable, tuple] = None
    z0: Optional[float] = None

    @property
    def components(self) -> tuple:
        xs = self.x if isinstance(self.x, tuple) else (self.x,)
        return tuple(as_scalar_fn(v) for v in xs)


@dataclass(frozen=True)
class Condition:
    name: str
    location: float
    value: float
    counted: bool = True

    @property
    def residual(self) -> float:
        return abs(self.value)


@dataclass
class ResidualReport:
    entries: list
    tol: float = DEFAULT_TOL

    def _max(self, prefix: str) -> float:
        vals = [e.residual for e in self.entries if e.name.startswith(prefix)]
        return max(vals) if vals else 0.0

    @property
    def el_interval_aT(self) -> float:
        return self._max("EL[a,T]")

    @property
    def el_interval_Tb(self) -> float:
        return self._max("EL[T,b]")

    @property
    def transversality(self) -> list:
        return [(e.name, e.residual) for e in self.entries if not e.name.startswith("EL")]

    @property
    def passed(self) -> bool:
        return all(e.residual <= self.tol for e in self.entries if e.counted)

    def get(self, name: str) -> Condition:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def write_csv(self, fh, digits: int = 15) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "location", "residual", "pass"])
        for e in self.entries:
            ok = "uncounted" if not e.counted else ("true" if e.residual <= self.tol else "false")
            w.writerow([e.name, f"{e.location:.{digits}g}", f"{e.residual:.{digits}g}", ok])


# --- shared operators ---------------------------------------------------------


def chebyshev_nodes(lo: float, hi: float, m: int = CHEB_NODES) -> np.ndarray:
    k = np.arange(m)
    return lo + 0.5 * (hi - lo) * (1.0 - np.cos((2 * k + 1) * math.pi / (2 * m)))


def tabulate(fn: Callable, lo: float, hi: float, m: int = CHEB_NODES) -> ScalarFn:
    """Polynomial interpolant of a vectorised ``fn`` on Chebyshev nodes of [lo, hi]."""
    nodes = chebyshev_nodes(lo, hi, m)
    vals = np.asarray(fn(nodes), dtype=float)
    if np.all(vals == 0.0):
        return ScalarFn.const(0.0)
    p = BarycentricInterpolator(nodes, vals)
    return ScalarFn(lambda t: p(np.asarray(t, float)), (), 2, (lo, hi))


def piecewise(first: ScalarFn, second: ScalarFn, at: float) -> ScalarFn:
    return ScalarFn(lambda t: np.where(np.asarray(t) <= at, first(t), second(t)))


def _left_spec(c: CombinedSpec, hi: float, family: str, order: OrderFn, lo: Optional[float] = None) -> OperatorSpec:
    return OperatorSpec("left", family, order, c.a if lo is None else lo, hi, "III", c.n, "bivariate")


def split_integral(c: CombinedSpec, Q, T: float, t: float, k: int = 0, cfg: QuadConfig = DEFAULT) -> float:
    """d^k/dt^k of int_a^T (t - tau)^(rho - 1) / Gamma(rho) Q(tau) dtau, rho = n - beta(t, tau), t >= T.

    This is aI_t^rho Q - TI_t^rho Q; its n-th derivative is aD_t^beta Q - TD_t^beta Q.
    """
    Q = as_scalar_fn(Q)
    rho = c.beta.complement(c.n)
    if t < T:
        raise DomainError(f"t = {t} lies before T = {T}")
    if t - T <= 1e-12 * (1.0 + abs(t)):
        if k:
            raise DomainError("derivatives of the split integral need t > T")
        return fracops.rl_integral(_left_spec(c, T, "rl_integral", rho), Q, T, cfg)
    zero = lambda tau: np.zeros_like(np.asarray(tau, float))

    def make(s, level):
        def f(tau):
            r = np.asarray(rho(s, tau))
            return (s - tau) ** (r - 1.0) * rgamma(r) * np.asarray(Q(tau))

        return integrate_singular(SingularIntegrand(f, zero, "right", (c.a, T), True), cfg, level)

    if k == 0:
        return make(t, None).value
    return fracops._fixed_level_derivative(make, t, k, (T, math.inf))


def _bracket_integral(
    c: CombinedSpec, which: Literal["right_to_T", "left_from_T"], Q, T: float, k: int, cfg: QuadConfig, hi: float
) -> float:
    """d^k/dt^k at t = T of tI_T^(n - alpha) Q (from below) or TI_t^(n - beta) Q (from above)."""
    Q = as_scalar_fn(Q)
    if which == "right_to_T":
        spec = OperatorSpec("right", "rl_integral", c.alpha.complement(c.n), c.a, T, kernel="bivariate")
        domain, probe = (c.a, T), T - 0.01 * (T - c.a)
    else:
        if hi <= T:
            return 0.0
        spec = OperatorSpec("left", "rl_integral", c.beta.complement(c.n), T, hi, kernel="bivariate")
        domain, probe = (T, hi), T + 0.01 * (hi - T)
    if k == 0:
        return fracops.rl_integral(spec, Q, T, cfg)
    level = fracops._rl_integral_at(spec, Q, probe, cfg, None).level
    g = lambda s: fracops._rl_integral_at(spec, Q, s, cfg, level).value
    return diff_numeric(g, T, k, domain=domain)


def _dual(c: CombinedSpec, T: float, Q, t: float, cfg: QuadConfig) -> float:
    return fracops.dual_rl_derivative(c, T, Q, t, cfg)


def _grid(lo: float, hi: float, grid) -> np.ndarray:
    if hi <= lo:
        return np.empty(0)
    if grid is None:
        grid = GRID_POINTS
    if isinstance(grid, (int, np.integer)):
        return lo + (hi - lo) * np.arange(1, grid + 1) / (grid + 1)
    pts = np.asarray(grid, dtype=float)
    return pts[(pts > lo) & (pts < hi)]


# --- evaluation along a candidate ------------------------------------------------


class _Path:
    """The candidate's values, combined derivatives and Lagrangian arguments."""

    def __init__(self, problem: VariationalProblem, cand: Candidate, cfg: QuadConfig, z: Optional[ScalarFn] = None):
        self.p = problem
        self.c = cand
        self.cfg = cfg
        self.xs = cand.components
        want = 2 if problem.kind == "holonomic" else 1
        if len(self.xs) != want:
            raise SpecError(f"a {problem.kind} candidate has {want} component(s)")
        if not problem.a < cand.T <= problem.b:
            raise DomainError(f"T = {cand.T} outside ({problem.a}, {problem.b}]")
        self.z = z
        self._memo: dict = {}

    def d(self, ts, comp: int = 0, spec: int = 0) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty(ts.shape)
        c = self.p.specs[spec]
        for j, t in enumerate(ts.flat):
            key = (comp, spec, float(t))
            v = self._memo.get(key)
            if v is None:
                v = fracops.combined_caputo(c, self.xs[comp], float(t), self.cfg)
                self._memo[key] = v
            out.flat[j] = v
        return out

    def delayed(self, ts) -> np.ndarray:
        s = np.asarray(ts, dtype=float) - self.p.sigma
        x = self.xs[0]
        past = s < self.p.a
        return np.where(past, self.p.history(np.where(past, s, self.p.a)), x(np.where(past, self.p.a, s)))

    def args(self, ts) -> tuple:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        kind = self.p.kind
        x = np.asarray(self.xs[0](ts), dtype=float)
        if kind in ("fundamental", "isoperimetric"):
            return ts, x, self.d(ts)
        if kind == "delay":
            return ts, x, self.d(ts), self.delayed(ts)
        if kind == "higher2":
            return ts, x, self.d(ts, 0, 0), self.d(ts, 0, 1)
        if kind == "holonomic":
            return ts, x, np.asarray(self.xs[1](ts), float), self.d(ts, 0), self.d(ts, 1)
        if self.z is None:
            raise SpecError("the z trajectory is needed for a Herglotz problem")
        return ts, x, self.d(ts), np.asarray(self.z(ts), dtype=float)

    def L(self, ts):
        return self.p.L(*self.args(ts))

    def dL(self, i: int, ts):
        return self.p.L.partial(i, *self.args(ts))

    def composite(self, fn: Callable, lo: float, hi: float) -> ScalarFn:
        return tabulate(lambda ts: fn(ts), lo, hi)

    def terminal_args(self, T: float) -> tuple:
        vals = tuple(float(x(T)) for x in self.xs)
        return (np.asarray(T),) + tuple(np.asarray(v) for v in vals)

    def phi_partial(self, i: int, T: float) -> float:
        return float(self.p.terminal_cost.partial(i, *self.terminal_args(T)))

    def boundary_conditions(self) -> list:
        p, a = self.p, self.p.a
        if p.kind == "delay":
            return [Condition("x(a)", a, float(self.xs[0](a)) - float(p.history(a)))]
        if p.x_a is None:
            return []
        out = []
        targets = p.x_a if isinstance(p.x_a, tuple) else (p.x_a,)
        if p.kind == "higher2":
            out.append(Condition("x(a)", a, float(self.xs[0](a)) - targets[0]))
            if len(targets) > 1:
                out.append(Condition("x'(a)", a, float(self.xs[0].deriv(1, a)) - targets[1]))
            return out
        for k, (x, v) in enumerate(zip(self.xs, targets)):
            name = "x(a)" if len(self.xs) == 1 else f"x{k + 1}(a)"
            out.append(Condition(name, a, float(x(a)) - v))
        return out


def _multipliers(cand: Candidate) -> tuple:
    lam = cand.lam
    if isinstance(lam, tuple):
        return float(lam[0]), lam[1]
    return 1.0, 0.0 if lam is None else lam


def _lam_fn(lam) -> Callable:
    if callable(lam):
        return lambda t: np.asarray(lam(np.asarray(t, float)), dtype=float)
    return lambda t: np.full_like(np.asarray(t, float), float(lam))


def _el_rows(name: str, pts: np.ndarray, fn: Callable) -> list:
    return [Condition(name, float(t), float(fn(float(t)))) for t in pts]


def _finish(entries: list, problem: VariationalProblem, tol: float) -> ResidualReport:
    for k, e in enumerate(entries):
        if e.name in problem.uncounted:
            entries[k] = Condition(e.name, e.location, e.value, False)
    return ResidualReport(entries, tol)


# --- first-order problems -----------------------------------------------------------


def _transversality_T(path: _Path, Q: ScalarFn, T: float, L_T: float, extra: float = 0.0) -> list:
    """The two conditions at t = T in the fundamental form (before any terminal-set variant)."""
    c = path.p.specs[0]
    cfg = path.cfg
    dphi1 = path.phi_partial(1, T)
    dphi2 = path.phi_partial(2, T)
    xT = float(path.xs[0].deriv(1, T))
    first = L_T + dphi1 + dphi2 * xT + extra
    bracket = c.gamma1 * _bracket_integral(c, "right_to_T", Q, T, 0, cfg, path.p.b) - c.gamma2 * _bracket_integral(
        c, "left_from_T", Q, T, 0, cfg, path.p.b
    )
    return [Condition("CT1", T, first), Condition("CT2", T, bracket + dphi2)]


def _ct_at_b(c: CombinedSpec, Q, T: float, b: float, cfg: QuadConfig, name: str = "CT3", scale: float = 1.0) -> Condition:
    """gamma2 [TI_t^(1-beta) Q - aI_t^(1-beta) Q] at t = b."""
    return Condition(name, b, -scale * c.gamma2 * split_integral(c, Q, T, b, 0, cfg))


def _fundamental(problem: VariationalProblem, cand: Candidate, grid, cfg: QuadConfig) -> list:
    path = _Path(problem, cand, cfg)
    c = problem.specs[0]
    a, b, T = problem.a, problem.b, cand.T
    Q = path.composite(lambda ts: path.dL(3, ts), a, T)
    rows = path.boundary_conditions()
    sigma = problem.sigma if problem.kind == "delay" else None

    def el1(t):
        v = float(path.dL(2, t)[0]) + _dual(c, T, Q, t, cfg)
        if sigma is not None and sigma < T - a and t <= T - sigma:
            v += float(path.dL(4, t + sigma)[0])
        return v

    rows += _el_rows("EL[a,T]", _grid(a, T, grid), el1)
    rows += _el_rows("EL[T,b]", _grid(T, b, grid), lambda t: c.gamma2 * split_integral(c, Q, T, t, 1, cfg))
    L_T = float(path.L(T)[0])
    rows += _terminal_set(path, Q, T, L_T)
    return rows


def _terminal_set(path: _Path, Q: ScalarFn, T: float, L_T: float) -> list:
    p, c, cfg = path.p, path.p.specs[0], path.cfg
    a, b = p.a, p.b
    ct1, ct2 = _transversality_T(path, Q, T, L_T)
    at_b = _ct_at_b(c, Q, T, b, cfg)
    if p.terminal == "free":
        return [ct1, ct2, at_b]
    if p.terminal == "vertical":
        if T < b:
            return [ct2, at_b]
        # T = b: the two brackets merge into one condition at b
        v = c.gamma1 * _bracket_integral(c, "right_to_T", Q, b, 0, cfg, b) - c.gamma2 * fracops.rl_integral(
            _left_spec(c, b, "rl_integral", c.beta.complement(1)), Q, b, cfg
        )
        return [Condition("CT-vertical", b, v + path.phi_partial(2, b))]
    bracket = ct2.value - path.phi_partial(2, T)  # gamma1 tI_T - gamma2 TI_t at T
    if p.terminal == "horizontal":
        xT = float(path.xs[0].deriv(1, T))
        v = L_T + path.phi_partial(1, T) - xT * bracket
        return [Condition("CT-horizontal", T, v), at_b]
    psi_d = float(p.curve.deriv(1, T))
    xT = float(path.xs[0].deriv(1, T))
    v = L_T + path.phi_partial(1, T) + path.phi_partial(2, T) * psi_d - (xT - psi_d) * bracket
    return [Condition("CT-curve", T, v), at_b]


def transversality_rewritten(problem: VariationalProblem, cand: Candidate, cfg: QuadConfig = DEFAULT) -> list:
    """The conditions at t = T in the rewritten form, with x'(T) folded into the first one."""
    if problem.kind != "fundamental":
        raise SpecError("the rewritten transversality form is stated for the fundamental problem")
    path = _Path(problem, cand, cfg)
    T = cand.T
    Q = path.composite(lambda ts: path.dL(3, ts), problem.a, T)
    ct1, ct2 = _transversality_T(path, Q, T, float(path.L(T)[0]))
    bracket = ct2.value - path.phi_partial(2, T)
    xT = float(path.xs[0].deriv(1, T))
    first = float(path.L(T)[0]) + path.phi_partial(1, T) - xT * bracket
    return [Condition("CT1", T, first), ct2]


def _isoperimetric(problem: VariationalProblem, cand: Candidate, grid, cfg: QuadConfig) -> list:
    path = _Path(problem, cand, cfg)
    c = problem.specs[0]
    a, b, T = problem.a, problem.b, cand.T
    lam0, lam = _multipliers(cand)
    lam = float(lam)
    g = problem.g
    dF = lambda i, ts: lam0 * path.dL(i, ts) - lam * g.partial(i, *path.args(ts))
    F = lambda ts: lam0 * path.L(ts) - lam * g(*path.args(ts))
    rows = path.boundary_conditions()
    if problem.psi is not None:
        # free upper limit in the constraint: everything is written for F
        QF = path.composite(lambda ts: dF(3, ts), a, T)
        rows += _el_rows("EL[a,T]", _grid(a, T, grid), lambda t: float(dF(2, t)[0]) + _dual(c, T, QF, t, cfg))
        rows += _el_rows("EL[T,b]", _grid(T, b, grid), lambda t: c.gamma2 * split_integral(c, QF, T, t, 1, cfg))
        extra = lam * float(problem.psi.deriv(1, T))
        ct1, ct2 = _transversality_T(path, QF, T, float(F(T)[0]), extra)
        return rows + [ct1, ct2, _ct_at_b(c, QF, T, b, cfg)]
    # constraint over the whole of [a, b]
    QL = path.composite(lambda ts: lam0 * path.dL(3, ts), a, T)
    Qg_lo = path.composite(lambda ts: g.partial(3, *path.args(ts)), a, T)
    Qg = Qg_lo if T >= b else piecewise(Qg_lo, path.composite(lambda ts: g.partial(3, *path.args(ts)), T, b), T)

    def el5(t):
        return float(dF(2, t)[0]) + _dual(c, T, QL, t, cfg) - lam * _dual(c, b, Qg, t, cfg)

    def el6(t):
        dg2 = float(g.partial(2, *path.args(t))[0])
        aDg = fracops.rl_derivative(_left_spec(c, b, "rl_derivative", c.beta), Qg, t, cfg)
        right = OperatorSpec("right", "rl_derivative", c.alpha, a, b, "III", 1, "bivariate")
        tDg = fracops.rl_derivative(right, Qg, t, cfg)
        return c.gamma2 * (split_integral(c, QL, T, t, 1, cfg) - lam * aDg) - lam * (dg2 + c.gamma1 * tDg)

    rows += _el_rows("EL[a,T]", _grid(a, T, grid), el5)
    rows += _el_rows("EL[T,b]", _grid(T, b, grid), el6)
    ct1, ct2 = _transversality_T(path, QL, T, lam0 * float(path.L(T)[0]))
    aIg = fracops.rl_integral(_left_spec(c, b, "rl_integral", c.beta.complement(1)), Qg, b, cfg)
    right_int = OperatorSpec("right", "rl_integral", c.alpha.complement(1), a, b, kernel="bivariate")
    tIg = fracops.rl_integral(right_int, Qg, b, cfg)
    third = -lam * c.gamma1 * tIg + c.gamma2 * (-split_integral(c, QL, T, b, 0, cfg) + lam * aIg)
    return rows + [ct1, ct2, Condition("CT3", b, third)]


def _holonomic(problem: VariationalProblem, cand: Candidate, grid, cfg: QuadConfig) -> list:
    path = _Path(problem, cand, cfg)
    c = problem.specs[0]
    a, b, T = problem.a, problem.b, cand.T
    lam = _lam_fn(0.0 if cand.lam is None else cand.lam)
    g = problem.g
    def garg(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return ts, np.asarray(path.xs[0](ts), float), np.asarray(path.xs[1](ts), float)
    Q4 = path.composite(lambda ts: path.dL(4, ts), a, T)
    Q5 = path.composite(lambda ts: path.dL(5, ts), a, T)
    rows = path.boundary_conditions()
    pa, pb = _grid(a, T, grid), _grid(T, b, grid)

    def lg(i, t):
        return float(lam(t) * g.partial(i, *garg(t))[0])

    rows += _el_rows("EL[a,T] x1", pa, lambda t: float(path.dL(2, t)[0]) + _dual(c, T, Q4, t, cfg) + lg(2, t))
    rows += _el_rows("EL[a,T] x2", pa, lambda t: float(path.dL(3, t)[0]) + _dual(c, T, Q5, t, cfg) + lg(3, t))
    rows += _el_rows("EL[T,b] x1", pb, lambda t: c.gamma2 * (split_integral(c, Q4, T, t, 1, cfg) + lg(2, t)))
    rows += _el_rows("EL[T,b] x2", pb, lambda t: split_integral(c, Q5, T, t, 1, cfg) + lg(3, t))
    ph = lambda i: path.phi_partial(i, T)
    first = float(path.L(T)[0]) + ph(1) + ph(2) * float(path.xs[0].deriv(1, T)) + ph(3) * float(path.xs[1].deriv(1, T))

    def bracket(Q):
        return c.gamma1 * _bracket_integral(c, "right_to_T", Q, T, 0, cfg, b) - c.gamma2 * _bracket_integral(
            c, "left_from_T", Q, T, 0, cfg, b
        )

    rows += [
        Condition("CT1", T, first),
        Condition("CT2", T, bracket(Q4) + ph(2)),
        Condition("CT3", T, bracket(Q5) + ph(3)),
        _ct_at_b(c, Q4, T, b, cfg, "CT4"),
        _ct_at_b(c, Q5, T, b, cfg, "CT5"),
    ]
    return rows


def _higher2(problem: VariationalProblem, cand: Candidate, grid, cfg: QuadConfig) -> list:
    path = _Path(problem, cand, cfg)
    specs = problem.specs
    a, b, T = problem.a, problem.b, cand.T
    Qs = [path.composite(lambda ts, i=i: path.dL(i + 3, ts), a, T) for i in range(2)]
    upper = [None, None]
    if T < b:
        upper = [path.composite(lambda ts, i=i: path.dL(i + 3, ts), T, b) for i in range(2)]
    rows = path.boundary_conditions()

    def el1(t):
        return float(path.dL(2, t)[0]) + sum(_dual(specs[i], T, Qs[i], t, cfg) for i in range(2))

    def el2(t):
        return sum(specs[i].gamma2 * split_integral(specs[i], Qs[i], T, t, i + 1, cfg) for i in range(2))

    rows += _el_rows("EL[a,T]", _grid(a, T, grid), el1)
    rows += _el_rows("EL[T,b]", _grid(T, b, grid), el2)

    def r_int(i, k):  # d^k tI_T^(i - alpha_i) Q_i at T
        return _bracket_integral(specs[i - 1], "right_to_T", Qs[i - 1], T, k, cfg, b)

    def l_int(i, k):  # d^k TI_t^(i - beta_i) Q_i at T
        if upper[i - 1] is None:
            return 0.0
        return _bracket_integral(specs[i - 1], "left_from_T", upper[i - 1], T, k, cfg, b)

    x1 = float(path.xs[0].deriv(1, T))
    rows.append(Condition("CT1", T, float(path.L(T)[0]) + path.phi_partial(1, T) + path.phi_partial(2, T) * x1))
    v = sum(
        specs[i - 1].gamma1 * (-1.0) ** (i - 1) * r_int(i, i - 1) - specs[i - 1].gamma2 * l_int(i, i - 1)
        for i in (1, 2)
    )
    rows.append(Condition("CT2", T, v + path.phi_partial(2, T)))
    j = 1
    v = sum(
        specs[i - 1].gamma1 * (-1.0) ** (i - 1 - j) * r_int(i, i - 1 - j)
        + specs[i - 1].gamma2 * (-1.0) ** (j + 1) * l_int(i, i - 1 - j)
        for i in range(j + 1, 3)
    )
    rows.append(Condition("CT3", T, v))
    for j in (0, 1):
        v = sum(
            specs[i - 1].gamma2 * (-1.0) ** (j + 1) * split_integral(specs[i - 1], Qs[i - 1], T, b, i - 1 - j, cfg)
            for i in range(j + 1, 3)
        )
        rows.append(Condition(f"CT-b{j}", b, v))
    return rows


# --- Herglotz problems ------------------------------------------------------------


def herglotz_z(
    problem: VariationalProblem, cand: Candidate, cfg: QuadConfig = DEFAULT, path: Optional[_Path] = None
) -> ScalarFn:
    """z' = L(t, x, D x, z), z(a) = z_a, by classical Runge-Kutta on a uniform grid."""
    if problem.kind != "herglotz":
        raise SpecError("z is defined for Herglotz problems only")
    path = path or _Path(problem, cand, cfg)
    a, b = problem.a, problem.b
    ts = np.linspace(a, b, RK_STEPS + 1)
    h = (b - a) / RK_STEPS
    x = path.xs[0]
    dvals = path.d(ts)
    dfun = CubicSpline(ts, dvals)
    L = problem.L

    def rhs(t, z):
        return float(L(np.asarray(t), np.asarray(float(x(t))), np.asarray(float(dfun(t))), np.asarray(z)))

    z = np.empty(ts.size)
    z[0] = problem.z_a if cand.z0 is None else cand.z0
    for k in range(RK_STEPS):
        t, zk = ts[k], z[k]
        k1 = rhs(t, zk)
        k2 = rhs(t + 0.5 * h, zk + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, zk + 0.5 * h * k2)
        k4 = rhs(t + h, zk + h * k3)
        z[k + 1] = zk + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not math.isfinite(z[k + 1]) or abs(z[k + 1]) > BLOWUP:
            raise InstabilityError(f"z exceeded {BLOWUP:g} at t = {ts[k + 1]:g}")
    zdot = np.asarray(L(ts, np.asarray(x(ts), float), dvals, z), dtype=float)
    spline = CubicHermiteSpline(ts, z, zdot)
    return ScalarFn(lambda t: spline(np.asarray(t, float)), (lambda t: spline(np.asarray(t, float), 1),), 1, (a, b))


def integrating_factor(problem: VariationalProblem, path: _Path) -> ScalarFn:
    """lambda(t) = exp(-int_a^t d4 L dtau) along the z trajectory."""
    a, b = problem.a, problem.b
    ts = np.linspace(a, b, RK_STEPS + 1)
    d4 = np.asarray(path.dL(4, ts), dtype=float)
    if np.all(d4 == 0.0):
        return ScalarFn.const(1.0)
    anti = CubicSpline(ts, d4).antiderivative()
    return ScalarFn(lambda t: np.exp(-anti(np.asarray(t, float))), (), 1, (a, b))


def herglotz_residual(
    problem: VariationalProblem,
    cand: Candidate,
    grid=None,
    tol: float = DEFAULT_TOL,
    cfg: QuadConfig = DEFAULT,
    z: Optional[ScalarFn] = None,
) -> ResidualReport:
    if problem.kind != "herglotz":
        raise SpecError("not a Herglotz problem")
    path = _Path(problem, cand, cfg)
    path.z = z or herglotz_z(problem, cand, cfg, path)
    c = problem.specs[0]
    a, b, T = problem.a, problem.b, cand.T
    lam = integrating_factor(problem, path)
    Q = path.composite(lambda ts: lam(ts) * path.dL(3, ts), a, T)
    rows = path.boundary_conditions()
    rows += _el_rows(
        "EL[a,T]", _grid(a, T, grid), lambda t: float(path.dL(2, t)[0] * lam(t)) + _dual(c, T, Q, t, cfg)
    )
    rows += _el_rows("EL[T,b]", _grid(T, b, grid), lambda t: c.gamma2 * split_integral(c, Q, T, t, 1, cfg))
    bracket = c.gamma1 * _bracket_integral(c, "right_to_T", Q, T, 0, cfg, b) - c.gamma2 * _bracket_integral(
        c, "left_from_T", Q, T, 0, cfg, b
    )
    rows += [Condition("CT1", T, bracket), _ct_at_b(c, Q, T, b, cfg, "CT2")]
    if T < b:
        rows.append(Condition("CT-L(T)", T, float(path.L(T)[0])))
    return _finish(rows, problem, tol)


# --- public entry points --------------------------------------------------------------


def el_residual(
    problem: VariationalProblem,
    cand: Candidate,
    grid=None,
    tol: float = DEFAULT_TOL,
    cfg: QuadConfig = DEFAULT,
) -> ResidualReport:
    """Residuals of the Euler-Lagrange equations and transversality conditions for ``cand``.

    ``grid`` is a number of interior points per interval or explicit points.
    """
    kind = problem.kind
    if kind == "herglotz":
        return herglotz_residual(problem, cand, grid, tol, cfg)
    if kind in ("fundamental", "delay"):
        rows = _fundamental(problem, cand, grid, cfg)
    elif kind == "isoperimetric":
        rows = _isoperimetric(problem, cand, grid, cfg)
    elif kind == "holonomic":
        rows = _holonomic(problem, cand, grid, cfg)
    else:
        rows = _higher2(problem, cand, grid, cfg)
    return _finish(rows, problem, tol)


def find_free_time(condition: Callable[[float], float], bracket: Sequence[float], tol: float = 1e-10) -> float:
    """Root of ``condition`` on ``bracket`` by bisection."""
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    flo, fhi = float(condition(lo)), float(condition(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise DomainError(f"no sign change on [{lo}, {hi}]: {flo:g}, {fhi:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = float(condition(mid))
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def functional_value(
    problem: VariationalProblem, cand: Candidate, grid: Optional[int] = None, cfg: QuadConfig = DEFAULT
) -> float:
    """int_a^T L dt + phi(T, x(T)) by composite Gauss-Legendre; z(T) for Herglotz problems."""
    if problem.kind == "herglotz":
        return float(herglotz_z(problem, cand, cfg)(cand.T))
    path = _Path(problem, cand, cfg)
    a, T = problem.a, cand.T
    panels = QUAD_PANELS if grid is None else int(grid)
    xg, wg = _legendre(16)
    edges = np.linspace(a, T, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    total = float(np.dot(weights, path.L(nodes)))
    return total + float(problem.terminal_cost(*path.terminal_args(T)))


def perturbed(problem: VariationalProblem, cand: Candidate, amplitude: float = 0.1) -> Candidate:
    """cand with amplitude * sin(pi (t - a)/(b - a)) added to its first component."""
    a, b = problem.a, problem.b
    w = math.pi / (b - a)
    x = cand.components[0]

    def bump(k):
        return lambda t: amplitude * w**k * np.sin(w * (np.asarray(t, float) - a) + 0.5 * k * math.pi)

    derivs = tuple(
        (lambda t, k=k: np.asarray(x.deriv(k, t)) + bump(k)(t)) for k in range(1, max(x.smoothness, 2) + 1)
    )
    new = ScalarFn(lambda t: np.asarray(x(t)) + bump(0)(t), derivs, x.smoothness, x.domain)
    xs = (new,) + cand.components[1:] if isinstance(cand.x, tuple) else new
    return Candidate(xs, cand.T, cand.lam, cand.z0)
