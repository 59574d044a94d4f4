"""Weakly singular quadrature and finite-difference differentiation.

``integrate_singular`` evaluates

    int_lo^hi f(tau) * d(tau)^p(tau) dtau,

where d is the distance to the singular end. Cells shrink geometrically
toward that end; the innermost cell uses Gauss-Jacobi nodes carrying the
endpoint power, the others Gauss-Legendre panels. Successive levels add
cells and nodes, and the reported error is the difference between the
last two levels.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Optional

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError, QuadratureError

EPS = np.finfo(float).eps
MAX_LEVEL = 6


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    graded_mesh_ratio: float = 0.15

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if not 0 < self.graded_mesh_ratio < 1:
            raise DomainError("graded_mesh_ratio must lie in (0, 1)")

    @staticmethod
    def from_env() -> "QuadConfig":
        """Default config, with VARFRAC_TOL overriding rel_tol when set."""
        raw = os.environ.get("VARFRAC_TOL")
        return QuadConfig(rel_tol=float(raw)) if raw else QuadConfig()


DEFAULT = QuadConfig()


@dataclass(frozen=True)
class SingularIntegrand:
    """f(tau) * dist(tau)^exponent(tau) on [lo, hi], dist measured from the singular end."""

    f: Callable
    exponent: Callable
    singular_end: Literal["left", "right"]
    interval: tuple[float, float]
    grade_both: bool = False  # also refine toward the other end (f itself non-smooth there)

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise DomainError(f"empty or reversed interval [{lo}, {hi}]")
        if self.singular_end not in ("left", "right"):
            raise DomainError("singular_end must be 'left' or 'right'")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    level: int


def _level_shape(level: int) -> tuple[int, int]:
    """(graded cells, nodes per cell) for a refinement level."""
    return 2 + 3 * level, 8 + 4 * level


@lru_cache(maxsize=64)
def _legendre(m: int):
    x, w = roots_legendre(m)
    return x, w


@lru_cache(maxsize=4096)
def _jacobi(m: int, p0: float):
    # weight (1 + x)^p0 on [-1, 1]
    x, w = roots_jacobi(m, 0.0, p0)
    return x, w


def _rule(level: int, length: float, p0: float, ratio: float, max_cells: int):
    """Distances s in (0, length] and weights, with s^p0 folded into the inner weights."""
    cells, m = _level_shape(level)
    cells = min(cells, max_cells)
    edges = length * ratio ** np.arange(cells + 1)
    xg, wg = _legendre(m)
    lo_e, hi_e = edges[1:], edges[:-1]
    half = 0.5 * (hi_e - lo_e)
    mid = 0.5 * (hi_e + lo_e)
    s_out = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w_out = (half[:, None] * wg[None, :]).ravel()
    s0 = edges[-1]
    xj, wj = _jacobi(m, float(p0))
    s_in = 0.5 * s0 * (1.0 + xj)
    w_in = (0.5 * s0) ** (p0 + 1.0) * wj
    return s_out, w_out, s_in, w_in


def _evaluate(g: SingularIntegrand, level: int, cfg: QuadConfig, p0: float) -> float:
    lo, hi = g.interval
    length = hi - lo
    near = 0.5 * length if g.grade_both else length
    s_out, w_out, s_in, w_in = _rule(level, near, p0, cfg.graded_mesh_ratio, cfg.max_subdivisions)
    s = np.concatenate([s_out, s_in])
    w_far = np.empty(0)
    n_near = s.size
    if g.grade_both:
        # the far half, graded toward the other end with plain Legendre cells
        f_out, fw_out, f_in, fw_in = _rule(level, near, 0.0, cfg.graded_mesh_ratio, cfg.max_subdivisions)
        f = np.concatenate([f_out, f_in])
        w_far = np.concatenate([fw_out, fw_in])
    tau = lo + s if g.singular_end == "left" else hi - s
    if g.grade_both:
        # measure far nodes from their own end so they never round onto it
        tau = np.concatenate([tau, hi - f if g.singular_end == "left" else lo + f])
        s = np.concatenate([s, length - f])
    p = np.broadcast_to(np.asarray(g.exponent(tau), dtype=float), tau.shape)
    if np.any(p <= -1.0):
        raise DomainError(f"kernel exponent {p.min():g} is not integrable")
    fv = np.broadcast_to(np.asarray(g.f(tau), dtype=float), tau.shape)
    n_out = s_out.size
    ls = np.log(s)
    vals_out = fv[:n_out] * np.exp(p[:n_out] * ls[:n_out])
    vals_in = fv[n_out:n_near] * np.exp((p[n_out:n_near] - p0) * ls[n_out:n_near])
    total = np.dot(w_out, vals_out) + np.dot(w_in, vals_in)
    if g.grade_both:
        total += np.dot(w_far, fv[n_near:] * np.exp(p[n_near:] * ls[n_near:]))
    return float(total)


def integrate_singular(
    g: SingularIntegrand, cfg: QuadConfig = DEFAULT, level: Optional[int] = None
) -> QuadResult:
    """Integrate ``g``; with ``level`` given, use exactly that refinement level.

    Fixing the level makes the result a smooth function of the interval
    endpoints, which is what the outer finite differences need.
    """
    lo, hi = g.interval
    end = lo if g.singular_end == "left" else hi
    p0 = float(np.asarray(g.exponent(np.asarray(end, dtype=float)), dtype=float))
    if not p0 > -1.0:
        raise DomainError(f"kernel exponent {p0:g} at the singular end is not integrable")
    if level is not None:
        cur = _evaluate(g, level, cfg, p0)
        prev = _evaluate(g, level - 1, cfg, p0) if level > 0 else math.nan
        return QuadResult(cur, abs(cur - prev), level)
    prev = _evaluate(g, 0, cfg, p0)
    est = math.inf
    for lev in range(1, MAX_LEVEL + 1):
        cur = _evaluate(g, lev, cfg, p0)
        est = abs(cur - prev)
        if est <= max(cfg.abs_tol, cfg.rel_tol * abs(cur)):
            return QuadResult(cur, est, lev)
        if _level_shape(lev)[0] >= cfg.max_subdivisions:
            break
        prev = cur
    raise QuadratureError("singular quadrature did not reach tolerance", cur, est)


def integrate_smooth(f: Callable, lo: float, hi: float, cfg: QuadConfig = DEFAULT) -> QuadResult:
    """Composite Gauss-Legendre on a regular integrand, panels doubled until stable."""
    if hi == lo:
        return QuadResult(0.0, 0.0, 0)
    x, w = _legendre(20)

    def comp(panels: int) -> float:
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape)
        return float(np.dot((half[:, None] * w[None, :]).ravel(), vals))

    prev = comp(1)
    panels = 1
    est = math.inf
    for lev in range(1, 9):
        panels *= 2
        cur = comp(panels)
        est = abs(cur - prev)
        if est <= max(cfg.abs_tol, cfg.rel_tol * abs(cur)):
            return QuadResult(cur, est, lev)
        prev = cur
    raise QuadratureError("smooth quadrature did not reach tolerance", cur, est)


# --- differentiation -------------------------------------------------------


@lru_cache(maxsize=256)
def fd_weights(offsets: tuple, order: int) -> np.ndarray:
    """Finite-difference weights for integer offsets (Fornberg's recursion)."""
    z = np.asarray(offsets, dtype=float)
    n = len(z)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, z[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5 = 1.0, c4
        c4 = z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order].copy()


def _eval_points(h, pts: np.ndarray) -> np.ndarray:
    from .functions import ScalarFn

    if isinstance(h, ScalarFn):
        return np.asarray(h(pts), dtype=float)
    return np.array([float(h(float(p))) for p in pts])


def default_step(t: float, order: int) -> float:
    # order 2 uses eps^(1/6) rather than eps^(1/4): two Richardson passes
    # push the rounding/truncation balance to larger steps
    p = 6 if order == 2 else order + 2
    return (1.0 + abs(t)) * EPS ** (1.0 / p)


def diff_numeric(
    h,
    t: float,
    order: int = 1,
    domain: Optional[tuple[float, float]] = None,
    step: Optional[float] = None,
) -> float:
    """Derivative of ``h`` at ``t`` by finite differences.

    Central stencils at steps 4h0, 2h0, h0 combined by two Richardson
    passes (the error expansion is in even powers of the step). Within
    twice the largest step of a domain end a one-sided stencil of
    order + 6 points is used instead.
    """
    if order < 1:
        raise DomainError("derivative order must be at least 1")
    if domain is None:
        from .functions import ScalarFn

        # only ScalarFn carries a function domain; numpy polynomials have a
        # ``domain`` attribute that is a mapping window, not a restriction
        domain = h.domain if isinstance(h, ScalarFn) else (-math.inf, math.inf)
    lo, hi = domain
    if not lo <= t <= hi:
        raise DomainError(f"t = {t} outside the domain [{lo}, {hi}]")
    h0 = default_step(t, order) if step is None else step
    big = 4.0 * h0
    half_width = (order + 1) // 2
    if t - lo >= 2.0 * big * half_width and hi - t >= 2.0 * big * half_width:
        offs = tuple(range(-half_width, half_width + 1))
        w = fd_weights(offs, order)
        steps = [big, 2.0 * h0, h0]
        pts = np.concatenate([t + s * np.asarray(offs, float) for s in steps])
        vals = _eval_points(h, pts).reshape(len(steps), len(offs))
        d = [float(np.dot(w, vals[i])) / steps[i] ** order for i in range(3)]
        r1 = [(4.0 * d[i + 1] - d[i]) / 3.0 for i in range(2)]
        return (16.0 * r1[1] - r1[0]) / 15.0
    # one-sided
    npts = order + 6
    room_right, room_left = hi - t, t - lo
    direction = 1.0 if room_right >= room_left else -1.0
    room = max(room_right, room_left)
    s = min(big, room / (npts - 1))
    if s <= 0:
        raise DomainError("no room for a one-sided stencil")
    offs = tuple(range(npts))
    w = fd_weights(offs, order)
    pts = t + direction * s * np.asarray(offs, float)
    vals = _eval_points(h, pts)
    return float(np.dot(w, vals)) / (direction * s) ** order
