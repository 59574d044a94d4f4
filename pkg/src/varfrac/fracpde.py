"""Time-fractional diffusion and Burgers problems through the moment expansion.

The Caputo time derivative of order alpha(t) is replaced by its first-order
expansion

    A t^(1-alpha) u_t + sum_p B_p t^(1-p-alpha) V_p,     dV_p/dt = t^(p-1) u_t,

which turns the problem into a classical system. It is advanced with
backward Euler in u: on each step the velocity w = (u^{k+1} - u^k)/dt is the
unknown of a tridiagonal system, and each moment gains w times the exact
integral of tau^(p-1) over the step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, InstabilityError, SingularStepError, SpecError
from .expansion import ExpansionParams, coeffs
from .functions import OrderFn
from .specfun import rgamma

BLOWUP = 1e6


@dataclass(frozen=True)
class PdeProblem:
    kind: Literal["diffusion", "burgers"]
    order: OrderFn
    forcing: Callable  # f(x, t), vectorised in x
    initial: Callable  # g(x)
    boundary: Callable = lambda x, t: np.zeros_like(np.asarray(x, float))  # Dirichlet data u(x, t) at x in {0, 1}
    exact: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("diffusion", "burgers"):
            raise SpecError(f"unknown problem kind {self.kind!r}")
        if self.order.univariate_in is None:
            raise SpecError("the time order must depend on t only")
        if self.order.range_low != 0 or self.order.range_high != 1:
            raise SpecError("the time order must take values in (0, 1)")


@dataclass(frozen=True)
class Discretization:
    Nx: int = 64
    Nt: int = 64
    N: int = 4

    def __post_init__(self):
        if self.Nx < 8 or self.Nt < 8:
            raise SpecError("need at least 8 space and 8 time intervals")
        if self.N < 1:
            raise SpecError("expansion truncation N must be >= 1")


@dataclass
class PdeSolution:
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray  # shape (Nt + 1, Nx + 1)
    V: np.ndarray  # moments at the final time, shape (N, Nx + 1)
    problem: PdeProblem = field(repr=False)

    def exact_grid(self) -> Optional[np.ndarray]:
        if self.problem.exact is None:
            return None
        X, T = np.meshgrid(self.x, self.t)
        return np.asarray(self.problem.exact(X, T), dtype=float)

    def write_csv(self, fh, digits: int = 15) -> None:
        ex = self.exact_grid()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "u", "exact", "abs_error"])
        fmt = lambda v: f"{v:.{digits}g}"
        for k, tk in enumerate(self.t):
            for j, xj in enumerate(self.x):
                u = self.u[k, j]
                if ex is None:
                    w.writerow([fmt(xj), fmt(tk), fmt(u), "", ""])
                else:
                    w.writerow([fmt(xj), fmt(tk), fmt(u), fmt(ex[k, j]), fmt(abs(u - ex[k, j]))])


def solve(problem: PdeProblem, disc: Discretization) -> PdeSolution:
    Nx, Nt, N = disc.Nx, disc.Nt, disc.N
    x = np.linspace(0.0, 1.0, Nx + 1)
    t = np.linspace(0.0, 1.0, Nt + 1)
    dx, dt = 1.0 / Nx, 1.0 / Nt
    params = ExpansionParams(1, N, problem.order, "left", 0.0, 1.0)
    u = np.empty((Nt + 1, Nx + 1))
    u[0] = np.asarray(problem.initial(x), dtype=float)
    # moments scaled by t^-p: Y_p = V_p / t^p stays O(1) for any truncation N
    Y = np.zeros((N, Nx + 1))
    p = np.arange(1, N + 1)
    burgers = problem.kind == "burgers"
    # interior operator -u_xx (+ u_x): sub-, main and super-diagonal entries
    lo_c = -1.0 / dx**2 - (0.5 / dx if burgers else 0.0)
    mid_c = 2.0 / dx**2
    up_c = -1.0 / dx**2 + (0.5 / dx if burgers else 0.0)
    m = Nx - 1
    for k in range(Nt):
        t1 = t[k + 1]
        al = float(problem.order.bar(t1))
        problem.order.check(al)
        c = coeffs(params, t1)
        A, B = c.first[0], c.second
        lead = A * t1 ** (1.0 - al)
        if not np.isfinite(lead) or abs(lead) < 1e-300:
            raise SingularStepError(f"leading coefficient vanished at t = {t1}")
        Bt = B * t1 ** (1.0 - al)
        ratio = (t[k] / t1) ** p
        incr = (1.0 - ratio) / p  # t1^-p int_{t_k}^{t_{k+1}} tau^(p-1)
        diag = lead + float(Bt @ incr)
        Y *= ratio[:, None]
        ub = np.asarray(problem.boundary(np.array([0.0, 1.0]), t1), dtype=float)
        wb = (ub - u[k, [0, -1]]) / dt
        w = np.empty(Nx + 1)
        w[0], w[-1] = wb
        uk = u[k]
        Lu = lo_c * uk[:-2] + mid_c * uk[1:-1] + up_c * uk[2:]
        rhs = np.asarray(problem.forcing(x[1:-1], t1), dtype=float) - Bt @ Y[:, 1:-1] - Lu
        rhs[0] -= dt * lo_c * wb[0]
        rhs[-1] -= dt * up_c * wb[1]
        ab = np.zeros((3, m))
        ab[0, 1:] = dt * up_c
        ab[1, :] = diag + dt * mid_c
        ab[2, :-1] = dt * lo_c
        w[1:-1] = solve_banded((1, 1), ab, rhs)
        u[k + 1] = uk + dt * w
        Y += incr[:, None] * w[None, :]
        if not np.all(np.isfinite(u[k + 1])) or np.max(np.abs(u[k + 1])) > BLOWUP:
            raise InstabilityError(f"solution exceeded {BLOWUP:g} at t = {t1}")
    return PdeSolution(x, t, u, Y, problem)


def manufactured_error(sol: PdeSolution, exact: Optional[Callable] = None) -> float:
    """Max |u - exact| over interior nodes at the final time."""
    ex = exact or sol.problem.exact
    if ex is None:
        raise SpecError("no exact solution supplied")
    xi = sol.x[1:-1]
    ref = np.asarray(ex(xi, np.full_like(xi, sol.t[-1])), dtype=float)
    return float(np.max(np.abs(sol.u[-1, 1:-1] - ref)))


# --- the two model problems --------------------------------------------------

# the first example order of the comparison study; the model problems leave alpha open
PDE_ORDER = OrderFn.univariate(
    lambda t: (50.0 * t + 49.0) / 100.0, lambda t: np.full_like(np.asarray(t, float), 0.5)
)


def diffusion_problem(order: OrderFn = PDE_ORDER) -> PdeProblem:
    def f(x, t):
        al = order.bar(t)
        return (2.0 * rgamma(3.0 - al) * t ** (2.0 - al) + 4.0 * math.pi**2 * t**2) * np.sin(2.0 * math.pi * x)

    return PdeProblem(
        "diffusion",
        order,
        f,
        lambda x: np.zeros_like(np.asarray(x, float)),
        exact=lambda x, t: np.asarray(t) ** 2 * np.sin(2.0 * math.pi * np.asarray(x)),
    )


def burgers_problem(order: OrderFn = PDE_ORDER) -> PdeProblem:
    exact = lambda x, t: np.asarray(x) ** 2 + np.asarray(t) ** 2

    def f(x, t):
        al = order.bar(t)
        return 2.0 * t ** (2.0 - al) * rgamma(3.0 - al) + 2.0 * np.asarray(x) - 2.0

    return PdeProblem(
        "burgers",
        order,
        f,
        lambda x: np.asarray(x, float) ** 2,
        boundary=exact,
        exact=exact,
    )
