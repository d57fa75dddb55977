"""Exact distribution of the MA(1) maximum by repeated operator application.

The driving identity: with G_n(y) = P(M_n <= x, e_n <= y) and the operator

    [K g](y) = sign(rho) * integral_{-inf}^{y} g((x - w)/rho) f(w) dw,

the tail values v_n = [K^n F](sup) determine u_n = P(M_n <= x): directly for
rho > 0 (u_n = v_n) and through a convolution recurrence or, equivalently,
complete ordinary Bell polynomials for rho < 0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ArgumentError
from .innovations import InnovationModel, truncation_bounds
from .quadrature import QuadratureGrid, build_grid

DEFAULT_PANELS = 64
DEFAULT_ORDER = 8
DEFAULT_TAIL_EPS = 1e-12

# The operator grid must also cover the rho-transformed support (the kernel
# reads its argument at (x - w)/rho); cap the expansion so rho -> 0 stays
# usable, the analytic boundary-mass term absorbs what is cut off.
EXPAND_CAP = 8.0


@dataclass(frozen=True)
class Ma1Problem:
    """One instance of the maximum-distribution problem."""

    rho: float
    x: float
    model: InnovationModel

    def __post_init__(self):
        if self.rho == 0.0:
            raise ArgumentError(
                "rho must be nonzero; the rho=0 i.i.d. baseline is "
                "u_iid_reference(model, x, n) = F(x)**n")


@dataclass(frozen=True)
class GFunction:
    """A function sampled on a quadrature grid, with its value at +inf.

    For the true joint cdfs G_n the values are a sub-cdf in y; iterates of K
    for rho < 0 alternate in sign, so validation is opt-in.
    """

    grid: QuadratureGrid
    values: np.ndarray
    value_at_sup: float

    def __call__(self, y, method="panel"):
        return self.grid.interp(y, self.values, left=0.0,
                                right=self.value_at_sup, method=method)

    def validate_subcdf(self, tol: float = 1e-9) -> None:
        v = np.real(self.values)
        if np.min(v) < -tol or np.max(v) > self.value_at_sup + tol:
            raise ArgumentError("GFunction values outside [0, value_at_sup]")
        if self.value_at_sup > 1.0 + tol:
            raise ArgumentError("GFunction sup value exceeds 1")
        if np.min(np.diff(v)) < -1e-6*max(1.0, np.max(np.abs(v))):
            raise ArgumentError("GFunction values are not nondecreasing")


@dataclass(frozen=True)
class VSequence:
    """v_n = [K^n F](sup) and the shifted weights w_n = v_{n-1}."""

    v: np.ndarray

    @property
    def w(self) -> np.ndarray:
        out = np.zeros(len(self.v) + 1)
        out[1:] = self.v
        return out


@dataclass
class MaxCdfResult:
    """u_0..u_N for one method, with error estimates and run metadata."""

    u: np.ndarray
    method: str
    err: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def validate(self, tol: float = 1e-8, u0_tol: float = 1e-12) -> None:
        if abs(self.u[0] - 1.0) > u0_tol:
            raise ArgumentError(f"u_0 = {self.u[0]!r} != 1")
        if np.min(self.u) < -tol or np.max(self.u) > 1.0 + tol:
            raise ArgumentError("u outside [0, 1]")
        if np.max(np.diff(self.u)) > tol:
            raise ArgumentError("u is not nonincreasing")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def operator_bounds(problem: Ma1Problem, tail_eps: float = DEFAULT_TAIL_EPS):
    """Domain hull: model truncation bounds united with their image under
    z -> (x - z)/rho, capped at EXPAND_CAP model-widths per side."""
    m_lo, m_hi = truncation_bounds(problem.model, tail_eps)
    width = m_hi - m_lo
    t1, t2 = sorted(((problem.x - m_lo)/problem.rho,
                     (problem.x - m_hi)/problem.rho))
    t1 = max(t1, m_lo - EXPAND_CAP*width)
    t2 = min(t2, m_hi + EXPAND_CAP*width)
    return min(m_lo, t1), max(m_hi, t2)


def problem_breakpoints(problem: Ma1Problem):
    """Kink locations to pin to panel edges: model support kinks plus their
    images under both transform directions."""
    pts = set()
    for b in problem.model.breakpoints:
        pts.add(b)
        pts.add(problem.x - problem.rho*b)     # integrand kink in w
        pts.add((problem.x - b)/problem.rho)   # kernel column kink in z
    return tuple(sorted(pts))


def problem_grid(problem: Ma1Problem, panels: int = DEFAULT_PANELS,
                 order: int = DEFAULT_ORDER,
                 tail_eps: float = DEFAULT_TAIL_EPS) -> QuadratureGrid:
    """Default shared grid for the exact and spectral routes."""
    bounds = operator_bounds(problem, tail_eps)
    return build_grid(bounds, panels, order,
                      breakpoints=problem_breakpoints(problem))


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------

def apply_K(problem: Ma1Problem, g: GFunction,
            interp: str = "panel") -> GFunction:
    """One application of the integral operator to a sampled function.

    The integrand is g((x - w)/rho) f(w) with g interpolated on its grid and
    clamped outside: 0 left of the domain, value_at_sup right of it.  The
    cumulative integral is evaluated per panel through the local Lagrange
    antiderivative, so smooth integrands converge spectrally.
    """
    grid = g.grid
    w = grid.nodes
    targ = (problem.x - w)/problem.rho
    gt = grid.interp(targ, g.values, left=0.0, right=g.value_at_sup,
                     method=interp)
    h = gt*problem.model.pdf(w)
    cum, total = grid.cumulative(h)
    s = 1.0 if problem.rho > 0 else -1.0
    return GFunction(grid=grid, values=s*cum, value_at_sup=s*total)


def _apply_K_exact_cdf(problem: Ma1Problem, grid: QuadratureGrid) -> GFunction:
    """First application K F with the model cdf evaluated analytically."""
    w = grid.nodes
    targ = (problem.x - w)/problem.rho
    h = problem.model.cdf(targ)*problem.model.pdf(w)
    cum, total = grid.cumulative(h)
    s = 1.0 if problem.rho > 0 else -1.0
    return GFunction(grid=grid, values=s*cum, value_at_sup=s*total)


def sample_cdf(problem: Ma1Problem, grid: QuadratureGrid) -> GFunction:
    """G_0 = F sampled on the grid."""
    return GFunction(grid=grid, values=np.asarray(
        problem.model.cdf(grid.nodes), dtype=float), value_at_sup=1.0)


def compute_v(problem: Ma1Problem, n_max: int,
              grid: Optional[QuadratureGrid] = None, interp: str = "panel",
              exact_start: bool = True) -> VSequence:
    """v_0..v_{n_max} by iterated operator application starting from F.

    The first application evaluates the model cdf analytically (no
    interpolation error); later iterates are interpolated grid functions.
    """
    if n_max < 0:
        raise ArgumentError("n_max must be >= 0")
    if grid is None:
        grid = problem_grid(problem)
    v = np.empty(n_max + 1)
    v[0] = 1.0
    if n_max == 0:
        return VSequence(v=v)
    g = (_apply_K_exact_cdf(problem, grid) if exact_start
         else apply_K(problem, sample_cdf(problem, grid), interp=interp))
    v[1] = g.value_at_sup
    for n in range(2, n_max + 1):
        g = apply_K(problem, g, interp=interp)
        v[n] = g.value_at_sup
    return VSequence(v=v)


# ---------------------------------------------------------------------------
# u_n routes
# ---------------------------------------------------------------------------

def u_exact(problem: Ma1Problem, n_max: int,
            grid: Optional[QuadratureGrid] = None,
            interp: str = "panel") -> MaxCdfResult:
    """u_n = P(M_n <= x) from the v-sequence.

    rho > 0: u_n = v_n.  rho < 0: the convolution recurrence
    u_{n+1} = v_{n+1} + sum_{i<=n} v_i u_{n-i}, run in exactly rounded
    compensated summation (the v_n alternate in sign).
    """
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    if grid is None:
        grid = problem_grid(problem)
    t0 = time.perf_counter()
    vs = compute_v(problem, n_max, grid=grid, interp=interp)
    v = vs.v
    u = np.empty(n_max + 1)
    u[0] = 1.0
    if problem.rho > 0:
        u[1:] = v[1:]
    else:
        for n in range(0, n_max):
            terms = [v[n + 1]] + [v[i]*u[n - i] for i in range(n + 1)]
            u[n + 1] = math.fsum(terms)
    err = np.arange(n_max + 1)*_grid_tail_eps(grid, problem)
    return MaxCdfResult(u=u, method="recurrence", err=err, meta={
        "grid": _grid_meta(grid),
        "seconds": time.perf_counter() - t0,
    })


def bell_u(v: VSequence, n_max: int) -> MaxCdfResult:
    """u_{n-1} = complete ordinary Bell polynomial B^_n(w), w_n = v_{n-1}.

    Uses the convolution recurrence b_n = sum_{j=1}^{n} w_j b_{n-j} with
    b_0 = 1 (independent of the u-recurrence route).
    """
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    w = vs_w = v.w
    if len(vs_w) < n_max + 2:
        raise ArgumentError("v-sequence too short for requested n_max")
    b = np.empty(n_max + 2)
    b[0] = 1.0
    for n in range(1, n_max + 2):
        b[n] = math.fsum(w[j]*b[n - j] for j in range(1, n + 1))
    u = b[1:n_max + 2].copy()
    u[0] = 1.0  # b_1 = w_1 = v_0 = 1 exactly
    return MaxCdfResult(u=u, method="bell")


def u_iid_reference(model: InnovationModel, x: float, n: int) -> float:
    """Independence baseline F(x)**n (the rho = 0 limit)."""
    if n < 0:
        raise ArgumentError("n must be >= 0")
    return float(model.cdf(np.float64(x)))**n


def _grid_tail_eps(grid: QuadratureGrid, problem: Ma1Problem) -> float:
    lo, hi = grid.bounds
    F = problem.model.cdf
    return float(F(np.float64(lo)) + (1.0 - F(np.float64(hi))))


def _grid_meta(grid: QuadratureGrid) -> dict:
    return {"panels": grid.n_panels, "order": grid.order,
            "bounds": list(grid.bounds)}
