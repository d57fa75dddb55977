"""Innovation-distribution models.

Each model supplies the cdf F, density f, analytic derivatives of f and of
e(y) = 1/f(y), and the quantile function.  Derivatives beyond a model's
analytic depth fall back to Richardson-extrapolated central differences when
the model allows it.  All callables accept scalars or NumPy arrays.

Built-ins: standard normal, exponential on (-inf, 0], uniform, and Gumbel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ArgumentError, DerivativeOrderError

_SQRT2PI = math.sqrt(2.0*math.pi)


# ---------------------------------------------------------------------------
# polynomial helpers for the normal model
# ---------------------------------------------------------------------------

def _hermite_he(y, n):
    """Probabilists' Hermite polynomials He_0..He_n at y (vectorized).

    He_{i+1}(y) = y He_i(y) - i He_{i-1}(y).
    """
    y = np.asarray(y, dtype=float)
    out = [np.ones_like(y), y.copy()]
    for i in range(1, n):
        out.append(y*out[i] - i*out[i-1])
    return out[:n+1]


def _hermite_mod(y, n):
    """Moment polynomials H*_0..H*_n at y: H*_j(y) = E (y + Z)^j, Z ~ N(0,1).

    Satisfy H*_{j+1}(y) = y H*_j(y) + j H*_{j-1}(y).
    """
    y = np.asarray(y, dtype=float)
    out = [np.ones_like(y), y.copy()]
    for j in range(1, n):
        out.append(y*out[j] + j*out[j-1])
    return out[:n+1]


# ---------------------------------------------------------------------------
# model container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InnovationModel:
    """One innovation distribution with analytic derivative support.

    ``pdf_deriv_analytic(y, i)`` must handle 0 <= i <= analytic_depth;
    ``recip_pdf_deriv_analytic`` likewise for e(y) = 1/f(y).  ``breakpoints``
    are interior/boundary kink locations used to align quadrature panels.
    ``atoms`` lists (location, mass) point masses of the cdf.
    """

    name: str
    cdf: Callable
    pdf: Callable
    quantile: Callable
    support: tuple
    pdf_deriv_analytic: Callable
    recip_pdf_deriv_analytic: Callable
    analytic_depth: int            # np.inf-like sentinel: use a large int
    fd_fallback: bool = True
    breakpoints: tuple = ()
    atoms: tuple = ()
    mc_id: int = -1                # compiled-kernel id; -1 = generic path
    mc_params: tuple = (0.0, 0.0)
    params: dict = field(default_factory=dict)

    def pdf_deriv(self, y, i: int):
        """i-th derivative of the density at y."""
        return pdf_derivative(self, y, i)

    def recip_pdf_deriv(self, y, i: int):
        """i-th derivative of e(y) = 1/f(y) at y."""
        return recip_pdf_derivative(self, y, i)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_cdf(model: InnovationModel, y):
    """F(y); 0 left of the support, 1 right of it."""
    return model.cdf(np.asarray(y, dtype=float))


def pdf_derivative(model: InnovationModel, y, i: int):
    """f_{.i}(y), analytic up to the model's depth, else finite differences.

    Raises DerivativeOrderError past the analytic depth when the model was
    built with fd_fallback=False.
    """
    if i < 0:
        raise ArgumentError("derivative order must be >= 0")
    if i <= model.analytic_depth:
        return model.pdf_deriv_analytic(np.asarray(y, dtype=float), i)
    if not model.fd_fallback:
        raise DerivativeOrderError(
            f"model '{model.name}' supports analytic f-derivatives only to "
            f"order {model.analytic_depth} and fd_fallback is disabled")
    return _fd_derivative(lambda v: pdf_derivative(model, v, i - 1), y)


def recip_pdf_derivative(model: InnovationModel, y, i: int):
    """e_{.i}(y) with e = 1/f, analytic or finite-difference fallback."""
    if i < 0:
        raise ArgumentError("derivative order must be >= 0")
    if i <= model.analytic_depth:
        return model.recip_pdf_deriv_analytic(np.asarray(y, dtype=float), i)
    if not model.fd_fallback:
        raise DerivativeOrderError(
            f"model '{model.name}' supports analytic e-derivatives only to "
            f"order {model.analytic_depth} and fd_fallback is disabled")
    return _fd_derivative(lambda v: recip_pdf_derivative(model, v, i - 1), y)


def recip_pdf_derivative_normal(y, j: int):
    """e_{.j}(y) for the standard normal: H*_j(y)/phi(y).

    H*_j(y) = E (y + Z)^j = sum_k C(j,2k) y^{j-2k} m_{2k},
    m_{2k} = (2k)!/(k! 2^k).
    """
    y = np.asarray(y, dtype=float)
    h = _hermite_mod(y, max(j, 1))[j]
    return h/_phi(y)


def truncation_bounds(model: InnovationModel, eps: float):
    """(quantile(eps), quantile(1-eps)) clipped to the support."""
    if not 0.0 < eps < 0.5:
        raise ArgumentError("tail mass eps must lie in (0, 0.5)")
    lo = float(model.quantile(eps))
    hi = float(model.quantile(1.0 - eps))
    lo = max(lo, model.support[0])
    hi = min(hi, model.support[1])
    return lo, hi


def _fd_derivative(g, y):
    """Richardson-extrapolated central difference of g at y."""
    y = np.asarray(y, dtype=float)
    h = np.maximum(1e-5, 1e-5*np.abs(y))
    d1 = (g(y + h) - g(y - h))/(2.0*h)
    d2 = (g(y + h/2) - g(y - h/2))/h
    return (4.0*d2 - d1)/3.0


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def _phi(y):
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5*y*y)/_SQRT2PI


def normal() -> InnovationModel:
    """Standard normal N(0, 1)."""
    def pdf_deriv(y, i):
        # phi^(i)(y) = (-1)^i He_i(y) phi(y)
        he = _hermite_he(y, max(i, 1))[i]
        return ((-1.0)**i)*he*_phi(y)

    def recip_deriv(y, i):
        return recip_pdf_derivative_normal(y, i)

    return InnovationModel(
        name="normal",
        cdf=lambda y: ndtr(np.asarray(y, dtype=float)),
        pdf=_phi,
        quantile=lambda p: ndtri(np.asarray(p, dtype=float)),
        support=(-np.inf, np.inf),
        pdf_deriv_analytic=pdf_deriv,
        recip_pdf_deriv_analytic=recip_deriv,
        analytic_depth=10**9,
        mc_id=0,
    )


def exponential_left(a: float = 1.0) -> InnovationModel:
    """F(y) = a e^{a y} on (-inf, 0], density f(y) = a^2 e^{a y} on (-inf, 0).

    A proper cdf requires a <= 1; for a < 1 the remaining mass 1 - a sits in
    an atom at 0.  Tests and the kernel (spectral) route use the atom-free
    default a = 1.
    """
    if not 0.0 < a <= 1.0:
        raise ArgumentError("exponential-left requires a in (0, 1]")

    def cdf(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < 0.0, a*np.exp(a*np.minimum(y, 0.0)), 1.0)

    def pdf(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < 0.0, a*a*np.exp(a*np.minimum(y, 0.0)), 0.0)

    def quantile(p):
        p = np.asarray(p, dtype=float)
        return np.where(p < a, np.log(np.minimum(p, a)/a)/a, 0.0)

    def pdf_deriv(y, i):
        y = np.asarray(y, dtype=float)
        return np.where(y < 0.0,
                        a**(i + 2)*np.exp(a*np.minimum(y, 0.0)), 0.0)

    def recip_deriv(y, i):
        # e(y) = exp(-a y)/a^2 on the interior; analytic continuation is
        # returned for y >= 0 (the density vanishes there).
        y = np.asarray(y, dtype=float)
        return ((-a)**i)*np.exp(-a*y)/(a*a)

    return InnovationModel(
        name="expleft",
        cdf=cdf,
        pdf=pdf,
        quantile=quantile,
        support=(-np.inf, 0.0),
        pdf_deriv_analytic=pdf_deriv,
        recip_pdf_deriv_analytic=recip_deriv,
        analytic_depth=10**9,
        breakpoints=(0.0,),
        atoms=((0.0, 1.0 - a),) if a < 1.0 else (),
        mc_id=2,
        mc_params=(a, 0.0),
        params={"a": a},
    )


def uniform(lo: float = 0.0, hi: float = 1.0) -> InnovationModel:
    """Uniform on (lo, hi)."""
    if not hi > lo:
        raise ArgumentError("uniform requires hi > lo")
    width = hi - lo

    def cdf(y):
        y = np.asarray(y, dtype=float)
        return np.clip((y - lo)/width, 0.0, 1.0)

    def pdf(y):
        y = np.asarray(y, dtype=float)
        return np.where((y >= lo) & (y <= hi), 1.0/width, 0.0)

    def pdf_deriv(y, i):
        y = np.asarray(y, dtype=float)
        if i == 0:
            return pdf(y)
        return np.zeros_like(y)

    def recip_deriv(y, i):
        y = np.asarray(y, dtype=float)
        if i == 0:
            return np.full_like(y, width)
        return np.zeros_like(y)

    return InnovationModel(
        name="uniform",
        cdf=cdf,
        pdf=pdf,
        quantile=lambda p: lo + width*np.asarray(p, dtype=float),
        support=(lo, hi),
        pdf_deriv_analytic=pdf_deriv,
        recip_pdf_deriv_analytic=recip_deriv,
        analytic_depth=10**9,
        breakpoints=(lo, hi),
        mc_id=1,
        mc_params=(lo, hi),
        params={"lo": lo, "hi": hi},
    )


def gumbel(fd_fallback: bool = True) -> InnovationModel:
    """Standard Gumbel, F(y) = exp(-e^{-y}).

    Ships analytic derivatives to order 2 only; higher orders go through the
    finite-difference fallback (the closed forms grow unwieldy and are not
    needed by the series solvers for this model).
    """
    def cdf(y):
        y = np.asarray(y, dtype=float)
        return np.exp(-np.exp(-y))

    def pdf(y):
        y = np.asarray(y, dtype=float)
        return np.exp(-y - np.exp(-y))

    def pdf_deriv(y, i):
        y = np.asarray(y, dtype=float)
        t = np.exp(-y)
        f = pdf(y)
        if i == 0:
            return f
        if i == 1:
            return f*(t - 1.0)
        return f*((t - 1.0)**2 - t)

    def recip_deriv(y, i):
        y = np.asarray(y, dtype=float)
        t = np.exp(-y)
        e = np.exp(y + t)
        if i == 0:
            return e
        if i == 1:
            return e*(1.0 - t)
        return e*((1.0 - t)**2 + t)

    return InnovationModel(
        name="gumbel",
        cdf=cdf,
        pdf=pdf,
        quantile=lambda p: -np.log(-np.log(np.asarray(p, dtype=float))),
        support=(-np.inf, np.inf),
        pdf_deriv_analytic=pdf_deriv,
        recip_pdf_deriv_analytic=recip_deriv,
        analytic_depth=2,
        fd_fallback=fd_fallback,
        mc_id=3,
    )


# ---------------------------------------------------------------------------
# CLI model spec parsing: "normal", "expleft:a=0.5", "uniform:lo=0,hi=1", ...
# ---------------------------------------------------------------------------

_FACTORIES = {
    "normal": (normal, ()),
    "expleft": (exponential_left, ("a",)),
    "uniform": (uniform, ("lo", "hi")),
    "gumbel": (gumbel, ()),
}


def from_spec(spec: str) -> InnovationModel:
    """Build a model from a CLI spec string ``name[:k=v,...]``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _FACTORIES:
        raise ArgumentError(
            f"unknown model '{name}'; choose from {sorted(_FACTORIES)}")
    factory, allowed = _FACTORIES[name]
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in allowed:
                raise ArgumentError(
                    f"model '{name}' takes parameters {allowed}, not '{key}'")
            try:
                kwargs[key] = float(val)
            except ValueError as exc:
                raise ArgumentError(f"bad value for {key}: {val!r}") from exc
    return factory(**kwargs)


def render_spec(model: InnovationModel) -> str:
    """Inverse of from_spec for round-trip config serialization."""
    if not model.params:
        return model.name
    inner = ",".join(f"{k}={v:g}" for k, v in sorted(model.params.items()))
    return f"{model.name}:{inner}"
