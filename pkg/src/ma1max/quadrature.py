"""Composite Gauss-Legendre quadrature on a truncated interval.

Supplies nodes/weights for Nystrom discretization, per-panel polynomial
interpolation, and spectrally accurate cumulative integrals.  Panel edges can
be pinned to breakpoints so that integrand kinks (support edges of an
innovation model, transformed kink images) never fall inside a panel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ArgumentError


@lru_cache(maxsize=None)
def _reference_rule(order: int):
    """Gauss-Legendre nodes/weights on [-1, 1] plus barycentric weights and
    the cumulative integration matrix S[k, j] = int_{-1}^{t_k} ell_j(t) dt."""
    t, w = np.polynomial.legendre.leggauss(order)
    bary = np.empty(order)
    for j in range(order):
        bary[j] = 1.0/np.prod(t[j] - np.delete(t, j))
    # integrate each Lagrange basis polynomial exactly (degree order-1) with
    # an order+2 point sub-rule on [-1, t_k]
    qq, qw = np.polynomial.legendre.leggauss(order + 2)
    S = np.zeros((order, order))
    for k in range(order):
        a, b = -1.0, t[k]
        xs = (a + b)/2.0 + (b - a)/2.0*qq
        ws = (b - a)/2.0*qw
        S[k] = ws @ _lagrange_matrix(xs, t, bary)
    t.setflags(write=False), w.setflags(write=False)
    bary.setflags(write=False), S.setflags(write=False)
    return t, w, bary, S


def _lagrange_matrix(xq, t, bary):
    """L[m, j] = ell_j(xq[m]) for the Lagrange basis on nodes t."""
    d = xq[:, None] - t[None, :]
    hit = np.abs(d) < 1e-15
    d = np.where(hit, 1.0, d)
    num = bary[None, :]/d
    L = num/np.sum(num, axis=1)[:, None]
    rows = hit.any(axis=1)
    if rows.any():
        L[rows] = hit[rows].astype(float)
    return L


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre grid.

    nodes/weights are the concatenated panel rules; panels lists
    (lo, hi, order) per panel; bounds is the overall interval.
    """

    nodes: np.ndarray
    weights: np.ndarray
    panels: tuple
    bounds: tuple

    @property
    def order(self) -> int:
        return self.panels[0][2]

    @property
    def n_panels(self) -> int:
        return len(self.panels)

    @property
    def edges(self) -> np.ndarray:
        return np.array([p[0] for p in self.panels] + [self.panels[-1][1]])

    def panel_of(self, x) -> np.ndarray:
        """Index of the panel containing each query point (clipped)."""
        e = self.edges
        return np.clip(np.searchsorted(e, np.asarray(x), side="right") - 1,
                       0, self.n_panels - 1)

    def sub_rule(self, a: float, b: float):
        """Fresh Gauss-Legendre rule of the grid's order on [a, b]."""
        t, w, _, _ = _reference_rule(self.order)
        half = (b - a)/2.0
        return (a + b)/2.0 + half*t, half*w

    def lagrange_on_panel(self, p: int, xq: np.ndarray) -> np.ndarray:
        """Lagrange basis values of panel p's nodes at points xq (in panel)."""
        lo, hi, order = self.panels[p]
        t, _, bary, _ = _reference_rule(order)
        tt = (2.0*np.asarray(xq, dtype=float) - (lo + hi))/(hi - lo)
        return _lagrange_matrix(tt, t, bary)

    def interp(self, xq, values, left=0.0, right=None, method="panel"):
        """Interpolate node values at xq with clamped extension.

        method "panel": local polynomial through each panel's own nodes
        (spectrally accurate for smooth data).  method "monotone": PCHIP over
        all nodes (shape preserving, ~O(h^3)).  Outside [lo, hi] returns
        `left` / `right` (right defaults to the last node value).
        """
        xq = np.asarray(xq, dtype=float)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        values = np.asarray(values)
        lo, hi = self.bounds
        rightval = values[-1] if right is None else right
        out = np.empty(xq.shape, dtype=values.dtype)
        below = xq <= lo
        above = xq >= hi
        mid = ~(below | above)
        out[below] = left
        out[above] = rightval
        if mid.any():
            if method == "panel":
                out[mid] = self._interp_panel(xq[mid], values)
            elif method == "monotone":
                out[mid] = self._interp_monotone(xq[mid], values, left,
                                                 rightval)
            else:
                raise ArgumentError(f"unknown interpolation method {method!r}")
        return out[0] if scalar else out

    def _interp_panel(self, xq, values):
        order = self.order
        V = values.reshape(self.n_panels, order)
        idx = self.panel_of(xq)
        e = self.edges
        lo, hi = e[idx], e[idx + 1]
        t, _, bary, _ = _reference_rule(order)
        tt = (2.0*xq - (lo + hi))/(hi - lo)
        L = _lagrange_matrix(tt, t, bary)
        return np.einsum("ij,ij->i", L, V[idx])

    def _interp_monotone(self, xq, values, left, rightval):
        lo, hi = self.bounds
        xs = np.concatenate([[lo], self.nodes, [hi]])
        ys = np.concatenate([[left], np.real(values), [np.real(rightval)]])
        return PchipInterpolator(xs, ys)(xq)

    def cumulative(self, fvals):
        """(C, total): C[i] = integral from lo to nodes[i], via the per-panel
        Lagrange antiderivative; exact for panel-wise polynomials."""
        fvals = np.asarray(fvals)
        if fvals.shape != self.nodes.shape:
            raise ArgumentError("fvals length must match node count")
        order = self.order
        V = fvals.reshape(self.n_panels, order)
        _, w, _, S = _reference_rule(order)
        halves = np.array([(hi - lo)/2.0 for lo, hi, _ in self.panels])
        panel_tot = (V*w[None, :]).sum(axis=1)*halves
        prior = np.concatenate([[0.0], np.cumsum(panel_tot)[:-1]])
        incell = (S @ V.T).T*halves[:, None]
        return (prior[:, None] + incell).ravel(), panel_tot.sum()


def build_grid(bounds, panels: int, order: int,
               breakpoints=()) -> QuadratureGrid:
    """Composite Gauss-Legendre grid of `panels` panels on [lo, hi].

    Interior breakpoints become panel edges; panel counts are distributed to
    the resulting segments proportionally to length (at least one each), so
    with no breakpoints the panels are exactly uniform.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not hi > lo:
        raise ArgumentError(f"invalid bounds ({lo}, {hi})")
    if panels < 1:
        raise ArgumentError("panels must be >= 1")
    if not 2 <= order <= 32:
        raise ArgumentError("order must lie in [2, 32]")

    cuts = sorted({b for b in breakpoints if lo < b < hi})
    seg_edges = [lo] + cuts + [hi]
    lengths = np.diff(seg_edges)
    counts = np.maximum(1, np.round(panels*lengths/lengths.sum()).astype(int))
    # keep the requested total where possible
    while counts.sum() > max(panels, len(lengths)):
        counts[np.argmax(counts)] -= 1
    while counts.sum() < panels:
        counts[np.argmax(lengths/counts)] += 1

    edges = np.concatenate(
        [np.linspace(a, b, c + 1)[:-1]
         for a, b, c in zip(seg_edges[:-1], seg_edges[1:], counts)]
        + [[hi]])

    t, w, _, _ = _reference_rule(order)
    mid = (edges[:-1] + edges[1:])/2.0
    half = (edges[1:] - edges[:-1])/2.0
    nodes = (mid[:, None] + half[:, None]*t[None, :]).ravel()
    weights = (half[:, None]*w[None, :]).ravel()
    panel_list = tuple((float(a), float(b), order)
                       for a, b in zip(edges[:-1], edges[1:]))
    return QuadratureGrid(nodes=nodes, weights=weights, panels=panel_list,
                          bounds=(lo, hi))


def integrate(grid: QuadratureGrid, fvals) -> float:
    """Weighted sum of node values."""
    fvals = np.asarray(fvals)
    if fvals.shape[-1] != grid.nodes.shape[0]:
        raise ArgumentError("fvals length must match node count")
    return fvals @ grid.weights


def refine(grid: QuadratureGrid) -> QuadratureGrid:
    """Split every panel in half (doubles the panel count, keeps edges)."""
    edges = grid.edges
    new_edges = np.empty(2*len(edges) - 1)
    new_edges[0::2] = edges
    new_edges[1::2] = (edges[:-1] + edges[1:])/2.0
    order = grid.order
    t, w, _, _ = _reference_rule(order)
    mid = (new_edges[:-1] + new_edges[1:])/2.0
    half = (new_edges[1:] - new_edges[:-1])/2.0
    nodes = (mid[:, None] + half[:, None]*t[None, :]).ravel()
    weights = (half[:, None]*w[None, :]).ravel()
    panel_list = tuple((float(a), float(b), order)
                       for a, b in zip(new_edges[:-1], new_edges[1:]))
    return QuadratureGrid(nodes=nodes, weights=weights, panels=panel_list,
                          bounds=grid.bounds)
