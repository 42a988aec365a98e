"""Composite Gauss-Legendre integrals against exponentially decaying weights."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .specfun import ModelParams, log_ff_weight, log_mp_weight

_ORDER = 16
_NODES, _WEIGHTS = leggauss(_ORDER)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Weight:
    """log-density plus its tail model e^{-decay |x|} |x|^power.

    `panel_width` is a hint for the composite rule: the MP weight has poles
    at distance lambda from the real axis, so panels must shrink with it.
    """
    log_eval: Callable
    decay: float
    power: float = 0.0
    panel_width: float = 1.0

    def __call__(self, x):
        return np.exp(self.log_eval(np.asarray(x, dtype=np.float64)))


def mp_weight_obj(params: ModelParams, which=1):
    tj = params.t(which)
    return Weight(lambda x: log_mp_weight(x, params, which),
                  math.pi - 2.0 * abs(tj), 2.0 * params.lam - 1.0, min(1.0, params.lam))


def ff_weight_obj(tj):
    return Weight(lambda x: log_ff_weight(x, tj), math.pi / 4.0 - abs(tj), 0.0)


@dataclass(frozen=True)
class QuadratureSpec:
    tol: float
    max_halfwidth: float
    panels: int

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.panels < 8:
            raise ValueError("need at least 8 panels")
        if not self.max_halfwidth > 0:
            raise ValueError("max_halfwidth must be positive")


def truncation_halfwidth(decay, power, tol, degree=0):
    """Smallest X >= 1 with decay*X - (power+degree)*log X >= -log(tol) + 5."""
    if decay <= 0:
        raise QuadratureError("weight does not decay")
    rhs = -math.log(tol) + 5.0
    p = power + degree

    def g(x):
        return decay * x - p * math.log(x) - rhs

    lo, hi = 1.0, max(2.0, 2.0 * rhs / decay)
    while g(hi) < 0:
        hi *= 2.0
    if g(lo) >= 0:
        return lo
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def make_spec(weight: Weight, tol=1e-12, degree=0, panel_width=None):
    X = truncation_halfwidth(weight.decay, weight.power, tol, degree)
    if panel_width is None:
        panel_width = weight.panel_width
    panels = max(8, int(math.ceil(2.0 * X / panel_width)))
    return QuadratureSpec(tol, X, panels)


def _rule(X, panels):
    edges = np.linspace(-X, X, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    x = (mids[:, None] + half[:, None] * _NODES[None, :]).ravel()
    w = (half[:, None] * _WEIGHTS[None, :]).ravel()
    return x, w


def _apply(f, weight, X, panels):
    x, w = _rule(X, panels)
    lw = weight.log_eval(x)
    fx = np.asarray(f(x), dtype=np.float64)
    ww = w * np.exp(lw)
    return ww @ fx, ww @ np.abs(fx), not np.any(fx)


def integrate_weighted(f, weight: Weight, spec: QuadratureSpec | None = None, degree=0,
                       return_scale=False):
    """Integral of f(x) * weight(x) over the real line.

    `f` is vectorised and may return shape (m,) or (m, K) for K integrands at
    once. Errors are controlled relative to the integral of |f| w, which is
    the only meaningful scale for high-degree polynomial integrands; with
    return_scale=True that scale is returned alongside the value.
    """
    if spec is None:
        spec = make_spec(weight, degree=degree)
    coarse, _, zero = _apply(f, weight, spec.max_halfwidth, spec.panels)
    if zero:
        z = 0.0 if np.ndim(coarse) == 0 else np.zeros_like(coarse)
        return (z, z) if return_scale else z
    fine, scale, _ = _apply(f, weight, spec.max_halfwidth, 2 * spec.panels)
    err = np.abs(fine - coarse)
    bound = spec.tol * np.maximum(scale, 1e-300)
    if np.any(err > bound):
        raise QuadratureError(
            "panel refinement disagreement %.3e exceeds %.3e" % (np.max(err / np.maximum(scale, 1e-300)), spec.tol))
    return (fine, scale) if return_scale else fine


@lru_cache(maxsize=None)
def _gl(order):
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _side(edge, direction, half, layer, sqrt_edge, order):
    # panels of width layer, 2 layer, 4 layer, ... moving away from `edge`
    u, w = _gl(order)
    xs, ws = [], []
    lo = 0.0
    hi = min(layer, half) if layer else half
    first = True
    while lo < half:
        if first and sqrt_edge:
            d = lo + (hi - lo) * u * u
            dw = w * 2.0 * (hi - lo) * u
        else:
            d = lo + (hi - lo) * u
            dw = w * (hi - lo)
        xs.append(edge + direction * d)
        ws.append(dw)
        first = False
        lo, hi = hi, min(2.0 * hi, half)
    return xs, ws


def graded_rule(lo, hi, left_layer=None, right_layer=None, left_sqrt=False, right_sqrt=False,
                order=40):
    """Nodes and weights on [lo, hi], panels grading geometrically toward
    either end from a first panel of the given width.  A `*_sqrt` end gets
    a quadratic map on its first panel, which absorbs inverse square-root
    or square-root behaviour there.  Log singularities are handled by a
    small layer width alone."""
    if not hi > lo:
        return np.empty(0), np.empty(0)
    half = 0.5 * (hi - lo)
    xl, wl = _side(lo, 1.0, half, left_layer, left_sqrt, order)
    xr, wr = _side(hi, -1.0, half, right_layer, right_sqrt, order)
    x = np.concatenate(xl + xr)
    w = np.concatenate(wl + wr)
    order = np.argsort(x, kind="stable")
    return x[order], w[order]
