"""The limiting zero distribution nu_1, the second measure nu_2 on the
imaginary axis, the external field, the constraint, logarithmic potentials
and the Euler-Lagrange residuals of the symmetric vector equilibrium problem."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import MeasureTable, kolmogorov_atoms_vs
from .quadrature import graded_rule
from .toeplitz_symbol import (mu_density_batch, roots_z_batch, support_constants,
                              tail_scale)

__all__ = [
    "MeasureTable", "EquilibriumResult", "BranchError", "kolmogorov_atoms_vs",
    "nu1_density_closed", "nu1_density_averaged", "nu1_table", "nu2_table",
    "external_field", "external_field_numeric", "sigma_density", "sigma_density_numeric",
    "log_potential", "el_residuals", "solve_equilibrium", "r2_numeric",
]


class BranchError(RuntimeError):
    pass


def _check_b(b):
    if not (b > 0 and math.isfinite(b)):
        raise ValueError("b must be positive and finite")


def _check_t(t):
    if not 0 < t < math.pi / 2:
        raise ValueError("t must lie in (0, pi/2)")


# ---------------------------------------------------------------- nu_1, closed

def _real_root(x2, b):
    """The real root below -4/b^2 of (4+Az)^2 (4+Bz) = 64 x^2 z (A = 1+b^2,
    B = b^2), vectorised over x2 = x^2 > 0."""
    A, B = 1.0 + b * b, b * b
    rho = A / B
    # z = -(4/B)(1+v); g changes sign once on v > 0
    def g(v):
        return -v * (1 - rho * (1 + v)) ** 2 + 4 * x2 * (1 + v) / B

    lo = np.full(x2.shape, -200.0)
    hi = np.full(x2.shape, 200.0)
    for _ in range(150):
        mid = 0.5 * (lo + hi)
        pos = g(np.exp(mid)) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    z = -(4.0 / B) * (1.0 + np.exp(0.5 * (lo + hi)))
    return _newton(z, x2, A, B, 3)


def _newton(z, x2, A, B, steps):
    for _ in range(steps):
        p, q = 4 + A * z, 4 + B * z
        f = p * p * q - 64 * x2 * z
        df = 2 * A * p * q + B * p * p - 64 * x2
        ok = df != 0
        step = np.where(ok, f / np.where(ok, df, 1), 0)
        zn = z - step
        pn, qn = 4 + A * zn, 4 + B * zn
        better = np.abs(pn * pn * qn - 64 * x2 * zn) <= np.abs(f)
        z = np.where(better, zn, z)
    return z


def _q_newton(q, x, B, steps):
    for _ in range(steps):
        h = ((B * x * q + 4) * q - 64 * x) * q + 256
        dh = (3 * B * x * q + 8) * q - 64 * x
        qn = q - h / dh
        hn = ((B * x * qn + 4) * qn - 64 * x) * qn + 256
        q = np.where(np.abs(hn) <= np.abs(h), qn, q)
    return q


def _complex_pair(x, b):
    """Upper member of the non-real root pair of the s = 1 cubic, 0 < x < c1.

    Returned as q = (4 + (1+b^2) z)/x, which satisfies
    b^2 x q^3 + 4 q^2 - 64 x q + 256 = 0 and tends to 8i as x -> 0 where z
    itself runs into the double root -4/(1+b^2). The starting guess comes
    from deflating the real root through Vieta's relations.
    """
    x = np.asarray(x, dtype=np.float64)
    x2 = x * x
    A, B = 1.0 + b * b, b * b
    r = _real_root(x2, b)
    mod2 = -64.0 / (A * A * B * r)
    e2 = (32 * A + 16 * B - 64 * x2) / (A * A * B)
    re = 0.5 * (e2 - mod2) / r
    im = np.sqrt(np.maximum(mod2 - re * re, 0.0))
    q0 = (4 + A * (re + 1j * im)) / x
    small = x < 1e-3
    q0 = np.where(small, 8j + 8 * x, q0)
    return _q_newton(q0, x, B, 8)


def nu1_density_closed(x, b):
    """Density of nu_1 from the algebraic closed form; vectorised.

    x = 0 (logarithmic singularity) returns +inf, |x| >= c1 returns 0.
    """
    _check_b(b)
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    c1, _ = support_constants(b)
    ax = np.abs(x)
    out = np.zeros(x.shape)
    out[ax == 0] = np.inf
    inner = (ax > 0) & (ax < c1)
    if np.any(inner):
        xi = ax[inner]
        q = _complex_pair(xi, b)
        A, B = 1 + b * b, b * b
        z = (xi * q - 4) / A
        w = (4 + z * (b * b - 1)) * q / (16 * z)
        flip = w.imag >= 0
        q = np.where(flip, np.conj(q), q)
        z = np.where(flip, np.conj(z), z)
        w = np.where(flip, np.conj(w), w)
        # w real means the pair has merged (only at the support edge)
        edge = np.abs(w.imag) <= 1e-14 * np.maximum(1, np.abs(w))
        near_edge = xi > c1 * (1 - 1e-6)
        if np.any(edge & ~near_edge):
            raise BranchError("no root gives Im w < 0 at x = %r" % xi[edge & ~near_edge][:3].tolist())
        # 1 - iw vanishes as x -> 0 (w -> -i); the cubic for q lets the
        # O(x) factor come out exactly
        num = xi * (16 * q - 1j * (b * b - 1) * q * q
                    - 2j * q * (64 - B * q * q) / (q + 8j))
        one_minus = num / (A * 16 * z)
        d = (np.log(np.abs(2 - one_minus)) - np.log(np.abs(one_minus))) / (2 * math.pi)
        out[inner] = d
    return float(out[0]) if scalar else out


# -------------------------------------------------------------- nu_1, averaged

def nu1_density_averaged(x, b):
    """Density of nu_1 as the s-average of mu_1^s over [|x|/c1, 1]."""
    _check_b(b)
    c1, _ = support_constants(b)
    ax = abs(float(x))
    if ax >= c1:
        return 0.0
    if ax == 0:
        return math.inf
    s0 = ax / c1
    # inverse square-root edge at s0, scale-invariant structure above it
    s, w = graded_rule(s0, 1.0, left_layer=min(s0, 0.5 * (1 - s0)), left_sqrt=True)
    return float(np.sum(w * _mu_over_s(ax, s, b, 1)))


def _mu_over_s(x, s, b, which):
    # mu_j^s(x) = mu_j^1(x/s)/s
    return mu_density_batch(x / s, 1.0, b, which) / s


# -------------------------------------------------------------------- tables

def _equidistribute(xa, d2, m):
    """m nodes from xa[0] to xa[-1] with local density proportional to
    |f''|^{1/3}, given |f''| sampled on the fine increasing grid xa; this
    balances the trapezoid error h^3 |f''| / 12 across cells. A floor of 5%
    of the mean monitor keeps flat stretches covered."""
    mon = np.cbrt(d2)
    seg = 0.5 * (mon[1:] + mon[:-1]) * np.diff(xa)
    seg = seg + 0.05 * seg.sum() * np.diff(xa) / (xa[-1] - xa[0])
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    return np.interp(np.linspace(0, cum[-1], m), cum, xa)


def _second_derivative(xa, fa):
    d1 = np.diff(fa) / np.diff(xa)
    xm = 0.5 * (xa[1:] + xa[:-1])
    d2 = np.abs(np.diff(d1) / np.diff(xm))
    return np.concatenate(([d2[0]], d2, [d2[-1]]))


def _nu1_half_grid(b, m):
    """m nodes on [0, c1] equidistributing the trapezoid error of nu_1."""
    c1, c2 = support_constants(b)
    lo = min(c2, c1) * 1e-6
    xa = np.unique(np.concatenate((
        np.geomspace(lo, 0.5 * c1, 4000),
        c1 * (1 - np.geomspace(0.5, 1e-12, 4000)))))
    d2 = _second_derivative(xa, nu1_density_closed(xa, b))
    nodes = _equidistribute(xa, d2, m - 1)
    return np.concatenate(([0.0], nodes[:-1], [c1]))


def _nu1_cell_mass(h, b):
    x, w = graded_rule(0.0, h, left_layer=h * 1e-6)
    return float(np.sum(w * nu1_density_closed(x, b)))


def nu1_table(b, grid=6001) -> MeasureTable:
    """nu_1 on a grid symmetric about 0, nodes placed by equidistributing
    the trapezoid error (so they crowd toward the edges +-c1 like Chebyshev
    points and toward the logarithmic singularity at the origin).

    The value at x = 0 is capped and flagged: it is chosen so that the two
    trapezoid cells next to the origin carry their exact mass.
    """
    _check_b(b)
    if grid < 5:
        raise ValueError("grid must have at least 5 nodes")
    c1, _ = support_constants(b)
    m = grid // 2 + 1
    half = _nu1_half_grid(b, m)
    x = np.concatenate((-half[:0:-1], half))
    if grid % 2 == 0:
        # drop the node nearest the edge on one side to keep the count
        x = np.delete(x, 1)
    d = nu1_density_closed(x, b)
    i0 = int(np.flatnonzero(x == 0)[0])
    h = x[i0 + 1]
    cell = _nu1_cell_mass(h, b)
    d[i0] = 2 * cell / h - d[i0 + 1]
    flags = np.zeros(len(x), dtype=bool)
    flags[i0] = True
    mass = 2 * _nu1_half_mass(b)
    return MeasureTable("real-line", x, d, mass, (-c1, c1), False, flags)


def _nu1_half_mass(b):
    c1, _ = support_constants(b)
    x, w = graded_rule(0.0, c1, left_layer=c1 * 1e-9, right_layer=c1 / 16, right_sqrt=True)
    return float(np.sum(w * nu1_density_closed(x, b)))


def mu2_asymptote(b):
    """(K, K3) with mu_2^1(y) ~ K/y^2 + K3/y^3 for large y."""
    T = tail_scale(1.0, b)
    d = mu_density_batch(np.array([T, 2 * T]), 1.0, b, 2)
    f1, f2 = d[0] * T * T, d[1] * 4 * T * T
    K3 = 2.0 * (f1 - f2) * T
    return f1 - K3 / T, K3


def _G(y, b):
    """int_y^inf mu_2^1(v) / v dv for sorted y >= c2, accumulated downward."""
    T = tail_scale(1.0, b)
    K, K3 = mu2_asymptote(b)
    _, c2 = support_constants(b)
    pts = np.concatenate((y, [T]))
    lo, hi = pts[:-1], pts[1:]
    nodes, weights, owner = [], [], []
    for i in range(len(y)):
        if hi[i] > lo[i]:
            first = abs(lo[i] - c2) <= 1e-14 * c2
            v, w = graded_rule(lo[i], hi[i], left_layer=hi[i] - lo[i], left_sqrt=first,
                               order=40 if first else 12)
            nodes.append(v)
            weights.append(w)
            owner.append(np.full(len(v), i))
    v = np.concatenate(nodes)
    cell = np.bincount(np.concatenate(owner),
                       weights=np.concatenate(weights) * mu_density_batch(v, 1.0, b, 2) / v,
                       minlength=len(y))
    top = K / (2 * T * T) + K3 / (3 * T ** 3)
    return top + np.cumsum(cell[::-1])[::-1]


def nu2_table(b, grid=10001) -> MeasureTable:
    """nu_2 on the imaginary axis (grid holds y for the point iy).

    Flat at the saturated level on |y| < c2. Above c2 the nodes
    equidistribute the trapezoid error up to a height Y past which the
    density is K/(2y^2); `tail` records K/2.
    """
    _check_b(b)
    if grid < 9:
        raise ValueError("grid must have at least 9 nodes")
    c1, c2 = support_constants(b)
    Y = tail_scale(1.0, b)
    n_in = max(2, grid // 40)
    n_out = grid // 2 + 1 - n_in
    # nu_2 = G(y) above c2 with G' = -mu_2^1(y)/y: sample G' finely
    ya = np.unique(np.concatenate((
        c2 * (1 + np.geomspace(1e-12, 1.0, 2000)),
        np.geomspace(2 * c2, Y, 4000))))
    d2 = np.abs(np.gradient(mu_density_batch(ya, 1.0, b, 2) / ya, ya))
    outer = _equidistribute(np.concatenate(([c2], ya)), np.concatenate(([d2[0]], d2)), n_out)
    inner = np.linspace(0.0, c2, n_in + 1)[:-1]
    half = np.concatenate((inner, outer))
    G = _G(outer, b)
    dens_half = np.concatenate((np.full(n_in, G[0]), G))
    y = np.concatenate((-half[:0:-1], half))
    d = np.concatenate((dens_half[:0:-1], dens_half))
    K, _ = mu2_asymptote(b)
    return MeasureTable("imaginary-line", y, d, 0.5 - K / Y, (-Y, Y), False, None, K / 2)


# ------------------------------------------------------------ field, sigma

def external_field(x, t):
    _check_t(t)
    return (math.pi - 2 * t) * np.abs(np.asarray(x, dtype=np.float64))


def external_field_numeric(x, t):
    """(1/2) int_0^{|x|/c1} log|z2/z1|(x, s) ds."""
    _check_t(t)
    b = math.tan(t)
    c1, _ = support_constants(b)
    ax = abs(float(x))
    if ax == 0:
        return 0.0
    smax = ax / c1
    s, w = graded_rule(0.0, smax, left_layer=smax * 1e-7, right_layer=smax / 16, right_sqrt=True)
    # |z_j(x, s)| = |z_j(x/s, 1)| / s^2, so the ratio depends on x/s only
    z, _ = roots_z_batch(ax / s, 1.0, b)
    f = np.log(np.abs(z[:, 1]) / np.abs(z[:, 0]))
    return 0.5 * float(np.sum(w * f))


def sigma_density(t):
    _check_t(t)
    return 2 * t / math.pi


def sigma_density_numeric(y, t):
    """int_0^{|y|/c2} mu_2^s(iy) ds, the part below s_T = |y|/T replaced by
    the large-argument asymptote of mu_2."""
    _check_t(t)
    b = math.tan(t)
    _, c2 = support_constants(b)
    ay = abs(float(y))
    if ay == 0:
        raise ValueError("y must be nonzero")
    smax = ay / c2
    T = tail_scale(1.0, b)
    sT = ay / T
    K, K3 = mu2_asymptote(b)
    # mu_2^s(y) = mu_2^1(y/s)/s ~ K s / y^2 + K3 s^2 / y^3
    tail = K * sT * sT / (2 * ay * ay) + K3 * sT ** 3 / (3 * ay ** 3)
    s, w = graded_rule(sT, smax, left_layer=sT, right_layer=(smax - sT) / 16, right_sqrt=True)
    return tail + float(np.sum(w * _mu_over_s(ay, s, b, 2)))


def r2_numeric(y, b):
    """-(1/2) int_0^1 log|z3/z2|(iy, s) ds, which the second residual equals;
    zero for |y| >= c2 where iy lies on Gamma_2(s) for every s <= 1."""
    _check_b(b)
    _, c2 = support_constants(b)
    ay = abs(float(y))
    s0 = ay / c2
    if s0 >= 1:
        return 0.0
    s, w = graded_rule(max(s0, 1e-12), 1.0, left_layer=(1 - s0) / 8, left_sqrt=s0 > 0)
    z, _ = roots_z_batch(1j * ay / s, 1.0, b)
    return -0.5 * float(np.sum(w * np.log(np.abs(z[:, 2]) / np.abs(z[:, 1]))))


# ------------------------------------------------------------ potentials

def _cell_integrals(u0, u1, c):
    """int of log(u^2+c^2) and u*log(u^2+c^2) over [u0, u1], elementwise."""
    def F0(u):
        r = u * u + c * c
        lr = np.log(np.where(r > 0, r, 1.0))
        at = np.where(c > 0, 2 * c * np.arctan2(u, np.where(c > 0, c, 1.0)), 0.0)
        return u * lr - 2 * u + at

    def F1(u):
        r = u * u + c * c
        lr = np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return 0.5 * (lr - u * u)

    return F0(u1) - F0(u0), F1(u1) - F1(u0)


_GL4 = (lambda t, w: (0.5 * (t + 1), 0.5 * w))(*np.polynomial.legendre.leggauss(4))


def log_potential(mu: MeasureTable, x):
    """U(x) = int log(1/|y - x|) dmu(y) for the piecewise-linear interpolant
    of the table; x may be complex. Cells close to x are integrated exactly
    (the log singularity sits there), the rest by 4-point Gauss."""
    x = complex(x)
    g = np.asarray(mu.grid, dtype=np.float64)
    d = np.asarray(mu.density, dtype=np.float64)
    if mu.atomic:
        pts = g if mu.support_kind == "real-line" else 1j * g
        return float(-np.sum(d * np.log(np.abs(pts - x))))
    # distance to a point of the measure as |y - q| with q complex
    q = x if mu.support_kind == "real-line" else -1j * x
    qr, c = q.real, abs(q.imag)
    y0, y1 = g[:-1], g[1:]
    d0, d1 = d[:-1], d[1:]
    h = y1 - y0
    dist = np.maximum(np.maximum(y0 - qr, qr - y1), 0.0)
    dist = np.hypot(dist, c)
    near = dist < 4 * h
    val = 0.0
    # far cells: the integrand is smooth on the cell, 4-point Gauss
    far = ~near
    if np.any(far):
        t, wt = _GL4
        yy = y0[far, None] + h[far, None] * t[None, :]
        dd = d0[far, None] + (d1 - d0)[far, None] * t[None, :]
        lg = 0.5 * np.log((yy - qr) ** 2 + c * c)
        val += float(np.sum(h[far] * np.sum(wt * dd * lg, axis=1)))
    if np.any(near):
        # exact integrals in coordinates local to the cell, so that nothing
        # large cancels: J0 = int log|y-q|, J1 = int (y - y0) log|y-q|
        a0, a1 = y0[near] - qr, y1[near] - qr
        I0, I1 = _cell_integrals(a0, a1, c)
        J0 = 0.5 * I0
        J1 = 0.5 * (I1 - a0 * I0)
        hn = h[near]
        val += float(np.sum(d0[near] * J0 + (d1 - d0)[near] / hn * J1))
    U = -float(val)
    if mu.tail:
        # density tail/y^2 beyond both ends; log|y - q| = log|y| + O(|q|/y)
        for Y in (abs(g[0]), abs(g[-1])):
            U -= mu.tail * (math.log(Y) + 1) / Y
    return U


# ------------------------------------------------------------ assembly

@dataclass(frozen=True)
class EquilibriumResult:
    b: float
    t: float
    nu1: MeasureTable
    nu2: MeasureTable
    c1: float
    c2: float
    V_slope: float
    sigma_density: float
    lagrange_l: float
    saturation_gap: float


def solve_equilibrium(b, grid=6001, grid2=10001) -> EquilibriumResult:
    """Build the nu_1, nu_2 tables and calibrate l so that R1(0) = 0."""
    _check_b(b)
    t = math.atan(b)
    c1, c2 = support_constants(b)
    n1 = nu1_table(b, grid)
    n2 = nu2_table(b, grid2)
    sig = 2 * t / math.pi
    inside = np.abs(n2.grid) < c2
    gap = float(np.max(np.abs(n2.density[inside] - sig))) if np.any(inside) else 0.0
    l = 2 * log_potential(n1, 0.0) - log_potential(n2, 0.0)
    return EquilibriumResult(float(b), t, n1, n2, c1, c2, math.pi - 2 * t, sig, l, gap)


def el_residuals(x, result: EquilibriumResult):
    """(R1, R2) at the point x (real or complex):
    R1 = 2U^{nu1} - U^{nu2} - l + V, R2 = -U^{nu1} + 2U^{nu2}."""
    x = complex(x)
    u1 = log_potential(result.nu1, x)
    u2 = log_potential(result.nu2, x)
    V = result.V_slope * abs(x.real) if x.imag == 0 else float("nan")
    r1 = 2 * u1 - u2 - result.lagrange_l + V if x.imag == 0 else float("nan")
    r2 = -u1 + 2 * u2
    return r1, r2
