"""The 2x2 block symbol of the symmetric recurrence, its cubic x^2 = P(z, s),
the curves Gamma_1(s), Gamma_2(s), the measures mu_j^s and block-Toeplitz
truncations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .linalg import BandedMatrix
from .quadrature import graded_rule


class RootMatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SymbolData:
    s: float
    b: float
    a_s: float
    b_s: float
    c_s: float
    A_minus: np.ndarray
    A_zero: np.ndarray
    A_plus: np.ndarray

    def matrix(self, z):
        """A_s(z) = A^{(-1)} / z + A^{(0)} + A^{(1)} z."""
        return self.A_minus / z + self.A_zero + self.A_plus * z


def symbol_blocks(s, b) -> SymbolData:
    if s < 0 or not b > 0:
        raise ValueError("need s >= 0 and b > 0")
    a_s = b * s / 2.0
    b_s = (1.0 + b * b) * s * s / 4.0
    c_s = a_s * b_s
    Am = np.array([[0.0, 0.0], [1.0, 0.0]])
    A0 = np.array([[a_s, 1.0], [b_s, -a_s]])
    Ap = np.array([[c_s, b_s], [0.0, -c_s]])
    return SymbolData(float(s), float(b), a_s, b_s, c_s, Am, A0, Ap)


def eval_P(z, s, b):
    """P(z, s) = (4 + z s^2 (1+b^2))^2 (4 + z s^2 b^2) / (64 z)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == 0):
        raise ZeroDivisionError("P has a pole at z = 0")
    s2 = s * s
    out = (4 + z * s2 * (1 + b * b)) ** 2 * (4 + z * s2 * b * b) / (64 * z)
    return out[()] if out.ndim == 0 else out


def dP(z, s, b):
    """dP/dz."""
    z = np.asarray(z, dtype=np.complex128)
    A = s * s * (1 + b * b)
    B = s * s * b * b
    u, v = 4 + A * z, 4 + B * z
    return (2 * A * u * v + B * u * u) / (64 * z) - u * u * v / (64 * z * z)


def cubic_coeffs(x, s, b):
    """Monic (c2, c1, c0) of A^2 B z^3 + (8AB + 4A^2) z^2 + (16B + 32A - 64x^2) z + 64."""
    x = np.asarray(x, dtype=np.complex128)
    A = s * s * (1 + b * b)
    B = s * s * b * b
    lead = A * A * B
    c2 = np.full(x.shape, (8 * A * B + 4 * A * A) / lead, dtype=np.complex128)
    c1 = (16 * B + 32 * A - 64 * x * x) / lead
    c0 = np.full(x.shape, 64.0 / lead, dtype=np.complex128)
    return c2, c1, c0


@dataclass(frozen=True)
class RootTriple:
    z1: complex
    z2: complex
    z3: complex
    x: complex
    s: float
    ties: tuple = ()

    def as_array(self):
        return np.array([self.z1, self.z2, self.z3])


_TIE = 1e-10


def _order_index(roots, tie=None):
    """Per-row permutation sorting by modulus; near-equal moduli are put in
    principal-argument order."""
    tie = _TIE if tie is None else tie
    mod = np.abs(roots)
    arg = np.angle(roots)
    order = np.argsort(mod, axis=1, kind="stable")
    rows = np.arange(roots.shape[0])
    for _ in range(2):
        for j in range(2):
            p, q = order[:, j].copy(), order[:, j + 1].copy()
            mp, mq = mod[rows, p], mod[rows, q]
            swap = (np.abs(mp - mq) <= tie * np.maximum(mq, 1e-300)) & (arg[rows, p] > arg[rows, q])
            order[swap, j], order[swap, j + 1] = q[swap], p[swap]
    m = mod[rows[:, None], order]
    ties = np.abs(np.diff(m, axis=1)) <= _TIE * np.maximum(m[:, 1:], 1e-300)
    return order, ties


def shifted_cubic_coeffs(x, s, b):
    """Monic cubic in u = 4 + s^2 (1+b^2) z:
    u^3 + (4/b^2) u^2 - (64 x^2 / B) u + 256 x^2 / B = 0, B = s^2 b^2.

    All three z-roots crowd around -4/(s^2(1+b^2)) when b is large; in u
    they are well separated, which is why the solve happens here.
    """
    x = np.asarray(x, dtype=np.complex128)
    B = s * s * b * b
    c2 = np.full(x.shape, 4.0 / (b * b), dtype=np.complex128)
    c1 = -64.0 * x * x / B
    c0 = 256.0 * x * x / B
    return c2, c1, c0


def _horner_step(r, c2, c1, c0):
    f = ((r + c2) * r + c1) * r + c0
    df = (3 * r + 2 * c2) * r + c1
    with np.errstate(over="ignore", invalid="ignore"):
        cand = r - np.where(df != 0, f / np.where(df != 0, df, 1), 0)
        fc = ((cand + c2) * cand + c1) * cand + c0
        # a step that blows up is simply rejected
        return np.where(np.abs(fc) <= np.abs(f), cand, r)


def _solve(x, s, b, polish=True, tie=None):
    """Ordered (z, u) root arrays of shape (m, 3) plus tie flags."""
    if not s > 0:
        raise ValueError("s must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
    c2, c1, c0 = shifted_cubic_coeffs(x, s, b)
    u, ok = kernels.cubic_roots(np.ascontiguousarray(c2), np.ascontiguousarray(c1),
                                np.ascontiguousarray(c0))
    u = np.asarray(u)
    if not np.all(ok):
        raise RuntimeError("cubic QR failed to deflate")
    if polish:
        u = _horner_step(u, c2[:, None], c1[:, None], c0[:, None])
    A = s * s * (1 + b * b)
    z = (u - 4.0) / A
    if polish:
        # roots with |A z| < 1 lose digits in u - 4; one Newton step on the
        # z-cubic, which is well conditioned there, restores them
        small = np.abs(u - 4.0) < 1.0
        if np.any(small):
            d2, d1, d0 = cubic_coeffs(x, s, b)
            zn = _horner_step(z, d2[:, None], d1[:, None], d0[:, None])
            z = np.where(small, zn, z)
            u = np.where(small, 4.0 + A * z, u)
    order, ties = _order_index(z, tie)
    rows = np.arange(z.shape[0])[:, None]
    return z[rows, order], u[rows, order], ties


def roots_z_batch(x, s, b, polish=True):
    """Roots of x^2 = P(z, s) for each x, ordered |z1| <= |z2| <= |z3|.

    Returns (roots (m, 3), ties (m, 2)). Companion eigenvalues from the
    compiled/numpy QR kernel, then a Newton polish per root.
    """
    z, _, ties = _solve(x, s, b, polish)
    return z, ties


def roots_z(x, s, b) -> RootTriple:
    r, t = roots_z_batch([x], s, b)
    flags = tuple(i for i in range(2) if t[0, i])
    return RootTriple(complex(r[0, 0]), complex(r[0, 1]), complex(r[0, 2]), complex(x), float(s), flags)


def root_residual(z, x, s, b):
    """Relative residual of the cubic at z."""
    c2, c1, c0 = cubic_coeffs(np.asarray(x), s, b)
    f = ((z + c2) * z + c1) * z + c0
    scale = ((abs(z) + abs(c2)) * abs(z) + abs(c1)) * abs(z) + abs(c0)
    return np.abs(f) / scale


# ------------------------------------------------------------------ supports

@dataclass(frozen=True)
class SupportData:
    s: float
    b: float
    c1: float
    c2: float
    y1: float
    y2: float
    z_crit_plus: float
    z_crit_minus: float
    z_crit_zero: float


def support_constants(b):
    """(c1, c2). With r = sqrt(b^2+1)(9b^2+1)^{3/2}, p = 27b^4 + 18b^2 - 1 one
    has r^2 - p^2 = 64 b^2, so the closed forms (p + r)/(32b^2) and
    (r - p)/(32b^2) equal 2/(r - p) and 2/(r + p); those cancellation-free
    versions are used where the direct ones would subtract nearly equal
    numbers."""
    r = math.sqrt(b * b + 1) * (9 * b * b + 1) ** 1.5
    p = 27 * b ** 4 + 18 * b * b - 1
    c1sq = (p + r) / (32 * b * b) if p >= 0 else 2.0 / (r - p)
    c2sq = 2.0 / (r + p) if p >= 0 else (r - p) / (32 * b * b)
    return math.sqrt(c1sq), math.sqrt(c2sq)


def supports(s, b) -> SupportData:
    if not (s > 0 and b > 0):
        raise ValueError("need s > 0 and b > 0")
    c1, c2 = support_constants(b)
    root = math.sqrt((9 * b * b + 1) / (b * b + 1))
    zp = (-1 + root) / (b * b) / (s * s)
    zm = -(1 + root) / (b * b) / (s * s)
    z0 = -4.0 / ((1 + b * b) * s * s)
    return SupportData(float(s), float(b), c1, c2, (c1 * s) ** 2, -(c2 * s) ** 2, zp, zm, z0)


def _gap12(x, s, b):
    r, _ = roots_z_batch([x], s, b)
    m = np.abs(r[0])
    return (m[1] - m[0]) / m[1]


def _gap23(y, s, b):
    r, _ = roots_z_batch([1j * y], s, b)
    m = np.abs(r[0])
    return (m[2] - m[1]) / m[2]


def _bisect_onset(gap, lo, hi, thresh, iters=200):
    # lo: gap below threshold, hi: gap above
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if gap(mid) > thresh:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def locate_c1(s, b, thresh=1e-9):
    """Bisection for the right end of Gamma_1(s): where |z1| = |z2| stops."""
    c1, _ = support_constants(b)
    hi = 2.0 * c1 * s
    while _gap12(hi, s, b) <= thresh:
        hi *= 2.0
    return _bisect_onset(lambda x: _gap12(x, s, b), 0.0, hi, thresh)


def locate_c2(s, b, thresh=1e-9):
    """Bisection on the imaginary axis for where |z2| = |z3| starts."""
    _, c2 = support_constants(b)
    hi = 4.0 * c2 * s + 1.0
    while _gap23(hi, s, b) > thresh:
        hi *= 2.0
    lo = 0.0
    # reversed roles: the gap is open below c2 s and closes above it
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _gap23(mid, s, b) > thresh:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ------------------------------------------------------------------ densities

def _eps(x):
    return 1e-8 * (1.0 + np.abs(x))


def _match(onl, off):
    """Index of the on-line root nearest to each off-line value, with a
    collision test: the runner-up must be clearly farther away."""
    d = np.abs(onl - off[:, None])
    order = np.argsort(d, axis=1)
    best = order[:, 0]
    rows = np.arange(len(off))
    d0 = d[rows, best]
    d1 = d[rows, order[:, 1]]
    bad = ~(d0 < 0.25 * d1)
    return best, bad


def log_derivative(x, u, b):
    """z'/z along x^2 = P(z, s), written in u = 4 + s^2(1+b^2) z.

    From log P = 2 log u + log(4 + b^2 u) - log(u - 4) + const one gets
    u' = 2 / (x G) with G = 2/u + b^2/(4 + b^2 u) - 1/(u - 4), and
    z'/z = u' / (u - 4). No s dependence survives.
    """
    G = 2.0 / u + b * b / (4.0 + b * b * u) - 1.0 / (u - 4.0)
    return 2.0 / (x * G * (u - 4.0))


def _boundary_values(pts, s, b, j, side, eps0):
    """On-line u-roots matching the j-th root at pts + side*eps (side complex
    unit), with eps shrunk where the nearest-neighbour pairing is ambiguous."""
    _, onl, _ = _solve(pts, s, b)
    idx = np.full(len(pts), -1)
    todo = np.arange(len(pts))
    eps = eps0.copy()
    for _ in range(8):
        if len(todo) == 0:
            break
        # off the curve the moduli differ, if only slightly: no tie-breaking
        _, off, _ = _solve(pts[todo] + side * eps[todo], s, b, tie=0.0)
        best, bad = _match(onl[todo], off[:, j])
        idx[todo[~bad]] = best[~bad]
        todo = todo[bad]
        eps[todo] *= 1e-2
    return onl, idx, todo


def mu_density_batch(x, s, b, which=1):
    """Density of mu_j^s; zero off Gamma_j(s).

    which=1: x real, density with respect to dx, + side above the axis.
    which=2: pass y (real) for the point iy, density with respect to |dx| = dy,
    upward orientation so the + side is the left half plane.
    Boundary values: roots at the offset points are matched to the on-line
    roots by proximity (eps = 1e-8 (1 + |x|), reduced where the pairing is
    ambiguous near branch points); the log-derivatives are then evaluated on
    the line itself.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    c1, c2 = support_constants(b)
    inside = np.abs(x) < c1 * s if which == 1 else np.abs(x) > c2 * s
    out = np.zeros(len(x))
    if not np.all(inside):
        if np.any(inside):
            out[inside] = mu_density_batch(x[inside], s, b, which)
        return out
    if which == 1:
        # x = 0 is a branch point (double root z = -4/(s^2(1+b^2))); the
        # density is continuous there, so take the value just beside it
        tiny = 1e-12 * c1 * s
        x = np.where(np.abs(x) < tiny, tiny, x)
    e = _eps(x)
    if which == 1:
        pts = x.astype(np.complex128)
        sp, sm, j = 1j, -1j, 0
    elif which == 2:
        pts = 1j * x
        sp, sm, j = -1.0, 1.0, 1
    else:
        raise ValueError("which must be 1 or 2")
    onl, ip, badp = _boundary_values(pts, s, b, j, sp, e)
    _, im, badm = _boundary_values(pts, s, b, j, sm, e)
    bad = np.zeros(len(x), dtype=bool)
    bad[badp] = True
    bad[badm] = True
    bad |= ip == im
    if np.any(bad):
        raise RootMatchError("ambiguous boundary-value matching at x = %r" % (x[bad][:5].tolist(),))
    rows = np.arange(len(x))
    Lp = log_derivative(pts, onl[rows, ip], b)
    Lm = log_derivative(pts, onl[rows, im], b)
    if which == 1:
        dens = (Lp - Lm) / (4j * np.pi)
    else:
        dens = (Lp - Lm) / (4 * np.pi)
    return dens.real


def mu_density(x, s, b, which=1):
    return float(mu_density_batch(np.array([x], dtype=np.float64), s, b, which)[0])


def mu1_rule(s, b):
    """Quadrature on [0, c1 s] for mu_1^s: a layer of width ~c2 s at the
    origin and an inverse square-root edge at c1 s."""
    c1, c2 = support_constants(b)
    L = c1 * s
    return graded_rule(0.0, L, left_layer=min(c2 * s, L) * 1e-3,
                       right_layer=L / 16, right_sqrt=True)


def mu1_cdf(s, b):
    """CDF of mu_1^s as a callable, from cumulative sums over mu1_rule."""
    xx, ww = mu1_rule(s, b)
    cum = np.cumsum(ww * mu_density_batch(xx, s, b, 1))
    half = cum[-1]
    L = support_constants(b)[0] * s

    def F(x):
        x = np.asarray(x, dtype=np.float64)
        m = np.interp(np.abs(x), np.concatenate(([0.0], xx, [L])),
                      np.concatenate(([0.0], cum, [half])))
        return 0.5 + np.sign(x) * 0.5 * m / half
    return F


def tail_scale(s, b):
    """Height beyond which mu_2^s is in its K/y^2 regime, times 10^3."""
    return 1e3 * max(1.0, b, 1.0 / b) * s


def mu2_tail(T, s, b):
    """Mass of mu_2^s on one half of Gamma_2(s) above height T, from the
    expansion K/y^2 + K3/y^3 fitted at T and 2T."""
    d = mu_density_batch(np.array([T, 2 * T]), s, b, 2)
    f1, f2 = d[0] * T * T, d[1] * 4 * T * T
    k3_over_T = 2.0 * (f1 - f2)
    K = f1 - k3_over_T
    return K / T + k3_over_T / (2 * T)


def mu_mass(s, b, which=1):
    """Total mass of mu_j^s."""
    c1, c2 = support_constants(b)
    if which == 1:
        xx, ww = mu1_rule(s, b)
        return float(2 * np.sum(ww * mu_density_batch(xx, s, b, 1)))
    a = c2 * s
    T = tail_scale(s, b)
    yy, ww = graded_rule(a, T, left_layer=a, left_sqrt=True)
    body = np.sum(ww * mu_density_batch(yy, s, b, 2))
    return float(2 * (body + mu2_tail(T, s, b)))


# ------------------------------------------------------------------ Toeplitz

def block_toeplitz_truncation(sym: SymbolData, n_blocks) -> BandedMatrix:
    """T_n(A_s): block (k, l) equals A^{(k-l)}."""
    if n_blocks < 1:
        raise ValueError("n_blocks >= 1 required")
    N = 2 * n_blocks
    T = np.zeros((N, N))
    for k in range(n_blocks):
        T[2 * k:2 * k + 2, 2 * k:2 * k + 2] = sym.A_zero
        if k + 1 < n_blocks:
            T[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = sym.A_minus
            T[2 * k + 2:2 * k + 4, 2 * k:2 * k + 2] = sym.A_plus
    return BandedMatrix(N, 2 if N > 2 else 1, T, True)


def toeplitz_recurrence_arrays(sym: SymbolData, n_blocks):
    """The same matrix read as a four-term recurrence (a_k, b_k, c_k)."""
    N = 2 * n_blocks
    k = np.arange(N)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    a = sign * sym.a_s
    b = np.where(k >= 1, sym.b_s, 0.0)
    c = np.where(k >= 2, sign * sym.c_s, 0.0)
    return a, b, c
