"""Multiple Meixner-Pollaczek polynomials P_{k1,k2}.

Polynomials are generated by the four-term recurrences along a staircase
path. Any lattice point needed off the path is produced with a fixed default
rule, so every request compiles to a straight-line program of the form

    v[m] = (x - alpha_m) v[p_m] - beta_m v[q_m] - gamma_m v[r_m]

that is shared by evaluation, coefficient expansion and zero finding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from ._backend import kernels
from .quadrature import integrate_weighted, make_spec, mp_weight_obj
from .specfun import ModelParams, log_gamma_complex


@dataclass(frozen=True)
class IndexPair:
    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("indices must be nonnegative")

    @property
    def k(self):
        return self.k1 + self.k2

    def __iter__(self):
        return iter((self.k1, self.k2))


def _pair(idx):
    return idx if isinstance(idx, IndexPair) else IndexPair(*idx)


@dataclass(frozen=True)
class StaircasePath:
    steps: tuple

    def __post_init__(self):
        if any(s not in (1, 2) for s in self.steps):
            raise ValueError("steps must be 1 or 2")

    @property
    def terminal(self):
        return IndexPair(self.steps.count(1), self.steps.count(2))

    def points(self):
        k1 = k2 = 0
        out = [(0, 0)]
        for s in self.steps:
            if s == 1:
                k1 += 1
            else:
                k2 += 1
            out.append((k1, k2))
        return out

    @classmethod
    def canonical(cls, idx):
        idx = _pair(idx)
        return cls((1,) * idx.k1 + (2,) * idx.k2)

    @classmethod
    def diagonal(cls, k):
        # Q_0, Q_1 = P_{1,0}, Q_2 = P_{1,1}, ...
        return cls(tuple(1 if m % 2 == 0 else 2 for m in range(k)))


@dataclass(frozen=True)
class RecurrenceCoeffs:
    a: float
    b: float
    c: float

    def __iter__(self):
        return iter((self.a, self.b, self.c))


def _abc(k1, k2, lam, t1, t2):
    k = k1 + k2
    tn1, tn2 = math.tan(t1), math.tan(t2)
    s1, s2 = 1.0 / math.cos(t1) ** 2, 1.0 / math.cos(t2) ** 2
    a = (k + k1 + 2 * lam) / 2 * tn1 + k2 / 2 * tn2
    b = (k + 2 * lam - 1) / 4 * (k1 * s1 + k2 * s2)
    c = k1 * (k + 2 * lam - 1) * (k + 2 * lam - 2) * (tn1 - tn2) * s1 / 8
    return a, b, c


def recurrence_coeffs(idx, params: ModelParams, direction=1) -> RecurrenceCoeffs:
    """Coefficients of the step out of `idx` in the given direction.

    c is reported as 0 whenever the polynomial it multiplies has a negative
    index. On the edges k2 = 0 (direction 1) and k1 = 0 (direction 2) the b
    term multiplies the previous member of the classical one-weight family.
    """
    k1, k2 = _pair(idx)
    if direction == 1:
        a, b, c = _abc(k1, k2, params.lam, params.t1, params.t2)
        dead = k1 == 0 or k2 == 0
    elif direction == 2:
        a, b, c = _abc(k2, k1, params.lam, params.t2, params.t1)
        dead = k1 == 0 or k2 == 0
    else:
        raise ValueError("direction must be 1 or 2")
    return RecurrenceCoeffs(a, b, 0.0 if dead else c)


def _sources(k1, k2, direction):
    if direction == 1:
        q = (k1, k2 - 1) if k2 >= 1 else (k1 - 1, k2)
    else:
        q = (k1 - 1, k2) if k1 >= 1 else (k1, k2 - 1)
    return (k1, k2), q, (k1 - 1, k2 - 1)


def scaled_coeffs(k, n, params: ModelParams) -> RecurrenceCoeffs:
    """a_{k,n}, b_{k,n}, c_{k,n} of the diagonal sequence Q_{k,n}."""
    lam = params.lam
    T1, T2 = math.tan(params.t1), math.tan(params.t2)
    S1, S2 = 1.0 / math.cos(params.t1) ** 2, 1.0 / math.cos(params.t2) ** 2
    if k % 2 == 0:
        a = (3 * k + 4 * lam) / (4 * n) * T1 + k / (4 * n) * T2
        b = k * (k + 2 * lam - 1) / (8 * n * n) * (S1 + S2)
        c = k * (k + 2 * lam - 1) * (k + 2 * lam - 2) / (16 * n ** 3) * (T1 - T2) * S1
    else:
        a = (k + 1) / (4 * n) * T1 + (3 * k + 4 * lam - 1) / (4 * n) * T2
        b = (k + 2 * lam - 1) / (8 * n * n) * ((k + 1) * S1 + (k - 1) * S2)
        c = (k - 1) * (k + 2 * lam - 1) * (k + 2 * lam - 2) / (16 * n ** 3) * (T2 - T1) * S2
    if k < 2:
        c = 0.0
    return RecurrenceCoeffs(a, b, c)


def diagonal_arrays(n, params, scale=None):
    """Coefficient arrays (a, b, c) of Q_{0..n-1, scale}."""
    scale = n if scale is None else scale
    return linalg.recurrence_arrays(lambda k: tuple(scaled_coeffs(k, scale, params)), n)


# ---------------------------------------------------------------- programs

@dataclass(frozen=True)
class Program:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    chain: np.ndarray
    slots: dict
    scale: float

    @property
    def degree(self):
        return len(self.chain) - 1


def compile_program(idx, params: ModelParams, path: StaircasePath | None = None, scale=1.0):
    idx = _pair(idx)
    path = StaircasePath.canonical(idx) if path is None else path
    if path.terminal != idx:
        raise ValueError("path does not end at %s" % (idx,))
    pts = path.points()
    via = {pts[m + 1]: (pts[m], path.steps[m]) for m in range(len(path.steps))}
    slots = {(0, 0): 1}
    rows = []

    def get(ij):
        if ij[0] < 0 or ij[1] < 0:
            return 0
        s = slots.get(ij)
        if s is not None:
            return s
        if ij in via:
            src, d = via[ij]
        elif ij[1] >= 1:
            src, d = (ij[0], ij[1] - 1), 2
        else:
            src, d = (ij[0] - 1, 0), 1
        a, b, c = recurrence_coeffs(src, params, d)
        pv, qv, rv = (get(u) for u in _sources(src[0], src[1], d))
        rows.append((a / scale, b / scale ** 2, c / scale ** 3, pv, qv, rv))
        slots[ij] = len(rows) + 1
        return slots[ij]

    chain = [get(pt) for pt in pts]
    if rows:
        al, be, ga, pp, qq, rr = (np.array(col) for col in zip(*rows))
    else:
        al = be = ga = np.zeros(0)
        pp = qq = rr = np.zeros(0, dtype=np.int64)
    as_i = lambda v: np.ascontiguousarray(v, dtype=np.int64)
    return Program(np.ascontiguousarray(al, dtype=np.float64), np.ascontiguousarray(be, dtype=np.float64),
                   np.ascontiguousarray(ga, dtype=np.float64), as_i(pp), as_i(qq), as_i(rr),
                   as_i(chain), slots, float(scale))


def _run(prog: Program, x):
    x = np.asarray(x)
    dtype = np.complex128 if np.iscomplexobj(x) else np.float64
    v = np.zeros((len(prog.alpha) + 2,) + x.shape, dtype=dtype)
    v[1] = 1.0
    for m in range(len(prog.alpha)):
        v[m + 2] = ((x - prog.alpha[m]) * v[prog.p[m]] - prog.beta[m] * v[prog.q[m]]
                    - prog.gamma[m] * v[prog.r[m]])
    return v


def eval_poly(idx, params: ModelParams, x, path: StaircasePath | None = None):
    """P_{k1,k2}(x) for real or complex x (array friendly)."""
    prog = compile_program(idx, params, path)
    out = _run(prog, x)[prog.chain[-1]]
    return out[()] if out.ndim == 0 else out


def eval_diagonal(k, n, params, x):
    """Q_{k,n}(x) via the scaled four-term recurrence."""
    x = np.asarray(x)
    q2 = np.zeros_like(x, dtype=np.result_type(x, float))
    q1 = np.zeros_like(q2)
    q0 = np.ones_like(q2)
    for m in range(k):
        a, b, c = scaled_coeffs(m, n, params)
        q0, q1, q2 = (x - a) * q0 - b * q1 - c * q2, q0, q1
    return q0


def diagonal_ratio(k, r, n, params, x):
    """Q_{k-r,n}(x) / Q_{k,n}(x), with the running triple renormalised so
    large k does not overflow."""
    if not 0 <= r <= k:
        raise ValueError("need 0 <= r <= k")
    x = np.asarray(x)
    q0 = np.ones_like(x, dtype=np.result_type(x, float))
    q1 = np.zeros_like(q0)
    q2 = np.zeros_like(q0)
    hist = [q0.copy()]
    for m in range(k):
        a, b, c = scaled_coeffs(m, n, params)
        q0, q1, q2 = (x - a) * q0 - b * q1 - c * q2, q0, q1
        hist.append(q0.copy())
        big = np.maximum(np.abs(q0), 1.0)
        q0, q1, q2 = q0 / big, q1 / big, q2 / big
        # keep the history in the same units as the running triple
        hist = [h / big for h in hist[-(r + 1):]]
    return hist[0] / hist[-1]


def coefficient_vector(idx, params: ModelParams, exact=False, path=None):
    """Monomial coefficients, lowest degree first, leading coefficient 1.

    With exact=True the recurrence runs in rational arithmetic on the float
    recurrence coefficients, which removes all cancellation error from the
    expansion itself.
    """
    idx = _pair(idx)
    if idx.k > 60 and not exact:
        raise ValueError("float coefficient expansion capped at degree 60")
    prog = compile_program(idx, params, path)
    conv = Fraction if exact else float
    zero = conv(0)
    vals = [[], [conv(1)]]
    for m in range(len(prog.alpha)):
        a, b, c = conv(prog.alpha[m]), conv(prog.beta[m]), conv(prog.gamma[m])
        P, Qv, R = vals[prog.p[m]], vals[prog.q[m]], vals[prog.r[m]]
        out = [zero] * (len(P) + 1)
        for i, v in enumerate(P):
            out[i + 1] += v
            out[i] -= a * v
        for i, v in enumerate(Qv):
            out[i] -= b * v
        for i, v in enumerate(R):
            out[i] -= c * v
        vals.append(out)
    res = vals[prog.chain[-1]]
    return res if exact else np.array(res, dtype=np.float64)


# ---------------------------------------------------------------- closed forms

def subleading_coeff(idx, params: ModelParams):
    k1, k2 = _pair(idx)
    k = k1 + k2
    return -(2 * params.lam + k - 1) / 2 * (k1 * math.tan(params.t1) + k2 * math.tan(params.t2))


def log_first_moment(k1, k2, lam, t1, t2):
    """(sign, log|h|) of int x^{k1} P_{k1,k2} w_1, no parameter validation."""
    k = k1 + k2
    sn = math.sin(t1 - t2)
    if k2 > 0 and sn == 0.0:
        return 0, -math.inf
    val = (math.lgamma(2 * lam + k) + math.lgamma(k1 + 1)
           + (k2 * math.log(abs(sn)) if k2 else 0.0)
           - (2 * lam + k + k1) * math.log(2.0)
           - (k + k1 + 2 * lam) * math.log(math.cos(t1))
           - k2 * math.log(math.cos(t2)))
    sign = -1 if (sn < 0 and k2 % 2 == 1) else 1
    return sign, val


def first_moment(idx, params: ModelParams, j=1):
    k1, k2 = _pair(idx)
    if j == 1:
        return log_first_moment(k1, k2, params.lam, params.t1, params.t2)
    if j == 2:
        return log_first_moment(k2, k1, params.lam, params.t2, params.t1)
    raise ValueError("j must be 1 or 2")


# ---------------------------------------------------------------- quadrature checks

@dataclass(frozen=True)
class OrthogonalityReport:
    residual: float
    worst: tuple | None
    conditions: int


def orthogonality_residual(idx, params: ModelParams, tol=1e-13) -> OrthogonalityReport:
    """Largest |int P x^m w_j| / int |P x^m| w_j over the defining conditions."""
    idx = _pair(idx)
    prog = compile_program(idx, params)
    worst, res, count = None, 0.0, 0
    for j, kj in ((1, idx.k1), (2, idx.k2)):
        if kj == 0:
            continue
        w = mp_weight_obj(params, j)
        spec = make_spec(w, tol=tol, degree=idx.k + kj)
        ms = np.arange(kj)

        def f(x):
            pv = _run(prog, x)[prog.chain[-1]]
            return pv[:, None] * x[:, None] ** ms[None, :]

        vals, scale = integrate_weighted(f, w, spec, return_scale=True)
        r = np.abs(vals) / scale
        count += kj
        m = int(np.argmax(r))
        if r[m] > res or worst is None:
            res, worst = float(r[m]), (j, m)
    return OrthogonalityReport(res, worst, count)


def moment_by_quadrature(idx, params: ModelParams, j=1, tol=1e-13):
    """int x^{k_j} P_{k1,k2}(x) w_j(x) dx."""
    idx = _pair(idx)
    kj = idx.k1 if j == 1 else idx.k2
    prog = compile_program(idx, params)
    w = mp_weight_obj(params, j)
    spec = make_spec(w, tol=tol, degree=idx.k + kj)
    return float(integrate_weighted(lambda x: _run(prog, x)[prog.chain[-1]] * x ** kj, w, spec))


# ---------------------------------------------------------------- Rodrigues

def rodrigues_terms(idx, params: ModelParams, x, order=(1, 2)):
    """Shift-term expansion of L_{t1}^{k1} L_{t2}^{k2} |Gamma(lam+k/2+i.)|^2,
    each term divided by |Gamma(lam+ix)|^2.

    Each L_t contributes e^{it} f(. + i/2) or -e^{-it} f(. - i/2); a term is a
    choice of sign per factor. `order` lists which family is applied first.
    """
    k1, k2 = _pair(idx)
    k = k1 + k2
    ts = []
    for fam in reversed(order):  # leftmost operator listed last in `order`
        ts += [params.t1] * k1 if fam == 1 else [params.t2] * k2
    ts = np.array(ts)
    signs = np.array(list(itertools.product((1, -1), repeat=k)), dtype=np.float64).reshape(2 ** k, k)
    phase = np.where(signs > 0, np.exp(1j * ts)[None, :], -np.exp(-1j * ts)[None, :]).prod(axis=1)
    delta = signs.sum(axis=1) / 2.0
    lam = params.lam
    base = lam + k / 2.0
    lg = (log_gamma_complex(base - delta + 1j * x) + log_gamma_complex(base + delta - 1j * x)
          - log_gamma_complex(lam + 1j * x) - log_gamma_complex(lam - 1j * x))
    return phase * np.exp(lg)


def rodrigues_constant(idx, params: ModelParams):
    k1, k2 = _pair(idx)
    return (-2j) ** (k1 + k2) * math.cos(params.t1) ** k1 * math.cos(params.t2) ** k2


def rodrigues_check(idx, params: ModelParams, x, order=(1, 2)):
    """Relative discrepancy between both sides of the Rodrigues formula at x."""
    idx = _pair(idx)
    if idx.k > 12:
        raise ValueError("Rodrigues expansion limited to k <= 12")
    lhs = rodrigues_terms(idx, params, float(x), order).sum()
    rhs = rodrigues_constant(idx, params) * eval_poly(idx, params, float(x))
    return float(abs(lhs - rhs) / abs(rhs))


# ---------------------------------------------------------------- zeros

class ZeroError(RuntimeError):
    pass


def _certify(prog, zs, lo, hi):
    """Check that the program's terminal polynomial alternates in sign on
    lo < m_1 < ... < hi, with m_j between consecutive zeros. That proves the
    polynomial has deg-many distinct real zeros, one in each gap."""
    if len(zs) == 0:
        return
    if np.any(np.diff(zs) <= 0):
        raise ZeroError("zeros not strictly increasing")
    pts = np.concatenate(([lo], 0.5 * (zs[1:] + zs[:-1]), [hi]))
    if np.any(np.diff(pts) <= 0):
        raise ZeroError("zeros too close to separate")
    vals = _run(prog, pts)[prog.chain[-1]]
    sg = np.sign(vals)
    if np.any(sg == 0) or np.any(sg[1:] == sg[:-1]):
        raise ZeroError("sign pattern does not certify real simple zeros")


def _program_zeros(prog: Program):
    n = prog.degree
    if n == 0:
        return np.zeros(0)
    spread = np.abs(prog.alpha) + 2 * np.sqrt(np.abs(prog.beta)) + 2 * np.cbrt(np.abs(prog.gamma))
    B = 2.0 * float(spread.max()) + 1.0
    args = (prog.alpha, prog.beta, prog.gamma, prog.p, prog.q, prog.r, prog.chain)
    for _ in range(60):
        cnt = kernels.program_count(np.array([-B, B]), *args)
        if cnt[0] == n and cnt[1] == 0:
            break
        B *= 2.0
    else:
        raise ZeroError("could not bracket the zeros")
    zs = np.asarray(kernels.program_zeros(*args, -B, B))
    _certify(prog, zs, -B, B)
    return zs


def zeros(idx, params: ModelParams, path: StaircasePath | None = None):
    """Sorted real zeros of P_{k1,k2}, certified by sign alternation."""
    idx = _pair(idx)
    sigma = max(1.0, float(idx.k))
    prog = compile_program(idx, params, path, scale=sigma)
    return _program_zeros(prog) * sigma


def diagonal_zeros(n, params: ModelParams, scale=None):
    """Zeros of Q_{n, scale} (scale defaults to n, i.e. zeros of Q_n(n x)/n^n)."""
    scale = n if scale is None else scale
    a, b, c = diagonal_arrays(n, params, scale)
    zs = linalg.recurrence_zeros(a, b, c)
    _certify_ratio(a, b, c, zs)
    return zs


def _certify_ratio(a, b, c, zs):
    # Q_n(x) is the product of the consecutive ratios, so its sign is
    # (-1)^(number of negative ratios); alternation across the gaps certifies
    # n real simple zeros without forming Q_n itself
    n = len(a)
    B = float(np.max(np.abs(a) + np.abs(b) + np.abs(c) + 1.0)) * 1.001
    pts = np.concatenate(([-B], 0.5 * (zs[1:] + zs[:-1]), [B]))
    if np.any(np.diff(zs) <= 0) or np.any(np.diff(pts) <= 0):
        raise ZeroError("zeros not separated")
    neg = np.asarray(kernels.ratio_count(np.ascontiguousarray(pts), a, b, c))
    if not np.array_equal(neg, np.arange(n, -1, -1)):
        raise ZeroError("sign pattern does not certify real simple zeros")


def diagonal_zeros_dense(n, params: ModelParams, scale=None, rel=1e-8):
    """Same zeros via the dense eigensolver on the 4-diagonal matrix."""
    scale = n if scale is None else scale
    M = linalg.build_recurrence_matrix(lambda k: tuple(scaled_coeffs(k, scale, params)), n)
    spec = linalg.eigenvalues(M)
    return spec.real(linalg.matrix_norm(M), rel)


@dataclass(frozen=True)
class InterlacingReport:
    ok: bool
    margin: float
    violation: tuple | None


def interlace_margin(big, small):
    """Smallest gap in y_1 < x_1 < y_2 < ... (len(big) = len(small) + 1)."""
    if len(small) == 0:
        return math.inf
    left = small - big[:-1]
    right = big[1:] - small
    return float(min(left.min(), right.min()))


def interlacing_check(idx, params: ModelParams, cache=None) -> InterlacingReport:
    idx = _pair(idx)
    if idx.k < 1:
        raise ValueError("k >= 1 required")
    cache = {} if cache is None else cache

    def zs(ij):
        if ij not in cache:
            cache[ij] = zeros(ij, params)
        return cache[ij]

    top = zs((idx.k1, idx.k2))
    margin, bad = math.inf, None
    for nb in ((idx.k1 - 1, idx.k2), (idx.k1, idx.k2 - 1)):
        if min(nb) < 0:
            continue
        m = interlace_margin(top, zs(nb))
        if m < margin:
            margin = m
        if m <= 0 and bad is None:
            bad = ((idx.k1, idx.k2), nb, m)
    return InterlacingReport(bad is None, margin, bad)


def interlacing_sweep(kmax, params: ModelParams):
    """Reality and interlacing for every pair with 1 <= k1 + k2 <= kmax."""
    cache = {}
    worst, violations, checked = math.inf, [], 0
    for k in range(1, kmax + 1):
        for k1 in range(k + 1):
            try:
                rep = interlacing_check((k1, k - k1), params, cache)
            except ZeroError as exc:
                violations.append(((k1, k - k1), str(exc)))
                continue
            checked += 1
            worst = min(worst, rep.margin)
            if not rep.ok:
                violations.append(rep.violation)
    return checked, worst, violations


def zero_counting_cdf(n, params: ModelParams):
    from .measures import MeasureTable
    zs = diagonal_zeros(n, params)
    return MeasureTable.atoms(zs)
