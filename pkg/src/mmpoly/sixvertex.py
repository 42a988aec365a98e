"""Six-vertex model with domain wall boundary conditions, rows split into two
blocks with spectral differences t1 and t2: moment matrices, the determinant
as a product of multiple-orthogonality constants, and Z_N."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import log_det
from .mmp import StaircasePath, log_first_moment
from .quadrature import Weight, ff_weight_obj, integrate_weighted, make_spec

FREE_FERMION = math.pi / 4


@dataclass(frozen=True)
class VertexModelParams:
    N: int
    n1: int
    n2: int
    gamma: float
    t1: float
    t2: float = 0.0

    def __post_init__(self):
        if self.N < 1 or self.n1 < 0 or self.n2 < 0 or self.n1 + self.n2 != self.N:
            raise ValueError("need n1 + n2 = N >= 1 with n1, n2 >= 0")
        if not 0 < self.gamma < math.pi / 2:
            raise ValueError("gamma must lie in (0, pi/2)")
        used = [self.t1] if self.n1 else []
        used += [self.t2] if self.n2 else []
        if any(abs(t) >= self.gamma for t in used):
            raise ValueError("|t_j| < gamma required")
        if self.n1 and self.n2 and self.t1 == self.t2:
            raise ValueError("t1 and t2 must differ when both blocks are present")

    @classmethod
    def homogeneous(cls, N, t, gamma=FREE_FERMION):
        return cls(N, N, 0, gamma, t, 0.0)

    @property
    def free_fermion(self):
        return abs(self.gamma - FREE_FERMION) < 1e-15


@dataclass(frozen=True)
class PartitionResult:
    log_Z: float
    sign: int
    log_det_M: float
    log_prod_h: float
    sign_det_M: int = 1
    sign_prod_h: int = 1
    # Z normalised by [sin(t2 - t1)]^{n1 n2}, which is what the sum over
    # configurations gives when both blocks are present
    log_Z_dwbc: float = 0.0
    sign_dwbc: int = 1

    @property
    def Z(self):
        return self.sign * math.exp(self.log_Z)

    @property
    def Z_dwbc(self):
        return self.sign_dwbc * math.exp(self.log_Z_dwbc)

    @property
    def agree(self):
        if not math.isfinite(self.log_prod_h):
            return False
        return (abs(self.log_det_M - self.log_prod_h) <= 1e-6 * max(1.0, abs(self.log_det_M))
                and self.sign_det_M == self.sign_prod_h)


def log_sixvertex_weight(x, gamma):
    """log of sinh(x(pi - 2 gamma)/2) / sinh(x pi/2), even in x, equal to
    log((pi - 2 gamma)/pi) at the origin."""
    a = 0.5 * (math.pi - 2 * gamma)
    c = 0.5 * math.pi
    ax = np.abs(np.asarray(x, dtype=np.float64))
    small = ax < 1e-8
    z = np.where(small, 1.0, ax)
    # log sinh(u) = u + log1p(-exp(-2u)) - log 2
    big = a * z + np.log(-np.expm1(-2 * a * z)) - (c * z + np.log(-np.expm1(-2 * c * z)))
    return np.where(small, math.log(a / c), big)


def weight_obj(gamma, t):
    if abs(gamma - FREE_FERMION) < 1e-15:
        return ff_weight_obj(t)
    return Weight(lambda x: t * x + log_sixvertex_weight(x, gamma), gamma - abs(t), 0.0)


def _moments(gamma, t, count, tol):
    w = weight_obj(gamma, t)
    powers = np.arange(count)
    spec = make_spec(w, tol=tol, degree=count - 1)
    return integrate_weighted(lambda x: x[:, None] ** powers[None, :], w, spec)


def moment_matrix(p: VertexModelParams, tol=1e-13):
    """Rows 1..n1: moments x^{i+j-2} of e^{t1 x} w; rows n1+1..N: moments
    x^{i+j-n1-2} of e^{t2 x} w."""
    N = p.N
    M = np.empty((N, N))
    if p.n1:
        mom = _moments(p.gamma, p.t1, p.n1 + N - 1, tol)
        for i in range(p.n1):
            M[i] = mom[i:i + N]
    if p.n2:
        mom = _moments(p.gamma, p.t2, p.n2 + N - 1, tol)
        for i in range(p.n2):
            M[p.n1 + i] = mom[i:i + N]
    return M


def staircase_counts(steps):
    """k_i(n) = number of m < n with j(m) = i, for n = 0..N-1."""
    k1 = k2 = 0
    out = []
    for j in steps:
        out.append((k1, k2))
        if j == 1:
            k1 += 1
        else:
            k2 += 1
    return out


def log_h_free_fermion(k1, k2, j, t1, t2):
    """(sign, log|h|) of int P_{k1,k2}(x) x^{k_j} e^{t_j x} / (2 cosh(pi x/4)) dx.

    With x = 4u the weights become Meixner-Pollaczek weights at lambda = 1/2
    and t = 2 t_j; the monic polynomial, the power x^{k_j} and dx together
    contribute 4^{k + k_j + 1}.
    """
    T1, T2 = 2 * t1, 2 * t2
    if j == 1:
        sgn, val = log_first_moment(k1, k2, 0.5, T1, T2)
        kj = k1
    else:
        sgn, val = log_first_moment(k2, k1, 0.5, T2, T1)
        kj = k2
    return sgn, val + (k1 + k2 + kj + 1) * math.log(4.0)


def product_formula(p: VertexModelParams, steps=None):
    """(sign, log|prod h|) along a staircase (default: all 1-steps first).

    For another step order the product is det of M with its rows taken in
    that order, so it may differ from det M in sign but not in modulus.
    """
    if not p.free_fermion:
        raise ValueError("closed-form h only on the free fermion line gamma = pi/4")
    steps = tuple(StaircasePath.canonical((p.n1, p.n2)).steps if steps is None else steps)
    if steps.count(1) != p.n1 or steps.count(2) != p.n2:
        raise ValueError("step sequence must use n1 ones and n2 twos")
    sign, total = 1, 0.0
    for (k1, k2), j in zip(staircase_counts(steps), steps):
        s, v = log_h_free_fermion(k1, k2, j, p.t1, p.t2)
        sign *= s
        total += v
    return sign, total


def row_order(p: VertexModelParams, steps):
    """Rows of M in the order the step sequence visits them."""
    nxt = {1: 0, 2: p.n1}
    out = []
    for j in steps:
        out.append(nxt[j])
        nxt[j] += 1
    return out


def biorthogonal_constants(M, rows=None):
    """Pivots of unpivoted Gaussian elimination of M (rows optionally
    reordered): these are the constants <phi_n, psi_n> of the
    bi-orthogonalised systems."""
    A = np.array(M if rows is None else np.asarray(M)[rows], dtype=np.float64)
    n = A.shape[0]
    piv = np.empty(n)
    for k in range(n):
        piv[k] = A[k, k]
        if piv[k] == 0:
            raise ZeroDivisionError("zero pivot at step %d" % k)
        A[k + 1:, k:] -= np.outer(A[k + 1:, k] / piv[k], A[k, k:])
    return piv


def _log_prefactor(p: VertexModelParams):
    g = p.gamma
    val = 0.0
    for n, t in ((p.n1, p.t1), (p.n2, p.t2)):
        if n:
            val += n * p.N * math.log(math.sin(g + t) * math.sin(g - t))
    lf = [math.lgamma(k + 1) for k in range(p.N)]
    val -= sum(lf[:p.n1]) + sum(lf[:p.n2]) + sum(lf[:p.N])
    return val


def partition_function(p: VertexModelParams, tol=1e-13) -> PartitionResult:
    """Z_N from the moment determinant; on the free fermion line the product
    of h's is computed as well."""
    M = moment_matrix(p, tol)
    sd, ld = log_det(M)
    if p.free_fermion:
        sp, lp = product_formula(p)
    else:
        sp, lp = 0, float("nan")
    pre = _log_prefactor(p)
    lz = pre + ld
    lzd, szd = lz, int(sd)
    if p.n1 and p.n2:
        sn = math.sin(p.t2 - p.t1)
        lzd -= p.n1 * p.n2 * math.log(abs(sn))
        if sn < 0 and (p.n1 * p.n2) % 2:
            szd = -szd
    return PartitionResult(lz, int(sd), ld, lp, int(sd), int(sp), lzd, szd)


def _asm_rows(n):
    import itertools
    return [r for r in itertools.product((-1, 0, 1), repeat=n)
            if sum(r) == 1 and all(0 <= c <= 1 for c in np.cumsum(r))]


def alternating_sign_matrices(n):
    """All n x n alternating sign matrices (the DWBC configurations)."""
    rows = _asm_rows(n)
    out = []

    def grow(acc, col):
        if len(acc) == n:
            if all(c == 1 for c in col):
                out.append(np.array(acc))
            return
        for r in rows:
            nc = [c + x for c, x in zip(col, r)]
            if all(0 <= c <= 1 for c in nc):
                grow(acc + [r], nc)

    grow([], [0] * n)
    return out


def partition_function_enumerated(p: VertexModelParams):
    """Z_N as the sum of configuration weights, N <= 6.

    A vertex at a nonzero ASM entry has weight sin(2 gamma); otherwise the
    edge states to its left and above decide between sin(gamma - t_i) (equal)
    and sin(gamma + t_i) (different). The other assignment amounts to
    t -> -t together with a reflection of the lattice and gives the same Z.
    """
    if p.N > 6:
        raise ValueError("enumeration limited to N <= 6")
    ts = [p.t1] * p.n1 + [p.t2] * p.n2
    g = p.gamma
    total = 0.0
    for A in alternating_sign_matrices(p.N):
        left = np.cumsum(A, axis=1) - A
        above = np.cumsum(A, axis=0) - A
        w = 1.0
        for i in range(p.N):
            for j in range(p.N):
                if A[i, j]:
                    w *= math.sin(2 * g)
                elif left[i, j] == above[i, j]:
                    w *= math.sin(g - ts[i])
                else:
                    w *= math.sin(g + ts[i])
        total += w
    return total
