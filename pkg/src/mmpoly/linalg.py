"""Dense eigenvalues (balance, Householder Hessenberg, Francis QR) and log-determinants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels


class EigenError(RuntimeError):
    pass


class NonRealSpectrumError(EigenError):
    pass


@dataclass(frozen=True)
class BandedMatrix:
    n: int
    lower_bandwidth: int
    entries: np.ndarray
    unit_superdiagonal: bool = True

    def __post_init__(self):
        e = self.entries
        if e.shape != (self.n, self.n):
            raise ValueError("entries must be n x n")
        i, j = np.indices(e.shape)
        if np.any(e[i - j > self.lower_bandwidth] != 0):
            raise ValueError("nonzero entry below declared bandwidth")
        if self.unit_superdiagonal:
            if np.any(e[j - i > 1] != 0) or np.any(e[j - i == 1] != 1):
                raise ValueError("superdiagonal structure violated")

    def as_array(self):
        return self.entries.copy()


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    max_imag: float
    sweeps: int = 0

    def real(self, norm, rel=1e-8):
        """Real parts, after checking the imaginary parts against rel*norm."""
        if self.max_imag > rel * norm:
            raise NonRealSpectrumError(
                "max |Im| = %.3e exceeds %.1e * ||M||" % (self.max_imag, rel))
        return np.sort(self.eigenvalues.real)


def balance(a):
    """Parlett-Reinsch diagonal scaling by powers of two, in place."""
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            f = 2.0 ** np.round(0.5 * np.log2(r / c))
            if (c * f + r / f) < 0.95 * (c + r):
                a[:, i] *= f
                a[i, :] /= f
                done = False
    return a


def hessenberg(a):
    """Householder reduction to upper Hessenberg form, in place."""
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        a[k + 1:, k:] -= 2.0 * np.outer(v, v @ a[k + 1:, k:])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v)
        a[k + 2:, k] = 0.0
    return a


def _sort_complex(z):
    order = np.lexsort((z.imag, z.real))
    return z[order]


def eigenvalues(m) -> Spectrum:
    a = np.array(m.entries if isinstance(m, BandedMatrix) else m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError("square matrix required")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    if n == 1:
        return Spectrum(a[0].astype(np.complex128), 0.0, 0)
    balance(a)
    hessenberg(a)
    try:
        wr, wi, sweeps = kernels.hqr(np.ascontiguousarray(a), 40 * n)
    except kernels.ConvergenceError as exc:
        raise EigenError(str(exc)) from None
    z = _sort_complex(np.asarray(wr) + 1j * np.asarray(wi))
    return Spectrum(z, float(np.abs(z.imag).max()), int(sweeps))


def matrix_norm(m):
    a = m.entries if isinstance(m, BandedMatrix) else np.asarray(m)
    return float(np.abs(a).sum(axis=1).max())


def log_det(m):
    """(sign, log|det|) via LU with partial pivoting; sign 0 marks a zero pivot."""
    a = np.asarray(m, dtype=np.float64)
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0:
        return 0, -np.inf
    return int(sign), float(logabs)


def build_recurrence_matrix(coeff_provider, n) -> BandedMatrix:
    """4-diagonal matrix whose characteristic polynomial is q_n for
    q_{k+1} = (x - a_k) q_k - b_k q_{k-1} - c_k q_{k-2}."""
    if n < 1:
        raise ValueError("n >= 1 required")
    e = np.zeros((n, n))
    for k in range(n):
        a, b, c = coeff_provider(k)
        e[k, k] = a
        if k >= 1:
            e[k, k - 1] = b
            e[k - 1, k] = 1.0
        if k >= 2:
            e[k, k - 2] = c
    return BandedMatrix(n, min(2, n - 1), e, True)


def recurrence_arrays(coeff_provider, n):
    a = np.empty(n)
    b = np.zeros(n)
    c = np.zeros(n)
    for k in range(n):
        a[k], bk, ck = coeff_provider(k)
        if k >= 1:
            b[k] = bk
        if k >= 2:
            c[k] = ck
    return a, b, c


def recurrence_zeros(a, b, c, bound=None):
    """Zeros of the last member of the chain by sign-count bisection.

    Valid when every member of the chain has real zeros interlacing those of
    its predecessor, which is what makes the count of negative consecutive
    ratios equal to the number of zeros above the test point.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    if bound is None:
        # row-sum norm of the 4-diagonal matrix bounds its spectrum
        bound = float(np.max(np.abs(a) + np.abs(b) + np.abs(c) + 1.0)) * 1.001 + 1e-300
    return np.asarray(kernels.ratio_zeros(a, b, c, -bound, bound))
