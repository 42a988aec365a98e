"""Complex log-gamma and the Meixner-Pollaczek / free-fermion weights."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    pass


def log_gamma_complex(z):
    """Principal log Gamma for Re z > 0 (scalar or array)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.real <= 0):
        raise DomainError("log_gamma_complex needs Re(z) > 0")
    zm = z - 1.0
    acc = np.full(z.shape, _LANCZOS[0], dtype=np.complex128)
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)
    return out[()] if out.ndim == 0 else out


def log_abs_gamma_sq(lam, x):
    """log |Gamma(lam + i x)|^2 for real x."""
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * np.real(log_gamma_complex(lam + 1j * x))


@dataclass(frozen=True)
class ModelParams:
    lam: float
    t1: float
    t2: float
    symmetric: bool = False

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError("lambda must be positive")
        for t in (self.t1, self.t2):
            if not (-math.pi / 2 < t < math.pi / 2):
                raise DomainError("t1, t2 must lie in (-pi/2, pi/2)")
        if self.t1 == self.t2:
            raise DomainError("t1 and t2 must differ")
        if self.symmetric and not (self.t1 == -self.t2 and self.t1 > 0):
            raise DomainError("symmetric parameters need t1 = -t2 > 0")

    @classmethod
    def from_b(cls, lam, b):
        if not b > 0:
            raise DomainError("b = tan t must be positive")
        t = math.atan(b)
        return cls(lam, t, -t, True)

    @property
    def b(self):
        return math.tan(self.t1)

    def t(self, which):
        return self.t1 if which == 1 else self.t2


def log_mp_weight(x, params: ModelParams, which=1):
    x = np.asarray(x, dtype=np.float64)
    tj = params.t(which)
    return 2.0 * tj * x + log_abs_gamma_sq(params.lam, x) - math.log(2.0 * math.pi)


def mp_weight(x, params: ModelParams, which=1):
    """(1/2pi) e^{2 t_j x} |Gamma(lam + i x)|^2."""
    return np.exp(log_mp_weight(x, params, which))


def log_ff_weight(x, tj):
    if not abs(tj) < math.pi / 4:
        raise DomainError("free-fermion weight needs |t_j| < pi/4")
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(np.pi * x / 4.0)
    # log(2 cosh u) = u + log1p(e^{-2u})
    return tj * x - (ax + np.log1p(np.exp(-2.0 * ax)))


def ff_weight(x, tj):
    """e^{t_j x} / (2 cosh(pi x / 4))."""
    return np.exp(log_ff_weight(x, tj))
