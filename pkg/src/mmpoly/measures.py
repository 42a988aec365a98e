"""Tabulated measures on a line: densities on grids, or finite sets of atoms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MeasureTable:
    """Density samples on a strictly increasing grid.

    For support_kind 'imaginary-line' the grid holds y with points iy and the
    density is taken with respect to |dx|. `atomic` tables carry point masses
    in `density` instead of density values. `flags` marks grid points whose
    density was capped (the logarithmic singularity at the origin).
    A nonzero `tail` means the density continues as tail/y^2 beyond both
    ends of the grid; `mass` counts only what the grid carries.
    """
    support_kind: str
    grid: np.ndarray
    density: np.ndarray
    mass: float
    endpoints: tuple
    atomic: bool = False
    flags: np.ndarray | None = field(default=None, compare=False)
    tail: float = 0.0

    def __post_init__(self):
        if self.support_kind not in ("real-line", "imaginary-line"):
            raise ValueError("support_kind must be real-line or imaginary-line")
        g = np.asarray(self.grid)
        if g.ndim != 1 or len(g) < 1:
            raise ValueError("grid must be one-dimensional")
        if len(g) > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.asarray(self.density) < 0):
            raise ValueError("density must be nonnegative")
        lo, hi = self.endpoints
        if g[0] < lo - 1e-12 * max(1, abs(lo)) or g[-1] > hi + 1e-12 * max(1, abs(hi)):
            raise ValueError("grid leaves the declared endpoints")

    @classmethod
    def atoms(cls, points, weights=None, kind="real-line"):
        pts = np.sort(np.asarray(points, dtype=np.float64))
        w = np.full(len(pts), 1.0 / len(pts)) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(kind, pts, w, float(w.sum()), (float(pts[0]), float(pts[-1])), True)

    def trapezoid_mass(self):
        if self.atomic:
            return float(self.density.sum())
        g, d = self.grid, self.density
        return float(np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(g)))

    def cdf(self, x):
        """Cumulative mass up to x (right-continuous for atoms)."""
        x = np.asarray(x, dtype=np.float64)
        if self.atomic:
            cum = np.cumsum(self.density)
            i = np.searchsorted(self.grid, x, side="right")
            return np.where(i > 0, cum[np.maximum(i - 1, 0)], 0.0)
        g, d = self.grid, self.density
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(g))))
        return np.interp(x, g, cum, left=0.0, right=cum[-1])


def kolmogorov_atoms_vs(atoms: MeasureTable, cdf):
    """sup_x |F_atoms(x) - F(x)| for a continuous F given as a callable."""
    pts = atoms.grid
    w = atoms.density / atoms.density.sum()
    F = np.asarray(cdf(pts))
    hi = np.cumsum(w)
    lo = hi - w
    return float(max(np.abs(hi - F).max(), np.abs(lo - F).max()))
