"""Batch front end: ``mmpoly <command> [flags]`` writes CSV or JSON.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import equilibrium as eq
from . import linalg, mmp, sixvertex
from . import toeplitz_symbol as ts
from .linalg import EigenError
from .measures import MeasureTable, kolmogorov_atoms_vs
from .quadrature import QuadratureError
from .specfun import DomainError, ModelParams, mp_weight

NUMERIC_ERRORS = (QuadratureError, mmp.ZeroError, ts.RootMatchError, eq.BranchError,
                  EigenError, FloatingPointError, ZeroDivisionError, OverflowError)


class Result:
    """Named columns (equal length) and named scalars."""

    def __init__(self, columns=None, **scalars):
        self.columns = columns or {}
        self.scalars = scalars


def _params(a) -> ModelParams:
    if a.b is not None:
        return ModelParams.from_b(a.lam, a.b)
    if a.t1 is None or a.t2 is None:
        raise ValueError("give --b, or both --t1 and --t2")
    return ModelParams(a.lam, a.t1, a.t2)


def _b(a):
    if a.b is None:
        raise ValueError("--b is required for this command")
    if not a.b > 0:
        raise ValueError("--b must be positive")
    return a.b


def _t(a):
    if a.t1 is not None and a.b is None:
        return a.t1
    return math.atan(_b(a))


def _grid(a, default):
    g = default if a.grid is None else a.grid
    if g < 2:
        raise ValueError("--grid must be at least 2")
    return g


def _need(v, name):
    if v is None:
        raise ValueError("%s is required for this command" % name)
    return v


# ------------------------------------------------------------ commands

def cmd_weights(a):
    p = _params(a)
    X = a.x if a.x is not None else 10.0
    x = np.linspace(-abs(X), abs(X), _grid(a, 201))
    return Result({"x": x, "w1": mp_weight(x, p, 1), "w2": mp_weight(x, p, 2)})


def cmd_coeffs(a):
    p = _params(a)
    if a.k1 is not None or a.k2 is not None:
        idx = (a.k1 or 0, a.k2 or 0)
        rows = [mmp.recurrence_coeffs(idx, p, d) for d in (1, 2)]
        return Result({"direction": np.array([1, 2]),
                       "a": np.array([r.a for r in rows]),
                       "b": np.array([r.b for r in rows]),
                       "c": np.array([r.c for r in rows])})
    n = _need(a.n, "--n")
    rows = [mmp.scaled_coeffs(k, n, p) for k in range(n)]
    return Result({"k": np.arange(n), "a_kn": np.array([r.a for r in rows]),
                   "b_kn": np.array([r.b for r in rows]), "c_kn": np.array([r.c for r in rows])})


def cmd_poly_eval(a):
    p = _params(a)
    idx = (_need(a.k1, "--k1"), _need(a.k2, "--k2"))
    if a.x is not None and a.grid is None:
        x = np.array([a.x])
    else:
        X = abs(a.x) if a.x is not None else 2.0 * max(1, sum(idx))
        x = np.linspace(-X, X, _grid(a, 201))
    return Result({"x": x, "P": np.asarray(mmp.eval_poly(idx, p, x), dtype=np.float64)})


def cmd_zeros(a):
    p = _params(a)
    if a.k1 is not None or a.k2 is not None:
        z = mmp.zeros((a.k1 or 0, a.k2 or 0), p)
        return Result({"zero": z})
    n = _need(a.n, "--n")
    z = mmp.diagonal_zeros(n, p)
    if not a.compare_nu1:
        return Result({"zero_scaled": z})
    b = p.b if p.symmetric else None
    if b is None:
        raise ValueError("--compare-nu1 needs symmetric parameters (--b)")
    table = eq.nu1_table(b, _grid(a, 6001))
    dist = kolmogorov_atoms_vs(MeasureTable.atoms(z), table.cdf)
    c1, _ = ts.support_constants(b)
    b = a.b
    return Result(n=n, b=b, kolmogorov_distance=dist, max_abs_zero_scaled=float(np.max(np.abs(z))),
                  c1=c1, edge_ratio=float(np.max(np.abs(z)) / c1))


def cmd_interlace(a):
    p = _params(a)
    kmax = _need(a.n, "--n")
    checked, worst, bad = mmp.interlacing_sweep(kmax, p)
    return Result(kmax=kmax, pairs_checked=checked, worst_margin=worst, violations=len(bad))


def cmd_moments(a):
    p = _params(a)
    kmax = a.n if a.n is not None else 6
    tol = a.tol if a.tol is not None else 1e-13
    cols = {k: [] for k in ("k1", "k2", "j", "h_closed", "h_quadrature", "rel_err")}
    for k1 in range(kmax + 1):
        for k2 in range(kmax + 1):
            for j in (1, 2):
                if (k1, k2)[j - 1] == 0 and (k1, k2) != (0, 0):
                    continue
                sg, lv = mmp.first_moment((k1, k2), p, j)
                closed = sg * math.exp(lv)
                quad = mmp.moment_by_quadrature((k1, k2), p, j, tol)
                for key, v in zip(cols, (k1, k2, j, closed, quad, abs(quad - closed) / abs(closed))):
                    cols[key].append(v)
    return Result({k: np.array(v) for k, v in cols.items()})


def cmd_rodrigues(a):
    p = _params(a)
    idx = (_need(a.k1, "--k1"), _need(a.k2, "--k2"))
    if a.x is not None:
        xs = np.array([a.x])
    else:
        rng = np.random.default_rng(a.seed)
        xs = np.sort(rng.uniform(-3.0, 3.0, 5))
    d12 = [mmp.rodrigues_check(idx, p, x, (1, 2)) for x in xs]
    d21 = [mmp.rodrigues_check(idx, p, x, (2, 1)) for x in xs]
    return Result({"x": xs, "discrepancy_12": np.array(d12), "discrepancy_21": np.array(d21)})


def cmd_symbol_roots(a):
    b = _b(a)
    s = a.s if a.s is not None else 1.0
    x = complex(_need(a.x, "--x"), a.y or 0.0)
    r = ts.roots_z(x, s, b)
    z = r.as_array()
    return Result(x_re=x.real, x_im=x.imag, s=s, b=b,
                  z1_re=z[0].real, z1_im=z[0].imag, z2_re=z[1].real, z2_im=z[1].imag,
                  z3_re=z[2].real, z3_im=z[2].imag,
                  abs_z1=abs(z[0]), abs_z2=abs(z[1]), abs_z3=abs(z[2]),
                  residual=float(np.max(ts.root_residual(z, x, s, b))))


def cmd_supports(a):
    b = _b(a)
    s = a.s if a.s is not None else 1.0
    d = ts.supports(s, b)
    return Result(s=s, b=b, c1=d.c1, c2=d.c2, y1=d.y1, y2=d.y2, z_crit_plus=d.z_crit_plus,
                  z_crit_minus=d.z_crit_minus, z_crit_zero=d.z_crit_zero,
                  c1_bisection=ts.locate_c1(s, b) / s, c2_bisection=ts.locate_c2(s, b) / s)


def cmd_mu_density(a):
    b = _b(a)
    s = a.s if a.s is not None else 1.0
    c1, c2 = ts.support_constants(b)
    g = _grid(a, 401)
    if a.which == 1:
        L = c1 * s
        # open grid: the endpoints themselves are singular
        x = L * np.cos(np.pi * (np.arange(g) + 0.5) / g)[::-1]
        return Result({"x": x, "mu1_density": ts.mu_density_batch(x, s, b, 1)})
    Y = a.x if a.x is not None else 10.0 * max(c2 * s, 1.0)
    y = np.geomspace(c2 * s * (1 + 1e-6), max(Y, 2 * c2 * s), g)
    return Result({"y": y, "mu2_density": ts.mu_density_batch(y, s, b, 2)})


def cmd_toeplitz_eig(a):
    b = _b(a)
    s = a.s if a.s is not None else 1.0
    n = a.n if a.n is not None else 150
    sym = ts.symbol_blocks(s, b)
    ev = linalg.recurrence_zeros(*ts.toeplitz_recurrence_arrays(sym, n))
    dist = kolmogorov_atoms_vs(MeasureTable.atoms(ev), ts.mu1_cdf(s, b))
    return Result(n_blocks=n, s=s, b=b, real_eigenvalues=len(ev), dimension=2 * n,
                  kolmogorov_distance=dist, max_abs_eigenvalue=float(np.max(np.abs(ev))),
                  c1s=ts.support_constants(b)[0] * s)


def cmd_density_nu1(a):
    b = _b(a)
    t = eq.nu1_table(b, _grid(a, 6001))
    cols = {"x": t.grid, "nu1_density": t.density}
    if a.compare_nu1:
        inner = np.abs(t.grid) > 0
        av = np.zeros(len(t.grid))
        av[inner] = eq.nu1_density_averaged(t.grid[inner], b)
        cols["nu1_density_averaged"] = av
    c1, _ = ts.support_constants(b)
    return Result(cols, mass=t.mass, c1=c1)


def cmd_external_field(a):
    t = _t(a)
    b = math.tan(t)
    c1, _ = ts.support_constants(b)
    X = a.x if a.x is not None else 2.0 * c1
    x = np.linspace(-abs(X), abs(X), _grid(a, 21))
    V = eq.external_field(x, t)
    Vn = np.array([eq.external_field_numeric(v, t) for v in x])
    return Result({"x": x, "V": V, "V_numeric": Vn}, V_slope=math.pi - 2 * t)


def cmd_sigma(a):
    t = _t(a)
    _, c2 = ts.support_constants(math.tan(t))
    y = c2 * np.linspace(0.1, 0.9, _grid(a, 5))
    num = np.array([eq.sigma_density_numeric(v, t) for v in y])
    return Result({"y": y, "sigma_density": np.full(len(y), eq.sigma_density(t)),
                   "sigma_density_numeric": num})


def cmd_el_residuals(a):
    b = _b(a)
    res = eq.solve_equilibrium(b, _grid(a, 6001), a.grid2 or 10001)
    c1, c2 = res.c1, res.c2
    g = 11
    xr = c1 * np.concatenate((np.linspace(-0.95, 0.95, g), [1.1, 1.5, 2.0, -1.3, 3.0]))
    yi = np.concatenate((c2 * np.linspace(1.1, 5.0, g), c2 * np.array([0.0, 0.3, 0.6, 0.9])))
    R1 = np.array([eq.el_residuals(v, res)[0] for v in xr])
    R2 = np.array([eq.el_residuals(1j * v, res)[1] for v in yi])
    return Result({"axis": np.array(["real"] * len(xr) + ["imag"] * len(yi)),
                   "coordinate": np.concatenate((xr, yi)),
                   "R1": np.concatenate((R1, np.full(len(yi), np.nan))),
                   "R2": np.concatenate((np.full(len(xr), np.nan), R2))},
                  lagrange_l=res.lagrange_l, c1=c1, c2=c2)


def cmd_sixvertex(a):
    N = _need(a.N, "--N")
    n1 = a.n1 if a.n1 is not None else N
    gamma = a.gamma if a.gamma is not None else sixvertex.FREE_FERMION
    p = sixvertex.VertexModelParams(N, n1, N - n1, gamma, a.t1 or 0.0, a.t2 or 0.0)
    r = sixvertex.partition_function(p)
    out = dict(N=N, n1=n1, n2=N - n1, gamma=gamma, t1=p.t1, t2=p.t2,
               log_det_M=r.log_det_M, sign_det_M=r.sign_det_M, log_Z=r.log_Z, sign_Z=r.sign,
               Z=r.Z, log_Z_dwbc=r.log_Z_dwbc, sign_Z_dwbc=r.sign_dwbc)
    if p.free_fermion:
        out.update(log_prod_h=r.log_prod_h, sign_prod_h=r.sign_prod_h, agreement=r.agree)
    return Result(**out)


COMMANDS = {
    "weights": cmd_weights, "coeffs": cmd_coeffs, "poly-eval": cmd_poly_eval, "zeros": cmd_zeros,
    "interlace": cmd_interlace, "moments": cmd_moments, "rodrigues": cmd_rodrigues,
    "symbol-roots": cmd_symbol_roots, "supports": cmd_supports, "mu-density": cmd_mu_density,
    "toeplitz-eig": cmd_toeplitz_eig, "density-nu1": cmd_density_nu1,
    "external-field": cmd_external_field, "sigma": cmd_sigma, "el-residuals": cmd_el_residuals,
    "sixvertex": cmd_sixvertex,
}


# ------------------------------------------------------------ output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # round-trip repr keeps 17 significant digits where needed
        return v if math.isfinite(v) else None
    return v


def render(command, res: Result, fmt):
    if fmt == "auto":
        fmt = "csv" if res.columns else "json"
    if fmt == "csv":
        buf = io.StringIO()
        if res.columns:
            names = list(res.columns)
            buf.write(",".join(names) + "\n")
            for row in zip(*(res.columns[k] for k in names)):
                buf.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            names = list(res.scalars)
            buf.write(",".join(names) + "\n")
            buf.write(",".join(_fmt(res.scalars[k]) for k in names) + "\n")
        return buf.getvalue()
    obj = {"command": command, "status": "ok"}
    nonfinite = []
    for k, v in list(res.scalars.items()) + list(res.columns.items()):
        jv = _jsonable(v)
        if jv is None or (isinstance(jv, list) and None in jv):
            nonfinite.append(k)
        obj[k] = jv
    if nonfinite:
        obj["status"] = "ok; non-finite values reported as null in: " + ", ".join(nonfinite)
    return json.dumps(obj, indent=1) + "\n"


def build_parser():
    ap = argparse.ArgumentParser(prog="mmpoly", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--lambda", dest="lam", type=float, default=1.0)
    ap.add_argument("--t1", type=float)
    ap.add_argument("--t2", type=float)
    ap.add_argument("--b", type=float, help="b = tan t; implies t1 = -t2 = t")
    ap.add_argument("--n", type=int)
    ap.add_argument("--k1", type=int)
    ap.add_argument("--k2", type=int)
    ap.add_argument("--grid", type=int)
    ap.add_argument("--grid2", type=int, help="grid for nu2 in el-residuals")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--s", type=float)
    ap.add_argument("--x", type=float)
    ap.add_argument("--y", type=float, help="imaginary part of the point for symbol-roots")
    ap.add_argument("--which", type=int, choices=(1, 2), default=1)
    ap.add_argument("--N", type=int)
    ap.add_argument("--n1", type=int)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--compare-nu1", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("auto", "csv", "json"), default="auto")
    ap.add_argument("--out")
    return ap


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if a.tol is not None and not a.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    code, msg = 0, None
    try:
        res = COMMANDS[a.command](a)
    except (ValueError, DomainError) as e:
        code, msg = 2, str(e)
    except NUMERIC_ERRORS as e:
        code, msg = 3, "%s: %s" % (type(e).__name__, e)
    if code:
        print("error: " + msg, file=sys.stderr)
        if a.format == "json":
            _emit(json.dumps({"command": a.command, "status": "error: " + msg}, indent=1) + "\n", a.out)
        return code
    _emit(render(a.command, res, a.format), a.out)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
