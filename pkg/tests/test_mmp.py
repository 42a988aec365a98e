import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmpoly import mmp
from mmpoly.mmp import IndexPair, StaircasePath
from mmpoly.specfun import ModelParams
from mmpoly.toeplitz_symbol import roots_z, symbol_blocks

P1 = ModelParams(1.0, 0.5, -0.5, True)
P2 = ModelParams(0.5, 0.4, 0.1)
P3 = ModelParams(1.3, 0.5, -0.3)


def _h(idx, p, j):
    s, v = mmp.first_moment(idx, p, j)
    return s * math.exp(v)


# ---------------------------------------------------------------- coefficients

def test_recurrence_coeff_examples():
    p = ModelParams(0.7, 0.3, -0.1)
    r = mmp.recurrence_coeffs((0, 0), p, 1)
    assert abs(r.a - 0.7 * math.tan(0.3)) < 1e-15 and r.b == 0 and r.c == 0
    r = mmp.recurrence_coeffs((1, 1), P1, 1)
    assert abs(r.a - 2 * math.tan(0.5)) < 1e-14
    assert abs(r.b - 0.75 * 2 / math.cos(0.5) ** 2) < 1e-14
    # 1*3*2*(2 tan 0.5)/(8 cos^2 0.5)
    assert abs(r.c - 6 * 2 * math.tan(0.5) / (8 * math.cos(0.5) ** 2)) < 1e-14
    assert abs(r.c - 1.0640168) < 1e-6
    assert mmp.recurrence_coeffs((0, 5), p, 1).c == 0
    assert mmp.recurrence_coeffs((5, 0), p, 2).c == 0
    with pytest.raises(ValueError):
        mmp.recurrence_coeffs((1, 1), p, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.floats(0.05, 4.0),
       st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.sampled_from([1, 2]))
def test_b_coefficients_nonnegative(k1, k2, lam, t1, t2, d):
    if abs(t1 - t2) < 1e-3:
        t2 = t1 - 0.1 if t1 > 0 else t1 + 0.1
    r = mmp.recurrence_coeffs((k1, k2), ModelParams(lam, t1, t2), d)
    assert r.b >= 0


@pytest.mark.parametrize("k1,k2", [(1, 1), (2, 1), (1, 3), (4, 4), (5, 2)])
def test_general_recurrence_consistency(k1, k2):
    """a, b, c against subleading coefficients and moment ratios."""
    for p in (P1, P3):
        r = mmp.recurrence_coeffs((k1, k2), p, 1)
        g = mmp.subleading_coeff
        assert abs(r.a - (g((k1, k2), p) - g((k1 + 1, k2), p))) < 1e-10 * max(1, abs(r.a))
        b = _h((k1, k2), p, 1) / _h((k1 - 1, k2), p, 1) + _h((k1, k2), p, 2) / _h((k1, k2 - 1), p, 2)
        assert abs(r.b - b) < 1e-10 * max(1, abs(b))
        c = _h((k1, k2), p, 1) / _h((k1 - 1, k2 - 1), p, 1)
        assert abs(r.c - c) < 1e-10 * max(1, abs(c))


def test_scaled_coeffs_examples_and_limits():
    p = ModelParams.from_b(0.8, 0.7)
    r = mmp.scaled_coeffs(0, 13, p)
    assert abs(r.a - 0.8 * 0.7 / 13) < 1e-15 and r.b == 0 and r.c == 0
    n = 200000
    sym = symbol_blocks(1.0, 0.7)
    even = mmp.scaled_coeffs(n, n, p)
    odd = mmp.scaled_coeffs(n + 1, n, p)
    for got, ref in zip(even, (sym.a_s, sym.b_s, sym.c_s)):
        assert abs(got - ref) < 1e-4
    for got, ref in zip(odd, (-sym.a_s, sym.b_s, -sym.c_s)):
        assert abs(got - ref) < 1e-4


def test_scaled_coeffs_equal_rescaled_general_coeffs():
    p = P3
    n = 7
    path = StaircasePath.diagonal(12)
    pts = path.points()
    for k in range(2, 11):
        src = pts[k]
        r = mmp.recurrence_coeffs(src, p, path.steps[k])
        s = mmp.scaled_coeffs(k, n, p)
        assert abs(s.a - r.a / n) < 1e-13
        assert abs(s.b - r.b / n ** 2) < 1e-13
        assert abs(s.c - r.c / n ** 3) < 1e-13


# ---------------------------------------------------------------- evaluation

def test_low_degree_polynomials():
    assert mmp.eval_poly((0, 0), P2, 1.7) == 1.0
    x = np.linspace(-2, 2, 5)
    assert np.allclose(mmp.eval_poly((1, 0), P2, x), x - 0.5 * math.tan(0.4))


def test_path_independence():
    x = np.random.default_rng(1).uniform(-4, 4, 20)
    a = mmp.eval_poly((2, 2), P3, x, StaircasePath((1, 1, 2, 2)))
    b = mmp.eval_poly((2, 2), P3, x, StaircasePath((1, 2, 1, 2)))
    c = mmp.eval_poly((2, 2), P3, x, StaircasePath((2, 2, 1, 1)))
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) < 1e-10
    assert np.max(np.abs(a - c) / np.maximum(1, np.abs(a))) < 1e-10
    with pytest.raises(ValueError):
        mmp.eval_poly((2, 2), P3, x, StaircasePath((1, 1, 2)))


def test_complex_evaluation_matches_coefficients():
    z = 0.3 + 1.1j
    coef = mmp.coefficient_vector((3, 2), P3)
    assert abs(mmp.eval_poly((3, 2), P3, z) - np.polyval(coef[::-1], z)) < 1e-10


def test_coefficients_11_by_orthogonality_solve():
    # P_{1,1} = x^2 + c1 x + c0 with int P w1 = int P w2 = 0
    from mmpoly.quadrature import integrate_weighted, mp_weight_obj
    p = P1
    mom = [[integrate_weighted(lambda x, m=m: x ** m, mp_weight_obj(p, j), degree=m) for m in range(3)]
           for j in (1, 2)]
    A = np.array([[mom[0][1], mom[0][0]], [mom[1][1], mom[1][0]]])
    rhs = -np.array([mom[0][2], mom[1][2]])
    c1, c0 = np.linalg.solve(A, rhs)
    coef = mmp.coefficient_vector((1, 1), p)
    assert np.allclose(coef, [c0, c1, 1.0], atol=1e-10)


def test_exact_coefficients():
    c = mmp.coefficient_vector((4, 3), P3, exact=True)
    assert all(isinstance(v, Fraction) for v in c) and c[-1] == 1
    assert np.allclose([float(v) for v in c], mmp.coefficient_vector((4, 3), P3), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("idx,p", [((0, 0), P2), ((1, 0), P2), ((2, 1), P2), ((6, 3), P3), ((4, 7), P1)])
def test_subleading(idx, p):
    coef = mmp.coefficient_vector(idx, p)
    k = sum(idx)
    got = mmp.subleading_coeff(idx, p)
    if k == 0:
        assert got == 0
    else:
        assert abs(coef[k - 1] - got) < 1e-10 * max(1, abs(got))
    if idx == (2, 1):
        assert abs(got + 1.5 * (2 * math.tan(0.4) + math.tan(0.1))) < 1e-14
    if idx == (1, 0):
        assert abs(got + 0.5 * math.tan(0.4)) < 1e-15


def test_diagonal_ratio_matches_direct():
    r = mmp.diagonal_ratio(30, 2, 30, P1, 2.5)
    d = mmp.eval_diagonal(28, 30, P1, 2.5) / mmp.eval_diagonal(30, 30, P1, 2.5)
    assert abs(r - d) < 1e-13 * abs(d)


def test_ratio_asymptotics_property():
    for b in (0.1, 1.0):
        p = ModelParams.from_b(1.0, b)
        for x in (3.0, -3.0):
            r = mmp.diagonal_ratio(400, 2, 400, p, x)
            assert abs(r - roots_z(x, 1.0, b).z1) < 1e-2


# ---------------------------------------------------------------- moments

def test_first_moment_examples():
    p = ModelParams(1.7, 0.3, -0.6)
    s, v = mmp.first_moment((0, 0), p, 1)
    assert s == 1 and abs(v - (math.lgamma(3.4) - 3.4 * math.log(2 * math.cos(0.3)))) < 1e-13
    q = ModelParams(1.7, -0.6, 0.3)
    for idx in ((2, 3), (4, 1)):
        assert mmp.first_moment(idx, p, 1) == mmp.first_moment(idx[::-1], q, 2)
    p = ModelParams(1.0, 0.5, -0.3)
    assert abs(mmp.moment_by_quadrature((2, 1), p, 1) / _h((2, 1), p, 1) - 1) < 1e-8


def test_first_moment_sign_rule():
    p = ModelParams(1.0, -0.2, 0.4)  # sin(t1 - t2) < 0
    assert mmp.first_moment((1, 3), p, 1)[0] == -1
    assert mmp.first_moment((1, 2), p, 1)[0] == 1
    assert mmp.first_moment((3, 1), p, 2)[0] == 1  # sin(t2 - t1) > 0


@pytest.mark.parametrize("idx,p", [((0, 0), P1), ((1, 1), P2), ((5, 4), ModelParams(0.5, 0.6, -0.6)),
                                   ((8, 3), P3), ((10, 10), P1)])
def test_orthogonality(idx, p):
    rep = mmp.orthogonality_residual(idx, p)
    assert rep.conditions == sum(idx)
    assert rep.residual <= 1e-8


# ---------------------------------------------------------------- Rodrigues

def test_rodrigues_trivial_and_leading():
    assert mmp.rodrigues_check((0, 0), P1, 0.4) < 1e-15
    assert abs(mmp.rodrigues_constant((1, 0), P3) - (-2j * math.cos(0.5))) < 1e-15


def test_rodrigues_example():
    d12 = mmp.rodrigues_check((2, 2), P1, 0.7, (1, 2))
    d21 = mmp.rodrigues_check((2, 2), P1, 0.7, (2, 1))
    assert d12 <= 1e-8 and d21 <= 1e-8
    a = mmp.rodrigues_terms((2, 2), P1, 0.7, (1, 2)).sum()
    b = mmp.rodrigues_terms((2, 2), P1, 0.7, (2, 1)).sum()
    assert abs(a - b) <= 1e-10 * abs(a)


def test_rodrigues_against_mpmath():
    import mpmath as mp
    mp.mp.dps = 30
    lam, t1, t2 = 1.3, 0.5, -0.3
    x = 0.37

    def g(z):
        return mp.gamma(lam + 1 + 1j * z) * mp.gamma(lam + 1 - 1j * z)

    def L(t, f):
        return lambda z: mp.exp(1j * t) * f(z + 0.5j) - mp.exp(-1j * t) * f(z - 0.5j)
    lhs = L(t1, L(t2, g))(x) / (mp.gamma(lam + 1j * x) * mp.gamma(lam - 1j * x))
    rhs = mmp.rodrigues_constant((1, 1), P3) * mmp.eval_poly((1, 1), P3, x)
    assert abs(complex(lhs) - rhs) < 1e-12 * abs(rhs)


# ---------------------------------------------------------------- zeros

def test_zeros_small_cases():
    z = mmp.zeros((1, 0), P2)
    assert np.allclose(z, [0.5 * math.tan(0.4)], atol=1e-14)
    assert mmp.zeros((0, 0), P2).size == 0


@pytest.mark.parametrize("k", [3, 8, 15])
def test_symmetric_zero_sets(k):
    z = mmp.zeros((k, k), ModelParams.from_b(0.5, 0.8))
    assert np.max(np.abs(z + z[::-1])) < 1e-9 * max(1, np.abs(z).max())


def test_diagonal_zeros_vs_companion():
    # double-precision companion roots of a degree-50 monomial expansion are
    # only good to ~1e-2 near the origin, so the oracle runs in mpmath
    import mpmath as mp
    n = 50
    p = ModelParams.from_b(0.5, 1.0)
    coef = mmp.coefficient_vector((25, 25), p, exact=True)
    # zeros of Q_{n,n} are those of P_{25,25}(n x)/n^n
    with mp.workdps(80):
        scaled = [mp.mpf(c.numerator) / c.denominator * mp.mpf(n) ** (i - n) for i, c in enumerate(coef)]
        roots = mp.polyroots(scaled[::-1], maxsteps=400, extraprec=400)
    ref = np.sort([float(mp.re(r)) for r in roots])
    assert np.max(np.abs(mmp.diagonal_zeros(n, p) - ref)) < 1e-6


def test_general_zeros_vanish():
    z = mmp.zeros((7, 4), P3)
    v = mmp.eval_poly((7, 4), P3, z)
    d = np.abs(mmp.eval_poly((7, 4), P3, z + 1e-6))
    assert np.all(np.abs(v) < 1e-6 * d + 1e-300)


def test_interlacing_examples():
    assert mmp.interlacing_check((1, 0), P3).ok
    rep = mmp.interlacing_check((3, 2), P3)
    assert rep.ok and rep.margin > 0
    assert mmp.interlacing_check((10, 10), ModelParams.from_b(0.5, 0.1)).ok
    with pytest.raises(ValueError):
        mmp.interlacing_check((0, 0), P3)


def test_interlace_margin_detects_violation():
    assert mmp.interlace_margin(np.array([0.0, 2.0]), np.array([3.0])) < 0


def test_zero_counting_cdf():
    p = ModelParams.from_b(1.0, 0.5)
    one = mmp.zero_counting_cdf(1, p)
    assert one.grid.size == 1 and abs(one.grid[0] - mmp.scaled_coeffs(0, 1, p).a) < 1e-15
    t = mmp.zero_counting_cdf(40, p)
    assert abs(t.mass - 1) < 1e-14
    # at points between atoms the left limit equals the value itself
    x = 0.5 * (t.grid[1:] + t.grid[:-1])
    assert np.allclose(t.cdf(x) + t.cdf(-x), 1.0, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 12), st.integers(0, 12), st.floats(0.2, 3.0), st.floats(-1.3, 1.3))
def test_zeros_real_and_interlacing_random(k1, k2, lam, t1):
    p = ModelParams(lam, t1, t1 - 0.7 if t1 > 0 else t1 + 0.7)
    assert mmp.interlacing_check((k1, k2), p).ok
