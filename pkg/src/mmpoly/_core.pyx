# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Signatures mirror mmpoly._pycore exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, copysign, log, floor, frexp, ldexp
from libc.complex cimport cabs, csqrt, conj

cnp.import_array()

ctypedef double complex cplx


class ConvergenceError(RuntimeError):
    pass


def hqr(double[:, ::1] h_in, long max_sweeps):
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Returns (wr, wi, sweeps). Raises ConvergenceError when the sweep budget
    is exhausted.
    """
    cdef Py_ssize_t n = h_in.shape[0]
    cdef double[:, ::1] a = np.array(h_in, dtype=np.float64, copy=True)
    cdef double[::1] wr = np.zeros(n)
    cdef double[::1] wi = np.zeros(n)
    cdef Py_ssize_t nn, m, l, k, j, i, mmin
    cdef long its, sweeps = 0
    cdef double z = 0, y, x, w, v, u, t = 0, s, r = 0, q = 0, p = 0, anorm = 0

    for i in range(n):
        for j in range(i - 1 if i > 0 else 0, n):
            anorm += fabs(a[i, j])
    nn = n - 1
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = fabs(a[l - 1, l - 1]) + fabs(a[l, l])
                if s == 0.0:
                    s = anorm
                if fabs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = sqrt(fabs(q))
                x += t
                if q >= 0.0:
                    z = p + copysign(z, p)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                raise ConvergenceError("QR sweep limit %d reached" % max_sweeps)
            if its > 0 and its % 10 == 0:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = fabs(a[nn, nn - 1]) + fabs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = fabs(p) + fabs(q) + fabs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = fabs(a[m, m - 1]) * (fabs(q) + fabs(r))
                v = fabs(p) * (fabs(a[m - 1, m - 1]) + fabs(z) + fabs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = fabs(p) + fabs(q) + fabs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = copysign(sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
    return np.asarray(wr), np.asarray(wi), sweeps


cdef inline void _eig2(cplx a, cplx b, cplx c, cplx d, cplx *e1, cplx *e2) nogil:
    cdef cplx hm = 0.5 * (a + d)
    cdef cplx hd = 0.5 * (a - d)
    cdef cplx disc = csqrt(hd * hd + b * c)
    e1[0] = hm + disc
    e2[0] = hm - disc


cdef int _cubic_qr(cplx *h, cplx *out, int maxit) nogil:
    # h: 3x3 row-major complex Hessenberg (destroyed). Wilkinson-shifted QR
    # with Givens rotations until a subdiagonal deflates.
    cdef int it, k, j
    cdef double tol, r, ab
    cdef cplx mu, e1, e2, s, aa, bb, x0, x1
    cdef double cs[2]
    cdef cplx sn[2]
    for it in range(maxit):
        tol = 2.220446049250313e-16
        if cabs(h[7]) <= tol * (cabs(h[4]) + cabs(h[8])):
            out[2] = h[8]
            _eig2(h[0], h[1], h[3], h[4], &out[0], &out[1])
            return it
        if cabs(h[3]) <= tol * (cabs(h[0]) + cabs(h[4])):
            out[0] = h[0]
            _eig2(h[4], h[5], h[7], h[8], &out[1], &out[2])
            return it
        _eig2(h[4], h[5], h[7], h[8], &e1, &e2)
        mu = e1 if cabs(e1 - h[8]) <= cabs(e2 - h[8]) else e2
        if it > 0 and it % 10 == 0:
            mu = h[8] + 0.75 * cabs(h[7])
        for k in range(3):
            h[4 * k] -= mu
        for k in range(2):
            aa = h[4 * k]
            bb = h[4 * k + 3]
            r = sqrt(cabs(aa) ** 2 + cabs(bb) ** 2)
            if r == 0.0:
                cs[k] = 1.0
                sn[k] = 0.0
                continue
            ab = cabs(aa)
            if ab == 0.0:
                cs[k] = 0.0
                sn[k] = conj(bb) / r
            else:
                cs[k] = ab / r
                sn[k] = (aa / ab) * conj(bb) / r
            for j in range(k, 3):
                x0 = h[3 * k + j]
                x1 = h[3 * (k + 1) + j]
                h[3 * k + j] = cs[k] * x0 + sn[k] * x1
                h[3 * (k + 1) + j] = -conj(sn[k]) * x0 + cs[k] * x1
        for k in range(2):
            for j in range(0, k + 2 if k + 2 < 3 else 3):
                x0 = h[3 * j + k]
                x1 = h[3 * j + k + 1]
                h[3 * j + k] = cs[k] * x0 + conj(sn[k]) * x1
                h[3 * j + k + 1] = -sn[k] * x0 + cs[k] * x1
        for k in range(3):
            h[4 * k] += mu
    return -1


def cubic_roots(cplx[::1] c2, cplx[::1] c1, cplx[::1] c0, int maxit=60):
    """Roots of z^3 + c2 z^2 + c1 z + c0 for each batch entry.

    Balanced companion matrix, shifted complex QR, closed-form 2x2 deflation.
    Returns (roots (m,3), ok (m,)) where ok is False if QR did not deflate.
    """
    cdef Py_ssize_t m = c2.shape[0], idx
    cdef int i, j, sweep, changed
    cdef cplx h[9]
    cdef cplx out[3]
    cdef double rn, cn, f, g
    cdef int ex
    roots = np.empty((m, 3), dtype=np.complex128)
    ok = np.ones(m, dtype=bool)
    cdef cplx[:, ::1] rv = roots
    cdef cnp.uint8_t[::1] okv = ok.view(np.uint8)
    for idx in range(m):
        h[0] = -c2[idx]; h[1] = -c1[idx]; h[2] = -c0[idx]
        h[3] = 1.0; h[4] = 0.0; h[5] = 0.0
        h[6] = 0.0; h[7] = 1.0; h[8] = 0.0
        for sweep in range(20):
            changed = 0
            for i in range(3):
                rn = 0.0
                cn = 0.0
                for j in range(3):
                    if j != i:
                        rn += cabs(h[3 * i + j])
                        cn += cabs(h[3 * j + i])
                if rn == 0.0 or cn == 0.0:
                    continue
                # power-of-two scale closest to sqrt(rn/cn)
                frexp(sqrt(rn / cn), &ex)
                f = ldexp(1.0, ex)
                g = rn / f + cn * f
                if g < 0.95 * (rn + cn):
                    changed = 1
                    for j in range(3):
                        h[3 * i + j] /= f
                        h[3 * j + i] *= f
            if not changed:
                break
        if _cubic_qr(h, out, maxit) < 0:
            okv[idx] = 0
        rv[idx, 0] = out[0]
        rv[idx, 1] = out[1]
        rv[idx, 2] = out[2]
    return roots, ok


def ratio_count(double[::1] x, double[::1] a, double[::1] b, double[::1] c):
    """Number of zeros above each x for the monic chain
    q_{k+1} = (x - a_k) q_k - b_k q_{k-1} - c_k q_{k-2}."""
    cdef Py_ssize_t m = x.shape[0], n = a.shape[0], i, k
    cdef double r, r1, r2, xi, tiny
    counts = np.zeros(m, dtype=np.int64)
    cdef cnp.int64_t[::1] cv = counts
    cdef long cnt
    for i in range(m):
        xi = x[i]
        r1 = 1.0
        r2 = 1.0
        cnt = 0
        for k in range(n):
            r = xi - a[k]
            if k >= 1:
                r -= b[k] / r1
            if k >= 2:
                r -= c[k] / (r1 * r2)
            if r == 0.0:
                tiny = 1e-300 + 2.220446049250313e-16 * (fabs(xi) + fabs(a[k]))
                r = tiny
            if r < 0.0:
                cnt += 1
            r2 = r1
            r1 = r
        cv[i] = cnt
    return counts


cdef long _ratio_count1(double xi, double[::1] a, double[::1] b, double[::1] c) nogil:
    cdef Py_ssize_t n = a.shape[0], k
    cdef double r, r1 = 1.0, r2 = 1.0
    cdef long cnt = 0
    for k in range(n):
        r = xi - a[k]
        if k >= 1:
            r -= b[k] / r1
        if k >= 2:
            r -= c[k] / (r1 * r2)
        if r == 0.0:
            r = 1e-300 + 2.220446049250313e-16 * (fabs(xi) + fabs(a[k]))
        if r < 0.0:
            cnt += 1
        r2 = r1
        r1 = r
    return cnt


def ratio_zeros(double[::1] a, double[::1] b, double[::1] c, double lo, double hi,
                int maxit=200):
    """All zeros of the chain's last member by count bisection on [lo, hi]."""
    cdef Py_ssize_t n = a.shape[0], j
    cdef double l, h, mid
    cdef int it
    out = np.empty(n)
    cdef double[::1] ov = out
    for j in range(n):
        l = lo
        h = hi
        for it in range(maxit):
            mid = 0.5 * (l + h)
            if mid <= l or mid >= h:
                break
            # zero j (ascending) <= mid  iff  n - count(mid) >= j + 1
            if n - _ratio_count1(mid, a, b, c) >= j + 1:
                h = mid
            else:
                l = mid
        ov[j] = 0.5 * (l + h)
        lo = l
    return out


cdef long _program_count1(double xi, double[::1] al, double[::1] be, double[::1] ga,
                          cnp.int64_t[::1] p, cnp.int64_t[::1] q, cnp.int64_t[::1] r,
                          cnp.int64_t[::1] chain, double *v) nogil:
    cdef Py_ssize_t ns = al.shape[0], m
    cdef long cnt = 0
    cdef double prev, cur
    v[0] = 0.0
    v[1] = 1.0
    for m in range(ns):
        v[m + 2] = (xi - al[m]) * v[p[m]] - be[m] * v[q[m]] - ga[m] * v[r[m]]
    prev = v[chain[0]]
    for m in range(1, chain.shape[0]):
        cur = v[chain[m]]
        if cur == 0.0:
            cur = copysign(1e-300, -prev)
        if (cur < 0.0) != (prev < 0.0):
            cnt += 1
        prev = cur
    return cnt


def program_count(double[::1] x, double[::1] al, double[::1] be, double[::1] ga,
                  cnp.int64_t[::1] p, cnp.int64_t[::1] q, cnp.int64_t[::1] r,
                  cnp.int64_t[::1] chain):
    """Sign changes along `chain` of a straight-line three-source recurrence.

    Slot 0 holds 0, slot 1 holds 1, step m writes slot m+2.
    """
    cdef Py_ssize_t mlen = x.shape[0], i
    buf = np.zeros(al.shape[0] + 2)
    cdef double[::1] bv = buf
    counts = np.zeros(mlen, dtype=np.int64)
    cdef cnp.int64_t[::1] cv = counts
    for i in range(mlen):
        cv[i] = _program_count1(x[i], al, be, ga, p, q, r, chain, &bv[0])
    return counts


def program_zeros(double[::1] al, double[::1] be, double[::1] ga,
                  cnp.int64_t[::1] p, cnp.int64_t[::1] q, cnp.int64_t[::1] r,
                  cnp.int64_t[::1] chain, double lo, double hi, int maxit=200):
    cdef Py_ssize_t n = chain.shape[0] - 1, j
    cdef double l, h, mid
    cdef int it
    buf = np.zeros(al.shape[0] + 2)
    cdef double[::1] bv = buf
    out = np.empty(n)
    cdef double[::1] ov = out
    for j in range(n):
        l = lo
        h = hi
        for it in range(maxit):
            mid = 0.5 * (l + h)
            if mid <= l or mid >= h:
                break
            if n - _program_count1(mid, al, be, ga, p, q, r, chain, &bv[0]) >= j + 1:
                h = mid
            else:
                l = mid
        ov[j] = 0.5 * (l + h)
        lo = l
    return out
