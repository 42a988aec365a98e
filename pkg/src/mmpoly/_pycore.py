"""Pure numpy versions of the kernels in _core.pyx.

Same signatures and the same algorithms, with inner loops vectorised so the
fallback stays usable at moderate sizes. Zero searches handle all brackets
at once; program_zeros probes seven points per bracket per pass instead of
one, since a pass costs about the same either way.
"""
import math

import numpy as np

_EPS = 2.220446049250313e-16


class ConvergenceError(RuntimeError):
    pass


def hqr(h_in, max_sweeps):
    a = np.array(h_in, dtype=np.float64, copy=True)
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.abs(np.triu(a, -1)).sum())
    t = 0.0
    sweeps = 0
    nn = n - 1
    x = y = w = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
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
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                raise ConvergenceError("QR sweep limit %d reached" % max_sweeps)
            if its > 0 and its % 10 == 0:
                t += x
                a[np.arange(nn + 1), np.arange(nn + 1)] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
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
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
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
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
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
                last = k != nn - 1
                # row and column updates on slices
                rows = a[k:k + 3 if last else k + 2, k:nn + 1]
                pv = rows[0] + q * rows[1]
                if last:
                    pv = pv + r * rows[2]
                    rows[2] -= pv * z
                rows[1] -= pv * y
                rows[0] -= pv * x
                mmin = min(nn, k + 3)
                cols = a[l:mmin + 1, k:k + 3 if last else k + 2]
                pv = x * cols[:, 0] + y * cols[:, 1]
                if last:
                    pv = pv + z * cols[:, 2]
                    cols[:, 2] -= pv * r
                cols[:, 1] -= pv * q
                cols[:, 0] -= pv
    return wr, wi, sweeps


def _eig2(a, b, c, d):
    hm = 0.5 * (a + d)
    hd = 0.5 * (a - d)
    disc = np.sqrt(hd * hd + b * c)
    return hm + disc, hm - disc


def cubic_roots(c2, c1, c0, maxit=60):
    c2 = np.asarray(c2, dtype=np.complex128)
    c1 = np.asarray(c1, dtype=np.complex128)
    c0 = np.asarray(c0, dtype=np.complex128)
    m = c2.shape[0]
    h = np.zeros((m, 3, 3), dtype=np.complex128)
    h[:, 0, 0] = -c2
    h[:, 0, 1] = -c1
    h[:, 0, 2] = -c0
    h[:, 1, 0] = 1.0
    h[:, 2, 1] = 1.0
    for _ in range(20):
        changed = False
        for i in range(3):
            absh = np.abs(h)
            rn = absh[:, i, :].sum(axis=1) - absh[:, i, i]
            cn = absh[:, :, i].sum(axis=1) - absh[:, i, i]
            good = (rn > 0) & (cn > 0)
            ratio = np.where(good, np.sqrt(np.where(good, rn, 1.0) / np.where(good, cn, 1.0)), 1.0)
            _, ex = np.frexp(ratio)
            f = np.ldexp(1.0, ex)
            g = rn / f + cn * f
            upd = good & (g < 0.95 * (rn + cn))
            if upd.any():
                changed = True
                fu = np.where(upd, f, 1.0)
                h[:, i, :] /= fu[:, None]
                h[:, :, i] *= fu[:, None]
        if not changed:
            break

    roots = np.zeros((m, 3), dtype=np.complex128)
    done = np.zeros(m, dtype=bool)
    for it in range(maxit):
        act = ~done
        if not act.any():
            break
        d0, d1, d2 = h[:, 0, 0], h[:, 1, 1], h[:, 2, 2]
        low = act & (np.abs(h[:, 2, 1]) <= _EPS * (np.abs(d1) + np.abs(d2)))
        if low.any():
            e1, e2 = _eig2(h[low, 0, 0], h[low, 0, 1], h[low, 1, 0], h[low, 1, 1])
            roots[low, 0], roots[low, 1], roots[low, 2] = e1, e2, h[low, 2, 2]
            done |= low
        high = ~done & (np.abs(h[:, 1, 0]) <= _EPS * (np.abs(d0) + np.abs(d1)))
        if high.any():
            e1, e2 = _eig2(h[high, 1, 1], h[high, 1, 2], h[high, 2, 1], h[high, 2, 2])
            roots[high, 0], roots[high, 1], roots[high, 2] = h[high, 0, 0], e1, e2
            done |= high
        act = ~done
        if not act.any():
            break
        hh = h[act]
        e1, e2 = _eig2(hh[:, 1, 1], hh[:, 1, 2], hh[:, 2, 1], hh[:, 2, 2])
        mu = np.where(np.abs(e1 - hh[:, 2, 2]) <= np.abs(e2 - hh[:, 2, 2]), e1, e2)
        if it > 0 and it % 10 == 0:
            mu = hh[:, 2, 2] + 0.75 * np.abs(hh[:, 2, 1])
        idx = np.arange(3)
        hh[:, idx, idx] -= mu[:, None]
        cs = []
        sn = []
        for k in range(2):
            aa = hh[:, k, k].copy()
            bb = hh[:, k + 1, k].copy()
            r = np.sqrt(np.abs(aa) ** 2 + np.abs(bb) ** 2)
            ab = np.abs(aa)
            rs = np.where(r == 0, 1.0, r)
            abs_ = np.where(ab == 0, 1.0, ab)
            c = np.where(r == 0, 1.0, np.where(ab == 0, 0.0, ab / rs))
            s = np.where(r == 0, 0.0, np.where(ab == 0, np.conj(bb) / rs, (aa / abs_) * np.conj(bb) / rs))
            x0 = hh[:, k, k:].copy()
            x1 = hh[:, k + 1, k:].copy()
            hh[:, k, k:] = c[:, None] * x0 + s[:, None] * x1
            hh[:, k + 1, k:] = -np.conj(s)[:, None] * x0 + c[:, None] * x1
            cs.append(c)
            sn.append(s)
        for k in range(2):
            c, s = cs[k], sn[k]
            top = min(k + 2, 3)
            x0 = hh[:, :top, k].copy()
            x1 = hh[:, :top, k + 1].copy()
            hh[:, :top, k] = c[:, None] * x0 + np.conj(s)[:, None] * x1
            hh[:, :top, k + 1] = -s[:, None] * x0 + c[:, None] * x1
        hh[:, idx, idx] += mu[:, None]
        h[act] = hh
    ok = done.copy()
    if not done.all():
        rest = ~done
        roots[rest] = h[rest][:, [0, 1, 2], [0, 1, 2]]
    return roots, ok


def ratio_count(x, a, b, c):
    x = np.asarray(x, dtype=np.float64)
    n = len(a)
    r1 = np.ones_like(x)
    r2 = np.ones_like(x)
    cnt = np.zeros(x.shape, dtype=np.int64)
    for k in range(n):
        r = x - a[k]
        if k >= 1:
            r = r - b[k] / r1
        if k >= 2:
            r = r - c[k] / (r1 * r2)
        r = np.where(r == 0.0, 1e-300 + _EPS * (np.abs(x) + abs(a[k])), r)
        cnt += r < 0.0
        r2 = r1
        r1 = r
    return cnt


def _bisect(count, n, lo, hi, maxit, split=2):
    # all zeros at once, one bracket per zero; each pass probes split - 1
    # interior points per bracket in a single vectorised count
    j = np.arange(n)
    l = np.full(n, float(lo))
    h = np.full(n, float(hi))
    frac = np.arange(1, split) / split
    for _ in range(maxit):
        mid = 0.5 * (l + h)
        live = (mid > l) & (mid < h)
        if not live.any():
            break
        pts = l[:, None] + (h - l)[:, None] * frac[None, :]
        below = (n - count(pts)) >= (j + 1)[:, None]
        # below is monotone along each row: False ... False True ... True
        k = below.sum(axis=1)
        first = split - 1 - k                   # index of the first True
        lo_new = np.where(first > 0, pts[j, np.maximum(first - 1, 0)], l)
        hi_new = np.where(k > 0, pts[j, np.minimum(first, split - 2)], h)
        l = np.where(live, np.maximum(lo_new, l), l)
        h = np.where(live, np.minimum(hi_new, h), h)
    return 0.5 * (l + h)


def ratio_zeros(a, b, c, lo, hi, maxit=200):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    return _bisect(lambda x: ratio_count(x, a, b, c), len(a), lo, hi, maxit)


def _levels(al, be, ga, p, q, r):
    """Group program rows so that each group only reads earlier groups, with
    the per-group coefficient and source slices cut once."""
    p, q, r = (np.asarray(u, dtype=np.int64) for u in (p, q, r))
    al, be, ga = (np.asarray(u, dtype=np.float64) for u in (al, be, ga))
    n = len(p)
    depth = np.zeros(n + 2, dtype=np.int64)
    for m in range(n):
        depth[m + 2] = 1 + max(depth[p[m]], depth[q[m]], depth[r[m]])
    d = depth[2:]
    out = []
    for k in range(1, int(d.max()) + 1 if n else 1):
        rows = np.flatnonzero(d == k)
        src = np.stack((p[rows], q[rows], r[rows]))
        coef = np.stack((al[rows], be[rows], ga[rows]))[:, :, None]
        out.append((rows + 2, src, coef))
    return out


def _program_run(x, al, be, ga, chain, levels):
    flat = x.reshape(1, -1)
    v = np.empty((len(al) + 2, flat.shape[1]))
    v[0] = 0.0
    v[1] = 1.0
    for dst, src, coef in levels:
        s = v[src]
        s[0] *= flat - coef[0]
        s[1:] *= coef[1:]
        v[dst] = s[0] - s[1] - s[2]
    vals = v[np.asarray(chain)]
    if (vals == 0.0).any():
        for m in range(1, len(vals)):
            z = vals[m] == 0.0
            if z.any():
                vals[m] = np.where(z, np.copysign(1e-300, -vals[m - 1]), vals[m])
    neg = vals < 0.0
    return (neg[1:] != neg[:-1]).sum(axis=0).reshape(x.shape), v[chain[-1]].reshape(x.shape)


def program_count(x, al, be, ga, p, q, r, chain, levels=None):
    x = np.asarray(x, dtype=np.float64)
    if levels is None:
        levels = _levels(al, be, ga, p, q, r)
    return _program_run(x, al, be, ga, chain, levels)[0]


def program_zeros(al, be, ga, p, q, r, chain, lo, hi, maxit=200):
    n = len(chain) - 1
    if n == 0:
        return np.zeros(0)
    lv = _levels(al, be, ga, p, q, r)
    return _bisect(lambda x: _program_run(x, al, be, ga, chain, lv)[0], n, lo, hi, maxit, split=8)
