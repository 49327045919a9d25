"""Hot loops: Gauss-map orbit statistics and periodic-orbit tuple sums.

Every kernel has a numba implementation (``*_nb``) and a pure-numpy one
(``*_np``). The public wrappers dispatch on :data:`fareygauss._backend.USE_NUMBA`.

Tuple sums run over words ``(k_1, ..., k_l)`` of continued-fraction digits.
For each word the periodic point ``x = [k_1, ..., k_l, k_1, ...]`` is the
attracting fixed point of the Moebius map ``Phi_{k_1} o ... o Phi_{k_l}``
with ``Phi_k(x) = 1/(x + k)``. Its orbit weight ``P = prod_j (G^j x)^2`` equals
``1/(c x + d)^2`` for the composed matrix ``[[a, b], [c, d]]``.

Branch-and-bound: ``P < prod_j k_j^{-2}``, so a prefix whose bound times the
largest possible completion falls below ``tol`` is dropped, and the dropped
bound is returned so callers can carry it as part of the truncation tail.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA, njit, prange

MODE_TRACE = 0
MODE_DIRECT = 1


# ---------------------------------------------------------------------------
# Gauss-map orbits
# ---------------------------------------------------------------------------


@njit(cache=True)
def _gauss_log_tau_nb(x0, n):
    m = x0.shape[0]
    out = np.empty(m)
    for i in range(m):
        x = x0[i]
        acc = 0.0
        for _ in range(n):
            if x <= 0.0:
                acc = np.nan
                break
            y = 1.0 / x
            k = math.floor(y)
            acc += math.log(k)
            x = y - k
        out[i] = acc / n
    return out


def _gauss_log_tau_np(x0, n):
    x = np.array(x0, dtype=np.float64)
    acc = np.zeros_like(x)
    dead = np.zeros(x.shape, dtype=bool)
    for _ in range(n):
        dead |= x <= 0.0
        x = np.where(dead, 0.5, x)
        y = 1.0 / x
        k = np.floor(y)
        acc += np.log(k)
        x = y - k
    acc = acc / n
    acc[dead] = np.nan
    return acc


@njit(cache=True)
def _gauss_passage_sums_nb(x0, checkpoints):
    m = x0.shape[0]
    c = checkpoints.shape[0]
    out = np.empty((m, c))
    n = checkpoints[c - 1]
    for i in range(m):
        x = x0[i]
        s = 0.0
        j = 0
        failed = False
        for step in range(1, n + 1):
            if x <= 0.0:
                failed = True
                break
            y = 1.0 / x
            k = math.floor(y)
            s += k
            x = y - k
            if step == checkpoints[j]:
                out[i, j] = s
                j += 1
        if failed:
            for jj in range(c):
                out[i, jj] = np.nan
    return out


def _gauss_passage_sums_np(x0, checkpoints):
    x = np.array(x0, dtype=np.float64)
    s = np.zeros_like(x)
    dead = np.zeros(x.shape, dtype=bool)
    out = np.empty((x.shape[0], len(checkpoints)))
    j = 0
    for step in range(1, int(checkpoints[-1]) + 1):
        dead |= x <= 0.0
        x = np.where(dead, 0.5, x)
        y = 1.0 / x
        k = np.floor(y)
        s += k
        x = y - k
        if step == checkpoints[j]:
            out[:, j] = s
            j += 1
    out[dead] = np.nan
    return out


def gauss_log_tau_means(x0: np.ndarray, n: int) -> np.ndarray:
    """Per-orbit ``(1/n) sum_j log tau(G^j x0)``; NaN where the orbit hit 0."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if USE_NUMBA:
        return _gauss_log_tau_nb(x0, int(n))
    return _gauss_log_tau_np(x0, int(n))


def gauss_passage_sums(x0: np.ndarray, checkpoints) -> np.ndarray:
    """``S_n(x0)`` at each checkpoint (rows: orbits); NaN rows for failed orbits."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    cps = np.ascontiguousarray(checkpoints, dtype=np.int64)
    if cps.ndim != 1 or cps.size == 0 or np.any(np.diff(cps) <= 0) or cps[0] < 1:
        raise ValueError("checkpoints must be a strictly increasing list of positive integers")
    if USE_NUMBA:
        return _gauss_passage_sums_nb(x0, cps)
    return _gauss_passage_sums_np(x0, cps)


# ---------------------------------------------------------------------------
# Periodic-orbit tuple sums
# ---------------------------------------------------------------------------


@njit(cache=True)
def _fixed_point_nb(a, b, c, d):
    dm = d - a
    disc = math.sqrt(dm * dm + 4.0 * b * c)
    if dm >= 0.0:
        return 2.0 * b / (dm + disc)
    return (disc - dm) / (2.0 * c)


@njit(cache=True)
def _leaf_nb(digits, ell, a, b, c, d, z, q, mode):
    s = 0
    for i in range(ell):
        s += digits[i]
    zp = z**s
    if mode == MODE_TRACE:
        x = _fixed_point_nb(a, b, c, d)
        den = c * x + d
        p = 1.0 / (den * den)
        sgn = -1.0 if (q * ell) % 2 == 1 else 1.0
        alt = -1.0 if ell % 2 == 1 else 1.0
        return sgn * zp * p ** (q + 1) / (1.0 - alt * p)
    p = 1.0
    for i in range(ell):
        aa, bb, cc, dd = 1.0, 0.0, 0.0, 1.0
        for j in range(ell):
            k = digits[(i + j) % ell]
            aa, bb, cc, dd = bb, aa + k * bb, dd, cc + k * dd
        x = _fixed_point_nb(aa, bb, cc, dd)
        p *= x * x
    return zp * p


@njit(cache=True)
def _dfs_from_nb(k1, ell, z, q, kmax, tol, mode, wk, suf, li):
    digits = np.zeros(ell, dtype=np.int64)
    sa = np.empty(ell)
    sb = np.empty(ell)
    sc = np.empty(ell)
    sd = np.empty(ell)
    bnd = np.empty(ell)
    digits[0] = k1
    sa[0], sb[0], sc[0], sd[0] = 0.0, 1.0, 1.0, float(k1)
    bnd[0] = wk[k1]
    total = 0.0 + 0.0j
    pruned = 0.0
    count = 0
    if ell == 1:
        total += _leaf_nb(digits, 1, sa[0], sb[0], sc[0], sd[0], z, q, mode)
        return total, pruned, 1
    level = 1
    digits[1] = 0
    while level >= 1:
        digits[level] += 1
        k = digits[level]
        if k > kmax:
            level -= 1
            continue
        rem = ell - level - 1
        mult = li**rem
        pb = bnd[level - 1] * wk[k]
        if pb * mult < tol:
            pruned += bnd[level - 1] * suf[k] * mult
            level -= 1
            continue
        a = sa[level - 1]
        b = sb[level - 1]
        c = sc[level - 1]
        d = sd[level - 1]
        na, nb, nc, nd = b, a + k * b, d, c + k * d
        if rem == 0:
            total += _leaf_nb(digits, ell, na, nb, nc, nd, z, q, mode)
            count += 1
        else:
            sa[level], sb[level], sc[level], sd[level] = na, nb, nc, nd
            bnd[level] = pb
            level += 1
            digits[level] = 0
    return total, pruned, count


@njit(parallel=True, cache=True)
def _tuple_sum_nb(ell, z, q, kmax, tol, mode, wk, suf):
    li = suf[1]
    vals = np.zeros(kmax + 1, dtype=np.complex128)
    pruned = np.zeros(kmax + 1)
    counts = np.zeros(kmax + 1, dtype=np.int64)
    lead = li ** (ell - 1)
    for k1 in prange(1, kmax + 1):
        if wk[k1] * lead < tol:
            pruned[k1] = wk[k1] * lead
            continue
        v, p, c = _dfs_from_nb(k1, ell, z, q, kmax, tol, mode, wk, suf, li)
        vals[k1] = v
        pruned[k1] = p
        counts[k1] = c
    return vals, pruned, counts


def _word_matrix(digits):
    """Matrix of ``Phi_{d_1} o ... o Phi_{d_l}``; entries broadcast over array digits."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    for k in digits:
        a, b, c, d = b, a + k * b, d, c + k * d
    return a, b, c, d


def _fixed_point_np(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, c, d)))
    dm = d - a
    disc = np.sqrt(dm * dm + 4.0 * b * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = 2.0 * b / (dm + disc)
        neg = (disc - dm) / (2.0 * c)
    return np.where(dm >= 0.0, pos, neg)


def _leaves_np(prefix, ks, z, q, mode):
    ell = len(prefix) + 1
    s = sum(prefix) + ks
    zp = np.power(np.complex128(z), s)
    digits = list(prefix) + [ks]
    if mode == MODE_TRACE:
        a, b, c, d = _word_matrix(digits)
        x = _fixed_point_np(a, b, c, d)
        p = 1.0 / (c * x + d) ** 2
        sgn = -1.0 if (q * ell) % 2 else 1.0
        alt = -1.0 if ell % 2 else 1.0
        return sgn * zp * p ** (q + 1) / (1.0 - alt * p)
    p = np.ones(ks.shape)
    for i in range(ell):
        rot = digits[i:] + digits[:i]
        x = _fixed_point_np(*_word_matrix(rot))
        p = p * x * x
    return zp * p


def _tuple_sum_np(ell, z, q, kmax, tol, mode, wk, suf):
    li = suf[1]
    ks_all = np.arange(1, kmax + 1)
    total = 0.0 + 0.0j
    pruned = 0.0
    count = 0

    def rec(prefix, bound):
        nonlocal total, pruned, count
        rem = ell - len(prefix) - 1
        mult = li**rem
        if rem == 0:
            keep = bound * wk[1 : kmax + 1] >= tol
            n_keep = int(np.count_nonzero(keep))
            if n_keep < kmax:
                pruned += bound * suf[n_keep + 1]
            if n_keep:
                total += complex(np.sum(_leaves_np(prefix, ks_all[:n_keep], z, q, mode)))
                count += n_keep
            return
        for k in range(1, kmax + 1):
            pb = bound * wk[k]
            if pb * mult < tol:
                pruned += bound * suf[k] * mult
                return
            rec(prefix + [k], pb)

    rec([], 1.0)
    return total, pruned, count


def _digit_bounds(z, kmax):
    az = abs(z)
    k = np.arange(1, kmax + 1, dtype=np.float64)
    wk = np.zeros(kmax + 2)
    wk[1 : kmax + 1] = az**k / (k * k)
    suf = np.zeros(kmax + 2)
    suf[1 : kmax + 1] = np.cumsum(wk[1 : kmax + 1][::-1])[::-1]
    return wk, suf


def periodic_tuple_sum(ell: int, z: complex, q: int, kmax: int, tol: float, mode: int):
    """Sum a periodic-orbit functional over all ``ell``-tuples with digits ``<= kmax``.

    ``mode == MODE_TRACE`` sums the trace summand of ``K_{z,q}^ell``;
    ``mode == MODE_DIRECT`` sums ``z^{k_1+...+k_l} prod_j (G^j x)^2`` using one
    quadratic per cyclic shift. Returns ``(value, pruned_bound, n_evaluated)``.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if abs(z) > 1.0 + 1e-15:
        raise ValueError("tuple sums converge only for |z| <= 1")
    wk, suf = _digit_bounds(z, kmax)
    if USE_NUMBA:
        vals, pruned, counts = _tuple_sum_nb(
            int(ell), complex(z), int(q), int(kmax), float(tol), int(mode), wk, suf
        )
        # fixed-order reduction keeps the result independent of the thread count
        return complex(np.sum(vals)), float(np.sum(pruned)), int(np.sum(counts))
    return _tuple_sum_np(int(ell), complex(z), int(q), int(kmax), float(tol), int(mode), wk, suf)
