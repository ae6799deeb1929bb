"""numba kernels. Signatures and results mirror ``numpy_impl``."""

import numpy as np
from numba import njit

from ._tables import CRC64_TABLE


@njit(cache=True, inline="always")
def _grow(buf, size):
    if size < buf.shape[0]:
        return buf
    out = np.empty(max(16, 2 * buf.shape[0]), dtype=buf.dtype)
    out[: buf.shape[0]] = buf
    return out


@njit(cache=True, nogil=True)
def expand_batch(tx_indptr, tx_indices, tx_degree, sup_indptr, sup_indices,
                 sup_weight, seeds, n_max, w_min):
    n = tx_degree.shape[0]
    k = n_max.shape[0]
    mask = np.zeros(n, dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    offsets = np.zeros(seeds.shape[0] + 1, dtype=np.int64)
    out_m = np.empty(1024, dtype=np.int64)
    out_b = np.empty(1024, dtype=np.int64)
    size = 0
    clock = 0
    for s in range(seeds.shape[0]):
        seed = seeds[s]
        nt = 1
        touched[0] = seed
        mask[seed] = 1
        frontier[0] = seed
        nf = 1
        for r in range(k):
            clock += 1
            nn = 0
            for i in range(nf):
                u = frontier[i]
                if tx_degree[u] <= n_max[r]:
                    for j in range(tx_indptr[u], tx_indptr[u + 1]):
                        v = tx_indices[j]
                        if stamp[v] != clock:
                            stamp[v] = clock
                            nxt[nn] = v
                            nn += 1
                for j in range(sup_indptr[u], sup_indptr[u + 1]):
                    if sup_weight[j] >= w_min[r]:
                        v = sup_indices[j]
                        if stamp[v] != clock:
                            stamp[v] = clock
                            nxt[nn] = v
                            nn += 1
            bit = np.int64(1) << np.int64(r + 1)
            for i in range(nn):
                v = nxt[i]
                if mask[v] == 0:
                    touched[nt] = v
                    nt += 1
                mask[v] |= bit
            tmp = frontier
            frontier = nxt
            nxt = tmp
            nf = nn
            if nf == 0:
                break
        ms = np.sort(touched[:nt])
        for i in range(nt):
            out_m = _grow(out_m, size)
            out_b = _grow(out_b, size)
            out_m[size] = ms[i]
            out_b[size] = mask[ms[i]]
            size += 1
        for i in range(nt):
            mask[touched[i]] = 0
        offsets[s + 1] = size
    return offsets, out_m[:size].copy(), out_b[:size].copy()


@njit(cache=True, inline="always")
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def component_labels(n, a, b):
    parent = np.arange(n, dtype=np.int64)
    for i in range(a.shape[0]):
        x = _find(parent, a[i])
        y = _find(parent, b[i])
        if x < y:
            parent[y] = x
        elif y < x:
            parent[x] = y
    labels = np.empty(n, dtype=np.int64)
    rank = np.full(n, -1, dtype=np.int64)
    nxt_id = 0
    for v in range(n):
        root = _find(parent, v)
        if rank[root] < 0:
            rank[root] = nxt_id
            nxt_id += 1
        labels[v] = rank[root]
    return labels


@njit(cache=True, nogil=True)
def best_split(X, y, w, idx, feat_order, mtry, min_leaf):
    m = idx.shape[0]
    W = 0
    P = 0
    for i in range(m):
        W += w[idx[i]]
        P += w[idx[i]] * y[idx[i]]
    best_imp = np.inf
    best_f = -1
    best_t = 0.0
    visited = 0
    xs = np.empty(m, dtype=np.float64)
    for fi in range(feat_order.shape[0]):
        if visited >= mtry:
            break
        f = feat_order[fi]
        for i in range(m):
            xs[i] = X[idx[i], f]
        order = np.argsort(xs, kind="mergesort")
        if xs[order[0]] == xs[order[m - 1]]:
            continue
        visited += 1
        wl = 0
        pl = 0
        for i in range(m - 1):
            row = idx[order[i]]
            wl += w[row]
            pl += w[row] * y[row]
            x0 = xs[order[i]]
            x1 = xs[order[i + 1]]
            if x0 == x1:
                continue
            wr = W - wl
            pr = P - pl
            if wl < min_leaf or wr < min_leaf:
                continue
            wlf = float(wl)
            plf = float(pl)
            qlf = float(wl - pl)
            wrf = float(wr)
            prf = float(pr)
            qrf = float(wr - pr)
            imp = (wlf - (plf * plf + qlf * qlf) / wlf) + (wrf - (prf * prf + qrf * qrf) / wrf)
            thr = (x0 + x1) / 2.0
            if thr >= x1:
                thr = x0
            if imp < best_imp or (imp == best_imp and (f < best_f or (f == best_f and thr < best_t))):
                best_imp = imp
                best_f = f
                best_t = thr
    return best_f, best_t, best_imp, visited


@njit(cache=True, nogil=True)
def tree_apply(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        nd = 0
        while feature[nd] >= 0:
            if X[i, feature[nd]] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        out[i] = nd
    return out


@njit(cache=True, nogil=True)
def svm_cd_epoch(X, y, alpha, w, qii, upper, order):
    p = X.shape[1]
    maxviol = 0.0
    for oi in range(order.shape[0]):
        i = order[oi]
        if qii[i] <= 0.0:
            continue
        dot = 0.0
        for j in range(p):
            dot += w[j] * X[i, j]
        g = y[i] * dot - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= upper:
            pg = max(g, 0.0)
        else:
            pg = g
        if abs(pg) > maxviol:
            maxviol = abs(pg)
        if pg != 0.0:
            new = min(max(a - g / qii[i], 0.0), upper)
            alpha[i] = new
            step = (new - a) * y[i]
            for j in range(p):
                w[j] += step * X[i, j]
    return maxviol


@njit(cache=True, nogil=True)
def _crc64(data, crc, table):
    c = ~crc
    mask = np.uint64(0xFF)
    eight = np.uint64(8)
    for i in range(data.shape[0]):
        c = table[np.intp((c ^ np.uint64(data[i])) & mask)] ^ (c >> eight)
    return ~c


def crc64(data, crc=0):
    """CRC-64/XZ of a uint8 array, continuing from ``crc``."""
    buf = np.frombuffer(data, dtype=np.uint8)
    return _crc64(buf, np.uint64(crc), CRC64_TABLE)
