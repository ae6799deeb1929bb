"""Pure-numpy kernels. Signatures and results mirror ``numba_impl``."""

import numpy as np

from ._tables import CRC64_TABLE

_EMPTY = np.empty(0, dtype=np.int64)


def _ragged_positions(indptr, nodes):
    """Flat positions of every CSR entry belonging to ``nodes``."""
    starts = indptr[nodes]
    lens = indptr[nodes + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return _EMPTY
    offsets = np.cumsum(lens) - lens
    return np.repeat(starts - offsets, lens) + np.arange(total, dtype=np.int64)


def _expand_one(tx_indptr, tx_indices, tx_degree, sup_indptr, sup_indices,
                sup_weight, seed, n_max, w_min):
    k = n_max.shape[0]
    members = np.array([seed], dtype=np.int64)
    masks = np.array([1], dtype=np.int64)
    frontier = members
    for r in range(k):
        open_tx = frontier[tx_degree[frontier] <= n_max[r]]
        tx_nb = tx_indices[_ragged_positions(tx_indptr, open_tx)]
        pos = _ragged_positions(sup_indptr, frontier)
        sup_nb = sup_indices[pos[sup_weight[pos] >= w_min[r]]]
        frontier = np.unique(np.concatenate([tx_nb, sup_nb]))
        if frontier.size == 0:
            break
        bit = np.int64(1) << np.int64(r + 1)
        known = np.isin(frontier, members, assume_unique=True)
        if known.any():
            # members is kept sorted, so searchsorted finds existing slots
            slots = np.searchsorted(members, frontier[known])
            masks[slots] |= bit
        fresh = frontier[~known]
        if fresh.size:
            members = np.concatenate([members, fresh])
            masks = np.concatenate([masks, np.full(fresh.size, bit, dtype=np.int64)])
            order = np.argsort(members, kind="stable")
            members = members[order]
            masks = masks[order]
    return members, masks


def expand_batch(tx_indptr, tx_indices, tx_degree, sup_indptr, sup_indices,
                 sup_weight, seeds, n_max, w_min):
    """Layered walk expansion for each seed.

    Returns ``(offsets, members, masks)``: members of seed ``i`` are
    ``members[offsets[i]:offsets[i+1]]`` in ascending order, and bit ``r`` of
    ``masks`` is set when the member sits on the frontier after ``r`` rounds.
    """
    parts_m = []
    parts_b = []
    offsets = np.zeros(seeds.shape[0] + 1, dtype=np.int64)
    for i in range(seeds.shape[0]):
        m, b = _expand_one(tx_indptr, tx_indices, tx_degree, sup_indptr,
                           sup_indices, sup_weight, seeds[i], n_max, w_min)
        parts_m.append(m)
        parts_b.append(b)
        offsets[i + 1] = offsets[i] + m.shape[0]
    if not parts_m:
        return offsets, _EMPTY.copy(), _EMPTY.copy()
    return offsets, np.concatenate(parts_m), np.concatenate(parts_b)


def component_labels(n, a, b):
    """Component id per vertex; ids are numbered by each component's smallest vertex."""
    labels = np.arange(n, dtype=np.int64)
    if n == 0 or a.shape[0] == 0:
        return labels
    while True:
        la = labels[a]
        lb = labels[b]
        low = np.minimum(la, lb)
        hooked = labels.copy()
        np.minimum.at(hooked, la, low)
        np.minimum.at(hooked, lb, low)
        while True:
            jumped = hooked[hooked]
            if np.array_equal(jumped, hooked):
                break
            hooked = jumped
        if np.array_equal(hooked, labels):
            break
        labels = hooked
    _, canon = np.unique(labels, return_inverse=True)
    return canon.astype(np.int64)


def best_split(X, y, w, idx, feat_order, mtry, min_leaf):
    """Gini split search over the rows ``idx`` with bootstrap weights ``w``.

    Features are visited in ``feat_order`` until ``mtry`` non-constant ones have
    been seen. Returns ``(feature, threshold, impurity, visited)``; feature is
    -1 when no admissible split exists.
    """
    W = int(w[idx].sum())
    P = int((w[idx] * y[idx]).sum())
    best_imp = np.inf
    best_f = -1
    best_t = 0.0
    visited = 0
    for f in feat_order:
        if visited >= mtry:
            break
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        if xs[0] == xs[-1]:
            continue
        visited += 1
        rows = idx[order]
        wl = np.cumsum(w[rows])[:-1]
        pl = np.cumsum(w[rows] * y[rows])[:-1]
        wr = W - wl
        pr = P - pl
        valid = (xs[:-1] != xs[1:]) & (wl >= min_leaf) & (wr >= min_leaf)
        if not valid.any():
            continue
        wlf = wl.astype(np.float64)
        plf = pl.astype(np.float64)
        qlf = (wl - pl).astype(np.float64)
        wrf = wr.astype(np.float64)
        prf = pr.astype(np.float64)
        qrf = (wr - pr).astype(np.float64)
        imp = (wlf - (plf * plf + qlf * qlf) / wlf) + (wrf - (prf * prf + qrf * qrf) / wrf)
        imp[~valid] = np.inf
        i = int(np.argmin(imp))
        thr = (xs[i] + xs[i + 1]) / 2.0
        if thr >= xs[i + 1]:
            thr = xs[i]
        v = imp[i]
        if v < best_imp or (v == best_imp and (f < best_f or (f == best_f and thr < best_t))):
            best_imp = v
            best_f = int(f)
            best_t = float(thr)
    return best_f, best_t, float(best_imp), visited


def tree_apply(feature, threshold, left, right, X):
    """Leaf node index reached by each row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    rows = np.arange(X.shape[0])
    while active.any():
        r = rows[active]
        nd = node[r]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node


def svm_cd_epoch(X, y, alpha, w, qii, upper, order):
    """One pass of dual coordinate descent for the L1-loss linear SVM.

    Updates ``alpha`` and ``w`` in place; returns the largest projected
    gradient magnitude seen during the pass.
    """
    maxviol = 0.0
    for i in order:
        if qii[i] <= 0.0:
            continue
        xi = X[i]
        g = y[i] * float(np.dot(w, xi)) - 1.0
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
            w += ((new - a) * y[i]) * xi
    return maxviol


def crc64(data, crc=0):
    """CRC-64/XZ of a uint8 array, continuing from ``crc``."""
    table = [int(v) for v in CRC64_TABLE]
    c = (~int(crc)) & 0xFFFFFFFFFFFFFFFF
    for byte in bytes(data):
        c = table[(c ^ byte) & 0xFF] ^ (c >> 8)
    return np.uint64((~c) & 0xFFFFFFFFFFFFFFFF)
