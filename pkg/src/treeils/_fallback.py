"""NumPy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same in-place conventions and the same order of floating
point additions, so results match the compiled backend exactly.
"""

import numpy as np


def _seqsum(values):
    # left-to-right accumulation, unlike np.sum's pairwise reduction
    if len(values) == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def _edge_values(tables, tindex, tscale, e, a, b):
    return tscale[e] * tables[tindex[e], a, b]


def energy(unary, edges, tables, tindex, tscale, x):
    x = np.asarray(x)
    vals = np.concatenate([
        unary[np.arange(len(unary)), x],
        _edge_values(tables, tindex, tscale, np.arange(len(edges)), x[edges[:, 0]], x[edges[:, 1]]),
    ])
    return _seqsum(np.concatenate([[0.0], vals]))


def _oriented(tables, tindex, e, i, edges):
    """Table indexed ``[label of i, label of the other end]``."""
    T = tables[tindex[e]]
    return T if edges[e, 0] == i else T.T


def absorb(unary, nbr_ptr, nbr_site, nbr_edge, edges, tables, tindex, tscale,
           in_tree, x, sites, out):
    for k, i in enumerate(sites):
        row = unary[i].copy()
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_site[p]
            if in_tree[j]:
                continue
            e = nbr_edge[p]
            row += tscale[e] * _oriented(tables, tindex, e, i, edges)[:, x[j]]
        out[k] = row


def tree_energy(absorbed, parent, pedge, pflip, tables, tindex, tscale, xt):
    m = len(absorbed)
    vals = [absorbed[k, xt[k]] for k in range(m)]
    for k in range(1, m):
        e = pedge[k]
        if e < 0:
            continue
        a, b = (xt[parent[k]], xt[k]) if pflip[k] else (xt[k], xt[parent[k]])
        vals.append(_edge_values(tables, tindex, tscale, e, a, b))
    return _seqsum(np.concatenate([[0.0], vals]))


def tree_bp(h, parent, pedge, pflip, tables, tindex, tscale, potts,
            msg_up, msg_down, normalize, out):
    m = len(h)
    n_msgs = 0
    for k in range(m - 1, 0, -1):
        e = pedge[k]
        if e < 0:
            msg = np.full(h.shape[1], h[k].min())
        elif potts:
            s = tscale[e]
            msg = np.minimum(h[k] + s * 0.0, h[k].min() + s)
        else:
            T = tables[tindex[e]]
            if pflip[k]:
                T = T.T
            msg = (h[k][:, None] + tscale[e] * T).min(axis=0)
        if normalize:
            msg = msg - msg.min()
        msg_up[k - 1] = msg
        h[parent[k]] += msg
        n_msgs += 1

    out[0] = int(np.argmin(h[0]))
    for k in range(1, m):
        e = pedge[k]
        b = out[parent[k]]
        if e < 0:
            msg_down[k - 1] = 0.0
        else:
            T = tables[tindex[e]]
            col = T[b, :] if pflip[k] else T[:, b]
            msg_down[k - 1] = tscale[e] * col
        out[k] = int(np.argmin(h[k] + msg_down[k - 1]))
        n_msgs += 1
    return n_msgs


def icm_sweep(unary, nbr_ptr, nbr_site, nbr_edge, edges, tables, tindex, tscale, x, cost):
    changes = 0
    for i in range(len(unary)):
        c = unary[i].copy()
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            e = nbr_edge[p]
            c += tscale[e] * _oriented(tables, tindex, e, i, edges)[:, x[nbr_site[p]]]
        best = int(np.argmin(c))
        if c[best] < c[x[i]]:
            x[i] = best
            changes += 1
    return changes


def _incoming(edges, nbr_edge, i_of_slot):
    e = nbr_edge
    return np.where(edges[e, 1] == i_of_slot, 2 * e, 2 * e + 1)


def beliefs(unary, nbr_ptr, nbr_site, nbr_edge, edges, msgs, belief):
    belief[:] = unary
    deg = np.diff(nbr_ptr)
    sites = np.arange(len(unary))
    for r in range(int(deg.max()) if len(deg) else 0):
        has = sites[deg > r]
        slot = nbr_ptr[has] + r
        belief[has] += msgs[_incoming(edges, nbr_edge[slot], has)]


def loopy_sweep(unary, nbr_ptr, nbr_site, nbr_edge, edges, tables, tindex, tscale, potts,
                msgs, belief, tmp, normalize):
    beliefs(unary, nbr_ptr, nbr_site, nbr_edge, edges, msgs, belief)
    E = len(edges)
    if E == 0:
        return 0.0
    i, j = edges[:, 0], edges[:, 1]
    hi = belief[i] - msgs[1::2]  # i's belief without j's message
    hj = belief[j] - msgs[0::2]
    s = tscale[:, None]
    if potts:
        to_j = np.minimum(hi + s * 0.0, hi.min(axis=1, keepdims=True) + s)
        to_i = np.minimum(hj + s * 0.0, hj.min(axis=1, keepdims=True) + s)
    else:
        to_j = np.empty_like(hi)
        to_i = np.empty_like(hj)
        for lo in range(0, E, 4096):
            sl = slice(lo, lo + 4096)
            T = tables[tindex[sl]] * tscale[sl, None, None]
            to_j[sl] = (hi[sl][:, :, None] + T).min(axis=1)
            to_i[sl] = (hj[sl][:, None, :] + T).min(axis=2)
    if normalize:
        to_j -= to_j.min(axis=1, keepdims=True)
        to_i -= to_i.min(axis=1, keepdims=True)
    maxdiff = max(np.abs(to_j - msgs[0::2]).max(), np.abs(to_i - msgs[1::2]).max())
    msgs[0::2] = to_j
    msgs[1::2] = to_i
    return float(maxdiff)


def brute_force(unary, nbr_ptr, nbr_site, nbr_edge, edges, tables, tindex, tscale, tol):
    N, S = unary.shape
    n_in = min(N, max(1, int(np.log(1 << 16) / np.log(max(S, 2)))))
    n_out = N - n_in
    lower = []
    for k in range(N):
        nb = [(int(nbr_site[p]), int(nbr_edge[p])) for p in range(nbr_ptr[k], nbr_ptr[k + 1])]
        lower.append([(j, e) for j, e in nb if j < k])

    best = np.inf
    candidates = []
    prefix = np.zeros(n_out, dtype=np.int32)
    while True:
        partial = 0.0
        for k in range(n_out):
            c = partial + unary[k, prefix[k]]
            for j, e in lower[k]:
                c = c + _edge_values(tables, tindex, tscale, e, prefix[j], prefix[k])
            partial = c
        vec = np.array([partial])
        digits = {}
        for k in range(n_out, N):
            size = len(vec)
            for j in digits:
                digits[j] = np.repeat(digits[j], S)
            digits[k] = np.tile(np.arange(S), size)
            c = np.repeat(vec, S) + unary[k, digits[k]]
            for j, e in lower[k]:
                xj = digits[j] if j >= n_out else prefix[j]
                c = c + _edge_values(tables, tindex, tscale, e, xj, digits[k])
            vec = c
        block_min = vec.min()
        best = min(best, block_min)
        for idx in np.flatnonzero(vec <= block_min + tol):
            x = np.empty(N, dtype=np.int32)
            x[:n_out] = prefix
            for k in range(n_out, N):
                x[k] = digits[k][idx]
            candidates.append((vec[idx], x))
        candidates = [(E, x) for E, x in candidates if E <= best + tol]

        k = n_out - 1
        while k >= 0 and prefix[k] == S - 1:
            prefix[k] = 0
            k -= 1
        if k < 0:
            break
        prefix[k] += 1
    return float(best), [x for _, x in candidates]
