# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. ``_fallback.py`` mirrors every function here.

Pairwise energy of edge ``e`` with labels ``a`` (on ``edges[e, 0]``) and ``b``
(on ``edges[e, 1]``) is ``tscale[e] * tables[tindex[e], a, b]``. Additions are
performed in the same order as the fallback so both backends agree bit for
bit.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

ctypedef cnp.float64_t f8
ctypedef cnp.int32_t i4
ctypedef cnp.uint8_t u1


cdef inline double _pw(const f8[:, :, ::1] tables, const i4[::1] tindex,
                       const f8[::1] tscale, int e, int a, int b) noexcept nogil:
    return tscale[e] * tables[tindex[e], a, b]


def energy(const f8[:, ::1] unary, const i4[:, ::1] edges,
           const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
           const i4[::1] x):
    cdef Py_ssize_t i, e
    cdef double total = 0.0
    with nogil:
        for i in range(unary.shape[0]):
            total += unary[i, x[i]]
        for e in range(edges.shape[0]):
            total += _pw(tables, tindex, tscale, e, x[edges[e, 0]], x[edges[e, 1]])
    return total


def absorb(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
           const i4[::1] nbr_edge, const i4[:, ::1] edges,
           const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
           const u1[::1] in_tree, const i4[::1] x, const i4[::1] sites,
           f8[:, ::1] out):
    cdef Py_ssize_t k, p, a
    cdef int i, j, e, xj, S = unary.shape[1]
    cdef double s
    with nogil:
        for k in range(sites.shape[0]):
            i = sites[k]
            for a in range(S):
                out[k, a] = unary[i, a]
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                j = nbr_site[p]
                if in_tree[j]:
                    continue
                e = nbr_edge[p]
                xj = x[j]
                s = tscale[e]
                if edges[e, 0] == i:
                    for a in range(S):
                        out[k, a] += s * tables[tindex[e], a, xj]
                else:
                    for a in range(S):
                        out[k, a] += s * tables[tindex[e], xj, a]


def tree_energy(const f8[:, ::1] absorbed, const i4[::1] parent, const i4[::1] pedge,
                const u1[::1] pflip, const f8[:, :, ::1] tables, const i4[::1] tindex,
                const f8[::1] tscale, const i4[::1] xt):
    cdef Py_ssize_t k
    cdef int e
    cdef double total = 0.0
    with nogil:
        for k in range(absorbed.shape[0]):
            total += absorbed[k, xt[k]]
        for k in range(1, absorbed.shape[0]):
            e = pedge[k]
            if e < 0:
                continue
            if pflip[k]:
                total += _pw(tables, tindex, tscale, e, xt[parent[k]], xt[k])
            else:
                total += _pw(tables, tindex, tscale, e, xt[k], xt[parent[k]])
    return total


def tree_bp(f8[:, ::1] h, const i4[::1] parent, const i4[::1] pedge, const u1[::1] pflip,
            const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
            bint potts, f8[:, ::1] msg_up, f8[:, ::1] msg_down, bint normalize,
            i4[::1] out):
    """Two-pass min-sum on a tree whose parents precede their children.

    ``h`` enters holding the absorbed singleton energies and leaves holding
    them plus every upward message. Returns the number of messages computed.
    """
    cdef Py_ssize_t m = h.shape[0], k, a, b
    cdef int S = h.shape[1], p, e, t, best
    cdef long n_msgs = 0
    cdef double s, v, lo, hmin
    with nogil:
        # upward: leaves to root
        for k in range(m - 1, 0, -1):
            p = parent[k]
            e = pedge[k]
            if e < 0:
                hmin = h[k, 0]
                for a in range(1, S):
                    if h[k, a] < hmin:
                        hmin = h[k, a]
                for b in range(S):
                    msg_up[k - 1, b] = hmin
            elif potts:
                s = tscale[e]
                hmin = h[k, 0]
                for a in range(1, S):
                    if h[k, a] < hmin:
                        hmin = h[k, a]
                hmin = hmin + s
                for b in range(S):
                    v = h[k, b] + s * 0.0
                    msg_up[k - 1, b] = v if v < hmin else hmin
            else:
                s = tscale[e]
                t = tindex[e]
                for b in range(S):
                    if pflip[k]:
                        lo = h[k, 0] + s * tables[t, b, 0]
                        for a in range(1, S):
                            v = h[k, a] + s * tables[t, b, a]
                            if v < lo:
                                lo = v
                    else:
                        lo = h[k, 0] + s * tables[t, 0, b]
                        for a in range(1, S):
                            v = h[k, a] + s * tables[t, a, b]
                            if v < lo:
                                lo = v
                    msg_up[k - 1, b] = lo
            if normalize:
                lo = msg_up[k - 1, 0]
                for b in range(1, S):
                    if msg_up[k - 1, b] < lo:
                        lo = msg_up[k - 1, b]
                for b in range(S):
                    msg_up[k - 1, b] -= lo
            for b in range(S):
                h[p, b] += msg_up[k - 1, b]
            n_msgs += 1

        # downward: root label, then each child given its parent's label
        best = 0
        for a in range(1, S):
            if h[0, a] < h[0, best]:
                best = a
        out[0] = best
        for k in range(1, m):
            e = pedge[k]
            b = out[parent[k]]
            for a in range(S):
                if e < 0:
                    msg_down[k - 1, a] = 0.0
                elif pflip[k]:
                    msg_down[k - 1, a] = _pw(tables, tindex, tscale, e, b, a)
                else:
                    msg_down[k - 1, a] = _pw(tables, tindex, tscale, e, a, b)
            best = 0
            lo = h[k, 0] + msg_down[k - 1, 0]
            for a in range(1, S):
                v = h[k, a] + msg_down[k - 1, a]
                if v < lo:
                    lo = v
                    best = a
            out[k] = best
            n_msgs += 1
    return n_msgs


def icm_sweep(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
              const i4[::1] nbr_edge, const i4[:, ::1] edges,
              const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
              i4[::1] x, f8[::1] cost):
    """One in-order sweep; a site moves only to a strictly better label."""
    cdef Py_ssize_t i, p, a
    cdef int j, e, xj, best, S = unary.shape[1]
    cdef long changes = 0
    cdef double s
    with nogil:
        for i in range(unary.shape[0]):
            for a in range(S):
                cost[a] = unary[i, a]
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                j = nbr_site[p]
                e = nbr_edge[p]
                xj = x[j]
                s = tscale[e]
                if edges[e, 0] == i:
                    for a in range(S):
                        cost[a] += s * tables[tindex[e], a, xj]
                else:
                    for a in range(S):
                        cost[a] += s * tables[tindex[e], xj, a]
            best = 0
            for a in range(1, S):
                if cost[a] < cost[best]:
                    best = a
            if cost[best] < cost[x[i]]:
                x[i] = best
                changes += 1
    return changes


cdef void _beliefs(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
                   const i4[::1] nbr_edge, const i4[:, ::1] edges, const f8[:, ::1] msgs,
                   f8[:, ::1] belief) noexcept nogil:
    cdef Py_ssize_t i, p, a
    cdef int e, d, S = unary.shape[1]
    for i in range(unary.shape[0]):
        for a in range(S):
            belief[i, a] = unary[i, a]
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            e = nbr_edge[p]
            # message arriving at i along e
            d = 2 * e if edges[e, 1] == i else 2 * e + 1
            for a in range(S):
                belief[i, a] += msgs[d, a]


def beliefs(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
            const i4[::1] nbr_edge, const i4[:, ::1] edges, const f8[:, ::1] msgs,
            f8[:, ::1] belief):
    with nogil:
        _beliefs(unary, nbr_ptr, nbr_site, nbr_edge, edges, msgs, belief)


def loopy_sweep(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
                const i4[::1] nbr_edge, const i4[:, ::1] edges,
                const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
                bint potts, f8[:, ::1] msgs, f8[:, ::1] belief, f8[:, ::1] tmp,
                bint normalize):
    """Synchronous min-sum update of every directed message, in place.

    Message ``2e`` runs ``edges[e, 0] -> edges[e, 1]`` and ``2e + 1`` the
    reverse. Beliefs are frozen from the old table before any write, and
    the two messages of an edge are written together, so one table suffices.
    Returns the largest absolute change of any message entry.
    """
    cdef Py_ssize_t e, a, b
    cdef int i, j, t, S = unary.shape[1]
    cdef double s, v, lo, diff, maxdiff = 0.0, mi, mj
    with nogil:
        _beliefs(unary, nbr_ptr, nbr_site, nbr_edge, edges, msgs, belief)
        for e in range(edges.shape[0]):
            i = edges[e, 0]
            j = edges[e, 1]
            s = tscale[e]
            t = tindex[e]
            if potts:
                mi = belief[i, 0] - msgs[2 * e + 1, 0]
                mj = belief[j, 0] - msgs[2 * e, 0]
                for a in range(1, S):
                    v = belief[i, a] - msgs[2 * e + 1, a]
                    if v < mi:
                        mi = v
                    v = belief[j, a] - msgs[2 * e, a]
                    if v < mj:
                        mj = v
                mi = mi + s
                mj = mj + s
                for b in range(S):
                    v = (belief[i, b] - msgs[2 * e + 1, b]) + s * 0.0
                    tmp[0, b] = v if v < mi else mi
                    v = (belief[j, b] - msgs[2 * e, b]) + s * 0.0
                    tmp[1, b] = v if v < mj else mj
            else:
                # i -> j
                for b in range(S):
                    lo = (belief[i, 0] - msgs[2 * e + 1, 0]) + s * tables[t, 0, b]
                    for a in range(1, S):
                        v = (belief[i, a] - msgs[2 * e + 1, a]) + s * tables[t, a, b]
                        if v < lo:
                            lo = v
                    tmp[0, b] = lo
                # j -> i
                for a in range(S):
                    lo = (belief[j, 0] - msgs[2 * e, 0]) + s * tables[t, a, 0]
                    for b in range(1, S):
                        v = (belief[j, b] - msgs[2 * e, b]) + s * tables[t, a, b]
                        if v < lo:
                            lo = v
                    tmp[1, a] = lo
            if normalize:
                mi = tmp[0, 0]
                mj = tmp[1, 0]
                for a in range(1, S):
                    if tmp[0, a] < mi:
                        mi = tmp[0, a]
                    if tmp[1, a] < mj:
                        mj = tmp[1, a]
                for a in range(S):
                    tmp[0, a] -= mi
                    tmp[1, a] -= mj
            for a in range(S):
                diff = fabs(tmp[0, a] - msgs[2 * e, a])
                if diff > maxdiff:
                    maxdiff = diff
                diff = fabs(tmp[1, a] - msgs[2 * e + 1, a])
                if diff > maxdiff:
                    maxdiff = diff
                msgs[2 * e, a] = tmp[0, a]
                msgs[2 * e + 1, a] = tmp[1, a]
    return maxdiff


def brute_force(const f8[:, ::1] unary, const i4[::1] nbr_ptr, const i4[::1] nbr_site,
                const i4[::1] nbr_edge, const i4[:, ::1] edges,
                const f8[:, :, ::1] tables, const i4[::1] tindex, const f8[::1] tscale,
                double tol):
    """Enumerate every labeling in lexicographic order.

    Site ``k`` contributes its singleton energy plus its edges to lower
    numbered neighbours. Returns ``(best, candidates)`` where candidates are
    all labelings within ``tol`` of the best, in enumeration order.
    """
    cdef int N = unary.shape[0], S = unary.shape[1]
    cdef Py_ssize_t k, p, start = 0
    cdef int j, e
    cdef double c, E, best = float("inf")
    cdef cnp.ndarray[i4, ndim=1] xa = np.zeros(N, dtype=np.int32)
    cdef i4[::1] x = xa
    cdef f8[::1] partial = np.zeros(N + 1)
    candidates = []
    while True:
        with nogil:
            for k in range(start, N):
                c = partial[k] + unary[k, x[k]]
                for p in range(nbr_ptr[k], nbr_ptr[k + 1]):
                    j = nbr_site[p]
                    if j >= k:
                        break
                    e = nbr_edge[p]
                    c = c + _pw(tables, tindex, tscale, e, x[j], x[k])
                partial[k + 1] = c
            E = partial[N]
        if E < best - tol:
            best = E
            candidates = [xa.copy()]
        elif E <= best + tol:
            candidates.append(xa.copy())
            if E < best:
                best = E
        k = N - 1
        while k >= 0 and x[k] == S - 1:
            x[k] = 0
            k -= 1
        if k < 0:
            break
        x[k] += 1
        start = k
    return best, candidates
