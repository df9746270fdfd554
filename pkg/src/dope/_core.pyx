"""Compiled kernels: augmenting-path max-flow and greedy flip sweep.

Same algorithm, arc ordering and tie-breaking as the pure-Python fallback
(_core_py), so both backends produce identical labelings and flows.  The
hot loops run without the GIL, which lets block solves proceed in parallel
on a thread pool.
"""

import numpy as np

BACKEND = "compiled"

cdef double EPS = 1e-12

cdef enum:
    TREE_FREE = 0
    TREE_SRC = 1
    TREE_SINK = 2

cdef enum:
    P_NONE = -1
    P_TERMINAL = -2
    P_ORPHAN = -3

cdef long long INF_D = 2 ** 62


cdef double _bk_core(double* tcap, int* head, double* rcap, long long* off,
                     int* adj, signed char* tree, long long* parent,
                     long long* ts, long long* dist, unsigned char* active,
                     int* queue, int* orphans, unsigned char* labels,
                     int m) noexcept nogil:
    cdef int qcap = m + 1
    cdef int qhead = 0, qtail = 0, ohead = 0, otail = 0
    cdef long long tick = 0
    cdef int cur = -1, i = 0, j = 0, jj = 0, o = 0, a = 0, mid = -1, best = -1
    cdef long long ai = 0, pa = 0, d = 0, dd = 0, min_d = 0
    cdef double b = 0.0, r = 0.0, ra = 0.0, flow = 0.0
    cdef signed char t = 0

    # initial trees: every terminal-connected node is a root and active
    for i in range(m):
        if tcap[i] > EPS:
            tree[i] = TREE_SRC
            parent[i] = P_TERMINAL
            dist[i] = 1
            if not active[i]:
                active[i] = 1
                queue[qtail] = i
                qtail = (qtail + 1) % qcap
        elif tcap[i] < -EPS:
            tree[i] = TREE_SINK
            parent[i] = P_TERMINAL
            dist[i] = 1
            if not active[i]:
                active[i] = 1
                queue[qtail] = i
                qtail = (qtail + 1) % qcap

    while True:
        if cur >= 0 and parent[cur] == P_NONE:
            cur = -1
        if cur < 0:
            while qhead != qtail:
                i = queue[qhead]
                qhead = (qhead + 1) % qcap
                active[i] = 0
                if parent[i] != P_NONE:
                    cur = i
                    break
            if cur < 0:
                break
        i = cur
        mid = -1

        # grow the tree of i; stop at the first contact with the other tree
        if tree[i] == TREE_SRC:
            ai = off[i]
            while ai < off[i + 1]:
                a = adj[ai]
                if rcap[a] > EPS:
                    j = head[a]
                    if parent[j] == P_NONE:
                        tree[j] = TREE_SRC
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        if not active[j]:
                            active[j] = 1
                            queue[qtail] = j
                            qtail = (qtail + 1) % qcap
                    elif tree[j] == TREE_SINK:
                        mid = a
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                ai += 1
        else:
            ai = off[i]
            while ai < off[i + 1]:
                a = adj[ai]
                if rcap[a ^ 1] > EPS:
                    j = head[a]
                    if parent[j] == P_NONE:
                        tree[j] = TREE_SINK
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        if not active[j]:
                            active[j] = 1
                            queue[qtail] = j
                            qtail = (qtail + 1) % qcap
                    elif tree[j] == TREE_SRC:
                        mid = a ^ 1
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                ai += 1

        tick += 1
        if mid < 0:
            cur = -1
            continue

        # ---- augment along the path through mid ----
        b = rcap[mid]
        i = head[mid ^ 1]
        while parent[i] != P_TERMINAL:
            pa = parent[i]
            r = rcap[pa ^ 1]
            if r < b:
                b = r
            i = head[pa]
        if tcap[i] < b:
            b = tcap[i]
        i = head[mid]
        while parent[i] != P_TERMINAL:
            pa = parent[i]
            if rcap[pa] < b:
                b = rcap[pa]
            i = head[pa]
        if -tcap[i] < b:
            b = -tcap[i]

        rcap[mid] -= b
        rcap[mid ^ 1] += b
        i = head[mid ^ 1]
        while parent[i] != P_TERMINAL:
            pa = parent[i]
            rcap[pa] += b
            rcap[pa ^ 1] -= b
            if rcap[pa ^ 1] <= EPS:
                parent[i] = P_ORPHAN
                orphans[otail] = i
                otail = (otail + 1) % qcap
            i = head[pa]
        tcap[i] -= b
        if tcap[i] <= EPS:
            parent[i] = P_ORPHAN
            orphans[otail] = i
            otail = (otail + 1) % qcap
        i = head[mid]
        while parent[i] != P_TERMINAL:
            pa = parent[i]
            rcap[pa] -= b
            rcap[pa ^ 1] += b
            if rcap[pa] <= EPS:
                parent[i] = P_ORPHAN
                orphans[otail] = i
                otail = (otail + 1) % qcap
            i = head[pa]
        tcap[i] += b
        if tcap[i] >= -EPS:
            parent[i] = P_ORPHAN
            orphans[otail] = i
            otail = (otail + 1) % qcap
        flow += b

        # ---- adopt orphans ----
        while ohead != otail:
            o = orphans[ohead]
            ohead = (ohead + 1) % qcap
            t = tree[o]
            min_d = INF_D
            best = -1
            ai = off[o]
            while ai < off[o + 1]:
                a = adj[ai]
                if t == TREE_SRC:
                    ra = rcap[a ^ 1]
                else:
                    ra = rcap[a]
                if ra > EPS:
                    j = head[a]
                    if tree[j] == t and parent[j] != P_NONE:
                        d = 0
                        jj = j
                        while True:
                            if ts[jj] == tick:
                                d += dist[jj]
                                break
                            pa = parent[jj]
                            d += 1
                            if pa == P_TERMINAL:
                                ts[jj] = tick
                                dist[jj] = 1
                                break
                            if pa == P_ORPHAN or pa == P_NONE:
                                d = INF_D
                                break
                            jj = head[pa]
                        if d < INF_D:
                            if d < min_d:
                                min_d = d
                                best = a
                            jj = j
                            dd = d
                            while ts[jj] != tick:
                                ts[jj] = tick
                                dist[jj] = dd
                                dd -= 1
                                jj = head[parent[jj]]
                ai += 1
            if best >= 0:
                parent[o] = best
                ts[o] = tick
                dist[o] = min_d + 1
            else:
                ai = off[o]
                while ai < off[o + 1]:
                    a = adj[ai]
                    j = head[a]
                    if tree[j] == t and parent[j] != P_NONE:
                        if t == TREE_SRC:
                            ra = rcap[a ^ 1]
                        else:
                            ra = rcap[a]
                        if ra > EPS:
                            if not active[j]:
                                active[j] = 1
                                queue[qtail] = j
                                qtail = (qtail + 1) % qcap
                        pa = parent[j]
                        if pa >= 0 and head[pa] == o:
                            parent[j] = P_ORPHAN
                            orphans[otail] = j
                            otail = (otail + 1) % qcap
                    ai += 1
                tree[o] = TREE_FREE
                parent[o] = P_NONE
        # cur unchanged: keep growing from the same node

    for i in range(m):
        if tree[i] == TREE_SINK:
            labels[i] = 1
    return flow


def bk_maxflow(tcap, pair_i, pair_j, cap_ij, cap_ji):
    """Min-cut of a two-terminal flow network given as pair arcs.

    See dope._core_py.bk_maxflow for the full contract; this is the
    compiled twin.
    """
    cdef double[::1] tc = np.array(tcap, dtype=np.float64)
    cdef int[::1] pi = np.ascontiguousarray(pair_i, dtype=np.int32)
    cdef int[::1] pj = np.ascontiguousarray(pair_j, dtype=np.int32)
    cdef double[::1] cij = np.ascontiguousarray(cap_ij, dtype=np.float64)
    cdef double[::1] cji = np.ascontiguousarray(cap_ji, dtype=np.float64)
    cdef int m = tc.shape[0]
    cdef long long npairs = pi.shape[0]
    cdef long long narcs = 2 * npairs

    labels_arr = np.zeros(m, dtype=np.uint8)
    if m == 0:
        return labels_arr, 0.0

    head_arr = np.empty(max(narcs, 1), dtype=np.int32)
    rcap_arr = np.empty(max(narcs, 1), dtype=np.float64)
    off_arr = np.zeros(m + 1, dtype=np.int64)
    adj_arr = np.empty(max(narcs, 1), dtype=np.int32)
    cdef int[::1] head = head_arr
    cdef double[::1] rcap = rcap_arr
    cdef long long[::1] off = off_arr
    cdef int[::1] adj = adj_arr

    cdef long long p
    cdef int i
    for p in range(npairs):
        head[2 * p] = pj[p]
        head[2 * p + 1] = pi[p]
        rcap[2 * p] = cij[p]
        rcap[2 * p + 1] = cji[p]
    # arcs grouped by tail node, in pair order
    for p in range(npairs):
        off[pi[p] + 1] += 1
        off[pj[p] + 1] += 1
    for i in range(m):
        off[i + 1] += off[i]
    fill_arr = off_arr[:-1].copy()
    cdef long long[::1] fill = fill_arr
    for p in range(npairs):
        adj[fill[pi[p]]] = <int> (2 * p)
        fill[pi[p]] += 1
        adj[fill[pj[p]]] = <int> (2 * p + 1)
        fill[pj[p]] += 1

    tree_arr = np.zeros(m, dtype=np.int8)
    parent_arr = np.full(m, P_NONE, dtype=np.int64)
    ts_arr = np.zeros(m, dtype=np.int64)
    dist_arr = np.zeros(m, dtype=np.int64)
    active_arr = np.zeros(m, dtype=np.uint8)
    queue_arr = np.zeros(m + 1, dtype=np.int32)
    orphan_arr = np.zeros(m + 1, dtype=np.int32)
    cdef signed char[::1] tree = tree_arr
    cdef long long[::1] parent = parent_arr
    cdef long long[::1] ts = ts_arr
    cdef long long[::1] dist = dist_arr
    cdef unsigned char[::1] active = active_arr
    cdef int[::1] queue = queue_arr
    cdef int[::1] orphans = orphan_arr
    cdef unsigned char[::1] labels = labels_arr

    cdef double flow
    with nogil:
        flow = _bk_core(&tc[0], &head[0], &rcap[0], &off[0], &adj[0],
                        &tree[0], &parent[0], &ts[0], &dist[0], &active[0],
                        &queue[0], &orphans[0], &labels[0], m)
    return labels_arr, float(flow)


cdef int _icm_core(unsigned char* labels, double* linear, int* indptr,
                   int* indices, double* wdata, double lam, int m) noexcept nogil:
    cdef int flips = 0
    cdef int i, idx, b
    cdef double s, delta
    for i in range(m):
        b = labels[i]
        s = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            if labels[indices[idx]] == b:
                s += wdata[idx]
            else:
                s -= wdata[idx]
        delta = linear[i] * (1 - 2 * b) + lam * s
        if delta < 0.0:
            labels[i] = 1 - b
            flips += 1
    return flips


def icm_sweep(labels, linear, indptr, indices, wdata, double lam):
    """One ascending-index pass of greedy single-variable flips, in place."""
    cdef unsigned char[::1] lab = labels
    cdef double[::1] lin = np.ascontiguousarray(linear, dtype=np.float64)
    cdef int[::1] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef int[::1] ind = np.ascontiguousarray(indices, dtype=np.int32)
    cdef double[::1] wd = np.ascontiguousarray(wdata, dtype=np.float64)
    cdef int m = lin.shape[0]
    if m == 0:
        return 0
    cdef int flips
    cdef int* indp = NULL
    cdef double* wdp = NULL
    if ind.shape[0] > 0:
        indp = &ind[0]
        wdp = &wd[0]
    with nogil:
        flips = _icm_core(&lab[0], &lin[0], &ip[0], indp, wdp, lam, m)
    return flips
