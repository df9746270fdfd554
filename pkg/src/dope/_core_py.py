"""Pure-Python fallback kernels: augmenting-path max-flow and greedy flip sweep.

The max-flow solver follows the tree-growing augmenting-path scheme with two
search trees (source and sink), orphan adoption after each augmentation, and
timestamp/distance caching for the adoption origin checks.  The compiled
backend implements exactly the same algorithm with the same deterministic
arc ordering, so both produce identical labelings and flows.

Residuals at or below EPS are treated as saturated to avoid float cycling.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

EPS = 1e-12

_FREE, _SRC, _SINK = 0, 1, 2
_NONE, _TERMINAL, _ORPHAN = -1, -2, -3
_INF = 2**62


def bk_maxflow(tcap, pair_i, pair_j, cap_ij, cap_ji):
    """Min-cut of a two-terminal flow network given as pair arcs.

    tcap is the signed terminal capacity per node (positive: from source,
    negative: to sink).  Each pair p contributes a forward arc i->j of
    capacity cap_ij[p] and a backward arc j->i of capacity cap_ji[p].

    Returns (labels, flow): labels[i] = 1 when node i ends on the sink
    side (nodes disconnected from both terminals get 0), flow is the
    total augmented flow.
    """
    tcap = [float(t) for t in np.asarray(tcap, dtype=np.float64)]
    m = len(tcap)
    pair_i = np.asarray(pair_i, dtype=np.int32)
    pair_j = np.asarray(pair_j, dtype=np.int32)
    npairs = pair_i.size
    narcs = 2 * npairs

    head = [0] * narcs
    rcap = [0.0] * narcs
    cap_ij = np.asarray(cap_ij, dtype=np.float64)
    cap_ji = np.asarray(cap_ji, dtype=np.float64)
    for p in range(npairs):
        head[2 * p] = int(pair_j[p])
        head[2 * p + 1] = int(pair_i[p])
        rcap[2 * p] = float(cap_ij[p])
        rcap[2 * p + 1] = float(cap_ji[p])

    # adjacency: arcs grouped by tail node, in pair order
    deg = [0] * (m + 1)
    for p in range(npairs):
        deg[pair_i[p] + 1] += 1
        deg[pair_j[p] + 1] += 1
    off = [0] * (m + 1)
    for i in range(m):
        off[i + 1] = off[i] + deg[i + 1]
    fill = off.copy()
    adj = [0] * narcs
    for p in range(npairs):
        i, j = int(pair_i[p]), int(pair_j[p])
        adj[fill[i]] = 2 * p
        fill[i] += 1
        adj[fill[j]] = 2 * p + 1
        fill[j] += 1

    tree = [_FREE] * m
    parent = [_NONE] * m
    ts = [0] * m
    dist = [0] * m

    active = [False] * m
    queue = [0] * (m + 1)
    qhead = qtail = 0
    orphans = [0] * (m + 1)
    ohead = otail = 0

    def set_active(i):
        nonlocal qtail
        if not active[i]:
            active[i] = True
            queue[qtail] = i
            qtail = (qtail + 1) % (m + 1)

    def pop_active():
        nonlocal qhead
        while qhead != qtail:
            i = queue[qhead]
            qhead = (qhead + 1) % (m + 1)
            active[i] = False
            if parent[i] != _NONE:
                return i
        return -1

    def orphan_push(i):
        nonlocal otail
        parent[i] = _ORPHAN
        orphans[otail] = i
        otail = (otail + 1) % (m + 1)

    for i in range(m):
        if tcap[i] > EPS:
            tree[i] = _SRC
            parent[i] = _TERMINAL
            dist[i] = 1
            set_active(i)
        elif tcap[i] < -EPS:
            tree[i] = _SINK
            parent[i] = _TERMINAL
            dist[i] = 1
            set_active(i)

    flow = 0.0
    time = 0
    cur = -1

    def augment(mid):
        nonlocal flow, ohead, otail
        # bottleneck: source-side path, middle arc, sink-side path
        b = rcap[mid]
        i = head[mid ^ 1]
        while parent[i] != _TERMINAL:
            pa = parent[i]
            r = rcap[pa ^ 1]
            if r < b:
                b = r
            i = head[pa]
        if tcap[i] < b:
            b = tcap[i]
        i = head[mid]
        while parent[i] != _TERMINAL:
            pa = parent[i]
            if rcap[pa] < b:
                b = rcap[pa]
            i = head[pa]
        if -tcap[i] < b:
            b = -tcap[i]
        # push and orphan saturated tree arcs
        rcap[mid] -= b
        rcap[mid ^ 1] += b
        i = head[mid ^ 1]
        while parent[i] != _TERMINAL:
            pa = parent[i]
            rcap[pa] += b
            rcap[pa ^ 1] -= b
            if rcap[pa ^ 1] <= EPS:
                orphan_push(i)
            i = head[pa]
        tcap[i] -= b
        if tcap[i] <= EPS:
            orphan_push(i)
        i = head[mid]
        while parent[i] != _TERMINAL:
            pa = parent[i]
            rcap[pa] -= b
            rcap[pa ^ 1] += b
            if rcap[pa] <= EPS:
                orphan_push(i)
            i = head[pa]
        tcap[i] += b
        if tcap[i] >= -EPS:
            orphan_push(i)
        flow += b

    def adopt_all():
        nonlocal ohead
        while ohead != otail:
            o = orphans[ohead]
            ohead = (ohead + 1) % (m + 1)
            t = tree[o]
            min_d = _INF
            best = -1
            for ai in range(off[o], off[o + 1]):
                a = adj[ai]
                ra = rcap[a ^ 1] if t == _SRC else rcap[a]
                if ra <= EPS:
                    continue
                j = head[a]
                if tree[j] != t or parent[j] == _NONE:
                    continue
                # walk to the terminal, caching distances for this round
                d = 0
                jj = j
                while True:
                    if ts[jj] == time:
                        d += dist[jj]
                        break
                    pa = parent[jj]
                    d += 1
                    if pa == _TERMINAL:
                        ts[jj] = time
                        dist[jj] = 1
                        break
                    if pa == _ORPHAN or pa == _NONE:
                        d = _INF
                        break
                    jj = head[pa]
                if d < _INF:
                    if d < min_d:
                        min_d = d
                        best = a
                    jj = j
                    dd = d
                    while ts[jj] != time:
                        ts[jj] = time
                        dist[jj] = dd
                        dd -= 1
                        jj = head[parent[jj]]
            if best >= 0:
                parent[o] = best
                ts[o] = time
                dist[o] = min_d + 1
            else:
                # o leaves the tree: orphan its children, reactivate fringe
                for ai in range(off[o], off[o + 1]):
                    a = adj[ai]
                    j = head[a]
                    if tree[j] != t or parent[j] == _NONE:
                        continue
                    ra = rcap[a ^ 1] if t == _SRC else rcap[a]
                    if ra > EPS:
                        set_active(j)
                    pa = parent[j]
                    if pa >= 0 and head[pa] == o:
                        orphan_push(j)
                tree[o] = _FREE
                parent[o] = _NONE

    while True:
        if cur >= 0 and parent[cur] == _NONE:
            cur = -1
        if cur < 0:
            cur = pop_active()
            if cur < 0:
                break
        i = cur
        mid = -1
        if tree[i] == _SRC:
            for ai in range(off[i], off[i + 1]):
                a = adj[ai]
                if rcap[a] > EPS:
                    j = head[a]
                    if parent[j] == _NONE:
                        tree[j] = _SRC
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        set_active(j)
                    elif tree[j] == _SINK:
                        mid = a
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
        else:
            for ai in range(off[i], off[i + 1]):
                a = adj[ai]
                if rcap[a ^ 1] > EPS:
                    j = head[a]
                    if parent[j] == _NONE:
                        tree[j] = _SINK
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        set_active(j)
                    elif tree[j] == _SRC:
                        mid = a ^ 1
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
        time += 1
        if mid >= 0:
            augment(mid)
            adopt_all()
        else:
            cur = -1

    labels = np.zeros(m, dtype=np.uint8)
    for i in range(m):
        if tree[i] == _SINK:
            labels[i] = 1
    return labels, flow


def icm_sweep(labels, linear, indptr, indices, wdata, lam):
    """One ascending-index pass of greedy single-variable flips, in place.

    Flips label i whenever doing so strictly lowers
    linear . y + lam * sum w_ij (y_i - y_j)^2.  Returns the flip count.
    """
    m = len(linear)
    flips = 0
    for i in range(m):
        b = int(labels[i])
        s = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            w = wdata[idx]
            if labels[indices[idx]] == b:
                s += w
            else:
                s -= w
        delta = linear[i] * (1 - 2 * b) + lam * s
        if delta < 0.0:
            labels[i] = 1 - b
            flips += 1
    return flips
