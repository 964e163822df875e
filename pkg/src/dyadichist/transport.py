"""Exact discrete-discrete optimal transport via the transportation simplex.

Self-contained network simplex specialized to the bipartite transportation
polytope: north-west-corner start, block pricing with a Dantzig rule inside
the block, and a Bland first-index fallback that kicks in after a long run of
degenerate pivots.  All tie-breaks are first-index, so results are
deterministic across platforms.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, NumericalError

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


ATOM_CAP = 5000


@njit(cache=True, nogil=True)
def _solve(C, a, b, tol):  # pragma: no cover - exercised through transport_cost
    m = C.shape[0]
    k = C.shape[1]
    N = m + k
    nb = N - 1
    arc_i = np.empty(nb, np.int64)
    arc_j = np.empty(nb, np.int64)
    flow = np.empty(nb, np.float64)

    # North-west corner start: walk from (0,0) to (m-1,k-1), one step per arc.
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for t in range(nb):
        arc_i[t] = i
        arc_j[t] = j
        f = ra[i] if ra[i] < rb[j] else rb[j]
        flow[t] = f
        ra[i] -= f
        rb[j] -= f
        if i == m - 1:
            j += 1
        elif j == k - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1

    u = np.zeros(m)
    w = np.zeros(k)
    parent = np.empty(N, np.int64)
    parent_arc = np.empty(N, np.int64)
    depth = np.empty(N, np.int64)
    head = np.empty(N, np.int64)
    nxt = np.empty(2 * nb, np.int64)
    to = np.empty(2 * nb, np.int64)
    aidx = np.empty(2 * nb, np.int64)
    stack = np.empty(N, np.int64)
    path_x = np.empty(N, np.int64)
    path_y = np.empty(N, np.int64)

    total_cells = m * k
    block = 4 * N
    if block > total_cells:
        block = total_cells
    ptr = 0
    degen_run = 0
    bland = False
    max_pivots = 1000 * N + 10 * total_cells
    pivots = 0

    while True:
        pivots += 1
        if pivots > max_pivots:
            return np.nan

        # Rebuild basis adjacency and recompute duals by DFS from node 0.
        for x in range(N):
            head[x] = -1
        e = 0
        for t in range(nb):
            s = arc_i[t]
            g = m + arc_j[t]
            to[e] = g
            aidx[e] = t
            nxt[e] = head[s]
            head[s] = e
            e += 1
            to[e] = s
            aidx[e] = t
            nxt[e] = head[g]
            head[g] = e
            e += 1
        parent[0] = -1
        parent_arc[0] = -1
        depth[0] = 0
        u[0] = 0.0
        top = 0
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            x = stack[top]
            e2 = head[x]
            while e2 != -1:
                y = to[e2]
                if y != parent[x]:
                    t = aidx[e2]
                    parent[y] = x
                    parent_arc[y] = t
                    depth[y] = depth[x] + 1
                    if y >= m:
                        w[y - m] = C[arc_i[t], arc_j[t]] - u[arc_i[t]]
                    else:
                        u[y] = C[arc_i[t], arc_j[t]] - w[arc_j[t]]
                    stack[top] = y
                    top += 1
                e2 = nxt[e2]

        # Entering arc.
        best = -tol
        ei = -1
        ej = -1
        if bland:
            for idx in range(total_cells):
                ii = idx // k
                jj = idx - ii * k
                r = C[ii, jj] - u[ii] - w[jj]
                if r < -tol:
                    ei = ii
                    ej = jj
                    break
        else:
            scanned = 0
            p0 = ptr
            while scanned < total_cells:
                end = p0 + block
                if end > total_cells:
                    end = total_cells
                for idx in range(p0, end):
                    ii = idx // k
                    jj = idx - ii * k
                    r = C[ii, jj] - u[ii] - w[jj]
                    if r < best:
                        best = r
                        ei = ii
                        ej = jj
                scanned += end - p0
                if ei >= 0:
                    ptr = end % total_cells
                    break
                p0 = 0 if end >= total_cells else end
        if ei < 0:
            cost = 0.0
            for t in range(nb):
                cost += flow[t] * C[arc_i[t], arc_j[t]]
            return cost

        # Cycle: tree path between source node ei and sink node m + ej.
        x = ei
        y = m + ej
        lx = 0
        ly = 0
        while depth[x] > depth[y]:
            path_x[lx] = parent_arc[x]
            lx += 1
            x = parent[x]
        while depth[y] > depth[x]:
            path_y[ly] = parent_arc[y]
            ly += 1
            y = parent[y]
        while x != y:
            path_x[lx] = parent_arc[x]
            lx += 1
            x = parent[x]
            path_y[ly] = parent_arc[y]
            ly += 1
            y = parent[y]

        # Walk the cycle starting at the entering arc (+); signs alternate.
        theta = np.inf
        leave = -1
        s = -1
        for q in range(ly):
            t = path_y[q]
            if s < 0 and (flow[t] < theta or (flow[t] == theta and t < leave)):
                theta = flow[t]
                leave = t
            s = -s
        for q in range(lx - 1, -1, -1):
            t = path_x[q]
            if s < 0 and (flow[t] < theta or (flow[t] == theta and t < leave)):
                theta = flow[t]
                leave = t
            s = -s

        # Apply the flow change around the cycle.
        s = -1
        for q in range(ly):
            t = path_y[q]
            flow[t] += s * theta
            if flow[t] < 0.0:
                flow[t] = 0.0
            s = -s
        for q in range(lx - 1, -1, -1):
            t = path_x[q]
            flow[t] += s * theta
            if flow[t] < 0.0:
                flow[t] = 0.0
            s = -s
        arc_i[leave] = ei
        arc_j[leave] = ej
        flow[leave] = theta

        if theta == 0.0:
            degen_run += 1
            if degen_run > 4 * N:
                bland = True
        else:
            degen_run = 0
            bland = False


def transport_cost(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Minimum total cost of transporting supplies a to demands b.

    Zero-weight rows/columns are dropped; demands are rescaled to match the
    supply total exactly (guards against 1e-16 normalization drift).
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if cost.shape != (a.size, b.size):
        raise ValueError("cost matrix shape does not match the weight vectors")
    keep_a = a > 0
    keep_b = b > 0
    if not keep_a.any() or not keep_b.any():
        raise ValueError("each measure needs positive total mass")
    a = a[keep_a]
    b = b[keep_b]
    cost = np.ascontiguousarray(cost[np.ix_(keep_a, keep_b)])
    b = b * (a.sum() / b.sum())
    if a.size == 1:
        return float(np.dot(b, cost[0]))
    if b.size == 1:
        return float(np.dot(a, cost[:, 0]))
    tol = 1e-12 * (1.0 + float(np.abs(cost).max()))
    result = _solve(cost, a, b, tol)
    if np.isnan(result):
        raise NumericalError("transportation simplex exceeded its pivot budget")
    return float(result)


def pairwise_ground_cost(x: np.ndarray, y: np.ndarray, v: float, p: float) -> np.ndarray:
    """Cost matrix ||x_i - y_j||_p^v for atom arrays of shape (n, d), (m, d)."""
    diff = np.abs(x[:, None, :] - y[None, :, :])
    if p == 1:
        dist = diff.sum(axis=2)
    elif p == 2:
        dist = np.sqrt((diff * diff).sum(axis=2))
    else:
        dist = (diff**p).sum(axis=2) ** (1.0 / p)
    return dist**v


def check_atom_cap(n_mu: int, n_nu: int) -> None:
    if n_mu > ATOM_CAP or n_nu > ATOM_CAP:
        raise CapacityError(
            f"atom counts ({n_mu}, {n_nu}) exceed the {ATOM_CAP}-atom solver cap; "
            "coarsen the measures first"
        )
