"""Pure-Python versions of the factorization kernels.

Used when the compiled extension is unavailable (or ``SSNPMM_PURE_PYTHON=1``).
The algorithms and tie-breaking rules match ``_kernels.pyx`` exactly, so both
backends produce the same ordering and bit-identical factors.
"""
import heapq

import numpy as np


def amd_order(n, indptr, indices):
    """Approximate minimum degree ordering of a symmetric sparsity pattern.

    Parameters
    ----------
    n : int
        Matrix dimension.
    indptr, indices : array_like of int
        Compressed pattern holding both triangles; the diagonal is ignored.

    Returns
    -------
    ndarray of int64
        ``perm[k]`` is the original index eliminated at step ``k``.
    """
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    adj = []
    for i in range(n):
        seen = set()
        row = []
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j != i and j not in seen:
                seen.add(j)
                row.append(j)
        adj.append(row)
    elem = [[] for _ in range(n)]
    lst = [[] for _ in range(n)]
    # 0: variable, 1: live element, 2: absorbed element
    status = [0] * n
    deg = [len(adj[i]) for i in range(n)]
    inlp = [-1] * n
    wtag = [-1] * n
    w = [0] * n
    heap = [(deg[i], i) for i in range(n)]
    heapq.heapify(heap)
    order = []
    for k in range(n):
        while True:
            d, p = heapq.heappop(heap)
            if status[p] == 0 and d == deg[p]:
                break
        order.append(p)
        status[p] = 1
        tag = k
        lp = []
        for v in adj[p]:
            if status[v] == 0 and inlp[v] != tag:
                inlp[v] = tag
                lp.append(v)
        for e in elem[p]:
            if status[e] == 1:
                for v in lst[e]:
                    if v != p and status[v] == 0 and inlp[v] != tag:
                        inlp[v] = tag
                        lp.append(v)
                status[e] = 2
                lst[e] = []
        lst[p] = lp
        adj[p] = []
        elem[p] = []
        for i in lp:
            for e in elem[i]:
                if status[e] == 1:
                    if wtag[e] != tag:
                        wtag[e] = tag
                        w[e] = len(lst[e])
                    w[e] -= 1
        nlp = len(lp)
        for i in lp:
            new_elem = [p]
            dext = nlp - 1
            for e in elem[i]:
                if status[e] == 1:
                    if w[e] == 0:
                        status[e] = 2
                        lst[e] = []
                    else:
                        new_elem.append(e)
                        dext += w[e]
            elem[i] = new_elem
            new_adj = [v for v in adj[i] if status[v] == 0 and inlp[v] != tag]
            adj[i] = new_adj
            dext += len(new_adj)
            dnew = min(n - k - 1, deg[i] + nlp - 1, dext)
            deg[i] = dnew
            heapq.heappush(heap, (dnew, i))
    return np.asarray(order, dtype=np.int64)


def etree(n, Ap, Ai):
    """Elimination tree and per-column nonzero counts of L.

    ``Ap, Ai`` hold the upper triangle (row <= col) in CSC form.
    Returns ``(parent, lnz)``; raises ValueError on a lower-triangular entry.
    """
    Ap = [int(v) for v in Ap]
    Ai = [int(v) for v in Ai]
    work = [-1] * n
    lnz = [0] * n
    parent = [-1] * n
    for j in range(n):
        work[j] = j
        for p in range(Ap[j], Ap[j + 1]):
            i = Ai[p]
            if i > j:
                raise ValueError("pattern is not upper triangular")
            while work[i] != j:
                if parent[i] == -1:
                    parent[i] = j
                lnz[i] += 1
                work[i] = j
                i = parent[i]
    return np.asarray(parent, dtype=np.int64), np.asarray(lnz, dtype=np.int64)


def ldl_numeric(n, Ap, Ai, Ax, parent, lnz, require_positive):
    """Up-looking LDL^T of an upper-triangular CSC matrix.

    Returns ``(Lp, Li, Lx, D, info)`` where ``info == -1`` on success and
    otherwise the column whose pivot was zero (or nonpositive when
    ``require_positive``) or non-finite.
    """
    Ap = [int(v) for v in Ap]
    Ai = [int(v) for v in Ai]
    Ax = [float(v) for v in Ax]
    parent = [int(v) for v in parent]
    Lp = [0] * (n + 1)
    for i in range(n):
        Lp[i + 1] = Lp[i] + int(lnz[i])
    nnz = Lp[n]
    Li = [0] * nnz
    Lx = [0.0] * nnz
    D = [0.0] * n
    Dinv = [0.0] * n
    ymark = [False] * n
    yvals = [0.0] * n
    yidx = [0] * n
    ebuf = [0] * n
    nextcol = Lp[:n]
    info = -1
    for k in range(n):
        nnzy = 0
        dk = 0.0
        for p in range(Ap[k], Ap[k + 1]):
            b = Ai[p]
            if b == k:
                dk = Ax[p]
                continue
            yvals[b] = Ax[p]
            if not ymark[b]:
                ymark[b] = True
                ebuf[0] = b
                ne = 1
                nxt = parent[b]
                while nxt != -1 and nxt < k:
                    if ymark[nxt]:
                        break
                    ymark[nxt] = True
                    ebuf[ne] = nxt
                    ne += 1
                    nxt = parent[nxt]
                while ne:
                    ne -= 1
                    yidx[nnzy] = ebuf[ne]
                    nnzy += 1
        for t in range(nnzy - 1, -1, -1):
            c = yidx[t]
            top = nextcol[c]
            yc = yvals[c]
            for q in range(Lp[c], top):
                yvals[Li[q]] -= Lx[q] * yc
            Li[top] = k
            lval = yc * Dinv[c]
            Lx[top] = lval
            dk -= yc * lval
            nextcol[c] = top + 1
            yvals[c] = 0.0
            ymark[c] = False
        D[k] = dk
        if dk != dk or dk in (float("inf"), float("-inf")) or dk == 0.0 or (
            require_positive and dk < 0.0
        ):
            info = k
            break
        Dinv[k] = 1.0 / dk
    return (
        np.asarray(Lp, dtype=np.int64),
        np.asarray(Li, dtype=np.int64),
        np.asarray(Lx, dtype=np.float64),
        np.asarray(D, dtype=np.float64),
        info,
    )


def ldl_solve(n, Lp, Li, Lx, D, b):
    """Solve ``L D L^T x = b`` in place on a copy of ``b``; returns ``x``."""
    Lp = [int(v) for v in Lp]
    Li = [int(v) for v in Li]
    Lx = [float(v) for v in Lx]
    D = [float(v) for v in D]
    x = [float(v) for v in b]
    for i in range(n):
        xi = x[i]
        for q in range(Lp[i], Lp[i + 1]):
            x[Li[q]] -= Lx[q] * xi
    for i in range(n):
        x[i] /= D[i]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for q in range(Lp[i], Lp[i + 1]):
            s -= Lx[q] * x[Li[q]]
        x[i] = s
    return np.asarray(x, dtype=np.float64)
