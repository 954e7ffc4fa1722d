# distutils: language = c++
"""Compiled factorization kernels.

Same algorithms and tie-breaking as ``_kernels_py``: approximate minimum degree
ordering on a quotient graph, elimination tree, up-looking LDL^T, and the
triangular solves.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

cnp.import_array()

ctypedef cnp.int64_t idx_t


def amd_order(Py_ssize_t n, const idx_t[::1] indptr, const idx_t[::1] indices):
    cdef vector[vector[idx_t]] adj = vector[vector[idx_t]](n)
    cdef vector[vector[idx_t]] elem = vector[vector[idx_t]](n)
    cdef vector[vector[idx_t]] lst = vector[vector[idx_t]](n)
    cdef vector[idx_t] lp
    cdef vector[idx_t] tmp
    cdef idx_t[::1] status = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] deg = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] inlp = np.full(n, -1, dtype=np.int64)
    cdef idx_t[::1] wtag = np.full(n, -1, dtype=np.int64)
    cdef idx_t[::1] w = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] order = np.empty(n, dtype=np.int64)
    # max-heap on (-degree, -index) pops the smallest degree, then smallest index
    cdef priority_queue[pair[idx_t, idx_t]] heap
    cdef pair[idx_t, idx_t] top
    cdef Py_ssize_t i, j, k, p, q, v, e, t, nlp
    cdef idx_t d, dext, dnew, tag

    for i in range(n):
        inlp[i] = -1
    for i in range(n):
        for q in range(indptr[i], indptr[i + 1]):
            j = indices[q]
            if j != i and inlp[j] != i:
                inlp[j] = i
                adj[i].push_back(j)
        deg[i] = <idx_t>adj[i].size()
        heap.push(pair[idx_t, idx_t](-deg[i], -i))
    for i in range(n):
        inlp[i] = -1

    for k in range(n):
        while True:
            top = heap.top()
            heap.pop()
            d = -top.first
            p = -top.second
            if status[p] == 0 and d == deg[p]:
                break
        order[k] = p
        status[p] = 1
        tag = k
        lp.clear()
        for t in range(<Py_ssize_t>adj[p].size()):
            v = adj[p][t]
            if status[v] == 0 and inlp[v] != tag:
                inlp[v] = tag
                lp.push_back(v)
        for t in range(<Py_ssize_t>elem[p].size()):
            e = elem[p][t]
            if status[e] == 1:
                for q in range(<Py_ssize_t>lst[e].size()):
                    v = lst[e][q]
                    if v != p and status[v] == 0 and inlp[v] != tag:
                        inlp[v] = tag
                        lp.push_back(v)
                status[e] = 2
                vector[idx_t]().swap(lst[e])
        lst[p] = lp
        vector[idx_t]().swap(adj[p])
        vector[idx_t]().swap(elem[p])
        nlp = <Py_ssize_t>lp.size()
        for t in range(nlp):
            i = lp[t]
            for q in range(<Py_ssize_t>elem[i].size()):
                e = elem[i][q]
                if status[e] == 1:
                    if wtag[e] != tag:
                        wtag[e] = tag
                        w[e] = <idx_t>lst[e].size()
                    w[e] -= 1
        for t in range(nlp):
            i = lp[t]
            tmp.clear()
            tmp.push_back(p)
            dext = nlp - 1
            for q in range(<Py_ssize_t>elem[i].size()):
                e = elem[i][q]
                if status[e] == 1:
                    if w[e] == 0:
                        status[e] = 2
                        vector[idx_t]().swap(lst[e])
                    else:
                        tmp.push_back(e)
                        dext += w[e]
            elem[i].swap(tmp)
            tmp.clear()
            for q in range(<Py_ssize_t>adj[i].size()):
                v = adj[i][q]
                if status[v] == 0 and inlp[v] != tag:
                    tmp.push_back(v)
            adj[i].swap(tmp)
            dext += <idx_t>adj[i].size()
            dnew = n - k - 1
            if deg[i] + nlp - 1 < dnew:
                dnew = deg[i] + nlp - 1
            if dext < dnew:
                dnew = dext
            deg[i] = dnew
            heap.push(pair[idx_t, idx_t](-dnew, -i))
    return order


def etree(Py_ssize_t n, const idx_t[::1] Ap, const idx_t[::1] Ai):
    cdef cnp.ndarray[idx_t, ndim=1] parent_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[idx_t, ndim=1] lnz_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] parent = parent_arr
    cdef idx_t[::1] lnz = lnz_arr
    cdef idx_t[::1] work = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t i, j, p
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
    return parent_arr, lnz_arr


def ldl_numeric(Py_ssize_t n, const idx_t[::1] Ap, const idx_t[::1] Ai,
                const double[::1] Ax, const idx_t[::1] parent,
                const idx_t[::1] lnz, bint require_positive):
    cdef cnp.ndarray[idx_t, ndim=1] Lp_arr = np.zeros(n + 1, dtype=np.int64)
    cdef idx_t[::1] Lp = Lp_arr
    cdef Py_ssize_t i, k, p, b, nxt, ne, nnzy, t, c, q, top
    for i in range(n):
        Lp[i + 1] = Lp[i] + lnz[i]
    cdef Py_ssize_t nnz = Lp[n]
    cdef cnp.ndarray[idx_t, ndim=1] Li_arr = np.zeros(nnz, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] Lx_arr = np.zeros(nnz, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] D_arr = np.zeros(n, dtype=np.float64)
    cdef idx_t[::1] Li = Li_arr
    cdef double[::1] Lx = Lx_arr
    cdef double[::1] D = D_arr
    cdef double[::1] Dinv = np.zeros(n, dtype=np.float64)
    cdef cnp.uint8_t[::1] ymark = np.zeros(n, dtype=np.uint8)
    cdef double[::1] yvals = np.zeros(n, dtype=np.float64)
    cdef idx_t[::1] yidx = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] ebuf = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] nextcol = np.zeros(n, dtype=np.int64)
    cdef double dk, yc, lval
    cdef Py_ssize_t info = -1
    for i in range(n):
        nextcol[i] = Lp[i]
    with nogil:
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
                    ymark[b] = 1
                    ebuf[0] = b
                    ne = 1
                    nxt = parent[b]
                    while nxt != -1 and nxt < k:
                        if ymark[nxt]:
                            break
                        ymark[nxt] = 1
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
                ymark[c] = 0
            D[k] = dk
            if not isfinite(dk) or dk == 0.0 or (require_positive and dk < 0.0):
                info = k
                break
            Dinv[k] = 1.0 / dk
    return Lp_arr, Li_arr, Lx_arr, D_arr, info


def ldl_solve(Py_ssize_t n, const idx_t[::1] Lp, const idx_t[::1] Li,
              const double[::1] Lx, const double[::1] D, const double[::1] b):
    cdef cnp.ndarray[double, ndim=1] x_arr = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t i, q
    cdef double xi, s
    with nogil:
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
    return x_arr
