# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lattice step.

Same table-driven arithmetic as the numpy backend, written as typed
loops; selected automatically at import when present.
"""

import numpy as np

name = "cython"


def step(tables, coupling_nodes, z, u0, u1):
    z = np.ascontiguousarray(z, dtype=np.float64)
    n, nx, batch = z.shape
    out = np.empty_like(z)
    has_coupling = coupling_nodes is not None

    # per-component inflow kind: 0 = zero inflow, 1 = reflection, 2 = control
    kind = np.zeros(n, dtype=np.int32)
    aux = np.zeros(n, dtype=np.int32)
    for a, i in enumerate(tables.refl_comps):
        kind[i] = 1
        aux[i] = a
    for a, i in enumerate(tables.ctrl_comps):
        kind[i] = 2
        aux[i] = a

    if has_coupling:
        g = np.empty_like(z)
        gfoot = np.empty_like(z)
        pred = np.empty_like(z)
        gnew = np.empty_like(z)
        _step_coupled(
            z, out, g, gfoot, pred, gnew,
            np.ascontiguousarray(coupling_nodes, dtype=np.float64),
            tables.idx, tables.w, tables.h, tables.delta,
            tables.ncross, tables.cross_low.astype(np.uint8),
            kind, aux,
            tables.refl, tables.sidx, tables.sw,
            tables.ctrl_frac,
            np.ascontiguousarray(tables.src_comps, dtype=np.int32),
            np.asarray(u0, dtype=np.float64), np.asarray(u1, dtype=np.float64),
        )
    else:
        _step_transport(
            z, out,
            tables.idx, tables.w, tables.h, tables.delta,
            tables.ncross, tables.cross_low.astype(np.uint8),
            kind, aux,
            tables.refl, tables.sidx, tables.sw,
            tables.ctrl_frac,
            np.ascontiguousarray(tables.src_comps, dtype=np.int32),
            np.asarray(u0, dtype=np.float64), np.asarray(u1, dtype=np.float64),
        )
    return out


cdef void _gather_row(
    double[:, ::1] src, int[::1] idx, double[::1] w,
    double[:, ::1] dst, Py_ssize_t nx, Py_ssize_t batch,
) noexcept nogil:
    cdef Py_ssize_t k, b
    cdef double wk
    cdef int f
    for k in range(nx):
        f = idx[k]
        wk = w[k]
        for b in range(batch):
            dst[k, b] = (1.0 - wk) * src[f, b] + wk * src[f + 1, b]


def _step_transport(
    double[:, :, ::1] z, double[:, :, ::1] out,
    int[:, ::1] idx, double[:, ::1] w, double[:, ::1] h, double[:, ::1] delta,
    int[::1] ncross, unsigned char[::1] cross_low,
    int[::1] kind, int[::1] aux,
    double[:, ::1] refl, int[:, :, ::1] sidx, double[:, :, ::1] sw,
    double[:, ::1] ctrl_frac,
    int[::1] src_comps,
    double[::1] u0, double[::1] u1,
):
    cdef Py_ssize_t n = z.shape[0], nx = z.shape[1], batch = z.shape[2]
    cdef Py_ssize_t i, k, b, q, kk, a
    cdef Py_ssize_t nc, n_src = src_comps.shape[0]
    cdef double acc, v, wk, frac
    cdef int f
    with nogil:
        for i in range(n):
            _gather_row(z[i], idx[i], w[i], out[i], nx, batch)
        for i in range(n):
            nc = ncross[i]
            if nc == 0:
                continue
            if kind[i] == 1:
                a = aux[i]
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    for b in range(batch):
                        acc = 0.0
                        for q in range(n_src):
                            f = sidx[a, kk, q]
                            wk = sw[a, kk, q]
                            v = (1.0 - wk) * z[src_comps[q], f, b] \
                                + wk * z[src_comps[q], f + 1, b]
                            acc += refl[a, q] * v
                        out[i, k, b] = acc
            elif kind[i] == 2:
                a = aux[i]
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    frac = ctrl_frac[a, kk]
                    v = (1.0 - frac) * u0[a] + frac * u1[a]
                    for b in range(batch):
                        out[i, k, b] = v
            else:
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    for b in range(batch):
                        out[i, k, b] = 0.0


def _step_coupled(
    double[:, :, ::1] z, double[:, :, ::1] out,
    double[:, :, ::1] g, double[:, :, ::1] gfoot,
    double[:, :, ::1] pred, double[:, :, ::1] gnew,
    double[:, :, ::1] coupling,
    int[:, ::1] idx, double[:, ::1] w, double[:, ::1] h, double[:, ::1] delta,
    int[::1] ncross, unsigned char[::1] cross_low,
    int[::1] kind, int[::1] aux,
    double[:, ::1] refl, int[:, :, ::1] sidx, double[:, :, ::1] sw,
    double[:, ::1] ctrl_frac,
    int[::1] src_comps,
    double[::1] u0, double[::1] u1,
):
    cdef Py_ssize_t n = z.shape[0], nx = z.shape[1], batch = z.shape[2]
    cdef Py_ssize_t i, j, k, b, q, kk, a, bnode
    cdef Py_ssize_t nc, n_src = src_comps.shape[0]
    cdef double acc, v, wk, frac, hk
    cdef int f
    with nogil:
        _coupling_apply(coupling, z, g, n, nx, batch)
        for i in range(n):
            _gather_row(z[i], idx[i], w[i], out[i], nx, batch)
            _gather_row(g[i], idx[i], w[i], gfoot[i], nx, batch)
        for i in range(n):
            nc = ncross[i]
            if nc == 0:
                continue
            bnode = 0 if cross_low[i] else nx - 1
            if kind[i] == 1:
                a = aux[i]
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    for b in range(batch):
                        acc = 0.0
                        for q in range(n_src):
                            f = sidx[a, kk, q]
                            wk = sw[a, kk, q]
                            v = (1.0 - wk) * z[src_comps[q], f, b] \
                                + wk * z[src_comps[q], f + 1, b]
                            v = v + delta[i, k] * (
                                (1.0 - wk) * g[src_comps[q], f, b]
                                + wk * g[src_comps[q], f + 1, b]
                            )
                            acc += refl[a, q] * v
                        out[i, k, b] = acc
                        gfoot[i, k, b] = g[i, bnode, b]
            elif kind[i] == 2:
                a = aux[i]
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    frac = ctrl_frac[a, kk]
                    v = (1.0 - frac) * u0[a] + frac * u1[a]
                    for b in range(batch):
                        out[i, k, b] = v
                        gfoot[i, k, b] = g[i, bnode, b]
            else:
                for kk in range(nc):
                    k = kk if cross_low[i] else nx - nc + kk
                    for b in range(batch):
                        out[i, k, b] = 0.0
                        gfoot[i, k, b] = g[i, bnode, b]
        # trapezoid corrector: out currently holds the base value
        for i in range(n):
            for k in range(nx):
                hk = h[i, k]
                for b in range(batch):
                    pred[i, k, b] = out[i, k, b] + hk * gfoot[i, k, b]
        _coupling_apply(coupling, pred, gnew, n, nx, batch)
        for i in range(n):
            for k in range(nx):
                hk = 0.5 * h[i, k]
                for b in range(batch):
                    out[i, k, b] = out[i, k, b] + hk * (
                        gfoot[i, k, b] + gnew[i, k, b]
                    )


cdef void _coupling_apply(
    double[:, :, ::1] coupling, double[:, :, ::1] z, double[:, :, ::1] g,
    Py_ssize_t n, Py_ssize_t nx, Py_ssize_t batch,
) noexcept nogil:
    cdef Py_ssize_t i, j, k, b
    cdef double c
    for i in range(n):
        for k in range(nx):
            for b in range(batch):
                g[i, k, b] = 0.0
        for j in range(n):
            for k in range(nx):
                c = coupling[i, j, k]
                if c == 0.0:
                    continue
                for b in range(batch):
                    g[i, k, b] += c * z[j, k, b]
