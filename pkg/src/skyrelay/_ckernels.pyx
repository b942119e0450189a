# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled link-geometry kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, exp, fabs, floor, log, pow, sqrt, fmin

cnp.import_array()

cdef double RAD2DEG = 57.29577951308232
cdef double LN10_10 = 0.23025850929940458  # ln(10) / 10


cdef inline double _wrap(double dx, double road_length) nogil:
    return dx - road_length * floor(dx / road_length + 0.5)


cdef inline double _dist(const double[:, ::1] pos, Py_ssize_t a, Py_ssize_t b,
                         double road_length) nogil:
    cdef double dx = _wrap(pos[b, 0] - pos[a, 0], road_length)
    cdef double dy = pos[b, 1] - pos[a, 1]
    cdef double dz = pos[b, 2] - pos[a, 2]
    return sqrt(dx * dx + dy * dy + dz * dz)


cdef inline double _desired(const double[:, ::1] pos, const cnp.uint8_t[::1] is_uav,
                            Py_ssize_t t, Py_ssize_t r, const double[::1] c) nogil:
    cdef double d = _dist(pos, r, t, c[6])
    cdef double g0 = pow(10.0, c[4] / 10.0)
    if is_uav[t]:
        return c[1] * g0 * pow(d, -c[3])
    return c[0] * g0 * pow(d, -c[2])


cdef inline double _interf(const double[:, ::1] pos, const cnp.uint8_t[::1] is_uav,
                           Py_ssize_t r, Py_ssize_t peer, Py_ssize_t t,
                           const double[::1] c) nogil:
    """Power at receiver r (beam toward peer) from transmitter t, unit fading."""
    cdef double road = c[6]
    cdef double bx = _wrap(pos[peer, 0] - pos[r, 0], road)
    cdef double by = pos[peer, 1] - pos[r, 1]
    cdef double wx = _wrap(pos[t, 0] - pos[r, 0], road)
    cdef double wy = pos[t, 1] - pos[r, 1]
    cdef double wz = pos[t, 2] - pos[r, 2]
    cdef double theta
    if (bx == 0 and by == 0) or (wx == 0 and wy == 0):
        theta = 0.0
    else:
        theta = atan2(fabs(bx * wy - by * wx), bx * wx + by * wy) * RAD2DEG
    cdef double q = theta / c[5]
    # gain [dB] and path loss folded into one exponential
    cdef double ldb = LN10_10 * (c[4] - fmin(q * q, 26.0))
    cdef double half_log_d2 = 0.5 * log(wx * wx + wy * wy + wz * wz)
    if is_uav[t]:
        return c[1] * exp(ldb - c[3] * half_log_d2)
    return c[0] * exp(ldb - c[2] * half_log_d2)


def power_matrix(tx, rx, pos, is_uav, consts):
    cdef const cnp.intp_t[::1] txv = np.ascontiguousarray(tx, dtype=np.intp)
    cdef const cnp.intp_t[::1] rxv = np.ascontiguousarray(rx, dtype=np.intp)
    cdef const double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const cnp.uint8_t[::1] u = np.ascontiguousarray(is_uav, dtype=np.uint8)
    cdef const double[::1] c = np.ascontiguousarray(consts, dtype=np.float64)
    cdef Py_ssize_t k = txv.shape[0], i, j
    out = np.zeros((k, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(k):
        if _dist(p, rxv[i], txv[i], c[6]) == 0:
            raise ValueError("zero-length link")
        o[i, i] = _desired(p, u, txv[i], rxv[i], c)
        if u[rxv[i]]:
            continue
        for j in range(k):
            if j == i or txv[j] == rxv[i]:
                continue
            if _dist(p, rxv[i], txv[j], c[6]) == 0:
                raise ValueError("interferer collocated with receiver")
            o[i, j] = _interf(p, u, rxv[i], txv[i], txv[j], c)
    return out


def link_sinr(tx, rx, pos, is_uav, fading, consts):
    cdef const cnp.intp_t[::1] txv = np.ascontiguousarray(tx, dtype=np.intp)
    cdef const cnp.intp_t[::1] rxv = np.ascontiguousarray(rx, dtype=np.intp)
    cdef const double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const cnp.uint8_t[::1] u = np.ascontiguousarray(is_uav, dtype=np.uint8)
    cdef const double[::1] c = np.ascontiguousarray(consts, dtype=np.float64)
    cdef Py_ssize_t k = txv.shape[0], i, j
    cdef bint has_fading = fading is not None
    cdef const double[:, ::1] f
    if has_fading:
        f = np.ascontiguousarray(fading, dtype=np.float64)
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    cdef double des, acc, si, pw
    for i in range(k):
        if _dist(p, rxv[i], txv[i], c[6]) == 0:
            raise ValueError("zero-length link")
        des = _desired(p, u, txv[i], rxv[i], c)
        if has_fading:
            des = des * f[i, i]
        acc = 0.0
        si = 0.0
        if not u[rxv[i]]:
            for j in range(k):
                if j == i:
                    continue
                if txv[j] == rxv[i]:
                    si += c[8]
                    continue
                if _dist(p, rxv[i], txv[j], c[6]) == 0:
                    raise ValueError("interferer collocated with receiver")
                pw = _interf(p, u, rxv[i], txv[i], txv[j], c)
                if has_fading:
                    pw = pw * f[i, j]
                acc += pw
        # summation order matches the numpy reference: noise + interference + si
        o[i] = des / (c[7] + acc + si)
    return out


def conflict_codes(tx_a, rx_a, tx_b, rx_b, pos, is_uav, consts, double sigma):
    cdef const cnp.intp_t[::1] ta = np.ascontiguousarray(tx_a, dtype=np.intp)
    cdef const cnp.intp_t[::1] ra = np.ascontiguousarray(rx_a, dtype=np.intp)
    cdef const cnp.intp_t[::1] tb = np.ascontiguousarray(tx_b, dtype=np.intp)
    cdef const cnp.intp_t[::1] rb = np.ascontiguousarray(rx_b, dtype=np.intp)
    cdef const double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const cnp.uint8_t[::1] u = np.ascontiguousarray(is_uav, dtype=np.uint8)
    cdef const double[::1] c = np.ascontiguousarray(consts, dtype=np.float64)
    cdef Py_ssize_t ka = ta.shape[0], kb = tb.shape[0], i, j
    out = np.zeros((ka, kb), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] o = out
    cdef double[::1] des_a = np.empty(ka)
    cdef double[::1] des_b = np.empty(kb)
    cdef double si_power = c[8]
    cdef bint fd
    for i in range(ka):
        des_a[i] = _desired(p, u, ta[i], ra[i], c)
    for j in range(kb):
        des_b[j] = _desired(p, u, tb[j], rb[j], c)
    for i in range(ka):
        for j in range(kb):
            if ta[i] == tb[j] or ra[i] == rb[j]:
                o[i, j] = 1
                continue
            if (tb[j] == ra[i] and u[ra[i]]) or (ta[i] == rb[j] and u[ta[i]]):
                o[i, j] = 1
                continue
            fd = False
            if tb[j] == ra[i] and si_power / des_a[i] > sigma:
                fd = True
            if ta[i] == rb[j] and si_power / des_b[j] > sigma:
                fd = True
            if fd:
                o[i, j] = 2
                continue
            if not u[ra[i]] and tb[j] != ra[i]:
                if _interf(p, u, ra[i], ta[i], tb[j], c) / des_a[i] > sigma:
                    o[i, j] = 3
                    continue
            if not u[rb[j]] and ta[i] != rb[j]:
                if _interf(p, u, rb[j], tb[j], ta[i], c) / des_b[j] > sigma:
                    o[i, j] = 3
    return out
