# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-trial reductions for the Monte-Carlo hot loops.

Same contract as cfmimo._kernels_py; fused pathloss + reduction avoids
materializing the per-AP gain arrays that dominate the metric experiments.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()

BACKEND_NAME = "cython"


def singleslope_pathloss(r, double alpha):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = 1.0 if rr[i] <= 1.0 else pow(rr[i], -alpha)
    return out


def threeslope_pathloss(r, double d0, double d1, double c):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double mid_fac = c * pow(d1, -1.5)
    cdef double near = c * pow(d0, -2.0) * pow(d1, -1.5)
    for i in range(n):
        if rr[i] > d1:
            out[i] = c * pow(rr[i], -3.5)
        elif rr[i] >= d0:
            out[i] = mid_fac * pow(rr[i], -2.0)
        else:
            out[i] = near
    return out


def singleslope_sums(r, double alpha):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], i
    cdef double l, s1 = 0.0, s2 = 0.0
    for i in range(n):
        l = 1.0 if rr[i] <= 1.0 else pow(rr[i], -alpha)
        s1 += l
        s2 += l * l
    return s1, s2


def threeslope_sums(r, double d0, double d1, double c):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], i
    cdef double mid_fac = c * pow(d1, -1.5)
    cdef double near = c * pow(d0, -2.0) * pow(d1, -1.5)
    cdef double l, s1 = 0.0, s2 = 0.0
    for i in range(n):
        if rr[i] > d1:
            l = c * pow(rr[i], -3.5)
        elif rr[i] >= d0:
            l = mid_fac * pow(rr[i], -2.0)
        else:
            l = near
        s1 += l
        s2 += l * l
    return s1, s2


def beta_sums(beta):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(beta, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], i
    cdef double s1 = 0.0, s2 = 0.0
    for i in range(n):
        s1 += b[i]
        s2 += b[i] * b[i]
    return s1, s2


def cross_sums(beta_k, beta_j):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bk = np.ascontiguousarray(beta_k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bj = np.ascontiguousarray(beta_j, dtype=np.float64)
    cdef Py_ssize_t n = bk.shape[0], i
    cdef double sk = 0.0, sj = 0.0, skj = 0.0
    for i in range(n):
        sk += bk[i]
        sj += bj[i]
        skj += bk[i] * bj[i]
    return sk, sj, skj


def weighted_gain(beta, weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(beta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], i
    cdef double s = 0.0
    for i in range(n):
        s += b[i] * w[i]
    return s
