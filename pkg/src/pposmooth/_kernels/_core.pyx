# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementation of the hot MLP kernels.

Semantics match numpy_backend exactly (up to summation order): one hidden
layer, ReLU, subgradient 0 at the kink.
"""
import numpy as np
cimport numpy as cnp

NAME = "cython"


def mlp_forward(double[:, ::1] w1, double[::1] b1,
                double[:, ::1] w2, double[::1] b2,
                double[:, ::1] x):
    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t in_dim = x.shape[1]
    cdef Py_ssize_t hid_dim = w1.shape[0]
    cdef Py_ssize_t out_dim = w2.shape[0]
    cdef cnp.ndarray[double, ndim=2] hidden = np.empty((batch, hid_dim))
    cdef cnp.ndarray[double, ndim=2] out = np.empty((batch, out_dim))
    cdef double[:, ::1] hv = hidden
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t n, i, j, k
    cdef double acc
    for n in range(batch):
        for j in range(hid_dim):
            acc = b1[j]
            for i in range(in_dim):
                acc += w1[j, i] * x[n, i]
            hv[n, j] = acc if acc > 0.0 else 0.0
        for k in range(out_dim):
            acc = b2[k]
            for j in range(hid_dim):
                acc += w2[k, j] * hv[n, j]
            ov[n, k] = acc
    return out, hidden


def mlp_backward(double[:, ::1] w1, double[:, ::1] w2,
                 double[:, ::1] x, double[:, ::1] hidden,
                 double[:, ::1] gy):
    cdef Py_ssize_t batch = x.shape[0]
    cdef Py_ssize_t in_dim = x.shape[1]
    cdef Py_ssize_t hid_dim = w1.shape[0]
    cdef Py_ssize_t out_dim = w2.shape[0]
    cdef cnp.ndarray[double, ndim=2] gw1 = np.zeros((hid_dim, in_dim))
    cdef cnp.ndarray[double, ndim=1] gb1 = np.zeros(hid_dim)
    cdef cnp.ndarray[double, ndim=2] gw2 = np.zeros((out_dim, hid_dim))
    cdef cnp.ndarray[double, ndim=1] gb2 = np.zeros(out_dim)
    cdef double[:, ::1] gw1v = gw1
    cdef double[::1] gb1v = gb1
    cdef double[:, ::1] gw2v = gw2
    cdef double[::1] gb2v = gb2
    cdef Py_ssize_t n, i, j, k
    cdef double g, gz
    for n in range(batch):
        for k in range(out_dim):
            g = gy[n, k]
            gb2v[k] += g
            for j in range(hid_dim):
                gw2v[k, j] += g * hidden[n, j]
        for j in range(hid_dim):
            if hidden[n, j] > 0.0:
                gz = 0.0
                for k in range(out_dim):
                    gz += gy[n, k] * w2[k, j]
                gb1v[j] += gz
                for i in range(in_dim):
                    gw1v[j, i] += gz * x[n, i]
    return gw1, gb1, gw2, gb2
