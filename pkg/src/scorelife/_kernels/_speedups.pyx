# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled rollout-scoring kernels; see pure.py for the reference semantics."""

import numpy as np

from libc.math cimport cos, fabs, sin


def cartpole_scores(x0, digits, double gamma, int horizon, int cost_kind, params):
    cdef double gravity, mass_cart, mass_pole, half_length, force_mag, tau
    cdef double x_limit, theta_limit
    gravity, mass_cart, mass_pole, half_length, force_mag, tau, x_limit, theta_limit = params

    cdef double sx = x0[0], sxd = x0[1], sth = x0[2], sthd = x0[3]
    cdef const unsigned char[:, ::1] dg = np.ascontiguousarray(digits, dtype=np.uint8)
    cdef Py_ssize_t n = dg.shape[0], depth = dg.shape[1]
    out = np.zeros(n)
    cdef double[::1] scores = out

    cdef double total_mass = mass_cart + mass_pole
    cdef double pml = mass_pole * half_length
    cdef Py_ssize_t i, k
    cdef int a
    cdef double x, xd, th, thd, disc, acc, cost, force, ct, st, temp, thacc, xacc

    with nogil:
        for i in range(n):
            x = sx
            xd = sxd
            th = sth
            thd = sthd
            if fabs(x) > x_limit or fabs(th) > theta_limit:
                continue
            disc = 1.0
            acc = 0.0
            for k in range(horizon + 1):
                if cost_kind == 0:
                    cost = 2.0 * x * x + xd * xd + 8.0 * th * th + thd * thd
                else:
                    cost = -1.0
                acc += disc * cost
                disc *= gamma
                a = dg[i, k] if k < depth else 0
                force = force_mag if a == 1 else -force_mag
                ct = cos(th)
                st = sin(th)
                temp = (force + pml * thd * thd * st) / total_mass
                thacc = (gravity * st - ct * temp) / (
                    half_length * (4.0 / 3.0 - mass_pole * ct * ct / total_mass)
                )
                xacc = temp - pml * thacc * ct / total_mass
                x = x + tau * xd
                xd = xd + tau * xacc
                th = th + tau * thd
                thd = thd + tau * thacc
                if fabs(x) > x_limit or fabs(th) > theta_limit:
                    break
            scores[i] = acc
    return out


def cycle_scores(x0, int n_states, digits, double gamma, int horizon):
    cdef const unsigned char[:, ::1] dg = np.ascontiguousarray(digits, dtype=np.uint8)
    cdef Py_ssize_t n = dg.shape[0], depth = dg.shape[1]
    out = np.zeros(n)
    cdef double[::1] scores = out
    cdef Py_ssize_t i, k
    cdef long s, start = int(x0)
    cdef int a
    cdef double disc, acc

    with nogil:
        for i in range(n):
            s = start
            disc = 1.0
            acc = 0.0
            for k in range(horizon + 1):
                acc += disc * s
                disc *= gamma
                a = dg[i, k] if k < depth else 0
                s = (s + 1 + a) % n_states
            scores[i] = acc
    return out
