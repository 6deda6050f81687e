# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled engine for the alternating two-verifier simulation.

Same state machine as ``_interleave_py.interleave_run``; kept in lockstep so
both engines return bit-identical tuples. The per-coin loop is the hot path
(millions of alternation events per reduction run), hence the C kernel.
"""

import numpy as np

from libc.math cimport fabs

REASON_EXHAUSTED = 0
REASON_REJECT = 1
REASON_COMPLETE = 2

cdef struct SideState:
    Py_ssize_t j
    long long remaining
    double acc
    bint pending
    double pending_mean


def interleave_run(arm0, m0, thr0, claimed0, planted0, local_sum0, complete_out0,
                   arm1, m1, thr1, claimed1, planted1, local_sum1, complete_out1,
                   coins):
    cdef long long[::1] m_0 = np.ascontiguousarray(m0, dtype=np.int64)
    cdef long long[::1] m_1 = np.ascontiguousarray(m1, dtype=np.int64)
    cdef double[::1] thr_0 = np.ascontiguousarray(thr0, dtype=np.float64)
    cdef double[::1] thr_1 = np.ascontiguousarray(thr1, dtype=np.float64)
    cdef double[::1] cl_0 = np.ascontiguousarray(claimed0, dtype=np.float64)
    cdef double[::1] cl_1 = np.ascontiguousarray(claimed1, dtype=np.float64)
    cdef unsigned char[::1] pl_0 = np.ascontiguousarray(planted0, dtype=np.uint8)
    cdef unsigned char[::1] pl_1 = np.ascontiguousarray(planted1, dtype=np.uint8)
    cdef double[::1] ls_0 = np.ascontiguousarray(local_sum0, dtype=np.float64)
    cdef double[::1] ls_1 = np.ascontiguousarray(local_sum1, dtype=np.float64)
    cdef unsigned char[::1] xs = np.ascontiguousarray(coins, dtype=np.uint8)

    cdef int comp0 = int(complete_out0)
    cdef int comp1 = int(complete_out1)
    cdef Py_ssize_t len0 = m_0.shape[0]
    cdef Py_ssize_t len1 = m_1.shape[0]
    cdef Py_ssize_t n_coins = xs.shape[0]

    cdef SideState s0, s1
    s0.j = 0; s0.remaining = 0; s0.acc = 0.0; s0.pending = 0; s0.pending_mean = 0.0
    s1.j = 0; s1.remaining = 0; s1.acc = 0.0; s1.pending = 0; s1.pending_mean = 0.0

    cdef long long used0 = 0, used1 = 0
    cdef Py_ssize_t t = 0
    cdef int side = 0
    cdef int act
    cdef int x
    cdef SideState* st
    cdef long long[::1] m_s
    cdef double[::1] thr_s
    cdef double[::1] cl_s
    cdef unsigned char[::1] pl_s
    cdef double[::1] ls_s
    cdef Py_ssize_t len_s
    cdef double mean
    cdef long long diff

    while True:
        if side == 0:
            st = &s0; m_s = m_0; thr_s = thr_0; cl_s = cl_0; pl_s = pl_0; ls_s = ls_0; len_s = len0
        else:
            st = &s1; m_s = m_1; thr_s = thr_1; cl_s = cl_1; pl_s = pl_1; ls_s = ls_1; len_s = len1

        # one "turn": advance this side until it consumes a coin or terminates
        act = -1
        if st.pending:
            st.pending = 0
            if fabs(st.pending_mean - cl_s[st.j]) > thr_s[st.j]:
                act = 1  # reject
            else:
                st.j += 1
        if act == -1 and st.remaining > 0:
            act = 0  # consume
        while act == -1:
            if st.j >= len_s:
                act = 2  # complete
                break
            if pl_s[st.j]:
                st.remaining = m_s[st.j]
                st.acc = 0.0
                act = 0
                break
            mean = ls_s[st.j] / m_s[st.j]
            if fabs(mean - cl_s[st.j]) > thr_s[st.j]:
                act = 1
                break
            st.j += 1

        if act == 1:
            return ((1 if side == 0 else -1), (1 if side == 0 else -1), REASON_REJECT,
                    int(t), int(used0), int(used1), int(s0.j), int(s1.j))
        if act == 2:
            return ((comp0 if side == 0 else comp1), (1 if side == 0 else -1), REASON_COMPLETE,
                    int(t), int(used0), int(used1), int(s0.j), int(s1.j))

        if t >= n_coins:
            return (0, 0, REASON_EXHAUSTED, int(t), int(used0), int(used1),
                    int(s0.j), int(s1.j))
        x = xs[t]
        if side == 1:
            x = 1 - x
        st.acc += x
        st.remaining -= 1
        t += 1
        if side == 0:
            used0 += 1
        else:
            used1 += 1
        diff = used0 - used1
        if diff > 1 or diff < -1:
            raise RuntimeError("interleaving invariant violated: sides differ by more than one sample")
        if st.remaining == 0:
            st.pending_mean = st.acc / m_s[st.j]
            st.pending = 1
        side = 1 - side
