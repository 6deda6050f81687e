"""Pure-Python engine for the alternating two-verifier simulation.

Reference implementation of the same state machine as the compiled kernel in
``_interleave_core.pyx``; the two must produce bit-identical results. See
``reduction.py`` for the meaning of the inputs.

Reasons: 0 = coin supply exhausted, 1 = verifier rejected, 2 = verifier
completed its audit schedule.
"""

REASON_EXHAUSTED = 0
REASON_REJECT = 1
REASON_COMPLETE = 2

_CONSUME = 0
_TERM_REJECT = 1
_TERM_COMPLETE = 2


class _SideState:
    __slots__ = ("j", "remaining", "acc", "pending", "pending_mean")

    def __init__(self):
        self.j = 0
        self.remaining = 0
        self.acc = 0.0
        self.pending = False
        self.pending_mean = 0.0


def interleave_run(arm0, m0, thr0, claimed0, planted0, local_sum0, complete_out0,
                   arm1, m1, thr1, claimed1, planted1, local_sum1, complete_out1,
                   coins):
    m = (m0, m1)
    thr = (thr0, thr1)
    claimed = (claimed0, claimed1)
    planted = (planted0, planted1)
    local_sum = (local_sum0, local_sum1)
    complete_out = (int(complete_out0), int(complete_out1))
    lengths = (len(m0), len(m1))
    side_value = (1, -1)

    states = (_SideState(), _SideState())
    used = [0, 0]
    t = 0
    n_coins = len(coins)
    side = 0

    def turn(s: int) -> int:
        st = states[s]
        if st.pending:
            st.pending = False
            if abs(st.pending_mean - claimed[s][st.j]) > thr[s][st.j]:
                return _TERM_REJECT
            st.j += 1
        if st.remaining > 0:
            return _CONSUME
        while True:
            if st.j >= lengths[s]:
                return _TERM_COMPLETE
            if planted[s][st.j]:
                st.remaining = m[s][st.j]
                st.acc = 0.0
                return _CONSUME
            mean = local_sum[s][st.j] / m[s][st.j]
            if abs(mean - claimed[s][st.j]) > thr[s][st.j]:
                return _TERM_REJECT
            st.j += 1

    while True:
        act = turn(side)
        if act == _TERM_REJECT:
            return (side_value[side], side_value[side], REASON_REJECT,
                    t, used[0], used[1], states[0].j, states[1].j)
        if act == _TERM_COMPLETE:
            return (complete_out[side], side_value[side], REASON_COMPLETE,
                    t, used[0], used[1], states[0].j, states[1].j)
        # consume one coin sample for the current planted audit
        if t >= n_coins:
            return (0, 0, REASON_EXHAUSTED, t, used[0], used[1],
                    states[0].j, states[1].j)
        x = int(coins[t])
        if side == 1:
            x = 1 - x
        st = states[side]
        st.acc += x
        st.remaining -= 1
        t += 1
        used[side] += 1
        if abs(used[0] - used[1]) > 1:
            raise RuntimeError("interleaving invariant violated: sides differ by more than one sample")
        if st.remaining == 0:
            st.pending_mean = st.acc / m[side][st.j]
            st.pending = True
        side = 1 - side
