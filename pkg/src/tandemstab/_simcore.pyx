# cython: language_level=3
"""Compiled jump-chain kernel.

Twin of _simcore_py.run_chain: same event ordering, same random stream,
same floating-point expression order, so results are bit-identical to the
pure-Python kernel. Keep the two files in sync when changing either.
"""

import math

import numpy as np

cimport numpy as cnp
from libc.math cimport HUGE_VAL, log

cnp.import_array()

cdef double _INV53 = 1.0 / 9007199254740992.0  # 2**-53

BACKEND_NAME = "cython"


def run_chain(
    prefix,
    cycle,
    double mu1,
    double mu2,
    int variant,
    long long sat_level,
    seed,
    double horizon,
    long long max_events,
    long long x1,
    long long x2,
    long long occ1,
    long long occ2,
    checkpoint_times,
    ts_times,
    targets,
    long long n_target_sets,
    bint stop_at_targets,
    long long cycle_cap,
):
    cdef double[::1] pre = np.ascontiguousarray(prefix, dtype=np.float64)
    cdef double[::1] cyc = np.ascontiguousarray(cycle, dtype=np.float64)
    cdef long long m = pre.shape[0]
    cdef long long p = cyc.shape[0]

    cdef unsigned long long s0, s1, s2, s3, z, sm, x, r, tt
    sm = <unsigned long long> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef unsigned long long words[4]
    cdef int wi
    for wi in range(4):
        sm = sm + <unsigned long long> 0x9E3779B97F4A7C15
        z = sm
        z = (z ^ (z >> 30)) * <unsigned long long> 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * <unsigned long long> 0x94D049BB133111EB
        words[wi] = z ^ (z >> 31)
    if words[0] == 0 and words[1] == 0 and words[2] == 0 and words[3] == 0:
        words[0] = 1
    s0 = words[0]
    s1 = words[1]
    s2 = words[2]
    s3 = words[3]

    occ_np = np.zeros((occ1 + 1, occ2 + 1))
    cdef double[:, ::1] occ = occ_np
    cdef double occ_outside = 0.0
    chk_np = np.ascontiguousarray(checkpoint_times, dtype=np.float64)
    cdef double[::1] chk_times = chk_np
    cdef long long n_chk = chk_times.shape[0]
    chk_levels_np = np.full(n_chk, np.nan)
    cdef double[::1] chk_levels = chk_levels_np
    ts_np = np.ascontiguousarray(ts_times, dtype=np.float64)
    cdef double[::1] ts_arr = ts_np
    cdef long long n_ts = ts_arr.shape[0]
    ts_x1_np = np.full(n_ts, -1, dtype=np.int64)
    ts_x2_np = np.full(n_ts, -1, dtype=np.int64)
    cdef long long[::1] ts_x1 = ts_x1_np
    cdef long long[::1] ts_x2 = ts_x2_np
    tg_np = np.ascontiguousarray(np.asarray(targets, dtype=np.int64).reshape(-1, 3))
    cdef long long[:, ::1] tg = tg_np
    cdef long long n_tg = tg.shape[0]
    target_np = np.full(max(n_target_sets, 1), np.inf)
    cdef double[::1] target_times = target_np
    cdef long long found = 0

    cdef double int_x1 = 0.0
    cdef double int_x2 = 0.0
    cdef double busy1 = 0.0
    cdef double busy2 = 0.0
    cycle_np = np.empty(cycle_cap if cycle_cap > 0 else 1)
    cdef double[::1] cycle_buf = cycle_np
    cdef long long cycle_count = 0
    cdef double last_entry = 0.0 if (x1 == 0 and x2 == 0) else -1.0
    cdef long long arrivals = 0
    cdef long long events = 0
    cdef bint capped = False
    cdef double t = 0.0
    cdef long long chk_i = 0
    cdef long long ts_i = 0

    cdef double lam, total, end, u1, u2, t_next, seg, acc
    cdef bint sat, absorbed
    cdef int ev
    cdef long long k, sid
    t_next = 0.0

    while True:
        lam = pre[x2] if x2 < m else cyc[(x2 - m) % p]
        total = lam
        if x1 > 0:
            total += mu1
        if x2 > 0:
            total += mu2
        sat = x1 == 0 and (variant == 2 or (variant == 1 and x2 < sat_level))
        if sat:
            total += mu1

        absorbed = total <= 0.0
        if absorbed:
            end = horizon
        else:
            x = s0 + s3
            r = ((x << 23) | (x >> 41)) + s0
            tt = s1 << 17
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= tt
            s3 = (s3 << 45) | (s3 >> 19)
            u1 = <double> (r >> 11) * _INV53
            t_next = t + (-log(1.0 - u1) / total)
            end = t_next if t_next < horizon else horizon

        while chk_i < n_chk and chk_times[chk_i] <= end:
            chk_levels[chk_i] = <double> (x1 + x2)
            chk_i += 1
        while ts_i < n_ts and ts_arr[ts_i] <= end:
            ts_x1[ts_i] = x1
            ts_x2[ts_i] = x2
            ts_i += 1
        seg = end - t
        int_x1 += x1 * seg
        int_x2 += x2 * seg
        if x1 > 0:
            busy1 += seg
        if x2 > 0:
            busy2 += seg
        if x1 <= occ1 and x2 <= occ2:
            occ[x1, x2] += seg
        else:
            occ_outside += seg

        if absorbed or end >= horizon:
            t = horizon
            break
        t = t_next

        x = s0 + s3
        r = ((x << 23) | (x >> 41)) + s0
        tt = s1 << 17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= tt
        s3 = (s3 << 45) | (s3 >> 19)
        u2 = (<double> (r >> 11) * _INV53) * total

        ev = -1
        acc = lam
        if u2 < acc:
            ev = 0
        if ev < 0 and x1 > 0:
            acc += mu1
            if u2 < acc:
                ev = 1
        if ev < 0 and x2 > 0:
            acc += mu2
            if u2 < acc:
                ev = 2
        if ev < 0 and sat:
            ev = 3
        if ev < 0:
            # u2 landed on the top edge; take the last enabled arc
            if sat:
                ev = 3
            elif x2 > 0:
                ev = 2
            elif x1 > 0:
                ev = 1
            else:
                ev = 0

        if ev == 0:
            x1 += 1
            arrivals += 1
        elif ev == 1:
            x1 -= 1
            x2 += 1
        elif ev == 2:
            x2 -= 1
        else:
            x2 += 1
        events += 1

        if x1 == 0 and x2 == 0:
            if last_entry >= 0.0:
                if cycle_count < cycle_cap:
                    cycle_buf[cycle_count] = t - last_entry
                cycle_count += 1
            last_entry = t

        if found < n_target_sets:
            for k in range(n_tg):
                sid = tg[k, 2]
                if (
                    target_times[sid] == HUGE_VAL
                    and tg[k, 0] == x1
                    and tg[k, 1] == x2
                ):
                    target_times[sid] = t
                    found += 1
            if stop_at_targets and found >= n_target_sets:
                break

        if events >= max_events:
            capped = True
            break

    cdef long long n_rec = cycle_count if cycle_count < cycle_cap else cycle_cap
    return {
        "elapsed": t,
        "events": events,
        "capped": capped,
        "int_x1": int_x1,
        "int_x2": int_x2,
        "busy1": busy1,
        "busy2": busy2,
        "arrivals": arrivals,
        "occ": occ_np,
        "occ_outside": occ_outside,
        "checkpoint_levels": chk_levels_np,
        "ts_x1": ts_x1_np,
        "ts_x2": ts_x2_np,
        "cycle_times": cycle_np[:n_rec].copy(),
        "cycle_count": cycle_count,
        "target_times": target_np[:n_target_sets].copy(),
        "final_x1": x1,
        "final_x2": x2,
    }
