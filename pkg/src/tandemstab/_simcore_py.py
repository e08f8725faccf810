"""Pure-Python jump-chain kernel; fallback twin of the compiled kernel.

Every floating-point expression here is written in the same order as in the
compiled kernel, and the random stream is the same integer algorithm, so
the two produce bit-identical results. Keep the two files in sync when
changing either.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_INV53 = 1.0 / (1 << 53)

BACKEND_NAME = "python"


def run_chain(
    prefix,
    cycle,
    mu1,
    mu2,
    variant,
    sat_level,
    seed,
    horizon,
    max_events,
    x1,
    x2,
    occ1,
    occ2,
    checkpoint_times,
    ts_times,
    targets,
    n_target_sets,
    stop_at_targets,
    cycle_cap,
):
    prefix = list(prefix)
    cycle = list(cycle)
    m = len(prefix)
    p = len(cycle)
    mu1 = float(mu1)
    mu2 = float(mu2)
    horizon = float(horizon)

    # xoshiro256++ state from splitmix64(seed)
    s = seed & _MASK
    words = []
    for _ in range(4):
        s = (s + 0x9E3779B97F4A7C15) & _MASK
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        words.append(z ^ (z >> 31))
    if not any(words):
        words[0] = 1
    s0, s1, s2, s3 = words

    occ = np.zeros((occ1 + 1, occ2 + 1))
    occ_outside = 0.0
    chk_times = np.asarray(checkpoint_times, dtype=np.float64)
    n_chk = len(chk_times)
    chk_levels = np.full(n_chk, np.nan)
    ts_arr = np.asarray(ts_times, dtype=np.float64)
    n_ts = len(ts_arr)
    ts_x1 = np.full(n_ts, -1, dtype=np.int64)
    ts_x2 = np.full(n_ts, -1, dtype=np.int64)
    tg = np.asarray(targets, dtype=np.int64).reshape(-1, 3)
    n_tg = len(tg)
    target_times = np.full(max(n_target_sets, 1), math.inf)
    found = 0

    int_x1 = 0.0
    int_x2 = 0.0
    busy1 = 0.0
    busy2 = 0.0
    cycle_times = []
    cycle_count = 0
    last_entry = 0.0 if (x1 == 0 and x2 == 0) else -1.0
    arrivals = 0
    events = 0
    capped = False
    t = 0.0
    chk_i = 0
    ts_i = 0
    log = math.log

    while True:
        lam = prefix[x2] if x2 < m else cycle[(x2 - m) % p]
        total = lam
        if x1 > 0:
            total += mu1
        if x2 > 0:
            total += mu2
        sat = x1 == 0 and (variant == 2 or (variant == 1 and x2 < sat_level))
        if sat:
            total += mu1

        if total <= 0.0:
            end = horizon
        else:
            x = (s0 + s3) & _MASK
            r = (((x << 23) | (x >> 41)) + s0) & _MASK
            tt = (s1 << 17) & _MASK
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= tt
            s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
            u1 = (r >> 11) * _INV53
            t_next = t + (-log(1.0 - u1) / total)
            end = t_next if t_next < horizon else horizon

        while chk_i < n_chk and chk_times[chk_i] <= end:
            chk_levels[chk_i] = x1 + x2
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

        if total <= 0.0 or end >= horizon:
            t = horizon
            break
        t = t_next

        x = (s0 + s3) & _MASK
        r = (((x << 23) | (x >> 41)) + s0) & _MASK
        tt = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= tt
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        u2 = ((r >> 11) * _INV53) * total

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
                    cycle_times.append(t - last_entry)
                cycle_count += 1
            last_entry = t

        if found < n_target_sets:
            for k in range(n_tg):
                sid = tg[k, 2]
                if (
                    target_times[sid] == math.inf
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

    return {
        "elapsed": t,
        "events": events,
        "capped": capped,
        "int_x1": int_x1,
        "int_x2": int_x2,
        "busy1": busy1,
        "busy2": busy2,
        "arrivals": arrivals,
        "occ": occ,
        "occ_outside": occ_outside,
        "checkpoint_levels": chk_levels,
        "ts_x1": ts_x1,
        "ts_x2": ts_x2,
        "cycle_times": np.asarray(cycle_times, dtype=np.float64),
        "cycle_count": cycle_count,
        "target_times": target_times[:n_target_sets].copy(),
        "final_x1": x1,
        "final_x2": x2,
    }
