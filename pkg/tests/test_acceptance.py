"""The eleven acceptance criteria, each at its stated tolerance and time limit.

Every criterion prints one ``PASS`` / ``FAIL`` line (echoed again in the
terminal summary).  Criterion 11 reruns the others and compares digests of
everything they computed.
"""

import hashlib
import time

import numpy as np
import pytest

import oracles
from logloss_regions import (
    AuxJoint,
    JdQuery,
    JointPmf,
    binary_entropy,
    dsbs,
    expected_distortion,
    jd_corner_points,
    xd_grid_oracle,
    xd_min_hxu,
)
from logloss_regions import region_xd
from logloss_regions.logloss import distortion_typical_set
from logloss_regions.region_jd import jd_contains_closed_batch, jd_contains_lp_batch, sw_region_contains
from logloss_regions.sim import (
    SimConfig,
    repeat_for_peak,
    simulate_jd_timeshare,
    simulate_smsw,
    simulate_wz,
    simulate_xd,
)

P = dsbs(0.25)
H25 = binary_entropy(0.25)
DIGESTS: dict[int, str] = {}


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(np.ascontiguousarray(part).tobytes() if isinstance(part, np.ndarray) else repr(part).encode())
    return h.hexdigest()


def _report(log, k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    log.append(line)
    assert ok, line


def _random_pmf(rng, m, l):
    return JointPmf(rng.dirichlet(np.ones(m * l)).reshape(m, l))


def crit1():
    rng = np.random.default_rng(1)
    worst_gap, beaten = 0.0, 0
    values = []
    for _ in range(200):
        m, l = rng.integers(1, 5, size=2)
        k = int(rng.integers(1, min(6, l + 2) + 1))
        p = _random_pmf(rng, m, l)
        c = rng.dirichlet(np.ones(k), size=l)
        a = AuxJoint(p, c)
        got = expected_distortion(a)
        want = oracles.h_xy_given_u(p.p, a.channel)
        worst_gap = max(worst_gap, abs(got - want))
        est = rng.dirichlet(np.ones(m * l), size=k).reshape(k, m, l)
        if expected_distortion(a, est) < got - 1e-12:
            beaten += 1
        values.append(got)
    ok = worst_gap <= 1e-9 and beaten == 0
    return ok, f"max |E d - H(X,Y|U)| = {worst_gap:.2e}, estimators beating posterior = {beaten}", _digest(np.array(values))


def _grid_queries(p, rng):
    g = lambda top: np.linspace(0.0, top, 21)
    rx, ry, d = np.meshgrid(g(p.h_x + 1), g(p.h_y + 1), g(p.h_xy), indexing="ij")
    rx, ry, d = rx.ravel(), ry.ravel(), d.ravel()
    rr = rng.uniform(size=(3, 10_000)) * np.array([[p.h_x + 1], [p.h_y + 1], [p.h_xy]])
    return np.concatenate([rx, rr[0]]), np.concatenate([ry, rr[1]]), np.concatenate([d, rr[2]])


def _pmfs_2_3(rng):
    pmfs = [_random_pmf(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5))) for _ in range(10)]
    return pmfs + [P]


def crit2():
    rng = np.random.default_rng(2)
    bad, total, parts = 0, 0, []
    for p in _pmfs_2_3(rng):
        rx, ry, d = _grid_queries(p, rng)
        lp, _, _ = jd_contains_lp_batch(p, rx, ry, d)
        closed = jd_contains_closed_batch(p, rx, ry, d)
        bad += int(np.count_nonzero(lp != closed))
        total += len(rx)
        parts.append(lp)
    return bad == 0, f"{bad} disagreements in {total} queries", _digest(*parts)


def crit3():
    rng = np.random.default_rng(2)
    bad, total, parts = 0, 0, []
    for p in _pmfs_2_3(rng):
        rx, ry, _ = _grid_queries(p, rng)
        zero = np.zeros_like(rx)
        jd = jd_contains_closed_batch(p, rx, ry, zero)
        lp, _, _ = jd_contains_lp_batch(p, rx, ry, zero)
        sw = sw_region_contains(p, rx, ry, 0.0, 0.0)
        bad += int(np.count_nonzero(jd != sw) + np.count_nonzero(lp != sw))
        total += len(rx)
        parts.append(sw)
    return bad == 0, f"{bad} disagreements in {total} D=0 queries (both routes)", _digest(*parts)


def crit4():
    rng = np.random.default_rng(4)
    loose = tight = mismatch = 0
    sizes = []
    for n in range(1, 5):
        for _ in range(100):
            rep = rng.dirichlet(np.full(4, 0.7), size=n).reshape(n, 2, 2)
            budget = float(rng.uniform(0.0, 2.5))
            eps = float(rng.uniform(0.01, 0.5))
            got = distortion_typical_set(rep, budget, eps, kind="joint")
            if got != oracles.brute_typical(rep, budget, eps, "joint"):
                mismatch += 1
            size = len(got)
            sizes.append(size)
            loose += size > 2 ** (n * (budget + 2 * eps)) + 1e-9
            tight += size > 2 ** (n * (budget + eps)) + 1e-9
    ok = loose == 0 and tight == 0 and mismatch == 0
    return ok, (f"violations: 2^n(D+2e) {loose}, 2^n(D+e) {tight}; "
                f"set mismatches vs brute force {mismatch} (400 cases)"), _digest(np.array(sizes))


def crit5():
    rng = np.random.default_rng(5)
    pmfs = [_random_pmf(rng, 2, 2) for _ in range(10)] + [P]
    worst, worst_end, vals = 0.0, 0.0, []
    for p in pmfs:
        budgets = np.linspace(0.0, p.h_y, 5)
        for b in budgets:
            s = xd_min_hxu(p, float(b)).value
            o = xd_grid_oracle(p, float(b), grid_step=0.02)
            worst = max(worst, abs(s - o))
            vals.append(s)
        worst_end = max(worst_end, abs(xd_min_hxu(p, 0.0).value - p.h_x),
                        abs(xd_min_hxu(p, p.h_y).value - p.h_x_given_y))
    ok = worst <= 0.02 and worst_end <= 1e-6
    return ok, f"max |solver - oracle| = {worst:.4f}, endpoint error = {worst_end:.1e}", _digest(np.array(vals))


def _wz_result():
    return simulate_wz(P, SimConfig(n=16, eps=0.1, trials=500, seed=0), 0.4)


def crit6():
    r = _wz_result()
    pred = H25 - 0.4 * H25 / (H25 + 0.1)
    ok = abs(r.mean_distortion - pred) <= 0.08 and r.mean_distortion <= H25 + 0.02
    return ok, f"mean {r.mean_distortion:.4f} vs prediction {pred:.4f} (cap {H25 + 0.02:.4f})", _digest(r.row(), r.samples)


def crit7():
    r = simulate_jd_timeshare(P, SimConfig(n=16, eps=0.1, trials=500, seed=0), 0.3, 0.5)
    c = jd_corner_points(P, 0.3)
    mid = ((c.p1[0] + c.p2[0]) / 2, (c.p1[1] + c.p2[1]) / 2)
    ok = (r.mean_distortion <= 0.38 and abs(r.rate_x - mid[0]) <= 0.15 and abs(r.rate_y - mid[1]) <= 0.15)
    return ok, (f"mean {r.mean_distortion:.4f} (<= 0.38), rates ({r.rate_x:.4f}, {r.rate_y:.4f}) "
                f"vs midpoint ({mid[0]:.4f}, {mid[1]:.4f})"), _digest(r.row(), r.samples)


def crit8():
    cfg = SimConfig(n=16, eps=0.1, trials=500, seed=0)
    r = simulate_smsw(P, cfg, d=0.3, mix=0.5)
    r0 = simulate_smsw(P, cfg, d=0.3, mix=0.5, extra_rates=(0.0, 0.0))
    ok = r.block_error_rate <= 0.05 and r0.block_error_rate >= 0.5
    return ok, (f"block error {r.block_error_rate:.3f} (<= 0.05) with slack bins, "
                f"{r0.block_error_rate:.3f} (>= 0.5) without"), _digest(r.row(), r0.row())


def crit9():
    r = simulate_xd(P, np.eye(2), SimConfig(n=16, eps=0.1, trials=500, seed=0), 0.4)
    target = H25 * (1 - 0.4 / H25)
    ok = abs(r.mean_distortion - 0.4) <= 0.08 and abs(r.rate_x - target) <= 0.15
    return ok, (f"mean X-distortion {r.mean_distortion:.4f} vs 0.4, X-rate {r.rate_x:.4f} vs {target:.4f} "
                f"(encoder failures {r.block_error_rate:.3f})"), _digest(r.row(), r.samples)


def crit10():
    r = _wz_result()
    frac = repeat_for_peak(r.samples, r.mean_distortion, 0.1, 200)
    return frac < 0.1, f"exceedance {frac:.4f} (< 0.1) over N=200 windows", _digest(frac)


CRITERIA = {1: (crit1, 5), 2: (crit2, 10), 3: (crit3, 10), 4: (crit4, 30), 5: (crit5, 180),
            6: (crit6, 60), 7: (crit7, 90), 8: (crit8, 90), 9: (crit9, 90), 10: (crit10, 10)}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, acceptance_log):
    fn, limit = CRITERIA[k]
    t = time.perf_counter()
    ok, detail, digest = fn()
    dt = time.perf_counter() - t
    DIGESTS[k] = digest
    _report(acceptance_log, k, ok and dt < limit, f"{detail}; {dt:.1f}s (limit {limit}s)")


def test_criterion_11_determinism(acceptance_log):
    region_xd._sweep.cache_clear()
    region_xd._grid_cloud.cache_clear()
    changed = []
    for k, (fn, _) in sorted(CRITERIA.items()):
        first = DIGESTS.get(k) or fn()[2]
        if fn()[2] != first:
            changed.append(k)
    _report(acceptance_log, 11, not changed,
            "all reruns identical" if not changed else f"reruns differ for criteria {changed}")
