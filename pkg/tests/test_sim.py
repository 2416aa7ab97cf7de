import math

import numpy as np
import pytest

from logloss_regions import JointPmf, binary_entropy, dsbs
from logloss_regions.errors import EnumerationTooLarge, InconsistentSplit, ValidationError
from logloss_regions.logloss import DistortionSplit
from logloss_regions.sim import (
    AkwTimeshareCode,
    BinAssignment,
    BinDecoder,
    JdTimeshareCode,
    SimConfig,
    TypicalIndex,
    WynerZivCode,
    exact_expectations,
    repeat_for_peak,
    simulate_jd_timeshare,
    simulate_rd_point,
    simulate_smsw,
    simulate_wz,
    simulate_xd,
)
from logloss_regions.sim.binning import all_sequences, ceil_bits, sequence_index
from logloss_regions.sim.schemes import apportion, round_half_up

P = dsbs(0.25)
H = binary_entropy(0.25)


# --- binning primitives --------------------------------------------------------

def test_balanced_table_binning():
    b = BinAssignment(2, 10, 4, seed=3)
    bins = b.bins(all_sequences(2, 10))
    counts = np.bincount(bins.astype(int), minlength=16)
    assert counts.max() - counts.min() <= 1
    assert np.array_equal(bins, BinAssignment(2, 10, 4, seed=3).bins(all_sequences(2, 10)))
    assert not np.array_equal(bins, BinAssignment(2, 10, 4, seed=4).bins(all_sequences(2, 10)))


def test_hash_binning_in_range_and_partial_sums():
    b = BinAssignment(2, 40, 7, seed=1)
    rng = np.random.default_rng(0)
    seqs = rng.integers(0, 2, size=(200, 40))
    bins = b.bins(seqs)
    assert np.all(bins < 128)
    left = b.hash_parts(seqs[:, :15], np.arange(15))
    right = b.hash_parts(seqs[:, 15:], np.arange(15, 40))
    with np.errstate(over="ignore"):
        assert np.array_equal((left + right) & b.mask, bins)


def test_enough_bins_means_no_collisions():
    b = BinAssignment(3, 5, ceil_bits(5 * math.log2(3)), seed=0)
    assert len(set(b.bins(all_sequences(3, 5)).tolist())) == 3**5


def test_sequence_index_round_trip():
    seqs = all_sequences(3, 4)
    assert np.array_equal(sequence_index(seqs, 3), np.arange(81))


def test_bin_decoder_ties_fail():
    b = BinAssignment(2, 2, 0, seed=0)  # a single bin holding everything
    flat = np.log2(np.full((2, 2), 0.5))
    assert BinDecoder(b, flat).decode(0, np.array([0, 0])) is None
    sharp = np.log2(np.array([[0.9, 0.1], [0.1, 0.9]]))
    assert BinDecoder(b, sharp).decode(0, np.array([1, 0])).tolist() == [1, 0]


def test_typical_index_round_trip_and_escape():
    t = TypicalIndex(np.array([0.9, 0.1]), 6, 0.1)
    for seq in all_sequences(2, 6):
        idx = t.encode(seq)
        if idx is not None:
            assert np.array_equal(t.decode(idx), seq)
    assert t.codebook_size == len(t.typical) + 1
    full = TypicalIndex(np.array([0.5, 0.5]), 6, 0.1)
    assert full.bits == 6


def test_rounding_helpers():
    assert round_half_up(2.5) == 3 and round_half_up(2.49) == 2
    assert apportion([3.5, 3.5], [8, 8]) == [4, 3]
    assert apportion([1.2, 2.9], [8, 8]) == [1, 3]
    assert sum(apportion([0.4, 0.4, 0.4], [1, 1, 1])) == 1


# --- Wyner-Ziv and point-to-point ----------------------------------------------

def test_wz_zero_rate_is_posterior_mode():
    r = simulate_wz(P, SimConfig(n=16, trials=400), 0.0)
    assert r.rate_x == 0.0
    assert abs(r.mean_distortion - H) <= 2 * r.ci_halfwidth + 1e-9


def test_wz_identical_sources_are_free():
    same = JointPmf(np.diag([0.3, 0.7]))
    assert simulate_wz(same, SimConfig(n=8, trials=50), 0.0).mean_distortion == 0.0


def test_wz_monotone_in_rate():
    cfg = SimConfig(n=12, trials=300)
    means = [simulate_wz(P, cfg, r) for r in (0.0, 0.3, 0.6, 0.9)]
    for a, b in zip(means, means[1:]):
        assert b.mean_distortion <= a.mean_distortion + a.ci_halfwidth + b.ci_halfwidth


def test_wz_rate_accounting():
    r = simulate_wz(P, SimConfig(n=16, trials=10), 0.4)
    assert r.rate_x == 7 / 16
    assert r.rate_x <= 0.4 + 3 * 0.1


def test_rd_examples():
    r = simulate_rd_point([0.5, 0.5], SimConfig(n=16, eps=0.05, trials=200), 0.5)
    assert abs(r.mean_distortion - (1 - 0.5 / 1.05)) <= 0.05
    assert simulate_rd_point([0.5, 0.5], SimConfig(n=12, trials=50), 1.2).mean_distortion == 0.0
    assert simulate_rd_point([1.0, 0.0], SimConfig(n=12, trials=50), 0.3).mean_distortion == 0.0


def test_enumeration_guard():
    with pytest.raises(EnumerationTooLarge):
        simulate_wz(P, SimConfig(n=64, trials=1), 0.8)


def test_config_validation():
    for bad in (dict(n=0), dict(trials=0), dict(eps=0.0), dict(rates=(-1.0,))):
        with pytest.raises(ValidationError):
            SimConfig(**bad)


def test_configured_rate_is_used():
    a = simulate_wz(P, SimConfig(n=8, trials=20, rates=(0.4,)))
    b = simulate_wz(P, SimConfig(n=8, trials=20), 0.4)
    assert a.row() == b.row()


# --- joint-distortion time sharing ----------------------------------------------

def test_jd_slepian_wolf_corner():
    r = simulate_jd_timeshare(P, SimConfig(n=12, trials=200), 0.0, 1.0)
    assert r.rate_x <= H + 0.1 + 1 / 12 and r.rate_y <= 1.0 + 0.1
    # the follower is binned at H + eps but only asked for rate H, so a fraction
    # eps / (H + eps) of its positions (one of twelve here) stays soft
    code = JdTimeshareCode(P, 12, 0.0, 1.0, 0.1)
    assert code.portions[0].soft == 1
    assert abs(r.mean_distortion - H / 12) <= 2 * r.ci_halfwidth + 0.01


def test_jd_zero_rate_mode():
    r = simulate_jd_timeshare(P, SimConfig(n=16, trials=300), 2.0, 0.5)
    assert r.rate_x == 0.0 and r.rate_y == 0.0
    assert abs(r.mean_distortion - P.h_xy) <= 2 * r.ci_halfwidth + 1e-9


def test_jd_expected_split_matches_simulation():
    code = JdTimeshareCode(P, 16, 0.3, 0.5, 0.1)
    split = code.expected_split()
    assert split.d_total == pytest.approx(7 * H / 16)
    r = simulate_jd_timeshare(P, SimConfig(n=16, trials=500), 0.3, 0.5)
    assert abs(r.mean_distortion - split.d_total) <= 3 * r.ci_halfwidth


def test_jd_high_distortion_cuts_leader_rate():
    code = JdTimeshareCode(P, 16, 1.2, 0.5, 0.1)
    # 7 of 16 leader positions go soft, apportioned 4 / 3; the rest cost a bit each
    assert (code.rate_x, code.rate_y) == (5 / 16, 4 / 16)
    assert code.expected_split().d_total == pytest.approx((7 * P.h_xy + 9 * H) / 16)


# --- split-message Slepian-Wolf --------------------------------------------------

def test_smsw_point_mass_inner_code_never_errs():
    same = JointPmf(np.diag([0.5, 0.5]))
    r = simulate_smsw(same, SimConfig(n=8, trials=50), d=0.0, mix=1.0, repeats=1)
    assert r.mean_distortion == 0.0 and r.block_error_rate == 0.0


def test_smsw_monotone_in_extra_rate():
    cfg = SimConfig(n=8, trials=200)
    errs = [simulate_smsw(P, cfg, d=0.3, repeats=2, extra_rates=(r, r)).block_error_rate
            for r in (0.0, 0.2, 0.45, 0.7)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a + 0.05
    assert errs[0] >= 0.5 and errs[-1] <= 0.1


def test_smsw_rejects_inconsistent_split():
    with pytest.raises(InconsistentSplit):
        simulate_smsw(P, SimConfig(n=16, trials=1), DistortionSplit(0.3, 0.3, 0.0))


# --- X-distortion scheme -------------------------------------------------------

def test_xd_lossless_operation():
    r = simulate_xd(P, np.eye(2), SimConfig(n=8, eps=0.1, trials=100), 0.0)
    assert r.rate_x <= H + 2 * 0.1 + 1 / 8
    assert r.mean_distortion <= r.clamped_fraction * 30 + 1e-9


def test_xd_constant_helper():
    r = simulate_xd(P, np.ones((2, 1)), SimConfig(n=16, eps=0.1, trials=100), 0.4)
    assert r.rate_y <= 1 / 16 + 0.1
    assert abs(r.rate_x - (1 - 0.4)) <= 0.15
    assert abs(r.mean_distortion - 0.4) <= 0.08


def test_xd_degenerate_branch():
    r = simulate_xd(P, np.eye(2), SimConfig(n=8, trials=50), 2.0)
    assert r.rate_x == 0.0


# --- posterior never loses (exhaustive over tiny blocks) -----------------------

@pytest.mark.parametrize("make", [
    lambda p: WynerZivCode(p, 4, 0.5, 0.1, seed=2),
    lambda p: JdTimeshareCode(p, 4, 0.3, 0.5, 0.1, seed=2),
    lambda p: JdTimeshareCode(p, 3, 1.2, 0.34, 0.1, seed=5),
    lambda p: AkwTimeshareCode(p, np.array([[0.9, 0.1], [0.2, 0.8]]), 3, 0.2, 0.1, seed=2),
])
@pytest.mark.parametrize("p", [dsbs(0.25), JointPmf(np.array([[0.4, 0.1], [0.05, 0.45]]))])
def test_posterior_never_worse_than_scheme(make, p):
    scheme, post = exact_expectations(make(p), p)
    assert post <= scheme + 1e-9


# --- repetition ---------------------------------------------------------------

def test_repeat_for_peak_examples():
    assert repeat_for_peak(np.full(300, 0.5), 0.5, 0.1) == 0.0
    assert repeat_for_peak(np.full(300, 0.7), 0.5, 0.1) == 1.0
    with pytest.raises(ValidationError):
        repeat_for_peak([], 0.5, 0.1)


def test_repeat_for_peak_weak_law():
    r = simulate_wz(P, SimConfig(n=16, trials=500), 0.4)
    assert repeat_for_peak(r.samples, r.mean_distortion + 0.05, 0.1, 200) < 0.1
    # Chebyshev: Pr{mean of N > mu + eps} <= var / (N eps^2)
    assert r.samples.var() / (200 * 0.1**2) < 0.1


def test_determinism():
    cfg = SimConfig(n=16, trials=100, seed=9)
    a = simulate_xd(P, np.eye(2), cfg, 0.4)
    b = simulate_xd(P, np.eye(2), cfg, 0.4)
    assert a.row() == b.row() and np.array_equal(a.samples, b.samples)
    c = simulate_xd(P, np.eye(2), SimConfig(n=16, trials=100, seed=10), 0.4)
    assert not np.array_equal(a.samples, c.samples)
