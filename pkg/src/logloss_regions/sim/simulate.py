"""Monte Carlo harness: sample sources, run a code, score log-loss and block errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from ..discrete import AuxJoint, JointPmf, as_dist
from ..errors import InconsistentSplit, ValidationError
from ..logloss import DistortionSplit, enumerate_low_cost, marginal_x, surprisal
from .binning import BinAssignment, ceil_bits
from .schemes import AkwTimeshareCode, JdTimeshareCode, WynerZivCode

SOURCE_STREAM = 0x5EED


@dataclass(frozen=True)
class SimConfig:
    n: int = 16
    eps: float = 0.1
    trials: int = 500
    seed: int = 0
    clamp: float = 30.0
    rates: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValidationError("n and trials must be at least 1")
        if not self.eps > 0:
            raise ValidationError("eps must be positive")
        if self.clamp <= 0:
            raise ValidationError("clamp must be positive")
        if any(r < 0 for r in self.rates):
            raise ValidationError("rates must be nonnegative")


@dataclass(frozen=True)
class SimResult:
    mean_distortion: float
    block_error_rate: float
    clamped_fraction: float
    ci_halfwidth: float
    trials_run: int
    rate_x: float
    rate_y: float
    samples: np.ndarray = field(repr=False, compare=False)

    def row(self) -> dict:
        return {
            "mean_distortion": self.mean_distortion,
            "block_error_rate": self.block_error_rate,
            "clamped_fraction": self.clamped_fraction,
            "ci_halfwidth": self.ci_halfwidth,
            "trials_run": self.trials_run,
            "rate_x": self.rate_x,
            "rate_y": self.rate_y,
        }


def _rate(rate, cfg: SimConfig, i: int = 0) -> float:
    if rate is not None:
        return float(rate)
    if len(cfg.rates) > i:
        return float(cfg.rates[i])
    raise ValidationError("no rate given and none configured")


def draw_sources(p: JointPmf, n: int, trials: int, seed: int, stream: int = SOURCE_STREAM):
    """(trials, n) arrays of X and Y drawn i.i.d. from ``p``."""
    rng = np.random.default_rng([seed, stream])
    idx = rng.choice(p.m * p.l, size=(trials, n), p=p.p.ravel())
    return idx // p.l, idx % p.l


def score(dec, x, y, clamp: float, joint: bool) -> tuple[float, int, bool]:
    """(clamped per-letter distortion, clamped symbol count, exact-recovery mismatch)."""
    idx = np.arange(len(x))
    mass = dec.rep[idx, x, y] if joint else dec.rep[idx, x]
    per = np.minimum(surprisal(mass), clamp)
    mismatch = bool(np.any((dec.x_hat >= 0) & (dec.x_hat != x)) or np.any((dec.y_hat >= 0) & (dec.y_hat != y)))
    return float(per.mean()), int(np.count_nonzero(per >= clamp)), mismatch


def _summarize(samples, errors, clamped, n, rate_x, rate_y) -> SimResult:
    samples = np.asarray(samples, dtype=float)
    t = len(samples)
    sd = float(samples.std(ddof=1)) if t > 1 else 0.0
    return SimResult(
        mean_distortion=float(samples.mean()),
        block_error_rate=float(np.mean(errors)),
        clamped_fraction=float(clamped) / (t * n),
        ci_halfwidth=1.96 * sd / sqrt(t),
        trials_run=t,
        rate_x=float(rate_x),
        rate_y=float(rate_y),
        samples=samples,
    )


def run_code(code, p: JointPmf, cfg: SimConfig) -> SimResult:
    xs, ys = draw_sources(p, cfg.n, cfg.trials, cfg.seed)
    samples, errors, clamped = [], [], 0
    for x, y in zip(xs, ys):
        key, enc_failed = code.encode(x, y)
        dec = code.decode(key)
        d, c, mismatch = score(dec, x, y, cfg.clamp, code.joint)
        samples.append(d)
        errors.append(enc_failed or dec.failed or mismatch)
        clamped += c
    return _summarize(samples, errors, clamped, cfg.n, code.rate_x, code.rate_y)


def simulate_wz(p: JointPmf, cfg: SimConfig, rate: float | None = None) -> SimResult:
    """X with side information Y at the decoder, at the given X-rate."""
    return run_code(WynerZivCode(p, cfg.n, _rate(rate, cfg), cfg.eps, cfg.seed), p, cfg)


def simulate_rd_point(p_x, cfg: SimConfig, rate: float | None = None) -> SimResult:
    """Point-to-point source coding: the side-information-free special case."""
    q = as_dist(p_x).q
    p = JointPmf(q[:, None])
    return run_code(WynerZivCode(p, cfg.n, _rate(rate, cfg), cfg.eps, cfg.seed), p, cfg)


def simulate_jd_timeshare(p: JointPmf, cfg: SimConfig, d: float, mix: float = 0.5) -> SimResult:
    """Joint-distortion time sharing between the two corner points."""
    return run_code(JdTimeshareCode(p, cfg.n, d, mix, cfg.eps, cfg.seed), p, cfg)


def simulate_xd(p: JointPmf, a, cfg: SimConfig, dx: float) -> SimResult:
    """X-distortion scheme driven by the auxiliary channel ``a`` (AuxJoint or l x k matrix)."""
    channel = a.channel if isinstance(a, AuxJoint) else np.asarray(a, dtype=float)
    return run_code(AkwTimeshareCode(p, channel, cfg.n, dx, cfg.eps, cfg.seed), p, cfg)


def _count_in_bin(binning: BinAssignment, costs: list[np.ndarray], threshold: float, target: int) -> int:
    """Number of sequences with summed cost ``< threshold`` that land in bin ``target``.

    Positions with a single finite-cost symbol are fixed; only the rest are
    enumerated.
    """
    finite = [np.flatnonzero(np.isfinite(c)) for c in costs]
    if any(len(f) == 0 for f in finite):
        return 0
    fixed = [i for i, f in enumerate(finite) if len(f) == 1]
    free = [i for i, f in enumerate(finite) if len(f) > 1]
    base = sum(float(costs[i][finite[i][0]]) for i in fixed)
    if base >= threshold - 1e-12 and not free:
        return 0
    cands = enumerate_low_cost([costs[i] for i in free], threshold - base, strict=True)
    if binning.weights is not None:
        fixed_syms = np.array([[finite[i][0] for i in fixed]], dtype=np.int64)
        offset = binning.hash_parts(fixed_syms, np.array(fixed, dtype=np.int64))[0] if fixed else np.uint64(0)
        if free:
            h = binning.hash_parts(cands, np.array(free, dtype=np.int64))
        else:
            h = np.zeros(len(cands), dtype=np.uint64)
        with np.errstate(over="ignore"):
            bins = (h + offset) & binning.mask
    else:
        full = np.empty((len(cands), len(costs)), dtype=np.int64)
        for i in fixed:
            full[:, i] = finite[i][0]
        if free:
            full[:, free] = cands
        bins = binning.bins(full)
    return int(np.count_nonzero(bins == np.uint64(target)))


def _recovers(binning: BinAssignment, costs, threshold: float, truth) -> bool:
    """True sequence is inside the low-cost set and is alone in its bin there."""
    idx = np.arange(len(truth))
    own = float(np.sum(np.stack([c for c in costs])[idx, truth]))
    if not own < threshold - 1e-12:
        return False
    return _count_in_bin(binning, costs, threshold, binning(truth)) == 1


def simulate_smsw(p: JointPmf, cfg: SimConfig, d_split: DistortionSplit | None = None, *,
                  d: float = 0.3, mix: float = 0.5, repeats: int = 4,
                  extra_rates: tuple[float, float] | None = None) -> SimResult:
    """Lossless recovery of both sources from a joint-distortion code plus extra bins.

    The inner code is the corner time-sharing code at distortion ``d`` (or
    ``d_split.d_total``), repeated ``repeats`` times to form a block of length
    ``L = repeats * n``.  Extra bins at ``ceil(L (D_x + 3 eps))`` and
    ``ceil(L (D_{y|x} + 3 eps))`` bits let the decoder pick the unique
    ``x^L`` in its bin with ``d_x < D_x + eps``, then the unique ``y^L`` with
    ``d_{y|x} < D_{y|x} + eps``.  Anything else is a block error.
    """
    if repeats < 1:
        raise ValidationError("repeats must be at least 1")
    if d_split is not None:
        d = d_split.d_total
    inner = JdTimeshareCode(p, cfg.n, d, mix, cfg.eps, cfg.seed)
    measured = inner.expected_split()
    if d_split is None:
        d_split = measured
    elif d_split.d_x < measured.d_x - 1e-9 or d_split.d_y_given_x < measured.d_y_given_x - 1e-9:
        raise InconsistentSplit(
            f"split ({d_split.d_x:.6g}, {d_split.d_y_given_x:.6g}) is below the inner code's "
            f"({measured.d_x:.6g}, {measured.d_y_given_x:.6g})")
    big = repeats * cfg.n
    eps = cfg.eps
    if extra_rates is None:
        bx = ceil_bits(big * (d_split.d_x + 3 * eps))
        by = ceil_bits(big * (d_split.d_y_given_x + 3 * eps))
    else:
        bx, by = (ceil_bits(big * r) for r in extra_rates)
    bin_x = BinAssignment(p.m, big, bx, cfg.seed * 2 + 101)
    bin_y = BinAssignment(p.l, big, by, cfg.seed * 2 + 102)
    thr_x = big * (d_split.d_x + eps)
    thr_y = big * (d_split.d_y_given_x + eps)

    xs, ys = draw_sources(p, big, cfg.trials, cfg.seed)
    samples, errors, clamped = [], [], 0
    for x, y in zip(xs, ys):
        reps, failed, dist_sum = [], False, 0.0
        for r in range(repeats):
            seg = slice(r * cfg.n, (r + 1) * cfg.n)
            key, enc_failed = inner.encode(x[seg], y[seg])
            dec = inner.decode(key)
            dd, c, _ = score(dec, x[seg], y[seg], cfg.clamp, True)
            dist_sum += dd
            clamped += c
            failed |= enc_failed or dec.failed
            reps.append(dec.rep)
        samples.append(dist_sum / repeats)
        rep = np.concatenate(reps)
        ok = not failed and _recovers(bin_x, list(surprisal(marginal_x(rep))), thr_x, x)
        if ok:
            idx = np.arange(big)
            row = rep[idx, x, :]
            cond = row / row.sum(axis=1, keepdims=True)
            ok = _recovers(bin_y, list(surprisal(cond)), thr_y, y)
        errors.append(not ok)
    return _summarize(samples, errors, clamped, big, inner.rate_x + bx / big, inner.rate_y + by / big)


def repeat_for_peak(samples, budget: float, eps: float, repeats: int = 200) -> float:
    """Fraction of ``repeats``-long sliding windows whose mean exceeds ``budget + eps``.

    With fewer samples than ``repeats`` the single full-length window is used.
    """
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValidationError("samples must be nonempty")
    w = min(int(repeats), s.size)
    if w < 1:
        raise ValidationError("repeats must be at least 1")
    csum = np.concatenate([[0.0], np.cumsum(s)])
    means = (csum[w:] - csum[:-w]) / w
    return float(np.mean(means > budget + eps + 1e-12))


def exact_expectations(code, p: JointPmf) -> tuple[float, float]:
    """Exact mean distortion of ``code`` and of the posterior given its decoder view.

    Enumerates every source pair of the block, so only tiny blocks are
    feasible.  The second value is never larger than the first.
    """
    from itertools import product

    n = code.n
    if (p.m * p.l) ** n > 2**16:
        raise ValidationError("block too long for exhaustive expectation")
    groups: dict = {}
    scheme = 0.0
    for pairs in product(range(p.m * p.l), repeat=n):
        pairs = np.array(pairs)
        x, y = pairs // p.l, pairs % p.l
        w = float(np.prod(p.p[x, y]))
        if w == 0:
            continue
        key, _ = code.encode(x, y)
        dec = code.decode(key)
        idx = np.arange(n)
        mass = dec.rep[idx, x, y] if code.joint else dec.rep[idx, x]
        with np.errstate(invalid="ignore"):
            scheme += w * float(surprisal(mass).mean())
        groups.setdefault(key, []).append((w, x, y))
    post = 0.0
    for members in groups.values():
        shape = (n, p.m, p.l) if code.joint else (n, p.m)
        acc = np.zeros(shape)
        tot = 0.0
        for w, x, y in members:
            idx = np.arange(n)
            if code.joint:
                acc[idx, x, y] += w
            else:
                acc[idx, x] += w
            tot += w
        acc /= tot
        for w, x, y in members:
            idx = np.arange(n)
            mass = acc[idx, x, y] if code.joint else acc[idx, x]
            post += w * float(surprisal(mass).mean())
    return scheme, post


__all__ = [
    "SimConfig",
    "SimResult",
    "draw_sources",
    "exact_expectations",
    "repeat_for_peak",
    "run_code",
    "simulate_jd_timeshare",
    "simulate_rd_point",
    "simulate_smsw",
    "simulate_xd",
    "simulate_wz",
]
