"""Finite-blocklength codes built from lossless binning plus soft posterior output.

Every code exposes the same small interface:

* ``encode(x, y) -> (key, failed)``: ``key`` is everything the decoder sees
  (messages plus any decoder side information), hashable; ``failed`` flags
  an encoder that found nothing typical.
* ``decode(key) -> Decoding``: the soft reproduction sequence and the source
  symbols the decoder claims to have recovered exactly.
* ``rate_x``, ``rate_y``: realized rates, ``log2(message set size) / n``.

Binned positions are reproduced by the exact posterior marginals over the
received bin given the decoder's side information.  When the bin pins the
sequence down this is a point mass; when it does not, the output stays soft
instead of committing to a maximum-likelihood guess that may be wrong.  The
maximum-likelihood guess is still formed and decides block errors.

Time sharing happens across positions inside one block.  The number of
positions run in posterior ("soft") mode is the nearest integer to its
target, apportioned across time-sharing portions by largest remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import floor, log2

import numpy as np

from ..discrete import AuxJoint, JointPmf, mutual_information, plogp_sum
from ..errors import EnumerationTooLarge, ValidationError
from ..logloss import DistortionSplit
from .binning import BinAssignment, BinDecoder, TypicalIndex, ceil_bits

CODEBOOK_GUARD = 2**20


@dataclass
class Decoding:
    rep: np.ndarray
    x_hat: np.ndarray
    y_hat: np.ndarray
    failed: bool = False


def _log2(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(a)


def round_half_up(t: float) -> int:
    return int(floor(t + 0.5 + 1e-12))


def apportion(targets: list[float], caps: list[int]) -> list[int]:
    """Integers with sum ``round(sum(targets))``, each ``floor`` or ``ceil`` of its target.

    Largest remainders get the extra units; ties go to the earlier entry.
    """
    total = min(round_half_up(sum(targets)), sum(caps))
    base = [min(int(floor(t + 1e-12)), c) for t, c in zip(targets, caps)]
    left = total - sum(base)
    order = sorted(range(len(targets)), key=lambda j: (-(targets[j] - floor(targets[j] + 1e-12)), j))
    for j in order:
        if left <= 0:
            break
        if base[j] < caps[j]:
            base[j] += 1
            left -= 1
    return base


def _lossless_bits(k: int, rate: float, alphabet: int) -> int:
    """``ceil(k * rate)`` bits, never more than it takes to index every sequence."""
    if k == 0:
        return 0
    return min(ceil_bits(k * rate), ceil_bits(k * log2(alphabet)) if alphabet > 1 else 0)


def _check_table(alphabet: int, k: int):
    if alphabet**k > 2**20:
        raise EnumerationTooLarge(f"{alphabet}^{k} sequences exceed the 2^20 enumeration guard")


class WynerZivCode:
    """X with decoder side information Y, time-sharing lossless binning and posterior output.

    A prefix of ``k`` positions is Slepian-Wolf binned at rate ``H(X|Y) + eps``
    and decoded inside the bin; the remaining positions
    get the posterior ``p(x|y_i)`` and no rate.  Reproductions are over X.
    """

    joint = False

    def __init__(self, p: JointPmf, n: int, rate: float, eps: float, seed: int = 0):
        if n < 1 or rate < 0 or eps <= 0:
            raise ValidationError("need n >= 1, rate >= 0, eps > 0")
        self.p, self.n, self.eps = p, n, eps
        h = p.h_x_given_y
        frac = 1.0 if h + eps <= 0 else min(1.0, rate / (h + eps))
        self.soft = min(n, round_half_up(n * (1.0 - frac)))
        self.k = n - self.soft
        _check_table(p.m, self.k)
        self.bits = _lossless_bits(self.k, h + eps, p.m)
        self.binning = BinAssignment(p.m, self.k, self.bits, seed)
        self.post = p.x_given_y  # m x l
        self.bin_decoder = BinDecoder(self.binning, _log2(self.post)) if self.k else None
        self.rate_x = self.bits / n
        self.rate_y = 0.0

    def encode(self, x, y):
        b = self.binning(x[: self.k]) if self.k else 0
        return (b, tuple(int(v) for v in y)), False

    def decode(self, key) -> Decoding:
        b, y = key
        y = np.asarray(y)
        rep = self.post[:, y].T.copy()
        x_hat = np.full(self.n, -1)
        failed = False
        if self.k:
            got, marg = self.bin_decoder.decode_soft(b, y[: self.k], self.p.m)
            if marg is not None:
                rep[: self.k] = marg
            if got is None:
                failed = True
            else:
                x_hat[: self.k] = got
        return Decoding(rep, x_hat, np.full(self.n, -1), failed)


@dataclass
class _Portion:
    start: int
    stop: int
    leader: str  # "x" or "y"
    case: str  # "follower" (leader lossless), "leader" (follower soft), "prior"
    target: float
    soft: int = 0
    leader_index: TypicalIndex | None = field(default=None, repr=False)
    follower_bins: BinAssignment | None = field(default=None, repr=False)
    follower_decoder: BinDecoder | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.stop - self.start


class JdTimeshareCode:
    """Time sharing between the two corner points of the joint-distortion region.

    The first ``floor(mix * n)`` positions run corner ``P1`` (Y is the leader,
    sent losslessly through a typical-set index; X follows with Wyner-Ziv
    binning against Y).  The rest run ``P2`` with the roles swapped.  Past the
    follower's conditional entropy the follower goes fully soft and the
    leader's own rate is cut instead; past ``H(X,Y)`` everything is the prior.
    """

    joint = True

    def __init__(self, p: JointPmf, n: int, d: float, mix: float, eps: float, seed: int = 0):
        if n < 1 or d < 0 or eps <= 0 or not 0.0 <= mix <= 1.0:
            raise ValidationError("need n >= 1, d >= 0, eps > 0 and 0 <= mix <= 1")
        self.p, self.n, self.d, self.mix, self.eps = p, n, d, mix, eps
        n1 = int(floor(mix * n + 1e-12))
        self.portions = [pt for pt in (self._plan(0, n1, "y"), self._plan(n1, n, "x")) if pt.size]
        counts = apportion([pt.target for pt in self.portions], [pt.size for pt in self.portions])
        bits_x = bits_y = 0
        for j, (pt, s) in enumerate(zip(self.portions, counts)):
            pt.soft = s
            b_lead, b_follow = self._build(pt, seed * 4 + j)
            if pt.leader == "y":
                bits_y += b_lead
                bits_x += b_follow
            else:
                bits_x += b_lead
                bits_y += b_follow
        self.rate_x = bits_x / n
        self.rate_y = bits_y / n

    def _oriented(self, leader: str):
        """(p(follower, leader) matrix, H(F|L), H(L))."""
        p = self.p
        if leader == "y":
            return p.p, p.h_x_given_y, p.h_y
        return p.p.T, p.h_y_given_x, p.h_x

    def _plan(self, start: int, stop: int, leader: str) -> _Portion:
        _, h_fl, h_l = self._oriented(leader)
        size = stop - start
        d, eps = self.d, self.eps
        if d <= h_fl:
            rate = h_fl - d
            soft_frac = 1.0 - min(1.0, rate / (h_fl + eps))
            return _Portion(start, stop, leader, "follower", size * soft_frac)
        if d < self.p.h_xy:
            rate = h_l - (d - h_fl)
            soft_frac = 1.0 - min(1.0, rate / (h_l + eps))
            return _Portion(start, stop, leader, "leader", size * soft_frac)
        return _Portion(start, stop, leader, "prior", float(size))

    def _build(self, pt: _Portion, seed: int) -> tuple[int, int]:
        pfl, h_fl, _ = self._oriented(pt.leader)
        f_alpha, l_alpha = pfl.shape
        p_l = pfl.sum(axis=0)
        if pt.case == "prior":
            pt.soft = pt.size
            return 0, 0
        lossless_lead = pt.size if pt.case == "follower" else pt.size - pt.soft
        _check_table(l_alpha, lossless_lead)
        pt.leader_index = TypicalIndex(p_l, lossless_lead, self.eps)
        b_follow = 0
        if pt.case == "follower":
            k = pt.size - pt.soft
            _check_table(f_alpha, k)
            b_follow = _lossless_bits(k, h_fl + self.eps, f_alpha)
            pt.follower_bins = BinAssignment(f_alpha, k, b_follow, seed)
            if k:
                cond = pfl / np.where(p_l > 0, p_l, 1.0)[None, :]
                pt.follower_decoder = BinDecoder(pt.follower_bins, _log2(cond))
        return pt.leader_index.bits, b_follow

    def _lead_follow(self, pt: _Portion, x, y):
        seg = slice(pt.start, pt.stop)
        return (y[seg], x[seg]) if pt.leader == "y" else (x[seg], y[seg])

    def encode(self, x, y):
        key, failed = [], False
        for pt in self.portions:
            if pt.case == "prior":
                key.append((None, None))
                continue
            lead, follow = self._lead_follow(pt, x, y)
            a = pt.leader_index.length
            idx = pt.leader_index.encode(lead[:a]) if a else 0
            failed |= idx is None
            b = pt.follower_bins(follow[: pt.size - pt.soft]) if pt.follower_decoder else 0
            key.append((idx, b))
        return tuple(key), failed

    def decode(self, key) -> Decoding:
        p = self.p
        rep = np.broadcast_to(p.p, (self.n, p.m, p.l)).copy()
        x_hat = np.full(self.n, -1)
        y_hat = np.full(self.n, -1)
        failed = False
        for pt, (idx, b) in zip(self.portions, key):
            if pt.case == "prior":
                continue
            if idx is None:
                failed = True
                continue
            pfl, _, _ = self._oriented(pt.leader)
            p_l = pfl.sum(axis=0)
            cond = pfl / np.where(p_l > 0, p_l, 1.0)[None, :]
            a = pt.leader_index.length
            lead = pt.leader_index.decode(idx) if a else np.zeros(0, dtype=int)
            k = pt.size - pt.soft if pt.case == "follower" else 0
            follow = marg = None
            if k:
                follow, marg = pt.follower_decoder.decode_soft(b, lead[:k], pfl.shape[0])
                failed |= follow is None
            lead_hat, follow_hat = (y_hat, x_hat) if pt.leader == "y" else (x_hat, y_hat)
            for j in range(a):
                i = pt.start + j
                soft_f = cond[:, lead[j]]
                if marg is not None and j < k:
                    soft_f = marg[j]
                if follow is not None and j < k:
                    follow_hat[i] = follow[j]
                lead_hat[i] = lead[j]
                z = np.zeros((p.m, p.l))
                if pt.leader == "y":
                    z[:, lead[j]] = soft_f
                else:
                    z[lead[j], :] = soft_f
                rep[i] = z
        return Decoding(rep, x_hat, y_hat, failed)

    def expected_split(self) -> DistortionSplit:
        """Expected ``(D, D_x, D_{y|x})`` per letter when nothing fails."""
        p = self.p
        dx = dyx = 0.0
        for pt in self.portions:
            if pt.case == "prior":
                dx += pt.size * p.h_x
                dyx += pt.size * p.h_y_given_x
                continue
            lossless_lead = pt.leader_index.length
            soft_follow = pt.soft if pt.case == "follower" else lossless_lead
            prior_pos = pt.size - lossless_lead
            if pt.leader == "y":
                dx += soft_follow * p.h_x_given_y
            else:
                dyx += soft_follow * p.h_y_given_x
            dx += prior_pos * p.h_x
            dyx += prior_pos * p.h_y_given_x
        dx /= self.n
        dyx /= self.n
        return DistortionSplit(dx + dyx, dx, dyx)


class AkwTimeshareCode:
    """X-distortion code: helper codebook for Y plus time-shared binning of X.

    The Y-encoder sends the index of the first codeword (i.i.d. ``p(u)``) that
    is jointly typical with ``y^n``; failing that, the codeword with highest
    likelihood, and the block counts as an encoding failure.  X is binned at
    rate ``H(X|U) + 2 eps`` on a prefix and left to the posterior ``p(x|u_i)``
    elsewhere.
    """

    joint = False

    def __init__(self, p: JointPmf, channel: np.ndarray, n: int, dx: float, eps: float,
                 seed: int = 0):
        if n < 1 or dx < 0 or eps <= 0:
            raise ValidationError("need n >= 1, dx >= 0, eps > 0")
        self.p, self.n, self.eps = p, n, eps
        self.aux = aux = AuxJoint(p, channel)
        self.h_xu = aux.h_x_given_u
        self.i_yu = mutual_information(aux, "yu")
        self.bits_y = ceil_bits(n * (self.i_yu + eps))
        if 2**self.bits_y > CODEBOOK_GUARD:
            raise EnumerationTooLarge(f"codebook of 2^{self.bits_y} words exceeds the 2^20 guard")
        rng = np.random.default_rng([seed, 0xC0DE])
        self.codebook = rng.choice(aux.k, size=(2**self.bits_y, n), p=aux.pu)
        self.log_pu = _log2(aux.pu)
        self.log_pyu = _log2(aux.p_yu)
        self.log_py = _log2(p.py)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.log_y_given_u = _log2(aux.p_yu / np.where(aux.pu > 0, aux.pu, 1.0)[None, :])
        self.h_u = aux.h_u
        self.h_yu = float(plogp_sum(aux.p_yu))
        emp_u = -self.log_pu[self.codebook].mean(axis=1)
        self.u_typical = np.flatnonzero(np.abs(emp_u - self.h_u) <= eps + 1e-12)

        if self.h_xu <= 0 or dx >= self.h_xu:
            self.soft = n
        else:
            self.soft = min(n, round_half_up(n * dx / self.h_xu))
        self.k = n - self.soft
        _check_table(p.m, self.k)
        self.bits_x = _lossless_bits(self.k, self.h_xu + 2 * eps, p.m)
        self.binning = BinAssignment(p.m, self.k, self.bits_x, seed)
        self.post = aux.x_given_u  # m x |U|
        self.bin_decoder = BinDecoder(self.binning, _log2(self.post)) if self.k else None
        self.rate_x = self.bits_x / n
        self.rate_y = self.bits_y / n

    def encode_y(self, y) -> tuple[int, bool]:
        y = np.asarray(y)
        emp_y = -self.log_py[y].mean()
        if abs(emp_y - self.p.h_y) <= self.eps + 1e-12 and len(self.u_typical):
            cb = self.codebook[self.u_typical]
            with np.errstate(invalid="ignore"):
                emp_yu = -self.log_pyu[y[None, :], cb].mean(axis=1)
            hit = np.flatnonzero(np.abs(emp_yu - self.h_yu) <= self.eps + 1e-12)
            if len(hit):
                return int(self.u_typical[hit[0]]), False
        ll = self.log_y_given_u[y[None, :], self.codebook].sum(axis=1)
        return int(np.argmax(ll)) if np.isfinite(ll).any() else 0, True

    def encode(self, x, y):
        j, failed = self.encode_y(y)
        b = self.binning(x[: self.k]) if self.k else 0
        return (b, j), failed

    def decode(self, key) -> Decoding:
        b, j = key
        u = self.codebook[j]
        rep = self.post[:, u].T.copy()
        x_hat = np.full(self.n, -1)
        failed = False
        if self.k:
            got, marg = self.bin_decoder.decode_soft(b, u[: self.k], self.p.m)
            if marg is not None:
                rep[: self.k] = marg
            if got is None:
                failed = True
            else:
                x_hat[: self.k] = got
        return Decoding(rep, x_hat, np.full(self.n, -1), failed)
