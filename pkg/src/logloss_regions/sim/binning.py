"""Random binning, typical-set indexing and in-bin decoding over short blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log2

import numpy as np

from ..errors import EnumerationTooLarge

TABLE_GUARD = 2**20


def ceil_bits(x: float) -> int:
    """``ceil(x)`` that ignores float fuzz just above an integer."""
    return max(0, int(ceil(x - 1e-9)))


def sequence_index(seqs: np.ndarray, base: int) -> np.ndarray:
    """Mixed-radix index of each row (first position most significant)."""
    seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
    weights = base ** np.arange(seqs.shape[1] - 1, -1, -1, dtype=np.int64)
    return seqs @ weights


def all_sequences(base: int, length: int) -> np.ndarray:
    """Every length-``length`` sequence over ``range(base)``, in index order."""
    count = base**length
    if count > TABLE_GUARD:
        raise EnumerationTooLarge(f"{base}^{length} sequences exceed the 2^20 guard")
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, length), dtype=np.int64)
    for j in range(length - 1, -1, -1):
        out[:, j] = idx % base
        idx //= base
    return out


@dataclass(eq=False)
class BinAssignment:
    """Seeded map from sequences in ``range(alphabet)^length`` to ``2^bits`` bins.

    Small spaces (at most 2^20 sequences) get a *balanced* random binning: a
    seeded permutation of the space dealt round-robin into the bins, so bin
    sizes differ by at most one.  Larger spaces use the universal hash
    ``sum_i W[i, s_i] mod 2^bits`` with i.i.d. uniform 64-bit ``W``, which is
    pairwise independent.
    """

    alphabet: int
    length: int
    bits: int
    seed: int
    table: np.ndarray | None = field(init=False, repr=False)
    weights: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng([self.seed, 0xB1])
        self.bits = min(int(self.bits), 64)
        if self.alphabet**self.length <= TABLE_GUARD:
            perm = rng.permutation(self.alphabet**self.length)
            self.table = (perm % self.bin_count).astype(np.uint64) if self.bits < 64 else perm.astype(np.uint64)
            self.weights = None
        else:
            self.table = None
            self.weights = rng.integers(0, 2**64, size=(self.length, self.alphabet),
                                        dtype=np.uint64, endpoint=False)

    @property
    def bin_count(self) -> int:
        return 2**self.bits

    @property
    def mask(self) -> np.uint64:
        return np.uint64(2**64 - 1) if self.bits >= 64 else np.uint64(self.bin_count - 1)

    def bins(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        if self.table is not None:
            return self.table[sequence_index(seqs, self.alphabet)]
        return self.hash_parts(seqs, np.arange(self.length)) & self.mask

    def hash_parts(self, symbols: np.ndarray, positions: np.ndarray) -> np.ndarray:
        """Unmasked hash contribution of ``symbols`` placed at ``positions``."""
        if self.weights is None:
            raise TypeError("partial hashes exist only in hash mode")
        symbols = np.atleast_2d(symbols)
        with np.errstate(over="ignore"):
            return self.weights[positions, symbols].sum(axis=1, dtype=np.uint64)

    def __call__(self, seq) -> int:
        return int(self.bins(seq)[0])


@dataclass(eq=False)
class BinDecoder:
    """Maximum-likelihood search inside one bin of a tabulated binning.

    ``log_channel[s, c]`` is ``log2 p(s | c)`` for source symbol ``s`` and
    decoder-side symbol ``c``.  Exact likelihood ties are a decoding failure.
    """

    binning: BinAssignment
    log_channel: np.ndarray
    members: np.ndarray = field(init=False, repr=False)
    starts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        seqs = all_sequences(self.binning.alphabet, self.binning.length)
        bins = self.binning.bins(seqs)
        order = np.argsort(bins, kind="stable")
        self.members = seqs[order]
        self.starts = np.searchsorted(bins[order], np.arange(self.binning.bin_count + 1, dtype=np.uint64))

    def fiber(self, b: int) -> np.ndarray:
        return self.members[self.starts[b]:self.starts[b + 1]]

    def log_likelihoods(self, cands: np.ndarray, side: np.ndarray) -> np.ndarray:
        pos = np.arange(cands.shape[1])
        return self.log_channel[cands, side[pos]].sum(axis=1)

    def decode(self, b: int, side: np.ndarray) -> np.ndarray | None:
        cands = self.fiber(b)
        if len(cands) == 0:
            return None
        if len(cands) == 1:
            return cands[0]
        ll = self.log_likelihoods(cands, side)
        top = ll.max()
        winners = np.flatnonzero(ll >= top - 1e-12)
        if len(winners) != 1 or not np.isfinite(top):
            return None
        return cands[winners[0]]

    def posterior_marginals(self, b: int, side: np.ndarray, symbols: int) -> np.ndarray:
        """Per-position ``Pr(s_i | bin, side)`` under the source model, (length, symbols)."""
        return self.decode_soft(b, side, symbols)[1]

    def decode_soft(self, b: int, side: np.ndarray, symbols: int):
        """(ML sequence or ``None``, per-position posterior marginals over the bin).

        The marginals are ``None`` too when no member of the bin is possible.
        """
        cands = self.fiber(b)
        if len(cands) == 0:
            return None, None
        ll = self.log_likelihoods(cands, side)
        top = ll.max()
        if not np.isfinite(top):
            return None, None
        winners = np.flatnonzero(ll >= top - 1e-12)
        best = cands[winners[0]] if len(winners) == 1 else None
        w = np.exp2(ll - top)
        w /= w.sum()
        out = np.zeros((cands.shape[1], symbols))
        for i in range(cands.shape[1]):
            np.add.at(out[i], cands[:, i], w)
        return best, out


@dataclass(eq=False)
class TypicalIndex:
    """Lossless fixed-rate code: index into the weakly typical set.

    Atypical sequences are sent as an escape index (only reserved when the
    typical set is not already the whole space) and count as an encoding
    failure.
    """

    marginal: np.ndarray
    length: int
    eps: float
    typical: np.ndarray = field(init=False, repr=False)
    lookup: dict = field(init=False, repr=False)

    def __post_init__(self):
        q = np.asarray(self.marginal, dtype=float)
        seqs = all_sequences(len(q), self.length)
        if self.length == 0:
            self.typical = seqs
        else:
            with np.errstate(divide="ignore"):
                logq = np.log2(q)
            h = float(-(q[q > 0] * logq[q > 0]).sum())
            emp = -logq[seqs].mean(axis=1)
            self.typical = seqs[np.abs(emp - h) <= self.eps + 1e-12]
        idx = sequence_index(self.typical, len(q)) if len(self.typical) else np.zeros(0, dtype=np.int64)
        self.lookup = {int(v): i for i, v in enumerate(idx)}
        self._full = len(self.typical) == len(q) ** self.length

    @property
    def codebook_size(self) -> int:
        return len(self.typical) + (0 if self._full else 1)

    @property
    def bits(self) -> int:
        return ceil_bits(log2(self.codebook_size)) if self.codebook_size > 1 else 0

    def encode(self, seq: np.ndarray) -> int | None:
        """Index of ``seq`` or ``None`` when it is atypical."""
        return self.lookup.get(int(sequence_index(seq, len(self.marginal))[0]))

    def decode(self, index: int) -> np.ndarray:
        return self.typical[index]
