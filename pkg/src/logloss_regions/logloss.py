"""Logarithmic-loss distortion and the estimators that minimize it.

A reproduction is a point on a probability simplex: over X x Y for the joint
measure, over X alone for the X-only measure.  Distortion is the surprisal,
in bits, that the reproduction assigns to what actually happened.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from .discrete import AuxJoint, Dist, as_dist, entropy, _check_mass, _readonly
from .errors import (
    BudgetOutOfRange,
    EnumerationTooLarge,
    LengthMismatch,
    SupportMismatch,
    ValidationError,
    ZeroMassAtRealization,
    ZeroProbabilityCondition,
)

ENUM_GUARD = 2**24


def surprisal(q) -> np.ndarray:
    """Elementwise ``log2(1/q)``; zero mass maps to ``inf``."""
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.log2(q)


@dataclass(frozen=True)
class Reproduction:
    """Soft reproduction symbol: an m x l matrix (joint) or an m-vector (X only)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim not in (1, 2):
            raise ValidationError("reproduction must be a vector or a matrix")
        object.__setattr__(self, "q", _readonly(_check_mass(q)))

    @property
    def joint(self) -> bool:
        return self.q.ndim == 2


@dataclass(frozen=True)
class ReproductionSeq:
    """Length-n sequence of reproductions stacked as an (n, m[, l]) array."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim not in (2, 3) or q.shape[0] < 1:
            raise ValidationError("reproduction sequence must be (n, m) or (n, m, l) with n >= 1")
        flat = q.reshape(q.shape[0], -1)
        if np.any(flat < -1e-12) or np.any(np.abs(flat.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("every reproduction must lie on the simplex")
        object.__setattr__(self, "q", _readonly(np.clip(q, 0.0, None)))

    @classmethod
    def of(cls, items: Sequence[Reproduction]) -> "ReproductionSeq":
        kinds = {r.joint for r in items}
        if len(kinds) != 1:
            raise SupportMismatch("mixed joint and X-only reproductions")
        return cls(np.stack([r.q for r in items]))

    @property
    def joint(self) -> bool:
        return self.q.ndim == 3

    def __len__(self) -> int:
        return self.q.shape[0]

    def __getitem__(self, i: int) -> Reproduction:
        return Reproduction(self.q[i])


def _as_seq(rs) -> ReproductionSeq:
    return rs if isinstance(rs, ReproductionSeq) else ReproductionSeq(rs)


def symbol_distortion(x: int, y: int | None, r: Reproduction) -> float:
    """``log2 1/r(x, y)`` (joint) or ``log2 1/r(x)`` (X only); ``inf`` on zero mass."""
    if r.joint != (y is not None):
        raise SupportMismatch("joint reproductions need y; X-only reproductions must not get one")
    mass = r.q[x, y] if r.joint else r.q[x]
    return float(surprisal(mass))


def sequence_distortion(xs, ys, rs) -> float:
    """Per-letter average of :func:`symbol_distortion`."""
    rs = _as_seq(rs)
    xs = np.asarray(xs, dtype=int)
    if len(xs) != len(rs) or (ys is not None and len(ys) != len(rs)):
        raise LengthMismatch("source and reproduction lengths differ")
    if rs.joint != (ys is not None):
        raise SupportMismatch("joint reproductions need ys; X-only reproductions must not get them")
    idx = np.arange(len(rs))
    mass = rs.q[idx, xs, np.asarray(ys, dtype=int)] if rs.joint else rs.q[idx, xs]
    return float(surprisal(mass).mean())


def _xyu(a) -> np.ndarray:
    if isinstance(a, AuxJoint):
        return a.joint
    t = np.asarray(a, dtype=float)
    if t.ndim != 3:
        raise ValidationError("expected an AuxJoint or an (m, l, k) joint tensor")
    return _check_mass(t)


def optimal_estimator(a, u: int) -> Reproduction:
    """Exact posterior ``Pr(X=x, Y=y | U=u)``: the distortion-minimizing soft output."""
    t = _xyu(a)
    slab = t[:, :, u]
    mass = slab.sum()
    if mass <= 0:
        raise ZeroProbabilityCondition(f"u={u} has zero probability")
    return Reproduction(slab / mass)


def expected_distortion(a, estimator: Mapping[int, Reproduction] | np.ndarray | None = None) -> float:
    """Exact ``E log2 1/zhat[U](X, Y)`` for the posterior or a supplied estimator.

    ``estimator`` may map each ``u`` to a :class:`Reproduction`, or be a (k, m, l)
    array.  With the posterior (``None``) the result is ``H(X, Y | U)``.
    """
    t = _xyu(a)
    k = t.shape[2]
    pu = t.sum(axis=(0, 1))
    total = 0.0
    for u in range(k):
        if pu[u] <= 0:
            continue
        slab = t[:, :, u]
        if estimator is None:
            z = slab / pu[u]
        elif isinstance(estimator, np.ndarray):
            z = estimator[u]
        else:
            z = estimator[u].q
        z = np.asarray(z, dtype=float)
        if z.shape != slab.shape:
            raise SupportMismatch("estimator output must be an m x l reproduction")
        live = slab > 0
        if np.any(z[live] <= 0):
            return float("inf")
        total += float(np.sum(slab[live] * surprisal(z[live])))
    return total


@dataclass(frozen=True)
class DistortionSplit:
    """Total distortion split as marginal plus conditional part."""

    d_total: float
    d_x: float
    d_y_given_x: float

    def __post_init__(self):
        if min(self.d_total, self.d_x, self.d_y_given_x) < -1e-12:
            raise ValidationError("distortion components must be nonnegative")
        if abs(self.d_total - self.d_x - self.d_y_given_x) > 1e-9:
            raise ValidationError("components must add up to the total")


def marginal_x(rs) -> np.ndarray:
    """X-marginals of a joint reproduction sequence, shape (n, m)."""
    return _as_seq(rs).q.sum(axis=2)


def decompose_distortion(rs, xs, ys, order: Literal["x", "y"] = "x") -> DistortionSplit:
    """Split ``d(x^n, y^n, zhat^n)`` as ``d_x + d_{y|x}`` via ``zhat(x) zhat(y|x)``.

    ``order='y'`` gives ``d_y + d_{x|y}`` instead, still reported in the
    ``d_x`` / ``d_y_given_x`` slots (first factor, then conditional).
    """
    rs = _as_seq(rs)
    if not rs.joint:
        raise SupportMismatch("decomposition needs joint reproductions")
    xs = np.asarray(xs, dtype=int)
    ys = np.asarray(ys, dtype=int)
    if not (len(xs) == len(ys) == len(rs)):
        raise LengthMismatch("source and reproduction lengths differ")
    q = rs.q if order == "x" else np.swapaxes(rs.q, 1, 2)
    first, second = (xs, ys) if order == "x" else (ys, xs)
    idx = np.arange(len(rs))
    pair = q[idx, first, second]
    if np.any(pair <= 0):
        raise ZeroMassAtRealization("reproduction gives zero mass to a realized pair")
    marg = q.sum(axis=2)[idx, first]
    d_first = float(surprisal(marg).mean())
    d_cond = float(surprisal(pair / marg).mean())
    return DistortionSplit(d_first + d_cond, d_first, d_cond)


def enumerate_low_cost(costs: Sequence[np.ndarray], threshold: float, *, strict: bool = False,
                       limit: int = ENUM_GUARD) -> np.ndarray:
    """All symbol sequences whose summed per-position cost stays under ``threshold``.

    ``costs[i][s]`` is the nonnegative cost of symbol ``s`` at position ``i``.
    Partial sums only grow, so branches are pruned as soon as they cross the
    threshold; the result is exactly the exhaustive answer.  Rows come out in
    lexicographic order.
    """
    tol = 1e-12
    seqs = np.zeros((1, 0), dtype=np.int64)
    acc = np.zeros(1)
    for c in costs:
        c = np.asarray(c, dtype=float)
        ok = np.flatnonzero(np.isfinite(c))
        tot = acc[:, None] + c[ok][None, :]
        keep = tot < threshold - tol if strict else tot <= threshold + tol
        rows, cols = np.nonzero(keep)
        if len(rows) > limit:
            raise EnumerationTooLarge(f"more than {limit} partial sequences")
        seqs = np.concatenate([seqs[rows], ok[cols][:, None]], axis=1)
        acc = tot[rows, cols]
    return seqs


def distortion_typical_set(rs, budget: float, eps: float,
                           kind: Literal["joint", "marginal-x", "conditional-y-given-x"] = "joint",
                           xs=None) -> frozenset:
    """Source sequences within ``budget + eps`` bits of per-letter distortion.

    Joint kind returns ``(x_tuple, y_tuple)`` pairs; the marginal kind returns
    X tuples; the conditional kind returns Y tuples and needs the conditioning
    ``xs`` (distortion of ``y_i`` is measured against ``zhat_i(y | x_i)``).
    """
    rs = _as_seq(rs)
    n = len(rs)
    q = rs.q
    if kind == "joint":
        if not rs.joint:
            raise SupportMismatch("joint kind needs joint reproductions")
        m, l = q.shape[1:]
        space = (m * l) ** n
        costs = [surprisal(q[i].ravel()) for i in range(n)]
    elif kind == "marginal-x":
        marg = q.sum(axis=2) if rs.joint else q
        space = marg.shape[1] ** n
        costs = [surprisal(marg[i]) for i in range(n)]
    elif kind == "conditional-y-given-x":
        if not rs.joint or xs is None:
            raise ValidationError("conditional kind needs joint reproductions and xs")
        xs = np.asarray(xs, dtype=int)
        if len(xs) != n:
            raise LengthMismatch("xs length differs from reproduction length")
        space = q.shape[2] ** n
        costs = []
        for i in range(n):
            row = q[i, xs[i], :]
            if row.sum() <= 0:
                raise ZeroMassAtRealization(f"zhat_{i}(x_i) is zero; conditional undefined")
            costs.append(surprisal(row / row.sum()))
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    if space > ENUM_GUARD:
        raise EnumerationTooLarge(f"{space} sequences exceed the 2^24 enumeration guard")
    seqs = enumerate_low_cost(costs, n * (budget + eps))
    if kind == "joint":
        l = q.shape[2]
        return frozenset((tuple(int(s) for s in row // l), tuple(int(s) for s in row % l)) for row in seqs)
    return frozenset(tuple(int(s) for s in row) for row in seqs)


def erasure_rd(d, budget: float) -> float:
    """``(1 - budget) H``: rate of erasing a uniformly chosen ``budget`` fraction of letters.

    Under the erasure measure this is the rate-distortion function for a
    uniform source.  For a skewed source it is only an upper bound: erasing
    the likelier symbols more often makes the erased letters closer to
    uniform and lowers the rate.
    """
    if not 0.0 <= budget <= 1.0:
        raise BudgetOutOfRange(f"erasure budget must lie in [0, 1], got {budget}")
    return (1.0 - budget) * entropy(as_dist(d))


__all__ = [
    "Dist",
    "DistortionSplit",
    "Reproduction",
    "ReproductionSeq",
    "decompose_distortion",
    "distortion_typical_set",
    "enumerate_low_cost",
    "erasure_rd",
    "expected_distortion",
    "marginal_x",
    "optimal_estimator",
    "sequence_distortion",
    "surprisal",
    "symbol_distortion",
]
