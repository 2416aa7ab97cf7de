"""Finite-alphabet probability: pmfs, marginals, posteriors and entropies.

All logarithms are base 2, so every quantity is in bits.  ``0 log 0`` is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import (
    EmptyAlphabet,
    NegativeMass,
    NotNormalized,
    ValidationError,
    ZeroProbabilityCondition,
)

SUM_TOL = 1e-9
NEG_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_mass(a: np.ndarray) -> np.ndarray:
    if a.size == 0 or 0 in a.shape:
        raise EmptyAlphabet("alphabet must contain at least one symbol")
    if not np.all(np.isfinite(a)):
        raise ValidationError("probabilities must be finite")
    if np.any(a < -NEG_TOL):
        raise NegativeMass(f"entry {a.min():.3g} is negative")
    total = a.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise NotNormalized(f"entries sum to {total:.12g}, not 1")
    a = np.clip(a, 0.0, None)
    return a / a.sum()


def plogp_sum(q: np.ndarray, axis=None) -> np.ndarray:
    """``-sum q log2 q`` with the 0 log 0 = 0 convention."""
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return terms.sum(axis=axis)


@dataclass(frozen=True)
class Dist:
    """A pmf over one finite alphabet."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1:
            raise ValidationError("Dist expects a vector")
        object.__setattr__(self, "q", _readonly(_check_mass(q)))

    def __len__(self) -> int:
        return len(self.q)


def as_dist(d) -> Dist:
    return d if isinstance(d, Dist) else Dist(np.asarray(d, dtype=float))


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf ``p(x, y)``; rows index X, columns index Y."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise ValidationError("JointPmf expects an m x l matrix")
        object.__setattr__(self, "p", _readonly(_check_mass(p)))

    @property
    def m(self) -> int:
        return self.p.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.p.shape[1]

    @cached_property
    def px(self) -> np.ndarray:
        return _readonly(self.p.sum(axis=1))

    @cached_property
    def py(self) -> np.ndarray:
        return _readonly(self.p.sum(axis=0))

    @cached_property
    def h_xy(self) -> float:
        return float(plogp_sum(self.p))

    @cached_property
    def h_x(self) -> float:
        return float(plogp_sum(self.px))

    @cached_property
    def h_y(self) -> float:
        return float(plogp_sum(self.py))

    @property
    def h_x_given_y(self) -> float:
        return conditional_entropy(self, "y")

    @property
    def h_y_given_x(self) -> float:
        return conditional_entropy(self, "x")

    @cached_property
    def x_given_y(self) -> np.ndarray:
        """Column-stochastic ``p(x|y)``; zero-mass columns are left uniform."""
        return _readonly(_normalize_columns(self.p))

    @cached_property
    def y_given_x(self) -> np.ndarray:
        """``p(y|x)`` laid out as an l x m column-stochastic matrix."""
        return _readonly(_normalize_columns(self.p.T))

    def transpose(self) -> "JointPmf":
        """Swap the roles of X and Y."""
        return JointPmf(self.p.T)

    def to_list(self) -> list[list[float]]:
        return self.p.tolist()

    def __eq__(self, other) -> bool:
        return isinstance(other, JointPmf) and np.array_equal(self.p, other.p)

    def __hash__(self) -> int:
        return hash((self.p.shape, self.p.tobytes()))


def _normalize_columns(a: np.ndarray) -> np.ndarray:
    col = a.sum(axis=0)
    out = np.full_like(a, 1.0 / a.shape[0])
    nz = col > 0
    out[:, nz] = a[:, nz] / col[nz]
    return out


def validate_pmf(raw) -> JointPmf:
    """Build a :class:`JointPmf` from a nested list or array.

    Rejects negative entries (below -1e-12) and totals off by more than 1e-9;
    smaller deviations are renormalized away.
    """
    try:
        a = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"pmf must be a rectangular numeric matrix: {exc}") from None
    if a.ndim == 1 and a.size == 0:
        raise EmptyAlphabet("empty pmf")
    if a.ndim != 2:
        raise ValidationError("pmf must be a rectangular numeric matrix")
    return JointPmf(a)


def entropy(d) -> float:
    """Shannon entropy in bits."""
    return float(plogp_sum(as_dist(d).q))


def conditional_entropy(j: JointPmf, given: Literal["x", "y"] = "y") -> float:
    """``H(X|Y)`` when ``given='y'``, ``H(Y|X)`` when ``given='x'``."""
    if given == "y":
        return max(j.h_xy - j.h_y, 0.0)
    if given == "x":
        return max(j.h_xy - j.h_x, 0.0)
    raise ValidationError(f"given must be 'x' or 'y', not {given!r}")


def posterior(j: JointPmf, observed: int, axis: Literal["x", "y"] = "y") -> Dist:
    """Bayes posterior over the other coordinate after observing one symbol.

    ``axis='y'`` conditions on ``Y = observed`` and returns ``p(x|y)``.
    """
    if axis == "y":
        col = j.p[:, observed]
    elif axis == "x":
        col = j.p[observed, :]
    else:
        raise ValidationError(f"axis must be 'x' or 'y', not {axis!r}")
    mass = col.sum()
    if mass <= 0:
        raise ZeroProbabilityCondition(f"{axis}={observed} has zero probability")
    return Dist(col / mass)


@dataclass(frozen=True, eq=False)
class AuxJoint:
    """``p(x, y, u) = p(x, y) p(u|y)``: an auxiliary variable on the Y side.

    ``channel`` is an l x k row-stochastic matrix with ``k <= l + 2``.
    """

    base: JointPmf
    channel: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.channel, dtype=float)
        if c.ndim != 2 or c.shape[0] != self.base.l:
            raise ValidationError(f"channel must have {self.base.l} rows")
        if c.shape[1] > self.base.l + 2:
            raise ValidationError(f"|U| = {c.shape[1]} exceeds |Y| + 2 = {self.base.l + 2}")
        if np.any(c < -NEG_TOL):
            raise NegativeMass("channel has a negative entry")
        rows = c.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > SUM_TOL):
            raise NotNormalized("channel rows must sum to 1")
        c = np.clip(c, 0.0, None)
        object.__setattr__(self, "channel", _readonly(c / c.sum(axis=1, keepdims=True)))

    @property
    def k(self) -> int:
        return self.channel.shape[1]

    @cached_property
    def joint(self) -> np.ndarray:
        return _readonly(self.base.p[:, :, None] * self.channel[None, :, :])

    @cached_property
    def pu(self) -> np.ndarray:
        return _readonly(self.joint.sum(axis=(0, 1)))

    @cached_property
    def p_xu(self) -> np.ndarray:
        return _readonly(self.joint.sum(axis=1))

    @cached_property
    def p_yu(self) -> np.ndarray:
        return _readonly(self.joint.sum(axis=0))

    @cached_property
    def x_given_u(self) -> np.ndarray:
        """m x k column-stochastic ``p(x|u)``."""
        return _readonly(_normalize_columns(self.p_xu))

    @cached_property
    def h_u(self) -> float:
        return float(plogp_sum(self.pu))

    @cached_property
    def h_x_given_u(self) -> float:
        return max(float(plogp_sum(self.p_xu)) - self.h_u, 0.0)

    @cached_property
    def h_y_given_u(self) -> float:
        return max(float(plogp_sum(self.p_yu)) - self.h_u, 0.0)

    @cached_property
    def h_xy_given_u(self) -> float:
        return max(float(plogp_sum(self.joint)) - self.h_u, 0.0)


def mutual_information(a: AuxJoint, pair: Literal["yu", "xu"] = "yu") -> float:
    """``I(Y;U)`` or ``I(X;U)`` in bits."""
    if pair == "yu":
        return max(a.base.h_y - a.h_y_given_u, 0.0)
    if pair == "xu":
        return max(a.base.h_x - a.h_x_given_u, 0.0)
    raise ValidationError(f"pair must be 'yu' or 'xu', not {pair!r}")


def dsbs(crossover: float) -> JointPmf:
    """Doubly symmetric binary source: uniform X, Y = X flipped w.p. ``crossover``."""
    a = crossover
    return JointPmf(0.5 * np.array([[1 - a, a], [a, 1 - a]]))


def binary_entropy(a: float) -> float:
    return entropy([a, 1 - a])
