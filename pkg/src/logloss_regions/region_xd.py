"""X-distortion region: ``Rx + Dx >= H(X|U)``, ``Ry >= I(Y;U)`` for some ``p(u|y)``.

The boundary function ``g(R) = min {H(X|U) : I(Y;U) <= R}`` is computed in
three stages:

1. Alternating minimization of ``H(X|U) + lam * I(Y;U)`` (the information
   bottleneck functional) from many seeded random starts, over a sweep of
   ``lam`` plus a bisection that aims ``I(Y;U)`` at the requested budget.
2. Every cluster produced along the way is kept as an *atom*: a posterior
   ``p(y|u)`` with its entropy ``H(Y|U=u)`` and cost ``H(X|U=u)``.
3. A small linear program mixes atoms under the constraint that they average
   back to ``p(y)``.  This is the lower convex envelope of everything the
   solver saw, and a basic optimal solution uses at most ``|Y| + 1`` atoms,
   so the result is again a channel within the cardinality bound.

The problem is nonconvex; the value returned is an achievable upper bound on
``g``, exact at both endpoints.  :func:`xd_grid_oracle` is an independent
exhaustive check on small alphabets.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import linprog

from .discrete import AuxJoint, JointPmf, mutual_information, plogp_sum
from .errors import GridTooLarge, NonConvergenceWarning, ValidationError

LN2 = np.log(2.0)
BETA_SWEEP = np.logspace(0.0, 3.0, 25)
MAX_ITER = 2000
REL_TOL = 1e-10
GRID_GUARD = 10**8


@dataclass(frozen=True)
class XdQuery:
    rx: float
    ry: float
    dx: float


@dataclass(frozen=True, eq=False)
class XdSolution:
    """Achievable upper bound on ``g(budget)`` with the channel attaining it."""

    budget: float
    value: float
    rate: float
    channel: np.ndarray
    converged: bool


@dataclass(frozen=True)
class CurvePoint:
    ry_budget: float
    min_h_x_given_u: float
    channel: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class TradeoffCurve:
    points: tuple[CurvePoint, ...]

    def budgets(self) -> np.ndarray:
        return np.array([pt.ry_budget for pt in self.points])

    def values(self) -> np.ndarray:
        return np.array([pt.min_h_x_given_u for pt in self.points])


# --- alternating minimization -------------------------------------------------

def _init_channels(l: int, k: int, restarts: int, seed: int) -> np.ndarray:
    return np.stack([
        np.random.default_rng([seed, r]).dirichlet(np.ones(k), size=l) for r in range(restarts)
    ])


def _objective(p: JointPmf, c: np.ndarray, lam: float):
    """Batched ``H(X|U) + lam I(Y;U)`` in bits; also returns ``I(Y;U)``."""
    pyu = p.py[None, :, None] * c
    pu = pyu.sum(axis=1)
    pxu = np.einsum("xy,ryk->rxk", p.p, c)
    h_u = plogp_sum(pu, axis=1)
    h_xgu = plogp_sum(pxu, axis=(1, 2)) - h_u
    i_yu = h_u - (plogp_sum(pyu, axis=(1, 2)) - plogp_sum(p.py))
    return h_xgu + lam * i_yu, i_yu


def alternating_minimization(p: JointPmf, beta: float, inits: np.ndarray,
                             max_iter: int = MAX_ITER, rel_tol: float = REL_TOL):
    """Bottleneck iterations for ``min H(X|U) + I(Y;U)/beta`` on a batch of starts.

    Each step recomputes ``p(u)`` and ``p(x|u)`` from the channel and then
    re-tilts ``p(u|y) ~ p(u) exp(-beta KL(p(x|y) || p(x|u)))``.  Returns the
    final channels, their objectives, rates ``I(Y;U)`` and per-start
    convergence flags.
    """
    lam = 1.0 / beta
    c = np.array(inits, dtype=float)
    pxy = p.x_given_y  # m x l
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pxy = np.where(pxy > 0, np.log(pxy), 0.0)
    neg_h = (pxy * log_pxy).sum(axis=0)  # sum_x p(x|y) ln p(x|y)
    obj, _ = _objective(p, c, lam)
    done = np.zeros(len(c), dtype=bool)
    for _ in range(max_iter):
        pu = np.einsum("y,ryk->rk", p.py, c)
        pxu = np.einsum("xy,ryk->rxk", p.p, c)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_given_u = np.where(pu[:, None, :] > 0, pxu / pu[:, None, :], 0.0)
            log_xu = np.log(x_given_u)
            # cross term sum_x p(x|y) ln p(x|u); -inf where p(x|u) misses support
            cross = np.einsum("xy,rxk->ryk", pxy, np.where(np.isfinite(log_xu), log_xu, 0.0))
            miss = np.einsum("xy,rxk->ryk", pxy, (~np.isfinite(log_xu)).astype(float)) > 0
            kl = neg_h[None, :, None] - cross
            kl = np.where(miss, np.inf, kl)
            logits = np.log(pu)[:, None, :] - beta * kl
        logits = np.where(np.isfinite(logits), logits, -np.inf)
        top = logits.max(axis=2, keepdims=True)
        top = np.where(np.isfinite(top), top, 0.0)
        w = np.exp(logits - top)
        s = w.sum(axis=2, keepdims=True)
        new = np.where(s > 0, w / np.where(s > 0, s, 1.0), c)
        new_obj, _ = _objective(p, new, lam)
        delta = np.abs(new_obj - obj)
        conv_now = delta <= rel_tol * np.maximum(1.0, np.abs(new_obj))
        c = np.where(done[:, None, None], c, new)
        obj = np.where(done, obj, new_obj)
        done |= conv_now
        if done.all():
            break
    obj, rate = _objective(p, c, lam)
    return c, obj, rate, done


# --- atoms and the envelope LP --------------------------------------------------

def _atoms_from_channels(p: JointPmf, channels: np.ndarray) -> np.ndarray:
    """Posteriors ``p(y|u)`` of every used output symbol, shape (N, l)."""
    pyu = p.py[None, :, None] * channels
    pu = pyu.sum(axis=1)
    r, u = np.nonzero(pu > 1e-12)
    return (pyu[r, :, u] / pu[r, u][:, None])


def _basic_atoms(p: JointPmf) -> np.ndarray:
    return np.vstack([np.eye(p.l)[p.py > 0], p.py[None, :]])


def _dedupe(atoms: np.ndarray) -> np.ndarray:
    key = np.round(atoms, 10)
    _, idx = np.unique(key, axis=0, return_index=True)
    return atoms[np.sort(idx)]


def _channel_from_weights(p: JointPmf, atoms: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = p.l + 2
    keep = np.flatnonzero(w > 1e-14)
    if len(keep) > k:
        keep = keep[np.argsort(-w[keep])[:k]]
    c = np.zeros((p.l, k))
    py = p.py
    for j, a in enumerate(keep):
        c[:, j] = np.where(py > 0, w[a] * atoms[a] / np.where(py > 0, py, 1.0), 0.0)
    dead = c.sum(axis=1) <= 0
    c[dead, 0] = 1.0
    return c / c.sum(axis=1, keepdims=True)


def _force_budget(p: JointPmf, c: np.ndarray, budget: float) -> np.ndarray:
    """Time-share with an independent symbol so that ``I(Y;U) <= budget`` exactly."""
    rate = mutual_information(AuxJoint(p, c), "yu")
    if rate <= budget:
        return c
    used = c.sum(axis=0) > 0
    free = np.flatnonzero(~used)
    t = 1.0 - budget / rate if rate > 0 else 1.0
    t = min(1.0, t * (1 + 1e-12) + 1e-15)
    out = (1 - t) * c
    if len(free):
        out[:, free[0]] += t
    else:
        out[:, int(np.argmax(c.sum(axis=0)))] += t
    return out / out.sum(axis=1, keepdims=True)


def envelope_channel(p: JointPmf, atoms: np.ndarray, budget: float) -> np.ndarray:
    """Cheapest mixture of atoms averaging to ``p(y)`` with ``I(Y;U) <= budget``."""
    atoms = _dedupe(np.vstack([atoms, _basic_atoms(p)]))
    tx = p.x_given_y  # m x l
    h_y = plogp_sum(atoms, axis=1)
    cost = plogp_sum(atoms @ tx.T, axis=1)
    res = linprog(
        cost,
        A_ub=-h_y[None, :], b_ub=[budget - p.h_y],
        A_eq=atoms.T, b_eq=p.py,
        bounds=(0, None), method="highs-ds",
    )
    if res.status != 0:
        w = np.zeros(len(atoms))
        w[-1] = 1.0  # the prior atom: I(Y;U) = 0 is always feasible
    else:
        w = np.clip(res.x, 0.0, None)
    c = _channel_from_weights(p, atoms, w)
    return _force_budget(p, c, budget)


# --- solver ---------------------------------------------------------------------

def _best_restart(obj: np.ndarray, rate: np.ndarray) -> int:
    best = obj.min()
    ties = np.flatnonzero(obj <= best + 1e-12 * max(1.0, abs(best)))
    return int(ties[np.argmin(rate[ties])])


@functools.lru_cache(maxsize=64)
def _sweep(p: JointPmf, restarts: int, seed: int):
    """Atoms from a fixed ``beta`` sweep, plus (beta, rate) of each best start."""
    inits = _init_channels(p.l, p.l + 2, restarts, seed)
    atoms, trace = [], []
    any_conv = False
    for beta in BETA_SWEEP:
        c, obj, rate, conv = alternating_minimization(p, beta, inits)
        any_conv |= bool(conv.any())
        atoms.append(_atoms_from_channels(p, c))
        trace.append((beta, float(rate[_best_restart(obj, rate)])))
    return np.vstack(atoms), tuple(trace), any_conv


def _bisect(p: JointPmf, budget: float, restarts: int, seed: int, tol: float, trace):
    """Bisection on ``log beta`` aiming ``I(Y;U)`` of the best start at ``budget``."""
    inits = _init_channels(p.l, p.l + 2, restarts, seed)
    lo = hi = None
    for beta, rate in trace:
        if rate <= budget:
            lo = beta
        elif hi is None:
            hi = beta
    if lo is None or hi is None:
        return np.empty((0, p.l)), True
    atoms = []
    any_conv = False
    a, b = np.log(lo), np.log(hi)
    for _ in range(14):
        mid = 0.5 * (a + b)
        c, obj, rate, conv = alternating_minimization(p, float(np.exp(mid)), inits)
        any_conv |= bool(conv.any())
        atoms.append(_atoms_from_channels(p, c))
        r = rate[_best_restart(obj, rate)]
        if abs(r - budget) <= tol:
            break
        if r <= budget:
            a = mid
        else:
            b = mid
    return np.vstack(atoms), any_conv


def xd_min_hxu(p: JointPmf, ry_budget: float, restarts: int = 32, tol: float = 1e-4,
               seed: int = 0) -> XdSolution:
    """Smallest ``H(X|U)`` found over channels with ``I(Y;U) <= ry_budget``.

    Warns with :class:`NonConvergenceWarning` (and sets ``converged=False``) if
    no start reached stationarity at some ``beta``; the best channel found is
    still returned.
    """
    if ry_budget < 0:
        raise ValidationError("rate budget must be nonnegative")
    if restarts < 1:
        raise ValidationError("need at least one restart")
    sweep_atoms, trace, conv_a = _sweep(p, restarts, seed)
    extra, conv_b = _bisect(p, ry_budget, restarts, seed, tol, trace)
    atoms = np.vstack([sweep_atoms, extra])
    return _solution(p, atoms, ry_budget, conv_a and conv_b)


def _solution(p: JointPmf, atoms: np.ndarray, budget: float, converged: bool) -> XdSolution:
    c = envelope_channel(p, atoms, budget)
    aux = AuxJoint(p, c)
    if not converged:
        warnings.warn("alternating minimization did not converge; result is best found",
                      NonConvergenceWarning, stacklevel=3)
    return XdSolution(budget, aux.h_x_given_u, mutual_information(aux, "yu"), c, converged)


def xd_contains(p: JointPmf, q: XdQuery, restarts: int = 32, tol: float = 1e-6,
                seed: int = 0) -> bool:
    """``rx + dx >= g(ry) - tol`` using the solver's upper bound on ``g``."""
    if min(q.rx, q.ry, q.dx) < 0:
        raise ValidationError("query components must be nonnegative")
    sol = xd_min_hxu(p, q.ry, restarts=restarts, seed=seed)
    return q.rx + q.dx >= sol.value - tol


def xd_tradeoff_curve(p: JointPmf, samples: int = 11, restarts: int = 32,
                      seed: int = 0) -> TradeoffCurve:
    """``g`` at evenly spaced budgets in ``[0, H(Y)]``.

    All budgets are solved against one shared atom pool, so the curve is the
    restriction of a single convex, nonincreasing envelope.
    """
    if samples < 2:
        raise ValidationError("samples must be at least 2")
    budgets = np.linspace(0.0, p.h_y, samples)
    sweep_atoms, trace, conv = _sweep(p, restarts, seed)
    pools = [sweep_atoms]
    for r in budgets:
        extra, c = _bisect(p, float(r), restarts, seed, 1e-4, trace)
        pools.append(extra)
        conv &= c
    atoms = np.vstack(pools)
    pts = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        for r in budgets:
            sol = _solution(p, atoms, float(r), conv)
            pts.append(CurvePoint(float(r), sol.value, sol.channel))
    if not conv:
        warnings.warn("alternating minimization did not converge; curve is best found",
                      NonConvergenceWarning, stacklevel=2)
    return TradeoffCurve(tuple(pts))


# --- exhaustive grid oracle -------------------------------------------------------

def simplex_lattice(k: int, steps: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in ``{0, 1/steps, ..., 1}``."""
    return _compositions(k, steps) / steps


def _compositions(k: int, total: int) -> np.ndarray:
    if k == 1:
        return np.array([[total]], dtype=float)
    out = []
    for first in range(total, -1, -1):
        rest = _compositions(k - 1, total - first)
        out.append(np.hstack([np.full((len(rest), 1), first), rest]))
    return np.vstack(out)


def grid_size(l: int, k: int, steps: int) -> int:
    return comb(steps + k - 1, k - 1) ** l


@functools.lru_cache(maxsize=32)
def _grid_cloud(p: JointPmf, steps: int, k: int):
    rows = simplex_lattice(k, steps)
    M = len(rows)
    h_rows = plogp_sum(rows, axis=1)
    l = p.l
    # prefix state over the first l-1 rows: p(u), p(x,u), sum_y p(y) H(row_y)
    pu = np.zeros((1, k))
    pxu = np.zeros((1, p.m, k))
    hs = np.zeros(1)
    for y in range(l - 1):
        pu = (pu[:, None, :] + p.py[y] * rows[None, :, :]).reshape(-1, k)
        pxu = (pxu[:, None, :, :] + p.p[:, y][None, None, :, None] * rows[None, :, None, :]).reshape(-1, p.m, k)
        hs = (hs[:, None] + p.py[y] * h_rows[None, :]).ravel()
    y = l - 1
    rates, values = [], []
    chunk = max(1, 2_000_000 // (M * k * (p.m + 1)))
    for s in range(0, len(pu), chunk):
        pu_c = pu[s:s + chunk, None, :] + p.py[y] * rows[None, :, :]
        pxu_c = pxu[s:s + chunk, None, :, :] + p.p[:, y][None, None, :, None] * rows[None, :, None, :]
        hs_c = hs[s:s + chunk, None] + p.py[y] * h_rows[None, :]
        h_u = plogp_sum(pu_c, axis=2)
        rates.append((h_u - hs_c).ravel())
        values.append((plogp_sum(pxu_c, axis=(2, 3)) - h_u).ravel())
    rate = np.concatenate(rates)
    value = np.concatenate(values)
    order = np.argsort(rate, kind="stable")
    return rate[order], np.minimum.accumulate(value[order])


def xd_grid_oracle(p: JointPmf, ry_budget: float, grid_step: float = 0.02,
                   cardinality: int | None = None) -> float:
    """Exhaustive minimum of ``H(X|U)`` over lattice channels with ``I(Y;U) <= budget``.

    Every row of ``p(u|y)`` ranges over the simplex lattice with spacing
    ``grid_step``.  ``cardinality`` defaults to ``|Y| + 1`` output symbols,
    which already suffices for points on the lower boundary.
    """
    if p.l > 3:
        raise GridTooLarge("grid oracle supports |Y| <= 3")
    k = p.l + 1 if cardinality is None else cardinality
    if not 1 <= k <= p.l + 2:
        raise ValidationError(f"cardinality must lie in [1, {p.l + 2}]")
    steps = int(round(1.0 / grid_step))
    if steps < 1 or abs(steps * grid_step - 1.0) > 1e-9:
        raise ValidationError("grid_step must divide 1")
    if grid_size(p.l, k, steps) > GRID_GUARD:
        raise GridTooLarge(f"{grid_size(p.l, k, steps)} grid channels exceed 10^8")
    rate, best = _grid_cloud(p, steps, k)
    i = np.searchsorted(rate, ry_budget + 1e-12, side="right")
    if i == 0:
        return float(p.h_x)
    return float(best[i - 1])
