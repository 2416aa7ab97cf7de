"""Joint-distortion region, split-message Slepian-Wolf region, corner points.

Two independent membership routes are provided.  :func:`jd_contains_lp`
searches for slack variables directly, by enumerating the vertices of the
two-dimensional polygon they must lie in.  :func:`jd_contains_closed` uses the
slack-free inequality obtained by eliminating them.  They must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .discrete import JointPmf, as_dist, entropy

TOL = 1e-9


@dataclass(frozen=True)
class JdQuery:
    rx: float
    ry: float
    d: float


@dataclass(frozen=True)
class SlackCertificate:
    delta_x: float
    delta_y: float


@dataclass(frozen=True)
class CornerPair:
    p1: tuple[float, float]
    p2: tuple[float, float]


def _entropies(p: JointPmf) -> tuple[float, float, float]:
    return p.h_x_given_y, p.h_y_given_x, p.h_xy


def _slack_halfplanes(hxy_, hyx, rx, ry, d):
    """Constraints ``A @ (dx, dy) <= b`` on the slacks, batched over queries."""
    rx, ry, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (rx, ry, d)))
    zero = np.zeros_like(rx)
    one = np.ones_like(rx)
    A = np.stack([
        np.stack([-one, zero], -1),   # dx >= 0
        np.stack([zero, -one], -1),   # dy >= 0
        np.stack([one, one], -1),     # dx + dy <= D
        np.stack([-one, zero], -1),   # rx + dx >= H(X|Y)
        np.stack([zero, -one], -1),   # ry + dy >= H(Y|X)
    ], axis=-2)
    b = np.stack([zero, zero, d, rx - hxy_, ry - hyx], axis=-1)
    return A, b


def _polygon_vertices(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Feasible pairwise intersections of the boundary lines ``A_i . v = b_i``.

    Returns (vertices, feasible) with shapes (..., P, 2) and (..., P).
    """
    pairs = list(combinations(range(A.shape[-2]), 2))
    verts, ok = [], []
    for i, j in pairs:
        M = np.stack([A[..., i, :], A[..., j, :]], axis=-2)
        rhs = np.stack([b[..., i], b[..., j]], axis=-1)
        det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
        good = np.abs(det) > 1e-14
        safe = np.where(good, det, 1.0)
        vx = (rhs[..., 0] * M[..., 1, 1] - M[..., 0, 1] * rhs[..., 1]) / safe
        vy = (M[..., 0, 0] * rhs[..., 1] - rhs[..., 0] * M[..., 1, 0]) / safe
        v = np.stack([vx, vy], axis=-1)
        slack = np.einsum("...cj,...j->...c", A, v) - b
        verts.append(v)
        ok.append(good & np.all(slack <= TOL, axis=-1))
    return np.stack(verts, axis=-2), np.stack(ok, axis=-1)


def jd_contains_lp_batch(p: JointPmf, rx, ry, d):
    """Vectorized slack search.  Returns (member, delta_x, delta_y) arrays.

    The slack polygon is bounded (``0 <= dx, dy`` and ``dx + dy <= D``), so it is
    nonempty exactly when one of its candidate vertices is feasible.  Among the
    feasible vertices the one with the smallest total slack is reported, ties
    broken toward smaller ``delta_x``.
    """
    hxy_, hyx, hj = _entropies(p)
    A, b = _slack_halfplanes(hxy_, hyx, rx, ry, d)
    verts, ok = _polygon_vertices(A, b)
    rx_, ry_, d_ = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(rx, ry, d))
    total_ok = rx_ + ry_ + d_ >= hj - TOL
    nonneg = (rx_ >= -TOL) & (ry_ >= -TOL) & (d_ >= -TOL)
    member = np.any(ok, axis=-1) & total_ok & nonneg
    key = np.where(ok, verts.sum(axis=-1) + 1e-12 * verts[..., 0], np.inf)
    best = np.argmin(key, axis=-1)
    chosen = np.take_along_axis(verts, best[..., None, None], axis=-2)[..., 0, :]
    chosen = np.clip(chosen, 0.0, None)
    return member, np.where(member, chosen[..., 0], np.nan), np.where(member, chosen[..., 1], np.nan)


def jd_contains_lp(p: JointPmf, q: JdQuery) -> tuple[bool, SlackCertificate | None]:
    """Membership by explicit search for slacks ``delta_x, delta_y >= 0``."""
    member, dx, dy = jd_contains_lp_batch(p, q.rx, q.ry, q.d)
    if not bool(member):
        return False, None
    return True, SlackCertificate(float(dx), float(dy))


def jd_contains_closed_batch(p: JointPmf, rx, ry, d) -> np.ndarray:
    hxy_, hyx, hj = _entropies(p)
    rx, ry, d = (np.asarray(v, dtype=float) for v in (rx, ry, d))
    need = np.maximum(0.0, hxy_ - rx) + np.maximum(0.0, hyx - ry)
    nonneg = (rx >= -TOL) & (ry >= -TOL) & (d >= -TOL)
    return (need <= d + TOL) & (rx + ry + d >= hj - TOL) & nonneg


def jd_contains_closed(p: JointPmf, q: JdQuery) -> bool:
    """``max(0, H(X|Y)-Rx) + max(0, H(Y|X)-Ry) <= D`` and ``Rx+Ry+D >= H(X,Y)``."""
    return bool(jd_contains_closed_batch(p, q.rx, q.ry, q.d))


def sw_region_contains(p: JointPmf, rx, ry, d1=0.0, d2=0.0):
    """Split-message Slepian-Wolf region with slack rates ``d1``, ``d2``."""
    hxy_, hyx, hj = _entropies(p)
    rx, ry, d1, d2 = (np.asarray(v, dtype=float) for v in (rx, ry, d1, d2))
    ok = (rx + d1 >= hxy_ - TOL) & (ry + d2 >= hyx - TOL) & (rx + ry + d1 + d2 >= hj - TOL)
    ok &= (rx >= -TOL) & (ry >= -TOL) & (d1 >= -TOL) & (d2 >= -TOL)
    return bool(ok) if ok.ndim == 0 else ok


def jd_corner_points(p: JointPmf, d: float) -> CornerPair:
    """End points of the dominant face at distortion ``d``.

    The second coordinate of ``P1`` (first of ``P2``) is additionally clamped at
    zero so that ``d >= H(X,Y)`` yields the all-zero rate pair.
    """
    hxy_, hyx, _ = _entropies(p)
    hx, hy = p.h_x, p.h_y
    p1 = (max(hxy_ - d, 0.0), max(min(hy, hy - (d - hxy_)), 0.0))
    p2 = (max(min(hx, hx - (d - hyx)), 0.0), max(hyx - d, 0.0))
    return CornerPair(p1, p2)


def jd_boundary(p: JointPmf, d: float, samples: int = 11) -> list[tuple[float, float]]:
    """Evenly spaced rate pairs on the segment from ``P1`` to ``P2``.

    Every point is a member and is tight in both coordinates; the rest of the
    lower boundary consists of the vertical ray above ``P1`` and the horizontal
    ray right of ``P2``.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    c = jd_corner_points(p, d)
    t = np.linspace(0.0, 1.0, samples)
    p1, p2 = np.array(c.p1), np.array(c.p2)
    pts = (1 - t)[:, None] * p1 + t[:, None] * p2
    pts[0], pts[-1] = p1, p2
    return [(float(a), float(b)) for a, b in pts]


def rd_logloss(p_x, d: float) -> float:
    """Point-to-point rate-distortion function ``max(H(X) - d, 0)``."""
    return max(entropy(as_dist(p_x)) - d, 0.0)


def wz_logloss(p: JointPmf, d: float) -> float:
    """Rate with decoder side information Y: ``max(H(X|Y) - d, 0)``."""
    return max(p.h_x_given_y - d, 0.0)


__all__ = [
    "CornerPair",
    "JdQuery",
    "SlackCertificate",
    "jd_boundary",
    "jd_contains_closed",
    "jd_contains_closed_batch",
    "jd_contains_lp",
    "jd_contains_lp_batch",
    "jd_corner_points",
    "rd_logloss",
    "sw_region_contains",
    "wz_logloss",
]
