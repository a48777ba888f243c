"""Mapping-cylinder coordinates on the radius-2 disk and the maps built on them.

A point of the disk D has coordinates ``(y, s)``: ``y`` is an angle on the
boundary circle and ``s`` in ``[0, 1]`` runs along the arc from the circle
point ``y`` (``s = 0``) to ``cos y`` on the interval ``I = [-1, 1] x {0}``
(``s = 1``).  The plane embedding used throughout is

    eta(y, s) = ((2 - s) cos y, 2 (1 - s) sin y),

whose level sets are nested ellipses collapsing onto ``I``.  Interior points
of ``I`` have two coordinates ``(±y, 1)``; the canonical one has ``y`` in
``[0, pi]``.

Every function here is vectorized over numpy arrays of ``y`` and ``s``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .tent_map import TentMap

TWO_PI = 2.0 * np.pi
#: collar ``S x [0, 3/4]`` on which the unwrapping is the identity
COLLAR = 0.75
#: s-level that the unwrapping sends I to
UNWRAP_LEVEL = 0.5


class CylinderPoint(NamedTuple):
    y: float | np.ndarray
    s: float | np.ndarray


class PlanePoint(NamedTuple):
    u: float | np.ndarray
    v: float | np.ndarray


class OutsideDiskError(ValueError):
    pass


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def canonical(y, s) -> CylinderPoint:
    """Reduce ``y`` mod 2π; on ``s = 1`` pick the representative in ``[0, π]``."""
    y = np.mod(np.asarray(y, dtype=float), TWO_PI)
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("s must lie in [0, 1]")
    on_i = s >= 1.0
    y = np.where(on_i, np.arccos(np.cos(y)), y)
    return CylinderPoint(_out(y), _out(s))


def interval_point(x) -> CylinderPoint:
    """Canonical coordinates of the point ``x`` of I."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return CylinderPoint(_out(np.arccos(x)), _out(np.ones_like(x)))


def eta(y, s) -> PlanePoint:
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    return PlanePoint(_out((2.0 - s) * np.cos(y)), _out(2.0 * (1.0 - s) * np.sin(y)))


def plane_distance(p: CylinderPoint, q: CylinderPoint):
    a, b = eta(*p), eta(*q)
    return np.hypot(np.subtract(a.u, b.u), np.subtract(a.v, b.v))


def eta_inverse(u, v, iters: int = 64) -> CylinderPoint:
    """Coordinates ``(y, s)`` of a plane point of the closed radius-2 disk.

    Off the slit, ``s`` is the unique root of the increasing function
    ``(u/(2-s))^2 + (v/(2-2s))^2 - 1`` on ``[0, 1)``, found by bisection.
    Points of ``I`` get ``s = 1`` and the canonical ``y = arccos(u)``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r2 = u * u + v * v
    if np.any(r2 > 4.0 + 1e-9):
        raise OutsideDiskError("point outside the radius-2 disk")
    on_axis = np.abs(v) <= 1e-15
    slit = on_axis & (np.abs(u) <= 1.0)
    lo = np.zeros(np.broadcast(u, v).shape)
    hi = np.ones_like(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (u / (2.0 - mid)) ** 2 + (v / (2.0 - 2.0 * mid)) ** 2
        up = g < 1.0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    s = 0.5 * (lo + hi)
    # on the axis beyond the slit the root is explicit
    s = np.where(on_axis & ~slit, 2.0 - np.abs(u), s)
    s = np.where(r2 >= 4.0, 0.0, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.arctan2(v / (2.0 - 2.0 * s), u / (2.0 - s))
    y = np.where(on_axis & ~slit, np.where(u >= 0, 0.0, np.pi), y)
    y = np.where(slit, np.arccos(np.clip(u, -1.0, 1.0)), y)
    s = np.where(slit, 1.0, s)
    return canonical(y, s)


def upsilon(y, s) -> CylinderPoint:
    """Collapse map: ``(y, 2s)`` on ``s <= 1/2``, ``(y, 1)`` beyond."""
    s = np.asarray(s, dtype=float)
    return canonical(y, np.minimum(2.0 * s, 1.0))


def gamma(tent: TentMap, x):
    """Angle whose cosine is ``f_t(x)``, strictly decreasing from ``arccos(3-2t)`` to ``-π``."""
    x = np.asarray(x, dtype=float)
    a = np.arccos(np.clip(tent.eval(x), -1.0, 1.0))
    return _out(np.where(x <= tent.c, a, -a))


def unwrap(tent: TentMap, y, s) -> CylinderPoint:
    """The unwrapping of ``f_t``: identity on the collar, I sent injectively to level 1/2.

    For ``s`` in ``[3/4, 1]`` the image is the point at fraction
    ``4(s - 3/4)`` of the straight plane segment from ``eta(y, 3/4)`` to
    ``eta(gamma_t(cos y), 1/2)``.  Both endpoints lie in the convex filled
    ellipse of level 1/2, so the whole segment has ``s >= 1/2``.
    """
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    y, s = np.broadcast_arrays(y, s)
    out_y, out_s = y.astype(float).copy(), s.astype(float).copy()
    m = s > COLLAR
    if np.any(m):
        ym, sm = y[m], s[m]
        lam = 4.0 * (sm - COLLAR)
        g = gamma(tent, np.cos(ym))
        p0 = eta(ym, COLLAR)
        p1 = eta(g, UNWRAP_LEVEL)
        pu = (1.0 - lam) * p0.u + lam * p1.u
        pv = (1.0 - lam) * p0.v + lam * p1.v
        q = eta_inverse(pu, pv)
        qy = np.where(lam >= 1.0, np.mod(g, TWO_PI), q.y)
        qs = np.where(lam >= 1.0, UNWRAP_LEVEL, q.s)
        out_y[m], out_s[m] = qy, qs
    return CylinderPoint(_out(np.mod(out_y, TWO_PI)), _out(out_s))


def h_step(tent: TentMap, y, s) -> CylinderPoint:
    """``H_t = Upsilon ∘ unwrap``: doubles ``s`` below 1/2, sends everything else onto I."""
    s = np.asarray(s, dtype=float)
    w = unwrap(tent, y, s)
    # beyond s = 1/2 the unwrapped point has level >= 1/2 exactly, so the image is on I
    new_s = np.where(s >= UNWRAP_LEVEL, 1.0, np.minimum(2.0 * np.asarray(w.s), 1.0))
    return canonical(w.y, new_s)


def plane_x(y, s):
    """First plane coordinate; equals the interval value for points of I."""
    return _out((2.0 - np.asarray(s, dtype=float)) * np.cos(np.asarray(y, dtype=float)))


def steps_to_interval(tent: TentMap, y, s, max_steps: int = 200) -> np.ndarray:
    """Number of ``H_t`` steps until a point first lands on I (``s = 1``)."""
    y = np.atleast_1d(np.asarray(y, dtype=float)).copy()
    s = np.atleast_1d(np.asarray(s, dtype=float)).copy()
    k = np.zeros(y.shape, dtype=int)
    for _ in range(max_steps):
        off = s < 1.0
        if not off.any():
            break
        p = h_step(tent, y[off], s[off])
        y[off], s[off] = p.y, p.s
        k[off] += 1
    return k
