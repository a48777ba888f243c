"""Core tent maps on I = [-1, 1] and exact piecewise-linear preimage arithmetic.

The slope-``t`` core tent map, rescaled to the fixed interval ``[-1, 1]``, is

    f_t(x) = min(t(x - 1) + 3, t(1 - x) - 1),

increasing with slope ``t`` on ``[-1, c]`` and decreasing with slope ``-t`` on
``[c, 1]``, where ``c = 1 - 2/t``.  Preimages of closed intervals are again
finite unions of closed intervals and are computed from the two inverse
branches directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

#: Slack used whenever an endpoint is compared against a branch boundary.
SLACK = 1e-12


class DomainError(ValueError):
    """A point or parameter lies outside the domain of the tent family."""


def check_slope(t: float) -> float:
    t = float(t)
    if not (1.0 < t <= 2.0):
        raise DomainError(f"slope t={t!r} outside (1, 2]")
    return t


@dataclass(frozen=True)
class TentMap:
    """Core tent map of slope ``t`` on ``[-1, 1]``."""

    t: float
    c: float = field(init=False, repr=False)

    def __post_init__(self):
        t = check_slope(self.t)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "c", 1.0 - 2.0 / t)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Evaluate ``f_t`` at a point or array of points in ``[-1, 1]``."""
        xa = np.asarray(x, dtype=float)
        if np.any(np.abs(xa) > 1.0 + SLACK) or np.any(np.isnan(xa)):
            raise DomainError("argument outside [-1, 1]")
        t = self.t
        y = np.minimum(t * (xa - 1.0) + 3.0, t * (1.0 - xa) - 1.0)
        y = np.clip(y, -1.0, 1.0)
        if np.ndim(x) == 0:
            return float(y)
        return y

    def iterate(self, x, n: int):
        """``f_t^n(x)``."""
        for _ in range(n):
            x = self.eval(x)
        return x

    @property
    def low_value(self) -> float:
        """``f_t(-1) = 3 - 2t``, the lower end of the ascending branch image."""
        return 3.0 - 2.0 * self.t

    def preimage_points(self, v: float) -> tuple[float, ...]:
        """Sorted preimages of ``v``: one or two points."""
        v = float(v)
        if not (-1.0 - SLACK <= v <= 1.0 + SLACK):
            raise DomainError(f"value {v!r} outside [-1, 1]")
        v = min(max(v, -1.0), 1.0)
        t = self.t
        right = 1.0 - (v + 1.0) / t
        if v < self.low_value - SLACK:
            return (right,)
        left = max(1.0 + (v - 3.0) / t, -1.0)
        if abs(left - right) <= SLACK:
            return (self.c,)
        return (left, right)

    def preimage_interval(self, a: float, b: float) -> "IntervalSet":
        """Exact ``f_t^{-1}([a, b])`` (the interval is first clipped to I)."""
        a, b = max(a, -1.0), min(b, 1.0)
        if a > b:
            return IntervalSet.empty()
        t = self.t
        pieces = [(1.0 - (b + 1.0) / t, 1.0 - (a + 1.0) / t)]
        lo = max(a, self.low_value)
        if lo <= b + SLACK:
            left_lo = max(1.0 + (lo - 3.0) / t, -1.0)
            left_hi = max(1.0 + (b - 3.0) / t, left_lo)
            pieces.append((left_lo, left_hi))
        return IntervalSet.from_pieces(pieces)

    def preimage_set(self, s: "IntervalSet", n: int = 1) -> "IntervalSet":
        """Exact ``f_t^{-n}(S)``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        for _ in range(n):
            out: list[tuple[float, float]] = []
            for a, b in s:
                out.extend(self.preimage_interval(a, b))
            s = IntervalSet.from_pieces(out)
        return s

    def critical_orbit(self, depth: int = 64, tol: float = 1e-9) -> "OrbitReport":
        return critical_orbit(self, depth, tol)


class IntervalSet(Sequence):
    """Finite union of disjoint closed subintervals of ``[-1, 1]``.

    Components are kept sorted; pieces closer than :data:`SLACK` are merged.
    Degenerate components (single points) are retained.
    """

    __slots__ = ("_parts",)

    def __init__(self, parts: Iterable[tuple[float, float]] = ()):
        parts = [(float(a), float(b)) for a, b in parts]
        for (a0, b0), (a1, b1) in zip(parts, parts[1:]):
            if not b0 < a1:
                raise ValueError("components must be sorted and disjoint")
        for a, b in parts:
            if a > b or a < -1.0 - SLACK or b > 1.0 + SLACK:
                raise ValueError(f"bad component [{a}, {b}]")
        self._parts = tuple(parts)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def interval(cls, a: float, b: float) -> "IntervalSet":
        a, b = max(a, -1.0), min(b, 1.0)
        return cls(((a, b),)) if a <= b else cls.empty()

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float]]) -> "IntervalSet":
        """Normalize arbitrary closed pieces (clip, sort, merge)."""
        clipped = []
        for a, b in pieces:
            a, b = max(a, -1.0), min(b, 1.0)
            if a <= b:
                clipped.append((a, b))
        clipped.sort()
        merged: list[list[float]] = []
        for a, b in clipped:
            if merged and a <= merged[-1][1] + SLACK:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls((a, b) for a, b in merged)

    def __getitem__(self, i):
        return self._parts[i]

    def __len__(self) -> int:
        return len(self._parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._parts == other._parts

    def __hash__(self) -> int:
        return hash(self._parts)

    def __repr__(self) -> str:
        inner = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in self._parts)
        return f"IntervalSet({inner})"

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        p, q = self._parts, other._parts
        while i < len(p) and j < len(q):
            a = max(p[i][0], q[j][0])
            b = min(p[i][1], q[j][1])
            if a <= b:
                out.append((a, b))
            if p[i][1] < q[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet.from_pieces(out)

    @property
    def boundary_count(self) -> int:
        return sum(1 if a == b else 2 for a, b in self._parts)

    @property
    def length(self) -> float:
        return sum(b - a for a, b in self._parts)

    def contains(self, x):
        """Vectorized closed-set membership."""
        xa = np.asarray(x, dtype=float)
        if not self._parts:
            return np.zeros(xa.shape, dtype=bool)
        lo = np.array([a for a, _ in self._parts])
        hi = np.array([b for _, b in self._parts])
        k = np.searchsorted(lo, xa, side="right") - 1
        ok = k >= 0
        kk = np.where(ok, k, 0)
        return ok & (xa <= hi[kk])

    def endpoints(self) -> np.ndarray:
        return np.array(self._parts, dtype=float).reshape(-1, 2)

    def allclose(self, other: "IntervalSet", atol: float = SLACK) -> bool:
        if len(self) != len(other):
            return False
        return bool(np.allclose(self.endpoints(), other.endpoints(), rtol=0, atol=atol))


class OrbitReport(NamedTuple):
    points: np.ndarray
    markov: bool
    #: (first index, revisiting index) of the detected collision, if any
    revisit: tuple[int, int] | None


def critical_orbit(tent: TentMap, depth: int = 64, tol: float = 1e-9) -> OrbitReport:
    """Orbit ``c, f(c), ..., f^depth(c)`` with eventual-periodicity detection."""
    if depth < 1 or tol <= 0:
        raise ValueError("need depth >= 1 and tol > 0")
    pts = [tent.c]
    revisit = None
    for j in range(1, depth + 1):
        x = tent.eval(pts[-1])
        pts.append(x)
        if revisit is None:
            hits = [i for i in range(j) if abs(pts[i] - x) <= tol]
            if hits:
                revisit = (hits[0], j)
    return OrbitReport(np.array(pts), revisit is not None, revisit)


def markov_partition(tent: TentMap, depth: int = 64, tol: float = 1e-9) -> np.ndarray:
    """Sorted partition points ``{-1, 1} u {critical orbit}`` for Markov parameters."""
    rep = critical_orbit(tent, depth, tol)
    if not rep.markov:
        raise NotMarkovError(f"critical orbit of t={tent.t} is not eventually periodic")
    stop = rep.revisit[1]
    pts = sorted([-1.0, 1.0, *rep.points[:stop]])
    uniq = [pts[0]]
    for p in pts[1:]:
        if p - uniq[-1] > tol:
            uniq.append(p)
    uniq[0], uniq[-1] = -1.0, 1.0
    return np.array(uniq)


class NotMarkovError(ValueError):
    """The critical orbit is not (detectably) eventually periodic."""
