"""Finite-depth threads, the annulus parameterization and cylinder-set algebra.

A thread over ``f_t`` is a backward orbit ``<x_0, x_1, ...>`` with
``f_t(x_{n+1}) = x_n``; here threads are truncated to a finite depth ``N`` and
every metric computation carries the rigorous bound on the neglected tail.

Disk threads live in the inverse limit of ``H_t`` on the mapping-cylinder
disk.  Those off the attractor are parameterized by the half-open annulus
``S x [0, inf)`` through :func:`psi`, which conjugates :func:`annulus_shift`
to the natural extension of ``H_t``.
"""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import disk
from ._orbits import derive_seed, orbit_chunks
from .acim import Density
from .tent_map import IntervalSet, TentMap, check_slope

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

THREAD_TOL = 1e-9
SQRT2 = math.sqrt(2.0)


class ThreadMismatchError(ValueError):
    pass


class OnAttractorError(ValueError):
    """Every entry of a truncated disk thread lies on I."""


# ---------------------------------------------------------------- threads


@dataclass(frozen=True)
class Thread:
    """Truncated thread ``<x_0, ..., x_{N-1}>`` over ``f_t``."""

    t: float
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", check_slope(self.t))
        x = np.array(self.entries, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ValueError("a thread needs at least one entry")
        x.setflags(write=False)
        object.__setattr__(self, "entries", x)
        r = self.residual()
        if r > THREAD_TOL:
            raise ValueError(f"thread condition violated (residual {r:.2e})")

    @property
    def depth(self) -> int:
        return self.entries.size

    def __getitem__(self, n):
        return self.entries[n]

    def residual(self) -> float:
        x = self.entries
        if x.size < 2:
            return 0.0
        return float(np.max(np.abs(TentMap(self.t).eval(x[1:]) - x[:-1])))

    def csv_row(self) -> str:
        return ",".join(repr(float(v)) for v in (self.t, *self.entries))


@dataclass(frozen=True)
class DiskThread:
    """Truncated thread over ``H_t`` in mapping-cylinder coordinates."""

    t: float
    y: np.ndarray
    s: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "t", check_slope(self.t))
        p = disk.canonical(np.atleast_1d(self.y), np.atleast_1d(self.s))
        object.__setattr__(self, "y", np.asarray(p.y, dtype=float))
        object.__setattr__(self, "s", np.asarray(p.s, dtype=float))
        if self.check:
            r = self.residual()
            if r > THREAD_TOL:
                raise ValueError(f"disk thread condition violated (residual {r:.2e})")

    @property
    def depth(self) -> int:
        return self.y.size

    def __getitem__(self, n) -> disk.CylinderPoint:
        return disk.CylinderPoint(float(self.y[n]), float(self.s[n]))

    def residual(self) -> float:
        if self.depth < 2:
            return 0.0
        img = disk.h_step(TentMap(self.t), self.y[1:], self.s[1:])
        d = disk.plane_distance(img, disk.CylinderPoint(self.y[:-1], self.s[:-1]))
        return float(np.max(d))

    def plane_x(self) -> np.ndarray:
        return disk.plane_x(self.y, self.s)


class Distance(NamedTuple):
    value: float
    #: bound on the contribution of entries beyond the truncation depth
    tail: float


def thread_metric(a, b) -> Distance:
    """``sum_n d(a_n, b_n) / 2^n`` over the common depth, with its tail bound.

    Interval threads use ``|x - y|`` (diam I = 2, tail ``2^{2-N}``); disk
    threads use plane distance (diam D = 4, tail ``2^{3-N}``).
    """
    if type(a) is not type(b) or a.t != b.t or a.depth != b.depth:
        raise ThreadMismatchError("threads must share type, slope and depth")
    n = a.depth
    w = 0.5 ** np.arange(n)
    if isinstance(a, Thread):
        d = np.abs(a.entries - b.entries)
        diam = 2.0
    else:
        d = disk.plane_distance(disk.CylinderPoint(a.y, a.s), disk.CylinderPoint(b.y, b.s))
        diam = 4.0
    return Distance(float(np.sum(d * w)), diam * 2.0 ** (1 - n))


def nat_ext_step(tent: TentMap, th: Thread) -> Thread:
    """``<x_0, x_1, ...> -> <f(x_0), x_0, x_1, ...>`` at fixed depth."""
    x = th.entries
    return Thread(th.t, np.concatenate([[tent.eval(x[0])], x[:-1]]))


def nat_ext_back(tent: TentMap, th: Thread, x_last: float) -> Thread:
    """Inverse shift: drop the head, append ``x_last`` (a preimage of the old tail)."""
    return Thread(th.t, np.concatenate([th.entries[1:], [x_last]]))


def disk_nat_ext_step(tent: TentMap, th: DiskThread) -> DiskThread:
    head = disk.h_step(tent, th.y[0], th.s[0])
    return DiskThread(th.t, np.concatenate([[head.y], th.y[:-1]]),
                      np.concatenate([[head.s], th.s[:-1]]), check=False)


def thread_from_orbit(tent: TentMap, deepest: np.ndarray, depth: int) -> np.ndarray:
    """Rows ``(f^{N-1}(x), ..., f(x), x)`` for each ``x`` in ``deepest``.

    Forward evaluation from the deepest entry makes the thread condition hold
    with zero residual.
    """
    out = np.empty((np.size(deepest), depth))
    out[:, depth - 1] = deepest
    for j in range(depth - 2, -1, -1):
        out[:, j] = tent.eval(out[:, j + 1])
    return out


def thread_blocks(tent: TentMap, n: int, depth: int, burnin: int = 1000, seed: int = 0,
                  chunk: int = 1 << 20, x0: float | None = None) -> Iterator[np.ndarray]:
    """Blocks of time-reversed orbit windows, one thread per row.

    Windows ``(x_m, x_{m-1}, ..., x_{m-N+1})`` for ``m = burnin+N-1, ..., n-1``
    of a single forward orbit.  Each row is rebuilt forward from its deepest
    entry, so it is an exact truncated thread.
    """
    if not n > burnin + depth:
        raise ValueError("need n > burnin + depth")
    if x0 is None:
        x0 = np.random.default_rng(derive_seed(seed, 7)).uniform(-1.0, 1.0)
    pos = 0
    for block in orbit_chunks(tent.t, x0, n, derive_seed(seed, 8), chunk):
        start = max(burnin - pos, 0)
        # window m has deepest index m-N+1, so the last N-1 orbit points are never deepest
        last_ok = n - depth  # largest admissible deepest index
        stop = min(block.size, last_ok - pos + 1)
        pos += block.size
        if stop <= start:
            continue
        yield thread_from_orbit(tent, block[start:stop], depth)


def sample_threads(tent: TentMap, n: int, depth: int, burnin: int = 1000,
                   seed: int = 0) -> np.ndarray:
    return np.concatenate(list(thread_blocks(tent, n, depth, burnin, seed)), axis=0)


def thread_sampler(tent: TentMap, n: int, depth: int, burnin: int = 1000,
                   seed: int = 0) -> Iterator[Thread]:
    """Stream of :class:`Thread` objects approximating the induced measure."""
    for block in thread_blocks(tent, n, depth, burnin, seed):
        for row in block:
            yield Thread(tent.t, row)


def write_threads_csv(path, t: float, rows: np.ndarray, header: str | None = None) -> str:
    buf = io.StringIO(newline="")
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    depth = rows.shape[1]
    buf.write(",".join(["t", *(f"x{i}" for i in range(depth))]) + "\n")
    for row in rows:
        buf.write(",".join(repr(float(v)) for v in (t, *row)) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="")
    return text


# ---------------------------------------------------------------- annulus


class AnnulusPoint(NamedTuple):
    y: float | np.ndarray
    s: float | np.ndarray


def annulus_shift(y, s) -> AnnulusPoint:
    """``(y, 2s)`` for ``s <= 1``, ``(y, s + 1)`` beyond."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    out = np.where(s <= 1.0, 2.0 * s, s + 1.0)
    return AnnulusPoint(disk._out(np.mod(y, disk.TWO_PI)), disk._out(out))


class AnnulusMeasure:
    """Probability measure ``dy ds / (pi^2 (1 + s^2))`` on ``S x [0, inf)``."""

    K = math.pi**2

    @classmethod
    def density(cls, y, s):
        return 1.0 / (cls.K * (1.0 + np.asarray(s, dtype=float) ** 2))

    @classmethod
    def total_mass(cls) -> float:
        return 2.0 * math.pi * (math.pi / 2.0) / cls.K

    @staticmethod
    def s_cdf(s):
        return 2.0 / math.pi * np.arctan(s)

    @staticmethod
    def sample(seed: int, count: int) -> AnnulusPoint:
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random((2, count))
        return AnnulusPoint(disk.TWO_PI * u[0], np.tan(0.5 * math.pi * u[1]))


def sample_m(seed: int, count: int) -> AnnulusPoint:
    return AnnulusMeasure.sample(seed, count)


def psi_arrays(tent: TentMap, y, s, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Ψ_t: coordinate arrays of shape ``(len(y), depth)``.

    For ``s < 1`` the thread is ``(y, s), (y, s/2), ...``.  Otherwise, with
    ``k = floor(s)`` and ``v = (s - k + 1)/2``, it is
    ``f^{k-1}(H(y,v)), ..., H(y,v), (y, v), (y, v/2), ...``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    count = y.size
    k = np.where(s < 1.0, 0, np.floor(s)).astype(np.int64)
    v = np.where(s < 1.0, s, 0.5 * (s - k + 1.0))
    ys = np.empty((count, depth))
    ss = np.empty((count, depth))
    j = np.arange(depth)[None, :]
    # disk part: entry j = (y, v / 2^{j-k}) for j >= k
    ys[:] = y[:, None]
    with np.errstate(over="ignore"):
        ss[:] = v[:, None] * 0.5 ** np.maximum(j - k[:, None], 0)
    # interval part: entry j = f^{k-1-j}(H(y, v)) for j < k
    hit = k > 0
    if hit.any():
        idx = np.nonzero(hit)[0]
        head = np.asarray(disk.plane_x(*disk.h_step(tent, y[idx], v[idx])))
        kk = k[idx]
        order = np.argsort(-kk, kind="stable")
        idx, kk, x = idx[order], kk[order], head[order]
        xs = np.empty((idx.size, depth))
        # iterate m = 0..max(k)-1; samples with k-1 >= m are a prefix (k sorted descending)
        active = idx.size
        for m in range(int(kk[0])):
            while active and kk[active - 1] - 1 < m:
                active -= 1
            jj = kk[:active] - 1 - m
            rec = jj < depth
            if rec.any():
                rows = np.nonzero(rec)[0]
                xs[rows, jj[rec]] = x[:active][rec]
            if m + 1 < kk[0]:
                x[:active] = tent.eval(x[:active])
        ip = disk.interval_point(xs)
        on_i = j < kk[:, None]
        ys[idx] = np.where(on_i, ip.y, ys[idx])
        ss[idx] = np.where(on_i, 1.0, ss[idx])
    ys = np.mod(ys, disk.TWO_PI)
    return ys, ss


def psi(tent: TentMap, p: AnnulusPoint, depth: int = 12) -> DiskThread:
    ys, ss = psi_arrays(tent, p[0], p[1], depth)
    return DiskThread(tent.t, ys[0], ss[0], check=False)


def psi_inverse_arrays(ys: np.ndarray, ss: np.ndarray, tol: float = 1e-12) -> AnnulusPoint:
    """Vectorized inverse of Ψ_t from truncated disk-thread coordinates."""
    ys = np.atleast_2d(ys)
    ss = np.atleast_2d(ss)
    off = ss < 1.0 - tol
    if not np.all(off.any(axis=1)):
        raise OnAttractorError("thread lies on I to the truncation depth")
    k = np.argmax(off, axis=1)
    rows = np.arange(ys.shape[0])
    yk, vk = ys[rows, k], ss[rows, k]
    s = np.where(k == 0, vk, k + 2.0 * vk - 1.0)
    return AnnulusPoint(np.mod(yk, disk.TWO_PI), s)


def psi_inverse(tent: TentMap, th: DiskThread) -> AnnulusPoint:
    p = psi_inverse_arrays(th.y[None, :], th.s[None, :])
    return AnnulusPoint(float(p.y[0]), float(p.s[0]))


def disk_shift_arrays(tent: TentMap, ys: np.ndarray, ss: np.ndarray):
    """Natural extension of ``H_t`` applied row-wise to truncated disk threads."""
    head = disk.h_step(tent, ys[:, 0], ss[:, 0])
    ny = np.concatenate([np.atleast_1d(head.y)[:, None], ys[:, :-1]], axis=1)
    ns = np.concatenate([np.atleast_1d(head.s)[:, None], ss[:, :-1]], axis=1)
    return ny, ns


def disk_metric_arrays(ya, sa, yb, sb) -> np.ndarray:
    """Row-wise truncated disk-thread metric."""
    d = disk.plane_distance(disk.CylinderPoint(ya, sa), disk.CylinderPoint(yb, sb))
    w = 0.5 ** np.arange(ya.shape[1])
    return d @ w


def conjugacy_residuals(tent: TentMap, y, s, depth: int = 12) -> np.ndarray:
    """Truncated metric between ``Ĥ(Ψ(p))`` and ``Ψ(G(p))`` for each sample."""
    ya, sa = psi_arrays(tent, y, s, depth)
    ya, sa = disk_shift_arrays(tent, ya, sa)
    g = annulus_shift(y, s)
    yb, sb = psi_arrays(tent, g.y, g.s, depth)
    return disk_metric_arrays(ya, sa, yb, sb)


# ---------------------------------------------------------------- cylinder sets


@dataclass(frozen=True)
class TiltedRectangle:
    """Open rectangle of half-lengths ``(a, b)`` rotated by π/4 about ``(x0, t0)``.

    A half-length of zero denotes the empty rectangle.
    """

    x0: float
    t0: float
    a: float
    b: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("half-lengths must be non-negative")

    @property
    def is_empty(self) -> bool:
        return self.a <= 0 or self.b <= 0

    def rotated(self, x, t):
        dx = np.asarray(x, dtype=float) - self.x0
        dt = np.asarray(t, dtype=float) - self.t0
        return (dx + dt) / SQRT2, (dt - dx) / SQRT2

    def contains(self, x, t):
        u, v = self.rotated(x, t)
        return (np.abs(u) < self.a) & (np.abs(v) < self.b)

    def slice(self, t: float) -> IntervalSet:
        """``R^{(t)}`` as a closed interval set (boundaries carry no measure)."""
        if self.is_empty:
            return IntervalSet.empty()
        dt = t - self.t0
        lo = max(-self.a * SQRT2 - dt, dt - self.b * SQRT2)
        hi = min(self.a * SQRT2 - dt, dt + self.b * SQRT2)
        if not lo < hi:
            return IntervalSet.empty()
        return IntervalSet.interval(self.x0 + lo, self.x0 + hi)

    def intersect(self, other: "TiltedRectangle") -> "TiltedRectangle":
        u0, v0 = (self.x0 + self.t0) / SQRT2, (self.t0 - self.x0) / SQRT2
        u1, v1 = (other.x0 + other.t0) / SQRT2, (other.t0 - other.x0) / SQRT2
        ulo, uhi = max(u0 - self.a, u1 - other.a), min(u0 + self.a, u1 + other.a)
        vlo, vhi = max(v0 - self.b, v1 - other.b), min(v0 + self.b, v1 + other.b)
        if ulo >= uhi or vlo >= vhi:
            return TiltedRectangle(self.x0, self.t0, 0.0, 0.0)
        uc, vc = (ulo + uhi) / 2, (vlo + vhi) / 2
        return TiltedRectangle((uc - vc) / SQRT2, (uc + vc) / SQRT2,
                               (uhi - ulo) / 2, (vhi - vlo) / 2)

    def within_strip(self, t_lo: float = 1.0, t_hi: float = 2.0) -> bool:
        """Whether the closed rectangle lies in ``[-1, 1] x [t_lo, t_hi]``."""
        e = (self.a + self.b) / SQRT2
        return (-1.0 <= self.x0 - e and self.x0 + e <= 1.0
                and t_lo <= self.t0 - e and self.t0 + e <= t_hi)


@dataclass(frozen=True)
class CylinderSet:
    """``π_{n_1}^{-1}(R_1) ∩ ... ∩ π_{n_k}^{-1}(R_k)``; terms sorted by ``n``, distinct."""

    terms: tuple[tuple[int, TiltedRectangle], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a cylinder set needs at least one term")
        merged: dict[int, TiltedRectangle] = {}
        for n, r in self.terms:
            n = int(n)
            if n < 0:
                raise ValueError("coordinate indices must be non-negative")
            merged[n] = merged[n].intersect(r) if n in merged else r
        object.__setattr__(self, "terms", tuple(sorted(merged.items(), key=lambda it: it[0])))

    @property
    def depth(self) -> int:
        """Number of thread entries the set depends on."""
        return self.terms[-1][0] + 1

    def contains(self, threads: np.ndarray, t: float) -> np.ndarray:
        """Membership of raw thread rows (independent of any slice arithmetic)."""
        threads = np.atleast_2d(threads)
        ok = np.ones(threads.shape[0], dtype=bool)
        for n, r in self.terms:
            ok &= r.contains(threads[:, n], t)
        return ok

    @classmethod
    def from_toml(cls, text: str) -> "CylinderSet":
        data = tomllib.loads(text)
        terms = []
        for i, term in enumerate(data.get("term", [])):
            try:
                x0, t0 = term["center"]
                a, b = term["half"]
                terms.append((int(term["n"]), TiltedRectangle(float(x0), float(t0), float(a), float(b))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"term {i}: expected n, center = [x0, t0], half = [a, b]") from exc
        return cls(tuple(terms))

    @classmethod
    def load(cls, path) -> "CylinderSet":
        return cls.from_toml(Path(path).read_text(encoding="utf-8"))

    def to_toml(self) -> str:
        out = []
        for n, r in self.terms:
            out.append("[[term]]")
            out.append(f"n = {n}")
            out.append(f"center = [{r.x0!r}, {r.t0!r}]")
            out.append(f"half = [{r.a!r}, {r.b!r}]")
            out.append("")
        return "\n".join(out)


class ReducedCylinder(NamedTuple):
    n: int
    cylinder: CylinderSet
    t: float

    def slice(self, t: float | None = None) -> IntervalSet:
        """``B^{(t)} = ∩_i f_t^{-(n_k - n_i)}(R_i^{(t)})``."""
        t = self.t if t is None else t
        tent = TentMap(t)
        out = None
        for n, r in self.cylinder.terms:
            piece = tent.preimage_set(r.slice(t), self.n - n)
            out = piece if out is None else out & piece
        return out


def cylinder_reduce(tent: TentMap, cyl: CylinderSet) -> ReducedCylinder:
    """Rewrite the cylinder set as ``π_{n_k}^{-1}(B)`` with ``n_k`` the largest index."""
    return ReducedCylinder(cyl.depth - 1, cyl, tent.t)


class CylinderEstimate(NamedTuple):
    exact: float
    mc: float
    mc_stderr: float
    samples: int


def batch_stderr(hits: np.ndarray, batches: int = 50) -> float:
    """Standard error of a mean of correlated indicators.

    Batch means capture serial correlation along the orbit; the binomial
    error (with a half-count continuity correction) is used as a floor so
    that a zero count still gets a positive error.
    """
    n = hits.size
    p = (hits.sum() + 0.5) / (n + 1.0)
    binom = math.sqrt(p * (1 - p) / n)
    size = n // batches
    if size < 2:
        return binom
    means = hits[: size * batches].reshape(batches, size).mean(axis=1)
    return max(float(means.std(ddof=1) / math.sqrt(batches)), binom)


def cylinder_measure(tent: TentMap, cyl: CylinderSet, acim: Density, n: int = 1_000_000,
                     burnin: int = 1000, seed: int = 0,
                     threads: np.ndarray | None = None) -> CylinderEstimate:
    """Induced measure of a cylinder set by exact slice mass and by thread frequency."""
    red = cylinder_reduce(tent, cyl)
    b = red.slice()
    exact = acim.mass(b) if len(b) else 0.0
    if threads is None:
        threads = sample_threads(tent, n, cyl.depth, burnin, seed)
    hits = cyl.contains(threads[:, : cyl.depth], tent.t).astype(float)
    mc = float(hits.mean())
    return CylinderEstimate(float(exact), mc, batch_stderr(hits), hits.size)


def random_rectangle(rng: np.random.Generator, t_center: float, t_spread: float = 0.05,
                     half_range: Sequence[float] = (0.05, 0.2)) -> TiltedRectangle:
    """A tilted rectangle inside the strip whose t-extent covers ``t_center``."""
    for _ in range(10_000):
        a, b = rng.uniform(*half_range, size=2)
        r = TiltedRectangle(float(rng.uniform(-0.8, 0.8)),
                            float(t_center + rng.uniform(-t_spread, t_spread)), float(a), float(b))
        if r.within_strip() and len(r.slice(t_center)):
            return r
    raise RuntimeError("could not place a rectangle")


def random_cylinder_set(rng: np.random.Generator, t_center: float, max_terms: int = 3,
                        max_index: int = 3, nondegenerate: bool = False) -> CylinderSet:
    """Random cylinder set with rectangles near ``t_center``.

    With ``nondegenerate`` the draw is repeated until the reduced slice at
    ``t_center`` has positive length.
    """
    tent = TentMap(t_center)
    for _ in range(10_000):
        k = int(rng.integers(1, max_terms + 1))
        terms = [(int(rng.integers(0, max_index + 1)), random_rectangle(rng, t_center))
                 for _ in range(k)]
        cyl = CylinderSet(tuple(terms))
        if not nondegenerate or cylinder_reduce(tent, cyl).slice().length > 0:
            return cyl
    raise RuntimeError("could not draw a nondegenerate cylinder set")
