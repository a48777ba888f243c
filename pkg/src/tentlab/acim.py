"""Estimators for the absolutely continuous invariant measure of a tent map.

Three independent routes are provided:

* Ulam discretization of the transfer operator on uniform bins
  (:func:`ulam_operator` + :func:`stationary_density`),
* occupation histograms of long orbits (:func:`birkhoff_histogram`),
* an exact linear solve on the Markov partition, available when the critical
  orbit is eventually periodic (:func:`markov_exact_density`).

All of them return a :class:`Density`, a piecewise-constant probability
density on uniform bins over ``[-1, 1]``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ._orbits import derive_seed, orbit_chunks
from .tent_map import IntervalSet, NotMarkovError, TentMap, markov_partition

__all__ = [
    "Density",
    "UlamOperator",
    "ConvergenceError",
    "NotMarkovError",
    "ulam_operator",
    "stationary_density",
    "birkhoff_histogram",
    "markov_exact_density",
    "wasserstein1",
    "l1_density_distance",
    "ulam_density",
]

DEFAULT_BINS = 4096


class ConvergenceError(RuntimeError):
    """Power iteration did not reach the requested residual."""

    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class Density:
    """Piecewise-constant probability density on ``nbins`` uniform bins of [-1, 1].

    ``weights[i]`` is the density value on bin ``i`` (not its mass).
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        total = w.sum() * self.binwidth
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"density integrates to {total!r}, not 1")

    @classmethod
    def from_masses(cls, masses) -> "Density":
        m = np.asarray(masses, dtype=float)
        m = np.clip(m, 0.0, None)
        m = m / m.sum()
        return cls(m * m.size / 2.0)

    @classmethod
    def uniform(cls, nbins: int) -> "Density":
        return cls(np.full(nbins, 0.5))

    @property
    def nbins(self) -> int:
        return self.weights.size

    @property
    def binwidth(self) -> float:
        return 2.0 / self.weights.size

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.nbins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def masses(self) -> np.ndarray:
        return self.weights * self.binwidth

    def cdf(self) -> np.ndarray:
        """CDF values at the bin edges."""
        return np.concatenate([[0.0], np.cumsum(self.masses)])

    def mass(self, s: IntervalSet) -> float:
        """Exact mass of a finite union of intervals."""
        if len(s) == 0:
            return 0.0
        ends = s.endpoints()
        e = self.edges
        cdf = self.cdf()
        vals = np.interp(ends.ravel(), e, cdf).reshape(-1, 2)
        return float(np.sum(vals[:, 1] - vals[:, 0]))

    def expect(self, g, quad: int = 8) -> float:
        """Integral of a vectorized function against the density (Gauss-Legendre per bin)."""
        nodes, wq = np.polynomial.legendre.leggauss(quad)
        e = self.edges
        h = self.binwidth
        x = (e[:-1, None] + e[1:, None]) / 2 + nodes[None, :] * h / 2
        return float(np.sum(self.weights[:, None] * wq[None, :] * g(x)) * h / 2)

    def resample(self, nbins: int) -> "Density":
        """Exact re-binning onto ``nbins`` uniform bins via the CDF."""
        new_edges = np.linspace(-1.0, 1.0, nbins + 1)
        cdf = np.interp(new_edges, self.edges, self.cdf())
        return Density.from_masses(np.diff(cdf))

    def to_csv(self, path=None, header: str | None = None) -> str:
        buf = io.StringIO(newline="")
        if header:
            for line in header.splitlines():
                buf.write(f"# {line}\n")
        buf.write("bin_left,bin_right,weight\n")
        e = self.edges
        for a, b, w in zip(e[:-1].tolist(), e[1:].tolist(), self.weights.tolist()):
            buf.write(f"{a!r},{b!r},{w!r}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="")
        return text

    @classmethod
    def from_csv(cls, path) -> "Density":
        rows = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line or line.startswith("#") or line.startswith("bin_left"):
                continue
            rows.append([float(v) for v in line.split(",")])
        arr = np.array(rows)
        return cls(arr[:, 2])


def _check_same_shape(d1: Density, d2: Density):
    if d1.nbins != d2.nbins:
        raise ValueError(f"bin count mismatch: {d1.nbins} vs {d2.nbins}")


def wasserstein1(d1: Density, d2: Density) -> float:
    """W1 distance: exact L1 norm of the CDF difference.

    Both CDFs are piecewise linear on the common bins, so each bin contributes
    the integral of ``|linear|``, split where the difference changes sign.
    """
    _check_same_shape(d1, d2)
    diff = d1.cdf() - d2.cdf()
    a, b = diff[:-1], diff[1:]
    h = d1.binwidth
    same = a * b >= 0
    out = np.where(same, 0.5 * h * np.abs(a + b), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = 0.5 * h * (a * a + b * b) / (np.abs(a) + np.abs(b))
    out = np.where(same, out, cross)
    return float(out.sum())


def l1_density_distance(d1: Density, d2: Density) -> float:
    _check_same_shape(d1, d2)
    return float(np.abs(d1.weights - d2.weights).sum() * d1.binwidth)


@dataclass(frozen=True)
class UlamOperator:
    """Row-stochastic Ulam matrix ``P[i, j] = |B_i ∩ f^{-1}(B_j)| / |B_i|``."""

    t: float
    matrix: sp.csr_matrix

    @property
    def nbins(self) -> int:
        return self.matrix.shape[0]

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        m = self.matrix
        return [
            list(zip(m.indices[m.indptr[i]:m.indptr[i + 1]].tolist(),
                     m.data[m.indptr[i]:m.indptr[i + 1]].tolist()))
            for i in range(self.nbins)
        ]

    def push(self, masses: np.ndarray) -> np.ndarray:
        """Transfer-operator action on bin masses."""
        return self.matrix.T @ masses


def _snap(u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    r = np.rint(u)
    return np.where(np.abs(u - r) <= tol, r, u)


def ulam_operator(tent: TentMap, nbins: int = DEFAULT_BINS) -> UlamOperator:
    """Exact Ulam matrix on ``nbins`` uniform bins.

    ``f_t`` is affine on each monotone piece of a bin, so Lebesgue measure on
    the piece pushes forward to the uniform distribution on its image and the
    transition weights are ratios of overlap lengths.  Image endpoints within
    1e-9 bin widths of a bin edge are snapped onto it, which keeps aligned
    cases (e.g. ``t = 2`` with an even bin count) free of spurious entries.
    """
    if nbins < 2:
        raise ValueError("nbins must be >= 2")
    h = 2.0 / nbins
    edges = np.linspace(-1.0, 1.0, nbins + 1)
    c = tent.c
    lo_e, hi_e = edges[:-1], edges[1:]
    # split bins at the critical point
    has_c = (lo_e < c) & (c < hi_e)
    p = np.concatenate([lo_e, np.full(has_c.sum(), c)])
    q = np.concatenate([np.where(has_c, c, hi_e), hi_e[has_c]])
    src = np.concatenate([np.arange(nbins), np.nonzero(has_c)[0]])
    fp, fq = tent.eval(p), tent.eval(q)
    ulo = _snap((np.minimum(fp, fq) + 1.0) / h)
    uhi = _snap((np.maximum(fp, fq) + 1.0) / h)
    piece_w = (q - p) / h

    rows, cols, vals = [], [], []
    span = uhi - ulo
    for k in range(p.size):
        if piece_w[k] <= 0.0:
            continue
        j0 = int(math.floor(ulo[k]))
        j1 = max(int(math.ceil(uhi[k])), j0 + 1)
        for j in range(max(j0, 0), min(j1, nbins)):
            if span[k] > 0:
                frac = (min(uhi[k], j + 1) - max(ulo[k], j)) / span[k]
            else:
                frac = 1.0
            if frac > 0:
                rows.append(src[k])
                cols.append(j)
                vals.append(frac * piece_w[k])
    m = sp.csr_matrix((vals, (rows, cols)), shape=(nbins, nbins))
    m.sum_duplicates()
    # exact up to rounding; renormalize the rounding away
    rs = np.asarray(m.sum(axis=1)).ravel()
    m = sp.diags(1.0 / rs) @ m
    return UlamOperator(tent.t, sp.csr_matrix(m))


def stationary_density(op: UlamOperator, tol: float = 1e-10,
                       maxiter: int = 100_000) -> Density:
    """Invariant density of the Ulam operator by power iteration.

    The iteration uses the lazy chain ``(I + P^T) / 2``, which has the same
    fixed points as ``P^T`` but no eigenvalue on the unit circle other than 1.
    This matters for slopes below sqrt(2), where the tent map swaps two
    subintervals and the plain iteration oscillates with period two.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    pt = sp.csr_matrix(op.matrix.T)
    n = op.nbins
    x = np.full(n, 1.0 / n)
    res = np.inf
    for it in range(maxiter):
        y = pt @ x
        res = np.abs(y - x).sum()
        if res <= tol:
            break
        x = 0.5 * (x + y)
        x /= x.sum()
    else:
        y = pt @ x
        res = np.abs(y - x).sum()
        if res > tol:
            raise ConvergenceError(
                f"power iteration residual {res:.3e} > tol {tol:.1e} after {maxiter} steps", res)
    return Density.from_masses(x)


def ulam_density(tent: TentMap, nbins: int = DEFAULT_BINS, tol: float = 1e-10,
                 maxiter: int = 100_000) -> Density:
    return stationary_density(ulam_operator(tent, nbins), tol, maxiter)


def birkhoff_histogram(tent: TentMap, x0: float | None = None, n: int = 1_000_000,
                       nbins: int = DEFAULT_BINS, burnin: int = 1000,
                       seed: int = 0) -> Density:
    """Normalized occupation histogram of the iterates ``burnin, ..., n-1``."""
    if not n > burnin >= 0:
        raise ValueError("need n > burnin >= 0")
    if x0 is None:
        x0 = np.random.default_rng(seed).uniform(-1.0, 1.0)
    counts = np.zeros(nbins, dtype=np.int64)
    pos = 0
    for block in orbit_chunks(tent.t, x0, n, derive_seed(seed, 1)):
        start = max(burnin - pos, 0)
        pos += block.size
        if start >= block.size:
            continue
        idx = np.floor((block[start:] + 1.0) * (nbins / 2.0)).astype(np.int64)
        np.clip(idx, 0, nbins - 1, out=idx)
        counts += np.bincount(idx, minlength=nbins)
    assert counts.sum() == n - burnin
    return Density.from_masses(counts)


def markov_exact_density(tent: TentMap, nbins: int = DEFAULT_BINS, depth: int = 64,
                         tol: float = 1e-9) -> Density:
    """Acim from the exact transfer system on the Markov partition.

    Requires an eventually periodic critical orbit.  The partition points are
    the critical orbit together with ``±1``; every partition interval maps
    affinely onto a union of partition intervals, so the invariant density is
    constant on each of them and solves a finite linear system.
    """
    density, pts = markov_piecewise_density(tent, depth, tol)
    cdf = np.concatenate([[0.0], np.cumsum(density * np.diff(pts))])
    edges = np.linspace(-1.0, 1.0, nbins + 1)
    return Density.from_masses(np.diff(np.interp(edges, pts, cdf)))


def markov_piecewise_density(tent: TentMap, depth: int = 64, tol: float = 1e-9):
    """Density values on the Markov partition intervals, and the partition."""
    pts = markov_partition(tent, depth, tol)
    k = pts.size - 1
    lo, hi = pts[:-1], pts[1:]
    flo, fhi = tent.eval(lo), tent.eval(hi)
    img_lo, img_hi = np.minimum(flo, fhi), np.maximum(flo, fhi)
    # cover[j, i]: interval j's image contains interval i
    cover = (img_lo[:, None] <= lo[None, :] + tol) & (hi[None, :] <= img_hi[:, None] + tol)
    # rho_i = sum_j cover[j, i] rho_j / t, plus normalization sum_i rho_i |J_i| = 1
    a = cover.T.astype(float) / tent.t - np.eye(k)
    a = np.vstack([a, (hi - lo)[None, :]])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    rho, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = np.abs(a @ rho - rhs).max()
    if resid > 1e-9:
        raise NotMarkovError(f"Markov transfer system inconsistent (residual {resid:.2e})")
    return np.clip(rho, 0.0, None), pts
