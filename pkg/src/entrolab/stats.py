"""Histograms, moment tests and binned regression used by all experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = ["Histogram1D", "MomentReport", "moment_tests", "binned_regression", "BinnedRegression"]


@dataclass(frozen=True)
class Histogram1D:
    """Uniform-bin histogram with explicit normalization mode.

    mode "mass": counts sum to 1.  mode "density": integrates to 1, so bar
    heights are comparable with probability densities.
    """

    edges: np.ndarray
    counts: np.ndarray
    mode: str = "density"

    def __post_init__(self) -> None:
        widths = np.diff(self.edges)
        if not np.allclose(widths, widths[0], rtol=1e-9):
            raise ValueError("edges must be uniform")
        if self.mode not in ("density", "mass"):
            raise ValueError("mode must be 'density' or 'mass'")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def densities(self) -> np.ndarray:
        if self.mode == "density":
            return self.counts
        return self.counts / self.width

    @staticmethod
    def from_samples(samples: np.ndarray, edges: np.ndarray, mode: str = "density") -> "Histogram1D":
        samples = np.asarray(samples).ravel()
        counts, _ = np.histogram(samples, bins=edges)
        total = counts.sum()
        if total == 0:
            raise ValueError("no samples fall inside the histogram range")
        frac = counts / total
        if mode == "density":
            frac = frac / np.diff(edges)
        return Histogram1D(np.asarray(edges, dtype=float), frac, mode)

    def l1_distance(self, density_on_centers: np.ndarray) -> float:
        """L1 distance between this histogram and a density sampled at bin centers.

        Both sides are treated as piecewise-constant on the bins; the target
        is renormalized over the binned range so the comparison is between
        two probability densities on the same support.
        """
        target = np.asarray(density_on_centers, dtype=float)
        target = target / (target.sum() * self.width)
        return float(np.abs(self.densities() - target).sum() * self.width)


@dataclass(frozen=True)
class MomentReport:
    names: tuple
    estimates: tuple
    stderrs: tuple
    targets: tuple
    tolerances: tuple
    passed: bool

    def lines(self) -> list[str]:
        out = []
        for nm, est, se, tg, tl in zip(self.names, self.estimates, self.stderrs, self.targets, self.tolerances):
            out.append(f"{nm}: {est:.6g} (se {se:.2g}) target {tg:.6g} tol {tl:.3g}")
        return out


def moment_tests(
    samples: np.ndarray,
    mean: Optional[tuple[float, float]] = None,
    variance: Optional[tuple[float, float]] = None,
    excess_kurtosis: Optional[tuple[float, float]] = None,
) -> MomentReport:
    """Compare sample moments against (target, tolerance) pairs.

    A moment passes when the estimate is within its tolerance of the target
    or within 3 standard errors, whichever is looser.  Requires at least 30
    samples; with no targets supplied the report passes vacuously.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 30:
        raise ValueError("moment_tests needs >= 30 samples")
    names, ests, ses, tgs, tols = [], [], [], [], []
    m1 = float(x.mean())
    xc = x - m1
    m2 = float(np.mean(xc**2))
    m4 = float(np.mean(xc**4))
    if mean is not None:
        names.append("mean")
        ests.append(m1)
        ses.append(float(np.sqrt(m2 / n)))
        tgs.append(mean[0])
        tols.append(mean[1])
    if variance is not None:
        names.append("variance")
        ests.append(m2 * n / (n - 1))
        ses.append(float(np.sqrt(max(m4 - m2**2, 0.0) / n)))
        tgs.append(variance[0])
        tols.append(variance[1])
    if excess_kurtosis is not None:
        names.append("excess_kurtosis")
        kurt = m4 / m2**2 - 3.0 if m2 > 0 else 0.0
        ests.append(kurt)
        ses.append(float(np.sqrt(24.0 / n)))  # normal-theory stderr
        tgs.append(excess_kurtosis[0])
        tols.append(excess_kurtosis[1])
    ok = True
    for est, se, tg, tl in zip(ests, ses, tgs, tols):
        ok = ok and (abs(est - tg) <= max(tl, 3.0 * se))
    return MomentReport(tuple(names), tuple(ests), tuple(ses), tuple(tgs), tuple(tols), ok)


@dataclass(frozen=True)
class BinnedRegression:
    centers: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    counts: np.ndarray
    reliable: np.ndarray  # count >= count_floor

    def __iter__(self):
        return iter(zip(self.centers, self.means, self.stderrs, self.counts))


def binned_regression(
    x: np.ndarray, y: np.ndarray, edges: np.ndarray, count_floor: int = 100
) -> BinnedRegression:
    """Per-bin mean, standard error and count of y conditioned on x.

    Bins with fewer than ``count_floor`` finite pairs are flagged
    unreliable.  Raises when no finite pair falls inside the edges.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    good = np.isfinite(x) & np.isfinite(y)
    x, y = x[good], y[good]
    edges = np.asarray(edges, dtype=float)
    nb = len(edges) - 1
    idx = np.digitize(x, edges) - 1
    inside = (idx >= 0) & (idx < nb)
    if not inside.any():
        raise ValueError("no finite (x, y) pairs fall inside the bin edges")
    idx, y = idx[inside], y[inside]
    counts = np.bincount(idx, minlength=nb).astype(float)
    sums = np.bincount(idx, weights=y, minlength=nb)
    sq = np.bincount(idx, weights=y * y, minlength=nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts
        var = sq / counts - means**2
        stderrs = np.sqrt(np.maximum(var, 0.0) / np.maximum(counts - 1.0, 1.0))
    centers = 0.5 * (edges[:-1] + edges[1:])
    return BinnedRegression(centers, means, stderrs, counts.astype(int), counts >= count_floor)
