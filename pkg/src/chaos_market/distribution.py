"""Return-distribution diagnostics: phase portraits, histograms, kurtosis.

The one-step return map is bounded in [-0.4 a1, 0.4 a1], so in the chaotic
regime the (r_{t-1}, r_t) pairs trace a bounded attractor and the return
histogram is compared against the zero-mean Gaussian of equal variance.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_BURN_IN = 1000
DEFAULT_BIN_COUNT = 200


@dataclass(frozen=True)
class Histogram:
    """Normalized return density plus a matched zero-mean Gaussian overlay.

    ``matched_gaussian`` holds the Gaussian density at the bin centers, or
    None when the sample variance is degenerate (all returns equal).
    """

    bin_edges: np.ndarray
    densities: np.ndarray
    sample_variance: float
    matched_gaussian: np.ndarray | None
    degenerate: bool = False

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def phase_portrait(series, burn_in=DEFAULT_BURN_IN):
    """Consecutive-return pairs (r_{t-1}, r_t) after discarding ``burn_in`` points."""
    r = np.asarray(series, dtype=float)[burn_in:]
    if r.shape[0] < 2:
        raise ValueError("need at least two returns after burn-in")
    return np.column_stack([r[:-1], r[1:]])


def return_histogram(series, bin_count=DEFAULT_BIN_COUNT, burn_in=0):
    """Density histogram of returns with a matched Gaussian overlay.

    The overlay is the zero-mean normal whose variance equals the raw second
    moment of the sample (zero-mean return convention).
    """
    r = np.asarray(series, dtype=float)[burn_in:]
    if r.shape[0] < 1000:
        raise ValueError(f"need at least 1000 returns, got {r.shape[0]}")
    if bin_count < 10:
        raise ValueError(f"need at least 10 bins, got {bin_count}")
    densities, edges = np.histogram(r, bins=bin_count, density=True)
    variance = float(np.mean(r * r))
    if np.var(r) == 0.0:
        return Histogram(bin_edges=edges, densities=densities,
                         sample_variance=variance, matched_gaussian=None,
                         degenerate=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    overlay = np.exp(-(centers**2) / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)
    return Histogram(bin_edges=edges, densities=densities,
                     sample_variance=variance, matched_gaussian=overlay)


def excess_kurtosis(series, burn_in=0):
    """Fourth standardized moment minus 3 (zero for a Gaussian)."""
    r = np.asarray(series, dtype=float)[burn_in:]
    if r.shape[0] < 1000:
        raise ValueError(f"need at least 1000 returns, got {r.shape[0]}")
    var = float(np.var(r))
    if var == 0.0:
        raise ValueError("degenerate sample: all returns equal")
    m = r.mean()
    return float(np.mean((r - m) ** 4) / var**2 - 3.0)


def exceeds_overlay_in_tails(hist, threshold_sigmas=2.0):
    """True when every populated bin beyond ``threshold_sigmas`` sits above the overlay.

    This is the operational form of the visual fat-tail comparison: the
    empirical density dominates the matched Gaussian in the far bins.
    """
    if hist.matched_gaussian is None:
        raise ValueError("histogram is degenerate; no overlay to compare")
    sigma = np.sqrt(hist.sample_variance)
    far = np.abs(hist.bin_centers) > threshold_sigmas * sigma
    populated = far & (hist.densities > 0)
    if not populated.any():
        return False
    return bool(np.all(hist.densities[populated] > hist.matched_gaussian[populated]))
