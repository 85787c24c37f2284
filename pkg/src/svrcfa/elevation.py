"""Closed-form elevation from an azimuth estimate and the measured pair phases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from svrcfa.array import ArrayGeometry
from svrcfa.features import PhaseVector, pair_gammas

# arcsin is flat at 1, so rounding in the argument alone costs ~1e-6 deg at theta = 90
ROUNDING_SLACK = 64 * np.finfo(float).eps


class AllPairsDegenerate(ValueError):
    """Every pair has |gamma| below the admissibility threshold."""


@dataclass(frozen=True)
class ElevationEstimate:
    theta_hat_deg: float
    n_pairs_used: int
    clamped: bool
    degenerate_pairs_dropped: int


def _trimmed_mean(ratios: np.ndarray, keep: np.ndarray, fraction: float) -> np.ndarray:
    # nan sorts last, so each row starts with its kept ratios
    vals = np.where(keep, ratios, np.nan)
    vals = np.sort(vals, axis=-1)
    counts = keep.sum(-1)
    out = np.empty(vals.shape[:-1])
    for idx in np.ndindex(out.shape):
        n = counts[idx]
        cut = int(np.floor(fraction * n))
        out[idx] = vals[idx][cut : n - cut].mean() if n - 2 * cut > 0 else vals[idx][:n].mean()
    return out


def elevation_batch(
    geom: ArrayGeometry,
    phi_hat_deg,
    phases: np.ndarray,
    gamma_min: float = 0.1,
    trim: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized elevation estimate.

    Returns (theta_hat_deg, n_pairs_used, clamped); rows with no admissible
    pair get NaN and ``n_pairs_used == 0``.
    """
    gamma = pair_gammas(geom, phi_hat_deg)
    phases = np.asarray(phases, dtype=float)
    gamma = np.broadcast_to(gamma, phases.shape)
    keep = np.abs(gamma) >= gamma_min
    used = keep.sum(-1)
    ratios = np.divide(phases, gamma, out=np.zeros_like(phases), where=keep)
    if trim > 0:
        mean_ratio = _trimmed_mean(ratios, keep, trim)
    else:
        mean_ratio = np.divide(ratios.sum(-1), used, out=np.full(used.shape, np.nan), where=used > 0)
    arg = mean_ratio / (2 * np.pi * geom.radius_wavelengths)
    # field of view is theta in [0, 90]: negative arguments clamp to 0
    clamped = (arg > 1 + ROUNDING_SLACK) | (arg < -ROUNDING_SLACK)
    arg = np.where(np.abs(arg - 1) <= ROUNDING_SLACK, 1.0, arg)
    theta = np.degrees(np.arcsin(np.clip(arg, 0.0, 1.0)))
    return theta, used, clamped


def estimate_elevation(
    geom: ArrayGeometry,
    phi_hat_deg: float,
    g: PhaseVector,
    gamma_min: float = 0.1,
    trim: float = 0.0,
) -> ElevationEstimate:
    """theta_hat = arcsin(lambda / (2 pi r) * mean(g_ij / gamma_ij)) over pairs with |gamma_ij| >= gamma_min.

    ``gamma_ij = cos(phi_hat - b_i) - cos(phi_hat - b_j)``. The arcsine
    argument is clamped to [0, 1] and ``clamped`` reports when that happened.
    ``trim`` drops that fraction of ratios from each end before averaging.
    """
    theta, used, clamped = elevation_batch(geom, phi_hat_deg, g.phases, gamma_min, trim)
    n_used = int(used)
    if n_used == 0:
        raise AllPairsDegenerate(f"no pair with |gamma| >= {gamma_min} at phi_hat={phi_hat_deg}")
    return ElevationEstimate(float(theta), n_used, bool(clamped), geom.n_pairs - n_used)
