"""End-to-end SVR-CFA estimation from a covariance matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from svrcfa.array import ArrayGeometry
from svrcfa.elevation import elevation_batch
from svrcfa.features import (
    NOISELESS_BORESIGHT_TOL,
    extract_phase_vector,
    normalize_batch,
    unwrap_batch,
)
from svrcfa.svr import SvrModel, predict_batch


@dataclass(frozen=True)
class DoaEstimate:
    theta_deg: float
    phi_deg: float  # nan at boresight
    boresight: bool = False
    ambiguous: bool = False
    azimuth_clamped: bool = False
    elevation_clamped: bool = False
    n_pairs_used: int = 0

    def as_dict(self) -> dict:
        return {
            "theta_deg": self.theta_deg,
            "phi_deg": None if math.isnan(self.phi_deg) else self.phi_deg,
            "boresight": self.boresight,
            "ambiguous": self.ambiguous,
            "azimuth_clamped": self.azimuth_clamped,
            "elevation_clamped": self.elevation_clamped,
            "n_pairs_used": self.n_pairs_used,
        }


@dataclass(frozen=True)
class BatchEstimates:
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    boresight: np.ndarray
    ambiguous: np.ndarray
    azimuth_clamped: np.ndarray
    elevation_clamped: np.ndarray
    n_pairs_used: np.ndarray

    def __getitem__(self, k) -> DoaEstimate:
        return DoaEstimate(
            float(self.theta_deg[k]),
            float(self.phi_deg[k]),
            bool(self.boresight[k]),
            bool(self.ambiguous[k]),
            bool(self.azimuth_clamped[k]),
            bool(self.elevation_clamped[k]),
            int(self.n_pairs_used[k]),
        )


def svr_cfa_batch(
    model: SvrModel,
    geom: ArrayGeometry,
    r: np.ndarray,
    boresight_tol: float = NOISELESS_BORESIGHT_TOL,
    theta_max_deg: float = 90.0,
    gamma_min: float = 0.1,
    trim: float = 0.0,
) -> BatchEstimates:
    """Covariances (B, N, N) -> azimuth by SVR, then elevation in closed form."""
    g = extract_phase_vector(r)
    phases, ambiguous = unwrap_batch(g.phases, geom, theta_max_deg)
    z, boresight = normalize_batch(phases, boresight_tol)
    phi, az_clamped = predict_batch(model, z)
    theta, used, el_clamped = elevation_batch(geom, phi, phases, gamma_min, trim)
    theta = np.where(boresight, 0.0, theta)
    phi = np.where(boresight, np.nan, phi)
    return BatchEstimates(theta, phi, boresight, ambiguous, az_clamped & ~boresight, el_clamped & ~boresight, used)


def estimate_doa(model: SvrModel, geom: ArrayGeometry, r: np.ndarray, **kwargs) -> DoaEstimate:
    """Single-covariance wrapper around ``svr_cfa_batch``."""
    return svr_cfa_batch(model, geom, np.asarray(r)[None], **kwargs)[0]
