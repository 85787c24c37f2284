"""Uniform circular array geometry and single-source snapshot simulation.

Angles at the public surface are in degrees; ``theta`` is elevation measured
down from the array normal (z axis) and ``phi`` is azimuth measured
counter-clockwise from the x axis, where the first element sits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NOISELESS = math.inf  # snr_db sentinel: sigma = 0


@dataclass(frozen=True)
class ArrayGeometry:
    """UCA with ``n_elements`` antennas on a circle of radius ``radius_wavelengths`` (r / lambda)."""

    n_elements: int
    radius_wavelengths: float
    element_azimuths: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 3:
            raise ValueError(f"UCA needs at least 3 elements, got {self.n_elements}")
        r = float(self.radius_wavelengths)
        if not (math.isfinite(r) and r > 0):
            raise ValueError(f"radius must be positive and finite, got {r}")
        az = 2 * np.pi * np.arange(self.n_elements) / self.n_elements
        az.setflags(write=False)
        object.__setattr__(self, "element_azimuths", az)

    @classmethod
    def from_spacing(cls, n_elements: int, spacing_wavelengths: float = 0.5) -> "ArrayGeometry":
        """Build a UCA whose adjacent-element chord equals ``spacing_wavelengths``.

        Uses d = 2 r sin(pi / N).
        """
        if n_elements < 3:
            raise ValueError(f"UCA needs at least 3 elements, got {n_elements}")
        return cls(n_elements, spacing_wavelengths / (2 * math.sin(math.pi / n_elements)))

    @property
    def n_pairs(self) -> int:
        return self.n_elements * (self.n_elements - 1) // 2


@dataclass(frozen=True)
class SourceTruth:
    theta_deg: float
    phi_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_deg) and math.isfinite(self.phi_deg)):
            raise ValueError("source angles must be finite")


@dataclass(frozen=True)
class SnapshotMatrix:
    """N x M complex baseband samples (antennas along rows, snapshots along columns)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise ValueError(f"expected an N x M matrix with M >= 1, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("snapshot matrix contains non-finite entries")

    @property
    def n_antennas(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]


def steering_vector(geom: ArrayGeometry, theta_deg, phi_deg) -> np.ndarray:
    """Array response exp(j 2 pi (r/lambda) sin(theta) cos(phi - beta_n)).

    ``theta_deg`` and ``phi_deg`` broadcast against each other; the element
    axis is appended last, so scalar angles give a length-N vector.
    """
    theta = np.radians(np.asarray(theta_deg, dtype=float))[..., None]
    phi = np.radians(np.asarray(phi_deg, dtype=float))[..., None]
    phase = 2 * np.pi * geom.radius_wavelengths * np.sin(theta) * np.cos(phi - geom.element_azimuths)
    return np.exp(1j * phase)


def noise_power(snr_db: float, signal_power: float = 1.0) -> float:
    """Per-element noise power sigma^2 for a per-element SNR of sigma_s^2 / sigma^2."""
    if snr_db == NOISELESS:
        return 0.0
    return signal_power * 10.0 ** (-snr_db / 10.0)


def _complex_gaussian(rng: np.random.Generator, shape, power: float) -> np.ndarray:
    scale = math.sqrt(power / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def simulate_batch(
    geom: ArrayGeometry,
    source: SourceTruth,
    snr_db: float,
    n_snapshots: int,
    rng: np.random.Generator,
    n_batch: int,
    signal_power: float = 1.0,
) -> np.ndarray:
    """Draw ``n_batch`` independent snapshot matrices, shape (n_batch, N, M)."""
    if n_snapshots < 1:
        raise ValueError(f"need at least one snapshot, got {n_snapshots}")
    a = steering_vector(geom, source.theta_deg, source.phi_deg)
    s = _complex_gaussian(rng, (n_batch, 1, n_snapshots), signal_power)
    x = a[None, :, None] * s
    sigma_sq = noise_power(snr_db, signal_power)
    if sigma_sq > 0:
        x = x + _complex_gaussian(rng, (n_batch, geom.n_elements, n_snapshots), sigma_sq)
    return x


def simulate_snapshots(
    geom: ArrayGeometry,
    source: SourceTruth,
    snr_db: float,
    n_snapshots: int,
    seed: int,
    signal_power: float = 1.0,
) -> SnapshotMatrix:
    """Simulate x(m) = a s(m) + w(m) for m = 1..M with a seeded generator.

    Source symbols and noise are circularly symmetric complex Gaussian.
    ``snr_db = NOISELESS`` (``math.inf``) drops the noise term entirely.
    """
    rng = np.random.default_rng(seed)
    x = simulate_batch(geom, source, snr_db, n_snapshots, rng, 1, signal_power)
    return SnapshotMatrix(x[0])


def ideal_covariance(
    geom: ArrayGeometry, source: SourceTruth, sigma_s_sq: float, sigma_sq: float
) -> np.ndarray:
    """Model covariance sigma_s^2 a a^H + sigma^2 I."""
    if sigma_s_sq <= 0 or sigma_sq < 0:
        raise ValueError("need sigma_s_sq > 0 and sigma_sq >= 0")
    a = steering_vector(geom, source.theta_deg, source.phi_deg)
    r = sigma_s_sq * np.outer(a, a.conj()) + sigma_sq * np.eye(geom.n_elements)
    return 0.5 * (r + r.conj().T)
