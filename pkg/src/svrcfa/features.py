"""Covariance phase features.

The SVR input is built from the arguments of the strictly upper-triangular
covariance entries, normalized to unit length. Normalizing removes the common
factor 2 pi (r/lambda) sin(theta), so the feature depends on azimuth only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from svrcfa.array import ArrayGeometry, SnapshotMatrix

NOISELESS_BORESIGHT_TOL = 1e-6


class AmbiguityUnresolved(ValueError):
    """Two 2*pi offsets explain a wrapped phase equally well."""


class _Boresight:
    """Marker returned when the phase vector vanishes (theta = 0, azimuth undefined)."""

    theta_deg = 0.0

    def __repr__(self):
        return "BORESIGHT"

    def __reduce__(self):
        return "BORESIGHT"


BORESIGHT = _Boresight()


@lru_cache(maxsize=None)
def pair_index(n_elements: int) -> tuple[tuple[int, int], ...]:
    """Row-major upper-triangular pairs (0,1),(0,2),...,(N-2,N-1), zero-based."""
    return tuple((i, j) for i in range(n_elements) for j in range(i + 1, n_elements))


def _pair_arrays(n_elements: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.array(pair_index(n_elements))
    return pairs[:, 0], pairs[:, 1]


@dataclass(frozen=True)
class PhaseVector:
    """Pairwise phases, shape (..., P) with P = N(N-1)/2, in ``pair_index`` order.

    ``degenerate`` marks entries whose covariance element had zero modulus.
    """

    phases: np.ndarray
    n_elements: int
    degenerate: np.ndarray | None = None

    def __post_init__(self):
        p = self.n_elements * (self.n_elements - 1) // 2
        if self.phases.shape[-1] != p:
            raise ValueError(f"expected {p} phases for N={self.n_elements}, got {self.phases.shape[-1]}")
        if self.degenerate is None:
            object.__setattr__(self, "degenerate", np.zeros(self.phases.shape, dtype=bool))

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return pair_index(self.n_elements)


def sample_covariance(x) -> np.ndarray:
    """(1/M) sum_m x(m) x(m)^H, made exactly Hermitian.

    Accepts a ``SnapshotMatrix`` or an array of shape (..., N, M).
    """
    data = x.data if isinstance(x, SnapshotMatrix) else np.asarray(x)
    m = data.shape[-1]
    if m < 1:
        raise ValueError("need at least one snapshot")
    r = data @ np.swapaxes(data.conj(), -1, -2) / m
    return 0.5 * (r + np.swapaxes(r.conj(), -1, -2))


def extract_phase_vector(r: np.ndarray) -> PhaseVector:
    """Principal-value arguments of R[i, j] for i < j; works on stacks of matrices."""
    r = np.asarray(r)
    n = r.shape[-1]
    rows, cols = _pair_arrays(n)
    entries = r[..., rows, cols]
    degenerate = np.abs(entries) == 0
    phases = np.where(degenerate, 0.0, np.angle(entries))
    return PhaseVector(phases, n, degenerate)


def chord_factors(geom: ArrayGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair (cos b_i - cos b_j, sin b_i - sin b_j).

    Noiseless phases are u cos(phi) * c + u sin(phi) * s with
    u = 2 pi (r/lambda) sin(theta).
    """
    rows, cols = _pair_arrays(geom.n_elements)
    beta = geom.element_azimuths
    return np.cos(beta[rows]) - np.cos(beta[cols]), np.sin(beta[rows]) - np.sin(beta[cols])


def pair_gammas(geom: ArrayGeometry, phi_deg) -> np.ndarray:
    """cos(phi - b_i) - cos(phi - b_j) per pair, shape (..., P)."""
    c, s = chord_factors(geom)
    phi = np.radians(np.asarray(phi_deg, dtype=float))[..., None]
    return np.cos(phi) * c + np.sin(phi) * s


def noiseless_phase(geom: ArrayGeometry, theta_deg, phi_deg) -> PhaseVector:
    """Analytic pair phases without principal-value reduction."""
    u = 2 * np.pi * geom.radius_wavelengths * np.sin(np.radians(np.asarray(theta_deg, dtype=float)))
    return PhaseVector(u[..., None] * pair_gammas(geom, phi_deg), geom.n_elements)


def boresight_tolerance(n_pairs: int, sigma_sq: float = 0.0, n_snapshots: int = 1, sigma_s_sq: float = 1.0) -> float:
    """Threshold on ||g|| below which the source is declared at boresight."""
    if sigma_sq <= 0:
        return NOISELESS_BORESIGHT_TOL
    return max(NOISELESS_BORESIGHT_TOL, math.sqrt(n_pairs) * sigma_sq / (n_snapshots * sigma_s_sq))


def _phases(g) -> np.ndarray:
    return g.phases if isinstance(g, PhaseVector) else np.asarray(g, dtype=float)


def normalize_batch(g, boresight_tol: float = NOISELESS_BORESIGHT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise g / ||g||; boresight rows come back as zeros with the mask set."""
    phases = _phases(g)
    norm = np.linalg.norm(phases, axis=-1, keepdims=True)
    boresight = norm[..., 0] <= boresight_tol
    z = np.divide(phases, norm, out=np.zeros_like(phases), where=~boresight[..., None])
    return z, boresight


def normalize_features(g, boresight_tol: float = NOISELESS_BORESIGHT_TOL):
    """Unit-norm feature vector, or ``BORESIGHT`` when ||g|| <= ``boresight_tol``."""
    z, boresight = normalize_batch(np.atleast_1d(_phases(g)), boresight_tol)
    if boresight:
        return BORESIGHT
    return z


def max_pair_phase(geom: ArrayGeometry, theta_max_deg: float = 90.0) -> np.ndarray:
    """Largest noiseless |phase| each pair can reach for theta <= theta_max."""
    c, s = chord_factors(geom)
    u_max = 2 * np.pi * geom.radius_wavelengths * math.sin(math.radians(theta_max_deg))
    return u_max * np.hypot(c, s)


def unwrap_batch(
    phases: np.ndarray, geom: ArrayGeometry, theta_max_deg: float = 90.0, tie_tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized core of ``unwrap_phases``; returns (unwrapped, tie_mask per row)."""
    phases = np.asarray(phases, dtype=float)
    bound = max_pair_phase(geom, theta_max_deg)
    ambiguous = bound > np.pi + 1e-12
    tie = np.zeros(phases.shape[:-1], dtype=bool)
    if not ambiguous.any():
        return phases, tie

    c, s = chord_factors(geom)
    design = np.stack([c, s], axis=1)
    safe = ~ambiguous
    if np.linalg.matrix_rank(design[safe]) < 2:
        raise AmbiguityUnresolved("unambiguous pairs do not determine the phase plane")

    # fit g ~ px * c + py * s on the unambiguous pairs, predict the rest
    coef = phases[..., safe] @ np.linalg.pinv(design[safe]).T
    predicted = coef @ design[ambiguous].T
    k_max = int(math.ceil((bound.max() - np.pi) / (2 * np.pi)))
    offsets = 2 * np.pi * np.arange(-k_max, k_max + 1)
    residual = np.abs(phases[..., ambiguous, None] + offsets - predicted[..., None])
    order = np.sort(residual, axis=-1)
    tie = np.any(order[..., 1] - order[..., 0] <= tie_tol, axis=-1)
    out = phases.copy()
    out[..., ambiguous] += offsets[np.argmin(residual, axis=-1)]
    return out, tie


def unwrap_phases(
    g: PhaseVector, geom: ArrayGeometry, theta_max_deg: float = 90.0, tie_tol: float = 1e-12
) -> PhaseVector:
    """Undo 2*pi wraps on pairs whose phase can exceed pi in magnitude.

    Pairs that can never wrap (for N = 3 at half-wavelength spacing that is
    all of them) fix the single-source phase plane g = u (cos phi c + sin phi s);
    each wrappable pair then takes the 2*pi*k offset that agrees best with it.
    Raises ``AmbiguityUnresolved`` on a tie.
    """
    out, tie = unwrap_batch(g.phases, geom, theta_max_deg, tie_tol)
    if np.any(tie):
        raise AmbiguityUnresolved("two phase offsets fit equally well")
    return PhaseVector(out, g.n_elements, g.degenerate)
