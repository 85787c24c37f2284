"""2D MUSIC grid search for a single source on a UCA."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from svrcfa.array import ArrayGeometry, steering_vector
from svrcfa.linalg import hermitian_evd

SPECTRUM_FLOOR = 1e-300


@dataclass(frozen=True)
class SpectrumGrid:
    theta_points: np.ndarray
    phi_points: np.ndarray
    values: np.ndarray | None = None

    @classmethod
    def uniform(cls, theta=(1.0, 90.0, 1.0), phi=(0.0, 180.0, 1.0)) -> "SpectrumGrid":
        """Inclusive (start, stop, step) ranges; the defaults are the 90 x 181 one-degree FOV grid."""

        def span(start, stop, step):
            count = int(round((stop - start) / step)) + 1
            return start + step * np.arange(count)

        return cls(span(*theta), span(*phi))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.theta_points), len(self.phi_points)


@dataclass(frozen=True)
class MusicEstimate:
    theta_deg: float
    phi_deg: float
    degenerate_subspace: bool


@lru_cache(maxsize=16)
def _grid_manifold(n_elements: int, radius: float, theta: tuple, phi: tuple) -> np.ndarray:
    geom = ArrayGeometry(n_elements, radius)
    tt, pp = np.meshgrid(np.array(theta), np.array(phi), indexing="ij")
    return steering_vector(geom, tt.ravel(), pp.ravel())  # (G, N), theta-major


def grid_manifold(geom: ArrayGeometry, grid: SpectrumGrid) -> np.ndarray:
    return _grid_manifold(
        geom.n_elements, geom.radius_wavelengths, tuple(grid.theta_points), tuple(grid.phi_points)
    )


def noise_projector(r: np.ndarray, n_sources: int = 1, gap_tol: float = 1e-9):
    """Return (E_n E_n^H, degenerate) for Hermitian ``r`` of shape (..., N, N).

    ``degenerate`` is set where the gap between the last signal eigenvalue
    and the first noise eigenvalue is below ``gap_tol`` relative to the largest.
    """
    n = r.shape[-1]
    if not 1 <= n_sources < n:
        raise ValueError(f"n_sources must be in [1, {n - 1}]")
    evd = hermitian_evd(r)
    w = evd.eigenvalues
    en = evd.eigenvectors[..., n_sources:]
    gap = w[..., n_sources - 1] - w[..., n_sources]
    degenerate = gap <= gap_tol * np.maximum(np.abs(w[..., 0]), np.finfo(float).tiny)
    return en @ np.swapaxes(en.conj(), -1, -2), degenerate


def spectrum_from_projector(projector: np.ndarray, manifold: np.ndarray) -> np.ndarray:
    """1 / (a^H P a) for every manifold row; leading batch dims of ``projector`` are kept."""
    quad = np.einsum("gi,...ij,gj->...g", manifold.conj(), projector, manifold, optimize=True).real
    return 1.0 / np.maximum(quad, SPECTRUM_FLOOR)


def music_spectrum(r: np.ndarray, geom: ArrayGeometry, grid: SpectrumGrid, n_sources: int = 1) -> SpectrumGrid:
    proj, _ = noise_projector(np.asarray(r), n_sources)
    values = spectrum_from_projector(proj, grid_manifold(geom, grid)).reshape(grid.shape)
    return SpectrumGrid(grid.theta_points, grid.phi_points, values)


def music_batch(
    r: np.ndarray, geom: ArrayGeometry, grid: SpectrumGrid, n_sources: int = 1, chunk: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid argmax for a stack of covariances (B, N, N) -> (theta, phi, degenerate)."""
    manifold = grid_manifold(geom, grid)
    proj, degenerate = noise_projector(r, n_sources)
    best = np.empty(len(r), dtype=int)
    for start in range(0, len(r), chunk):
        best[start : start + chunk] = np.argmax(spectrum_from_projector(proj[start : start + chunk], manifold), axis=-1)
    ti, pi = np.unravel_index(best, grid.shape)
    return grid.theta_points[ti], grid.phi_points[pi], degenerate


def music_estimate(
    r: np.ndarray, geom: ArrayGeometry, grid: SpectrumGrid | None = None, n_sources: int = 1
) -> MusicEstimate:
    """Peak of 1 / ||E_n^H a(theta, phi)||^2 over the grid.

    Ties go to the lowest theta index, then the lowest phi index.
    """
    grid = grid or SpectrumGrid.uniform()
    theta, phi, degenerate = music_batch(np.asarray(r)[None], geom, grid, n_sources)
    return MusicEstimate(float(theta[0]), float(phi[0]), bool(degenerate[0]))
