"""Cyclic Jacobi eigendecomposition for (stacks of) small Hermitian matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # (..., N), descending
    eigenvectors: np.ndarray  # (..., N, N), columns orthonormal
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def _off_norm(a: np.ndarray) -> np.ndarray:
    off = a - np.einsum("...ii->...i", a)[..., None] * np.eye(a.shape[-1])
    return np.sqrt(np.sum(np.abs(off) ** 2, axis=(-2, -1)))


def hermitian_evd(r: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomposition:
    """Eigen-decompose Hermitian ``r`` (shape (..., N, N)) by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of a[p, q] with a diagonal unitary,
    then applies the real symmetric Jacobi rotation that zeroes it. Sweeps
    stop once the off-diagonal Frobenius norm is below ``tol * ||r||_F``.
    """
    a = np.array(r, dtype=complex)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got {a.shape}")
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    if np.any(np.abs(a - np.swapaxes(a.conj(), -1, -2)) > 1e-10 * np.maximum(scale, 1.0)[..., None, None]):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + np.swapaxes(a.conj(), -1, -2))
    n = a.shape[-1]
    batch = a.shape[:-2]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    threshold = tol * scale

    sweeps = 0
    while np.any(_off_norm(a) > threshold):
        if sweeps >= max_sweeps:
            raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                mag = np.abs(apq)
                active = mag > np.finfo(float).tiny
                safe_mag = np.where(active, mag, 1.0)
                tau = (a[..., q, q].real - a[..., p, p].real) / (2 * safe_mag)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                c = np.where(active, 1 / np.sqrt(1 + t * t), 1.0)
                s = np.where(active, t * c, 0.0)
                e = np.where(active, apq / safe_mag, 1.0).conj()
                u = np.empty(batch + (2, 2), dtype=complex)
                u[..., 0, 0] = c
                u[..., 0, 1] = s
                u[..., 1, 0] = -s * e
                u[..., 1, 1] = c * e
                idx = [p, q]
                a[..., :, idx] = a[..., :, idx] @ u
                a[..., idx, :] = np.swapaxes(u.conj(), -1, -2) @ a[..., idx, :]
                a[..., p, q] = 0
                a[..., q, p] = 0
                v[..., :, idx] = v[..., :, idx] @ u

    w = np.einsum("...ii->...i", a).real
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return EigenDecomposition(w, v, sweeps)
