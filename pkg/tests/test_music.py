import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svrcfa.array import ArrayGeometry, SourceTruth, ideal_covariance
from svrcfa.linalg import NonConvergence, hermitian_evd
from svrcfa.music import (
    SpectrumGrid,
    grid_manifold,
    music_batch,
    music_estimate,
    music_spectrum,
    noise_projector,
    spectrum_from_projector,
)


def _random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def test_evd_identity():
    e = hermitian_evd(np.eye(5))
    np.testing.assert_allclose(e.eigenvalues, 1.0, atol=1e-15)
    np.testing.assert_allclose(e.eigenvectors.conj().T @ e.eigenvectors, np.eye(5), atol=1e-15)


def test_evd_rank_one_plus_identity(geom3):
    r = ideal_covariance(geom3, SourceTruth(40, 20), 1.0, 0.1)
    np.testing.assert_allclose(hermitian_evd(r).eigenvalues, [3.1, 0.1, 0.1], atol=1e-9)


@settings(max_examples=50)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_evd_invariants(n, seed):
    r = _random_hermitian(np.random.default_rng(seed), n)
    e = hermitian_evd(r)
    assert np.linalg.norm(r - e.reconstruct()) < 1e-9 * np.linalg.norm(r)
    np.testing.assert_allclose(e.eigenvectors.conj().T @ e.eigenvectors, np.eye(n), atol=1e-10)
    assert np.all(np.diff(e.eigenvalues) <= 0)
    np.testing.assert_allclose(e.eigenvalues, np.linalg.eigvalsh(r)[::-1], atol=1e-9 * np.abs(r).max())


def test_evd_random_4x4_reconstruction(rng):
    r = _random_hermitian(rng, 4)
    e = hermitian_evd(r)
    assert np.linalg.norm(r - e.reconstruct()) < 1e-9


def test_evd_deterministic(rng):
    r = _random_hermitian(rng, 6)
    a, b = hermitian_evd(r), hermitian_evd(r)
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()


def test_evd_batched_matches_single(rng):
    stack = np.stack([_random_hermitian(rng, 4) for _ in range(5)])
    batch = hermitian_evd(stack)
    for k in range(5):
        single = hermitian_evd(stack[k])
        np.testing.assert_allclose(batch.eigenvalues[k], single.eigenvalues, atol=1e-12)


def test_evd_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_evd(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_evd_sweep_cap(rng):
    with pytest.raises(NonConvergence):
        hermitian_evd(_random_hermitian(rng, 8), max_sweeps=1)


def test_default_grid_matches_fov():
    g = SpectrumGrid.uniform()
    assert g.shape == (90, 181)
    assert g.theta_points[0] == 1 and g.theta_points[-1] == 90
    assert g.phi_points[0] == 0 and g.phi_points[-1] == 180


@pytest.mark.parametrize("n", [3, 4, 6])
def test_projector_idempotent(n):
    geom = ArrayGeometry.from_spacing(n)
    r = ideal_covariance(geom, SourceTruth(35, 60), 1.0, 0.2)
    p, degenerate = noise_projector(r)
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    assert not degenerate


@pytest.mark.parametrize("truth", [(60.0, 90.0), (1.0, 0.0), (90.0, 180.0), (23.0, 137.0)])
def test_noiseless_on_grid_exact(geom3, truth):
    r = ideal_covariance(geom3, SourceTruth(*truth), 1.0, 0.0)
    est = music_estimate(r, geom3)
    assert (est.theta_deg, est.phi_deg) == truth


def test_noiseless_off_grid_half_degree(geom3):
    r = ideal_covariance(geom3, SourceTruth(60.5, 90.5), 1.0, 0.0)
    est = music_estimate(r, geom3)
    assert abs(est.phi_deg - 90.5) == 0.5
    assert abs(est.theta_deg - 60.5) == 0.5


def test_constant_spectrum_tie_break(geom3):
    grid = SpectrumGrid.uniform()
    values = spectrum_from_projector(np.zeros((3, 3), complex), grid_manifold(geom3, grid))
    assert np.all(values == values[0]) and np.all(np.isfinite(values))
    best = np.unravel_index(np.argmax(values), grid.shape)
    assert best == (0, 0)


def test_spectrum_positive_finite(geom3):
    r = ideal_covariance(geom3, SourceTruth(45, 45), 1.0, 0.1)
    s = music_spectrum(r, geom3, SpectrumGrid.uniform())
    assert s.values.shape == (90, 181)
    assert np.all(s.values > 0) and np.all(np.isfinite(s.values))


@given(st.floats(1e-3, 1e3))
@settings(max_examples=20)
def test_scale_invariance(c):
    geom = ArrayGeometry.from_spacing(4)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 30)) + 1j * rng.standard_normal((4, 30))
    x += np.outer(np.exp(1j * np.arange(4)), rng.standard_normal(30)) * 2
    r = x @ x.conj().T / 30
    a, b = music_estimate(r, geom), music_estimate(c * r, geom)
    assert (a.theta_deg, a.phi_deg) == (b.theta_deg, b.phi_deg)


@pytest.mark.parametrize("truth", [(37.3, 101.7), (62.2, 12.9), (14.6, 170.1)])
def test_grid_refinement_never_hurts(geom3, truth):
    r = ideal_covariance(geom3, SourceTruth(*truth), 1.0, 0.0)
    errs = []
    for step in (2.0, 1.0, 0.5, 0.25):
        grid = SpectrumGrid.uniform((2.0, 88.0, step), (2.0, 178.0, step))
        est = music_estimate(r, geom3, grid)
        errs.append(max(abs(est.theta_deg - truth[0]), abs(est.phi_deg - truth[1])))
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_degenerate_subspace_flag(geom3):
    est = music_estimate(np.eye(3, dtype=complex), geom3)
    assert est.degenerate_subspace


def test_batch_matches_single(geom3, rng):
    from svrcfa.array import simulate_batch
    from svrcfa.features import sample_covariance

    r = sample_covariance(simulate_batch(geom3, SourceTruth(60.5, 30.5), 10.0, 30, rng, 6))
    theta, phi, _ = music_batch(r, geom3, SpectrumGrid.uniform(), chunk=4)
    for k in range(6):
        est = music_estimate(r[k], geom3)
        assert (est.theta_deg, est.phi_deg) == (theta[k], phi[k])


def test_n_sources_validated(geom3):
    with pytest.raises(ValueError):
        noise_projector(np.eye(3), n_sources=3)
