import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from svrcfa.array import NOISELESS, ArrayGeometry, SourceTruth, ideal_covariance, simulate_snapshots
from svrcfa.features import (
    BORESIGHT,
    AmbiguityUnresolved,
    PhaseVector,
    boresight_tolerance,
    extract_phase_vector,
    max_pair_phase,
    noiseless_phase,
    normalize_features,
    pair_index,
    sample_covariance,
    unwrap_phases,
)


def test_pair_order_is_row_major():
    assert pair_index(4) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_sample_covariance_single_snapshot():
    v = np.array([[1 + 2j], [3 - 1j], [-0.5j]])
    np.testing.assert_allclose(sample_covariance(v), v @ v.conj().T)


def test_sample_covariance_noiseless_rank_one(geom3):
    x = simulate_snapshots(geom3, SourceTruth(35, 70), NOISELESS, 30, seed=1)
    r = sample_covariance(x)
    w, v = np.linalg.eigh(r)
    a = np.exp(1j * 0) * x.data[:, 0] / np.linalg.norm(x.data[:, 0])
    assert w[-2] < 1e-12 * w[-1]
    assert abs(abs(np.vdot(v[:, -1], a)) - 1) < 1e-12


def test_sample_covariance_consistency(geom3):
    src = SourceTruth(60.5, 100.5)
    r_true = ideal_covariance(geom3, src, 1.0, 0.1)
    dist = {}
    for m in (30, 3000):
        errs = [np.linalg.norm(sample_covariance(simulate_snapshots(geom3, src, 10.0, m, seed=s)) - r_true)
                for s in range(20)]
        dist[m] = np.mean(errs)
    assert dist[3000] < dist[30] / 5


def test_sample_covariance_hermitian(rng):
    x = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    r = sample_covariance(x)
    np.testing.assert_array_equal(r, r.conj().T)


def test_extract_identity_is_degenerate():
    g = extract_phase_vector(np.eye(4, dtype=complex))
    np.testing.assert_array_equal(g.phases, 0.0)
    assert g.degenerate.all()
    assert g.phases.shape == (6,)


def test_extract_boresight_is_zero(geom3):
    g = extract_phase_vector(ideal_covariance(geom3, SourceTruth(0, 50), 1.0, 0.0))
    np.testing.assert_allclose(g.phases, 0.0, atol=1e-15)
    assert not g.degenerate.any()


def test_extract_matches_analytic_phase(geom3):
    r = ideal_covariance(geom3, SourceTruth(30, 10), 1.0, 0.0)
    np.testing.assert_allclose(extract_phase_vector(r).phases, noiseless_phase(geom3, 30, 10).phases, atol=1e-12)


@given(st.integers(3, 8), st.integers(0, 2**32 - 1))
def test_extract_conjugate_symmetry(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    r = sample_covariance(x)
    upper = extract_phase_vector(r).phases
    lower = np.array([np.angle(r[j, i]) for i, j in pair_index(n)])
    np.testing.assert_allclose(upper, -lower, atol=1e-12)


def test_noiseless_phase_boresight_zero(geom3):
    np.testing.assert_array_equal(noiseless_phase(geom3, 0.0, 77.0).phases, 0.0)


def test_noiseless_phase_symmetric_pair_vanishes():
    g = ArrayGeometry.from_spacing(4)
    # elements 0 and 2 sit at 0 and 180 deg, symmetric about phi = 90
    k = pair_index(4).index((0, 2))
    assert abs(noiseless_phase(g, 50.0, 90.0).phases[k]) < 1e-15


def test_noiseless_phase_regression_fixture(geom3):
    expected = [0.40655200535160213, 1.517272739891194, 1.1107207345395917]
    np.testing.assert_allclose(noiseless_phase(geom3, 30.0, 45.0).phases, expected, atol=1e-14)


def test_noiseless_phase_not_reduced():
    g = ArrayGeometry.from_spacing(8)
    assert np.abs(noiseless_phase(g, 90.0, 10.0).phases).max() > np.pi


def test_normalize_boresight():
    assert normalize_features(np.zeros(3)) is BORESIGHT
    assert normalize_features(np.full(3, 1e-7)) is BORESIGHT
    assert normalize_features(np.full(3, 1e-3), boresight_tol=1e-2) is BORESIGHT


def test_normalize_unit_norm_and_scale_invariance(rng):
    g = rng.standard_normal(10)
    z = normalize_features(g)
    assert abs(np.linalg.norm(z) - 1) < 1e-12
    np.testing.assert_allclose(normalize_features(3 * g), z, atol=1e-15)
    np.testing.assert_allclose(normalize_features(z * np.linalg.norm(g)), z, atol=1e-15)


def test_normalize_accepts_phase_vector(geom3):
    g = noiseless_phase(geom3, 30.0, 45.0)
    np.testing.assert_allclose(normalize_features(g), g.phases / np.linalg.norm(g.phases))


def test_elevation_invariance_examples(geom3):
    z30 = normalize_features(noiseless_phase(geom3, 30.0, 45.0))
    z60 = normalize_features(noiseless_phase(geom3, 60.0, 45.0))
    np.testing.assert_allclose(z30, z60, atol=1e-10)


@settings(max_examples=300)
@given(
    st.sampled_from([3, 4, 5, 8, 10, 16]),
    st.floats(0.01, 90.0),
    st.floats(0.01, 90.0),
    st.floats(0.0, 180.0),
)
def test_features_independent_of_elevation(n, theta1, theta2, phi):
    g = ArrayGeometry.from_spacing(n)
    z1 = normalize_features(noiseless_phase(g, theta1, phi))
    z2 = normalize_features(noiseless_phase(g, theta2, phi))
    np.testing.assert_allclose(z1, z2, atol=1e-10)


def test_boresight_tolerance_scales_with_noise():
    assert boresight_tolerance(3) == 1e-6
    assert boresight_tolerance(3, sigma_sq=0.1, n_snapshots=30) == pytest.approx(math.sqrt(3) * 0.1 / 30)


def test_unwrap_identity_when_no_wrap_possible(geom3):
    assert max_pair_phase(geom3).max() <= np.pi + 1e-12
    g = PhaseVector(np.array([3.0, -3.1, 0.2]), 3)
    np.testing.assert_array_equal(unwrap_phases(g, geom3).phases, g.phases)


def _wrap(x):
    return np.angle(np.exp(1j * x))


@pytest.mark.parametrize("n, theta, phi", [(5, 80.0, 20.0), (6, 60.5, 100.5), (8, 90.0, 10.0), (10, 70.0, 133.0)])
def test_unwrap_recovers_analytic_phase(n, theta, phi):
    geom = ArrayGeometry.from_spacing(n)
    truth = noiseless_phase(geom, theta, phi).phases
    wrapped = _wrap(truth)
    assert np.abs(wrapped - truth).max() > 1  # at least one pair actually wrapped
    out = unwrap_phases(PhaseVector(wrapped, n), geom)
    np.testing.assert_allclose(out.phases, truth, atol=1e-9)


def test_unwrap_undoes_single_shift():
    geom = ArrayGeometry.from_spacing(6)
    truth = noiseless_phase(geom, 40.0, 60.0).phases
    bound = max_pair_phase(geom)
    k = int(np.argmax(bound))
    shifted = truth.copy()
    shifted[k] -= 2 * np.pi
    np.testing.assert_allclose(unwrap_phases(PhaseVector(shifted, 6), geom).phases, truth, atol=1e-9)


def test_unwrap_noisy_covariance_matches_truth():
    geom = ArrayGeometry.from_spacing(7)
    truth = noiseless_phase(geom, 60.5, 30.5).phases
    x = simulate_snapshots(geom, SourceTruth(60.5, 30.5), 20.0, 30, seed=4)
    out = unwrap_phases(extract_phase_vector(sample_covariance(x)), geom)
    assert np.abs(out.phases - truth).max() < 0.5


def test_unwrap_tie_raises():
    geom = ArrayGeometry.from_spacing(6)
    ambiguous = max_pair_phase(geom) > np.pi + 1e-12
    phases = np.zeros(geom.n_pairs)
    # the plane fit from the unambiguous pairs predicts 0; pi is equally far from 0 and -2 pi offsets
    phases[np.flatnonzero(ambiguous)[0]] = np.pi
    with pytest.raises(AmbiguityUnresolved):
        unwrap_phases(PhaseVector(phases, 6), geom)
