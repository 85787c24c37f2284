"""Monte Carlo RMSE sweeps comparing SVR-CFA with 2D MUSIC.

Each trial simulates M snapshots, forms one sample covariance and feeds the
same matrix to both estimators. Trial t at test azimuth k of sweep point p
draws from ``default_rng([seed, sweep_id, p, k, t])``, so results do not
depend on how work is split across processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from svrcfa.array import ArrayGeometry, SourceTruth, simulate_batch
from svrcfa.config import ExperimentConfig
from svrcfa.estimator import svr_cfa_batch
from svrcfa.features import sample_covariance
from svrcfa.linalg import NonConvergence
from svrcfa.music import music_batch
from svrcfa.svr import SvrModel, train_svr

log = logging.getLogger(__name__)

SNR_SWEEP, N_SWEEP = 0, 1


def compute_rmse(errors_deg) -> float:
    e = np.asarray(errors_deg, dtype=float)
    if e.size == 0:
        raise ValueError("cannot take the RMSE of an empty error list")
    return float(np.sqrt(np.mean(e * e)))


@dataclass(frozen=True)
class RmseRecord:
    axis_value: float
    rmse_phi_svr: float
    rmse_theta_svr: float
    rmse_phi_music: float
    rmse_theta_music: float
    n_trials: int
    n_boresight_flags: int
    n_clamp_flags: int
    n_ambiguity_flags: int = 0
    n_degenerate_flags: int = 0
    n_music_degenerate_flags: int = 0
    n_svr_samples: int = 0
    n_music_samples: int = 0

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class _Tally:
    """Squared-error sums and flag counts for one (sweep point, test azimuth)."""

    sq_phi_svr: float = 0.0
    sq_theta_svr: float = 0.0
    sq_phi_music: float = 0.0
    sq_theta_music: float = 0.0
    trials: int = 0
    svr_samples: int = 0
    music_samples: int = 0
    boresight: int = 0
    clamp: int = 0
    ambiguity: int = 0
    degenerate: int = 0
    music_degenerate: int = 0

    def add(self, other: "_Tally") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass(frozen=True)
class _PointJob:
    cfg: ExperimentConfig
    model: SvrModel
    n_elements: int
    snr_db: float
    sweep_id: int
    point_idx: int


def trial_covariances(cfg: ExperimentConfig, geom: ArrayGeometry, snr_db: float, phi_deg: float, key: tuple) -> np.ndarray:
    """Stack of ``cfg.n_trials`` sample covariances, one independent RNG stream per trial."""
    source = SourceTruth(cfg.test_theta_deg, phi_deg)
    x = np.concatenate([
        simulate_batch(geom, source, snr_db, cfg.n_snapshots, np.random.default_rng([*key, t]), 1, cfg.signal_power)
        for t in range(cfg.n_trials)
    ])
    return sample_covariance(x)


def _run_azimuth(job: _PointJob, az_idx: int, phi_deg: float) -> _Tally:
    cfg = job.cfg
    geom = cfg.geometry(job.n_elements)
    key = (cfg.seed, job.sweep_id, job.point_idx, az_idx)
    r = trial_covariances(cfg, geom, job.snr_db, phi_deg, key)

    svr = svr_cfa_batch(
        job.model, geom, r,
        boresight_tol=cfg.boresight_tol(job.n_elements, job.snr_db),
        theta_max_deg=cfg.theta_max_deg,
        gamma_min=cfg.gamma_min,
        trim=cfg.trim_fraction,
    )
    m_theta, m_phi, m_degenerate = music_batch(r, geom, cfg.music_grid())

    tally = _Tally(trials=cfg.n_trials)
    degenerate = (svr.n_pairs_used == 0) & ~svr.boresight
    ambiguous = svr.ambiguous & ~svr.boresight & ~degenerate
    ok = ~(svr.boresight | ambiguous | degenerate)
    phi_err = svr.phi_deg[ok] - phi_deg
    theta_err = svr.theta_deg[ok] - cfg.test_theta_deg
    assert np.all(np.abs(phi_err) <= 181)
    tally.sq_phi_svr = float(np.sum(phi_err**2))
    tally.sq_theta_svr = float(np.sum(theta_err**2))
    tally.svr_samples = int(ok.sum())
    tally.boresight = int(svr.boresight.sum())
    tally.ambiguity = int(ambiguous.sum())
    tally.degenerate = int(degenerate.sum())
    tally.music_degenerate = int(m_degenerate.sum())
    tally.clamp = int(np.sum(ok & (svr.azimuth_clamped | svr.elevation_clamped)))

    tally.sq_phi_music = float(np.sum((m_phi - phi_deg) ** 2))
    tally.sq_theta_music = float(np.sum((m_theta - cfg.test_theta_deg) ** 2))
    tally.music_samples = len(m_phi)
    return tally


def _run_chunk(job: _PointJob, items: list[tuple[int, float]]) -> list[_Tally]:
    return [_run_azimuth(job, k, phi) for k, phi in items]


def _record(axis_value: float, tallies: list[_Tally]) -> RmseRecord:
    total = _Tally()
    for t in tallies:
        total.add(t)

    def rmse(sq, n):
        return math.sqrt(sq / n) if n else math.nan

    return RmseRecord(
        axis_value=axis_value,
        rmse_phi_svr=rmse(total.sq_phi_svr, total.svr_samples),
        rmse_theta_svr=rmse(total.sq_theta_svr, total.svr_samples),
        rmse_phi_music=rmse(total.sq_phi_music, total.music_samples),
        rmse_theta_music=rmse(total.sq_theta_music, total.music_samples),
        n_trials=total.trials,
        n_boresight_flags=total.boresight,
        n_clamp_flags=total.clamp,
        n_ambiguity_flags=total.ambiguity,
        n_degenerate_flags=total.degenerate,
        n_music_degenerate_flags=total.music_degenerate,
        n_svr_samples=total.svr_samples,
        n_music_samples=total.music_samples,
    )


def _run_point(job: _PointJob, pool: ProcessPoolExecutor | None) -> list[_Tally]:
    items = list(enumerate(job.cfg.test_azimuths()))
    if pool is None:
        return _run_chunk(job, items)
    n_chunks = min(len(items), 4 * job.cfg.threads)
    chunks = [items[i::n_chunks] for i in range(n_chunks)]
    by_index: dict[int, _Tally] = {}
    for chunk, result in zip(chunks, pool.map(_run_chunk, [job] * len(chunks), chunks)):
        for (k, _), tally in zip(chunk, result):
            by_index[k] = tally
    # fixed summation order keeps the floating-point totals independent of the split
    return [by_index[k] for k, _ in items]


def train_model(cfg: ExperimentConfig, n_elements: int | None = None) -> SvrModel:
    geom = cfg.geometry(n_elements)
    train = cfg.training_set(geom)
    model = train_svr(train, cfg.hyperparams(train), cfg.bias_convention)
    if not model.converged:
        raise NonConvergence(f"SVR dual did not converge within {cfg.max_iterations} iterations (N={geom.n_elements})")
    if not model.bias_in_window:
        log.warning("bias %.6f outside KKT window %s (N=%d)", model.bias_deg, model.kkt_window, geom.n_elements)
    return model


def _sweep(cfg: ExperimentConfig, points: list[tuple[float, int, float, SvrModel]], sweep_id: int) -> list[RmseRecord]:
    records = []
    pool = ProcessPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for idx, (axis_value, n, snr, model) in enumerate(points):
            job = _PointJob(cfg, model, n, snr, sweep_id, idx)
            records.append(_record(axis_value, _run_point(job, pool)))
            log.info("point %s: %s", axis_value, records[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def run_rmse_vs_snr(cfg: ExperimentConfig, model: SvrModel | None = None) -> list[RmseRecord]:
    """One record per SNR in ``cfg.snr_db`` at N = ``cfg.n_elements``."""
    model = model or train_model(cfg)
    if model.n_elements != cfg.n_elements:
        raise ValueError(f"model was trained for N={model.n_elements}, config has N={cfg.n_elements}")
    return _sweep(cfg, [(snr, cfg.n_elements, snr, model) for snr in cfg.snr_db], SNR_SWEEP)


def run_rmse_vs_n(cfg: ExperimentConfig) -> list[RmseRecord]:
    """One record per N in ``cfg.n_values`` at ``cfg.n_sweep_snr_db``; the SVR is retrained per N."""
    points = [(float(n), n, cfg.n_sweep_snr_db, train_model(cfg, n)) for n in cfg.n_values]
    return _sweep(cfg, points, N_SWEEP)
