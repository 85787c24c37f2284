"""Experiment configuration and its INI-style file format.

Every key is optional; missing keys take the defaults below, which follow the
published setup (N = 3, half-wavelength spacing, train at theta = 30 deg on
0:1:180, test at theta = 60.5 deg on 0.5:1:180.5, M = 30).
"""

from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field, fields

from svrcfa.array import ArrayGeometry, noise_power
from svrcfa.features import boresight_tolerance
from svrcfa.music import SpectrumGrid
from svrcfa.svr import SvrHyperparams, TrainingSet, build_training_set, default_c_bound, epsilon_from_snr


def _section(name: str, **kw):
    return field(metadata={"section": name}, **kw)


@dataclass(frozen=True)
class ExperimentConfig:
    n_elements: int = _section("array", default=3)
    spacing_wavelengths: float = _section("array", default=0.5)

    train_theta_deg: float = _section("training", default=30.0)
    train_phi_start_deg: float = _section("training", default=0.0)
    train_phi_step_deg: float = _section("training", default=1.0)
    train_phi_count: int = _section("training", default=181)

    test_theta_deg: float = _section("test", default=60.5)
    test_phi_start_deg: float = _section("test", default=0.5)
    test_phi_step_deg: float = _section("test", default=1.0)
    test_phi_count: int = _section("test", default=181)

    snr_db: tuple[float, ...] = _section("sweep", default=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0))
    n_values: tuple[int, ...] = _section("sweep", default=(3, 4, 5, 6, 7, 8))
    n_sweep_snr_db: float = _section("sweep", default=10.0)
    n_trials: int = _section("sweep", default=200)
    n_snapshots: int = _section("sweep", default=30)
    signal_power: float = _section("sweep", default=1.0)

    c_bound: float | None = _section("svr", default=None)
    epsilon_deg: float | None = _section("svr", default=None)
    nominal_snr_db: float = _section("svr", default=10.0)
    kernel_width: float = _section("svr", default=0.5)
    qp_tolerance: float = _section("svr", default=1e-6)
    max_iterations: int = _section("svr", default=1_000_000)
    bias_convention: str = _section("svr", default="centered")

    gamma_min: float = _section("cfa", default=0.1)
    trim_fraction: float = _section("cfa", default=0.0)
    theta_max_deg: float = _section("cfa", default=90.0)

    music_theta_start_deg: float = _section("music", default=1.0)
    music_theta_stop_deg: float = _section("music", default=90.0)
    music_theta_step_deg: float = _section("music", default=1.0)
    music_phi_start_deg: float = _section("music", default=0.0)
    music_phi_stop_deg: float = _section("music", default=180.0)
    music_phi_step_deg: float = _section("music", default=1.0)

    seed: int = _section("run", default=0)
    threads: int = _section("run", default=1)
    out_dir: str = _section("run", default="results")

    def __post_init__(self):
        if not self.snr_db or not self.n_values:
            raise ValueError("snr_db and n_values must be non-empty")
        if self.n_trials < 1 or self.n_snapshots < 1:
            raise ValueError("n_trials and n_snapshots must be at least 1")
        if self.test_phi_count < 1:
            raise ValueError("test grid must be non-empty")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def geometry(self, n_elements: int | None = None) -> ArrayGeometry:
        return ArrayGeometry.from_spacing(n_elements or self.n_elements, self.spacing_wavelengths)

    def training_set(self, geom: ArrayGeometry) -> TrainingSet:
        return build_training_set(
            geom, self.train_phi_start_deg, self.train_phi_step_deg, self.train_phi_count, self.train_theta_deg
        )

    def hyperparams(self, train: TrainingSet) -> SvrHyperparams:
        c = self.c_bound if self.c_bound is not None else default_c_bound(train.targets_deg)
        eps = self.epsilon_deg if self.epsilon_deg is not None else epsilon_from_snr(self.nominal_snr_db, self.signal_power)
        return SvrHyperparams(c, eps, self.kernel_width, self.qp_tolerance, self.max_iterations)

    def music_grid(self) -> SpectrumGrid:
        return SpectrumGrid.uniform(
            (self.music_theta_start_deg, self.music_theta_stop_deg, self.music_theta_step_deg),
            (self.music_phi_start_deg, self.music_phi_stop_deg, self.music_phi_step_deg),
        )

    def test_azimuths(self) -> list[float]:
        return [self.test_phi_start_deg + k * self.test_phi_step_deg for k in range(self.test_phi_count)]

    def boresight_tol(self, n_elements: int, snr_db: float) -> float:
        n_pairs = n_elements * (n_elements - 1) // 2
        return boresight_tolerance(n_pairs, noise_power(snr_db, self.signal_power), self.n_snapshots, self.signal_power)


_TYPES = typing.get_type_hints(ExperimentConfig)


def _parse(name: str, raw: str):
    hint = _TYPES[name]
    raw = raw.strip()
    if raw.lower() in ("none", "") and type(None) in typing.get_args(hint):
        return None
    if typing.get_origin(hint) is tuple:
        inner = typing.get_args(hint)[0]
        return tuple(inner(v) for v in raw.split(",") if v.strip())
    base = next((t for t in typing.get_args(hint) if t is not type(None)), hint)
    if base is int:
        return int(raw)
    if base is float:
        return float(raw)
    return raw


def load_config(path) -> ExperimentConfig:
    """Read an INI file whose sections mirror the field groups of ``ExperimentConfig``."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    sections = {f.name: f.metadata["section"] for f in fields(ExperimentConfig)}
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in sections:
                raise ValueError(f"{path}: unknown key {key!r} in [{section}]")
            if sections[key] != section:
                raise ValueError(f"{path}: key {key!r} belongs in [{sections[key]}], not [{section}]")
            values[key] = _parse(key, raw)
    return ExperimentConfig(**values)


def dump_config(cfg: ExperimentConfig) -> str:
    """Render ``cfg`` in the format ``load_config`` reads."""
    by_section: dict[str, list[str]] = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            text = ", ".join(repr(v) for v in value)
        else:
            text = "none" if value is None else repr(value) if isinstance(value, float) else str(value)
        by_section.setdefault(f.metadata["section"], []).append(f"{f.name} = {text}")
    return "\n".join(f"[{s}]\n" + "\n".join(lines) + "\n" for s, lines in by_section.items())
