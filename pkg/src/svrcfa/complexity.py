"""Real-multiplication cost models for 2D MUSIC and SVR-CFA.

One complex multiplication counts as four real ones. ``log2_p`` is the
bit-precision factor charged for iterative operations (square roots,
divisions, arcsine); 10 reproduces the published gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_LOG2_P = 10


def music_cost(n: int, m: int, n_theta: int, n_phi: int) -> int:
    """48 N^3 (EVD) + 4 N^2 M + 2 N^2 (sample covariance) + grid search."""
    if n < 2 or min(m, n_theta, n_phi) < 1:
        raise ValueError("need N >= 2 and positive M, N_theta, N_phi")
    return 48 * n**3 + 4 * n * n * m + 2 * n * n + n_theta * n_phi * (4 * n * n - 4 * n + 3)


def svr_cfa_cost(n: int, m: int, l: int, log2_p: int = DEFAULT_LOG2_P) -> int:
    if n < 2 or l < 1 or m < 1 or log2_p < 0:
        raise ValueError("need N >= 2, M >= 1, L >= 1, log2_p >= 0")
    return 2 * n * m * (n - 1) + 3 * n * (n - 1) + l * l + 2 + log2_p * (3 * n * (n - 1) // 2 + 1)


def gain_db(n: int, m: int = 30, l: int = 181, n_theta: int = 90, n_phi: int = 181, log2_p: int = DEFAULT_LOG2_P) -> float:
    return 10 * math.log10(music_cost(n, m, n_theta, n_phi) / svr_cfa_cost(n, m, l, log2_p))


@dataclass(frozen=True)
class CostReport:
    n: int
    m: int
    l: int
    n_theta: int
    n_phi: int
    log2_p: int
    music_mults: int
    svr_cfa_mults: int

    @property
    def gain_db(self) -> float:
        return 10 * math.log10(self.music_mults / self.svr_cfa_mults)


def cost_report(n: int, m: int = 30, l: int = 181, n_theta: int = 90, n_phi: int = 181, log2_p: int = DEFAULT_LOG2_P) -> CostReport:
    return CostReport(n, m, l, n_theta, n_phi, log2_p, music_cost(n, m, n_theta, n_phi), svr_cfa_cost(n, m, l, log2_p))


def log2_p_sweep(targets: dict[int, float], candidates=range(0, 17), **params) -> dict[int, float]:
    """Worst absolute dB mismatch against ``targets`` ({N: gain_db}) for each candidate log2_p."""
    return {
        k: max(abs(gain_db(n, log2_p=k, **params) - want) for n, want in targets.items())
        for k in candidates
    }
