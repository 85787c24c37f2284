"""Epsilon-insensitive support vector regression for azimuth.

The dual is solved with a pairwise (SMO-style) coordinate ascent using
second-order working-set selection. Multipliers are stored as
``alpha_plus`` (upper tube edge) and ``alpha_minus`` (lower tube edge), so
the regression coefficients are ``alpha_plus - alpha_minus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from svrcfa.array import ArrayGeometry, noise_power
from svrcfa.features import noiseless_phase, normalize_batch

EPSILON_PER_SIGMA = 1.0043
EPSILON_FLOOR = 1e-3
PREDICTION_RANGE = (0.0, 181.0)
MODEL_HEADER = "# svrcfa-model v1"


@dataclass(frozen=True)
class SvrHyperparams:
    c_bound: float
    epsilon_deg: float
    kernel_width: float = 0.5
    qp_tolerance: float = 1e-6
    max_iterations: int = 1_000_000

    def __post_init__(self):
        for name in ("c_bound", "kernel_width", "qp_tolerance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if not (math.isfinite(self.epsilon_deg) and self.epsilon_deg >= 0):
            raise ValueError(f"epsilon_deg must be non-negative, got {self.epsilon_deg}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def epsilon_from_snr(snr_db: float = 10.0, signal_power: float = 1.0) -> float:
    """Tube half-width 1.0043 * sigma for the noise level at ``snr_db``, floored at 1e-3."""
    sigma = math.sqrt(noise_power(snr_db, signal_power))
    return max(EPSILON_PER_SIGMA * sigma, EPSILON_FLOOR)


@dataclass(frozen=True)
class TrainingSet:
    features: np.ndarray  # (L, P), unit-norm rows
    targets_deg: np.ndarray  # (L,)

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != self.targets_deg.shape[0]:
            raise ValueError("features must be (L, P) with one target per row")
        if self.features.shape[0] < 2:
            raise ValueError("need at least two training pairs")

    def __len__(self):
        return self.targets_deg.shape[0]


def build_training_set(
    geom: ArrayGeometry,
    phi_start_deg: float = 0.0,
    phi_step_deg: float = 1.0,
    phi_count: int = 181,
    theta_train_deg: float = 30.0,
) -> TrainingSet:
    """Noiseless features on the azimuth grid phi_start + i * phi_step."""
    if phi_count < 2:
        raise ValueError("need at least two training azimuths")
    if not 0 < theta_train_deg <= 90:
        raise ValueError(f"training elevation must lie in (0, 90], got {theta_train_deg}")
    targets = phi_start_deg + phi_step_deg * np.arange(phi_count)
    g = noiseless_phase(geom, theta_train_deg, targets)
    z, boresight = normalize_batch(g)
    if boresight.any():
        raise ValueError("training grid hits boresight")
    return TrainingSet(z, targets)


def default_c_bound(targets_deg) -> float:
    """max(|mu + 3 s|, |mu - 3 s|) with s the sample standard deviation."""
    t = np.asarray(targets_deg, dtype=float)
    mu = t.mean()
    sd = t.std(ddof=1) if t.size > 1 else 0.0
    return float(max(abs(mu + 3 * sd), abs(mu - 3 * sd)))


def rbf_kernel(z1, z2, delta: float):
    """exp(-delta ||z1 - z2||^2); rows broadcast, so (A, P) x (B, P) gives (A, B) via ``kernel_matrix``."""
    d = np.asarray(z1) - np.asarray(z2)
    return np.exp(-delta * np.sum(d * d, axis=-1))


def kernel_matrix(a: np.ndarray, b: np.ndarray, delta: float) -> np.ndarray:
    sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2 * a @ b.T
    return np.exp(-delta * np.maximum(sq, 0.0))


def dual_objective(alpha_plus, alpha_minus, gram, targets, epsilon) -> float:
    beta = alpha_plus - alpha_minus
    return float(-epsilon * np.sum(alpha_plus + alpha_minus) + targets @ beta - 0.5 * beta @ gram @ beta)


@dataclass
class DualSolution:
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    objective: float
    kkt_violation: float
    iterations: int
    converged: bool
    objective_history: list[float] = field(default_factory=list, repr=False)

    @property
    def coefficients(self) -> np.ndarray:
        return self.alpha_plus - self.alpha_minus


def solve_dual(
    train: TrainingSet,
    hp: SvrHyperparams,
    record_history: bool = False,
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> DualSolution:
    """Maximize the SVR dual under 0 <= alpha <= C and sum(alpha_plus - alpha_minus) = 0.

    Internally this is the equivalent minimization over 2L variables
    ``a = [alpha_plus, alpha_minus]`` with labels y = [+1, -1] and linear
    term p = [eps - t, eps + t]. Stops when the maximal KKT violation
    m(a) - M(a) drops below ``qp_tolerance``; ``converged`` is False if the
    iteration cap is hit first.
    """
    gram = kernel_matrix(train.features, train.features, hp.kernel_width)
    targets = train.targets_deg.astype(float)
    n = len(targets)
    c, eps = hp.c_bound, hp.epsilon_deg
    y = np.concatenate([np.ones(n), -np.ones(n)])
    idx = np.concatenate([np.arange(n), np.arange(n)])
    q = np.outer(y, y) * gram[np.ix_(idx, idx)]
    q_diag = np.diag(q).copy()
    p = np.concatenate([eps - targets, eps + targets])
    a = np.zeros(2 * n)
    grad = p.copy()
    tau = 1e-12
    history = []

    converged = False
    gap = math.inf
    it = 0
    for it in range(hp.max_iterations):
        if record_history:
            history.append(-0.5 * float(a @ (grad + p)))
        if callback is not None:
            callback(it, a[:n], a[n:])
        up = ((y > 0) & (a < c)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < c))
        score = -y * grad
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmax(score[up_idx])]
        gap = score[i] - score[low_idx].min()
        if gap < hp.qp_tolerance:
            converged = True
            break
        cand = low_idx[score[low_idx] < score[i]]
        b_ij = score[i] - score[cand]
        a_ij = q_diag[i] + q_diag[cand] - 2 * y[i] * y[cand] * q[i, cand]
        a_ij = np.where(a_ij > 0, a_ij, tau)
        j = cand[np.argmax(b_ij * b_ij / a_ij)]

        old_i, old_j = a[i], a[j]
        if y[i] != y[j]:
            quad = max(q_diag[i] + q_diag[j] + 2 * q[i, j], tau)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
                if ai > c:
                    ai, aj = c, c - diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
                if aj > c:
                    aj, ai = c, c + diff
        else:
            quad = max(q_diag[i] + q_diag[j] - 2 * q[i, j], tau)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
                if aj > c:
                    aj, ai = c, total - c
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total
        a[i], a[j] = ai, aj
        grad += q[i] * (ai - old_i) + q[j] * (aj - old_j)
    else:
        it = hp.max_iterations

    alpha_plus, alpha_minus = a[:n].copy(), a[n:].copy()
    # an overlapping pair only pays 2*eps; collapsing it keeps beta and raises J
    overlap = np.minimum(alpha_plus, alpha_minus)
    alpha_plus -= overlap
    alpha_minus -= overlap
    return DualSolution(
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        objective=dual_objective(alpha_plus, alpha_minus, gram, targets, eps),
        kkt_violation=float(gap),
        iterations=it,
        converged=converged,
        objective_history=history,
    )


@dataclass(frozen=True)
class BiasEstimate:
    bias_deg: float
    eta_low: float
    eta_high: float
    in_window: bool
    literal_eta_low: float
    literal_eta_high: float

    @property
    def literal_window_empty(self) -> bool:
        return self.literal_eta_low > self.literal_eta_high


def estimate_bias(
    sol: DualSolution,
    train: TrainingSet,
    hp: SvrHyperparams,
    convention: str = "centered",
) -> BiasEstimate:
    """Average-residual bias plus the KKT admissibility window around it.

    ``convention="centered"`` gives b = mean(t_k - sum_i beta_i K_ik), which
    centres the training residuals of f(z) = sum beta K + b.
    ``convention="literal"`` returns the negated bracket,
    mean(sum_i beta_i K_ik - t_k).

    ``eta_low``/``eta_high`` is the KKT window with the tube sign taken per
    active constraint; ``literal_eta_*`` uses -eps on both sides as commonly
    printed, which is empty whenever the residuals are not all equal.
    """
    gram = kernel_matrix(train.features, train.features, hp.kernel_width)
    resid = train.targets_deg - gram @ sol.coefficients
    if convention == "centered":
        bias = float(resid.mean())
    elif convention == "literal":
        bias = float(-resid.mean())
    else:
        raise ValueError(f"unknown bias convention {convention!r}")

    eps, c = hp.epsilon_deg, hp.c_bound
    thr = 1e-9 * c
    ap, am = sol.alpha_plus, sol.alpha_minus
    below_c_plus, pos_plus = ap < c - thr, ap > thr
    below_c_minus, pos_minus = am < c - thr, am > thr

    lower = np.concatenate([resid[below_c_plus] - eps, resid[pos_minus] + eps])
    upper = np.concatenate([resid[pos_plus] - eps, resid[below_c_minus] + eps])
    eta_low = float(lower.max()) if lower.size else -math.inf
    eta_high = float(upper.min()) if upper.size else math.inf

    lit_low_set = resid[below_c_plus | pos_minus] - eps
    lit_high_set = resid[pos_plus | below_c_minus] - eps
    lit_low = float(lit_low_set.max()) if lit_low_set.size else -math.inf
    lit_high = float(lit_high_set.min()) if lit_high_set.size else math.inf

    slack = 10 * hp.qp_tolerance
    in_window = eta_low - slack <= bias <= eta_high + slack
    return BiasEstimate(bias, eta_low, eta_high, in_window, lit_low, lit_high)


def duality_gap(sol: DualSolution, train: TrainingSet, hp: SvrHyperparams, bias: float) -> float:
    """Primal risk at (beta, bias) minus the dual objective; >= 0 up to rounding."""
    gram = kernel_matrix(train.features, train.features, hp.kernel_width)
    beta = sol.coefficients
    f = gram @ beta + bias
    loss = np.maximum(np.abs(train.targets_deg - f) - hp.epsilon_deg, 0.0)
    primal = 0.5 * beta @ gram @ beta + hp.c_bound * loss.sum()
    return float(primal - sol.objective)


@dataclass(frozen=True)
class SvrModel:
    coefficients: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    bias_deg: float
    training_features: np.ndarray
    hyperparams: SvrHyperparams
    converged: bool = True
    kkt_window: tuple[float, float] = (-math.inf, math.inf)
    bias_in_window: bool = True

    @property
    def n_elements(self) -> int:
        p = self.training_features.shape[1]
        return int(round((1 + math.sqrt(1 + 8 * p)) / 2))


def train_svr(train: TrainingSet, hp: SvrHyperparams, bias_convention: str = "centered") -> SvrModel:
    sol = solve_dual(train, hp)
    bias = estimate_bias(sol, train, hp, bias_convention)
    return SvrModel(
        coefficients=sol.coefficients,
        alpha_plus=sol.alpha_plus,
        alpha_minus=sol.alpha_minus,
        bias_deg=bias.bias_deg,
        training_features=train.features,
        hyperparams=hp,
        converged=sol.converged,
        kkt_window=(bias.eta_low, bias.eta_high),
        bias_in_window=bias.in_window,
    )


def predict_batch(model: SvrModel, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Azimuth predictions for rows of ``z``, clamped to [0, 181] deg, with the clamp mask."""
    z = np.atleast_2d(z)
    raw = kernel_matrix(z, model.training_features, model.hyperparams.kernel_width) @ model.coefficients
    raw = raw + model.bias_deg
    lo, hi = PREDICTION_RANGE
    out = np.clip(raw, lo, hi)
    return out, out != raw


def predict_azimuth(model: SvrModel, z: np.ndarray) -> tuple[float, bool]:
    """phi_hat = sum_i beta_i K(z_i, z) + b; returns (phi_hat_deg, clamped)."""
    phi, clamped = predict_batch(model, np.asarray(z)[None, :])
    return float(phi[0]), bool(clamped[0])


def save_model(model: SvrModel, path) -> None:
    """Write the versioned text format: header, key/value block, then L rows of coefficient + feature."""
    hp = model.hyperparams
    lines = [
        MODEL_HEADER,
        f"n_elements {model.n_elements}",
        f"n_train {len(model.coefficients)}",
        f"kernel_width {hp.kernel_width:.17g}",
        f"c_bound {hp.c_bound:.17g}",
        f"epsilon_deg {hp.epsilon_deg:.17g}",
        f"qp_tolerance {hp.qp_tolerance:.17g}",
        f"max_iterations {hp.max_iterations}",
        f"bias_deg {model.bias_deg:.17g}",
        f"converged {int(model.converged)}",
        "data",
    ]
    for coef, feat in zip(model.coefficients, model.training_features):
        lines.append(" ".join(f"{v:.17g}" for v in (coef, *feat)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> SvrModel:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != MODEL_HEADER:
        raise ValueError(f"{path}: not an svrcfa model file (bad header)")
    meta = {}
    pos = 1
    while text[pos].strip() != "data":
        key, value = text[pos].split(maxsplit=1)
        meta[key] = value
        pos += 1
    rows = np.array([[float(v) for v in line.split()] for line in text[pos + 1 :] if line.strip()])
    n, l = int(meta["n_elements"]), int(meta["n_train"])
    if rows.shape != (l, 1 + n * (n - 1) // 2):
        raise ValueError(f"{path}: expected {l} rows of {1 + n * (n - 1) // 2} values, got {rows.shape}")
    hp = SvrHyperparams(
        c_bound=float(meta["c_bound"]),
        epsilon_deg=float(meta["epsilon_deg"]),
        kernel_width=float(meta["kernel_width"]),
        qp_tolerance=float(meta["qp_tolerance"]),
        max_iterations=int(meta["max_iterations"]),
    )
    coef = rows[:, 0]
    return SvrModel(
        coefficients=coef,
        alpha_plus=np.maximum(coef, 0.0),
        alpha_minus=np.maximum(-coef, 0.0),
        bias_deg=float(meta["bias_deg"]),
        training_features=rows[:, 1:],
        hyperparams=hp,
        converged=bool(int(meta.get("converged", 1))),
    )
