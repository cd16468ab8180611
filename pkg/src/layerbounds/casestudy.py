"""Binary Gaussian-mixture classification with linear networks.

Data: Y uniform on {-1, +1}, X | Y=y ~ N(y mu0, sigma0^2 I). The learner
outputs any factorization W_L ... W_1 of the mean vector (1/n) sum Y_i X_i,
predicting tanh(W_L ... W_1 x) under the squared loss. Every quantity here
is either a closed-form bound on the expected generalization error of such
learners or a Monte-Carlo estimate of the error itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateTarget, DomainError
from .numerics import WeightStack, make_rng

GH_NODES = 64
LOSS_LIPSCHITZ = 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class GaussianMixtureSpec:
    mu0: tuple
    sigma0: float
    n: int

    def __post_init__(self):
        mu0 = tuple(float(v) for v in np.atleast_1d(self.mu0))
        if not mu0:
            raise DomainError("mu0 must be non-empty")
        if self.sigma0 < 0:
            raise DomainError("sigma0 must be nonnegative")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        object.__setattr__(self, "mu0", mu0)

    @property
    def d0(self) -> int:
        return len(self.mu0)

    @property
    def mean(self) -> np.ndarray:
        return np.asarray(self.mu0)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise DomainError("features and labels disagree in length")
        if not np.all(np.abs(self.labels) == 1):
            raise DomainError("labels must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.labels)


def sample_dataset(spec: GaussianMixtureSpec, rng: np.random.Generator) -> Dataset:
    labels = 2 * rng.integers(0, 2, size=spec.n) - 1
    noise = rng.standard_normal((spec.n, spec.d0))
    features = labels[:, None] * spec.mean + spec.sigma0 * noise
    return Dataset(features, labels.astype(float))


def fit_mean_classifier(data: Dataset) -> np.ndarray:
    """(1/n) sum_i Y_i X_i, the transpose of the end-to-end weight row."""
    return np.mean(data.labels[:, None] * data.features, axis=0)


# -- Rotation stacks --------------------------------------------------------

@dataclass(frozen=True)
class RotationStackConfig:
    """Depth-L stack of scaled 2x2 rotations closed by a row (0, C_L).

    ``scale_mode="uniform"`` draws u_1..u_L ~ Unif(0, 1] and rescales the
    first ``funnel_index`` of them so their product is
    ``funnel_fraction * |target|``, and the rest so that all L multiply to
    ``|target|``. ``scale_mode="equal"`` sets every C_l = |target|^(1/L).
    """

    depth: int = 10
    funnel_index: int = 5
    funnel_fraction: float = 0.2
    scale_mode: str = "uniform"

    def __post_init__(self):
        if self.depth < 2:
            raise DomainError("depth must be >= 2")
        if not 1 <= self.funnel_index <= self.depth - 1:
            raise DomainError(f"funnel_index must lie in [1, {self.depth - 1}]")
        if not 0.0 < self.funnel_fraction <= 1.0:
            raise DomainError("funnel_fraction must lie in (0, 1]")
        if self.scale_mode not in ("uniform", "equal"):
            raise DomainError(f"unknown scale_mode {self.scale_mode!r}")


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotation_angle(target) -> float:
    """Total angle theta with (0, 1) R(theta) pointing along ``target``.

    (0, 1) R(theta) = (-sin theta, cos theta), so theta = atan2(-t_0, t_1).
    Callers divide by L - 1 to get the per-layer angle.
    """
    t = np.asarray(target, dtype=float)
    return math.atan2(-float(t[0]), float(t[1]))


def rotation_scales(cfg: RotationStackConfig, target_norm: float,
                    rng: np.random.Generator, count: int) -> np.ndarray:
    """Scaling factors C_1..C_L for ``count`` stacks, shape (count, L)."""
    L, lp = cfg.depth, cfg.funnel_index
    if cfg.scale_mode == "equal":
        return np.full((count, L), target_norm ** (1.0 / L))
    u = 1.0 - rng.random((count, L))  # in (0, 1]
    head = u[:, :lp]
    tail = u[:, lp:]
    head_log = np.log(cfg.funnel_fraction * target_norm) - np.sum(np.log(head), axis=1)
    tail_log = -np.log(cfg.funnel_fraction) - np.sum(np.log(tail), axis=1)
    a = np.exp(head_log / lp)
    b = np.exp(tail_log / (L - lp))
    return np.concatenate([a[:, None] * head, b[:, None] * tail], axis=1)


def _check_target(target):
    t = np.asarray(target, dtype=float)
    if t.shape != (2,):
        raise DomainError("rotation stacks need a 2-dimensional target")
    norm = float(np.linalg.norm(t))
    if norm < 1e-12:
        raise DegenerateTarget(f"|target| = {norm:.3g} is numerically zero")
    return t, norm


def rotation_layers(cfg: RotationStackConfig, target, rng, count: int):
    """Batched rotation stacks: hidden layers (count, L-1, 2, 2), rows (count, 1, 2)."""
    t, norm = _check_target(target)
    C = rotation_scales(cfg, norm, rng, count)
    R = _rotation(rotation_angle(t) / (cfg.depth - 1))
    hidden = C[:, :-1, None, None] * R
    last = np.zeros((count, 1, 2))
    last[:, 0, 1] = C[:, -1]
    return hidden, last


def build_rotation_stack(cfg: RotationStackConfig, target, rng) -> WeightStack:
    hidden, last = rotation_layers(cfg, target, rng, 1)
    return WeightStack(tuple(hidden[0]) + (last[0],))


def batched_profiles(hidden, last):
    """Per-stack ||W_(l)||_F^2 and the weight (1 v prod_{j>l} ||W_j||_op^2).

    Both arrays have shape (count, L + 1) and come from explicit batched
    matrix products, not from the scaling factors.
    """
    count, hidden_depth = hidden.shape[:2]
    L = hidden_depth + 1
    fro2 = np.empty((count, L + 1))
    prod = np.broadcast_to(np.eye(2), (count, 2, 2))
    fro2[:, 0] = 2.0
    for l in range(hidden_depth):
        prod = hidden[:, l] @ prod
        fro2[:, l + 1] = np.sum(prod * prod, axis=(1, 2))
    final = last @ prod
    fro2[:, L] = np.sum(final * final, axis=(1, 2))
    ops = np.concatenate([np.linalg.norm(hidden, ord=2, axis=(2, 3)),
                          np.linalg.norm(last, ord=2, axis=(1, 2))[:, None]], axis=1)
    # tail[:, l] = prod_{j > l} ||W_j||_op, j = 1..L
    tail = np.ones((count, L + 1))
    for l in range(L - 1, -1, -1):
        tail[:, l] = tail[:, l + 1] * ops[:, l]
    return fro2, np.maximum(1.0, tail ** 2)


# -- Bound profiles ---------------------------------------------------------

@dataclass(frozen=True)
class BoundProfile:
    values: tuple
    kind: str
    metadata: dict = field(default_factory=dict)

    @property
    def argmin(self) -> int:
        """Minimizing layer index; the lowest index wins ties."""
        return int(np.argmin(self.values))

    @property
    def minimum(self) -> float:
        return float(min(self.values))


def _check_stacks(spec, stacks):
    stacks = list(stacks)
    if not stacks:
        raise DomainError("need at least one weight stack")
    depth = stacks[0].depth
    for s in stacks:
        if s.depth != depth or s.input_dim != spec.d0:
            raise DomainError("stacks must share depth and input dimension d0")
    return stacks, depth


def kl_bound_value(n: int, d0: int, mean_rank: float) -> float:
    """2 sqrt(E[r] (log(n/(n-1)) - 1/n) + d0/n)."""
    if n < 2:
        raise DomainError("the KL bound needs n >= 2")
    return 2.0 * math.sqrt(mean_rank * (math.log(n / (n - 1)) - 1.0 / n) + d0 / n)


def kl_bound_profile(spec: GaussianMixtureSpec, stacks: Sequence[WeightStack]) -> BoundProfile:
    """Rank-based KL bound at every layer, from the sample mean of ranks."""
    if spec.n < 2:
        raise DomainError("the KL bound needs n >= 2")
    stacks, depth = _check_stacks(spec, stacks)
    ranks = np.array([s.ranks for s in stacks], dtype=float)
    ranks[:, 0] = spec.d0
    mean_ranks = ranks.mean(axis=0)
    values = tuple(kl_bound_value(spec.n, spec.d0, r) for r in mean_ranks)
    return BoundProfile(values, "kl", {"stacks": len(stacks), "mean_ranks": tuple(mean_ranks)})


def wasserstein_coefficient(spec: GaussianMixtureSpec) -> float:
    n = spec.n
    return (LOSS_LIPSCHITZ * spec.sigma0 * (math.sqrt(spec.d0) + math.sqrt(n) - math.sqrt(n - 1))
            / math.sqrt(n))


def wasserstein_bound_profile(spec: GaussianMixtureSpec, stacks: Sequence[WeightStack]) -> BoundProfile:
    if spec.n < 2:
        raise DomainError("the Wasserstein bound needs n >= 2")
    stacks, depth = _check_stacks(spec, stacks)
    weighted = np.array([[max(1.0, s.tail_op_product(l) ** 2) * s.product_fro[l] ** 2
                          for l in range(depth + 1)] for s in stacks])
    return _wasserstein_from_means(spec, weighted.mean(axis=0), len(stacks))


def _wasserstein_from_means(spec, weighted_means, count):
    coef = wasserstein_coefficient(spec)
    values = tuple(coef * math.sqrt(m) for m in weighted_means)
    return BoundProfile(values, "wasserstein", {"stacks": count, "coefficient": coef})


# -- Funnel layer -----------------------------------------------------------

@dataclass(frozen=True)
class FunnelResult:
    index: int
    sample_means: tuple
    weighted_means: tuple
    weighted_index: int
    tail_violation_rate: float
    metadata: dict = field(default_factory=dict)


def funnel_layer(spec: GaussianMixtureSpec, cfg: RotationStackConfig, datasets: int,
                 stacks_per_dataset: int, seed: int) -> FunnelResult:
    """Layer minimizing the sample mean of ||W_(l)||_F^2 over generated stacks.

    Dataset k uses RNG stream k of ``seed`` for both its samples and its
    stacks, so the result does not depend on evaluation order. The weighted
    criterion (with the trailing operator-norm factor) is reported as well;
    ``tail_violation_rate`` is the fraction of (stack, layer) pairs whose
    trailing scale product exceeds 1.
    """
    if datasets < 1 or stacks_per_dataset < 1:
        raise DomainError("datasets and stacks_per_dataset must be >= 1")
    L = cfg.depth
    fro_sum = np.zeros(L + 1)
    weighted_sum = np.zeros(L + 1)
    violations = 0
    for k in range(datasets):
        rng = make_rng(seed, k)
        target = fit_mean_classifier(sample_dataset(spec, rng))
        hidden, last = rotation_layers(cfg, target, rng, stacks_per_dataset)
        fro2, weight = batched_profiles(hidden, last)
        fro_sum += fro2.sum(axis=0)
        weighted_sum += (weight * fro2).sum(axis=0)
        violations += int(np.sum(weight[:, :L] > 1.0))
    total = datasets * stacks_per_dataset
    means = fro_sum / total
    weighted = weighted_sum / total
    return FunnelResult(
        index=int(np.argmin(means)),
        sample_means=tuple(means),
        weighted_means=tuple(weighted),
        weighted_index=int(np.argmin(weighted)),
        tail_violation_rate=violations / (total * L),
        metadata={"datasets": datasets, "stacks_per_dataset": stacks_per_dataset, "seed": seed},
    )


# -- Generalization error ---------------------------------------------------

def squared_tanh_loss(w, x, y):
    return (y - np.tanh(x @ w)) ** 2


def population_risk(w, spec: GaussianMixtureSpec, nodes: int = GH_NODES) -> float:
    """E[(Y - tanh(w.X))^2] by Gauss-Hermite quadrature over w.X | Y."""
    w = np.asarray(w, dtype=float)
    x, wt = np.polynomial.hermite.hermgauss(nodes)
    scale = spec.sigma0 * float(np.linalg.norm(w))
    risk = 0.0
    for y in (-1.0, 1.0):
        s = y * float(w @ spec.mean) + math.sqrt(2.0) * scale * x
        risk += 0.5 * float(np.dot(wt, (y - np.tanh(s)) ** 2)) / math.sqrt(math.pi)
    return risk


def population_risk_mc(w, spec: GaussianMixtureSpec, rng, n_test: int):
    """Monte-Carlo population risk on fresh samples; returns (mean, std_error)."""
    data = sample_dataset(GaussianMixtureSpec(spec.mu0, spec.sigma0, n_test), rng)
    losses = squared_tanh_loss(np.asarray(w, dtype=float), data.features, data.labels)
    return float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(n_test))


@dataclass(frozen=True)
class GenErrorEstimate:
    estimate: float
    std_error: float
    datasets: int
    risk_mode: str
    gaps: tuple = field(repr=False, default=())


def empirical_gen_error(spec: GaussianMixtureSpec,
                        trainer: Callable[[Dataset], np.ndarray] = fit_mean_classifier,
                        datasets: int = 500, seed: int = 0,
                        risk_mode: str = "quadrature", n_test: int = 10_000) -> GenErrorEstimate:
    """Average of (population risk - training risk) over fresh datasets.

    ``risk_mode`` is ``"quadrature"`` (Gauss-Hermite) or ``"monte_carlo"``
    (``n_test`` fresh points per dataset, drawn from a separate stream).
    """
    if datasets < 2:
        raise DomainError("need at least two datasets for a standard error")
    if risk_mode not in ("quadrature", "monte_carlo"):
        raise DomainError(f"unknown risk_mode {risk_mode!r}")
    gaps = np.empty(datasets)
    for k in range(datasets):
        data = sample_dataset(spec, make_rng(seed, k))
        w = np.asarray(trainer(data), dtype=float)
        train = float(np.mean(squared_tanh_loss(w, data.features, data.labels)))
        if risk_mode == "quadrature":
            test = population_risk(w, spec)
        else:
            test, _ = population_risk_mc(w, spec, make_rng(seed, datasets + k), n_test)
        gaps[k] = test - train
    return GenErrorEstimate(float(gaps.mean()), float(gaps.std(ddof=1) / math.sqrt(datasets)),
                            datasets, risk_mode, tuple(gaps))


@dataclass(frozen=True)
class GenBoundReport:
    gen_error: GenErrorEstimate
    kl: BoundProfile
    wasserstein: BoundProfile


def gen_bound_report(spec: GaussianMixtureSpec, cfg: RotationStackConfig,
                     datasets: int, stacks_per_dataset: int, seed: int) -> GenBoundReport:
    """Gen-error estimate next to both bound profiles for the rotation learner.

    The learner trains the mean classifier on each dataset and factorizes it
    with ``cfg``; the gen error depends on the end-to-end product only.
    """
    gen = empirical_gen_error(spec, fit_mean_classifier, datasets, seed)
    stacks = []
    for k in range(datasets):
        rng = make_rng(seed, k)
        target = fit_mean_classifier(sample_dataset(spec, rng))
        for _ in range(stacks_per_dataset):
            stacks.append(build_rotation_stack(cfg, target, rng))
    return GenBoundReport(gen, kl_bound_profile(spec, stacks), wasserstein_bound_profile(spec, stacks))
