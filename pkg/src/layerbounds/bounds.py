"""Closed-form generalization bounds.

All information quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import comb

from .errors import DomainError


@dataclass(frozen=True)
class MutualInfoInputs:
    """Per-sample I(X_i; W | Y_i) and I(Y_i; W), plus the loss scale sigma."""

    mi_x_given_y: tuple
    mi_y: tuple
    sub_gaussian_sigma: float
    label_count: int = 2

    def __post_init__(self):
        mx = tuple(float(v) for v in self.mi_x_given_y)
        my = tuple(float(v) for v in self.mi_y)
        if len(mx) != len(my) or not mx:
            raise DomainError("need the same nonzero number of mi_x_given_y and mi_y values")
        if min(mx) < 0 or min(my) < 0:
            raise DomainError("mutual information values must be nonnegative")
        if max(my) > math.log(self.label_count) + 1e-12:
            raise DomainError(f"I(Y;W) cannot exceed log K = {math.log(self.label_count):.6g}")
        if not self.sub_gaussian_sigma > 0:
            raise DomainError("sub_gaussian_sigma must be positive")
        object.__setattr__(self, "mi_x_given_y", mx)
        object.__setattr__(self, "mi_y", my)

    @property
    def n(self) -> int:
        return len(self.mi_y)


def contraction_bound(mi: MutualInfoInputs, eta_product: float) -> float:
    """(sigma sqrt(2) / n) * sum_i sqrt(eta * I(X_i;W|Y_i) + I(Y_i;W))."""
    if not 0.0 <= eta_product <= 1.0:
        raise DomainError(f"eta_product must lie in [0, 1], got {eta_product!r}")
    terms = eta_product * np.asarray(mi.mi_x_given_y) + np.asarray(mi.mi_y)
    return mi.sub_gaussian_sigma * math.sqrt(2.0) / mi.n * float(np.sum(np.sqrt(terms)))


@dataclass(frozen=True)
class DiscreteLatentSpec:
    sigma: float
    label_count: int
    t_bar: float
    latent_size: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        upper = 1.0 / (self.latent_size * self.label_count)
        if not 0.0 < self.t_bar < upper:
            raise DomainError(f"t_bar must lie in (0, {upper:.6g}), got {self.t_bar!r}")


def discrete_latent_bound(spec: DiscreteLatentSpec) -> float:
    return math.sqrt(2.0 * spec.sigma ** 2 * math.log(spec.label_count ** 2 / spec.t_bar))


@dataclass(frozen=True)
class MiubInputs:
    """I_0 <= I_1 <= ... <= I_{d0}: best MI using k kept input coordinates."""

    i_k: tuple

    def __post_init__(self):
        ik = tuple(float(v) for v in self.i_k)
        if len(ik) < 2:
            raise DomainError("i_k needs d0 + 1 >= 2 entries")
        if ik[0] != 0.0:
            raise DomainError("i_k[0] must be exactly 0")
        if any(b < a for a, b in zip(ik, ik[1:])):
            raise DomainError("i_k must be nondecreasing")
        object.__setattr__(self, "i_k", ik)

    @property
    def d0(self) -> int:
        return len(self.i_k) - 1


def miub_dropout(inputs: MiubInputs, delta0: float) -> float:
    """Binomial-weighted MI bound under input Dropout with probability delta0."""
    if not 0.0 <= delta0 <= 1.0:
        raise DomainError(f"delta0 must lie in [0, 1], got {delta0!r}")
    d0 = inputs.d0
    k = np.arange(d0 + 1)
    weights = comb(d0, k) * delta0 ** (d0 - k) * (1.0 - delta0) ** k
    return float(np.dot(weights, inputs.i_k))


@dataclass(frozen=True)
class GibbsSpec:
    alpha: float
    gamma: float
    n: int
    eta_product: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError("gamma must lie in [0, 1]")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if not 0.0 <= self.eta_product <= 1.0:
            raise DomainError("eta_product must lie in [0, 1]")


def gibbs_bound(spec: GibbsSpec) -> float:
    """alpha / (4n) * sqrt(gamma * eta + 1 - gamma), for losses in [0, 1]."""
    root = math.sqrt(spec.gamma * spec.eta_product + 1.0 - spec.gamma)
    return spec.alpha * root / (4.0 * spec.n)


def gibbs_bound_worst_case(alpha: float, n: int, eta_product: float,
                           gammas: Sequence[float] = (0.0, 1.0)) -> float:
    """Largest Gibbs bound over a grid of gamma values (gamma is not known in practice)."""
    return max(gibbs_bound(GibbsSpec(alpha, g, n, eta_product)) for g in gammas)


@dataclass(frozen=True)
class FiniteParamSpec:
    dims: tuple
    B: int

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or min(dims) < 1:
            raise DomainError("dims needs L >= 1 layers of positive width")
        if self.B < 2:
            raise DomainError("B must be >= 2")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def relaxed(cls, dims, B):
        """Skip the B >= 2 check; only meant for limit checks such as B = 1."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "dims", tuple(int(d) for d in dims))
        object.__setattr__(obj, "B", int(B))
        return obj


def parameter_count(dims: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(dims[1:], dims[:-1]))


def finite_param_mi_ub(spec: FiniteParamSpec) -> float:
    """Entropy bound sum_l d_l d_{l-1} log B on I(X;W|Y) for a finite weight grid."""
    return parameter_count(spec.dims) * math.log(spec.B)


class Comparison(str, Enum):
    WASSERSTEIN_TIGHTER = "wasserstein_tighter"
    INCONCLUSIVE = "inconclusive"


def kl_vs_wasserstein_flag(rho0: float, K: int, loss_range_A: float) -> Comparison:
    """The Wasserstein bound is guaranteed tighter when rho0 * K^2 <= A."""
    if not rho0 > 0 or not loss_range_A > 0:
        raise DomainError("rho0 and A must be positive")
    if rho0 * K * K <= loss_range_A:
        return Comparison.WASSERSTEIN_TIGHTER
    return Comparison.INCONCLUSIVE
