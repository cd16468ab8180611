"""Contraction coefficients of Dropout, DropConnect and noise-injected layers.

Site indexing follows the layer that owns the randomness:

* Dropout acts on the *source* representation T_l, l = 0..L-1, width d_l.
* DropConnect acts on the weights of layer l = 1..L, a d_l x d_{l-1} mask.
* Gaussian noise is added to the *output* of layer l = 1..L, width d_l.

Layers without a site are deterministic maps and contribute a factor of 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, UnsupportedRegularization
from .numerics import q_function


def _check_prob(name, p):
    if not (0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {p!r}")


@dataclass(frozen=True)
class Dropout:
    delta: float
    width: int

    def __post_init__(self):
        _check_prob("delta", self.delta)
        if self.width < 1:
            raise DomainError(f"width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class DropConnect:
    deltas: np.ndarray

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.deltas, dtype=float))
        if d.ndim != 2 or d.size == 0:
            raise DomainError("deltas must be a non-empty matrix")
        if not np.all((d > 0.0) & (d < 1.0)):
            raise DomainError("every DropConnect probability must lie in (0, 1)")
        object.__setattr__(self, "deltas", d)

    @property
    def shape(self):
        return self.deltas.shape


@dataclass(frozen=True)
class GaussianNoise:
    eps: float
    act_sup: float
    width: int

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps!r}")
        if not self.act_sup > 0:
            raise DomainError(f"act_sup must be positive, got {self.act_sup!r}")
        if self.width < 1:
            raise DomainError(f"width must be >= 1, got {self.width}")


Regularization = Union[Dropout, DropConnect, GaussianNoise, None]


def dropout_eta(delta: float, width: int) -> float:
    """KL contraction coefficient of a width-``width`` Dropout layer (exact)."""
    _check_prob("delta", delta)
    if width < 1:
        raise DomainError(f"width must be >= 1, got {width}")
    return 1.0 - delta ** width


def dropconnect_eta_ub(deltas) -> float:
    """Upper bound 1 - prod(deltas) on the DropConnect coefficient."""
    d = np.atleast_2d(np.asarray(deltas, dtype=float))
    if not np.all((d > 0.0) & (d < 1.0)):
        raise DomainError("every DropConnect probability must lie in (0, 1)")
    return 1.0 - float(np.prod(d))


def noise_eta_ub(eps: float, act_sup: float, width: int) -> float:
    """Dobrushin bound for a bounded map followed by N(0, eps^2 I) noise."""
    if not eps > 0 or not act_sup > 0:
        raise DomainError("eps and act_sup must be positive")
    return 1.0 - 2.0 * q_function(math.sqrt(2.0 * width) * act_sup / (2.0 * eps))


@dataclass(frozen=True)
class SiteCoefficient:
    layer: int
    kind: str
    width: int
    value: float
    tightness: str  # "exact" or "upper_bound"


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths d_0..d_L, label count K and the regularization sites.

    ``sites`` is a tuple of ``(layer_index, regularization)`` pairs; a
    ``None`` regularization is allowed and means a deterministic layer.
    """

    dims: tuple
    label_count: int = 2
    sites: tuple = field(default_factory=tuple)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2 or min(dims) < 1:
            raise DomainError(f"dims must list at least two positive widths, got {dims}")
        if self.label_count < 1:
            raise DomainError("label_count must be >= 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "sites", tuple((int(l), r) for l, r in self.sites))
        L = self.depth
        for l, reg in self.sites:
            if reg is None:
                continue
            if isinstance(reg, Dropout):
                if not 0 <= l <= L - 1:
                    raise DomainError(f"Dropout site {l} outside source layers 0..{L - 1}")
                if reg.width != dims[l]:
                    raise DomainError(f"Dropout at layer {l} has width {reg.width}, expected {dims[l]}")
            elif isinstance(reg, DropConnect):
                if not 1 <= l <= L:
                    raise DomainError(f"DropConnect site {l} outside layers 1..{L}")
                if reg.shape != (dims[l], dims[l - 1]):
                    raise DomainError(
                        f"DropConnect at layer {l} has shape {reg.shape}, "
                        f"expected {(dims[l], dims[l - 1])}")
            elif isinstance(reg, GaussianNoise):
                if not 1 <= l <= L:
                    raise DomainError(f"noise site {l} outside layers 1..{L}")
                if reg.width != dims[l]:
                    raise DomainError(f"noise at layer {l} has width {reg.width}, expected {dims[l]}")
            else:
                raise UnsupportedRegularization(f"unknown regularization {reg!r}")

    @property
    def depth(self) -> int:
        return len(self.dims) - 1

    @classmethod
    def with_dropout(cls, dims, delta, label_count=2):
        """Dropout with a common probability on every source layer 0..L-1."""
        dims = tuple(dims)
        sites = tuple((l, Dropout(delta, dims[l])) for l in range(len(dims) - 1))
        return cls(dims, label_count, sites)

    @classmethod
    def with_noise(cls, dims, eps, act_sup=1.0, label_count=2):
        """Gaussian noise of level ``eps`` after every layer 1..L."""
        dims = tuple(dims)
        sites = tuple((l, GaussianNoise(eps, act_sup, dims[l])) for l in range(1, len(dims)))
        return cls(dims, label_count, sites)

    @classmethod
    def with_dropconnect(cls, dims, delta, label_count=2):
        dims = tuple(dims)
        sites = tuple((l, DropConnect(np.full((dims[l], dims[l - 1]), delta)))
                      for l in range(1, len(dims)))
        return cls(dims, label_count, sites)


def site_coefficients(spec: NetworkSpec) -> list:
    """Per-site coefficients with their tightness label."""
    out = []
    for l, reg in spec.sites:
        if reg is None:
            continue
        if isinstance(reg, Dropout):
            out.append(SiteCoefficient(l, "dropout", reg.width,
                                       dropout_eta(reg.delta, reg.width), "exact"))
        elif isinstance(reg, DropConnect):
            out.append(SiteCoefficient(l, "dropconnect", reg.deltas.size,
                                       dropconnect_eta_ub(reg.deltas), "upper_bound"))
        else:
            out.append(SiteCoefficient(l, "noise", reg.width,
                                       noise_eta_ub(reg.eps, reg.act_sup, reg.width),
                                       "upper_bound"))
    return out


def network_eta_product(spec: NetworkSpec) -> float:
    """Product of the per-site coefficients (1 for a deterministic network)."""
    prod = 1.0
    for c in site_coefficients(spec):
        prod *= c.value
    return prod


@dataclass(frozen=True)
class ProductApprox:
    approx: float
    exact: float
    abs_gap: float
    rel_gap: float


def eta_product_approx(spec: NetworkSpec) -> ProductApprox:
    """exp(-sum delta_l^d_l) against the exact Dropout product."""
    total = 0.0
    for l, reg in spec.sites:
        if reg is None:
            continue
        if not isinstance(reg, Dropout):
            raise UnsupportedRegularization(
                f"exponential approximation is only defined for Dropout, layer {l} has {type(reg).__name__}")
        total += reg.delta ** reg.width
    approx = math.exp(-total)
    exact = network_eta_product(spec)
    gap = abs(approx - exact)
    return ProductApprox(approx, exact, gap, gap / exact if exact > 0 else math.inf)
