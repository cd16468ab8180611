"""Small dense linear algebra, the Gaussian Q function and seeded randomness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from .errors import ShapeMismatch

RANK_TOL = 1e-10


def q_function(x: float) -> float:
    """Standard normal upper tail probability P(Z > x)."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    Used as an integration oracle for closed forms elsewhere in the
    package, so it deliberately avoids scipy.
    """

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def q_function_quad(x: float, tol: float = 1e-12) -> float:
    """Q(x) by integrating the standard normal density (oracle path)."""
    pdf = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    upper = max(x, 0.0) + 40.0
    if x >= 0:
        return adaptive_simpson(pdf, x, upper, tol)
    return 0.5 + adaptive_simpson(pdf, x, 0.0, tol)


def frobenius_norm(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(math.sqrt(np.sum(m * m)))


def operator_norm(m) -> float:
    """Largest singular value."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return float(np.linalg.svd(m, compute_uv=False)[0])


def numerical_rank(m, tol_factor: float = RANK_TOL) -> int:
    """Count singular values above ``tol_factor * max(shape) * s_max``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol_factor * max(m.shape) * s[0]))


@dataclass(frozen=True)
class WeightStack:
    """Weight matrices W_1..W_L together with their cached partial products.

    ``products[l]`` is W_l W_{l-1} ... W_1, with ``products[0]`` the identity
    of size d_0. ``ranks``, ``product_fro`` and ``layer_op`` are indexed the
    same way (``layer_op[0]`` is 1 for the implicit identity layer).
    """

    layers: tuple
    products: tuple = field(init=False, repr=False)
    ranks: tuple = field(init=False, repr=False)
    product_fro: tuple = field(init=False, repr=False)
    layer_op: tuple = field(init=False, repr=False)

    def __post_init__(self):
        layers = tuple(np.atleast_2d(np.asarray(w, dtype=float)) for w in self.layers)
        if not layers:
            raise ShapeMismatch("a weight stack needs at least one layer")
        for l, w in enumerate(layers, start=1):
            if not np.all(np.isfinite(w)):
                raise ValueError(f"layer {l} has non-finite entries")
            if l > 1 and w.shape[1] != layers[l - 2].shape[0]:
                raise ShapeMismatch(
                    f"layer {l} has {w.shape[1]} columns but layer {l - 1} "
                    f"has {layers[l - 2].shape[0]} rows")
        d0 = layers[0].shape[1]
        products = [np.eye(d0)]
        for w in layers:
            products.append(w @ products[-1])
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "products", tuple(products))
        object.__setattr__(self, "ranks", tuple(numerical_rank(p) for p in products))
        object.__setattr__(self, "product_fro", tuple(frobenius_norm(p) for p in products))
        object.__setattr__(self, "layer_op", (1.0,) + tuple(operator_norm(w) for w in layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[1]

    def tail_op_product(self, l: int) -> float:
        """prod_{j>l} ||W_j||_op, equal to 1 for l = L."""
        return float(np.prod(self.layer_op[l + 1:]))


def weight_products(stack: WeightStack | Sequence) -> WeightStack:
    """Build (or rebuild) a stack with products, ranks and norms cached."""
    layers = stack.layers if isinstance(stack, WeightStack) else stack
    return WeightStack(tuple(layers))


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``.

    Distinct streams are statistically independent, so Monte-Carlo trials
    can each take their own stream and be run in any order.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))
