"""Finite channels and brute-force contraction-coefficient oracles.

The closed forms in :mod:`layerbounds.sdpi` are checked here against
direct searches: the KL contraction coefficient is approximated by a
lattice search over binary-support input pairs, and lower bounded through
the Hellinger distance between output rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphabetTooLarge, DomainError
from .numerics import adaptive_simpson, q_function

MAX_ALPHABET = 64
ROW_TOL = 1e-12


@dataclass(frozen=True)
class FiniteChannel:
    """Row-stochastic matrix; row x is the output law given input x."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if np.any(m < 0) or np.any(m > 1):
            raise DomainError("channel entries must lie in [0, 1]")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > ROW_TOL):
            raise DomainError("channel rows must sum to 1")
        object.__setattr__(self, "matrix", m)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    def __matmul__(self, other: "FiniteChannel") -> "FiniteChannel":
        """Parallel (tensor) product of two channels."""
        return FiniteChannel(np.kron(self.matrix, other.matrix))


def identity_channel(k: int) -> FiniteChannel:
    return FiniteChannel(np.eye(k))


def erasure_channel(delta: float) -> FiniteChannel:
    """Binary erasure channel; outputs are (0, 1, erased)."""
    return FiniteChannel([[1 - delta, 0.0, delta], [0.0, 1 - delta, delta]])


def symmetric_channel(p: float) -> FiniteChannel:
    return FiniteChannel([[1 - p, p], [p, 1 - p]])


def z_channel(delta: float) -> FiniteChannel:
    """Binary Z-channel: 1 flips to 0 with probability delta, 0 is kept."""
    return FiniteChannel([[1 - delta, delta], [0.0, 1.0]])


def dropout_coordinate(delta: float) -> FiniteChannel:
    """One Dropout coordinate on symbols (a, b, 0) with a != b both nonzero.

    A nonzero value is zeroed with probability delta; zero stays zero.
    """
    return FiniteChannel([[1 - delta, 0.0, delta],
                          [0.0, 1 - delta, delta],
                          [0.0, 0.0, 1.0]])


def dropout_channel(deltas) -> FiniteChannel:
    """Parallel Dropout channel, one coordinate per entry of ``deltas``."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    ch = dropout_coordinate(deltas[0])
    for d in deltas[1:]:
        ch = ch @ dropout_coordinate(d)
    return ch


def dropconnect_channel(deltas) -> FiniteChannel:
    """DropConnect mask channel for a ``rows x cols`` probability matrix.

    Inputs are vectors in {a, b, 0}^cols; the output is the masked
    ``rows x cols`` matrix whose (i, j) entry keeps input coordinate j with
    probability 1 - deltas[i, j].
    """
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    rows, cols = deltas.shape
    if 3 ** (rows * cols) > MAX_ALPHABET:
        raise AlphabetTooLarge(f"{rows}x{cols} mask has {3 ** (rows * cols)} outputs")
    coord = [dropout_coordinate(d) for d in deltas.ravel()]
    inputs = list(itertools.product(range(3), repeat=cols))
    outputs = list(itertools.product(range(3), repeat=rows * cols))
    m = np.zeros((len(inputs), len(outputs)))
    for a, t in enumerate(inputs):
        src = [t[k % cols] for k in range(rows * cols)]
        for b, u in enumerate(outputs):
            m[a, b] = np.prod([coord[k].matrix[src[k], u[k]] for k in range(rows * cols)])
    return FiniteChannel(m)


def _bern_kl(a, b):
    """KL(Bern(a) || Bern(b)) for a, b strictly inside (0, 1)."""
    return a * np.log(a / b) + (1 - a) * np.log((1 - a) / (1 - b))


def eta_kl_bruteforce(ch: FiniteChannel, grid: int = 1000) -> float:
    """Lattice search for the KL contraction coefficient of ``ch``.

    For every input pair (x, x') the inputs range over Bern(alpha) and
    Bern(beta) supported on {x, x'}, with alpha, beta on the interior lattice
    i / (grid + 1). Pairs with |alpha - beta| < 1e-6 are skipped; the
    alpha -> beta limit is taken separately through the local chi-square
    ratio. The result never exceeds the true coefficient (up to rounding)
    and approaches it from below as ``grid`` grows.
    """
    if ch.n_inputs > MAX_ALPHABET or ch.n_outputs > MAX_ALPHABET:
        raise AlphabetTooLarge(f"channel is {ch.n_inputs}x{ch.n_outputs}, limit {MAX_ALPHABET}")
    if grid < 100:
        raise DomainError(f"grid must be >= 100, got {grid}")
    if ch.n_inputs < 2:
        return 0.0
    alpha = np.arange(1, grid + 1) / (grid + 1)
    in_kl = _bern_kl(alpha[:, None], alpha[None, :])
    valid = np.abs(alpha[:, None] - alpha[None, :]) >= 1e-6
    in_kl = np.where(valid, in_kl, np.inf)

    best = 0.0
    for x, y in itertools.combinations(range(ch.n_inputs), 2):
        r, s = ch.matrix[x], ch.matrix[y]
        support = (r > 0) | (s > 0)
        r, s = r[support], s[support]
        diff = r - s
        if not np.any(diff):
            continue
        mix = alpha[:, None] * r + (1 - alpha[:, None]) * s  # (grid, m), all > 0
        log_mix = np.log(mix)
        neg_ent = np.sum(mix * log_mix, axis=1)
        out_kl = neg_ent[:, None] - mix @ log_mix.T
        ratio = np.max(out_kl / in_kl)
        # alpha -> beta limit of the KL ratio equals the chi-square ratio
        local = np.max(alpha * (1 - alpha) * np.sum(diff ** 2 / mix, axis=1))
        best = max(best, float(ratio), float(local))
    return best


def hellinger_eta_lower_bound(ch: FiniteChannel) -> float:
    """Half the largest squared Hellinger distance sum((sqrt p - sqrt q)^2) between rows."""
    root = np.sqrt(ch.matrix)
    best = 0.0
    for x, y in itertools.combinations(range(ch.n_inputs), 2):
        best = max(best, float(np.sum((root[x] - root[y]) ** 2)))
    return 0.5 * best


def tv_shifted_gaussians(shift_norm: float, eps: float) -> float:
    """TV distance between N(m, eps^2 I) and N(m', eps^2 I) with |m - m'| = shift_norm."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if shift_norm < 0:
        raise DomainError("shift_norm must be nonnegative")
    if math.isinf(shift_norm):
        return 1.0
    return 1.0 - 2.0 * q_function(shift_norm / (2.0 * eps))


def tv_shifted_gaussians_numeric(shift_norm: float, eps: float, tol: float = 1e-10) -> float:
    """Half the L1 distance between the two densities, integrated along the shift axis."""
    c = 1.0 / (eps * math.sqrt(2.0 * math.pi))

    def gap(t):
        p = c * math.exp(-0.5 * (t / eps) ** 2)
        q = c * math.exp(-0.5 * ((t - shift_norm) / eps) ** 2)
        return abs(p - q)

    # |p - q| has a kink at the midpoint, and narrow peaks at both means can
    # slip between the first Simpson samples; split at all of them
    knots = sorted({-10.0 * eps, 0.0, 0.5 * shift_norm, shift_norm, shift_norm + 10.0 * eps})
    parts = len(knots) - 1
    return 0.5 * sum(adaptive_simpson(gap, a, b, tol / parts) for a, b in zip(knots, knots[1:]))
