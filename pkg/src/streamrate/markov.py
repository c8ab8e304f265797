"""Exact information measures on stationary finite-alphabet Markov chains.

All entropies and mutual informations are computed from exact matrix powers
of the transition matrix (no sampling), in bits, with the 0*log(0) = 0
convention.  This module also builds the streaming rate bounds for lossless
recovery after a burst of up to B erased packets followed by a grace window
of W slots: both bounds equal the ideal predictive-coding rate H(s1|s0) plus
a recovery penalty that decays like 1/(W+1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericalError, ValidationError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
POWER_ITER_TOL = 1e-12
POWER_ITER_CAP = 10**6


def _entropy_bits(p: np.ndarray) -> float:
    """Shannon entropy of a probability vector/array in bits, 0*log(0) = 0."""
    p = np.asarray(p, dtype=float).ravel()
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def _validate_transition(transition: np.ndarray) -> np.ndarray:
    P = np.asarray(transition, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
        raise ValidationError(f"transition matrix must be square, got shape {P.shape}")
    if np.any(P < -ROW_SUM_TOL) or np.any(P > 1.0 + ROW_SUM_TOL):
        raise ValidationError("transition probabilities must lie in [0, 1]")
    row_err = np.max(np.abs(P.sum(axis=1) - 1.0))
    if row_err > ROW_SUM_TOL:
        raise ValidationError(f"rows must sum to 1 within {ROW_SUM_TOL}, max error {row_err:.3e}")
    return P


def _stationary_null_space(P: np.ndarray) -> np.ndarray | None:
    """Unique probability vector in the null space of (P^T - I), or None."""
    n = P.shape[0]
    _, s, vt = np.linalg.svd(P.T - np.eye(n))
    null_dim = int(np.sum(s < 1e-10 * max(1.0, s[0])))
    if null_dim != 1:
        return None
    v = vt[-1]
    v = v / v.sum()
    if np.any(v < -1e-9):
        return None
    return np.clip(v, 0.0, None) / np.clip(v, 0.0, None).sum()


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary law of a row-stochastic matrix, by power iteration.

    Falls back to a null-space solve of (P^T - I) when the iteration does not
    converge within the budget.  Chains without a unique stationary law
    (reducible chains) raise ConvergenceError.
    """
    P = _validate_transition(transition)
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    converged = False
    for _ in range(POWER_ITER_CAP):
        nxt = pi @ P
        if np.max(np.abs(nxt - pi)) < POWER_ITER_TOL:
            pi = nxt
            converged = True
            break
        pi = nxt
    unique = _stationary_null_space(P)
    if unique is None:
        raise ConvergenceError("chain has no unique stationary distribution (reducible)")
    if not converged:
        pi = unique
    return pi / pi.sum()


@dataclass(frozen=True)
class MarkovChain:
    """Stationary first-order chain: row-stochastic transition + stationary law."""

    alphabet_size: int
    transition: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        P = _validate_transition(self.transition)
        if self.alphabet_size != P.shape[0]:
            raise ValidationError(
                f"alphabet_size {self.alphabet_size} does not match matrix of size {P.shape[0]}"
            )
        pi = np.asarray(self.stationary, dtype=float)
        if pi.shape != (self.alphabet_size,):
            raise ValidationError("stationary vector has wrong shape")
        if abs(pi.sum() - 1.0) > STATIONARY_TOL or np.any(pi < -STATIONARY_TOL):
            raise ValidationError("stationary vector must be a probability vector")
        if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
            raise ValidationError(f"stationary vector fails pi P = pi within {STATIONARY_TOL}")
        P.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_transition(cls, transition) -> "MarkovChain":
        P = _validate_transition(np.asarray(transition, dtype=float))
        pi = stationary_distribution(P)
        return cls(alphabet_size=P.shape[0], transition=P, stationary=pi)

    @classmethod
    def from_json(cls, source) -> "MarkovChain":
        """Load {"alphabet_size": n, "transition": [[...], ...]} from a path,
        file object, or dict.  The stationary vector is always recomputed."""
        if isinstance(source, dict):
            doc = source
        elif hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        chain = cls.from_transition(doc["transition"])
        if "alphabet_size" in doc and int(doc["alphabet_size"]) != chain.alphabet_size:
            raise ValidationError("alphabet_size field disagrees with transition matrix")
        return chain


def binary_symmetric_chain(q: float) -> MarkovChain:
    """Binary chain that flips state with probability q each step."""
    if not 0.0 <= q <= 1.0:
        raise ValidationError("flip probability must lie in [0, 1]")
    return MarkovChain.from_transition([[1.0 - q, q], [q, 1.0 - q]])


@dataclass(frozen=True)
class LosslessBounds:
    """Upper/lower bounds on the lossless streaming rate, in bits per symbol.

    Both bounds dominate the predictive-coding rate H(s1|s0) and coincide when
    W = 0.
    """

    upper: float
    lower: float
    predictive_rate: float
    B: int
    W: int

    def __post_init__(self):
        tol = 1e-12
        if self.lower > self.upper + tol:
            raise ValidationError("lower bound exceeds upper bound")
        if self.upper < self.predictive_rate - tol or self.lower < self.predictive_rate - tol:
            raise ValidationError("bounds fell below the predictive-coding rate")
        if self.W == 0 and abs(self.upper - self.lower) > tol:
            raise ValidationError("bounds must coincide at W = 0")


def _check_window(B: int, W: int) -> None:
    if not (isinstance(B, (int, np.integer)) and isinstance(W, (int, np.integer))):
        raise ValidationError("B and W must be integers")
    if B < 0 or W < 0:
        raise ValidationError("B and W must be nonnegative")


def conditional_entropy_lag(chain: MarkovChain, lag: int) -> float:
    """H(s_lag | s_0) in bits for the stationary chain; lag >= 1."""
    if not isinstance(lag, (int, np.integer)) or lag < 1:
        raise ValidationError("lag must be a positive integer")
    Pk = np.linalg.matrix_power(chain.transition, int(lag))
    return float(sum(chain.stationary[a] * _entropy_bits(Pk[a]) for a in range(chain.alphabet_size)))


def window_conditional_entropy(chain: MarkovChain, B: int, W: int) -> float:
    """H(s_{B+1}, ..., s_{B+W+1} | s_0) in bits via the chain-rule decomposition
    H(s_{B+1}|s_0) + W * H(s_1|s_0)."""
    _check_window(B, W)
    h = conditional_entropy_lag(chain, B + 1)
    if W:
        h += W * conditional_entropy_lag(chain, 1)
    return h


def lossless_bounds(chain: MarkovChain, B: int, W: int) -> LosslessBounds:
    """Rate bounds for lossless recovery after a burst of <= B erasures with a
    W-slot grace window.

    upper = H(s1|s0) + I(s_B; s_{B+1} | s_0) / (W+1)
    lower = H(s1|s0) + I(s_B; s_{B+W+1} | s_0) / (W+1)

    The conditional mutual informations reduce to differences of lag
    entropies through the Markov property: I(s_B; s_{B+j} | s_0) =
    H(s_{B+j}|s_0) - H(s_j|s_0).  At B = 0 both penalties vanish and the
    bounds equal the predictive rate.
    """
    _check_window(B, W)
    h1 = conditional_entropy_lag(chain, 1)
    if B == 0:
        mi_upper = mi_lower = 0.0
    else:
        mi_upper = conditional_entropy_lag(chain, B + 1) - h1
        mi_lower = conditional_entropy_lag(chain, B + W + 1) - conditional_entropy_lag(chain, W + 1)
    upper = h1 + mi_upper / (W + 1)
    lower = h1 + mi_lower / (W + 1)
    window = window_conditional_entropy(chain, B, W)
    if abs(upper * (W + 1) - window) > 1e-10:
        raise NumericalError(
            f"amortized upper bound {upper * (W + 1):.12f} disagrees with the joint "
            f"window entropy {window:.12f}"
        )
    return LosslessBounds(upper=upper, lower=max(lower, h1), predictive_rate=h1, B=int(B), W=int(W))


def multiterminal_sum_rate(chain: MarkovChain) -> float:
    """Sum-rate floor H(s1|s0,s2) + H(s3|s0) of the two-decoder side-information
    problem; equals twice the (B=1, W=1) lower bound."""
    P = chain.transition
    pi = chain.stationary
    joint3 = pi[:, None, None] * P[:, :, None] * P[None, :, :]
    h_mid = _entropy_bits(joint3) - _entropy_bits(joint3.sum(axis=1))
    total = h_mid + conditional_entropy_lag(chain, 3)
    cross = 2.0 * lossless_bounds(chain, 1, 1).lower
    if abs(total - cross) > 1e-10:
        raise NumericalError(
            f"sum rate {total:.12f} disagrees with twice the (B=1, W=1) lower bound {cross:.12f}"
        )
    return total


def is_symmetric(chain: MarkovChain, tol: float) -> bool:
    """True iff the chain is reversible: pi(a) P(a,b) == pi(b) P(b,a) entrywise,
    so adjacent pairs can be exchanged without changing the joint law."""
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    flow = chain.stationary[:, None] * chain.transition
    return bool(np.max(np.abs(flow - flow.T)) <= tol)
