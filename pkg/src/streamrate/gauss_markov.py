"""Closed-form and fixed-point rate bounds for the unit-variance Gauss-Markov
source s_i = rho * s_{i-1} + n_i streamed over burst-erasure channels with
immediate recovery (no grace window) and mean-square distortion target D.

Rates are in bits.  The achievable (upper) bounds come from an additive
Gaussian test channel u = s + z: the noise variance sigma_z2 is solved so the
decoder's steady-state MMSE hits D, and the rate is the corresponding
conditional mutual information.  The converse (lower) bound is the positive
root of a quadratic in 2^(2R).  Every steady-state limit is evaluated in
closed form; the brute-force Gaussian conditioning in `streamrate.oracle`
provides the independent finite-horizon check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import brentq

from .errors import (
    ConvergenceError,
    InfeasibleDistortionError,
    NumericalError,
    PrecisionError,
    ValidationError,
)

SIGMA_BRACKET = (1e-12, 1e12)
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class GmConfig:
    """Problem instance: correlation rho, max burst B, guard interval L
    (multi-burst model only), distortion target D.  Source variance is 1."""

    rho: float
    B: int
    D: float
    L: int = 1
    W: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValidationError("rho must lie strictly inside (0, 1)")
        if not 0.0 < self.D <= 1.0:
            raise ValidationError("D must lie in (0, 1] for a unit-variance source")
        if not (isinstance(self.B, (int, np.integer)) and self.B >= 1):
            raise ValidationError("B must be an integer >= 1")
        if not (isinstance(self.L, (int, np.integer)) and self.L >= 1):
            raise ValidationError("L must be an integer >= 1")
        if self.W != 0:
            raise ValidationError("only immediate recovery (W = 0) is supported")


@dataclass(frozen=True)
class TestChannel:
    """Additive Gaussian test channel u = s + z with noise variance sigma_z2."""

    __test__ = False  # not a test case, despite the rate-distortion name

    sigma_z2: float

    def __post_init__(self):
        if not (self.sigma_z2 > 0.0 and math.isfinite(self.sigma_z2)):
            raise ValidationError("sigma_z2 must be positive and finite")


@dataclass(frozen=True)
class GmBounds:
    """Bound chain for one configuration: lower <= upper_single <= upper_multi."""

    lower: float
    upper_single: float
    high_res: float
    sigma_z2_single: float | None
    upper_multi: float | None = None
    sigma_z2_multi: float | None = None

    def __post_init__(self):
        tol = 1e-9
        if min(self.lower, self.upper_single, self.high_res) < -tol:
            raise ValidationError("rates must be nonnegative")
        if self.lower > self.upper_single + tol:
            raise ValidationError("lower bound exceeds single-burst upper bound")
        if self.upper_multi is not None and self.upper_single > self.upper_multi + tol:
            raise ValidationError("single-burst upper bound exceeds multi-burst upper bound")


def lower_bound_closed_form(rho: float, B: int, D: float) -> float:
    """Converse rate as an explicit formula; no argument validation.

    R = (1/2) log2((D rho^2 + 1 - rho^(2(B+1)) + sqrt(delta)) / (2 D)) with
    delta = (D rho^2 + 1 - rho^(2(B+1)))^2 - 4 D rho^2 (1 - rho^(2B)).
    """
    b = D * rho**2 + 1.0 - rho ** (2 * (B + 1))
    delta = b * b - 4.0 * D * rho**2 * (1.0 - rho ** (2 * B))
    if delta < 0.0:
        if delta < -1e-13:
            raise NumericalError(f"negative discriminant {delta:.3e}")
        delta = 0.0
    return 0.5 * math.log2((b + math.sqrt(delta)) / (2.0 * D))


def lower_bound_single(cfg: GmConfig) -> float:
    """Converse bound for the single-burst channel.

    Cross-checked internally against the numerically solved quadratic
    D x^2 - (D rho^2 + 1 - rho^(2(B+1))) x + rho^2 (1 - rho^(2B)) = 0 in
    x = 2^(2R), keeping the root with x > 1 (the one yielding R > 0).
    """
    if cfg.D >= 1.0:
        return 0.0
    closed = lower_bound_closed_form(cfg.rho, cfg.B, cfg.D)
    b = cfg.D * cfg.rho**2 + 1.0 - cfg.rho ** (2 * (cfg.B + 1))
    c = cfg.rho**2 * (1.0 - cfg.rho ** (2 * cfg.B))
    roots = np.roots([cfg.D, -b, c])
    roots = roots[np.isreal(roots)].real
    valid = roots[roots > 1.0]
    if valid.size != 1:
        raise NumericalError(f"expected one quadratic root above 1, got {roots}")
    numeric = 0.5 * math.log2(float(valid[0]))
    if abs(closed - numeric) > 1e-10:
        raise NumericalError(
            f"closed form {closed:.12f} disagrees with quadratic root {numeric:.12f}"
        )
    return closed


def kalman_steady_sigma(rho: float, sigma_z2: float) -> float:
    """Steady-state one-step prediction error of the scalar Kalman filter that
    tracks the source through the test channel."""
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    if sigma_z2 < 0.0:
        raise ValidationError("sigma_z2 must be nonnegative")
    one_m_r2 = 1.0 - rho**2
    return 0.5 * math.sqrt(
        (1.0 - sigma_z2) ** 2 * one_m_r2**2 + 4.0 * sigma_z2 * one_m_r2
    ) + 0.5 * one_m_r2 * (1.0 - sigma_z2)


def riccati_prediction_error(
    rho: float, sigma_z2: float, tol: float = 1e-12, max_iter: int = 10**6
) -> float:
    """One-step prediction error by iterating the scalar Riccati recursion
    p <- 1 - rho^2 + rho^2 * p * sigma_z2 / (p + sigma_z2) to its fixed point.

    Independent check of kalman_steady_sigma.
    """
    if not 0.0 < rho < 1.0:
        raise ValidationError("rho must lie strictly inside (0, 1)")
    if sigma_z2 < 0.0:
        raise ValidationError("sigma_z2 must be nonnegative")
    # the map contracts by at most rho^2 per step, so an increment below
    # tol * (1 - rho^2) / rho^2 certifies distance tol from the fixed point
    stop = tol * min(1.0, (1.0 - rho**2) / rho**2)
    p = 1.0
    for _ in range(max_iter):
        gain = 0.0 if p + sigma_z2 == 0.0 else p * sigma_z2 / (p + sigma_z2)
        nxt = 1.0 - rho**2 + rho**2 * gain
        if abs(nxt - p) < stop:
            return nxt
        p = nxt
    raise ConvergenceError("Riccati iteration did not reach its fixed point")


def gamma_single(cfg: GmConfig, tc: TestChannel) -> float:
    """Steady-state decoder MMSE for the single-burst worst case: harmonic sum
    of the fresh observation and the aged pre-burst estimate.  Strictly
    increasing in the test-channel noise."""
    sig = kalman_steady_sigma(cfg.rho, tc.sigma_z2)
    aged = 1.0 - cfg.rho ** (2 * cfg.B) * (1.0 - sig)
    return 1.0 / (1.0 / tc.sigma_z2 + 1.0 / aged)


def _solve_increasing(fn, target: float, what: str) -> float:
    """Root of fn(sigma_z2) = target for fn increasing in sigma_z2, solved by
    bracketed bisection in log space down to RESIDUAL_TOL on the residual."""
    lo, hi = SIGMA_BRACKET
    f_lo, f_hi = fn(lo) - target, fn(hi) - target
    if f_lo > 0.0:
        raise PrecisionError(
            f"{what}: target {target:.3e} below resolution at sigma_z2 = {lo:.0e} "
            f"(residual {f_lo:.3e}); the required noise would underflow"
        )
    if f_hi < 0.0:
        raise InfeasibleDistortionError(
            f"{what}: no root in bracket [{lo:.0e}, {hi:.0e}] (residual at top {f_hi:.3e})"
        )
    root = brentq(lambda y: fn(math.exp(y)) - target, math.log(lo), math.log(hi), xtol=1e-14)
    sigma = math.exp(root)
    residual = abs(fn(sigma) - target)
    if residual > 1e-10:
        raise NumericalError(f"{what}: solver residual {residual:.3e} exceeds 1e-10")
    return sigma


def solve_test_channel_single(cfg: GmConfig) -> TestChannel:
    """Noise variance whose steady-state single-burst MMSE equals D."""
    if cfg.D >= 1.0:
        raise ValidationError("D >= 1 needs no test channel (rate is zero)")
    sigma = _solve_increasing(
        lambda s: gamma_single(cfg, TestChannel(s)), cfg.D, "single-burst test channel"
    )
    if sigma < 1e-15:
        raise PrecisionError(f"solved sigma_z2 = {sigma:.3e} underflows below 1e-15")
    return TestChannel(sigma)


def rate_upper_single(cfg: GmConfig) -> float:
    """Achievable rate for the single-burst channel:
    (1/2) log2((1 - rho^(2B) (1 - Sigma)) / D) at the solved test channel."""
    if cfg.D >= 1.0:
        return 0.0
    tc = solve_test_channel_single(cfg)
    sig = kalman_steady_sigma(cfg.rho, tc.sigma_z2)
    aged = 1.0 - cfg.rho ** (2 * cfg.B) * (1.0 - sig)
    return 0.5 * math.log2(aged / cfg.D)


def eta_multi(cfg: GmConfig, tc: TestChannel) -> float:
    """MMSE of the pre-burst state from the D-noisy older state plus the L-1
    most recent intact observations, via a symmetric positive-definite solve.

    The observation vector pairs correlation rho^|i-j| off the diagonal with
    1 + sigma_z2 on the first L-1 diagonal entries and 1 + D/(1-D) on the
    last.
    """
    if cfg.D >= 1.0:
        raise ValidationError("eta is defined for D < 1")
    L = cfg.L
    lags = np.arange(L)
    a1 = cfg.rho**lags
    a2 = cfg.rho ** np.abs(lags[:, None] - lags[None, :])
    diag = np.full(L, 1.0 + tc.sigma_z2)
    diag[-1] = 1.0 + cfg.D / (1.0 - cfg.D)
    np.fill_diagonal(a2, diag)
    try:
        factor = cho_factor(a2, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD for valid inputs
        raise NumericalError(f"observation Gram matrix not positive definite: {exc}") from exc
    eta = 1.0 - float(a1 @ cho_solve(factor, a1))
    return eta


def _multi_distortion(cfg: GmConfig, sigma_z2: float) -> float:
    eta = eta_multi(cfg, TestChannel(sigma_z2))
    aged = 1.0 - cfg.rho ** (2 * (cfg.B + 1)) * (1.0 - eta)
    return 1.0 / (1.0 / sigma_z2 + 1.0 / aged)


def rate_upper_multi(cfg: GmConfig) -> tuple[float, TestChannel | None]:
    """Achievable rate for repeated bursts (length <= B) separated by guard
    intervals of at least L intact packets.

    Solves D = [1/sigma_z2 + 1/(1 - rho^(2(B+1)) (1 - eta))]^{-1} for the test
    channel (the map is increasing in sigma_z2; spot-checked on each call) and
    returns (1/2) log2((1 - rho^(2(B+1)) (1 - eta)) / D).
    """
    if cfg.D >= 1.0:
        return 0.0, None
    probe = np.exp(np.linspace(math.log(SIGMA_BRACKET[0]), math.log(SIGMA_BRACKET[1]), 9))
    vals = [_multi_distortion(cfg, s) for s in probe]
    if any(b - a < -1e-12 for a, b in zip(vals, vals[1:])):
        raise NumericalError("multi-burst distortion map is not monotone on the bracket")
    sigma = _solve_increasing(
        lambda s: _multi_distortion(cfg, s), cfg.D, "multi-burst test channel"
    )
    tc = TestChannel(sigma)
    eta = eta_multi(cfg, tc)
    aged = 1.0 - cfg.rho ** (2 * (cfg.B + 1)) * (1.0 - eta)
    return 0.5 * math.log2(aged / cfg.D), tc


def high_res_rate(cfg: GmConfig) -> float:
    """Shared small-D asymptote (1/2) log2((1 - rho^(2(B+1))) / D); independent
    of the guard interval, clamped at zero."""
    return max(0.0, 0.5 * math.log2((1.0 - cfg.rho ** (2 * (cfg.B + 1))) / cfg.D))


def _two_point_mmse(rho: float, B: int, sigma_z2: float) -> float:
    """MMSE of s_t from the stale observation u_{t-B-1} and the fresh u_t."""
    r = rho ** (B + 1)
    v = 1.0 + sigma_z2
    return 1.0 - (v * (1.0 + r * r) - 2.0 * r * r) / (v * v - r * r)


def naive_wz_rate(cfg: GmConfig) -> float:
    """Rate of coding against the most recent pre-burst observation only:
    I(s_t; u_t | u_{t-B-1}) with sigma_z2 matched so the two-point MMSE is D."""
    if cfg.D >= 1.0:
        return 0.0
    sigma = _solve_increasing(
        lambda s: _two_point_mmse(cfg.rho, cfg.B, s), cfg.D, "two-point test channel"
    )
    r = cfg.rho ** (cfg.B + 1)
    v = 1.0 + sigma
    var_u_given_old = v - r * r / v
    return 0.5 * math.log2(var_u_given_old / sigma)


def finite_t_lower(cfg: GmConfig, t: int) -> float:
    """Converse bound when decoding at finite time t >= B+1: the smallest
    R >= 0 with R >= phi(R), where the geometric term of phi grows with t.
    Solved by damped fixed-point iteration; non-decreasing in t and converging
    to lower_bound_single as t grows.
    """
    if not (isinstance(t, (int, np.integer)) and t >= cfg.B + 1):
        raise ValidationError("t must be an integer >= B + 1")
    if cfg.D >= 1.0:
        return 0.0

    rho2 = cfg.rho**2
    head = cfg.rho ** (2 * (cfg.B + 1)) * (1.0 - rho2) / cfg.D
    tail = (1.0 - cfg.rho ** (2 * (cfg.B + 1))) / cfg.D
    m = int(t) - cfg.B - 1

    def phi(r: float) -> float:
        x = 2.0 ** (2.0 * r)
        return 0.5 * math.log2(head / (x - rho2) * (1.0 - (rho2 / x) ** m) + tail)

    if phi(0.0) <= 0.0:
        return 0.0
    r = max(phi(0.0), 0.0)
    for _ in range(10**5):
        nxt = 0.5 * (r + max(phi(r), 0.0))
        if abs(nxt - r) < 1e-13:
            return nxt
        r = nxt
    raise ConvergenceError("fixed-point iteration for the finite-horizon bound stalled")


def compute_bounds(cfg: GmConfig, include_multi: bool = True) -> GmBounds:
    """Assemble the full bound chain for one configuration."""
    lower = lower_bound_single(cfg)
    if cfg.D >= 1.0:
        return GmBounds(
            lower=0.0, upper_single=0.0, high_res=high_res_rate(cfg), sigma_z2_single=None,
            upper_multi=0.0 if include_multi else None, sigma_z2_multi=None,
        )
    tc = solve_test_channel_single(cfg)
    upper = rate_upper_single(cfg)
    multi = None
    sigma_multi = None
    if include_multi:
        multi, tc_multi = rate_upper_multi(cfg)
        sigma_multi = tc_multi.sigma_z2 if tc_multi is not None else None
    return GmBounds(
        lower=lower,
        upper_single=upper,
        high_res=high_res_rate(cfg),
        sigma_z2_single=tc.sigma_z2,
        upper_multi=multi,
        sigma_z2_multi=sigma_multi,
    )
