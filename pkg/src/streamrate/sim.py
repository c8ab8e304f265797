"""Monte-Carlo validation of the analytic bounds.

Two experiments:

* Gauss-Markov streaming through the additive test channel with an erasure
  schedule.  The decoder is the exact conditional-mean filter (Kalman
  recursion that skips erased measurements), so the per-time exact MMSE trace
  accompanies the empirical one.

* Toy lossless binning for the binary symmetric Markov source.  All 2^n
  length-n blocks are partitioned into near-equal bins by a seeded random
  permutation; the decoder picks the most likely bin member given the true
  previous block.

Reproducibility contract: every random draw comes from a single
``numpy.random.Philox`` counter-based stream keyed by the config seed.  For
the stream simulator the draw order is: the length-``trials`` vector of
pre-stream states, then for each time step the innovation vector followed by
the observation-noise vector (each of length ``trials``), so trial k always
reads lane k of each draw.  For the binning experiment the order is: the bin
permutation of all 2^n blocks, the side-information blocks, then the
per-trial flip bits.  Same seed and config give bit-identical results; ties
in the bin decoder break toward the earliest member in permutation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HORIZON_CAP = 10**4
BLOCK_CAP = 16


def _philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass(frozen=True)
class SimConfig:
    """Streaming experiment: source/channel parameters plus erased bursts
    given as (start, length) pairs."""

    rho: float
    sigma_z2: float
    horizon: int
    trials: int
    seed: int
    bursts: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValidationError("rho must lie strictly inside (0, 1)")
        if self.sigma_z2 <= 0.0:
            raise ValidationError("sigma_z2 must be positive")
        if not 1 <= self.horizon <= HORIZON_CAP:
            raise ValidationError(f"horizon must lie in [1, {HORIZON_CAP}]")
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        spans = []
        for start, length in self.bursts:
            if length < 0 or start < 0 or start + length > self.horizon:
                raise ValidationError(f"burst ({start}, {length}) outside the horizon")
            spans.append((start, start + length))
        for (a0, a1), (b0, b1) in zip(sorted(spans), sorted(spans)[1:]):
            if b0 < a1:
                raise ValidationError("bursts must not overlap")

    def erased_mask(self) -> np.ndarray:
        mask = np.zeros(self.horizon, dtype=bool)
        for start, length in self.bursts:
            mask[start : start + length] = True
        return mask


@dataclass(frozen=True)
class StreamResult:
    """Per-time empirical mean-square error with its standard error, next to
    the exact filter MMSE for the same erasure schedule."""

    times: np.ndarray
    mse: np.ndarray
    stderr: np.ndarray
    exact_mmse: np.ndarray
    erased: np.ndarray

    def rows(self):
        for t in range(len(self.times)):
            yield (
                int(self.times[t]),
                float(self.mse[t]),
                float(self.stderr[t]),
                float(self.exact_mmse[t]),
                bool(self.erased[t]),
            )


def simulate_gm_stream(cfg: SimConfig) -> StreamResult:
    """Stream the source through the test channel and decode with the exact
    conditional-mean filter, skipping erased measurements."""
    rng = _philox(cfg.seed)
    n, T = cfg.trials, cfg.horizon
    erased = cfg.erased_mask()
    innov_std = math.sqrt(1.0 - cfg.rho**2)
    z_std = math.sqrt(cfg.sigma_z2)

    s = rng.standard_normal(n)  # pre-stream state, known to the decoder
    mean = cfg.rho * s
    var = 1.0 - cfg.rho**2

    mse = np.empty(T)
    stderr = np.empty(T)
    exact = np.empty(T)
    for t in range(T):
        if t > 0:
            mean = cfg.rho * mean
            var = cfg.rho**2 * var + (1.0 - cfg.rho**2)
        s = cfg.rho * s + innov_std * rng.standard_normal(n)
        u = s + z_std * rng.standard_normal(n)
        if not erased[t]:
            gain = var / (var + cfg.sigma_z2)
            mean = mean + gain * (u - mean)
            var = (1.0 - gain) * var
        sq = (s - mean) ** 2
        mse[t] = sq.mean()
        stderr[t] = sq.std(ddof=1) / math.sqrt(n) if n > 1 else 0.0
        exact[t] = var
    return StreamResult(
        times=np.arange(T), mse=mse, stderr=stderr, exact_mmse=exact, erased=erased
    )


@dataclass(frozen=True)
class BurstSweepReport:
    """Empirical and exact MMSE at a fixed decode time as one burst slides
    away from it; the hardest position is offset zero."""

    offsets: tuple[int, ...]
    empirical: tuple[float, ...]
    stderr: tuple[float, ...]
    exact: tuple[float, ...]
    decode_time: int
    exact_nonincreasing: bool
    empirical_tracks_exact: bool

    @property
    def passed(self) -> bool:
        return self.exact_nonincreasing and self.empirical_tracks_exact


def sweep_burst_position(
    cfg: SimConfig, B: int, decode_time: int | None = None, offsets=None
) -> BurstSweepReport:
    """Re-run the stream with a length-B burst ending offset slots before the
    decode time, for each offset."""
    t = cfg.horizon - 1 if decode_time is None else decode_time
    if not B >= 1:
        raise ValidationError("burst length must be at least 1")
    if not 0 <= t < cfg.horizon:
        raise ValidationError("decode time outside the horizon")
    if offsets is None:
        offsets = tuple(range(0, min(10, t - B) + 1))
    offsets = tuple(int(k) for k in offsets)
    if any(k < 0 or k > t - B for k in offsets):
        raise ValidationError("offsets must satisfy 0 <= k <= decode_time - B")

    emp, err, exact = [], [], []
    for k in offsets:
        run = SimConfig(
            rho=cfg.rho,
            sigma_z2=cfg.sigma_z2,
            horizon=cfg.horizon,
            trials=cfg.trials,
            seed=cfg.seed,
            bursts=((t - B - k, B),),
        )
        res = simulate_gm_stream(run)
        emp.append(float(res.mse[t]))
        err.append(float(res.stderr[t]))
        exact.append(float(res.exact_mmse[t]))
    noninc = all(b <= a + 1e-12 for a, b in zip(exact, exact[1:]))
    tracks = all(abs(e - x) <= 3.0 * s for e, s, x in zip(emp, err, exact))
    return BurstSweepReport(
        offsets=offsets,
        empirical=tuple(emp),
        stderr=tuple(err),
        exact=tuple(exact),
        decode_time=t,
        exact_nonincreasing=noninc,
        empirical_tracks_exact=tracks,
    )


@dataclass(frozen=True)
class BinningConfig:
    """Toy binning experiment: block length n <= 16, flip probability q,
    rate in bits per symbol (bin count round(2^(n*rate)))."""

    n: int
    q: float
    rate: float
    trials: int
    seed: int

    def __post_init__(self):
        if not 1 <= self.n <= BLOCK_CAP:
            raise ValidationError(f"block length must lie in [1, {BLOCK_CAP}]")
        if not 0.0 < self.q < 1.0:
            raise ValidationError("flip probability must lie in (0, 1)")
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        if self.bin_count < 1:
            raise ValidationError("rate yields fewer than one bin")

    @property
    def bin_count(self) -> int:
        return int(round(2.0 ** (self.n * self.rate)))


@dataclass(frozen=True)
class BinningResult:
    """Block error estimate with a normal-approximation binomial interval."""

    errors: int
    trials: int
    p_hat: float
    stderr: float
    ci_low: float
    ci_high: float


def simulate_binning(cfg: BinningConfig) -> BinningResult:
    """Estimate the block error probability of bin-index coding with the true
    previous block as side information and exhaustive in-bin decoding."""
    rng = _philox(cfg.seed)
    size = 1 << cfg.n
    nb = cfg.bin_count

    perm = rng.permutation(size)
    # balanced partition: position p in the permutation goes to bin p mod nb
    width = -(-size // nb)
    members = np.empty((nb, width), dtype=np.int64)
    for b in range(nb):
        chunk = perm[b::nb]
        members[b, : len(chunk)] = chunk
        members[b, len(chunk) :] = chunk[0] if len(chunk) else 0
    bin_of = np.empty(size, dtype=np.int64)
    bin_of[perm] = np.arange(size) % nb

    popcount = np.zeros(size, dtype=np.uint8)
    for bit in range(cfg.n):
        popcount += (np.arange(size) >> bit).astype(np.uint8) & 1

    prev = rng.integers(0, size, size=cfg.trials)
    flip_bits = rng.random((cfg.trials, cfg.n)) < cfg.q
    flips = flip_bits @ (1 << np.arange(cfg.n))
    sent = prev ^ flips

    cand = members[bin_of[sent]]  # (trials, width)
    dist = popcount[cand ^ prev[:, None]].astype(np.int16)
    if cfg.q > 0.5:
        dist = -dist
    decoded = cand[np.arange(cfg.trials), np.argmin(dist, axis=1)]
    errors = int(np.count_nonzero(decoded != sent))

    p = errors / cfg.trials
    se = math.sqrt(max(p * (1.0 - p), 0.0) / cfg.trials)
    z = 1.959963984540054  # 95% normal quantile
    return BinningResult(
        errors=errors,
        trials=cfg.trials,
        p_hat=p,
        stderr=se,
        ci_low=max(0.0, p - z * se),
        ci_high=min(1.0, p + z * se),
    )
