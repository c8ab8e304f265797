"""Brute-force Gaussian conditioning over arbitrary erasure patterns.

Builds the exact joint covariance of (s_{-1}, s_0..s_t, u_0..u_t) for the
Gauss-Markov source observed through the additive test channel, and answers
any conditional-variance query by Schur complement.  On top of that sit the
worst-case-erasure checks: every claimed inequality about which erasure
pattern is hardest is restated as a variance inequality (for jointly Gaussian
variables, differential-entropy ordering is variance ordering) and verified
by exhaustive enumeration at small horizons.

Reports are plain dataclasses serializable to JSON: pass/fail, instance
counts, the minimum slack observed, and the worst instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError, ValidationError

RIDGE = 1e-12
PSD_TOL = 1e-10
SLACK_TOL = 1e-12
DENSE_T_CAP = 30
ENUM_T_CAP = 22

VarId = tuple[str, int]


def _runs(indices: tuple[int, ...]) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers as (start, length) pairs."""
    runs = []
    for i in sorted(indices):
        if runs and i == runs[-1][0] + runs[-1][1]:
            runs[-1] = (runs[-1][0], runs[-1][1] + 1)
        else:
            runs.append((i, 1))
    return runs


@dataclass(frozen=True)
class ErasurePattern:
    """Non-erased packet indices up to (not including) the decoding time t.

    Index t itself is never erased: decoding happens when the time-t packet
    arrives.
    """

    t: int
    received: tuple[int, ...]
    kind: str = "arbitrary"

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError("decoding time must be nonnegative")
        rec = tuple(sorted(set(int(i) for i in self.received)))
        if rec and (rec[0] < 0 or rec[-1] >= self.t):
            raise ValidationError("received indices must lie in [0, t)")
        object.__setattr__(self, "received", rec)

    @property
    def erased(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.t) if i not in set(self.received))

    @classmethod
    def no_erasure(cls, t: int) -> "ErasurePattern":
        return cls(t=t, received=tuple(range(t)), kind="arbitrary")

    @classmethod
    def single_burst(cls, t: int, burst_len: int, offset: int, max_burst: int | None = None) -> "ErasurePattern":
        """Burst of burst_len erased packets ending offset slots before t,
        i.e. erasing [t - burst_len - offset, t - offset - 1]."""
        if burst_len < 0 or offset < 0 or offset > t - burst_len:
            raise ValidationError(f"burst (len={burst_len}, offset={offset}) does not fit before t={t}")
        if max_burst is not None and burst_len > max_burst:
            raise ValidationError(f"burst length {burst_len} exceeds cap {max_burst}")
        gone = set(range(t - burst_len - offset, t - offset))
        return cls(t=t, received=tuple(i for i in range(t) if i not in gone), kind="single-burst")

    @classmethod
    def multi_burst(cls, t: int, received: tuple[int, ...], B: int, L: int) -> "ErasurePattern":
        """Validate that erased runs have length <= B and consecutive runs are
        separated by at least L intact slots."""
        pat = cls(t=t, received=tuple(received), kind="multi-burst")
        runs = _runs(pat.erased)
        for start, length in runs:
            if length > B:
                raise ValidationError(f"erased run at {start} has length {length} > B={B}")
        for (s1, l1), (s2, _) in zip(runs, runs[1:]):
            if s2 - (s1 + l1) < L:
                raise ValidationError(f"guard between runs at {s1} and {s2} is shorter than L={L}")
        return pat


def worst_multi_burst(t: int, B: int, L: int) -> ErasurePattern:
    """Guard-respecting pattern packing bursts of length B toward time t;
    the earliest burst is truncated if fewer than B slots remain."""
    erased: set[int] = set()
    i = t - 1
    while i >= 0:
        lo = max(0, i - B + 1)
        erased.update(range(lo, i + 1))
        i = lo - 1 - L
    received = tuple(j for j in range(t) if j not in erased)
    return ErasurePattern.multi_burst(t, received, B, L)


def enumerate_multi_burst(t: int, B: int, L: int) -> list[ErasurePattern]:
    """Every feasible pattern of erased runs (length <= B, gaps >= L) in [0, t)."""
    if t > ENUM_T_CAP:
        raise ValidationError(f"enumeration horizon capped at t <= {ENUM_T_CAP}")
    layouts: list[tuple[int, ...]] = []

    def extend(next_free: int, erased: tuple[int, ...]) -> None:
        layouts.append(erased)
        for start in range(next_free, t):
            for length in range(1, min(B, t - start) + 1):
                run = tuple(range(start, start + length))
                extend(start + length + L, erased + run)

    extend(0, ())
    out = []
    for erased in layouts:
        received = tuple(i for i in range(t) if i not in set(erased))
        out.append(ErasurePattern.multi_burst(t, received, B, L))
    return out


@dataclass(frozen=True)
class GaussianSystem:
    """Joint covariance of (s_{-1}, s_0..s_t, u_0..u_t) with u_i = s_i + z_i.

    Cov(s_i, s_j) = rho^|i-j|, Cov(u_i, u_j) adds sigma_z2 on the diagonal,
    and Cov(s_i, u_j) = rho^|i-j|.
    """

    rho: float
    sigma_z2: float
    t: int

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValidationError("rho must lie strictly inside (0, 1)")
        if self.sigma_z2 < 0.0:
            raise ValidationError("sigma_z2 must be nonnegative")
        if self.t < 0:
            raise ValidationError("horizon t must be nonnegative")
        times = np.concatenate([np.arange(-1, self.t + 1), np.arange(0, self.t + 1)])
        cov = self.rho ** np.abs(times[:, None] - times[None, :])
        n_s = self.t + 2
        u_diag = np.arange(n_s, n_s + self.t + 1)
        cov[u_diag, u_diag] += self.sigma_z2
        cov.setflags(write=False)
        object.__setattr__(self, "_cov", cov)
        object.__setattr__(self, "_n_s", n_s)

    @property
    def covariance(self) -> np.ndarray:
        return self._cov

    def index(self, var: VarId) -> int:
        name, i = var
        if name == "s":
            if not -1 <= i <= self.t:
                raise ValidationError(f"s index {i} outside [-1, {self.t}]")
            return i + 1
        if name == "u":
            if not 0 <= i <= self.t:
                raise ValidationError(f"u index {i} outside [0, {self.t}]")
            return self._n_s + i
        raise ValidationError(f"unknown variable kind {name!r}")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self._cov)[0])


def conditional_variance(sys: GaussianSystem, target: VarId, given) -> float:
    """Var(target | given) by Schur complement with a Cholesky solve.

    Retries once with a small diagonal ridge when the conditioning block is
    numerically singular (test channels with near-zero noise), and raises
    NumericalError with a condition-number diagnostic if that also fails.
    """
    ti = sys.index(target)
    gi = [sys.index(v) for v in given]
    if ti in gi:
        raise ValidationError("conditioning set must not contain the target")
    cov = sys.covariance
    prior = float(cov[ti, ti])
    if not gi:
        return prior
    cross = cov[np.ix_([ti], gi)][0]
    block = cov[np.ix_(gi, gi)]
    for ridge in (0.0, RIDGE):
        try:
            factor = cho_factor(block + ridge * np.eye(len(gi)), lower=True)
            value = prior - float(cross @ cho_solve(factor, cross))
            return max(value, 0.0)
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"conditioning block singular beyond ridge {RIDGE:.0e}; "
        f"condition number {np.linalg.cond(block):.3e}"
    )


def decode_rate(sys: GaussianSystem, pattern: ErasurePattern) -> float:
    """Bits needed to recover the time-t packet given the received history:
    (1/2) log2(Var(u_t | u_received, s_{-1}) / sigma_z2)."""
    if pattern.t != sys.t:
        raise ValidationError("pattern and system horizons disagree")
    if sys.sigma_z2 <= 0.0:
        raise ValidationError("decode_rate needs a strictly positive test-channel noise")
    given = [("u", i) for i in pattern.received] + [("s", -1)]
    var = conditional_variance(sys, ("u", sys.t), given)
    return 0.5 * float(np.log2(var / sys.sigma_z2))


def decode_mmse(sys: GaussianSystem, pattern: ErasurePattern) -> float:
    """Reconstruction error Var(s_t | u_received, u_t, s_{-1})."""
    if pattern.t != sys.t:
        raise ValidationError("pattern and system horizons disagree")
    given = [("u", i) for i in pattern.received] + [("u", sys.t), ("s", -1)]
    return conditional_variance(sys, ("s", sys.t), given)


@dataclass
class VerificationReport:
    """Outcome of one exhaustive inequality check."""

    name: str
    passed: bool
    checks: int
    violations: int
    min_slack: float
    worst: dict | None
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "worst": self.worst,
            "notes": self.notes,
            "details": self.details,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


class _SlackTracker:
    def __init__(self):
        self.checks = 0
        self.violations = 0
        self.min_slack = np.inf
        self.worst = None

    def add(self, slack: float, instance: dict) -> None:
        self.checks += 1
        if slack < -SLACK_TOL:
            self.violations += 1
        if slack < self.min_slack:
            self.min_slack = float(slack)
            self.worst = instance

    def report(self, name: str, notes=None, details=None) -> VerificationReport:
        return VerificationReport(
            name=name,
            passed=self.violations == 0,
            checks=self.checks,
            violations=self.violations,
            min_slack=float(self.min_slack) if self.checks else 0.0,
            worst=self.worst,
            notes=list(notes or []),
            details=dict(details or {}),
        )


def verify_single_burst_worst_case(
    rho: float, sigma_z2: float, B: int, t_max: int
) -> VerificationReport:
    """Exhaustively check, for all t <= t_max, that the hardest single burst is
    the longest one ending right before the decoding time, and that its rate
    and distortion requirements grow with t.

    Four families of inequalities, for both the rate and distortion sides:
      1. moving the burst closer to t never helps (offset 0 is worst);
      2. longer bursts are worse (length B is worst);
      3. requirements at offset 0 / length B are non-decreasing in t >= B;
      4. everything before time B is dominated by decoding at t = B.
    Degenerate identity instances (no erased packet) are skipped so the
    minimum slack reflects strict comparisons.
    """
    if t_max > DENSE_T_CAP:
        raise ValidationError(f"t_max capped at {DENSE_T_CAP}")
    if t_max < B + 1:
        raise ValidationError("t_max must be at least B + 1")

    systems = {t: GaussianSystem(rho, sigma_z2, t) for t in range(t_max + 2)}

    def pair(t: int, burst_len: int, offset: int) -> tuple[float, float]:
        pat = ErasurePattern.single_burst(t, burst_len, offset)
        sys = systems[t]
        return decode_rate(sys, pat), decode_mmse(sys, pat)

    track = _SlackTracker()
    notes: list[str] = []

    for t in range(t_max + 1):
        for bl in range(1, min(B, t) + 1):
            base = pair(t, bl, 0)
            for k in range(1, t - bl + 1):
                moved = pair(t, bl, k)
                track.add(base[0] - moved[0], {"property": 1, "side": "rate", "t": t, "len": bl, "offset": k})
                track.add(base[1] - moved[1], {"property": 1, "side": "mmse", "t": t, "len": bl, "offset": k})
    for t in range(B, t_max + 1):
        full = pair(t, B, 0)
        for bl in range(0, B):
            short = pair(t, bl, 0)
            track.add(full[0] - short[0], {"property": 2, "side": "rate", "t": t, "len": bl})
            track.add(full[1] - short[1], {"property": 2, "side": "mmse", "t": t, "len": bl})
    for t in range(B, t_max):
        now, nxt = pair(t, B, 0), pair(t + 1, B, 0)
        track.add(nxt[0] - now[0], {"property": 3, "side": "rate", "t": t})
        track.add(nxt[1] - now[1], {"property": 3, "side": "mmse", "t": t})

    anchor = pair(B, B, 0)
    prop4 = 0
    for t in range(0, min(B, t_max + 1)):
        for bl in range(1, t + 1):
            for k in range(0, t - bl + 1):
                small = pair(t, bl, k)
                track.add(anchor[0] - small[0], {"property": 4, "side": "rate", "t": t, "len": bl, "offset": k})
                track.add(anchor[1] - small[1], {"property": 4, "side": "mmse", "t": t, "len": bl, "offset": k})
                prop4 += 2
    if prop4 == 0:
        notes.append("property 4 has no nontrivial instances (t < B forces an empty burst when B <= 1)")

    # before time B the trend in t is reported but not asserted
    below_steady = [
        {"t": t, "rate": pair(t, min(B, t), 0)[0], "mmse": pair(t, min(B, t), 0)[1]}
        for t in range(0, min(B, t_max + 1))
    ]
    return track.report(
        "single-burst-worst-case",
        notes=notes,
        details={
            "rho": rho,
            "sigma_z2": sigma_z2,
            "B": B,
            "t_max": t_max,
            "property4_instances": prop4,
            "below_steady": below_steady,
        },
    )


def verify_multi_burst_worst_case(
    rho: float, sigma_z2: float, B: int, L: int, t_max: int
) -> VerificationReport:
    """Enumerate every guard-respecting erasure pattern up to t_max and check
    that the pattern packing maximal bursts toward the decoding time maximizes
    both the rate and the distortion requirement, and that those worst-case
    requirements are non-decreasing in t."""
    if t_max > ENUM_T_CAP:
        raise ValidationError(f"t_max capped at {ENUM_T_CAP}")
    track = _SlackTracker()
    details: dict = {"rho": rho, "sigma_z2": sigma_z2, "B": B, "L": L, "t_max": t_max}
    prev_star: tuple[float, float] | None = None

    for t in range(1, t_max + 1):
        sys = GaussianSystem(rho, sigma_z2, t)
        star = worst_multi_burst(t, B, L)
        star_rate = decode_rate(sys, star)
        star_mmse = decode_mmse(sys, star)
        best_rate, best_rate_pat = -np.inf, None
        best_mmse, best_mmse_pat = -np.inf, None
        n_pat = 0
        for pat in enumerate_multi_burst(t, B, L):
            n_pat += 1
            r = decode_rate(sys, pat)
            g = decode_mmse(sys, pat)
            if r > best_rate:
                best_rate, best_rate_pat = r, pat
            if g > best_mmse:
                best_mmse, best_mmse_pat = g, pat
            if pat.received != star.received:
                track.add(star_rate - r, {"side": "rate", "t": t, "received": list(pat.received)})
                track.add(star_mmse - g, {"side": "mmse", "t": t, "received": list(pat.received)})
        if prev_star is not None:
            track.add(star_rate - prev_star[0], {"side": "rate-monotone", "t": t})
            track.add(star_mmse - prev_star[1], {"side": "mmse-monotone", "t": t})
        prev_star = (star_rate, star_mmse)
        details[f"t{t}"] = {
            "patterns": n_pat,
            "star_received": list(star.received),
            "argmax_rate_received": list(best_rate_pat.received),
            "argmax_mmse_received": list(best_mmse_pat.received),
        }

    return track.report("multi-burst-worst-case", details=details)


def verify_exchange_inequalities(
    rho: float,
    sigma_z2: float,
    t: int = 20,
    samples: int = 500,
    seed: int = 0,
    max_set_size: int = 6,
) -> VerificationReport:
    """Check the two observation-exchange facts behind the worst-case proofs,
    as variance inequalities.

    Replacement: swapping the oldest erased-adjacent observation for the
    newest one (keeping everything else) never hurts the estimate of either
    the current source or the current channel output, over a grid of
    (t, burst length, offset).

    Domination: for index sets A, B with a_i <= b_i entrywise, conditioning on
    the later set B is at least as informative; sampled over random dominating
    pairs with |A| = |B| <= max_set_size.
    """
    if t > DENSE_T_CAP:
        raise ValidationError(f"t capped at {DENSE_T_CAP}")
    if t < max_set_size + 2:
        raise ValidationError("horizon too small for the requested set size")
    track = _SlackTracker()
    rng = np.random.default_rng(seed)

    for tt in sorted({max(4, t // 3), max(6, (2 * t) // 3), t}):
        sys = GaussianSystem(rho, sigma_z2, tt)
        for bl in range(1, min(3, tt) + 1):
            for k in range(1, tt - bl + 1):
                old = [("u", i) for i in range(0, tt - bl - k)] + [("u", i) for i in range(tt - k, tt)]
                new = [("u", i) for i in range(0, tt - bl - k + 1)] + [("u", i) for i in range(tt - k + 1, tt)]
                v_old = conditional_variance(sys, ("u", tt), old + [("s", -1)])
                v_new = conditional_variance(sys, ("u", tt), new + [("s", -1)])
                track.add(v_new - v_old, {"kind": "replace-u", "t": tt, "len": bl, "offset": k})
                v_old_s = conditional_variance(sys, ("s", tt), old + [("u", tt), ("s", -1)])
                v_new_s = conditional_variance(sys, ("s", tt), new + [("u", tt), ("s", -1)])
                track.add(v_new_s - v_old_s, {"kind": "replace-s", "t": tt, "len": bl, "offset": k})

    sys = GaussianSystem(rho, sigma_z2, t)
    for _ in range(samples):
        r = int(rng.integers(1, max_set_size + 1))
        later = np.sort(rng.choice(np.arange(1, t), size=r, replace=False))
        earlier = []
        prev = 0
        for i in range(r):
            lo = prev + 1
            hi = int(later[i])
            pick = int(rng.integers(lo, hi + 1))
            earlier.append(pick)
            prev = pick
        a_set = [("u", i) for i in earlier] + [("s", -1)]
        b_set = [("u", int(i)) for i in later] + [("s", -1)]
        v_a = conditional_variance(sys, ("s", t), a_set)
        v_b = conditional_variance(sys, ("s", t), b_set)
        track.add(v_a - v_b, {"kind": "dominate-s", "A": earlier, "B": [int(x) for x in later]})
        u_a = conditional_variance(sys, ("u", t), a_set)
        u_b = conditional_variance(sys, ("u", t), b_set)
        track.add(u_a - u_b, {"kind": "dominate-u", "A": earlier, "B": [int(x) for x in later]})

    return track.report(
        "exchange-inequalities",
        details={"rho": rho, "sigma_z2": sigma_z2, "t": t, "samples": samples, "seed": seed},
    )
