"""Markov chain over thick equilateral polygons.

A step draws a batch of up to N candidate reflections from a fixed noise
space, applies a prefix of them determined by continuation probabilities,
and accepts the result only if the final polygon still meets the thickness
bound.  Intermediate states are never checked; rejected steps leave the
state bit-identical.

The sampler is ergodic toward some invariant measure; it is NOT known (or
claimed) to sample Equ(n, t) uniformly.  All reported statistics are
empirical properties of this chain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IntegrityFailure, TooFewSamples, DegenerateAxis
from .moves import ReflectionMove, apply_reflection
from .polygon import KnotPolygon, regular_polygon, validate_polygon
from .thickness import thickness_value

AUDIT_INTERVAL = 10_000   # accepted moves between integrity audits
EDGE_DRIFT_TOL = 1e-8


@dataclass
class ChainConfig:
    n: int
    t: float
    seed: int
    steps: int
    N: int = 6
    p: tuple = None            # continuation probabilities, length N
    burn_in: int = 0
    stride: int = 1
    start: KnotPolygon = None  # None = regular n-gon

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError("need n >= 3")
        if self.N < 6:
            raise ConfigError("batch cap N must be >= 6")
        if self.p is None:
            self.p = tuple([0.5] * self.N)
        self.p = tuple(float(x) for x in self.p)
        if len(self.p) != self.N:
            raise ConfigError("need one continuation probability per batch slot")
        if any(not (0.0 < x <= 1.0) for x in self.p):
            raise ConfigError("continuation probabilities must lie in (0, 1]")
        if self.steps < 0 or self.burn_in < 0 or self.stride < 1:
            raise ConfigError("steps/burn_in must be >= 0 and stride >= 1")
        if self.t < 0:
            raise ConfigError("thickness bound must be >= 0")
        tmax = thickness_value(regular_polygon(self.n))
        if self.t >= tmax + 1e-12:
            warnings.warn(
                f"thickness bound {self.t} exceeds the regular {self.n}-gon's "
                f"{tmax:.6g}; the state space may be empty", stacklevel=2,
            )


@dataclass(frozen=True)
class NoiseRecord:
    """One rectangle point: x carries the rectangle index in its integer
    part and the continuation variable a in its fractional part."""

    x: float
    theta: float
    pair: tuple

    @property
    def a(self):
        return self.x - np.floor(self.x)


@dataclass(frozen=True)
class NoiseDraw:
    records: tuple  # N NoiseRecords


@dataclass
class StepOutcome:
    accepted: bool
    m: int
    thickness_after: float
    state: KnotPolygon


def _pair_from_rank(r, n):
    """(i, j) with i < j from a flat rank over the n(n-1)/2 pairs."""
    i = 0
    row = n - 1
    while r >= row:
        r -= row
        i += 1
        row -= 1
    return i, i + 1 + r


def draw_noise(cfg: ChainConfig, step: int) -> NoiseDraw:
    """Noise for one step from a counter-based generator: the key is the
    chain seed and the counter is the step index, so any step can be
    regenerated independently.  Slot order within a step is fixed."""
    bits = np.random.Philox(key=cfg.seed, counter=[step, 0, 0, 0])
    gen = np.random.Generator(bits)
    n = cfg.n
    npairs = n * (n - 1) // 2
    ranks = gen.integers(npairs, size=cfg.N)
    avals = gen.random(cfg.N)
    thetas = gen.uniform(0.0, 2.0 * np.pi, size=cfg.N)
    records = []
    for k in range(cfg.N):
        i, j = _pair_from_rank(int(ranks[k]), n)
        x = 2.0 * (n * i + j) + float(avals[k])
        records.append(NoiseRecord(x=x, theta=float(thetas[k]), pair=(i, j)))
    return NoiseDraw(records=tuple(records))


def decode_noise(d: NoiseDraw, p):
    """m = one less than the first k with a_k > p_k (m = N when none stops);
    the first m records become reflection moves."""
    m = len(d.records)
    for k, rec in enumerate(d.records):
        if rec.a > p[k]:
            m = k
            break
    moves = [
        ReflectionMove(rec.pair[0], rec.pair[1], rec.theta)
        for rec in d.records[:m]
    ]
    return m, moves


def chain_step(K: KnotPolygon, d: NoiseDraw, cfg: ChainConfig,
               th_current: float = None) -> StepOutcome:
    """Apply the decoded batch with a single thickness check at the end.

    A degenerate reflection axis (coincident vertices mid-batch) counts as a
    rejection; it has measure zero but singular states make it reachable.

    `th_current`, when given, must equal thickness_value(K); it lets the
    caller skip recomputing the unchanged state's thickness on empty batches
    and rejections.
    """
    m, moves = decode_noise(d, cfg.p)

    def th_K():
        return thickness_value(K) if th_current is None else th_current

    if m == 0:
        return StepOutcome(True, 0, th_K(), K)
    state = K
    try:
        for mv in moves:
            state = apply_reflection(state, mv)
    except DegenerateAxis:
        return StepOutcome(False, m, th_K(), K)
    th = thickness_value(state)
    if th >= cfg.t:
        return StepOutcome(True, m, th, state)
    return StepOutcome(False, m, th_K(), K)


def renormalize(K: KnotPolygon, iters: int = 50) -> KnotPolygon:
    """Project back onto the equilateral closed polygons by alternating
    between unit-edge rescaling and closure-defect distribution."""
    v = np.array(K.vertices)
    n = len(v)
    for _ in range(iters):
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        if np.max(np.abs(lengths - 1.0)) < 1e-13:
            break
        e = e / lengths[:, None]
        defect = e.sum(axis=0)
        e -= defect / n
        w = np.empty_like(v)
        w[0] = v[0]
        w[1:] = v[0] + np.cumsum(e[:-1], axis=0)
        v = w
    return KnotPolygon(v)


class Chain:
    """Sequential sampler with periodic integrity audits."""

    def __init__(self, cfg: ChainConfig):
        self.cfg = cfg
        self.state = cfg.start if cfg.start is not None else regular_polygon(cfg.n)
        if cfg.start is not None:
            validate_polygon(self.state.vertices)
        self.accepted = 0
        self.rejected = 0
        self.m_histogram = np.zeros(cfg.N + 1, dtype=np.int64)
        self.audits = 0
        self._since_audit = 0

    @property
    def acceptance_rate(self):
        total = self.accepted + self.rejected
        return self.accepted / total if total else float("nan")

    def _audit(self):
        self.audits += 1
        K = self.state
        drift = float(np.max(np.abs(K.edge_lengths() - 1.0)))
        R = renormalize(K)
        new_drift = float(np.max(np.abs(R.edge_lengths() - 1.0)))
        if new_drift > EDGE_DRIFT_TOL:
            raise IntegrityFailure(
                f"edge drift {new_drift:g} persists after renormalization"
            )
        if thickness_value(R) >= self.cfg.t - 1e-12:
            self.state = R
            return drift
        # renormalization broke the bound: keep the original state if it is
        # still a valid polygon, otherwise the run is unsalvageable
        try:
            validate_polygon(K.vertices)
        except Exception as exc:
            raise IntegrityFailure(f"state invalid at audit: {exc}") from exc
        if drift > EDGE_DRIFT_TOL:
            raise IntegrityFailure("edge drift beyond tolerance and "
                                   "renormalization violates the bound")
        return drift

    def run(self):
        """Yield (step index, polygon, StepOutcome) for every emitted sample."""
        cfg = self.cfg
        th = thickness_value(self.state)
        for step in range(cfg.steps):
            d = draw_noise(cfg, step)
            out = chain_step(self.state, d, cfg, th)
            self.m_histogram[out.m] += 1
            if out.accepted:
                self.accepted += 1
                self.state = out.state
                th = out.thickness_after
                self._since_audit += 1
                if self._since_audit >= AUDIT_INTERVAL:
                    self._since_audit = 0
                    self._audit()
                    out.state = self.state
                    th = thickness_value(self.state)
            else:
                self.rejected += 1
            if step >= cfg.burn_in and (step - cfg.burn_in) % cfg.stride == 0:
                yield step, self.state, out


def run_chain(cfg: ChainConfig):
    """Convenience generator over a fresh Chain."""
    yield from Chain(cfg).run()


def diagnostics(samples, observable=None):
    """(mean, batch-means standard error, integrated autocorrelation time).

    Both estimators are heuristics: batch means with ~sqrt(N) batches, and
    Geyer's initial-positive-sequence truncation of the FFT autocorrelation.
    """
    if observable is not None:
        xs = np.array([observable(s) for s in samples], dtype=float)
    else:
        xs = np.asarray(list(samples), dtype=float)
    N = len(xs)
    if N < 100:
        raise TooFewSamples(f"need at least 100 samples, got {N}")
    mean = float(np.mean(xs))

    nb = int(np.floor(np.sqrt(N)))
    bs = N // nb
    bm = xs[: nb * bs].reshape(nb, bs).mean(axis=1)
    se = float(np.std(bm, ddof=1) / np.sqrt(nb))

    c = xs - mean
    var = float(np.dot(c, c) / N)
    if var <= 0.0:
        return mean, 0.0, 1.0
    nfft = 1 << int(np.ceil(np.log2(2 * N)))
    f = np.fft.rfft(c, nfft)
    acf = np.fft.irfft(f * np.conj(f), nfft)[:N].real
    rho = acf / acf[0]
    # initial positive sequence: sum consecutive pairs while positive
    iat = 1.0
    k = 1
    while k + 1 < N:
        g = rho[k] + rho[k + 1]
        if g <= 0.0:
            break
        iat += 2.0 * g
        k += 2
    return mean, se, float(iat)
