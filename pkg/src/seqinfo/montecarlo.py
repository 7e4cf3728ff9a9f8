"""Seeded Monte Carlo verification of the analytic branch quantities.

Reproducibility contract
------------------------
Replication r always draws from counter-based stream r of a Philox4x64-10
generator keyed by (seed, r), regardless of how many replications run, in
what order, or how work is chunked. Each replication owns a fixed slot
layout: n1 stage-1 draws, then one uniform coin slot if the rule flips a
coin, then max-n2 stage-2 draws, of which a continuation branch consumes its
own n2 and a stop branch consumes none. Raw 64-bit words come from counter
blocks 0, 1, ... within the stream; word w of block b is output word w of the
Philox state for counter (b, 0, 0, 0). Uniforms keep the top 53 bits,
u = ((raw >> 11) + 0.5) * 2^-53, and normals are Phi^{-1}(u).

Results are identical for any worker count: replications are processed in
fixed-size blocks, each block reduces to partial sums, and the partial sums
are combined with exact (fsum) addition in replication order.

Per decision branch the simulation reports the empirical probability, the
empirical bias and mean squared error of the estimator with sample-moment
standard errors, and a histogram on deterministic edges (analytic branch
mean +/- 6 analytic branch sds, plus two overflow cells). Empirical bias and
MSE are compared with the analytic branch bias and MSE bound: for the
default pooled-mean MLE the bound is attained exactly, so both comparisons
are equalities and a |z| > 3 discrepancy raises a flag.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri as _ndtri

from .bounds import mse_bound_report
from .density import continue_mle_interval_mass, stop_mle_interval_mass
from .design import CoinFlipRule, TwoStageDesign, is_stop_decision, max_stage2_n, stage2_n
from .errors import MismatchedInputs

__all__ = [
    "SimConfig",
    "DecisionSimStats",
    "SimResult",
    "SimDump",
    "EstimatorFn",
    "simulate",
    "raw_words",
    "stream_uniforms",
    "stream_normals",
    "pooled_mle",
    "chi_square_gof",
    "expected_histogram_masses",
]

_PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
_PHILOX_M1 = np.uint64(0xCA5A826395121157)
_WEYL_0 = 0x9E3779B97F4A7C15
_WEYL_1 = 0xBB67AE8584CAA73B
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = (1 << 64) - 1
_SHIFT32 = np.uint64(32)
_SHIFT11 = np.uint64(11)
_U53 = 2.0**-53

_BLOCK_REPS = 1 << 16
_HIST_SDS = 6.0
_FLAG_Z = 3.0

EstimatorFn = Callable[
    [TwoStageDesign, np.ndarray, np.ndarray, np.ndarray], np.ndarray
]


def _mulhilo(mult: np.uint64, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full 128-bit product of a constant and a uint64 array, as (hi, lo)."""
    lo = mult * x  # wraps mod 2^64, which is exactly the low word
    a1 = mult >> _SHIFT32
    a0 = mult & _MASK32
    x1 = x >> _SHIFT32
    x0 = x & _MASK32
    t = a0 * x0
    mid1 = a1 * x0 + (t >> _SHIFT32)
    mid2 = a0 * x1 + (mid1 & _MASK32)
    hi = a1 * x1 + (mid1 >> _SHIFT32) + (mid2 >> _SHIFT32)
    return hi, lo


def raw_words(seed: int, streams: np.ndarray, blocks_per_stream: int) -> np.ndarray:
    """Philox4x64-10 output, shape (len(streams), 4 * blocks_per_stream).

    Stream s is keyed by (seed, s); its words come from counter blocks
    0..blocks_per_stream-1 in order, four words per block.
    """
    _check_seed(seed)
    streams = np.asarray(streams, dtype=np.uint64)
    n = streams.size
    # Counter value b+1 yields block b: the counter increments before each
    # block is generated, matching the reference stream semantics exactly.
    x0 = np.tile(np.arange(1, blocks_per_stream + 1, dtype=np.uint64), n)
    zeros = np.zeros(n * blocks_per_stream, dtype=np.uint64)
    x1, x2, x3 = zeros, zeros, zeros
    k1 = np.repeat(streams, blocks_per_stream)
    k0_int = seed
    w1_int = 0
    for rnd in range(10):
        if rnd:
            k0_int = (k0_int + _WEYL_0) & _MASK64
            w1_int = (w1_int + _WEYL_1) & _MASK64
        k0 = np.uint64(k0_int)
        hi0, lo0 = _mulhilo(_PHILOX_M0, x0)
        hi1, lo1 = _mulhilo(_PHILOX_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ (k1 + np.uint64(w1_int)), lo0
    out = np.empty((n * blocks_per_stream, 4), dtype=np.uint64)
    out[:, 0] = x0
    out[:, 1] = x1
    out[:, 2] = x2
    out[:, 3] = x3
    return out.reshape(n, 4 * blocks_per_stream)


def stream_uniforms(seed: int, streams: np.ndarray, count: int) -> np.ndarray:
    """count open-interval uniforms per stream, shape (len(streams), count)."""
    blocks = max(1, -(-count // 4))
    words = raw_words(seed, streams, blocks)[:, :count]
    return ((words >> _SHIFT11).astype(np.float64) + 0.5) * _U53


def stream_normals(seed: int, streams: np.ndarray, count: int) -> np.ndarray:
    """count standard normals per stream via the inverse normal CDF."""
    return _ndtri(stream_uniforms(seed, streams, count))


def _check_seed(seed: int) -> None:
    if not (isinstance(seed, int) and 0 <= seed < (1 << 64)):
        raise ValueError(f"seed must be an integer in [0, 2^64), got {seed!r}")


@dataclass(frozen=True)
class _SlotLayout:
    n1: int
    has_coin: bool
    max_n2: int

    @property
    def slots(self) -> int:
        return self.n1 + int(self.has_coin) + self.max_n2

    @property
    def blocks_per_rep(self) -> int:
        return max(1, -(-self.slots // 4))

    @property
    def stage2_base(self) -> int:
        return self.n1 + int(self.has_coin)


def _layout(design: TwoStageDesign) -> _SlotLayout:
    return _SlotLayout(
        n1=design.n1,
        has_coin=isinstance(design.rule, CoinFlipRule),
        max_n2=max_stage2_n(design),
    )


def pooled_mle(
    design: TwoStageDesign,
    decisions: np.ndarray,
    stage1_means: np.ndarray,
    stage2_means: np.ndarray,
) -> np.ndarray:
    """Default estimator: mean of all collected observations, per replication.

    stage2_means holds NaN on stopped replications; those estimates are the
    stage-1 mean alone.
    """
    est = stage1_means.copy()
    n1 = design.n1
    for d in design.decision_indices():
        n2 = stage2_n(design, d)
        if n2 == 0:
            continue
        mask = decisions == d
        est[mask] = (n1 * stage1_means[mask] + n2 * stage2_means[mask]) / (n1 + n2)
    return est


@dataclass(frozen=True)
class SimConfig:
    """Inputs of one simulation run."""

    design: TwoStageDesign
    theta: float
    reps: int
    seed: int
    bins: int = 40
    workers: int = 1
    estimator: EstimatorFn | None = None
    dump: bool = False

    def __post_init__(self) -> None:
        if not (isinstance(self.reps, int) and self.reps >= 1):
            raise ValueError(f"reps must be an integer >= 1, got {self.reps!r}")
        _check_seed(self.seed)
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        if not (isinstance(self.bins, int) and self.bins >= 1):
            raise ValueError(f"bins must be an integer >= 1, got {self.bins!r}")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ValueError(f"workers must be an integer >= 1, got {self.workers!r}")


@dataclass(frozen=True)
class DecisionSimStats:
    """Empirical versus analytic summary for one decision branch."""

    d: int
    stop: bool
    n_total: int
    count: int
    probability_hat: float
    probability_se: float
    analytic_probability: float
    bias_hat: float
    bias_se: float
    analytic_bias: float
    bias_flag: bool
    mse_hat: float
    mse_se: float
    analytic_mse: float
    mse_flag: bool
    histogram_edges: tuple[float, ...]
    histogram_counts: tuple[int, ...]


@dataclass(frozen=True)
class SimDump:
    """Per-replication trace: decision, interim statistic, estimate."""

    rep: np.ndarray
    decision: np.ndarray
    z1: np.ndarray
    mle: np.ndarray


@dataclass(frozen=True)
class SimResult:
    """Outcome of simulate(); flagged means some |z| exceeded 3."""

    config: SimConfig
    per_decision: tuple[DecisionSimStats, ...]
    mean_n_hat: float
    analytic_mean_n: float
    flagged: bool
    dump: SimDump | None


@dataclass
class _BlockStats:
    counts: np.ndarray          # int64, per decision
    err_sums: list[float]       # per decision
    err2_sums: list[float]
    err4_sums: list[float]
    hist: np.ndarray            # int64, (K, bins + 2)
    dump: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None


def _thresholds(design: TwoStageDesign) -> tuple[np.ndarray, np.ndarray]:
    """Interior cell edges on the z1 axis and the decision label per slot."""
    cells = design.rule.cells
    order = sorted(range(len(cells)), key=lambda i: cells[i].z_region.lo)
    edges = np.array([cells[i].z_region.lo for i in order[1:]], dtype=np.float64)
    labels = np.array([i + 1 for i in order], dtype=np.int64)
    return edges, labels


def _histogram_edges(design: TwoStageDesign, theta: float, bins: int) -> list[np.ndarray]:
    """Interior histogram edges per decision, from analytic branch moments.

    Degenerate branches (negligible probability, no analytic moments) fall
    back to the unconditional stage-1 scale so the edges stay deterministic.
    """
    report = mse_bound_report(design, theta)
    edges = []
    for row in report.per_decision:
        center = theta + row.bias
        spread = row.bound - row.bias * row.bias
        if not (math.isfinite(center) and spread > 0.0):
            center = theta
            spread = design.sigma * design.sigma / design.n1
        half = _HIST_SDS * math.sqrt(spread)
        edges.append(np.linspace(center - half, center + half, bins + 1))
    return edges


def _simulate_block(
    config: SimConfig,
    rep_lo: int,
    rep_hi: int,
    layout: _SlotLayout,
    z_edges: np.ndarray | None,
    z_labels: np.ndarray | None,
    hist_edges: list[np.ndarray],
) -> _BlockStats:
    design = config.design
    theta = config.theta
    sigma = design.sigma
    n1 = design.n1
    n_reps = rep_hi - rep_lo
    streams = np.arange(rep_lo, rep_hi, dtype=np.uint64)
    u = stream_uniforms(config.seed, streams, layout.slots)

    stage1 = theta + sigma * _ndtri(u[:, :n1])
    z1 = stage1.sum(axis=1) / (math.sqrt(n1) * sigma)
    stage1_means = stage1.mean(axis=1)

    if isinstance(design.rule, CoinFlipRule):
        coin = u[:, n1]
        decisions = np.where(coin < design.rule.p_stop, 1, 2).astype(np.int64)
    else:
        assert z_edges is not None and z_labels is not None
        decisions = z_labels[np.searchsorted(z_edges, z1, side="right")]

    stage2_means = np.full(n_reps, np.nan)
    if layout.max_n2:
        stage2 = theta + sigma * _ndtri(u[:, layout.stage2_base :])
        for d in design.decision_indices():
            n2 = stage2_n(design, d)
            if n2 == 0:
                continue
            mask = decisions == d
            if mask.any():
                stage2_means[mask] = stage2[mask, :n2].mean(axis=1)

    estimator = config.estimator if config.estimator is not None else pooled_mle
    estimates = np.asarray(
        estimator(design, decisions, stage1_means, stage2_means), dtype=np.float64
    )
    if estimates.shape != (n_reps,):
        raise MismatchedInputs(
            f"estimator returned shape {estimates.shape}, expected ({n_reps},)"
        )

    k = design.num_decisions
    errors = estimates - theta
    counts = np.zeros(k, dtype=np.int64)
    err_sums: list[float] = []
    err2_sums: list[float] = []
    err4_sums: list[float] = []
    hist = np.zeros((k, len(hist_edges[0]) + 1), dtype=np.int64)
    for d in design.decision_indices():
        mask = decisions == d
        counts[d - 1] = int(mask.sum())
        e = errors[mask]
        e2 = e * e
        err_sums.append(float(np.sum(e)))
        err2_sums.append(float(np.sum(e2)))
        err4_sums.append(float(np.sum(e2 * e2)))
        cell_idx = np.searchsorted(hist_edges[d - 1], estimates[mask], side="right")
        hist[d - 1] = np.bincount(cell_idx, minlength=hist.shape[1])

    dump = None
    if config.dump:
        dump = (
            np.arange(rep_lo, rep_hi, dtype=np.int64),
            decisions,
            z1,
            estimates,
        )
    return _BlockStats(counts, err_sums, err2_sums, err4_sums, hist, dump)


def simulate(config: SimConfig) -> SimResult:
    """Run the simulation described by config; see the module docstring."""
    design = config.design
    layout = _layout(design)
    if isinstance(design.rule, CoinFlipRule):
        z_edges = z_labels = None
    else:
        z_edges, z_labels = _thresholds(design)
    hist_edges = _histogram_edges(design, config.theta, config.bins)

    spans = [
        (lo, min(lo + _BLOCK_REPS, config.reps))
        for lo in range(0, config.reps, _BLOCK_REPS)
    ]

    def run(span: tuple[int, int]) -> _BlockStats:
        return _simulate_block(
            config, span[0], span[1], layout, z_edges, z_labels, hist_edges
        )

    if config.workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            blocks = list(pool.map(run, spans))
    else:
        blocks = [run(span) for span in spans]

    k = design.num_decisions
    counts = np.zeros(k, dtype=np.int64)
    hist = np.zeros_like(blocks[0].hist)
    for b in blocks:
        counts += b.counts
        hist += b.hist
    err_sums = [math.fsum(b.err_sums[i] for b in blocks) for i in range(k)]
    err2_sums = [math.fsum(b.err2_sums[i] for b in blocks) for i in range(k)]
    err4_sums = [math.fsum(b.err4_sums[i] for b in blocks) for i in range(k)]

    report = mse_bound_report(design, config.theta)
    use_analytic = config.estimator is None
    rows = []
    flagged = False
    mean_n_acc = 0.0
    analytic_mean_n = float(design.n1)
    for d in design.decision_indices():
        i = d - 1
        bound_row = report.per_decision[i]
        count = int(counts[i])
        p_hat = count / config.reps
        p_se = math.sqrt(p_hat * (1.0 - p_hat) / config.reps)
        if use_analytic and not bound_row.degenerate:
            a_bias = bound_row.bias
            a_mse = bound_row.bound
        else:
            a_bias = math.nan
            a_mse = math.nan
        bias_hat = err_sums[i] / count if count else math.nan
        mse_hat = err2_sums[i] / count if count else math.nan
        bias_se = mse_se = math.nan
        if count >= 2:
            var_e = max(err2_sums[i] - count * bias_hat * bias_hat, 0.0) / (count - 1)
            bias_se = math.sqrt(var_e / count)
            var_e2 = max(err4_sums[i] - count * mse_hat * mse_hat, 0.0) / (count - 1)
            mse_se = math.sqrt(var_e2 / count)
        bias_flag = _is_flagged(bias_hat, a_bias, bias_se)
        mse_flag = _is_flagged(mse_hat, a_mse, mse_se)
        flagged = flagged or bias_flag or mse_flag
        n_tot = bound_row.n_total
        mean_n_acc += count * n_tot
        analytic_mean_n += bound_row.probability * (n_tot - design.n1)
        interior = hist_edges[i]
        rows.append(
            DecisionSimStats(
                d=d,
                stop=is_stop_decision(design, d),
                n_total=n_tot,
                count=count,
                probability_hat=p_hat,
                probability_se=p_se,
                analytic_probability=bound_row.probability,
                bias_hat=bias_hat,
                bias_se=bias_se,
                analytic_bias=a_bias,
                bias_flag=bias_flag,
                mse_hat=mse_hat,
                mse_se=mse_se,
                analytic_mse=a_mse,
                mse_flag=mse_flag,
                histogram_edges=tuple(float(x) for x in interior),
                histogram_counts=tuple(int(c) for c in hist[i]),
            )
        )

    dump = None
    if config.dump:
        dump = SimDump(
            rep=np.concatenate([b.dump[0] for b in blocks]),
            decision=np.concatenate([b.dump[1] for b in blocks]),
            z1=np.concatenate([b.dump[2] for b in blocks]),
            mle=np.concatenate([b.dump[3] for b in blocks]),
        )
    return SimResult(
        config=config,
        per_decision=tuple(rows),
        mean_n_hat=mean_n_acc / config.reps,
        analytic_mean_n=analytic_mean_n,
        flagged=flagged,
        dump=dump,
    )


def _is_flagged(estimate: float, target: float, se: float) -> bool:
    if not (math.isfinite(estimate) and math.isfinite(target)):
        return False
    if not (math.isfinite(se) and se > 0.0):
        return False
    return abs(estimate - target) / se > _FLAG_Z


def chi_square_gof(
    observed: Sequence[int], expected: Sequence[float], min_expected: float = 5.0
) -> tuple[float, int, float]:
    """Goodness-of-fit statistic, degrees of freedom, and p-value.

    Adjacent cells are pooled left to right until each pooled cell expects
    at least min_expected; a trailing short cell folds into its neighbor.
    Counts are renormalized so observed and expected share the same total.
    """
    if len(observed) != len(expected):
        raise MismatchedInputs(
            f"{len(observed)} observed cells versus {len(expected)} expected"
        )
    total_obs = float(sum(observed))
    total_exp = float(sum(expected))
    if total_obs <= 0 or total_exp <= 0:
        raise ValueError("observed and expected totals must be positive")
    scale = total_obs / total_exp
    pooled_obs: list[float] = []
    pooled_exp: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e * scale
        if acc_e >= min_expected:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0.0 or acc_o > 0.0:
        if pooled_exp:
            pooled_obs[-1] += acc_o
            pooled_exp[-1] += acc_e
        else:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
    if len(pooled_exp) < 2:
        raise ValueError("too few cells with enough expected mass for a test")
    stat = sum((o - e) ** 2 / e for o, e in zip(pooled_obs, pooled_exp))
    df = len(pooled_exp) - 1
    from scipy.stats import chi2 as _chi2  # deferred: scipy.stats is a heavy import

    return stat, df, float(_chi2.sf(stat, df))


def expected_histogram_masses(
    design: TwoStageDesign, theta: float, d: int, interior_edges: Sequence[float]
) -> list[float]:
    """Conditional MLE masses of the bins + 2 overflow histogram cells."""
    if is_stop_decision(design, d):
        def cell_mass(a: float, b: float) -> float:
            return stop_mle_interval_mass(design, theta, a, b, d)
    else:
        def cell_mass(a: float, b: float) -> float:
            return continue_mle_interval_mass(design, theta, a, b, d)

    bounds = [-math.inf, *interior_edges, math.inf]
    return [cell_mass(a, b) for a, b in zip(bounds, bounds[1:])]
