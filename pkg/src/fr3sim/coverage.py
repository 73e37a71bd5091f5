"""Monte Carlo rate-coverage over a multi-band plan.

Users are dropped uniformly over an annulus, each band gets its own
shadowing draw, and the per-band Shannon rates are reduced to empirical
coverage curves P(rate >= t).

Random numbers come from per-block streams keyed by
``(seed, block index, stream index)`` with a fixed block size, so the draws
seen by drop ``i`` never depend on how the blocks are spread over workers.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MissingEntryError
from .link import LinkConfig, shannon_rate, snr
from .propagation import NO_IMPAIRMENTS, Impairments, ci_path_loss, sample_shadowing
from .registry import (
    CarrierBand,
    ChannelParamEntry,
    ChannelParamTable,
    Environment,
    Visibility,
    lookup_params,
)

BLOCK_SIZE = 4096
GRID_POINTS = 1000
DEFAULT_SHADOW_SIGMA_DB = 4.0


@dataclass(frozen=True)
class BandSpec:
    band: CarrierBand
    params: ChannelParamEntry

    @property
    def label(self):
        return self.band.label


def resolve_bands(table: ChannelParamTable, bands, environment, visibility, *, nearest=False):
    """Attach channel parameters to each band; a missing PLE names the band."""
    out = []
    for band in bands:
        try:
            entry = lookup_params(table, environment, visibility, band.lookup_freq_ghz, nearest=nearest)
            entry.require("ple")
        except MissingEntryError as exc:
            raise MissingEntryError(f"band {band.label!r}: {exc}", key=exc.key) from None
        out.append(BandSpec(band, entry))
    return tuple(out)


@dataclass(frozen=True)
class DropScenario:
    bands: tuple[BandSpec, ...]
    link: LinkConfig = field(default_factory=LinkConfig)
    environment: Environment = Environment.UMi
    visibility: Visibility = Visibility.LoS
    cell_radius_m: float = 500.0
    min_distance_m: float = 10.0
    impairments: Impairments = NO_IMPAIRMENTS
    n_drops: int = 10_000
    seed: int = 0
    default_shadow_sigma_db: float = DEFAULT_SHADOW_SIGMA_DB

    def __post_init__(self):
        if not self.bands:
            raise ConfigError("band plan is empty")
        labels = [b.label for b in self.bands]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate band labels in {labels}")
        if not self.min_distance_m >= 1.0:
            raise ConfigError(f"min_distance must be >= 1 m, got {self.min_distance_m}", key="min_distance_m")
        if not self.cell_radius_m >= self.min_distance_m:
            raise ConfigError("cell_radius must be >= min_distance", key="cell_radius_m")
        if int(self.n_drops) != self.n_drops or self.n_drops < 1:
            raise ConfigError(f"n_drops must be a positive integer, got {self.n_drops}", key="n_drops")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits", key="seed")
        for b in self.bands:
            b.params.require("ple")

    def shadow_sigma(self, spec: BandSpec):
        s = spec.params.shadow_sigma_db
        return self.default_shadow_sigma_db if s is None else s


def _rng(seed, block, stream):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(block, stream))
    return np.random.Generator(np.random.PCG64(ss))


def _drop_distances(scenario, rng, n):
    r0, r1 = scenario.min_distance_m, scenario.cell_radius_m
    u = rng.random(n)
    return np.sqrt(u * (r1 * r1 - r0 * r0) + r0 * r0)


def _block_rates(scenario: DropScenario, block: int) -> np.ndarray:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, scenario.n_drops - start)
    d = _drop_distances(scenario, _rng(scenario.seed, block, 0), n)
    out = np.empty((len(scenario.bands), n))
    for i, spec in enumerate(scenario.bands):
        shadow = sample_shadowing(scenario.shadow_sigma(spec), _rng(scenario.seed, block, i + 1), size=n)
        f = spec.band.center_ghz
        pl = ci_path_loss(f, d, spec.params.ple, shadow) + scenario.impairments.loss(f, d)
        s = snr(scenario.link, f, spec.band.bandwidth_mhz, pl)
        out[i] = shannon_rate(spec.band.bandwidth_mhz, s)
    return out


def _blocks_rates(args):
    scenario, blocks = args
    return [_block_rates(scenario, b) for b in blocks]


def drop_rates(scenario: DropScenario, workers=1) -> np.ndarray:
    """Per-band rates in Mbps, shape (n_bands, n_drops), in drop order."""
    n_blocks = -(-scenario.n_drops // BLOCK_SIZE)
    blocks = list(range(n_blocks))
    if workers <= 1 or n_blocks == 1:
        parts = [_block_rates(scenario, b) for b in blocks]
    else:
        chunks = [blocks[i::workers] for i in range(workers)]
        chunks = [c for c in chunks if c]
        by_block = {}
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            for chunk, res in zip(chunks, pool.map(_blocks_rates, [(scenario, c) for c in chunks])):
                by_block.update(zip(chunk, res))
        parts = [by_block[b] for b in blocks]
    return np.concatenate(parts, axis=1)


@dataclass(frozen=True)
class Crossover:
    rate_mbps: float
    band_below: str
    band_above: str


@dataclass(frozen=True, eq=False)
class RateCoverageResult:
    """Per-band empirical coverage.

    ``sorted_rates`` keeps every drop's rate so that :func:`coverage_at` is
    exact; ``coverage`` is the same curve sampled on ``thresholds``.
    """

    labels: tuple[str, ...]
    freqs_ghz: tuple[float, ...]
    thresholds: np.ndarray
    coverage: np.ndarray
    sorted_rates: np.ndarray
    crossovers: tuple[Crossover, ...] = ()

    @classmethod
    def from_rates(cls, labels, freqs_ghz, rates, thresholds=None):
        rates = np.sort(np.asarray(rates, dtype=float), axis=1)
        if thresholds is None:
            thresholds = threshold_grid(rates)
        thresholds = np.asarray(thresholds, dtype=float)
        n = rates.shape[1]
        cov = np.stack([(n - np.searchsorted(r, thresholds, side="left")) / n for r in rates])
        res = cls(tuple(labels), tuple(float(f) for f in freqs_ghz), thresholds, cov, rates)
        object.__setattr__(res, "crossovers", tuple(crossover_points(res)))
        return res

    def curve(self, label):
        i = self._index(label)
        return list(zip(self.thresholds.tolist(), self.coverage[i].tolist()))

    def _index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigError(f"unknown band {label!r} (bands: {', '.join(self.labels)})",
                              key=label) from None

    def __eq__(self, other):
        if not isinstance(other, RateCoverageResult):
            return NotImplemented
        return (self.labels == other.labels and self.freqs_ghz == other.freqs_ghz
                and np.array_equal(self.thresholds, other.thresholds)
                and np.array_equal(self.coverage, other.coverage)
                and np.array_equal(self.sorted_rates, other.sorted_rates)
                and self.crossovers == other.crossovers)

    __hash__ = None


def threshold_grid(rates, points=GRID_POINTS):
    """0 followed by ``points - 1`` log-spaced thresholds up to the max rate."""
    rates = np.asarray(rates, dtype=float)
    hi = float(rates.max())
    if hi <= 0:
        return np.zeros(points)
    pos = rates[rates > 0]
    lo = max(float(pos.min()), hi * 1e-6)
    if lo >= hi:
        lo = hi * 1e-3
    return np.concatenate([[0.0], np.geomspace(lo, hi, points - 1)])


def run_rate_coverage(scenario: DropScenario, workers=1) -> RateCoverageResult:
    rates = drop_rates(scenario, workers=workers)
    return RateCoverageResult.from_rates(
        [b.label for b in scenario.bands], [b.band.center_ghz for b in scenario.bands], rates)


def coverage_at(result: RateCoverageResult, band, rate) -> float:
    """Fraction of drops with rate >= ``rate``."""
    i = result._index(band)
    r = result.sorted_rates[i]
    n = r.size
    return float((n - np.searchsorted(r, rate, side="left")) / n)


def crossover_points(result: RateCoverageResult, min_run=1) -> list[Crossover]:
    """Thresholds where the band with the highest coverage changes.

    Ties go to the lower-frequency band. Grid points where every band has
    zero coverage are skipped. With ``min_run > 1`` a band must lead for
    that many consecutive grid points before the change is recorded, which
    suppresses flicker where two empirical curves run together.
    """
    if len(result.labels) < 2:
        return []
    order = np.argsort(np.asarray(result.freqs_ghz), kind="stable")
    cov = result.coverage[order]
    leaders = []
    for j, t in enumerate(result.thresholds):
        col = cov[:, j]
        if col.max() > 0:
            leaders.append((float(t), int(order[int(np.argmax(col))])))
    out = []
    prev = None
    j = 0
    while j < len(leaders):
        t, best = leaders[j]
        run = 1
        while j + run < len(leaders) and leaders[j + run][1] == best:
            run += 1
        if prev is None:
            prev = best
        elif best != prev and (run >= min_run or j + run == len(leaders)):
            out.append(Crossover(t, result.labels[prev], result.labels[best]))
            prev = best
        j += run
    return out


def dominant_sequence(result: RateCoverageResult):
    """Labels of successive dominating bands, starting from threshold 0."""
    seq = []
    for c in result.crossovers:
        if not seq:
            seq.append(c.band_below)
        seq.append(c.band_above)
    if not seq and result.labels:
        seq.append(result.labels[int(np.argsort(result.freqs_ghz, kind="stable")[0])])
    return seq


def coverage_csv(result: RateCoverageResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["band", "rate_mbps", "coverage"])
    for i, label in enumerate(result.labels):
        for t, p in zip(result.thresholds, result.coverage[i]):
            w.writerow([label, repr(float(t)), repr(float(p))])
    return buf.getvalue()


def crossovers_csv(result: RateCoverageResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rate_mbps", "band_below", "band_above"])
    for c in result.crossovers:
        w.writerow([repr(c.rate_mbps), c.band_below, c.band_above])
    return buf.getvalue()

