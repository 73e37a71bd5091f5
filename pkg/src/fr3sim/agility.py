"""Band selection and frequency-hopping simulation under blockage."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import BandSpec
from .errors import ConfigError, DomainError, InfeasibleError
from .link import UNBOUNDED, EqualGain, LinkConfig, TypicalLookup, coherence_time, shannon_rate, snr
from .propagation import Scenario, penetration_loss, total_path_loss


def _freq_order(bands):
    # stable: equal frequencies keep list order
    return sorted(range(len(bands)), key=lambda i: bands[i].band.center_ghz)


def band_rate(spec: BandSpec, scenario: Scenario, link: LinkConfig, extra_loss_db=0.0) -> float:
    f = spec.band.center_ghz
    pl = total_path_loss(f, scenario.distance_m, spec.params.require("ple"), scenario.impairments)
    return shannon_rate(spec.band.bandwidth_mhz, snr(link, f, spec.band.bandwidth_mhz, pl + extra_loss_db))


@dataclass(frozen=True)
class MaxRate:
    pass


@dataclass(frozen=True)
class MinRateGuarantee:
    rate_mbps: float


def _argmax_low(values, bands):
    best = None
    for i in _freq_order(bands):
        if best is None or values[i] > values[best]:
            best = i
    return best


def select_band(bands, scenario: Scenario, link: LinkConfig, objective=MaxRate()) -> str:
    """Pick a band label.

    ``MaxRate`` returns the highest-rate band. ``MinRateGuarantee`` returns
    the lowest-frequency band meeting the target, since it degrades last as
    the user moves away, and raises :class:`InfeasibleError` when none does.
    Ties go to the lower frequency.
    """
    if not bands:
        raise ConfigError("no candidate bands")
    rates = [band_rate(b, scenario, link) for b in bands]
    best = _argmax_low(rates, bands)
    if isinstance(objective, MinRateGuarantee):
        for i in _freq_order(bands):
            if rates[i] >= objective.rate_mbps:
                return bands[i].label
        raise InfeasibleError(
            f"no band reaches {objective.rate_mbps:g} Mbps; best is {bands[best].label} "
            f"at {rates[best]:.1f} Mbps", best_rate_mbps=rates[best], best_band=bands[best].label)
    return bands[best].label


# ---------------------------------------------------------------------------
# hopping


@dataclass(frozen=True)
class BlockageEvent:
    """Extra loss on some bands over [start, end).

    Give either ``added_loss_db`` or ``material``; a material is resolved
    per band through the scenario's penetration table.
    """

    start: float
    end: float
    affected_bands: tuple[str, ...]
    added_loss_db: float | None = None
    material: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "affected_bands", tuple(self.affected_bands))
        if not self.start < self.end:
            raise ConfigError(f"blockage start {self.start} must precede end {self.end}")
        if (self.added_loss_db is None) == (self.material is None):
            raise ConfigError("blockage needs exactly one of added_loss_db or material")
        if self.added_loss_db is not None and not self.added_loss_db >= 0:
            raise ConfigError(f"blockage loss must be >= 0, got {self.added_loss_db}")

    def active(self, t):
        return self.start <= t < self.end

    def loss_for(self, spec: BandSpec, scenario: Scenario):
        if spec.label not in self.affected_bands:
            return 0.0
        if self.added_loss_db is not None:
            return self.added_loss_db
        return penetration_loss(scenario.impairments.material_table, self.material, spec.band.center_ghz)


@dataclass(frozen=True)
class Static:
    band: str

    @property
    def name(self):
        return f"static({self.band})"


@dataclass(frozen=True)
class Greedy:
    name = "greedy_rate"


@dataclass(frozen=True)
class Hysteresis:
    """Leave the serving band only when the best band beats it by more than
    ``margin_db`` (rate ratio in dB) and the serving band has been held for
    at least ``min_dwell_s``."""

    margin_db: float = 3.0
    min_dwell_s: float = 0.01

    def __post_init__(self):
        if not (self.margin_db >= 0 and self.min_dwell_s >= 0):
            raise ConfigError("hysteresis margin and min_dwell must be >= 0")

    @property
    def name(self):
        return f"hysteresis({self.margin_db:g}dB,{self.min_dwell_s:g}s)"


@dataclass(frozen=True)
class TraceRow:
    t_s: float
    band: str
    rate_mbps: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class HopTrace:
    rows: tuple[TraceRow, ...]
    policy: str

    @property
    def mean_rate(self):
        return float(np.mean([r.rate_mbps for r in self.rows]))

    @property
    def hops(self):
        return sum("hop" in r.flags for r in self.rows)

    @property
    def ce_limited_hops(self):
        return sum("ce_limited" in r.flags for r in self.rows)


def step_times(horizon, step):
    if not step > 0:
        raise ConfigError(f"step must be > 0, got {step}")
    if not horizon >= step:
        raise ConfigError("horizon must be >= step")
    n = int(math.floor(horizon / step + 1e-9))
    return [k * step for k in range(n)]


def rate_matrix(timeline, times, bands, scenario: Scenario, link: LinkConfig):
    """Rates (Mbps) per step and band, plus a per-step/band blocked mask."""
    base = np.array([band_rate(b, scenario, link) for b in bands])
    rates = np.tile(base, (len(times), 1))
    blocked = np.zeros(rates.shape, dtype=bool)
    for k, t in enumerate(times):
        active = [ev for ev in timeline if ev.active(t)]
        if not active:
            continue
        for i, b in enumerate(bands):
            extra = sum(ev.loss_for(b, scenario) for ev in active)
            if any(b.label in ev.affected_bands for ev in active):
                blocked[k, i] = True
                rates[k, i] = band_rate(b, scenario, link, extra)
    return rates, blocked


def simulate_hopping(timeline, horizon, step, bands, link: LinkConfig, policy, speed=None,
                     *, scenario: Scenario | None = None) -> HopTrace:
    """Step through time letting ``policy`` choose the serving band.

    A hop away from a band held for less than its coherence time at the
    given speed is flagged ``ce_limited``; it carries no rate penalty.
    """
    if not bands:
        raise ConfigError("no candidate bands")
    scenario = scenario or Scenario()
    speed = scenario.speed_mps if speed is None else speed
    if not speed >= 0:
        raise DomainError("speed must be >= 0")
    labels = [b.label for b in bands]
    if isinstance(policy, Static) and policy.band not in labels:
        raise ConfigError(f"static policy band {policy.band!r} not in {labels}")
    times = step_times(horizon, step)
    rates, blocked = rate_matrix(timeline, times, bands, scenario, link)

    rows = []
    current = None
    entered = 0.0
    for k, t in enumerate(times):
        best = _argmax_low(rates[k], bands)
        if isinstance(policy, Static):
            choice = labels.index(policy.band)
        elif isinstance(policy, Greedy) or current is None:
            choice = best
        else:
            choice = current
            r_best, r_cur = rates[k, best], rates[k, current]
            if r_cur > 0:
                gain_db = 10.0 * math.log10(r_best / r_cur)
            else:
                gain_db = math.inf if r_best > 0 else 0.0
            if best != current and gain_db > policy.margin_db and t - entered >= policy.min_dwell_s - 1e-12:
                choice = best
        flags = []
        if current is not None and choice != current:
            flags.append("hop")
            tc = coherence_time(bands[current].band.center_ghz, speed)
            if tc is UNBOUNDED or t - entered < tc:
                flags.append("ce_limited")
            entered = t
        if blocked[k, choice]:
            flags.append("blocked")
        current = choice
        rows.append(TraceRow(t, labels[choice], float(rates[k, choice]), tuple(flags)))
    return HopTrace(tuple(rows), getattr(policy, "name", str(policy)))


def trace_csv(trace: HopTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_s", "band", "rate_mbps", "flags"])
    for r in trace.rows:
        w.writerow([repr(r.t_s), r.band, repr(r.rate_mbps), "|".join(r.flags)])
    return buf.getvalue()


@dataclass(frozen=True)
class HopFixture:
    bands: tuple[BandSpec, ...]
    timeline: tuple[BlockageEvent, ...] = ()
    horizon_s: float = 1.0
    step_s: float = 0.001
    scenario: Scenario = field(default_factory=Scenario)
    link: LinkConfig = field(default_factory=LinkConfig)


@dataclass(frozen=True)
class PolicyRow:
    policy: str
    mean_rate_equal_gain: float
    hops_equal_gain: int
    mean_rate_typical: float
    hops_typical: int


GAIN_MODELS = (("equal_gain", EqualGain()), ("typical", TypicalLookup()))


def compare_policies(fixture: HopFixture, policies) -> list[PolicyRow]:
    """Mean rate and hop count per policy, under equal and typical antenna gains."""
    policies = list(policies)
    if not policies:
        raise ConfigError("need at least one policy")
    rows = []
    for p in policies:
        stats = []
        for _, model in GAIN_MODELS:
            tr = simulate_hopping(fixture.timeline, fixture.horizon_s, fixture.step_s, fixture.bands,
                                  fixture.link.with_gain_model(model), p, scenario=fixture.scenario)
            stats.extend([tr.mean_rate, tr.hops])
        rows.append(PolicyRow(p.name, *stats))
    return rows


def policies_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "mean_rate_mbps_equal_gain", "hops_equal_gain",
                "mean_rate_mbps_typical", "hops_typical"])
    for r in rows:
        w.writerow([r.policy, repr(r.mean_rate_equal_gain), r.hops_equal_gain,
                    repr(r.mean_rate_typical), r.hops_typical])
    return buf.getvalue()
