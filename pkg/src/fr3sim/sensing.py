"""Delay-estimation bounds for multiband sensing.

Sub-bands are modelled as flat (rectangular) power spectra. The RMS
bandwidth is the square root of the second central moment of the composite
spectrum, with each sub-band weighted by its share of the total energy.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .propagation import SPEED_OF_LIGHT


class Combining(str, enum.Enum):
    coherent = "coherent"
    noncoherent = "noncoherent"


@dataclass(frozen=True)
class SensingPlan:
    """``subbands`` holds (center offset Hz, bandwidth Hz) pairs."""

    subbands: tuple[tuple[float, float], ...]
    snr_db: float = 17.0
    combining: Combining = Combining.coherent

    def __post_init__(self):
        object.__setattr__(self, "subbands", tuple((float(c), float(b)) for c, b in self.subbands))
        object.__setattr__(self, "combining", Combining(self.combining))
        if not self.subbands:
            raise DomainError("sensing plan has no sub-bands")
        if any(b <= 0 for _, b in self.subbands):
            raise DomainError("sub-band bandwidths must be > 0")
        edges = sorted((c - b / 2, c + b / 2) for c, b in self.subbands)
        for (_, hi), (lo, _) in zip(edges, edges[1:]):
            if lo < hi:
                raise DomainError("sub-bands overlap")

    def scaled(self, factor):
        return SensingPlan(tuple((c * factor, b * factor) for c, b in self.subbands),
                           self.snr_db, self.combining)


def rms_bandwidth(plan: SensingPlan) -> float:
    """RMS bandwidth in Hz."""
    offsets = np.array([c for c, _ in plan.subbands])
    widths = np.array([b for _, b in plan.subbands])
    w = widths / widths.sum()
    beta2 = float(np.sum(w * widths**2 / 12.0))
    if plan.combining is Combining.coherent:
        centroid = float(np.sum(w * offsets))
        beta2 += float(np.sum(w * (offsets - centroid) ** 2))
    return math.sqrt(beta2)


def delay_crb(beta, snr_db) -> float:
    """CRB on delay in s^2: 1 / (8 pi^2 beta^2 SNR)."""
    if not beta > 0:
        raise DomainError("RMS bandwidth must be > 0")
    return 1.0 / (8.0 * math.pi**2 * beta**2 * 10.0 ** (snr_db / 10.0))


def range_std(crb) -> float:
    """Range standard deviation in metres for a delay CRB in s^2."""
    if not crb >= 0:
        raise DomainError("CRB must be >= 0")
    return SPEED_OF_LIGHT * math.sqrt(crb)


def plan_range_std(plan: SensingPlan) -> float:
    return range_std(delay_crb(rms_bandwidth(plan), plan.snr_db))


@dataclass(frozen=True)
class SweepRow:
    factor: float
    snr_db: float
    crb_s2: float
    range_std_m: float


def sweep_scaling(base_band, base_freq, factors, snr_grid, *, plan: SensingPlan | None = None,
                  combining=Combining.coherent) -> list[SweepRow]:
    """Scale carrier and bandwidth together and tabulate the bound.

    ``base_band`` (Hz) describes a single band at ``base_freq`` (GHz); pass
    ``plan`` instead to scale a multi-sub-band layout, whose offsets and
    widths are multiplied by each factor. Only the bandwidths enter the
    bound, so the carrier itself does not appear in the output.
    """
    factors = list(factors)
    snr_grid = list(snr_grid)
    if not factors or not snr_grid:
        raise DomainError("factors and snr_grid must be non-empty")
    if not base_freq > 0:
        raise DomainError("base frequency must be > 0")
    if plan is None:
        plan = SensingPlan(((0.0, float(base_band)),), combining=combining)
    rows = []
    for k in factors:
        if not k > 0:
            raise DomainError(f"scaling factor must be > 0, got {k}")
        beta = rms_bandwidth(plan.scaled(k))
        for s in snr_grid:
            crb = delay_crb(beta, s)
            rows.append(SweepRow(float(k), float(s), crb, range_std(crb)))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["factor", "snr_db", "crb_s2", "range_std_m"])
    for r in rows:
        w.writerow([repr(r.factor), repr(r.snr_db), repr(r.crb_s2), repr(r.range_std_m)])
    return buf.getvalue()
