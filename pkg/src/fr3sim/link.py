"""Link budget: noise floor, antenna gain models, SNR and rate calculators."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .propagation import SPEED_OF_LIGHT

THERMAL_NOISE_DBM_HZ = -174.0
# Clarke-model convention for 50% correlation coherence time
COHERENCE_CONSTANT = 0.423


def noise_power(bandwidth_mhz, noise_figure_db=0.0):
    """Thermal noise floor in dBm."""
    b = np.asarray(bandwidth_mhz, dtype=float)
    if np.any(b <= 0):
        raise DomainError("bandwidth must be > 0")
    out = THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(b * 1e6) + noise_figure_db
    return float(out) if out.ndim == 0 else out


def antenna_gain_fixed_aperture(freq, f_ref, g_ref):
    """Gain of an antenna whose physical aperture is held fixed across frequency."""
    if not (freq > 0 and f_ref > 0):
        raise DomainError("frequencies must be > 0")
    return g_ref + 20.0 * math.log10(freq / f_ref)


@dataclass(frozen=True)
class TypicalGains:
    bs_dbi: float
    ue_dbi: float
    approximate: bool


# (freq GHz, BS dBi, UE dBi); practical array gains at 7 and 28 GHz
DEFAULT_GAIN_ANCHORS = ((7.0, 10.0, 6.0), (28.0, 26.0, 13.0))


def typical_gains(freq, anchors=DEFAULT_GAIN_ANCHORS) -> TypicalGains:
    """Practical BS/UE gains, piecewise-linear in log-frequency between anchors.

    Outside the anchor span the end segments are extended. Anything but an
    exact anchor hit is flagged approximate.
    """
    if not freq > 0:
        raise DomainError("frequency must be > 0")
    pts = sorted(anchors)
    for f, bs, ue in pts:
        if math.isclose(f, freq, rel_tol=0, abs_tol=1e-9):
            return TypicalGains(bs, ue, False)
    if len(pts) == 1:
        return TypicalGains(pts[0][1], pts[0][2], True)
    lf = math.log(freq)
    i = int(np.searchsorted([p[0] for p in pts], freq))
    i = min(max(i, 1), len(pts) - 1)
    (f0, b0, u0), (f1, b1, u1) = pts[i - 1], pts[i]
    t = (lf - math.log(f0)) / (math.log(f1) - math.log(f0))
    return TypicalGains(b0 + t * (b1 - b0), u0 + t * (u1 - u0), True)


class GainModelKind(str, enum.Enum):
    equal_gain = "equal_gain"
    equal_aperture = "equal_aperture"
    typical = "typical"


@dataclass(frozen=True)
class EqualGain:
    g_tx: float = 0.0
    g_rx: float = 0.0
    kind = GainModelKind.equal_gain

    def gains(self, freq):
        return self.g_tx, self.g_rx


@dataclass(frozen=True)
class EqualAperture:
    g_ref_tx: float = 0.0
    g_ref_rx: float = 0.0
    f_ref: float = 7.0
    kind = GainModelKind.equal_aperture

    def gains(self, freq):
        return (antenna_gain_fixed_aperture(freq, self.f_ref, self.g_ref_tx),
                antenna_gain_fixed_aperture(freq, self.f_ref, self.g_ref_rx))


@dataclass(frozen=True)
class TypicalLookup:
    """Downlink orientation: the BS transmits, the UE receives."""

    anchors: tuple = DEFAULT_GAIN_ANCHORS
    kind = GainModelKind.typical

    def gains(self, freq):
        g = typical_gains(freq, self.anchors)
        return g.bs_dbi, g.ue_dbi


@dataclass(frozen=True)
class LinkConfig:
    tx_power_dbm: float = 43.0
    gain_model: EqualGain | EqualAperture | TypicalLookup = field(default_factory=EqualGain)
    noise_figure_db: float = 7.0

    def __post_init__(self):
        if not self.noise_figure_db >= 0:
            raise DomainError(f"noise figure must be >= 0, got {self.noise_figure_db}")

    def with_gain_model(self, model):
        return LinkConfig(self.tx_power_dbm, model, self.noise_figure_db)


def snr(link: LinkConfig, freq, bandwidth_mhz, total_path_loss):
    """Received SNR in dB."""
    g_tx, g_rx = link.gain_model.gains(freq)
    out = (link.tx_power_dbm + g_tx + g_rx - np.asarray(total_path_loss, dtype=float)
           - noise_power(bandwidth_mhz, link.noise_figure_db))
    return float(out) if np.ndim(out) == 0 else out


def shannon_rate(bandwidth_mhz, snr_db):
    """Shannon capacity in Mbps."""
    b = np.asarray(bandwidth_mhz, dtype=float)
    if np.any(b <= 0):
        raise DomainError("bandwidth must be > 0")
    with np.errstate(over="ignore"):
        out = b * np.log2(1.0 + np.power(10.0, np.asarray(snr_db, dtype=float) / 10.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PeakRateSpec:
    bits_per_symbol: float
    streams: int
    total_bandwidth_ghz: float
    efficiency: float = 1.0

    def __post_init__(self):
        if not (self.bits_per_symbol > 0 and self.total_bandwidth_ghz > 0):
            raise DomainError("bits_per_symbol and bandwidth must be > 0")
        if int(self.streams) != self.streams or self.streams < 1:
            raise DomainError(f"streams must be a positive integer, got {self.streams}")
        if not 0 < self.efficiency <= 1:
            raise DomainError("efficiency must be in (0, 1]")


def peak_rate(spec: PeakRateSpec) -> float:
    """Idealised peak rate in Gbps: bits/symbol x streams x bandwidth."""
    return spec.bits_per_symbol * spec.streams * spec.total_bandwidth_ghz * spec.efficiency


def pn_snr_loss(f_low, f_high):
    """SNR penalty (dB) of fixed timing jitter when moving from f_low to f_high."""
    if not (f_high >= f_low > 0):
        raise DomainError("need f_high >= f_low > 0")
    return 20.0 * math.log10(f_high / f_low)


def coverage_gain(delta_ple, distance, ref_distance=1.0):
    """Signal advantage (dB) of a PLE lower by ``delta_ple`` at ``distance``."""
    if not (ref_distance > 0 and distance >= ref_distance):
        raise DomainError("need distance >= ref_distance > 0")
    # Δn times the loss per unit exponent, so whole decades stay exact in binary
    return delta_ple * (10.0 * math.log10(distance / ref_distance))


class Unbounded(enum.Enum):
    """Coherence time of a static link."""

    UNBOUNDED = "unbounded"

    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = Unbounded.UNBOUNDED


def doppler_hz(freq, speed):
    return freq * 1e9 * speed / SPEED_OF_LIGHT


def coherence_time(freq, speed):
    """Coherence time in seconds, or ``UNBOUNDED`` for a static link."""
    if not freq > 0:
        raise DomainError("frequency must be > 0")
    if not speed >= 0:
        raise DomainError("speed must be >= 0")
    if speed == 0:
        return UNBOUNDED
    return COHERENCE_CONSTANT / doppler_hz(freq, speed)
