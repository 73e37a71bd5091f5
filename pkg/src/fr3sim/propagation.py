"""Deterministic propagation losses and shadow-fading draws.

All loss functions take frequencies in GHz and distances in metres and
accept scalars or numpy arrays; scalar inputs give a float back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import itu_rain
from .errors import DomainError, MissingEntryError
from .registry import (
    Environment,
    MaterialLossEntry,
    MaterialTable,
    Visibility,
)

SPEED_OF_LIGHT = 299_792_458.0

FOLIAGE_MAX_DEPTH_M = 400.0
FOLIAGE_BRANCH_M = 14.0


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def fspl(freq, distance):
    """Friis free-space loss in dB."""
    f = np.asarray(freq, dtype=float)
    d = np.asarray(distance, dtype=float)
    if np.any(f <= 0) or np.any(d <= 0):
        raise DomainError("fspl needs freq > 0 and distance > 0")
    return _out(20.0 * np.log10(4.0 * math.pi * d * f * 1e9 / SPEED_OF_LIGHT))


def ci_path_loss(freq, distance, ple, shadow=0.0):
    """Close-in model anchored at the 1 m free-space loss."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 1.0):
        raise DomainError("CI model valid only for distance >= 1 m")
    if np.any(np.asarray(ple) <= 0):
        raise DomainError("ple must be > 0")
    return _out(fspl(freq, 1.0) + 10.0 * np.asarray(ple) * np.log10(d) + shadow)


def cif_path_loss(freq, distance, n, b, f0, shadow=0.0):
    """CI model with the exponent scaled by ``1 + b (f - f0) / f0``."""
    if not f0 > 0:
        raise DomainError("CIF anchor frequency f0 must be > 0")
    d = np.asarray(distance, dtype=float)
    if np.any(d < 1.0):
        raise DomainError("CIF model valid only for distance >= 1 m")
    f = np.asarray(freq, dtype=float)
    n_eff = n * (1.0 + b * (f - f0) / f0)
    return _out(fspl(f, 1.0) + 10.0 * n_eff * np.log10(d) + shadow)


# ---------------------------------------------------------------------------
# rain


@dataclass(frozen=True)
class RainSpec:
    rain_rate: float
    polarization: str = "horizontal"
    # per polarization: ((freq_ghz, k, alpha), ...); None -> ITU-R P.838-3
    coefficients: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.rain_rate >= 0:
            raise DomainError(f"rain rate must be >= 0, got {self.rain_rate}")
        if self.polarization not in ("horizontal", "vertical"):
            raise DomainError(f"polarization must be horizontal or vertical, got {self.polarization!r}")
        if self.coefficients is not None:
            for pol, rows in self.coefficients.items():
                validate_rain_table(rows, pol)

    def table(self):
        if self.coefficients and self.polarization in self.coefficients:
            return self.coefficients[self.polarization]
        return _DEFAULT_RAIN[self.polarization]


def validate_rain_table(rows, name=""):
    if len(rows) < 2:
        raise DomainError(f"rain coefficient table {name} needs at least two rows")
    freqs = [r[0] for r in rows]
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise DomainError(f"rain coefficient table {name}: frequencies must be strictly increasing")
    if any(r[1] <= 0 or r[2] <= 0 for r in rows):
        raise DomainError(f"rain coefficient table {name}: k and alpha must be > 0")


_DEFAULT_RAIN = {pol: itu_rain.default_table(pol) for pol in ("horizontal", "vertical")}


def rain_specific_attenuation(spec: RainSpec, freq) -> float:
    """gamma = k R^alpha in dB/km."""
    rows = spec.table()
    lo, hi = rows[0][0], rows[-1][0]
    if not lo <= freq <= hi:
        raise DomainError(f"{freq:g} GHz outside rain coefficient table span {lo:g}-{hi:g} GHz")
    if spec.rain_rate == 0:
        return 0.0
    k, alpha = itu_rain.interpolate(rows, freq)
    return k * spec.rain_rate ** alpha


def rain_attenuation(spec: RainSpec, freq, path_length_km):
    if np.any(np.asarray(path_length_km) < 0):
        raise DomainError("path length must be >= 0")
    return _out(rain_specific_attenuation(spec, freq) * np.asarray(path_length_km, dtype=float))


# ---------------------------------------------------------------------------
# foliage


@dataclass(frozen=True)
class FoliageSpec:
    depth: float

    def __post_init__(self):
        if not 0 <= self.depth <= FOLIAGE_MAX_DEPTH_M:
            raise DomainError(f"foliage depth must be in [0, {FOLIAGE_MAX_DEPTH_M:g}] m, got {self.depth}")


def foliage_loss(freq, depth):
    """Weissberger's modified exponential decay model.

    Depth up to and including 14 m uses the linear short-path branch. The
    two branches do not meet at 14 m; see :func:`foliage_branch_jump`.
    """
    d = np.asarray(depth, dtype=float)
    if np.any(d < 0) or np.any(d > FOLIAGE_MAX_DEPTH_M):
        raise DomainError(f"foliage depth must be in [0, {FOLIAGE_MAX_DEPTH_M:g}] m")
    fterm = np.asarray(freq, dtype=float) ** 0.284
    short = 0.45 * fterm * d
    long_ = 1.33 * fterm * np.power(np.maximum(d, FOLIAGE_BRANCH_M), 0.588)
    return _out(np.where(d <= FOLIAGE_BRANCH_M, short, long_))


def foliage_branch_jump(freq):
    """Long-branch minus short-branch loss at the 14 m switch point."""
    fterm = freq ** 0.284
    return 1.33 * fterm * FOLIAGE_BRANCH_M ** 0.588 - 0.45 * fterm * FOLIAGE_BRANCH_M


# ---------------------------------------------------------------------------
# penetration


def _as_material_table(table):
    if isinstance(table, MaterialTable):
        return table
    return MaterialTable(tuple(table))


def penetration_loss(table, material, freq, polarization=None) -> float:
    tbl = _as_material_table(table)
    entry = tbl.find(material, freq, polarization)
    if entry is None:
        known = sorted({f"{e.material}@{e.freq_ghz:g}" for e in tbl.entries}) or ["none"]
        raise MissingEntryError(
            f"no penetration loss for {material!r} at {freq:g} GHz (known: {', '.join(known)})",
            key=f"{material}.{freq:g}")
    return entry.loss_db


# ---------------------------------------------------------------------------
# shadowing


def sample_shadowing(sigma, rng: np.random.Generator, size=None):
    """Zero-mean Gaussian shadowing in dB.

    One standard normal is consumed per sample even when ``sigma`` is 0, so
    the stream position does not depend on sigma.
    """
    if not sigma >= 0:
        raise DomainError(f"shadowing sigma must be >= 0, got {sigma}")
    z = rng.standard_normal(size)
    if sigma == 0:
        return 0.0 if size is None else np.zeros_like(z)
    return sigma * z if size is not None else float(sigma * z)


# ---------------------------------------------------------------------------
# loss composition


@dataclass(frozen=True)
class Impairments:
    """Losses added on top of the CI path loss.

    ``rain_path_km`` of None means the rain cell spans the whole link.
    """

    rain: RainSpec | None = None
    rain_path_km: float | None = None
    foliage: FoliageSpec | None = None
    materials: tuple[str, ...] = ()
    material_table: MaterialTable = field(default_factory=MaterialTable)

    def loss(self, freq, distance_m):
        total = np.zeros_like(np.asarray(distance_m, dtype=float))
        if self.rain is not None and self.rain.rain_rate > 0:
            length = np.asarray(distance_m, dtype=float) / 1e3 if self.rain_path_km is None else self.rain_path_km
            total = total + rain_attenuation(self.rain, freq, length)
        if self.foliage is not None and self.foliage.depth > 0:
            total = total + foliage_loss(freq, self.foliage.depth)
        for m in self.materials:
            total = total + penetration_loss(self.material_table, m, freq)
        return _out(total)

    def with_materials(self, *materials):
        return Impairments(self.rain, self.rain_path_km, self.foliage,
                           tuple(self.materials) + tuple(materials), self.material_table)


NO_IMPAIRMENTS = Impairments()


@dataclass(frozen=True)
class Scenario:
    """One evaluation context for point-to-point link queries."""

    environment: Environment = Environment.UMi
    visibility: Visibility = Visibility.LoS
    distance_m: float = 100.0
    impairments: Impairments = NO_IMPAIRMENTS
    speed_mps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "environment", Environment(self.environment))
        object.__setattr__(self, "visibility", Visibility(self.visibility))
        if not self.distance_m >= 1.0:
            raise DomainError(f"scenario distance must be >= 1 m, got {self.distance_m}")
        if not self.speed_mps >= 0:
            raise DomainError(f"speed must be >= 0, got {self.speed_mps}")


def total_path_loss(freq, distance_m, ple, impairments: Impairments = NO_IMPAIRMENTS, shadow=0.0):
    return _out(ci_path_loss(freq, distance_m, ple, shadow) + impairments.loss(freq, distance_m))


__all__ = [
    "SPEED_OF_LIGHT", "fspl", "ci_path_loss", "cif_path_loss",
    "RainSpec", "rain_specific_attenuation", "rain_attenuation",
    "FoliageSpec", "foliage_loss", "foliage_branch_jump",
    "MaterialLossEntry", "MaterialTable", "penetration_loss",
    "sample_shadowing", "Impairments", "Scenario", "total_path_loss",
]
