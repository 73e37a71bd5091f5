"""Measured FR3 channel parameters, band plans and material losses.

The shipped defaults hold only values published as numbers for the
measurement campaigns. Every other cell (shadow sigmas, angular spreads, most
delay spreads) is absent until a config file supplies it; lookups of absent
cells raise instead of guessing.
"""

from __future__ import annotations

import enum
import math
import re
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .configfile import format_float, parse_config, parse_float, parse_floats, read_config
from .errors import (
    ConfigError,
    DegenerateInputError,
    DuplicateKeyError,
    InvariantError,
    MissingEntryError,
)

PARAM_SECTION = "channel.params"
MATERIAL_SECTION = "materials"
BAND_SECTION = "bands"

# TR 38.901 model range
DEFAULT_VALIDITY_GHZ = (0.5, 100.0)

_FREQ_DIGITS = 6


class Environment(str, enum.Enum):
    UMi = "UMi"
    InH = "InH"
    InF = "InF"


class Visibility(str, enum.Enum):
    LoS = "LoS"
    NLoS = "NLoS"


class Polarization(str, enum.Enum):
    co = "co"
    cross = "cross"
    unspecified = "unspecified"


def _freq_key(freq):
    return round(float(freq), _FREQ_DIGITS)


def _enum(cls, value, key=None):
    if isinstance(value, cls):
        return value
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise ConfigError(f"unknown {cls.__name__.lower()} {value!r} (allowed: {allowed})",
                          key=key) from None


@dataclass(frozen=True)
class CarrierBand:
    """A candidate carrier.

    ``param_freq_ghz`` optionally points the band at a measured table
    frequency (e.g. a 7 GHz carrier using the 6.75 GHz measurements). It is
    an explicit user mapping, never an interpolation.
    """

    label: str
    center_ghz: float
    bandwidth_mhz: float
    param_freq_ghz: float | None = None
    validity_ghz: tuple[float, float] = field(default=DEFAULT_VALIDITY_GHZ, compare=False)

    def __post_init__(self):
        if not self.center_ghz > 0:
            raise InvariantError(f"band {self.label!r}: center frequency must be > 0")
        if not self.bandwidth_mhz > 0:
            raise InvariantError(f"band {self.label!r}: bandwidth must be > 0")
        lo, hi = self.validity_ghz
        half = self.bandwidth_mhz / 2e3
        if self.center_ghz - half < lo or self.center_ghz + half > hi:
            raise InvariantError(
                f"band {self.label!r}: edges {self.center_ghz - half:g}-{self.center_ghz + half:g} GHz "
                f"outside validity range {lo:g}-{hi:g} GHz")

    @property
    def lookup_freq_ghz(self):
        return self.center_ghz if self.param_freq_ghz is None else self.param_freq_ghz

    @property
    def bandwidth_hz(self):
        return self.bandwidth_mhz * 1e6


DEFAULT_BAND_PLAN = (
    CarrierBand("7GHz", 7.0, 100.0, param_freq_ghz=6.75),
    CarrierBand("14GHz", 14.0, 200.0, param_freq_ghz=16.95),
    CarrierBand("18GHz", 18.0, 300.0, param_freq_ghz=16.95),
    CarrierBand("24GHz", 24.0, 400.0, param_freq_ghz=28.0),
)


@dataclass(frozen=True)
class ChannelParamEntry:
    environment: Environment
    visibility: Visibility
    freq_ghz: float
    ple: float | None = None
    shadow_sigma_db: float | None = None
    rms_ds_ns: float | None = None
    rms_asa_deg: float | None = None
    # set only by nearest-neighbour lookups
    approximate: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "environment", _enum(Environment, self.environment))
        object.__setattr__(self, "visibility", _enum(Visibility, self.visibility))
        name = f"({self.environment.value}, {self.visibility.value}, {self.freq_ghz:g} GHz)"
        if not self.freq_ghz > 0:
            raise InvariantError(f"entry {name}: frequency must be > 0")
        if self.ple is not None and not self.ple > 0:
            raise InvariantError(f"entry {name}: ple must be > 0, got {self.ple}")
        if self.shadow_sigma_db is not None and not self.shadow_sigma_db >= 0:
            raise InvariantError(f"entry {name}: shadow_sigma must be >= 0, got {self.shadow_sigma_db}")
        if self.rms_ds_ns is not None and not self.rms_ds_ns >= 0:
            raise InvariantError(f"entry {name}: rms_ds must be >= 0, got {self.rms_ds_ns}")
        if self.rms_asa_deg is not None and not 0 <= self.rms_asa_deg <= 360:
            raise InvariantError(f"entry {name}: rms_asa must be in [0, 360], got {self.rms_asa_deg}")

    @property
    def key(self):
        return (self.environment, self.visibility, _freq_key(self.freq_ghz))

    def require(self, name):
        value = getattr(self, name)
        if value is None:
            raise MissingEntryError(
                f"no {name} for ({self.environment.value}, {self.visibility.value}, "
                f"{self.freq_ghz:g} GHz); supply it in [{PARAM_SECTION}]",
                key=f"{name}.{self.environment.value}.{self.visibility.value}.{self.freq_ghz:g}")
        return value


# Config-file field names -> entry attributes.
PARAM_FIELDS = {
    "ple": "ple",
    "shadow_sigma": "shadow_sigma_db",
    "rms_ds": "rms_ds_ns",
    "rms_asa": "rms_asa_deg",
}
_VALUE_ATTRS = tuple(PARAM_FIELDS.values())


@dataclass(frozen=True)
class ChannelParamTable:
    entries: tuple[ChannelParamEntry, ...] = ()
    source: str = field(default="", compare=False)

    def __post_init__(self):
        index = {}
        for e in self.entries:
            if e.key in index:
                raise DuplicateKeyError(
                    f"duplicate entry ({e.environment.value}, {e.visibility.value}, {e.freq_ghz:g} GHz)")
            index[e.key] = e
        object.__setattr__(self, "entries", tuple(sorted(index.values(), key=_sort_key)))
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        env, vis, freq = key
        return (_enum(Environment, env), _enum(Visibility, vis), _freq_key(freq)) in self._index

    def get(self, env, vis, freq):
        return self._index.get((_enum(Environment, env), _enum(Visibility, vis), _freq_key(freq)))

    def merged(self, other: ChannelParamTable, source=None) -> ChannelParamTable:
        """Cell-wise merge where cells set in ``other`` win."""
        index = dict(self._index)
        for key, e in other._index.items():
            base = index.get(key)
            if base is None:
                index[key] = e
            else:
                updates = {a: getattr(e, a) for a in _VALUE_ATTRS if getattr(e, a) is not None}
                index[key] = replace(base, **updates)
        return ChannelParamTable(tuple(index.values()),
                                 source=source or f"{self.source} + {other.source}")


def _sort_key(e):
    return (e.environment.value, e.visibility.value, e.freq_ghz)


def _defaults():
    U, I, F = Environment.UMi, Environment.InH, Environment.InF
    L, N = Visibility.LoS, Visibility.NLoS
    cells = [
        (I, L, 6.75, dict(ple=1.34)),
        (I, L, 16.95, dict(ple=1.32)),
        (I, L, 28.0, dict(ple=1.2)),
        (U, L, 6.75, dict(ple=1.79)),
        (U, L, 16.95, dict(ple=1.85)),
        # measured range 2.02 to 2.1; lower end kept
        (U, L, 28.0, dict(ple=2.02)),
        (U, N, 6.75, dict(ple=2.56)),
        (U, N, 16.95, dict(ple=2.59)),
        # measured range 3.4 to 3.56; lower end kept
        (U, N, 28.0, dict(ple=3.4)),
        (F, N, 6.75, dict(ple=1.78)),
        (F, N, 16.95, dict(ple=2.11)),
        (F, L, 6.75, dict(rms_ds_ns=14.0)),
        (F, L, 16.95, dict(rms_ds_ns=12.7)),
    ]
    return ChannelParamTable(
        tuple(ChannelParamEntry(env, vis, f, **vals) for env, vis, f, vals in cells),
        source="built-in defaults",
    )


DEFAULT_TABLE = _defaults()

# Measured ranges for cells whose default is one end of the range.
DOCUMENTED_RANGES = {
    (Environment.UMi, Visibility.LoS, 28.0): ("ple", 2.02, 2.1),
    (Environment.UMi, Visibility.NLoS, 28.0): ("ple", 3.4, 3.56),
}


def lookup_params(table, env, vis, freq, *, nearest=False) -> ChannelParamEntry:
    """Exact-key lookup.

    With ``nearest=True`` the closest measured frequency for (env, vis) is
    returned instead, tagged ``approximate=True``. No interpolation is done.
    """
    env = _enum(Environment, env)
    vis = _enum(Visibility, vis)
    hit = table.get(env, vis, freq)
    if hit is not None:
        return hit
    available = sorted(e.freq_ghz for e in table.entries
                       if e.environment is env and e.visibility is vis)
    if nearest and available:
        best = min(available, key=lambda f: (abs(math.log(f / freq)), f))
        return replace(table.get(env, vis, best), approximate=True)
    listing = ", ".join(f"{f:g}" for f in available) or "none"
    raise MissingEntryError(
        f"no channel parameters for ({env.value}, {vis.value}, {freq:g} GHz); "
        f"available frequencies for ({env.value}, {vis.value}): {listing}",
        key=f"ple.{env.value}.{vis.value}.{freq:g}")


def _parse_param_key(key):
    parts = key.split(".", 3)
    if len(parts) != 4:
        raise ConfigError("expected <field>.<environment>.<visibility>.<freq_ghz>", key=key)
    name, env, vis, freq = parts
    if name not in PARAM_FIELDS:
        raise ConfigError(f"unknown field {name!r} (allowed: {', '.join(PARAM_FIELDS)})", key=key)
    return (PARAM_FIELDS[name], _enum(Environment, env, key=key),
            _enum(Visibility, vis, key=key), parse_float(freq, key))


def param_table_from_section(section, source) -> ChannelParamTable:
    cells = {}
    seen = {}
    for key, value in section.items():
        attr, env, vis, freq = _parse_param_key(key)
        ident = (attr, env, vis, _freq_key(freq))
        if ident in seen:
            raise DuplicateKeyError(f"same cell as {seen[ident]!r}", key=key)
        seen[ident] = key
        cells.setdefault((env, vis, _freq_key(freq)), {})[attr] = parse_float(value, key)
    entries = []
    for (env, vis, freq), vals in cells.items():
        try:
            entries.append(ChannelParamEntry(env, vis, freq, **vals))
        except InvariantError as exc:
            raise InvariantError(f"{exc} (from {source})") from None
    return ChannelParamTable(tuple(entries), source=str(source))


def load_param_table(path, base: ChannelParamTable | None = DEFAULT_TABLE) -> ChannelParamTable:
    """Load ``[channel.params]`` from ``path`` and merge it over ``base``."""
    sections = read_config(path)
    user = param_table_from_section(sections.get(PARAM_SECTION, {}), path)
    if base is None:
        return user
    if not user.entries:
        return base
    return base.merged(user, source=f"{base.source} + {path}")


def loads_param_table(text, base: ChannelParamTable | None = DEFAULT_TABLE, source="<string>"):
    sections = parse_config(text, source=source)
    user = param_table_from_section(sections.get(PARAM_SECTION, {}), source)
    if base is None:
        return user
    return base.merged(user, source=f"{base.source} + {source}") if user.entries else base


def serialize_param_table(table: ChannelParamTable) -> str:
    lines = [f"# source: {table.source}" if table.source else "#", f"[{PARAM_SECTION}]"]
    names = {v: k for k, v in PARAM_FIELDS.items()}
    for e in table.entries:
        for attr in _VALUE_ATTRS:
            value = getattr(e, attr)
            if value is not None:
                lines.append(f"{names[attr]}.{e.environment.value}.{e.visibility.value}."
                             f"{format_float(e.freq_ghz)} = {format_float(value)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# materials


class MonotonicityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MaterialLossEntry:
    material: str
    freq_ghz: float
    loss_db: float
    polarization: Polarization = Polarization.unspecified

    def __post_init__(self):
        object.__setattr__(self, "polarization", _enum(Polarization, self.polarization))
        if not self.loss_db >= 0:
            raise InvariantError(
                f"material {self.material!r} at {self.freq_ghz:g} GHz: loss must be >= 0, got {self.loss_db}")


@dataclass(frozen=True)
class MaterialTable:
    """Penetration losses keyed by (material, frequency, polarization).

    Construction warns (does not fail) when a material's loss drops as
    frequency rises; measured FR3 losses grow with frequency.
    """

    entries: tuple[MaterialLossEntry, ...] = ()

    def __post_init__(self):
        index = {}
        for e in self.entries:
            key = (e.material, _freq_key(e.freq_ghz), e.polarization)
            if key in index:
                raise DuplicateKeyError(
                    f"duplicate material entry {e.material!r} at {e.freq_ghz:g} GHz ({e.polarization.value})")
            index[key] = e
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "_index", index)
        for msg in self.lint():
            warnings.warn(msg, MonotonicityWarning, stacklevel=3)

    def lint(self):
        out = []
        groups = {}
        for e in self.entries:
            groups.setdefault((e.material, e.polarization), []).append(e)
        for (material, pol), items in groups.items():
            items = sorted(items, key=lambda e: e.freq_ghz)
            for lo, hi in zip(items, items[1:]):
                if hi.loss_db < lo.loss_db:
                    out.append(f"material {material!r} ({pol.value}): loss at {hi.freq_ghz:g} GHz "
                               f"({hi.loss_db:g} dB) below loss at {lo.freq_ghz:g} GHz ({lo.loss_db:g} dB)")
        return out

    def find(self, material, freq, polarization=None):
        f = _freq_key(freq)
        if polarization is not None:
            return self._index.get((material, f, _enum(Polarization, polarization)))
        hits = [e for (m, ff, _), e in self._index.items() if m == material and ff == f]
        if len(hits) == 1:
            return hits[0]
        for e in hits:
            if e.polarization is Polarization.unspecified:
                return e
        if hits:
            raise ConfigError(
                f"material {material!r} at {freq:g} GHz has several polarizations; specify one")
        return None


def material_table_from_section(section) -> MaterialTable:
    pattern = re.compile(r"^(?P<mat>.+?)\.(?P<f>\d+(?:\.\d+)?)(?:\.(?P<pol>co|cross|unspecified))?$")
    entries = []
    for key, value in section.items():
        m = pattern.match(key)
        if m is None:
            raise ConfigError("expected <material>.<freq_ghz>[.co|.cross]", key=key)
        try:
            entries.append(MaterialLossEntry(m["mat"], float(m["f"]), parse_float(value, key),
                                             m["pol"] or Polarization.unspecified))
        except InvariantError as exc:
            raise InvariantError(str(exc), key=key) from None
    return MaterialTable(tuple(entries))


# ---------------------------------------------------------------------------
# path-loss exponent fit


def fit_ple(samples, freq) -> tuple[float, float]:
    """Least-squares CI fit with a fixed 1 m free-space anchor.

    ``samples`` is a sequence of (distance_m, path_loss_db). Returns
    ``(ple, shadow_sigma_db)`` with sigma the RMS residual.
    """
    from .propagation import fspl

    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise DegenerateInputError("samples must be a non-empty sequence of (distance_m, path_loss_db)")
    d, pl = arr[:, 0], arr[:, 1]
    if np.any(d <= 1.0):
        raise DegenerateInputError("all distances must exceed the 1 m reference distance")
    if np.unique(d).size < 2:
        raise DegenerateInputError("need at least two distinct distances")
    x = 10.0 * np.log10(d)
    y = pl - fspl(freq, 1.0)
    n = float(np.dot(x, y) / np.dot(x, x))
    sigma = float(np.sqrt(np.mean((y - n * x) ** 2)))
    return n, sigma


def parse_band(label, value, key=None, validity=DEFAULT_VALIDITY_GHZ) -> CarrierBand:
    """``label = center_ghz, bandwidth_mhz[, param_freq_ghz]``."""
    nums = parse_floats(value, key or label)
    if len(nums) not in (2, 3):
        raise ConfigError("expected center_ghz, bandwidth_mhz[, param_freq_ghz]", key=key or label)
    return CarrierBand(label, nums[0], nums[1], nums[2] if len(nums) == 3 else None,
                       validity_ghz=validity)

