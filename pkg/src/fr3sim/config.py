"""Scenario files: turn a parsed config into model objects.

Every resolved setting records where its value came from (``config``,
``published``, ``ITU table`` or ``tool default``) so that run summaries can
show the provenance of each default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .agility import BlockageEvent, Greedy, Hysteresis, Static
from .configfile import parse_config, parse_float, parse_floats, read_config
from .coverage import DEFAULT_SHADOW_SIGMA_DB
from .errors import ConfigError, DomainError
from .link import EqualAperture, EqualGain, LinkConfig, TypicalLookup
from .propagation import FoliageSpec, Impairments, RainSpec, Scenario
from .registry import (
    BAND_SECTION,
    DEFAULT_TABLE,
    DEFAULT_VALIDITY_GHZ,
    MATERIAL_SECTION,
    DEFAULT_BAND_PLAN,
    PARAM_SECTION,
    ChannelParamTable,
    Environment,
    MaterialTable,
    Visibility,
    material_table_from_section,
    param_table_from_section,
    parse_band,
)
from .sensing import Combining, SensingPlan

PUBLISHED, ITU, TOOL, USER = "published", "ITU table", "tool default", "config"


class _Section:
    """Typed reads from one section; rejects keys nobody asked for."""

    def __init__(self, name, values, provenance):
        self.name = name
        self.values = dict(values)
        self.used = set()
        self.provenance = provenance

    def _raw(self, key):
        self.used.add(key)
        return self.values.get(key)

    def _record(self, key, value, source):
        self.provenance[f"{self.name}.{key}"] = (value, source)
        return value

    def get_float(self, key, default, source=TOOL):
        raw = self._raw(key)
        if raw is None:
            return self._record(key, default, source)
        return self._record(key, parse_float(raw, f"{self.name}.{key}"), USER)

    def get_int(self, key, default, source=TOOL):
        raw = self._raw(key)
        if raw is None:
            return self._record(key, default, source)
        try:
            return self._record(key, int(raw, 0), USER)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", key=f"{self.name}.{key}") from None

    def get_str(self, key, default, source=TOOL):
        raw = self._raw(key)
        if raw is None:
            return self._record(key, default, source)
        return self._record(key, raw.strip(), USER)

    def get_list(self, key, default, source=TOOL):
        raw = self._raw(key)
        if raw is None:
            return self._record(key, default, source)
        return self._record(key, [v.strip() for v in raw.split(",") if v.strip()], USER)

    def get_floats(self, key, default, source=TOOL):
        raw = self._raw(key)
        if raw is None:
            return self._record(key, default, source)
        return self._record(key, parse_floats(raw, f"{self.name}.{key}"), USER)

    def finish(self):
        unknown = sorted(set(self.values) - self.used)
        if unknown:
            raise ConfigError(f"unknown key in [{self.name}]", key=f"{self.name}.{unknown[0]}")


@dataclass
class RunConfig:
    table: ChannelParamTable
    materials: MaterialTable
    bands: tuple
    scenario: Scenario
    link: LinkConfig
    rain: RainSpec | None
    cell_radius_m: float
    min_distance_m: float
    n_drops: int
    default_shadow_sigma_db: float
    sensing: dict
    hop: dict
    timeline: tuple
    text: str = ""
    provenance: dict = field(default_factory=dict)

    def summary_lines(self):
        out = []
        for key in sorted(self.provenance):
            value, source = self.provenance[key]
            out.append(f"{key} = {value} [{source}]")
        return out


def _rain_coefficients(section):
    tables = {}
    for key, value in section.items():
        pol, _, freq = key.partition(".")
        if pol not in ("horizontal", "vertical") or not freq:
            raise ConfigError("expected horizontal.<freq_ghz> or vertical.<freq_ghz>",
                              key=f"rain.coefficients.{key}")
        k, alpha = parse_floats(value, f"rain.coefficients.{key}", n=2)
        tables.setdefault(pol, []).append((parse_float(freq, key), k, alpha))
    out = {}
    for pol, rows in tables.items():
        out[pol] = tuple(sorted(rows))
    return out


def parse_policy(text):
    """``greedy``, ``static:<band>`` or ``hysteresis[:margin_db[:min_dwell_s]]``."""
    name, *args = [p.strip() for p in text.split(":")]
    if name in ("greedy", "greedy_rate") and not args:
        return Greedy()
    if name == "static" and len(args) == 1 and args[0]:
        return Static(args[0])
    if name == "hysteresis" and len(args) <= 2:
        return Hysteresis(*(parse_float(a, "hop.policies") for a in args))
    raise ConfigError(f"unknown policy {text!r}", key="hop.policies")


def _subbands(items):
    out = []
    for item in items:
        parts = item.split(":")
        if len(parts) != 2:
            raise ConfigError(f"sub-band {item!r} must be offset_mhz:bandwidth_mhz", key="sensing.subbands")
        off, bw = (parse_float(p, "sensing.subbands") for p in parts)
        out.append((off * 1e6, bw * 1e6))
    return tuple(out)


def build_config(sections, text="") -> RunConfig:
    prov = {}
    known = {PARAM_SECTION, MATERIAL_SECTION, BAND_SECTION, "scenario", "link", "rain.coefficients",
             "sensing", "hop", "model"}
    for name in sections:
        if name not in known and not name.startswith("blockage."):
            raise ConfigError(f"unknown section [{name}]", key=name)

    try:
        model = _Section("model", sections.get("model", {}), prov)
        validity = tuple(model.get_floats("validity_ghz", list(DEFAULT_VALIDITY_GHZ), "TR 38.901 range"))
        model.finish()
        if len(validity) != 2:
            raise ConfigError("validity_ghz needs two numbers", key="model.validity_ghz")

        user_table = param_table_from_section(sections.get(PARAM_SECTION, {}), "config")
        table = DEFAULT_TABLE.merged(user_table, source="built-in defaults + config") if user_table.entries else DEFAULT_TABLE
        prov["channel.params"] = (f"{len(table)} entries", PUBLISHED if not user_table.entries else "published + config")
        materials = material_table_from_section(sections.get(MATERIAL_SECTION, {}))

        if BAND_SECTION in sections:
            bands = tuple(parse_band(label, value, key=f"bands.{label}", validity=validity)
                          for label, value in sections[BAND_SECTION].items())
            prov["bands"] = (", ".join(b.label for b in bands), USER)
        else:
            bands = DEFAULT_BAND_PLAN
            prov["bands"] = (", ".join(f"{b.label}:{b.bandwidth_mhz:g}MHz" for b in bands), PUBLISHED)

        sc = _Section("scenario", sections.get("scenario", {}), prov)
        env = sc.get_str("environment", "UMi")
        vis = sc.get_str("visibility", "LoS")
        try:
            env, vis = Environment(env), Visibility(vis)
        except ValueError as exc:
            raise ConfigError(str(exc), key="scenario.environment/visibility") from None
        distance = sc.get_float("distance_m", 100.0)
        cell_radius = sc.get_float("cell_radius_m", 500.0)
        min_distance = sc.get_float("min_distance_m", 10.0)
        n_drops = sc.get_int("n_drops", 10_000)
        shadow = sc.get_float("shadow_sigma_db", DEFAULT_SHADOW_SIGMA_DB)
        rain_rate = sc.get_float("rain_rate_mm_hr", 0.0)
        rain_pol = sc.get_str("rain_polarization", "horizontal")
        rain_path = sc.get_float("rain_path_km", None)
        foliage = sc.get_float("foliage_depth_m", 0.0)
        mats = tuple(sc.get_list("materials", []))
        speed = sc.get_float("speed_mps", 0.0)
        sc.finish()

        coeffs = _rain_coefficients(sections.get("rain.coefficients", {}))
        prov["rain.coefficients"] = ("override", USER) if coeffs else ("ITU-R P.838-3", ITU)
        rain = RainSpec(rain_rate, rain_pol, coeffs or None) if (rain_rate > 0 or coeffs) else None
        impairments = Impairments(rain=rain, rain_path_km=rain_path,
                                  foliage=FoliageSpec(foliage) if foliage else None,
                                  materials=mats, material_table=materials)
        scenario = Scenario(env, vis, distance, impairments, speed)

        lk = _Section("link", sections.get("link", {}), prov)
        tx = lk.get_float("tx_power_dbm", 43.0)
        nf = lk.get_float("noise_figure_db", 7.0)
        kind = lk.get_str("gain_model", "equal_gain")
        if kind == "equal_gain":
            gm = EqualGain(lk.get_float("g_tx_dbi", 0.0), lk.get_float("g_rx_dbi", 0.0))
        elif kind == "equal_aperture":
            gm = EqualAperture(lk.get_float("g_tx_dbi", 0.0), lk.get_float("g_rx_dbi", 0.0),
                               lk.get_float("f_ref_ghz", 7.0))
        elif kind == "typical":
            prov["link.typical_anchors"] = ("7 GHz: 10/6 dBi, 28 GHz: 26/13 dBi", PUBLISHED)
            gm = TypicalLookup()
        else:
            raise ConfigError(f"unknown gain model {kind!r} (equal_gain | equal_aperture | typical)",
                              key="link.gain_model")
        lk.finish()
        link = LinkConfig(tx, gm, nf)

        se = _Section("sensing", sections.get("sensing", {}), prov)
        sensing = {
            "base_bandwidth_hz": se.get_float("base_bandwidth_mhz", 100.0) * 1e6,
            "base_freq_ghz": se.get_float("base_freq_ghz", 8.0, PUBLISHED),
            "factors": se.get_floats("factors", [1.0, 2.0, 3.0, 4.0], PUBLISHED),
            "snr_grid": se.get_floats("snr_grid", [-10.0, -5.0, 0.0, 5.0, 10.0, 17.0, 20.0]),
            "subbands": _subbands(se.get_list("subbands", [])),
            "combining": Combining(se.get_str("combining", "coherent")),
        }
        se.finish()
        if sensing["subbands"]:
            sensing["plan"] = SensingPlan(sensing["subbands"], combining=sensing["combining"])

        hp = _Section("hop", sections.get("hop", {}), prov)
        hop = {
            "horizon_s": hp.get_float("horizon_s", 1.0),
            "step_s": hp.get_float("step_s", 0.001),
            "policies": [parse_policy(p) for p in hp.get_list("policies", ["greedy", "hysteresis"])],
        }
        hp.finish()

        timeline = []
        for name, values in sections.items():
            if not name.startswith("blockage."):
                continue
            bl = _Section(name, values, prov)
            loss = bl.get_float("loss_db", None)
            material = bl.get_str("material", None)
            timeline.append(BlockageEvent(bl.get_float("start_s", 0.0), bl.get_float("end_s", 0.0),
                                          tuple(bl.get_list("bands", [])), loss, material))
            bl.finish()
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(table, materials, bands, scenario, link, rain, cell_radius, min_distance, n_drops,
                     shadow, sensing, hop, tuple(timeline), text, prov)


def load_config(path=None) -> RunConfig:
    if path is None:
        return build_config({})
    sections = read_config(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build_config(sections, text)


def loads_config(text) -> RunConfig:
    return build_config(parse_config(text), text)
