"""Command-line front end.

Each subcommand writes CSV files plus ``manifest.json`` into ``--out`` and
prints a short summary with the provenance of every setting. Exit codes:
0 ok, 1 configuration error, 2 model-domain error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .agility import HopFixture, compare_policies, policies_csv, simulate_hopping, trace_csv
from .config import load_config, parse_policy
from .coverage import DropScenario, coverage_csv, crossovers_csv, resolve_bands, run_rate_coverage
from .errors import ConfigError, DomainError, Fr3Error, InfeasibleError
from .link import (
    UNBOUNDED,
    EqualAperture,
    EqualGain,
    PeakRateSpec,
    TypicalLookup,
    coherence_time,
    coverage_gain,
    noise_power,
    peak_rate,
    pn_snr_loss,
    shannon_rate,
    snr,
)
from .propagation import (
    FoliageSpec,
    RainSpec,
    cif_path_loss,
    ci_path_loss,
    foliage_loss,
    fspl,
    penetration_loss,
    rain_attenuation,
)
from .registry import fit_ple, lookup_params, parse_band
from .sensing import Combining, SensingPlan, sweep_csv, sweep_scaling


@dataclass
class RunManifest:
    subcommand: str
    argv: list
    seed: int
    config_path: str | None
    config_sha256: str
    outputs: dict = field(default_factory=dict)
    tool_version: str = __version__
    provenance: dict = field(default_factory=dict)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _band_arg(text):
    label, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"band must be LABEL=CENTER_GHZ,BW_MHZ[,PARAM_GHZ], got {text!r}")
    return label.strip(), value


# ---------------------------------------------------------------------------
# subcommands; each returns {filename: text}


def _bands(cfg, args):
    if getattr(args, "bands", None):
        return tuple(parse_band(label, value, key=f"--bands {label}") for label, value in args.bands)
    return cfg.bands


def cmd_propagate(cfg, args):
    sc = cfg.scenario
    env = args.env or sc.environment
    vis = args.vis or sc.visibility
    if args.freqs:
        targets = [(f"{f:g}GHz", f, f) for f in args.freqs]
    else:
        targets = [(b.label, b.center_ghz, b.lookup_freq_ghz) for b in _bands(cfg, args)]
    distances = args.distances
    rain_rate = args.rain if args.rain is not None else (cfg.rain.rain_rate if cfg.rain else 0.0)
    rain = RainSpec(rain_rate, args.rain_polarization or (cfg.rain.polarization if cfg.rain else "horizontal"),
                    cfg.rain.coefficients if cfg.rain else None)
    length_km = args.length_km if args.length_km is not None else sc.impairments.rain_path_km
    depth = args.foliage if args.foliage is not None else (
        sc.impairments.foliage.depth if sc.impairments.foliage else 0.0)
    FoliageSpec(depth)
    materials = list(args.material or sc.impairments.materials)
    rows = []
    for label, f, pf in targets:
        entry = lookup_params(cfg.table, env, vis, pf, nearest=args.nearest)
        ple = entry.require("ple")
        for d in distances:
            if args.model == "cif":
                pl = cif_path_loss(f, d, ple, args.cif_b, args.cif_f0 or pf)
            else:
                pl = ci_path_loss(f, d, ple)
            rain_db = rain_attenuation(rain, f, d / 1e3 if length_km is None else length_km) if rain_rate > 0 else 0.0
            fol_db = foliage_loss(f, depth)
            pen_db = sum((penetration_loss(cfg.materials, m, f) for m in materials), 0.0)
            rows.append([label, float(f), float(d), float(ple), fspl(f, 1.0), pl, rain_db, fol_db, pen_db,
                         pl + rain_db + fol_db + pen_db, "approximate" if entry.approximate else ""])
    header = ["band", "freq_ghz", "distance_m", "ple", "fspl_1m_db", "path_loss_db", "rain_db",
              "foliage_db", "penetration_db", "total_db", "flags"]
    return {"propagate.csv": _csv(header, rows)}


def _gain_model(cfg, args):
    kind = getattr(args, "gain_model", None)
    if kind is None:
        return cfg.link
    model = {"equal_gain": EqualGain(), "equal_aperture": EqualAperture(), "typical": TypicalLookup()}[kind]
    return cfg.link.with_gain_model(model)


def cmd_budget(cfg, args):
    link = _gain_model(cfg, args)
    sc = cfg.scenario
    d = args.distance if args.distance is not None else sc.distance_m
    specs = resolve_bands(cfg.table, _bands(cfg, args), sc.environment, sc.visibility, nearest=args.nearest)
    rows = []
    for spec in specs:
        f, bw = spec.band.center_ghz, spec.band.bandwidth_mhz
        pl = ci_path_loss(f, d, spec.params.ple) + sc.impairments.loss(f, d)
        g_tx, g_rx = link.gain_model.gains(f)
        s = snr(link, f, bw, pl)
        rows.append([spec.label, float(f), float(bw), float(d), pl, float(g_tx), float(g_rx),
                     noise_power(bw, link.noise_figure_db), s, shannon_rate(bw, s)])
    header = ["band", "freq_ghz", "bandwidth_mhz", "distance_m", "path_loss_db", "g_tx_dbi", "g_rx_dbi",
              "noise_dbm", "snr_db", "rate_mbps"]
    calcs = []
    if args.peak:
        b, n, w = args.peak
        calcs.append(["peak_rate", peak_rate(PeakRateSpec(b, int(n), w)), "Gbps"])
    if args.pn:
        calcs.append(["pn_snr_loss", pn_snr_loss(*args.pn), "dB"])
    if args.coverage_gain:
        calcs.append(["coverage_gain", coverage_gain(*args.coverage_gain), "dB"])
    if args.coherence:
        tc = coherence_time(*args.coherence)
        calcs.append(["coherence_time", "unbounded" if tc is UNBOUNDED else tc, "s"])
    out = {"budget.csv": _csv(header, rows)}
    if calcs:
        out["budget_calcs.csv"] = _csv(["quantity", "value", "unit"], calcs)
    return out


def cmd_rate_coverage(cfg, args):
    sc = cfg.scenario
    vis = args.vis or sc.visibility
    bands = resolve_bands(cfg.table, _bands(cfg, args), sc.environment, vis, nearest=args.nearest)
    scenario = DropScenario(
        bands, _gain_model(cfg, args), sc.environment, vis,
        cell_radius_m=args.cell_radius or cfg.cell_radius_m,
        min_distance_m=cfg.min_distance_m,
        impairments=sc.impairments,
        n_drops=args.n_drops or cfg.n_drops,
        seed=args.seed,
        default_shadow_sigma_db=cfg.default_shadow_sigma_db,
    )
    result = run_rate_coverage(scenario, workers=args.workers)
    return {"coverage.csv": coverage_csv(result), "crossovers.csv": crossovers_csv(result)}


def cmd_sensing(cfg, args):
    s = cfg.sensing
    combining = Combining.noncoherent if args.noncoherent else s["combining"]
    plan = None
    if args.subbands:
        plan = SensingPlan(tuple((o * 1e6, b * 1e6) for o, b in args.subbands), combining=combining)
    elif "plan" in s:
        plan = SensingPlan(s["plan"].subbands, combining=combining)
    bw = args.bandwidth_mhz * 1e6 if args.bandwidth_mhz else s["base_bandwidth_hz"]
    rows = sweep_scaling(bw, args.base_freq or s["base_freq_ghz"], args.factors or s["factors"],
                         args.snr or s["snr_grid"], plan=plan, combining=combining)
    return {"sensing.csv": sweep_csv(rows)}


def cmd_hop(cfg, args):
    sc = cfg.scenario
    bands = resolve_bands(cfg.table, _bands(cfg, args), sc.environment, sc.visibility, nearest=args.nearest)
    policies = [parse_policy(p) for p in args.policy] if args.policy else cfg.hop["policies"]
    fixture = HopFixture(bands, cfg.timeline, args.horizon or cfg.hop["horizon_s"],
                         args.step or cfg.hop["step_s"], sc, cfg.link)
    table = compare_policies(fixture, policies)
    trace = simulate_hopping(fixture.timeline, fixture.horizon_s, fixture.step_s, bands,
                             _gain_model(cfg, args), policies[0], scenario=sc)
    return {"policies.csv": policies_csv(table), "trace.csv": trace_csv(trace)}


def cmd_fit_ple(cfg, args):
    path = Path(args.samples)
    if not path.is_file():
        raise ConfigError(f"samples file not found: {path}", key="--samples")
    samples = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"distance_m", "path_loss_db"} <= set(reader.fieldnames):
            raise ConfigError("samples CSV needs columns distance_m,path_loss_db", key="--samples")
        for lineno, row in enumerate(reader, start=2):
            try:
                samples.append((float(row["distance_m"]), float(row["path_loss_db"])))
            except (TypeError, ValueError):
                raise ConfigError(f"bad sample row {row}", key="--samples", lineno=lineno) from None
    ple, sigma = fit_ple(samples, args.freq)
    return {"fit_ple.csv": _csv(["freq_ghz", "ple", "shadow_sigma_db", "n_samples"],
                                [[float(args.freq), ple, sigma, len(samples)]])}


COMMANDS = {
    "propagate": cmd_propagate,
    "budget": cmd_budget,
    "rate-coverage": cmd_rate_coverage,
    "sensing": cmd_sensing,
    "hop": cmd_hop,
    "fit-ple": cmd_fit_ple,
}


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


GLOBAL_DEFAULTS = {"config": None, "seed": 0, "out": "out", "workers": 1, "quiet": False}


def _global_flags(top):
    # Global flags are accepted before or after the subcommand. The copy
    # attached to each subcommand must not reset values given up front, so
    # its defaults are suppressed and filled in from the top-level parser.
    p = _Parser(add_help=False)

    def d(key):
        return GLOBAL_DEFAULTS[key] if top else argparse.SUPPRESS

    p.add_argument("--config", metavar="PATH", default=d("config"),
                   help="scenario file (default: built-in published defaults)")
    p.add_argument("--seed", type=_u64, default=d("seed"), metavar="U64", help="random seed (default 0)")
    p.add_argument("--out", metavar="DIR", default=d("out"), help="output directory (default ./out)")
    p.add_argument("--workers", type=int, default=d("workers"), metavar="N",
                   help="worker processes; results do not depend on it (default 1)")
    p.add_argument("--quiet", action="store_true", default=d("quiet"), help="suppress the summary")
    return p


def build_parser():
    common = _global_flags(top=False)

    bands = _Parser(add_help=False)
    bands.add_argument("--bands", type=_band_arg, action="append", metavar="LABEL=GHZ,MHZ[,PARAM_GHZ]",
                       help="band plan override, repeatable; PARAM_GHZ maps the band to a measured table frequency")
    bands.add_argument("--nearest", action="store_true",
                       help="use the nearest measured frequency when a band has no exact table entry")

    gains = _Parser(add_help=False)
    gains.add_argument("--gain-model", choices=["equal_gain", "equal_aperture", "typical"],
                       help="override the [link] gain model")

    p = _Parser(prog="fr3sim", description="FR3 upper mid-band propagation and link analysis",
                parents=[_global_flags(top=True)])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND", parser_class=_Parser)

    sp = sub.add_parser("propagate", parents=[common, bands], help="loss table over a frequency/distance grid",
                        description="Evaluate CI/CIF path loss plus rain, foliage and penetration losses.")
    sp.add_argument("--freqs", type=_floats, metavar="GHZ,...", help="frequencies (default: band plan)")
    sp.add_argument("--distances", type=_floats, default=[1.0, 10.0, 100.0, 1000.0], metavar="M,...",
                    help="distances in metres (default 1,10,100,1000)")
    sp.add_argument("--env", choices=["UMi", "InH", "InF"], help="environment override")
    sp.add_argument("--vis", choices=["LoS", "NLoS"], help="visibility override")
    sp.add_argument("--model", choices=["ci", "cif"], default="ci", help="path-loss model (default ci)")
    sp.add_argument("--cif-b", type=float, default=0.0, help="CIF frequency slope b (default 0)")
    sp.add_argument("--cif-f0", type=float, help="CIF anchor frequency in GHz (default: table frequency)")
    sp.add_argument("--rain", type=float, metavar="MM_HR", help="rain rate in mm/hr")
    sp.add_argument("--rain-polarization", choices=["horizontal", "vertical"], help="rain polarization")
    sp.add_argument("--length-km", type=float, help="rain path length in km (default: link distance)")
    sp.add_argument("--foliage", type=float, metavar="M", help="foliage depth in metres")
    sp.add_argument("--material", action="append", help="obstructing material, repeatable")

    sp = sub.add_parser("budget", parents=[common, bands, gains], help="link budget per band",
                        description="SNR and Shannon rate per band at one distance, plus scalar calculators.")
    sp.add_argument("--distance", type=float, help="link distance in metres (default: [scenario] distance_m)")
    sp.add_argument("--peak", type=_floats, metavar="BITS,STREAMS,GHZ", help="peak-rate calculator inputs")
    sp.add_argument("--pn", type=_floats, metavar="F_LOW,F_HIGH", help="phase-noise SNR loss between two GHz")
    sp.add_argument("--coverage-gain", type=_floats, metavar="DPLE,DIST_M", help="coverage gain calculator")
    sp.add_argument("--coherence", type=_floats, metavar="GHZ,MPS", help="coherence time calculator")

    sp = sub.add_parser("rate-coverage", parents=[common, bands, gains], help="Monte Carlo rate-coverage",
                        description="Drop users, compute per-band rate-coverage curves and crossovers.")
    sp.add_argument("--n-drops", type=int, help="number of user drops")
    sp.add_argument("--cell-radius", type=float, help="cell radius in metres")
    sp.add_argument("--vis", choices=["LoS", "NLoS"], help="visibility override")

    sp = sub.add_parser("sensing", parents=[common], help="delay CRB sweep",
                        description="Scale carrier and bandwidth and tabulate delay CRB and range std.")
    sp.add_argument("--bandwidth-mhz", type=float, help="base bandwidth in MHz (default 100)")
    sp.add_argument("--base-freq", type=float, help="base carrier in GHz (default 8)")
    sp.add_argument("--factors", type=_floats, metavar="K,...", help="scaling factors (default 1,2,3,4)")
    sp.add_argument("--snr", type=_floats, metavar="DB,...", help="SNR grid in dB")
    sp.add_argument("--subbands", type=lambda s: [tuple(_floats(x.replace(":", ","))) for x in s.split(";")],
                    metavar="OFF:BW;...", help="multi-band plan, offsets and widths in MHz")
    sp.add_argument("--noncoherent", action="store_true", help="discard cross-band phase")

    sp = sub.add_parser("hop", parents=[common, bands, gains], help="band-hopping policy comparison",
                        description="Simulate hopping policies under blockage events from the config.")
    sp.add_argument("--policy", action="append",
                    help="greedy | static:LABEL | hysteresis[:MARGIN_DB[:DWELL_S]], repeatable")
    sp.add_argument("--horizon", type=float, help="simulated time in seconds")
    sp.add_argument("--step", type=float, help="time step in seconds")

    sp = sub.add_parser("fit-ple", parents=[common], help="fit a CI path-loss exponent",
                        description="Least-squares CI fit of distance_m,path_loss_db samples.")
    sp.add_argument("--samples", required=True, metavar="CSV", help="CSV with distance_m,path_loss_db")
    sp.add_argument("--freq", type=float, required=True, help="carrier frequency in GHz")
    return p


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        outputs = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"fr3sim: config error: {exc}", file=stderr)
        return 1
    except (DomainError, InfeasibleError) as exc:
        print(f"fr3sim: model domain error: {exc}", file=stderr)
        return 2
    except Fr3Error as exc:
        print(f"fr3sim: error: {exc}", file=stderr)
        return 1

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        args.command, argv, args.seed, args.config,
        hashlib.sha256(cfg.text.encode()).hexdigest(),
        provenance={k: [str(v), s] for k, (v, s) in sorted(cfg.provenance.items())},
    )
    for name, text in outputs.items():
        (out / name).write_text(text, encoding="utf-8")
        manifest.outputs[name] = hashlib.sha256(text.encode()).hexdigest()
    (out / "manifest.json").write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    if not args.quiet:
        print(f"{args.command}: wrote {', '.join(sorted(outputs))} to {out}", file=stdout)
        for line in cfg.summary_lines():
            print(f"  {line}", file=stdout)
    return 0


def main():
    sys.exit(run())
