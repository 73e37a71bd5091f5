"""Delay CRB and range accuracy as bandwidth grows with carrier frequency.

Also compares coherent and noncoherent combining of a two-band plan.

    python3 scripts/sensing_sweep.py --base-bw 100 --base-freq 8
"""

import argparse
from pathlib import Path

from fr3sim.sensing import SensingPlan, plan_range_std, rms_bandwidth, sweep_csv, sweep_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--base-bw", type=float, default=100.0, help="bandwidth at the base carrier, MHz")
    ap.add_argument("--base-freq", type=float, default=8.0, help="base carrier, GHz")
    ap.add_argument("--factors", default="1,2,3,4")
    ap.add_argument("--snr", default="0,10,17,20")
    ap.add_argument("--out", default="out/sensing")
    args = ap.parse_args()

    factors = [float(x) for x in args.factors.split(",")]
    snrs = [float(x) for x in args.snr.split(",")]
    rows = sweep_scaling(args.base_bw * 1e6, args.base_freq, factors, snrs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(sweep_csv(rows))

    print(f"{'factor':>6} {'carrier GHz':>11} {'SNR dB':>7} {'range std cm':>13}")
    for r in rows:
        print(f"{r.factor:6.1f} {r.factor * args.base_freq:11.1f} {r.snr_db:7.1f} {r.range_std_m * 100:13.3f}")

    pair = ((-500e6, 100e6), (500e6, 100e6))
    for mode in ("coherent", "noncoherent"):
        plan = SensingPlan(pair, 17.0, mode)
        print(f"two 100 MHz bands 1 GHz apart, {mode:11s}: beta {rms_bandwidth(plan) / 1e6:7.2f} MHz, "
              f"range std {plan_range_std(plan) * 100:.3f} cm")
    print(f"wrote {out}/sweep.csv")


if __name__ == "__main__":
    main()
