"""Distance of invariant states from I/d and the level density of d^2 (rho_inv - I/d)."""

import argparse
import sys
from pathlib import Path

from randchan.experiments import cmd_invariant, load_config

HERE = Path(__file__).resolve().parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=HERE / "configs" / "invariant_state_density.yaml")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = load_config(args.config, {"samples": args.samples, "out": args.out})
    _, summary = cmd_invariant(cfg, cfg.out, threads=args.threads)
    print(f"{'d':>4} {'median |rho-I/d|_1':>20} {'d * median':>11} {'m4/m2^2':>8}")
    for d, s in summary.items():
        med = s["median_trace_distance"]
        print(f"{d:>4} {med:20.5f} {int(d) * med:11.4f} {s['m4_over_m2sq']:8.3f}")
    print(f"tables written to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
