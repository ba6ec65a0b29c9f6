"""Dirichlet samples on the probability simplex and spectra of random stochastic and quantum maps."""

import argparse
import sys
from pathlib import Path

import numpy as np

from randchan.experiments import cmd_simplex, load_config

HERE = Path(__file__).resolve().parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=HERE / "configs" / "simplex_dirichlet.yaml")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = load_config(args.config, {"samples": args.samples, "out": args.out})
    rows, spectra, radii = cmd_simplex(cfg, cfg.out, threads=args.threads)
    mods = {}
    for ens, _, re, im in spectra:
        mods.setdefault(ens, []).append(abs(complex(re, im)))
    print("reference radii: " + ", ".join(f"{k}={v:.4f}" for k, v in radii.items()))
    for ens, m in mods.items():
        print(f"{ens:>14}: median |lambda| {np.median(m):.4f}, 90% quantile {np.quantile(m, 0.9):.4f}")
    print(f"tables written to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
