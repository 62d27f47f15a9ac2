"""Writes Black-Scholes call quotes plus the market sidecar for the CLI."""
import argparse
import json
import math
from pathlib import Path


def bs_call(spot, strike, maturity, vol, rate):
    growth = math.exp(rate * maturity)
    sd = vol * math.sqrt(maturity)
    d1 = (math.log(spot * growth / strike) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    n = lambda z: 0.5 * math.erfc(-z / math.sqrt(2.0))
    return spot * n(d1) - strike / growth * n(d2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path, help="quotes CSV; the sidecar gets the .json suffix")
    ap.add_argument("--spot", type=float, default=100.0)
    ap.add_argument("--maturity", type=float, default=1.0)
    ap.add_argument("--vol", type=float, default=0.2)
    ap.add_argument("--rate", type=float, default=0.03)
    ap.add_argument("--k-min", type=float, default=20.0)
    ap.add_argument("--k-max", type=float, default=300.0)
    ap.add_argument("--k-step", type=float, default=1.0)
    a = ap.parse_args()

    n = int(round((a.k_max - a.k_min) / a.k_step))
    with a.out.open("w") as f:
        f.write("strike,price\n")
        for i in range(n + 1):
            k = a.k_min + i * a.k_step
            f.write(f"{k:.12g},{bs_call(a.spot, k, a.maturity, a.vol, a.rate):.15g}\n")
    side = {"spot": a.spot, "maturity": a.maturity, "discount_factor": math.exp(-a.rate * a.maturity)}
    a.out.with_suffix(".json").write_text(json.dumps(side, indent=2) + "\n")


if __name__ == "__main__":
    main()
