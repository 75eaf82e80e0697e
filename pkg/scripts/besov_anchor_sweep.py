"""Convergence of the Besov norm of f(q) = q against its closed form.

Sweeps the disk rule size and prints relative errors as CSV.
"""
import argparse
from dataclasses import dataclass

from slicereg.norms import besov_norm
from slicereg.quadrature import build_rule
from slicereg.slice_series import PowerSeries


@dataclass
class SweepConfig:
    exponents: tuple = (1.5, 2.0, 3.0, 4.0)
    sizes: tuple = (16, 32, 64, 128, 256)
    r_max: float = 1.0 - 1e-4


def sweep(cfg: SweepConfig):
    f = PowerSeries([[0, 0, 0, 0], [1, 0, 0, 0]])
    rows = []
    for p in cfg.exponents:
        exact = (1.0 / (p - 1.0)) ** (1.0 / p)
        for n in cfg.sizes:
            for extrapolate in (False, True):
                value = besov_norm(f, p, rule=build_rule(n, n, cfg.r_max, extrapolate)).value
                rows.append((p, n, extrapolate, value, abs(value - exact) / exact))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rmax", type=float, default=SweepConfig.r_max)
    args = ap.parse_args()
    print("p,nodes,extrapolate,value,rel_err")
    for p, n, ex, v, e in sweep(SweepConfig(r_max=args.rmax)):
        print(f"{p},{n},{int(ex)},{v:.12g},{e:.3e}")


if __name__ == "__main__":
    main()
