"""Operator diagnostics for a family of polynomial self-maps.

For each map prints the boundedness functional, the compactness verdict and
the essential-norm sandwich; per-a traces go to ``--out-dir`` when given.
"""
import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from slicereg.operators import a_grid, analyze_operator, self_map
from slicereg.quadrature import build_rule
from slicereg.quaternion_core import sample_sphere

MAPS = {
    "identity": [[0, 0, 0, 0], [1, 0, 0, 0]],
    "half": [[0, 0, 0, 0], [0.5, 0, 0, 0]],
    "square": [[0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]],
    "constant": [[0.3, 0.2, 0, 0]],
    "contraction": [[0.1, 0.1, 0, 0], [0.4, 0, 0, 0], [0.3, 0, 0, 0]],
    "boundary_touching": [[0.5, 0, 0, 0], [0.5, 0, 0, 0]],
}


@dataclass
class ReportConfig:
    p: float = 2.0
    alpha: float = 0.0
    angles: int = 8
    sphere: int = 4
    nodes: int = 64


def report(name: str, cfg: ReportConfig):
    phi = self_map(MAPS[name])
    rule = build_rule(cfg.nodes, cfg.nodes, 1.0 - 1e-4, extrapolate=True)
    return analyze_operator(phi, cfg.p, cfg.alpha, a_grid(angles=cfg.angles), sample_sphere(cfg.sphere), rule)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--maps", default=",".join(MAPS))
    ap.add_argument("--out-dir")
    args = ap.parse_args()
    cfg = ReportConfig(p=args.p, alpha=args.alpha)
    print("map,bounded_functional,compact_verdict,essnorm_lower,essnorm_upper,carleson_M")
    for name in args.maps.split(","):
        rep = report(name, cfg)
        print(f"{name},{rep.bounded_functional:.6g},{rep.compact_verdict},"
              f"{rep.essnorm_lower:.4g},{rep.essnorm_upper:.4g},{rep.carleson_M:.4g}")
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.json").write_text(json.dumps(rep.to_json(), indent=2, sort_keys=True, default=str))
            (out / f"{name}.csv").write_text(rep.trace_csv())


if __name__ == "__main__":
    main()
