"""Command-line front end.

Exit codes: 0 success, 1 domain error, 2 I/O error, 3 verify found a
failing check, 64 usage error (unknown command or bad flag).  Errors are
reported on stderr as a single JSON line.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import norms, operators
from .quadrature import build_rule
from .quaternion_core import DomainError, Quaternion, sample_sphere
from .slice_series import PowerSeries, SliceFunction, load_function, mobius_exact

COMMANDS = ("norm", "bloch", "bmo", "verify", "compose", "essnorm", "carleson")
EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 3, 64
BMO_RADIUS = 1.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    p: float = 2.0
    alpha: float = 0.0
    f: str | None = None
    phi: str | None = None
    rule_radial: int | None = None
    rule_angular: int | None = None
    rmax: float | None = None
    sphere: int = norms.DEFAULT_SPHERE
    a_rhos: tuple = operators.DEFAULT_RHOS
    a_angles: int = operators.DEFAULT_ANGLES
    seed: int = 0
    out: str | None = None
    threads: int | None = None
    extras: dict = field(default_factory=dict)

    def rule(self, radial: int, angular: int, r_max: float, extrapolate: bool = False):
        return build_rule(self.rule_radial or radial, self.rule_angular or angular,
                          self.rmax if self.rmax is not None else r_max, extrapolate)

    def units(self):
        return sample_sphere(self.sphere, self.seed)


def _parse_quaternion(text: str) -> Quaternion:
    parts = [float(t) for t in text.split(",")]
    if len(parts) == 1:
        return Quaternion.real(parts[0])
    if len(parts) != 4:
        raise DomainError(f"quaternion literal needs 1 or 4 components: {text!r}")
    return Quaternion(*parts)


def resolve_function(spec: str) -> SliceFunction:
    """A function spec file or one of ``identity``, ``monomial:n``, ``mobius:a``, ``constant:c``."""
    name, _, arg = spec.partition(":")
    if name == "identity" and not arg:
        return PowerSeries([[0, 0, 0, 0], [1, 0, 0, 0]], label="identity")
    if name == "monomial" and arg:
        n = int(arg)
        if n < 0:
            raise DomainError("monomial degree must be nonnegative")
        c = np.zeros((n + 1, 4))
        c[n, 0] = 1.0
        return PowerSeries(c, label=spec)
    if name == "mobius" and arg:
        return mobius_exact(_parse_quaternion(arg))
    if name == "constant" and arg:
        return PowerSeries([_parse_quaternion(arg)], label=spec)
    return load_function(spec)


def resolve_selfmap(spec: str) -> operators.SelfMap:
    f = resolve_function(spec)
    if not isinstance(f, PowerSeries):
        raise DomainError("self-map must be a polynomial")
    return operators.SelfMap(f, operators.UNIT_I)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="slicereg", description="Slice-regular Besov norms and composition operators.")
    ap.add_argument("command", help=", ".join(COMMANDS))
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--f")
    ap.add_argument("--phi")
    ap.add_argument("--rule-radial", type=int)
    ap.add_argument("--rule-angular", type=int)
    ap.add_argument("--rmax", type=float)
    ap.add_argument("--sphere", type=int, default=norms.DEFAULT_SPHERE)
    ap.add_argument("--a-rhos", default=",".join(str(r) for r in operators.DEFAULT_RHOS))
    ap.add_argument("--a-angles", type=int, default=operators.DEFAULT_ANGLES)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    ap.add_argument("--threads", type=int, default=os.cpu_count())
    return ap


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.command not in COMMANDS:
        raise UsageError(f"unknown command {ns.command!r}")
    try:
        rhos = tuple(float(t) for t in ns.a_rhos.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"bad --a-rhos: {exc}") from None
    return RunConfig(ns.command, ns.p, ns.alpha, ns.f, ns.phi, ns.rule_radial, ns.rule_angular, ns.rmax,
                     ns.sphere, rhos, ns.a_angles, ns.seed, ns.out, ns.threads)


def _need(value, flag: str):
    if not value:
        raise DomainError(f"{flag} is required for this command")
    return value


def _grid(cfg: RunConfig):
    if cfg.a_angles < 1 or not cfg.a_rhos:
        raise DomainError("a-grid needs at least one radius and one angle")
    return operators.a_grid(cfg.a_rhos, cfg.a_angles)


def cmd_norm(cfg: RunConfig):
    f = resolve_function(_need(cfg.f, "--f"))
    rep = norms.besov_norm(f, cfg.p, cfg.units(), cfg.rule(128, 128, 1.0 - 1e-4, True),
                           allow_tail=True, threads=cfg.threads)
    return {"command": "norm", **rep.to_json()}, rep.to_csv()


def cmd_bloch(cfg: RunConfig):
    f = resolve_function(_need(cfg.f, "--f"))
    grid = cfg.rule(64, 64, 0.999)
    value = norms.bloch_norm(f, cfg.units(), grid)
    return {"command": "bloch", "value": value, "rule": grid.descriptor(), "sphere": cfg.sphere}, None


def cmd_bmo(cfg: RunConfig):
    f = resolve_function(_need(cfg.f, "--f"))
    if cfg.p <= 1:
        raise DomainError("BMO exponent must satisfy p > 1")
    rule = cfg.rule(24, 24, 0.999)
    rows = [(u, norms.bmo_norm(f, cfg.p, BMO_RADIUS, u, rule)) for u in cfg.units()]
    value = max(v for _, v in rows)
    csv = "unit_x,unit_y,unit_z,bmo\n" + "".join(f"{u.ix!r},{u.iy!r},{u.iz!r},{v!r}\n" for u, v in rows)
    return {"command": "bmo", "value": value, "p": cfg.p, "radius": BMO_RADIUS, "rule": rule.descriptor()}, csv


def cmd_verify(cfg: RunConfig):
    from .verify import run_verify
    results = run_verify(cfg.seed, echo=print)
    ok = all(r.passed for r in results)
    table = "check,status,margin\n" + "".join(
        f"{r.name},{'PASS' if r.passed else 'FAIL'},{r.margin!r}\n" for r in results)
    report = {"command": "verify", "seed": cfg.seed, "passed": ok,
              "checks": [{"name": r.name, "passed": r.passed, "margin": r.margin} for r in results]}
    return report, table


def cmd_compose(cfg: RunConfig):
    phi = resolve_selfmap(_need(cfg.phi, "--phi"))
    rule = cfg.rule(128, 128, 1.0 - 1e-4, True)
    rep = operators.analyze_operator(phi, cfg.p, cfg.alpha, _grid(cfg), cfg.units(), rule)
    out = {"command": "compose", **rep.to_json()}
    out.pop("traces")
    if cfg.f:
        f = resolve_function(cfg.f)
        out["besov_norm_of_composition"] = operators.besov_norm_of_composition(f, phi, cfg.p, cfg.units(), rule)
    return out, rep.trace_csv()


def cmd_essnorm(cfg: RunConfig):
    phi = resolve_selfmap(_need(cfg.phi, "--phi"))
    res = operators.essential_norm_bounds(phi, cfg.p, cfg.alpha, _grid(cfg), cfg.rule(128, 128, 1.0 - 1e-4),
                                          units=[phi.unit])
    report = {
        "command": "essnorm", "p": cfg.p, "alpha": cfg.alpha,
        "lower": res.lower, "upper": res.upper, "c_cal": res.c_cal,
        "ring_max": [[r, v] for r, v in res.ring_max], "decreasing": res.decreasing,
        "tail_projection": [[a.real, a.imag, v] for a, v in res.tail_projection.items()],
    }
    csv = "abs_a,angle,K_a\n" + "".join(
        f"{abs(a)!r},{float(np.angle(a))!r},{v!r}\n" for a, v in res.per_a.items())
    return report, csv


def cmd_carleson(cfg: RunConfig):
    phi = resolve_selfmap(_need(cfg.phi, "--phi"))
    mu = operators.pullback_measure(phi, cfg.p, cfg.rule(64, 64, 0.999))
    family = [resolve_function(f"monomial:{m}") for m in (1, 2, 3)]
    family += [mobius_exact(phi.unit.slice_point(a)) for a in (0.5, 0.9j)]
    if cfg.f:
        family.append(resolve_function(cfg.f))
    rule = build_rule(cfg.rule_radial or 128, cfg.rule_angular or 128, 1.0 - 1e-4, True)
    res = operators.carleson_constant(mu, cfg.p, family, cfg.units(), rule)
    return {"command": "carleson", "p": cfg.p, "M": res.M, "M1": res.M1, "M2": res.M2,
            "M1_complex": res.M1_complex, "M2_complex": res.M2_complex,
            "argmax": res.argmax, "atoms": int(mu.points.size), "mass": mu.total_mass}, None


HANDLERS = {
    "norm": cmd_norm, "bloch": cmd_bloch, "bmo": cmd_bmo, "verify": cmd_verify,
    "compose": cmd_compose, "essnorm": cmd_essnorm, "carleson": cmd_carleson,
}


def _write_outputs(report: dict, csv: str | None, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if out is None:
        if report.get("command") != "verify":
            sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    if csv is not None:
        path.with_suffix(".csv").write_text(csv)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "code": code, "message": message}) + "\n")
    return code


def run(cfg: RunConfig) -> int:
    try:
        report, csv = HANDLERS[cfg.command](cfg)
    except DomainError as exc:
        return _fail(EXIT_DOMAIN, "domain", str(exc))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except ValueError as exc:  # malformed numeric literals in specs
        return _fail(EXIT_DOMAIN, "domain", str(exc))
    try:
        _write_outputs(report, csv, cfg.out)
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    if cfg.command == "verify" and not report["passed"]:
        return _fail(EXIT_VERIFY, "verify", "one or more checks failed")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        sys.stderr.write(build_parser().format_usage())
        return _fail(EXIT_USAGE, "usage", str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
