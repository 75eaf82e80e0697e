"""Invariant suite across all modules, run by ``slicereg verify``.

Each check returns a :class:`Check` with a signed margin: tolerance minus
observed error (or the smallest slack of an inequality), so a check
passes exactly when its margin is nonnegative.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .norms import (
    besov_norm,
    besov_seminorm_slice,
    bmo_norm,
    coeff_bound_report,
    lipschitz_check,
    lp_invariant_norm,
    oscillation_bmo_field,
    oscillation_lambda_field,
    random_slice_pairs,
)
from .operators import (
    DiscreteMeasure,
    ComposedFunction,
    a_grid,
    boundedness_functional,
    carleson_constant,
    compactness_diagnostic,
    compose,
    compose_derivative,
    essential_norm_bounds,
    pullback_measure,
    self_map,
)
from .quadrature import bergman_metric, build_rule, integrate_invariant, mobius_disk
from .quaternion_core import (
    ImaginaryUnit,
    Quaternion,
    UNIT_I,
    q_mul,
    qabs_arr,
    qmul_arr,
    sample_sphere,
    slice_decompose,
)
from .slice_series import (
    PowerSeries,
    eval_series,
    extend,
    mobius_exact,
    regular_conjugate,
    restriction,
    split_quaternions,
    star_mul,
    star_reciprocal,
)


@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} margin {self.margin:.3g}  ({self.seconds:.1f}s) {self.detail}".rstrip()


def _tol_check(name: str, err: float, tol: float, detail: str = "") -> Check:
    return Check(name, bool(err <= tol), tol - err, detail or f"err {err:.3g} tol {tol:.3g}")


# -- random generators -------------------------------------------------------

def random_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=(n, 4))


def random_unit(rng: np.random.Generator) -> ImaginaryUnit:
    return ImaginaryUnit.from_array(rng.normal(size=3))


def random_ball_point(rng: np.random.Generator, radius: float = 0.95) -> Quaternion:
    v = rng.normal(size=4)
    v *= radius * rng.random() ** 0.25 / np.linalg.norm(v)
    return Quaternion.from_array(v)


def random_series(rng: np.random.Generator, degree: int = 8, scale: float = 0.5) -> PowerSeries:
    return PowerSeries(rng.normal(size=(degree + 1, 4)) * scale)


def random_slice_mobius(rng: np.random.Generator, radius: float = 0.9):
    a = random_ball_point(rng, radius)
    return a, mobius_exact(a)


def slice_coord(q: np.ndarray, unit: ImaginaryUnit) -> complex:
    return complex(q[0], float(np.dot(q[1:], unit.vector())))


def van_der_corput(n: int) -> np.ndarray:
    from .norms import _van_der_corput
    return _van_der_corput(n)


# -- quaternion_core -----------------------------------------------------------

def check_norm_multiplicative(rng) -> Check:
    a, b = random_quaternions(rng, 10_000), random_quaternions(rng, 10_000)
    lhs = qabs_arr(qmul_arr(a, b))
    rhs = qabs_arr(a) * qabs_arr(b)
    return _tol_check("norm multiplicativity", float(np.max(np.abs(lhs - rhs) / rhs)), 1e-12)


def check_associativity(rng) -> Check:
    a, b, c = (random_quaternions(rng, 10_000) for _ in range(3))
    l = qmul_arr(qmul_arr(a, b), c)
    r = qmul_arr(a, qmul_arr(b, c))
    scale = qabs_arr(a) * qabs_arr(b) * qabs_arr(c)
    return _tol_check("product associativity", float(np.max(qabs_arr(l - r) / scale)), 1e-12)


def check_slice_round_trip(rng) -> Check:
    err = 0.0
    for q in random_quaternions(rng, 1000):
        q = Quaternion.from_array(q)
        err = max(err, abs(slice_decompose(q).reconstruct() - q) / abs(q))
    return _tol_check("slice coordinates round trip", err, 1e-12)


def check_unit_square(rng) -> Check:
    err = 0.0
    for _ in range(1000):
        u = random_unit(rng).as_quaternion()
        err = max(err, abs(q_mul(u, u) + 1.0))
    return _tol_check("imaginary units square to -1", err, 1e-14)


# -- slice_series --------------------------------------------------------------

def check_representation_formula(rng) -> Check:
    err = 0.0
    for _ in range(100):
        f, i, q = random_series(rng), random_unit(rng), random_ball_point(rng)
        err = max(err, abs(extend(restriction(f, i), i, q) - eval_series(f, q)))
    return _tol_check("representation formula round trip", err, 1e-11)


def check_star_pointwise(rng) -> Check:
    err = 0.0
    for _ in range(100):
        f, g, q = random_series(rng), random_series(rng), random_ball_point(rng)
        fq = eval_series(f, q)
        if abs(fq) < 1e-8:
            continue
        moved = (fq.conj() / fq.norm2()) * q * fq
        err = max(err, abs(eval_series(star_mul(f, g), q) - fq * eval_series(g, moved)))
    return _tol_check("star product as twisted pointwise product", err, 1e-10)


def check_star_reciprocal(rng) -> Check:
    err = 0.0
    for _ in range(100):
        c = rng.normal(size=(9, 4)) * 0.5
        a0 = rng.normal(size=4)
        c[0] = a0 / np.linalg.norm(a0) * rng.uniform(0.5, 2.0)
        f = PowerSeries(c)
        prod = star_mul(f, star_reciprocal(f)).coeffs[:9].copy()
        prod[0, 0] -= 1.0
        err = max(err, float(np.max(qabs_arr(prod))))
    return _tol_check("star reciprocal residual", err, 1e-10)


def check_star_algebra(rng) -> Check:
    err = 0.0
    for _ in range(50):
        f, g, h = (random_series(rng, 5) for _ in range(3))
        assoc = star_mul(star_mul(f, g), h).coeffs - star_mul(f, star_mul(g, h)).coeffs
        dist = star_mul(f, g + h).coeffs - (star_mul(f, g) + star_mul(f, h)).coeffs
        err = max(err, float(np.max(np.abs(assoc))), float(np.max(np.abs(dist))))
    return _tol_check("star associativity and distributivity", err, 1e-12)


def check_conjugate(rng) -> Check:
    err = 0.0
    for _ in range(50):
        f = random_series(rng)
        err = max(err, float(np.max(np.abs(regular_conjugate(regular_conjugate(f)).coeffs - f.coeffs))))
        err = max(err, float(np.max(np.abs(star_mul(f, regular_conjugate(f)).coeffs[:, 1:]))))
    return _tol_check("regular conjugate involution and real symmetrization", err, 1e-12)


def check_mobius_points(rng) -> Check:
    err = 0.0
    for _ in range(50):
        a, s = random_slice_mobius(rng, 0.99)
        err = max(err, abs(eval_series(s, a)), abs(eval_series(s, Quaternion()) - a))
    return _tol_check("Mobius map swaps a and 0", err, 1e-10)


def check_mobius_involution(rng) -> Check:
    err = 0.0
    inside = 0.0
    for _ in range(50):
        a, s = random_slice_mobius(rng, 0.95)
        unit = slice_decompose(a).unit
        z = 0.95 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        w = slice_coord(s.on_slice(unit, np.array(z)), unit)
        back = slice_coord(s.on_slice(unit, np.array(w)), unit)
        err = max(err, abs(back - z))
        grid = build_rule(16, 32, 0.99).nodes
        inside = max(inside, float(np.max(qabs_arr(s.on_slice(unit, grid)))))
    c = _tol_check("Mobius map is a slice involution", err, 1e-9)
    if inside >= 1.0:
        return Check(c.name, False, 1.0 - inside, f"|sigma_a| reached {inside}")
    return c


# -- quadrature ----------------------------------------------------------------

def check_invariance(rng) -> Check:
    rule = build_rule()

    def bump(z):
        return np.clip(1.0 - np.abs(z) ** 2 / 0.81, 0.0, None) ** 4

    base = integrate_invariant(bump, rule)
    err = 0.0
    for a in (0.3, 0.6, 0.85):
        moved = integrate_invariant(lambda z: bump(mobius_disk(a, z)), rule, centers=[a])
        err = max(err, abs(moved - base) / base)
    return _tol_check("invariance of the Mobius-invariant measure", err, 5e-3)


def check_convergence_order(rng) -> Check:
    s = mobius_exact(0.7)
    r_max = 0.99

    def val(n):
        rule = build_rule(n, n, r_max)
        return besov_seminorm_slice(s, 2.0, UNIT_I, rule, allow_tail=True)

    ref = val(256)
    e1, e2 = abs(val(16) - ref), abs(val(32) - ref)
    ratio = e1 / max(e2, 1e-300)
    return Check("quadrature convergence order", bool(ratio >= 4.0), ratio - 4.0, f"error ratio {ratio:.3g}")


def check_triangle(rng) -> Check:
    pts = 0.999 * np.sqrt(rng.random((3, 10_000))) * np.exp(2j * math.pi * rng.random((3, 10_000)))
    x, y, z = pts
    slack = bergman_metric(x, y) + bergman_metric(y, z) - bergman_metric(x, z)
    m = float(np.min(slack))
    return Check("Bergman metric triangle inequality", bool(m >= -1e-12), m + 1e-12, f"min slack {m:.3g}")


# -- norms ---------------------------------------------------------------------

def check_norm_equivalence(rng, count: int = 50, units: int = 32) -> Check:
    sphere = sample_sphere(units, int(rng.integers(1 << 31)))
    rule = build_rule(extrapolate=True)
    worst = math.inf
    for _ in range(count):
        f = random_series(rng)
        for p in (1.5, 2.0, 3.0):
            rep = besov_norm(f, p, sphere, rule)
            single = besov_seminorm_slice(f, p, UNIT_I, rule)
            top = max(v for _, v in rep.per_slice)
            low = min(min(v for _, v in rep.per_slice), single)
            rel = max(top, 1e-300)
            worst = min(worst, (top - single) / rel, (2.0 ** p * low - top) / rel)
    return Check("slice versus ball norm equivalence", bool(worst >= -1e-6), worst + 1e-6,
                 f"min relative slack {worst:.3g}")


def check_splitting_bounds(rng) -> Check:
    worst = math.inf
    nodes = build_rule(24, 24, 0.99).nodes
    for _ in range(20):
        f, unit = random_series(rng), random_unit(rng)
        d = f.derivative_on_slice(unit, nodes)
        d1, d2 = split_quaternions(d, unit)
        full = qabs_arr(d)
        for p in (1.5, 2.0, 3.0):
            fp = full ** p
            lo = np.maximum(np.abs(d1), np.abs(d2)) ** p
            hi = 2.0 ** max(0.0, p - 1.0) * (np.abs(d1) ** p + np.abs(d2) ** p)
            scale = np.maximum(fp, 1e-300)
            worst = min(worst, float(np.min((fp - lo) / scale)), float(np.min((hi - fp) / scale)))
    return Check("splitting component bounds", bool(worst >= -1e-12), worst + 1e-12, f"min slack {worst:.3g}")


def check_bmo_slices(rng) -> Check:
    rule = build_rule(8, 8, 0.9)
    units = sample_sphere(6, 1)
    worst = math.inf
    p = 2.0
    fam = [random_series(rng, 4) for _ in range(3)] + [mobius_exact(random_ball_point(rng, 0.8))]
    for f in fam:
        per = [bmo_norm(f, p, 1.0, u, rule) ** p for u in units]
        ball = max(per)
        for v in per:
            worst = min(worst, (ball - v) / ball, (2.0 ** p * v - ball) / ball)
    return Check("BMO slice independence", bool(worst >= -1e-9), worst + 1e-9, f"min slack {worst:.3g}")


def coherence_family() -> list:
    fam = []
    for m in (1, 2, 3, 5):
        c = np.zeros((m + 1, 4))
        c[m, 0] = 1.0
        fam.append(PowerSeries(c))
    for a in (0.3, 0.6, 0.8):
        fam.append(mobius_exact(UNIT_I.slice_point(a)))
    return fam


def check_oscillation_coherence(rng) -> Check:
    p, r = 2.0, 0.5
    rule = build_rule(24, 24, 0.99)
    norms, lam, osc = [], [], []
    for f in coherence_family():
        norms.append(besov_norm(f, p, [UNIT_I], build_rule(extrapolate=True), allow_tail=True).value)
        lam.append(lp_invariant_norm(oscillation_lambda_field(f, r, UNIT_I, 16), p, UNIT_I, rule))
        osc.append(lp_invariant_norm(oscillation_bmo_field(f, p, r, UNIT_I, 6, 12), p, UNIT_I, rule))
    norms = np.array(norms)
    worst = math.inf
    for vals in (np.array(lam), np.array(osc)):
        if not np.all(np.isfinite(vals)):
            return Check("oscillation functionals track the Besov norm", False, -math.inf, "non-finite functional")
        fit = float(np.median(vals / norms))
        worst = min(worst, 3.0 - float(np.max(vals / (fit * norms))))
    return Check("oscillation functionals track the Besov norm", bool(worst >= 0), worst,
                 f"max outlier factor {3.0 - worst:.3g}")


def check_seminorm_scaling(rng) -> Check:
    rule = build_rule(32, 32, 0.99)
    err = 0.0
    for _ in range(10):
        f, unit, c = random_series(rng), random_unit(rng), rng.uniform(1.0, 3.0)
        for p in (1.5, 2.0, 3.0):
            base = besov_seminorm_slice(f, p, unit, rule)
            err = max(err, abs(besov_seminorm_slice(f.scale(c), p, unit, rule) / base - c ** p) / c ** p)
    return _tol_check("seminorm scales by c^p", err, 1e-12)


# -- operators -----------------------------------------------------------------

def check_compose_linearity(rng) -> Check:
    phi = self_map([[0.1, 0.2, 0, 0], [0.5, 0.1, 0, 0], [0.2, 0, 0, 0]])
    err = 0.0
    for _ in range(20):
        f, g = random_series(rng), random_series(rng)
        c = Quaternion.from_array(rng.normal(size=4))
        z = 0.9 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        lhs = compose(f + g.right_mul(c), phi, z)
        rhs = compose(f, phi, z) + compose(g, phi, z) * c
        err = max(err, abs(lhs - rhs))
    return _tol_check("composition is right linear", err, 1e-12)


def check_chain_rule(rng) -> Check:
    phi = self_map([[0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]])
    h = 1e-6
    err = 0.0
    for _ in range(10):
        f = random_series(rng, 6, 0.3)
        z = 0.6 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random())
        fd = (compose(f, phi, z + h) - compose(f, phi, z - h)) / (2 * h)
        err = max(err, abs(compose_derivative(f, phi, z) - fd))
    return _tol_check("slice chain rule against finite differences", err, 1e-7)


def check_composition_slices(rng) -> Check:
    phi = self_map([[0.1, 0.2, 0, 0], [0.6, 0, 0, 0]])
    rule = build_rule(64, 64, extrapolate=True)
    units = sample_sphere(8, 2)
    p = 2.0
    worst = math.inf
    for a in a_grid((0.5, 0.9), 4):
        g = ComposedFunction(mobius_exact(UNIT_I.slice_point(a)), phi)
        rep = besov_norm(g, p, units, rule)
        single = besov_seminorm_slice(g, p, UNIT_I, rule)
        ratio = rep.seminorm_power / single
        worst = min(worst, ratio - 1.0 + 1e-9, 2.0 ** (p + 1) - ratio)
    return Check("composed Mobius seminorm slice sandwich", bool(worst >= 0), worst, f"min slack {worst:.3g}")


def check_pullback(rng) -> Check:
    phi = self_map([[0.1, 0, 0, 0], [0.5, 0.2, 0, 0], [0.2, 0, 0, 0]])
    p = 2.0
    rule = build_rule(64, 64, 0.999)
    mu = pullback_measure(phi, p, rule)
    err = 0.0
    for _ in range(20):
        f = random_series(rng)
        lhs = float(np.sum(mu.w1 * qabs_arr(f.derivative_on_slice(UNIT_I, mu.points)) ** p))
        rhs = besov_seminorm_slice(ComposedFunction(f, phi), p, UNIT_I, rule)
        err = max(err, abs(lhs - rhs) / rhs)
    return _tol_check("pullback measure reproduces composed seminorm", err, 1e-2)


def check_essential_norm(rng) -> Check:
    p = 2.0
    rule = build_rule(64, 64)
    worst = math.inf
    details = []
    for coeffs in ([[0, 0, 0, 0], [0.5, 0, 0, 0]], [[0.1, 0, 0, 0], [0.3, 0, 0, 0], [0.2, 0, 0, 0]]):
        phi = self_map(coeffs)
        coarse = essential_norm_bounds(phi, p, 0.0, a_grid((0.9, 0.99), 8), rule, tail_diagnostic=False)
        fine = essential_norm_bounds(phi, p, 0.0, a_grid((0.9, 0.99, 0.999), 8), rule, tail_diagnostic=False)
        worst = min(worst, coarse.upper - coarse.lower, fine.upper - fine.lower,
                    coarse.upper - fine.upper, coarse.lower - fine.lower)
        details.append(f"{fine.upper:.2g}")
    ident = essential_norm_bounds(self_map([[0, 0, 0, 0], [1, 0, 0, 0]]), p, 0.0, a_grid((0.9, 0.99), 8),
                                  rule, tail_diagnostic=False)
    worst = min(worst, ident.upper - ident.lower)
    return Check("essential norm bounds ordered and decaying", bool(worst >= 0), worst,
                 "upper " + ",".join(details))


def check_carleson_homogeneity(rng) -> Check:
    p = 2.0
    pts = 0.8 * np.sqrt(rng.random(12)) * np.exp(2j * math.pi * rng.random(12))
    mu = DiscreteMeasure(pts, rng.random(12), np.zeros(12), UNIT_I)
    rule = build_rule(64, 64, extrapolate=True)
    fam = [random_series(rng, 4) for _ in range(3)]
    base = carleson_constant(mu, p, fam, [UNIT_I], rule).M
    scaled_f = carleson_constant(mu, p, [f.scale(3.0) for f in fam], [UNIT_I], rule).M
    scaled_mu = carleson_constant(mu.scaled(2.5), p, fam, [UNIT_I], rule).M
    err = max(abs(scaled_f - base) / base, abs(scaled_mu - 2.5 * base) / (2.5 * base))
    return _tol_check("Carleson constant homogeneity", err, 1e-12)


# -- acceptance-level anchors --------------------------------------------------

def check_besov_anchor(rng) -> Check:
    f = PowerSeries([[0, 0, 0, 0], [1, 0, 0, 0]])
    err = 0.0
    for p in (1.5, 2.0, 3.0):
        exact = (1.0 / (p - 1.0)) ** (1.0 / p)
        err = max(err, abs(besov_norm(f, p).value - exact) / exact)
    return _tol_check("closed-form Besov anchor", err, 5e-3)


def check_boundedness(rng) -> Check:
    res = boundedness_functional(self_map([[0, 0, 0, 0], [1, 0, 0, 0]]), 2.0, units=sample_sphere(8))
    return _tol_check("boundedness functional of the identity", abs(res.value - 2.0) / 2.0, 2e-2,
                      f"value {res.value:.6g} {res.verdict}")


def check_compactness(rng) -> Check:
    units = sample_sphere(4, int(rng.integers(1 << 31)))
    cases = [
        ([[0, 0, 0, 0], [0.5, 0, 0, 0]], "compact-evidence"),
        ([[0, 0, 0, 0], [1, 0, 0, 0]], "not-compact-evidence"),
        ([[0.3, 0.2, 0, 0]], "compact-evidence"),
    ]
    bad = []
    for coeffs, want in cases:
        res = compactness_diagnostic(self_map(coeffs), 2.0, units=units)
        if res.verdict != want:
            bad.append(f"{coeffs}: {res.verdict}")
        if want == "compact-evidence" and res.sequence_verdict != want:
            bad.append(f"{coeffs} sequence: {res.sequence_verdict}")
    return Check("compactness verdicts", not bad, 0.0 if not bad else -1.0, "; ".join(bad))


def check_carleson_split(rng) -> Check:
    p = 2.0
    pts = 0.7 * np.sqrt(rng.random(10)) * np.exp(2j * math.pi * rng.random(10))
    mu = DiscreteMeasure(pts, rng.random(10), np.zeros(10), UNIT_I)
    fam = [PowerSeries(rng.normal(size=(5, 1)) * np.array([[1.0, 0, 0, 0]])) for _ in range(4)]
    res = carleson_constant(mu, p, fam, [UNIT_I], build_rule(64, 64, extrapolate=True))
    err = abs(res.M - res.M1) / max(res.M, 1e-300)
    c = _tol_check("Carleson component split", err, 1e-12, f"M {res.M:.6g} M1 {res.M1:.6g} M2 {res.M2}")
    if res.M2 != 0.0:
        return Check(c.name, False, -res.M2, c.detail)
    return c


def lipschitz_stability(f, p: float, n: int, seed: int) -> tuple[float, float]:
    rule = build_rule(extrapolate=True)
    norm = besov_norm(f, p, [UNIT_I], rule, allow_tail=True).value
    small = lipschitz_check(f, p, UNIT_I, random_slice_pairs(n, seed), norm).max_ratio
    big = lipschitz_check(f, p, UNIT_I, random_slice_pairs(2 * n, seed), norm).max_ratio
    return small, big


def coefficient_family(n: int, p: float) -> list:
    radii = 0.05 + 0.94 * van_der_corput(n + 1)[1:]
    return [mobius_exact(UNIT_I.slice_point(float(r))) for r in radii]


def coefficient_stability(p: float, n: int) -> tuple[float, float]:
    rule = build_rule(extrapolate=True)

    def sup(fam):
        return max(coeff_bound_report(f, p, [UNIT_I], rule, degree=512).sup_n for f in fam)

    return sup(coefficient_family(n, p)), sup(coefficient_family(2 * n, p))


def check_stability(rng) -> Check:
    p = 2.0
    seed = int(rng.integers(1 << 31))
    f = random_series(np.random.default_rng(seed), 6)
    l1, l2 = lipschitz_stability(f, p, 200, seed)
    c1, c2 = coefficient_stability(p, 16)
    err = max(abs(l2 - l1) / l2, abs(c2 - c1) / c2)
    return _tol_check("Lipschitz and coefficient constants stable under refinement", err, 5e-2,
                      f"lipschitz {l1:.4g}->{l2:.4g} coeff {c1:.4g}->{c2:.4g}")


CHECKS: list[Callable] = [
    check_norm_multiplicative, check_associativity, check_slice_round_trip, check_unit_square,
    check_representation_formula, check_star_pointwise, check_star_reciprocal, check_star_algebra,
    check_conjugate, check_mobius_points, check_mobius_involution,
    check_invariance, check_convergence_order, check_triangle,
    check_norm_equivalence, check_splitting_bounds, check_bmo_slices, check_oscillation_coherence,
    check_seminorm_scaling,
    check_compose_linearity, check_chain_rule, check_composition_slices, check_pullback,
    check_essential_norm, check_carleson_homogeneity,
    check_besov_anchor, check_boundedness, check_compactness, check_carleson_split, check_stability,
]


def run_verify(seed: int = 0, checks=None, echo=None) -> list[Check]:
    """Run every check with its own generator spawned from ``seed``."""
    checks = list(checks) if checks is not None else CHECKS
    streams = np.random.SeedSequence(seed).spawn(len(checks))
    out = []
    for fn, ss in zip(checks, streams):
        t0 = time.perf_counter()
        try:
            res = fn(np.random.default_rng(ss))
        except Exception as exc:  # a crash is a failed check, not an aborted suite
            res = Check(fn.__name__.removeprefix("check_").replace("_", " "), False, -math.inf,
                        f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - t0
        out.append(res)
        if echo:
            echo(res.line())
    return out
