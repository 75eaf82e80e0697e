"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records a ``criterion N: PASS/FAIL`` line, repeated in the
terminal summary.
"""
import time

import numpy as np
import pytest

from slicereg.norms import besov_norm, besov_seminorm_slice
from slicereg.operators import (
    DiscreteMeasure, a_grid, boundedness_functional, carleson_constant, compactness_diagnostic,
    essential_norm_bounds, self_map,
)
from slicereg.quadrature import build_rule
from slicereg.quaternion_core import Quaternion, UNIT_I, q_inv, qabs_arr, sample_sphere, slice_decompose
from slicereg.slice_series import (
    PowerSeries, eval_series, extend, mobius_exact, restriction, star_mul, star_reciprocal,
)
from slicereg.verify import coefficient_stability, lipschitz_stability, random_ball_point, random_series, random_unit

pytestmark = pytest.mark.acceptance
ZERO = [0, 0, 0, 0]


def test_criterion_01_besov_anchor(criterion):
    with criterion(1) as c:
        f = PowerSeries([ZERO, [1, 0, 0, 0]])
        t0 = time.perf_counter()
        rule = build_rule(128, 128, 1 - 1e-4, extrapolate=True)
        errs = []
        for p in (1.5, 2.0, 3.0):
            exact = 0.0 + (1.0 / (p - 1.0)) ** (1.0 / p)
            errs.append(abs(besov_norm(f, p, rule=rule).value - exact) / exact)
        dt = time.perf_counter() - t0
        c.detail = f"max rel err {max(errs):.2e} (tol 5e-3), {dt:.2f}s (limit 5s)"
        assert max(errs) < 5e-3 and dt < 5.0


def test_criterion_02_norm_equivalence(criterion):
    with criterion(2) as c:
        rng = np.random.default_rng(2)
        sphere = sample_sphere(32, 2)
        rule = build_rule(128, 128, 1 - 1e-4, extrapolate=True)
        t0 = time.perf_counter()
        worst = np.inf
        for _ in range(50):
            f = random_series(rng, 8)
            for p in (1.5, 2.0, 3.0):
                per = [v for _, v in besov_norm(f, p, sphere, rule).per_slice]
                single = besov_seminorm_slice(f, p, UNIT_I, rule)
                top, low = max(per), min(min(per), single)
                worst = min(worst, (top - single) / top, (2.0 ** p * low - top) / top)
        dt = time.perf_counter() - t0
        c.detail = f"min relative margin {worst:.3g} (need >= -1e-6), {dt:.1f}s (limit 60s)"
        assert worst >= -1e-6 and dt < 60.0


def test_criterion_03_star_algebra(criterion):
    with criterion(3) as c:
        rng = np.random.default_rng(3)
        resid = 0.0
        for _ in range(100):
            coeffs = rng.normal(size=(9, 4)) * 0.5
            a0 = rng.normal(size=4)
            coeffs[0] = a0 / np.linalg.norm(a0) * rng.uniform(0.5, 2.0)
            f = PowerSeries(coeffs)
            prod = star_mul(f, star_reciprocal(f)).coeffs[:9].copy()
            prod[0, 0] -= 1.0
            resid = max(resid, float(np.max(qabs_arr(prod))))
        twist = 0.0
        for _ in range(100):
            f, g, q = random_series(rng), random_series(rng), random_ball_point(rng)
            fq = eval_series(f, q)
            moved = q_inv(fq) * q * fq
            twist = max(twist, abs(eval_series(star_mul(f, g), q) - fq * eval_series(g, moved)))
        c.detail = f"reciprocal residual {resid:.2e}, twisted product err {twist:.2e} (tol 1e-10)"
        assert resid < 1e-10 and twist < 1e-10


def test_criterion_04_representation_round_trip(criterion):
    with criterion(4) as c:
        rng = np.random.default_rng(4)
        err = 0.0
        for _ in range(100):
            f, i, q = random_series(rng), random_unit(rng), random_ball_point(rng)
            err = max(err, abs(extend(restriction(f, i), i, q) - eval_series(f, q)))
        c.detail = f"max err {err:.2e} (tol 1e-11)"
        assert err < 1e-11


def test_criterion_05_mobius(criterion):
    with criterion(5) as c:
        rng = np.random.default_rng(5)
        swap = invol = 0.0
        for _ in range(50):
            a = random_ball_point(rng, 0.99)
            s = mobius_exact(a)
            swap = max(swap, abs(eval_series(s, a)), abs(eval_series(s, Quaternion()) - a))
            unit = slice_decompose(a).unit
            z = unit.slice_point(0.9 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))
            invol = max(invol, abs(eval_series(s, eval_series(s, z)) - z))
        c.detail = f"swap err {swap:.2e} (tol 1e-10), involution err {invol:.2e} (tol 1e-9)"
        assert swap < 1e-10 and invol < 1e-9


def test_criterion_06_boundedness_identity(criterion):
    with criterion(6) as c:
        grid = a_grid((0.9, 0.99, 0.999), 16)
        res = boundedness_functional(self_map([ZERO, [1, 0, 0, 0]]), 2.0, grid, sample_sphere(8))
        rel = abs(res.value - 2.0) / 2.0
        c.detail = f"value {res.value:.6f}, rel err {rel:.2e} (tol 2e-2)"
        assert rel < 2e-2


def test_criterion_07_compactness(criterion):
    with criterion(7) as c:
        cases = {
            "q/2": ([ZERO, [0.5, 0, 0, 0]], "compact-evidence"),
            "id": ([ZERO, [1, 0, 0, 0]], "not-compact-evidence"),
            "constant": ([[0.3, 0.2, 0, 0]], "compact-evidence"),
        }
        seen = {}
        for seed in (0, 1, 2):
            units = sample_sphere(4, seed)
            for name, (coeffs, _) in cases.items():
                res = compactness_diagnostic(self_map(coeffs), 2.0, units=units)
                seen.setdefault(name, set()).add((res.verdict, res.shortcut_verdict, res.sequence_verdict))
        c.detail = "; ".join(f"{k}: {sorted(v)[0][0]}" for k, v in seen.items())
        for name, (_, want) in cases.items():
            assert len(seen[name]) == 1, f"{name} verdict depends on seed"
            verdict, shortcut, sequence = next(iter(seen[name]))
            assert verdict == want
        # both routes agree on the contracting map
        _, shortcut, sequence = next(iter(seen["q/2"]))
        assert shortcut == sequence == "compact-evidence"


def test_criterion_08_essential_norm(criterion):
    with criterion(8) as c:
        maps = {
            "q/2": [ZERO, [0.5, 0, 0, 0]],
            "id": [ZERO, [1, 0, 0, 0]],
            "constant": [[0.3, 0.2, 0, 0]],
            "q^2": [ZERO, ZERO, [1, 0, 0, 0]],
            "mixed": [[0.1, 0.1, 0, 0], [0.4, 0, 0, 0], [0.3, 0, 0, 0]],
        }
        rule = build_rule(128, 128, 1 - 1e-4)
        res = {k: essential_norm_bounds(self_map(v), 2.0, 0.0, rule=rule, tail_diagnostic=False)
               for k, v in maps.items()}
        half, ident = res["q/2"], res["id"]
        tail = [v for r, v in ident.ring_max if r >= 0.99]
        c.detail = (f"q/2 [{half.lower:.2e}, {half.upper:.2e}] decreasing={half.decreasing}; "
                    f"id tail lower min {min(tail):.3f}")
        assert all(r.lower <= r.upper for r in res.values())
        assert half.lower < 0.05 and half.upper < 0.05 and half.decreasing
        assert min(tail) >= 0.1


def test_criterion_09_carleson_split(criterion):
    with criterion(9) as c:
        rng = np.random.default_rng(9)
        pts = 0.8 * np.sqrt(rng.random(12)) * np.exp(2j * np.pi * rng.random(12))
        mu = DiscreteMeasure(pts, rng.random(12), np.zeros(12), UNIT_I)
        fam = [random_series(rng, 5) for _ in range(4)]
        res = carleson_constant(mu, 2.0, fam, sample_sphere(4, 9), build_rule(64, 64, extrapolate=True))
        rel = abs(res.M - res.M1) / res.M
        c.detail = f"M2 = {res.M2!r}, |M - M1|/M = {rel:.2e} (tol 1e-12)"
        assert res.M2 == 0.0 and rel < 1e-12


def test_criterion_10_constant_stability(criterion):
    with criterion(10) as c:
        changes = []
        for seed in (10, 11):
            f = random_series(np.random.default_rng(seed), 6)
            small, big = lipschitz_stability(f, 2.0, 500, seed)
            changes.append(abs(big - small) / big)
        f = mobius_exact(UNIT_I.slice_point(0.9))
        small, big = lipschitz_stability(f, 3.0, 500, 12)
        changes.append(abs(big - small) / big)
        for p in (2.0, 3.0):
            small, big = coefficient_stability(p, 16)
            changes.append(abs(big - small) / big)
        c.detail = f"max relative change {max(changes):.3g} (tol 5e-2)"
        assert max(changes) < 5e-2


def test_criterion_11_verify_suite(criterion):
    from slicereg.verify import run_verify
    with criterion(11) as c:
        t0 = time.perf_counter()
        results = run_verify(7)
        dt = time.perf_counter() - t0
        failed = [r.name for r in results if not r.passed]
        c.detail = f"{len(results) - len(failed)}/{len(results)} checks, {dt:.0f}s (limit 300s)"
        assert not failed and dt < 300.0, failed
