"""Besov, Bloch and BMO norms of slice-regular functions, plus the
empirical Lipschitz and coefficient constants.

Integrals and suprema over the sphere of imaginary units are replaced by
maxima over a finite sample of units (see ``quaternion_core.sample_sphere``).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quadrature import (
    BergmanDisk,
    DiskRule,
    bergman_disk_nodes,
    bergman_disk_rule,
    bergman_metric,
    build_rule,
    integrate_invariant,
    mobius_disk,
)
from .quaternion_core import (
    DomainError,
    ImaginaryUnit,
    qabs_arr,
    sample_sphere,
    slice_decompose,
    as_quaternion,
)
from .slice_series import PowerSeries, SliceFunction, SliceRational, stem_to_quaternions

DEFAULT_SPHERE = 32
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _map_units(fn, units, threads: int | None):
    if threads is None or threads <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, units))


def _check_tail(f: SliceFunction, rule: DiskRule, allow_tail: bool) -> dict:
    flags = {}
    if isinstance(f, PowerSeries) and f.truncated:
        bound = f.tail_bound(rule.r_max)
        flags["tail_bound_at_rmax"] = bound
        if not allow_tail and bound > 1e-9:
            raise DomainError(
                f"truncation tail bound {bound:.3g} at r_max={rule.r_max}; pass allow_tail to accept it"
            )
    return flags


def besov_integrand(f: SliceFunction, p: float, unit: ImaginaryUnit) -> Callable[[np.ndarray], np.ndarray]:
    """``z -> |(1 - |z|^2) df/dx0(x + I y)|^p`` on the slice of ``unit``."""
    def g(zeta):
        d = qabs_arr(f.derivative_on_slice(unit, zeta))
        return ((1.0 - np.abs(zeta) ** 2) * d) ** p
    return g


def besov_seminorm_slice(f: SliceFunction, p: float, i: ImaginaryUnit, rule: DiskRule,
                         allow_tail: bool = False) -> float:
    """The slice integral ``int |(1-|z|^2) f'|^p dlambda`` (p-th power of the seminorm)."""
    if p <= 1:
        raise DomainError("Besov exponent must satisfy p > 1")
    _check_tail(f, rule, allow_tail)
    return integrate_invariant(besov_integrand(f, p, i), rule, i,
                               centers=f.hotspots(), boundary_exponent=p - 1.0)


@dataclass
class NormReport:
    value: float
    per_slice: list = field(default_factory=list)
    rule_used: dict = field(default_factory=dict)
    truncation_flags: dict = field(default_factory=dict)
    p: float | None = None
    at_zero: float = 0.0

    @property
    def seminorm_power(self) -> float:
        return max((v for _, v in self.per_slice), default=0.0)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "at_zero": self.at_zero,
            "per_slice": [{"unit": u.to_list(), "seminorm": v} for u, v in self.per_slice],
            "rule": self.rule_used,
            "truncation_flags": self.truncation_flags,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["unit_x", "unit_y", "unit_z", "seminorm"])
        for u, v in self.per_slice:
            w.writerow([repr(u.ix), repr(u.iy), repr(u.iz), repr(v)])
        return buf.getvalue()


def besov_integrand_units(f: SliceFunction, p: float, units: Sequence[ImaginaryUnit]):
    """Integrand for several slices at once; one stem evaluation serves every unit."""
    def g(zeta):
        d = f.stem_derivative(zeta)
        w = (1.0 - np.abs(zeta) ** 2)
        return np.stack([(w * qabs_arr(stem_to_quaternions(d, u))) ** p for u in units])
    return g


def besov_slice_integrals(f: SliceFunction, p: float, units: Sequence[ImaginaryUnit],
                          rule: DiskRule, threads: int | None = None) -> list[float]:
    units = list(units)
    if threads and threads > 1 and len(units) > 1:
        chunks = [units[k::threads] for k in range(threads) if units[k::threads]]
        parts = _map_units(
            lambda ch: integrate_invariant(besov_integrand_units(f, p, ch), rule, None,
                                           centers=f.hotspots(), boundary_exponent=p - 1.0),
            chunks, threads)
        vals = [0.0] * len(units)
        for k, (ch, part) in enumerate(zip(chunks, parts)):
            for m, v in enumerate(np.atleast_1d(part)):
                vals[k + m * threads] = float(v)
        return vals
    out = integrate_invariant(besov_integrand_units(f, p, units), rule, None,
                              centers=f.hotspots(), boundary_exponent=p - 1.0)
    return [float(v) for v in np.atleast_1d(out)]


def besov_norm(f: SliceFunction, p: float, units: Sequence[ImaginaryUnit] | None = None,
               rule: DiskRule | None = None, allow_tail: bool = False,
               threads: int | None = None) -> NormReport:
    """``|f(0)| + (max over units of the slice integral)^(1/p)``."""
    if p <= 1:
        raise DomainError("Besov exponent must satisfy p > 1")
    units = list(units) if units is not None else sample_sphere(DEFAULT_SPHERE)
    if not units:
        raise DomainError("need at least one imaginary unit")
    rule = rule or build_rule(extrapolate=True)
    flags = _check_tail(f, rule, allow_tail)
    vals = besov_slice_integrals(f, p, units, rule, threads)
    f0 = abs(f.at_zero())
    value = f0 + max(max(vals), 0.0) ** (1.0 / p)
    return NormReport(value, list(zip(units, vals)), rule.descriptor(), flags, p, f0)


def single_slice_norm(f: SliceFunction, p: float, i: ImaginaryUnit, rule: DiskRule,
                      allow_tail: bool = False) -> float:
    """``|f(0)| + (slice integral on B_i)^(1/p)``."""
    return abs(f.at_zero()) + besov_seminorm_slice(f, p, i, rule, allow_tail) ** (1.0 / p)


def sphere_convergence(f: SliceFunction, p: float, rule: DiskRule, m: int = DEFAULT_SPHERE,
                       seed: int = 0) -> float:
    """Relative change of the Besov norm from ``m`` to ``2m`` sampled units."""
    a = besov_norm(f, p, sample_sphere(m, seed), rule).value
    b = besov_norm(f, p, sample_sphere(2 * m, seed), rule).value
    return abs(b - a) / max(abs(b), 1e-300)


# -- suprema ---------------------------------------------------------------

def _golden_max(h: Callable[[float], float], lo: float, hi: float, iters: int = 40) -> tuple[float, float]:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    hc, hd = h(c), h(d)
    for _ in range(iters):
        if hc >= hd:
            b, d, hd = d, c, hc
            c = b - GOLDEN * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, d, hd
            d = a + GOLDEN * (b - a)
            hd = h(d)
    x = (a + b) / 2.0
    return x, h(x)


def refine_sup(h: Callable[[np.ndarray], np.ndarray], z0: complex, dr: float, dtheta: float,
               r_cap: float, sweeps: int = 3) -> tuple[complex, float]:
    """Alternating golden-section search in radius and angle around ``z0``."""
    r, th = abs(z0), float(np.angle(z0))
    best = float(h(np.array([z0]))[0])
    for _ in range(sweeps):
        lo, hi = max(r - dr, 0.0), min(r + dr, r_cap)
        if hi > lo:
            r_new, v = _golden_max(lambda s: float(h(np.array([s * np.exp(1j * th)]))[0]), lo, hi)
            if v > best:
                best, r = v, r_new
        t_new, v = _golden_max(lambda t: float(h(np.array([r * np.exp(1j * t)]))[0]), th - dtheta, th + dtheta)
        if v > best:
            best, th = v, t_new
        dr *= 0.5
        dtheta *= 0.5
    return r * np.exp(1j * th), best


def bloch_seminorm_slice(f: SliceFunction, unit: ImaginaryUnit, grid: DiskRule,
                         refine: bool = True) -> tuple[float, complex]:
    """``sup (1 - |z|^2) |f'(z)|`` on one slice, with its maximizer."""
    def h(zeta):
        return (1.0 - np.abs(zeta) ** 2) * qabs_arr(f.derivative_on_slice(unit, zeta))

    cand = grid.nodes
    spots = [c for c in f.hotspots() if abs(c) < 1.0]
    if spots:
        cand = np.concatenate([cand, np.array(spots, dtype=complex)])
    vals = h(cand)
    k = int(np.argmax(vals))
    z0, best = complex(cand[k]), float(vals[k])
    if refine:
        dr = max(grid.r_max / grid.radial_nodes, 1e-3 * (1.0 - abs(z0)))
        dth = 2.0 * math.pi / grid.angular_nodes
        z1, v1 = refine_sup(h, z0, dr, dth, grid.r_max)
        if v1 > best:
            z0, best = z1, v1
    return best, z0


def bloch_seminorm_units(f: SliceFunction, units: Sequence[ImaginaryUnit], grid: DiskRule,
                         refine: bool = True) -> tuple[float, ImaginaryUnit, complex]:
    """Sup of ``(1 - |z|^2)|f'(z)|`` over several slices.

    One stem evaluation serves all units; only the winning slice is refined.
    """
    units = list(units)
    cand = grid.nodes
    spots = [c for c in f.hotspots() if abs(c) < 1.0]
    if spots:
        cand = np.concatenate([cand, np.array(spots, dtype=complex)])
    d = f.stem_derivative(cand)
    w = 1.0 - np.abs(cand) ** 2
    vals = np.stack([w * qabs_arr(stem_to_quaternions(d, u)) for u in units])
    ku, kz = np.unravel_index(int(np.argmax(vals)), vals.shape)
    unit, z0, best = units[ku], complex(cand[kz]), float(vals[ku, kz])
    if refine:
        def h(zeta):
            return (1.0 - np.abs(zeta) ** 2) * qabs_arr(f.derivative_on_slice(unit, zeta))
        dr = max(grid.r_max / grid.radial_nodes, 1e-3 * (1.0 - abs(z0)))
        z1, v1 = refine_sup(h, z0, dr, 2.0 * math.pi / grid.angular_nodes, grid.r_max)
        if v1 > best:
            z0, best = z1, v1
    return best, unit, z0


def bloch_norm(f: SliceFunction, units: Sequence[ImaginaryUnit] | None = None,
               grid: DiskRule | None = None, refine: bool = True) -> float:
    """``|f(0)| + sup over units and grid of (1 - |z|^2)|f'(z)|``."""
    units = list(units) if units is not None else sample_sphere(DEFAULT_SPHERE)
    grid = grid or build_rule(64, 64, 0.999)
    sup = bloch_seminorm_units(f, units, grid, refine)[0]
    return abs(f.at_zero()) + sup


# -- BMO and oscillation ------------------------------------------------------

def _disk_quadrature(d: BergmanDisk, rule: DiskRule | None, method: str):
    if method == "nodes":
        return bergman_disk_nodes(d, rule)
    if method == "transported":
        return bergman_disk_rule(d)
    raise DomainError(f"unknown disk method {method!r}")


def local_oscillation(f: SliceFunction, p: float, r: float, unit: ImaginaryUnit, z: complex,
                      rule: DiskRule | None = None, method: str = "transported") -> float:
    """``((1/2pi) int_Delta |f - f*|^p dA)^(1/p)`` with ``f*`` the area mean over ``Delta(z, r)``."""
    dq = _disk_quadrature(BergmanDisk(complex(z), r, unit), rule, method)
    vals = f.on_slice(unit, dq.nodes)
    mean = np.sum(vals * dq.weights[:, None], axis=0) / dq.area
    osc = np.sum(qabs_arr(vals - mean) ** p * dq.weights) / (2.0 * math.pi)
    return float(osc) ** (1.0 / p)


def default_bmo_centers(rule: DiskRule, limit: float = 0.95) -> np.ndarray:
    return rule.nodes[np.abs(rule.nodes) <= limit]


def bmo_norm(f: SliceFunction, p: float, r: float, i: ImaginaryUnit, rule: DiskRule | None = None,
             centers: Sequence[complex] | None = None, method: str = "transported") -> float:
    """Sup over centers of the local ``p``-oscillation on Bergman disks of radius ``r``."""
    if p <= 1:
        raise DomainError("BMO exponent must satisfy p > 1")
    if r <= 0:
        raise DomainError("Bergman radius must be positive")
    rule = rule or build_rule(24, 24, 0.999)
    if centers is None:
        centers = default_bmo_centers(rule)
    centers = list(centers)
    if not centers:
        raise DomainError("need at least one BMO center")
    return max(local_oscillation(f, p, r, i, c, rule, method) for c in centers)


def bmo_norm_ball(f: SliceFunction, p: float, r: float, units: Sequence[ImaginaryUnit],
                  rule: DiskRule | None = None, centers=None, method: str = "transported") -> float:
    return max(bmo_norm(f, p, r, u, rule, centers, method) for u in units)


def _van_der_corput(n: int) -> np.ndarray:
    out = np.zeros(n)
    for k in range(n):
        x, denom, m = 0.0, 1.0, k
        while m:
            denom *= 2.0
            m, rem = divmod(m, 2)
            x += rem / denom
        out[k] = x
    return out


def lambda_probe_points(z: complex, r: float, probe: int) -> np.ndarray:
    """Nested probe net on the rim of ``Delta(z, r)``; the net for ``n`` contains the one for ``n - 1``."""
    t = math.tanh(r)
    theta = 2.0 * math.pi * _van_der_corput(probe)
    return mobius_disk(complex(z), t * np.exp(1j * theta))


def oscillation_lambda(f: SliceFunction, r: float, i: ImaginaryUnit, z: complex, probe: int = 32) -> float:
    """``sup {|f(z) - f(w)| : w in Delta_i(z, r)}`` over a probe net.

    ``|f(z) - f(w)|^2`` is subharmonic in ``w`` (sum of squared moduli of
    the two holomorphic split components), so the rim carries the sup.
    """
    if probe < 8:
        raise DomainError("oscillation probe needs at least 8 points")
    w = lambda_probe_points(z, r, probe)
    fz = f.on_slice(i, np.array([complex(z)]))
    fw = f.on_slice(i, w)
    return float(np.max(qabs_arr(fw - fz)))


def oscillation_lambda_field(f: SliceFunction, r: float, i: ImaginaryUnit, probe: int = 32):
    """Vectorized ``z -> Lambda_r(f)(z)`` for use as an integrand."""
    t = math.tanh(r)
    circle = t * np.exp(1j * 2.0 * math.pi * _van_der_corput(probe))

    def g(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        w = mobius_disk(zeta[:, None], circle[None, :])
        fz = f.on_slice(i, zeta)
        fw = f.on_slice(i, w)
        return np.max(qabs_arr(fw - fz[:, None, :]), axis=1)
    return g


def oscillation_bmo_field(f: SliceFunction, p: float, r: float, i: ImaginaryUnit,
                          radial: int = 12, angular: int = 24):
    """Vectorized local ``p``-oscillation ``z -> BMO(f)(z)``."""
    base = build_rule(radial, angular, math.tanh(r))

    def g(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        c = zeta[:, None]
        pts = mobius_disk(c, base.nodes[None, :])
        jac = ((1.0 - np.abs(c) ** 2) / np.abs(1.0 - np.conj(c) * base.nodes[None, :]) ** 2) ** 2
        wts = base.weights[None, :] * jac
        vals = f.on_slice(i, pts)
        area = np.sum(wts, axis=1)
        mean = np.sum(vals * wts[..., None], axis=1) / area[:, None]
        osc = np.sum(qabs_arr(vals - mean[:, None, :]) ** p * wts, axis=1) / (2.0 * math.pi)
        return osc ** (1.0 / p)
    return g


def lp_invariant_norm(g: Callable[[np.ndarray], np.ndarray], p: float, i: ImaginaryUnit | None,
                      rule: DiskRule, boundary_exponent: float | None = None) -> float:
    """``(int |g|^p dlambda)^(1/p)``; ``g`` may return reals or quaternion arrays."""
    if p < 1:
        raise DomainError("L^p exponent must satisfy p >= 1")

    def gp(zeta):
        v = np.asarray(g(zeta))
        if v.ndim >= 1 and v.shape[-1] == 4 and v.ndim == np.ndim(zeta) + 1:
            v = qabs_arr(v)
        return np.abs(v) ** p
    return integrate_invariant(gp, rule, i, boundary_exponent=boundary_exponent) ** (1.0 / p)


# -- empirical constants -----------------------------------------------------

@dataclass
class LipschitzReport:
    max_ratio: float
    best_pair: tuple | None
    pairs_used: int
    skipped: int
    norm: float
    notes: list = field(default_factory=list)


def random_slice_pairs(n: int, seed: int = 0, radius: float = 0.99) -> list[tuple[complex, complex]]:
    """``n`` pairs of points uniform in area on ``|z| < radius``; nested in ``n`` for a fixed seed."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        pts = radius * np.sqrt(rng.random(2)) * np.exp(2j * math.pi * rng.random(2))
        out.append((complex(pts[0]), complex(pts[1])))
    return out


def lipschitz_check(f: SliceFunction, p: float, i: ImaginaryUnit, pairs, norm: float | None = None,
                    rule: DiskRule | None = None, units=None, refine: bool = True) -> LipschitzReport:
    """Max of ``|f(q) - f(w)| / (||f||_{B_p} beta(q, w)^{1/t})`` over pairs, ``1/t = 1 - 1/p``.

    Pairs are complex slice coordinates (or quaternions on ``B_i``).  With
    ``refine``, a Nelder-Mead polish from the best sampled pair sharpens
    the estimate of the sup so it is stable under pair-set refinement.
    """
    if p <= 1:
        raise DomainError("Lipschitz check needs p > 1")
    inv_t = (p - 1.0) / p
    if norm is None:
        norm = besov_norm(f, p, units if units is not None else [i], rule).value
    zs, ws, skipped, notes = [], [], 0, []
    for q, w in pairs:
        zq, zw = _as_slice_coord(q, i), _as_slice_coord(w, i)
        if zq == zw:
            skipped += 1
            continue
        zs.append(zq)
        ws.append(zw)
    if skipped:
        notes.append(f"skipped {skipped} coincident pair(s)")
    if norm == 0.0 or not zs:
        return LipschitzReport(0.0, None, len(zs), skipped, norm, notes)
    zs = np.array(zs)
    ws = np.array(ws)

    def ratio(a, b):
        diff = qabs_arr(f.on_slice(i, a) - f.on_slice(i, b))
        beta = np.asarray(bergman_metric(a, b))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(beta > 0, diff / (norm * beta ** inv_t), 0.0)

    vals = ratio(zs, ws)
    k = int(np.argmax(vals))
    best, pair = float(vals[k]), (complex(zs[k]), complex(ws[k]))
    if refine and best > 0:
        from scipy.optimize import minimize

        def neg(x):
            a, b = complex(x[0], x[1]), complex(x[2], x[3])
            if abs(a) >= 0.999 or abs(b) >= 0.999:
                return 0.0
            return -float(ratio(np.array([a]), np.array([b]))[0])

        x0 = [pair[0].real, pair[0].imag, pair[1].real, pair[1].imag]
        res = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000})
        if -res.fun > best:
            best = float(-res.fun)
            pair = (complex(res.x[0], res.x[1]), complex(res.x[2], res.x[3]))
    return LipschitzReport(best, pair, len(zs), skipped, norm, notes)


def _as_slice_coord(q, i: ImaginaryUnit) -> complex:
    if isinstance(q, (complex, float, int, np.complexfloating, np.floating)):
        return complex(q)
    sc = slice_decompose(as_quaternion(q))
    sign = 1.0 if sc.y == 0.0 or np.dot(sc.unit.vector(), i.vector()) > 0 else -1.0
    if sc.y > 0 and abs(abs(np.dot(sc.unit.vector(), i.vector())) - 1.0) > 1e-9:
        raise DomainError("pair point is not on the slice B_i")
    return complex(sc.x, sign * sc.y)


@dataclass
class CoefficientReport:
    sup_n: float
    argmax_n: int | None
    norm: float


def coeff_bound_report(f: SliceFunction, p: float, units=None, rule: DiskRule | None = None,
                       norm: float | None = None, degree: int = 256) -> CoefficientReport:
    """``sup_{n>=1} n^{1/p} |a_n| / ||f||_{B_p}``, the empirical coefficient constant."""
    if p <= 1:
        raise DomainError("coefficient bound needs p > 1")
    if norm is None:
        norm = besov_norm(f, p, units, rule, allow_tail=True).value
    if norm <= 0.0:
        raise DomainError("coefficient bound undefined for zero Besov norm")
    series = f.to_power_series(degree) if isinstance(f, SliceRational) else f
    mags = qabs_arr(series.coeffs)[1:]
    if mags.size == 0:
        return CoefficientReport(0.0, None, norm)
    n = np.arange(1, mags.size + 1, dtype=float)
    vals = n ** (1.0 / p) * mags / norm
    k = int(np.argmax(vals))
    return CoefficientReport(float(vals[k]), k + 1, norm)
