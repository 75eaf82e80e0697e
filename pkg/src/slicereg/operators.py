"""Composition operators on the slice-regular Besov space.

A self-map ``Phi`` is only required to preserve one slice ``B_i``.  The
composite ``C_Phi f`` is known on that slice as ``f(Phi(z))`` and is
carried to every other slice through the representation formula; see
:class:`ComposedFunction`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .norms import (
    DEFAULT_SPHERE,
    besov_norm,
    bloch_seminorm_units,
    besov_slice_integrals,
)
from .quadrature import DiskRule, build_rule, integrate_invariant
from .quaternion_core import (
    DomainError,
    ImaginaryUnit,
    Quaternion,
    UNIT_I,
    as_quaternion,
    orthogonal_unit,
    qabs_arr,
    qmul_arr,
    sample_sphere,
    slice_decompose,
    unit_left_mul_arr,
)
from .slice_series import (
    PowerSeries,
    SliceFunction,
    SliceRational,
    mobius_exact,
    split,
    split_quaternions,
    stem_to_quaternions,
)

SLICE_TOL = 1e-10
DEFAULT_RHOS = (0.9, 0.99, 0.999)
DEFAULT_ANGLES = 16
DEFAULT_NCUT = 16


@dataclass(frozen=True, eq=False)
class SelfMap:
    """A series ``Phi`` with ``Phi(B_i) in B_i`` for the verified unit ``i``."""

    phi: PowerSeries
    verified_slice: ImaginaryUnit
    check_rule: DiskRule | None = None

    def __post_init__(self):
        if self.phi.truncated:
            raise DomainError("self-map must be an exact polynomial")
        pair = split(self.phi, self.verified_slice)
        rule = self.check_rule or build_rule(32, 32, 0.999)
        vals = self.phi.on_slice(self.verified_slice, rule.nodes)
        _, off = split_quaternions(vals, self.verified_slice, pair.j)
        if np.max(np.abs(off)) > SLICE_TOL:
            raise DomainError("Phi does not preserve the slice of the verified unit")
        c = pair.f1.coeffs.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        sup = float(np.max(np.abs(self(rule.nodes))))
        if sup >= 1.0:
            raise DomainError("Phi leaves the unit ball on the verified slice")
        object.__setattr__(self, "sup_on_grid", sup)

    @property
    def unit(self) -> ImaginaryUnit:
        return self.verified_slice

    def __call__(self, zeta):
        """``Phi`` on the verified slice, in complex coordinates."""
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), self.coeffs)

    def derivative(self, zeta):
        d = np.polynomial.polynomial.polyder(self.coeffs) if self.coeffs.size > 1 else np.zeros(1)
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), d)

    def sup_norm(self, grid: DiskRule | None = None, n_circle: int = 4096, r_max: float = 1.0 - 1e-6) -> float:
        # maximum modulus: the sup is approached on circles near the boundary
        circle = r_max * np.exp(2j * np.pi * np.arange(n_circle) / n_circle)
        best = float(np.max(np.abs(self(circle))))
        if grid is not None:
            best = max(best, float(np.max(np.abs(self(grid.nodes)))))
        return best

    def preimages(self, w: complex) -> list[complex]:
        """Solutions of ``Phi(z) = w`` inside the unit disk."""
        c = np.trim_zeros(np.array(self.coeffs, dtype=complex), "b")
        if c.size <= 1:
            return []
        c = c.copy()
        c[0] -= w
        roots = np.roots(c[::-1])
        return [complex(r) for r in roots if abs(r) < 1.0]


def self_map(coeffs, unit: ImaginaryUnit | None = None) -> SelfMap:
    return SelfMap(PowerSeries(coeffs), unit or UNIT_I)


class ComposedFunction(SliceFunction):
    """``C_Phi f`` as a slice function.

    On the verified slice, ``G(z) = f(Phi(z))``.  Its stem is
    ``A + sqrt(-1) B`` with ``A = (G(z) + G(zbar))/2`` and
    ``B = -i (G(z) - G(zbar))/2``, which is the representation formula
    written in stem form.
    """

    def __init__(self, f: SliceFunction, phi: SelfMap):
        self.f = f
        self.phi = phi
        self.unit = phi.verified_slice

    def _g(self, zeta):
        return self.f.on_slice(self.unit, self.phi(zeta))

    def _g_d(self, zeta):
        d = self.f.stem_derivative(self.phi(zeta)) * self.phi.derivative(zeta)[..., None]
        return stem_to_quaternions(d, self.unit)

    def _stem_from(self, gz, gzb):
        a = 0.5 * (gz + gzb)
        b = -unit_left_mul_arr(self.unit, 0.5 * (gz - gzb))
        return a + 1j * b

    def stem(self, zeta, allow_tail: bool = True):
        zeta = np.asarray(zeta, dtype=complex)
        return self._stem_from(self._g(zeta), self._g(np.conj(zeta)))

    def stem_derivative(self, zeta, allow_tail: bool = True):
        zeta = np.asarray(zeta, dtype=complex)
        return self._stem_from(self._g_d(zeta), self._g_d(np.conj(zeta)))

    def hotspots(self) -> list[complex]:
        spots = []
        for h in self.f.hotspots():
            for w in (h, h.conjugate()):
                for z in self.phi.preimages(w):
                    spots.extend([z, z.conjugate()])
        out: list[complex] = []
        for z in spots:
            if all(abs(z - y) > 1e-12 for y in out):
                out.append(z)
        return out

    def at_zero(self) -> Quaternion:
        return Quaternion.from_array(self._g(np.array(0j)))


def _slice_coord(z, unit: ImaginaryUnit) -> complex:
    if isinstance(z, (complex, float, int, np.number)):
        return complex(z)
    q = as_quaternion(z)
    sc = slice_decompose(q)
    if sc.y == 0.0:
        return complex(sc.x, 0.0)
    dot = float(np.dot(sc.unit.vector(), unit.vector()))
    if abs(abs(dot) - 1.0) > 1e-9:
        raise DomainError("point is not on the verified slice")
    return complex(sc.x, math.copysign(sc.y, dot))


def compose(f: SliceFunction, phi: SelfMap, z) -> Quaternion:
    """``f(Phi(z))`` for ``z`` on the verified slice."""
    zeta = _slice_coord(z, phi.unit)
    w = complex(phi(np.array(zeta)))
    if abs(w) >= 1.0:
        raise DomainError(f"self-map violation: |Phi(z)| >= 1 at z={zeta}")
    return Quaternion.from_array(f.on_slice(phi.unit, np.array(w)))


def compose_derivative(f: SliceFunction, phi: SelfMap, z) -> Quaternion:
    """Slice chain rule ``f1'(Phi) Phi' + f2'(Phi) Phi' j`` through the splitting of ``f``."""
    zeta = _slice_coord(z, phi.unit)
    w = complex(phi(np.array(zeta)))
    if abs(w) >= 1.0:
        raise DomainError(f"self-map violation: |Phi(z)| >= 1 at z={zeta}")
    j = orthogonal_unit(phi.unit)
    dvals = f.derivative_on_slice(phi.unit, np.array(w))
    d1, d2 = split_quaternions(dvals, phi.unit, j)
    dphi = complex(phi.derivative(np.array(zeta)))
    g1, g2 = complex(d1) * dphi, complex(d2) * dphi
    u = phi.unit.vector()
    q1 = np.concatenate([[g1.real], g1.imag * u])
    q2 = np.concatenate([[g2.real], g2.imag * u])
    return Quaternion.from_array(q1 + qmul_arr(q2, j.to_array()))


def besov_norm_of_composition(f: SliceFunction, phi: SelfMap, p: float, units=None,
                              rule: DiskRule | None = None) -> float:
    return besov_norm(ComposedFunction(f, phi), p, units, rule, allow_tail=True).value


def a_grid(rhos: Sequence[float] = DEFAULT_RHOS, angles: int = DEFAULT_ANGLES) -> list[complex]:
    """Deterministic radial grid ``rho e^{i theta}``, sorted by ``|a|``."""
    out = []
    for rho in sorted(rhos):
        for k in range(angles):
            out.append(rho * complex(math.cos(2 * math.pi * k / angles), math.sin(2 * math.pi * k / angles)))
    return out


def _group_rings(values: dict[complex, float]) -> list[tuple[float, float]]:
    rings: dict[float, float] = {}
    for a, v in values.items():
        key = round(abs(a), 12)
        rings[key] = max(rings.get(key, -math.inf), v)
    return sorted(rings.items())


@dataclass
class BoundednessResult:
    value: float
    argmax: complex
    verdict: str
    per_a: dict = field(default_factory=dict)
    ring_max: list = field(default_factory=list)


def boundedness_functional(phi: SelfMap, p: float, grid: Sequence[complex] | None = None,
                           units=None, rule: DiskRule | None = None,
                           growth_tol: float = 0.05) -> BoundednessResult:
    """``max over a of ||C_Phi sigma_a||_{B_p}`` with a tail-stability verdict."""
    grid = list(grid) if grid is not None else a_grid()
    if not grid:
        raise DomainError("empty a-grid")
    if any(abs(a) >= 1 for a in grid):
        raise DomainError("a-grid points must lie in the open disk")
    units = list(units) if units is not None else sample_sphere(DEFAULT_SPHERE)
    rule = rule or build_rule(extrapolate=True)
    per_a = {}
    for a in grid:
        sig = mobius_exact(phi.unit.slice_point(a))
        per_a[complex(a)] = besov_norm(ComposedFunction(sig, phi), p, units, rule).value
    argmax = max(per_a, key=per_a.get)
    rings = _group_rings(per_a)
    if len(rings) >= 2 and rings[-1][1] > (1.0 + growth_tol) * rings[-2][1]:
        verdict = "inconclusive"
    else:
        verdict = "bounded-evidence"
    return BoundednessResult(per_a[argmax], argmax, verdict, per_a, rings)


@dataclass
class CompactnessResult:
    verdict: str
    sup_norm: float
    shortcut_verdict: str | None
    sequence_verdict: str
    sequence: list = field(default_factory=list)
    per_a: dict = field(default_factory=dict)


def bloch_seminorm_of_composition(f: SliceFunction, phi: SelfMap, units, grid: DiskRule) -> float:
    return bloch_seminorm_units(ComposedFunction(f, phi), units, grid)[0]


def compactness_diagnostic(phi: SelfMap, p: float, tail: Sequence[complex] | None = None,
                           units=None, grid: DiskRule | None = None,
                           shortcut_margin: float = 1e-3) -> CompactnessResult:
    """Compactness evidence from the decay of ``||C_Phi sigma_a||`` in the Bloch seminorm.

    Two routes are reported: the sup-norm shortcut (``||Phi||_inf < 1``
    gives compactness outright) and the Bloch-seminorm sequence along the
    tail, grouped by ``|a|`` (max over angles).  The sequence verdict is
    compact-evidence when the last value falls below 5% of the first and
    not-compact-evidence when it stays above 50%.
    """
    tail = list(tail) if tail is not None else a_grid()
    if not tail or max(abs(a) for a in tail) < 0.99:
        raise DomainError("compactness tail must reach |a| >= 0.99")
    units = list(units) if units is not None else sample_sphere(8)
    grid = grid or build_rule(48, 64, 0.999)
    sup = phi.sup_norm()
    shortcut = "compact-evidence" if sup < 1.0 - shortcut_margin else None
    per_a = {}
    for a in tail:
        sig = mobius_exact(phi.unit.slice_point(a))
        per_a[complex(a)] = bloch_seminorm_of_composition(sig, phi, units, grid)
    seq = _group_rings(per_a)
    first, last = seq[0][1], seq[-1][1]
    scale = max(v for _, v in seq)
    if scale <= 1e-14:
        seq_verdict = "compact-evidence"
    elif last < 0.05 * first:
        seq_verdict = "compact-evidence"
    elif last > 0.5 * first:
        seq_verdict = "not-compact-evidence"
    else:
        seq_verdict = "inconclusive"
    verdict = shortcut or seq_verdict
    return CompactnessResult(verdict, sup, shortcut, seq_verdict, seq, per_a)


# -- measures -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Point masses on a slice with components ``mu = mu1 + mu2 j``."""

    points: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    unit: ImaginaryUnit

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(-1)
        w1 = np.asarray(self.w1, dtype=float).reshape(-1)
        w2 = np.asarray(self.w2, dtype=float).reshape(-1)
        if not (pts.size == w1.size == w2.size):
            raise DomainError("measure points and weights must have equal length")
        if np.any(w1 < 0) or np.any(w2 < 0):
            raise DomainError("measure weights must be nonnegative")
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            raise DomainError("measure must have finite mass")
        if np.any(np.abs(pts) >= 1.0):
            raise DomainError("measure atoms must lie in the open disk")
        for name, v in (("points", pts), ("w1", w1), ("w2", w2)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.w1) + np.sum(self.w2))

    def scaled(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.w1 * c, self.w2 * c, self.unit)


@dataclass
class CarlesonResult:
    """``M`` for the whole measure, ``M1``/``M2`` for its components ``w1``, ``w2``.

    ``M1_complex``/``M2_complex`` test each component against the complex
    split components of the family with their complex Besov norms.
    """
    M: float
    M1: float
    M2: float
    argmax: int | None
    M1_complex: float = 0.0
    M2_complex: float = 0.0


def _complex_besov_norm(value0: complex, dfun, p: float, rule: DiskRule, centers=()) -> float:
    def g(zeta):
        return ((1.0 - np.abs(zeta) ** 2) * np.abs(dfun(zeta))) ** p
    seminorm = integrate_invariant(g, rule, None, centers=centers, boundary_exponent=p - 1.0)
    return abs(value0) + max(seminorm, 0.0) ** (1.0 / p)


def carleson_constant(mu: DiscreteMeasure, p: float, test_family: Sequence[SliceFunction],
                      units=None, rule: DiskRule | None = None) -> CarlesonResult:
    """Empirical Carleson constant ``max_f int |f'|^p dmu / ||f||^p``.

    ``M1``, ``M2`` are the same ratio for the component measures ``w1`` and
    ``w2`` alone.  The complex variants test ``w1`` and ``w2`` against the
    split components ``f1``, ``f2`` on the measure's slice with their
    complex Besov norms.
    """
    if p <= 1:
        raise DomainError("Carleson constant needs p > 1")
    units = list(units) if units is not None else sample_sphere(DEFAULT_SPHERE)
    rule = rule or build_rule(extrapolate=True)
    j = orthogonal_unit(mu.unit)
    best, best_k, m1, m2, c1, c2 = 0.0, None, 0.0, 0.0, 0.0, 0.0
    nonconstant = 0
    for k, f in enumerate(test_family):
        rep = besov_norm(f, p, units, rule, allow_tail=True)
        if rep.seminorm_power <= 0.0:
            continue
        nonconstant += 1
        d = f.derivative_on_slice(mu.unit, mu.points)
        dp = qabs_arr(d) ** p
        val = float(np.sum((mu.w1 + mu.w2) * dp)) / rep.value ** p
        if val > best:
            best, best_k = val, k
        m1 = max(m1, float(np.sum(mu.w1 * dp)) / rep.value ** p)
        m2 = max(m2, float(np.sum(mu.w2 * dp)) / rep.value ** p)
        d1, d2 = split_quaternions(d, mu.unit, j)
        f0_1, f0_2 = split_quaternions(f.at_zero().to_array(), mu.unit, j)
        for comp, weights, which in ((0, mu.w1, 1), (1, mu.w2, 2)):
            if not np.any(weights > 0):
                continue
            dfun = _component_derivative(f, mu.unit, j, comp)
            nrm = _complex_besov_norm(complex([f0_1, f0_2][comp]), dfun, p, rule, f.hotspots())
            if nrm <= 0.0:
                continue
            dv = [d1, d2][comp]
            v = float(np.sum(weights * np.abs(dv) ** p)) / nrm ** p
            if which == 1:
                c1 = max(c1, v)
            else:
                c2 = max(c2, v)
    if nonconstant == 0:
        raise DomainError("Carleson test family must contain a nonconstant function")
    return CarlesonResult(best, m1, m2, best_k, c1, c2)


def _component_derivative(f: SliceFunction, unit: ImaginaryUnit, j: ImaginaryUnit, comp: int):
    def dfun(zeta):
        return split_quaternions(f.derivative_on_slice(unit, zeta), unit, j)[comp]
    return dfun


def pullback_measure(phi: SelfMap, p: float, rule: DiskRule | None = None,
                     i: ImaginaryUnit | None = None) -> DiscreteMeasure:
    """Atoms ``Phi(z_k)`` with weights ``w_k (1 - |z_k|^2)^(p-2) |Phi'(z_k)|^p``.

    ``sum |f'|^p dmu_p`` then reproduces the slice Besov integral of
    ``C_Phi f`` on the rule (chain rule on the slice).
    """
    if p <= 1:
        raise DomainError("pullback measure needs p > 1")
    unit = i or phi.unit
    if unit != phi.unit:
        raise DomainError("pullback measure lives on the verified slice of Phi")
    rule = rule or build_rule()
    z = rule.nodes
    w = rule.weights * (1.0 - np.abs(z) ** 2) ** (p - 2.0) * np.abs(phi.derivative(z)) ** p
    pts = phi(z)
    keep = w > 0
    return DiscreteMeasure(pts[keep], w[keep], np.zeros(int(np.sum(keep))), unit)


def kernel_mass_discrete(mu: DiscreteMeasure, a: complex, alpha: float) -> float:
    """``sum w (1 - |a|^2)^(2+alpha) / |1 - conj(a) q|^(2(2+alpha))`` over the atoms."""
    s = 2.0 + alpha
    ker = (1.0 - abs(a) ** 2) ** s / np.abs(1.0 - np.conj(a) * mu.points) ** (2.0 * s)
    return float(np.sum((mu.w1 + mu.w2) * ker))


def kernel_mass(phi: SelfMap, p: float, alpha: float, a: complex, rule: DiskRule) -> float:
    """Kernel mass of the pullback measure as an integral over the slice.

    Same quantity as :func:`kernel_mass_discrete` on ``pullback_measure``,
    but the quadrature is recentered at the preimages of ``a`` so kernels
    concentrated near the boundary are resolved.
    """
    s = 2.0 + alpha
    a = complex(a)

    def g(zeta):
        w = phi(zeta)
        ker = (1.0 - abs(a) ** 2) ** s / np.abs(1.0 - np.conj(a) * w) ** (2.0 * s)
        return (1.0 - np.abs(zeta) ** 2) ** p * np.abs(phi.derivative(zeta)) ** p * ker

    centers = phi.preimages(a)
    return float(integrate_invariant(g, rule, phi.unit, centers=centers))


def tail_projection_exact(f: SliceFunction, n: int) -> SliceFunction:
    """``R_n f`` for closed-form functions: subtract the degree-``n`` Taylor part."""
    if isinstance(f, PowerSeries):
        from .slice_series import tail_projection
        return tail_projection(f, n)
    if not isinstance(f, SliceRational):
        raise DomainError("tail projection needs a series or a rational slice function")
    head = f.to_power_series(n)
    head = PowerSeries(head.coeffs)  # exact polynomial
    den = f.denominator
    prod = np.zeros((den.size + head.degree, 4))
    for k, r in enumerate(den):
        prod[k: k + head.degree + 1] += r * head.coeffs
    num = np.zeros((max(prod.shape[0], f.numerator.degree + 1), 4))
    num[: f.numerator.degree + 1] += f.numerator.coeffs
    num[: prod.shape[0]] -= prod
    num[: n + 1] = 0.0  # cancels to rounding by construction
    return SliceRational(PowerSeries(num), den, label=f"R_{n}({f.label})")


@lru_cache(maxsize=32)
def _calibration(p: float, alpha: float, radial: int, angular: int, r_max: float,
                 n_cut: int, rhos: tuple, angles: int) -> tuple[float, float, float]:
    """Calibrate the unknown absolute constant on ``Phi = id``.

    Returns ``(C_cal, direct, lower_id)`` where ``direct`` estimates
    ``||C_id R_n||`` on the test family ``{q^m : m > n}`` and the
    normalized tail Mobius maps.
    """
    rule = build_rule(radial, angular, r_max, extrapolate=True)
    ident = self_map([[0, 0, 0, 0], [1, 0, 0, 0]])
    units = [ident.unit]
    direct = 0.0
    for m in (n_cut + 1, 2 * n_cut, 4 * n_cut):
        mono = np.zeros((m + 1, 4))
        mono[m, 0] = 1.0
        f = PowerSeries(mono)
        r = besov_norm(tail_projection_exact(f, n_cut), p, units, rule).value / besov_norm(f, p, units, rule).value
        direct = max(direct, r)
    for a in a_grid(rhos, 4)[-4:]:
        sig = mobius_exact(ident.unit.slice_point(a))
        r = (besov_norm(tail_projection_exact(sig, n_cut), p, units, rule).value
             / besov_norm(sig, p, units, rule).value)
        direct = max(direct, r)
    plain = build_rule(radial, angular, r_max)
    lower_id = max(kernel_mass(ident, p, alpha, a, plain) for a in a_grid(rhos, angles) if abs(a) == max(rhos))
    c_cal = max(1.0, direct / (2.0 ** p * lower_id))
    return c_cal, direct, lower_id


@dataclass
class EssentialNormResult:
    lower: float
    upper: float
    c_cal: float
    ring_max: list = field(default_factory=list)
    decreasing: bool = False
    per_a: dict = field(default_factory=dict)
    tail_projection: dict = field(default_factory=dict)


def essential_norm_bounds(phi: SelfMap, p: float, alpha: float, grid: Sequence[complex] | None = None,
                          rule: DiskRule | None = None, n_cut: int = DEFAULT_NCUT,
                          units=None, tail_diagnostic: bool = True) -> EssentialNormResult:
    """Kernel-mass sandwich for the essential norm of ``C_Phi``.

    ``K(a)`` is the kernel mass of the pullback measure; ``lower`` is its
    max over the outermost ring of the a-grid and ``upper = 2^p C_cal lower``.
    """
    if alpha <= -1.0:
        raise DomainError("alpha must satisfy alpha > -1")
    if p <= 1:
        raise DomainError("essential norm bounds need p > 1")
    grid = list(grid) if grid is not None else a_grid()
    if not grid or max(abs(a) for a in grid) < 0.99:
        raise DomainError("a-grid tail must reach |a| >= 0.99")
    rule = rule or build_rule()
    per_a = {complex(a): kernel_mass(phi, p, alpha, a, rule) for a in grid}
    rings = _group_rings(per_a)
    lower = rings[-1][1]
    rhos = tuple(sorted({round(abs(a), 12) for a in grid}))
    angles = max(1, len(grid) // len(rhos))
    c_cal, _, _ = _calibration(float(p), float(alpha), rule.radial_nodes, rule.angular_nodes,
                               rule.r_max, int(n_cut), rhos, angles)
    upper = 2.0 ** p * c_cal * lower
    decreasing = all(rings[k + 1][1] <= rings[k][1] * (1 + 1e-12) for k in range(len(rings) - 1))
    tails = {}
    if tail_diagnostic:
        tunits = list(units) if units is not None else [phi.unit]
        trule = build_rule(rule.radial_nodes, rule.angular_nodes, rule.r_max, extrapolate=True)
        outer = [a for a in grid if round(abs(a), 12) == rings[-1][0]]
        for a in outer[:: max(1, len(outer) // 4)]:
            sig = mobius_exact(phi.unit.slice_point(a))
            g = ComposedFunction(tail_projection_exact(sig, n_cut), phi)
            tails[complex(a)] = besov_norm(g, p, tunits, trule).value
    return EssentialNormResult(lower, upper, c_cal, rings, decreasing, per_a, tails)


@dataclass
class OperatorReport:
    bounded_functional: float
    compact_verdict: str
    essnorm_lower: float
    essnorm_upper: float
    carleson_M: float
    traces: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bounded_functional": self.bounded_functional,
            "compact_verdict": self.compact_verdict,
            "essnorm_lower": self.essnorm_lower,
            "essnorm_upper": self.essnorm_upper,
            "carleson_M": self.carleson_M,
            "details": self.details,
            "traces": self.traces,
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abs_a", "angle", "besov_of_composition", "bloch_of_composition", "K_a"])
        for row in self.traces:
            w.writerow([repr(row["abs_a"]), repr(row["angle"]), repr(row["besov_of_composition"]),
                        repr(row["bloch_of_composition"]), repr(row["K_a"])])
        return buf.getvalue()


def analyze_operator(phi: SelfMap, p: float = 2.0, alpha: float = 0.0, grid=None, units=None,
                     rule: DiskRule | None = None, n_cut: int = DEFAULT_NCUT) -> OperatorReport:
    """Boundedness, compactness, Carleson and essential-norm diagnostics in one report."""
    grid = list(grid) if grid is not None else a_grid()
    units = list(units) if units is not None else sample_sphere(8)
    rule = rule or build_rule(extrapolate=True)
    bnd = boundedness_functional(phi, p, grid, units, rule)
    cmp_ = compactness_diagnostic(phi, p, grid, units)
    ess = essential_norm_bounds(phi, p, alpha, grid, build_rule(rule.radial_nodes, rule.angular_nodes, rule.r_max),
                                n_cut, tail_diagnostic=False)
    mu = pullback_measure(phi, p, build_rule(64, 64, rule.r_max))
    family = [PowerSeries(np.vstack([np.zeros((m, 4)), [[1, 0, 0, 0]]])) for m in (1, 2, 3)]
    family += [mobius_exact(phi.unit.slice_point(a)) for a in (0.5, 0.9j)]
    carl = carleson_constant(mu, p, family, units, rule)
    traces = []
    for a in grid:
        traces.append({
            "abs_a": abs(a),
            "angle": math.atan2(a.imag, a.real),
            "besov_of_composition": bnd.per_a[complex(a)],
            "bloch_of_composition": cmp_.per_a[complex(a)],
            "K_a": ess.per_a[complex(a)],
        })
    details = {
        "bounded_verdict": bnd.verdict,
        "bounded_argmax": [bnd.argmax.real, bnd.argmax.imag],
        "sup_norm_phi": cmp_.sup_norm,
        "compact_shortcut": cmp_.shortcut_verdict,
        "compact_sequence_verdict": cmp_.sequence_verdict,
        "essnorm_c_cal": ess.c_cal,
        "essnorm_decreasing": ess.decreasing,
        "carleson_M1": carl.M1,
        "carleson_M2": carl.M2,
        "carleson_M1_complex": carl.M1_complex,
        "carleson_M2_complex": carl.M2_complex,
        "p": p,
        "alpha": alpha,
    }
    return OperatorReport(bnd.value, cmp_.verdict, ess.lower, ess.upper, carl.M, traces, details)
