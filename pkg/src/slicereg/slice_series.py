"""Slice-regular functions on the unit ball as truncated power series.

A function ``f(q) = sum q^n a_n`` with quaternion right coefficients is
evaluated through its *stem*: for complex ``zeta = x + iy`` put
``V(zeta) = sum zeta^n a_n``, a complex 4-vector.  For every imaginary
unit ``I`` one has ``f(x + I y) = Re V + I Im V``, so a single complex
Horner pass serves all slices at once.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .quaternion_core import (
    DomainError,
    ImaginaryUnit,
    Quaternion,
    as_quaternion,
    orthogonal_unit,
    qabs_arr,
    qconj_arr,
    qmul_arr,
    slice_decompose,
    unit_left_mul_arr,
)

DEFAULT_DEGREE = 64
TAIL_TOL = 1e-9


def _as_coeff_array(coeffs) -> np.ndarray:
    if isinstance(coeffs, np.ndarray) and coeffs.ndim == 2 and coeffs.shape[1] == 4:
        arr = coeffs.astype(float, copy=True)
    else:
        arr = np.array([as_quaternion(c).to_array() for c in coeffs], dtype=float).reshape(-1, 4)
    if arr.shape[0] == 0:
        arr = np.zeros((1, 4))
    return arr


def horner_stem(coeffs: np.ndarray, zeta) -> np.ndarray:
    """``sum zeta^n coeffs[n]`` for an array of complex ``zeta``; shape ``zeta.shape + (4,)``."""
    zeta = np.asarray(zeta, dtype=complex)
    acc = np.zeros(zeta.shape + (coeffs.shape[1],), dtype=complex)
    z = zeta[..., None]
    for a in coeffs[::-1]:
        acc = acc * z + a
    return acc


def stem_to_quaternions(stem: np.ndarray, unit: ImaginaryUnit) -> np.ndarray:
    """Quaternion values ``Re V + I Im V`` on the slice of ``unit``."""
    return stem.real + unit_left_mul_arr(unit, stem.imag)


class SliceFunction:
    """Common interface of slice-regular functions used by norms and operators.

    Subclasses supply ``stem`` and ``stem_derivative`` (vectorized over
    complex arrays).  ``hotspots`` lists complex points of the disk near
    which the function concentrates; quadrature uses them for recentering.
    """

    truncated = False

    def stem(self, zeta, allow_tail: bool = True) -> np.ndarray:
        raise NotImplementedError

    def stem_derivative(self, zeta, allow_tail: bool = True) -> np.ndarray:
        raise NotImplementedError

    def hotspots(self) -> list[complex]:
        return []

    def at_zero(self) -> Quaternion:
        return Quaternion.from_array(self.stem(np.array(0j)).real)

    def on_slice(self, unit: ImaginaryUnit, zeta, allow_tail: bool = True) -> np.ndarray:
        return stem_to_quaternions(self.stem(zeta, allow_tail), unit)

    def derivative_on_slice(self, unit: ImaginaryUnit, zeta, allow_tail: bool = True) -> np.ndarray:
        return stem_to_quaternions(self.stem_derivative(zeta, allow_tail), unit)


@dataclass(frozen=True, eq=False)
class PowerSeries(SliceFunction):
    """Truncated series ``sum_{n<=N} q^n a_n``.

    ``truncated`` marks a truncation of an infinite model (reciprocals,
    Mobius maps); evaluation of such series is refused where the
    geometric tail bound exceeds ``TAIL_TOL`` unless ``allow_tail``.
    """

    coeffs: np.ndarray
    cap: int = DEFAULT_DEGREE
    truncated: bool = False
    label: str = ""

    def __post_init__(self):
        arr = _as_coeff_array(self.coeffs)
        cap = max(int(self.cap), arr.shape[0] - 1)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "cap", cap)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def coefficient(self, n: int) -> Quaternion:
        if n > self.degree:
            return Quaternion()
        return Quaternion.from_array(self.coeffs[n])

    def coefficient_list(self) -> list[Quaternion]:
        return [Quaternion.from_array(c) for c in self.coeffs]

    def _with(self, coeffs, **kw) -> "PowerSeries":
        opts = dict(cap=self.cap, truncated=self.truncated, label=self.label)
        opts.update(kw)
        return PowerSeries(coeffs, **opts)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((n, 4))
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += other.coeffs
        return PowerSeries(out, cap=max(self.cap, other.cap),
                           truncated=self.truncated or other.truncated)

    def __neg__(self) -> "PowerSeries":
        return self._with(-self.coeffs)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-other)

    def scale(self, c: float) -> "PowerSeries":
        return self._with(self.coeffs * float(c))

    def right_mul(self, c) -> "PowerSeries":
        """``f c``: every coefficient multiplied on the right by ``c``."""
        c = as_quaternion(c).to_array()
        return self._with(qmul_arr(self.coeffs, c))

    def tail_bound(self, r: float) -> float:
        if r >= 1.0:
            return math.inf
        amax = float(np.max(qabs_arr(self.coeffs)))
        return amax * r ** (self.degree + 1) / (1.0 - r)

    def _check_tail(self, zeta, allow_tail):
        if not self.truncated or allow_tail:
            return
        r = float(np.max(np.abs(zeta))) if np.size(zeta) else 0.0
        bound = self.tail_bound(r)
        if bound > TAIL_TOL:
            raise DomainError(
                f"truncation tail bound {bound:.3g} exceeds {TAIL_TOL:g} at |q|={r:.6g}; "
                "raise the degree or pass allow_tail"
            )

    def stem(self, zeta, allow_tail: bool = True) -> np.ndarray:
        self._check_tail(zeta, allow_tail)
        return horner_stem(self.coeffs, zeta)

    def stem_derivative(self, zeta, allow_tail: bool = True) -> np.ndarray:
        return slice_derivative(self).stem(zeta, allow_tail)

    def at_zero(self) -> Quaternion:
        return Quaternion.from_array(self.coeffs[0])

    def to_json(self) -> dict:
        out = {"coeffs": [list(map(float, c)) for c in self.coeffs]}
        if self.label:
            out["label"] = self.label
        return out


@dataclass(frozen=True, eq=False)
class SliceRational(SliceFunction):
    """``f = R^{-1} * P`` with ``P`` a quaternion polynomial and ``R`` real.

    Real-coefficient factors commute with the star product and act
    pointwise, so the stem is simply ``P_stem(zeta) / R(zeta)``.  This is
    the closed form used for Mobius maps near the boundary, where any
    fixed truncation degree would be inaccurate.
    """

    numerator: PowerSeries
    denominator: np.ndarray
    label: str = ""

    def __post_init__(self):
        den = np.asarray(self.denominator, dtype=float).reshape(-1)
        den.setflags(write=False)
        object.__setattr__(self, "denominator", den)
        if den[0] == 0.0:
            raise DomainError("denominator vanishes at 0")
        roots = np.roots(den[::-1]) if den.size > 1 else np.array([])
        if np.any(np.abs(roots) <= 1.0):
            raise DomainError("denominator has zeros in the closed unit disk")
        object.__setattr__(self, "_roots", roots)

    def _den(self, zeta):
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), self.denominator)

    def _den_d(self, zeta):
        d = np.polynomial.polynomial.polyder(self.denominator)
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), d)

    def stem(self, zeta, allow_tail: bool = True) -> np.ndarray:
        return self.numerator.stem(zeta) / self._den(zeta)[..., None]

    def stem_derivative(self, zeta, allow_tail: bool = True) -> np.ndarray:
        r = self._den(zeta)[..., None]
        dr = self._den_d(zeta)[..., None]
        p = self.numerator.stem(zeta)
        dp = self.numerator.stem_derivative(zeta)
        return dp / r - p * dr / (r * r)

    def hotspots(self) -> list[complex]:
        return [complex(1.0 / np.conj(r)) for r in self._roots]

    def to_power_series(self, degree: int = DEFAULT_DEGREE) -> PowerSeries:
        inv = _real_series_reciprocal(self.denominator, degree)
        coeffs = np.zeros((degree + 1, 4))
        num = self.numerator.coeffs
        for n in range(degree + 1):
            for k in range(min(n, num.shape[0] - 1) + 1):
                coeffs[n] += inv[n - k] * num[k]
        return PowerSeries(coeffs, cap=degree, truncated=True, label=self.label)


def _real_series_reciprocal(s: np.ndarray, degree: int) -> np.ndarray:
    """Coefficients of ``1/s`` for a real series ``s`` with ``s[0] != 0``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(degree + 1)
    out[0] = 1.0 / s[0]
    for n in range(1, degree + 1):
        m = min(n, s.size - 1)
        acc = 0.0
        for k in range(1, m + 1):
            acc += s[k] * out[n - k]
        out[n] = -acc / s[0]
    return out


# -- operations ---------------------------------------------------------------

def eval_series(f: SliceFunction, q, allow_tail: bool = False) -> Quaternion:
    """Value of ``f`` at a point of the open unit ball."""
    q = as_quaternion(q)
    if abs(q) >= 1.0:
        raise DomainError("outside open unit ball")
    sc = slice_decompose(q)
    v = f.stem(np.array(complex(sc.x, sc.y)), allow_tail)
    return Quaternion.from_array(stem_to_quaternions(v, sc.unit))


def slice_derivative(f: PowerSeries) -> PowerSeries:
    """Termwise derivative in ``x0``: coefficients ``(n+1) a_{n+1}``."""
    if isinstance(f, SliceRational):
        num = f.numerator
        den = f.denominator
        dden = np.polynomial.polynomial.polyder(den)
        dnum = slice_derivative(num)
        new_num = _real_times_series(den, dnum) - _real_times_series(dden, num)
        new_den = np.polynomial.polynomial.polymul(den, den)
        return SliceRational(new_num, new_den, label=f.label)
    if f.degree == 0:
        return f._with(np.zeros((1, 4)))
    n = np.arange(1, f.degree + 1, dtype=float)[:, None]
    return f._with(f.coeffs[1:] * n, cap=max(f.cap - 1, 0))


def _real_times_series(r: np.ndarray, f: PowerSeries) -> PowerSeries:
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.size == 0:
        return PowerSeries(np.zeros((1, 4)))
    out = np.zeros((r.size + f.degree, 4))
    for k, rk in enumerate(r):
        out[k: k + f.degree + 1] += rk * f.coeffs
    return PowerSeries(out, cap=max(f.cap, out.shape[0] - 1), truncated=f.truncated)


def star_mul(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """Star product: ``c_n = sum_k a_k b_{n-k}``, left factor's coefficient on the left."""
    cap = min(f.cap, g.cap)
    prod = qmul_arr(f.coeffs[:, None, :], g.coeffs[None, :, :])
    full = f.degree + g.degree
    out = np.zeros((full + 1, 4))
    idx = np.add.outer(np.arange(f.degree + 1), np.arange(g.degree + 1))
    np.add.at(out, idx.ravel(), prod.reshape(-1, 4))
    cut = full > cap
    return PowerSeries(out[: cap + 1], cap=cap, truncated=f.truncated or g.truncated or cut)


def regular_conjugate(f: PowerSeries) -> PowerSeries:
    return f._with(qconj_arr(f.coeffs))


def symmetrization(f: PowerSeries) -> np.ndarray:
    """Real coefficients of ``f * f^c``."""
    s = star_mul(f, regular_conjugate(f))
    return s.coeffs[:, 0].copy()


def star_reciprocal(f: PowerSeries, out_degree: int = DEFAULT_DEGREE) -> PowerSeries:
    """Star inverse ``(f * f^c)^{-1} f^c`` truncated at ``out_degree``."""
    if f.coefficient(0).norm2() == 0.0:
        raise DomainError("star-reciprocal undefined at 0")
    fc = regular_conjugate(f)
    sym = symmetrization(f)
    inv = _real_series_reciprocal(sym, out_degree)
    out = _real_times_series(inv, fc).coeffs[: out_degree + 1]
    exact = f.degree == 0
    return PowerSeries(out, cap=out_degree, truncated=not exact or f.truncated)


def tail_projection(f: PowerSeries, n: int) -> PowerSeries:
    """Zero out coefficients ``0..n``; keep the rest."""
    out = np.array(f.coeffs, copy=True)
    out[: n + 1] = 0.0
    return f._with(out)


# -- splitting and extension -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComplexSeries:
    """Coefficients in the slice ``C(unit)``, stored as Python complex numbers."""

    coeffs: np.ndarray
    unit: ImaginaryUnit

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __call__(self, zeta):
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), self.coeffs)

    def derivative(self, zeta):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), d)

    def as_quaternions(self) -> np.ndarray:
        u = self.unit.vector()
        out = np.zeros((self.coeffs.size, 4))
        out[:, 0] = self.coeffs.real
        out[:, 1:] = self.coeffs.imag[:, None] * u
        return out


@dataclass(frozen=True, eq=False)
class SplitPair:
    f1: ComplexSeries
    f2: ComplexSeries
    unit: ImaginaryUnit
    j: ImaginaryUnit

    def recombine(self, cap: int = DEFAULT_DEGREE) -> PowerSeries:
        q1 = self.f1.as_quaternions()
        q2 = qmul_arr(self.f2.as_quaternions(), self.j.to_array())
        return PowerSeries(q1 + q2, cap=cap)


def split_quaternions(values: np.ndarray, unit: ImaginaryUnit, j: ImaginaryUnit | None = None):
    """Write quaternions as ``u1 + u2 j`` with ``u1, u2`` complex in ``C(unit)``."""
    j = j or orthogonal_unit(unit)
    i_v = unit.vector()
    j_v = j.vector()
    ij_v = np.cross(i_v, j_v)
    values = np.asarray(values, dtype=float)
    im = values[..., 1:]
    u1 = values[..., 0] + 1j * (im @ i_v)
    u2 = (im @ j_v) + 1j * (im @ ij_v)
    return u1, u2


def split(f: PowerSeries, i: ImaginaryUnit) -> SplitPair:
    """Splitting ``f = f1 + f2 j`` on the slice of ``i`` with ``j = orthogonal_unit(i)``."""
    j = orthogonal_unit(i)
    u1, u2 = split_quaternions(f.coeffs, i, j)
    return SplitPair(ComplexSeries(u1, i), ComplexSeries(u2, i), i, j)


def extend(values_on_slice: Callable[[complex], Quaternion], i: ImaginaryUnit, q) -> Quaternion:
    """Representation-formula extension of slice data on ``B_i`` to the point ``q``."""
    q = as_quaternion(q)
    if abs(q) >= 1.0:
        raise DomainError("outside open unit ball")
    sc = slice_decompose(q)
    iq = sc.unit.as_quaternion()
    iu = i.as_quaternion()
    z = complex(sc.x, sc.y)
    v_plus = as_quaternion(values_on_slice(z))
    v_minus = as_quaternion(values_on_slice(z.conjugate()))
    left = Quaternion.real(1.0) - iq * iu
    right = Quaternion.real(1.0) + iq * iu
    return (left * v_plus + right * v_minus) * 0.5


def restriction(f: SliceFunction, i: ImaginaryUnit) -> Callable[[complex], Quaternion]:
    """``z -> f(x + i y)`` as a scalar callable on complex numbers."""
    def v(z: complex) -> Quaternion:
        return Quaternion.from_array(f.on_slice(i, np.array(complex(z))))
    return v


# -- Mobius maps --------------------------------------------------------------

def mobius(a, out_degree: int = DEFAULT_DEGREE) -> PowerSeries:
    """Series of ``sigma_a = (1 - q abar)^{-*} * (a - q)``, truncated at ``out_degree``."""
    a = as_quaternion(a)
    if abs(a) >= 1.0:
        raise DomainError("Mobius parameter must satisfy |a| < 1")
    kernel = PowerSeries([Quaternion.real(1.0), -a.conj()], cap=out_degree)
    affine = PowerSeries([a, Quaternion.real(-1.0)], cap=out_degree)
    if a.norm2() == 0.0:
        return PowerSeries(affine.coeffs, cap=out_degree, label="mobius:0")
    out = star_mul(star_reciprocal(kernel, out_degree), affine)
    return PowerSeries(out.coeffs, cap=out_degree, truncated=True, label=f"mobius:{a.to_list()}")


def mobius_exact(a) -> SliceFunction:
    """Closed form ``sigma_a = R^{-1} [a - q(1 + a^2) + q^2 a]``, ``R = 1 - 2 Re(a) q + |a|^2 q^2``."""
    a = as_quaternion(a)
    if abs(a) >= 1.0:
        raise DomainError("Mobius parameter must satisfy |a| < 1")
    label = f"mobius:{a.to_list()}"
    one = Quaternion.real(1.0)
    num = PowerSeries([a, -(one + a * a), a], cap=2)
    if a.norm2() == 0.0:
        return PowerSeries([Quaternion(), -one], label=label)
    den = np.array([1.0, -2.0 * a.w, a.norm2()])
    return SliceRational(num, den, label=label)


# -- function spec files ----------------------------------------------------

def load_function(path) -> PowerSeries:
    data = json.loads(Path(path).read_text())
    return function_from_json(data)


def function_from_json(data: dict) -> PowerSeries:
    coeffs = data.get("coeffs")
    if not isinstance(coeffs, list) or not coeffs:
        raise DomainError("function spec needs a non-empty 'coeffs' list of 4-arrays")
    for c in coeffs:
        if not isinstance(c, list) or len(c) != 4:
            raise DomainError("each coefficient must be a 4-array [w, x, y, z]")
    return PowerSeries(np.array(coeffs, dtype=float), label=str(data.get("label", "")))


def save_function(f: PowerSeries, path) -> None:
    Path(path).write_text(json.dumps(f.to_json(), indent=2) + "\n")
