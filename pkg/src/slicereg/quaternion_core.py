"""Quaternion arithmetic, slice coordinates and sampling of imaginary units.

Scalar values use the immutable :class:`Quaternion`.  Hot loops work on
numpy arrays whose last axis holds ``(w, x, y, z)``; the ``*_arr``
helpers below are the vectorized counterparts of the scalar operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when an operation is called outside its mathematical domain."""


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def real(cls, r: float) -> "Quaternion":
        return cls(float(r), 0.0, 0.0, 0.0)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    def __iter__(self):
        return iter((self.w, self.x, self.y, self.z))

    def __add__(self, other):
        other = as_quaternion(other)
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_quaternion(other)
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        return as_quaternion(other) - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return q_mul(self, as_quaternion(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return q_mul(as_quaternion(other), self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        return q_mul(self, q_inv(as_quaternion(other)))

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    @property
    def re(self) -> float:
        return self.w

    @property
    def im(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def isclose(self, other, tol=1e-12) -> bool:
        return abs(self - as_quaternion(other)) <= tol


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
QI = Quaternion(0.0, 1.0, 0.0, 0.0)
QJ = Quaternion(0.0, 0.0, 1.0, 0.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def as_quaternion(v) -> Quaternion:
    """Coerce a Quaternion, ImaginaryUnit, real number or 4-sequence."""
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, ImaginaryUnit):
        return v.as_quaternion()
    if isinstance(v, (int, float, np.floating, np.integer)):
        return Quaternion.real(float(v))
    return Quaternion.from_array(v)


@dataclass(frozen=True)
class ImaginaryUnit:
    """Unit purely imaginary quaternion; renormalized on construction."""

    ix: float
    iy: float
    iz: float

    def __post_init__(self):
        n = math.sqrt(self.ix * self.ix + self.iy * self.iy + self.iz * self.iz)
        if n == 0.0 or not math.isfinite(n):
            raise DomainError("imaginary unit must be a nonzero finite 3-vector")
        object.__setattr__(self, "ix", self.ix / n)
        object.__setattr__(self, "iy", self.iy / n)
        object.__setattr__(self, "iz", self.iz / n)

    @classmethod
    def from_array(cls, arr) -> "ImaginaryUnit":
        a = np.asarray(arr, dtype=float).reshape(3)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def vector(self) -> np.ndarray:
        return np.array([self.ix, self.iy, self.iz])

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.ix, self.iy, self.iz)

    def to_array(self) -> np.ndarray:
        return self.as_quaternion().to_array()

    def to_list(self) -> list[float]:
        return [self.ix, self.iy, self.iz]

    def slice_point(self, z: complex) -> Quaternion:
        """The quaternion ``Re z + I Im z`` on this slice."""
        z = complex(z)
        return Quaternion(z.real, self.ix * z.imag, self.iy * z.imag, self.iz * z.imag)


UNIT_I = ImaginaryUnit(1.0, 0.0, 0.0)
UNIT_J = ImaginaryUnit(0.0, 1.0, 0.0)
UNIT_K = ImaginaryUnit(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SliceCoordinates:
    x: float
    y: float
    unit: ImaginaryUnit

    def reconstruct(self) -> Quaternion:
        return self.unit.slice_point(complex(self.x, self.y))


def q_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a b``."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def q_inv(a: Quaternion) -> Quaternion:
    n2 = a.norm2()
    if n2 == 0.0:
        raise DomainError("inverse of zero quaternion")
    return Quaternion(a.w / n2, -a.x / n2, -a.y / n2, -a.z / n2)


def slice_decompose(q: Quaternion) -> SliceCoordinates:
    """Write ``q = x + I y`` with ``y = |Im q|``; real points get the unit ``i``."""
    q = as_quaternion(q)
    y = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if y == 0.0:
        return SliceCoordinates(q.w, 0.0, UNIT_I)
    return SliceCoordinates(q.w, y, ImaginaryUnit(q.x, q.y, q.z))


def orthogonal_unit(i: ImaginaryUnit) -> ImaginaryUnit:
    """Deterministic unit ``j`` with ``j`` orthogonal to ``i``.

    Picks the coordinate axis least aligned with ``i`` and removes its
    ``i`` component (Gram-Schmidt).
    """
    v = i.vector()
    axis = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[axis] = 1.0
    u = e - v * v[axis]
    return ImaginaryUnit.from_array(u)


def _rotation_from_seed(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    # uniformly random rotation from a unit quaternion
    qv = rng.normal(size=4)
    w, x, y, z = qv / np.linalg.norm(qv)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def sample_sphere(m: int, seed: int = 0) -> list[ImaginaryUnit]:
    """``m`` quasi-uniform imaginary units, always starting with i, j, k.

    The remaining ``m - 3`` points come from a Fibonacci lattice rotated
    by a rotation derived from ``seed``.
    """
    if m < 1:
        raise DomainError("sample_sphere needs m >= 1")
    units = [UNIT_I, UNIT_J, UNIT_K][: min(m, 3)]
    rest = m - len(units)
    if rest > 0:
        golden = math.pi * (3.0 - math.sqrt(5.0))
        k = np.arange(rest)
        zc = 1.0 - 2.0 * (k + 0.5) / rest
        r = np.sqrt(1.0 - zc * zc)
        pts = np.stack([r * np.cos(golden * k), r * np.sin(golden * k), zc], axis=1)
        pts = pts @ _rotation_from_seed(seed).T
        units.extend(ImaginaryUnit.from_array(p) for p in pts)
    return units


# -- vectorized helpers (last axis = w, x, y, z) -----------------------------

def qmul_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj_arr(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qabs_arr(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(a) ** 2, axis=-1))


def unit_left_mul_arr(unit: ImaginaryUnit, b: np.ndarray) -> np.ndarray:
    """``I b`` for a fixed unit ``I`` and an array of quaternions ``b``."""
    u = unit.vector()
    b = np.asarray(b, dtype=float)
    bw = b[..., 0]
    bv = b[..., 1:]
    w = -(bv @ u)
    v = bw[..., None] * u + np.cross(u, bv)
    return np.concatenate([w[..., None], v], axis=-1)


def slice_points_arr(unit: ImaginaryUnit, zeta: np.ndarray) -> np.ndarray:
    """Quaternion array for complex points ``zeta`` placed on the slice of ``unit``."""
    zeta = np.asarray(zeta, dtype=complex)
    out = np.empty(zeta.shape + (4,))
    out[..., 0] = zeta.real
    out[..., 1:] = zeta.imag[..., None] * unit.vector()
    return out
