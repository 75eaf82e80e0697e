"""Quadrature on slice disks for the Mobius-invariant measure.

Points of a slice ``B_i`` are handled as complex numbers ``zeta = x + iy``
standing for ``x + I y``.  Area weights are normalized so the full unit
disk has mass 1; the invariant measure is ``dA / (1 - |z|^2)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .quaternion_core import DomainError, ImaginaryUnit

DEFAULT_RADIAL = 128
DEFAULT_ANGULAR = 128
DEFAULT_RMAX = 1.0 - 1e-4
RICHARDSON_FACTOR = 4.0
# sharpness of the partition of unity used for recentered integration
PARTITION_POWER = 2.0
RHO_CLAMP = 1.0 - 1e-15


class QuadratureError(DomainError):
    pass


@dataclass(frozen=True, eq=False)
class DiskRule:
    """Tensor rule on ``|z| <= r_max``: Gauss-Legendre in ``u = r^2``, trapezoid in angle."""

    radial_nodes: int
    angular_nodes: int
    r_max: float
    extrapolate: bool = False
    nodes: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)

    def descriptor(self) -> dict:
        return {
            "radial": self.radial_nodes,
            "angular": self.angular_nodes,
            "r_max": self.r_max,
            "extrapolate": self.extrapolate,
        }

    @property
    def size(self) -> int:
        return self.nodes.size

    @cached_property
    def companion(self) -> "DiskRule":
        """Same rule truncated at ``1 - r^2`` enlarged by ``RICHARDSON_FACTOR``."""
        eps = 1.0 - self.r_max ** 2
        r2 = math.sqrt(1.0 - RICHARDSON_FACTOR * eps)
        return build_rule(self.radial_nodes, self.angular_nodes, r2, extrapolate=False)

    @cached_property
    def invariant_weights(self) -> np.ndarray:
        return self.weights / (1.0 - np.abs(self.nodes) ** 2) ** 2


def build_rule(radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR,
               r_max: float = DEFAULT_RMAX, extrapolate: bool = False) -> DiskRule:
    if radial < 1 or angular < 1:
        raise DomainError("rule needs at least one radial and one angular node")
    if not 0.0 < r_max < 1.0:
        raise DomainError("r_max must lie in (0, 1)")
    if extrapolate and RICHARDSON_FACTOR * (1.0 - r_max ** 2) >= 1.0:
        raise DomainError("r_max too small for boundary extrapolation")
    x, w = np.polynomial.legendre.leggauss(radial)
    umax = r_max * r_max
    u = 0.5 * (x + 1.0) * umax
    wu = 0.5 * w * umax
    theta = 2.0 * math.pi * (np.arange(angular) + 0.5) / angular
    r = np.sqrt(u)
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    # dA = (1/pi) r dr dtheta = du dtheta / (2 pi); trapezoid weight 2 pi / M
    weights = np.repeat(wu / angular, angular)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return DiskRule(radial, angular, r_max, extrapolate, nodes, weights)


def mobius_disk(c: complex, z):
    """Complex involution ``(c - z) / (1 - conj(c) z)``."""
    z = np.asarray(z, dtype=complex)
    return (c - z) / (1.0 - np.conj(c) * z)


def _plain_sum(values: np.ndarray, inv_weights: np.ndarray, nodes: np.ndarray, unit):
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.flatnonzero(bad.reshape(-1, nodes.size).any(axis=0))[0])
        where = f" on slice {unit.to_list()}" if isinstance(unit, ImaginaryUnit) else ""
        raise QuadratureError(f"non-finite integrand at node {complex(nodes[k])}{where}")
    out = np.sum(values * inv_weights, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _partition_kernel(c: complex, z: np.ndarray) -> np.ndarray:
    """``(1 - |sigma_c(z)|^2)^s``, a bump at ``c`` in the hyperbolic geometry."""
    one_minus = (1.0 - abs(c) ** 2) * (1.0 - np.abs(z) ** 2) / np.abs(1.0 - np.conj(c) * z) ** 2
    return np.clip(one_minus, 0.0, None) ** PARTITION_POWER


def _integrate_once(g, rule: DiskRule, unit, centers: Sequence[complex]):
    if not centers:
        return _plain_sum(np.asarray(g(rule.nodes), dtype=float), rule.invariant_weights, rule.nodes, unit)
    all_centers = [0j] + [complex(c) for c in centers]
    total = 0.0
    for c in all_centers:
        pts = rule.nodes if c == 0 else mobius_disk(c, rule.nodes)
        kernels = np.stack([_partition_kernel(d, pts) for d in all_centers])
        denom = np.sum(kernels, axis=0)
        share = np.where(denom > 0, kernels[all_centers.index(c)] / np.where(denom > 0, denom, 1.0), 0.0)
        vals = np.asarray(g(pts), dtype=float) * share
        total += _plain_sum(vals, rule.invariant_weights, pts, unit)
    return total


def integrate_invariant(g: Callable[[np.ndarray], np.ndarray], rule: DiskRule,
                        unit: ImaginaryUnit | None = None, centers: Sequence[complex] = (),
                        boundary_exponent: float | None = None):
    """``int g dlambda`` over the slice disk.

    ``g`` maps an array of complex slice coordinates to nonnegative reals;
    it may return shape ``(k, n)`` to integrate ``k`` integrands at once,
    in which case an array of ``k`` integrals is returned.
    ``centers`` are points where ``g`` concentrates; the integral is then
    split by a smooth partition of unity and each piece is integrated with
    the rule transported by the Mobius involution of its center (the
    invariant measure is preserved by that change of variables).

    With ``rule.extrapolate`` and a ``boundary_exponent`` ``gamma`` (the
    truncation error behaves like ``(1 - r_max^2)^gamma``), a Richardson
    step against the companion rule removes the leading boundary error.
    """
    centers = [c for c in centers if abs(c) > 0.5]
    base = _integrate_once(g, rule, unit, centers)
    if not rule.extrapolate or boundary_exponent is None:
        return base
    if boundary_exponent <= 0:
        raise DomainError("boundary exponent must be positive")
    coarse = _integrate_once(g, rule.companion, unit, centers)
    k = RICHARDSON_FACTOR ** boundary_exponent
    return (k * base - coarse) / (k - 1.0)


def integrate_area(g: Callable[[np.ndarray], np.ndarray], rule: DiskRule) -> float | complex:
    """Plain normalized-area integral ``int g dA`` over ``|z| <= r_max``; complex integrands allowed."""
    out = np.sum(np.asarray(g(rule.nodes)) * rule.weights)
    return complex(out) if np.iscomplexobj(out) else float(out)


def pseudo_hyperbolic(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)


def bergman_metric(z, w):
    """``beta(z, w) = 1/2 log((1 + rho) / (1 - rho))``, vectorized."""
    rho = pseudo_hyperbolic(z, w)
    if np.any(rho > 1.0 + 1e-12):
        raise DomainError("pseudo-hyperbolic distance exceeds 1; points outside the disk")
    rho = np.minimum(rho, RHO_CLAMP)
    out = 0.5 * np.log((1.0 + rho) / (1.0 - rho))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BergmanDisk:
    center: complex
    radius: float
    unit: ImaginaryUnit | None = None

    def contains(self, w) -> np.ndarray:
        return np.asarray(bergman_metric(self.center, w)) < self.radius

    def euclidean(self) -> tuple[complex, float]:
        """Euclidean center and radius of the disk."""
        t = math.tanh(self.radius)
        z = complex(self.center)
        den = 1.0 - t * t * abs(z) ** 2
        return z * (1.0 - t * t) / den, t * (1.0 - abs(z) ** 2) / den


@dataclass(frozen=True, eq=False)
class DiskNodes:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))


def bergman_disk_nodes(d: BergmanDisk, rule: DiskRule) -> DiskNodes:
    """Rule nodes lying in the Bergman disk, with their plain-area weights."""
    if d.radius <= 0:
        raise DomainError("Bergman disk radius must be positive")
    mask = d.contains(rule.nodes)
    if not np.any(mask):
        raise QuadratureError("disk unresolved; refine rule")
    return DiskNodes(rule.nodes[mask], rule.weights[mask])


def bergman_disk_rule(d: BergmanDisk, radial: int = 24, angular: int = 48) -> DiskNodes:
    """Quadrature filling the Bergman disk exactly.

    A polar rule on ``|w| < tanh(r)`` is pushed forward by ``sigma_z``;
    area weights pick up the Jacobian ``|sigma_z'(w)|^2``.
    """
    if d.radius <= 0:
        raise DomainError("Bergman disk radius must be positive")
    t = math.tanh(d.radius)
    base = build_rule(radial, angular, min(t, 1.0 - 1e-15))
    c = complex(d.center)
    pts = mobius_disk(c, base.nodes)
    jac = ((1.0 - abs(c) ** 2) / np.abs(1.0 - np.conj(c) * base.nodes) ** 2) ** 2
    return DiskNodes(pts, base.weights * jac)
