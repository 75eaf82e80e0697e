import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slicereg.quadrature import (
    BergmanDisk, QuadratureError, bergman_disk_nodes, bergman_disk_rule, bergman_metric, build_rule,
    integrate_area, integrate_invariant, mobius_disk, pseudo_hyperbolic,
)
from slicereg.quaternion_core import DomainError, UNIT_I


def test_area_examples():
    rule = build_rule(64, 64, 0.999)
    assert integrate_area(lambda z: np.ones(z.shape), rule) == pytest.approx(0.998001, rel=1e-12)
    assert abs(integrate_area(lambda z: z, rule)) < 1e-14
    fine = build_rule(64, 64, 1 - 1e-9)
    assert integrate_area(lambda z: np.abs(z) ** 2, fine) == pytest.approx(0.5, abs=1e-8)


def test_invariant_examples():
    rule = build_rule(64, 64, 0.999)
    assert integrate_invariant(lambda z: (1 - np.abs(z) ** 2) ** 2, rule) == pytest.approx(0.998001, rel=1e-12)
    ext = build_rule(extrapolate=True)
    for p, exact in ((2.0, 1.0), (3.0, 0.5), (1.5, 2.0)):
        got = integrate_invariant(lambda z: (1 - np.abs(z) ** 2) ** p, ext, boundary_exponent=p - 1)
        assert got == pytest.approx(exact, rel=1e-4)


def test_rule_errors():
    for r in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            build_rule(8, 8, r)
    with pytest.raises(DomainError):
        build_rule(0, 8, 0.5)


def test_nonfinite_integrand_names_node():
    rule = build_rule(4, 4, 0.9)
    with pytest.raises(QuadratureError, match="non-finite integrand at node"):
        integrate_invariant(lambda z: np.where(np.abs(z) > 0.5, np.inf, 1.0), rule, UNIT_I)


def test_recentering_matches_invariance():
    rule = build_rule()
    bump = lambda z: np.clip(1 - np.abs(z) ** 2 / 0.81, 0, None) ** 4
    base = integrate_invariant(bump, rule)
    for a in (0.3, 0.7, 0.95, 0.99):
        moved = integrate_invariant(lambda z: bump(mobius_disk(a, z)), rule, centers=[a])
        assert moved == pytest.approx(base, rel=5e-3)


def test_plain_rule_misses_concentration():
    # without recentering a bump near the boundary is badly resolved; documents why centers exist
    rule = build_rule(32, 32)
    bump = lambda z: np.clip(1 - np.abs(z) ** 2 / 0.25, 0, None) ** 4
    base = integrate_invariant(bump, rule)
    plain = integrate_invariant(lambda z: bump(mobius_disk(0.999, z)), rule)
    moved = integrate_invariant(lambda z: bump(mobius_disk(0.999, z)), rule, centers=[0.999])
    assert moved == pytest.approx(base, rel=1e-3)
    assert abs(plain - base) > 0.05 * base


def test_convergence_order():
    from slicereg.norms import besov_seminorm_slice
    from slicereg.slice_series import mobius_exact
    s = mobius_exact(0.7)
    val = lambda n: besov_seminorm_slice(s, 2.0, UNIT_I, build_rule(n, n, 0.99), allow_tail=True)
    ref = val(256)
    assert abs(val(16) - ref) >= 4 * abs(val(32) - ref)


def test_metric_examples():
    assert bergman_metric(0.3 + 0.1j, 0.3 + 0.1j) == 0.0
    assert bergman_metric(0, 0.5) == pytest.approx(0.5 * math.log(3), rel=1e-14)
    with pytest.raises(DomainError):
        bergman_metric(0, 1.5)


pts = st.tuples(st.floats(0, 0.999), st.floats(0, 2 * math.pi)).map(lambda t: t[0] * complex(math.cos(t[1]), math.sin(t[1])))


@given(pts, pts, pts)
def test_triangle_inequality(x, y, z):
    assert bergman_metric(x, y) + bergman_metric(y, z) >= bergman_metric(x, z) - 1e-12


@given(pts, pts, st.floats(0, 0.99))
def test_metric_mobius_invariant(x, y, c):
    assert pseudo_hyperbolic(mobius_disk(c, x), mobius_disk(c, y)) == pytest.approx(pseudo_hyperbolic(x, y), abs=1e-9)


def test_bergman_disk_nodes():
    rule = build_rule(64, 64, 0.99)
    allnodes = bergman_disk_nodes(BergmanDisk(0, 5.0), rule)
    assert allnodes.nodes.size == rule.size
    r = 1.0
    dn = bergman_disk_nodes(BergmanDisk(0, r), rule)
    assert dn.area == pytest.approx(math.tanh(r) ** 2, rel=2e-2)
    far = bergman_disk_nodes(BergmanDisk(0.9, 0.3), rule)
    assert np.all(bergman_metric(0.9, far.nodes) < 0.3)
    with pytest.raises(QuadratureError, match="disk unresolved; refine rule"):
        bergman_disk_nodes(BergmanDisk(0.999, 1e-4), build_rule(4, 4, 0.5))


def test_transported_disk_rule():
    d = BergmanDisk(0.6 + 0.2j, 1.0)
    dq = bergman_disk_rule(d)
    c, rad = d.euclidean()
    assert dq.area == pytest.approx(rad ** 2, rel=1e-10)
    assert np.all(bergman_metric(d.center, dq.nodes) < 1.0 + 1e-12)
