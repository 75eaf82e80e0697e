import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slicereg.quaternion_core import (
    DomainError, ImaginaryUnit, Quaternion, QI, QJ, QK, UNIT_I, q_mul, slice_decompose,
)
from slicereg.slice_series import (
    PowerSeries, SliceRational, eval_series, extend, function_from_json, load_function, mobius,
    mobius_exact, regular_conjugate, restriction, save_function, slice_derivative, split,
    star_mul, star_reciprocal, symmetrization, tail_projection,
)

ONE = Quaternion(1.0)
seeds = st.integers(0, 2**31 - 1)


def rand_series(rng, degree=8, scale=0.5):
    return PowerSeries(rng.normal(size=(degree + 1, 4)) * scale)


def rand_point(rng, radius=0.95):
    v = rng.normal(size=4)
    return Quaternion.from_array(v * radius * rng.random() ** 0.25 / np.linalg.norm(v))


def brute_eval(f, q):
    """Direct sum of q^n a_n with repeated quaternion products."""
    out, qn = Quaternion(), ONE
    for c in f.coefficient_list():
        out = out + q_mul(qn, c)
        qn = q_mul(qn, q)
    return out


# -- evaluation --------------------------------------------------------------

def test_eval_examples():
    assert eval_series(PowerSeries([[0, 0, 0, 0], [1, 0, 0, 0]]), Quaternion(0.3, 0.4)).isclose(Quaternion(0.3, 0.4))
    assert eval_series(PowerSeries([QJ]), Quaternion(0.1, 0.2, 0.3)).isclose(QJ)
    f = PowerSeries([Quaternion(), QI, QK])
    assert eval_series(f, Quaternion(0, 0, 0.5)).isclose(Quaternion(0, 0, 0, -0.75), 1e-15)


def test_eval_outside_ball():
    with pytest.raises(DomainError, match="outside open unit ball"):
        eval_series(PowerSeries([ONE]), Quaternion(1.0))


@given(seeds)
def test_eval_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    f, q = rand_series(rng), rand_point(rng)
    assert abs(eval_series(f, q) - brute_eval(f, q)) < 1e-12


# -- derivative --------------------------------------------------------------

def test_derivative_examples():
    assert np.allclose(slice_derivative(PowerSeries([[0, 0, 0, 0], [1, 0, 0, 0]])).coeffs, [[1, 0, 0, 0]])
    d = slice_derivative(PowerSeries([Quaternion(), Quaternion(), QK]))
    assert np.allclose(d.coeffs, [[0, 0, 0, 0], [0, 0, 0, 2]])


def test_derivative_of_mobius_by_finite_difference():
    s = mobius(Quaternion(0.5))
    d = slice_derivative(s)
    z, h = Quaternion(0.2, 0.1), 1e-6
    fd = (eval_series(s, z + h) - eval_series(s, z - h)) / (2 * h)
    assert abs(eval_series(d, z) - fd) < 1e-8


# -- star algebra ------------------------------------------------------------

def test_star_examples(rng):
    g = rand_series(rng, 4)
    assert np.allclose(star_mul(PowerSeries([ONE]), g).coeffs, g.coeffs)
    ij = star_mul(PowerSeries([Quaternion(), QI]), PowerSeries([Quaternion(), QJ]))
    assert np.allclose(ij.coeffs, [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]])


def test_star_at_real_point(rng):
    f, g = rand_series(rng, 4), rand_series(rng, 4)
    q = Quaternion(0.3)
    assert abs(eval_series(star_mul(f, g), q) - eval_series(f, q) * eval_series(g, q)) < 1e-12


@given(seeds)
def test_star_twisted_product(seed):
    rng = np.random.default_rng(seed)
    f, g, q = rand_series(rng), rand_series(rng), rand_point(rng)
    fq = eval_series(f, q)
    if abs(fq) < 1e-6:
        return
    moved = (fq.conj() / fq.norm2()) * q * fq
    assert abs(eval_series(star_mul(f, g), q) - fq * eval_series(g, moved)) < 1e-10


@given(seeds)
def test_star_associative_distributive(seed):
    rng = np.random.default_rng(seed)
    f, g, h = (rand_series(rng, 5) for _ in range(3))
    assert np.allclose(star_mul(star_mul(f, g), h).coeffs, star_mul(f, star_mul(g, h)).coeffs, atol=1e-12)
    assert np.allclose(star_mul(f, g + h).coeffs, (star_mul(f, g) + star_mul(f, h)).coeffs, atol=1e-12)


def test_conjugate_examples(rng):
    assert np.allclose(regular_conjugate(PowerSeries([QK])).coeffs, [[0, 0, 0, -1]])
    real = PowerSeries(rng.normal(size=(4, 1)) * np.array([[1, 0, 0, 0]]))
    assert np.allclose(regular_conjugate(real).coeffs, real.coeffs)
    f = PowerSeries([ONE, QI, QJ])
    assert np.allclose(regular_conjugate(f).coeffs, [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0]])
    # brute-force convolution of f and f^c
    fc = regular_conjugate(f).coefficient_list()
    brute = np.zeros((5, 4))
    for a, x in enumerate(f.coefficient_list()):
        for b, y in enumerate(fc):
            brute[a + b] += q_mul(x, y).to_array()
    assert np.allclose(brute[:, 1:], 0.0)
    assert np.allclose(symmetrization(f), brute[:, 0])


@given(seeds)
def test_conjugate_involution(seed):
    f = rand_series(np.random.default_rng(seed))
    assert np.array_equal(regular_conjugate(regular_conjugate(f)).coeffs, f.coeffs)
    assert np.allclose(star_mul(f, regular_conjugate(f)).coeffs[:, 1:], 0.0, atol=1e-12)


def test_reciprocal_examples():
    r = star_reciprocal(PowerSeries([Quaternion(0, 2, 0, 0)]))
    assert np.allclose(r.coeffs[0], [0, -0.5, 0, 0]) and not r.truncated
    a = Quaternion(0.4, 0.0, 0.2, 0.0)
    inv = star_reciprocal(PowerSeries([ONE, -a]), 10)
    power = ONE
    for n in range(11):
        assert abs(inv.coefficient(n) - power) < 1e-13
        power = power * a
    with pytest.raises(DomainError, match="undefined at 0"):
        star_reciprocal(PowerSeries([Quaternion(), ONE]))


@given(seeds, st.floats(0.5, 2.0))
def test_reciprocal_residual(seed, size):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(9, 4)) * 0.5
    c[0] *= size / np.linalg.norm(c[0])
    f = PowerSeries(c)
    prod = star_mul(f, star_reciprocal(f)).coeffs[:9]
    assert np.allclose(prod, np.vstack([[1, 0, 0, 0], np.zeros((8, 4))]), atol=1e-10)


# -- splitting and extension -------------------------------------------------

def test_split_examples():
    s = split(PowerSeries([QJ]), UNIT_I)
    assert np.allclose(s.f1.coeffs, [0]) and np.allclose(s.f2.coeffs, [1])
    s = split(PowerSeries([Quaternion(1, 1)]), UNIT_I)
    assert np.allclose(s.f1.coeffs, [1 + 1j]) and np.allclose(s.f2.coeffs, [0])
    s = split(PowerSeries([Quaternion(1, 1, 1, 1)]), UNIT_I)
    assert np.allclose(s.f1.coeffs, [1 + 1j]) and np.allclose(s.f2.coeffs, [1 + 1j])


@given(seeds)
def test_split_recombines(seed):
    rng = np.random.default_rng(seed)
    f = rand_series(rng)
    i = ImaginaryUnit.from_array(rng.normal(size=3))
    assert np.allclose(split(f, i).recombine().coeffs, f.coeffs, atol=1e-13)


def test_extend_examples():
    ident = lambda z: Quaternion(z.real, z.imag)
    q = Quaternion(0.2, 0, 0.3)
    assert extend(ident, UNIT_I, q).isclose(q, 1e-15)
    v = lambda z: Quaternion(z.real ** 2, z.imag, 0.5)
    assert extend(v, ImaginaryUnit(0, 0, 1), Quaternion(0.3)).isclose(v(0.3 + 0j))
    f = PowerSeries([Quaternion(), Quaternion(), QK])
    p = Quaternion(0.1, 0, 0.2)
    assert abs(extend(restriction(f, UNIT_I), UNIT_I, p) - eval_series(f, p)) < 1e-15
    with pytest.raises(DomainError):
        extend(ident, UNIT_I, Quaternion(1.0))


@given(seeds)
def test_representation_formula(seed):
    rng = np.random.default_rng(seed)
    f, q = rand_series(rng), rand_point(rng)
    i = ImaginaryUnit.from_array(rng.normal(size=3))
    assert abs(extend(restriction(f, i), i, q) - eval_series(f, q)) < 1e-11


# -- Mobius maps -------------------------------------------------------------

def test_mobius_examples():
    a = Quaternion(0.2, 0.3, -0.1, 0.4)
    for s in (mobius(a), mobius_exact(a)):
        assert abs(eval_series(s, a, allow_tail=True)) < 1e-10
        assert abs(eval_series(s, Quaternion(), allow_tail=True) - a) < 1e-12
    assert np.allclose(mobius(Quaternion()).coeffs, [[0, 0, 0, 0], [-1, 0, 0, 0]])
    assert eval_series(mobius_exact(Quaternion(0.5)), Quaternion(0.25)).isclose(Quaternion(2 / 7), 1e-14)
    with pytest.raises(DomainError):
        mobius(Quaternion(1.0))


def test_series_and_closed_form_agree(rng):
    a = rand_point(rng, 0.6)
    s, e = mobius(a), mobius_exact(a)
    for _ in range(10):
        q = rand_point(rng, 0.6)
        assert abs(eval_series(s, q, allow_tail=True) - eval_series(e, q)) < 1e-9
    assert np.allclose(e.to_power_series(40).coeffs, s.coeffs[:41], atol=1e-12)


def test_truncated_series_refuses_tail():
    s = mobius(Quaternion(0.9), out_degree=16)
    with pytest.raises(DomainError):
        eval_series(s, Quaternion(0.95))
    assert np.isfinite(eval_series(s, Quaternion(0.95), allow_tail=True).w)


@given(seeds)
def test_mobius_slice_involution(seed):
    rng = np.random.default_rng(seed)
    a = rand_point(rng, 0.95)
    unit = slice_decompose(a).unit
    s = mobius_exact(a)
    z = 0.95 * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
    coord = lambda v: complex(v[0], float(np.dot(v[1:], unit.vector())))
    w = coord(s.on_slice(unit, np.array(z)))
    assert abs(w) < 1.0
    assert abs(coord(s.on_slice(unit, np.array(w))) - z) < 1e-9


def test_rational_rejects_disk_zero():
    with pytest.raises(DomainError):
        SliceRational(PowerSeries([ONE]), np.array([1.0, -2.0]))


# -- tail projection and spec files ------------------------------------------

def test_tail_projection():
    f = PowerSeries([ONE, QI])
    assert np.allclose(tail_projection(f, 0).coeffs, [[0, 0, 0, 0], [0, 1, 0, 0]])
    assert np.allclose(tail_projection(f, 5).coeffs, 0.0)


def test_function_spec_round_trip(tmp_path, rng):
    f = rand_series(rng, 3)
    path = tmp_path / "f.json"
    save_function(f, path)
    assert np.allclose(load_function(path).coeffs, f.coeffs)
    with pytest.raises(DomainError):
        function_from_json({"coeffs": [[1, 2, 3]]})
    with pytest.raises(DomainError):
        function_from_json({})
    with pytest.raises(json.JSONDecodeError):
        path.write_text("{bad")
        load_function(path)
