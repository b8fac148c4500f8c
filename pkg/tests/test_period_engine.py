import cmath
import random
from fractions import Fraction

import pytest
from mpmath import mp, mpc

from tropical.analytic_oracle import slab_crossing_integral, wall_integral

from tropical.errors import NormalizationError, PeriodError
from tropical.lattice_core import pairing
from tropical.period_engine import (
    GluingData,
    LogTValue,
    SlabFunction,
    assemble_integral,
    check_normalized,
    compatibility_check,
    compute_period,
    edge_segment_term,
    format_complex,
    normalization_defects,
    slab_integral_closed_form,
    vertex_term,
    wall_transform,
)
from tropical.polyhedral_complex import Side
from tropical.series import TruncatedSeries, series_from_terms
from tropical.tropical_cycles import crossings


def _period(m, name):
    return compute_period(m.affine, m.all_cycles()[name], m.gluing, m.slabs)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_tate_period(manifest, k):
    product = _period(manifest(f"tate_k{k}"), "beta")
    assert product.sign == 1
    assert product.t_exponent == k
    assert abs(product.constant - 1) < 1e-25
    assert product.format(name="h_beta") == ("h_beta = t" if k == 1 else f"h_beta = t^{k}")


def test_circle_period_picks_up_gluing(manifest):
    product = _period(manifest("circle"), "loop")
    assert product.t_exponent == 2
    assert abs(product.constant - 3) < 1e-25
    assert product.format() == "h_β = 3.0·t^2"


@pytest.mark.parametrize("cycle, constant, exponent", [
    ("x_loop", 2, 2),
    ("x_transverse", 3, 0),
    ("y_transverse", 1, 0),
])
def test_torus_periods(manifest, cycle, constant, exponent):
    product = _period(manifest("torus"), cycle)
    assert product.t_exponent == exponent
    assert abs(product.constant - constant) < 1e-25


def test_focus_focus_period_is_trivial(manifest):
    product = _period(manifest("focus_focus"), "around")
    assert product.t_exponent == 0
    assert product.format() == "h_β = 1"


@pytest.mark.parametrize("name, cycle", [("interval", "across"), ("focus_focus", "spine")])
def test_relative_cycles_have_no_period(manifest, name, cycle):
    with pytest.raises(PeriodError):
        _period(manifest(name), cycle)


def test_slab_constant_enters_with_the_pairing(manifest):
    m = manifest("tate_k2")
    slabs = {"v0": SlabFunction("v0", 0, {((0,), 0): 2})}
    product = compute_period(m.affine, m.cycles["beta"], m.gluing, slabs)
    assert abs(product.constant - 2) < 1e-25
    assert product.t_exponent == 2


@pytest.mark.parametrize("name, cycle", [("tate_k3", "beta"), ("circle", "loop"), ("torus", "x_loop"),
                                         ("torus", "x_transverse"), ("focus_focus", "around")])
def test_invariance_suite(manifest, name, cycle):
    m = manifest(name)
    beta = m.cycles[cycle]
    h = compute_period(m.affine, beta, m.gluing, m.slabs)
    assert compute_period(m.affine, beta.reversed(m.affine), m.gluing, m.slabs).equals(h.inverse())
    assert compute_period(m.affine, beta.scaled(2), m.gluing, m.slabs).equals(h * h)
    assert compute_period(m.affine, beta.disjoint_union(beta), m.gluing, m.slabs).equals(h * h)


@pytest.mark.parametrize("name, cycle", [("tate_k4", "beta"), ("circle", "loop"), ("torus", "x_loop"),
                                         ("torus", "y_transverse"), ("focus_focus", "around")])
def test_assembly_matches_product_formula(manifest, name, cycle):
    m = manifest(name)
    beta = m.cycles[cycle]
    first = assemble_integral(m.affine, beta, m.gluing, m.slabs, rng=random.Random(1))
    assert first.agrees
    assert first.pieces > 0
    assert first.product.sign == 1
    for seed in range(2, 6):
        other = assemble_integral(m.affine, beta, m.gluing, m.slabs, rng=random.Random(seed))
        assert other.value == first.value
        assert abs(other.value.evaluate(0.3) - first.value.evaluate(0.3)) < 1e-20


def test_assembly_rejects_bad_radii(manifest):
    m = manifest("torus")
    with pytest.raises(PeriodError):
        assemble_integral(m.affine, m.cycles["x_loop"], m.gluing, radii={"vertex:p": (0.5, -1)})


def test_slab_closed_form_for_tate(manifest):
    m = manifest("tate_k3")
    (crossing,) = crossings(m.affine, m.cycles["beta"])
    term = slab_integral_closed_form(crossing, m.gluing, r=(0.2,), r_prime=(0.7,))
    assert term.log_t == -3
    assert term.uncancelled() == {"r": (1,), "r'": (-1,)}
    with pytest.raises(PeriodError):
        slab_integral_closed_form(crossing, m.gluing, a=0)
    with pytest.raises(PeriodError):
        slab_integral_closed_form(crossing, m.gluing, r=(-0.2,))


@pytest.mark.parametrize("name, cycle", [
    ("torus", "x_loop"),
    ("torus", "x_transverse"),
    ("torus", "y_transverse"),
    ("tate_k3", "beta"),
])
def test_slab_closed_form_matches_cylinder_quadrature(manifest, name, cycle):
    m = manifest(name)
    n = m.affine.n
    t, a = 0.3 * cmath.exp(0.7j), 0.8
    r, r_prime = (0.4, 0.6)[:n], (0.7, 0.5)[:n]
    units = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    for crossing in crossings(m.affine, m.cycles[cycle]):
        assert tuple(crossing.xi_before) == tuple(crossing.xi)
        s_from = [complex(m.gluing.value(crossing.piece, crossing.from_side, e)) for e in units]
        s_to = [complex(m.gluing.value(crossing.piece, crossing.to_side, e)) for e in units]
        closed = slab_integral_closed_form(crossing, m.gluing, a=a, r=r, r_prime=r_prime)
        numeric = slab_crossing_integral(crossing.xi, crossing.d, crossing.kappa, a, s_from, s_to,
                                         r, r_prime, t)
        expected = complex(mp.exp(-closed.evaluate(t)))
        assert abs(cmath.exp(numeric) - expected) < 1e-8 * abs(expected)


def test_log_t_values():
    closed = vertex_term(2) + edge_segment_term((1, 0), "a", "b") + edge_segment_term((1, 0), "b", "a")
    assert closed.uncancelled() == {}
    assert closed.exponentiate().sign == 1
    assert vertex_term(1).exponentiate().sign == -1
    with pytest.raises(PeriodError):
        edge_segment_term((1, 0), "a", "b").exponentiate()
    with pytest.raises(PeriodError):
        edge_segment_term((1, 0), "a", "b").evaluate(0.5)
    h = LogTValue(log_t=-2).exponentiate()
    assert h.t_exponent == 2
    assert abs(h.evaluate(0.5) - 0.25) < 1e-25


def test_gluing_values():
    side = Side("f10", 0)
    gluing = GluingData(2, {("v10<u10", side): [2, 3]})
    assert abs(gluing.value("v10<u10", side, (1, -1)) - mpc(2) / 3) < 1e-25
    assert gluing.value("v00<u00", side, (1, 1)) == 1
    assert not gluing.is_trivial()
    assert GluingData.trivial(2).is_trivial()
    with pytest.raises(PeriodError):
        GluingData(2, {("p", side): [1]})
    with pytest.raises(PeriodError):
        GluingData(2, {("p", side): [1, 0]})
    with pytest.raises(PeriodError):
        GluingData(2, strict=True).value("p", side, (1, 0))


def test_strict_gluing_needs_every_crossing(manifest):
    m = manifest("tate_k1")
    with pytest.raises(PeriodError):
        compute_period(m.affine, m.cycles["beta"], GluingData(1, strict=True))


@pytest.mark.parametrize("terms, normalized", [
    ({((0,), 0): 1, ((1,), 0): 1}, True),
    ({((0,), 0): 2, ((1,), 0): 2}, True),
    ({((0,), 0): 1, ((1,), 1): 1}, True),
    ({((0,), 0): 1, ((0,), 1): 1}, False),
    ({((0,), 0): 1, ((1,), 0): 1, ((-1,), 1): 1}, False),
])
def test_normalization(terms, normalized):
    assert check_normalized(SlabFunction("p", 2, terms)) == normalized


@pytest.mark.parametrize("terms, normalized", [
    ({((0, 0), 0): 1, ((1, 0), 0): Fraction(3, 10), ((0, 1), 1): Fraction(2, 5), ((1, 1), 1): Fraction(3, 25)}, True),
    ({((0, 0), 0): 2, ((1, 0), 0): Fraction(3, 5), ((0, 1), 1): Fraction(4, 5), ((1, 1), 1): Fraction(6, 25)}, True),
    ({((0, 0), 0): 1, ((0, 0), 1): Fraction(3, 10)}, False),
    ({((0, 0), 0): 1, ((1, 0), 0): Fraction(1, 5), ((-1, 0), 1): Fraction(1, 5)}, False),
])
def test_normalized_slabs_have_vanishing_wall_integrals(terms, normalized):
    f = SlabFunction("rho", 3, terms, rank=2)
    assert check_normalized(f) == normalized
    value = wall_integral(f.normalized_part(), (0.7, 0.9), 0.5)
    assert (abs(value) < 1e-6) == normalized


def test_normalization_defects_are_exact():
    f = SlabFunction("p", 2, {((0,), 0): 1, ((0,), 1): 1})
    assert normalization_defects(f) == {1: 1, 2: Fraction(-1, 2)}
    assert normalization_defects(f, 1) == {1: 1}
    with pytest.raises(NormalizationError):
        normalization_defects(f, 3)


def test_slab_function_validation():
    with pytest.raises(PeriodError):
        SlabFunction("p", 1, {((1,), 0): 1})
    with pytest.raises(PeriodError):
        SlabFunction("p", 1, {((0,), 0): 1, ((0,), 2): 1})
    with pytest.raises(PeriodError):
        SlabFunction("p", 1, {((0, 0), 0): 1})


def test_slab_monomials_must_be_tangent(manifest):
    affine = manifest("torus").affine
    minus, _ = affine.piece_sides("v10<u10")
    d = affine.primitive_normal("u10", minus)
    tangent = tuple(x for x in (d[1], -d[0]))
    f = SlabFunction("v10<u10", 1, {((0, 0), 0): 1, (tangent, 1): 1}, rank=2)
    assert pairing(d, tangent) == 0
    assert f.tangency_defects(affine) == []
    g = SlabFunction("v10<u10", 1, {((0, 0), 0): 1, (tuple(d), 1): 1}, rank=2)
    assert g.tangency_defects(affine) == [tuple(d)]


def test_compatibility_across_a_codimension_two_cell():
    f = SlabFunction("p", 2, {((0,), 0): 1, ((1,), 0): 1})
    f_other = SlabFunction("q", 2, {((0,), 0): 1, ((-1,), 0): 1})
    assert compatibility_check(f, f_other, (1,), 1, 1)
    assert not compatibility_check(f, f_other, (0,), 1, 1)
    with pytest.raises(PeriodError):
        compatibility_check(f, SlabFunction("q", 1, {((0,), 0): 1}), (1,), 1, 1)


def test_wall_transform():
    f = series_from_terms(2, 2, [((0, 0), 0, 1), ((1, 0), 1, 1)])
    up = wall_transform(f, (0, 1), (0, 1))
    assert up == series_from_terms(2, 2, [((0, 1), 0, 1), ((1, 1), 1, 1)])
    down = wall_transform(f, (0, 1), (0, -1))
    assert down == series_from_terms(2, 2, [((0, -1), 0, 1), ((1, -1), 1, -1), ((2, -1), 2, 1)])
    assert wall_transform(f, (0, 1), (1, 0)) == TruncatedSeries.monomial(2, 2, (1, 0))
    with pytest.raises(PeriodError):
        wall_transform(series_from_terms(2, 2, [((0, 0), 0, 2)]), (0, 1), (0, 1))


def test_format_complex():
    assert format_complex(mpc(2, 0)) == "2.0"
    assert format_complex(mpc(1, -0.5), 3) == "(1.0-0.5i)"
