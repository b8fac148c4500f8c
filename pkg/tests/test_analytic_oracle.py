import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from tropical.analytic_oracle import (
    VertexStar,
    canonical_section,
    integrate_alpha,
    level_set_areas,
    moment_map,
    principal_log,
    random_balanced_star,
    run_verification,
    split_star,
    tate_canonical_coordinate,
    tate_closed_form,
    tate_period,
    torus_degree,
    vertex_measure,
    wall_integral,
)
from tropical.config import QuadratureConfig
from tropical.errors import OracleError
from tropical.series import TruncatedSeries

T_MODULI = [0.05, 0.1, 0.3]
T_ARGUMENTS = [0.0, 1.0, 2.5]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_vanishing_torus_integral(n):
    value = integrate_alpha(n)
    expected = (2j * np.pi) ** n
    assert abs(value - expected) / abs(expected) < 1e-8


def test_vanishing_torus_ignores_the_deformation():
    flat = integrate_alpha(2, QuadratureConfig(deformation=0.0))
    wavy = integrate_alpha(2, QuadratureConfig(deformation=0.5))
    assert abs(flat - wavy) < 1e-9


def test_integrate_alpha_dimension_range():
    with pytest.raises(OracleError):
        integrate_alpha(4)


@pytest.mark.parametrize("modulus", T_MODULI)
@pytest.mark.parametrize("arg", T_ARGUMENTS)
@pytest.mark.parametrize("k", [1, 2])
def test_tate_period_grid(modulus, arg, k):
    t = modulus * np.exp(1j * arg)
    closed = tate_closed_form(t, k)
    assert abs(tate_period(t, k) - closed) / abs(closed) < 1e-8
    assert abs(tate_canonical_coordinate(t, k) - t ** k) / abs(t ** k) < 1e-8


def test_tate_period_does_not_use_the_closed_form_log(monkeypatch):
    monkeypatch.setattr("tropical.analytic_oracle.principal_log", lambda t: complex(0.0, 0.0))
    for t, k in ((0.1 * cmath.exp(2.5j), 2), (0.3 * cmath.exp(1j), 1), (0.05 + 0j, 3)):
        expected = -k * complex(math.log(abs(t)), cmath.phase(t) % (2 * math.pi))
        assert abs(tate_period(t, k) - expected) < 1e-8 * abs(expected)


def test_tate_period_needs_a_small_parameter():
    with pytest.raises(OracleError):
        tate_period(1.5, 1)
    with pytest.raises(OracleError):
        principal_log(0j)


def test_principal_log_branch():
    assert abs(principal_log(-1 + 0j) - np.pi * 1j) < 1e-15
    assert 0 <= principal_log(complex(0.5, -0.1)).imag < 2 * np.pi


@pytest.mark.parametrize("xi, j, expected", [
    ((1, 0), 1, 1),
    ((2, 1), 1, 2),
    ((2, 1), 2, -1),
    ((1, 2, 3), 2, -2),
    ((3,), 1, 3),
])
def test_torus_degree(xi, j, expected):
    exact, numeric = torus_degree(xi, j)
    assert exact == expected
    assert abs(numeric - expected) < 0.1


def test_torus_degree_random_vectors():
    rng = random.Random(11)
    nonzero = [x for x in range(-3, 4) if x]
    for _ in range(25):
        xi = tuple(rng.choice(nonzero) for _ in range(3))
        j = rng.randint(1, 3)
        exact, numeric = torus_degree(xi, j, samples=16, seed=rng.randint(0, 99))
        assert exact == (-1) ** (j + 1) * xi[j - 1]
        assert round(numeric) == exact


def test_torus_degree_errors():
    with pytest.raises(OracleError):
        torus_degree((0, 0), 1)
    with pytest.raises(OracleError):
        torus_degree((1, 0), 3)


@pytest.mark.parametrize("vectors", [[(1,), (1,), (-2,)], [(2,), (3,), (-5,)], [(1,), (2,), (-3,)]])
def test_trivalent_interval_measure_is_half(vectors):
    assert vertex_measure(VertexStar(1, vectors)) == Fraction(1, 2)


def test_planar_star_measures():
    assert vertex_measure(VertexStar(2, [(1, 0), (0, 1), (-1, -1)])) == Fraction(1, 2)
    assert vertex_measure(VertexStar(2, [(1, 0), (0, 1), (-1, 0), (0, -1)])) == 0


@pytest.mark.parametrize("vectors, expected", [
    ([(1, 0), (0, 1), (-1, -1)], {1: Fraction(1, 2), 2: Fraction(1, 2)}),
    ([(2, 0), (-1, 0), (-1, 0)], {1: Fraction(1, 2), 2: Fraction(1, 2)}),
    ([(1, 0), (-1, 0), (0, 1), (0, -1)], {2: Fraction(1)}),
    ([(1, 1), (-1, 0), (0, -1)], {1: Fraction(1, 2), 2: Fraction(1, 2)}),
])
def test_level_set_areas(vectors, expected):
    areas = level_set_areas(VertexStar(2, vectors))
    assert areas == expected
    assert sum(areas.values()) == 1


def test_level_sets_need_a_planar_star():
    with pytest.raises(OracleError):
        level_set_areas(VertexStar(1, [(1,), (-1,)]))


def test_random_star_measures_are_half_integral():
    rng = random.Random(5)
    for i in range(10):
        star = random_balanced_star(rng, 1 + i % 2, rng.randint(3, 5))
        measure = vertex_measure(star)
        assert 0 <= measure < 1
        assert (2 * measure).denominator == 1


@pytest.mark.parametrize("seed", range(6))
def test_splitting_preserves_the_measure(seed):
    rng = random.Random(seed)
    dim = 1 + seed % 2
    star = random_balanced_star(rng, dim, 5)
    parts = split_star(star)
    assert all(p.valency == 3 for p in parts)
    assert sum((vertex_measure(p) for p in parts), Fraction(0)) % 1 == vertex_measure(star)


def test_vertex_star_validation():
    with pytest.raises(OracleError):
        VertexStar(3, [(1, 0, 0), (-1, 0, 0)])
    with pytest.raises(OracleError):
        VertexStar(1, [(0,), (1,), (-1,)])
    with pytest.raises(OracleError):
        VertexStar(2, [(1, 0), (0, 1)])


def test_normalized_wall_integral_vanishes():
    f_tilde = TruncatedSeries(2, 3, {((1, 0), 0): 0.3, ((0, 1), 1): 0.4, ((1, 1), 1): 0.12})
    for t in (0.2, 0.5j, 0.7):
        assert abs(wall_integral(f_tilde, (0.7, 0.9), t)) < 1e-6


def test_pure_t_wall_does_not_vanish():
    control = TruncatedSeries(2, 3, {((0, 0), 1): 0.3})
    value = wall_integral(control, (0.7, 0.9), 0.5)
    assert abs(value) > 1e-3
    assert abs(value - (2 * np.pi) ** 2 * np.log(1.15)) < 1e-8


def test_wall_integral_errors():
    with pytest.raises(OracleError):
        wall_integral(TruncatedSeries(2, 1, {((0, 0), 0): 0.1}), (0.5, 0.5), 0.5)
    with pytest.raises(OracleError):
        wall_integral(TruncatedSeries(2, 1, {((1, 0), 0): 2.0}), (0.9, 0.9), 0.5)
    with pytest.raises(OracleError):
        wall_integral(TruncatedSeries(2, 1, {((1, 0), 0): 0.1}), (0.5,), 0.5)


def test_moment_map_and_section():
    assert moment_map([(0,), (1,)], [1.0])[0] == pytest.approx(0.5)
    square = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]
    target = np.array([0.7, 0.4])
    x = canonical_section(square, target)
    assert np.all(x > 0)
    assert np.max(np.abs(moment_map(square, x) - target)) < 1e-9
    with pytest.raises(OracleError):
        moment_map([], [1.0])


def test_verification_suite_passes():
    rows = run_verification(seed=0)
    failed = [r.quantity for r in rows if not r.passed]
    assert not failed
    assert any(r.quantity == "wall_pure_t_control" for r in rows)
