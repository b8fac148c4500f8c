from fractions import Fraction

import pytest

from tropical.errors import PeriodError
from tropical.series import TruncatedSeries, series_from_terms


def _t(order, rank=1, c=1):
    return TruncatedSeries.monomial(rank, order, [0] * rank, 1, c)


def test_products_truncate_at_the_order():
    one = TruncatedSeries.one(1, 2)
    cube = (one + _t(2)) ** 3
    assert cube.pure_t_terms() == {0: 1, 1: 3, 2: 3}
    assert cube.order == 2


def test_addition_keeps_the_smaller_order():
    s = TruncatedSeries.one(1, 5) + _t(2)
    assert s.order == 2


def test_monomial_products_add_exponents():
    a = TruncatedSeries.monomial(2, 3, (1, 0), 1)
    b = TruncatedSeries.monomial(2, 3, (0, -1), 2, 5)
    assert (a * b).terms == {((1, -1), 3): 5}
    assert (a * b * a).terms == {}


def test_geometric_inverse():
    f = TruncatedSeries.one(1, 3) + TruncatedSeries.monomial(1, 3, (1,), 1)
    expected = series_from_terms(1, 3, [((0,), 0, 1), ((1,), 1, -1), ((2,), 2, 1), ((3,), 3, -1)])
    assert f.inverse() == expected
    assert f * f.inverse() == TruncatedSeries.one(1, 3)
    assert f ** -2 == (f * f).inverse()


def test_inverse_needs_a_unipotent_series():
    with pytest.raises(PeriodError):
        TruncatedSeries.monomial(1, 2, (1,), 0, 2).inverse()


def test_rank_mismatch():
    with pytest.raises(PeriodError):
        TruncatedSeries.one(1, 2) + TruncatedSeries.one(2, 2)
    with pytest.raises(PeriodError):
        TruncatedSeries(1, 2, {((1, 2), 0): 1})
    with pytest.raises(PeriodError):
        TruncatedSeries(1, -1)


def test_log1p_of_pure_t():
    log = _t(4).log1p()
    assert log.pure_t_terms() == {1: 1, 2: Fraction(-1, 2), 3: Fraction(1, 3), 4: Fraction(-1, 4)}
    assert log.is_exact()


def test_log1p_collects_returning_monomials():
    # log(1 + z + t/z): the z^0 part is Σ_j −C(2j, j)/(2j) · t^j
    f = series_from_terms(1, 3, [((1,), 0, 1), ((-1,), 1, 1)])
    assert f.log1p().pure_t_terms() == {1: -1, 2: Fraction(-3, 2), 3: Fraction(-10, 3)}


def test_log1p_rejects_constant_term_and_two_sided_exponents():
    with pytest.raises(PeriodError):
        (TruncatedSeries.one(1, 2) + _t(2)).log1p()
    with pytest.raises(PeriodError):
        series_from_terms(1, 2, [((1,), 0, 1), ((-1,), 0, 1)]).log1p()


def test_repr():
    assert repr(TruncatedSeries(1, 2)) == "0"
    assert repr(TruncatedSeries.one(1, 2) + _t(2, c=3)) == "1 + 3·t"
