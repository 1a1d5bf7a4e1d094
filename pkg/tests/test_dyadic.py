from __future__ import annotations

from fractions import Fraction

import pytest

from tsplinebpx.core import DyadicIndex, IndexRect, IndexVec2, componentwise_dist, dy, midpoint
from tsplinebpx.core.dyadic import MAX_EXPONENT, dyadic_grid, translate_point
from tsplinebpx.exceptions import DyadicOverflowError


def test_canonical_form_makes_equal_values_identical() -> None:
    a = DyadicIndex(6, 2)
    b = DyadicIndex(3, 1)
    assert (a.num, a.exp) == (3, 1)
    assert a == b
    assert hash(a) == hash(b)
    assert DyadicIndex(4, 2) == 1
    assert hash(DyadicIndex(4, 2)) == hash(1)


def test_of_converts_exactly_and_rejects_non_dyadic() -> None:
    assert dy(0.375) == DyadicIndex(3, 3)
    assert dy(Fraction(5, 4)).as_fraction() == Fraction(5, 4)
    with pytest.raises(ValueError, match="not a dyadic"):
        dy(Fraction(1, 3))


def test_arithmetic_and_ordering() -> None:
    half = DyadicIndex(1, 1)
    quarter = DyadicIndex(1, 2)
    assert half + quarter == dy(0.75)
    assert half - quarter == quarter
    assert 1 - quarter == dy(0.75)
    assert half * quarter == DyadicIndex(1, 3)
    assert (half * 4) == 2
    assert quarter < half <= half < 1
    assert -half < 0
    assert abs(-half) == half
    assert quarter.scaled(2) == 1
    assert half.half() == quarter


def test_floor_ceil_and_str() -> None:
    x = dy(2.75)
    assert x.floor() == 2
    assert x.ceil() == 3
    assert dy(3).ceil() == 3
    assert str(x) == "11/4"
    assert str(dy(5)) == "5"
    assert x.to_pair() == [11, 2]


def test_midpoint_is_exact() -> None:
    assert midpoint(1, 2) == dy(1.5)
    assert midpoint(dy(1.5), 2) == dy(1.75)


def test_exponent_cap_raises() -> None:
    with pytest.raises(DyadicOverflowError):
        DyadicIndex(1, MAX_EXPONENT + 1)


def test_rect_predicates() -> None:
    a = IndexRect.of(0, 0, 2, 2)
    b = IndexRect.of(2, 0, 3, 1)
    c = IndexRect.of(1, 1, 2, 2)
    assert not a.overlaps(b)
    assert a.touches(b)
    assert a.contains(c)
    assert a.overlaps(c)
    assert a.area() == 4
    assert c.midpoint == IndexVec2.of(1.5, 1.5)
    with pytest.raises(ValueError, match="degenerate"):
        IndexRect.of(0, 0, 0, 1)


def test_componentwise_distance_and_clamp() -> None:
    x = IndexVec2.of(0.5, 4)
    y = IndexVec2.of(2, 1.25)
    assert componentwise_dist(x, y) == (dy(1.5), dy(2.75))
    assert translate_point(IndexVec2.of(0.5, 9), (2, 2), (7, 7)) == IndexVec2.of(2, 7)


def test_dyadic_grid_lists_all_points_of_the_level() -> None:
    assert dyadic_grid(1, 2, 2) == [dy(1), dy(1.25), dy(1.5), dy(1.75), dy(2)]


def test_dyadic_grid_is_exact_at_deep_levels() -> None:
    lo = DyadicIndex(1, 60)
    grid = dyadic_grid(lo, DyadicIndex(4, 60), 60)
    assert grid == [DyadicIndex(k, 60) for k in range(1, 5)]
    assert dyadic_grid(DyadicIndex(3, 3), 1, 2) == [dy(0.5), dy(0.75), dy(1)]
    assert dyadic_grid(dy(0.3125), dy(0.4375), 2) == []


def test_comparisons_agree_with_fractions_up_to_level_six() -> None:
    values = sorted({Fraction(k, 1 << level) for level in range(7) for k in range(0, 2 << level)})
    points = [dy(v) for v in values]
    for a, fa in zip(points, values, strict=True):
        for b, fb in zip(points, values, strict=True):
            assert (a < b) == (fa < fb)
            assert (a <= b) == (fa <= fb)
            assert (a == b) == (fa == fb)
            assert (a - b).as_fraction() == fa - fb
    assert [p.as_fraction() for p in sorted(reversed(points))] == values
