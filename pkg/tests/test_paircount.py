"""Pair counting: three implementations against each other and the identities."""

import math

import pytest

from treebound import (
    CapacityError,
    ValidationError,
    count_pairs_closed,
    count_pairs_enum,
    count_pairs_sum,
    growth_ratio,
    total_ordered_pairs,
)


def test_enum_examples():
    assert count_pairs_enum(2, 2, 1) == 4
    assert count_pairs_enum(2, 2, 2) == 2
    for A in (2, 3):
        for L in (1, 2, 5):
            assert count_pairs_enum(A, 1, L) == 0


def test_enum_capacity_cap():
    # depth 9 at rate 3 holds 9841 nodes, depth 10 holds 29524
    with pytest.raises(CapacityError):
        count_pairs_enum(3, 10, 1)


def test_sum_examples():
    assert count_pairs_sum(2, 2, 1) == 4
    assert count_pairs_sum(3, 4, 3) == count_pairs_enum(3, 4, 3)
    assert count_pairs_sum(2, 5, 9) == 0


def test_closed_examples():
    assert count_pairs_closed(2, 2, 1) == 4  # ancestor term alone: 2*(4-2)/1
    assert count_pairs_closed(2, 2, 2) == 2  # meeting-node term alone
    assert count_pairs_closed(2, 5, 9) == 0  # beyond the diameter 2*(P-1)


def test_three_way_equality_small_grid():
    for A in (2, 3):
        for P in range(1, 7):
            for L in range(1, 2 * (P - 1) + 1):
                e = count_pairs_enum(A, P, L)
                s = count_pairs_sum(A, P, L)
                c = count_pairs_closed(A, P, L)
                assert e == s == c, (A, P, L, e, s, c)


def test_sum_closed_equality_wide_grid():
    for A in range(2, 6):
        for P in range(1, 13):
            for L in range(1, 2 * (P - 1) + 1):
                assert count_pairs_sum(A, P, L) == count_pairs_closed(A, P, L), (A, P, L)


def test_total_pairs_identity():
    for A in range(2, 6):
        for P in range(1, 13):
            total = sum(count_pairs_closed(A, P, L) for L in range(1, 2 * (P - 1) + 1))
            assert total == total_ordered_pairs(A, P)


def test_diameter_support():
    for A in (2, 3):
        for P in range(2, 8):
            for L in range(1, 2 * (P - 1) + 1):
                assert count_pairs_closed(A, P, L) > 0
            assert count_pairs_closed(A, P, 2 * (P - 1) + 1) == 0


def test_growth_ratio_values():
    assert growth_ratio(2, 1, 3) == 0.0
    expected = 4 / (2 * 2**2.5)
    assert growth_ratio(2, 2, 1) == pytest.approx(expected, rel=1e-12)


def test_growth_ratio_large_arguments_stay_finite():
    # counts near A**(P + L/2) overflow 63 bits long before this
    r = growth_ratio(3, 30, 40)
    assert math.isfinite(r) and r > 0


def test_input_validation():
    with pytest.raises(ValidationError):
        count_pairs_sum(1, 3, 1)
    with pytest.raises(ValidationError):
        count_pairs_closed(2, 0, 1)
    with pytest.raises(ValidationError):
        count_pairs_enum(2, 3, 0)
