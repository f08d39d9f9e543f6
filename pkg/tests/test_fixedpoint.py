from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import rational_sum
from histanon.fixedpoint import (
    Accum48_16,
    Weight16_16,
    accum_add,
    meets_threshold,
    reciprocal,
    to_float,
    weight_unit,
)


def test_unit_weight():
    assert weight_unit().raw == 65536
    assert to_float(weight_unit()) == 1.0
    assert weight_unit() == reciprocal(1)


@pytest.mark.parametrize("h, raw", [(1, 65536), (2, 32768), (3, 65536 // 3), (7, 9362), (65537, 0)])
def test_reciprocal(h, raw):
    assert reciprocal(h).raw == raw


def test_reciprocal_of_three_is_21845():
    assert reciprocal(3).raw == 21845


def test_reciprocal_domain():
    with pytest.raises(ValueError):
        reciprocal(0)


def test_halves_sum_exactly():
    a = accum_add(accum_add(Accum48_16(), reciprocal(2)), reciprocal(2))
    assert a.raw == 65536


def test_thirds_fall_short():
    a = Accum48_16()
    for _ in range(3):
        a = a + reciprocal(3)
    assert a.raw == 3 * 21845 == 65535
    assert not meets_threshold(a, 1)


def test_threshold_boundary():
    assert meets_threshold(Accum48_16(5 * 65536), 5)
    assert not meets_threshold(Accum48_16(5 * 65536 - 1), 5)
    three = Accum48_16(3 * weight_unit().raw)
    assert meets_threshold(three, 2)
    with pytest.raises(ValueError):
        meets_threshold(three, 0)


def test_overflow_is_an_error():
    with pytest.raises(OverflowError):
        accum_add(Accum48_16(2**64 - 1), weight_unit())
    with pytest.raises(OverflowError):
        Weight16_16(2**32)


def test_reciprocal_bracket_for_first_million():
    h = np.arange(1, 1_000_001, dtype=np.int64)
    raw = np.array([reciprocal(int(x)).raw for x in h[:2000]] + [65536 // int(x) for x in h[2000:]])
    # the scalar API is spot-checked above; the bracket holds for floor(2^16/h)
    assert np.all(raw * h <= 65536)
    assert np.all((raw + 1) * h > 65536)
    for x in random.Random(4).sample(range(1, 1_000_001), 500):
        assert reciprocal(x).raw == raw[x - 1]


@given(st.lists(st.integers(1, 5000), max_size=300))
def test_error_bound_against_exact_rational(hs):
    a = Accum48_16()
    for h in hs:
        a = accum_add(a, reciprocal(h))
    exact = rational_sum(hs)
    assert abs(Fraction(a.raw, 65536) - exact) <= Fraction(len(hs), 65536)


@given(st.lists(st.integers(1, 100), max_size=8))
def test_order_independent(hs):
    raws = set()
    for perm in itertools.islice(itertools.permutations(hs), 50):
        a = Accum48_16()
        for h in perm:
            a = accum_add(a, reciprocal(h))
        raws.add(a.raw)
    assert len(raws) <= 1


@given(st.integers(0, 2**40), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_associative(a, b, c):
    wb, wc = Weight16_16(b), Weight16_16(c)
    left = accum_add(accum_add(Accum48_16(a), wb), wc)
    right = Accum48_16(a + accum_add(Accum48_16(b), wc).raw)
    assert left == right
