import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import naive_morrey, naive_morrey_supported
from morreyseq.dyadic import DyadicCube
from morreyseq.spaces import (FiniteSequence, SpaceParams, SupportedSequence, attaining_cube,
                              cube_value, equiv_norm_arbitrary, equivalence_constant, linf_norm,
                              lorentz_embedding_constant, lorentz_quasinorm, lp_norm, morrey_norm,
                              morrey_norm_batch, morrey_norm_finite, morrey_norm_supported, power,
                              predual_level_norm, product)

P21 = SpaceParams(2, 1)


def fin(values, dim=1):
    level = int(round(math.log2(len(values)) / dim))
    return FiniteSequence(dim, level, values)


def sup(entries):
    return SupportedSequence(len(next(iter(entries))), entries)


# ---- params


def test_params_reject_p_above_u():
    with pytest.raises(ValueError, match="requires p <= u"):
        SpaceParams(2, 3)
    with pytest.raises(ValueError):
        SpaceParams(2, 0)


def test_conjugates():
    assert SpaceParams(2, 4 / 3).p_conj == pytest.approx(4)
    assert SpaceParams(4, 1).p_conj == math.inf
    assert SpaceParams(2, 1).u_conj == 2


def test_finite_sequence_validates_length_and_values():
    with pytest.raises(ValueError, match="expected 4 values"):
        FiniteSequence(1, 2, [1, 2, 3])
    with pytest.raises(ValueError):
        FiniteSequence(1, 1, [1, math.nan])
    assert list(FiniteSequence(1, 1, [-3, 4]).values) == [3, 4]


def test_supported_sequence_drops_zeros_and_takes_modulus():
    s = SupportedSequence(1, {(0,): 0.0, (2,): -2.0, (1,): 3 + 4j})
    assert s.entries == {(1,): 5.0, (2,): 2.0}


# ---- Morrey norm examples


def test_constant_block():
    assert morrey_norm_finite(fin([1, 1, 1, 1]), P21) == pytest.approx(2, rel=1e-15)


def test_equal_exponents_is_lp():
    assert morrey_norm_finite(fin([3, 4]), SpaceParams(2, 2)) == pytest.approx(5, rel=1e-15)


@pytest.mark.parametrize("u, p", [(2, 1), (4, 3), (3, 0.5)])
def test_delta_has_unit_norm(u, p):
    assert morrey_norm_finite(fin([1, 0, 0, 0]), SpaceParams(u, p)) == pytest.approx(1, rel=1e-15)


def test_supported_across_origin():
    # the two cells sit in different dyadic cubes at every level, so only unit cubes contribute
    s = sup({(-1,): 1.0, (1,): 1.0})
    assert morrey_norm_supported(s, P21) == pytest.approx(1.0, rel=1e-15)
    assert naive_morrey_supported(s.entries, 2, 1, extra_levels=6) == pytest.approx(1.0)


def test_supported_single_cell():
    for params in (P21, SpaceParams(3, 3), SpaceParams(4, 0.5)):
        assert morrey_norm_supported(sup({(7,): 2.5}), params) == pytest.approx(2.5)


def test_supported_equal_exponents_on_one_orthant():
    s = sup({(0,): 1.0, (1,): 1.0, (2,): 1.0, (3,): 1.0})
    assert morrey_norm(s, SpaceParams(1, 1)) == pytest.approx(4)


def test_equal_exponents_across_orthants_is_max_over_orthants():
    s = sup({(-2,): 3.0, (5,): 4.0})
    assert morrey_norm(s, SpaceParams(2, 2)) == pytest.approx(4)
    assert naive_morrey_supported(s.entries, 2, 2, extra_levels=6) == pytest.approx(4)


# ---- attaining cube


def test_attaining_cube_examples():
    assert attaining_cube(sup({(0,): 1.0}), P21) == DyadicCube(0, (0,))
    assert attaining_cube(fin([1, 1, 1, 1]), P21) == DyadicCube(2, (0,))
    assert attaining_cube(sup({(0,): 10.0, (7,): 1.0}), P21) == DyadicCube(0, (0,))


def test_attaining_cube_rejects_zero_and_equal_exponents():
    with pytest.raises(ValueError):
        attaining_cube(fin([0, 0]), P21)
    with pytest.raises(ValueError):
        attaining_cube(fin([1, 0]), SpaceParams(2, 2))


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-20, 20), st.integers(-20, 20)),
                       st.floats(0.01, 10), min_size=1, max_size=12))
def test_attaining_cube_reproduces_norm(entries):
    s = sup(entries)
    q = attaining_cube(s, SpaceParams(3, 1))
    assert cube_value(s, SpaceParams(3, 1), q) == morrey_norm(s, SpaceParams(3, 1))


# ---- classical norms


def test_lp_linf_examples():
    assert lp_norm(fin([3, 4]), 2) == pytest.approx(5)
    assert linf_norm(fin([3, 4])) == 4
    assert lp_norm(fin([1, 1, 1, 1]), 0.5) == pytest.approx(16)
    assert lp_norm(fin([3, 4]), math.inf) == 4


def test_lorentz_examples():
    assert lorentz_quasinorm(fin([1, 1, 1, 1]), 2) == pytest.approx(2)
    assert lorentz_quasinorm(sup({(0,): 1.0}), 5) == 1
    assert lorentz_quasinorm(fin([8, 4, 2, 1]), 1) == 8


# ---- arbitrary cubes


def test_arbitrary_cube_examples():
    assert equiv_norm_arbitrary(sup({(0,): 1.0, (1,): 1.0}), P21, 1) == pytest.approx(math.sqrt(2))
    assert equiv_norm_arbitrary(sup({(0,): 1.0}), P21, 2) == pytest.approx(1)


def test_arbitrary_cube_finds_non_dyadic_block():
    # cells 1 and 2 never share a dyadic cube below level 2
    s = sup({(1,): 1.0, (2,): 1.0})
    assert morrey_norm(s, P21) == pytest.approx(1)
    assert equiv_norm_arbitrary(s, P21, 1) == pytest.approx(math.sqrt(2))


def test_chain_constant_is_needed():
    # ratio 3/sqrt(2) > 2^{2d(1/p-1/u)} = 2, within the corrected constant 2^{d/p} * 2 = 4
    s = sup({(-1,): 1.0, (0,): 1.0, (1,): 1.0})
    ratio = equiv_norm_arbitrary(s, P21, 2) / morrey_norm(s, P21)
    assert ratio == pytest.approx(3 / math.sqrt(2))
    assert ratio <= equivalence_constant(P21, 1)


params_st = st.sampled_from([SpaceParams(2, 1), SpaceParams(4, 3), SpaceParams(3, 0.5), SpaceParams(4, 1)])


@settings(max_examples=80, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-12, 12)), st.floats(0.01, 5), min_size=1, max_size=8),
       params_st)
def test_norm_chain(entries, params):
    s = sup(entries)
    m = morrey_norm(s, params)
    a1 = equiv_norm_arbitrary(s, params, 1)
    a2 = equiv_norm_arbitrary(s, params, 2)
    assert m <= a1 * (1 + 1e-10)
    assert a1 <= a2 * (1 + 1e-10)
    assert a2 <= equivalence_constant(params, 1) * m * (1 + 1e-10)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.floats(0.01, 5),
                       min_size=1, max_size=6), params_st)
def test_norm_chain_2d(entries, params):
    s = sup(entries)
    m = morrey_norm(s, params)
    a2 = equiv_norm_arbitrary(s, params, 2)
    assert m <= equiv_norm_arbitrary(s, params, 1) * (1 + 1e-10) <= a2 * (1 + 1e-10) ** 2
    assert a2 <= equivalence_constant(params, 2) * m * (1 + 1e-10)


# ---- oracle agreement and structural properties


@pytest.mark.parametrize("dim, level", [(1, 1), (1, 3), (2, 1), (2, 2)])
@pytest.mark.parametrize("u, p", [(2, 1), (2, 2), (4, 3), (3, 0.5)])
def test_finite_matches_naive(dim, level, u, p):
    rng = np.random.default_rng(level * 10 + dim)
    for _ in range(20):
        vals = rng.exponential(size=2 ** (level * dim)) * (rng.uniform(size=2 ** (level * dim)) < 0.7)
        got = morrey_norm_finite(FiniteSequence(dim, level, vals), SpaceParams(u, p))
        assert got == pytest.approx(naive_morrey(vals, dim, level, u, p), rel=1e-12, abs=0)


@settings(max_examples=80, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-40, 40)), st.floats(0.001, 100), min_size=1, max_size=10),
       params_st)
def test_supported_matches_naive(entries, params):
    got = morrey_norm_supported(sup(entries), params)
    assert got == pytest.approx(naive_morrey_supported(entries, params.u, params.p), rel=1e-12)


def test_batch_agrees_with_single():
    rng = np.random.default_rng(3)
    vals = rng.uniform(size=(7, 16))
    batch = morrey_norm_batch(vals, 2, SpaceParams(4, 3))
    single = [morrey_norm_finite(FiniteSequence(2, 2, v), SpaceParams(4, 3)) for v in vals]
    assert np.array_equal(batch, single)


vals_st = st.lists(st.floats(0, 10), min_size=8, max_size=8)


@given(vals_st, params_st)
def test_linf_domination(vals, params):
    s = fin(vals)
    assert linf_norm(s) <= morrey_norm(s, params) * (1 + 1e-10)


@given(vals_st, st.floats(0.2, 4), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_monotone_in_p(vals, u, a, b):
    p1, p2 = sorted((max(a * u, 0.05), max(b * u, 0.05)))
    s = fin(vals)
    assert morrey_norm(s, SpaceParams(u, p1)) <= morrey_norm(s, SpaceParams(u, p2)) * (1 + 1e-10)


@given(st.lists(st.floats(0, 10), min_size=16, max_size=16), params_st)
def test_lorentz_embedding(vals, params):
    s = fin(vals)
    c = lorentz_embedding_constant(params, 4, 1)
    assert morrey_norm(s, params) <= c * lorentz_quasinorm(s, params.u) * (1 + 1e-10)


@given(vals_st, params_st, st.floats(0.1, 5))
def test_power_identity(vals, params, r):
    s = fin(vals)
    lhs = morrey_norm(power(s, r), SpaceParams(params.u / r, params.p / r))
    assert lhs == pytest.approx(morrey_norm(s, params) ** r, rel=1e-12, abs=1e-300)


def test_power_example():
    sq = power(fin([3, 4]), 2)
    assert list(sq.values) == [9, 16]
    assert morrey_norm(sq, SpaceParams(1, 0.5)) == pytest.approx(morrey_norm(fin([3, 4]), P21) ** 2)


def test_product_examples():
    d = sup({(0,): 1.0})
    assert product([d, d]).entries == {(0,): 1.0}
    assert list(product([fin([1, 2]), fin([2, 1])]).values) == [2, 2]
    with pytest.raises((ValueError, TypeError)):
        product([fin([1, 2]), fin([1, 2, 3, 4])])
    with pytest.raises(TypeError):
        product([fin([1, 2]), d])


@given(vals_st, vals_st, st.floats(1.5, 6), st.floats(1.5, 6), st.floats(0.3, 1), st.floats(0.3, 1))
def test_hoelder_product(a, b, u1, u2, f1, f2):
    p1, p2 = f1 * u1, f2 * u2
    u = 1 / (1 / u1 + 1 / u2)
    p = 1 / (1 / p1 + 1 / p2)
    assume(p <= u)
    x, y = fin(a), fin(b)
    lhs = morrey_norm(product([x, y]), SpaceParams(u, p))
    assert lhs <= morrey_norm(x, SpaceParams(u1, p1)) * morrey_norm(y, SpaceParams(u2, p2)) * (1 + 1e-10) + 1e-300


# ---- predual level norm


def test_level_norm_examples():
    s = fin([1, 2, 3, 4])
    assert predual_level_norm(s, SpaceParams(2, 4 / 3), 0) == pytest.approx(10)
    lam0 = sup({(0,): 2 ** -0.5, (1,): 2 ** -0.5})
    assert predual_level_norm(lam0, SpaceParams(2, 4 / 3), 1) == pytest.approx(1, rel=1e-12)
    for j in range(4):
        assert predual_level_norm(sup({(0,): 1.0}), SpaceParams(3, 1.5), j) == pytest.approx(
            2 ** (j * (1 / 1.5 - 1 / 3)))


def test_level_norm_rejects_bad_params():
    with pytest.raises(ValueError):
        predual_level_norm(fin([1, 1]), SpaceParams(2, 0.5), 1)
    with pytest.raises(ValueError):
        predual_level_norm(fin([1, 1]), SpaceParams(2, 2), 1)
