import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morreyseq.dyadic import DyadicCube, cells_in
from morreyseq.embeddings import (EXHAUSTIVE_LIMIT, EmbeddingCase, embedding_admissible,
                                  embedding_norm_bruteforce, embedding_norm_closed_form,
                                  separation_cubes, separation_distance, separation_family,
                                  separation_norm_bound, spread_caps, spread_pattern,
                                  witness_ratio_blowup, witness_u_decrease)
from morreyseq.spaces import FiniteSequence, SpaceParams, morrey_norm, morrey_norm_batch

S = SpaceParams


def test_admissibility_examples():
    assert embedding_admissible(S(2, 1), S(4, 2))
    assert not embedding_admissible(S(4, 1), S(2, 1))
    assert embedding_admissible(S(3, 2), S(3, 2))
    assert not embedding_admissible(S(4, 1), S(4, 2))


def test_closed_form_examples():
    assert embedding_norm_closed_form(EmbeddingCase(S(2, 1), S(4, 1), 1, 2)).value == 1
    r = embedding_norm_closed_form(EmbeddingCase(S(4, 1), S(2, 1), 1, 2))
    assert r.kind == "exact" and r.value == pytest.approx(math.sqrt(2), rel=1e-15)
    iv = embedding_norm_closed_form(EmbeddingCase(S(4, 1), S(2, 2), 1, 1))
    assert iv.kind == "interval"
    assert iv.upper == pytest.approx(2 ** (3 / 8), rel=1e-15)
    assert 1 <= iv.lower <= iv.upper


def test_bruteforce_examples():
    assert embedding_norm_bruteforce(EmbeddingCase(S(2, 1), S(4, 1), 1, 2)).value == pytest.approx(1)
    o = embedding_norm_bruteforce(EmbeddingCase(S(4, 1), S(2, 1), 1, 2))
    assert o.value == pytest.approx(math.sqrt(2), rel=1e-12)
    assert o.pattern == (1, 1, 1, 1)
    for p in (S(2, 1), S(3, 0.5)):
        assert embedding_norm_bruteforce(EmbeddingCase(p, p, 2, 1)).value == pytest.approx(1)


def test_bruteforce_maximizer_is_normalized():
    case = EmbeddingCase(S(4, 1), S(2, 2), 1, 2)
    o = embedding_norm_bruteforce(case)
    assert morrey_norm_batch(o.maximizer, 1, case.source) == pytest.approx(1)
    assert morrey_norm_batch(o.maximizer, 1, case.target) == pytest.approx(o.value, rel=1e-9)


def test_bruteforce_size_limit():
    with pytest.raises(ValueError):
        embedding_norm_bruteforce(EmbeddingCase(S(2, 1), S(2, 1), 1, 5))
    assert EXHAUSTIVE_LIMIT == 16


def test_bruteforce_is_seed_deterministic():
    case = EmbeddingCase(S(4, 1), S(2, 2), 1, 2)
    a, b = embedding_norm_bruteforce(case, seed=3), embedding_norm_bruteforce(case, seed=3)
    assert a.value == b.value and np.array_equal(a.maximizer, b.maximizer)


def test_bruteforce_ignores_worker_count(monkeypatch):
    case = EmbeddingCase(S(4, 1), S(2, 2), 1, 3)
    monkeypatch.setenv("MORREY_THREADS", "1")
    a = embedding_norm_bruteforce(case)
    monkeypatch.setenv("MORREY_THREADS", "4")
    b = embedding_norm_bruteforce(case)
    assert a.value == b.value and a.pattern == b.pattern


grid = [S(1, 1), S(2, 1), S(2, 2), S(4, 1), S(4, 3), S(3, 0.5)]


@pytest.mark.parametrize("src, tgt", list(itertools.product(grid, grid)))
def test_oracle_agrees_with_closed_form(src, tgt):
    for j in (1, 2):
        case = EmbeddingCase(src, tgt, 1, j)
        cf = embedding_norm_closed_form(case)
        o = embedding_norm_bruteforce(case, budget=20)
        assert o.value <= cf.upper * (1 + 1e-9)
        assert o.value >= cf.lower * (1 - 1e-9)


# ---- sufficiency with constant one


@st.composite
def admissible_pair(draw):
    u1 = draw(st.floats(0.5, 6))
    p1 = draw(st.floats(0.1, 1)) * u1
    u2 = u1 * draw(st.floats(1, 3))
    p2 = min(u2, p1 * u2 / u1) * draw(st.floats(0.1, 1))
    return S(u1, p1), S(u2, p2)


@settings(max_examples=200, deadline=None)
@given(admissible_pair(), st.lists(st.floats(0, 10), min_size=16, max_size=16))
def test_admissible_embedding_has_constant_one(pair, vals):
    src, tgt = pair
    assert embedding_admissible(src, tgt)
    x = np.array(vals)
    assert morrey_norm_batch(x, 2, tgt) <= morrey_norm_batch(x, 2, src) * (1 + 1e-10)


# ---- witnesses


def test_u_decrease_witness():
    w = witness_u_decrease(4, 1, 1, 3)
    assert sorted(w.entries) == [(k,) for k in range(512, 520)]  # cube 8*(64 + [0,1))
    assert all(v == 2 ** (-3 / 4) for v in w.entries.values())
    assert morrey_norm(w, S(4, 1)) == pytest.approx(1, rel=1e-12)
    assert morrey_norm(w, S(2, 1)) == pytest.approx(2 ** 0.75, rel=1e-12)


@pytest.mark.parametrize("u1, p1, u2, p2, d, j", [(4, 1, 2, 1, 1, 3), (3, 2, 1.5, 0.5, 2, 2),
                                                   (5, 5, 2, 2, 1, 4)])
def test_u_decrease_ratio(u1, p1, u2, p2, d, j):
    w = witness_u_decrease(u1, p1, d, j)
    assert morrey_norm(w, S(u1, p1)) == pytest.approx(1, rel=1e-12)
    assert morrey_norm(w, S(u2, p2)) == pytest.approx(2 ** (j * d * (1 / u2 - 1 / u1)), rel=1e-12)


def test_spread_pattern_examples():
    assert list(spread_pattern(2, 1, 1, 2).values) == [1, 0, 1, 0]
    s = spread_pattern(4, 1, 1, 2)
    assert s.values.sum() == 4
    assert morrey_norm(s, S(2, 1)) <= 1 + 1e-12


def _all_subcube_counts(seq: FiniteSequence):
    side = seq.side
    grid = seq.grid()
    for nu in range(seq.level + 1):
        w = 2 ** nu
        for origin in itertools.product(range(side // w), repeat=seq.dim):
            sl = tuple(slice(o * w, (o + 1) * w) for o in origin)
            yield nu, grid[sl].sum()


@pytest.mark.parametrize("level, dim, p1, u1", [(4, 1, 1, 2), (6, 1, 1, 8), (3, 2, 1, 3),
                                                 (5, 1, 0.5, 3), (2, 2, 2, 5)])
def test_spread_pattern_caps(level, dim, p1, u1):
    seq = spread_pattern(level, dim, p1, u1)
    caps = spread_caps(level, dim, p1, u1)
    for nu, count in _all_subcube_counts(seq):
        assert count <= caps[nu]
        assert count <= max(1, math.floor(2 ** (dim * nu * (1 - p1 / u1)) * (1 + 1e-15)))
    assert morrey_norm(seq, S(u1, p1)) <= 1 + 1e-12


def test_blowup_rejects_wrong_regime():
    with pytest.raises(ValueError, match="u_decrease"):
        witness_ratio_blowup(S(4, 1), S(2, 1), 1, 2)


def test_blowup_reaches_target():
    w = witness_ratio_blowup(S(4, 1), S(4, 2), 1, 2)
    assert w.ratio >= 2
    src, tgt = morrey_norm(w.sequence, S(4, 1)), morrey_norm(w.sequence, S(4, 2))
    assert w.ratio == tgt / src


# ---- separation family


def test_separation_cubes_disjoint():
    cubes = separation_cubes([1, 2, 4], 2)
    cells = [set(cells_in(q)) for q in cubes]
    for a, b in itertools.combinations(cells, 2):
        assert not a & b


def test_separation_single_cell():
    fam = separation_family([0], 1, 2, [[1], [-1]])
    assert separation_distance(fam[0], fam[1], S(2, 1)) == pytest.approx(2)


def test_separation_two_levels():
    signs = list(itertools.product((1, -1), repeat=6))[:20]
    fam = separation_family([1, 2], 1, 2, signs)
    params = S(2, 1)
    for a, b in itertools.combinations(fam, 2):
        assert separation_distance(a, b, params) >= 1 - 1e-12
    bound = separation_norm_bound([1, 2], 1, params)
    assert all(morrey_norm(m.magnitudes(), params) <= bound * (1 + 1e-12) for m in fam)


def test_separation_rejects_bad_signs():
    with pytest.raises(ValueError):
        separation_family([1], 1, 2, [[1, 0]])
    with pytest.raises(ValueError):
        separation_family([1], 1, 2, [[1]])
