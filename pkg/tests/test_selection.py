from collections import Counter
from itertools import permutations
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stutterfuzz.errors import EmptyInputError, InvalidChainError, WrongPoolError
from stutterfuzz.mutation import MutationChain, MutationRecord, MutatorKind
from stutterfuzz.selection import (
    POOL_CAP,
    SENTINEL_ID,
    ScoredSeed,
    SeedPool,
    dominates,
    pareto_frontier,
)


def _seed(seed_id, f1, f2, ref="pisa"):
    return ScoredSeed(seed_id, ref, MutationChain(ref), f1, f2)


# ---------------------------------------------------------------- dominance

def test_dominates_frozen_example():
    assert dominates(_seed("a", 0.2, 0.5), _seed("b", 0.3, 0.6))
    assert not dominates(_seed("b", 0.3, 0.6), _seed("a", 0.2, 0.5))


def test_ties_on_either_axis_block_dominance():
    assert not dominates(_seed("a", 0.2, 0.6), _seed("b", 0.3, 0.6))
    assert not dominates(_seed("a", 0.2, 0.6), _seed("b", 0.2, 0.7))


def test_dominance_is_irreflexive():
    s = _seed("a", 0.2, 0.5)
    assert not dominates(s, s)


def test_dominance_rejects_cross_pool_comparison():
    with pytest.raises(WrongPoolError):
        dominates(_seed("a", 0.1, 0.1, ref="pisa"), _seed("b", 0.2, 0.2, ref="sons"))


@given(
    f1=st.floats(-1, 1, allow_nan=False),
    f2=st.floats(-1, 1, allow_nan=False),
    g1=st.floats(-1, 1, allow_nan=False),
    g2=st.floats(-1, 1, allow_nan=False),
    scale=st.floats(0.1, 10, allow_nan=False),
)
def test_dominance_invariant_under_positive_scaling(f1, f2, g1, g2, scale):
    plain = dominates(_seed("a", f1, f2), _seed("b", g1, g2))
    scaled = dominates(_seed("a", f1 * scale, f2 * scale), _seed("b", g1 * scale, g2 * scale))
    assert plain == scaled


# ---------------------------------------------------------------- frontier

def test_frontier_frozen_example():
    seeds = [_seed("a", 0.2, 0.5), _seed("b", 0.3, 0.6), _seed("c", 0.1, 0.9)]
    front = pareto_frontier(seeds)
    assert [s.seed_id for s in front] == ["a", "c"]


def test_frontier_keeps_duplicates():
    seeds = [_seed("a", 0.2, 0.5), _seed("b", 0.2, 0.5)]
    assert [s.seed_id for s in pareto_frontier(seeds)] == ["a", "b"]


def test_frontier_is_idempotent():
    seeds = [_seed(str(i), f1, f2) for i, (f1, f2) in enumerate([(0.4, 0.1), (0.1, 0.4), (0.3, 0.3), (0.5, 0.5)])]
    once = pareto_frontier(seeds)
    assert pareto_frontier(once) == once


def test_frontier_rejects_empty_input():
    with pytest.raises(EmptyInputError):
        pareto_frontier([])


def _brute_frontier(seeds):
    return [
        s
        for i, s in enumerate(seeds)
        if not any(
            t.f1 < s.f1 and t.f2 < s.f2 for j, t in enumerate(seeds) if j != i
        )
    ]


@given(
    st.lists(
        st.tuples(st.integers(0, 5), st.integers(0, 5)),
        min_size=1,
        max_size=12,
    )
)
@settings(max_examples=200)
def test_frontier_matches_brute_force(points):
    seeds = [_seed(str(i), float(a) / 5, float(b) / 5) for i, (a, b) in enumerate(points)]
    assert pareto_frontier(seeds) == _brute_frontier(seeds)


# ---------------------------------------------------------------- seed pool

def test_pool_starts_with_sentinel():
    pool = SeedPool.create("pisa", sentinel_f1=0.9)
    assert len(pool) == 1
    s = pool.seeds[0]
    assert s.seed_id == SENTINEL_ID
    assert (s.f1, s.f2) == (0.9, -1.0)
    assert len(s.chain) == 0


def test_pool_update_semantics():
    pool = SeedPool.create("pisa", sentinel_f1=0.9)
    assert pool.update(_seed("x", 0.5, 0.5))
    # dominated by x on both axes
    assert not pool.update(_seed("y", 0.6, 0.6))
    assert "y" not in pool
    # dominates x, so x goes
    assert pool.update(_seed("z", 0.4, 0.4))
    assert "x" not in pool and "z" in pool
    # same id never admitted twice
    assert not pool.update(_seed("z", 0.1, 0.1))


def test_pool_sentinel_survives_everything():
    pool = SeedPool.create("pisa", sentinel_f1=0.9)
    # nothing can strictly beat f2 = -1.0, so the sentinel stays
    for i in range(200):
        pool.update(_seed(f"s{i}", 0.001 * i, -0.999 + 0.001 * i))
    assert SENTINEL_ID in pool


def test_pool_rejects_foreign_seed():
    pool = SeedPool.create("pisa", sentinel_f1=0.9)
    with pytest.raises(WrongPoolError):
        pool.update(_seed("x", 0.5, 0.5, ref="sons"))


def test_pool_caps_and_evicts_from_crowds():
    pool = SeedPool.create("pisa", sentinel_f1=0.9, cap=4)
    # mutually non-dominated line f1 + f2 = 1, spread far apart
    pool.update(_seed("a", 0.1, 0.9))
    pool.update(_seed("b", 0.5, 0.5))
    pool.update(_seed("c", 0.9, 0.1))
    assert len(pool) == 4
    # "d" crowds right next to "b"; the newest of that crowd is evicted
    pool.update(_seed("d", 0.495, 0.505))
    assert len(pool) == 4
    assert "d" not in pool
    assert {s.seed_id for s in pool.seeds} == {SENTINEL_ID, "a", "b", "c"}


def test_pool_never_exceeds_cap():
    rng = Random(99)
    pool = SeedPool.create("pisa", sentinel_f1=0.9, cap=8)
    for i in range(300):
        pool.update(_seed(f"s{i}", rng.random(), rng.random() - 1.0))
        assert len(pool) <= 8
    assert SENTINEL_ID in pool


def test_pool_membership_is_update_order_insensitive_below_cap():
    seeds = [_seed("a", 0.4, 0.1), _seed("b", 0.1, 0.4), _seed("c", 0.3, 0.3), _seed("d", 0.5, 0.5)]
    expected = None
    for perm in permutations(seeds):
        pool = SeedPool.create("pisa", sentinel_f1=0.9)
        for s in perm:
            pool.update(s)
        ids = frozenset(s.seed_id for s in pool.seeds)
        expected = ids if expected is None else expected
        assert ids == expected


def test_select_is_uniform():
    pool = SeedPool.create("pisa", sentinel_f1=0.9)
    pool.update(_seed("a", 0.1, 0.9))
    pool.update(_seed("b", 0.5, 0.5))
    pool.update(_seed("c", 0.9, 0.1))
    rng = Random(1234)
    counts = Counter(pool.select(rng).seed_id for _ in range(10000))
    for seed_id in (SENTINEL_ID, "a", "b", "c"):
        assert counts[seed_id] / 10000 == pytest.approx(0.25, abs=0.02)


def test_select_from_empty_pool():
    pool = SeedPool("pisa")
    with pytest.raises(EmptyInputError):
        pool.select(Random(0))


def test_pool_rejects_nonpositive_cap():
    with pytest.raises(EmptyInputError):
        SeedPool("pisa", cap=0)


# ---------------------------------------------------------------- interchange

def _mutated_seed():
    chain = MutationChain(
        "pisa", (MutationRecord(MutatorKind.WORD_REPETITION, 0, copies=3),)
    )
    return ScoredSeed("m1", "pisa", chain, 0.42, -0.5)


def test_pool_json_round_trip():
    pool = SeedPool.create("pisa", sentinel_f1=0.875)
    pool.update(_mutated_seed())
    doc = pool.to_json()
    assert set(doc) == {"benign_ref", "cap", "members"}
    assert [m["id"] for m in doc["members"]] == [SENTINEL_ID, "m1"]
    assert doc["members"][0]["f2"] == -1.0
    back = SeedPool.from_json(doc)
    assert back.seeds == pool.seeds


def test_pool_dump_and_load(tmp_path):
    pool = SeedPool.create("pisa", sentinel_f1=0.875)
    pool.update(_mutated_seed())
    path = tmp_path / "pool.json"
    pool.dump(path)
    text = path.read_text()
    assert text.endswith("\n")
    back = SeedPool.load(path)
    assert back.seeds == pool.seeds


def test_pool_from_json_rejects_garbage():
    with pytest.raises(InvalidChainError):
        SeedPool.from_json({"benign_ref": "pisa", "cap": 4, "members": [{"id": "x"}]})
