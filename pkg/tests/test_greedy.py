from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from minabc.enumeration import enumerate_free_trees
from minabc.errors import InfeasibleSequence
from minabc.graph import DegreeSequence, canonical_form, path_graph, star_graph
from minabc.greedy import (
    SequenceFilter,
    checkpoint,
    count_partitions,
    enumerate_degree_sequences,
    greedy_abc,
    greedy_tree,
    random_tree_with_degrees,
    resume,
    shard_keys,
)
from minabc.metric import abc_index
from minabc.search import greedy_sequence_min


def seqs(n, flt=None, **kw):
    return [s.as_list() for s in enumerate_degree_sequences(n, flt, **kw)]


# ------------------------------------------------------------ greedy tree


def test_greedy_unique_trees():
    assert canonical_form(greedy_tree([2, 2, 1, 1])) == canonical_form(path_graph(4))
    assert canonical_form(greedy_tree([4, 1, 1, 1, 1])) == canonical_form(star_graph(5))


def test_greedy_unsorted_input_and_errors():
    assert greedy_tree([1, 2, 1, 2]).n == 4
    for bad in ([2, 1], [3, 1, 1], [1], [0, 2, 0]):
        with pytest.raises(InfeasibleSequence):
            greedy_tree(bad)


def test_greedy_matches_multiset_minimum_n9():
    ds = [3, 3, 2, 2, 2, 1, 1, 1, 1]
    target = Counter(ds)
    best = min(abc_index(t) for t in enumerate_free_trees(9) if Counter(t.degrees) == target)
    assert abs(greedy_abc(ds) - best) < 1e-12
    assert abs(abc_index(greedy_tree(ds)) - greedy_abc(ds)) < 1e-12


@pytest.mark.parametrize("n", range(2, 11))
def test_greedy_exact_for_every_sequence(n):
    best: dict[tuple, float] = {}
    for t in enumerate_free_trees(n):
        key = tuple(sorted(t.degrees, reverse=True))
        best[key] = min(best.get(key, float("inf")), oracles.abc(t.n, t.edges()))
    assert set(best) == set(tuple(s) for s in seqs(n))
    for key, value in best.items():
        assert abs(greedy_abc(key) - value) < 1e-12


@given(st.integers(4, 12).flatmap(lambda n: st.sampled_from(sorted(oracles.tree_degree_sequences(n)))),
       st.integers(0, 2**32))
@settings(max_examples=300, deadline=None)
def test_greedy_dominates_random(ds, seed):
    t = random_tree_with_degrees(ds, seed)
    assert abc_index(greedy_tree(ds)) <= abc_index(t) + 1e-12


# ---------------------------------------------------- sequence enumeration


def test_small_sequences():
    assert seqs(4) == [[3, 1, 1, 1], [2, 2, 1, 1]]
    assert seqs(2) == [[1, 1]]


@pytest.mark.parametrize("n", range(2, 21))
def test_sequence_count_is_partition_count(n):
    got = seqs(n)
    assert len(got) == len(set(map(tuple, got))) == count_partitions(2 * (n - 1), n)
    assert set(map(tuple, got)) == oracles.tree_degree_sequences(n)
    assert got == sorted(got, reverse=True)


def test_order_ten_count():
    # partitions of 18 into 10 positive parts: p(8) = 22
    assert len(seqs(10)) == count_partitions(18, 10) == len(oracles.tree_degree_sequences(10)) == 22


def test_shards_cover_stream():
    n = 14
    whole = seqs(n)
    parts = [s for key in shard_keys(n) for s in seqs(n, largest=key)]
    assert parts == whole


def test_checkpoint_resume():
    n = 16
    whole = seqs(n)
    cut = whole[37]
    rest = [s.as_list() for s in resume(checkpoint(n, cut))]
    assert rest == whole[38:]
    assert [s.as_list() for s in resume(checkpoint(n, None))] == whole
    assert list(resume(checkpoint(n, whole[-1]))) == []


def test_filter_parse():
    assert SequenceFilter.parse("all") == SequenceFilter.all()
    assert SequenceFilter.parse("none") == SequenceFilter.none()
    f = SequenceFilter.parse("bk-caps, pendant-budget")
    assert f.names() == ["pendant-budget", "bk-caps"]
    with pytest.raises(ValueError):
        SequenceFilter.parse("bogus")


def test_filters_are_subsets():
    n = 24
    whole = set(map(tuple, seqs(n)))
    for spec in ("no-internal-deg2", "pendant-budget", "bk-caps", "all"):
        part = set(map(tuple, seqs(n, SequenceFilter.parse(spec))))
        assert part <= whole and len(part) < len(whole)


@pytest.mark.parametrize("n", [12, 20, 30, 50])
def test_filter_soundness(n):
    off = greedy_sequence_min(n)
    on = greedy_sequence_min(n, SequenceFilter.all())
    assert abs(off.abc - on.abc) < 1e-12


def test_filters_inactive_below_min_order():
    for n in range(2, 10):
        assert seqs(n, SequenceFilter.all()) == seqs(n)


# ------------------------------------------------------------ random trees


def test_random_tree_forced_cases():
    assert random_tree_with_degrees([1, 1], 5).edges() == [(0, 1)]
    for seed in range(20):
        t = random_tree_with_degrees([2, 2, 1, 1], seed)
        assert canonical_form(t) == canonical_form(path_graph(4))


def test_random_tree_degrees_property():
    ds = [3, 2, 2, 1, 1, 1]
    shapes = set()
    for seed in range(1000):
        t = random_tree_with_degrees(DegreeSequence(tuple(ds)), seed)
        assert sorted(t.degrees, reverse=True) == ds
        assert t.degrees == ds  # vertex v carries the v-th largest degree
        shapes.add(canonical_form(t))
    # every unlabelled shape with this sequence shows up
    assert len(shapes) == len({canonical_form(t) for t in enumerate_free_trees(6)
                               if sorted(t.degrees, reverse=True) == ds})


def test_random_tree_deterministic():
    ds = [4, 3, 2, 2, 1, 1, 1, 1, 1]
    assert random_tree_with_degrees(ds, 11) == random_tree_with_degrees(ds, 11)
    with pytest.raises(InfeasibleSequence):
        random_tree_with_degrees([2, 2, 2], 0)


def test_random_tree_roughly_uniform():
    # leaves 3 and 4 at the ends, the three middle labels in any order: 6 labelled paths
    ds = [2, 2, 2, 1, 1]
    counts = Counter(tuple(random_tree_with_degrees(ds, s).edges()) for s in range(3000))
    assert len(counts) == 6
    assert min(counts.values()) > 380
