"""Acceptance suite: one marked group per criterion.

The terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import random
import time

import pytest

import oracles
from minabc import bounds as B
from minabc.branches import analyze, check_theorems
from minabc.enumeration import count_free_trees
from minabc.greedy import greedy_tree, random_tree_with_degrees
from minabc.metric import abc_index
from minabc.search import sweep
from minabc.transforms import RULES, apply_transformation, sample_instance

c1 = pytest.mark.criterion(1, "golden constants within 1e-6, suite under 1 s")
c2 = pytest.mark.criterion(2, "sign thresholds 14 / 12 / 9 / 7")
c3 = pytest.mark.criterion(3, "brute force equals greedy-seq for 4 <= n <= 18")
c4 = pytest.mark.criterion(4, "greedy dominance, 500 sequences x 100 trees")
c5 = pytest.mark.criterion(5, "transformation deltas, 200 instances per rule")
c6 = pytest.mark.criterion(6, "theorem conformance of the winners 4 <= n <= 18")
c7 = pytest.mark.criterion(7, "forbidden-configuration tables")
c8 = pytest.mark.criterion(8, "monotonicity probes")


@pytest.fixture(scope="module")
def winners():
    started = time.perf_counter()
    recs = sweep(4, 18, "both")
    return recs, time.perf_counter() - started


# ------------------------------------------------------------------ 1


def _golden_id(g):
    return f"{g.id}[{B._fmt_params(g.params)}]"


@c1
@pytest.mark.parametrize("row", B.GOLDEN, ids=_golden_id)
def test_c1_golden_row(row):
    actual = B.evaluate(row.id, dict(row.params))
    assert abs(actual - row.expected) <= 1e-6, f"{row.id}: {actual:.10g} vs printed {row.expected}"


@c1
def test_c1_golden_runtime():
    _, elapsed = B.golden_suite()
    assert elapsed < 1.0


# ------------------------------------------------------------------ 2


@c2
def test_c2_thresholds():
    started = time.perf_counter()
    got = {e: B.smallest_negative_threshold(e, "du", range(3, 201))
           for e in ("change-20-20", "change-70", "change-20-2", "change-70-2")}
    assert got == {"change-20-20": 14, "change-70": 12, "change-20-2": 9, "change-70-2": 7}
    assert time.perf_counter() - started < 1.0


# ------------------------------------------------------------------ 3


@c3
def test_c3_brute_equals_greedy(winners):
    recs, _ = winners
    by_n = {}
    for r in recs:
        by_n.setdefault(r.n, {})[r.method] = r.abc
    assert sorted(by_n) == list(range(4, 19))
    for n, vals in by_n.items():
        assert abs(vals["brute"] - vals["greedy-seq"]) < 1e-12, n


@c3
def test_c3_n18_runtime(winners):
    recs, total = winners
    brute18 = next(r for r in recs if r.n == 18 and r.method == "brute")
    assert brute18.wall_time < 300 and total < 300
    assert count_free_trees(18) == 123867


@c3
@pytest.mark.parametrize("n", range(1, 13))
def test_c3_count_matches_dedup_oracle(n):
    assert count_free_trees(n) == len(oracles.free_trees_by_growth(n))


# ------------------------------------------------------------------ 4


@c4
def test_c4_greedy_dominance():
    rng = random.Random(20240601)
    pool = {n: sorted(oracles.tree_degree_sequences(n)) for n in range(4, 13)}
    worst = -1.0
    for _ in range(500):
        n = rng.randint(4, 12)
        ds = rng.choice(pool[n])
        g = oracles.abc(n, greedy_tree(ds).edges())
        for _ in range(100):
            t = random_tree_with_degrees(ds, rng.getrandbits(32))
            worst = max(worst, g - oracles.abc(n, t.edges()))
    assert worst <= 1e-12


# ------------------------------------------------------------------ 5


@c5
@pytest.mark.parametrize("name", sorted(RULES))
def test_c5_transformation_delta(name):
    rng = random.Random(f"acceptance-{name}")
    for _ in range(200):
        t, spec = sample_instance(name, rng)
        after, predicted = apply_transformation(t, spec)
        measured = oracles.abc(after.n, after.edges()) - oracles.abc(t.n, t.edges())
        assert abs(predicted - measured) < 1e-12


# ------------------------------------------------------------------ 6


@c6
def test_c6_winners_conform(winners):
    recs, _ = winners
    for r in recs:
        t = r.tree()
        assert abs(abc_index(t) - r.abc) < 1e-12
        report = check_theorems(t)
        assert report.all_asserted_pass, (r.n, r.method, report.failures())


@c6
def test_c6_three_b1_at_14(winners):
    recs, _ = winners
    for r in (x for x in recs if x.n == 14):
        prof = analyze(r.tree())
        assert prof.count(1) == 3
        assert check_theorems(r.tree(), prof).verdicts["conjecture_b1_le_3"].passed


# ------------------------------------------------------------------ 7


@c7
def test_c7_subtree_table():
    rows = dict(B.forbidden_configuration_table().subtree)
    expected = {1: 6, 2: 6, 3: 6, 4: 6, 5: 5, 6: 5, 7: 4, 8: 4, 9: 3, 10: 3, 11: 2, 12: 1}
    assert rows == expected
    for k2 in range(12, 40):
        assert B.evaluate("change-20", du=k2 + 2, k1=1) < 0


@c7
def test_c7_b2_b1_table():
    rows = dict(B.forbidden_configuration_table().subtree_b2b1)
    assert rows == {1: 5, 2: 4, 3: 4, 4: 3, 5: 2, 6: 2, 7: 1}
    for k2 in range(7, 40):
        assert B.evaluate("change-20-2a", du=k2 + 2, k1=1) < 0


# ------------------------------------------------------------------ 8


@c8
def test_c8_change_20_20():
    assert B.monotonicity_probe("change-20-20", "du", range(4, 201)).ok


@c8
def test_c8_lemma_g1_g2():
    assert B.monotonicity_probe("lemma-B2-30.g1", "dw", range(3, 201)).ok
    assert B.monotonicity_probe("lemma-B2-30.g2", "dw", range(13, 201)).ok


@c8
def test_c8_shift_grid():
    assert B.shift_grid_probe() == []
