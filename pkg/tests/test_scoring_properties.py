"""
Randomized property checks of the scoring engine.

Each test draws N_TREES random valid trees from a seeded generator, so a
failure is replayable from the seed and the loop index.
"""
import itertools
from dataclasses import replace

import numpy as np
import pytest

from indicators.tree import AnchorPair, Direction, IndicatorNode, IndicatorTree, branch, leaf
from indicators.validation import validate_tree
from indicators.weights import flatten_leaves, sibling_groups
from scoring import (
    InputMode,
    MissingPolicy,
    Observation,
    dimension_contributions,
    normalize_value,
    score_entities,
    score_entity,
)

N_TREES = 1000
RAW = InputMode.RAW_VALUES
PRE = InputMode.PRE_NORMALIZED


# ── Helpers ───────────────────────────────────────────────────


def _split(rng, n):
    raw = rng.uniform(0.1, 1.0, size=n)
    return [float(w) for w in raw / raw.sum()]


def random_tree(rng, max_depth=3):
    counter = itertools.count()

    def node(depth, weight):
        node_id = f"n{next(counter)}"
        if depth >= max_depth or (depth > 0 and rng.random() < 0.4):
            low = float(rng.uniform(-100, 100))
            high = low + float(rng.uniform(1, 100))
            direction = Direction.LOWER_BETTER if rng.random() < 0.3 else Direction.HIGHER_BETTER
            return leaf(node_id, weight, low, high, direction)
        weights = _split(rng, int(rng.integers(1, 5)))
        return branch(node_id, weight, [node(depth + 1, w) for w in weights])

    return IndicatorTree(node(0, 1.0))


def random_raw_values(rng, tree):
    values = {}
    for node in tree.leaves():
        span = node.anchors.high - node.anchors.low
        values[node.id] = float(rng.uniform(node.anchors.low - 0.2 * span, node.anchors.high + 0.2 * span))
    return values


def observations(entity_id, values):
    return [Observation(entity_id, node_id, value) for node_id, value in values.items()]


def split_leaf(tree, leaf_id):
    """Replace a leaf by an equal-weight branch of two copies of itself."""

    def rebuild(node: IndicatorNode) -> IndicatorNode:
        if node.id == leaf_id:
            halves = [
                replace(node, id=f"{leaf_id}_a", weight=0.5),
                replace(node, id=f"{leaf_id}_b", weight=0.5),
            ]
            return branch(leaf_id, node.weight, halves)
        return replace(node, children=tuple(rebuild(child) for child in node.children))

    return IndicatorTree(rebuild(tree.root), scale=tree.scale)


# ── Properties ────────────────────────────────────────────────


def test_random_trees_are_valid_and_weights_sum_to_one():
    rng = np.random.default_rng(101)
    for _ in range(N_TREES):
        tree = random_tree(rng)
        assert validate_tree(tree).is_valid
        assert sum(w for _, w in flatten_leaves(tree)) == pytest.approx(1.0, abs=1e-6)
        for parent_id, child_ids in sibling_groups(tree):
            total = sum(tree.get_node(child_id).weight for child_id in child_ids)
            assert total == pytest.approx(1.0, abs=1e-6), parent_id


def test_scores_stay_on_scale():
    rng = np.random.default_rng(102)
    for _ in range(N_TREES):
        tree = random_tree(rng)
        card = score_entity(tree, observations('e', random_raw_values(rng, tree)), MissingPolicy.FAIL, RAW)
        for node_score in card.node_scores.values():
            assert 0.0 <= node_score.score <= 100.0
            assert 0.0 <= node_score.coverage <= 1.0


def test_composite_is_linear_in_scores():
    rng = np.random.default_rng(103)
    for _ in range(N_TREES):
        tree = random_tree(rng)
        leaf_ids = [node.id for node in tree.leaves()]
        s = rng.uniform(0, 100, size=len(leaf_ids))
        t = rng.uniform(0, 100, size=len(leaf_ids))
        alpha = float(rng.uniform(0, 1))
        mixed = np.clip(alpha * s + (1 - alpha) * t, 0.0, 100.0)

        def composite(vector):
            values = dict(zip(leaf_ids, (float(v) for v in vector)))
            return score_entity(tree, observations('e', values), MissingPolicy.FAIL, PRE).composite

        expected = alpha * composite(s) + (1 - alpha) * composite(t)
        assert composite(mixed) == pytest.approx(expected, abs=1e-9)


def test_composite_is_monotone_in_higher_better_leaves():
    rng = np.random.default_rng(104)
    checked = 0
    while checked < N_TREES:
        tree = random_tree(rng)
        candidates = [node for node in tree.leaves() if node.direction is Direction.HIGHER_BETTER]
        if not candidates:
            continue
        values = random_raw_values(rng, tree)
        target = candidates[int(rng.integers(len(candidates)))]
        before = score_entity(tree, observations('e', values), MissingPolicy.FAIL, RAW).composite

        values[target.id] += float(rng.uniform(0, target.anchors.high - target.anchors.low))
        after = score_entity(tree, observations('e', values), MissingPolicy.FAIL, RAW).composite

        assert after >= before
        checked += 1


def test_affine_anchor_invariance():
    rng = np.random.default_rng(105)
    for _ in range(N_TREES):
        low = float(rng.uniform(-100, 100))
        high = low + float(rng.uniform(1, 100))
        x = float(rng.uniform(low - 20, high + 20))
        a = float(rng.uniform(0.5, 5))
        b = float(rng.uniform(-100, 100))
        direction = Direction.LOWER_BETTER if rng.random() < 0.5 else Direction.HIGHER_BETTER

        moved = normalize_value(a * x + b, AnchorPair(a * low + b, a * high + b), direction)
        original = normalize_value(x, AnchorPair(low, high), direction)

        assert moved == pytest.approx(original, abs=1e-9)


def test_splitting_a_leaf_keeps_the_composite():
    rng = np.random.default_rng(106)
    for _ in range(N_TREES):
        tree = random_tree(rng)
        values = random_raw_values(rng, tree)
        target = tree.leaves()[int(rng.integers(len(tree.leaves())))]
        refactored = split_leaf(tree, target.id)

        split_values = {k: v for k, v in values.items() if k != target.id}
        split_values[f"{target.id}_a"] = values[target.id]
        split_values[f"{target.id}_b"] = values[target.id]

        before = score_entity(tree, observations('e', values), MissingPolicy.FAIL, RAW).composite
        after = score_entity(refactored, observations('e', split_values), MissingPolicy.FAIL, RAW).composite

        assert after == pytest.approx(before, abs=1e-9)


def test_contributions_add_up_to_composite():
    rng = np.random.default_rng(107)
    for _ in range(N_TREES):
        tree = random_tree(rng)
        card = score_entity(tree, observations('e', random_raw_values(rng, tree)), MissingPolicy.FAIL, RAW)

        total = sum(value for _, value in dimension_contributions(card, tree))

        assert total == pytest.approx(card.composite, abs=1e-9)


def test_dropping_a_constant_dimension_keeps_the_order():
    rng = np.random.default_rng(108)
    for _ in range(N_TREES):
        n_dimensions = int(rng.integers(2, 8))
        weights = _split(rng, n_dimensions)
        tree = IndicatorTree(branch('idx', 1.0, [leaf(f"d{i}", w) for i, w in enumerate(weights)]))
        constant = int(rng.integers(n_dimensions))
        level = float(rng.uniform(0, 100))

        entities = {}
        for e in range(6):
            vector = {f"d{i}": float(rng.uniform(0, 100)) for i in range(n_dimensions)}
            vector[f"d{constant}"] = level
            entities[f"e{e}"] = vector

        full = score_entities(
            tree,
            [obs for e, v in entities.items() for obs in observations(e, v)],
            MissingPolicy.REWEIGHT, PRE,
        )
        reduced = score_entities(
            tree,
            [obs for e, v in entities.items() for obs in observations(e, v) if obs.indicator_id != f"d{constant}"],
            MissingPolicy.REWEIGHT, PRE,
        )

        before = {card.entity_id: card.composite for card in full}
        after = {card.entity_id: card.composite for card in reduced}
        for a, b in itertools.combinations(before, 2):
            if abs(before[a] - before[b]) > 1e-9:
                assert (before[a] > before[b]) == (after[a] > after[b])
