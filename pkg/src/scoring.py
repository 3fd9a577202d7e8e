"""
Scoring module: anchor normalization and bottom-up weighted aggregation.
"""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from config import INDEX_SCALE
from errors import (
    ContractViolation,
    DuplicateObservationError,
    InvalidObservationError,
    MissingIndicatorError,
    NoDataError,
    ScoreRangeError,
    UnknownIndicatorError,
)
from indicators.tree import AnchorPair, Direction, IndicatorNode, IndicatorTree
from indicators.validation import require_valid

logger = logging.getLogger(__name__)


class MissingPolicy(str, Enum):
    """How a branch treats children without data."""

    FAIL = 'fail'
    REWEIGHT = 'reweight'
    ZERO_FILL = 'zero_fill'


class InputMode(str, Enum):
    """Whether observation values are raw units or ready-made scores."""

    RAW_VALUES = 'raw_values'
    PRE_NORMALIZED = 'pre_normalized'


@dataclass(frozen=True)
class Entity:
    """A scored unit such as a country or a region."""

    id: str
    name: str = ''
    group: Optional[str] = None

    @property
    def display_name(self) -> str:
        return self.name or self.id


@dataclass(frozen=True)
class Observation:
    """One measurement of one indicator for one entity."""

    entity_id: str
    indicator_id: str
    value: float
    period: Optional[str] = None


@dataclass(frozen=True)
class NodeScore:
    """Score of one tree node for one entity."""

    node_id: str
    score: float
    contribution: float
    coverage: float


@dataclass(frozen=True)
class ScoreCard:
    """All node scores of one entity plus its composite."""

    entity_id: str
    node_scores: Mapping[str, NodeScore]
    composite: float
    policy_used: MissingPolicy
    tree_fingerprint: str = field(default='', compare=False)

    def has(self, node_id: str) -> bool:
        return node_id in self.node_scores

    def score_of(self, node_id: str) -> Optional[float]:
        node_score = self.node_scores.get(node_id)
        return node_score.score if node_score else None

    @property
    def coverage(self) -> float:
        # node_scores is in tree order, root first
        root = next(iter(self.node_scores.values()), None)
        return root.coverage if root else 0.0


def normalize_value(
    value: float,
    anchors: AnchorPair,
    direction: Direction = Direction.HIGHER_BETTER,
    scale: float = INDEX_SCALE,
) -> float:
    """
    Map a raw value onto [0, scale] against fixed anchors.

    Values outside the anchors are clamped, not rejected.

    Args:
        value: Raw value in the indicator's native units
        anchors: Low/high reference values
        direction: higher_better or lower_better
        scale: Top of the score scale (default: 100)

    Returns:
        Normalized score in [0, scale]
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidObservationError(f"observation value {value!r} is not a finite number")

    fraction = (value - anchors.low) / (anchors.high - anchors.low)
    if fraction < 0.0 or fraction > 1.0:
        logger.debug("value %r outside anchors (%r, %r); clamping", value, anchors.low, anchors.high)
        fraction = min(max(fraction, 0.0), 1.0)

    score = scale * fraction
    if direction is Direction.LOWER_BETTER:
        score = scale - score
    return score


def aggregate_node(
    node: IndicatorNode,
    child_scores: Sequence[Tuple[float, Optional[float]]],
    policy: MissingPolicy = MissingPolicy.REWEIGHT,
    coverages: Optional[Sequence[float]] = None,
    scale: float = INDEX_SCALE,
) -> NodeScore:
    """
    Combine child scores into the node's score by weighted arithmetic mean.

    Args:
        node: The branch being scored
        child_scores: (weight, score or None) per child, in child order
        policy: Missing-data policy
        coverages: Coverage per child (present children default to 1.0)
        scale: Top of the score scale

    Returns:
        NodeScore for the node

    Raises:
        MissingIndicatorError: fail policy and a child lacks data
        NoDataError: reweight policy and no child has data
    """
    if node.children and len(child_scores) != len(node.children):
        raise ContractViolation(
            f"'{node.id}' has {len(node.children)} children but {len(child_scores)} scores were given"
        )
    child_ids = [child.id for child in node.children] or [f"{node.id}[{i}]" for i in range(len(child_scores))]
    if coverages is None:
        coverages = [1.0] * len(child_scores)

    present = [
        (weight, score, cover)
        for (weight, score), cover in zip(child_scores, coverages)
        if score is not None
    ]

    if policy is MissingPolicy.FAIL:
        for child_id, (_, score) in zip(child_ids, child_scores):
            if score is None:
                raise MissingIndicatorError(node.id, child_id)

    if policy is MissingPolicy.REWEIGHT and not present:
        raise NoDataError(node.id)

    weighted_sum = sum(weight * score for weight, score, _ in present)
    if policy is MissingPolicy.REWEIGHT and len(present) < len(child_scores):
        score = weighted_sum / sum(weight for weight, _, _ in present)
    else:
        # full data (any policy) or zero_fill: sibling weights already sum to 1
        score = weighted_sum

    # absorb floating overshoot at the ends of the scale
    score = min(max(score, 0.0), scale)
    coverage = min(sum(weight * cover for weight, _, cover in present), 1.0)

    return NodeScore(
        node_id=node.id,
        score=score,
        contribution=node.weight * score,
        coverage=coverage,
    )


def _collect_inputs(
    tree: IndicatorTree,
    observations: Iterable[Observation],
    input_mode: InputMode,
    strict: bool,
) -> Dict[str, float]:
    values: Dict[str, float] = {}
    for obs in observations:
        node = tree.get_node(obs.indicator_id)
        if node is None:
            raise UnknownIndicatorError(obs.indicator_id)

        value = obs.value
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidObservationError(
                f"{obs.entity_id}/{obs.indicator_id}: value {value!r} is not a finite number"
            )

        if input_mode is InputMode.RAW_VALUES:
            if not node.is_leaf or node is tree.root:
                raise UnknownIndicatorError(obs.indicator_id, 'raw values must name a leaf indicator')
        elif not 0.0 <= value <= tree.scale:
            raise ScoreRangeError(
                f"{obs.entity_id}/{obs.indicator_id}: pre-normalized score {value!r} outside [0, {tree.scale:g}]"
            )

        if obs.indicator_id in values:
            if strict:
                raise DuplicateObservationError(
                    f"duplicate observation for ({obs.entity_id}, {obs.indicator_id})"
                )
            logger.warning(
                "duplicate observation for (%s, %s); keeping the last value",
                obs.entity_id, obs.indicator_id,
            )
        values[obs.indicator_id] = float(value)
    return values


def score_entity(
    tree: IndicatorTree,
    observations: Iterable[Observation],
    policy: MissingPolicy = MissingPolicy.REWEIGHT,
    input_mode: InputMode = InputMode.RAW_VALUES,
    entity_id: Optional[str] = None,
    strict: bool = False,
) -> ScoreCard:
    """
    Score one entity bottom-up through the tree.

    Args:
        tree: A valid indicator tree
        observations: The entity's observations
        policy: Missing-data policy
        input_mode: raw_values (leaves, native units) or pre_normalized
            (scores in [0, scale] attached to any node)
        entity_id: Entity to score; inferred when the observations name one
        strict: Treat duplicate observations as an error

    Returns:
        ScoreCard with a NodeScore for every node that has data
    """
    require_valid(tree)
    policy = MissingPolicy(policy)
    input_mode = InputMode(input_mode)
    observations = list(observations)

    if entity_id is None:
        entity_ids = list(OrderedDict.fromkeys(obs.entity_id for obs in observations))
        if len(entity_ids) > 1:
            raise ContractViolation(
                f"observations span {len(entity_ids)} entities; score them with score_entities"
            )
        entity_id = entity_ids[0] if entity_ids else ''
    else:
        observations = [obs for obs in observations if obs.entity_id == entity_id]

    values = _collect_inputs(tree, observations, input_mode, strict)
    node_scores: Dict[str, NodeScore] = {}

    def visit(node: IndicatorNode) -> Optional[NodeScore]:
        if node.id in values and (input_mode is InputMode.PRE_NORMALIZED or node.is_leaf):
            if input_mode is InputMode.PRE_NORMALIZED:
                score = values[node.id]
                shadowed = [n.id for _, n in node.walk() if n is not node and n.id in values]
                if shadowed:
                    logger.warning(
                        "%s: score given for '%s' overrides inputs beneath it (%s)",
                        entity_id, node.id, ', '.join(shadowed),
                    )
            else:
                score = normalize_value(values[node.id], node.anchors, node.direction, tree.scale)
            result = NodeScore(node.id, score, node.weight * score, 1.0)
            node_scores[node.id] = result
            return result

        if node.is_leaf:
            return None

        results = [visit(child) for child in node.children]
        if all(r is None for r in results) and policy is not MissingPolicy.FAIL:
            return None

        result = aggregate_node(
            node,
            [(child.weight, r.score if r else None) for child, r in zip(node.children, results)],
            policy,
            coverages=[r.coverage if r else 0.0 for r in results],
            scale=tree.scale,
        )
        node_scores[node.id] = result
        return result

    root_score = visit(tree.root)
    if root_score is None:
        if policy is MissingPolicy.REWEIGHT:
            raise NoDataError(tree.root.id)
        root_score = NodeScore(tree.root.id, 0.0, 0.0, 0.0)
        node_scores[tree.root.id] = root_score

    ordered = OrderedDict(
        (node.id, node_scores[node.id]) for _, node in tree.iter_nodes() if node.id in node_scores
    )
    return ScoreCard(
        entity_id=entity_id,
        node_scores=ordered,
        composite=root_score.score,
        policy_used=policy,
        tree_fingerprint=tree.fingerprint,
    )


def group_by_entity(observations: Iterable[Observation]) -> 'OrderedDict[str, List[Observation]]':
    """Observations per entity, entities in first-appearance order."""
    grouped: 'OrderedDict[str, List[Observation]]' = OrderedDict()
    for obs in observations:
        grouped.setdefault(obs.entity_id, []).append(obs)
    return grouped


def score_entities(
    tree: IndicatorTree,
    observations: Iterable[Observation],
    policy: MissingPolicy = MissingPolicy.REWEIGHT,
    input_mode: InputMode = InputMode.RAW_VALUES,
    strict: bool = False,
) -> List[ScoreCard]:
    """Score every entity named in the observations, in first-appearance order."""
    return [
        score_entity(tree, entity_obs, policy, input_mode, entity_id=entity_id, strict=strict)
        for entity_id, entity_obs in group_by_entity(observations).items()
    ]


def dimension_contributions(card: ScoreCard, tree: IndicatorTree) -> List[Tuple[str, float]]:
    """
    Weight times score for each top-level dimension that has data.

    Args:
        card: ScoreCard produced against `tree`
        tree: The scoring tree

    Returns:
        (dimension id, contribution) pairs in tree order
    """
    return [
        (dimension.id, card.node_scores[dimension.id].contribution)
        for dimension in tree.dimensions
        if dimension.id in card.node_scores
    ]


class CompositeScorer:
    """Scores entities against one tree with fixed policy and input mode."""

    def __init__(
        self,
        tree: IndicatorTree,
        policy: MissingPolicy = MissingPolicy.REWEIGHT,
        input_mode: InputMode = InputMode.RAW_VALUES,
        strict: bool = False,
    ):
        """
        Initialize the scorer.

        Args:
            tree: Indicator tree (validated here)
            policy: Missing-data policy (default: reweight)
            input_mode: Observation value mode (default: raw_values)
            strict: Reject duplicate observations (default: False)
        """
        self.tree = require_valid(tree)
        self.policy = MissingPolicy(policy)
        self.input_mode = InputMode(input_mode)
        self.strict = strict

    def score(self, observations: Iterable[Observation], entity_id: Optional[str] = None) -> ScoreCard:
        return score_entity(self.tree, observations, self.policy, self.input_mode, entity_id, self.strict)

    def score_all(self, observations: Iterable[Observation]) -> List[ScoreCard]:
        return score_entities(self.tree, observations, self.policy, self.input_mode, self.strict)

    def contributions(self, card: ScoreCard) -> List[Tuple[str, float]]:
        return dimension_contributions(card, self.tree)
