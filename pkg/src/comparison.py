"""
Ranking, pairwise gap decomposition and tier assignment over scorecards.
"""
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from errors import ContractViolation, CoverageError
from indicators.tree import IndicatorTree
from scoring import ScoreCard


class RankedEntity(NamedTuple):
    rank: int
    entity_id: str
    composite: float


class DimensionGap(NamedTuple):
    dimension_id: str
    contribution_a: float
    contribution_b: float
    delta: float


@dataclass(frozen=True)
class GapReport:
    """Per-dimension contribution deltas between two entities."""

    entity_a: str
    entity_b: str
    per_dimension: Tuple[DimensionGap, ...]
    total_gap: float

    def delta_of(self, dimension_id: str) -> float:
        for gap in self.per_dimension:
            if gap.dimension_id == dimension_id:
                return gap.delta
        raise KeyError(dimension_id)


@dataclass(frozen=True)
class TierAssignment:
    entity_id: str
    tier: int
    rank: int
    label: Optional[str] = None


def _check_same_tree(cards: Sequence[ScoreCard]):
    fingerprints = {card.tree_fingerprint for card in cards}
    if len(fingerprints) > 1:
        raise ContractViolation('scorecards were produced against different trees')


def rank_entities(cards: Sequence[ScoreCard]) -> List[RankedEntity]:
    """
    Order entities by descending composite.

    Equal composites share a rank (competition ranking: 1, 1, 3) and are
    listed by entity id.

    Args:
        cards: Nonempty list of scorecards from one tree

    Returns:
        RankedEntity tuples, best first
    """
    if not cards:
        raise ContractViolation('cannot rank an empty list of scorecards')
    _check_same_tree(cards)

    ordered = sorted(cards, key=lambda card: (-card.composite, card.entity_id))
    ranked: List[RankedEntity] = []
    for position, card in enumerate(ordered, start=1):
        if ranked and card.composite == ranked[-1].composite:
            rank = ranked[-1].rank
        else:
            rank = position
        ranked.append(RankedEntity(rank, card.entity_id, card.composite))
    return ranked


def gap_decompose(card_a: ScoreCard, card_b: ScoreCard, tree: IndicatorTree) -> GapReport:
    """
    Split the composite gap between two entities into dimension deltas.

    Deltas are taken on contributions (weight x score), so they add up to
    the composite difference.

    Args:
        card_a: First entity's scorecard
        card_b: Second entity's scorecard
        tree: Tree both cards were scored against

    Returns:
        GapReport with delta = a - b per dimension

    Raises:
        CoverageError: A dimension lacks data for either entity
    """
    _check_same_tree([card_a, card_b])
    gaps: List[DimensionGap] = []
    for dimension in tree.dimensions:
        for card in (card_a, card_b):
            if dimension.id not in card.node_scores:
                raise CoverageError(dimension.id, card.entity_id)
        contribution_a = card_a.node_scores[dimension.id].contribution
        contribution_b = card_b.node_scores[dimension.id].contribution
        gaps.append(DimensionGap(dimension.id, contribution_a, contribution_b, contribution_a - contribution_b))

    return GapReport(
        entity_a=card_a.entity_id,
        entity_b=card_b.entity_id,
        per_dimension=tuple(gaps),
        total_gap=sum(gap.delta for gap in gaps),
    )


def classify_dimension_gaps(
    report: GapReport,
    parity_band: float = 0.5,
    major_gap: float = 3.0,
) -> Dict[str, str]:
    """
    Label each dimension delta for narrative summaries.

    Labels:
        major: entity_a leads by at least `major_gap` points
        moderate: entity_a leads beyond the parity band
        parity: |delta| below `parity_band`
        reversal: entity_b leads beyond the parity band

    Returns:
        Mapping dimension id -> label, in tree order
    """
    if not 0 <= parity_band < major_gap:
        raise ValueError('expected 0 <= parity_band < major_gap')

    labels: Dict[str, str] = {}
    for gap in report.per_dimension:
        if abs(gap.delta) < parity_band:
            labels[gap.dimension_id] = 'parity'
        elif gap.delta < 0:
            labels[gap.dimension_id] = 'reversal'
        elif gap.delta >= major_gap:
            labels[gap.dimension_id] = 'major'
        else:
            labels[gap.dimension_id] = 'moderate'
    return labels


def assign_tiers(
    ranked: Sequence[RankedEntity],
    thresholds: Sequence[float],
    labels: Optional[Sequence[str]] = None,
) -> List[TierAssignment]:
    """
    Bucket ranked entities into tiers by composite cutoffs.

    tier = 1 + number of thresholds strictly above the composite, so an
    entity sitting exactly on a cutoff joins the better tier.

    Args:
        ranked: Output of rank_entities
        thresholds: Strictly descending composite cutoffs
        labels: Optional tier names, one per tier (len(thresholds) + 1)

    Returns:
        TierAssignment per entity, in ranked order
    """
    thresholds = list(thresholds)
    if any(upper <= lower for upper, lower in zip(thresholds, thresholds[1:])):
        raise ValueError(f"tier thresholds must be strictly descending, got {thresholds}")
    if labels is not None and len(labels) != len(thresholds) + 1:
        raise ValueError(f"expected {len(thresholds) + 1} tier labels, got {len(labels)}")

    assignments = []
    for entry in ranked:
        tier = 1 + sum(1 for cutoff in thresholds if cutoff > entry.composite)
        assignments.append(TierAssignment(
            entity_id=entry.entity_id,
            tier=tier,
            rank=entry.rank,
            label=labels[tier - 1] if labels else None,
        ))
    return assignments


def dimension_leaders(cards: Sequence[ScoreCard], tree: IndicatorTree) -> Dict[str, str]:
    """Top-scoring entity per dimension; ties go to the smaller entity id."""
    _check_same_tree(cards)
    leaders: Dict[str, str] = {}
    for dimension in tree.dimensions:
        scored = [
            (card.node_scores[dimension.id].score, card.entity_id)
            for card in cards
            if dimension.id in card.node_scores
        ]
        if scored:
            leaders[dimension.id] = min(scored, key=lambda item: (-item[0], item[1]))[1]
    return leaders


def benchmark_ratios(cards: Sequence[ScoreCard], benchmark_id: str) -> Dict[str, float]:
    """Each composite as a fraction of the benchmark entity's composite."""
    by_id = {card.entity_id: card for card in cards}
    if benchmark_id not in by_id:
        raise KeyError(f"benchmark entity '{benchmark_id}' not among the scorecards")
    reference = by_id[benchmark_id].composite
    if reference == 0:
        raise ValueError(f"benchmark entity '{benchmark_id}' has a zero composite")
    return {card.entity_id: card.composite / reference for card in cards}
