"""
Built-in reproduction cases: published AI Index results and their checks.

Published composites are kept as the printed strings so fixture integrity can
be checked character for character; inputs are dimension-level scores fed in
pre_normalized mode.
"""
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from config import FIXTURES_DIR, REPRODUCTION_TOLERANCES
from errors import UnknownCaseError
from indicators.tree import IndicatorTree
from indicators.tree_parser import load_tree
from parsers.observation_parser import load_observations
from reporting.exporter import render_rows, round_half_away
from scoring import Entity, InputMode, MissingPolicy, Observation, score_entities

logger = logging.getLogger(__name__)

TREE_FIXTURE = 'ai_index_tree.yaml'
REGIONS_FIXTURE = 'china_regions.csv'

CASE_NAMES = ('us-china', 'china-regions')

# Dimension values quoted for each country. They sum to
# the composites, so they are read as contributions (weight x score).
PUBLISHED_CONTRIBUTIONS = {
    'us': {
        'technical': '12.9', 'rd': '11.3', 'ai_science': '7.15', 'industry': '14.8',
        'education': '9.03', 'policy': '8.9', 'social': '4.1',
    },
    'china': {
        'technical': '9.98', 'rd': '10.3', 'ai_science': '6.91', 'industry': '11.2',
        'education': '8.72', 'policy': '5.3', 'social': '7.0',
    },
}

PUBLISHED_COMPOSITES = {
    'us-china': {'us': '68.1', 'china': '59.4'},
    'china-regions': {
        'east': '40.0', 'north': '35.9', 'south': '28.4', 'southwest': '10.1',
        'central': '10.8', 'northwest': '8.6', 'northeast': '8.9',
    },
}

ENTITIES = {
    'us-china': (
        Entity('us', 'United States', 'country'),
        Entity('china', 'China', 'country'),
    ),
    'china-regions': (
        Entity('east', 'East China (Shanghai & East)', 'China'),
        Entity('north', 'North China (Beijing & North)', 'China'),
        Entity('south', 'South China (Guangdong)', 'China'),
        Entity('southwest', 'Southwest China (Sichuan/Chongqing)', 'China'),
        Entity('central', 'Central China (Hubei/Hunan)', 'China'),
        Entity('northwest', 'Northwest China (Shaanxi)', 'China'),
        Entity('northeast', 'Northeast China (Liaoning etc)', 'China'),
    ),
}

# (30, 15) is the round-number pair that reproduces the three regional groups
REGION_TIER_THRESHOLDS = (30.0, 15.0)
REGION_TIER_LABELS = ('Leaders', 'Strong Followers', 'Lagging Regions')


@dataclass(frozen=True)
class ReproductionCase:
    """A published result set plus the inputs that should reproduce it."""

    name: str
    tree: IndicatorTree
    entities: Tuple[Entity, ...]
    inputs: Dict[str, Dict[str, float]]
    expected: Dict[str, float]
    published: Dict[str, str]
    tolerance: float
    tier_thresholds: Tuple[float, ...] = ()
    tier_labels: Tuple[str, ...] = ()

    def observations(self) -> List[Observation]:
        """Inputs as pre-normalized observations, entity by entity."""
        return [
            Observation(entity_id, node_id, value)
            for entity_id, vector in self.inputs.items()
            for node_id, value in vector.items()
        ]


@dataclass(frozen=True)
class VerificationRow:
    entity_id: str
    expected: float
    recomputed: float
    delta: float
    passed: bool
    note: str = ''
    name: str = ''


@dataclass
class VerificationReport:
    """Per-entity comparison of recomputed and published composites."""

    case: str
    tolerance: float
    rows: List[VerificationRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> List[VerificationRow]:
        return [row for row in self.rows if not row.passed]

    def row_for(self, entity_id: str) -> VerificationRow:
        for row in self.rows:
            if row.entity_id == entity_id:
                return row
        raise KeyError(entity_id)

    def to_table(self) -> str:
        rows = [
            [
                row.entity_id,
                row.name or row.entity_id,
                str(row.expected),
                f"{row.recomputed:.4f}",
                f"{row.delta:+.4f}",
                'pass' if row.passed else 'FAIL',
                row.note,
            ]
            for row in self.rows
        ]
        table = render_rows(['entity', 'name', 'published', 'recomputed', 'delta', 'status', 'note'], rows, left=2)
        verdict = 'PASS' if self.passed else 'FAIL'
        summary = (
            f"{self.case}: {verdict} "
            f"({len(self.rows) - len(self.failures)}/{len(self.rows)} within {self.tolerance:g})\n"
        )
        return table + summary


@lru_cache(maxsize=None)
def _fixture_tree(fixtures_dir: str) -> IndicatorTree:
    return load_tree(os.path.join(fixtures_dir, TREE_FIXTURE))


def _us_china_inputs(tree: IndicatorTree) -> Dict[str, Dict[str, float]]:
    return {
        entity_id: {
            dimension_id: float(text) / tree.get_node(dimension_id).weight
            for dimension_id, text in contributions.items()
        }
        for entity_id, contributions in PUBLISHED_CONTRIBUTIONS.items()
    }


def _region_inputs(tree: IndicatorTree, fixtures_dir: str) -> Dict[str, Dict[str, float]]:
    observations, _ = load_observations(
        os.path.join(fixtures_dir, REGIONS_FIXTURE), tree, InputMode.PRE_NORMALIZED, strict=True,
    )
    inputs: Dict[str, Dict[str, float]] = {}
    for obs in observations:
        inputs.setdefault(obs.entity_id, {})[obs.indicator_id] = obs.value
    return inputs


def builtin_case(name: str, fixtures_dir: Optional[str] = None) -> ReproductionCase:
    """
    Load a built-in reproduction case.

    Args:
        name: 'us-china' or 'china-regions'
        fixtures_dir: Override for the fixtures directory

    Returns:
        ReproductionCase

    Raises:
        UnknownCaseError: If the name is not built in
    """
    if name not in CASE_NAMES:
        raise UnknownCaseError(f"unknown reproduction case '{name}' (known: {', '.join(CASE_NAMES)})")

    fixtures_dir = fixtures_dir or FIXTURES_DIR
    tree = _fixture_tree(fixtures_dir)
    published = dict(PUBLISHED_COMPOSITES[name])

    if name == 'us-china':
        inputs = _us_china_inputs(tree)
        thresholds, labels = (), ()
    else:
        inputs = _region_inputs(tree, fixtures_dir)
        thresholds, labels = REGION_TIER_THRESHOLDS, REGION_TIER_LABELS

    return ReproductionCase(
        name=name,
        tree=tree,
        entities=ENTITIES[name],
        inputs=inputs,
        expected={entity_id: float(text) for entity_id, text in published.items()},
        published=published,
        tolerance=REPRODUCTION_TOLERANCES[name],
        tier_thresholds=thresholds,
        tier_labels=labels,
    )


def verify_case(name: str, tolerance_override: Optional[float] = None) -> VerificationReport:
    """
    Recompute a case's composites and compare them with the published ones.

    Args:
        name: Built-in case name
        tolerance_override: Replace the case's default tolerance

    Returns:
        VerificationReport; an entity passes iff |recomputed - published| <= tolerance
    """
    case = builtin_case(name)
    tolerance = case.tolerance if tolerance_override is None else tolerance_override
    cards = score_entities(case.tree, case.observations(), MissingPolicy.FAIL, InputMode.PRE_NORMALIZED)

    names = {entity.id: entity.display_name for entity in case.entities}
    report = VerificationReport(case=name, tolerance=tolerance)
    for card in cards:
        expected = case.expected[card.entity_id]
        delta = card.composite - expected
        rounded = round_half_away(card.composite)
        note = ''
        if rounded != case.published[card.entity_id]:
            note = f"rounding note: recomputed rounds to {rounded}, published {case.published[card.entity_id]}"
            logger.info("%s/%s: %s", name, card.entity_id, note)
        report.rows.append(VerificationRow(
            entity_id=card.entity_id,
            expected=expected,
            recomputed=card.composite,
            delta=delta,
            passed=abs(delta) <= tolerance,
            note=note,
            name=names.get(card.entity_id, card.entity_id),
        ))
    return report
