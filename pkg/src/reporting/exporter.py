"""
Scorecard export, plot-ready tables and text renderings of results.

Numbers keep full double precision everywhere except the human-readable
tables, which round half away from zero to one decimal.
"""
import io
import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Mapping, Optional, Sequence

import pandas as pd

from comparison import GapReport, RankedEntity, TierAssignment, rank_entities
from errors import CoverageError
from indicators.tree import IndicatorTree
from scoring import ScoreCard
from sensitivity import SensitivityReport, rank_flip_matrix

MACHINE = 'machine'
TABLE = 'table'

BASIS_SCORE = 'score'
BASIS_CONTRIBUTION = 'contribution'


def round_half_away(value: float, places: int = 1) -> str:
    """Format a number rounded half away from zero."""
    quantum = Decimal(1).scaleb(-places)
    rounded = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if rounded == 0:
        rounded = abs(rounded)
    return str(rounded)


def render_rows(header: Sequence[str], rows: Sequence[Sequence[str]], left: int = 1) -> str:
    """Fixed-width text table; the first `left` columns are left-aligned."""
    widths = [len(title) for title in header]
    for row in rows:
        widths = [max(width, len(cell)) for width, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        parts = [
            cell.ljust(width) if i < left else cell.rjust(width)
            for i, (cell, width) in enumerate(zip(cells, widths))
        ]
        return '  '.join(parts).rstrip()

    out = [line(header), '  '.join('-' * width for width in widths)]
    out.extend(line(row) for row in rows)
    return '\n'.join(out) + '\n'


def scorecards_to_document(cards: Sequence[ScoreCard], tree: IndicatorTree) -> Dict[str, Any]:
    """Machine-format data: one object per entity, nodes in tree order."""
    node_order = [node.id for _, node in tree.iter_nodes()]
    entities = []
    for card in cards:
        nodes = {
            node_id: {
                'score': card.node_scores[node_id].score,
                'contribution': card.node_scores[node_id].contribution,
                'coverage': card.node_scores[node_id].coverage,
            }
            for node_id in node_order
            if node_id in card.node_scores
        }
        entities.append({
            'entity_id': card.entity_id,
            'policy': card.policy_used.value,
            'composite': card.composite,
            'nodes': nodes,
        })
    return {
        'index': tree.root.id,
        'scale': tree.scale,
        'tree_fingerprint': tree.fingerprint,
        'entities': entities,
    }


def _scorecard_table(cards: Sequence[ScoreCard], tree: IndicatorTree) -> str:
    dimension_ids = tree.dimension_ids()
    header = ['rank', 'entity'] + dimension_ids + ['composite']
    rows: List[List[str]] = []
    if cards:
        by_id = {card.entity_id: card for card in cards}
        for entry in rank_entities(cards):
            card = by_id[entry.entity_id]
            cells = [str(entry.rank), card.entity_id]
            for dimension_id in dimension_ids:
                score = card.score_of(dimension_id)
                cells.append('-' if score is None else round_half_away(score))
            cells.append(round_half_away(card.composite))
            rows.append(cells)
    return render_rows(header, rows, left=2)


def export_scorecards(cards: Sequence[ScoreCard], tree: IndicatorTree, fmt: str = MACHINE) -> str:
    """
    Render scorecards as a document.

    Args:
        cards: Scorecards produced against `tree`
        tree: The scoring tree
        fmt: 'machine' (JSON, full precision, input order) or 'table'
            (ranked, one decimal)

    Returns:
        Document text
    """
    if fmt == MACHINE:
        return json.dumps(scorecards_to_document(cards, tree), indent=2, ensure_ascii=False) + '\n'
    if fmt == TABLE:
        return _scorecard_table(cards, tree)
    raise ValueError(f"unknown export format '{fmt}' (expected '{MACHINE}' or '{TABLE}')")


def emit_plot_data(cards: Sequence[ScoreCard], tree: IndicatorTree, basis: str = BASIS_SCORE) -> pd.DataFrame:
    """
    Grouped-bar data: one row per dimension, one column per entity.

    Args:
        cards: Scorecards at full dimension coverage (column order kept)
        tree: The scoring tree (row order)
        basis: 'score' or 'contribution'

    Returns:
        DataFrame with a leading `dimension` column

    Raises:
        CoverageError: A dimension lacks data for some entity
    """
    if basis not in (BASIS_SCORE, BASIS_CONTRIBUTION):
        raise ValueError(f"unknown plot basis '{basis}' (expected '{BASIS_SCORE}' or '{BASIS_CONTRIBUTION}')")

    data: Dict[str, List[Any]] = {'dimension': tree.dimension_ids()}
    for card in cards:
        column = []
        for dimension_id in data['dimension']:
            node_score = card.node_scores.get(dimension_id)
            if node_score is None:
                raise CoverageError(dimension_id, card.entity_id)
            column.append(node_score.score if basis == BASIS_SCORE else node_score.contribution)
        data[card.entity_id] = column
    return pd.DataFrame(data)


def frame_to_csv(frame: pd.DataFrame) -> str:
    """CSV text with full-precision floats and no index column."""
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()


def machine_to_observations_csv(document: str, tree: IndicatorTree) -> str:
    """
    Turn a machine-format export back into pre-normalized observation CSV.

    Each entity's dimension scores become rows, so re-ingesting and
    rescoring reproduces the exported composites.
    """
    data = json.loads(document)
    rows = []
    for entity in data['entities']:
        for dimension_id in tree.dimension_ids():
            node = entity['nodes'].get(dimension_id)
            if node is not None:
                rows.append((entity['entity_id'], dimension_id, repr(float(node['score'])), ''))
    frame = pd.DataFrame(rows, columns=['entity_id', 'indicator_id', 'value', 'period'], dtype=str)
    return frame_to_csv(frame)


def render_ranking(ranked: Sequence[RankedEntity]) -> str:
    rows = [[str(entry.rank), entry.entity_id, round_half_away(entry.composite)] for entry in ranked]
    return render_rows(['rank', 'entity', 'composite'], rows, left=2)


def render_tiers(assignments: Sequence[TierAssignment], composites: Mapping[str, float]) -> str:
    rows = [
        [str(a.tier), a.label or '', str(a.rank), a.entity_id, round_half_away(composites[a.entity_id])]
        for a in assignments
    ]
    return render_rows(['tier', 'label', 'rank', 'entity', 'composite'], rows, left=4)


def render_gap_report(report: GapReport, labels: Optional[Mapping[str, str]] = None) -> str:
    labels = labels or {}
    rows = [
        [
            gap.dimension_id,
            round_half_away(gap.contribution_a, 2),
            round_half_away(gap.contribution_b, 2),
            round_half_away(gap.delta, 2),
            labels.get(gap.dimension_id, ''),
        ]
        for gap in report.per_dimension
    ]
    rows.append(['total', '', '', round_half_away(report.total_gap, 2), ''])
    header = ['dimension', report.entity_a, report.entity_b, 'delta', 'reading']
    return render_rows(header, rows, left=1)


def render_sensitivity(report: SensitivityReport) -> str:
    """Rank distribution, composite bands and flip fractions as text tables."""
    n_ranks = len(report.baseline_ranking)
    header = ['entity', 'baseline'] + [f"r{rank}" for rank in range(1, n_ranks + 1)] + ['min', 'mean', 'max']
    rows = []
    for entity_id in report.baseline_ranking:
        low, mean, high = report.composite_bands[entity_id]
        counts = report.rank_distribution[entity_id]
        rows.append(
            [entity_id, str(report.baseline_ranks[entity_id])]
            + [f"{count / report.n_samples:.3f}" for count in counts]
            + [round_half_away(low), round_half_away(mean), round_half_away(high)]
        )
    title = (
        f"seed={report.seed} samples={report.n_samples} magnitude={report.magnitude:g} "
        f"model={report.model.value} all_levels={str(report.all_levels).lower()}\n"
    )

    flips = rank_flip_matrix(report)
    flip_rows = [
        [a] + ['-' if a == b else f"{flips.loc[a, b]:.3f}" for b in flips.columns]
        for a in flips.index
    ]
    flip_table = render_rows(['P(row > col)'] + list(flips.columns), flip_rows, left=1)
    return title + '\n' + render_rows(header, rows, left=1) + '\n' + flip_table
