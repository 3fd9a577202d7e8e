#!/usr/bin/env python3
"""
Command-line interface for validating trees, scoring entities and checking
the built-in reproduction cases.
"""
import argparse
import logging
import sys
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

from comparison import assign_tiers, classify_dimension_gaps, gap_decompose, rank_entities
from config import (
    DEFAULT_MISSING_POLICY,
    DEFAULT_OUTPUT_FORMAT,
    LOG_LEVELS,
    MISSING_POLICIES,
    OUTPUT_FORMATS,
    configure_logging,
    validate_config,
)
from errors import (
    CoverageError,
    IndexEngineError,
    IngestError,
    ScoringError,
    TreeSemanticError,
    TreeSyntaxError,
    UnknownCaseError,
)
from indicators.tree import IndicatorTree
from indicators.tree_parser import load_tree
from indicators.validation import validate_tree
from parsers.observation_parser import load_observations
from reporting.exporter import (
    BASIS_CONTRIBUTION,
    BASIS_SCORE,
    emit_plot_data,
    export_scorecards,
    frame_to_csv,
    render_gap_report,
    render_ranking,
    render_sensitivity,
    render_tiers,
)
from reproduction import CASE_NAMES, verify_case
from scoring import CompositeScorer, InputMode, MissingPolicy, Observation, ScoreCard
from sensitivity import PerturbationModel, perturb_weights

logger = logging.getLogger(__name__)


class ExitStatus(IntEnum):
    OK = 0
    FAILED = 1
    USAGE = 2
    DATA = 3


class UsageError(Exception):
    """Arguments parsed but do not make sense together."""


def _write(text: str, out: Optional[str] = None):
    """Send a result document to --out or stdout."""
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _id_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def _thresholds(text: str) -> List[float]:
    try:
        return [float(item) for item in _id_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"thresholds must be numbers, got {text!r}")


def _load_observations(args) -> Tuple[IndicatorTree, List[Observation]]:
    tree = load_tree(args.tree)
    observations, diagnostics = load_observations(args.data, tree, InputMode(args.mode), strict=args.strict)
    logger.info(
        "read %d rows, accepted %d, rejected %d",
        diagnostics.rows_read, diagnostics.rows_accepted, diagnostics.rows_rejected,
    )
    return tree, observations


def _score(args, tree: IndicatorTree, observations: Sequence[Observation]) -> List[ScoreCard]:
    scorer = CompositeScorer(tree, MissingPolicy(args.policy), InputMode(args.mode), strict=args.strict)
    return scorer.score_all(observations)


def _load_cards(args) -> Tuple[IndicatorTree, List[ScoreCard]]:
    tree, observations = _load_observations(args)
    return tree, _score(args, tree, observations)


def _write_plot_data(args, tree: IndicatorTree, cards: Sequence[ScoreCard]):
    if args.plot_data:
        _write(frame_to_csv(emit_plot_data(cards, tree, args.basis)), args.plot_data)


def cmd_validate(args) -> ExitStatus:
    try:
        tree = load_tree(args.tree, check=False)
    except (TreeSyntaxError, TreeSemanticError) as e:
        print(f"invalid tree: {e}", file=sys.stderr)
        return ExitStatus.FAILED

    report = validate_tree(tree)
    if report.is_valid:
        print(f"{tree.root.id}: valid ({len(tree.dimensions)} dimensions, {len(tree.indicators())} indicators)")
        return ExitStatus.OK
    for violation in report:
        print(str(violation), file=sys.stderr)
    print(f"{len(report)} violation(s)", file=sys.stderr)
    return ExitStatus.FAILED


def cmd_score(args) -> ExitStatus:
    tree, cards = _load_cards(args)
    _write(export_scorecards(cards, tree, args.format), args.out)
    _write_plot_data(args, tree, cards)
    return ExitStatus.OK


def cmd_compare(args) -> ExitStatus:
    entity_ids = _id_list(args.entities)
    if len(entity_ids) != 2:
        raise UsageError(f"--entities takes exactly two ids, got {args.entities!r}")

    tree, cards = _load_cards(args)
    by_id = {card.entity_id: card for card in cards}
    missing = [entity_id for entity_id in entity_ids if entity_id not in by_id]
    if missing:
        raise ScoringError(f"no observations for entity {', '.join(missing)}")

    pair = [by_id[entity_id] for entity_id in entity_ids]
    report = gap_decompose(pair[0], pair[1], tree)
    _write(render_gap_report(report, classify_dimension_gaps(report)), args.out)
    _write_plot_data(args, tree, pair)
    return ExitStatus.OK


def cmd_rank(args) -> ExitStatus:
    _, cards = _load_cards(args)
    if not cards:
        raise ScoringError('no entities to rank')
    _write(render_ranking(rank_entities(cards)), args.out)
    return ExitStatus.OK


def cmd_tiers(args) -> ExitStatus:
    labels = _id_list(args.labels) if args.labels else None
    _, cards = _load_cards(args)
    if not cards:
        raise ScoringError('no entities to rank')
    try:
        assignments = assign_tiers(rank_entities(cards), args.thresholds, labels)
    except ValueError as e:
        raise UsageError(str(e))
    composites = {card.entity_id: card.composite for card in cards}
    _write(render_tiers(assignments, composites), args.out)
    return ExitStatus.OK


def _sensitivity_inputs(
    args,
    tree: IndicatorTree,
    observations: Sequence[Observation],
) -> Dict[str, Dict[str, float]]:
    """Scores on the index scale per entity, keyed by the nodes they were given for."""
    inputs: Dict[str, Dict[str, float]] = {}
    if InputMode(args.mode) is InputMode.PRE_NORMALIZED:
        for obs in observations:
            inputs.setdefault(obs.entity_id, {})[obs.indicator_id] = obs.value
        return inputs

    leaf_ids = [node.id for node in tree.leaves()]
    for card in _score(args, tree, observations):
        inputs[card.entity_id] = {
            leaf_id: card.node_scores[leaf_id].score for leaf_id in leaf_ids if card.has(leaf_id)
        }
    return inputs


def cmd_sensitivity(args) -> ExitStatus:
    tree, observations = _load_observations(args)
    inputs = _sensitivity_inputs(args, tree, observations)
    if not inputs:
        raise ScoringError('no entities to analyse')
    try:
        report = perturb_weights(
            tree,
            magnitude=args.magnitude,
            n_samples=args.samples,
            seed=args.seed,
            cards_input=inputs,
            model=PerturbationModel(args.model),
            all_levels=args.all_levels,
            policy=MissingPolicy(args.policy),
        )
    except IndexEngineError:
        raise
    except ValueError as e:
        raise UsageError(str(e))
    _write(render_sensitivity(report), args.out)
    return ExitStatus.OK


def cmd_reproduce(args) -> ExitStatus:
    report = verify_case(args.case, args.tolerance)
    _write(report.to_table(), args.out)
    return ExitStatus.OK if report.passed else ExitStatus.FAILED


def _data_options(parser: argparse.ArgumentParser):
    parser.add_argument('--tree', required=True, help='Indicator tree document (YAML)')
    parser.add_argument('--data', required=True, help='Observation CSV file')
    parser.add_argument(
        '--mode',
        choices=[mode.value for mode in InputMode],
        default=InputMode.RAW_VALUES.value,
        help='raw_values: native units at leaves; pre_normalized: 0..100 scores (default: raw_values)',
    )
    parser.add_argument(
        '--policy',
        choices=MISSING_POLICIES,
        default=DEFAULT_MISSING_POLICY,
        help=f"Missing-data policy (default: {DEFAULT_MISSING_POLICY})",
    )
    parser.add_argument('--strict', action='store_true', help='Fail on any ingest issue or duplicate')
    parser.add_argument('--out', help='Write the result here instead of standard output')


def _plot_options(parser: argparse.ArgumentParser):
    parser.add_argument('--plot-data', help='Also write grouped-bar CSV data to this file')
    parser.add_argument(
        '--basis',
        choices=[BASIS_SCORE, BASIS_CONTRIBUTION],
        default=BASIS_SCORE,
        help='Plot values: dimension scores or contributions (default: score)',
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='main.py',
        description='Composite index engine: anchor normalization, weighted trees, rankings and sensitivity',
    )
    parser.add_argument(
        '--log-level',
        type=str.upper,
        choices=LOG_LEVELS,
        help='Logging level for diagnostics on stderr (default: INDEX_LOG_LEVEL)',
    )
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    validate = commands.add_parser('validate', help='Check a tree document against every invariant')
    validate.add_argument('--tree', required=True, help='Indicator tree document (YAML)')
    validate.set_defaults(handler=cmd_validate)

    score = commands.add_parser('score', help='Score every entity in an observation file')
    _data_options(score)
    score.add_argument(
        '--format',
        choices=OUTPUT_FORMATS,
        default=DEFAULT_OUTPUT_FORMAT,
        help=f"machine (JSON) or table (default: {DEFAULT_OUTPUT_FORMAT})",
    )
    _plot_options(score)
    score.set_defaults(handler=cmd_score)

    compare = commands.add_parser('compare', help='Decompose the composite gap between two entities')
    _data_options(compare)
    compare.add_argument('--entities', required=True, help='Two entity ids, comma separated')
    _plot_options(compare)
    compare.set_defaults(handler=cmd_compare)

    rank = commands.add_parser('rank', help='Rank entities by composite')
    _data_options(rank)
    rank.set_defaults(handler=cmd_rank)

    tiers = commands.add_parser('tiers', help='Group ranked entities by composite cutoffs')
    _data_options(tiers)
    tiers.add_argument('--thresholds', type=_thresholds, required=True, help='Descending cutoffs, e.g. 30,15')
    tiers.add_argument('--labels', help='Tier names, comma separated, one more than the thresholds')
    tiers.set_defaults(handler=cmd_tiers)

    sensitivity = commands.add_parser('sensitivity', help='Monte-Carlo weight perturbation of the ranking')
    _data_options(sensitivity)
    sensitivity.add_argument('--magnitude', type=float, required=True, help='Perturbation size in [0, 1]')
    sensitivity.add_argument('--samples', type=int, default=1000, help='Number of weight samples (default: 1000)')
    sensitivity.add_argument('--seed', type=int, required=True, help='Random seed (required, non-negative)')
    sensitivity.add_argument(
        '--model',
        choices=[model.value for model in PerturbationModel],
        default=PerturbationModel.MULTIPLICATIVE.value,
        help='Weight perturbation model (default: multiplicative)',
    )
    sensitivity.add_argument('--all-levels', action='store_true', help='Perturb every sibling group, not only dimensions')
    sensitivity.set_defaults(handler=cmd_sensitivity)

    reproduce = commands.add_parser('reproduce', help='Verify a built-in published case')
    reproduce.add_argument('--case', choices=CASE_NAMES, required=True, help='Built-in case name')
    reproduce.add_argument('--tolerance', type=float, help='Override the case tolerance')
    reproduce.add_argument('--out', help='Write the result here instead of standard output')
    reproduce.set_defaults(handler=cmd_reproduce)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one CLI invocation.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        ExitStatus code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitStatus.OK if e.code == 0 else ExitStatus.USAGE

    try:
        validate_config()
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        print("Check the INDEX_* variables in your .env file (see env.example)", file=sys.stderr)
        return ExitStatus.USAGE

    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return ExitStatus.USAGE
    except FileNotFoundError as e:
        print(f"file not found: {e.filename}", file=sys.stderr)
        return ExitStatus.DATA
    except OSError as e:
        print(f"cannot read {e.filename}: {e.strerror}", file=sys.stderr)
        return ExitStatus.DATA
    except (TreeSyntaxError, TreeSemanticError) as e:
        print(f"invalid tree: {e}", file=sys.stderr)
        return ExitStatus.DATA
    except IngestError as e:
        print(f"ingest error: {e}", file=sys.stderr)
        return ExitStatus.DATA
    except (ScoringError, CoverageError) as e:
        print(f"scoring error: {e}", file=sys.stderr)
        return ExitStatus.DATA
    except UnknownCaseError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitStatus.USAGE
    except IndexEngineError as e:
        print(f"error: {e}", file=sys.stderr)
        return ExitStatus.DATA
    except KeyboardInterrupt:
        print("\nProcess interrupted by user", file=sys.stderr)
        return ExitStatus.FAILED


def main() -> int:
    """Main CLI entry point."""
    return int(run())


if __name__ == '__main__':
    sys.exit(main())
