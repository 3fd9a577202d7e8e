"""
Monte-Carlo weight sensitivity of composite rankings.

Each sample draws its own generator from SeedSequence(seed, spawn_key=(i,)),
so sample i is reproducible on its own and results do not depend on the
order samples are evaluated in. Generators are numpy's default PCG64.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import pandas as pd
from typing_extensions import TypeAlias

from comparison import rank_entities
from config import sensitivity_chunk_size
from indicators.tree import IndicatorTree
from indicators.validation import require_valid
from indicators.weights import sibling_groups
from scoring import InputMode, MissingPolicy, Observation, ScoreCard, score_entity

logger = logging.getLogger(__name__)

ScoreVector: TypeAlias = Mapping[str, float]
EntityPair: TypeAlias = Tuple[str, str]

# cap on the (samples x entities x entities) comparison block
_MAX_BLOCK_CELLS = 5_000_000


class PerturbationModel(str, Enum):
    """
    How a sample's weights are drawn around the expert weights w0.

    multiplicative: w_d = w0_d * U(1 - m, 1 + m), then renormalized
    dirichlet: w ~ Dirichlet(k * w0) with k = (1 - m^2) / m^2, so the mean is
        w0 and the spread of w_d is m * sqrt(w0_d * (1 - w0_d))
    """

    MULTIPLICATIVE = 'multiplicative'
    DIRICHLET = 'dirichlet'


@dataclass(frozen=True)
class SensitivityReport:
    """Rank statistics of entities across perturbed-weight samples."""

    seed: int
    n_samples: int
    magnitude: float
    model: PerturbationModel
    all_levels: bool
    baseline_ranking: Tuple[str, ...]
    baseline_ranks: Dict[str, int]
    rank_distribution: Dict[str, Tuple[int, ...]]
    flip_matrix: Dict[EntityPair, float]
    tie_matrix: Dict[EntityPair, float]
    composite_bands: Dict[str, Tuple[float, float, float]]

    def flip_fraction(self, entity_a: str, entity_b: str) -> float:
        """Fraction of samples in which entity_a outranks entity_b."""
        return self.flip_matrix[(entity_a, entity_b)]

    def tie_fraction(self, entity_a: str, entity_b: str) -> float:
        return self.tie_matrix[(entity_a, entity_b)]

    def baseline_share(self, entity_id: str) -> float:
        """Fraction of samples in which the entity keeps its baseline rank (ties share a rank)."""
        rank = self.baseline_ranks[entity_id]
        return self.rank_distribution[entity_id][rank - 1] / self.n_samples


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for sample `index`, derived only from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def draw_weights(
    base: np.ndarray,
    magnitude: float,
    model: PerturbationModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Perturb one sibling group's weights and renormalize them to sum 1.

    Args:
        base: Expert weights of the group
        magnitude: Perturbation size in [0, 1]
        model: Perturbation model
        rng: Generator for this sample

    Returns:
        New weight vector, positive, summing to 1
    """
    if model is PerturbationModel.MULTIPLICATIVE:
        weights = base * rng.uniform(1.0 - magnitude, 1.0 + magnitude, size=base.shape[0])
    elif magnitude == 0.0:
        weights = base.copy()
    else:
        concentration = (1.0 - magnitude * magnitude) / (magnitude * magnitude)
        weights = rng.dirichlet(concentration * base)
    return weights / weights.sum()


def sample_weight_map(
    tree: IndicatorTree,
    magnitude: float,
    model: PerturbationModel,
    rng: np.random.Generator,
    all_levels: bool = False,
) -> Dict[str, float]:
    """Perturbed weights keyed by node id for one sample."""
    groups = sibling_groups(tree) if all_levels else [(tree.root.id, tree.dimension_ids())]
    weights: Dict[str, float] = {}
    for _, child_ids in groups:
        base = np.array([tree.get_node(child_id).weight for child_id in child_ids], dtype=float)
        drawn = draw_weights(base, magnitude, model, rng)
        weights.update(zip(child_ids, drawn.tolist()))
    return weights


def _validate_arguments(magnitude: float, n_samples: int, seed: int, model: PerturbationModel):
    if not 0.0 <= magnitude <= 1.0:
        raise ValueError(f"magnitude must lie in [0, 1], got {magnitude!r} (above 1 allows negative weights)")
    if model is PerturbationModel.DIRICHLET and magnitude == 1.0:
        raise ValueError("the dirichlet model needs magnitude below 1 (1 leaves no concentration)")
    if isinstance(n_samples, bool) or not isinstance(n_samples, int) or n_samples < 1:
        raise ValueError(f"n_samples must be a positive integer, got {n_samples!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")


def _observations(inputs: Mapping[str, ScoreVector]) -> Dict[str, List[Observation]]:
    return {
        entity_id: [Observation(entity_id, node_id, float(value)) for node_id, value in vector.items()]
        for entity_id, vector in inputs.items()
    }


class _Tally:
    """Accumulates rank histograms, pairwise counts and composite bands."""

    def __init__(self, n_entities: int):
        self.ranks = np.zeros((n_entities, n_entities), dtype=np.int64)
        self.greater = np.zeros((n_entities, n_entities), dtype=np.int64)
        self.minimum = np.full(n_entities, np.inf)
        self.maximum = np.full(n_entities, -np.inf)
        self.total = np.zeros(n_entities)

    def add(self, composites: np.ndarray):
        n_entities = composites.shape[1]
        # outranks[s, a, b]: entity a strictly above entity b in sample s
        outranks = composites[:, :, None] > composites[:, None, :]
        ranks = 1 + outranks.sum(axis=1)
        for entity in range(n_entities):
            self.ranks[entity] += np.bincount(ranks[:, entity] - 1, minlength=n_entities)
        self.greater += outranks.sum(axis=0)
        self.minimum = np.minimum(self.minimum, composites.min(axis=0))
        self.maximum = np.maximum(self.maximum, composites.max(axis=0))
        self.total += composites.sum(axis=0)


def _dimension_matrix(tree: IndicatorTree, cards: Sequence[ScoreCard]) -> np.ndarray:
    matrix = np.full((len(cards), len(tree.dimensions)), np.nan)
    for row, card in enumerate(cards):
        for col, dimension in enumerate(tree.dimensions):
            score = card.score_of(dimension.id)
            if score is not None:
                matrix[row, col] = score
    return matrix


def _top_level_composites(
    scores: np.ndarray,
    weights: np.ndarray,
    policy: MissingPolicy,
) -> np.ndarray:
    """Composites (samples x entities) for perturbed dimension weights."""
    present = ~np.isnan(scores)
    filled = np.where(present, scores, 0.0)
    numerator = np.zeros((weights.shape[0], scores.shape[0]))
    denominator = np.zeros_like(numerator)
    # fixed summation order keeps identical entities bit-identical
    for col in range(scores.shape[1]):
        numerator += weights[:, col:col + 1] * filled[None, :, col]
        denominator += weights[:, col:col + 1] * present[None, :, col]
    if policy is MissingPolicy.REWEIGHT and not present.all():
        full = present.all(axis=1)
        return np.where(full[None, :], numerator, numerator / denominator)
    return numerator


def perturb_weights(
    tree: IndicatorTree,
    magnitude: float,
    n_samples: int,
    seed: int,
    cards_input: Mapping[str, ScoreVector],
    model: PerturbationModel = PerturbationModel.MULTIPLICATIVE,
    all_levels: bool = False,
    policy: MissingPolicy = MissingPolicy.REWEIGHT,
) -> SensitivityReport:
    """
    Rescore all entities under randomly perturbed weights.

    Args:
        tree: A valid indicator tree
        magnitude: Perturbation size in [0, 1]
        n_samples: Number of weight samples
        seed: Non-negative integer seed; the report is a pure function of it
        cards_input: Pre-normalized scores per entity (node id -> score)
        model: Perturbation model (default: multiplicative)
        all_levels: Perturb every sibling group, not just the dimensions
        policy: Missing-data policy used for rescoring

    Returns:
        SensitivityReport
    """
    require_valid(tree)
    model = PerturbationModel(model)
    _validate_arguments(magnitude, n_samples, seed, model)
    policy = MissingPolicy(policy)
    if not cards_input:
        raise ValueError('sensitivity analysis needs at least one entity')

    observations = _observations(cards_input)
    entity_ids = list(observations)
    baseline_cards = [
        score_entity(tree, obs, policy, InputMode.PRE_NORMALIZED, entity_id=entity_id)
        for entity_id, obs in observations.items()
    ]
    baseline_ranked = rank_entities(baseline_cards)
    baseline_ranking = tuple(entry.entity_id for entry in baseline_ranked)

    n_entities = len(entity_ids)
    tally = _Tally(n_entities)
    block = max(1, min(sensitivity_chunk_size(), _MAX_BLOCK_CELLS // (n_entities * n_entities)))
    logger.info(
        "sensitivity: %d samples, magnitude %g, model %s, %d entities, block %d",
        n_samples, magnitude, model.value, n_entities, block,
    )

    if all_levels:
        for start in range(0, n_samples, block):
            stop = min(start + block, n_samples)
            composites = np.empty((stop - start, n_entities))
            for row, index in enumerate(range(start, stop)):
                weights = sample_weight_map(tree, magnitude, model, sample_rng(seed, index), all_levels=True)
                perturbed = tree.with_weights(weights)
                for col, entity_id in enumerate(entity_ids):
                    composites[row, col] = score_entity(
                        perturbed, observations[entity_id], policy, InputMode.PRE_NORMALIZED, entity_id=entity_id,
                    ).composite
            tally.add(composites)
    else:
        scores = _dimension_matrix(tree, baseline_cards)
        base = np.array([dimension.weight for dimension in tree.dimensions], dtype=float)
        for start in range(0, n_samples, block):
            stop = min(start + block, n_samples)
            weights = np.vstack([
                draw_weights(base, magnitude, model, sample_rng(seed, index))
                for index in range(start, stop)
            ])
            tally.add(_top_level_composites(scores, weights, policy))

    flip_matrix: Dict[EntityPair, float] = {}
    tie_matrix: Dict[EntityPair, float] = {}
    for a, entity_a in enumerate(entity_ids):
        for b, entity_b in enumerate(entity_ids):
            if a == b:
                continue
            flip_matrix[(entity_a, entity_b)] = float(tally.greater[a, b] / n_samples)
            tie_matrix[(entity_a, entity_b)] = float(
                (n_samples - tally.greater[a, b] - tally.greater[b, a]) / n_samples
            )

    return SensitivityReport(
        seed=seed,
        n_samples=n_samples,
        magnitude=magnitude,
        model=model,
        all_levels=all_levels,
        baseline_ranking=baseline_ranking,
        baseline_ranks={entry.entity_id: entry.rank for entry in baseline_ranked},
        rank_distribution={
            entity_id: tuple(int(count) for count in tally.ranks[i])
            for i, entity_id in enumerate(entity_ids)
        },
        flip_matrix=flip_matrix,
        tie_matrix=tie_matrix,
        composite_bands={
            entity_id: (float(tally.minimum[i]), float(tally.total[i] / n_samples), float(tally.maximum[i]))
            for i, entity_id in enumerate(entity_ids)
        },
    )


def rank_flip_matrix(report: SensitivityReport) -> pd.DataFrame:
    """
    Pairwise flip fractions as a square table.

    Cell (a, b) is the fraction of samples in which a outranks b. Rows and
    columns follow the baseline ranking; the diagonal is NaN.
    """
    order = list(report.baseline_ranking)
    frame = pd.DataFrame(np.nan, index=order, columns=order, dtype=float)
    for (entity_a, entity_b), fraction in report.flip_matrix.items():
        frame.loc[entity_a, entity_b] = fraction
    frame.index.name = 'entity'
    return frame
