"""Shared fixtures: the AI index tree and the published regional and US/China scores."""
import os

import pytest

from indicators.tree import Direction, IndicatorTree, branch, leaf
from indicators.tree_parser import load_tree
from scoring import InputMode, MissingPolicy, Observation, score_entities

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
FIXTURES = os.path.join(REPO_ROOT, 'fixtures')

DIMENSIONS = ('technical', 'rd', 'ai_science', 'industry', 'education', 'policy', 'social')

# Regional dimension cells, in DIMENSIONS order
REGION_SCORES = {
    'east': (71.7, 27.5, 31.7, 35.5, 31.7, 38.5, 48.8),
    'north': (64.3, 28.5, 37.3, 24.6, 28.4, 39.1, 37.0),
    'south': (62.9, 19.3, 14.3, 20.8, 27.8, 25.1, 28.2),
    'southwest': (27.3, 7.0, 3.3, 6.8, 2.7, 13.0, 12.3),
    'central': (25.4, 7.7, 6.5, 6.8, 4.2, 11.9, 16.3),
    'northwest': (26.7, 6.2, 4.0, 3.3, 2.9, 9.4, 9.4),
    'northeast': (37.6, 3.9, 2.9, 2.2, 2.3, 6.8, 7.3),
}

WEIGHTS = {
    'rd': 0.20, 'industry': 0.20, 'technical': 0.15, 'education': 0.15,
    'ai_science': 0.10, 'policy': 0.10, 'social': 0.10,
}

# Dimension contributions quoted for each country
US_CONTRIBUTIONS = {
    'technical': 12.9, 'rd': 11.3, 'ai_science': 7.15, 'industry': 14.8,
    'education': 9.03, 'policy': 8.9, 'social': 4.1,
}
CHINA_CONTRIBUTIONS = {
    'technical': 9.98, 'rd': 10.3, 'ai_science': 6.91, 'industry': 11.2,
    'education': 8.72, 'policy': 5.3, 'social': 7.0,
}


def region_vector(entity_id):
    return dict(zip(DIMENSIONS, REGION_SCORES[entity_id]))


def observations_for(inputs):
    return [
        Observation(entity_id, node_id, value)
        for entity_id, vector in inputs.items()
        for node_id, value in vector.items()
    ]


@pytest.fixture(scope='session')
def ai_tree() -> IndicatorTree:
    return load_tree(os.path.join(FIXTURES, 'ai_index_tree.yaml'))


@pytest.fixture
def region_inputs():
    return {entity_id: region_vector(entity_id) for entity_id in REGION_SCORES}


@pytest.fixture
def region_cards(ai_tree, region_inputs):
    return score_entities(
        ai_tree, observations_for(region_inputs), MissingPolicy.FAIL, InputMode.PRE_NORMALIZED,
    )


@pytest.fixture
def us_china_inputs():
    return {
        'us': {d: c / WEIGHTS[d] for d, c in US_CONTRIBUTIONS.items()},
        'china': {d: c / WEIGHTS[d] for d, c in CHINA_CONTRIBUTIONS.items()},
    }


@pytest.fixture
def us_china_cards(ai_tree, us_china_inputs):
    return score_entities(
        ai_tree, observations_for(us_china_inputs), MissingPolicy.FAIL, InputMode.PRE_NORMALIZED,
    )


@pytest.fixture
def two_level_tree() -> IndicatorTree:
    """Two dimensions, the first split into two raw-valued leaves."""
    root = branch('idx', 1.0, [
        branch('talent', 0.6, [
            leaf('phd', 0.5, low=0, high=200),
            leaf('cost', 0.5, low=10, high=60, direction=Direction.LOWER_BETTER),
        ]),
        leaf('papers', 0.4, low=0, high=1000),
    ])
    return IndicatorTree(root)
