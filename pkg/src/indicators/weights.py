"""
Effective (root-to-leaf) weights.
"""
from typing import List, Tuple

from indicators.tree import IndicatorNode, IndicatorTree
from indicators.validation import require_valid


def flatten_leaves(tree: IndicatorTree) -> List[Tuple[str, float]]:
    """
    List every leaf with the product of weights along its root path.

    Args:
        tree: A valid indicator tree

    Returns:
        (leaf id, effective weight) pairs in depth-first document order

    Raises:
        ContractViolation: If the tree is invalid
    """
    require_valid(tree)
    flattened: List[Tuple[str, float]] = []

    def descend(node: IndicatorNode, carried: float):
        for child in node.children:
            effective = carried * child.weight
            if child.is_leaf:
                flattened.append((child.id, effective))
            else:
                descend(child, effective)

    descend(tree.root, 1.0)
    return flattened


def sibling_groups(tree: IndicatorTree) -> List[Tuple[str, List[str]]]:
    """(parent id, child ids) for every branch, depth-first."""
    return [
        (node.id, [child.id for child in node.children])
        for _, node in tree.iter_nodes()
        if not node.is_leaf
    ]
