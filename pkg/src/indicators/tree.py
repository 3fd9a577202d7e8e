"""
Hierarchical indicator weight tree.

The `index` object of a tree document is the root node (weight 1). Its
children are the dimensions; leaves carry the anchor pair used for
normalization. Trees are immutable once built.
"""
import hashlib
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from config import INDEX_SCALE


class Direction(str, Enum):
    """Whether a larger raw value is an improvement."""

    HIGHER_BETTER = 'higher_better'
    LOWER_BETTER = 'lower_better'


@dataclass(frozen=True)
class AnchorPair:
    """Fixed low/high reference values in the indicator's native units."""

    low: float
    high: float

    def is_finite(self) -> bool:
        return math.isfinite(self.low) and math.isfinite(self.high)

    def is_valid(self) -> bool:
        return self.is_finite() and self.low < self.high


@dataclass(frozen=True)
class IndicatorNode:
    """
    One node of the weight tree.

    A node with children is a branch; a node without children is a leaf and
    must carry anchors.
    """

    id: str
    name: str
    weight: float
    children: Tuple['IndicatorNode', ...] = ()
    anchors: Optional[AnchorPair] = None
    direction: Direction = Direction.HIGHER_BETTER

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self, parent_path: str = '') -> Iterator[Tuple[str, 'IndicatorNode']]:
        """Yield (path, node) depth-first in document order, self first."""
        path = f"{parent_path}/{self.id}" if parent_path else self.id
        yield path, self
        for child in self.children:
            yield from child.walk(path)


@dataclass(frozen=True)
class IndicatorTree:
    """A rooted weight tree plus the normalized score scale."""

    root: IndicatorNode
    scale: float = INDEX_SCALE
    _nodes: Dict[str, IndicatorNode] = field(init=False, repr=False, compare=False)
    _paths: Dict[str, str] = field(init=False, repr=False, compare=False)
    _parents: Dict[str, Optional[str]] = field(init=False, repr=False, compare=False)
    _report: Optional[list] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes: Dict[str, IndicatorNode] = {}
        paths: Dict[str, str] = {}
        parents: Dict[str, Optional[str]] = {self.root.id: None}
        for path, node in self.root.walk():
            # first occurrence wins; duplicates are reported by validation
            if node.id not in nodes:
                nodes[node.id] = node
                paths[node.id] = path
            for child in node.children:
                parents.setdefault(child.id, node.id)
        object.__setattr__(self, '_nodes', nodes)
        object.__setattr__(self, '_paths', paths)
        object.__setattr__(self, '_parents', parents)
        object.__setattr__(self, '_report', None)

    @property
    def dimensions(self) -> Tuple[IndicatorNode, ...]:
        """Top-level branches beneath the index root."""
        return self.root.children

    def dimension_ids(self) -> List[str]:
        return [node.id for node in self.root.children]

    def get_node(self, node_id: str) -> Optional[IndicatorNode]:
        return self._nodes.get(node_id)

    def path_of(self, node_id: str) -> str:
        return self._paths[node_id]

    def ancestors(self, node_id: str) -> List[str]:
        """Ids from the node's parent up to the root."""
        chain = []
        current = self._parents.get(node_id)
        while current is not None:
            chain.append(current)
            current = self._parents.get(current)
        return chain

    def iter_nodes(self) -> Iterator[Tuple[str, IndicatorNode]]:
        """All nodes including the root, depth-first."""
        return self.root.walk()

    def indicators(self) -> List[IndicatorNode]:
        """Indicator nodes beneath the root (the root is the index itself)."""
        return [node for _, node in self.root.walk()][1:]

    def leaves(self) -> List[IndicatorNode]:
        return [node for node in self.indicators() if node.is_leaf]

    def with_weights(self, weights: Mapping[str, float]) -> 'IndicatorTree':
        """Copy of the tree with the given node weights replaced."""

        def rebuild(node: IndicatorNode) -> IndicatorNode:
            children = tuple(rebuild(child) for child in node.children)
            return replace(node, weight=weights.get(node.id, node.weight), children=children)

        return IndicatorTree(root=rebuild(self.root), scale=self.scale)

    @property
    def fingerprint(self) -> str:
        """Stable digest of the tree structure, weights and anchors."""
        digest = hashlib.sha256()
        # numbers hash as floats so 200 and 200.0 give the same digest
        digest.update(repr(float(self.scale)).encode('utf-8'))
        for path, node in self.root.walk():
            anchors = (float(node.anchors.low), float(node.anchors.high)) if node.anchors else None
            digest.update(
                f"{path}|{float(node.weight)!r}|{anchors!r}|{node.direction.value}\n".encode('utf-8')
            )
        return digest.hexdigest()[:16]


def leaf(node_id: str, weight: float, low: float = 0.0, high: float = 100.0,
         direction: Direction = Direction.HIGHER_BETTER, name: str = None) -> IndicatorNode:
    """Shorthand constructor for a leaf node."""
    return IndicatorNode(
        id=node_id,
        name=name or node_id,
        weight=weight,
        anchors=AnchorPair(low, high),
        direction=direction,
    )


def branch(node_id: str, weight: float, children: List[IndicatorNode], name: str = None) -> IndicatorNode:
    """Shorthand constructor for a branch node."""
    return IndicatorNode(id=node_id, name=name or node_id, weight=weight, children=tuple(children))
