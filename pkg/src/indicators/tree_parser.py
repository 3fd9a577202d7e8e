"""
Tree document parsing and serialization.

A tree document is YAML (JSON documents are accepted too, JSON being a YAML
subset):

    index:
      id: ai_index
      name: AI Index
      scale: 100
      dimensions:
        - id: rd
          name: Research & Development
          weight: 0.20
          anchors: {low: 0, high: 100}
          direction: higher_better   # optional
"""
import logging
from typing import Any, Dict, List

import yaml

from errors import TreeSemanticError, TreeSyntaxError
from indicators.tree import AnchorPair, Direction, IndicatorNode, IndicatorTree
from indicators.validation import validate_tree

logger = logging.getLogger(__name__)

NODE_KEYS = {'id', 'name', 'weight', 'children', 'anchors', 'direction'}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class TreeParser:
    """Builds IndicatorTree objects from tree documents."""

    @staticmethod
    def load_document(document: str) -> Dict[str, Any]:
        """
        Parse document text into plain data.

        Raises:
            TreeSyntaxError: If the text is not well-formed
        """
        try:
            data = yaml.safe_load(document)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else '<document>'
            problem = getattr(e, 'problem', None) or str(e)
            raise TreeSyntaxError(problem, where) from e

        if not isinstance(data, dict) or 'index' not in data:
            raise TreeSemanticError("document must have a top-level 'index' object", '<document>')
        return data

    @staticmethod
    def _require(obj: Dict[str, Any], key: str, path: str) -> Any:
        if key not in obj or obj[key] is None:
            raise TreeSemanticError(f"missing field '{key}'", path)
        return obj[key]

    @staticmethod
    def _token(obj: Dict[str, Any], key: str, path: str) -> str:
        value = TreeParser._require(obj, key, path)
        if not isinstance(value, str) or not value.strip():
            raise TreeSemanticError(f"'{key}' must be a nonempty string, got {value!r}", f"{path}.{key}")
        return value.strip()

    @staticmethod
    def _number(obj: Dict[str, Any], key: str, path: str) -> float:
        value = TreeParser._require(obj, key, path)
        if not _is_number(value):
            raise TreeSemanticError(f"non-numeric {key} {value!r}", f"{path}.{key}")
        return float(value)

    @staticmethod
    def build_node(obj: Any, path: str) -> IndicatorNode:
        """Build one node (recursively) from its mapping."""
        if not isinstance(obj, dict):
            raise TreeSemanticError('node must be an object', path)

        unknown = set(obj) - NODE_KEYS
        if unknown:
            logger.warning("%s: ignoring unknown keys %s", path, ', '.join(sorted(unknown)))

        node_id = TreeParser._token(obj, 'id', path)
        name = TreeParser._token(obj, 'name', path)
        weight = TreeParser._number(obj, 'weight', path)

        has_children = obj.get('children') is not None
        has_anchors = obj.get('anchors') is not None
        if has_children == has_anchors:
            raise TreeSemanticError("node needs exactly one of 'children' or 'anchors'", path)

        if has_children:
            raw_children = obj['children']
            if not isinstance(raw_children, list) or not raw_children:
                raise TreeSemanticError("'children' must be a nonempty array", f"{path}.children")
            children = tuple(
                TreeParser.build_node(child, f"{path}.children[{i}]")
                for i, child in enumerate(raw_children)
            )
            if 'direction' in obj:
                raise TreeSemanticError("'direction' applies to leaves only", f"{path}.direction")
            return IndicatorNode(id=node_id, name=name, weight=weight, children=children)

        raw_anchors = obj['anchors']
        anchors_path = f"{path}.anchors"
        if not isinstance(raw_anchors, dict):
            raise TreeSemanticError("'anchors' must be an object with 'low' and 'high'", anchors_path)
        anchors = AnchorPair(
            low=TreeParser._number(raw_anchors, 'low', anchors_path),
            high=TreeParser._number(raw_anchors, 'high', anchors_path),
        )

        raw_direction = obj.get('direction', Direction.HIGHER_BETTER.value)
        try:
            direction = Direction(raw_direction)
        except ValueError:
            raise TreeSemanticError(
                f"direction must be 'higher_better' or 'lower_better', got {raw_direction!r}",
                f"{path}.direction",
            )
        return IndicatorNode(id=node_id, name=name, weight=weight, anchors=anchors, direction=direction)

    @staticmethod
    def build_tree(data: Dict[str, Any]) -> IndicatorTree:
        """Build a tree from parsed document data without validating it."""
        index = data['index']
        if not isinstance(index, dict):
            raise TreeSemanticError("'index' must be an object", 'index')

        index_id = TreeParser._token(index, 'id', 'index')
        name = TreeParser._token(index, 'name', 'index')
        scale = TreeParser._number(index, 'scale', 'index')

        raw_dimensions = TreeParser._require(index, 'dimensions', 'index')
        if not isinstance(raw_dimensions, list) or not raw_dimensions:
            raise TreeSemanticError("'dimensions' must be a nonempty array", 'index.dimensions')

        dimensions = tuple(
            TreeParser.build_node(obj, f"index.dimensions[{i}]")
            for i, obj in enumerate(raw_dimensions)
        )
        root = IndicatorNode(id=index_id, name=name, weight=1.0, children=dimensions)
        return IndicatorTree(root=root, scale=scale)


def parse_tree(document: str, check: bool = True) -> IndicatorTree:
    """
    Parse a tree document.

    Args:
        document: Tree document text
        check: Reject trees that fail validation (default: True)

    Returns:
        Parsed IndicatorTree

    Raises:
        TreeSyntaxError: Malformed document
        TreeSemanticError: Missing or mistyped fields, or invariant violations
    """
    tree = TreeParser.build_tree(TreeParser.load_document(document))
    if check:
        report = validate_tree(tree)
        if not report.is_valid:
            first = report.violations[0]
            detail = '; '.join(f"{v.kind}: {v.message}" for v in report)
            raise TreeSemanticError(detail, first.path, report.violations)
    return tree


def load_tree(path: str, check: bool = True) -> IndicatorTree:
    """Read and parse a tree document from disk."""
    try:
        with open(path, 'r', encoding='utf-8-sig') as f:
            document = f.read()
    except UnicodeDecodeError as e:
        raise TreeSyntaxError(f"not valid UTF-8 ({e.reason} at byte {e.start})", path) from e
    return parse_tree(document, check=check)


def _node_document(node: IndicatorNode) -> Dict[str, Any]:
    obj: Dict[str, Any] = {'id': node.id, 'name': node.name, 'weight': node.weight}
    if node.is_leaf:
        obj['anchors'] = {'low': node.anchors.low, 'high': node.anchors.high}
        if node.direction is not Direction.HIGHER_BETTER:
            obj['direction'] = node.direction.value
    else:
        obj['children'] = [_node_document(child) for child in node.children]
    return obj


def serialize_tree(tree: IndicatorTree) -> str:
    """Render a tree back to document text that parse_tree accepts."""
    dimensions: List[Dict[str, Any]] = [_node_document(node) for node in tree.dimensions]
    data = {
        'index': {
            'id': tree.root.id,
            'name': tree.root.name,
            'scale': tree.scale,
            'dimensions': dimensions,
        }
    }
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)
