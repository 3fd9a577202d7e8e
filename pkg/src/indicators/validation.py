"""
Structural validation of indicator trees.

Violations are returned as data; nothing here raises for an invalid tree
except `require_valid`, which callers use to enforce the precondition.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List

from config import INDEX_SCALE, WEIGHT_TOLERANCE
from errors import ContractViolation
from indicators.tree import IndicatorNode, IndicatorTree


@dataclass(frozen=True)
class Violation:
    """One broken tree invariant, located by node path."""

    path: str
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.kind}: {self.message}"


@dataclass
class ValidationReport:
    """Every invariant violation found in a tree; empty means valid."""

    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]

    def add(self, path: str, kind: str, message: str):
        self.violations.append(Violation(path, kind, message))

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


def _check_weight(node: IndicatorNode, path: str, report: ValidationReport):
    weight = node.weight
    if isinstance(weight, bool) or not isinstance(weight, (int, float)) or not math.isfinite(weight):
        report.add(path, 'invalid weight', f"weight {weight!r} is not a finite number")
    elif weight <= 0:
        report.add(path, 'non-positive weight', f"weight {weight!r} must be greater than 0")
    elif weight > 1:
        report.add(path, 'weight above 1', f"weight {weight!r} must not exceed 1")


def _check_body(node: IndicatorNode, path: str, report: ValidationReport):
    if node.is_leaf:
        anchors = node.anchors
        if anchors is None:
            report.add(path, 'missing anchors', 'leaf has no anchor pair')
        elif not anchors.is_finite():
            report.add(path, 'non-finite anchors', f"anchors ({anchors.low}, {anchors.high}) must be finite")
        elif anchors.low == anchors.high:
            report.add(path, 'degenerate anchors', f"low and high are both {anchors.low}")
        elif anchors.low > anchors.high:
            report.add(path, 'inverted anchors', f"low {anchors.low} exceeds high {anchors.high}")
        return

    if node.anchors is not None:
        report.add(path, 'branch with anchors', 'a node with children cannot carry anchors')

    total = sum(child.weight for child in node.children
                if isinstance(child.weight, (int, float)) and math.isfinite(child.weight))
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        ids = ', '.join(child.id for child in node.children)
        report.add(
            path,
            'weight sum',
            f"sibling group beneath '{node.id}' ({ids}) sums to {total:.6g}, expected 1",
        )


def validate_tree(tree: IndicatorTree) -> ValidationReport:
    """
    Check every tree invariant.

    Args:
        tree: Tree to check

    Returns:
        ValidationReport listing each violation with its node path
    """
    report = ValidationReport()

    if tree.scale != INDEX_SCALE:
        report.add(tree.root.id, 'scale', f"scale must be {INDEX_SCALE:g}, got {tree.scale!r}")
    if tree.root.weight != 1:
        report.add(tree.root.id, 'root weight', f"root weight must be 1, got {tree.root.weight!r}")
    if tree.root.is_leaf:
        report.add(tree.root.id, 'empty index', 'the index has no dimensions')

    seen: Dict[str, str] = {}
    for path, node in tree.iter_nodes():
        if not node.id:
            report.add(path, 'empty id', 'node id must be a nonempty token')
        elif node.id in seen:
            report.add(path, 'duplicate id', f"id '{node.id}' already used at {seen[node.id]}")
        else:
            seen[node.id] = path

        if node is not tree.root:
            _check_weight(node, path, report)
            _check_body(node, path, report)
        elif not node.is_leaf:
            _check_body(node, path, report)

    return report


def require_valid(tree: IndicatorTree) -> IndicatorTree:
    """Raise ContractViolation unless the tree is valid. Result is cached per tree."""
    report = tree._report
    if report is None:
        report = validate_tree(tree).violations
        object.__setattr__(tree, '_report', report)
    if report:
        raise ContractViolation(f"invalid tree: {report[0]}")
    return tree
