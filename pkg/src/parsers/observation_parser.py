"""
Observation CSV ingestion.

Layout: header `entity_id,indicator_id,value,period` (period optional and may
be empty), comma delimited, UTF-8 with or without a BOM, `.` as decimal
point. Row numbers in diagnostics count the header as row 1; blank lines are
skipped uncounted. A row with more fields than the header is rejected on its
own; the rest of the file is still read.
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Iterator, List, NamedTuple, Optional, Tuple, Union

import pandas as pd

from errors import IngestError
from indicators.tree import IndicatorTree
from scoring import InputMode, Observation

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ['entity_id', 'indicator_id', 'value']
OPTIONAL_COLUMNS = ['period']

class IngestIssue(NamedTuple):
    row: int
    kind: str
    message: str
    severity: str = 'error'


@dataclass
class IngestDiagnostics:
    """What happened to each row of an observation file."""

    rows_read: int = 0
    rows_accepted: int = 0
    issues: List[IngestIssue] = field(default_factory=list)

    @property
    def rows_rejected(self) -> int:
        return self.rows_read - self.rows_accepted

    @property
    def warnings(self) -> List[IngestIssue]:
        return [issue for issue in self.issues if issue.severity == 'warning']

    @property
    def errors(self) -> List[IngestIssue]:
        return [issue for issue in self.issues if issue.severity == 'error']

    def report(self, kind: str, row: int, message: str, severity: str = 'error'):
        self.issues.append(IngestIssue(row, kind, message, severity))


class ObservationParser:
    """Turns observation CSV rows into Observation objects against a tree."""

    def __init__(self, tree: IndicatorTree, mode: InputMode = InputMode.RAW_VALUES, strict: bool = False):
        """
        Initialize the parser.

        Args:
            tree: Tree the observations must refer to
            mode: raw_values (leaf ids only) or pre_normalized (any node id,
                values in [0, scale])
            strict: Turn any issue into an IngestError
        """
        self.tree = tree
        self.mode = InputMode(mode)
        self.strict = strict

    @staticmethod
    def _records(stream: Union[str, IO[str]]) -> Iterator[List[str]]:
        if isinstance(stream, str):
            with open(stream, 'r', encoding='utf-8-sig', newline='') as f:
                yield from csv.reader(f)
        else:
            yield from csv.reader(stream)

    def read_frame(
        self,
        stream: Union[str, IO[str]],
        diagnostics: Optional[IngestDiagnostics] = None,
    ) -> pd.DataFrame:
        """
        Read the CSV as text columns plus a `line_no` column.

        Rows with too many fields are left out of the frame and reported to
        `diagnostics`. An unreadable layout raises IngestError.
        """
        try:
            records = [
                (line, record)
                for line, record in enumerate(self._records(stream), start=1)
                if any(cell.strip() for cell in record)
            ]
        except UnicodeDecodeError as e:
            raise IngestError(f"observation file is not valid UTF-8: {e}") from e
        except csv.Error as e:
            raise IngestError(f"malformed observation file: {e}") from e
        if not records:
            raise IngestError('observation file is empty (expected a header row)')

        header = [cell.strip().lstrip('\ufeff') for cell in records[0][1]]
        missing = [column for column in REQUIRED_COLUMNS if column not in header]
        if missing:
            raise IngestError(
                f"observation header lacks {', '.join(missing)} "
                f"(expected {','.join(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)})"
            )

        rows: List[List[str]] = []
        line_numbers: List[int] = []
        for row, record in records[1:]:
            if len(record) > len(header):
                if diagnostics is not None:
                    diagnostics.report(
                        'malformed row', row, f"expected {len(header)} fields, found {len(record)}"
                    )
                continue
            rows.append(record + [''] * (len(header) - len(record)))
            line_numbers.append(row)

        frame = pd.DataFrame(rows, columns=header, dtype=str)
        if 'period' not in frame.columns:
            frame['period'] = ''
        frame.insert(0, 'line_no', line_numbers)
        return frame

    def _check_row(self, row: int, entity_id: str, indicator_id: str, raw_value: str,
                   diagnostics: IngestDiagnostics):
        """Return the parsed value, or None after reporting the issue."""
        if not entity_id:
            diagnostics.report('missing entity', row, 'entity_id is empty')
            return None
        if not indicator_id:
            diagnostics.report('missing indicator', row, 'indicator_id is empty')
            return None

        node = self.tree.get_node(indicator_id)
        if node is None:
            diagnostics.report('unknown indicator', row, f"indicator '{indicator_id}' is not in the tree")
            return None
        if self.mode is InputMode.RAW_VALUES and (not node.is_leaf or node is self.tree.root):
            diagnostics.report('not a leaf', row, f"'{indicator_id}' is a branch; raw values attach to leaves")
            return None

        try:
            value = float(raw_value)
        except ValueError:
            diagnostics.report('non-numeric value', row, f"value {raw_value!r} is not a number")
            return None
        if not math.isfinite(value):
            diagnostics.report('non-finite value', row, f"value {raw_value!r} is not finite")
            return None
        if self.mode is InputMode.PRE_NORMALIZED and not 0.0 <= value <= self.tree.scale:
            diagnostics.report(
                'out of range', row, f"pre-normalized score {value!r} outside [0, {self.tree.scale:g}]"
            )
            return None
        return value

    def parse(self, stream: Union[str, IO[str]]) -> Tuple[List[Observation], IngestDiagnostics]:
        """
        Parse an observation stream.

        Args:
            stream: Path or text stream holding the CSV

        Returns:
            (observations in file order, diagnostics)

        Raises:
            IngestError: Unreadable layout, or any issue in strict mode
        """
        diagnostics = IngestDiagnostics()
        frame = self.read_frame(stream, diagnostics)
        # malformed rows never reach the frame but still count as read
        diagnostics.rows_read = len(frame) + len(diagnostics.issues)
        accepted = {}

        for record in frame.itertuples(index=False):
            row = int(record.line_no)
            entity_id = record.entity_id.strip()
            indicator_id = record.indicator_id.strip()
            value = self._check_row(row, entity_id, indicator_id, record.value.strip(), diagnostics)
            if value is None:
                continue

            key = (entity_id, indicator_id)
            if key in accepted:
                earlier_row, _ = accepted.pop(key)
                diagnostics.report(
                    'duplicate', earlier_row,
                    f"({entity_id}, {indicator_id}) repeated at row {row}; the later row wins",
                    severity='warning',
                )
            period = record.period.strip() or None
            accepted[key] = (row, Observation(entity_id, indicator_id, value, period))

        observations = [observation for _, observation in sorted(accepted.values(), key=lambda item: item[0])]
        diagnostics.rows_accepted = len(observations)
        diagnostics.issues.sort(key=lambda issue: issue.row)

        if self.strict and diagnostics.issues:
            first = diagnostics.issues[0]
            raise IngestError(
                f"row {first.row}: {first.kind}: {first.message} ({len(diagnostics.issues)} issue(s) in total)",
                diagnostics,
            )
        for issue in diagnostics.issues:
            log = logger.warning if issue.severity == 'warning' else logger.error
            log("row %d: %s: %s", issue.row, issue.kind, issue.message)

        return observations, diagnostics


def load_observations(
    stream: Union[str, IO[str]],
    tree: IndicatorTree,
    mode: InputMode = InputMode.RAW_VALUES,
    strict: bool = False,
) -> Tuple[List[Observation], IngestDiagnostics]:
    """
    Convenience function to ingest an observation CSV.

    Args:
        stream: Path or text stream
        tree: Tree the observations refer to
        mode: Input mode
        strict: Fail on any issue

    Returns:
        (observations, diagnostics)
    """
    parser = ObservationParser(tree, mode, strict)
    return parser.parse(stream)
