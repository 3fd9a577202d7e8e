"""End-to-end tests of the command-line interface."""
import json
import os
import textwrap

import pandas as pd
import pytest

from conftest import FIXTURES
from run_index import ExitStatus, run

TREE = os.path.join(FIXTURES, 'ai_index_tree.yaml')
REGIONS = os.path.join(FIXTURES, 'china_regions.csv')
US_CHINA = os.path.join(FIXTURES, 'us_china.csv')


def _data_args(command, data=REGIONS, *extra):
    return [command, '--tree', TREE, '--data', data, '--mode', 'pre_normalized', '--policy', 'fail', *extra]


def _rows(text):
    return [line.split() for line in text.splitlines()[2:]]


# ── Exit statuses ─────────────────────────────────────────────


def test_help_exits_cleanly(capsys):
    assert run(['--help']) == ExitStatus.OK
    assert 'sensitivity' in capsys.readouterr().out


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(['explode']) == ExitStatus.USAGE
    assert 'invalid choice' in capsys.readouterr().err


def test_missing_tree_file(capsys, tmp_path):
    status = run(['score', '--tree', str(tmp_path / 'nope.yaml'), '--data', REGIONS])

    assert status == ExitStatus.DATA
    assert 'file not found' in capsys.readouterr().err


def test_missing_data_file(capsys, tmp_path):
    assert run(_data_args('rank', str(tmp_path / 'nope.csv'))) == ExitStatus.DATA


def test_strict_ingest_failure(capsys, tmp_path):
    data = tmp_path / 'bad.csv'
    data.write_text('entity_id,indicator_id,value\neast,quantum,3\n', encoding='utf-8')

    assert run(_data_args('score', str(data), '--strict')) == ExitStatus.DATA
    assert 'ingest error' in capsys.readouterr().err


def test_missing_dimension_under_fail_policy(capsys, tmp_path):
    data = tmp_path / 'partial.csv'
    data.write_text('entity_id,indicator_id,value\neast,rd,30\n', encoding='utf-8')

    assert run(_data_args('score', str(data))) == ExitStatus.DATA
    assert 'missing indicator' in capsys.readouterr().err


def test_data_file_with_bad_encoding(capsys, tmp_path):
    data = tmp_path / 'latin1.csv'
    data.write_bytes(b'entity_id,indicator_id,value\n\xff\xfe,rd,1\n')

    assert run(_data_args('score', str(data))) == ExitStatus.DATA
    assert 'not valid UTF-8' in capsys.readouterr().err


def test_tree_file_with_bad_encoding(capsys, tmp_path):
    tree = tmp_path / 'tree.yaml'
    tree.write_bytes(b'index:\n  id: \xe9t\xe9\n')

    assert run(['score', '--tree', str(tree), '--data', REGIONS]) == ExitStatus.DATA
    assert 'not valid UTF-8' in capsys.readouterr().err
    assert run(['validate', '--tree', str(tree)]) == ExitStatus.FAILED


def test_data_path_is_a_directory(capsys, tmp_path):
    assert run(_data_args('rank', str(tmp_path))) == ExitStatus.DATA
    assert 'cannot read' in capsys.readouterr().err


def test_extra_field_row_is_skipped(capsys, tmp_path):
    data = tmp_path / 'extra.csv'
    with open(REGIONS, encoding='utf-8') as f:
        data.write_text(f.read() + 'east,rd,99,,junk\n', encoding='utf-8')

    assert run(_data_args('rank', str(data))) == ExitStatus.OK
    assert _rows(capsys.readouterr().out)[0] == ['1', 'east', '40.0']


# ── validate ──────────────────────────────────────────────────


def test_validate_fixture_tree(capsys):
    assert run(['validate', '--tree', TREE]) == ExitStatus.OK
    assert capsys.readouterr().out.strip() == 'ai_index: valid (7 dimensions, 7 indicators)'


def test_validate_reports_violations(capsys, tmp_path):
    tree = tmp_path / 'tree.yaml'
    tree.write_text(textwrap.dedent("""\
        index:
          id: idx
          name: Broken
          scale: 100
          dimensions:
            - {id: a, name: A, weight: 0.5, anchors: {low: 0, high: 1}}
            - {id: b, name: B, weight: 0.6, anchors: {low: 0, high: 1}}
        """), encoding='utf-8')

    assert run(['validate', '--tree', str(tree)]) == ExitStatus.FAILED
    assert '1 violation(s)' in capsys.readouterr().err


def test_validate_malformed_document(capsys, tmp_path):
    tree = tmp_path / 'tree.yaml'
    tree.write_text('index:\n  id: [unclosed\n', encoding='utf-8')

    assert run(['validate', '--tree', str(tree)]) == ExitStatus.FAILED
    assert 'invalid tree' in capsys.readouterr().err


# ── score / rank / tiers ──────────────────────────────────────


def test_score_table(capsys):
    assert run(_data_args('score', REGIONS, '--format', 'table')) == ExitStatus.OK

    rows = _rows(capsys.readouterr().out)
    assert [row[1] for row in rows][:3] == ['east', 'north', 'south']
    assert [row[-1] for row in rows] == ['40.0', '35.9', '28.4', '10.8', '10.1', '8.9', '8.6']


def test_score_machine_to_file(capsys, tmp_path):
    out = tmp_path / 'scores.json'

    assert run(_data_args('score', US_CHINA, '--format', 'machine', '--out', str(out))) == ExitStatus.OK

    document = json.loads(out.read_text(encoding='utf-8'))
    assert capsys.readouterr().out == ''
    assert [e['entity_id'] for e in document['entities']] == ['us', 'china']
    assert document['entities'][0]['composite'] == pytest.approx(68.18, abs=1e-9)


def test_score_plot_data(tmp_path, capsys):
    plot = tmp_path / 'plot.csv'

    status = run(_data_args('score', US_CHINA, '--plot-data', str(plot), '--basis', 'contribution'))

    assert status == ExitStatus.OK
    frame = pd.read_csv(plot).set_index('dimension')
    assert list(frame.columns) == ['us', 'china']
    assert frame.loc['social', 'china'] == pytest.approx(7.0, abs=1e-9)


def test_raw_mode_matches_pre_normalized_for_unit_anchors(capsys):
    run(_data_args('rank', US_CHINA))
    pre = capsys.readouterr().out

    run(['rank', '--tree', TREE, '--data', US_CHINA, '--policy', 'fail'])
    raw = capsys.readouterr().out

    assert raw == pre
    assert _rows(pre) == [['1', 'us', '68.2'], ['2', 'china', '59.4']]


def test_tiers(capsys):
    status = run(_data_args('tiers', REGIONS, '--thresholds', '30,15', '--labels', 'Leaders,Followers,Lagging'))

    assert status == ExitStatus.OK
    rows = _rows(capsys.readouterr().out)
    assert [row[1] for row in rows] == ['Leaders', 'Leaders', 'Followers'] + ['Lagging'] * 4


def test_tiers_label_count_mismatch(capsys):
    status = run(_data_args('tiers', REGIONS, '--thresholds', '30,15', '--labels', 'Top,Rest'))

    assert status == ExitStatus.USAGE
    assert 'tier labels' in capsys.readouterr().err


def test_tiers_bad_threshold_text(capsys):
    assert run(_data_args('tiers', REGIONS, '--thresholds', 'high,low')) == ExitStatus.USAGE


# ── compare ───────────────────────────────────────────────────


def test_compare_us_china(capsys):
    assert run(_data_args('compare', US_CHINA, '--entities', 'us,china')) == ExitStatus.OK

    rows = {row[0]: row for row in _rows(capsys.readouterr().out)}
    assert rows['total'] == ['total', '8.77']
    assert rows['social'][-1] == 'reversal'
    assert rows['industry'][-1] == 'major'


def test_compare_needs_two_entities(capsys):
    assert run(_data_args('compare', US_CHINA, '--entities', 'us')) == ExitStatus.USAGE


def test_compare_unknown_entity(capsys):
    assert run(_data_args('compare', US_CHINA, '--entities', 'us,eu')) == ExitStatus.DATA
    assert "no observations for entity eu" in capsys.readouterr().err


# ── sensitivity ───────────────────────────────────────────────


def test_sensitivity_is_reproducible(capsys):
    args = _data_args('sensitivity', REGIONS, '--magnitude', '0.5', '--samples', '500', '--seed', '42',
                      '--model', 'dirichlet')

    assert run(args) == ExitStatus.OK
    first = capsys.readouterr().out
    assert run(args) == ExitStatus.OK
    second = capsys.readouterr().out

    assert first == second
    assert first.startswith('seed=42 samples=500 magnitude=0.5 model=dirichlet all_levels=false')


def test_sensitivity_requires_seed(capsys):
    assert run(_data_args('sensitivity', REGIONS, '--magnitude', '0.2')) == ExitStatus.USAGE


def test_sensitivity_rejects_large_magnitude(capsys):
    status = run(_data_args('sensitivity', REGIONS, '--magnitude', '1.5', '--seed', '1'))

    assert status == ExitStatus.USAGE
    assert 'magnitude must lie in [0, 1]' in capsys.readouterr().err


# ── reproduce ─────────────────────────────────────────────────


@pytest.mark.parametrize('case', ['us-china', 'china-regions'])
def test_reproduce_passes(capsys, case):
    assert run(['reproduce', '--case', case]) == ExitStatus.OK
    assert f"{case}: PASS" in capsys.readouterr().out


def test_reproduce_tight_tolerance_fails(capsys):
    assert run(['reproduce', '--case', 'us-china', '--tolerance', '0.01']) == ExitStatus.FAILED
    assert 'us-china: FAIL' in capsys.readouterr().out


def test_reproduce_unknown_case(capsys):
    assert run(['reproduce', '--case', 'eu-japan']) == ExitStatus.USAGE
