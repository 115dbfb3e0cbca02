import json
import os

import pandas as pd
import pytest

from cli.main_cli import build_config, build_parser, run


def _read(out_dir, name):
    with open(os.path.join(out_dir, name), encoding='utf-8') as f:
        return json.load(f)


def test_spectrum_writes_modes(out_dir):
    assert run(['spectrum', '--mu-max', '100', '--out', out_dir]) == 0
    frame = pd.read_csv(os.path.join(out_dir, 'spectrum_modes.csv'))
    assert frame['k_index'].astype(str).tolist() == ['1', '2', '3']
    report = _read(out_dir, 'spectrum.json')
    assert report['checks'][0]['count'] == 3
    assert report['metadata']['config']['experiment']['mu_max'] == 100.0


def test_reverse_poincare_closed_form_passes(out_dir):
    argv = ['verify', 'reverse-poincare', '--r', '1', '--R', '2', '--source', 'closed', '--alpha', '4',
            '--out', out_dir]
    assert run(argv) == 0
    check = _read(out_dir, 'verify_reverse_poincare.json')['checks'][0]
    assert check['passed'] is True
    assert check['lhs'] <= check['constant_used'] * check['factor'] * check['rhs']


def test_reruns_are_identical(out_dir, tmp_path):
    argv = ['verify', 'l2-reverse', '--alpha', '5', '--seed', '3']
    assert run(argv + ['--out', out_dir]) == 0
    other = str(tmp_path / "again")
    assert run(argv + ['--out', other]) == 0
    assert _read(out_dir, 'verify_l2_reverse.json')['checks'] == _read(other, 'verify_l2_reverse.json')['checks']


def test_compare_against_baseline(out_dir, tmp_path):
    argv = ['verify', 'reverse-poincare', '--out', out_dir]
    assert run(argv) == 0
    baseline = os.path.join(out_dir, 'verify_reverse_poincare.json')
    assert run(argv + ['--compare', baseline]) == 0

    report = _read(out_dir, 'verify_reverse_poincare.json')
    report['checks'][0]['lhs'] *= 1.0 + 1e-6
    edited = str(tmp_path / "edited.json")
    with open(edited, 'w', encoding='utf-8') as f:
        json.dump(report, f)
    assert run(argv + ['--compare', edited]) == 6
    assert run(argv + ['--compare', edited, '--rtol', '1e-3']) == 0
    assert run(argv + ['--compare', str(tmp_path / "missing.json")]) == 2


def test_selection_below_threshold_is_precondition_error(out_dir):
    assert run(['cm', 'select', '--sigma', '1.5', '--M', '4', '--out', out_dir]) == 3


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "experiment.cfg"
    path.write_text("experiment.alpha = 6.0\nexperiment.K = 7\n", encoding="utf-8")
    args = build_parser().parse_args(['verify', 'growth', '--config', str(path), '--K', '9'])
    config = build_config(args)
    assert config.experiment['alpha'] == 6.0
    assert config.experiment['K'] == 9


@pytest.mark.parametrize('argv', [
    ['verify', 'growth', '--K', 'nine'],
    ['verify', 'growth', '--scheme', 'leapfrog'],
    ['spectrum', '--mu-max=-5'],
    ['verify', 'growth', '--source', 'elsewhere'],
])
def test_bad_values_exit_with_config_code(argv, out_dir):
    assert run(argv + ['--out', out_dir]) == 2


def test_bad_config_file(tmp_path, out_dir):
    path = tmp_path / "broken.cfg"
    path.write_text("experiment.d 6\n", encoding="utf-8")
    assert run(['spectrum', '--config', str(path), '--out', out_dir]) == 2
    assert run(['spectrum', '--config', str(tmp_path / "absent.cfg"), '--out', out_dir]) == 2


def test_usage_errors(capsys):
    assert run(['verify', 'nonsense']) == 2
    assert run(['frobnicate']) == 2
    assert run([]) == 2
