import json
import os

import numpy as np
import pandas as pd
import pytest

from controller.fd_solver_controller import FdSolverController
from dao.config_dao import ConfigDao, coerce_value
from dao.field_dao import FieldDao
from dao.report_dao import ReportDao
from dao.solution_dao import SolutionDao
from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import ConfigError, DomainError


@pytest.fixture
def config_dao():
    return ConfigDao()


def _write(tmp_path, text, name="experiment.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---- config ----------------------------------------------------------------

def test_parse_typed_values(config_dao):
    overrides = config_dao.parse_text(
        "# strip of width 2\n"
        "domain.lengths = 2.0\n"
        "experiment.K = 12   # ladder\n"
        "experiment.source = field\n"
        "experiment.radii = 1, 2.5, 4\n"
        "\n"
        "operator.scheme = crank_nicolson\n")
    assert overrides['domain'] == {'lengths': [2.0]}
    assert overrides['experiment']['K'] == 12 and isinstance(overrides['experiment']['K'], int)
    assert overrides['experiment']['radii'] == [1.0, 2.5, 4.0]
    assert overrides['experiment']['source'] == 'field'
    assert overrides['operator'] == {'scheme': 'crank_nicolson'}


@pytest.mark.parametrize('text, line, key', [
    ("domain.X = 4\nexperiment.d 6\n", 2, None),
    ("experiment.colour = red\n", 1, 'experiment.colour'),
    ("nosection = 1\n", 1, 'nosection'),
    ("experiment.d = 6\n\nexperiment.d = 7\n", 3, 'experiment.d'),
    ("# header\nexperiment.K = 2.5\n", 2, 'experiment.K'),
    ("experiment.d = six\n", 1, 'experiment.d'),
])
def test_parse_errors_carry_line_and_key(config_dao, text, line, key):
    with pytest.raises(ConfigError) as info:
        config_dao.parse_text(text)
    assert info.value.line == line
    assert info.value.key == key
    assert info.value.exit_code == 2


def test_coerce_value_by_template():
    assert coerce_value("3", 1) == 3
    assert coerce_value("3", 1.0) == 3.0
    assert coerce_value("yes", False) is True
    assert coerce_value("off", True) is False
    assert coerce_value("64, 200", [64, 200]) == [64, 200]
    assert coerce_value("reports/x", 'reports') == 'reports/x'
    with pytest.raises(ConfigError):
        coerce_value("maybe", True)


def test_load_merges_and_validates(config_dao, tmp_path):
    config = config_dao.load(_write(tmp_path, "domain.lengths = 2.0\nexperiment.alpha = 3.0\n"))
    assert config.domain['lengths'] == [2.0]
    assert config.experiment['alpha'] == 3.0
    assert config.experiment['d'] == 6.0
    assert config.build_domain().lengths == (2.0,)


def test_load_rejects_invalid_values(config_dao, tmp_path):
    with pytest.raises(ConfigError) as info:
        config_dao.load(_write(tmp_path, "experiment.source = somewhere\n"))
    assert info.value.key == 'experiment.source'
    with pytest.raises(ConfigError):
        config_dao.load(_write(tmp_path, "domain.n = 2\n", "mismatch.cfg"))


def test_missing_file_is_config_error(config_dao, tmp_path):
    with pytest.raises(ConfigError):
        config_dao.read(str(tmp_path / "absent.cfg"))


# ---- fields ------------------------------------------------------------------

@pytest.fixture
def small_field():
    fd = FdSolverController()
    grid = SpaceTimeGridModel(0.5, 2.0, (1.0,), 4, 16, 8)
    return fd.evolve(fd.coefficients('laplacian'), fd.seeded_bump(grid, 42), grid, seed=42)


def test_field_binary_layout(out_dir, small_field):
    path = FieldDao(out_dir).save('field', small_field)
    raw = open(path, 'rb').read()
    assert np.frombuffer(raw, dtype='<i8', count=3).tolist() == [5, 17, 9]
    assert np.frombuffer(raw, dtype='<f8', count=5, offset=24).tolist() == [0.125, 0.25, 0.125, 0.5, 2.0]
    assert int(np.frombuffer(raw, dtype='<i8', count=1, offset=64)[0]) == 42
    assert len(raw) == 72 + 8 * 5 * 17 * 9
    sidecar = json.loads(open(os.path.join(out_dir, 'field.json'), encoding='utf-8').read())
    assert sidecar['shape'] == [5, 17, 9] and sidecar['seed'] == 42


def test_field_save_load(out_dir, small_field):
    dao = FieldDao(out_dir)
    loaded = dao.load(dao.save('field', small_field))
    assert loaded.seed == 42
    assert loaded.grid.shape == small_field.grid.shape
    assert loaded.grid.lengths == small_field.grid.lengths
    assert np.array_equal(loaded.values, small_field.values)


def test_field_load_rejects_truncated_file(out_dir, small_field):
    dao = FieldDao(out_dir)
    path = dao.save('field', small_field)
    with open(path, 'rb') as f:
        raw = f.read()
    with open(path, 'wb') as f:
        f.write(raw[:-8])
    with pytest.raises(DomainError):
        dao.load(path)
    with open(path, 'wb') as f:
        f.write(raw[:40])
    with pytest.raises(DomainError):
        dao.load(path)


def test_field_without_seed(out_dir, small_field):
    small_field.seed = None
    dao = FieldDao(out_dir)
    assert dao.load(dao.save('unseeded', small_field)).seed is None


# ---- families ------------------------------------------------------------------

def test_family_save_load(out_dir, solutions, domain):
    family = solutions.build_probe_family(domain, 6.0, 4)
    dao = SolutionDao(out_dir)
    loaded = dao.load_family(dao.save_family('family', family))
    assert loaded.ids == family.ids
    assert np.array_equal(loaded.coefficients, family.coefficients)
    assert [b.key for b in loaded.basis] == [b.key for b in family.basis]
    assert [b.rho for b in loaded.basis] == [b.rho for b in family.basis]
    assert loaded.evaluate_array(-0.5, 0.3, 0.4, element=2) == family.evaluate_array(-0.5, 0.3, 0.4, element=2)


# ---- reports ---------------------------------------------------------------------

def test_report_json_and_csv(out_dir):
    dao = ReportDao(out_dir)
    checks = [{'check': 'a', 'value': 0.1 + 0.2, 'passed': True, 'ladder': [1, 2]},
              {'check': 'b', 'value': np.float64(1.0 / 3.0), 'passed': False, 'ladder': []}]
    report = dao.save_report('demo', checks, {'experiment': {'d': 6.0}})
    stored = dao.load_report(os.path.join(out_dir, 'demo.json'))
    assert stored['checks'][0]['value'] == 0.1 + 0.2
    assert stored['checks'][1]['value'] == 1.0 / 3.0
    assert stored['metadata']['config'] == {'experiment': {'d': 6.0}}
    assert 'timestamp' in report['metadata']
    frame = pd.read_csv(os.path.join(out_dir, 'demo.csv'))
    assert list(frame.columns) == ['check', 'value', 'passed']
    assert frame['value'].tolist() == [0.1 + 0.2, 1.0 / 3.0]


def test_report_formats(out_dir):
    dao = ReportDao(out_dir)
    dao.save_report('only_json', [{'check': 'a', 'passed': True}], formats=('json',))
    assert os.path.exists(os.path.join(out_dir, 'only_json.json'))
    assert not os.path.exists(os.path.join(out_dir, 'only_json.csv'))


def test_modes_and_gram_tables(out_dir, spectrum, domain_2d, gram, solutions, domain):
    dao = ReportDao(out_dir)
    modes = spectrum.box_eigenpairs(domain_2d, 30.0)
    frame = pd.read_csv(dao.save_modes('modes', modes))
    assert frame['k_index'].tolist() == [' '.join(str(v) for v in m.k) for m in modes]
    assert frame['mu'].tolist() == [m.mu for m in modes]

    g = gram.gram(solutions.build_continuum_family(domain, 6.0, 3), 1.0)
    frame = pd.read_csv(dao.save_gram('gram', g))
    assert len(frame) == 9
    np.testing.assert_array_equal(frame['value'].to_numpy().reshape(3, 3), g.entries)
    header = json.loads(open(os.path.join(out_dir, 'gram_header.json'), encoding='utf-8').read())
    assert header['log_scale'] == g.log_scale.tolist()


def test_matrix_table(out_dir):
    path = ReportDao(out_dir).save_matrix('basis', np.array([[1.0, -2.5]]), ['v1'], ['u1', 'u2'])
    frame = pd.read_csv(path)
    assert list(frame.columns) == ['id', 'u1', 'u2']
    assert frame.iloc[0].tolist() == ['v1', 1.0, -2.5]
