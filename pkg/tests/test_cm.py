import itertools
import math

import numpy as np
import pytest

from controller.cm_controller import CmController, default_sigma, integer_d_sigma
from controller.gram_controller import GramController
from models.cm_model import GoodBasisModel, KernelTraceModel, MonotoneTableModel
from models.solution_model import SolutionSpanModel
from models.strip_domain_model import StripDomainModel
from utils.exceptions import (MethodMixError, NotPositiveDefiniteError, PreconditionError,
                              SelectionError)
from utils.linalg import gram_schmidt_residuals


@pytest.fixture
def cm(solutions):
    return CmController(GramController((64, 64, 16)), solutions)


@pytest.fixture(scope='module')
def probe_basis():
    """Good basis of the six-element probe family of E_6 on (0, 1), delta = 1/6."""
    cm = CmController()
    span = cm.solutions.build_probe_family(StripDomainModel(1, [1.0], 4.0), 6.0, 6)
    return cm, span, cm.good_basis(span, 1.0 / 6.0, 1, 6.0)


def _mixed_table(seed, k=4, M=51, delta=0.5):
    rng = np.random.default_rng(seed)
    radii = delta * np.arange(M + 1)
    rates = rng.uniform(0.2, 2.0, size=(k, 3))
    amps = rng.uniform(0.1, 1.0, size=(k, 3))
    values = np.stack([np.sum(amps[i][:, None] * np.exp(rates[i][:, None] * radii[None, :]), axis=0)
                       for i in range(k)])
    return MonotoneTableModel.from_values(radii, values, delta=delta, d_growth=2.0)


def _brute_force(table, ell, sigma, m0, M):
    log_sigma = math.log(sigma)
    log_v = table.log_shape
    found = {}
    for m in range(m0, M):
        ratios = log_v[:, m + 1] - log_v[:, m]
        valid = [s for s in itertools.combinations(range(table.k), ell) if all(ratios[i] <= log_sigma for i in s)]
        if valid:
            found[m] = min(valid, key=lambda s: sum(ratios[i] for i in s))
    return found


# ---- residual energies ---------------------------------------------------

def test_orthogonal_modes_give_own_energies(cm, solutions, domain):
    u1, u2 = solutions.separated(domain, 4.0), solutions.separated(domain, 7.0, k_index=2)
    span = SolutionSpanModel([u1, u2])
    table = cm.compute_f(span, [1.0, 1.5, 2.0])
    for m, r in enumerate(table.radii):
        assert table.log_values[0, m] == pytest.approx(cm.gram.log_energy(u1, r), abs=1e-9)
        assert table.log_values[1, m] == pytest.approx(cm.gram.log_energy(u2, r), abs=1e-9)


def test_dependent_element_has_zero_residual(cm, solutions, domain):
    span = SolutionSpanModel([solutions.separated(domain, 4.0)], [[1.0], [2.0]], require_independent=False)
    table = cm.compute_f(span, [1.0, 2.0])
    assert np.all(np.isfinite(table.log_values[0]))
    assert np.all(table.values[1] == 0.0)


def test_pivots_match_gram_schmidt(cm, solutions, domain):
    span = solutions.build_continuum_family(domain, 6.0, 3)
    radii = np.arange(1.0, 3.0 + 1e-12, 0.25)
    table = cm.compute_f(span, radii)
    for m, r in enumerate(radii):
        oracle = gram_schmidt_residuals(cm.gram.gram(span, r).entries)
        np.testing.assert_allclose(table.values[:, m], oracle, rtol=1e-8)


def test_zero_radius_column(cm, solutions, domain):
    table = cm.compute_f(solutions.build_continuum_family(domain, 6.0, 3), [0.0, 0.5, 1.0])
    assert table.delta == 0.5
    assert np.all(np.isneginf(table.log_values[:, 0]))
    assert not table.check_invariants()


def test_compute_f_rejects_bad_radii_and_mixed_methods(cm, solutions, domain):
    span = solutions.build_continuum_family(domain, 6.0, 2)
    with pytest.raises(PreconditionError):
        cm.compute_f(span, [2.0, 1.0])
    closed = cm.gram.gram(span, 1.0)
    quadrature = cm.gram.gram(span, 1.0, 'quadrature', (16, 16, 8))
    with pytest.raises(MethodMixError):
        cm.compute_f_from_grams([closed, quadrature], [1.0, 1.0])


def test_f_properties_on_continuum_family(cm, solutions, domain):
    span = solutions.build_continuum_family(domain, 6.0, 3)
    table = cm.compute_f(span, np.arange(1.0, 3.0 + 1e-12, 0.25), d_growth=6.0)
    report = cm.verify_f_properties(table, 6.0)
    assert report['passed']
    assert report['claim1'] and report['claim2'] and report['claim3']


def test_f_properties_on_orthogonal_span(cm, solutions, domain):
    span = SolutionSpanModel([solutions.separated(domain, 4.0), solutions.separated(domain, 7.0, k_index=2)])
    report = cm.verify_f_properties(cm.compute_f(span, [0.5, 1.0, 1.5]), 7.0)
    assert report['passed']


def test_f_properties_report_decreasing_entry(cm):
    table = MonotoneTableModel.from_values([0.0, 1.0, 2.0, 3.0], [[0.0, 1.0, 0.5, 2.0]])
    report = cm.verify_f_properties(table, 1.0)
    assert not report['passed']
    assert report['claim3'] is False
    assert report['claim1'] is None and report['claim2'] is None
    assert any('decreases' in p for p in report['problems'])


def test_f_properties_need_enough_growth(cm, solutions, domain):
    span = solutions.build_continuum_family(domain, 6.0, 2)
    with pytest.raises(PreconditionError):
        cm.verify_f_properties(cm.compute_f(span, [1.0, 2.0]), 5.0)


# ---- selection -----------------------------------------------------------

def test_select_every_scale_for_constant_ratio(cm):
    radii = np.arange(11.0)
    table = MonotoneTableModel.from_values(radii, [np.exp(radii)], delta=1.0, d_growth=1.0)
    report = cm.select_scales(table, 1, math.e ** 2, 0)
    assert report.m_list == list(range(10))
    assert all(s == (0,) for s in report.subsets.values())


def test_select_slower_function(cm):
    radii = np.arange(11.0)
    table = MonotoneTableModel.from_values(radii, [np.exp(radii), np.exp(2.0 * radii)], delta=1.0, d_growth=2.0)
    with pytest.raises(PreconditionError):
        cm.select_scales(table, 1, math.exp(1.5), 0)
    report = cm.select_scales(table, 1, math.exp(1.5), 0, check_threshold=False)
    assert report.m_list == list(range(10))
    assert report.subset == (0,)


@pytest.mark.parametrize('seed', range(50))
def test_selection_matches_exhaustive_search(cm, seed):
    table = _mixed_table(seed)
    sigma = math.exp(0.6)
    try:
        report = cm.select_scales(table, 2, sigma, 0, 50, check_threshold=False)
        found = {m: report.subsets[m] for m in report.m_list}
    except SelectionError:
        found = {}
    assert found == _brute_force(table, 2, sigma, 0, 50)
    for m, subset in found.items():
        ratios = table.log_ratios(m)
        assert all(ratios[i] <= math.log(sigma) for i in subset)


def test_selection_errors(cm):
    radii = np.arange(6.0)
    fast = MonotoneTableModel.from_values(radii, [np.exp(3.0 * radii)], delta=1.0, d_growth=1.0)
    with pytest.raises(SelectionError):
        cm.select_scales(fast, 1, math.e ** 2, 0, check_threshold=False)
    with pytest.raises(PreconditionError):
        cm.select_scales(fast, 2, math.e ** 2, 0)
    with pytest.raises(PreconditionError):
        cm.select_scales(fast, 1, math.e ** 2, 5)
    no_step = MonotoneTableModel.from_values(radii, [np.exp(radii)])
    with pytest.raises(PreconditionError):
        cm.select_scales(no_step, 1, math.e ** 2, 0)


def test_selection_threshold_and_sigma():
    assert CmController.selection_threshold(6, 3, 1.0 / 6.0, 25.0) == pytest.approx(math.exp(6.25))
    assert default_sigma(1.0, 1.0) == pytest.approx(0.5 * math.exp(10.0))
    assert integer_d_sigma(1.0) == pytest.approx(0.5 * math.exp(8.5))
    assert integer_d_sigma(1.0) <= math.exp(10.0)


# ---- simultaneous diagonalization ------------------------------------------

def test_diagonalize_identity_pair(cm):
    V, diag = cm.simultaneous_diagonalize(np.eye(2), np.diag([3.0, 1.0]))
    np.testing.assert_allclose(V, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(diag, [3.0, 1.0])
    V, diag = cm.simultaneous_diagonalize(np.eye(2), np.diag([1.0, 3.0]))
    np.testing.assert_allclose(np.abs(V), [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)
    np.testing.assert_allclose(diag, [3.0, 1.0])


@pytest.mark.parametrize('seed', [11, 12, 13])
def test_diagonalize_random_pair(cm, seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.standard_normal((5, 5)), rng.standard_normal((5, 3))
    A = X @ X.T + 5.0 * np.eye(5)
    B = Y @ Y.T
    V, diag = cm.simultaneous_diagonalize(A, B)
    assert np.max(np.abs(V.T @ A @ V - np.eye(5))) < 1e-10
    db = V.T @ B @ V
    assert np.max(np.abs(db - np.diag(np.diag(db)))) < 1e-10
    assert np.all(np.diff(diag) <= 1e-12)
    for j in range(5):
        first = V[np.flatnonzero(np.abs(V[:, j]) > 1e-300)[0], j]
        assert first > 0.0


def test_diagonalize_equal_forms(cm):
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    V, diag = cm.simultaneous_diagonalize(A, A)
    np.testing.assert_allclose(V.T @ A @ V, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(diag, [1.0, 1.0], atol=1e-12)


def test_diagonalize_rejects_singular(cm):
    with pytest.raises(NotPositiveDefiniteError):
        cm.simultaneous_diagonalize(np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(2))


# ---- good basis ------------------------------------------------------------

def test_good_basis_invariants(probe_basis):
    cm, span, basis = probe_basis
    assert basis.k == 3
    assert basis.diagnostics['residual_orthonormal'] < 1e-8
    assert basis.diagnostics['residual_orthogonal'] < 1e-8
    assert np.all(basis.I_small >= 1.0 / basis.sigma)
    assert basis.ell >= basis.k / basis.sigma
    assert float(np.sum(basis.I_small)) <= basis.ell * (1.0 + 1e-10)
    assert basis.diagnostics['trace_all'] >= basis.diagnostics['f_ratio_sum'] * (1.0 - 1e-9)
    assert basis.diagnostics['stated_bound_holds']
    assert basis.diagnostics['trace_all'] >= 2.0 * basis.k / basis.sigma
    assert basis.sigma == pytest.approx(default_sigma(6.0, 1.0 / 6.0))


def test_good_basis_on_continuum_family(domain):
    cm = CmController()
    span = cm.solutions.build_continuum_family(domain, 6.0, 6)
    basis = cm.good_basis(span, 1.0 / 6.0, 1, 6.0)
    assert basis.k == 3 and basis.ell == 3
    assert basis.diagnostics['residual_orthonormal'] < 1e-8
    assert basis.diagnostics['residual_orthogonal'] < 1e-8
    assert np.all(basis.I_small >= 1.0 / basis.sigma)
    assert basis.ell >= basis.k / basis.sigma
    assert basis.diagnostics['stated_bound_holds']


def test_good_basis_against_raw_grams(probe_basis):
    cm, span, basis = probe_basis
    delta = basis.delta
    top = cm.gram.gram(span, (basis.m + 1) * delta).entries
    small = cm.gram.gram(span, basis.m * delta).entries
    np.testing.assert_allclose(basis.v @ top @ basis.v.T, np.eye(basis.ell), atol=1e-8)
    np.testing.assert_allclose(basis.v @ small @ basis.v.T, np.diag(basis.I_small), atol=1e-8)


def test_good_basis_selection_is_certified(probe_basis):
    _, _, basis = probe_basis
    selection = basis.selection
    log_sigma = math.log(selection.sigma)
    for m in selection.m_list:
        column = basis.table.log_ratios(m)
        assert all(column[i] <= log_sigma for i in selection.subsets[m])
    assert basis.m == selection.m_list[0]
    for adjustment in basis.m0_adjustments:
        assert adjustment['used'] > adjustment['requested']


def test_good_basis_scaling(probe_basis):
    cm, span, basis = probe_basis
    scaled = cm.good_basis(span.scaled(5.0), 1.0 / 6.0, 1, 6.0)
    assert scaled.m == basis.m and scaled.ell == basis.ell
    assert np.array_equal(scaled.selection.log_ratios, basis.selection.log_ratios)
    np.testing.assert_allclose(scaled.v, basis.v / 5.0, rtol=1e-8, atol=1e-14 * np.max(np.abs(basis.v)))


def test_good_basis_preconditions(cm, solutions, domain):
    odd = solutions.build_probe_family(domain, 6.0, 3)
    with pytest.raises(PreconditionError):
        cm.good_basis(odd, 1.0 / 6.0)
    even = solutions.build_probe_family(domain, 6.0, 4)
    with pytest.raises(PreconditionError):
        cm.good_basis(even, 1.0 / 6.0, d=5.0)


# ---- kernel and trace --------------------------------------------------------

def _points(a, seed=5, count=8):
    rng = np.random.default_rng(seed)
    return np.column_stack([-rng.uniform(0.0, a * a, count), rng.uniform(-a, a, count), rng.uniform(0.0, 1.0, count)])


def test_kernel_trace_routes_agree(probe_basis):
    cm, span, basis = probe_basis
    points = _points(basis.a)
    first = cm.kernel_trace(basis, span, points, seed=1)
    second = cm.kernel_trace(basis, span, points, seed=2)
    assert first.max_rel_error <= 1e-10
    np.testing.assert_allclose(first.K_gram, second.K_gram, rtol=1e-10)
    assert np.all(first.K >= 0.0)
    values = basis.v @ np.stack([span.evaluate_array(points[:, 0], points[:, 1], points[:, 2], element=a)
                                 for a in range(span.size)])
    assert np.all(first.K >= np.max(values ** 2, axis=0) * (1.0 - 1e-12))


def test_kernel_samples_lie_in_the_cylinder(probe_basis):
    cm, span, basis = probe_basis
    a = basis.a
    points = cm.sample_points([1.0], a, count=32, seed=4)
    assert points.shape == (32, 3)
    assert np.all((points[:, 0] <= 0.0) & (points[:, 0] >= -a * a))
    assert np.all(np.abs(points[:, 1]) <= a)
    assert np.all((points[:, 2] >= 0.0) & (points[:, 2] <= 1.0))
    np.testing.assert_array_equal(points, cm.sample_points([1.0], a, count=32, seed=4))
    trace = cm.kernel_trace(basis, span, points, seed=4)
    assert trace.passed and trace.to_dict()['passed'] is True


def test_kernel_trace_flags_disagreement():
    trace = KernelTraceModel(np.zeros((2, 3)), np.array([1.0, 2.0]), np.array([1.0, 2.0 + 1e-6]))
    assert not trace.passed
    assert trace.max_rel_error == pytest.approx(5e-7)


def test_kernel_trace_needs_past_points(probe_basis):
    cm, span, basis = probe_basis
    with pytest.raises(PreconditionError):
        cm.kernel_trace(basis, span, [[0.5, 0.0, 0.5]])


def test_trace_bound(probe_basis):
    cm, span, basis = probe_basis
    report = cm.trace_bound_check(basis, span, (1.0, 0.5, 0.25), 1)
    assert report.passed
    assert report.details['hard_bound'] and report.details['ladder_monotone']
    assert report.details['kernel_integral'] > 0.0
    assert 0.0 < report.empirical_constant < math.inf
    assert [entry['delta'] for entry in report.details['ladder']] == sorted({1.0, 0.5, 0.25, basis.delta})


def test_trace_bound_needs_small_step(cm, solutions, domain):
    basis = GoodBasisModel(1, 2.0, 10.0, np.eye(2), np.zeros(2), np.ones(2), np.arange(2), 2)
    span = SolutionSpanModel([solutions.separated(domain, 4.0), solutions.separated(domain, 5.0)])
    with pytest.raises(PreconditionError):
        cm.trace_bound_check(basis, span)


# ---- dimension pipeline --------------------------------------------------------

def test_dimension_vacuous_below_first_eigenvalue(cm, domain):
    report = cm.dimension_experiment(domain, 1.0, 2)
    assert report['vacuous'] and report['passed']
    assert report['sigma'] == pytest.approx(0.5 * math.exp(10.0))
    assert report['sigma_integer_d'] == pytest.approx(0.5 * math.exp(8.5))


@pytest.mark.parametrize('d, k', [(4.0, 3), (4.0, 4), (6.0, 3), (6.0, 4)])
def test_dimension_experiment_end_to_end(domain, d, k):
    cm = CmController()
    report = cm.dimension_experiment(domain, d, k, seed=7)
    assert report['passed'] and not report['vacuous']
    assert report['lower_chain'] and report['k_within_implied']
    assert report['good_basis']['residual_orthonormal'] < 1e-8
    assert report['ell'] >= 1
    assert report['continuum_size'] == 2 * k
    assert report['kernel_max_rel_error'] <= 1e-10
    assert report['kernel_trace']['passed'] and report['stated_bound_holds']


def test_dimension_experiment_needs_d_at_least_one(cm, domain):
    with pytest.raises(PreconditionError):
        cm.dimension_experiment(domain, 0.5, 2)
