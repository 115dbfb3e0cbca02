import math

import numpy as np
import pytest

from controller.fd_solver_controller import CRANK_NICOLSON, IMPLICIT_EULER, FdSolverController
from models.field_model import OperatorCoefficientsModel, SolutionFieldModel
from models.solution_model import SeparatedSolutionModel
from models.strip_domain_model import ModeModel, SpaceTimeGridModel
from utils.exceptions import CoefficientError, DomainError, PreconditionError


@pytest.fixture
def fd():
    return FdSolverController()


def _stretched(x0, x1):
    shape = np.broadcast(np.asarray(x0), np.asarray(x1)).shape
    return np.broadcast_to(np.diag([2.0, 0.5]), shape + (2, 2)).copy()


def _initial_from(u, grid, t):
    X0, X1 = np.meshgrid(grid.x0_nodes, grid.cross_nodes[0], indexing='ij')
    return u.evaluate_array(np.full_like(X0, t), X0, X1)


def _mms_error(fd, grid, scheme=IMPLICIT_EULER):
    u = SeparatedSolutionModel(1.0, 1.0, ModeModel((1,), (1.0,)))
    field = fd.evolve(fd.coefficients('laplacian'), _initial_from(u, grid, -grid.T), grid, scheme)
    exact = _initial_from(u, grid, 0.0)
    near = np.abs(grid.x0_nodes) <= 1.0
    return float(np.max(np.abs(field.final[near] - exact[near])) / np.max(np.abs(exact[near])))


def test_identity_coefficients_pass(fd):
    grid = SpaceTimeGridModel(1.0, 2.0, (1.0,), 4, 16, 8)
    report = fd.validate_coefficients(fd.coefficients('laplacian'), grid)
    assert report['passed']
    assert report['rayleigh_min'] == pytest.approx(1.0)
    assert report['first_violation'] is None


def test_stretched_coefficients_fail_everywhere(fd):
    grid = SpaceTimeGridModel(1.0, 2.0, (1.0,), 4, 16, 8)
    coeffs = OperatorCoefficientsModel('stretched', _stretched, fd.coefficients().b, fd.coefficients().c, 1.0, 2.0, 0.0)
    report = fd.validate_coefficients(coeffs, grid)
    assert not report['passed']
    assert report['rayleigh_min'] == pytest.approx(0.5)
    assert report['first_violation'][:2] == [0, 0]
    with pytest.raises(CoefficientError) as err:
        fd.validate_coefficients(coeffs, grid, raise_on_fail=True)
    assert err.value.node[:2] == (0, 0)
    with pytest.raises(CoefficientError):
        fd.evolve(coeffs, np.zeros(grid.shape[1:]), grid)


@pytest.mark.parametrize("preset", ['modulated', 'sheared'])
def test_variable_presets_pass_their_declared_bounds(fd, preset):
    grid = SpaceTimeGridModel(1.0, 4.0, (1.0,), 4, 64, 16)
    report = fd.validate_coefficients(fd.coefficients(preset), grid)
    assert report['passed']
    assert report['rayleigh_min'] >= 0.85
    if preset == 'modulated':
        assert report['rayleigh_min'] == pytest.approx(0.9, abs=2e-3)


def test_unknown_preset_and_scheme(fd):
    grid = SpaceTimeGridModel(1.0, 2.0, (1.0,), 4, 16, 8)
    with pytest.raises(PreconditionError):
        fd.coefficients('hyperbolic')
    with pytest.raises(PreconditionError):
        fd.evolve(fd.coefficients(), np.zeros(grid.shape[1:]), grid, 'rk4')
    with pytest.raises(DomainError):
        fd.evolve(fd.coefficients(), np.zeros((3, 3)), grid)
    with pytest.raises(DomainError):
        fd.validate_coefficients(fd.coefficients(), SpaceTimeGridModel(1.0, 2.0, (1.0, 1.0), 4, 16, 8))


def test_zero_initial_data_stays_zero(fd):
    grid = SpaceTimeGridModel(1.0, 2.0, (1.0,), 8, 16, 8)
    field = fd.evolve(fd.coefficients(), np.zeros(grid.shape[1:]), grid)
    assert field.values.shape == grid.shape
    assert np.all(field.values == 0.0)


def test_manufactured_solution_converges(fd):
    coarse = SpaceTimeGridModel(0.1, 4.0, (1.0,), 8, 64, 16)
    errors = [_mms_error(fd, coarse), _mms_error(fd, coarse.refined())]
    assert errors[0] < 0.1
    assert errors[0] / errors[1] > 2.5


def test_crank_nicolson_is_more_accurate_in_time(fd):
    grid = SpaceTimeGridModel(0.1, 4.0, (1.0,), 8, 64, 16)
    assert _mms_error(fd, grid, CRANK_NICOLSON) < _mms_error(fd, grid, IMPLICIT_EULER)
    assert _mms_error(fd, grid, CRANK_NICOLSON) < 0.02


def test_boundaries_are_zero_and_maximum_principle_holds(fd):
    grid = SpaceTimeGridModel(2.0, 4.0, (1.0,), 32, 64, 16)
    field = fd.evolve(fd.coefficients(), fd.seeded_bump(grid, 20240607), grid, seed=20240607)
    assert field.boundary_max() == 0.0
    sup = np.max(np.abs(field.values), axis=(1, 2))
    assert np.all(np.diff(sup) <= 1e-14 * sup[0])
    assert field.seed == 20240607


def test_evolution_is_linear(fd):
    grid = SpaceTimeGridModel(1.0, 4.0, (1.0,), 16, 64, 16)
    coeffs = fd.coefficients('sheared')
    u0 = fd.seeded_bump(grid, 1)
    v0 = fd.seeded_bump(grid, 2)
    both = fd.evolve(coeffs, u0 + v0, grid).values
    parts = fd.evolve(coeffs, u0, grid).values + fd.evolve(coeffs, v0, grid).values
    assert np.max(np.abs(both - parts)) <= 1e-10 * np.max(np.abs(parts))


def test_end_truncation_is_local(fd):
    finals = []
    for X in (12.0, 24.0):
        grid = SpaceTimeGridModel.from_spacing(1.0, X, (1.0,), 1.0 / 16.0, 1.0 / 8.0, 1.0 / 16.0)
        X0, X1 = np.meshgrid(grid.x0_nodes, grid.cross_nodes[0], indexing='ij')
        initial = np.exp(-(X0 / 0.25) ** 2) * np.sin(math.pi * X1)
        field = fd.evolve(fd.coefficients(), initial, grid)
        near = np.abs(grid.x0_nodes) <= 5.0 + 1e-12
        finals.append(field.values[:, near, :])
    assert finals[0].shape == finals[1].shape
    assert np.max(np.abs(finals[0] - finals[1])) <= 1e-8 * np.max(np.abs(finals[1]))


def test_seeded_bump_is_reproducible(fd):
    grid = SpaceTimeGridModel(1.0, 4.0, (1.0,), 4, 64, 16)
    a = fd.seeded_bump(grid, 5)
    np.testing.assert_array_equal(a, fd.seeded_bump(grid, 5))
    assert not np.array_equal(a, fd.seeded_bump(grid, 6))
    assert np.all(a[[0, -1], :] == 0.0) and np.all(a[:, [0, -1]] == 0.0)


def test_discrete_gradient_exact_for_linear_fields(fd):
    grid = SpaceTimeGridModel(1.0, 2.0, (1.0,), 2, 16, 8)
    X0 = np.broadcast_to(grid.x0_nodes[np.newaxis, :, np.newaxis], grid.shape)
    g0, g1 = fd.discrete_gradient(SolutionFieldModel(grid, X0.copy()))
    np.testing.assert_allclose(g0, 1.0, atol=1e-12)
    np.testing.assert_allclose(g1, 0.0, atol=1e-12)
    z0, z1 = fd.discrete_gradient(SolutionFieldModel(grid, np.zeros(grid.shape)))
    assert np.all(z0 == 0.0) and np.all(z1 == 0.0)


def test_discrete_gradient_second_order(fd, sampled):
    u = SeparatedSolutionModel(1.0, 3.5, ModeModel((1,), (1.0,)))
    errors = []
    for n0, nc in ((32, 16), (64, 32)):
        grid = SpaceTimeGridModel(0.5, 1.0, (1.0,), 2, n0, nc)
        g0, g1 = fd.discrete_gradient(sampled(u, grid))
        T, X0, X1 = np.meshgrid(grid.t_nodes, grid.x0_nodes, grid.cross_nodes[0], indexing='ij')
        e0, e1 = u.gradient_array(T, X0, X1)
        errors.append(max(np.max(np.abs(g0 - e0)), np.max(np.abs(g1 - e1))))
    assert math.log2(errors[0] / errors[1]) > 1.8
