import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy import integrate

from controller.gram_controller import GramController, log_exprel, log_sinhc, log_space_factor, log_time_factor
from models.gram_model import CLOSED_FORM, QUADRATURE
from models.solution_model import SeparatedSolutionModel, SolutionSpanModel
from models.strip_domain_model import ModeModel, SpaceTimeGridModel
from utils.exceptions import InvariantViolation, PreconditionError, QuadratureWindowError
from utils.linalg import gram_schmidt_residuals, schur_pivots

FINE_CELLS = (512, 512, 32)


def _mode(k=1, L=1.0):
    return ModeModel((k,), (L,))


@pytest.mark.parametrize("a", [-30.0, -1.0, -1e-9, 0.0, 1e-9, 0.5, 40.0])
def test_log_exprel(a):
    expected = math.log(math.expm1(a) / a) if a != 0.0 else 0.0
    assert log_exprel(a) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("y", [0.0, 1e-8, 0.3, 1.0, 5.0, 300.0])
def test_log_sinhc(y):
    expected = math.log(math.sinh(y) / y) if 0.0 < y < 700.0 else 0.0
    assert log_sinhc(y) == pytest.approx(expected, rel=1e-12, abs=1e-15)
    assert log_sinhc(-y) == log_sinhc(y)


def test_time_and_space_factors_match_direct_integrals():
    for s, r in ((0.0, 1.5), (3.0, 2.0), (-2.0, 1.0)):
        direct, _ = integrate.quad(lambda t: math.exp(s * t), -r * r, 0.0)
        assert math.exp(log_time_factor(s, r)) == pytest.approx(direct, rel=1e-10)
    for b, r in ((0.0, 1.5), (8.0, 2.0), (-3.0, 1.0)):
        direct, _ = integrate.quad(lambda x: math.exp(b * x), -r, r)
        assert math.exp(log_space_factor(b, r)) == pytest.approx(direct, rel=1e-10)


def test_inner_product_orthogonal_modes(gram):
    u = SeparatedSolutionModel(1.0, 4.0, _mode(1))
    v = SeparatedSolutionModel(1.0, 7.0, _mode(2))
    assert gram.inner_product_closed(u, v, 2.0) == 0.0
    scale = math.sqrt(gram.inner_product_closed(u, u, 1.0) * gram.inner_product_closed(v, v, 1.0))
    assert abs(gram.inner_product_quadrature(u, v, 1.0, (64, 64, 32))) <= 1e-10 * scale


@pytest.mark.parametrize("r", [1.0, 2.0])
def test_quadrature_matches_closed_form(gram, r):
    rng = np.random.default_rng(7)
    for _ in range(10):
        a, b = rng.uniform(math.pi, 4.0, 2)
        u = SeparatedSolutionModel(rng.uniform(0.5, 2.0), a, _mode())
        v = SeparatedSolutionModel(rng.uniform(-2.0, -0.5), -b, _mode())
        closed = gram.inner_product_closed(u, v, r)
        quad = gram.inner_product_quadrature(u, v, r, FINE_CELLS)
        assert quad == pytest.approx(closed, rel=1e-6)


def test_quadrature_refinement_order(gram):
    u = SeparatedSolutionModel(1.0, 4.0, _mode())
    exact = gram.inner_product_closed(u, u, 2.0)
    errors = [abs(gram.inner_product_quadrature(u, u, 2.0, cells) - exact) for cells in ((32, 32, 16), (64, 64, 16))]
    assert math.log2(errors[0] / errors[1]) >= 1.9


def test_closed_gram_invariants_and_values(gram, solutions, domain):
    family = solutions.build_continuum_family(domain, 6.0, 4)
    g = gram.gram(family, 1.5)
    np.testing.assert_allclose(np.diag(g.normalized), 1.0)
    np.testing.assert_array_equal(g.normalized, g.normalized.T)
    assert g.min_eig_ratio() > 0.0
    for i, u in enumerate(family.basis):
        for j, v in enumerate(family.basis):
            assert g.entries[i, j] == pytest.approx(gram.inner_product_closed(u, v, 1.5), rel=1e-12)
        assert g.log_energy(i) == pytest.approx(gram.log_energy(u, 1.5), rel=1e-13)


def test_gram_quadrature_agrees_with_closed_form(gram, solutions, domain):
    family = solutions.build_continuum_family(domain, 4.0, 3)
    closed = gram.gram(family, 1.0, CLOSED_FORM)
    quad = gram.gram(family, 1.0, QUADRATURE, FINE_CELLS)
    np.testing.assert_allclose(quad.entries, closed.entries, rtol=1e-6)
    assert quad.method == QUADRATURE


def test_gram_scale_invariance(gram, solutions, domain):
    family = solutions.build_continuum_family(domain, 5.0, 3)
    g = gram.gram(family, 2.0)
    scaled = gram.gram(family.scaled(1e3), 2.0)
    np.testing.assert_allclose(scaled.normalized, g.normalized, rtol=1e-12)
    np.testing.assert_allclose(scaled.log_scale - g.log_scale, math.log(1e3), rtol=1e-12)
    np.testing.assert_array_equal(scaled.shape_log_scale, g.shape_log_scale)


def test_gram_survives_huge_radii(gram, solutions, domain):
    family = solutions.build_continuum_family(domain, 6.0, 3)
    g = gram.gram(family, 200.0)
    assert np.all(np.isfinite(g.log_scale))
    assert g.log_energy(2) > 700.0


def test_zero_element_gives_zero_row(gram):
    u = SeparatedSolutionModel(1.0, 4.0, _mode())
    v = SeparatedSolutionModel(1.0, 5.0, _mode())
    span = SolutionSpanModel([u, v], np.array([[1.0, 0.0], [0.0, 0.0]]), require_independent=False)
    g = gram.gram(span, 1.0)
    assert g.log_scale[1] == -np.inf
    assert np.all(g.normalized[1] == 0.0)
    assert gram.log_energy(span, 1.0, element=1) == -np.inf


def test_gram_pivots_match_gram_schmidt_on_seeded_spans(gram):
    rng = np.random.default_rng(11)
    for size in range(2, 9):
        basis = []
        for j in range(size):
            mode = _mode(j // 2 + 1)
            shape = SeparatedSolutionModel(1.0, math.sqrt(mode.mu) + 2.0 * (j % 2) + rng.uniform(0.0, 0.5), mode)
            basis.append(shape.scaled(math.exp(-0.5 * gram.log_energy(shape, 1.0))))
        coefficients = rng.standard_normal((size, size)) + 3.0 * np.eye(size)
        g = gram.gram(SolutionSpanModel(basis, coefficients), 1.0)
        pivots, _ = schur_pivots(g.normalized)
        np.testing.assert_allclose(pivots, gram_schmidt_residuals(g.normalized), rtol=1e-8, atol=1e-14)


@seed(3)
@settings(deadline=None, max_examples=25)
@given(
    a=st.floats(min_value=-6.0, max_value=6.0),
    b=st.floats(min_value=-6.0, max_value=6.0),
    c=st.floats(min_value=-3.0, max_value=3.0),
    r=st.floats(min_value=0.25, max_value=4.0),
)
def test_inner_product_is_symmetric_and_bilinear(a, b, c, r):
    gram = GramController((64, 64, 16))
    u = SeparatedSolutionModel(1.0, a, _mode())
    v = SeparatedSolutionModel(c, b, _mode())
    assert gram.inner_product_closed(u, v, r) == gram.inner_product_closed(v, u, r)
    assert gram.inner_product_closed(u, v.scaled(2.0), r) == pytest.approx(
        2.0 * gram.inner_product_closed(u, v, r), rel=1e-14, abs=1e-300)


def test_gradient_gram_matches_quadrature(gram):
    u = SeparatedSolutionModel(1.0, 4.0, _mode())

    def integrand(t, x0, x1):
        g0, g1 = u.gradient_array(t, x0, x1)
        return g0 ** 2 + g1 ** 2

    direct = gram.integrate_box(integrand, (-1.0, 0.0), (-1.0, 1.0), (1.0,), FINE_CELLS)
    closed = gram.gradient_gram_closed(u, 1.0).entries[0, 0]
    assert closed == pytest.approx(direct, rel=1e-6)
    assert math.exp(gram.log_energy(u, 1.0, gradient=True)) == pytest.approx(direct, rel=1e-6)


def test_annulus_energy_three_routes(gram):
    u = SeparatedSolutionModel(1.0, 3.5, _mode())
    closed = gram.annulus_energy(u, 1.0, 2.0)
    assert math.exp(gram.log_annulus_energy(u, 1.0, 2.0)) == pytest.approx(closed, rel=1e-12)
    assert gram.annulus_energy(u, 1.0, 2.0, QUADRATURE, FINE_CELLS) == pytest.approx(closed, rel=1e-6)
    assert gram.annulus_energy_region(u, 1.0, 2.0, (256, 512, 32)) == pytest.approx(closed, rel=1e-6)


def test_field_gram_on_sampled_closed_form(gram, sampled):
    u = SeparatedSolutionModel(1.0, 3.5, _mode())
    grid = SpaceTimeGridModel(4.0, 2.0, (1.0,), 256, 256, 32)
    field = sampled(u, grid)
    g = gram.gram([field], 1.0)
    assert g.snapped_r == pytest.approx(1.0)
    assert g.entries[0, 0] == pytest.approx(gram.inner_product_closed(u, u, 1.0), rel=1e-5)
    assert g.basis_ids == ['field1']


def test_field_window_errors(gram, sampled):
    u = SeparatedSolutionModel(1.0, 2.0, _mode())
    field = sampled(u, SpaceTimeGridModel(1.0, 1.0, (1.0,), 16, 32, 8))
    with pytest.raises(QuadratureWindowError):
        gram.gram([field], 1.5)
    with pytest.raises(QuadratureWindowError):
        gram.gram([field], 0.1)


def test_inner_product_rejects_field_with_closed_form(gram, sampled):
    u = SeparatedSolutionModel(1.0, 3.5, _mode())
    field = sampled(u, SpaceTimeGridModel(4.0, 2.0, (1.0,), 256, 256, 32))
    with pytest.raises(PreconditionError):
        gram.inner_product_quadrature(field, u, 1.0)
    with pytest.raises(PreconditionError):
        gram.inner_product_quadrature(u, field, 1.0)
    assert gram.inner_product_quadrature(field, field, 1.0) > 0.0


def test_quadrature_refuses_coarse_cells_and_unknown_method(gram):
    u = SeparatedSolutionModel(1.0, 4.0, _mode())
    with pytest.raises(QuadratureWindowError):
        gram.gram(u, 1.0, QUADRATURE, (64, 8, 8))
    with pytest.raises(PreconditionError):
        gram.gram(u, 1.0, 'monte-carlo')


def test_gram_invariant_violation_is_reported():
    from models.gram_model import GramMatrixModel
    bad = GramMatrixModel(1.0, np.array([[1.0, 2.0], [2.0, 1.0]]), np.zeros(2), ['a', 'b'], CLOSED_FORM)
    with pytest.raises(InvariantViolation):
        bad.assert_invariants()
