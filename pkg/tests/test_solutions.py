import math

import numpy as np
import pytest

from controller.solution_controller import as_span
from models.solution_model import E_D_MEMBER, NOT_ANCIENT_BOUNDED, SeparatedSolutionModel, SolutionSpanModel
from models.strip_domain_model import ModeModel, SpaceTimeGridModel
from utils.exceptions import DomainError, PreconditionError


def test_evaluate_examples(solutions, domain):
    psi = solutions.separated(domain, 0.0)
    assert solutions.evaluate(psi, 0.0, (0.0, 0.5)) == pytest.approx(math.sqrt(2.0))
    assert solutions.evaluate(psi, -3.0, (1.0, 0.0)) == 0.0
    assert solutions.evaluate(psi, -3.0, (1.0, 1.0)) == 0.0
    u = solutions.separated(domain, 1.0)
    assert solutions.evaluate(u, -1.0, (0.0, 0.5)) == pytest.approx(math.sqrt(2.0) * math.exp(math.pi ** 2 - 1.0))


def test_evaluate_rejects_future_times(solutions, domain):
    u = solutions.separated(domain, 4.0)
    with pytest.raises(DomainError):
        solutions.evaluate(u, 0.5, (0.0, 0.5))
    with pytest.raises(PreconditionError):
        solutions.evaluate(u, 0.0, (0.0,))


def test_rho_is_checked():
    mode = ModeModel((1,), (1.0,))
    assert SeparatedSolutionModel(1.0, 2.0, mode).rho == pytest.approx(4.0 - math.pi ** 2)
    with pytest.raises(DomainError):
        SeparatedSolutionModel(1.0, 2.0, mode, rho=1.0)
    assert SeparatedSolutionModel(1.0, math.pi, mode).rho == 0.0


@pytest.mark.parametrize("alpha, kind, d_min", [
    (0.0, NOT_ANCIENT_BOUNDED, None),
    (math.pi, E_D_MEMBER, math.pi),
    (4.0, E_D_MEMBER, 4.0),
    (-4.0, E_D_MEMBER, 4.0),
])
def test_classify_growth(solutions, domain, alpha, kind, d_min):
    growth = solutions.classify_growth(solutions.separated(domain, alpha, coeff=-2.0))
    assert growth.kind == kind
    if d_min is None:
        assert growth.d_min is None
    else:
        assert growth.d_min == pytest.approx(d_min)
        assert growth.C == pytest.approx(2.0 * math.sqrt(2.0))


def test_growth_bound_holds_on_sampled_cylinders(solutions, domain):
    u = solutions.separated(domain, 4.0)
    for d in (4.0, 5.0):
        assert solutions.sampled_growth_excess(u, d, 6.0) <= 1e-12


def test_pde_residual_converges(solutions, domain):
    grid = SpaceTimeGridModel(1.0, 1.0, (1.0,), 64, 64, 32)
    u = solutions.separated(domain, 1.0)
    report = solutions.verify_pde_residual(u, grid)
    assert report['residual_refined'] < report['residual']
    assert report['order'] > 1.8


def test_pde_residual_zero_and_linear(solutions, domain):
    grid = SpaceTimeGridModel(1.0, 1.0, (1.0,), 16, 16, 8)
    zero = solutions.separated(domain, 1.0, coeff=0.0)
    assert solutions.verify_pde_residual(zero, grid)['residual'] == 0.0
    u = solutions.separated(domain, 1.0)
    v = solutions.separated(domain, 4.0)
    both = SolutionSpanModel([u, v], np.array([[1.0, 1.0]]))
    total = solutions.verify_pde_residual(both, grid)['residual']
    parts = solutions.verify_pde_residual(u, grid)['residual'] + solutions.verify_pde_residual(v, grid)['residual']
    assert total <= parts * (1.0 + 1e-12)


def test_continuum_family(solutions, domain):
    family = solutions.build_continuum_family(domain, 4.0, 3)
    alphas = [b.alpha for b in family.basis]
    np.testing.assert_allclose(alphas, [math.pi, (math.pi + 4.0) / 2.0, 4.0])
    assert all(solutions.classify_growth(b).is_member for b in family.basis)
    with pytest.raises(PreconditionError):
        solutions.build_continuum_family(domain, math.pi, 3)


def test_continuum_family_gram_full_rank(solutions, gram, domain):
    family = solutions.build_continuum_family(domain, 6.0, 8)
    w = np.linalg.eigvalsh(gram.gram(family, 2.0).normalized)
    assert w[0] > 1e-12 * w[-1]


def test_probe_family_uses_both_signs(solutions, domain):
    family = solutions.build_probe_family(domain, 6.0, 6)
    assert family.size == 6
    assert any(b.alpha < 0 for b in family.basis)
    assert all(abs(b.alpha) <= 6.0 + 1e-12 for b in family.basis)
    with pytest.raises(PreconditionError):
        solutions.build_probe_family(domain, 1.0, 2)


def test_round_robin_family_at_an_eigenvalue_skips_the_boundary_mode(solutions, domain):
    family = solutions.build_probe_family(domain, 2.0 * math.pi, 6)
    assert family.size == 6
    assert all(b.mode.k == (1,) for b in family.basis)
    assert all(abs(b.alpha) <= 2.0 * math.pi + 1e-12 for b in family.basis)


def test_polynomial_bound_is_broken_for_every_nonzero_member(solutions, domain):
    family = solutions.build_continuum_family(domain, 5.0, 4)
    for u in family.basis:
        for d in (1.0, 2.0, 3.0):
            probe = solutions.polynomial_growth_probe(u, d)
            assert probe['violation'] is not None
    zero = solutions.separated(domain, 4.0, coeff=0.0)
    assert solutions.polynomial_growth_probe(zero, 2.0)['violation'] is None


def test_span_invariants(domain):
    mode = ModeModel((1,), (1.0,))
    u = SeparatedSolutionModel(1.0, 4.0, mode)
    with pytest.raises(DomainError):
        SolutionSpanModel([u, SeparatedSolutionModel(2.0, 4.0, mode)])
    v = SeparatedSolutionModel(1.0, 5.0, mode)
    with pytest.raises(DomainError):
        SolutionSpanModel([u, v], np.array([[1.0, 2.0], [2.0, 4.0]]))
    span = as_span(u)
    assert span.size == 1 and span.ids == ['u1']
    assert SolutionSpanModel([u, v]).d_min == 5.0
