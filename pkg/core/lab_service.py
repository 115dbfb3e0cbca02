import logging
import math
import os
from typing import Dict, List, Optional

import numpy as np

from config.settings import TOLERANCES
from controller.cm_controller import CmController, default_sigma
from controller.estimate_controller import EstimateController
from controller.fd_solver_controller import FdSolverController
from controller.gram_controller import GramController
from controller.solution_controller import SolutionController
from controller.spectrum_controller import SpectrumController
from dao.field_dao import FieldDao
from dao.report_dao import ReportDao
from dao.solution_dao import SolutionDao
from models.experiment_config_model import ExperimentConfigModel
from models.field_model import SolutionFieldModel
from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import PreconditionError, StripLabError

logger = logging.getLogger(__name__)

VERIFY_CHECKS = ('reverse-poincare', 'l2-reverse', 'slice-poincare', 'growth', 'liouville', 'mean-value', 'energy')
CM_STEPS = ('f', 'select', 'basis', 'trace')


class LabService:
    """
    Service that wires DAOs and controllers for one experiment configuration.

    Every ``run_*`` method computes its checks, writes them through the
    report DAO and returns the written report.

    Args:
        config (ExperimentConfigModel): Validated configuration.
        out_dir (Optional[str]): Output directory (defaults to ``output.dir``).
    """

    def __init__(self, config: ExperimentConfigModel, out_dir: Optional[str] = None):
        self.config = config
        self.domain = config.build_domain()
        out_dir = out_dir or config.output['dir']
        self.report_dao = ReportDao(out_dir)
        self.field_dao = FieldDao(out_dir)
        self.solution_dao = SolutionDao(out_dir)

        exp = config.experiment
        bounds = config.operator_bounds()
        self.spectrum_controller = SpectrumController()
        self.solution_controller = SolutionController(self.spectrum_controller)
        self.gram_controller = GramController(exp['quad_cells'])
        self.fd_controller = FdSolverController()
        self.estimate_controller = EstimateController(self.gram_controller, self.fd_controller,
                                                      bounds['lambda_ell'], bounds['Lambda_ell'])
        self.cm_controller = CmController(self.gram_controller, self.solution_controller)
        self._field: Optional[SolutionFieldModel] = None
        logger.info(f"[INIT] LabService initialized (out: {out_dir})")

    # ---- subjects ----------------------------------------------------

    @property
    def exp(self) -> Dict:
        return self.config.experiment

    def grid(self) -> SpaceTimeGridModel:
        g = self.config.grid
        return SpaceTimeGridModel.from_spacing(float(g['T']), self.domain.X, self.domain.lengths,
                                               float(g['tau']), float(g['h0']), float(g['h']))

    def field(self) -> SolutionFieldModel:
        """FD solution of the configured operator from seeded initial data (computed once)."""
        if self._field is None:
            bounds = self.config.operator_bounds()
            coeffs = self.fd_controller.coefficients(self.config.operator['preset'], bounds['lambda_ell'],
                                                     bounds['Lambda_ell'], bounds['eps'])
            grid = self.grid()
            seed = int(self.exp['seed'])
            initial = self.fd_controller.seeded_bump(grid, seed)
            self._field = self.fd_controller.evolve(coeffs, initial, grid, self.config.operator['scheme'], seed)
        return self._field

    def closed_subject(self):
        return self.solution_controller.separated(self.domain, float(self.exp['alpha']), int(self.exp['k_index']))

    def subject(self):
        return self.field() if self.exp['source'] == 'field' else self.closed_subject()

    def probe_family(self):
        return self.solution_controller.build_probe_family(self.domain, float(self.exp['d']), 2 * int(self.exp['k']))

    def _sigma(self, d: float, delta: float) -> float:
        sigma = float(self.exp['sigma'])
        return sigma if sigma > 0.0 else default_sigma(d, delta)

    def _M(self) -> Optional[int]:
        return int(self.exp['M']) or None

    def _write(self, name: str, checks: List[Dict]) -> Dict:
        return self.report_dao.save_report(name, checks, self.config.to_dict(), self.config.output['formats'])

    # ---- subcommands -------------------------------------------------

    def run_spectrum(self) -> Dict:
        mu_max = float(self.exp['mu_max'])
        modes = self.spectrum_controller.box_eigenpairs(self.domain, mu_max)
        self.report_dao.save_modes('spectrum_modes', modes)
        checks = [{
            'check': 'spectrum', 'mu_max': mu_max, 'count': len(modes),
            'weyl_count': self.spectrum_controller.weyl_count(self.domain, math.sqrt(mu_max)),
            'mu': [m.mu for m in modes], 'passed': True,
        }]
        if self.domain.n == 1 and modes:
            order = self.spectrum_controller.spectrum_convergence_order(self.domain.lengths[0], 200, min(5, len(modes)))
            order.update({'check': 'fd-spectrum-order', 'passed': min(order['orders']) >= 1.9})
            checks.append(order)
        logger.info(f"[SPECTRUM] {len(modes)} modes with mu <= {mu_max!r}")
        return self._write('spectrum', checks)

    def run_solutions_build(self) -> Dict:
        if self.exp['source'] == 'field':
            field = self.field()
            path = self.field_dao.save('field', field)
            check = self.fd_controller.validate_coefficients(field.coefficients, field.grid)
            checks = [check, {'check': 'field', 'file': os.path.basename(path), 'shape': list(field.grid.shape),
                              'boundary_max': field.boundary_max(), 'seed': field.seed,
                              'passed': field.boundary_max() == 0.0}]
        else:
            family = self.solution_controller.build_continuum_family(self.domain, float(self.exp['d']),
                                                                     int(self.exp['N']))
            path = self.solution_dao.save_family('family', family)
            checks = [{'check': 'family', 'file': os.path.basename(path), 'size': family.size, 'd_min': family.d_min,
                       'passed': True}]
        return self._write('solutions', checks)

    def run_gram(self) -> Dict:
        r = float(self.exp['r'])
        if self.exp['source'] == 'field':
            gram = self.gram_controller.gram([self.field()], r)
        else:
            family = self.solution_controller.build_continuum_family(self.domain, float(self.exp['d']),
                                                                     int(self.exp['N']))
            gram = self.gram_controller.gram(family, r, self.exp['method'])
        self.report_dao.save_gram('gram', gram)
        check = gram.header()
        check.update({'check': 'gram', 'condition_number': gram.condition_number(),
                      'min_eig_ratio': gram.min_eig_ratio(), 'passed': True})
        return self._write('gram_report', [check])

    def run_verify(self, kind: str) -> Dict:
        if kind not in VERIFY_CHECKS:
            raise PreconditionError(f"unknown check {kind!r}; expected one of {VERIFY_CHECKS}")
        exp = self.exp
        r, R = float(exp['r']), float(exp['R'])
        estimates = self.estimate_controller
        if kind == 'reverse-poincare':
            checks = [estimates.reverse_poincare_check(self.subject(), r, R, exp['method'], exp['quad_cells']).to_dict()]
        elif kind == 'l2-reverse':
            checks = [estimates.l2_reverse_check(self.subject(), r, R, exp['method'], exp['quad_cells']).to_dict()]
        elif kind == 'slice-poincare':
            checks = [estimates.slice_poincare_check(self.subject(), r, R, exp['quad_cells']).to_dict()]
        elif kind == 'energy':
            checks = [estimates.energy_inequality_check(self.field(), r, R).to_dict()]
        elif kind == 'growth':
            u = self.closed_subject()
            iteration = estimates.growth_iteration_check(u, r, K=int(exp['K']))
            exponent = estimates.growth_exponent(u, exp['radii'])
            lower = iteration.get('growth_rate_lower')
            exponent.update({'check': 'growth-exponent', 'lower_bound': lower,
                             'passed': iteration['vacuous']
                             or exponent['exponent'] >= lower * (1.0 - TOLERANCES['growth_rate_rel'])})
            checks = [iteration, exponent]
        elif kind == 'liouville':
            probe = estimates.polynomial_liouville_probe(self.closed_subject(), float(exp['d']), r, int(exp['K']))
            checks = [probe.to_dict()]
        else:
            checks = [estimates.mean_value_check(self.subject(), exp['center'], r, exp['mv_cells']).to_dict()]
        return self._write(f"verify_{kind.replace('-', '_')}", checks)

    def run_cm(self, step: str) -> Dict:
        if step not in CM_STEPS:
            raise PreconditionError(f"unknown cm step {step!r}; expected one of {CM_STEPS}")
        exp = self.exp
        d, delta = float(exp['d']), float(exp['delta'])
        span = self.probe_family()
        cm = self.cm_controller
        if step == 'f':
            table = cm.compute_f(span, exp['radii'], exp['method'], d_growth=d)
            self.report_dao.save_table('f_table', [
                {'r': float(r), **{f"log_f{i + 1}": float(table.log_values[i, j]) for i in range(table.k)}}
                for j, r in enumerate(table.radii)])
            checks = [table.to_dict(), cm.verify_f_properties(table, d)]
            checks[0].update({'check': 'f-table', 'passed': not table.check_invariants()})
        elif step == 'select':
            M = self._M() or int(math.ceil(64.0 / delta - 1e-9))
            table = cm.compute_f(span, delta * np.arange(M + 1), exp['method'], d_growth=4.0 * d + 1.0)
            selection = cm.select_scales(table, int(exp['ell']), self._sigma(d, delta), int(exp['m0']), M)
            checks = [dict(selection.to_dict(), check='select', passed=True)]
        else:
            basis = cm.good_basis(span, delta, int(exp['m0']), d, self._sigma(d, delta), self._M(), exp['method'])
            self.report_dao.save_matrix('good_basis', basis.v, [f"v{i + 1}" for i in range(basis.ell)], span.ids)
            checks = [dict(basis.to_dict(), check='good-basis', passed=bool(basis.diagnostics['stated_bound_holds']))]
            if step == 'trace':
                checks.append(cm.trace_bound_check(basis, span, exp['deltas'], self.domain.n).to_dict())
                points = cm.sample_points(self.domain.lengths, basis.a, seed=int(exp['seed']))
                trace = cm.kernel_trace(basis, span, points, int(exp['seed']))
                checks.append(dict(trace.to_dict(), check='kernel-trace'))
        return self._write(f"cm_{step}", checks)

    def run_experiment_dimension(self) -> Dict:
        exp = self.exp
        report = self.cm_controller.dimension_experiment(self.domain, float(exp['d']), int(exp['k']),
                                                         int(exp['m0']), self._M(), exp['deltas'],
                                                         int(exp['seed']))
        return self._write('experiment_dimension', [report])

    def run(self, command: str, sub: Optional[str] = None) -> Dict:
        """Dispatch a subcommand name to its ``run_*`` method."""
        logger.info(f"[CLI] Running '{command}{' ' + sub if sub else ''}'")
        try:
            if command == 'spectrum':
                return self.run_spectrum()
            if command == 'solutions':
                return self.run_solutions_build()
            if command == 'gram':
                return self.run_gram()
            if command == 'verify':
                return self.run_verify(sub)
            if command == 'cm':
                return self.run_cm(sub)
            if command == 'experiment':
                return self.run_experiment_dimension()
        except StripLabError:
            raise
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as e:
            logger.error(f"[ERRO] '{command}' failed: {e}")
            raise StripLabError(f"{command}: {e}")
        raise PreconditionError(f"unknown subcommand {command!r}")
