import logging
import math
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from config.settings import C_MV, EXPERIMENT_CONFIG, TOLERANCES
from controller.fd_solver_controller import FdSolverController
from controller.gram_controller import GramController
from controller.solution_controller import as_span
from models.estimate_model import CutoffProfileModel, EstimateReportModel, LiouvilleProbeModel
from models.field_model import SolutionFieldModel
from models.solution_model import HeatKernelSourceModel, SeparatedSolutionModel, SolutionSpanModel
from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import DomainError, PreconditionError, QuadratureWindowError
from utils.quadrature import midpoint_nodes, simpson_weights
from utils.validators import validate_count, validate_increasing, validate_positive, validate_radii

logger = logging.getLogger(__name__)


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _log_ratio(log_a: float, log_b: float) -> float:
    """log(a / b) with 0/0 -> -inf and a/0 -> +inf."""
    if log_a == -math.inf:
        return -math.inf
    if log_b == -math.inf:
        return math.inf
    return log_a - log_b


def _exp(x: float) -> float:
    if x == math.inf:
        return math.inf
    if x == -math.inf:
        return 0.0
    return math.exp(min(x, 709.0))


def theory_constants(lambda_ell: float, Lambda_ell: float, mu1: float) -> Dict[str, float]:
    """
    Constants tracked through the energy argument: C1 = 4 Lambda^2 / lambda
    from the Cauchy-Schwarz split, the reverse Poincare constant with both
    cutoff slopes at their stated maxima, its L^2 form and the smallness
    budget eps0 the lower-order terms may use.
    """
    C1 = 4.0 * Lambda_ell ** 2 / lambda_ell
    C_theory = (2.0 / lambda_ell) * (4.0 * C1 + 4.0)
    return {
        'C1': C1,
        'C_theory': C_theory,
        'C_l2': C_theory / mu1,
        'eps0': lambda_ell ** 2 * mu1 / (4.0 * (lambda_ell + 1.0)),
    }


class EstimateController:
    """
    Numerical verification of the energy estimates for ancient solutions:
    reverse Poincare in gradient and L^2 form, the slice Poincare step, the
    growth iteration and its Liouville consequence, and the parabolic mean
    value inequality.

    Args:
        gram (GramController): Integrals over cylinders.
        fd (FdSolverController): Discrete gradients of fields.
        lambda_ell (float): Ellipticity used for the theory constants.
        Lambda_ell (float): Coefficient bound used for the theory constants.
        C_mv (float): Mean value constant checked against.
    """

    def __init__(self, gram: GramController = None, fd: FdSolverController = None,
                 lambda_ell: float = 1.0, Lambda_ell: float = 1.0, C_mv: float = C_MV):
        self.gram = gram or GramController()
        self.fd = fd or FdSolverController()
        self.lambda_ell = float(lambda_ell)
        self.Lambda_ell = float(Lambda_ell)
        self.C_mv = float(C_mv)
        logger.info("[INIT] EstimateController initialized")

    # ---- helpers -----------------------------------------------------

    def _constants(self, lengths: Sequence[float]) -> Dict[str, float]:
        mu1 = float(sum((math.pi / L) ** 2 for L in lengths))
        constants = theory_constants(self.lambda_ell, self.Lambda_ell, mu1)
        constants['mu1'] = mu1
        return constants

    @staticmethod
    def _is_field(u) -> bool:
        return isinstance(u, SolutionFieldModel)

    def _eps_details(self, u, constants: Dict[str, float]) -> Dict:
        """eps of the operator (0 for the heat equation) against eps0."""
        eps = 0.0
        if self._is_field(u) and u.coefficients is not None:
            eps = u.coefficients.eps
        return {'eps': eps, 'eps0': constants['eps0'], 'eps_within_eps0': eps <= constants['eps0']}

    @staticmethod
    def _check_field_window(field: SolutionFieldModel, R: float):
        grid = field.grid
        if R * R > grid.T * (1.0 + 1e-12) or R + 1.0 > grid.X * (1.0 + 1e-12):
            raise PreconditionError(
                f"Q_R with R={R!r} needs R^2 <= T={grid.T!r} and R + 1 <= X={grid.X!r}")

    def _report(self, check: str, log_lhs: float, log_rhs: float, constant: float, factor: float,
                details: dict) -> EstimateReportModel:
        log_bound = math.log(constant) + math.log(factor) + log_rhs if constant > 0.0 else -math.inf
        if log_lhs == -math.inf:
            passed = True
        elif log_bound == -math.inf:
            passed = False
        else:
            passed = log_lhs <= log_bound + 1e-12 * max(1.0, abs(log_bound))
        empirical = _exp(_log_ratio(log_lhs, log_rhs) - math.log(factor))
        report = EstimateReportModel(check, log_lhs, log_rhs, constant, factor, empirical, passed, details)
        if passed:
            logger.info(f"[CHECK] {check}: pass (empirical constant {empirical!r}, used {constant!r})")
        else:
            logger.error(f"[ERRO] {check}: {report.lhs!r} > {constant!r} * {factor!r} * {report.rhs!r}")
        return report

    def cutoff_profile(self, r: float, R: float, grid: Optional[SpaceTimeGridModel] = None) -> CutoffProfileModel:
        """
        Smoothstep cutoff, 1 on Q_r and 0 outside Q_R; on a grid the ramp
        must span at least four x0 cells.
        """
        r, R = validate_radii(r, R)
        if grid is not None and R - r < TOLERANCES['cutoff_min_cells'] * grid.h0 * (1.0 - 1e-12):
            raise DomainError(f"R - r = {R - r!r} is below {TOLERANCES['cutoff_min_cells']} cells of h0={grid.h0!r}")
        return CutoffProfileModel(r, R)

    def _field_window_integral(self, field: SolutionFieldModel, integrand: np.ndarray) -> float:
        """Simpson integral of a nodal array over the whole field window."""
        grid = field.grid
        w_t = simpson_weights(grid.nt, grid.tau)
        w_0 = simpson_weights(grid.n0, grid.h0)
        w_c = simpson_weights(grid.n_cross, grid.h[0])
        return float(np.einsum('i,ijk,j,k->', w_t, integrand, w_0, w_c))

    # ---- reverse Poincare --------------------------------------------

    def _field_energies(self, field: SolutionFieldModel, r: float, R: float):
        g0, g1 = self.fd.discrete_gradient(field)
        lhs_grad, snap_r = self.gram.integrate_field(field, g0 ** 2 + g1 ** 2, r)
        inner, _ = self.gram.integrate_field(field, field.values ** 2, r)
        outer, snap_R = self.gram.integrate_field(field, field.values ** 2, R)
        return lhs_grad, inner, outer - inner, snap_r, snap_R

    def reverse_poincare_check(self, u, r: float, R: float, method: str = 'closed_form',
                               cells: Sequence[int] = None) -> EstimateReportModel:
        """
        int_{Q_r} |grad u|^2 <= C / (R - r)^2 * int_{Q_R \\ Q_r} u^2.

        Args:
            u: Separated solution, span (element 0) or SolutionFieldModel.
            r (float): Inner radius.
            R (float): Outer radius.
            method (str): ``closed_form`` or ``quadrature`` for closed-form inputs.
            cells (Sequence[int]): Quadrature cells override.
        Returns:
            EstimateReportModel: Both sides, constants and outcome.
        """
        r, R = validate_radii(r, R)
        if self._is_field(u):
            self._check_field_window(u, R)
            constants = self._constants(u.grid.lengths)
            grad, _, annulus, snap_r, snap_R = self._field_energies(u, r, R)
            r_used, R_used = snap_r['snapped_r'], snap_R['snapped_r']
            log_lhs, log_rhs = _safe_log(grad), _safe_log(annulus)
            details = {'snapped_r': r_used, 'snapped_R': R_used, 'grid': u.grid.to_dict(), 'source': 'field'}
        else:
            span = as_span(u)
            constants = self._constants(span.lengths)
            r_used, R_used = r, R
            if method == 'closed_form':
                log_lhs = self.gram.log_energy(span, r, gradient=True)
                log_rhs = self.gram.log_annulus_energy(span, r, R)
            else:
                log_lhs = _safe_log(self._quadrature_gradient_energy(span, r, cells))
                log_rhs = _safe_log(self.gram.annulus_energy(span, r, R, method='quadrature', cells=cells))
            details = {'source': 'closed', 'method': method}
        details.update({'r': r, 'R': R, 'C_theory': constants['C_theory'], 'C1': constants['C1']})
        details.update(self._eps_details(u, constants))
        return self._report('reverse-poincare', log_lhs, log_rhs, constants['C_theory'],
                            1.0 / (R_used - r_used) ** 2, details)

    def _quadrature_gradient_energy(self, span: SolutionSpanModel, r: float, cells) -> float:
        def integrand(t, x0, *xp):
            return sum(g ** 2 for g in span.gradient_array(t, x0, *xp))

        return float(self.gram.integrate_box(integrand, (-r * r, 0.0), (-r, r), span.lengths, cells))

    def l2_reverse_check(self, u, r: float, R: float, method: str = 'closed_form',
                         cells: Sequence[int] = None) -> EstimateReportModel:
        """
        int_{Q_r} u^2 <= C / (R - r)^2 * int_{Q_R \\ Q_r} u^2, with the
        rearranged growth identity I(R) = (1 + (R - r)^2 / C_emp) I(r).
        """
        r, R = validate_radii(r, R)
        if self._is_field(u):
            self._check_field_window(u, R)
            constants = self._constants(u.grid.lengths)
            _, inner, annulus, snap_r, snap_R = self._field_energies(u, r, R)
            r_used, R_used = snap_r['snapped_r'], snap_R['snapped_r']
            log_lhs, log_rhs = _safe_log(inner), _safe_log(annulus)
            details = {'snapped_r': r_used, 'snapped_R': R_used, 'grid': u.grid.to_dict(), 'source': 'field'}
        else:
            span = as_span(u)
            constants = self._constants(span.lengths)
            r_used, R_used = r, R
            if method == 'closed_form':
                log_lhs = self.gram.log_energy(span, r)
                log_rhs = self.gram.log_annulus_energy(span, r, R)
            else:
                inner = self.gram.quadrature_energy_box(span, (-r * r, 0.0), (-r, r), cells)
                log_lhs = _safe_log(inner)
                log_rhs = _safe_log(self.gram.annulus_energy(span, r, R, method='quadrature', cells=cells))
            details = {'source': 'closed', 'method': method}
        report = self._report('l2-reverse', log_lhs, log_rhs, constants['C_l2'], 1.0 / (R_used - r_used) ** 2,
                              dict(details, r=r, R=R, C_theory=constants['C_theory'],
                                   **self._eps_details(u, constants)))
        if log_lhs > -math.inf and log_rhs > -math.inf:
            # I(r) + annulus against (1 + (R - r)^2 / C_emp) I(r)
            log_outer = float(np.logaddexp(log_lhs, log_rhs))
            implied = log_lhs + math.log1p((R_used - r_used) ** 2 / report.empirical_constant) \
                if report.empirical_constant > 0.0 else math.inf
            report.details['consequence_log_error'] = abs(implied - log_outer)
        return report

    # ---- slice Poincare ----------------------------------------------

    def slice_poincare_check(self, u, r: float, R: float, cells: Sequence[int] = None) -> EstimateReportModel:
        """
        int phi^2 u^2 <= (1 / mu_1) int phi^2 |grad' u|^2 over Q_R, with the
        cross-section integrals in closed form for separated inputs and by
        forward differences for fields.
        """
        r, R = validate_radii(r, R)
        if self._is_field(u):
            return self._slice_poincare_field(u, r, R)
        span = as_span(u)
        constants = self._constants(span.lengths)
        profile = self.cutoff_profile(r, R)
        nt, n0 = (cells or self.gram.cells)[:2]
        t_nodes = np.linspace(-R * R, 0.0, nt + 1)
        x0_nodes = np.linspace(-R, R, n0 + 1)
        w = np.multiply.outer(simpson_weights(nt, R * R / nt), simpson_weights(n0, 2.0 * R / n0))
        T, X0 = np.meshgrid(t_nodes, x0_nodes, indexing='ij')
        phi2w = profile.phi(T, X0) ** 2 * w

        weights = span.weights()[0]
        left = 0.0
        right = 0.0
        for i, bi in enumerate(span.basis):
            for j, bj in enumerate(span.basis):
                if weights[i] == 0.0 or weights[j] == 0.0 or bi.mode.k != bj.mode.k:
                    continue
                envelope = np.exp((bi.alpha + bj.alpha) * X0 + (bi.rho + bj.rho) * T)
                term = weights[i] * weights[j] * float(np.sum(phi2w * envelope))
                left += term
                right += bi.mode.mu * term
        log_lhs, log_rhs = _safe_log(left), _safe_log(right)
        report = self._report('slice-poincare', log_lhs, log_rhs, 1.0 / constants['mu1'], 1.0,
                              {'source': 'closed', 'r': r, 'R': R, 'mu1': constants['mu1']})
        report.details['sharpness'] = _exp(math.log(constants['mu1']) + _log_ratio(log_lhs, log_rhs))
        return report

    def _slice_poincare_field(self, field: SolutionFieldModel, r: float, R: float) -> EstimateReportModel:
        grid = field.grid
        if field.boundary_max() != 0.0:
            raise PreconditionError("field does not vanish on the lateral boundary")
        constants = self._constants(grid.lengths)
        profile = self.cutoff_profile(r, R, grid)
        h = grid.h[0]
        L = grid.lengths[0]
        T, X0 = np.meshgrid(grid.t_nodes, grid.x0_nodes, indexing='ij')
        phi2 = profile.phi(T, X0) ** 2
        slice_u2 = h * np.sum(field.values ** 2, axis=2)
        slice_grad2 = h * np.sum(np.diff(field.values, axis=2) ** 2, axis=2) / h ** 2
        w = np.multiply.outer(simpson_weights(grid.nt, grid.tau), simpson_weights(grid.n0, grid.h0))
        left = float(np.sum(w * phi2 * slice_u2))
        right = float(np.sum(w * phi2 * slice_grad2))
        mu1_h = (4.0 / h ** 2) * math.sin(math.pi * h / (2.0 * L)) ** 2
        log_lhs, log_rhs = _safe_log(left), _safe_log(right)
        report = self._report('slice-poincare', log_lhs, log_rhs, 1.0 / mu1_h, 1.0,
                              {'source': 'field', 'r': r, 'R': R, 'mu1': constants['mu1'], 'mu1_discrete': mu1_h,
                               'slack_factor': constants['mu1'] / mu1_h, 'grid': grid.to_dict()})
        report.details['sharpness'] = _exp(math.log(mu1_h) + _log_ratio(log_lhs, log_rhs))
        return report

    # ---- discrete energy inequality ----------------------------------

    def energy_inequality_check(self, field: SolutionFieldModel, r: float, R: float) -> EstimateReportModel:
        """
        Discrete integrated energy inequality for a field of an operator
        with b = 0 and c = 0:
        int_{t=0} u^2 phi^2 + (lambda/2) int phi^2 |grad u|^2
            <= C1 int u^2 |d0 phi|^2 + 2 int u^2 |phi| |dt phi|.
        """
        grid = field.grid
        self._check_field_window(field, R)
        profile = self.cutoff_profile(r, R, grid)
        lam, Lam = self.lambda_ell, self.Lambda_ell
        if field.coefficients is not None:
            X0n, X1n = np.meshgrid(grid.x0_nodes, grid.cross_nodes[0], indexing='ij')
            if np.any(field.coefficients.b(X0n, X1n) != 0.0) or np.any(field.coefficients.c(X0n, X1n) != 0.0):
                raise PreconditionError("energy inequality check needs b = 0 and c = 0")
            lam, Lam = field.coefficients.lambda_ell, field.coefficients.Lambda_ell
        C1 = 4.0 * Lam ** 2 / lam
        T, X0 = np.meshgrid(grid.t_nodes, grid.x0_nodes, indexing='ij')
        phi = profile.phi(T, X0)[..., np.newaxis]
        d0 = profile.d0(T, X0)[..., np.newaxis]
        dt = profile.dt(T, X0)[..., np.newaxis]
        g0, g1 = self.fd.discrete_gradient(field)
        u2 = field.values ** 2

        w_0 = simpson_weights(grid.n0, grid.h0)
        w_c = simpson_weights(grid.n_cross, grid.h[0])
        final = float(w_0 @ (u2[-1] * phi[-1] ** 2) @ w_c)
        dissipation = 0.5 * lam * self._field_window_integral(field, phi ** 2 * (g0 ** 2 + g1 ** 2))
        spatial = C1 * self._field_window_integral(field, u2 * d0 ** 2)
        temporal = 2.0 * self._field_window_integral(field, u2 * np.abs(phi) * np.abs(dt))
        left = final + dissipation
        right = spatial + temporal
        slack = TOLERANCES['energy_slack_rel']
        passed = left <= right * (1.0 + slack)
        details = {'terms': {'final': final, 'dissipation': dissipation, 'spatial': spatial, 'temporal': temporal},
                   'C1': C1, 'slack_rel': slack, 'r': r, 'R': R, 'grid': grid.to_dict(), 'source': 'field'}
        report = EstimateReportModel('energy', _safe_log(left), _safe_log(right), 1.0 + slack, 1.0,
                                     left / right if right > 0.0 else (0.0 if left == 0.0 else math.inf),
                                     passed, details)
        if passed:
            logger.info(f"[CHECK] energy: pass ({left!r} <= {right!r})")
        else:
            logger.error(f"[ERRO] energy: {left!r} > {right!r} * (1 + {slack!r})")
        return report

    # ---- growth ------------------------------------------------------

    def _require_closed(self, u, what: str) -> SolutionSpanModel:
        if self._is_field(u):
            raise PreconditionError(f"{what} needs a closed-form solution defined on all of (-inf, 0]")
        return as_span(u)

    def _empirical_l2(self, span: SolutionSpanModel, rho: float, r0: float) -> float:
        log_inner = self.gram.log_energy(span, rho)
        log_annulus = self.gram.log_annulus_energy(span, rho, rho + r0)
        return _exp(_log_ratio(log_inner, log_annulus)) * r0 ** 2

    def uniform_l2_constant(self, u, r: float, K: int, max_iterations: int = 100) -> Dict:
        """
        Smallest constant C (up to a 0.1% margin) whose step r0 = sqrt(C(e - 1))
        satisfies the empirical L^2 estimate on every pair
        (r + k r0, r + (k + 1) r0), k < K.
        """
        span = self._require_closed(u, "uniform L^2 constant")
        r = validate_positive("r", r)
        K = validate_count("K", K, 1)
        if self.gram.log_energy(span, r) == -math.inf:
            return {'C': 0.0, 'r0': 0.0, 'iterations': 0, 'vacuous': True}
        C = self._empirical_l2(span, r, 1.0)
        for iteration in range(1, max_iterations + 1):
            r0 = math.sqrt(C * (math.e - 1.0))
            C_next = max(self._empirical_l2(span, r + k * r0, r0) for k in range(K))
            if C_next <= C:
                logger.debug(f"[CHECK] uniform constant {C!r} after {iteration} iterations")
                return {'C': C, 'r0': r0, 'iterations': iteration, 'vacuous': False}
            C = C_next * 1.001
        raise PreconditionError(f"uniform L^2 constant did not settle within {max_iterations} iterations")

    def growth_iteration_check(self, u, r: float, r0: Optional[float] = None, K: int = 4) -> Dict:
        """
        Ratios I(r + k r0) / (e^k I(r)), k = 1..K, all >= 1 for a nonzero
        ancient solution; r0 defaults to the self-consistent uniform step.
        """
        span = self._require_closed(u, "growth iteration")
        r = validate_positive("r", r)
        K = validate_count("K", K, 1)
        log_base = self.gram.log_energy(span, r)
        if log_base == -math.inf:
            logger.warning("[WARN] growth iteration on a zero-energy solution is vacuous")
            return {'check': 'growth', 'vacuous': True, 'passed': True, 'r': r, 'K': K, 'r0': r0,
                    'log_ratios': [], 'min_ratio': None}
        uniform = None
        if r0 is None:
            uniform = self.uniform_l2_constant(span, r, K)
            r0 = uniform['r0']
        r0 = validate_positive("r0", r0)
        log_ratios = [self.gram.log_energy(span, r + k * r0) - k - log_base for k in range(1, K + 1)]
        min_log = min(log_ratios)
        passed = min_log >= -1e-12
        report = {
            'check': 'growth', 'vacuous': False, 'passed': passed, 'r': r, 'K': K, 'r0': r0,
            'log_ratios': log_ratios, 'min_ratio': _exp(min_log),
            'C_uniform': None if uniform is None else uniform['C'],
            'growth_rate_lower': 1.0 / r0,
        }
        if passed:
            logger.info(f"[CHECK] growth: pass (min ratio {report['min_ratio']!r})")
        else:
            logger.error(f"[ERRO] growth: ratio {report['min_ratio']!r} < 1")
        return report

    def growth_exponent(self, u, R_list: Sequence[float]) -> Dict:
        """
        Least-squares slope of log I_u(R) against R over the top half of
        R_list, with its residual and R^{-1} log I_u(R) at the last radius.
        """
        span = self._require_closed(u, "growth exponent")
        R_list = validate_increasing("R_list", R_list, 3)
        logs = self.gram.log_energy_ladder(span, R_list)
        if np.all(np.isneginf(logs)):
            return {'exponent': -math.inf, 'residual': 0.0, 'normalized_last': -math.inf, 'R': R_list}
        top = np.array(R_list[len(R_list) // 2:])
        y = logs[len(R_list) // 2:]
        slope, intercept = np.polyfit(top, y, 1)
        residual = float(np.sqrt(np.mean((y - (slope * top + intercept)) ** 2)))
        return {
            'exponent': float(slope),
            'residual': residual,
            'normalized_last': float(logs[-1] / R_list[-1]),
            'R': R_list,
            'log_I': logs.tolist(),
        }

    def polynomial_liouville_probe(self, u, d: float, r: float, K: int) -> LiouvilleProbeModel:
        """
        Fit log C = max_k [log I(r + k r0) - 2d log(r + k r0)] over k <= K and
        scan for the first k where e^k I(r) beats C (r + k r0)^{2d} by the
        certificate ratio.
        """
        span = self._require_closed(u, "Liouville probe")
        d = validate_positive("d", d)
        r = validate_positive("r", r)
        K = validate_count("K", K, 1)
        log_base = self.gram.log_energy(span, r)
        if log_base == -math.inf:
            probe = LiouvilleProbeModel(d, r, 0.0, -math.inf, None, None, True, K)
            logger.info("[CHECK] liouville: zero solution, nothing to contradict")
            return probe
        r0 = self.uniform_l2_constant(span, r, K)['r0']
        radii = r + r0 * np.arange(K + 1)
        ladder = self.gram.log_energy_ladder(span, radii)
        log_C = float(np.max(ladder - 2.0 * d * np.log(radii)))
        k = np.arange(1, TOLERANCES['certificate_scan'] + 1, dtype=float)
        margin = k + log_base - log_C - 2.0 * d * np.log(r + k * r0)
        hits = np.flatnonzero(margin > math.log(TOLERANCES['certificate_ratio']))
        if hits.size:
            first = int(hits[0])
            probe = LiouvilleProbeModel(d, r, r0, log_C, int(k[first]), float(margin[first]), False, K)
            logger.info(f"[CHECK] liouville: certificate at k={probe.certificate_k}")
        else:
            probe = LiouvilleProbeModel(d, r, r0, log_C, None, None, False, K)
            logger.error(f"[ERRO] liouville: no certificate within {TOLERANCES['certificate_scan']} steps")
        return probe

    # ---- mean value --------------------------------------------------

    def _ball_samples(self, center_t: float, center_x: Sequence[float], r: float, cells: Sequence[int]):
        nt, ns = cells
        t_mid, ht = midpoint_nodes(center_t - r * r, center_t, nt)
        axes = []
        hs = 1.0
        for c in center_x:
            mids, h = midpoint_nodes(c - r, c + r, ns)
            axes.append(mids)
            hs *= h
        mesh = np.meshgrid(*axes, indexing='ij')
        dist2 = sum((m - c) ** 2 for m, c in zip(mesh, center_x))
        inside = dist2 < r * r
        points = [m[inside] for m in mesh]
        return t_mid, ht * hs, points

    def mean_value_check(self, u, center: Sequence[float], r: float, cells: Sequence[int] = None,
                         zero_extend: bool = True) -> EstimateReportModel:
        """
        |u(t, x)|^2 <= C_mv / r^{n+3} * int_{P_r(t, x)} u^2 by the midpoint
        rule on a time x ball grid; u is extended by zero outside the strip.

        Args:
            u: Closed-form solution, ConstantSolutionModel, HeatKernelSourceModel
                or SolutionFieldModel.
            center (Sequence[float]): (t, x0, x').
            r (float): Radius.
            cells (Sequence[int]): (time cells, cells per spatial axis).
            zero_extend (bool): Zero outside the strip cross-section.
        """
        r = validate_positive("r", r)
        cells = tuple(cells or EXPERIMENT_CONFIG['mv_cells'])
        center_t = float(center[0])
        center_x = [float(c) for c in center[1:]]
        if center_t > 0.0:
            raise DomainError(f"mean value centre must have t <= 0, got {center_t!r}")
        dim = len(center_x)
        t_mid, cell_volume, points = self._ball_samples(center_t, center_x, r, cells)

        if self._is_field(u):
            grid = u.grid
            if center_t - r * r < -grid.T or abs(center_x[0]) + r > grid.X:
                raise QuadratureWindowError(f"P_r with r={r!r} leaves the field window")
            interp = RegularGridInterpolator((grid.t_nodes, grid.x0_nodes) + grid.cross_nodes, u.values,
                                             bounds_error=False, fill_value=0.0)

            def evaluate(t, pts):
                return interp(np.column_stack([np.full(pts[0].shape, t)] + list(pts)))

            value = float(interp(np.array([[center_t] + center_x]))[0])
            lengths = grid.lengths
        else:
            source = as_span(u) if isinstance(u, (SeparatedSolutionModel, SolutionSpanModel)) else u

            def evaluate(t, pts):
                return source.evaluate_array(t, *pts)

            value = float(source.evaluate_array(center_t, *center_x))
            lengths = getattr(source, 'lengths', None)

        total = 0.0
        for t in t_mid:
            values = evaluate(t, points)
            if zero_extend and lengths is not None:
                outside = np.zeros(values.shape, dtype=bool)
                for x, L in zip(points[1:], lengths):
                    outside |= (x <= 0.0) | (x >= L)
                values = np.where(outside, 0.0, values)
            total += float(np.sum(values ** 2))
        integral = total * cell_volume

        exponent = dim + 2
        log_lhs = _safe_log(value * value)
        log_rhs = _safe_log(integral)
        details = {'center': [center_t] + center_x, 'r': r, 'cells': list(cells), 'zero_extend': zero_extend,
                   'source': 'field' if self._is_field(u) else 'closed'}
        return self._report('mean-value', log_lhs, log_rhs, self.C_mv, r ** (-exponent), details)

    def calibrate_mean_value_constant(self, n: int = 1, kappas: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0),
                                      offsets: Sequence[float] = (0.0, 0.5, 1.0), r: float = 1.0,
                                      cells: Sequence[int] = (64, 120)) -> Dict:
        """
        Largest empirical mean value constant over whole-space heat kernels
        whose pole sits kappa r^2 below the bottom of P_r and offset r away
        in x0.
        """
        cases = []
        centre = [0.0] * (n + 1)
        for kappa in kappas:
            for offset in offsets:
                pole = HeatKernelSourceModel(-r * r * (1.0 + kappa), [offset * r] + [0.0] * n)
                report = self.mean_value_check(pole, [0.0] + centre, r, cells, zero_extend=False)
                cases.append({'kappa': kappa, 'offset': offset, 'empirical_constant': report.empirical_constant})
        worst = max(c['empirical_constant'] for c in cases)
        logger.info(f"[CHECK] mean value calibration: max empirical constant {worst!r} (C_mv={self.C_mv!r})")
        return {'max_empirical': worst, 'C_mv': self.C_mv, 'passed': worst <= self.C_mv, 'cases': cases}
