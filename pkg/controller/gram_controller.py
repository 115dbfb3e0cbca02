import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config.settings import EXPERIMENT_CONFIG, TOLERANCES
from controller.solution_controller import as_span
from models.field_model import SolutionFieldModel
from models.gram_model import CLOSED_FORM, QUADRATURE, GramMatrixModel
from models.solution_model import SeparatedSolutionModel, SolutionSpanModel
from utils.exceptions import DomainError, PreconditionError, QuadratureWindowError
from utils.quadrature import cross_section_rule, simpson_nodes, simpson_weights
from utils.validators import validate_positive, validate_radii

logger = logging.getLogger(__name__)


def log_exprel(a: float) -> float:
    """log((e^a - 1) / a), continuous at a = 0 and free of overflow."""
    if a == 0.0:
        return 0.0
    if a > 0.0:
        return a + math.log(-math.expm1(-a) / a)
    return math.log(math.expm1(a) / a)


def log_sinhc(y: float) -> float:
    """log(sinh(y) / y) for y >= 0."""
    y = abs(y)
    if y == 0.0:
        return 0.0
    if y < 1.0:
        return math.log(math.sinh(y) / y)
    return y - math.log(2.0 * y) + math.log1p(-math.exp(-2.0 * y))


def log_time_factor(s: float, r: float) -> float:
    """log of the integral of e^{s t} over (-r^2, 0]; equals log r^2 at s = 0."""
    return 2.0 * math.log(r) + log_exprel(-s * r * r)


def log_space_factor(b: float, r: float) -> float:
    """log of the integral of e^{b x0} over (-r, r); equals log 2r at b = 0."""
    return math.log(2.0 * r) + log_sinhc(b * r)


class GramController:
    """
    J_r inner products, I_u energies and Gram matrices, in closed form for
    separated solutions and by tensor Simpson quadrature for anything
    sampled.

    Args:
        cells (Sequence[int]): Default quadrature cells (t, x0, cross-section).
    """

    def __init__(self, cells: Optional[Sequence[int]] = None):
        self.cells = tuple(int(c) for c in (cells or EXPERIMENT_CONFIG['quad_cells']))
        logger.info(f"[INIT] GramController initialized (cells={self.cells})")

    # ---- closed form -------------------------------------------------

    @staticmethod
    def _basis_log_pairs(basis: Sequence[SeparatedSolutionModel], r: float, gradient: bool = False):
        """
        log|J_r| and sign for every pair of unit-amplitude basis shapes.
        """
        n = len(basis)
        log_abs = np.full((n, n), -np.inf)
        sign = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                bi, bj = basis[i], basis[j]
                if bi.mode.k != bj.mode.k:
                    continue
                value = log_time_factor(bi.rho + bj.rho, r) + log_space_factor(bi.alpha + bj.alpha, r)
                s = 1.0
                if gradient:
                    weight = bi.alpha * bj.alpha + bi.mode.mu
                    if weight == 0.0:
                        continue
                    value += math.log(abs(weight))
                    s = math.copysign(1.0, weight)
                log_abs[i, j] = log_abs[j, i] = value
                sign[i, j] = sign[j, i] = s
        return log_abs, sign

    def inner_product_closed(self, u: SeparatedSolutionModel, v: SeparatedSolutionModel, r: float) -> float:
        """
        J_r(u, v) = coeff_u coeff_v T(r) S(r) delta_{modes} exactly.
        """
        r = validate_positive("r", r)
        if u.mode.lengths != v.mode.lengths:
            raise DomainError("solutions live on different cross-sections")
        if u.mode.k != v.mode.k or u.coeff == 0.0 or v.coeff == 0.0:
            return 0.0
        log_value = log_time_factor(u.rho + v.rho, r) + log_space_factor(u.alpha + v.alpha, r)
        with np.errstate(over='ignore'):
            return float(u.coeff * v.coeff * np.exp(log_value))

    def _closed_gram(self, span: SolutionSpanModel, r: float, gradient: bool) -> GramMatrixModel:
        log_abs, sign = self._basis_log_pairs(span.basis, r, gradient)
        sigma = 0.5 * np.diag(log_abs)
        normalized_basis = sign * np.exp(log_abs - sigma[:, np.newaxis] - sigma[np.newaxis, :])
        np.fill_diagonal(normalized_basis, 1.0)

        weights = span.weights()
        kappa = np.max(np.abs(weights), axis=1)
        p = weights.shape[0]
        log_weight = np.full(p, -np.inf)
        shape_scale = np.full(p, -np.inf)
        m = np.zeros_like(weights)
        for a in range(p):
            if kappa[a] == 0.0:
                continue
            log_weight[a] = math.log(kappa[a])
            w_hat = weights[a] / kappa[a]
            live = w_hat != 0.0
            row_log = np.full(len(span.basis), -np.inf)
            row_log[live] = np.log(np.abs(w_hat[live])) + sigma[live]
            top = float(np.max(row_log))
            m[a, live] = w_hat[live] * np.exp(sigma[live] - top)
            shape_scale[a] = top
        g = m @ normalized_basis @ m.T
        g = 0.5 * (g + g.T)
        diag = np.diag(g).copy()
        positive = diag > 0.0
        inv = np.where(positive, 1.0 / np.sqrt(np.where(positive, diag, 1.0)), 0.0)
        normalized = g * np.outer(inv, inv)
        np.fill_diagonal(normalized, np.where(positive, 1.0, 0.0))
        with np.errstate(divide='ignore'):
            shape_scale = np.where(positive, shape_scale + 0.5 * np.log(np.where(positive, diag, 1.0)), -np.inf)
        log_weight = np.where(positive, log_weight, -np.inf)
        log_scale = np.where(positive, log_weight + shape_scale, -np.inf)
        return GramMatrixModel(r, normalized, log_scale, span.ids, CLOSED_FORM, r, log_weight, shape_scale)

    def log_energy(self, u, r: float, element: int = 0, gradient: bool = False) -> float:
        """
        log I_u(r) (or log of the gradient energy) by signed log-sum-exp
        over basis pairs; -inf for the zero solution.
        """
        r = validate_positive("r", r)
        span = as_span(u)
        log_abs, sign = self._basis_log_pairs(span.basis, r, gradient)
        w = span.weights()[element]
        live = w != 0.0
        if not np.any(live):
            return -np.inf
        lw = np.log(np.abs(w[live]))
        terms = log_abs[np.ix_(live, live)] + lw[:, np.newaxis] + lw[np.newaxis, :]
        signs = sign[np.ix_(live, live)] * np.outer(np.sign(w[live]), np.sign(w[live]))
        finite = np.isfinite(terms) & (signs != 0.0)
        if not np.any(finite):
            return -np.inf
        value, s = logsumexp(terms[finite], b=signs[finite], return_sign=True)
        if s <= 0.0:
            return -np.inf
        return float(value)

    def log_energy_ladder(self, u, radii: Sequence[float], element: int = 0) -> np.ndarray:
        return np.array([self.log_energy(u, R, element) for R in radii])

    def gradient_gram_closed(self, u, r: float) -> GramMatrixModel:
        """Gram of the pairing int_{Q_r} grad u_i . grad u_j, in closed form."""
        r = validate_positive("r", r)
        return self._closed_gram(as_span(u), r, gradient=True)

    # ---- quadrature --------------------------------------------------

    def integrate_box(self, fn: Callable, t_range: Tuple[float, float], x0_range: Tuple[float, float],
                      lengths: Sequence[float], cells: Sequence[int] = None, components: int = 0):
        """
        Tensor Simpson integral of ``fn(t, x0_mesh, *cross_meshes)`` over
        t_range x x0_range x Omega_0, one time slice at a time in ascending
        order. With ``components > 0`` fn returns a stack of that many
        slices and a vector is returned.
        """
        nt, n0, nc = cells or self.cells
        t_nodes, w_t = simpson_nodes(t_range[0], t_range[1], nt)
        x0_nodes, w_0 = simpson_nodes(x0_range[0], x0_range[1], n0)
        cross_axes, w_c = cross_section_rule(lengths, nc)
        mesh = np.meshgrid(x0_nodes, *cross_axes, indexing='ij')
        w_space = np.multiply.outer(w_0, w_c)
        total = np.zeros(components) if components else 0.0
        for t, wt in zip(t_nodes, w_t):
            values = fn(t, mesh[0], *mesh[1:])
            if components:
                total = total + wt * np.tensordot(values, w_space, axes=w_space.ndim)
            else:
                total = total + wt * float(np.sum(values * w_space))
        return total

    def _check_cells(self, cells):
        cells = tuple(int(c) for c in (cells or self.cells))
        if cells[1] < TOLERANCES['min_cells_across']:
            raise QuadratureWindowError(f"{cells[1]} cells across (-r, r); need at least {TOLERANCES['min_cells_across']}")
        return cells

    def inner_product_quadrature(self, u, v, r: float, cells: Sequence[int] = None,
                                 element_u: int = 0, element_v: int = 0) -> float:
        """
        J_r(u, v) by composite Simpson over Q_r; closed-form sources or two
        fields on the same grid.
        """
        r = validate_positive("r", r)
        u_field, v_field = isinstance(u, SolutionFieldModel), isinstance(v, SolutionFieldModel)
        if u_field != v_field:
            raise PreconditionError("inner product needs two fields or two closed-form sources")
        if u_field:
            value, _ = self.integrate_field(u, u.values * v.values, r)
            return value
        cells = self._check_cells(cells)
        su, sv = as_span(u), as_span(v)

        def integrand(t, x0, *xp):
            return su.evaluate_array(t, x0, *xp, element=element_u) * sv.evaluate_array(t, x0, *xp, element=element_v)

        return float(self.integrate_box(integrand, (-r * r, 0.0), (-r, r), su.lengths, cells))

    def quadrature_energy_box(self, u, t_range, x0_range, cells: Sequence[int] = None, element: int = 0) -> float:
        span = as_span(u)

        def integrand(t, x0, *xp):
            return span.evaluate_array(t, x0, *xp, element=element) ** 2

        return float(self.integrate_box(integrand, t_range, x0_range, span.lengths, cells))

    def snap_cylinder(self, field: SolutionFieldModel, r: float) -> dict:
        """
        Node indices of Q_r on a field grid, with r snapped to the x0 grid
        and r^2 to the time grid.
        """
        grid = field.grid
        if grid.n0 % 2:
            raise QuadratureWindowError("field grid needs a node at x0 = 0 (even n0)")
        i0 = int(round(r / grid.h0))
        jt = int(round(r * r / grid.tau))
        if 2 * i0 < TOLERANCES['min_cells_across']:
            raise QuadratureWindowError(f"r={r!r} spans {2 * i0} cells; need at least {TOLERANCES['min_cells_across']}")
        if i0 > grid.n0 // 2 or jt > grid.nt or jt < 1:
            raise QuadratureWindowError(f"Q_r with r={r!r} does not fit the window T={grid.T!r}, X={grid.X!r}")
        centre = grid.n0 // 2
        return {
            't_slice': slice(grid.nt - jt, grid.nt + 1),
            'x0_slice': slice(centre - i0, centre + i0 + 1),
            'jt': jt,
            'i0': i0,
            'snapped_r': i0 * grid.h0,
            'snapped_r2': jt * grid.tau,
        }

    def integrate_field(self, field: SolutionFieldModel, integrand: np.ndarray, r: float):
        """
        Simpson integral over the snapped Q_r of a nodal array shaped like
        the field values. Returns (value, snap info).
        """
        snap = self.snap_cylinder(field, r)
        grid = field.grid
        w_t = simpson_weights(snap['jt'], grid.tau)
        w_0 = simpson_weights(2 * snap['i0'], grid.h0)
        w_c = simpson_weights(grid.n_cross, grid.h[0])
        block = integrand[snap['t_slice'], snap['x0_slice']]
        value = 0.0
        for wt, slab in zip(w_t, block):
            value += wt * float(w_0 @ slab @ w_c)
        return value, snap

    def gram(self, family, r: float, method: str = CLOSED_FORM, cells: Sequence[int] = None) -> GramMatrixModel:
        """
        Gram matrix of a span (closed form or quadrature) or of a list of
        fields (quadrature).

        Args:
            family: SolutionSpanModel, SeparatedSolutionModel or list of fields.
            r (float): Radius.
            method (str): ``closed_form`` or ``quadrature``.
            cells (Sequence[int]): Quadrature cells override.
        Returns:
            GramMatrixModel: With invariants enforced.
        """
        r = validate_positive("r", r)
        if isinstance(family, (list, tuple)) and family and isinstance(family[0], SolutionFieldModel):
            p = len(family)
            entries = np.zeros((p, p))
            snap = None
            for i in range(p):
                for j in range(i, p):
                    entries[i, j], snap = self.integrate_field(family[i], family[i].values * family[j].values, r)
                    entries[j, i] = entries[i, j]
            gram = GramMatrixModel.from_entries(r, entries, [f"field{i + 1}" for i in range(p)], QUADRATURE,
                                                snap['snapped_r'])
        else:
            span = as_span(family)
            if method == CLOSED_FORM:
                gram = self._closed_gram(span, r, gradient=False)
            elif method == QUADRATURE:
                cells = self._check_cells(cells)
                entries = self._quadrature_entries(span, r, cells)
                gram = GramMatrixModel.from_entries(r, entries, span.ids, QUADRATURE, r)
            else:
                raise PreconditionError(f"unknown Gram method {method!r}")
        gram.assert_invariants(TOLERANCES['symmetry_rel'], TOLERANCES['psd_rel'])
        logger.debug(f"[GRAM] r={r!r} method={gram.method} size={gram.size}")
        return gram

    def _quadrature_entries(self, span: SolutionSpanModel, r: float, cells) -> np.ndarray:
        nt, n0, nc = cells
        p = span.size
        t_nodes, w_t = simpson_nodes(-r * r, 0.0, nt)
        x0_nodes, w_0 = simpson_nodes(-r, r, n0)
        cross_axes, w_c = cross_section_rule(span.lengths, nc)
        mesh = np.meshgrid(x0_nodes, *cross_axes, indexing='ij')
        w_space = np.multiply.outer(w_0, w_c).ravel()
        entries = np.zeros((p, p))
        for t, wt in zip(t_nodes, w_t):
            values = np.stack([span.evaluate_array(t, mesh[0], *mesh[1:], element=a).ravel() for a in range(p)])
            entries += wt * ((values * w_space[np.newaxis, :]) @ values.T)
        return entries

    def annulus_energy(self, u, r: float, R: float, method: str = CLOSED_FORM, cells: Sequence[int] = None,
                       element: int = 0) -> float:
        """
        int over Q_R minus Q_r of u^2, as I_u(R) - I_u(r) from one method.
        """
        r, R = validate_radii(r, R)
        if isinstance(u, SolutionFieldModel):
            outer, _ = self.integrate_field(u, u.values ** 2, R)
            inner, _ = self.integrate_field(u, u.values ** 2, r)
            return outer - inner
        if method == CLOSED_FORM:
            log_outer = self.log_energy(u, R, element)
            log_inner = self.log_energy(u, r, element)
            if not np.isfinite(log_outer):
                return 0.0
            with np.errstate(over='ignore'):
                return float(np.exp(log_outer) * -np.expm1(log_inner - log_outer)) if np.isfinite(log_inner) \
                    else float(np.exp(log_outer))
        outer = self.quadrature_energy_box(u, (-R * R, 0.0), (-R, R), cells, element)
        inner = self.quadrature_energy_box(u, (-r * r, 0.0), (-r, r), cells, element)
        return outer - inner

    def log_annulus_energy(self, u, r: float, R: float, element: int = 0) -> float:
        """log of I_u(R) - I_u(r) in closed form."""
        r, R = validate_radii(r, R)
        log_outer = self.log_energy(u, R, element)
        log_inner = self.log_energy(u, r, element)
        if not np.isfinite(log_outer):
            return -np.inf
        if not np.isfinite(log_inner):
            return log_outer
        return float(log_outer + np.log(-np.expm1(log_inner - log_outer)))

    def annulus_energy_region(self, u, r: float, R: float, cells: Sequence[int] = None, element: int = 0) -> float:
        """
        Direct quadrature of the annulus as three boxes: the bottom slab
        (-R^2, -r^2] x (-R, R) and the two side slabs over (-r^2, 0].
        """
        r, R = validate_radii(r, R)
        bottom = self.quadrature_energy_box(u, (-R * R, -r * r), (-R, R), cells, element)
        left = self.quadrature_energy_box(u, (-r * r, 0.0), (-R, -r), cells, element)
        right = self.quadrature_energy_box(u, (-r * r, 0.0), (r, R), cells, element)
        return bottom + left + right
