import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from config.settings import TOLERANCES
from controller.spectrum_controller import SpectrumController
from models.solution_model import (E_D_MEMBER, NOT_ANCIENT_BOUNDED, GrowthClassModel,
                                   SeparatedSolutionModel, SolutionSpanModel)
from models.strip_domain_model import ModeModel, SpaceTimeGridModel, StripDomainModel
from utils.exceptions import PreconditionError
from utils.validators import validate_count, validate_positive, validate_time

logger = logging.getLogger(__name__)

ClosedForm = Union[SeparatedSolutionModel, SolutionSpanModel]


def as_span(u: ClosedForm) -> SolutionSpanModel:
    """Wrap a separated solution as a one-element span."""
    if isinstance(u, SolutionSpanModel):
        return u
    return SolutionSpanModel([u], ids=['u1'])


class SolutionController:
    """
    Exact separated ancient solutions, their spans and growth classes.

    Args:
        spectrum (SpectrumController): Source of cross-section modes.
    """

    def __init__(self, spectrum: SpectrumController = None):
        self.spectrum = spectrum or SpectrumController()
        logger.info("[INIT] SolutionController initialized")

    def separated(self, domain: StripDomainModel, alpha: float, k_index: int = 1, coeff: float = 1.0) -> SeparatedSolutionModel:
        mode = self.spectrum.first_mode(domain, k_index)
        return SeparatedSolutionModel(coeff, alpha, mode)

    def evaluate(self, u: ClosedForm, t: float, x: Sequence[float], element: int = 0) -> float:
        """
        Closed-form value u(t, x) with x = (x0, x').

        Args:
            u: Separated solution or span.
            t (float): Time, t <= 0.
            x (Sequence[float]): Point (x0, x_1, ..., x_n).
            element (int): Span element index.
        Returns:
            float: The value, exactly 0 on the lateral boundary.
        """
        t = validate_time(t)
        span = as_span(u)
        if len(x) != 1 + len(span.lengths):
            raise PreconditionError(f"point {tuple(x)!r} has the wrong dimension")
        return float(span.evaluate_array(t, x[0], *x[1:], element=element))

    def classify_growth(self, u: SeparatedSolutionModel) -> GrowthClassModel:
        """
        E_d membership of a separated solution: member iff rho >= 0, with
        d_min = |alpha| and witness C = |coeff| * sup|psi_k|.
        """
        if u.rho >= 0.0:
            return GrowthClassModel(E_D_MEMBER, abs(u.alpha), abs(u.coeff) * u.mode.sup_abs)
        return GrowthClassModel(NOT_ANCIENT_BOUNDED)

    def _sample(self, span: SolutionSpanModel, grid: SpaceTimeGridModel, element: int) -> np.ndarray:
        axes = (grid.t_nodes, grid.x0_nodes) + grid.cross_nodes
        mesh = np.meshgrid(*axes, indexing='ij')
        return span.evaluate_array(mesh[0], mesh[1], *mesh[2:], element=element)

    @staticmethod
    def _backward_euler_residual(values: np.ndarray, grid: SpaceTimeGridModel) -> float:
        u_new = values[1:]
        u_old = values[:-1]
        interior = (slice(None),) + tuple(slice(1, -1) for _ in range(values.ndim - 1))
        res = (u_new - u_old)[interior] / grid.tau
        spacings = (grid.h0,) + tuple(grid.h)
        for axis, h in enumerate(spacings, start=1):
            plus = [slice(None)] + [slice(1, -1)] * (values.ndim - 1)
            minus = list(plus)
            plus[axis] = slice(2, None)
            minus[axis] = slice(None, -2)
            res = res - (u_new[tuple(plus)] - 2.0 * u_new[interior] + u_new[tuple(minus)]) / h ** 2
        return float(np.max(np.abs(res))) if res.size else 0.0

    def verify_pde_residual(self, u: ClosedForm, grid: SpaceTimeGridModel, element: int = 0) -> dict:
        """
        Max residual of the implicit-level discrete (d_t - Delta) applied to
        samples of u, on ``grid`` and on ``grid.refined()``, with the measured
        order in h.
        """
        span = as_span(u)
        res = self._backward_euler_residual(self._sample(span, grid, element), grid)
        fine = grid.refined()
        res_fine = self._backward_euler_residual(self._sample(span, fine, element), fine)
        order = math.log2(res / res_fine) if res > 0.0 and res_fine > 0.0 else None
        logger.info(f"[SOLUTION] PDE residual {res!r} -> {res_fine!r} (order {order!r})")
        return {'residual': res, 'residual_refined': res_fine, 'order': order, 'grid': grid.to_dict()}

    def build_continuum_family(self, domain: StripDomainModel, d: float, N: int,
                               modes: Optional[List[ModeModel]] = None) -> SolutionSpanModel:
        """
        N unit-coefficient solutions with alpha equally spaced in [sqrt(mu), d],
        on the first mode unless explicit modes are given (cycled).

        Args:
            domain (StripDomainModel): Strip.
            d (float): Growth exponent.
            N (int): Family size (>= 2).
            modes (Optional[List[ModeModel]]): Modes to use instead of the first.
        Returns:
            SolutionSpanModel: The family.
        """
        d = validate_positive("d", d)
        N = validate_count("N", N, 2)
        modes = modes or [self.spectrum.first_mode(domain)]
        members = []
        for j in range(N):
            mode = modes[j % len(modes)]
            low = math.sqrt(mode.mu)
            if d <= low * (1.0 + 1e-12):
                raise PreconditionError(f"d={d!r} must exceed sqrt(mu)={low!r} for a nonempty E_d probe family")
            per_mode = len(range(j % len(modes), N, len(modes)))
            slot = j // len(modes)
            alpha = low + (d - low) * slot / (per_mode - 1) if per_mode > 1 else d
            if slot == per_mode - 1:
                alpha = d
            members.append(SeparatedSolutionModel(1.0, alpha, mode))
        logger.info(f"[SOLUTION] Continuum family: N={N}, d={d!r}")
        return SolutionSpanModel(members)

    def build_probe_family(self, domain: StripDomainModel, d: float, count: int) -> SolutionSpanModel:
        """
        ``count`` distinct E_d solutions spread round-robin over every mode
        with mu <= d^2 and both signs of alpha, equally spaced in
        |alpha| in [sqrt(mu), d] within each slot.
        """
        d = validate_positive("d", d)
        modes = self.spectrum.box_eigenpairs(domain, d * d)
        if not modes:
            raise PreconditionError(f"no mode with mu <= d^2 = {d * d!r}: E_d probe set is empty")
        # modes with mu at d^2 admit only alpha = d
        modes = [mode for mode in modes if d - math.sqrt(mode.mu) > TOLERANCES['spectrum_rel'] * d] or modes
        slots = [(mode, sign) for mode in modes for sign in (1.0, -1.0)]
        per_slot = [len(range(i, count, len(slots))) for i in range(len(slots))]
        members = []
        for (mode, sign), size in zip(slots, per_slot):
            low = math.sqrt(mode.mu)
            if size == 0:
                continue
            if size > 1 and d - low <= 0.0:
                raise PreconditionError(f"mode {mode.k} admits a single alpha, cannot place {size} probes")
            for j in range(size):
                alpha = low + (d - low) * j / (size - 1) if size > 1 else d
                members.append(SeparatedSolutionModel(1.0, sign * alpha, mode))
        logger.info(f"[SOLUTION] Probe family: {len(members)} solutions over {len(modes)} modes")
        return SolutionSpanModel(members)

    def sampled_growth_excess(self, u: SeparatedSolutionModel, d: float, R: float, samples: int = 33) -> float:
        """
        max over a Q_R sample grid of log|u| - log C - d(|x| + |t|^(1/2));
        non-positive when the E_d bound holds there.
        """
        growth = self.classify_growth(u)
        C = growth.C if growth.C is not None else abs(u.coeff) * u.mode.sup_abs
        t, x0, xp = self._cylinder_samples(u, R, samples)
        log_u = u.log_abs_array(t, x0, *xp)
        norm_x = np.sqrt(x0 ** 2 + sum(x ** 2 for x in xp))
        with np.errstate(divide='ignore'):
            excess = log_u - math.log(C) - d * (norm_x + np.sqrt(-t))
        return float(np.max(excess))

    @staticmethod
    def _cylinder_samples(u: SeparatedSolutionModel, R: float, samples: int):
        t_axis = np.linspace(-R * R, 0.0, samples)
        x0_axis = np.linspace(-R, R, samples)
        cross = [np.linspace(0.0, L, 9)[1:-1] for L in u.mode.lengths]
        mesh = np.meshgrid(t_axis, x0_axis, *cross, indexing='ij')
        return mesh[0], mesh[1], mesh[2:]

    def polynomial_growth_probe(self, u: SeparatedSolutionModel, d: float,
                                radii: Sequence[float] = (2.0, 4.0, 8.0, 16.0), samples: int = 17) -> dict:
        """
        Fit C on the smallest cylinder so that |u| <= C(|x| + |t|^(1/2) + 1)^d
        there, then look for a sample on the larger cylinders breaking it.

        Returns:
            dict: ``violation`` (None or (R, t, x0, x')) and the fitted log C.
        """
        radii = sorted(float(R) for R in radii)
        if u.coeff == 0.0:
            return {'violation': None, 'log_C': None, 'd': d, 'radii': radii}

        def log_envelope(t, x0, xp):
            norm_x = np.sqrt(x0 ** 2 + sum(x ** 2 for x in xp))
            return d * np.log(norm_x + np.sqrt(-t) + 1.0)

        t, x0, xp = self._cylinder_samples(u, radii[0], samples)
        log_C = float(np.max(u.log_abs_array(t, x0, *xp) - log_envelope(t, x0, xp)))
        for R in radii[1:]:
            t, x0, xp = self._cylinder_samples(u, R, samples)
            excess = u.log_abs_array(t, x0, *xp) - log_envelope(t, x0, xp) - log_C
            idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
            if excess[idx] > 0.0:
                point = (float(R), float(t[idx]), float(x0[idx])) + tuple(float(x[idx]) for x in xp)
                logger.info(f"[SOLUTION] Polynomial bound of degree {d!r} broken at {point!r}")
                return {'violation': point, 'log_C': log_C, 'd': d, 'radii': radii,
                        'log_excess': float(excess[idx])}
        logger.warning(f"[WARN] No polynomial-bound violation found for degree {d!r}")
        return {'violation': None, 'log_C': log_C, 'd': d, 'radii': radii}
