import logging
import math
from typing import Dict, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from config.settings import OPERATOR_PRESETS, RAYLEIGH_DIRECTIONS, TOLERANCES
from models.field_model import OperatorCoefficientsModel, SolutionFieldModel
from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import CoefficientError, DomainError, PreconditionError, SolverError

logger = logging.getLogger(__name__)

IMPLICIT_EULER = 'implicit_euler'
CRANK_NICOLSON = 'crank_nicolson'


def _identity_a(x0, x1):
    shape = np.broadcast(np.asarray(x0), np.asarray(x1)).shape
    return np.broadcast_to(np.eye(2), shape + (2, 2)).copy()


def _modulated_a(x0, x1):
    x0, x1 = np.broadcast_arrays(np.asarray(x0, dtype=float), np.asarray(x1, dtype=float))
    return (1.0 + 0.1 * np.sin(x0))[..., np.newaxis, np.newaxis] * np.eye(2)


def _sheared_a(x0, x1):
    x0, x1 = np.broadcast_arrays(np.asarray(x0, dtype=float), np.asarray(x1, dtype=float))
    a = np.zeros(x0.shape + (2, 2))
    a[..., 0, 0] = 1.0
    a[..., 1, 1] = 1.0
    a[..., 0, 1] = a[..., 1, 0] = 0.1 * np.cos(x0)
    return a


def _zero_b(x0, x1):
    return np.zeros(np.broadcast(np.asarray(x0), np.asarray(x1)).shape + (2,))


def _zero_c(x0, x1):
    return np.zeros(np.broadcast(np.asarray(x0), np.asarray(x1)).shape)


def _sheared_b(x0, x1):
    b = _zero_b(x0, x1)
    b[..., 0] = 0.05
    return b


def _sheared_c(x0, x1):
    return _zero_c(x0, x1) - 0.1


PRESET_FUNCTIONS = {
    'laplacian': (_identity_a, _zero_b, _zero_c),
    'modulated': (_modulated_a, _zero_b, _zero_c),
    'sheared': (_sheared_a, _sheared_b, _sheared_c),
}


def _plane_directions() -> np.ndarray:
    """Unit (xi_0, xi_1) directions obtained from the 26 sphere samples."""
    seen = []
    for d in RAYLEIGH_DIRECTIONS:
        v = (d[0], d[1])
        if v != (0, 0) and v not in seen:
            seen.append(v)
    dirs = np.array(seen, dtype=float)
    return dirs / np.linalg.norm(dirs, axis=1)[:, np.newaxis]


class FdSolverController:
    """
    Finite-difference evolution of (d_t - L) u = 0 on (-T, 0] x [-X, X] x (0, L)
    with zero Dirichlet data on every spatial boundary.
    """

    def __init__(self):
        self.directions = _plane_directions()
        logger.info("[INIT] FdSolverController initialized")

    def coefficients(self, preset: str = 'laplacian', lambda_ell: Optional[float] = None,
                     Lambda_ell: Optional[float] = None, eps: Optional[float] = None) -> OperatorCoefficientsModel:
        """
        Coefficients of a named preset; the bounds default to those the
        preset declares.
        """
        if preset not in PRESET_FUNCTIONS:
            raise PreconditionError(f"unknown operator preset {preset!r}")
        declared = OPERATOR_PRESETS[preset]
        a, b, c = PRESET_FUNCTIONS[preset]
        return OperatorCoefficientsModel(
            preset, a, b, c,
            declared['lambda_ell'] if lambda_ell is None else lambda_ell,
            declared['Lambda_ell'] if Lambda_ell is None else Lambda_ell,
            declared['eps'] if eps is None else eps,
        )

    @staticmethod
    def _check_grid(grid: SpaceTimeGridModel):
        if len(grid.lengths) != 1:
            raise DomainError("the finite-difference path supports n = 1 cross-sections only")

    def validate_coefficients(self, coeffs: OperatorCoefficientsModel, grid: SpaceTimeGridModel,
                              raise_on_fail: bool = False) -> Dict:
        """
        Sample a, b, c at every spatial node and test the ellipticity,
        boundedness and smallness bounds.

        Args:
            coeffs (OperatorCoefficientsModel): Operator.
            grid (SpaceTimeGridModel): Sampling grid.
            raise_on_fail (bool): Raise CoefficientError at the first bad node.
        Returns:
            Dict: Sampled extremes, pass flag and the first violating node.
        """
        self._check_grid(grid)
        X0, X1 = np.meshgrid(grid.x0_nodes, grid.cross_nodes[0], indexing='ij')
        a = coeffs.a(X0, X1)
        b = coeffs.b(X0, X1)
        c = coeffs.c(X0, X1)
        rayleigh = np.einsum('di,...ij,dj->...d', self.directions, a, self.directions)
        rayleigh_min = rayleigh.min(axis=-1)
        a_abs = np.abs(a).max(axis=(-2, -1))
        b_norm = np.linalg.norm(b, axis=-1)

        bad = (rayleigh_min < coeffs.lambda_ell * (1.0 - 1e-14)) \
            | (a_abs > coeffs.Lambda_ell * (1.0 + 1e-14)) \
            | (b_norm > math.sqrt(max(coeffs.eps, 0.0)) * (1.0 + 1e-14)) \
            | (c > coeffs.eps) \
            | (np.abs(a[..., 0, 1] - a[..., 1, 0]) > 0.0)
        report = {
            'check': 'coefficients',
            'preset': coeffs.name,
            'rayleigh_min': float(rayleigh_min.min()),
            'a_abs_max': float(a_abs.max()),
            'b_max': float(b_norm.max()),
            'c_max': float(c.max()),
            'lambda_ell': coeffs.lambda_ell,
            'Lambda_ell': coeffs.Lambda_ell,
            'eps': coeffs.eps,
            'passed': not bool(np.any(bad)),
            'first_violation': None,
        }
        if np.any(bad):
            i, j = (int(v) for v in np.argwhere(bad)[0])
            node = (i, j, float(grid.x0_nodes[i]), float(grid.cross_nodes[0][j]))
            report['first_violation'] = list(node)
            logger.error(f"[ERRO] Coefficients of '{coeffs.name}' violate their bounds at node {node}")
            if raise_on_fail:
                raise CoefficientError(
                    f"rayleigh={float(rayleigh_min[i, j])!r} (lambda={coeffs.lambda_ell!r}), "
                    f"max|a|={float(a_abs[i, j])!r} (Lambda={coeffs.Lambda_ell!r}), "
                    f"|b|={float(b_norm[i, j])!r}, c={float(c[i, j])!r} (eps={coeffs.eps!r})", node=node)
        else:
            logger.info(f"[OK] Coefficients '{coeffs.name}' pass (min Rayleigh {report['rayleigh_min']!r})")
        return report

    def assemble_operator(self, coeffs: OperatorCoefficientsModel, grid: SpaceTimeGridModel) -> sparse.csc_matrix:
        """
        Conservative nine-point discretization of L on the interior nodes,
        row-major over (x0, x1).
        """
        self._check_grid(grid)
        h0, h1 = grid.h0, grid.h[0]
        m0, m1 = grid.n0 - 1, grid.n_cross - 1
        I, J = np.meshgrid(np.arange(1, grid.n0), np.arange(1, grid.n_cross), indexing='ij')
        X0 = grid.x0_nodes[I]
        X1 = grid.cross_nodes[0][J]

        a_e = coeffs.a(X0 + 0.5 * h0, X1)[..., 0, 0]
        a_w = coeffs.a(X0 - 0.5 * h0, X1)[..., 0, 0]
        a_n = coeffs.a(X0, X1 + 0.5 * h1)[..., 1, 1]
        a_s = coeffs.a(X0, X1 - 0.5 * h1)[..., 1, 1]
        c_east = coeffs.a(X0 + h0, X1)[..., 0, 1]
        c_west = coeffs.a(X0 - h0, X1)[..., 0, 1]
        c_north = coeffs.a(X0, X1 + h1)[..., 0, 1]
        c_south = coeffs.a(X0, X1 - h1)[..., 0, 1]
        b = coeffs.b(X0, X1)
        c = coeffs.c(X0, X1)
        q = 1.0 / (4.0 * h0 * h1)

        stencil = {
            (0, 0): -(a_e + a_w) / h0 ** 2 - (a_n + a_s) / h1 ** 2 + c,
            (1, 0): a_e / h0 ** 2 + b[..., 0] / (2.0 * h0),
            (-1, 0): a_w / h0 ** 2 - b[..., 0] / (2.0 * h0),
            (0, 1): a_n / h1 ** 2 + b[..., 1] / (2.0 * h1),
            (0, -1): a_s / h1 ** 2 - b[..., 1] / (2.0 * h1),
            (1, 1): q * (c_east + c_north),
            (1, -1): -q * (c_east + c_south),
            (-1, 1): -q * (c_west + c_north),
            (-1, -1): q * (c_west + c_south),
        }
        rows, cols, data = [], [], []
        row_index = (I - 1) * m1 + (J - 1)
        for (di, dj), weight in stencil.items():
            Ti, Tj = I + di, J + dj
            inside = (Ti >= 1) & (Ti <= m0) & (Tj >= 1) & (Tj <= m1) & (weight != 0.0)
            rows.append(row_index[inside])
            cols.append(((Ti - 1) * m1 + (Tj - 1))[inside])
            data.append(weight[inside])
        size = m0 * m1
        return sparse.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(size, size)).tocsc()

    def evolve(self, coeffs: OperatorCoefficientsModel, initial: np.ndarray, grid: SpaceTimeGridModel,
               scheme: str = IMPLICIT_EULER, seed: Optional[int] = None) -> SolutionFieldModel:
        """
        March ``initial`` (values at t = -T on the spatial nodes) to t = 0.

        The step matrix is factored once with a sparse LU; every step's
        relative residual must stay below the solver tolerance.

        Args:
            coeffs (OperatorCoefficientsModel): Operator, validated first.
            initial (np.ndarray): (n0 + 1, n_cross + 1) nodal values.
            grid (SpaceTimeGridModel): Space-time grid.
            scheme (str): ``implicit_euler`` or ``crank_nicolson``.
            seed (Optional[int]): Recorded on the field.
        Returns:
            SolutionFieldModel: All time levels, boundaries exactly zero.
        """
        if scheme not in (IMPLICIT_EULER, CRANK_NICOLSON):
            raise PreconditionError(f"unknown time scheme {scheme!r}")
        self.validate_coefficients(coeffs, grid, raise_on_fail=True)
        initial = np.array(initial, dtype=float)
        spatial_shape = grid.shape[1:]
        if initial.shape != spatial_shape:
            raise DomainError(f"initial data shape {initial.shape} does not match {spatial_shape}")
        if np.any(initial[[0, -1], :] != 0.0) or np.any(initial[:, [0, -1]] != 0.0):
            logger.warning("[WARN] Initial data nonzero on the boundary; boundary nodes set to zero")

        A = self.assemble_operator(coeffs, grid)
        eye = sparse.identity(A.shape[0], format='csc')
        if scheme == IMPLICIT_EULER:
            lhs = (eye - grid.tau * A).tocsc()
            rhs_op = None
        else:
            lhs = (eye - 0.5 * grid.tau * A).tocsc()
            rhs_op = (eye + 0.5 * grid.tau * A).tocsr()
        try:
            lu = splu(lhs)
        except RuntimeError as e:
            logger.error(f"[ERRO] Step matrix factorization failed: {e}")
            raise SolverError(f"step matrix is singular: {e}", step=0)

        values = np.zeros(grid.shape)
        u = initial[1:-1, 1:-1].ravel()
        values[0, 1:-1, 1:-1] = initial[1:-1, 1:-1]
        tol = TOLERANCES['solver_residual_rel']
        for step in range(1, grid.nt + 1):
            rhs = u if rhs_op is None else rhs_op @ u
            u_next = lu.solve(rhs)
            scale = float(np.max(np.abs(rhs))) if rhs.size else 0.0
            if scale > 0.0:
                residual = float(np.max(np.abs(lhs @ u_next - rhs))) / scale
                if not np.isfinite(residual) or residual > tol:
                    logger.error(f"[ERRO] Linear solve residual {residual!r} at step {step}")
                    raise SolverError(f"relative residual {residual!r} exceeds {tol!r}", step=step)
            u = u_next
            values[step, 1:-1, 1:-1] = u.reshape(grid.n0 - 1, grid.n_cross - 1)
            logger.debug(f"[FD] step {step}/{grid.nt} max|u|={float(np.max(np.abs(u))) if u.size else 0.0!r}")
        logger.info(f"[FD] Evolved '{coeffs.name}' with {scheme} over {grid.nt} steps")
        return SolutionFieldModel(grid, values, seed=seed, coefficients=coeffs)

    @staticmethod
    def discrete_gradient(field: SolutionFieldModel):
        """
        (d/dx0, d/dx1) at every node: centered inside, second-order one-sided
        at the boundary.
        """
        grid = field.grid
        g0 = np.gradient(field.values, grid.h0, axis=1, edge_order=2)
        g1 = np.gradient(field.values, grid.h[0], axis=2, edge_order=2)
        return g0, g1

    @staticmethod
    def seeded_bump(grid: SpaceTimeGridModel, seed: int, bumps: int = 3, windowed: bool = True) -> np.ndarray:
        """
        Random initial data: Gaussians in x0 times sin(k pi x1 / L), drawn
        from a PCG64 generator, zero on every boundary node.
        """
        rng = np.random.default_rng(seed)
        x0 = grid.x0_nodes
        x1 = grid.cross_nodes[0]
        L = grid.lengths[0]
        X0, X1 = np.meshgrid(x0, x1, indexing='ij')
        values = np.zeros(X0.shape)
        for _ in range(bumps):
            centre = rng.uniform(-0.5 * grid.X, 0.5 * grid.X)
            width = rng.uniform(0.3, 1.0)
            amplitude = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
            k = int(rng.integers(1, 4))
            values += amplitude * np.exp(-((X0 - centre) / width) ** 2) * np.sin(k * math.pi * X1 / L)
        if windowed:
            values *= (1.0 - (X0 / grid.X) ** 2) ** 2
        values[[0, -1], :] = 0.0
        values[:, [0, -1]] = 0.0
        return values
