from typing import Callable, Optional

import numpy as np

from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import DomainError


class OperatorCoefficientsModel:
    """
    Coefficients of L u = d_i(a^{ij} d_j u) + b^i d_i u + c u on the n = 1 strip.

    The callables take broadcastable coordinate arrays (x0, x1) and return
    arrays of shape (..., 2, 2), (..., 2) and (...).

    Args:
        name (str): Preset name.
        a (Callable): Symmetric principal coefficient.
        b (Callable): First-order coefficient.
        c (Callable): Zeroth-order coefficient.
        lambda_ell (float): Ellipticity lower bound.
        Lambda_ell (float): Bound on |a_ij|.
        eps (float): Smallness budget for b and c.
    """
    def __init__(self, name: str, a: Callable, b: Callable, c: Callable,
                 lambda_ell: float, Lambda_ell: float, eps: float):
        self.name = name
        self.a = a
        self.b = b
        self.c = c
        self.lambda_ell = float(lambda_ell)
        self.Lambda_ell = float(Lambda_ell)
        self.eps = float(eps)

    def to_dict(self) -> dict:
        return {'preset': self.name, 'lambda_ell': self.lambda_ell, 'Lambda_ell': self.Lambda_ell, 'eps': self.eps}


class SolutionFieldModel:
    """
    Discrete solution sampled on every node of a space-time grid; values has
    shape (nt + 1, n0 + 1, n_cross + 1) with time ascending from -T to 0.

    Args:
        grid (SpaceTimeGridModel): Grid of the window.
        values (np.ndarray): Nodal values.
        seed (Optional[int]): Seed of the initial data, when random.
        coefficients (Optional[OperatorCoefficientsModel]): Operator evolved.
    """
    def __init__(self, grid: SpaceTimeGridModel, values: np.ndarray, seed: Optional[int] = None,
                 coefficients: Optional[OperatorCoefficientsModel] = None):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise DomainError(f"field shape {values.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        self.grid = grid
        self.values = values
        self.seed = seed
        self.coefficients = coefficients

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def boundary_max(self) -> float:
        v = self.values
        return float(max(np.max(np.abs(v[:, 0, :])), np.max(np.abs(v[:, -1, :])),
                         np.max(np.abs(v[:, :, 0])), np.max(np.abs(v[:, :, -1]))))
