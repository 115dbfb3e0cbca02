import math
from typing import List, Optional, Sequence

import numpy as np

from models.strip_domain_model import ModeModel
from utils.exceptions import DomainError, PreconditionError

E_D_MEMBER = 'E_d-member'
NOT_ANCIENT_BOUNDED = 'not-ancient-bounded'


class SeparatedSolutionModel:
    """
    Exact ancient solution coeff * exp(alpha x_0 + rho t) * psi_k(x') of the
    heat equation on the strip, with rho = alpha^2 - mu_k.

    Args:
        coeff (float): Amplitude.
        alpha (float): Exponential rate in x_0.
        mode (ModeModel): Cross-section eigenfunction.
        rho (Optional[float]): Temporal rate; recomputed and checked when given.
    """
    def __init__(self, coeff: float, alpha: float, mode: ModeModel, rho: Optional[float] = None):
        self.coeff = float(coeff)
        self.alpha = float(alpha)
        self.mode = mode
        exact = self.alpha ** 2 - mode.mu
        if abs(exact) <= 8.0 * np.finfo(float).eps * mode.mu:
            # alpha = sqrt(mu) up to rounding: the steady profile
            exact = 0.0
        if rho is not None and abs(float(rho) - exact) > 1e-12 * max(1.0, abs(exact)):
            raise DomainError(f"rho={rho!r} does not equal alpha^2 - mu = {exact!r}")
        self.rho = exact

    def evaluate_array(self, t, x0, *xprime) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x0 = np.asarray(x0, dtype=float)
        return self.coeff * np.exp(self.alpha * x0 + self.rho * t) * self.mode.evaluate(*xprime)

    def gradient_array(self, t, x0, *xprime) -> List[np.ndarray]:
        """Spatial gradient (d/dx_0, d/dx_1, ...) in closed form."""
        envelope = self.coeff * np.exp(self.alpha * np.asarray(x0, dtype=float) + self.rho * np.asarray(t, dtype=float))
        grads = [self.alpha * envelope * self.mode.evaluate(*xprime)]
        grads.extend(envelope * g for g in self.mode.gradient(*xprime))
        return grads

    def log_abs_array(self, t, x0, *xprime) -> np.ndarray:
        """log|u|, finite wherever u does not vanish, without overflow."""
        psi = np.abs(self.mode.evaluate(*xprime))
        with np.errstate(divide='ignore'):
            return (math.log(abs(self.coeff)) if self.coeff != 0.0 else -np.inf) \
                + self.alpha * np.asarray(x0, dtype=float) + self.rho * np.asarray(t, dtype=float) + np.log(psi)

    @property
    def key(self):
        return (self.alpha, self.mode.k)

    def scaled(self, factor: float) -> "SeparatedSolutionModel":
        return SeparatedSolutionModel(self.coeff * factor, self.alpha, self.mode)

    def to_dict(self) -> dict:
        return {'coeff': self.coeff, 'alpha': self.alpha, 'k_index': list(self.mode.k), 'rho': self.rho}


class SolutionSpanModel:
    """
    Finite family of span elements, each a fixed combination of separated
    solutions.

    Args:
        basis (Sequence[SeparatedSolutionModel]): Distinct separated solutions.
        coefficients (Optional[np.ndarray]): (elements x basis) combination
            matrix; identity when omitted.
        require_independent (bool): Enforce full row rank of ``coefficients``.
        ids (Optional[Sequence[str]]): Element identifiers.
    """
    def __init__(self, basis: Sequence[SeparatedSolutionModel], coefficients: Optional[np.ndarray] = None,
                 require_independent: bool = True, ids: Optional[Sequence[str]] = None):
        basis = list(basis)
        if not basis:
            raise PreconditionError("a span needs at least one separated solution")
        keys = [b.key for b in basis]
        if len(set(keys)) != len(keys):
            raise DomainError("span basis entries must be pairwise distinct in (alpha, mode)")
        lengths = basis[0].mode.lengths
        if any(b.mode.lengths != lengths for b in basis):
            raise DomainError("span basis entries live on different cross-sections")
        if coefficients is None:
            coefficients = np.eye(len(basis))
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != len(basis):
            raise DomainError(f"coefficient matrix has {coefficients.shape[1]} columns for {len(basis)} basis entries")
        if require_independent:
            s = np.linalg.svd(coefficients, compute_uv=False)
            if s.size < coefficients.shape[0] or s[0] == 0.0 or s[-1] <= 1e-10 * s[0]:
                raise DomainError("span coefficient matrix is not of full row rank")
        self.basis = basis
        self.coefficients = coefficients
        self.lengths = lengths
        self.ids = list(ids) if ids is not None else [f"u{i + 1}" for i in range(coefficients.shape[0])]

    @classmethod
    def of(cls, solutions: Sequence[SeparatedSolutionModel]) -> "SolutionSpanModel":
        return cls(solutions)

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]

    def weights(self) -> np.ndarray:
        """Element-by-basis weights including the basis amplitudes."""
        return self.coefficients * np.array([b.coeff for b in self.basis])[np.newaxis, :]

    def select(self, index: int) -> "SolutionSpanModel":
        return SolutionSpanModel(self.basis, self.coefficients[index:index + 1], require_independent=False,
                                 ids=[self.ids[index]])

    def scaled(self, factor: float) -> "SolutionSpanModel":
        return SolutionSpanModel([b.scaled(factor) for b in self.basis], self.coefficients,
                                 require_independent=False, ids=self.ids)

    def evaluate_array(self, t, x0, *xprime, element: int = 0) -> np.ndarray:
        w = self.weights()[element]
        total = 0.0
        for wj, b in zip(w, self.basis):
            if wj != 0.0:
                total = total + wj * np.exp(b.alpha * np.asarray(x0, dtype=float) + b.rho * np.asarray(t, dtype=float)) \
                    * b.mode.evaluate(*xprime)
        return total + np.zeros(np.broadcast(np.asarray(t), np.asarray(x0), *[np.asarray(x) for x in xprime]).shape)

    def gradient_array(self, t, x0, *xprime, element: int = 0) -> List[np.ndarray]:
        shape = np.broadcast(np.asarray(t), np.asarray(x0), *[np.asarray(x) for x in xprime]).shape
        grads = [np.zeros(shape) for _ in range(1 + len(xprime))]
        for cj, b in zip(self.coefficients[element], self.basis):
            if cj != 0.0:
                for axis, g in enumerate(b.gradient_array(t, x0, *xprime)):
                    grads[axis] = grads[axis] + cj * g
        return grads

    @property
    def d_min(self) -> float:
        used = np.any(self.coefficients != 0.0, axis=0)
        return float(max(abs(b.alpha) for b, u in zip(self.basis, used) if u)) if np.any(used) else 0.0

    def to_dict(self) -> dict:
        return {
            'basis': [b.to_dict() for b in self.basis],
            'coefficients': self.coefficients.tolist(),
            'ids': list(self.ids),
        }


class ConstantSolutionModel:
    """
    Constant function, a local caloric function without boundary condition.

    Args:
        value (float): The constant.
    """
    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def evaluate_array(self, t, x0, *xprime) -> np.ndarray:
        shape = np.broadcast(np.asarray(t), np.asarray(x0), *[np.asarray(x) for x in xprime]).shape
        return np.full(shape, self.value)


class HeatKernelSourceModel:
    """
    Whole-space heat kernel in R^{n+1} with pole (s, y).

    Args:
        s (float): Pole time.
        y (Sequence[float]): Pole position (y_0, y').
    """
    def __init__(self, s: float, y: Sequence[float]):
        self.s = float(s)
        self.y = tuple(float(v) for v in y)
        self.dim = len(self.y)

    def evaluate_array(self, t, x0, *xprime) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        dt = t - self.s
        coords = (x0,) + tuple(xprime)
        dist2 = 0.0
        for x, y in zip(coords, self.y):
            dist2 = dist2 + (np.asarray(x, dtype=float) - y) ** 2
        with np.errstate(divide='ignore', invalid='ignore'):
            value = (4.0 * math.pi * dt) ** (-0.5 * self.dim) * np.exp(-dist2 / (4.0 * dt))
        return np.where(dt > 0.0, value, 0.0)


class GrowthClassModel:
    """
    Membership of a separated solution in the exponential growth classes.

    Args:
        kind (str): ``E_d-member`` or ``not-ancient-bounded``.
        d_min (Optional[float]): Smallest admissible exponent when a member.
        C (Optional[float]): Witness constant |coeff| * sup|psi_k|.
    """
    def __init__(self, kind: str, d_min: Optional[float] = None, C: Optional[float] = None):
        self.kind = kind
        self.d_min = d_min
        self.C = C

    @property
    def is_member(self) -> bool:
        return self.kind == E_D_MEMBER

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'd_min': self.d_min, 'C': self.C}
