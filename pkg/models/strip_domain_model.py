import math
from typing import Sequence, Tuple

import numpy as np

from utils.exceptions import DomainError
from utils.validators import validate_positive


class StripDomainModel:
    """
    The strip R x Omega_0 with box cross-section Omega_0 = (0, L_1) x ... x (0, L_n).

    Args:
        n (int): Cross-section dimension (1 or 2).
        lengths (Sequence[float]): Side lengths L_1..L_n.
        X (float): Truncation half-width used by finite-difference work.
    """
    def __init__(self, n: int = 1, lengths: Sequence[float] = (1.0,), X: float = 4.0):
        if n not in (1, 2):
            raise DomainError(f"cross-section dimension must be 1 or 2, got {n!r}")
        lengths = tuple(validate_positive("L", L) for L in lengths)
        if len(lengths) != n:
            raise DomainError(f"expected {n} lengths, got {len(lengths)}")
        self.n = n
        self.lengths = lengths
        self.X = validate_positive("X", X)
        self.V0 = float(np.prod(lengths))

    @property
    def mu1(self) -> float:
        """First Dirichlet eigenvalue of the cross-section."""
        return float(sum((math.pi / L) ** 2 for L in self.lengths))

    @property
    def diameter(self) -> float:
        return float(math.sqrt(sum(L * L for L in self.lengths)))

    def to_dict(self) -> dict:
        return {'n': self.n, 'lengths': list(self.lengths), 'X': self.X, 'V0': self.V0}


class ParabolicCylinderModel:
    """
    Q_r = (-r^2, 0] x (-r, r) x Omega_0.

    Args:
        r (float): Radius.
    """
    def __init__(self, r: float):
        self.r = validate_positive("r", r)

    def volume(self, V0: float) -> float:
        return 2.0 * self.r ** 3 * V0

    def contains(self, t: float, x0: float) -> bool:
        return -self.r ** 2 < t <= 0.0 and abs(x0) < self.r


class ParabolicBallModel:
    """
    P_r(t, x) = (t - r^2, t] x B_r(x), x in R^{n+1}.

    Args:
        t (float): Top time of the ball.
        x (Sequence[float]): Spatial centre (x_0, x').
        r (float): Radius.
    """
    def __init__(self, t: float, x: Sequence[float], r: float):
        self.t = float(t)
        self.x = tuple(float(v) for v in x)
        self.r = validate_positive("r", r)

    def contains(self, t: float, x: Sequence[float]) -> bool:
        dist2 = sum((a - b) ** 2 for a, b in zip(x, self.x))
        return self.t - self.r ** 2 < t <= self.t and dist2 < self.r ** 2


class SpaceTimeGridModel:
    """
    Uniform node grid on (-T, 0] x [-X, X] x Omega_0.

    Node counts are cells + 1 per axis; the cross-section nodes include both
    faces of the box.

    Args:
        T (float): Time depth of the window.
        X (float): Half-width in x_0.
        lengths (Sequence[float]): Cross-section side lengths.
        nt (int): Time steps.
        n0 (int): Cells in x_0.
        n_cross (int): Cells per cross-section axis.
    """
    def __init__(self, T: float, X: float, lengths: Sequence[float], nt: int, n0: int, n_cross: int):
        self.T = validate_positive("T", T)
        self.X = validate_positive("X", X)
        self.lengths = tuple(validate_positive("L", L) for L in lengths)
        for name, count in (("nt", nt), ("n0", n0), ("n_cross", n_cross)):
            if int(count) != count or count < 2:
                raise DomainError(f"{name} must give at least 3 nodes, got {count!r} cells")
        self.nt = int(nt)
        self.n0 = int(n0)
        self.n_cross = int(n_cross)
        self.tau = self.T / self.nt
        self.h0 = 2.0 * self.X / self.n0
        self.h = tuple(L / self.n_cross for L in self.lengths)

    @classmethod
    def from_spacing(cls, T: float, X: float, lengths: Sequence[float], tau: float, h0: float, h: float):
        """
        Build a grid from spacings; every extent must be an integer multiple
        of its spacing.
        """
        def cells(extent, step, name):
            count = extent / step
            if abs(count - round(count)) > 1e-9 * max(1.0, count):
                raise DomainError(f"{name}: extent {extent!r} is not a multiple of spacing {step!r}")
            return int(round(count))

        nt = cells(T, tau, "T/tau")
        n0 = cells(2.0 * X, h0, "2X/h0")
        n_cross = cells(lengths[0], h, "L/h")
        for L in lengths[1:]:
            if cells(L, h, "L/h") != n_cross:
                raise DomainError("uniform cross-section spacing needs equal side lengths")
        return cls(T, X, lengths, nt, n0, n_cross)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(-self.T, 0.0, self.nt + 1)

    @property
    def x0_nodes(self) -> np.ndarray:
        return np.linspace(-self.X, self.X, self.n0 + 1)

    @property
    def cross_nodes(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.linspace(0.0, L, self.n_cross + 1) for L in self.lengths)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.nt + 1, self.n0 + 1) + tuple(self.n_cross + 1 for _ in self.lengths)

    def refined(self) -> "SpaceTimeGridModel":
        """Halve the spatial spacings and quarter the time step."""
        return SpaceTimeGridModel(self.T, self.X, self.lengths, 4 * self.nt, 2 * self.n0, 2 * self.n_cross)

    def to_dict(self) -> dict:
        return {
            'T': self.T, 'X': self.X, 'lengths': list(self.lengths),
            'nt': self.nt, 'n0': self.n0, 'n_cross': self.n_cross,
            'tau': self.tau, 'h0': self.h0, 'h': list(self.h),
        }


class ModeModel:
    """
    Dirichlet eigenfunction psi_k(x') = prod sqrt(2/L_i) sin(k_i pi x_i / L_i).

    Args:
        k (Sequence[int]): Multi-index of positive integers.
        lengths (Sequence[float]): Cross-section side lengths.
    """
    def __init__(self, k: Sequence[int], lengths: Sequence[float]):
        k = tuple(int(v) for v in k)
        if len(k) != len(lengths) or any(v < 1 for v in k):
            raise DomainError(f"mode index {k!r} does not fit lengths {tuple(lengths)!r}")
        self.k = k
        self.lengths = tuple(float(L) for L in lengths)
        self.mu = float(sum((ki * math.pi / L) ** 2 for ki, L in zip(k, self.lengths)))
        self.normalization = float(np.prod([math.sqrt(2.0 / L) for L in self.lengths]))

    @property
    def sup_abs(self) -> float:
        return self.normalization

    def _inside(self, coords, closed: bool = False) -> np.ndarray:
        mask = True
        for x, L in zip(coords, self.lengths):
            if closed:
                mask = np.logical_and(mask, np.logical_and(x >= 0.0, x <= L))
            else:
                mask = np.logical_and(mask, np.logical_and(x > 0.0, x < L))
        return mask

    def evaluate(self, *coords) -> np.ndarray:
        """psi_k at broadcastable coordinate arrays, exactly 0 on and outside the faces."""
        coords = [np.asarray(x, dtype=float) for x in coords]
        value = self.normalization
        for x, ki, L in zip(coords, self.k, self.lengths):
            value = value * np.sin(ki * math.pi * x / L)
        return np.where(self._inside(coords), value, 0.0)

    def gradient(self, *coords):
        """Closed-form cross-section gradient, one array per axis."""
        coords = [np.asarray(x, dtype=float) for x in coords]
        inside = self._inside(coords, closed=True)
        sines = [np.sin(ki * math.pi * x / L) for x, ki, L in zip(coords, self.k, self.lengths)]
        grads = []
        for axis, (x, ki, L) in enumerate(zip(coords, self.k, self.lengths)):
            g = self.normalization * (ki * math.pi / L) * np.cos(ki * math.pi * x / L)
            for other, s in enumerate(sines):
                if other != axis:
                    g = g * s
            grads.append(np.where(inside, g, 0.0))
        return grads

    def to_dict(self) -> dict:
        return {'k_index': list(self.k), 'mu': self.mu, 'normalization': self.normalization}
