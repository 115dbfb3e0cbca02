from typing import List, Optional, Sequence

import numpy as np

from utils.exceptions import InvariantViolation
from utils.linalg import eig_ratio

CLOSED_FORM = 'closed_form'
QUADRATURE = 'quadrature'


class GramMatrixModel:
    """
    J_r restricted to a finite family, stored as a unit-diagonal matrix plus
    per-element log scales so that energies far beyond the float range stay
    representable: entries[i, j] = exp(log_scale[i] + log_scale[j]) * normalized[i, j].

    ``log_scale`` splits into ``log_weight`` (amplitude of the element's
    combination) and the shape part, so ratios of energies of the same element
    at two radii never see the amplitude.

    Args:
        r (float): Requested radius.
        normalized (np.ndarray): Unit-diagonal symmetric matrix (zero rows for
            zero elements).
        log_scale (np.ndarray): Half log-energy of each element.
        basis_ids (Sequence[str]): Element identifiers.
        method (str): ``closed_form`` or ``quadrature``.
        snapped_r (Optional[float]): Radius actually integrated.
        log_weight (Optional[np.ndarray]): Amplitude part of ``log_scale``.
        shape_scale (Optional[np.ndarray]): Shape part of ``log_scale``, kept
            exactly as computed.
    """
    def __init__(self, r: float, normalized: np.ndarray, log_scale: np.ndarray, basis_ids: Sequence[str],
                 method: str, snapped_r: Optional[float] = None, log_weight: Optional[np.ndarray] = None,
                 shape_scale: Optional[np.ndarray] = None):
        self.r = float(r)
        self.normalized = np.asarray(normalized, dtype=float)
        self.log_scale = np.asarray(log_scale, dtype=float)
        self.basis_ids = list(basis_ids)
        self.method = method
        self.snapped_r = float(r if snapped_r is None else snapped_r)
        if log_weight is None:
            log_weight = np.where(np.isfinite(self.log_scale), 0.0, -np.inf)
        self.log_weight = np.asarray(log_weight, dtype=float)
        self.shape_scale = None if shape_scale is None else np.asarray(shape_scale, dtype=float)

    @classmethod
    def from_entries(cls, r: float, entries: np.ndarray, basis_ids: Sequence[str], method: str,
                     snapped_r: Optional[float] = None) -> "GramMatrixModel":
        entries = 0.5 * (np.asarray(entries, dtype=float) + np.asarray(entries, dtype=float).T)
        diag = np.diag(entries).copy()
        positive = diag > 0.0
        with np.errstate(divide='ignore'):
            log_scale = np.where(positive, 0.5 * np.log(np.where(positive, diag, 1.0)), -np.inf)
        inv = np.where(positive, 1.0 / np.sqrt(np.where(positive, diag, 1.0)), 0.0)
        normalized = entries * np.outer(inv, inv)
        np.fill_diagonal(normalized, np.where(positive, 1.0, 0.0))
        return cls(r, normalized, log_scale, basis_ids, method, snapped_r)

    @property
    def size(self) -> int:
        return self.normalized.shape[0]

    @property
    def shape_log_scale(self) -> np.ndarray:
        if self.shape_scale is not None:
            return self.shape_scale
        finite = np.isfinite(self.log_weight)
        return np.where(finite, self.log_scale - np.where(finite, self.log_weight, 0.0), -np.inf)

    @property
    def entries(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            scale = np.where(np.isfinite(self.log_scale), np.exp(np.where(np.isfinite(self.log_scale),
                                                                          self.log_scale, 0.0)), 0.0)
            return self.normalized * np.outer(scale, scale)

    def log_energy(self, i: int) -> float:
        """log I_{u_i}(r)."""
        return float(2.0 * self.log_scale[i])

    def condition_number(self) -> float:
        live = np.isfinite(self.log_scale)
        if not np.any(live):
            return float('inf')
        w = np.linalg.eigvalsh(self.normalized[np.ix_(live, live)])
        return float(w[-1] / w[0]) if w[0] > 0.0 else float('inf')

    def min_eig_ratio(self) -> float:
        return eig_ratio(self.normalized)

    def check_invariants(self, symmetry_rel: float = 1e-14, psd_rel: float = 1e-10) -> List[str]:
        """List violated Gram invariants (empty when all hold)."""
        problems = []
        n = self.normalized
        asym = np.max(np.abs(n - n.T)) if n.size else 0.0
        if asym > symmetry_rel * max(1.0, float(np.max(np.abs(n)))):
            problems.append(f"asymmetry {asym!r}")
        if n.size and self.min_eig_ratio() < -psd_rel:
            problems.append(f"not PSD: min/max eigenvalue ratio {self.min_eig_ratio()!r}")
        return problems

    def assert_invariants(self, symmetry_rel: float = 1e-14, psd_rel: float = 1e-10):
        problems = self.check_invariants(symmetry_rel, psd_rel)
        if problems:
            raise InvariantViolation(f"Gram matrix at r={self.r!r}: " + "; ".join(problems))

    def header(self) -> dict:
        return {'r': self.r, 'snapped_r': self.snapped_r, 'method': self.method, 'basis_ids': list(self.basis_ids)}
