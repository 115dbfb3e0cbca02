from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


def log_ratio_columns(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """
    log(f_upper / f_lower) with 0/0 -> ratio 0 (log -inf) and x/0 -> +inf.
    """
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    out = np.empty(np.broadcast(upper, lower).shape)
    both_zero = np.isneginf(upper) & np.isneginf(lower)
    lower_zero = np.isneginf(lower) & ~np.isneginf(upper)
    regular = ~(both_zero | lower_zero)
    out[both_zero] = -np.inf
    out[lower_zero] = np.inf
    out[regular] = upper[regular] - lower[regular]
    return out


class MonotoneTableModel:
    """
    Residual energies f_i at radii m * delta, stored as logarithms.

    log f_i(r_m) = log_weight[i] + log_shape[i, m]; selection ratios use the
    shape part only.

    Args:
        radii (Sequence[float]): Radii, usually m * delta for m = 0..M.
        log_shape (np.ndarray): (k x len(radii)) shape part of log f.
        log_weight (np.ndarray): Per-function amplitude part.
        delta (Optional[float]): Radius step when uniform.
        d_growth (Optional[float]): Exponent budget of the growth bound.
        C_growth (Optional[Sequence[float]]): Per-function constants.
        grams (Optional[list]): Gram matrices the table was built from.
        pivot_ratios (Optional[np.ndarray]): Unit-diagonal Schur pivots.
        span (Optional[SolutionSpanModel]): Span the table was computed from.
    """
    def __init__(self, radii: Sequence[float], log_shape: np.ndarray, log_weight: Optional[np.ndarray] = None,
                 delta: Optional[float] = None, d_growth: Optional[float] = None,
                 C_growth: Optional[Sequence[float]] = None, grams: Optional[list] = None,
                 pivot_ratios: Optional[np.ndarray] = None, span=None):
        self.radii = np.asarray(radii, dtype=float)
        self.log_shape = np.atleast_2d(np.asarray(log_shape, dtype=float))
        k = self.log_shape.shape[0]
        self.log_weight = np.zeros(k) if log_weight is None else np.asarray(log_weight, dtype=float)
        self.delta = delta
        self.d_growth = d_growth
        self.C_growth = None if C_growth is None else np.asarray(C_growth, dtype=float)
        self.grams = grams
        self.pivot_ratios = pivot_ratios
        self.span = span

    @classmethod
    def from_values(cls, radii, values, delta=None, d_growth=None, C_growth=None) -> "MonotoneTableModel":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        with np.errstate(divide='ignore'):
            log_shape = np.where(values > 0.0, np.log(np.where(values > 0.0, values, 1.0)), -np.inf)
        return cls(radii, log_shape, None, delta, d_growth, C_growth)

    @property
    def k(self) -> int:
        return self.log_shape.shape[0]

    @property
    def M(self) -> int:
        return self.log_shape.shape[1] - 1

    @property
    def log_values(self) -> np.ndarray:
        return self.log_weight[:, np.newaxis] + self.log_shape

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            return np.exp(self.log_values)

    def log_ratios(self, m: int) -> np.ndarray:
        """log f_i((m+1) delta) - log f_i(m delta) for every i."""
        return log_ratio_columns(self.log_shape[:, m + 1], self.log_shape[:, m])

    def check_invariants(self, slack: float = 1e-12) -> List[str]:
        problems = []
        v = self.values
        for i in range(self.k):
            drops = np.flatnonzero(v[i, 1:] < v[i, :-1] * (1.0 - 1e-10) - slack)
            if drops.size:
                problems.append(f"f_{i + 1} decreases at m={int(drops[0])}")
            if np.any(v[i] < 0.0):
                problems.append(f"f_{i + 1} negative")
        if self.C_growth is not None and self.d_growth is not None:
            with np.errstate(divide='ignore'):
                bound = np.log(self.C_growth)[:, np.newaxis] + self.d_growth * self.radii[np.newaxis, :]
            bad = np.argwhere(self.log_values > bound + 1e-12)
            if bad.size:
                i, m = bad[0]
                problems.append(f"f_{i + 1} exceeds C e^(d r) at m={int(m)}")
        return problems

    def to_dict(self) -> dict:
        return {
            'radii': self.radii.tolist(),
            'log_values': self.log_values.tolist(),
            'delta': self.delta,
            'd_growth': self.d_growth,
        }


class SelectionReportModel:
    """
    Scales m with at least ``ell`` functions satisfying
    f((m+1) delta) <= sigma f(m delta), and the chosen subset at each.

    Args:
        m_list (List[int]): Selected scales, ascending.
        subsets (Dict[int, Tuple[int, ...]]): Chosen indices per scale.
        sigma (float): Threshold.
        log_ratios (np.ndarray): (k x (M - m0)) ratios scanned, in logs.
        m0 (int): First scale scanned.
        M (int): Truncation.
        threshold (float): Lower bound sigma had to exceed.
        ell (int): Target count.
    """
    def __init__(self, m_list: List[int], subsets: Dict[int, Tuple[int, ...]], sigma: float,
                 log_ratios: np.ndarray, m0: int, M: int, threshold: float, ell: int):
        self.m_list = list(m_list)
        self.subsets = dict(subsets)
        self.sigma = float(sigma)
        self.log_ratios = np.asarray(log_ratios, dtype=float)
        self.m0 = int(m0)
        self.M = int(M)
        self.threshold = float(threshold)
        self.ell = int(ell)

    @property
    def subset(self) -> Tuple[int, ...]:
        return self.subsets[self.m_list[0]] if self.m_list else ()

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            return np.exp(self.log_ratios)

    def ratio_column(self, m: int) -> np.ndarray:
        return self.log_ratios[:, m - self.m0]

    def to_dict(self) -> dict:
        return {
            'm_list': list(self.m_list),
            'subsets': {str(m): list(s) for m, s in self.subsets.items()},
            'sigma': self.sigma,
            'threshold': self.threshold,
            'log_margin': float(np.log(self.sigma) - np.log(self.threshold)),
            'm0': self.m0,
            'M': self.M,
            'ell': self.ell,
        }


class GoodBasisModel:
    """
    Basis v_1..v_ell of a selected subspace, J_{(m+1)delta}-orthonormal and
    J_{m delta}-orthogonal.

    ``v_normalized`` expresses v in the span elements rescaled to unit energy
    at (m+1) delta; ``v`` in the raw span elements.

    Args:
        m (int): Selected scale.
        delta (float): Radius step.
        sigma (float): Retention threshold 1/sigma.
        v_normalized (np.ndarray): (k x p) coefficients of all diagonalized directions.
        log_scale_top (np.ndarray): Half log-energies of span elements at (m+1) delta.
        I_all (np.ndarray): I_{v_i}(m delta) for all k directions, descending.
        retained (np.ndarray): Indices of directions with I >= 1/sigma.
        k (int): Number of diagonalized directions.
        selection (SelectionReportModel): Scale selection the basis came from.
        m0_adjustments (Optional[List[dict]]): Raises of the first scale.
        diagnostics (Optional[dict]): Trace chain and conditioning values.
        table (Optional[MonotoneTableModel]): f table with its Gram matrices.
    """
    def __init__(self, m: int, delta: float, sigma: float, v_normalized: np.ndarray, log_scale_top: np.ndarray,
                 I_all: np.ndarray, retained: np.ndarray, k: int, selection: SelectionReportModel = None,
                 m0_adjustments: Optional[List[dict]] = None, diagnostics: Optional[dict] = None,
                 table: Optional[MonotoneTableModel] = None):
        self.m = int(m)
        self.delta = float(delta)
        self.sigma = float(sigma)
        self.v_normalized_all = np.asarray(v_normalized, dtype=float)
        self.log_scale_top = np.asarray(log_scale_top, dtype=float)
        self.I_all = np.asarray(I_all, dtype=float)
        self.retained = np.asarray(retained, dtype=int)
        self.k = int(k)
        self.selection = selection
        self.m0_adjustments = list(m0_adjustments or [])
        self.diagnostics = dict(diagnostics or {})
        self.table = table

    @property
    def ell(self) -> int:
        return int(self.retained.size)

    @property
    def v_normalized(self) -> np.ndarray:
        return self.v_normalized_all[self.retained]

    @property
    def v(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            return self.v_normalized * np.exp(-self.log_scale_top)[np.newaxis, :]

    @property
    def I_small(self) -> np.ndarray:
        return self.I_all[self.retained]

    @property
    def a(self) -> float:
        return self.m * self.delta

    def to_dict(self) -> dict:
        data = {
            'm': self.m,
            'delta': self.delta,
            'sigma': self.sigma,
            'k': self.k,
            'ell': self.ell,
            'I_small': self.I_small.tolist(),
            'I_all': self.I_all.tolist(),
            'm0_adjustments': self.m0_adjustments,
        }
        data.update(self.diagnostics)
        return data


class KernelTraceModel:
    """
    K(t, x) = sum_i v_i(t, x)^2 at sample points, with the Gram-route value.

    Args:
        points (np.ndarray): (s x (n + 2)) rows (t, x0, x').
        K (np.ndarray): Sum-of-squares values.
        K_gram (np.ndarray): e^T G^{-1} e values on a mixed basis of the same span.
        tolerance (float): Largest relative disagreement that still passes.
    """
    def __init__(self, points: np.ndarray, K: np.ndarray, K_gram: np.ndarray, tolerance: float = 1e-10):
        self.points = np.asarray(points, dtype=float)
        self.K = np.asarray(K, dtype=float)
        self.K_gram = np.asarray(K_gram, dtype=float)
        self.tolerance = float(tolerance)

    @property
    def max_rel_error(self) -> float:
        scale = np.maximum(np.abs(self.K), np.finfo(float).tiny)
        return float(np.max(np.abs(self.K - self.K_gram) / scale)) if self.K.size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def to_dict(self) -> dict:
        return {
            'points': self.points.tolist(),
            'K': self.K.tolist(),
            'K_gram': self.K_gram.tolist(),
            'max_rel_error': self.max_rel_error,
            'passed': self.passed,
        }
