from typing import Optional

import numpy as np


class CutoffProfileModel:
    """
    Product cutoff phi(t, x0) = s((R - |x0|) / (R - r)) * s((t + R^2) / (R^2 - r^2))
    with the cubic smoothstep s; equal to 1 on Q_r and 0 outside Q_R.

    Args:
        r (float): Inner radius.
        R (float): Outer radius.
    """
    def __init__(self, r: float, R: float):
        self.r = float(r)
        self.R = float(R)
        self.d0_max = 1.5 / (self.R - self.r)
        self.dt_max = 1.5 / (self.R ** 2 - self.r ** 2)

    @staticmethod
    def _step(z):
        z = np.clip(z, 0.0, 1.0)
        return z * z * (3.0 - 2.0 * z)

    @staticmethod
    def _step_slope(z):
        inside = (z > 0.0) & (z < 1.0)
        return np.where(inside, 6.0 * z * (1.0 - z), 0.0)

    def _args(self, t, x0):
        t = np.asarray(t, dtype=float)
        x0 = np.asarray(x0, dtype=float)
        zx = (self.R - np.abs(x0)) / (self.R - self.r)
        zt = (t + self.R ** 2) / (self.R ** 2 - self.r ** 2)
        return zx, zt, x0

    def phi(self, t, x0) -> np.ndarray:
        zx, zt, _ = self._args(t, x0)
        return self._step(zx) * self._step(zt)

    def d0(self, t, x0) -> np.ndarray:
        zx, zt, x0 = self._args(t, x0)
        return -np.sign(x0) * self._step_slope(zx) / (self.R - self.r) * self._step(zt)

    def dt(self, t, x0) -> np.ndarray:
        zx, zt, _ = self._args(t, x0)
        return self._step(zx) * self._step_slope(zt) / (self.R ** 2 - self.r ** 2)

    def to_dict(self) -> dict:
        return {'r': self.r, 'R': self.R, 'd0_max': self.d0_max, 'dt_max': self.dt_max}


class EstimateReportModel:
    """
    One verified inequality: lhs <= constant_used * factor * rhs.

    Values that could overflow are carried as logarithms as well; ``lhs`` and
    ``rhs`` are the exponentials when representable.

    Args:
        check (str): Name of the check.
        log_lhs (float): log of the left side (-inf for zero).
        log_rhs (float): log of the quantity the constant multiplies.
        constant_used (float): Constant the check is run with.
        factor (float): Geometric factor, e.g. 1/(R - r)^2.
        empirical_constant (float): Smallest constant making the check pass.
        passed (bool): Outcome.
        details (Optional[dict]): Extra scalar or list fields.
    """
    def __init__(self, check: str, log_lhs: float, log_rhs: float, constant_used: float, factor: float,
                 empirical_constant: float, passed: bool, details: Optional[dict] = None):
        self.check = check
        self.log_lhs = float(log_lhs)
        self.log_rhs = float(log_rhs)
        self.constant_used = float(constant_used)
        self.factor = float(factor)
        self.empirical_constant = float(empirical_constant)
        self.passed = bool(passed)
        self.details = dict(details or {})

    @property
    def lhs(self) -> float:
        with np.errstate(over='ignore'):
            return float(np.exp(self.log_lhs))

    @property
    def rhs(self) -> float:
        with np.errstate(over='ignore'):
            return float(np.exp(self.log_rhs))

    def to_dict(self) -> dict:
        data = {
            'check': self.check,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'log_lhs': self.log_lhs,
            'log_rhs': self.log_rhs,
            'constant_used': self.constant_used,
            'factor': self.factor,
            'empirical_constant': self.empirical_constant,
            'passed': self.passed,
        }
        data.update(self.details)
        return data


class LiouvilleProbeModel:
    """
    Outcome of the polynomial-growth contradiction search.

    Args:
        d (float): Polynomial degree tested.
        r (float): Base radius.
        r0 (float): Iteration step.
        log_C_fit (float): log of the fitted polynomial envelope constant.
        certificate_k (Optional[int]): First k where the exponential lower
            bound beats the envelope by the certificate ratio.
        log_ratio (Optional[float]): log of that ratio.
        vacuous (bool): True for the zero solution.
    """
    def __init__(self, d: float, r: float, r0: float, log_C_fit: float, certificate_k: Optional[int],
                 log_ratio: Optional[float], vacuous: bool, K: int):
        self.d = float(d)
        self.r = float(r)
        self.r0 = float(r0)
        self.log_C_fit = float(log_C_fit)
        self.certificate_k = certificate_k
        self.log_ratio = log_ratio
        self.vacuous = vacuous
        self.K = int(K)

    @property
    def certificate_found(self) -> bool:
        return self.certificate_k is not None

    @property
    def passed(self) -> bool:
        """Consistent with P_d = {0}: certificate for nonzero input, none for zero."""
        return self.vacuous != self.certificate_found

    def to_dict(self) -> dict:
        return {
            'check': 'liouville',
            'd': self.d, 'r': self.r, 'r0': self.r0, 'K': self.K,
            'log_C_fit': self.log_C_fit,
            'certificate_found': self.certificate_found,
            'certificate_k': self.certificate_k,
            'log_ratio': self.log_ratio,
            'ratio': None if self.log_ratio is None else float(np.exp(min(self.log_ratio, 700.0))),
            'vacuous': self.vacuous,
            'passed': self.passed,
        }
