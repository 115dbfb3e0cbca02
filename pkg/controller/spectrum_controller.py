import itertools
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy import linalg

from config.settings import TOLERANCES
from models.strip_domain_model import ModeModel, StripDomainModel
from utils.exceptions import PreconditionError
from utils.validators import validate_count, validate_positive

logger = logging.getLogger(__name__)


class SpectrumController:
    """
    Dirichlet spectrum of the box cross-section: closed form, a finite
    difference oracle for intervals and the Weyl count.
    """

    def __init__(self):
        logger.info("[INIT] SpectrumController initialized")

    def box_eigenpairs(self, domain: StripDomainModel, mu_max: float) -> List[ModeModel]:
        """
        All modes with mu <= mu_max, ascending by mu then by multi-index.

        Args:
            domain (StripDomainModel): Strip whose cross-section is used.
            mu_max (float): Eigenvalue cut-off.
        Returns:
            List[ModeModel]: Sorted modes (empty below the first eigenvalue).
        """
        mu_max = validate_positive("mu_max", mu_max)
        cutoff = mu_max * (1.0 + TOLERANCES['spectrum_rel'])
        bounds = [int(math.floor(L * math.sqrt(cutoff) / math.pi)) + 1 for L in domain.lengths]
        modes = []
        for k in itertools.product(*[range(1, b + 1) for b in bounds]):
            mode = ModeModel(k, domain.lengths)
            if mode.mu <= cutoff:
                modes.append(mode)
        modes.sort(key=lambda m: (m.mu, m.k))
        logger.debug(f"[SPECTRUM] {len(modes)} modes with mu <= {mu_max!r}")
        return modes

    def first_mode(self, domain: StripDomainModel, index: int = 1) -> ModeModel:
        """The ``index``-th mode (1-based) of the sorted spectrum."""
        index = validate_count("index", index, 1)
        mu_max = domain.mu1
        while True:
            modes = self.box_eigenpairs(domain, mu_max)
            if len(modes) >= index:
                return modes[index - 1]
            mu_max *= 2.0

    def fd_eigenpairs_1d(self, L: float, m: int) -> List[Tuple[float, np.ndarray]]:
        """
        Eigenpairs of the second-difference Dirichlet matrix on (0, L).

        ``m`` counts nodes including both endpoints, so h = L / (m - 1) and
        there are m - 2 unknowns. Eigenvectors include the zero endpoint
        values and satisfy h * sum(v^2) = 1 with a positive first entry.

        Args:
            L (float): Interval length.
            m (int): Node count (>= 3).
        Returns:
            List[Tuple[float, np.ndarray]]: (mu, vector) ascending in mu.
        """
        L = validate_positive("L", L)
        m = validate_count("m", m, 3)
        h = L / (m - 1)
        interior = m - 2
        diag = np.full(interior, 2.0 / h ** 2)
        off = np.full(interior - 1, -1.0 / h ** 2)
        if interior == 1:
            w = diag.copy()
            v = np.ones((1, 1))
        else:
            w, v = linalg.eigh_tridiagonal(diag, off)
        pairs = []
        for j in range(interior):
            vec = np.zeros(m)
            vec[1:-1] = v[:, j]
            vec /= math.sqrt(h * np.sum(vec ** 2))
            nz = np.flatnonzero(np.abs(vec) > 0.0)
            if nz.size and vec[nz[0]] < 0.0:
                vec = -vec
            pairs.append((float(w[j]), vec))
        return pairs

    def weyl_count(self, domain: StripDomainModel, d: float) -> int:
        """Number of modes with mu <= d^2."""
        d = validate_positive("d", d)
        return len(self.box_eigenpairs(domain, d * d))

    def spectrum_convergence_order(self, L: float, m: int, count: int = 5) -> dict:
        """
        Relative errors of the first ``count`` FD eigenvalues at m and 2m - 1
        nodes (h halves) and the measured order per eigenvalue.
        """
        m = validate_count("m", m, 3)
        if m - 2 < count:
            raise PreconditionError(f"m={m} nodes give fewer than {count} eigenvalues")
        exact = np.array([(k * math.pi / L) ** 2 for k in range(1, count + 1)])
        coarse = np.array([mu for mu, _ in self.fd_eigenpairs_1d(L, m)[:count]])
        fine = np.array([mu for mu, _ in self.fd_eigenpairs_1d(L, 2 * m - 1)[:count]])
        err_coarse = np.abs(coarse - exact) / exact
        err_fine = np.abs(fine - exact) / exact
        orders = np.log2(err_coarse / err_fine)
        logger.info(f"[SPECTRUM] FD order check L={L!r} m={m}: min order {float(np.min(orders))!r}")
        return {
            'exact': exact.tolist(),
            'fd': coarse.tolist(),
            'rel_error': err_coarse.tolist(),
            'rel_error_refined': err_fine.tolist(),
            'orders': orders.tolist(),
            'h': L / (m - 1),
        }
