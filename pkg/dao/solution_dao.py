import logging

import numpy as np

from dao.base_dao import BaseDao
from models.solution_model import SeparatedSolutionModel, SolutionSpanModel
from models.strip_domain_model import ModeModel
from utils.files import load_json, save_json

logger = logging.getLogger(__name__)


class SolutionDao(BaseDao):
    """
    JSON persistence of solution families (coeff, alpha, mode index, rho per
    basis entry plus the combination matrix).
    """

    def save_family(self, name: str, span: SolutionSpanModel) -> str:
        path = self.path(f"{name}.json")
        data = span.to_dict()
        data['lengths'] = list(span.lengths)
        save_json(path, data)
        logger.info(f"[DAO] Family of {span.size} solutions written to {path}")
        return path

    def load_family(self, path: str) -> SolutionSpanModel:
        data = load_json(path)
        lengths = data['lengths']
        basis = [SeparatedSolutionModel(b['coeff'], b['alpha'], ModeModel(b['k_index'], lengths), b['rho'])
                 for b in data['basis']]
        return SolutionSpanModel(basis, np.array(data['coefficients']), require_independent=False, ids=data['ids'])
