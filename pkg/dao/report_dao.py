import logging
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from dao.base_dao import BaseDao
from models.gram_model import GramMatrixModel
from models.strip_domain_model import ModeModel
from utils.files import load_json, save_json, write_atomic

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


class ReportDao(BaseDao):
    """
    Writes JSON reports (one object per check) and CSV tables.
    """

    def _write_csv(self, filename: str, frame: pd.DataFrame) -> str:
        path = self.path(filename)
        write_atomic(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT).encode('utf-8'))
        return path

    def save_report(self, name: str, checks: List[Dict], config: Optional[Dict] = None,
                    formats: Sequence[str] = ('json', 'csv')) -> Dict:
        """
        Write ``{"metadata": ..., "checks": [...]}`` and, when asked, a CSV of
        the scalar fields of every check.

        Returns:
            Dict: The report as written.
        """
        report = {
            'metadata': {
                'timestamp': datetime.now(timezone.utc).isoformat(),
                'config': config or {},
            },
            'checks': checks,
        }
        if 'json' in formats:
            save_json(self.path(f"{name}.json"), report)
        if 'csv' in formats and checks:
            rows = [{key: value for key, value in check.items()
                     if isinstance(value, (bool, int, float, str, np.generic)) or value is None}
                    for check in checks]
            self._write_csv(f"{name}.csv", pd.DataFrame(rows))
        logger.info(f"[DAO] Report '{name}' written to {self.out_dir}")
        return report

    def load_report(self, path: str) -> Dict:
        return load_json(path)

    def save_modes(self, name: str, modes: List[ModeModel]) -> str:
        frame = pd.DataFrame({
            'k_index': [' '.join(str(v) for v in mode.k) for mode in modes],
            'mu': [mode.mu for mode in modes],
            'normalization': [mode.normalization for mode in modes],
        })
        return self._write_csv(f"{name}.csv", frame)

    def save_gram(self, name: str, gram: GramMatrixModel) -> str:
        """Gram entries as (row, col, value) plus a JSON header with the log scales."""
        entries = gram.entries
        rows, cols = np.meshgrid(np.arange(gram.size), np.arange(gram.size), indexing='ij')
        frame = pd.DataFrame({'row': rows.ravel(), 'col': cols.ravel(), 'value': entries.ravel(),
                              'normalized': gram.normalized.ravel()})
        header = gram.header()
        header['log_scale'] = gram.log_scale.tolist()
        save_json(self.path(f"{name}_header.json"), header)
        return self._write_csv(f"{name}.csv", frame)

    def save_matrix(self, name: str, matrix: np.ndarray, row_ids: Sequence[str], col_ids: Sequence[str]) -> str:
        frame = pd.DataFrame(np.asarray(matrix, dtype=float), columns=list(col_ids))
        frame.insert(0, 'id', list(row_ids))
        return self._write_csv(f"{name}.csv", frame)

    def save_table(self, name: str, rows: List[Dict]) -> str:
        return self._write_csv(f"{name}.csv", pd.DataFrame(rows))
