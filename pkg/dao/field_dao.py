import logging
from typing import Optional

import numpy as np

from dao.base_dao import BaseDao
from models.field_model import SolutionFieldModel
from models.strip_domain_model import SpaceTimeGridModel
from utils.exceptions import DomainError
from utils.files import load_json, save_json, write_atomic

logger = logging.getLogger(__name__)

HEADER_INTS = 4
HEADER_FLOATS = 5


class FieldDao(BaseDao):
    """
    Binary persistence of solution fields.

    Layout, all little-endian: three int64 node counts (t, x0, x1), five
    float64 values (tau, h0, h1, T, X), one int64 seed (-1 when absent),
    then the float64 values in row-major order. A JSON sidecar repeats the
    header.
    """

    def save(self, name: str, field: SolutionFieldModel) -> str:
        grid = field.grid
        seed = -1 if field.seed is None else int(field.seed)
        counts = np.array(grid.shape, dtype='<i8')
        floats = np.array([grid.tau, grid.h0, grid.h[0], grid.T, grid.X], dtype='<f8')
        payload = counts.tobytes() + floats.tobytes() + np.array([seed], dtype='<i8').tobytes() \
            + np.ascontiguousarray(field.values, dtype='<f8').tobytes()
        path = self.path(f"{name}.bin")
        write_atomic(path, payload)
        save_json(self.path(f"{name}.json"), {
            'shape': list(grid.shape), 'tau': grid.tau, 'h0': grid.h0, 'h1': grid.h[0],
            'T': grid.T, 'X': grid.X, 'seed': field.seed, 'lengths': list(grid.lengths),
        })
        logger.info(f"[DAO] Field written to {path}")
        return path

    def load(self, path: str, lengths: Optional[tuple] = None) -> SolutionFieldModel:
        """
        Read a field back; the cross-section length is n_cross * h1 unless
        the sidecar or ``lengths`` says otherwise.
        """
        with open(path, 'rb') as f:
            raw = f.read()
        head = 8 * (HEADER_INTS + HEADER_FLOATS)
        if len(raw) < head:
            raise DomainError(f"'{path}' is too short for a field header")
        counts = np.frombuffer(raw, dtype='<i8', count=3, offset=0)
        tau, h0, h1, T, X = np.frombuffer(raw, dtype='<f8', count=HEADER_FLOATS, offset=24)
        seed = int(np.frombuffer(raw, dtype='<i8', count=1, offset=64)[0])
        values = np.frombuffer(raw, dtype='<f8', offset=head)
        if values.size != int(np.prod(counts)):
            raise DomainError(f"'{path}' holds {values.size} values for shape {tuple(counts)}")
        nt, n0, nc = (int(c) - 1 for c in counts)
        if lengths is None:
            sidecar = load_json(path[:-4] + '.json') if path.endswith('.bin') else {}
            lengths = tuple(sidecar.get('lengths', [nc * float(h1)]))
        grid = SpaceTimeGridModel(float(T), float(X), lengths, nt, n0, nc)
        for name, stored, rebuilt in (('tau', tau, grid.tau), ('h0', h0, grid.h0), ('h1', h1, grid.h[0])):
            if abs(stored - rebuilt) > 1e-12 * abs(stored):
                raise DomainError(f"'{path}': stored {name}={float(stored)!r} does not match the rebuilt grid")
        return SolutionFieldModel(grid, values.reshape(tuple(int(c) for c in counts)).copy(),
                                  seed=None if seed < 0 else seed)
