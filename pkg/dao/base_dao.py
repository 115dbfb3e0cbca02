import logging
from typing import Optional

from config.settings import OUTPUT_CONFIG
from utils.files import ensure_directory, join_paths

logger = logging.getLogger(__name__)


class BaseDao:
    """
    Base DAO owning the output directory of a run.

    Args:
        out_dir (Optional[str]): Directory for every file this DAO writes.
    """
    def __init__(self, out_dir: Optional[str] = None):
        self.out_dir = out_dir or OUTPUT_CONFIG['dir']

    def path(self, filename: str) -> str:
        """
        Caminho completo de um arquivo dentro do diretório de saída, criando o
        diretório na primeira escrita.
        """
        ensure_directory(self.out_dir)
        return join_paths(self.out_dir, filename)
