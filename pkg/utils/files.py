import os
import json
import tempfile

import numpy as np

from typing import Dict


def ensure_directory(directory: str) -> str:
    """
    Cria o diretório (e os pais) caso ainda não exista.

    Args:
        directory (str): Caminho do diretório.

    Returns:
        str: O mesmo caminho, já existente.
    """
    try:
        os.makedirs(directory, exist_ok=True)
        return directory
    except Exception as e:
        raise OSError(f"Error creating directory '{directory}': {e}")


def load_json(file_path: str) -> Dict:
    """
    Carrega dados de um arquivo JSON.

    Args:
        file_path (str): O caminho para o arquivo JSON.

    Returns:
        dict: O conteúdo do arquivo, ou um dicionário vazio quando o arquivo
        não existe ou está vazio.
    """
    if not os.path.isfile(file_path):
        return {}
    with open(file_path, 'r', encoding='utf-8') as f:
        content = f.read().strip()
    if content:
        return json.loads(content)
    return {}


def write_atomic(file_path: str, payload: bytes):
    """
    Escreve bytes em um arquivo de forma atômica (arquivo temporário + rename).

    Args:
        file_path (str): Caminho final do arquivo.
        payload (bytes): Conteúdo a ser gravado.
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    ensure_directory(directory)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp_', suffix=os.path.basename(file_path))
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(payload)
        os.replace(tmp_path, file_path)
    except Exception as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise OSError(f"Error writing '{file_path}': {e}")


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_json(data: Dict) -> bytes:
    """
    Serializa para JSON com chaves ordenadas; floats saem pelo repr do Python
    (menor representação que reproduz o valor exato). Tipos numpy viram
    tipos nativos.
    """
    return json.dumps(data, indent=4, ensure_ascii=False, sort_keys=True, default=_to_builtin).encode('utf-8')


def save_json(file_path: str, data: Dict):
    """
    Salva dados em um arquivo JSON de forma atômica.

    Args:
        file_path (str): O caminho para o arquivo onde os dados serão salvos.
        data (dict): O dicionário de dados a ser salvo.
    """
    write_atomic(file_path, dumps_json(data))


def join_paths(directory: str, filename: str) -> str:
    """
    Junta um diretório e um nome de arquivo para formar um caminho completo.
    """
    return os.path.join(directory, filename)


def file_exists(path: str) -> bool:
    """
    Verifica se um arquivo existe no caminho especificado.
    """
    return os.path.isfile(path)
