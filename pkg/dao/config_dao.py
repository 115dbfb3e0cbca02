import logging
from typing import Any, Dict

from config.settings import CONFIG_SECTIONS
from models.experiment_config_model import ExperimentConfigModel
from utils.exceptions import ConfigError
from utils.files import file_exists

logger = logging.getLogger(__name__)

TRUE_WORDS = ('true', 'yes', 'on')
FALSE_WORDS = ('false', 'no', 'off')


def _coerce_scalar(text: str, template: Any, line: int, key: str):
    text = text.strip()
    try:
        if isinstance(template, bool):
            lowered = text.lower()
            if lowered in TRUE_WORDS:
                return True
            if lowered in FALSE_WORDS:
                return False
            raise ValueError(text)
        if isinstance(template, int):
            number = float(text)
            if number != int(number):
                raise ValueError(text)
            return int(number)
        if isinstance(template, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"cannot read {text!r} as {type(template).__name__}", line=line, key=key)
    return text


def coerce_value(text: str, template: Any, line: int = None, key: str = None):
    """
    Converte o texto de um valor para o tipo do valor padrão correspondente;
    listas são separadas por vírgula.
    """
    if isinstance(template, list):
        items = [item for item in text.split(',') if item.strip()]
        element = template[0] if template else ''
        return [_coerce_scalar(item, element, line, key) for item in items]
    return _coerce_scalar(text, template, line, key)


class ConfigDao:
    """
    Reads experiment files made of ``section.key = value`` lines with ``#``
    comments.
    """

    def __init__(self):
        logger.info("[INIT] ConfigDao initialized")

    def parse_text(self, text: str) -> Dict[str, Dict[str, Any]]:
        """
        Parse the text of an experiment file.

        Args:
            text (str): File content.
        Returns:
            Dict[str, Dict[str, Any]]: Section -> key -> typed value.
        """
        overrides: Dict[str, Dict[str, Any]] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError("expected 'section.key = value'", line=number)
            name, value = (part.strip() for part in line.split('=', 1))
            if '.' not in name:
                raise ConfigError("key needs a section prefix", line=number, key=name)
            section, key = name.split('.', 1)
            if section not in CONFIG_SECTIONS or key not in CONFIG_SECTIONS[section]:
                raise ConfigError("unknown key", line=number, key=name)
            if key in overrides.get(section, {}):
                raise ConfigError("duplicate key", line=number, key=name)
            overrides.setdefault(section, {})[key] = coerce_value(value, CONFIG_SECTIONS[section][key], number, name)
        return overrides

    def read(self, path: str) -> Dict[str, Dict[str, Any]]:
        """Parse an experiment file into section overrides."""
        if not file_exists(path):
            logger.error(f"[ERRO] Config file not found: {path}")
            raise ConfigError(f"config file not found: '{path}'")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            logger.error(f"[ERRO] Cannot read config '{path}': {e}")
            raise ConfigError(f"cannot read '{path}': {e}")
        overrides = self.parse_text(text)
        logger.info(f"[CONFIG] Loaded '{path}'")
        return overrides

    def load(self, path: str) -> ExperimentConfigModel:
        """Read, merge over the defaults and validate an experiment file."""
        return ExperimentConfigModel(self.read(path)).validate()
