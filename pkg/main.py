import sys
import logging

from config.settings import APP_CONFIG
from cli.main_cli import run


logging.basicConfig(
    level=logging.INFO,
    format=APP_CONFIG['log_format'],
    handlers=[
        logging.StreamHandler(sys.stdout),
        logging.FileHandler(APP_CONFIG['log_file'], encoding='utf-8')
    ]
)
logger = logging.getLogger(__name__)


def main():
    """Função principal: executa o subcomando pedido e sai com o seu código."""
    logger.info(f"[START] {APP_CONFIG['name']} {APP_CONFIG['version']}")
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
