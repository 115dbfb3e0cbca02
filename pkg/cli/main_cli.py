"""
Command line interface of the lab.

Subcommands map one-to-one onto ``LabService.run_*``; every experiment key
also has a flag (``--mu-max``, ``--k-index``, ...) that overrides the file.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from config.settings import APP_CONFIG, EXPERIMENT_CONFIG, OPERATOR_CONFIG
from core.lab_service import CM_STEPS, VERIFY_CHECKS, LabService
from dao.config_dao import ConfigDao, coerce_value
from models.experiment_config_model import ExperimentConfigModel
from utils.exceptions import CompareMismatch, ConfigError, InvariantViolation, StripLabError
from utils.files import dumps_json, file_exists, load_json
from utils.report_diff import diff_reports

logger = logging.getLogger(__name__)

OPERATOR_FLAGS = ('preset', 'scheme', 'lambda_ell', 'Lambda_ell', 'eps')


def _flag(key: str) -> str:
    return '--' + key.replace('_', '-')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument('--config', default=argparse.SUPPRESS, help="Arquivo de experimento (section.key = value)")
    common.add_argument('--seed', default=argparse.SUPPRESS, help="Semente dos geradores PCG64")
    common.add_argument('--out', default=argparse.SUPPRESS, help="Diretório de saída dos relatórios")
    common.add_argument('--compare', default=argparse.SUPPRESS, help="Relatório baseline para comparação")
    common.add_argument('--rtol', type=float, default=argparse.SUPPRESS, help="Tolerância relativa da comparação")
    common.add_argument('--verbose', action='store_true', default=argparse.SUPPRESS)
    for key in EXPERIMENT_CONFIG:
        if key != 'seed':
            common.add_argument(_flag(key), dest=f"experiment.{key}", default=argparse.SUPPRESS)
    for key in OPERATOR_FLAGS:
        common.add_argument(_flag(key), dest=f"operator.{key}", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog='strip-lab', description=APP_CONFIG['name'], allow_abbrev=False)
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('spectrum', parents=[common], help="Autovalores de Dirichlet da seção")
    solutions = commands.add_parser('solutions', parents=[common], help="Famílias de soluções antigas")
    solutions.add_argument('sub', choices=['build'])
    commands.add_parser('gram', parents=[common], help="Matriz de Gram em Q_r")
    verify = commands.add_parser('verify', parents=[common], help="Verificação de desigualdades")
    verify.add_argument('sub', choices=list(VERIFY_CHECKS))
    cm = commands.add_parser('cm', parents=[common], help="Seleção de escalas e base boa")
    cm.add_argument('sub', choices=list(CM_STEPS))
    experiment = commands.add_parser('experiment', parents=[common], help="Experimentos compostos")
    experiment.add_argument('sub', choices=['dimension'])
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfigModel:
    """Defaults, then the config file, then the flags; validated."""
    options = vars(args)
    overrides: Dict[str, Dict] = ConfigDao().read(options['config']) if 'config' in options else {}
    templates = {'experiment': EXPERIMENT_CONFIG, 'operator': OPERATOR_CONFIG}
    flags = {name: value for name, value in options.items() if '.' in name}
    if 'seed' in options:
        flags['experiment.seed'] = options['seed']
    for name, text in flags.items():
        section, key = name.split('.', 1)
        overrides.setdefault(section, {})[key] = coerce_value(text, templates[section][key], key=_flag(key))
    if 'out' in options:
        overrides.setdefault('output', {})['dir'] = options['out']
    return ExperimentConfigModel(overrides).validate()


def compare_with_baseline(report: Dict, baseline_path: str, rtol: float):
    if not file_exists(baseline_path):
        raise ConfigError(f"baseline report not found: '{baseline_path}'", key='--compare')
    baseline = load_json(baseline_path)
    current = json.loads(dumps_json(report).decode('utf-8'))
    mismatches = diff_reports(current, baseline, rtol)
    if mismatches:
        shown = ', '.join(mismatches[:5])
        raise CompareMismatch(f"{len(mismatches)} field(s) differ from '{baseline_path}': {shown}")
    logger.info(f"[OK] Report matches baseline '{baseline_path}'")


def _describe(check: Dict) -> str:
    text = f"{check.get('check', '?')}: {'PASS' if check.get('passed', True) else 'FAIL'}"
    if 'lhs' in check and 'rhs' in check:
        relation = '<=' if check.get('passed', True) else '>'
        text += (f" (lhs={check['lhs']!r} {relation} constant*factor*rhs with constant={check.get('constant_used')!r}, "
                 f"factor={check.get('factor')!r}, rhs={check['rhs']!r})")
    return text


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand and return its exit code.

    Returns:
        int: 0 when every check passes, otherwise the category of the first
            failure (see ``utils.exceptions``).
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    options = vars(args)
    if options.get('verbose'):
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = build_config(args)
        service = LabService(config)
        report = service.run(args.command, getattr(args, 'sub', None))
        for check in report['checks']:
            print(_describe(check))
        failed = [c for c in report['checks'] if not c.get('passed', True)]
        if failed:
            raise InvariantViolation(_describe(failed[0]))
        if 'compare' in options:
            compare_with_baseline(report, options['compare'], options.get('rtol', 1e-12))
    except StripLabError as e:
        logger.error(f"[ERRO] {type(e).__name__}: {e}")
        print(f"[ERRO] {e}", file=sys.stderr)
        return e.exit_code
    logger.info("[OK] All checks passed")
    return 0
