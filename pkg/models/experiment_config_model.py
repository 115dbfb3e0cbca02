import copy
from typing import Dict, Optional

from config.settings import CONFIG_SECTIONS, OPERATOR_PRESETS
from models.strip_domain_model import StripDomainModel
from utils.exceptions import ConfigError, DomainError

SCHEMES = ('implicit_euler', 'crank_nicolson')
SOURCES = ('closed', 'field')
METHODS = ('closed_form', 'quadrature')


class ExperimentConfigModel:
    """
    Merged experiment configuration: defaults, then file keys, then flags.

    Args:
        overrides (Optional[Dict[str, Dict]]): Section -> key -> value.
    """
    def __init__(self, overrides: Optional[Dict[str, Dict]] = None):
        self.sections = {name: copy.deepcopy(values) for name, values in CONFIG_SECTIONS.items()}
        for section, values in (overrides or {}).items():
            self.update(section, values)

    def update(self, section: str, values: Dict):
        if section not in self.sections:
            raise ConfigError(f"unknown section '{section}'")
        for key, value in values.items():
            if key not in self.sections[section]:
                raise ConfigError("unknown key", key=f"{section}.{key}")
            self.sections[section][key] = value

    @property
    def domain(self) -> Dict:
        return self.sections['domain']

    @property
    def operator(self) -> Dict:
        return self.sections['operator']

    @property
    def grid(self) -> Dict:
        return self.sections['grid']

    @property
    def experiment(self) -> Dict:
        return self.sections['experiment']

    @property
    def output(self) -> Dict:
        return self.sections['output']

    def validate(self) -> "ExperimentConfigModel":
        """Check every referenced value before any computation runs."""
        try:
            self.build_domain()
        except DomainError as e:
            raise ConfigError(str(e), key='domain')
        if self.operator['preset'] not in OPERATOR_PRESETS:
            raise ConfigError(f"unknown preset {self.operator['preset']!r}", key='operator.preset')
        if self.operator['scheme'] not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}", key='operator.scheme')
        for key in ('lambda_ell', 'Lambda_ell'):
            if float(self.operator[key]) == 0.0:
                raise ConfigError("must be positive (negative selects the preset value)", key=f"operator.{key}")
        for key in ('h0', 'h', 'tau', 'T'):
            if not float(self.grid[key]) > 0.0:
                raise ConfigError("must be positive", key=f"grid.{key}")
        exp = self.experiment
        if exp['source'] not in SOURCES:
            raise ConfigError(f"source must be one of {SOURCES}", key='experiment.source')
        if exp['method'] not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}", key='experiment.method')
        for key in ('d', 'delta', 'r', 'R', 'mu_max'):
            if not float(exp[key]) > 0.0:
                raise ConfigError("must be positive", key=f"experiment.{key}")
        for key, minimum in (('k', 1), ('N', 1), ('ell', 1), ('m0', 0), ('M', 0), ('K', 1), ('k_index', 1)):
            if int(exp[key]) != exp[key] or int(exp[key]) < minimum:
                raise ConfigError(f"must be an integer >= {minimum}", key=f"experiment.{key}")
        if float(exp['sigma']) < 0.0:
            raise ConfigError("must be >= 0 (0 selects the default)", key='experiment.sigma')
        if len(exp['quad_cells']) != 3 or len(exp['mv_cells']) != 2:
            raise ConfigError("wrong list length", key='experiment.quad_cells/mv_cells')
        if not self.output['dir']:
            raise ConfigError("must not be empty", key='output.dir')
        return self

    def operator_bounds(self) -> Dict[str, float]:
        """Validation bounds: explicit operator keys, else the preset's declared values."""
        declared = OPERATOR_PRESETS[self.operator['preset']]
        return {key: float(self.operator[key]) if float(self.operator[key]) >= 0.0 else declared[key]
                for key in ('lambda_ell', 'Lambda_ell', 'eps')}

    def build_domain(self) -> StripDomainModel:
        return StripDomainModel(int(self.domain['n']), list(self.domain['lengths']), float(self.domain['X']))

    def to_dict(self) -> Dict:
        return copy.deepcopy(self.sections)
