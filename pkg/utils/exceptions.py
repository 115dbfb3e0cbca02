"""
Exceções customizadas do laboratório de soluções antigas.

Cada erro carrega um ``exit_code`` para que a linha de comando associe a
primeira falha de uma execução à sua categoria.
"""


class StripLabError(Exception):
    """Exceção base para erros do laboratório."""
    exit_code = 4


class InvariantViolation(StripLabError):
    """Uma desigualdade ou invariante verificado não vale."""
    exit_code = 1

    def __init__(self, message: str, lhs: float = None, rhs: float = None):
        if lhs is not None and rhs is not None:
            message = f"{message} (lhs={lhs!r}, rhs={rhs!r})"
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class ConfigError(StripLabError):
    """Erro de leitura ou validação do arquivo de configuração."""
    exit_code = 2

    def __init__(self, message: str, line: int = None, key: str = None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class PreconditionError(StripLabError):
    """Uma pré-condição da operação foi violada."""
    exit_code = 3


class DomainError(PreconditionError):
    """Faixa, raio ou tempo inválido."""
    pass


class QuadratureWindowError(StripLabError):
    """O cilindro não cabe na janela amostrada ou está sub-resolvido."""
    pass


class SolverError(StripLabError):
    """Falha na solução de um sistema linear durante a evolução."""

    def __init__(self, message: str, step: int = None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class CoefficientError(StripLabError):
    """Os coeficientes do operador violam a elipticidade ou a condição de pequenez."""

    def __init__(self, message: str, node: tuple = None):
        if node is not None:
            message = f"node {node}: {message}"
        super().__init__(message)
        self.node = node


class NotPositiveDefiniteError(StripLabError):
    """Matriz que deveria ser positiva definida não é."""
    pass


class MethodMixError(StripLabError):
    """Matrizes de Gram de métodos diferentes foram combinadas."""
    pass


class SelectionError(StripLabError):
    """Nenhuma escala satisfez o critério de seleção abaixo do truncamento M."""
    exit_code = 5


class CompareMismatch(StripLabError):
    """Relatório difere do baseline em modo de comparação."""
    exit_code = 6
