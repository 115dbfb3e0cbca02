import math
from typing import Iterable, List

from utils.exceptions import DomainError, PreconditionError


def validate_positive(name: str, value: float) -> float:
    """
    Valida se um valor é real, finito e estritamente positivo.

    Args:
        name: Nome do parâmetro (usado na mensagem de erro)
        value: Valor a ser validado

    Returns:
        float: O valor convertido para float
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


def validate_radii(r: float, R: float):
    """
    Valida o par de raios 0 < r < R usado pelas estimativas de anel.
    """
    r = validate_positive("r", r)
    R = validate_positive("R", R)
    if r >= R:
        raise DomainError(f"radii must satisfy r < R, got r={r!r}, R={R!r}")
    return r, R


def validate_time(t: float) -> float:
    """
    Soluções antigas só são avaliadas em t <= 0.
    """
    t = float(t)
    if t > 0.0:
        raise DomainError(f"ancient solutions are evaluated at t <= 0, got t={t!r}")
    return t


def validate_increasing(name: str, values: Iterable[float], min_count: int = 1) -> List[float]:
    """
    Valida uma lista estritamente crescente com pelo menos ``min_count`` entradas.
    """
    values = [float(v) for v in values]
    if len(values) < min_count:
        raise PreconditionError(f"{name} needs at least {min_count} entries, got {len(values)}")
    for a, b in zip(values, values[1:]):
        if not b > a:
            raise PreconditionError(f"{name} must be strictly increasing, got {values!r}")
    return values


def validate_count(name: str, value: int, minimum: int) -> int:
    """
    Valida um inteiro com valor mínimo.
    """
    if int(value) != value or int(value) < minimum:
        raise PreconditionError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
