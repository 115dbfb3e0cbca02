"""
Field-by-field comparison of JSON reports for the ``--compare`` mode.
"""
import math
from typing import Any, List


def _close(a: float, b: float, rtol: float) -> bool:
    if math.isnan(a) and math.isnan(b):
        return True
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b)) or a == b


def diff_reports(current: Any, baseline: Any, rtol: float = 1e-12, path: str = "") -> List[str]:
    """
    Lista os caminhos dos campos que diferem entre dois relatórios.

    The top-level ``metadata`` entry is ignored. Numbers are compared with
    relative tolerance ``rtol``; booleans, strings and structure exactly.

    Args:
        current: Relatório produzido nesta execução.
        baseline: Relatório de referência.
        rtol (float): Tolerância relativa para números.

    Returns:
        List[str]: Caminhos com diferença (vazio quando iguais).
    """
    mismatches = []
    if isinstance(current, dict) and isinstance(baseline, dict):
        keys = sorted(set(current) | set(baseline))
        for key in keys:
            if path == "" and key == "metadata":
                continue
            sub = f"{path}.{key}" if path else str(key)
            if key not in current or key not in baseline:
                mismatches.append(sub)
                continue
            mismatches.extend(diff_reports(current[key], baseline[key], rtol, sub))
        return mismatches
    if isinstance(current, list) and isinstance(baseline, list):
        if len(current) != len(baseline):
            return [f"{path}[len {len(current)} != {len(baseline)}]"]
        for i, (a, b) in enumerate(zip(current, baseline)):
            mismatches.extend(diff_reports(a, b, rtol, f"{path}[{i}]"))
        return mismatches
    if isinstance(current, bool) or isinstance(baseline, bool):
        return [] if current == baseline else [path]
    if isinstance(current, (int, float)) and isinstance(baseline, (int, float)):
        return [] if _close(float(current), float(baseline), rtol) else [path]
    return [] if current == baseline else [path]
