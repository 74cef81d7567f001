"""CSV / JSON rendering shared by the library and the CLI."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Sequence

CURVE_COLUMNS = ("t", "s_exact", "tail_T1", "tail_T2", "tail_T3", "bound_thm1", "bound_thm3")


def format_number(x) -> str:
    """Decimal with 17 significant digits; ``None`` renders as an empty cell."""
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def exact_field(x) -> str | None:
    return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else None


def write_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def number_json(x):
    """JSON value for a number, keeping rationals exact alongside the decimal."""
    if isinstance(x, Fraction):
        return {"value": float(x), "exact": exact_field(x)}
    return x


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return number_json(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
