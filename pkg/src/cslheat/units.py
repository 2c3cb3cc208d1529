"""Unit parsing at the CLI boundary. Everything inside the package is SI."""

import re

from .errors import DomainError

_SCALE = {
    "length": {"": 1.0, "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9,
               "a": 1e-10, "Å": 1e-10, "angstrom": 1e-10},
    "temperature": {"": 1.0, "k": 1.0, "mk": 1e-3, "uk": 1e-6},
    "mass": {"": 1.0, "kg": 1.0, "g": 1e-3},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\d\s.+-].*)?\s*$")


def parse_quantity(text, kind):
    """Parse ``"3.1cm"``, ``"30 mK"``, ``"3.61478 Å"`` or a bare SI number.

    >>> parse_quantity("30mK", "temperature")
    0.03
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _QUANTITY.match(str(text))
    if not m:
        raise DomainError(f"cannot parse {kind} value {text!r}")
    value, unit = m.group(1), (m.group(2) or "").strip()
    table = _SCALE[kind]
    key = unit if unit == "Å" else unit.lower()
    if key not in table:
        raise DomainError(f"unknown {kind} unit {unit!r} in {text!r}")
    return float(value) * table[key]
