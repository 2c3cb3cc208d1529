import pytest

from cslheat.errors import DomainError
from cslheat.units import parse_quantity


@pytest.mark.parametrize("text,kind,value", [
    ("3.1cm", "length", 0.031),
    ("3.61478 Å", "length", 3.61478e-10),
    ("3.61478A", "length", 3.61478e-10),
    ("100 nm", "length", 1e-7),
    ("1e-7", "length", 1e-7),
    ("30mK", "temperature", 0.03),
    ("0.01 K", "temperature", 0.01),
    ("750 g", "mass", 0.75),
    (2.5, "mass", 2.5),
])
def test_parse(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("text,kind", [("3 furlongs", "length"), ("abc", "length"), ("5 cm", "temperature")])
def test_parse_errors(text, kind):
    with pytest.raises(DomainError):
        parse_quantity(text, kind)
