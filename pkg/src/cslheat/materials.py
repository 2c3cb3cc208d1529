"""Crystal parameter records and the built-in material table.

Material files are INI text, one section per material::

    [Cu]
    density = 8.90e3              ; kg/m^3
    cell_masses = 63.546          ; amu, comma separated, one per basis atom
    lattice_param = 3.61478e-10   ; m
    primitive_cell_volume = 1.1808e-29  ; m^3 (optional, default lattice_param**3)
    v_eff = 4760                  ; m/s
    k0 = 80                       ; W/(m K^2), conductivity k = k0*T
    assumed = v_eff               ; optional, comma separated field names

Masses are given in amu in files and stored in kg.
"""

import configparser
import math
from dataclasses import dataclass, field, replace

from .constants import AMU
from .errors import ConfigError, DomainError, NotFoundError

_FIELDS = ("density", "cell_masses", "lattice_param", "primitive_cell_volume", "v_eff", "k0", "assumed")


@dataclass(frozen=True)
class Material:
    name: str
    density: float
    cell_masses: tuple
    lattice_param: float
    v_eff: float
    k0: float
    primitive_cell_volume: float
    assumed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "cell_masses", tuple(float(m) for m in self.cell_masses))
        object.__setattr__(self, "assumed", frozenset(self.assumed))
        for name in ("density", "lattice_param", "v_eff", "k0", "primitive_cell_volume"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{self.name}: {name} must be positive and finite, got {value!r}")
        if not self.cell_masses or any(not m > 0 for m in self.cell_masses):
            raise DomainError(f"{self.name}: cell masses must be positive")

    @property
    def cell_mass(self):
        """Total mass of one primitive cell, kg."""
        return sum(self.cell_masses)

    def with_overrides(self, **overrides):
        """Copy with fields replaced; overridden fields lose their ``assumed`` flag."""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(overrides) - set(_FIELDS) - {"name"}
        if unknown:
            raise ConfigError(f"unknown material field(s): {', '.join(sorted(unknown))}")
        flags = self.assumed - set(overrides)
        if "lattice_param" in overrides and "primitive_cell_volume" not in overrides:
            # keep the cell shape factor V0/a^3
            ratio = self.primitive_cell_volume / self.lattice_param**3
            overrides["primitive_cell_volume"] = ratio * overrides["lattice_param"] ** 3
        return replace(self, assumed=flags, **overrides)


def debye_frequency(mat):
    """Debye cutoff ``v_eff * (6 pi^2 / V0)^(1/3)`` in rad/s."""
    return mat.v_eff * (6.0 * math.pi**2 / mat.primitive_cell_volume) ** (1.0 / 3.0)


_CU_A = 3.61478e-10
_TEO2_A, _TEO2_C = 4.81e-10, 7.61e-10

# Fields listed in ``assumed`` are documented defaults rather than published
# values; run reports echo them.
_BUILTIN = {
    "Cu": Material(
        name="Cu",
        density=8.90e3,
        cell_masses=(63.546 * AMU,),
        lattice_param=_CU_A,
        primitive_cell_volume=_CU_A**3 / 4.0,  # fcc
        v_eff=4760.0,
        k0=80.0,  # lower end of the quoted 80-170 range
        assumed=frozenset({"v_eff", "cell_masses"}),
    ),
    "TeO2": Material(
        name="TeO2",
        density=0.750 / 0.05**3,
        cell_masses=(127.60 * AMU,) * 4 + (15.999 * AMU,) * 8,
        lattice_param=_TEO2_A,
        primitive_cell_volume=_TEO2_A**2 * _TEO2_C,  # paratellurite, 4 TeO2 per cell
        v_eff=3000.0,
        k0=3.0,
        assumed=frozenset({"v_eff", "cell_masses", "lattice_param", "primitive_cell_volume"}),
    ),
}

CU_K0_RANGE = (80.0, 170.0)


def builtin_names():
    return tuple(_BUILTIN)


def builtin_material(name):
    try:
        return _BUILTIN[name]
    except KeyError:
        raise NotFoundError(f"unknown material {name!r}; known: {', '.join(_BUILTIN)}") from None


def _parse_section(name, section):
    unknown = set(section) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"[{name}] unknown key(s): {', '.join(sorted(unknown))}")
    try:
        masses = tuple(float(x) * AMU for x in section["cell_masses"].split(","))
        a = float(section["lattice_param"])
        return Material(
            name=name,
            density=float(section["density"]),
            cell_masses=masses,
            lattice_param=a,
            primitive_cell_volume=float(section.get("primitive_cell_volume", a**3)),
            v_eff=float(section["v_eff"]),
            k0=float(section["k0"]),
            assumed=frozenset(s.strip() for s in section.get("assumed", "").split(",") if s.strip()),
        )
    except KeyError as exc:
        raise ConfigError(f"[{name}] missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise ConfigError(f"[{name}] {exc}") from None


def load_materials(path):
    """Read a material database file; returns ``{name: Material}``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    return {name: _parse_section(name, parser[name]) for name in parser.sections()}


def dump_materials(materials, path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for mat in materials:
        parser[mat.name] = {
            "density": repr(mat.density),
            "cell_masses": ", ".join(repr(m / AMU) for m in mat.cell_masses),
            "lattice_param": repr(mat.lattice_param),
            "primitive_cell_volume": repr(mat.primitive_cell_volume),
            "v_eff": repr(mat.v_eff),
            "k0": repr(mat.k0),
            "assumed": ", ".join(sorted(mat.assumed)),
        }
    with open(path, "w") as fh:
        parser.write(fh)
