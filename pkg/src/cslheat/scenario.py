"""Scenario runner: material -> noise -> heating rate -> temperature profile.

Config files are INI with two sections, both optional::

    [scenario]
    builtin = cu-cuore        ; start from a built-in scenario
    material = Cu             ; built-in name, or a name defined in material_file
    material_file = mats.ini
    lambda = 1e-8
    rc = 1e-7 m
    spectrum = flat           ; flat | step:OMEGA | file:PATH
    geometry = sphere:3.1cm   ; sphere:R | cylinder:R | slab:HALF_WIDTH
    ts = 30 mK
    convention = unit-length  ; unit-length | physical
    tol = 1e-8
    samples = 101

    [material]                ; overrides applied on top of the material record
    density = 8.9e3
    v_eff = 4760
    k0 = 80
    lattice_param = 3.61478e-10

Unknown keys are rejected.
"""

import configparser
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy

from . import __version__
from .diffusion import UNIT_LENGTH, Geometry, profile
from .errors import ConfigError, CslHeatError, DomainError
from .heating import rate_nonwhite, rate_white
from .materials import builtin_material, load_materials
from .noise import CslParams, NoiseSpectrum, load_spectrum
from .units import parse_quantity

SCENARIO_KEYS = ("builtin", "material", "material_file", "lambda", "rc", "spectrum", "geometry",
                 "ts", "convention", "tol", "samples")
MATERIAL_KEYS = ("density", "v_eff", "k0", "lattice_param")
SWEEP_PARAMS = ("lambda", "rc", "cutoff")


def parse_geometry(text):
    kind, _, size = str(text).partition(":")
    if not size:
        raise ConfigError(f"geometry must look like sphere:R, cylinder:R or slab:L, got {text!r}")
    return Geometry(kind.strip(), parse_quantity(size, "length"))


def format_geometry(geometry):
    return f"{geometry.kind}:{geometry.length!r}"


def parse_spectrum_spec(text):
    """Validate ``flat``, ``step:OMEGA`` or ``file:PATH``; returns the normalised spec."""
    text = str(text).strip()
    if text == "flat":
        return text
    kind, _, arg = text.partition(":")
    if kind == "step":
        try:
            omega = float(arg)
        except ValueError:
            raise ConfigError(f"bad cutoff in spectrum {text!r}") from None
        return f"step:{omega!r}"
    if kind == "file" and arg:
        return text
    raise ConfigError(f"spectrum must be flat, step:OMEGA or file:PATH, got {text!r}")


def build_spectrum(spec, params):
    if spec == "flat":
        return NoiseSpectrum.flat(params)
    kind, _, arg = spec.partition(":")
    if kind == "step":
        return NoiseSpectrum.step_cutoff(params, float(arg))
    return load_spectrum(arg, params)


@dataclass(frozen=True)
class Scenario:
    name: str
    material: object  # Material
    params: CslParams
    spectrum: str
    geometry: Geometry
    T_s: float
    convention: str = UNIT_LENGTH
    tol: float = 1e-8
    samples: int = 101
    profile_path: str = None

    def __post_init__(self):
        object.__setattr__(self, "spectrum", parse_spectrum_spec(self.spectrum))
        if not self.T_s > 0:
            raise DomainError("T_s must be > 0")
        if self.samples < 2:
            raise DomainError("samples must be >= 2")

    def inputs(self):
        mat = self.material
        return {
            "scenario": self.name,
            "material": mat.name,
            "density": mat.density,
            "cell_mass": mat.cell_mass,
            "lattice_param": mat.lattice_param,
            "primitive_cell_volume": mat.primitive_cell_volume,
            "v_eff": mat.v_eff,
            "k0": mat.k0,
            "lambda": self.params.lam,
            "rc": self.params.r_c,
            "spectrum": self.spectrum,
            "geometry": format_geometry(self.geometry),
            "ts": self.T_s,
            "convention": self.convention,
            "tol": self.tol,
            "samples": self.samples,
        }


_BUILTIN_SCENARIOS = {
    "cu-cuore": dict(material="Cu", lam=1e-8, r_c=1e-7, geometry=Geometry.sphere(1.0), T_s=0.03),
    "teo2-cuore": dict(material="TeO2", lam=1e-8, r_c=1e-7, geometry=Geometry.sphere(0.031), T_s=0.01),
}


def builtin_scenario_names():
    return tuple(_BUILTIN_SCENARIOS)


def builtin_scenario(name):
    try:
        spec = _BUILTIN_SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(_BUILTIN_SCENARIOS)}") from None
    return Scenario(name=name, material=builtin_material(spec["material"]),
                    params=CslParams(spec["lam"], spec["r_c"]), spectrum="flat",
                    geometry=spec["geometry"], T_s=spec["T_s"])


def _material_overrides(section):
    out = {}
    for key, value in section.items():
        if key not in MATERIAL_KEYS:
            raise ConfigError(f"[material] unknown key {key!r}")
        try:
            out[key] = parse_quantity(value, "length") if key == "lattice_param" else float(value)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"[material] {key}: {exc}") from None
    return out


def load_scenario(path, base=None):
    """Build a scenario from an INI file, optionally on top of ``base``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    extra = set(parser.sections()) - {"scenario", "material"}
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    sec = dict(parser["scenario"]) if parser.has_section("scenario") else {}
    mat_sec = dict(parser["material"]) if parser.has_section("material") else {}
    return scenario_from_mapping(sec, mat_sec, base)


def scenario_from_mapping(sec, mat_sec=None, base=None):
    """Apply ``[scenario]``/``[material]`` style mappings; every key is checked."""
    for key in sec:
        if key not in SCENARIO_KEYS:
            raise ConfigError(f"[scenario] unknown key {key!r}")
    if "builtin" in sec:
        base = builtin_scenario(sec["builtin"])
    material = base.material if base else None
    try:
        if "material" in sec:
            if "material_file" in sec:
                table = load_materials(sec["material_file"])
                if sec["material"] not in table:
                    raise ConfigError(f"material {sec['material']!r} not in {sec['material_file']}")
                material = table[sec["material"]]
            else:
                material = builtin_material(sec["material"])
        if material is None:
            raise ConfigError("[scenario] material is required")
        overrides = _material_overrides(mat_sec or {})
        if overrides:
            material = material.with_overrides(**overrides)
        lam = float(sec["lambda"]) if "lambda" in sec else (base.params.lam if base else None)
        r_c = parse_quantity(sec["rc"], "length") if "rc" in sec else (base.params.r_c if base else None)
        if lam is None or r_c is None:
            raise ConfigError("[scenario] lambda and rc are required")
        geometry = parse_geometry(sec["geometry"]) if "geometry" in sec else (base.geometry if base else None)
        T_s = parse_quantity(sec["ts"], "temperature") if "ts" in sec else (base.T_s if base else None)
        if geometry is None or T_s is None:
            raise ConfigError("[scenario] geometry and ts are required")
        return Scenario(
            name=sec.get("builtin", base.name if base else "custom"),
            material=material,
            params=CslParams(lam, r_c),
            spectrum=sec.get("spectrum", base.spectrum if base else "flat"),
            geometry=geometry,
            T_s=T_s,
            convention=sec.get("convention", base.convention if base else UNIT_LENGTH),
            tol=float(sec["tol"]) if "tol" in sec else (base.tol if base else 1e-8),
            samples=int(sec["samples"]) if "samples" in sec else (base.samples if base else 101),
            profile_path=base.profile_path if base else None,
        )
    except CslHeatError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"bad value: {exc}") from None


@dataclass(frozen=True)
class RunReport:
    inputs: dict
    q_dot: float
    method: str
    error_estimate: float
    core_delta_exact: float
    core_delta_linearized: float
    profile_path: str
    versions: dict
    seed: object
    defaults_applied: tuple
    profile: object = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            "inputs": self.inputs,
            "q_dot": self.q_dot,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "core_delta_exact": self.core_delta_exact,
            "core_delta_linearized": self.core_delta_linearized,
            "profile_path": self.profile_path,
            "versions": self.versions,
            "seed": self.seed,
            "defaults_applied": list(self.defaults_applied),
        }


def versions():
    return {"cslheat": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def scenario_rate(s):
    spectrum = build_spectrum(s.spectrum, s.params)
    if spectrum.kind == "flat":
        return rate_white(s.params, s.material)
    return rate_nonwhite(spectrum, s.material, tol=s.tol)


def run_scenario(s, seed=None):
    """Deterministic rate -> profile chain.  The profile is written if ``profile_path`` is set."""
    rate = scenario_rate(s)
    prof = profile(s.T_s, rate.q_dot, s.material.k0, s.geometry, s.samples, s.convention)
    if s.profile_path:
        write_csv(s.profile_path, ("r", "T_exact", "T_linearized"), prof.samples)
    return RunReport(
        inputs=s.inputs(),
        q_dot=rate.q_dot,
        method=rate.method,
        error_estimate=rate.error_estimate,
        core_delta_exact=prof.core_delta_exact,
        core_delta_linearized=prof.core_delta_linearized,
        profile_path=s.profile_path,
        versions=versions(),
        seed=seed,
        defaults_applied=tuple(sorted(s.material.assumed)),
        profile=prof,
    )


def _with_value(s, param, value):
    if param == "lambda":
        return replace(s, params=CslParams(value, s.params.r_c))
    if param == "rc":
        return replace(s, params=CslParams(s.params.lam, value))
    return replace(s, spectrum=f"step:{value!r}")


def sweep(s, param, values, workers=None, seed=None):
    """One report per value, in input order.  ``cutoff`` values are Omega in rad/s."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")

    def one(item):
        i, v = item
        try:
            return run_scenario(_with_value(s, param, v), seed=seed)
        except CslHeatError as exc:
            exc.args = (f"row {i} ({param}={v!r}): {exc}",) + exc.args[1:]
            raise

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, enumerate(values)))


SWEEP_COLUMNS = ("value", "cutoff_ratio", "q_dot", "error_estimate", "core_delta_exact", "core_delta_linearized")


def sweep_rows(s, param, values, reports):
    rows = []
    for v, rep in zip(values, reports):
        ratio = float(v) * s.params.r_c / s.material.v_eff if param == "cutoff" else math.nan
        rows.append((float(v), ratio, rep.q_dot, rep.error_estimate, rep.core_delta_exact,
                     rep.core_delta_linearized))
    return rows


def format_number(x):
    if isinstance(x, str):
        return x
    return f"{float(x):.8e}"


def write_csv(path_or_file, header, rows):
    lines = [",".join(header)] + [",".join(format_number(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
