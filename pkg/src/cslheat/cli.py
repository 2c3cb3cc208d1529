"""Command-line front end.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
numerical failures.  Results go to stdout, or to ``--output DIR`` as
``<command>.csv`` / ``<command>.json``.
"""

import argparse
import json
import os
import sys

import numpy as np

from .diffusion import UNIT_LENGTH, PHYSICAL, profile
from .errors import CslHeatError, NumericError
from .heating import rate_nonwhite, rate_white
from .materials import debye_frequency
from .scenario import (
    SWEEP_COLUMNS,
    SWEEP_PARAMS,
    builtin_scenario,
    builtin_scenario_names,
    build_spectrum,
    load_scenario,
    parse_geometry,
    run_scenario,
    scenario_from_mapping,
    sweep,
    sweep_rows,
    versions,
    write_csv,
)
from .units import parse_quantity

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _add_physics(p, body=True):
    p.add_argument("--material", help="built-in material name (Cu, TeO2)")
    p.add_argument("--material-file", help="INI material database")
    p.add_argument("--lambda", dest="lam", help="collapse rate lambda [1/s]")
    p.add_argument("--rc", help="correlation length r_c (e.g. 1e-7, 100nm)")
    p.add_argument("--spectrum", help="flat | step:OMEGA | file:PATH")
    p.add_argument("--cutoff", help="shorthand for --spectrum step:OMEGA (rad/s)")
    p.add_argument("--tol", help="relative quadrature tolerance")
    p.add_argument("--density", help="override density [kg/m^3]")
    p.add_argument("--veff", help="override effective sound velocity [m/s]")
    p.add_argument("--k0", help="override conductivity coefficient [W/(m K^2)]")
    p.add_argument("--lattice-param", help="override lattice parameter")
    if body:
        p.add_argument("--geometry", help="sphere:R | cylinder:R | slab:L")
        p.add_argument("--ts", help="surface temperature (e.g. 0.03, 30mK)")
        p.add_argument("--convention", choices=(UNIT_LENGTH, PHYSICAL))
        p.add_argument("--samples", help="number of profile samples")


def build_parser():
    parser = argparse.ArgumentParser(prog="cslheat", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="scenario INI file")
    parser.add_argument("--output", help="write results into this directory")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="volumetric heating rate")
    _add_physics(p, body=False)
    p.add_argument("--strict", action="store_true", help="integrate only up to the Debye frequency")

    p = sub.add_parser("profile", help="steady temperature profile")
    _add_physics(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--qdot", help="heating rate [W/m^3]")
    src.add_argument("--from-rate", action="store_true", help="compute q_dot from the rate options")

    p = sub.add_parser("scenario", help="run a full scenario and emit a report")
    p.add_argument("name", nargs="?", choices=builtin_scenario_names())
    _add_physics(p)

    p = sub.add_parser("sweep", help="run a scenario over parameter values")
    p.add_argument("name", nargs="?", choices=builtin_scenario_names())
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma separated values (cutoff in rad/s)")
    p.add_argument("--workers", type=int, default=None)
    _add_physics(p)

    p = sub.add_parser("mc", help="Monte-Carlo energy growth on a model crystal")
    _add_physics(p, body=False)
    p.add_argument("--grid", type=int, default=4, help="cells per axis L")
    p.add_argument("--probe-points", type=int, default=9)
    p.add_argument("--probe-extent", type=float, default=4.0, help="in units of 1/r_c")
    p.add_argument("--dt", type=float, default=None, help="time step [s] (default 0.05/max omega)")
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--trajectories", type=int, default=1000)

    p = sub.add_parser("cumulant", help="trajectory vs second-cumulant master equation")
    p.add_argument("system", help="JSON system file")
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples (0 = skip)")

    p = sub.add_parser("convert-sde", help="Stratonovich <-> Ito drift conversion")
    p.add_argument("input")
    p.add_argument("output_file", metavar="output")
    p.add_argument("--to", choices=("ito", "strat"), required=True)
    return parser


def _mapping(args, body=True):
    """Translate physics flags into scenario/material mappings."""
    sec, mat = {}, {}
    for flag, key in (("material", "material"), ("material_file", "material_file"), ("lam", "lambda"),
                      ("rc", "rc"), ("spectrum", "spectrum"), ("tol", "tol")):
        value = getattr(args, flag, None)
        if value is not None:
            sec[key] = value
    if getattr(args, "cutoff", None) is not None:
        if "spectrum" in sec:
            raise UsageError("give either --spectrum or --cutoff")
        sec["spectrum"] = f"step:{args.cutoff}"
    if body:
        for flag, key in (("geometry", "geometry"), ("ts", "ts"), ("convention", "convention"),
                          ("samples", "samples")):
            value = getattr(args, flag, None)
            if value is not None:
                sec[key] = value
    for flag, key in (("density", "density"), ("veff", "v_eff"), ("k0", "k0"), ("lattice_param", "lattice_param")):
        value = getattr(args, flag, None)
        if value is not None:
            mat[key] = value
    return sec, mat


def _scenario(args, body=True):
    base = None
    if getattr(args, "name", None):
        base = builtin_scenario(args.name)
    if args.config:
        base = load_scenario(args.config, base)
    sec, mat = _mapping(args, body)
    if not body:
        # the rate-only commands never look at the body; keep the constructor satisfied
        if base is None:
            sec.setdefault("geometry", "sphere:1")
            sec.setdefault("ts", "1")
    if base is None and "material" not in sec:
        raise UsageError("a material is required (--material, --config or a built-in scenario)")
    return scenario_from_mapping(sec, mat, base)


class Emitter:
    def __init__(self, args):
        self.fmt = args.format
        self.outdir = args.output
        if self.outdir:
            os.makedirs(self.outdir, exist_ok=True)

    def _stream(self, name):
        if self.outdir:
            return open(os.path.join(self.outdir, f"{name}.{self.fmt}"), "w")
        return None

    def emit(self, name, header, rows, meta=None):
        fh = self._stream(name)
        out = fh or sys.stdout
        try:
            if self.fmt == "csv":
                write_csv(out, header, rows)
            else:
                doc = dict(meta or {})
                doc["columns"] = list(header)
                doc["rows"] = [[x if isinstance(x, str) else float(x) for x in row] for row in rows]
                json.dump(doc, out, indent=2)
                out.write("\n")
        finally:
            if fh:
                fh.close()

    def emit_doc(self, name, doc):
        fh = self._stream(name)
        out = fh or sys.stdout
        try:
            json.dump(doc, out, indent=2)
            out.write("\n")
        finally:
            if fh:
                fh.close()


def cmd_rate(args, em):
    s = _scenario(args, body=False)
    spectrum = build_spectrum(s.spectrum, s.params)
    if spectrum.kind == "flat" and not args.strict:
        rate = rate_white(s.params, s.material)
    else:
        rate = rate_nonwhite(spectrum, s.material, tol=s.tol, strict=args.strict)
    meta = {"inputs": s.inputs(), "defaults_applied": sorted(s.material.assumed), "versions": versions()}
    if args.strict:
        meta["debye_frequency"] = debye_frequency(s.material)
        meta["truncation_gap"] = rate.truncation_gap
    em.emit("rate", ("q_dot", "method", "error_estimate"), [(rate.q_dot, rate.method, rate.error_estimate)], meta)


def cmd_profile(args, em):
    if args.qdot is not None:
        # heating rate given directly; material still supplies k0 unless overridden
        if args.geometry is None or args.ts is None:
            raise UsageError("profile needs --geometry and --ts")
        if args.k0 is not None:
            k0 = float(args.k0)
        else:
            s = _scenario(args)
            k0 = s.material.k0
        geometry = parse_geometry(args.geometry)
        T_s = parse_quantity(args.ts, "temperature")
        prof = profile(T_s, float(args.qdot), k0, geometry, int(args.samples or 101), args.convention or UNIT_LENGTH)
    else:
        s = _scenario(args)
        prof = run_scenario(s, seed=args.seed).profile
    meta = {"core_delta_exact": prof.core_delta_exact, "core_delta_linearized": prof.core_delta_linearized,
            "q_dot": prof.q_dot, "convention": prof.convention}
    em.emit("profile", ("r", "T_exact", "T_linearized"), prof.samples, meta)


def cmd_scenario(args, em):
    s = _scenario(args)
    rep = run_scenario(s, seed=args.seed)
    if em.fmt == "json":
        doc = rep.to_dict()
        doc["profile"] = {"r": rep.profile.r.tolist(), "T_exact": rep.profile.T_exact.tolist(),
                          "T_linearized": rep.profile.T_linearized.tolist()}
        em.emit_doc("scenario", doc)
        return
    header = ("q_dot", "method", "error_estimate", "core_delta_exact", "core_delta_linearized")
    em.emit("scenario", header, [(rep.q_dot, rep.method, rep.error_estimate, rep.core_delta_exact,
                                  rep.core_delta_linearized)])
    if em.outdir:
        write_csv(os.path.join(em.outdir, "scenario_profile.csv"), ("r", "T_exact", "T_linearized"),
                  rep.profile.samples)
        with open(os.path.join(em.outdir, "scenario_report.json"), "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2)


def cmd_sweep(args, em):
    s = _scenario(args)
    values = [v for v in (x.strip() for x in args.values.split(",")) if v]
    try:
        values = [float(v) for v in values]
    except ValueError as exc:
        raise UsageError(f"--values: {exc}") from None
    reports = sweep(s, args.param, values, workers=args.workers, seed=args.seed)
    meta = {"inputs": s.inputs(), "param": args.param, "defaults_applied": sorted(s.material.assumed),
            "versions": versions(), "seed": args.seed}
    em.emit("sweep", SWEEP_COLUMNS, sweep_rows(s, args.param, values, reports), meta)


def cmd_mc(args, em):
    from .stochastic.montecarlo import McConfig, mc_energy_growth

    s = _scenario(args, body=False)
    cfg = McConfig(L=args.grid, probe_extent=args.probe_extent, probe_points=args.probe_points, dt=args.dt,
                   steps=args.steps, trajectories=args.trajectories, seed=args.seed)
    res = mc_energy_growth(cfg, s.params, s.material)
    meta = {"slope": res.slope, "stderr": res.stderr, "discrete_oracle": res.discrete_oracle,
            "phonon_oracle": res.phonon_oracle, "translation_oracle": res.translation_oracle,
            "continuum_rate": res.continuum_rate, "chi2": res.chi2, "dof": res.dof, "p_value": res.p_value,
            "model_violation": res.model_violation, "seed": args.seed, "versions": versions()}
    rows = list(zip(res.times, res.mean_energy, res.stderr_energy))
    em.emit("mc", ("t", "mean_energy", "stderr"), rows, meta)
    if em.fmt == "csv":
        print(f"# slope={res.slope:.8e} stderr={res.stderr:.8e} oracle={res.discrete_oracle:.8e} "
              f"p={res.p_value:.3g}", file=sys.stderr)


def _matrix(value, name):
    if isinstance(value, dict):
        arr = np.asarray(value["re"], dtype=float) + 1j * np.asarray(value.get("im", 0.0), dtype=float)
    else:
        arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        raise UsageError(f"{name} must be an array")
    return arr


def load_system(path):
    """JSON system file for the ``cumulant`` command.

    Keys: ``H0``, ``L`` (nested lists, or ``{"re": ..., "im": ...}``),
    ``noise`` (``{"kind": "white"|"exponential", "gamma": g, "tau_c": t}``),
    ``psi0``, ``t``, ``dt`` and optionally ``hbar`` (default 1), ``n_traj``
    (default 2000), ``n_out`` (default 10).
    """
    from .stochastic.cumulant import ExponentialNoise, SmallSystem, WhiteNoise

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read system file {path}: {exc}") from None
    known = {"dim", "H0", "L", "noise", "psi0", "t", "dt", "hbar", "n_traj", "n_out"}
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"unknown key(s) in system file: {', '.join(sorted(unknown))}")
    try:
        noise = doc["noise"]
        kind = noise.get("kind", "white")
        if kind == "white":
            nz = WhiteNoise(float(noise["gamma"]))
        elif kind == "exponential":
            nz = ExponentialNoise(float(noise["gamma"]), float(noise["tau_c"]))
        else:
            raise UsageError(f"unknown noise kind {kind!r}")
        sys_ = SmallSystem(_matrix(doc["H0"], "H0"), _matrix(doc["L"], "L"), nz, hbar=float(doc.get("hbar", 1.0)))
        if "dim" in doc and int(doc["dim"]) != sys_.dim:
            raise UsageError(f"dim {doc['dim']} does not match H0 ({sys_.dim})")
        psi0 = _matrix(doc["psi0"], "psi0")
        return sys_, psi0, float(doc["t"]), float(doc["dt"]), int(doc.get("n_traj", 2000)), int(doc.get("n_out", 10))
    except KeyError as exc:
        raise UsageError(f"system file is missing key {exc.args[0]!r}") from None


def cmd_cumulant(args, em):
    from .stochastic.cumulant import bootstrap_radius, master_series, trace_distance, trajectory_series

    sys_, psi0, t, dt, n_traj, n_out = load_system(args.system)
    rho0 = np.outer(psi0, psi0.conj())
    times, me = master_series(sys_, rho0, t, dt, n_out=n_out)
    out = trajectory_series(sys_, psi0, t, dt, n_traj, args.seed, n_out=n_out, keep_states=args.bootstrap > 0)
    rows = [(ti, trace_distance(a, b)) for ti, a, b in zip(times, me, out[1])]
    meta = {"seed": args.seed, "n_traj": n_traj, "versions": versions()}
    if args.bootstrap > 0:
        meta["bootstrap_radius_final"] = bootstrap_radius(out[2], n_boot=args.bootstrap, seed=args.seed)
    em.emit("cumulant", ("t", "trace_distance"), rows, meta)
    if args.bootstrap > 0 and em.fmt == "csv":
        print(f"# bootstrap_radius_final={meta['bootstrap_radius_final']:.8e}", file=sys.stderr)


def cmd_convert_sde(args, em):
    from .stochastic.sde import dump_sde, ito_to_strat, load_sde, strat_to_ito

    try:
        sde = load_sde(args.input)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read SDE file {args.input}: {exc}") from None
    dump_sde(strat_to_ito(sde) if args.to == "ito" else ito_to_strat(sde), args.output_file)


COMMANDS = {
    "rate": cmd_rate,
    "profile": cmd_profile,
    "scenario": cmd_scenario,
    "sweep": cmd_sweep,
    "mc": cmd_mc,
    "cumulant": cmd_cumulant,
    "convert-sde": cmd_convert_sde,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        COMMANDS[args.command](args, Emitter(args))
    except NumericError as exc:
        print(f"cslheat: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, CslHeatError, OSError) as exc:
        print(f"cslheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
