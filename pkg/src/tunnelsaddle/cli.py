"""Command-line surface for the library.

Subcommands: trace, saddle, action, series, rate, verify, bounce.
Every run resolves its parameters from hard defaults, then an optional
INI-style config file ([common] section plus one section per
subcommand), then explicit flags, and echoes the fully-resolved set
into each output file next to the package version. JSON output is
sorted and stable: two runs with the same resolved config differ only
in the timestamp field.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

import argparse
import configparser
import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone

import numpy as np

from .action import action_decomposed
from .contour import cycle_integral, extract_log_coefficient, real_line_S
from .elliptic import JacobiReference
from .errors import DomainError, TunnelError
from .oracle import default_grid, evolve, fit_gamma, gamma_sweep, \
    relax_initial_state
from .potential import Potential, bounce_action_identity, bounce_time, \
    wkb_actions
from .saddle import solve_saddle
from .trajectory import IntegratorConfig, integrate_eom, \
    velocity_phase_winding
from .verify import run_suite

__version__ = "0.1.0"

_REQ = object()


class UsageError(Exception):
    pass


# -- config resolution -------------------------------------------------------

# per-command parameter schema: name -> (converter, default); _REQ marks
# parameters that must come from a flag or the config file
SCHEMAS = {
    "trace": {
        "n": ("int", 4), "x": ("float", 0.0), "t": ("float", 100.0),
        "eps_re": ("float", None), "eps_im": ("float", None),
        "q_re": ("float", None), "q_im": ("float", None),
        "tol": ("float", 1e-12), "grid_points": ("int", 401),
    },
    "saddle": {
        "n": ("int", 4), "x": ("float", 0.0), "y": ("float", _REQ),
        "t": ("float", _REQ), "eps_re": ("float", None),
        "eps_im": ("float", None), "tol": ("float", 1e-12),
    },
    "action": {
        "n": ("int", 4), "x": ("float", 0.0), "y": ("float", _REQ),
        "t": ("float", _REQ), "tol": ("float", 1e-12),
    },
    "series": {
        "n": ("int", 4), "x": ("float", 0.0), "y": ("float", None),
        "eps_re": ("float", 0.0), "eps_im": ("float", 1.0),
        "samples": ("int", 10), "mod_min": ("float", 3e-4),
        "mod_max": ("float", 1e-2),
    },
    "rate": {
        "n": ("int", 4), "t": ("float", 60.0),
        "hbar": ("floatlist", [0.06, 0.08, 0.10, 0.12, 0.15]),
        "probe": ("float", 2.0),
    },
    "verify": {
        "suite": ("str", "all"),
    },
    "bounce": {
        "n": ("int", 4), "x": ("float", 0.0), "y": ("float", None),
    },
}

_FLAG_HELP = {
    "n": "family exponent (2 selects the pure parabola)",
    "x": "real starting point / inner endpoint",
    "y": "outer endpoint or probe position",
    "t": "target time (trace: integration span; rate: evolution span)",
    "eps_re": "Re of the energy (saddle: Newton seed; series: ray phase)",
    "eps_im": "Im of the energy",
    "q_re": "Re of the elliptic parameter q (quartic only)",
    "q_im": "Im of the elliptic parameter q (quartic only)",
    "tol": "relative ODE tolerance",
    "hbar": "effective hbar; repeat the flag for a sweep",
    "probe": "current-probe position outside the barrier",
    "samples": "number of energy moduli on the ray",
    "mod_min": "smallest energy modulus on the ray",
    "mod_max": "largest energy modulus on the ray",
    "grid_points": "loci grid resolution per axis",
    "suite": "check suite name (contour, trajectory, action, oracle, all)",
}


def _convert(kind, raw, name):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floatlist":
            return [float(tok) for tok in raw.replace(",", " ").split()]
        return str(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {name}")


def _resolve(args, command):
    """Merge defaults, config-file values, and flags for one command."""
    schema = SCHEMAS[command]
    file_vals = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        try:
            read = cp.read(args.config)
        except configparser.Error as exc:
            raise UsageError(f"bad config file: {exc}")
        if not read:
            raise UsageError(f"config file not found: {args.config}")
        for sec in ("common", command):
            if cp.has_section(sec):
                file_vals.update(dict(cp.items(sec)))
    cfg = {}
    for name, (kind, default) in schema.items():
        val = getattr(args, name, None)
        if val is None and name in file_vals:
            val = _convert(kind, file_vals[name], name)
        if val is None:
            if default is _REQ:
                raise UsageError(f"missing required parameter --{_flag(name)}"
                                 f" (or config key {name})")
            val = default
        cfg[name] = val
    return cfg


def _flag(name):
    return name.replace("_", "-")


def _make_pot(n):
    return Potential.harmonic() if n == 2 else Potential.well(n)


# -- output plumbing ----------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _cfg_line(cfg):
    parts = []
    for key in sorted(cfg):
        val = cfg[key]
        if isinstance(val, list):
            val = ",".join(repr(v) for v in val)
        parts.append(f"{key}={val}")
    return " ".join(parts)


def _emit_json(command, cfg, payload, out):
    doc = {"command": command, "version": __version__, "config": cfg,
           "timestamp": datetime.now(timezone.utc).isoformat()}
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default)
    if out:
        with open(out + ".json", "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path, command, cfg, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# version={__version__} command={command}\n")
        fh.write(f"# {_cfg_line(cfg)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- loci sampling ------------------------------------------------------------

def _loci_points(pot, epsilon, lim, n_grid):
    """Zero crossings of Im zdot^2 on a grid, split by the sign of Re.

    zdot^2 = 2(eps - V(z)) is single-valued, so its imaginary part
    vanishes exactly where zdot is purely real or purely imaginary;
    Re zdot^2 < 0 picks the Re zdot = 0 branch. Crossings are located
    by linear interpolation along both grid directions.
    """
    xs = np.linspace(-lim, lim, n_grid)
    U = pot.w(xs[:, None] + 1j * xs[None, :], epsilon)
    F = U.imag
    segs = []
    prod = F[:-1, :] * F[1:, :]
    i, j = np.nonzero(prod < 0)
    s = F[i, j] / (F[i, j] - F[i + 1, j])
    segs.append((xs[i] * (1 - s) + xs[i + 1] * s, xs[j]))
    prod = F[:, :-1] * F[:, 1:]
    i, j = np.nonzero(prod < 0)
    s = F[i, j] / (F[i, j] - F[i, j + 1])
    segs.append((xs[i], xs[j] * (1 - s) + xs[j + 1] * s))
    zr = np.concatenate([p[0] for p in segs])
    zi = np.concatenate([p[1] for p in segs])
    re_u = pot.w(zr + 1j * zi, epsilon).real
    return zr, zi, re_u


# -- subcommand handlers ------------------------------------------------------

def cmd_trace(cfg, out):
    if out is None:
        raise UsageError("trace writes files and needs --out")
    pot = _make_pot(cfg["n"])
    have_eps = cfg["eps_re"] is not None or cfg["eps_im"] is not None
    have_q = cfg["q_re"] is not None or cfg["q_im"] is not None
    if have_eps and have_q:
        raise UsageError("give either an energy or a q parameter, not both")
    if not (have_eps or have_q):
        raise UsageError("trace needs --eps-re/--eps-im or --q-re/--q-im")

    v0 = None
    x = cfg["x"]
    reference = None
    if have_q:
        if pot.family_exponent != 4:
            raise UsageError("the q parameterization is quartic-only (n=4)")
        q = complex(cfg["q_re"] or 0.0, cfg["q_im"] or 0.0)
        jac = JacobiReference(q)
        epsilon, spread = jac.energy()
        v0 = jac.v0
        x = 0.0
        reference = {"q": q, "measured_energy": epsilon,
                     "energy_spread": spread,
                     "candidate_formulas": jac.candidate_energy_formulas()}
    else:
        epsilon = complex(cfg["eps_re"] or 0.0, cfg["eps_im"] or 0.0)

    icfg = IntegratorConfig(rel_tol=cfg["tol"], t_max=cfg["t"])
    traj = integrate_eom(pot, x, epsilon, config=icfg, v0=v0,
                         dual_frame=pot.family_exponent == 4)

    rows = zip(traj.t, traj.z.real, traj.z.imag, traj.v.real, traj.v.imag)
    _write_csv(out + "_trajectory.csv", "trace", cfg,
               ["t", "re_z", "im_z", "re_v", "im_v"], rows)

    lim = 1.25 * max(float(np.max(np.abs(traj.z.real))),
                     float(np.max(np.abs(traj.z.imag))), 1.0)
    if not pot.is_harmonic:
        lim = min(max(lim, 1.5 * pot.barrier_exit()),
                  4.0 * pot.barrier_exit())
    zr, zi, re_u = _loci_points(pot, epsilon, lim, cfg["grid_points"])
    branch = np.where(re_u <= 0, "re_zdot_zero", "im_zdot_zero")
    _write_csv(out + "_loci.csv", "trace", cfg,
               ["re_z", "im_z", "branch"], zip(zr, zi, branch))

    payload = {
        "epsilon": epsilon,
        "start": x,
        "points": len(traj.t),
        "t_end": traj.t_end,
        "escaped": traj.escaped,
        "exit_time": traj.exit_time,
        "cycles": traj.N,
        "energy_drift": traj.drift,
        "winding": velocity_phase_winding(traj),
        "files": [out + "_trajectory.csv", out + "_loci.csv"],
    }
    if reference is not None:
        payload["reference"] = reference
    _emit_json("trace", cfg, payload, out)
    return 0


def cmd_saddle(cfg, out):
    pot = _make_pot(cfg["n"])
    if cfg["t"] <= 2 * np.pi:
        raise DomainError("target time must exceed one harmonic period "
                          "2*pi; no multi-cycle trajectory fits below it")
    seed = None
    if cfg["eps_re"] is not None or cfg["eps_im"] is not None:
        seed = complex(cfg["eps_re"] or 0.0, cfg["eps_im"] or 0.0)
    sad = solve_saddle(pot, cfg["x"], cfg["y"], cfg["t"], seed=seed,
                       ode_rtol=cfg["tol"])
    _emit_json("saddle", cfg, {"saddle": sad.as_dict()}, out)
    return 0


def cmd_action(cfg, out):
    pot = _make_pot(cfg["n"])
    sad = solve_saddle(pot, cfg["x"], cfg["y"], cfg["t"],
                       ode_rtol=cfg["tol"])
    br = action_decomposed(pot, sad, ode_rtol=cfg["tol"])
    payload = dataclasses.asdict(br)
    payload["route_agreement"] = (abs(br.S_direct - br.S_contour)
                                  / abs(br.S_contour))
    _emit_json("action", cfg, {"saddle": sad.as_dict(), "action": payload},
               out)
    return 0


def cmd_series(cfg, out):
    pot = _make_pot(cfg["n"])
    y = cfg["y"]
    if y is None:
        y = 2.0 if pot.family_exponent == 4 else 1.5 * pot.barrier_exit()
        cfg = dict(cfg, y=y)
    phase = complex(cfg["eps_re"], cfg["eps_im"])
    if phase == 0:
        raise UsageError("ray direction --eps-re/--eps-im must be nonzero")
    phase /= abs(phase)
    if cfg["samples"] < 6:
        raise UsageError("need at least 6 samples for the series fit")
    moduli = np.geomspace(cfg["mod_min"], cfg["mod_max"], cfg["samples"])
    eps = moduli * phase

    coeffs = extract_log_coefficient(pot, cfg["x"], y, eps)
    svals = [real_line_S(pot, cfg["x"], y, e) for e in eps]
    ivals = [cycle_integral(pot, e) for e in eps]
    if out:
        rows = [(abs(e), s.real, s.imag, i.real, i.imag)
                for e, s, i in zip(eps, svals, ivals)]
        _write_csv(out + "_series.csv", "series", cfg,
                   ["abs_eps", "re_S", "im_S", "re_I", "im_I"], rows)

    payload = {"coefficients": dataclasses.asdict(coeffs),
               "ray_phase": phase}
    if out:
        payload["files"] = [out + "_series.csv"]
    _emit_json("series", cfg, payload, out)
    return 0


def cmd_rate(cfg, out):
    pot = _make_pot(cfg["n"])
    if pot.is_harmonic:
        raise DomainError("decay rate needs a barrier; the parabola "
                          "has none")
    probe = cfg["probe"]
    if probe <= pot.barrier_exit():
        raise DomainError(f"probe {probe} sits inside the barrier "
                          f"(exit at {pot.barrier_exit():.6g})")
    probe2 = probe + 0.35
    hbars = cfg["hbar"]

    if len(hbars) == 1:
        h = hbars[0]
        grid = default_grid(pot, h)
        psi = relax_initial_state(grid, pot)
        run = evolve(grid, psi, pot, cfg["t"], probes=(probe, probe2))
        fits = [fit_gamma(run, probe)]
        gammas = [fits[0].gamma]
        slope = intercept = None
    else:
        sweep = gamma_sweep(pot, hbars=tuple(hbars), probe=probe,
                            probe2=probe2, t_final=cfg["t"])
        fits, gammas = list(sweep.fits), list(sweep.gammas)
        slope, intercept = sweep.slope, sweep.intercept

    rows = [{"hbar": h, "gamma": g, "r_squared": f.r_squared,
             "window": list(f.fit_window), "method": f.method}
            for h, g, f in zip(hbars, gammas, fits)]
    if out:
        _write_csv(out + "_rates.csv", "rate", cfg,
                   ["hbar", "inv_hbar", "gamma", "log_gamma", "r_squared"],
                   [(h, 1.0 / h, g, float(np.log(g)), f.r_squared)
                    for h, g, f in zip(hbars, gammas, fits)])
    payload = {"rates": rows, "slope": slope, "intercept": intercept,
               "probes": [probe, probe2]}
    if out:
        payload["files"] = [out + "_rates.csv"]
    _emit_json("rate", cfg, payload, out)
    return 0


def cmd_verify(cfg, out):
    try:
        report = run_suite(cfg["suite"])
    except KeyError as exc:
        raise UsageError(exc.args[0])
    _emit_json("verify", cfg, report, out)
    return 0 if report["passed"] else 1


def cmd_bounce(cfg, out):
    pot = _make_pot(cfg["n"])
    if pot.is_harmonic:
        raise DomainError("the parabola has no bounce")
    b = pot.barrier_exit()
    y = cfg["y"]
    if y is None:
        y = 2.0 if pot.family_exponent == 4 else 1.5 * b
        cfg = dict(cfg, y=y)
    x = cfg["x"]
    if not (0.0 <= x < b):
        raise DomainError(f"inner endpoint must sit inside [0, b); "
                          f"b = {b:.6g}")
    wb = wkb_actions(pot, x, y)
    r_min = max(x, 0.05 * b)
    s_tau, s_dir = bounce_action_identity(pot, r_min)
    payload = {
        "barrier_exit": b,
        "S_E": wb.S_E,
        "S_free": wb.S_free,
        "identity": {
            "r_min": r_min,
            "time_route": s_tau,
            "line_route": s_dir,
            "agreement": abs(s_tau - s_dir) / max(abs(s_dir), 1e-300),
        },
        "roll_time": bounce_time(pot, r_min),
    }
    _emit_json("bounce", cfg, payload, out)
    return 0


HANDLERS = {
    "trace": cmd_trace, "saddle": cmd_saddle, "action": cmd_action,
    "series": cmd_series, "rate": cmd_rate, "verify": cmd_verify,
    "bounce": cmd_bounce,
}

_DESCRIPTIONS = {
    "trace": "integrate one complex-energy trajectory and its loci",
    "saddle": "solve the (x, y, t) boundary problem for the energy",
    "action": "solve a saddle and cross-check its action routes",
    "series": "fit the small-energy expansion along one ray",
    "rate": "measure the decay rate by direct evolution",
    "verify": "run a named invariant suite",
    "bounce": "zero-energy barrier quantities and the action identity",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tunnelsaddle",
        description="complex-energy trajectories, saddle actions, and a "
                    "direct decay-rate oracle for 1D barrier potentials")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        sp = sub.add_parser(command, description=_DESCRIPTIONS[command],
                            help=_DESCRIPTIONS[command])
        for name, (kind, _default) in schema.items():
            if command == "verify" and name == "suite":
                sp.add_argument("suite", nargs="?", default=None,
                                help=_FLAG_HELP[name])
                continue
            kw = {"help": _FLAG_HELP.get(name, name), "default": None}
            if kind == "floatlist":
                kw.update(type=float, action="append", metavar="H")
            elif kind == "int":
                kw.update(type=int)
            else:
                kw.update(type=float)
            sp.add_argument(f"--{_flag(name)}", dest=name, **kw)
        sp.add_argument("--out", default=None,
                        help="output path prefix (JSON to stdout if absent)")
        sp.add_argument("--config", default=None,
                        help="INI config file; flags override it")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args, args.command)
        return HANDLERS[args.command](cfg, args.out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except TunnelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
