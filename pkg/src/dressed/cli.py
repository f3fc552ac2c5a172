"""Command-line front end.

Every subcommand writes a table (CSV or JSON) together with an audit log of
the conventions it relied on.  Lengths are in units of 1/m_e, energies in
m_e, unless ``--mass`` says otherwise.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .constants import ALPHA

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
CONFIG_ENV = "DRESSED_CONFIG"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mass: float = 1.0
    alpha: float = ALPHA
    format: str = "csv"
    output: str = "-"
    rel_tol: float = 1e-8
    q_max: float = 20.0
    n_theta: int = 32
    n_phi: int = 64

    def __post_init__(self):
        for f in fields(self):
            if f.type in ("float", "int"):
                value = getattr(self, f.name)
                if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                    raise UsageError(f"config value {f.name} must be a positive number, got {value!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")

    @property
    def charge(self) -> float:
        return math.sqrt(self.alpha)


_CASTS = {"float": float, "int": int, "str": str}


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    known = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _CASTS[known[key]](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_config(args) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    values = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        values.update(read_config_file(path))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

class Audit:
    def __init__(self):
        self.records = []

    def add(self, decision_id, value, topic):
        self.records.append({"id": decision_id, "value": _plain(value), "topic": topic})


@dataclass
class Report:
    table: dict
    diagnostics: dict
    audit: Audit


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _csv_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % x
    return str(x)


def render_csv(table: dict) -> str:
    columns = list(table)
    rows = len(next(iter(table.values()))) if table else 0
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for i in range(rows):
        buf.write(",".join(_csv_cell(table[c][i]) for c in columns) + "\n")
    return buf.getvalue()


def render_json(report: Report, config: RunConfig, command: str) -> str:
    doc = {
        "meta": {
            "command": command,
            "config": _plain(asdict(config)),
            "audit": report.audit.records,
            "version": __version__,
            "diagnostics": _plain(report.diagnostics),
        },
        "data": _plain(report.table),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_report(report: Report, config: RunConfig, command: str, stdout=None, stderr=None):
    """Write ``report`` in the configured format.

    CSV carries the table only; the audit log and scalar diagnostics go to
    ``<output>.meta.json`` next to it, or to stderr when writing to stdout.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if config.format == "json":
        payload, meta = render_json(report, config, command), None
    else:
        payload = render_csv(report.table)
        meta = render_json(Report({}, report.diagnostics, report.audit), config, command)
    if config.output == "-":
        stdout.write(payload)
        if meta is not None:
            stderr.write(meta)
        return
    with open(config.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
    if meta is not None:
        with open(config.output + ".meta.json", "w", encoding="utf-8", newline="") as fh:
            fh.write(meta)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _vector(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three components, got {text!r}")
    return np.array(parts)


def _complex(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from exc
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def _times(text: str):
    try:
        return [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated times, got {text!r}") from exc


def _delta_arg(text: str):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError("delta must be non-negative")
    return value


def _grid(r_min, r_max, points):
    if not (0 < r_min < r_max) or points < 0:
        raise ValueError("need 0 < r-min < r-max and points >= 0")
    if points == 0:
        return np.empty(0)
    return np.geomspace(r_min, r_max, points) if points > 1 else np.array([r_min])


def _base_audit(cfg: RunConfig) -> Audit:
    audit = Audit()
    audit.add("units", {"mass": cfg.mass, "lengths": "1/m_e", "energies": "m_e"}, "natural units")
    audit.add("coupling", {"alpha": cfg.alpha, "e": cfg.charge}, "e^2 = alpha, single charge symbol")
    return audit


def cmd_potential(args, cfg):
    from .meanfield import potential_rest

    r = _grid(args.r_min, args.r_max, args.points)
    a0 = potential_rest(r, cfg.mass, cfg.charge) if r.size else r
    coulomb = cfg.charge / r
    audit = _base_audit(cfg)
    audit.add("potential.kernel", "A0 = (2e/pi r) int_0^{2mr} K0", "rest-frame smeared potential")
    audit.add("potential.log_coefficient", "series 4em/pi; prose m/pi not used", "small-r behaviour")
    return Report({"r": r, "a0": a0, "coulomb": coulomb, "ratio": a0 / coulomb if r.size else r}, {}, audit)


def cmd_selfenergy(args, cfg):
    from .meanfield import self_energy

    se = self_energy(cfg.mass, cfg.charge)
    audit = _base_audit(cfg)
    audit.add("selfenergy.integral", "(8/pi^2)(em)^2 int_0^inf K0(2mr)^2 dr", "field energy of resting charge")
    audit.add("selfenergy.quadrature", {"value": se.quadrature.value, "error": se.quadrature.error_estimate},
              "adaptive Gauss-Kronrod, exponential map")
    data = {"numeric": [se.numeric], "analytic": [se.analytic], "rel_err": [se.rel_err]}
    return Report(data, {"numeric": se.numeric, "analytic": se.analytic, "rel_err": se.rel_err}, audit)


def cmd_moment(args, cfg):
    from .meanfield import moment_form_factor, vector_potential_moment

    r = _grid(args.r_min, args.r_max, args.points)
    spin = np.array([0.0, 0.0, 0.5])
    points = r[:, None] * np.array([1.0, 0.0, 0.0])
    a = vector_potential_moment(points, spin, cfg.mass, cfg.charge) if r.size else np.empty((0, 3))
    mu = cfg.charge / cfg.mass * spin
    dipole = np.cross(-points / r[:, None] ** 3, mu) if r.size else np.empty((0, 3))
    phi = moment_form_factor(r, cfg.mass) if r.size else r
    audit = _base_audit(cfg)
    audit.add("moment.direction", {"spin": spin, "field_points": "along +x"}, "spin magnetic moment")
    audit.add("moment.magnetic_moment", "mu = (e/m) s", "point-dipole reference")
    return Report({"r": r, "phi": phi, "r_phi": r * phi, "a_y": a[:, 1], "dipole_a_y": dipole[:, 1]}, {}, audit)


def cmd_uniform(args, cfg):
    from .meanfield import lorentz_residual, potential_uniform

    r = _grid(args.r_min, args.r_max, args.points)
    direction = args.direction / np.linalg.norm(args.direction)
    rows = [potential_uniform(x * direction, args.t, args.k0, 0.5, cfg.mass, cfg.charge) for x in r]
    rows = np.array(rows).reshape(-1, 4)
    diag = {}
    if args.lorentz_at is not None:
        res, scale = lorentz_residual(args.lorentz_at * direction, args.t, args.k0, 0.5, cfg.mass, cfg.charge)
        diag = {"lorentz_residual": res, "lorentz_scale": scale,
                "lorentz_relative": res / scale if scale else 0.0}
    audit = _base_audit(cfg)
    audit.add("uniform.split", "exact k0=0 fields plus numerically integrated remainder", "mode sum")
    audit.add("uniform.denominator", "|q| - (eps+ - eps-) > 0 for all q; no principal value needed",
              "propagator denominator")
    audit.add("uniform.spin", 0.5, "spin projection on z")
    table = {"r": r, "a0": rows[:, 0], "ax": rows[:, 1], "ay": rows[:, 2], "az": rows[:, 3]}
    return Report(table, diag, audit)


def cmd_retarded(args, cfg):
    from .meanfield import Trajectory, lienard_wiechert, potential_retarded

    traj = Trajectory(args.v)
    r = _grid(args.r_min, args.r_max, args.points)
    direction = args.direction / np.linalg.norm(args.direction)
    ret = np.array([potential_retarded(x * direction, args.t, traj, cfg.mass, cfg.charge) for x in r]).reshape(-1, 4)
    lw = np.array([lienard_wiechert(x * direction, args.t, traj, cfg.charge) for x in r]).reshape(-1, 4)
    audit = _base_audit(cfg)
    audit.add("retarded.kernel", "two-K0 kernel, tau split at the light-cone root", "slowly moving charge")
    audit.add("retarded.reference", "Lienard-Wiechert for uniform motion", "far-field limit")
    table = {"r": r, "a0": ret[:, 0], "lw_a0": lw[:, 0],
             "ratio": ret[:, 0] / lw[:, 0] if r.size else r}
    return Report(table, {}, audit)


def _collision(args, cfg):
    from .infrared import CollisionSpec

    return CollisionSpec(args.v1, args.v2, cfg.mass, cfg.alpha)


def cmd_spectrum(args, cfg):
    from .infrared import angular_spectrum, photon_spectrum, solve_delta

    spec = _collision(args, cfg)
    audit = _base_audit(cfg)
    if args.delta == "auto":
        sol = solve_delta(spec)
        delta = sol.value
        audit.add("delta.trace", sol.trace, "self-consistent shift iterates")
        audit.add("delta.damping", 0.5, "fixed-point damping")
    else:
        delta = float(args.delta)
        audit.add("delta.fixed", delta, "shift supplied by user")
    if not 0 < args.omega_min < args.omega_max or args.points < 2:
        raise ValueError("need 0 < omega-min < omega-max and points >= 2")
    w = np.geomspace(args.omega_min, args.omega_max, args.points)
    direction = args.direction / np.linalg.norm(args.direction)
    n = np.array([photon_spectrum(spec, x, direction, delta) for x in w])
    s = angular_spectrum(spec, w, delta)
    slope = float(np.polyfit(np.log(w), np.log(s), 1)[0])
    audit.add("spectrum.polarizations", "transverse alpha = 1, 2", "velocities contracted with spatial vectors")
    table = {"omega": w, "n1": n[:, 0], "n2": n[:, 1], "angular": s}
    return Report(table, {"delta": delta, "slope": slope, "direction": direction}, audit)


def cmd_delta(args, cfg):
    from .infrared import CollisionSpec, solve_delta

    v1 = np.array([args.speed, 0.0, 0.0])
    spec = CollisionSpec(v1, 0.9 * v1, cfg.mass, cfg.alpha)
    sol = solve_delta(spec, damping=args.damping)
    reference = 4.0 / 3.0 * cfg.alpha * cfg.mass * args.speed ** 2
    coefficient = sol.value / (cfg.alpha * cfg.mass * args.speed ** 2) if args.speed else None
    audit = _base_audit(cfg)
    audit.add("delta.damping", args.damping, "fixed-point damping")
    audit.add("delta.trace", sol.trace, "self-consistent shift iterates")
    audit.add("delta.momentum", "p0 = m v1 / sqrt(1 - v1^2); depends on v1 only", "collision input")
    table = {"iteration": list(range(len(sol.trace))), "delta": sol.trace}
    diag = {"delta": sol.value, "first_iterate": sol.first_iterate, "seed": sol.seed,
            "four_thirds_estimate": reference, "coefficient": coefficient,
            "ratio_to_four_thirds": coefficient / (4.0 / 3.0) if args.speed else None,
            "iterations": sol.iterations}
    return Report(table, diag, audit)


def cmd_cloud(args, cfg):
    from .coherent import ModeGrid, WavePacket, gaussian_normalization_ratio, solve_self_consistent

    packet = WavePacket(args.width, args.k0)
    grid = ModeGrid(q_max=cfg.q_max, n_theta=cfg.n_theta, n_phi=cfg.n_phi, rel_tol=cfg.rel_tol)
    steps = solve_self_consistent(packet, sorted(args.t), grid, cfg.charge)
    audit = _base_audit(cfg)
    audit.add("f_normalization", {"imposed": "f0(q->0) = e",
                                  "literal_prefactor_ratio": gaussian_normalization_ratio(args.width)},
              "packet-averaged current")
    audit.add("polarization_sum", {"headline": grid.convention, "also_reported": ["all_positive", "metric"]},
              "scalar-mode sign under the indefinite metric")
    audit.add("uv_cutoff", {"q_max": grid.q_max, "check": "shell [q_max, 2 q_max]"}, "mode integral")
    audit.add("angular_grid", {"n_theta": grid.n_theta, "n_phi": grid.n_phi}, "Gauss-Legendre x trapezoid")
    audit.add("self_consistency", {"tol": 1e-8, "max_iter": 100, "start": "delta_k = 0 at each t"},
              "momentum-loss feedback")
    table = {k: [] for k in ("t", "dk_x", "dk_y", "dk_z", "delta_e", "n_photons", "e_cloud", "e_cloud_average",
                             "n_alpha0", "n_alpha1", "n_alpha2", "n_alpha3", "e_avg_all_positive",
                             "e_avg_metric", "iterations", "uv_tail", "uv_converged")}
    for s in steps:
        c = s.summary
        for key, val in zip(("t", "dk_x", "dk_y", "dk_z"), (s.t, *s.delta_k)):
            table[key].append(val)
        table["delta_e"].append(c.delta_e)
        table["n_photons"].append(c.n_photons)
        table["e_cloud"].append(c.e_cloud)
        table["e_cloud_average"].append(c.e_cloud_average)
        for a in range(4):
            table[f"n_alpha{a}"].append(c.per_alpha_n[a])
        table["e_avg_all_positive"].append(float(c.total("e_average", "all_positive")))
        table["e_avg_metric"].append(float(c.total("e_average", "metric")))
        table["iterations"].append(s.iterations)
        table["uv_tail"].append(c.uv_tail)
        table["uv_converged"].append(c.uv_converged)
    audit.add("self_consistency.ratios", [s.contraction_ratios for s in steps], "contraction per time")
    diag = {"self_energy_reference": cfg.alpha * cfg.mass}
    return Report(table, diag, audit)


def cmd_gbcheck(args, cfg):
    from .gbfock import build_space, evolve_forced, invariant_report

    rep = invariant_report(args.n_trunc, args.q0)
    space = build_space(args.n_trunc)
    drive = abs(args.q0) / 2 if args.q0 else 0.3
    ev = evolve_forced(space, lambda s: drive + 0 * s, 0.0, 1.0, args.steps)
    audit = _base_audit(cfg)
    audit.add("gb.representation", "B|n> = -sqrt(n)|n-1>, B+|n> = sqrt(n+1)|n+1>, eta = diag((-1)^n)",
              "indefinite metric")
    audit.add("gb.residual_norm", "Euclidean coefficient norm", "truncation diagnostics")
    audit.add("gb.phase", "closed form uses int Im(dQ*/dt Q); half of it also reported", "forced oscillator")
    rows = [
        ("commutator_residual", rep.commutator_residual),
        ("eta_adjoint_residual", rep.eta_adjoint_residual),
        ("eigen_residual", rep.eigen_residual),
        ("eta_norm_error", rep.eta_norm_error),
        ("series_residual", rep.series_residual),
        ("tail_mass", rep.tail_mass),
        ("forced_overlap_error", abs(ev.overlap - 1)),
        ("forced_aux_residual", ev.aux_residual),
        ("forced_phase", ev.phase),
        ("forced_phase_half", ev.phase_half),
    ]
    table = {"quantity": [k for k, _ in rows], "value": [v for _, v in rows]}
    return Report(table, {"n_trunc": args.n_trunc, "q0": [args.q0.real, args.q0.imag], "drive": drive}, audit)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration (flags override the config file)")
    g.add_argument("--mass", type=float, help="electron mass in units of m_e (default 1)")
    g.add_argument("--alpha", type=float, help="coupling e^2 (default 1/137.035999)")
    g.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    g.add_argument("--output", help="output file, '-' for stdout (default)")
    g.add_argument("--config", help=f"key = value config file (also ${CONFIG_ENV})")
    g.add_argument("--rel-tol", dest="rel_tol", type=float, help="relative tolerance for mode integrals")
    g.add_argument("--q-max", dest="q_max", type=float, help="UV cutoff of the cloud integral")
    g.add_argument("--n-theta", dest="n_theta", type=int, help="polar nodes of the angular grid")
    g.add_argument("--n-phi", dest="n_phi", type=int, help="azimuthal nodes of the angular grid")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="dressed",
        description="Dressed-electron numerics. Lengths in 1/m_e, energies in m_e unless --mass is given.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    def radial(p, r_min, r_max, points):
        p.add_argument("--r-min", type=float, default=r_min)
        p.add_argument("--r-max", type=float, default=r_max)
        p.add_argument("--points", type=int, default=points)

    p = add("potential", cmd_potential, "smeared scalar potential of a resting charge vs Coulomb")
    radial(p, 0.01, 50.0, 200)
    add("selfenergy", cmd_selfenergy, "field energy of the resting charge vs e^2 m")
    p = add("moment", cmd_moment, "magnetic form factor and spin-moment vector potential")
    radial(p, 0.01, 30.0, 50)
    p = add("uniform", cmd_uniform, "four-potential of a uniformly moving dressed electron")
    p.add_argument("--k0", type=_vector, required=True, help="momentum vx,vy,vz (|k0| <= 0.3 m)")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--direction", type=_vector, default=np.array([0.6, 0.0, 0.8]))
    p.add_argument("--lorentz-at", type=float, default=None, help="radius for a Lorentz-condition check")
    radial(p, 0.2, 5.0, 5)
    p = add("retarded", cmd_retarded, "retarded-kernel potential with a Lienard-Wiechert column")
    p.add_argument("--v", type=_vector, required=True, help="velocity vx,vy,vz (|v| < 0.3)")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--direction", type=_vector, default=np.array([0.0, 1.0, 0.0]))
    radial(p, 1.0, 50.0, 20)
    p = add("spectrum", cmd_spectrum, "soft-photon spectrum after a small velocity jump")
    p.add_argument("--v1", type=_vector, required=True)
    p.add_argument("--v2", type=_vector, required=True)
    p.add_argument("--delta", type=_delta_arg, default="auto", help="'auto' or a fixed shift")
    p.add_argument("--omega-min", type=float, default=1e-4)
    p.add_argument("--omega-max", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--direction", type=_vector, default=np.array([0.0, 0.6, 0.8]))
    p = add("delta", cmd_delta, "self-consistent infrared shift")
    p.add_argument("--speed", type=float, required=True)
    p.add_argument("--damping", type=float, default=0.5)
    p = add("cloud", cmd_cloud, "photon cloud and momentum-loss self-consistency")
    p.add_argument("--width", type=float, default=50.0, help="packet width in 1/m")
    p.add_argument("--k0", type=_vector, default=np.zeros(3))
    p.add_argument("--t", type=_times, default=[1.0], help="comma-separated times")
    p = add("gbcheck", cmd_gbcheck, "indefinite-metric Fock-space residuals")
    p.add_argument("--n-trunc", type=int, default=64)
    p.add_argument("--q0", type=_complex, default=complex(0.5, 0.0), help="RE,IM")
    p.add_argument("--steps", type=int, default=400)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = build_config(args)
    except UsageError as exc:
        stderr.write(f"dressed: error: {exc}\n")
        return EXIT_USAGE
    try:
        report = args.func(args, cfg)
        write_report(report, cfg, args.command, stdout, stderr)
    except (ArithmeticError, ValueError, OSError) as exc:
        stderr.write(f"dressed {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
