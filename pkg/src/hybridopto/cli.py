"""Command-line entry point.

Usage::

    hybridopto [global flags] <command> [command flags]
    hybridopto --preset fig2b            # a preset alone runs its own command

A configuration file is either a bare parameter object or an object with a
``params`` member plus run options (``range``, ``n_points``, ``direction``,
``delta_at_axis``, ``kC_axis``, ``workers``, ``t_final``, ``samples``).
Command-line flags override the file.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.  Errors
are written to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bistability import bistable_window, is_bistable, solve_params, threshold_power
from .cooling import (
    MODES,
    LinearizedParams,
    MomentState,
    build_linearized_system,
    evolve_moments,
    relaxation_time,
    stability_spectrum,
    steady_state_moments,
)
from .errors import HybridOptoError, NoThresholdError, ParameterError
from .params import PhysicalParams, derived_quantities, effective_response
from .presets import PRESET_NAMES, Preset, get_preset, single_cavity_variant
from .sweeps import SweepTrace, detuning_sweep, power_sweep, threshold_map

COMMANDS = ("derive", "steady-state", "threshold", "sweep-detuning", "sweep-power", "threshold-map", "cool")
RUN_OPTIONS = ("range", "n_points", "direction", "delta_at_axis", "kC_axis", "workers", "t_final", "samples")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, payload: dict):
        super().__init__(payload.get("message", ""))
        self.code = code
        self.payload = payload


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if math.isnan(v) else format(v, ".16e")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", default=d, help="JSON parameter/run document")
    p.add_argument("--preset", choices=PRESET_NAMES, default=d, help="figure parameter set")
    p.add_argument(
        "--freq-convention", choices=("angular", "ordinary"), default=d,
        help="unit of quoted frequencies (default angular)",
    )
    p.add_argument("--out", metavar="PATH", default=d, help="output file (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridopto",
        description="Optical bistability and mechanical cooling in a hybrid optomechanical system.",
        parents=[_global_flags(False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    g = _global_flags(True)

    sub.add_parser("derive", parents=[g], help="derived quantities as JSON")
    sub.add_parser("steady-state", parents=[g], help="steady-state roots as JSON")
    sub.add_parser("threshold", parents=[g], help="threshold power and bistable window as JSON")

    sp = sub.add_parser("sweep-detuning", parents=[g], help="all steady states versus Delta_A (CSV)")
    sp.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"), help="Delta_A range in units of omega_m")
    sp.add_argument("--n-points", type=int)

    sp = sub.add_parser("sweep-power", parents=[g], help="hysteresis sweep over input power (CSV)")
    sp.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"), help="power range in W")
    sp.add_argument("--n-points", type=int)
    sp.add_argument("--direction", choices=("up", "down", "both"))

    sp = sub.add_parser("threshold-map", parents=[g], help="P_th over Delta_at and k_C (CSV)")
    sp.add_argument("--delta-at", nargs=3, type=float, metavar=("LO", "HI", "N"),
                    help="linear axis of Delta_at / gamma_at")
    sp.add_argument("--kc", nargs=3, type=float, metavar=("LO", "HI", "N"),
                    help="logarithmic axis of k_C / omega_m")
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("cool", parents=[g], help="phonon-number trajectory (CSV)")
    sp.add_argument("--t-final", type=float, help="end time in units of 1/omega_m")
    sp.add_argument("--samples", type=int, help="number of output times")
    sp.add_argument("--single-cavity", action="store_true", help="set J = 0 and G = 0.1 omega_m")
    sp.add_argument("--steady-state", action="store_true", help="print the Lyapunov steady state as JSON")
    sp.add_argument("--rtol", type=float, default=1e-6)
    return parser


def _with_command(argv: list[str]) -> list[str]:
    """Insert the preset's command when none was given."""
    if any(a in COMMANDS for a in argv) or any(a in ("-h", "--help", "--version") for a in argv):
        return argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--preset")
    known, _ = pre.parse_known_args(argv)
    if known.preset in PRESET_NAMES:
        return [get_preset(known.preset).command] + argv
    return argv


def _load_config(path: str | None) -> tuple[dict | None, dict]:
    if path is None:
        return None, {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise _Fail(EXIT_INVALID, {"error": "invalid_config", "message": f"cannot read {path}: {exc.strerror}",
                                   "fields": {"config": "unreadable"}})
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_INVALID, {"error": "invalid_config", "message": f"malformed JSON in {path}: {exc}",
                                   "fields": {"config": "malformed JSON"}})
    if not isinstance(doc, dict):
        raise _Fail(EXIT_INVALID, {"error": "invalid_config", "message": "config must be a JSON object",
                                   "fields": {"config": "not an object"}})
    if "params" in doc:
        extra = {k: "unknown field" for k in doc if k != "params" and k not in RUN_OPTIONS}
        if extra:
            raise ParameterError("unknown run options: " + ", ".join(sorted(extra)), extra)
        return doc["params"], {k: v for k, v in doc.items() if k != "params"}
    return doc, {}


def _resolve(args) -> tuple[tuple[tuple[str, Any], ...], dict]:
    """Parameter sets (labelled) and run options from preset, config and flags."""
    preset: Preset | None = None
    conv = getattr(args, "freq_convention", None)
    if getattr(args, "preset", None):
        preset = get_preset(args.preset, conv or "angular")
        if (preset.command == "cool") != (args.command == "cool"):
            raise ParameterError(
                f"preset {args.preset} has no parameters for '{args.command}'",
                {"preset": f"use with {preset.command}"},
            )
    doc, options = _load_config(getattr(args, "config", None))
    if preset is not None and doc is not None:
        raise ParameterError("give either --preset or --config, not both", {"config": "conflicts with preset"})
    if preset is not None:
        base = preset.options if preset.command == args.command else {}
        return preset.traces, {**base, **options}
    if doc is None:
        doc = {}
    if args.command == "cool":
        return (("config", LinearizedParams.from_dict(doc)),), options
    return (("config", PhysicalParams.from_dict(doc, conv)),), options


def _opt(args, options, flag, key, default=None):
    v = getattr(args, flag, None)
    if v is not None:
        return v
    return options.get(key, default)


# -- command handlers ------------------------------------------------------


def _cmd_json(args, traces, options) -> str:
    out = []
    for label, p in traces:
        if args.command == "derive":
            doc = derived_quantities(p)
        elif args.command == "steady-state":
            doc = solve_params(p).to_json()
            doc["freq_convention"] = p.freq_convention
        else:
            doc = {"freq_convention": p.freq_convention, "bistable": is_bistable(effective_response(p))}
            try:
                th = threshold_power(p)
                win = bistable_window(p)
                doc.update(P_th=th.P_th, n_th=th.n_th, P_low=win.P_low, P_high=win.P_high)
            except NoThresholdError:
                doc.update(P_th=None, n_th=None, P_low=None, P_high=None)
        doc["label"] = label
        out.append(doc)
    body = out[0] if len(out) == 1 else out
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


_SWEEP_HEADER = (
    ["trace", "direction", "control_value"]
    + [f"root{i}_n" for i in (1, 2, 3)]
    + ["followed_n"]
    + [f"root{i}_stable" for i in (1, 2, 3)]
    + [f"root{i}_chiQ" for i in (1, 2, 3)]
    + ["followed_chiQ"]
)


def _sweep_rows(label: str, trace: SweepTrace):
    c2 = trace.chi * trace.chi
    for s in trace.samples:
        ns = [n for n, _ in s.roots] + [None] * (3 - len(s.roots))
        st = [lab for _, lab in s.roots] + [None] * (3 - len(s.roots))
        f = s.followed_n
        yield (
            [label, trace.direction or "", _fmt(s.control_value)]
            + [_fmt(n) for n in ns]
            + [_fmt(f)]
            + [_fmt(x) for x in st]
            + [_fmt(None if n is None else c2 * n) for n in ns]
            + [_fmt(None if f is None else c2 * f)]
        )


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cmd_sweep_detuning(args, traces, options) -> str:
    lo, hi = _opt(args, options, "range", "range", (0.0, 2.0))
    n = int(_opt(args, options, "n_points", "n_points", 2000))
    rows = []
    for label, p in traces:
        wm = p.mech_freq
        rows.extend(_sweep_rows(label, detuning_sweep(p, (lo * wm, hi * wm), n)))
    return _write_csv(_SWEEP_HEADER, rows)


def _cmd_sweep_power(args, traces, options) -> str:
    rng = _opt(args, options, "range", "range", None)
    n = int(_opt(args, options, "n_points", "n_points", 2000))
    direction = _opt(args, options, "direction", "direction", None)
    if direction is None:
        directions = tuple(options.get("directions", ("up", "down")))
    else:
        directions = ("up", "down") if direction == "both" else (direction,)
    rows = []
    for label, p in traces:
        span = rng
        if span is None:
            try:
                span = (0.0, 2.0 * threshold_power(p).P_th)
            except NoThresholdError:
                span = (0.0, 2.0 * p.input_power if p.input_power > 0 else 1e-4)
        for d in directions:
            rows.extend(_sweep_rows(label, power_sweep(p, span, n, d)))
    return _write_csv(_SWEEP_HEADER, rows)


def _cmd_threshold_map(args, traces, options) -> str:
    dat = options.get("delta_at_axis", np.linspace(-100.0, 20.0, 25))
    kc = options.get("kC_axis", np.geomspace(0.01, 1.0, 20))
    if args.delta_at is not None:
        lo, hi, n = args.delta_at
        dat = np.linspace(lo, hi, int(n))
    if args.kc is not None:
        lo, hi, n = args.kc
        if lo <= 0 or hi <= 0:
            raise ParameterError("k_C axis bounds must be > 0", {"kc": "must be > 0"})
        kc = np.geomspace(lo, hi, int(n))
    workers = _opt(args, options, "workers", "workers", None)
    label, p = traces[0]
    tm = threshold_map(p, dat, kc, workers=workers)
    rows = []
    for i, d in enumerate(tm.delta_at_over_gamma):
        for j, k in enumerate(tm.kC_over_omega_m):
            rows.append([_fmt(d), _fmt(k), _fmt(tm.P_th[i, j])])
    return _write_csv(["delta_at_over_gamma", "kC_over_omega_m", "P_th_watts"], rows)


def _cmd_cool(args, traces, options) -> str:
    label, p = traces[0]
    if args.single_cavity:
        p = single_cavity_variant(p)
    system = build_linearized_system(p)
    if args.steady_state:
        ss = steady_state_moments(system)
        ev = stability_spectrum(system)
        doc = {
            "n_b": ss.n_b,
            "occupancies": {m: ss.occupancy(m) for m in MODES},
            "spectral_abscissa": float(ev[0].real),
            "relaxation_time": relaxation_time(system),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in ev],
            "params": p.to_dict(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    t_final = float(_opt(args, options, "t_final", "t_final", 4e4))
    samples = int(_opt(args, options, "samples", "samples", 401))
    init = MomentState.from_occupancies(n_b=p.n_th)
    tr = evolve_moments(system, init, t_final, samples=samples, rtol=args.rtol)
    occ = {m: tr.occupancy(m) for m in MODES}
    rows = (
        [_fmt(t), _fmt(occ["b"][i]), _fmt(occ["a"][i]), _fmt(occ["c"][i]), _fmt(occ["d"][i])]
        for i, t in enumerate(tr.times)
    )
    return _write_csv(["t_omega_m", "n_b", "n_a", "n_c", "n_d"], rows)


_HANDLERS = {
    "derive": _cmd_json,
    "steady-state": _cmd_json,
    "threshold": _cmd_json,
    "sweep-detuning": _cmd_sweep_detuning,
    "sweep-power": _cmd_sweep_power,
    "threshold-map": _cmd_threshold_map,
    "cool": _cmd_cool,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = _with_command(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_INVALID
    if args.command is None:
        parser.print_usage(stderr)
        stderr.write(json.dumps({"error": "usage", "message": "a command or --preset is required"}) + "\n")
        return EXIT_INVALID
    try:
        traces, options = _resolve(args)
        text = _HANDLERS[args.command](args, traces, options)
    except _Fail as exc:
        stderr.write(json.dumps(exc.payload, sort_keys=True) + "\n")
        return exc.code
    except ParameterError as exc:
        stderr.write(json.dumps({"error": "validation", "message": str(exc), "fields": exc.fields},
                                sort_keys=True) + "\n")
        return EXIT_INVALID
    except (HybridOptoError, ArithmeticError, np.linalg.LinAlgError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "t_reached"):
            payload["t_reached"] = exc.t_reached
        stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return EXIT_NUMERICAL
    out = getattr(args, "out", None)
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            stderr.write(json.dumps({"error": "output", "message": f"cannot write {out}: {exc.strerror}",
                                     "fields": {"out": "unwritable"}}) + "\n")
            return EXIT_INVALID
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))
