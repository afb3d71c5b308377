"""``timebin-sim`` command line: validate, propagate, analyze, bell-scan, sweep."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import bell_scan, decompose_bins
from .config import PRESETS, RunConfig, load_config
from .errors import TimebinError
from .params import FAIL, derive, validate
from .propagation import InputPulse, TimeGrid, intensity, solve_numeric

COMMANDS = ("validate", "propagate", "analyze", "bell-scan", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONSTRAINT = 0, 1, 2, 3


def fmt(x) -> str:
    """Nine significant digits; negative zero printed as zero."""
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"refusing to write non-finite value {x}")
    return f"{x + 0.0:.9g}"


class Outputs:
    """Writes files under one directory and can remove them all on failure."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def _path(self, name):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.written.append(path)
        return path

    def csv(self, name, header, rows):
        lines = [",".join(header)]
        lines.extend(",".join(fmt(v) for v in row) for row in rows)
        self._path(name).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    def json(self, name, payload):
        payload = {"version": __version__, **payload}
        text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
        self._path(name).write_text(text + "\n", encoding="utf-8", newline="\n")

    def discard(self):
        for path in self.written:
            path.unlink(missing_ok=True)
        self.written.clear()


def _pulse(cfg: RunConfig):
    return InputPulse.gaussian(cfg.params.pulse_duration, channel=cfg.channel,
                               amplitude=cfg.amplitude, center=cfg.center_time)


def propagate(cfg: RunConfig, params=None):
    """Numeric run and its beta = 0 reference on the same grid."""
    params = cfg.params if params is None else params
    derived = derive(params)
    pulse = _pulse(cfg)
    grid = TimeGrid.for_pulse(derived, pulse, n_t=cfg.n_t, padding=cfg.window_padding, frame=cfg.frame)
    snapshots = [s * derived.length for s in cfg.snapshots]
    result = solve_numeric(derived, pulse, grid, n_z=cfg.n_z, snapshots=snapshots, coupling=cfg.coupling_step)
    reference = solve_numeric(replace(derived, beta=0.0), pulse, grid, n_z=cfg.n_z, coupling=cfg.coupling_step)
    return derived, result, reference


def _write_pulse_shape(out, name, result, reference):
    state = result.output
    i1, i2 = intensity(state)
    i1_ref, _ = intensity(reference.output)
    out.csv(name, ("t_ns", "I1", "I2", "I1_ref"), zip(state.times * 1e9, i1, i2, i1_ref))


def _propagation_summary(derived, result):
    return {
        "beta_length": derived.beta_length,
        "walkoff_ns": derived.walkoff_time * 1e9,
        "steps": result.steps,
        "dz_m": result.dz,
        "dt_ns": result.dt * 1e9,
        "snapshots": [
            {"z_m": s.z, "flux": f} for s, f in zip(result.states, result.flux.tolist())
        ],
        "flux_drift": result.flux_drift(),
    }


def _analysis(cfg, state):
    return decompose_bins(state, threshold=cfg.peak_threshold, smoothing=cfg.smoothing)


def cmd_validate(cfg, out, args):
    report = validate(derive(cfg.params), cfg.params, strictness=cfg.strictness)
    out.json("constraints.json", {"command": "validate", **report.to_dict()})
    if report.overall == FAIL and not args.allow_invalid:
        return EXIT_CONSTRAINT
    return EXIT_OK


def cmd_propagate(cfg, out, args):
    derived, result, reference = propagate(cfg)
    _write_pulse_shape(out, "pulse_shape.csv", result, reference)
    out.json("propagation.json", {"command": "propagate", **_propagation_summary(derived, result)})
    return EXIT_OK


def cmd_analyze(cfg, out, args):
    derived, result, _ = propagate(cfg)
    bins = _analysis(cfg, result.output)
    out.json("bins.json", {"command": "analyze", "walkoff_ns": derived.walkoff_time * 1e9, **bins.to_dict()})
    return EXIT_OK


def cmd_bell_scan(cfg, out, args):
    scan = bell_scan(cfg.scan)
    header = ("x1", "x2", "phase", "B") if scan.is_complex else ("x1", "x2", "B")
    out.csv("bell_scan.csv", header, scan.rows())
    out.json("bell_extremum.json", {"command": "bell-scan", **scan.extremum.to_dict()})
    return EXIT_OK


def sweep_runs(cfg: RunConfig):
    """(omega/gamma, derived, result, reference) per configured drive, ascending.

    Omega replaces the drive in whatever representation the config uses: a
    config giving velocities keeps them fixed, so only the coupling scales.
    """
    runs = []
    for ratio in sorted(cfg.sweep_omega_over_gamma):
        params = replace(cfg.params, omega=ratio * cfg.params.gamma)
        runs.append((ratio, *propagate(cfg, params)))
    return runs


def cmd_sweep(cfg, out, args):
    rows = []
    for ratio, derived, result, reference in sweep_runs(cfg):
        tag = f"omega{ratio:g}"
        _write_pulse_shape(out, f"pulse_shape_{tag}.csv", result, reference)
        bins = _analysis(cfg, result.output)
        out.json(f"bins_{tag}.json", {"command": "sweep", "omega_over_gamma": ratio,
                                      "beta_length": derived.beta_length, **bins.to_dict()})
        rows.append((ratio, bins.entropy, bins.concurrence, bins.leakage, bins.separation * 1e9))
    out.csv("sweep_summary.csv", ("omega_over_gamma", "entropy", "concurrence", "leakage", "separation_ns"), rows)
    return EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "propagate": cmd_propagate,
    "analyze": cmd_analyze,
    "bell-scan": cmd_bell_scan,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="timebin-sim", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="run configuration file")
    parser.add_argument("--preset", choices=PRESETS, help="bundled parameter set; --config keys override it")
    parser.add_argument("--out-dir", type=Path, help="output directory (default: out_dir key or cwd)")
    parser.add_argument("--strictness", type=float, help="margin required by much-greater/less checks")
    parser.add_argument("--allow-invalid", action="store_true", help="exit 0 from validate even on a failed check")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _report_error(exc, code):
    payload = {"version": __version__, "error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = None
    try:
        if args.config is None and args.preset is None:
            raise TimebinError("give --config and/or --preset")
        cfg = load_config(args.config, preset=args.preset)
        cfg = replace(cfg, command=args.command)
        if args.strictness is not None:
            cfg = replace(cfg, strictness=args.strictness)
        out_dir = args.out_dir or Path(cfg.out_dir or ".")
        out = Outputs(out_dir)
        return HANDLERS[args.command](cfg, out, args)
    except TimebinError as exc:
        code = EXIT_CONFIG if out is None else exc.exit_code
        if out is not None:
            out.discard()
        _report_error(exc, code)
        return code


if __name__ == "__main__":
    sys.exit(main())
