"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 usage error.
``GAUSSCAP_CONFIG`` may point to a JSON run configuration.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import capacity as cap
from . import channels as chn
from . import fock
from . import symplectic as sp
from . import teleport as tp
from .errors import (
    DilationNotImplementedError,
    GaussCapError,
    InvalidArgumentError,
    NumericalFailureError,
    TruncationError,
)
from .states import GaussianState

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 4

log = logging.getLogger("gausscap")


@dataclass(frozen=True)
class RunConfig:
    tol_psd: float = 1e-8
    tol_sym: float = 1e-9
    tol_opt: float = 1e-10
    fock_cutoff: int = fock.DEFAULT_CUTOFF
    output_format: str = "json"
    verbosity: str = "WARNING"

    def __post_init__(self):
        for name in ("tol_psd", "tol_sym", "tol_opt"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"config field {name} must be > 0")
        if not 5 <= self.fock_cutoff <= fock.MAX_CUTOFF:
            raise InvalidArgumentError(f"config field fock_cutoff must lie in [5, {fock.MAX_CUTOFF}]")
        if self.output_format not in ("json", "csv"):
            raise InvalidArgumentError("config field output_format must be 'json' or 'csv'")

    @classmethod
    def load(cls, path=None):
        path = path or os.environ.get("GAUSSCAP_CONFIG")
        if not path:
            return cls()
        data = _read_json(path)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"config {path}: unknown fields {sorted(unknown)}")
        return cls(**data)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def _flat_csv(obj):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key in sorted(obj):
        val = obj[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
        writer.writerow([key, val])
    return buf.getvalue()


def _emit(obj, cfg, out=None):
    text = _dump(obj) + "\n" if cfg.output_format == "json" else _flat_csv(obj)
    (out or sys.stdout).write(text)


def _load_channel(path, cfg):
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"{path}: expected a JSON object")
    if "S" in data:
        return chn.Dilation.from_dict(data)
    if "Y" in data:
        Y = np.asarray(data["Y"], dtype=float)
        if Y.ndim != 2 or not sp.is_symmetric(Y, cfg.tol_sym):
            raise InvalidArgumentError(f"{path}: field Y is not a symmetric matrix within tol_sym={cfg.tol_sym}")
        data = dict(data, Y=0.5 * (Y + Y.T))
    return chn.GaussianChannel.from_dict(data, validate=False).checked(cfg.tol_psd)


def _load_cm(path):
    data = _read_json(path)
    if isinstance(data, dict) and "mean" in data:
        return GaussianState.from_dict(data).cm
    if isinstance(data, dict) and "cm" in data:
        return np.asarray(data["cm"], dtype=float)
    if isinstance(data, list):
        return np.asarray(data, dtype=float)
    raise InvalidArgumentError(f"{path}: expected a state object with field 'cm'")


def _channel_of(target):
    return target.channel() if isinstance(target, chn.Dilation) else target


def cmd_capacity(args, cfg):
    if args.kind == "lossy":
        value = cap.capacity_lossy(args.eta)
        report = cap.CapacityReport(cap.Method.CLOSED_FORM, value)
        if math.isinf(value):
            report.diagnostics.append("eta = 1: noiseless channel, unbounded without energy constraint")
    else:
        target = _load_channel(args.channel, cfg)
        channel = _channel_of(target)
        if args.kind == "degradable":
            dilation = target if isinstance(target, chn.Dilation) else None
            report = cap.capacity_degradable(channel, dilation, args.max_photons, opt_tol=cfg.tol_opt)
        else:
            report = cap.capacity_bounds(channel)
    _emit(report.to_dict(), cfg)
    return EXIT_OK


def loss_length_grid(lo, hi, steps, mark_zero=True):
    grid = np.linspace(lo, hi, steps + 1).tolist()
    if mark_zero and lo < math.log(2.0) < hi and math.log(2.0) not in grid:
        grid = sorted(grid + [math.log(2.0)])
    return grid


def cmd_loss_curve(args, cfg):
    if not (0 <= args.min < args.max) or args.steps < 1:
        raise InvalidArgumentError("curve range needs 0 <= min < max and steps >= 1")
    rows = cap.loss_length_curve(loss_length_grid(args.min, args.max, args.steps, not args.no_zero_marker))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l_over_la", "Q_bits"])
    for x, q in rows:
        writer.writerow([repr(x), "inf" if math.isinf(q) else repr(q)])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_classify(args, cfg):
    target = _load_channel(args.channel, cfg)
    result = cap.classify(target, tol=cfg.tol_psd)
    _emit(result.to_dict(), cfg)
    return EXIT_OK


def _load_gain(spec, n):
    if spec in (None, "identity"):
        return np.eye(2 * n)
    data = _read_json(spec)
    if isinstance(data, dict):
        if "gain" not in data:
            raise InvalidArgumentError(f"{spec}: missing field 'gain'")
        data = data["gain"]
    return np.asarray(data, dtype=float)


def cmd_teleport(args, cfg):
    resource = tp.TeleportResource(_load_cm(args.resource))
    gain = _load_gain(args.gain, resource.n_modes)
    channel = tp.teleport_channel(resource, gain)
    out = channel.to_dict()
    out["cp"] = chn.is_cp(channel, cfg.tol_psd)
    out["cp_min_eigenvalue"] = chn.cp_min_eigenvalue(channel.X, channel.Y)
    _emit(out, cfg)
    return EXIT_OK


def cmd_certify(args, cfg):
    report = tp.certify_from_moments(_load_cm(args.cm), args.modes_a)
    _emit(report.to_dict(), cfg)
    return EXIT_OK


def cmd_broadband(args, cfg):
    spec = cap.BroadbandSpec.from_dict(_read_json(args.spec))
    result = cap.broadband_capacity(spec)
    out = result.to_dict()
    out["multiplier"] = cap._num(result.multiplier)
    _emit(out, cfg)
    return EXIT_OK


def _load_fock(path, cutoff):
    data = _read_json(path)
    if isinstance(data, dict) and "amplitudes" in data:
        amps = data["amplitudes"]
        if isinstance(amps, dict):
            amps = np.asarray(amps["re"], float) + 1j * np.asarray(amps.get("im", [0.0] * len(amps["re"])), float)
        return fock.superposition(amps, int(data.get("cutoff", cutoff)))
    return fock.FockState.from_dict(data)


def cmd_gaussify(args, cfg):
    state = _load_fock(args.input, cfg.fock_cutoff)
    if args.rounds < 1:
        raise InvalidArgumentError("rounds must be >= 1")
    mean, cm = fock.moments_of(state)
    reference = fock.gaussian_reference_fock(mean, cm, state.cutoff)
    distances = []
    current = state
    for k in range(1, args.rounds + 1):
        current = fock.gaussification_round(current)
        distances.append(fock.trace_distance(current, reference))
        log.info("round %d: trace distance %.6e", k, distances[-1])
    _emit(
        {
            "initial_distance": fock.trace_distance(state, reference),
            "trace_distances": distances,
            "reference_mean": mean.tolist(),
            "reference_cm": cm.tolist(),
            "trace_deficit": current.trace_deficit,
        },
        cfg,
    )
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="gausscap", description="Quantum capacities of bosonic Gaussian channels")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="quantum capacity of a channel")
    kinds = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = kinds.add_parser("lossy", help="closed form for attenuation/amplification")
    k.add_argument("--eta", type=float, required=True)
    k = kinds.add_parser("degradable", help="optimise Gaussian inputs of a degradable channel")
    k.add_argument("--channel", required=True)
    k.add_argument("--max-photons", type=float, default=None)
    k = kinds.add_parser("bounds", help="lower/upper bounds for any single-mode channel")
    k.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("fig2", aliases=["loss-curve"], help="capacity of a lossy line versus length, as CSV")
    p.add_argument("--min", type=float, default=0.0)
    p.add_argument("--max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out", default=None)
    p.add_argument("--no-zero-marker", action="store_true", help="do not insert the row at ln 2")
    p.set_defaults(func=cmd_loss_curve)

    p = sub.add_parser("classify", help="degradability verdict")
    p.add_argument("--channel", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("teleport", help="teleportation channel of a resource state")
    p.add_argument("--resource", required=True)
    p.add_argument("--gain", default="identity")
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("certify", help="certified rate from measured second moments")
    p.add_argument("--cm", required=True)
    p.add_argument("--modes-a", type=int, default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("broadband", help="energy-constrained broadband capacity")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_broadband)

    p = sub.add_parser("gaussify", help="run gaussification rounds in Fock space")
    p.add_argument("--input", required=True)
    p.add_argument("--rounds", type=int, default=4)
    p.set_defaults(func=cmd_gaussify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, parse errors exit with EXIT_USAGE
        return exc.code
    try:
        cfg = RunConfig.load()
        logging.basicConfig(level=getattr(logging, str(cfg.verbosity).upper(), logging.WARNING))
        return args.func(args, cfg)
    except (NumericalFailureError, TruncationError, DilationNotImplementedError) as exc:
        print(f"gausscap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GaussCapError, ValueError, TypeError, KeyError) as exc:
        print(f"gausscap: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
