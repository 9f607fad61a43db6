"""``fermicorr`` command line.

Exit codes: 0 success, 1 an inequality was violated, 2 bad configuration,
3 I/O failure, 4 sampling kernel spectrum outside [0, 1].
"""
from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys

from . import __version__
from .dpp_sampler import GridSpec, _accumulate, build_sampling_kernel, histogram_from_counts, sample_many
from .errors import FermicorrError, HermiticityError, SpectrumOutOfRange
from .field_model import (
    DetectorConfig,
    SpacetimePoint,
    SpectralModel,
    antibunching_curve,
    build_kernel,
    bundle_from_matrix,
    coherence_time_from_bandwidth,
)
from .hermitian_linalg import HermitianMatrix
from .inequalities import (
    PartitionSpec,
    check_partition_bound,
    fischer_cross_check,
    sweep_partitions,
)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO, EXIT_SPECTRUM = 0, 1, 2, 3, 4


class ConfigError(Exception):
    pass


def _read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _parse_grid(text):
    fields = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"grid item {item!r} is not key=value")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"n", "dt", "t0"}
    if unknown:
        raise ConfigError(f"unknown grid keys {sorted(unknown)}")
    if "n" not in fields:
        raise ConfigError("grid needs n=<bins>")
    try:
        return {"n": int(fields["n"]),
                "dt": float(fields["dt"]) if "dt" in fields else None,
                "t0": float(fields.get("t0", 0.0))}
    except ValueError as exc:
        raise ConfigError(f"bad grid value: {exc}") from exc


def _parse_bandwidth(text):
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*(eV|ev)?\s*", text)
    if not m:
        raise ConfigError(f"cannot read energy bandwidth {text!r} (expected e.g. 0.2eV)")
    try:
        return float(m.group(1))
    except ValueError as exc:
        raise ConfigError(f"cannot read energy bandwidth {text!r}") from exc


class Run:
    """Resolved inputs of one invocation plus the provenance block."""

    def __init__(self, args):
        self.args = args
        self.seed = 0 if args.seed is None else args.seed
        self.resolved = {"command": args.command, "seed": self.seed}

    def model(self, required=True):
        if self.args.model is None:
            if required:
                raise ConfigError("--model is required")
            return None
        obj = _read_json(self.args.model)
        try:
            model = SpectralModel.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{self.args.model}: invalid model ({exc})") from exc
        self.resolved["model"] = model.to_json()
        return model

    def bundle(self):
        if self.args.matrix is not None:
            try:
                matrix = HermitianMatrix.from_json(_read_json(self.args.matrix))
            except HermiticityError as exc:
                raise ConfigError(f"{self.args.matrix}: {exc}") from exc
            self.resolved["matrix"] = matrix.to_json()
            return bundle_from_matrix(matrix)
        if self.args.points is None:
            raise ConfigError("either --matrix or --model with --points is required")
        model = self.model()
        raw = _read_json(self.args.points)
        try:
            points = [SpacetimePoint.from_json(p) for p in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{self.args.points}: invalid points ({exc})") from exc
        self.resolved["points"] = [p.to_json() for p in points]
        return build_kernel(model, points)

    def provenance(self):
        self.resolved["params"] = {k: v for k, v in sorted(vars(self.args).items())
                                   if k not in ("model", "points", "matrix", "detector",
                                                "out", "sample_log", "command", "seed", "func")}
        blob = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return {"config_hash": hashlib.sha256(blob.encode()).hexdigest(),
                "seed": self.seed,
                "tool_version": __version__}


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_curve(args):
    run = Run(args)
    model = run.model()
    tc = model.coherence_time
    tau_min = -3 * tc if args.tau_min is None else args.tau_min
    tau_max = 3 * tc if args.tau_max is None else args.tau_max
    n_points = 601 if args.n_points is None else args.n_points
    try:
        rows = antibunching_curve(model, tau_min, tau_max, n_points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    run.resolved.update(tau_min=tau_min, tau_max=tau_max, n_points=n_points)
    prov = run.provenance()
    lines = ["# " + ",".join(f"{k}={v}" for k, v in prov.items()), "tau_s,g2_normalized"]
    lines += [f"{t:.17g},{v:.17g}" for t, v in rows]
    if args.out is None:
        raise ConfigError("--out is required")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_check(args):
    run = Run(args)
    bundle = run.bundle()
    partition = (PartitionSpec.parse(args.partition, bundle.dim) if args.partition
                 else PartitionSpec.singletons(bundle.dim))
    run.resolved["partition"] = str(partition)
    report = check_partition_bound(bundle, partition)
    payload = dict(run.provenance())
    payload["reports"] = [report.to_json()]
    _write_json(args.out, payload)
    return EXIT_OK if report.holds else EXIT_VIOLATION


def cmd_sweep(args):
    run = Run(args)
    bundle = run.bundle()
    reports = sweep_partitions(bundle, args.max_k)
    payload = dict(run.provenance())
    payload["reports"] = [r.to_json() for r in reports]
    _write_json(args.out, payload)
    return EXIT_OK if all(r.holds for r in reports) else EXIT_VIOLATION


def cmd_crosscheck(args):
    run = Run(args)
    bundle = run.bundle()
    split = args.split if args.split is not None else bundle.dim // 2
    det_d, det_dp, residual = fischer_cross_check(bundle.big_gamma, split)
    blocks = (tuple(range(split)), tuple(range(split, bundle.dim)))
    report = check_partition_bound(bundle, PartitionSpec(bundle.dim, blocks))
    payload = dict(run.provenance())
    payload.update(split=split, det_D=det_d, det_Dprime=det_dp, block_residual=residual,
                   report=report.to_json())
    _write_json(args.out, payload)
    return EXIT_OK if det_d <= det_dp + 1e-10 * abs(det_dp) else EXIT_VIOLATION


def cmd_coherence_time(args):
    run = Run(args)
    delta_e = _parse_bandwidth(args.bandwidth)
    tc = coherence_time_from_bandwidth(delta_e)
    run.resolved["delta_E_eV"] = delta_e
    model = run.model(required=False)
    payload = {}
    if model is not None:
        # the output is itself a usable model config
        payload.update(model.to_json())
        payload["coherence_time_s"] = tc
    payload.update(run.provenance())
    payload.update(delta_E_eV=delta_e, coherence_time_s=tc)
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_sample(args):
    run = Run(args)
    model = run.model()
    if args.detector is None or args.grid is None:
        raise ConfigError("sample needs --detector and --grid")
    if args.n_samples is None or args.n_samples < 1:
        raise ConfigError("--n-samples must be a positive integer")
    det_obj = _read_json(args.detector)
    grid = _parse_grid(args.grid)
    dt = grid["dt"]
    if "bin_width_s" in det_obj:
        if dt is not None and float(det_obj["bin_width_s"]) != dt:
            raise ConfigError("grid dt and detector bin_width_s disagree")
        dt = float(det_obj["bin_width_s"])
    if dt is None:
        raise ConfigError("bin width missing: give dt in --grid or bin_width_s in the detector file")
    try:
        det = DetectorConfig(eta=float(det_obj["eta"]), area=float(det_obj["area_m2"]),
                             bin_width=dt)
        spec = GridSpec(n_bins=grid["n"], bin_width=dt, t_start=grid["t0"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid detector/grid ({exc})") from exc
    run.resolved.update(detector=det.to_json(), grid=spec.to_json())
    kernel = build_sampling_kernel(model, det, spec)
    samples = sample_many(kernel, args.n_samples, run.seed)
    pairs, singles, n = _accumulate((s.occupied_bins for s in samples), spec.n_bins)
    hist = histogram_from_counts(pairs, singles, n, spec.n_bins)
    payload = dict(run.provenance())
    payload.update(hist.to_json())
    _write_json(args.out, payload)
    if args.sample_log:
        with open(args.sample_log, "w") as fh:
            fh.write("sample_index,bin_indices\n")
            for s in samples:
                fh.write(f"{s.index},{';'.join(str(b) for b in s.occupied_bins)}\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fermicorr",
                                     description="Correlation functions of chaotic electron beams.")
    parser.add_argument("--version", action="version", version=f"fermicorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--model", help="spectral model JSON")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--out", required=out_required, help="output path")

    def kernel_inputs(p):
        p.add_argument("--points", help="JSON array of {\"r\": [x, y, z], \"t\": t}")
        p.add_argument("--matrix", help="cross-correlation matrix JSON {dim, re, im}")

    p = sub.add_parser("curve", help="normalized two-electron correlation vs delay (CSV)")
    common(p)
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--n-points", type=int)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("check", help="partition inequality for one partition (JSON)")
    common(p)
    kernel_inputs(p)
    p.add_argument("--partition", help='1-based blocks, e.g. "1,2|3,5,7|4|6"')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="partition inequality over every set partition (JSON)")
    common(p)
    kernel_inputs(p)
    p.add_argument("--max-k", type=int, default=10)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crosscheck", help="block-unitary route for a two-block split (JSON)")
    common(p)
    kernel_inputs(p)
    p.add_argument("--split", type=int, help="size l of the leading block (default k // 2)")
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("coherence-time", help="coherence time h / dE from an energy spread")
    common(p, out_required=False)
    p.add_argument("bandwidth", help="energy spread, e.g. 0.2eV")
    p.set_defaults(func=cmd_coherence_time)

    p = sub.add_parser("sample", help="simulate detection records and estimate g2 (JSON)")
    common(p)
    p.add_argument("--detector", help="detector JSON {eta, area_m2[, bin_width_s]}")
    p.add_argument("--grid", help='time grid, e.g. "n=64,dt=1e-15,t0=0"')
    p.add_argument("--n-samples", type=int)
    p.add_argument("--sample-log", help="optional CSV of occupied bins per sample")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpectrumOutOfRange as exc:
        print(f"fermicorr: {exc}", file=sys.stderr)
        return EXIT_SPECTRUM
    except OSError as exc:
        print(f"fermicorr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, FermicorrError, ValueError, KeyError, TypeError) as exc:
        print(f"fermicorr: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
