"""Command-line entry point.

Subcommands: sim, limit, density, moments, charfn,
verify {tv | recurrence | endgame | theorem1 | residual | tail}, subseq, plot.

Every randomized command either receives ``--seed`` or draws one and records
it in the output metadata, so any artifact can be reproduced bit-for-bit from
its own header.  Exit codes: 0 success, 1 usage error, 2 I/O or input-format
error, 3 a verifier ran correctly and its claim was falsified.
``RUMOR_THREADS`` caps kernel parallelism (0 or unset = automatic) and
``RUMOR_BACKEND`` selects the kernel flavor.
"""

import argparse
import math
import secrets
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__
from ._compat import apply_thread_cap, backend_name
from .asymptotics import (SubsequenceSpec, VerificationReport,
                          recurrence_ensemble_report, runtime_residual_scan,
                          subsequence, sup_tail_distance, tail_comparison_rows,
                          tail_decay_check, verify_endgame, verify_tv_bound)
from .branching import sample_neg_log2_h
from .charfn import phi_grid
from .io import (FormatError, load_samples, parse_grid, read_csv, write_csv,
                 write_f64, write_sidecar)
from .limitdist import (EmpiricalDistribution, density_grid, kde_density,
                        lattice_mean, lattice_variance, scott_bandwidth)
from .protocol import ensemble, trajectory_ensemble
from .svg import line_plot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FALSIFIED = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the exit-code contract
    # reserves 2 for I/O, so usage failures are re-raised and mapped to 1
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunConfig:
    """Parsed invocation: command, its parameters, seed, and output target."""

    command: str
    parameters: dict = field(default_factory=dict)
    master_seed: Optional[int] = None
    output_path: Optional[str] = None


def _add_seed(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed; generated and recorded if omitted")


def _build_parser() -> _Parser:
    parser = _Parser(prog="rumor",
                     description="pull rumor spreading on complete graphs: "
                                 "simulation, limit law, verification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("sim", help="simulate runtime ensembles",
                       description="Run independent simulations and write "
                                   "one runtime per row.")
    p.add_argument("--n", type=int, required=True, help="population size")
    p.add_argument("--runs", type=int, required=True, help="number of runs")
    _add_seed(p)
    p.add_argument("--out", required=True, help="runtime CSV path")
    p.add_argument("--trajectories", default=None,
                   help="also write per-round informed counts to this CSV")
    p.add_argument("--denominator", choices=("n", "n-1"), default="n",
                   help="contact success denominator (default n)")

    p = sub.add_parser("limit", help="sample the limit surrogate",
                       description="Sample -log2 of the scaled branching "
                                   "value at the cutoff generation.")
    p.add_argument("--tstar", type=int, default=28, help="cutoff generation")
    p.add_argument("--samples", type=int, default=10 ** 6)
    _add_seed(p)
    p.add_argument("--out", required=True,
                   help="output path (.csv or flat little-endian .f64)")

    p = sub.add_parser("density", help="kernel density of a sample file",
                       description="Gaussian kernel density estimate on a "
                                   "grid spanning the samples.")
    p.add_argument("--in", dest="input", required=True, help="sample file")
    p.add_argument("--grid", default=None,
                   help="evaluation grid start:stop:step (default: span samples)")
    p.add_argument("--points", type=int, default=512,
                   help="grid size when --grid is omitted")
    p.add_argument("--bandwidth", default="scott",
                   help="'scott' or an explicit bandwidth value")
    p.add_argument("--out", required=True, help="density CSV path")

    p = sub.add_parser("moments", help="lattice-restriction moment curves",
                       description="Mean and variance of ceil(X + shift) "
                                   "over a shift grid.")
    p.add_argument("--in", dest="input", required=True, help="sample file")
    p.add_argument("--grid", default="0:1:0.05", help="shift grid start:stop:step")
    p.add_argument("--out", required=True, help="moments CSV path")

    p = sub.add_parser("charfn", help="characteristic-function values",
                       description="Evaluate the iterated-map characteristic "
                                   "function on a frequency grid.")
    p.add_argument("--x", required=True, help="frequency grid start:stop:step")
    p.add_argument("--t", type=int, required=True, help="generation")
    p.add_argument("--out", required=True, help="CSV path")

    v = sub.add_parser("verify", help="run a verifier and emit JSON lines")
    vsub = v.add_subparsers(dest="verifier", required=True, metavar="check")

    q = vsub.add_parser("tv", help="total-variation bound by exact DP")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--tmax", type=int, default=5)
    q.add_argument("--out", default=None, help="JSON-lines path (default stdout)")

    q = vsub.add_parser("recurrence", help="squaring recurrence over an ensemble")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--runs", type=int, default=1000)
    _add_seed(q)
    q.add_argument("--threshold", type=float, default=0.95)
    q.add_argument("--out", default=None)

    q = vsub.add_parser("endgame", help="threshold-round events over an ensemble")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--runs", type=int, default=10000)
    _add_seed(q)
    q.add_argument("--threshold", type=float, default=0.9)
    q.add_argument("--out", default=None)

    q = vsub.add_parser("theorem1",
                        help="sup distance of runtimes vs shifted limit law")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--runs", type=int, default=10 ** 5)
    q.add_argument("--samples", type=int, default=10 ** 6)
    q.add_argument("--tstar", type=int, default=28)
    _add_seed(q)
    q.add_argument("--bound", type=float, default=0.05)
    q.add_argument("--dump-cdf", default=None,
                   help="also write the two tails per integer to this CSV")
    q.add_argument("--out", default=None)

    q = vsub.add_parser("residual", help="mean-runtime residual band")
    q.add_argument("--n-values", required=True,
                   help="comma-separated populations")
    q.add_argument("--runs", type=int, default=10 ** 4)
    _add_seed(q)
    q.add_argument("--band", type=float, default=2.5,
                   help="allowed max-min residual spread")
    q.add_argument("--adjacent", type=float, default=1.5,
                   help="allowed residual gap between consecutive populations")
    q.add_argument("--out", default=None)

    q = vsub.add_parser("tail", help="large-deviation tail proxy")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--runs", type=int, default=10 ** 6)
    _add_seed(q)
    q.add_argument("--r", type=float, default=4.0,
                   help="offset for the headline tail probability")
    q.add_argument("--p", type=float, default=0.05,
                   help="bound on the headline tail probability")
    q.add_argument("--r-max", type=float, default=8.0,
                   help="largest offset in the scan")
    q.add_argument("--out", default=None)

    p = sub.add_parser("subseq", help="Lambert-W population subsequence",
                       description="Populations with convergent fractional "
                                   "parts of log2(n) + log2(ln n).")
    p.add_argument("--x", type=float, required=True, help="target fractional part")
    p.add_argument("--from", dest="i_from", type=int, required=True)
    p.add_argument("--to", dest="i_to", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("plot", help="render a CSV artifact as SVG")
    p.add_argument("--kind", choices=("density", "moments", "cdf-compare"),
                   required=True)
    p.add_argument("--in", dest="input", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="output SVG")

    return parser


def _resolve_seed(args) -> int:
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = secrets.randbits(32)
        print(f"generated master seed {seed}", file=sys.stderr)
    if seed < 0:
        raise _UsageError("--seed must be non-negative")
    return int(seed)


def _base_meta(command: str, **params) -> dict:
    return {"command": command, "version": __version__,
            "backend": backend_name(), **params}


def _emit_reports(reports: List[VerificationReport], out: Optional[str]) -> int:
    lines = [report.to_json() for report in reports]
    if out is None:
        for line in lines:
            print(line)
    else:
        with open(out, "w", encoding="ascii", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FALSIFIED


def _cmd_sim(config: RunConfig) -> int:
    p = config.parameters
    started = time.monotonic()
    meta = _base_meta("sim", n=p["n"], runs=p["runs"],
                      master_seed=config.master_seed,
                      denominator=p["denominator"])
    if p["trajectories"] is not None:
        paths = trajectory_ensemble(p["n"], p["runs"], config.master_seed,
                                    p["denominator"])
        runtimes = paths.runtimes
        run_idx, round_idx, informed = [], [], []
        for r in range(paths.runs):
            rt = int(runtimes[r])
            run_idx.extend([r] * (rt + 1))
            round_idx.extend(range(rt + 1))
            informed.extend(int(v) for v in paths.trajectories[r, :rt + 1])
        write_csv(p["trajectories"],
                  [("run_index", run_idx), ("round", round_idx),
                   ("informed", informed)], meta)
    else:
        runtimes = ensemble(p["n"], p["runs"], config.master_seed,
                            p["denominator"]).runtimes
    write_csv(config.output_path,
              [("run_index", range(len(runtimes))), ("runtime", runtimes)],
              meta)
    write_sidecar(config.output_path,
                  {**meta, "elapsed_seconds": time.monotonic() - started})
    mean = float(np.mean(runtimes))
    var = float(np.var(runtimes, ddof=1)) if len(runtimes) > 1 else 0.0
    print(f"n={p['n']} runs={p['runs']} mean={mean:.6g} variance={var:.6g} "
          f"min={int(runtimes.min())} max={int(runtimes.max())}")
    return EXIT_OK


def _cmd_limit(config: RunConfig) -> int:
    p = config.parameters
    started = time.monotonic()
    dist = sample_neg_log2_h(p["tstar"], p["samples"], config.master_seed)
    meta = _base_meta("limit", t_star=p["tstar"], samples=p["samples"],
                      master_seed=config.master_seed, sorted=True)
    if config.output_path.endswith(".csv"):
        write_csv(config.output_path, [("value", dist.samples)], meta)
        write_sidecar(config.output_path,
                      {**meta, "elapsed_seconds": time.monotonic() - started})
    else:
        write_f64(config.output_path, dist.samples,
                  {**meta, "elapsed_seconds": time.monotonic() - started})
    print(f"t_star={p['tstar']} samples={p['samples']} "
          f"mean={dist.mean():.6g} variance={dist.variance():.6g}")
    return EXIT_OK


def _load_distribution(path: str):
    meta, values = load_samples(path)
    return meta, EmpiricalDistribution.from_samples(values)


def _cmd_density(config: RunConfig) -> int:
    p = config.parameters
    input_meta, dist = _load_distribution(p["input"])
    bandwidth = p["bandwidth"]
    if bandwidth != "scott":
        bandwidth = float(bandwidth)
    if p["grid"] is not None:
        grid = parse_grid(p["grid"])
    else:
        grid = density_grid(dist, points=p["points"], bandwidth=bandwidth)
    values = kde_density(dist, grid, bandwidth)
    bw_value = scott_bandwidth(dist) if bandwidth == "scott" else bandwidth
    meta = _base_meta("density", input=p["input"], bandwidth=bw_value,
                      count=dist.count, input_meta=input_meta)
    write_csv(config.output_path, [("x", grid), ("density", values)], meta)
    return EXIT_OK


def _cmd_moments(config: RunConfig) -> int:
    p = config.parameters
    input_meta, dist = _load_distribution(p["input"])
    shifts = parse_grid(p["grid"])
    means, variances = [], []
    for shift in shifts:
        # any real shift: the law translates by the integer part exactly
        base = math.floor(shift)
        frac = float(shift - base)
        means.append(lattice_mean(dist, frac) + base)
        variances.append(lattice_variance(dist, frac))
    meta = _base_meta("moments", input=p["input"], count=dist.count,
                      input_meta=input_meta)
    write_csv(config.output_path,
              [("x_shift", shifts), ("mean", means), ("variance", variances)],
              meta)
    return EXIT_OK


def _cmd_charfn(config: RunConfig) -> int:
    p = config.parameters
    grid = parse_grid(p["x"])
    values = phi_grid(grid, p["t"])
    meta = _base_meta("charfn", t=p["t"], x=p["x"])
    write_csv(config.output_path,
              [("x", grid), ("t", [p["t"]] * grid.size),
               ("r", values.real), ("im", values.imag),
               ("modulus", np.abs(values))], meta)
    return EXIT_OK


def _cmd_verify(config: RunConfig) -> int:
    p = config.parameters
    verifier = p["verifier"]
    if verifier == "tv":
        reports = verify_tv_bound(p["n"], p["tmax"])
        return _emit_reports(reports, config.output_path)
    if verifier == "recurrence":
        paths = trajectory_ensemble(p["n"], p["runs"], config.master_seed)
        report = recurrence_ensemble_report(paths, p["threshold"])
        return _emit_reports([report], config.output_path)
    if verifier == "endgame":
        paths = trajectory_ensemble(p["n"], p["runs"], config.master_seed)
        summary = verify_endgame(paths)
        return _emit_reports(summary.reports(p["threshold"]), config.output_path)
    if verifier == "theorem1":
        runtime_dist = ensemble(p["n"], p["runs"], config.master_seed).distribution
        # disjoint seed window keeps the two sample sets independent
        limit_seed = (config.master_seed + p["runs"]) % 2 ** 32
        x_dist = sample_neg_log2_h(p["tstar"], p["samples"], limit_seed)
        distance = sup_tail_distance(runtime_dist, x_dist, p["n"])
        if p["dump_cdf"] is not None:
            rows = tail_comparison_rows(runtime_dist, x_dist, p["n"])
            write_csv(p["dump_cdf"],
                      [("k", [r[0] for r in rows]),
                       ("runtime_tail", [r[1] for r in rows]),
                       ("limit_tail", [r[2] for r in rows])],
                      _base_meta("verify-theorem1-cdf", n=p["n"],
                                 runs=p["runs"], samples=p["samples"],
                                 t_star=p["tstar"],
                                 master_seed=config.master_seed))
        report = VerificationReport(
            name="theorem1-sup-distance", observed=distance,
            bound_or_target=p["bound"], passed=distance < p["bound"],
            metadata={"n": p["n"], "runs": p["runs"], "samples": p["samples"],
                      "t_star": p["tstar"], "master_seed": config.master_seed})
        return _emit_reports([report], config.output_path)
    if verifier == "residual":
        n_values = [int(v) for v in p["n_values"].split(",") if v]
        points = runtime_residual_scan(n_values, p["runs"], config.master_seed)
        residuals = [pt.residual for pt in points]
        spread = max(residuals) - min(residuals)
        gaps = [abs(b - a) for a, b in zip(residuals, residuals[1:])]
        reports = [
            VerificationReport(
                name="residual-band", observed=spread,
                bound_or_target=p["band"], passed=spread <= p["band"],
                metadata={"n_values": n_values, "runs": p["runs"],
                          "residuals": residuals,
                          "master_seed": config.master_seed}),
        ]
        if gaps:
            reports.append(VerificationReport(
                name="residual-adjacent", observed=max(gaps),
                bound_or_target=p["adjacent"],
                passed=max(gaps) < p["adjacent"],
                metadata={"n_values": n_values, "runs": p["runs"],
                          "master_seed": config.master_seed}))
        return _emit_reports(reports, config.output_path)
    if verifier == "tail":
        runtime_dist = ensemble(p["n"], p["runs"], config.master_seed).distribution
        r_values = [float(r) for r in np.arange(0.0, p["r_max"] + 0.5)]
        decay = tail_decay_check(runtime_dist, r_values)
        deviations = np.abs(runtime_dist.samples - runtime_dist.mean())
        headline = float(np.count_nonzero(deviations >= p["r"])) / runtime_dist.count
        reports = [
            decay.report(),
            VerificationReport(
                name="tail-probability", observed=headline,
                bound_or_target=p["p"], passed=headline < p["p"],
                metadata={"n": p["n"], "runs": p["runs"], "r": p["r"],
                          "master_seed": config.master_seed}),
        ]
        return _emit_reports(reports, config.output_path)
    raise _UsageError(f"unknown verifier {verifier!r}")


def _cmd_subseq(config: RunConfig) -> int:
    p = config.parameters
    points = subsequence(SubsequenceSpec(x_target=p["x"], i_from=p["i_from"],
                                         i_to=p["i_to"]))
    meta = _base_meta("subseq", x_target=p["x"], i_from=p["i_from"],
                      i_to=p["i_to"])
    write_csv(config.output_path,
              [("i", [pt.i for pt in points]), ("n_i", [pt.n for pt in points]),
               ("frac", [pt.frac for pt in points])], meta)
    return EXIT_OK


_PLOT_SCHEMAS = {
    "density": ("x", "density"),
    "moments": ("x_shift", "mean", "variance"),
    "cdf-compare": ("k", "runtime_tail", "limit_tail"),
}


def _cmd_plot(config: RunConfig) -> int:
    p = config.parameters
    meta, columns = read_csv(p["input"])
    required = _PLOT_SCHEMAS[p["kind"]]
    missing = [name for name in required if name not in columns]
    if missing:
        raise FormatError(
            f"{p['input']}: {p['kind']} plot needs columns {required}, "
            f"missing {missing}")
    if p["kind"] == "density":
        series = [(columns["x"], columns["density"], "density")]
        text = line_plot(series, "Density estimate", "x", "density", meta)
    elif p["kind"] == "moments":
        series = [(columns["x_shift"], columns["mean"], "mean"),
                  (columns["x_shift"], columns["variance"], "variance")]
        text = line_plot(series, "Lattice moments", "shift", "moment", meta)
    else:
        series = [(columns["k"], columns["runtime_tail"], "simulated"),
                  (columns["k"], columns["limit_tail"], "limit")]
        text = line_plot(series, "Tail comparison", "k", "P(value >= k)", meta)
    with open(config.output_path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(text)
    return EXIT_OK


_RANDOMIZED = {"sim", "limit", "verify"}

_HANDLERS = {
    "sim": _cmd_sim,
    "limit": _cmd_limit,
    "density": _cmd_density,
    "moments": _cmd_moments,
    "charfn": _cmd_charfn,
    "verify": _cmd_verify,
    "subseq": _cmd_subseq,
    "plot": _cmd_plot,
}


def _config_from_args(args) -> RunConfig:
    parameters = {k: v for k, v in vars(args).items()
                  if k not in ("command", "seed", "out")}
    seed = None
    if args.command in _RANDOMIZED and args.command != "verify":
        seed = _resolve_seed(args)
    elif args.command == "verify" and parameters.get("verifier") != "tv":
        seed = _resolve_seed(args)
    return RunConfig(command=args.command, parameters=parameters,
                     master_seed=seed, output_path=getattr(args, "out", None))


def dispatch(config: RunConfig) -> int:
    """Execute a parsed invocation; returns the process exit code."""
    apply_thread_cap()
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise _UsageError(f"unknown command {config.command!r}")
    return handler(config)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits directly for --help/--version
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
        return dispatch(config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        # must precede ValueError: format problems are I/O-class failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
