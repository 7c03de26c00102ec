"""Command-line front end: config parsing, subcommand dispatch, CSV/JSON
emission, and plot-data export for the built-in experiment presets.

User-facing column indices are 1-based; everything internal is 0-based.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis, simulate
from .designs import DesignMatrix, SignalSpec, make_gaussian, make_identity_hadamard
from .errors import ParseError, ValidationError
from .linalg import load_matrix_csv, load_vector_csv, save_matrix_csv
from .omp import default_kmax, solution_path, stop_fixed, stop_rcsc, stop_rpsc
from .selectors import RrtaParams, residual_ratios, rrm_select, rrt_select, rrta_select
from .simulate import AlgorithmSpec, DesignSpec, ExperimentConfig, supported_roster
from .special import build_threshold_table

_CONFIG_KEYS = {
    "design",
    "signal",
    "snr_db",
    "trials",
    "algorithms",
    "root_seed",
    "k_max",
    "regenerate_matrix_per_trial",
}
_DESIGN_KEYS = {"kind", "n", "p", "seed", "normalize", "path"}
_SIGNAL_KEYS = {"k0", "kind", "ratio"}
_ALG_KEYS = {"name", "rule", "alpha", "eta", "pfd", "q"}


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValidationError(f"{context}.{key}: required field missing")
    return mapping[key]


def _reject_unknown(mapping: dict, allowed: set, context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ValidationError(f"{context}: unknown field(s) {sorted(unknown)}")


def parse_config(json_text: str) -> ExperimentConfig:
    """Parse and validate an experiment config; fills all defaults."""
    try:
        raw = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config: top level must be a JSON object")
    _reject_unknown(raw, _CONFIG_KEYS, "config")

    design_raw = _require(raw, "design", "config")
    _reject_unknown(design_raw, _DESIGN_KEYS, "design")
    kind = _require(design_raw, "kind", "design")
    n = int(_require(design_raw, "n", "design"))
    if kind == "identity_hadamard":
        p = int(design_raw.get("p", 2 * n))
    else:
        p = int(_require(design_raw, "p", "design"))
    design = DesignSpec(
        kind=kind,
        n=n,
        p=p,
        seed=int(design_raw.get("seed", 0)),
        normalize=bool(design_raw.get("normalize", False)),
        path=design_raw.get("path"),
    )

    signal_raw = _require(raw, "signal", "config")
    _reject_unknown(signal_raw, _SIGNAL_KEYS, "signal")
    signal = SignalSpec(
        k0=int(_require(signal_raw, "k0", "signal")),
        kind=signal_raw.get("kind", "pm_one"),
        ratio=float(signal_raw.get("ratio", 1.0 / 3.0)),
    )

    snr_db = _require(raw, "snr_db", "config")
    if not isinstance(snr_db, list) or not snr_db:
        raise ValidationError("snr_db: must be a nonempty list of numbers")

    algorithms = []
    roster = supported_roster()
    for i, entry in enumerate(_require(raw, "algorithms", "config")):
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict):
            raise ValidationError(f"algorithms[{i}]: must be a name or an object")
        _reject_unknown(entry, _ALG_KEYS, f"algorithms[{i}]")
        name = _require(entry, "name", f"algorithms[{i}]")
        if name not in roster:
            raise ValidationError(
                f"algorithms[{i}]: unknown name {name!r}; supported: {sorted(roster)}"
            )
        defaults = {"alpha": 0.1, "eta": 0.1, "pfd": 0.1, "q": 2.0}
        defaults.update(roster[name])
        algorithms.append(
            AlgorithmSpec(
                name=name,
                rule=entry.get("rule", "omp"),
                alpha=float(entry.get("alpha", defaults["alpha"])),
                eta=float(entry.get("eta", defaults["eta"])),
                pfd=float(entry.get("pfd", defaults["pfd"])),
                q=float(entry.get("q", defaults["q"])),
            )
        )

    config = ExperimentConfig(
        design=design,
        signal=signal,
        snr_db_list=tuple(float(v) for v in snr_db),
        trials=int(_require(raw, "trials", "config")),
        algorithms=tuple(algorithms),
        root_seed=int(_require(raw, "root_seed", "config")),
        k_max_override=int(raw["k_max"]) if "k_max" in raw else None,
        regenerate_matrix_per_trial=raw.get("regenerate_matrix_per_trial"),
    )
    config.validate()
    return config


# ---------------------------------------------------------------------------
# experiment presets (n=32 identity+Hadamard / gaussian, k0=3)
# ---------------------------------------------------------------------------

_FIG_BASELINES = (
    AlgorithmSpec("fixed_k0"),
    AlgorithmSpec("rpsc"),
    AlgorithmSpec("rcsc"),
    AlgorithmSpec("rpsc_hsc", eta=0.1),
    AlgorithmSpec("rcsc_hsc", eta=0.1),
    AlgorithmSpec("rrt", alpha=0.1),
    AlgorithmSpec("rrt", alpha=0.01),
    AlgorithmSpec("rrm"),
    AlgorithmSpec("rrta", pfd=0.1, q=2.0),
)
_FIG_Q_SWEEP = (
    AlgorithmSpec("rrta", pfd=0.1, q=1.0),
    AlgorithmSpec("rrta", pfd=0.1, q=2.0),
    AlgorithmSpec("rrta", pfd=0.1, q=5.0),
    AlgorithmSpec("rrta", pfd=0.1, q=10.0),
    AlgorithmSpec("fixed_k0"),
    AlgorithmSpec("rpsc_hsc", eta=0.1),
    AlgorithmSpec("rcsc_hsc", eta=0.1),
)
_HADAMARD_32 = DesignSpec(kind="identity_hadamard", n=32, p=64)
_GAUSSIAN_32 = DesignSpec(kind="gaussian", n=32, p=64)
_PM_ONE = SignalSpec(k0=3, kind="pm_one")
_GEOMETRIC = SignalSpec(k0=3, kind="geometric", ratio=1.0 / 3.0)
_SNR_0_40 = tuple(float(v) for v in range(0, 44, 4))
_SNR_0_60 = tuple(float(v) for v in range(0, 65, 5))

FIGURE_NAMES = (
    "fig1_hadamard",
    "fig1_gaussian",
    "fig2_hadamard",
    "fig2_gaussian",
    "fig3_q_sweep",
)


def figure_config(name: str, trials: int, root_seed: int) -> ExperimentConfig:
    """Built-in sweep configuration behind each named figure preset."""
    presets = {
        "fig1_hadamard": (_HADAMARD_32, _PM_ONE, _SNR_0_40, _FIG_BASELINES),
        "fig1_gaussian": (_GAUSSIAN_32, _PM_ONE, _SNR_0_40, _FIG_BASELINES),
        "fig2_hadamard": (_HADAMARD_32, _GEOMETRIC, _SNR_0_60, _FIG_BASELINES),
        "fig2_gaussian": (_GAUSSIAN_32, _GEOMETRIC, _SNR_0_60, _FIG_BASELINES),
        "fig3_q_sweep": (_HADAMARD_32, _PM_ONE, _SNR_0_40, _FIG_Q_SWEEP),
    }
    if name not in presets:
        raise ValidationError(f"unknown figure {name!r}; choose from {FIGURE_NAMES}")
    design, signal, snr, algorithms = presets[name]
    return ExperimentConfig(
        design=design,
        signal=signal,
        snr_db_list=snr,
        trials=trials,
        algorithms=algorithms,
        root_seed=root_seed,
    )


# ---------------------------------------------------------------------------
# output helpers: build content fully, then write atomically
# ---------------------------------------------------------------------------


def _write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _method_params(text: str | None) -> list[float]:
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok]


def _load_external_design(path: str) -> DesignMatrix:
    matrix = load_matrix_csv(path)
    norms = np.linalg.norm(matrix.values, axis=0)
    return DesignMatrix(matrix, "external", bool(np.allclose(norms, 1.0, atol=1e-10)))


def _run_recover(args) -> dict:
    design = _load_external_design(args.matrix)
    y = load_vector_csv(args.y)
    n, p = design.n, design.p
    k_max = args.k_max if args.k_max is not None else default_kmax(n)

    name, _, param_text = args.method.partition(":")
    params = _method_params(param_text)
    rule = args.rule
    path = solution_path(design, y, k_max, rule)
    ratios = residual_ratios(path)

    if name == "fixed":
        k0 = int(params[0]) if params else 0
        estimate = stop_fixed(path, k0)
    elif name in ("rpsc", "rpsc-hsc"):
        if args.sigma is None:
            raise ValidationError(f"--sigma is required for method {name!r}")
        eta = (params[0] if params else args.eta) if name == "rpsc-hsc" else None
        estimate = stop_rpsc(path, args.sigma, n, eta=eta)
    elif name in ("rcsc", "rcsc-hsc"):
        if args.sigma is None:
            raise ValidationError(f"--sigma is required for method {name!r}")
        eta = (params[0] if params else args.eta) if name == "rcsc-hsc" else None
        estimate = stop_rcsc(path, args.sigma, p, eta=eta)
    elif name == "rrt":
        alpha = params[0] if params else args.alpha
        table = build_threshold_table(n, p, k_max, alpha)
        if len(ratios) < len(table):
            table = table.truncated(len(ratios))
        estimate = path.estimate(rrt_select(ratios, table))
    elif name == "rrm":
        estimate = path.estimate(rrm_select(ratios))
    elif name == "rrta":
        q = params[0] if params else args.q
        pfd = params[1] if len(params) > 1 else args.pfd
        estimate = path.estimate(rrta_select(ratios, n, p, k_max, RrtaParams(pfd, q)))
    else:
        raise ValidationError(
            f"unknown method {name!r}; expected fixed:k|rpsc|rcsc|rpsc-hsc:eta|"
            f"rcsc-hsc:eta|rrt:alpha|rrm|rrta:q,pfd"
        )

    return {
        "support": sorted(i + 1 for i in estimate.support),
        "k_selected": estimate.k_selected,
        "status": estimate.status,
        "residual_norm": float(path.residual_norms[estimate.k_selected])
        if estimate.status != "empty_selection"
        else float(path.residual_norms[0]),
        "rr_values": [float(v) for v in ratios.values],
    }


def _cmd_gen_matrix(args) -> int:
    if args.kind == "identity_hadamard":
        design = make_identity_hadamard(args.n)
    elif args.kind == "gaussian":
        if args.p is None:
            raise ValidationError("--p is required for gaussian matrices")
        design = make_gaussian(args.n, args.p, args.seed, args.normalize)
    else:
        raise ValidationError(f"unknown kind {args.kind!r}")
    buf = io.StringIO()
    save_matrix_csv(buf, design.matrix)
    _write_text_atomic(args.out, buf.getvalue())
    sidecar = {
        "kind": design.kind,
        "n": design.n,
        "p": design.p,
        "seed": args.seed,
        "normalize": bool(args.normalize),
    }
    _write_text_atomic(args.out + ".json", json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {args.out} ({design.n}x{design.p}) and {args.out}.json")
    return 0


def _cmd_threshold(args) -> int:
    table = build_threshold_table(args.n, args.p, args.k_max, args.alpha)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["k", "gamma"])
    for k, gamma in enumerate(table.values, start=1):
        writer.writerow([k, repr(float(gamma))])
    if args.out:
        _write_text_atomic(args.out, buf.getvalue())
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _cmd_recover(args) -> int:
    print(json.dumps(_run_recover(args), indent=2))
    return 0


def _cmd_diagnose(args) -> int:
    design = _load_external_design(args.matrix)
    support = None
    if args.support:
        support = [int(tok) - 1 for tok in args.support.split(",") if tok]
    orders = tuple(range(1, args.ric_max_order + 1)) if args.ric_max_order else ()
    report = analysis.build_regularity_report(design, support=support, ric_orders=orders)

    k0 = args.k0
    k_max = args.k_max if args.k_max is not None else default_kmax(design.n)
    # RIC inputs: brute-force values when available, else the incoherence
    # bound delta_j <= (j-1) mu as a proxy.
    def delta_for(order: int) -> float:
        if report.ric and order in report.ric:
            return report.ric[order]
        return min((order - 1) * report.mu, 0.999999)

    proxy_used = not (report.ric and k0 in report.ric and (k0 + 1) in report.ric)
    if proxy_used:
        extra = "epsilon bounds use the incoherence proxy delta_j <= (j-1) mu"
        report.notes = f"{report.notes}; {extra}" if report.notes else extra
    bounds = analysis.epsilon_bounds(
        delta_k0=delta_for(k0),
        delta_k0p1=delta_for(k0 + 1),
        beta_min=args.beta_min,
        beta_max=args.beta_max,
        n=design.n,
        p=design.p,
        k_max=k_max,
        alpha=args.alpha,
        sigma=args.sigma,
        k0=k0,
    )
    payload = {
        "regularity": {
            "mu": report.mu,
            "mic_max_k0": report.mic_max_k0,
            "erc_constant": report.erc_constant,
            "ric": {str(k): v for k, v in report.ric.items()} if report.ric else None,
            "notes": report.notes,
        },
        "epsilon_bounds": dataclasses.asdict(bounds),
    }
    print(json.dumps(payload, indent=2))
    return 0


def _sweep_csv_text(result, config) -> str:
    buf = io.StringIO()
    simulate.write_sweep_csv(buf, result, config)
    return buf.getvalue()


def _cmd_simulate(args) -> int:
    with open(args.config) as fh:
        config = parse_config(fh.read())
    if args.trials is not None:
        config = dataclasses.replace(config, trials=args.trials)
    if args.root_seed is not None:
        config = dataclasses.replace(config, root_seed=args.root_seed)
    result = simulate.run_sweep(config, workers=args.threads)
    _write_text_atomic(args.out, _sweep_csv_text(result, config))
    print(f"wrote {args.out} ({len(result.rows)} rows, experiment {result.config_digest})")
    return 0


def _cmd_figure(args) -> int:
    config = figure_config(args.name, args.trials, args.root_seed)
    result = simulate.run_sweep(config, workers=args.threads)
    os.makedirs(args.out, exist_ok=True)
    results_path = os.path.join(args.out, f"{args.name}_results.csv")
    _write_text_atomic(results_path, _sweep_csv_text(result, config))
    plot_buf = io.StringIO()
    writer = csv.writer(plot_buf)
    writer.writerow(["snr_db", "algorithm", "pe"])
    for row in result.rows:
        writer.writerow([repr(row.snr_db), row.algorithm, repr(row.pe)])
    plot_path = os.path.join(args.out, f"{args.name}_pe.csv")
    _write_text_atomic(plot_path, plot_buf.getvalue())
    print(f"wrote {results_path} and {plot_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrselect",
        description="Greedy sparse support recovery with residual-ratio selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-matrix", help="write a design matrix as CSV + JSON sidecar")
    gen.add_argument("--kind", required=True, choices=["identity_hadamard", "gaussian"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--normalize", action="store_true")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen_matrix)

    thr = sub.add_parser("threshold", help="print the threshold table as CSV (k, gamma)")
    thr.add_argument("--n", type=int, required=True)
    thr.add_argument("--p", type=int, required=True)
    thr.add_argument("--k-max", type=int, required=True)
    thr.add_argument("--alpha", type=float, default=0.1)
    thr.add_argument("--out")
    thr.set_defaults(func=_cmd_threshold)

    rec = sub.add_parser("recover", help="estimate a support from matrix/observation CSVs")
    rec.add_argument("--matrix", required=True)
    rec.add_argument("--y", required=True)
    rec.add_argument(
        "--method",
        "--stop",
        dest="method",
        required=True,
        help="fixed:k|rpsc|rcsc|rpsc-hsc:eta|rcsc-hsc:eta|rrt:alpha|rrm|rrta:q,pfd",
    )
    rec.add_argument("--rule", choices=["omp", "ols"], default="omp")
    rec.add_argument("--k-max", type=int)
    rec.add_argument("--sigma", type=float)
    rec.add_argument("--alpha", type=float, default=0.1)
    rec.add_argument("--eta", type=float, default=0.1)
    rec.add_argument("--pfd", type=float, default=0.1)
    rec.add_argument("--q", type=float, default=2.0)
    rec.set_defaults(func=_cmd_recover)

    diag = sub.add_parser("diagnose", help="print regularity diagnostics and recovery margins as JSON")
    diag.add_argument("--matrix", required=True)
    diag.add_argument("--k0", type=int, default=3)
    diag.add_argument("--k-max", type=int)
    diag.add_argument("--alpha", type=float, default=0.1)
    diag.add_argument("--sigma", type=float, default=0.1)
    diag.add_argument("--beta-min", type=float, default=1.0)
    diag.add_argument("--beta-max", type=float, default=1.0)
    diag.add_argument("--ric-max-order", type=int, default=0)
    diag.add_argument("--support", help="1-based column indices, comma separated (enables ERC)")
    diag.set_defaults(func=_cmd_diagnose)

    sim = sub.add_parser("simulate", help="run a sweep from a JSON config and write CSV")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--trials", type=int, help="override config trials")
    sim.add_argument("--root-seed", type=int, help="override config root seed")
    sim.add_argument("--threads", type=int, default=1)
    sim.set_defaults(func=_cmd_simulate)

    fig = sub.add_parser("figure", help="run a built-in experiment preset")
    fig.add_argument("name", choices=list(FIGURE_NAMES))
    fig.add_argument("--trials", type=int, default=10000)
    fig.add_argument("--root-seed", type=int, default=7)
    fig.add_argument("--threads", type=int, default=1)
    fig.add_argument("--out", required=True, help="output directory")
    fig.set_defaults(func=_cmd_figure)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
