"""Seeded Monte-Carlo engine: sweep SNR, run every configured algorithm on the
same trials, and aggregate support-error / false-discovery rates.

Each trial is a pure function of (config, derived seed), so sweeps are
bit-reproducible and trivially parallel: worker count never changes the
output.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .designs import (
    DesignMatrix,
    SignalSpec,
    make_gaussian,
    make_identity_hadamard,
    make_signal,
    sample_support,
    synthesize,
)
from .errors import ValidationError
from .linalg import load_matrix_csv
from .omp import SolutionPath, SupportEstimate, default_kmax, solution_path, stop_fixed, stop_rcsc, stop_rpsc
from .selectors import RrtaParams, residual_ratios, rrm_select, rrt_select, rrta_select
from .special import build_threshold_table

_MASK64 = (1 << 64) - 1


def supported_roster() -> dict[str, dict[str, float]]:
    """Algorithm families and their default parameters (each runs on omp or ols)."""
    return {
        "fixed_k0": {},
        "rpsc": {},
        "rcsc": {},
        "rpsc_hsc": {"eta": 0.1},
        "rcsc_hsc": {"eta": 0.1},
        "rrt": {"alpha": 0.1},
        "rrm": {},
        "rrta": {"pfd": 0.1, "q": 2.0},
    }


@dataclass(frozen=True)
class DesignSpec:
    """How to materialize the sensing matrix for a sweep."""

    kind: str
    n: int
    p: int
    seed: int = 0
    normalize: bool = False
    path: str | None = None  # CSV source for kind == "external"


@dataclass(frozen=True)
class AlgorithmSpec:
    """One configured algorithm; irrelevant parameters keep their defaults."""

    name: str
    rule: str = "omp"
    alpha: float = 0.1
    eta: float = 0.1
    pfd: float = 0.1
    q: float = 2.0

    @property
    def label(self) -> str:
        base = {
            "rrt": f"rrt(alpha={self.alpha:g})",
            "rrta": f"rrta(pfd={self.pfd:g},q={self.q:g})",
            "rpsc_hsc": f"rpsc_hsc(eta={self.eta:g})",
            "rcsc_hsc": f"rcsc_hsc(eta={self.eta:g})",
        }.get(self.name, self.name)
        return base if self.rule == "omp" else f"{base}|{self.rule}"


@dataclass(frozen=True)
class ExperimentConfig:
    design: DesignSpec
    signal: SignalSpec
    snr_db_list: tuple[float, ...]
    trials: int
    algorithms: tuple[AlgorithmSpec, ...]
    root_seed: int
    k_max_override: int | None = None
    regenerate_matrix_per_trial: bool | None = None  # None: per design default

    @property
    def k_max(self) -> int:
        return self.k_max_override if self.k_max_override is not None else default_kmax(self.design.n)

    @property
    def regenerate_matrix(self) -> bool:
        if self.regenerate_matrix_per_trial is None:
            return self.design.kind == "gaussian"
        return self.regenerate_matrix_per_trial

    def validate(self) -> None:
        d = self.design
        if d.kind not in ("identity_hadamard", "gaussian", "external"):
            raise ValidationError(f"design.kind: unknown kind {d.kind!r}")
        if d.kind == "identity_hadamard":
            if d.n < 1 or d.n & (d.n - 1):
                raise ValidationError(f"design.n: must be a power of two, got {d.n}")
            if d.p != 2 * d.n:
                raise ValidationError(f"design.p: must equal 2n={2 * d.n}, got {d.p}")
        if d.kind == "external" and not d.path:
            raise ValidationError("design.path: required for kind 'external'")
        if d.n < 2 or d.p < 1:
            raise ValidationError(f"design dimensions invalid: n={d.n}, p={d.p}")
        if not self.snr_db_list:
            raise ValidationError("snr_db: must be nonempty")
        if len(set(self.snr_db_list)) != len(self.snr_db_list):
            raise ValidationError("snr_db: values must be distinct (they key the trial seeds)")
        if self.trials < 1:
            raise ValidationError(f"trials: must be >= 1, got {self.trials}")
        if not self.algorithms:
            raise ValidationError("algorithms: must be nonempty")
        roster = supported_roster()
        for alg in self.algorithms:
            if alg.name not in roster:
                raise ValidationError(
                    f"algorithms: unknown name {alg.name!r}; supported: {sorted(roster)}"
                )
            if alg.rule not in ("omp", "ols"):
                raise ValidationError(f"algorithms: unknown rule {alg.rule!r}")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"algorithms: duplicate entries {labels}")
        if not 1 <= self.signal.k0 <= self.design.p:
            raise ValidationError(f"signal.k0: must lie in [1, p], got {self.signal.k0}")
        k_max = self.k_max
        if not self.signal.k0 <= k_max <= min(d.n - 1, d.p):
            raise ValidationError(
                f"k_max={k_max} must lie in [k0={self.signal.k0}, min(n-1, p)={min(d.n - 1, d.p)}]"
            )
        if self.regenerate_matrix_per_trial and d.kind != "gaussian":
            raise ValidationError("regenerate_matrix_per_trial: only meaningful for gaussian designs")
        if self.root_seed < 0:
            raise ValidationError(f"root_seed: must be nonnegative, got {self.root_seed}")

    def to_dict(self) -> dict:
        return {
            "design": {
                "kind": self.design.kind,
                "n": self.design.n,
                "p": self.design.p,
                "seed": self.design.seed,
                "normalize": self.design.normalize,
                "path": self.design.path,
            },
            "signal": {
                "k0": self.signal.k0,
                "kind": self.signal.kind,
                "ratio": self.signal.ratio,
            },
            "snr_db": list(self.snr_db_list),
            "trials": self.trials,
            "algorithms": [
                {
                    "name": a.name,
                    "rule": a.rule,
                    "alpha": a.alpha,
                    "eta": a.eta,
                    "pfd": a.pfd,
                    "q": a.q,
                }
                for a in self.algorithms
            ],
            "root_seed": self.root_seed,
            "k_max": self.k_max,
            "regenerate_matrix_per_trial": self.regenerate_matrix,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class AlgorithmOutcome:
    estimate: SupportEstimate
    exact: bool
    false_discovery: bool
    card_error: int


@dataclass
class TrialRecord:
    trial_index: int
    snr_db: float
    true_support: tuple[int, ...]
    outcomes: dict[str, AlgorithmOutcome] = field(default_factory=dict)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    algorithm: str
    rule: str
    trials: int
    pe: float
    pe_stderr: float
    pfd: float
    pfd_stderr: float


@dataclass
class SweepResult:
    config_digest: str
    rows: list[SweepRow]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_trial_seed(root_seed: int, snr_index: int, trial_index: int) -> int:
    """Collision-resistant 64-bit stream id for one (snr point, trial) cell."""
    h = _splitmix64(root_seed & _MASK64)
    h = _splitmix64(h ^ (snr_index & _MASK64))
    h = _splitmix64(h ^ (trial_index & _MASK64))
    return h


def build_design(spec: DesignSpec) -> DesignMatrix:
    if spec.kind == "identity_hadamard":
        return make_identity_hadamard(spec.n)
    if spec.kind == "gaussian":
        return make_gaussian(spec.n, spec.p, spec.seed, spec.normalize)
    if spec.kind == "external":
        dense = load_matrix_csv(spec.path)
        if (dense.rows, dense.cols) != (spec.n, spec.p):
            raise ValidationError(
                f"external matrix is {dense.rows}x{dense.cols}, config says {spec.n}x{spec.p}"
            )
        norms = np.linalg.norm(dense.values, axis=0)
        unit = bool(np.allclose(norms, 1.0, atol=1e-10))
        return DesignMatrix(dense, "external", unit_norm_columns=unit)
    raise ValidationError(f"unknown design kind {spec.kind!r}")


def score_estimate(estimate: SupportEstimate, true_support: frozenset[int]) -> AlgorithmOutcome:
    """Exactness / false-discovery / cardinality bookkeeping for one estimate."""
    exact = estimate.support == true_support
    false_discovery = bool(estimate.support - true_support)
    card_error = len(estimate.support) - len(true_support)
    return AlgorithmOutcome(estimate, exact, false_discovery, card_error)


def _apply_algorithm(alg: AlgorithmSpec, path: SolutionPath, sigma: float, config: ExperimentConfig):
    n, p, k_max = config.design.n, config.design.p, config.k_max
    if alg.name == "fixed_k0":
        # paths can only be shorter than k0 after a rank-deficient early stop;
        # scoring the truncated support as-is keeps the trial comparable
        return stop_fixed(path, min(config.signal.k0, path.K))
    if alg.name == "rpsc":
        return stop_rpsc(path, sigma, n)
    if alg.name == "rpsc_hsc":
        return stop_rpsc(path, sigma, n, eta=alg.eta)
    if alg.name == "rcsc":
        return stop_rcsc(path, sigma, p)
    if alg.name == "rcsc_hsc":
        return stop_rcsc(path, sigma, p, eta=alg.eta)
    ratios = residual_ratios(path)
    if alg.name == "rrm":
        return path.estimate(rrm_select(ratios))
    if alg.name == "rrt":
        table = build_threshold_table(n, p, k_max, alg.alpha)
        if len(ratios) < len(table):
            table = table.truncated(len(ratios))
        return path.estimate(rrt_select(ratios, table))
    if alg.name == "rrta":
        params = RrtaParams(pfd_finite=alg.pfd, q=alg.q)
        return path.estimate(rrta_select(ratios, n, p, k_max, params))
    raise ValidationError(f"unknown algorithm {alg.name!r}")


def run_trial(
    config: ExperimentConfig,
    matrix: DesignMatrix | None,
    snr_db: float,
    trial_index: int,
) -> TrialRecord:
    """One synthetic trial: draw data, compute one path per rule, apply all
    algorithms to identical data, and record outcomes.

    Selectors (rrt/rrm/rrta) see only the path; known-sigma rules receive the
    trial's true sigma and fixed_k0 the true sparsity, as oracles by design.
    """
    snr_index = config.snr_db_list.index(snr_db)
    seed = derive_trial_seed(config.root_seed, snr_index, trial_index)
    support_seed = _splitmix64(seed ^ 0x1)
    signal_seed = _splitmix64(seed ^ 0x2)
    noise_seed = _splitmix64(seed ^ 0x3)
    matrix_seed = _splitmix64(seed ^ 0x4)

    design = matrix
    if config.regenerate_matrix:
        design = make_gaussian(config.design.n, config.design.p, matrix_seed, config.design.normalize)
    if design is None:
        design = build_design(config.design)

    p, k0 = config.design.p, config.signal.k0
    support = sample_support(p, k0, support_seed)
    beta = make_signal(p, support, config.signal, signal_seed)
    snr = 10.0 ** (snr_db / 10.0)
    problem = synthesize(design, beta, support, snr, noise_seed)

    paths: dict[str, SolutionPath] = {}
    record = TrialRecord(trial_index=trial_index, snr_db=snr_db, true_support=support)
    for alg in config.algorithms:
        path = paths.get(alg.rule)
        if path is None:
            path = solution_path(design, problem.observation, config.k_max, alg.rule)
            paths[alg.rule] = path
        estimate = _apply_algorithm(alg, path, problem.sigma, config)
        record.outcomes[alg.label] = score_estimate(estimate, problem.true_support)
    return record


def _count_block(args) -> dict[str, list[int]]:
    config, matrix, snr_db, start, stop = args
    counts = {alg.label: [0, 0] for alg in config.algorithms}
    for trial_index in range(start, stop):
        record = run_trial(config, matrix, snr_db, trial_index)
        for label, outcome in record.outcomes.items():
            if not outcome.exact:
                counts[label][0] += 1
            if outcome.false_discovery:
                counts[label][1] += 1
    return counts


def _binomial_stderr(successes: int, trials: int) -> float:
    phat = successes / trials
    return math.sqrt(phat * (1.0 - phat) / trials)


def run_sweep(config: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Full sweep over the configured SNR points.

    Trials are independent and seed-determined, so any worker count produces
    the identical SweepResult.
    """
    config.validate()
    matrix = None if config.regenerate_matrix else build_design(config.design)
    trials = config.trials
    rows: list[SweepRow] = []
    for snr_db in config.snr_db_list:
        if workers <= 1:
            counts = _count_block((config, matrix, snr_db, 0, trials))
        else:
            bounds = np.linspace(0, trials, min(workers * 4, trials) + 1, dtype=int)
            blocks = [
                (config, matrix, snr_db, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if a < b
            ]
            counts = {alg.label: [0, 0] for alg in config.algorithms}
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for part in pool.map(_count_block, blocks):
                    for label, (err, fd) in part.items():
                        counts[label][0] += err
                        counts[label][1] += fd
        for alg in config.algorithms:
            err, fd = counts[alg.label]
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    algorithm=alg.label,
                    rule=alg.rule,
                    trials=trials,
                    pe=err / trials,
                    pe_stderr=_binomial_stderr(err, trials),
                    pfd=fd / trials,
                    pfd_stderr=_binomial_stderr(fd, trials),
                )
            )
    return SweepResult(config_digest=config.digest(), rows=rows)


SWEEP_CSV_HEADER = [
    "experiment_id",
    "design",
    "n",
    "p",
    "k0",
    "signal_kind",
    "snr_db",
    "algorithm",
    "rule",
    "trials",
    "pe",
    "pe_stderr",
    "pfd",
    "pfd_stderr",
]


def write_sweep_csv(fh, result: SweepResult, config: ExperimentConfig) -> None:
    """One row per (snr point, algorithm); floats use repr for exact round-trip."""
    writer = csv.writer(fh)
    writer.writerow(SWEEP_CSV_HEADER)
    for row in result.rows:
        writer.writerow(
            [
                result.config_digest,
                config.design.kind,
                config.design.n,
                config.design.p,
                config.signal.k0,
                config.signal.kind,
                repr(row.snr_db),
                row.algorithm,
                row.rule,
                row.trials,
                repr(row.pe),
                repr(row.pe_stderr),
                repr(row.pfd),
                repr(row.pfd_stderr),
            ]
        )


def read_sweep_csv(fh) -> list[SweepRow]:
    reader = csv.DictReader(fh)
    rows = []
    for rec in reader:
        rows.append(
            SweepRow(
                snr_db=float(rec["snr_db"]),
                algorithm=rec["algorithm"],
                rule=rec["rule"],
                trials=int(rec["trials"]),
                pe=float(rec["pe"]),
                pe_stderr=float(rec["pe_stderr"]),
                pfd=float(rec["pfd"]),
                pfd_stderr=float(rec["pfd_stderr"]),
            )
        )
    return rows
