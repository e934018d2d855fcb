"""Batch experiments: random states, DQC1 + MLE reconstruction, fidelity
statistics over shot schedules and noise grids, and CSV/JSON reports.

Random streams are derived with :class:`numpy.random.SeedSequence` spawn
keys so every trial is reproducible regardless of scheduling:

* input state ``i``:                 ``(seed, spawn_key=(0, i))``
* trial ``(i, shot_idx, noise_idx)``: ``(seed, spawn_key=(1, i, shot_idx, noise_idx))``

Within a trial the schedule of DQC1 settings receives children of the trial
stream in schedule order.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import mle
from .clements import GRANULARITIES, NoiseSpec, circuit_noise_hook
from .dqc1 import estimate_full_table
from .fock import enumerate_basis
from .hw import hw_reduce
from .validation import is_prime

log = logging.getLogger(__name__)

MODES = ("fidelity_vs_shots", "noise_sweep", "single_state")
CSV_COLUMNS = (
    "M", "N", "N_shot", "delta_theta", "delta_phi",
    "mean_fidelity", "std_fidelity", "n_states", "seed",
)
WORKERS_ENV = "HWREC_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    M: int
    N: int
    mode: str = "fidelity_vs_shots"
    n_states: int = 100
    shot_schedule: list = field(default_factory=lambda: [2048])
    noise: list = field(default_factory=list)
    noise_granularity: str = "configuration"
    seed: int = 0
    output_path: str = "results"
    max_iter: int = 10_000
    tol: float = 1e-10
    restarts: int = 0
    assert_min_fidelity: Optional[float] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("M", "N", "n_states", "seed", "max_iter", "restarts"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be an integer")
        if not is_prime(self.M):
            raise ConfigError(f"M must be prime for the two-detector scheme, got {self.M}")
        if not 1 <= self.N < self.M:
            raise ConfigError(f"need 1 <= N < M, got N={self.N}, M={self.M}")
        if self.n_states < 1:
            raise ConfigError("n_states must be at least 1")
        if self.mode == "single_state" and self.n_states != 1:
            raise ConfigError("single_state mode runs exactly one state; set n_states: 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not isinstance(self.shot_schedule, list) or not self.shot_schedule:
            raise ConfigError("shot_schedule must be a non-empty list")
        for s in self.shot_schedule:
            if s != "exact" and (not isinstance(s, int) or isinstance(s, bool) or s < 1):
                raise ConfigError(f"shot values must be positive integers or 'exact', got {s!r}")
        if not isinstance(self.noise, list):
            raise ConfigError("noise must be a list of [delta_theta, delta_phi] pairs")
        for point in self.noise:
            if not (isinstance(point, (list, tuple)) and len(point) == 2):
                raise ConfigError(f"noise point {point!r} is not a [delta_theta, delta_phi] pair")
            try:
                NoiseSpec(float(point[0]), float(point[1]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad noise point {point!r}: {exc}") from None
        if self.mode == "noise_sweep" and not self.noise:
            raise ConfigError("noise_sweep mode needs a non-empty noise grid")
        if self.noise_granularity not in GRANULARITIES:
            raise ConfigError(f"noise_granularity must be one of {GRANULARITIES}")
        if self.assert_min_fidelity is not None and not 0 <= self.assert_min_fidelity <= 1:
            raise ConfigError("assert_min_fidelity must lie in [0, 1]")

    @property
    def noise_points(self) -> list[NoiseSpec]:
        if not self.noise:
            return [NoiseSpec()]
        return [NoiseSpec(float(a), float(b)) for a, b in self.noise]

    @property
    def shots(self) -> list[Optional[int]]:
        return [None if s == "exact" else s for s in self.shot_schedule]


def load_config(path) -> ExperimentConfig:
    """Read a flat YAML mapping; unknown keys are rejected."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a key-value mapping")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    missing = sorted({"M", "N"} - set(raw))
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    return ExperimentConfig(**raw)


def random_pure_state(M: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random amplitude vector over the ``N``-photon sector."""
    d = enumerate_basis(M, N).dim
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def state_rng(seed: int, state_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, state_id)))


def trial_rng(seed: int, state_id: int, shot_idx: int, noise_idx: int) -> np.random.Generator:
    key = (1, state_id, shot_idx, noise_idx)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass
class TrialRecord:
    state_id: int
    N_shot: Optional[int]
    delta_theta: float
    delta_phi: float
    fidelity: float
    wall_time: float
    seed_used: list
    rho_mle: np.ndarray = field(repr=False)
    rho_true: np.ndarray = field(repr=False)
    converged: bool = True


@dataclass
class Aggregate:
    N_shot: Optional[int]
    delta_theta: float
    delta_phi: float
    mean_fidelity: float
    std_fidelity: float
    n_states: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    aggregates: list[Aggregate]
    records: list[TrialRecord]


def run_trial(config: ExperimentConfig, state_id: int, shot_idx: int, noise_idx: int) -> TrialRecord:
    start = time.perf_counter()
    M, N = config.M, config.N
    psi = random_pure_state(M, N, state_rng(config.seed, state_id))
    n_shots = config.shots[shot_idx]
    noise = config.noise_points[noise_idx]
    hook = None if noise.is_zero else circuit_noise_hook(noise, config.noise_granularity)
    rng = trial_rng(config.seed, state_id, shot_idx, noise_idx)
    table = estimate_full_table(psi, M, n_shots, rng, hook)
    result = mle.fit(
        table, max_iter=config.max_iter, tol=config.tol,
        restarts=config.restarts, seed=config.seed,
    )
    truth = hw_reduce(psi, M, N)
    fid = mle.fidelity(truth, result.rho)
    return TrialRecord(
        state_id=state_id,
        N_shot=n_shots,
        delta_theta=noise.delta_theta,
        delta_phi=noise.delta_phi,
        fidelity=fid,
        wall_time=time.perf_counter() - start,
        seed_used=[config.seed, 1, state_id, shot_idx, noise_idx],
        rho_mle=result.rho,
        rho_true=truth,
        converged=result.converged,
    )


def _run_item(args):
    return run_trial(*args)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> list[Aggregate]:
    out = []
    n_noise = len(config.noise_points)
    per_point = config.n_states
    for shot_idx, n_shots in enumerate(config.shots):
        for noise_idx, noise in enumerate(config.noise_points):
            start = (shot_idx * n_noise + noise_idx) * per_point
            fids = np.array([r.fidelity for r in records[start:start + per_point]])
            std = float(fids.std(ddof=1)) if len(fids) > 1 else 0.0
            out.append(Aggregate(
                n_shots, noise.delta_theta, noise.delta_phi,
                float(fids.mean()), std, len(fids),
            ))
    return out


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Run every (shot value, noise point, state) trial of ``config``.

    Records come back ordered by shot value, then noise point, then state,
    whatever the worker count.
    """
    workers = default_workers() if workers is None else workers
    items = [
        (config, state_id, shot_idx, noise_idx)
        for shot_idx in range(len(config.shots))
        for noise_idx in range(len(config.noise_points))
        for state_id in range(config.n_states)
    ]
    log.info("running %d trials on %d worker(s)", len(items), workers)
    if workers <= 1:
        records = [_run_item(item) for item in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * workers))))
    return ExperimentResult(config, _aggregate(config, records), records)


def run_fidelity_vs_shots(config: ExperimentConfig, workers: Optional[int] = None):
    """``[(N_shot, mean, std, records), ...]`` in shot-schedule order."""
    if config.mode != "fidelity_vs_shots":
        raise ConfigError(f"expected mode fidelity_vs_shots, got {config.mode}")
    result = run_experiment(config, workers)
    n = config.n_states * len(config.noise_points)
    return [
        (agg.N_shot, agg.mean_fidelity, agg.std_fidelity, result.records[i * n:(i + 1) * n])
        for i, agg in enumerate(result.aggregates)
    ]


def run_noise_sweep(config: ExperimentConfig, workers: Optional[int] = None):
    """``[(delta_theta, delta_phi, mean, std), ...]`` for the first shot value
    and every noise point."""
    if config.mode != "noise_sweep":
        raise ConfigError(f"expected mode noise_sweep, got {config.mode}")
    result = run_experiment(config, workers)
    return [
        (a.delta_theta, a.delta_phi, a.mean_fidelity, a.std_fidelity)
        for a in result.aggregates
    ]


def encode_matrix(A) -> list:
    """Row-major nested list of ``[re, im]`` pairs."""
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def emit_report(result: ExperimentResult, path) -> tuple[Path, Path]:
    """Write ``summary.csv`` and ``report.json`` into directory ``path``."""
    if not result.aggregates:
        raise ValueError("nothing to report")
    out = Path(path)
    cfg = result.config
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "summary.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for a in result.aggregates:
                writer.writerow([
                    cfg.M, cfg.N, "exact" if a.N_shot is None else a.N_shot,
                    repr(a.delta_theta), repr(a.delta_phi),
                    repr(a.mean_fidelity), repr(a.std_fidelity), a.n_states, cfg.seed,
                ])
        json_path = out / "report.json"
        doc = {
            "config": asdict(cfg),
            "aggregates": [asdict(a) for a in result.aggregates],
            "trials": [
                {
                    "state_id": r.state_id,
                    "N_shot": r.N_shot,
                    "delta_theta": r.delta_theta,
                    "delta_phi": r.delta_phi,
                    "fidelity": r.fidelity,
                    "converged": r.converged,
                    "wall_time": r.wall_time,
                    "seed_used": r.seed_used,
                    "rho_mle": encode_matrix(r.rho_mle),
                    "rho_true": encode_matrix(r.rho_true),
                }
                for r in result.records
            ],
        }
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=1)
    except OSError as exc:
        raise OSError(f"failed to write report to {out}: {exc}") from exc
    return csv_path, json_path


def load_report(path) -> dict:
    """Read ``report.json`` back, decoding matrices to complex arrays."""
    with open(Path(path) / "report.json") as fh:
        doc = json.load(fh)
    for trial in doc["trials"]:
        trial["rho_mle"] = decode_matrix(trial["rho_mle"])
        trial["rho_true"] = decode_matrix(trial["rho_true"])
    return doc
