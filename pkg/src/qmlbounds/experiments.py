"""Experiment sweeps: configuration grids, orchestration, aggregation, CSV
and manifest persistence.

Each experiment is a grid of config points x seed indices.  Generator streams
derive from (base seed, grid index, seed index) through ``SeedSequence``, so
adding grid points or seeds never perturbs existing runs, and identical
manifests reproduce identical record tables (wall-clock column aside).

Randomness conventions follow the figure protocols: sample-size style sweeps
redraw the training set per seed while keeping one shared parameter init;
hyperparameter style sweeps fix the dataset and redraw the init per seed.
The held-out test set is shared across every run of an experiment (per data
shape, for sweeps that change the qubit count).
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .backend import backend_name
from .bounds import bound_caro, bound_encoding, bound_general, bound_stability
from .circuits import layered_circuit
from .datasets import (LabeledDataset, randomize_labels, sample_annni_dataset,
                       sample_regression_dataset)
from .errors import InvalidInputError
from .pauli import observable_z1, observable_z_all
from .training import (OptimizerSpec, RiskKind, TrainConfig, evaluate,
                       generalization_gap, train)

THREADS_ENV = "QMLBOUNDS_THREADS"

CSV_COLUMNS = (
    "experiment", "grid_param_name", "grid_param_value", "seed", "M",
    "train_error", "test_error", "gen_gap", "bound_ours", "bound_caro",
    "bound_encoding_log10", "bound_stability_log10", "wall_time_s",
)

# stream tags for seed derivation
_STREAM_DATA = 1
_STREAM_LABELS = 2
_STREAM_TRAIN = 3
_STREAM_TEST = 4

EXPERIMENT_NAMES = (
    "sample_size_sweep", "layer_sweep", "bound_comparison", "random_label",
    "regression_suite", "qubit_sweep", "special_encoding_sweep",
    "batch_sweep", "epoch_curve", "lr_sweep", "optimizer_sweep",
)


def derive_seed(*parts: int) -> int:
    """Stable integer seed from a tuple of small integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    scale: str  # "desk" | "full"
    grid_name: str
    grid: tuple
    n_seeds: int
    n_qubits: int
    layers: int
    m: int
    test_size: int
    loss: str
    risk_tag: str
    optimizer_kind: str
    learning_rate: float
    batch_size: int
    epochs: int
    encoding: str = "none"
    dataset_mode: str = "resample"  # "resample" | "fixed"
    randomize: bool = False
    delta: float = 0.1
    base_seed: int = 0
    positive_class_state: str = "zero"

    def __post_init__(self):
        if not self.grid:
            raise InvalidInputError("experiment grid must be nonempty")
        if self.n_seeds < 1:
            raise InvalidInputError("need at least one seed")
        if self.dataset_mode not in ("resample", "fixed"):
            raise InvalidInputError(f"unknown dataset mode {self.dataset_mode!r}")


def build_config(name: str, scale: str = "desk", base_seed: int = 0) -> ExperimentConfig:
    """Grid definitions per experiment; ``full`` restores the large grids."""
    if scale not in ("desk", "full"):
        raise InvalidInputError("scale must be 'desk' or 'full'")
    full = scale == "full"
    test_size = 10_000 if full else 2_000
    m_grid = (10, 500, 1000, 1500, 2000) if full else (10, 200, 1000)
    m_fixed = 2000 if full else 1000
    seeds_main = 10 if full else 5
    seeds_hyper = 10 if full else 3
    base = dict(
        name=name, scale=scale, grid_name="M", grid=m_grid, n_seeds=seeds_main,
        n_qubits=6, layers=20, m=m_fixed, test_size=test_size,
        loss="hinge", risk_tag="zero_one", optimizer_kind="adam",
        learning_rate=0.005, batch_size=200, epochs=100,
        dataset_mode="resample", base_seed=base_seed,
    )
    if name == "sample_size_sweep":
        cfg = base
    elif name == "bound_comparison":
        cfg = {**base, "risk_tag": "caro_trace"}
    elif name == "random_label":
        cfg = {**base, "grid": m_grid if full else (50, 500),
               "n_seeds": 10, "randomize": True}
    elif name == "layer_sweep":
        cfg = {**base, "grid_name": "L",
               "grid": (20, 50, 100, 200, 500) if full else (20, 50, 100),
               "n_seeds": 10 if full else 3, "m": 2000 if full else 500,
               "loss": "caro", "risk_tag": "caro_trace", "dataset_mode": "fixed"}
    elif name == "regression_suite":
        cfg = {**base, "loss": "mse", "risk_tag": "absolute",
               "encoding": "angle_ry"}
    elif name == "qubit_sweep":
        cfg = {**base, "grid_name": "N", "grid": (2, 4, 6, 8, 10) if full else (2, 4, 6),
               "n_seeds": seeds_hyper, "loss": "mse", "risk_tag": "absolute",
               "encoding": "angle_ry", "dataset_mode": "fixed",
               "m": 2000 if full else 500}
    elif name == "special_encoding_sweep":
        cfg = {**base, "grid_name": "d", "grid": (1, 4, 7, 10) if full else (1, 4),
               "n_seeds": seeds_hyper, "loss": "mse", "risk_tag": "absolute",
               "encoding": "special_diag", "dataset_mode": "fixed",
               "m": 2000 if full else 500}
    elif name == "batch_sweep":
        cfg = {**base, "grid_name": "batch_size",
               "grid": (1, 200, 500, 1000, 2000) if full else (1, 200, 1000),
               "n_seeds": seeds_hyper, "dataset_mode": "fixed"}
    elif name == "epoch_curve":
        cfg = {**base, "grid_name": "epoch", "grid": tuple(range(1, 101)),
               "n_seeds": seeds_hyper, "optimizer_kind": "sgd",
               "dataset_mode": "fixed"}
    elif name == "lr_sweep":
        cfg = {**base, "grid_name": "learning_rate",
               "grid": (0.0005, 0.005, 0.05, 0.5, 5.0),
               "n_seeds": seeds_hyper, "dataset_mode": "fixed"}
    elif name == "optimizer_sweep":
        cfg = {**base, "grid_name": "optimizer",
               "grid": ("sgd", "adam", "rmsprop", "adagrad", "lion"),
               "n_seeds": seeds_hyper, "dataset_mode": "fixed"}
    else:
        raise InvalidInputError(f"unknown experiment {name!r}")
    return ExperimentConfig(**cfg)


@dataclass(frozen=True)
class RunRecord:
    experiment: str
    grid_param_name: str
    grid_param_value: object
    seed: int
    m: int
    train_error: float
    test_error: float
    gen_gap: float
    bound_ours: float
    bound_caro: float
    bound_encoding_log10: float
    bound_stability_log10: float
    wall_time_s: float

    def to_row(self) -> list:
        return [self.experiment, self.grid_param_name, self.grid_param_value,
                self.seed, self.m, _fmt(self.train_error), _fmt(self.test_error),
                _fmt(self.gen_gap), _fmt(self.bound_ours), _fmt(self.bound_caro),
                _fmt(self.bound_encoding_log10), _fmt(self.bound_stability_log10),
                _fmt(self.wall_time_s)]


def _fmt(x: float) -> str:
    return repr(float(x))


def _point_params(config: ExperimentConfig, value) -> dict:
    """Resolve one grid value into the concrete run parameters."""
    p = dict(m=config.m, n_qubits=config.n_qubits, layers=config.layers,
             batch_size=config.batch_size, learning_rate=config.learning_rate,
             optimizer_kind=config.optimizer_kind, epochs=config.epochs,
             encoding=config.encoding)
    g = config.grid_name
    if g == "M":
        p["m"] = int(value)
    elif g == "L":
        p["layers"] = int(value)
    elif g == "N":
        p["n_qubits"] = int(value)
    elif g == "d":
        p["n_qubits"] = int(value) + 2
    elif g == "batch_size":
        p["batch_size"] = int(value)
    elif g == "learning_rate":
        p["learning_rate"] = float(value)
    elif g == "optimizer":
        p["optimizer_kind"] = str(value)
    elif g == "epoch":
        pass  # epoch curves come from one run per seed
    else:
        raise InvalidInputError(f"unknown grid parameter {g!r}")
    return p


def _dataset_grid_key(config: ExperimentConfig, gi: int) -> int:
    """Grid index enters the dataset seed only when it changes the data."""
    return gi if config.grid_name in ("M", "N", "d") else 0


def _make_train_dataset(config: ExperimentConfig, params: dict, gi: int, si: int) -> LabeledDataset:
    if config.dataset_mode == "resample":
        seed = derive_seed(config.base_seed, _STREAM_DATA, _dataset_grid_key(config, gi), si)
    else:
        seed = derive_seed(config.base_seed, _STREAM_DATA, _dataset_grid_key(config, gi))
    if config.encoding == "none":
        ds = sample_annni_dataset(params["m"], params["n_qubits"], seed=seed)
    else:
        d = params["n_qubits"] if config.encoding == "angle_ry" else params["n_qubits"] - 2
        ds = sample_regression_dataset(params["m"], d, seed=seed, encoding=config.encoding)
    if config.randomize:
        ds = randomize_labels(ds, derive_seed(config.base_seed, _STREAM_LABELS,
                                              _dataset_grid_key(config, gi), si))
    return ds


def _make_test_dataset(config: ExperimentConfig, params: dict, gi: int) -> LabeledDataset:
    key = gi if config.grid_name in ("N", "d") else 0
    seed = derive_seed(config.base_seed, _STREAM_TEST, key)
    if config.encoding == "none":
        return sample_annni_dataset(config.test_size, params["n_qubits"], seed=seed)
    d = params["n_qubits"] if config.encoding == "angle_ry" else params["n_qubits"] - 2
    return sample_regression_dataset(config.test_size, d, seed=seed, encoding=config.encoding)


def _train_seed(config: ExperimentConfig, si: int) -> int:
    if config.dataset_mode == "resample":
        return derive_seed(config.base_seed, _STREAM_TRAIN)  # shared init
    return derive_seed(config.base_seed, _STREAM_TRAIN, si)  # init varies per seed


def _bounds_for(config: ExperimentConfig, params: dict, epochs: int) -> tuple:
    risk = RiskKind.from_tag(config.risk_tag)
    m = params["m"]
    ours = bound_general(risk.lipschitz, 1.0, risk.bound_c, m, config.delta)
    t_gates = 3 * params["n_qubits"] * params["layers"]
    caro = bound_caro(t_gates, 1.0, m, config.delta)
    if config.encoding == "angle_ry":
        d = params["n_qubits"]
        enc = math.log10(bound_encoding(risk.lipschitz, 1.0, risk.bound_c,
                                        d, 1, m, config.delta))
    elif config.encoding == "special_diag":
        d = params["n_qubits"] - 2
        enc = math.log10(bound_encoding(risk.lipschitz, 1.0, risk.bound_c,
                                        d, 3, m, config.delta))
    else:
        enc = float("nan")
    stab = bound_stability(1.0, 1.0, t_gates, 1.0, m,
                           params["learning_rate"], epochs).log10
    return ours, caro, enc, stab


def _run_point(config: ExperimentConfig, gi: int, si: int,
               test_dataset: LabeledDataset) -> list[RunRecord]:
    value = config.grid[gi]
    params = _point_params(config, value)
    risk = RiskKind.from_tag(config.risk_tag)
    start = time.perf_counter()
    try:
        dataset = _make_train_dataset(config, params, gi, si)
        circuit = layered_circuit(params["n_qubits"], params["layers"])
        obs = observable_z_all(params["n_qubits"]) if config.loss == "mse" \
            else observable_z1(params["n_qubits"])
        tc = TrainConfig(
            loss=config.loss,
            optimizer=OptimizerSpec(params["optimizer_kind"], params["learning_rate"]),
            batch_size=min(params["batch_size"], params["m"]),
            epochs=params["epochs"],
            seed=_train_seed(config, si),
            positive_class_state=config.positive_class_state,
            risk=risk,
            eval_test_every=1 if config.grid_name == "epoch" else 0,
        )
        history = train(tc, dataset, circuit, obs, test_dataset=test_dataset)
        elapsed = time.perf_counter() - start
        if config.grid_name == "epoch":
            records = []
            for rec in history.records:
                ours, caro, enc, _ = _bounds_for(config, params, rec.epoch)
                stab = bound_stability(1.0, 1.0, 3 * params["n_qubits"] * params["layers"],
                                       1.0, params["m"], params["learning_rate"],
                                       rec.epoch).log10
                records.append(RunRecord(
                    config.name, "epoch", rec.epoch, si, params["m"],
                    rec.train_error, rec.test_error,
                    generalization_gap(rec.train_error, rec.test_error),
                    ours, caro, enc, stab, elapsed))
            return records
        final = history.records[-1]
        ours, caro, enc, stab = _bounds_for(config, params, params["epochs"])
        return [RunRecord(
            config.name, config.grid_name, value, si, params["m"],
            final.train_error, final.test_error,
            generalization_gap(final.train_error, final.test_error),
            ours, caro, enc, stab, elapsed)]
    except Exception as exc:  # record the failure, keep the sweep alive
        elapsed = time.perf_counter() - start
        nan = float("nan")
        import warnings
        warnings.warn(f"run ({config.name}, grid={value}, seed={si}) failed: {exc}")
        return [RunRecord(config.name, config.grid_name, value, si, params["m"],
                          nan, nan, nan, nan, nan, nan, nan, elapsed)]


def _resolve_threads(threads: int | None, n_tasks: int) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(threads, n_tasks))


def _pool_task(args):
    return _run_point(*args)


def run_experiment(config: ExperimentConfig, threads: int | None = None,
                   out_dir: str | None = None) -> list[RunRecord]:
    """Run every grid point x seed; records come back in task order.

    With ``out_dir`` set, completed records stream into
    ``records_partial.csv`` as they finish (crash insurance); the final
    ordered tables come from :func:`emit_results`.
    """
    if config.grid_name == "epoch":
        tasks = [(0, si) for si in range(config.n_seeds)]
    else:
        tasks = [(gi, si) for gi in range(len(config.grid))
                 for si in range(config.n_seeds)]
    # one shared test set per data shape
    test_sets = {}
    for gi, _ in tasks:
        key = gi if config.grid_name in ("N", "d") else 0
        if key not in test_sets:
            params = _point_params(config, config.grid[gi])
            test_sets[key] = _make_test_dataset(config, params, gi)

    n_threads = _resolve_threads(threads, len(tasks))
    partial_path = os.path.join(out_dir, "records_partial.csv") if out_dir else None
    if partial_path:
        os.makedirs(out_dir, exist_ok=True)
        with open(partial_path, "w", newline="") as fh:
            csv.writer(fh).writerow(CSV_COLUMNS)

    def note(recs):
        if partial_path:
            with open(partial_path, "a", newline="") as fh:
                w = csv.writer(fh)
                for r in recs:
                    w.writerow(r.to_row())

    results: dict[tuple, list[RunRecord]] = {}
    if n_threads == 1:
        for gi, si in tasks:
            key = gi if config.grid_name in ("N", "d") else 0
            recs = _run_point(config, gi, si, test_sets[key])
            results[(gi, si)] = recs
            note(recs)
    else:
        arglist = [(config, gi, si, test_sets[gi if config.grid_name in ("N", "d") else 0])
                   for gi, si in tasks]
        with ProcessPoolExecutor(max_workers=n_threads) as pool:
            for (gi, si), recs in zip(tasks, pool.map(_pool_task, arglist)):
                results[(gi, si)] = recs
                note(recs)
    ordered = []
    for gi, si in tasks:
        ordered.extend(results[(gi, si)])
    return ordered


@dataclass(frozen=True)
class AggregateRow:
    experiment: str
    grid_param_name: str
    grid_param_value: object
    n_runs: int
    stats: dict  # metric -> (mean, min, max)


_AGG_METRICS = ("train_error", "test_error", "gen_gap", "bound_ours")


def aggregate(records: list[RunRecord]) -> list[AggregateRow]:
    """Mean/min/max of each metric per grid point, in first-seen point order."""
    if not records:
        raise InvalidInputError("cannot aggregate an empty record list")
    groups: dict[tuple, list[RunRecord]] = {}
    order = []
    for r in records:
        key = (r.experiment, r.grid_param_name, r.grid_param_value)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    rows = []
    for key in order:
        recs = groups[key]
        stats = {}
        for metric in _AGG_METRICS:
            vals = np.array([getattr(r, metric) for r in recs])
            stats[metric] = (float(np.mean(vals)), float(np.min(vals)), float(np.max(vals)))
        rows.append(AggregateRow(key[0], key[1], key[2], len(recs), stats))
    return rows


def emit_results(records: list[RunRecord], aggregates: list[AggregateRow],
                 out_dir: str, manifest: dict) -> dict[str, str]:
    """Write records.csv, aggregate.csv, and manifest.json; returns the paths."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "records": os.path.join(out_dir, "records.csv"),
            "aggregate": os.path.join(out_dir, "aggregate.csv"),
            "manifest": os.path.join(out_dir, "manifest.json"),
        }
        with open(paths["records"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in records:
                w.writerow(r.to_row())
        agg_cols = ["experiment", "grid_param_name", "grid_param_value", "n_runs"]
        for metric in _AGG_METRICS:
            agg_cols += [f"{metric}_mean", f"{metric}_min", f"{metric}_max"]
        with open(paths["aggregate"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(agg_cols)
            for row in aggregates:
                out = [row.experiment, row.grid_param_name, row.grid_param_value, row.n_runs]
                for metric in _AGG_METRICS:
                    out += [_fmt(v) for v in row.stats[metric]]
                w.writerow(out)
        with open(paths["manifest"], "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        partial = os.path.join(out_dir, "records_partial.csv")
        if os.path.exists(partial):
            os.remove(partial)
        return paths
    except OSError as exc:
        raise OSError(f"failed writing results under {out_dir!r}: {exc}") from exc


def build_manifest(config: ExperimentConfig, threads: int) -> dict:
    return {
        "config": asdict(config),
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "threads": threads,
        "csv_columns": list(CSV_COLUMNS),
    }


def config_from_manifest(manifest: dict) -> ExperimentConfig:
    raw = dict(manifest["config"])
    raw["grid"] = tuple(raw["grid"])
    return ExperimentConfig(**raw)


def run_and_emit(config: ExperimentConfig, out_dir: str,
                 threads: int | None = None) -> dict[str, str]:
    """End-to-end: run the sweep, aggregate, and persist everything."""
    n_threads = _resolve_threads(threads, max(1, len(config.grid) * config.n_seeds))
    records = run_experiment(config, threads=n_threads, out_dir=out_dir)
    aggs = aggregate(records)
    return emit_results(records, aggs, out_dir, build_manifest(config, n_threads))
