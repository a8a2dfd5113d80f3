"""Command-line interface.

Subcommands: ``dataset`` (generate and export), ``train`` (single run from a
JSON config), ``bounds eval`` (closed-form bound values), ``rademacher``
(complexity estimate), ``experiment run`` (sweeps), and ``check`` (property
suites).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .backend import backend_name
from .bounds import evaluate_bound, rademacher_estimate
from .circuits import layered_circuit
from .datasets import GeneratorSpec, LabeledDataset, regenerate
from .experiments import (EXPERIMENT_NAMES, build_config, config_from_manifest,
                          run_and_emit)
from .pauli import observable_z1, observable_z_all
from .training import OptimizerSpec, TrainConfig, train


def _write_states_csv(dataset: LabeledDataset, path: str) -> None:
    dim = dataset.samples[0].state.shape[0]
    header = ["sample", "label"]
    for k in range(dim):
        header += [f"amp{k}_re", f"amp{k}_im"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, s in enumerate(dataset.samples):
            row = [i, repr(float(s.label))]
            for a in s.state:
                row += [repr(float(a.real)), repr(float(a.imag))]
            w.writerow(row)


def _cmd_dataset(args) -> int:
    if args.dataset_kind == "annni":
        spec = GeneratorSpec(
            kind="annni", n_qubits=args.n_qubits, m=args.m, seed=args.seed,
            kappa_range=(args.kappa_min, args.kappa_max),
            h_range=(args.h_min, args.h_max),
        )
    else:
        n = args.d if args.encoding == "angle_ry" else args.d + 2
        spec = GeneratorSpec(kind="regression", n_qubits=n, m=args.m,
                             seed=args.seed, d=args.d, encoding=args.encoding)
    dataset = regenerate(spec)
    with open(args.out, "w") as fh:
        fh.write(dataset.generator.to_json())
        fh.write("\n")
    print(f"wrote descriptor to {args.out} ({dataset.m} samples)")
    if args.states_csv:
        _write_states_csv(dataset, args.states_csv)
        print(f"wrote state table to {args.states_csv}")
    return 0


def _cmd_train(args) -> int:
    with open(args.config) as fh:
        cfg = json.load(fh)
    dataset = regenerate(GeneratorSpec.from_json(json.dumps(cfg["dataset"])))
    test_dataset = None
    if cfg.get("test_dataset"):
        test_dataset = regenerate(GeneratorSpec.from_json(json.dumps(cfg["test_dataset"])))
    circuit = layered_circuit(cfg["circuit"]["n_qubits"], cfg["circuit"]["layers"])
    obs_name = cfg.get("observable", "z1")
    obs = observable_z_all(circuit.n_qubits) if obs_name == "z_all" \
        else observable_z1(circuit.n_qubits)
    opt = OptimizerSpec(**cfg.get("optimizer", {}))
    tc = TrainConfig(
        loss=cfg.get("loss", "hinge"), optimizer=opt,
        batch_size=cfg.get("batch_size", 200), epochs=cfg.get("epochs", 100),
        seed=cfg.get("seed", 0),
        positive_class_state=cfg.get("positive_class_state", "zero"),
        eval_test_every=cfg.get("eval_test_every", 0),
    )
    history = train(tc, dataset, circuit, obs, test_dataset=test_dataset)

    os.makedirs(args.out, exist_ok=True)
    hist_path = os.path.join(args.out, "history.csv")
    with open(hist_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "loss", "train_error", "test_error"])
        for r in history.records:
            w.writerow([r.epoch, repr(r.loss), repr(r.train_error), repr(r.test_error)])
    theta_path = os.path.join(args.out, "theta.csv")
    with open(theta_path, "w") as fh:
        fh.writelines(repr(float(v)) + "\n" for v in history.final_theta)
    manifest = {
        "train_config": {**asdict(tc), "optimizer": asdict(opt),
                         "risk": tc.risk_kind().tag},
        "dataset": asdict(dataset.generator),
        "test_dataset": asdict(test_dataset.generator) if test_dataset else None,
        "circuit": {"n_qubits": circuit.n_qubits, "layers": circuit.layers,
                    "n_params": circuit.n_params},
        "observable": obs_name,
        "package_version": __version__,
        "kernel_backend": backend_name(),
    }
    with open(os.path.join(args.out, "train_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    final = history.records[-1]
    print(f"final loss {final.loss:.6f}  train_error {final.train_error:.6f}  "
          f"test_error {final.test_error:.6f}")
    print(f"wrote {hist_path}, {theta_path}")
    return 0


_BOUND_ARGS = {
    "general": ("lipschitz", "spectral_norm", "risk_bound", "m", "delta"),
    "regression": ("m", "delta"),
    "classification": ("m", "delta"),
    "kclass": ("k_classes", "m", "delta"),
    "caro": ("t_gates", "spectral_norm", "m", "delta"),
    "encoding": ("lipschitz", "spectral_norm", "risk_bound", "d", "k", "m", "delta"),
    "stability": ("lipschitz", "grad_lipschitz", "k_gates", "spectral_norm",
                  "m", "eta", "t_epochs"),
}


def _cmd_bounds(args) -> int:
    wanted = _BOUND_ARGS[args.family]
    inputs = {}
    for name in wanted:
        value = getattr(args, name)
        if value is None:
            print(f"error: --{name.replace('_', '-')} is required for family "
                  f"{args.family!r}", file=sys.stderr)
            return 2
        inputs[name] = value
    record = evaluate_bound(args.family, **inputs)
    print(json.dumps(record.to_dict(), sort_keys=True))
    return 0


def _cmd_rademacher(args) -> int:
    from .datasets import sample_annni_dataset

    dataset = sample_annni_dataset(args.m, args.n_qubits, seed=args.seed)
    circuit = layered_circuit(args.n_qubits, args.layers)
    obs = observable_z1(args.n_qubits)
    est = rademacher_estimate(
        [s.state for s in dataset.samples], circuit, obs,
        n_sigma=args.n_sigma, ascent_steps=args.ascent_steps,
        restarts=args.restarts, seed=args.seed,
    )
    envelope = (1.0 / args.m) ** 0.5
    print(json.dumps({
        "estimate": est.value, "stderr": est.stderr, "n_sigma": est.n_sigma,
        "m": args.m, "sqrt_1_over_m": envelope,
    }, sort_keys=True))
    return 0


def _cmd_experiment(args) -> int:
    if args.manifest:
        with open(args.manifest) as fh:
            config = config_from_manifest(json.load(fh))
    else:
        if not args.name:
            print("error: provide --name or --manifest", file=sys.stderr)
            return 2
        config = build_config(args.name, scale="full" if args.full else "desk",
                              base_seed=args.base_seed)
    paths = run_and_emit(config, args.out, threads=args.threads)
    for label, path in paths.items():
        print(f"{label}: {path}")
    return 0


def _cmd_check(args) -> int:
    from . import checks

    runner = {"ptm": checks.check_ptm, "gradients": checks.check_gradients,
              "backends": checks.check_backends}[args.suite]
    ok = runner(verbose=True)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmlbounds",
                                description="quantum model training and generalization bounds")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ds = sub.add_parser("dataset", help="generate a dataset and write its descriptor")
    ds_sub = ds.add_subparsers(dest="dataset_kind", required=True)
    annni = ds_sub.add_parser("annni", help="phase-labeled spin-chain ground states")
    annni.add_argument("--m", type=int, required=True)
    annni.add_argument("--n-qubits", type=int, default=6)
    annni.add_argument("--seed", type=int, default=0)
    annni.add_argument("--kappa-min", type=float, default=0.0)
    annni.add_argument("--kappa-max", type=float, default=1.0)
    annni.add_argument("--h-min", type=float, default=0.0)
    annni.add_argument("--h-max", type=float, default=2.0)
    reg = ds_sub.add_parser("regression", help="synthetic regression data")
    reg.add_argument("--m", type=int, required=True)
    reg.add_argument("--d", type=int, required=True)
    reg.add_argument("--encoding", choices=("angle_ry", "special_diag"),
                     default="angle_ry")
    reg.add_argument("--seed", type=int, default=0)
    for sp in (annni, reg):
        sp.add_argument("--out", required=True, help="descriptor JSON path")
        sp.add_argument("--states-csv", help="optional amplitude table path")
        sp.set_defaults(func=_cmd_dataset)

    tr = sub.add_parser("train", help="train once from a JSON config")
    tr.add_argument("--config", required=True)
    tr.add_argument("--out", required=True)
    tr.set_defaults(func=_cmd_train)

    bd = sub.add_parser("bounds", help="bound evaluation")
    bd_sub = bd.add_subparsers(dest="bounds_cmd", required=True)
    be = bd_sub.add_parser("eval", help="evaluate one bound family")
    be.add_argument("--family", choices=sorted(_BOUND_ARGS), required=True)
    be.add_argument("--m", type=int)
    be.add_argument("--delta", type=float, default=0.1)
    be.add_argument("--lipschitz", type=float)
    be.add_argument("--spectral-norm", dest="spectral_norm", type=float)
    be.add_argument("--risk-bound", dest="risk_bound", type=float)
    be.add_argument("--k-classes", dest="k_classes", type=int)
    be.add_argument("--t-gates", dest="t_gates", type=int)
    be.add_argument("--d", type=int)
    be.add_argument("--k", type=int)
    be.add_argument("--grad-lipschitz", dest="grad_lipschitz", type=float)
    be.add_argument("--k-gates", dest="k_gates", type=int)
    be.add_argument("--eta", type=float)
    be.add_argument("--t-epochs", dest="t_epochs", type=int)
    be.set_defaults(func=_cmd_bounds)

    rd = sub.add_parser("rademacher", help="empirical complexity estimate")
    rd.add_argument("--m", type=int, required=True)
    rd.add_argument("--n-qubits", type=int, default=3)
    rd.add_argument("--layers", type=int, default=3)
    rd.add_argument("--n-sigma", type=int, default=200)
    rd.add_argument("--ascent-steps", type=int, default=200)
    rd.add_argument("--restarts", type=int, default=5)
    rd.add_argument("--seed", type=int, default=0)
    rd.set_defaults(func=_cmd_rademacher)

    ex = sub.add_parser("experiment", help="run a sweep")
    ex_sub = ex.add_subparsers(dest="experiment_cmd", required=True)
    er = ex_sub.add_parser("run")
    er.add_argument("--name", choices=EXPERIMENT_NAMES)
    er.add_argument("--manifest", help="re-run from a saved manifest")
    er.add_argument("--full", action="store_true", help="paper-scale grids")
    er.add_argument("--out", required=True)
    er.add_argument("--threads", type=int)
    er.add_argument("--base-seed", type=int, default=0)
    er.set_defaults(func=_cmd_experiment)

    ck = sub.add_parser("check", help="run a property suite")
    ck.add_argument("suite", choices=("ptm", "gradients", "backends"))
    ck.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
