"""``qdisc`` command line: train, predict, synth, verify, bench, enumerate-bas.

Exit codes: 0 success, 1 domain error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, datasets, qcore, synth
from .discriminator import DiscriminatorModel, l1_error, predict, predict_many, train


class DomainError(Exception):
    """Reported on stderr with exit code 1."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DomainError(f"cannot write {path}: {exc.strerror}") from None


def _load_model(path: str) -> DiscriminatorModel:
    try:
        return DiscriminatorModel.from_json(_read(path))
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None


def _regime(text: str | None) -> datasets.ThresholdRegime:
    if text is None:
        return datasets.ThresholdRegime()
    try:
        return datasets.ThresholdRegime.parse(text)
    except ValueError as exc:
        raise bench.ConfigError(f"--regime: {exc}") from None


def cmd_train(args) -> int:
    regime = _regime(args.regime)
    try:
        if args.data:
            fs = datasets.load_labeled_features(_read(args.data))
        else:
            fs = datasets.iris_feature_set(datasets.load_iris(_read(args.iris)), regime)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if len(fs) == 0:
        raise DomainError("no training records")
    model = train(fs.features, fs.labels)
    _write(args.out, model.to_json())
    accuracy = 1.0 - l1_error(predict_many(model, fs.features), fs.labels)
    print(f"N={len(fs)} b={model.b} |theta|={len(model.theta)} training_accuracy={accuracy:.4f}")
    report = datasets.separability_check(fs.features, fs.labels)
    if not report.separable:
        shown = ", ".join("".join(map(str, p)) for p in report.conflicts[:10])
        print(f"warning: {len(report.conflicts)} pattern(s) carry both labels: {shown}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    bits = args.input.strip()
    if not bits or set(bits) - {"0", "1"}:
        raise DomainError(f"input must be a 0/1 string, got {args.input!r}")
    if len(bits) != model.b:
        raise DomainError(f"model expects {model.b} bit(s), got {len(bits)}")
    print(predict(model, [int(c) for c in bits]))
    return 0


def cmd_synth(args) -> int:
    model = _load_model(args.model)
    _write(args.out, qcore.format_circuit(synth.synthesize(model)))
    return 0


def cmd_verify(args) -> int:
    if args.all_16:
        failed = []
        for fixture in synth.appendix_fixtures():
            check = synth.check_fixture(fixture)
            print(f"case {fixture.case_id:2d}: {'PASS' if check.passed else 'FAIL'}")
            if not check.passed:
                failed.append(fixture.case_id)
        passed = 16 - len(failed)
        if failed:
            print(f"{passed}/16 FAIL (cases {', '.join(map(str, failed))})")
            return 1
        print("16/16 PASS")
        return 0
    if not (args.model and args.circuit):
        raise argparse.ArgumentTypeError("verify needs --all-16 or both --model and --circuit")
    model = _load_model(args.model)
    try:
        circuit = qcore.parse_circuit(_read(args.circuit), num_features=model.b)
        ok = synth.verify_model_circuit(model, circuit)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    noise = bench.NoiseConfig.parse(args.noise) if args.noise else None
    regime = _regime(args.regime)
    config = bench.ExperimentConfig(
        dataset=args.dataset,
        train_size=args.train_size,
        trials=args.trials,
        master_seed=args.seed,
        noise=noise,
        regime=regime,
        iris_csv=args.iris_csv,
    )
    try:
        size = len(bench.load_feature_set(config))
    except (OSError, ValueError) as exc:
        raise DomainError(str(exc)) from None
    if config.train_size >= size:
        raise bench.ConfigError(
            f"--train-size {config.train_size} leaves no validation data (dataset size {size})"
        )
    stats, results = bench.run_experiment(config)
    bench.emit_results(config, stats, results, args.out)
    acc = stats.accuracy
    print(
        f"{config.dataset} N={config.train_size} trials={config.trials}: "
        f"accuracy {100 * acc.mean:.2f}% +/- {100 * acc.std:.2f}%"
    )
    return 0


def cmd_enumerate_bas(args) -> int:
    text = json.dumps([g.to_dict() for g in datasets.bas_enumerate()], indent=2) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdisc", description="Quantum discriminator for binary classification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from labeled binary features or Iris")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="file of '<bitstring> <label>' records")
    src.add_argument("--iris", help="Iris CSV file")
    p.add_argument("--regime", help="Iris thresholds 'sepal_length,sepal_width,petal_length'")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict the label of one bit-string")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="compile a model to a circuit file")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="check circuits against model unitaries")
    p.add_argument("--all-16", action="store_true", help="check the 16 two-bit reference cases")
    p.add_argument("--model")
    p.add_argument("--circuit")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a Monte-Carlo train/validate experiment")
    p.add_argument("--dataset", required=True, choices=bench.DATASETS)
    p.add_argument("--train-size", required=True, type=int)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iris-csv", help="Iris CSV (defaults to the copy bundled with scikit-learn)")
    p.add_argument("--regime", help="Iris thresholds 'sepal_length,sepal_width,petal_length'")
    p.add_argument("--noise", help="readout=p,gate=q,shots=k")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("enumerate-bas", help="list the 22 bars-and-stripes grids as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate_bas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (bench.ConfigError, argparse.ArgumentTypeError) as exc:
        parser.error(str(exc))  # exits 2
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
