"""Command-line interface.

Subcommands: gen, train-ae, fit-pca, score, evaluate, compare.  Option
values resolve as command line > config file > built-in defaults; a config
file holds ``key=value`` lines keyed by the long option names (hyphens and
underscores both work).  Every command writes the fully resolved configuration next to
its primary output as ``<out>.config``, which can be replayed with
``--config`` to reproduce the run.  All errors leave on stderr as one
``error:<category>: message`` line.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .autoencoder import TrainConfig, build_autoencoder, train
from .data import GeneratorSpec, generate_synthetic, load_csv, write_text_atomic
from .detector import (
    EvaluationReport,
    Threshold,
    compare as compare_reports,
    derive_threshold,
    evaluate as evaluate_scores,
    format_comparison,
    format_report,
)
from .errors import FraudDetectError, ParameterError
from .modelio import (
    load_model,
    save_autoencoder_model,
    save_pca_model,
)
from .pca import PcaDetector
from .preprocess import (
    DEFAULT_SPLIT_SEED,
    DEFAULT_TEST_FRACTION,
    MinMaxScaler,
    split_by_class,
    train_test_split,
)

OUT_DIR_ENV = "FRAUDDETECT_OUT_DIR"
HISTOGRAM_BINS = 50


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ParameterError(f"expected a boolean, got {text!r}")


def _parse_widths(text: str) -> tuple[int, ...]:
    stripped = str(text).strip()
    if stripped.lower() in ("", "none"):
        return ()
    try:
        return tuple(int(part) for part in stripped.split(","))
    except ValueError:
        raise ParameterError(f"expected comma-separated widths, got {text!r}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value) if value else "none"
    return str(value)


@dataclass(frozen=True)
class Option:
    """One CLI option: flag name, converter, default and help text."""

    name: str
    convert: type | object
    default: object = None
    help: str = ""
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON_IN = [
    Option("data", str, required=True, help="input CSV path"),
    Option("has-header", _parse_bool, True, "whether the CSV has a header row"),
]
_SPLIT = [
    Option("test-frac", float, DEFAULT_TEST_FRACTION, "test partition fraction"),
    Option("seed", int, DEFAULT_SPLIT_SEED, "shuffle and training seed"),
]
_THRESHOLD = [
    Option(
        "threshold-method",
        str,
        "mean_plus_k_std",
        "mean_plus_k_std, percentile or manual",
    ),
    Option("threshold-k", float, 1.0, "k for mean_plus_k_std"),
    Option("threshold-p", float, None, "percentile for the percentile method"),
    Option("threshold-value", float, None, "value for the manual method"),
]
_OUT = Option("out", str, required=True, help="primary output path")

COMMANDS: dict[str, list[Option]] = {
    "gen": [
        Option("normal", int, required=True, help="number of normal rows"),
        Option("fraud", int, required=True, help="number of fraud rows"),
        Option("dim", int, 20, "feature columns"),
        Option("latent", int, 4, "normal subspace dimension"),
        Option("fraud-shift", float, 6.0, "off-subspace displacement of fraud rows"),
        Option("noise-std", float, 0.5, "noise deviation on normal rows"),
        Option("fraud-noise-scale", float, 2.0, "noise multiplier for fraud rows"),
        Option("seed", int, 0, "generator seed"),
        _OUT,
    ],
    "train-ae": [
        *_COMMON_IN,
        *_SPLIT,
        Option("loss", str, "mae", "training loss: mae or mse"),
        Option("epochs", int, 100, "maximum training epochs"),
        Option("batch-size", int, 32, "mini-batch size"),
        Option("learning-rate", float, 1e-3, "Adam learning rate"),
        Option("patience", int, 10, "early-stopping patience in epochs"),
        Option("min-delta", float, 0.0, "minimum improvement that resets patience"),
        Option("validation-fraction", float, 0.1, "holdout fraction for early stopping"),
        Option("hidden", _parse_widths, (16,), "encoder hidden widths, comma separated"),
        Option("bottleneck", int, 8, "bottleneck width"),
        Option("hidden-activation", str, "relu", "activation of non-final layers"),
        Option("output-activation", str, "sigmoid", "activation of the final layer"),
        _OUT,
    ],
    "fit-pca": [
        *_COMMON_IN,
        *_SPLIT,
        Option("k", int, None, "fixed component count (overrides variance target)"),
        Option("variance-target", float, 0.95, "retained variance fraction target"),
        Option("standardize", _parse_bool, True, "standardize features before PCA"),
        _OUT,
    ],
    "score": [
        Option("model", str, required=True, help="model file from train-ae or fit-pca"),
        *_COMMON_IN,
        Option("unlabeled", _parse_bool, False, "input has no Class column"),
        _OUT,
    ],
    "evaluate": [
        Option("model", str, required=True, help="model file from train-ae or fit-pca"),
        *_COMMON_IN,
        *_SPLIT,
        *_THRESHOLD,
        _OUT,
    ],
    "compare": [
        Option("ae-model", str, required=True, help="autoencoder model file"),
        Option("pca-model", str, required=True, help="PCA model file"),
        *_COMMON_IN,
        *_SPLIT,
        *_THRESHOLD,
        _OUT,
    ],
}

# Settings pinned by --paper-faithful, per command: the originally reported
# split seed and fraction, mae loss, an 8-wide bottleneck, a 2-epoch run and
# PCA on unstandardized features.
PAPER_FAITHFUL: dict[str, dict[str, object]] = {
    "train-ae": {
        "seed": 111,
        "test_frac": 0.2,
        "loss": "mae",
        "bottleneck": 8,
        "epochs": 2,
        "patience": 1,
    },
    "fit-pca": {"seed": 111, "test_frac": 0.2, "standardize": False},
    "evaluate": {"seed": 111, "test_frac": 0.2},
    "compare": {"seed": 111, "test_frac": 0.2},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frauddetect",
        description="Reconstruction-error fraud detection toolkit.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, options in COMMANDS.items():
        sub = subparsers.add_parser(command, allow_abbrev=False)
        sub.add_argument("--config", default=None, help="key=value config file")
        if command in PAPER_FAITHFUL:
            sub.add_argument(
                "--paper-faithful",
                nargs="?",
                const=True,
                default=None,
                type=_parse_bool,
                help="pin the originally reported settings",
            )
        for opt in options:
            sub.add_argument(
                f"--{opt.name}",
                dest=opt.dest,
                type=opt.convert,
                default=None,
                help=opt.help,
            )
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParameterError(
                    f"{path} line {lineno}: expected key=value, got {line!r}"
                )
            values[key.strip()] = value.strip()
    return values


def _resolve_settings(command: str, args: argparse.Namespace) -> dict[str, object]:
    """Layer defaults, config file, preset and explicit flags, in that order."""
    options = {opt.dest: opt for opt in COMMANDS[command]}
    settings: dict[str, object] = {
        dest: opt.default for dest, opt in options.items()
    }

    config_values: dict[str, object] = {}
    paper_faithful = False
    if args.config is not None:
        for key, raw in _read_config_file(args.config).items():
            dest = key.replace("-", "_")
            if dest == "paper_faithful" and command in PAPER_FAITHFUL:
                paper_faithful = _parse_bool(raw)
                continue
            if dest not in options:
                raise ParameterError(
                    f"unknown config key {key!r} for command {command}"
                )
            config_values[dest] = options[dest].convert(raw)
    settings.update(config_values)

    if getattr(args, "paper_faithful", None) is not None:
        paper_faithful = bool(args.paper_faithful)
    if paper_faithful:
        settings.update(PAPER_FAITHFUL[command])

    for dest in options:
        given = getattr(args, dest)
        if given is not None:
            settings[dest] = given

    for dest, opt in options.items():
        if opt.required and settings[dest] is None:
            raise ParameterError(f"--{opt.name} is required for {command}")
    return settings


def _resolve_out(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return path


def _write_config_echo(out: str, command: str, settings: dict[str, object]) -> None:
    lines = [
        f"{dest.replace('_', '-')}={_format_value(value)}"
        for dest, value in sorted(settings.items())
        if value is not None
    ]
    write_text_atomic(out + ".config", "\n".join(lines) + "\n")
    print(f"config echoed to {out}.config")


def _load_labeled(settings: dict[str, object]):
    return load_csv(
        str(settings["data"]),
        has_header=bool(settings["has_header"]),
        class_column="Class",
        time_column="Time" if settings["has_header"] else None,
    )


def _derive_partition_threshold(
    settings: dict[str, object], train_normal_scores: np.ndarray
) -> Threshold:
    method = str(settings["threshold_method"])
    if method == "mean_plus_k_std":
        parameter = settings["threshold_k"]
    elif method == "percentile":
        parameter = settings["threshold_p"]
    elif method == "manual":
        parameter = settings["threshold_value"]
    else:
        parameter = None
    return derive_threshold(
        train_normal_scores,
        method=method,
        parameter=None if parameter is None else float(parameter),
        source="train-normal scores",
    )


def _histogram_csv(path: str, scores: np.ndarray, labels: np.ndarray) -> None:
    low = float(scores.min())
    high = float(scores.max())
    if high == low:
        # Degenerate span: unit-width bins, everything lands in the first.
        edges = low + np.arange(HISTOGRAM_BINS + 1, dtype=np.float64)
    else:
        edges = np.linspace(low, high, HISTOGRAM_BINS + 1)
    normal_counts, _ = np.histogram(scores[labels == 0], bins=edges)
    fraud_counts, _ = np.histogram(scores[labels == 1], bins=edges)
    lines = ["bin_left,bin_right,normal_count,fraud_count"]
    for i in range(HISTOGRAM_BINS):
        lines.append(
            f"{float(edges[i])!r},{float(edges[i + 1])!r},"
            f"{int(normal_counts[i])},{int(fraud_counts[i])}"
        )
    write_text_atomic(path, "\n".join(lines) + "\n")


def cmd_gen(settings: dict[str, object]) -> int:
    spec = GeneratorSpec(
        n_normal=int(settings["normal"]),
        n_fraud=int(settings["fraud"]),
        feature_dim=int(settings["dim"]),
        latent_dim=int(settings["latent"]),
        fraud_shift=float(settings["fraud_shift"]),
        noise_std=float(settings["noise_std"]),
        fraud_noise_scale=float(settings["fraud_noise_scale"]),
        seed=int(settings["seed"]),
    )
    dataset = generate_synthetic(spec)
    out = _resolve_out(str(settings["out"]))
    from .data import save_csv

    save_csv(dataset, out)
    meta = "\n".join(f"{k}={_format_value(v)}" for k, v in sorted(spec.as_dict().items()))
    write_text_atomic(out + ".meta", meta + "\n")
    _write_config_echo(out, "gen", settings)
    print(f"wrote {dataset.n_rows} rows ({spec.n_normal} normal, {spec.n_fraud} fraud) to {out}")
    return 0


def cmd_train_ae(settings: dict[str, object]) -> int:
    dataset = _load_labeled(settings)
    train_ds, test_ds = train_test_split(
        dataset, float(settings["test_frac"]), int(settings["seed"])
    )
    scaler = MinMaxScaler().fit(train_ds.features)
    normal_rows, _ = split_by_class(train_ds)
    scaled_normals = scaler.transform(normal_rows)

    model = build_autoencoder(
        input_dim=dataset.n_features,
        hidden_widths=tuple(settings["hidden"]),  # type: ignore[arg-type]
        bottleneck=int(settings["bottleneck"]),
        hidden_activation=str(settings["hidden_activation"]),
        output_activation=str(settings["output_activation"]),
        seed=int(settings["seed"]),
    )
    config = TrainConfig(
        learning_rate=float(settings["learning_rate"]),
        epochs=int(settings["epochs"]),
        batch_size=int(settings["batch_size"]),
        patience=int(settings["patience"]),
        min_delta=float(settings["min_delta"]),
        seed=int(settings["seed"]),
        loss=str(settings["loss"]),
        validation_fraction=float(settings["validation_fraction"]),
    )
    model, history = train(model, scaled_normals, config)

    out = _resolve_out(str(settings["out"]))
    save_autoencoder_model(out, model, config.loss, scaler)
    history_lines = ["epoch,train_loss,val_loss"]
    for i, (tl, vl) in enumerate(zip(history.train_losses, history.val_losses), start=1):
        history_lines.append(f"{i},{tl!r},{vl!r}")
    write_text_atomic(out + ".history.csv", "\n".join(history_lines) + "\n")
    _write_config_echo(out, "train-ae", settings)
    print(
        f"split {train_ds.n_rows} train / {test_ds.n_rows} test rows; "
        f"trained on {normal_rows.shape[0]} normal rows"
    )
    print(
        f"ran {history.epochs_run} epochs, kept epoch {history.best_epoch} "
        f"(monitored loss {history.val_losses[history.best_epoch - 1]!r})"
    )
    print(f"model written to {out}")
    return 0


def cmd_fit_pca(settings: dict[str, object]) -> int:
    dataset = _load_labeled(settings)
    train_ds, test_ds = train_test_split(
        dataset, float(settings["test_frac"]), int(settings["seed"])
    )
    normal_rows, _ = split_by_class(train_ds)
    k = settings["k"]
    detector = PcaDetector(
        n_components=None if k is None else int(k),
        variance_target=float(settings["variance_target"]),
        standardize=bool(settings["standardize"]),
    ).fit(normal_rows)

    out = _resolve_out(str(settings["out"]))
    save_pca_model(out, detector)
    lines = ["component,eigenvalue,explained_fraction,cumulative_fraction"]
    cumulative = 0.0
    for j in range(detector.n_components_):
        cumulative += float(detector.explained_variance_ratio_[j])
        lines.append(
            f"{j + 1},{float(detector.eigenvalues_[j])!r},"
            f"{float(detector.explained_variance_ratio_[j])!r},{cumulative!r}"
        )
    write_text_atomic(out + ".variance.csv", "\n".join(lines) + "\n")
    _write_config_echo(out, "fit-pca", settings)
    print(
        f"split {train_ds.n_rows} train / {test_ds.n_rows} test rows; "
        f"fitted on {normal_rows.shape[0]} normal rows"
    )
    print(
        f"kept {detector.n_components_} of {detector.n_features_in_} components "
        f"({float(np.sum(detector.explained_variance_ratio_)):.6f} of variance)"
    )
    print(f"model written to {out}")
    return 0


def cmd_score(settings: dict[str, object]) -> int:
    artifact = load_model(str(settings["model"]))
    unlabeled = bool(settings["unlabeled"])
    dataset = load_csv(
        str(settings["data"]),
        has_header=bool(settings["has_header"]),
        class_column=None if unlabeled else "Class",
        time_column="Time" if settings["has_header"] else None,
    )
    scores = artifact.score_rows(dataset.features)

    out = _resolve_out(str(settings["out"]))
    if dataset.labels is not None:
        lines = ["row_index,score,class"]
        for i, (s, c) in enumerate(zip(scores, dataset.labels)):
            lines.append(f"{i},{float(s)!r},{int(c)}")
    else:
        lines = ["row_index,score"]
        for i, s in enumerate(scores):
            lines.append(f"{i},{float(s)!r}")
    write_text_atomic(out, "\n".join(lines) + "\n")
    _write_config_echo(out, "score", settings)
    print(f"scored {len(scores)} rows with the {artifact.kind} model into {out}")
    return 0


def _partition_report(
    artifact,
    partition,
    threshold: Threshold,
    title: str,
) -> tuple[str, EvaluationReport | None]:
    labels = partition.labels
    scores = artifact.score_rows(partition.features)
    normal_scores = scores[labels == 0]
    fraud_scores = scores[labels == 1]
    if normal_scores.size == 0 or fraud_scores.size == 0:
        text = (
            f"{title}\n{'-' * len(title)}\n"
            f"not evaluated: {normal_scores.size} normal and "
            f"{fraud_scores.size} fraud rows\n"
        )
        return text, None
    report = evaluate_scores(normal_scores, fraud_scores, threshold)
    return format_report(report, title), report


def cmd_evaluate(settings: dict[str, object]) -> int:
    artifact = load_model(str(settings["model"]))
    dataset = _load_labeled(settings)
    train_ds, test_ds = train_test_split(
        dataset, float(settings["test_frac"]), int(settings["seed"])
    )
    train_scores = artifact.score_rows(train_ds.features)
    threshold = _derive_partition_threshold(
        settings, train_scores[train_ds.labels == 0]
    )

    out = _resolve_out(str(settings["out"]))
    blocks: list[str] = []
    text, _ = _partition_report(
        artifact, train_ds, threshold, f"train partition ({train_ds.n_rows} rows)"
    )
    blocks.append(text)
    _histogram_csv(out + ".hist-train.csv", train_scores, train_ds.labels)
    if test_ds.n_rows:
        text, _ = _partition_report(
            artifact, test_ds, threshold, f"test partition ({test_ds.n_rows} rows)"
        )
        blocks.append(text)
        _histogram_csv(
            out + ".hist-test.csv",
            artifact.score_rows(test_ds.features),
            test_ds.labels,
        )
    body = "\n".join(blocks)
    write_text_atomic(out, body)
    _write_config_echo(out, "evaluate", settings)
    print(body, end="")
    return 0


def cmd_compare(settings: dict[str, object]) -> int:
    ae_artifact = load_model(str(settings["ae_model"]))
    pca_artifact = load_model(str(settings["pca_model"]))
    if ae_artifact.kind != "autoencoder" or pca_artifact.kind != "pca":
        raise ParameterError(
            f"--ae-model must be an autoencoder and --pca-model a pca model, "
            f"got {ae_artifact.kind} and {pca_artifact.kind}"
        )
    dataset = _load_labeled(settings)
    train_ds, test_ds = train_test_split(
        dataset, float(settings["test_frac"]), int(settings["seed"])
    )

    blocks: list[str] = []
    for title, partition in (("train", train_ds), ("test", test_ds)):
        if partition.n_rows == 0:
            continue
        labels = partition.labels
        if not ((labels == 0).any() and (labels == 1).any()):
            blocks.append(f"{title} partition not compared: single-class\n")
            continue
        reports = []
        for artifact in (ae_artifact, pca_artifact):
            train_scores = artifact.score_rows(train_ds.features)
            threshold = _derive_partition_threshold(
                settings, train_scores[train_ds.labels == 0]
            )
            scores = artifact.score_rows(partition.features)
            reports.append(
                evaluate_scores(scores[labels == 0], scores[labels == 1], threshold)
            )
        summary = compare_reports(
            reports[0], reports[1], first_label="autoencoder", second_label="pca"
        )
        header = f"{title} partition ({partition.n_rows} rows)"
        blocks.append(header + "\n" + "=" * len(header) + "\n" + format_comparison(summary))

    body = "\n".join(blocks)
    out = _resolve_out(str(settings["out"]))
    write_text_atomic(out, body)
    _write_config_echo(out, "compare", settings)
    print(body, end="")
    return 0


HANDLERS = {
    "gen": cmd_gen,
    "train-ae": cmd_train_ae,
    "fit-pca": cmd_fit_pca,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _resolve_settings(args.command, args)
        return HANDLERS[args.command](settings)
    except FraudDetectError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
