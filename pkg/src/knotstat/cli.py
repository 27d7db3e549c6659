"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numeric
failure. Every JSON artifact embeds a schema version and the fully
resolved configuration, and identical invocations produce byte-identical
output (nothing time- or environment-dependent is written).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import fixture_path
from .dataset import Dataset, KnotClass, filter_class, parse_dataset
from .errors import DataError, NumericError, SchemaError
from .experiments import (
    AnnSpec,
    InputInvariant,
    TargetInvariant,
    distill_formula,
    export_scatter,
    phase_sweep,
    run_correlation_table,
    run_error_tables,
    split_indices,
)
from .invariants import (
    Determinant,
    MahlerMeasure,
    RootOfUnityEval,
    degree,
    derived_value,
    rescale,
)
from .mlp import (
    Activation,
    NetworkSpec,
    TrainConfig,
    evaluate,
    network_from_dict,
    network_to_dict,
)
from .mlp import train as train_network
from .vectorize import JonesVectorizer, KhovanovVectorizer

SCHEMA_VERSION = 1

CLASS_NAMES = {
    "all": KnotClass.ALL,
    "alt": KnotClass.ALTERNATING,
    "nonalt": KnotClass.NON_ALTERNATING,
}

SCALAR_INPUT_NAMES = {
    "det": InputInvariant.RESCALED_DET,
    "mahler": InputInvariant.RESCALED_MAHLER,
    "zeta": InputInvariant.RESCALED_ZETA,
}

VECTOR_INPUT_NAMES = {
    "jones": InputInvariant.JONES_VECTOR,
    "khovanov": InputInvariant.KHOVANOV_VECTOR,
}

TARGET_NAMES = {t.value: t for t in TargetInvariant}

DEFAULT_SWEEP = "1/2,1/3,2/3,1/4,3/4,1/5,2/5,3/5,4/5,1/6,5/6,2/7,3/7,4/7,5/7,3/8,5/8"

_PHASE_PI = re.compile(r"^(\d*(?:\.\d+)?)pi(?:/(\d+(?:\.\d+)?))?$")
_PHASE_FRACTION = re.compile(r"^(\d+)/(\d+)$")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def parse_phase(text: str) -> float:
    """Phase in radians from either 'k/n' (meaning 2*pi*k/n) or 'Xpi/Y'."""
    text = text.strip().lower().replace(" ", "")
    m = _PHASE_FRACTION.match(text)
    if m:
        k, n = int(m.group(1)), int(m.group(2))
        if not 0 < k < n:
            raise ValueError(f"root-of-unity phase needs 0 < k < n, got {text!r}")
        return 2.0 * math.pi * k / n
    m = _PHASE_PI.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    raise ValueError(f"cannot parse phase {text!r}; use 'k/n' or 'Xpi/Y'")


def parse_zeta(text: str) -> tuple[int, int]:
    m = _PHASE_FRACTION.match(text.strip())
    if not m:
        raise ValueError(f"zeta must look like 'k/n', got {text!r}")
    k, n = int(m.group(1)), int(m.group(2))
    if not 0 < k < n:
        raise ValueError(f"zeta needs 0 < k < n, got {text!r}")
    return k, n


def parse_hidden(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"hidden sizes must be comma-separated integers: {text!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"hidden sizes must be positive integers: {text!r}")
    return sizes


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _artifact(command: str, config: dict, result) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "result": result,
    }


def _load(args) -> Dataset:
    return parse_dataset(args.data)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_validate(args) -> int:
    ds = _load(args)
    by_class = {
        name: len(filter_class(ds, cls)) for name, cls in CLASS_NAMES.items()
    }
    targets = {
        t.value: sum(
            1 for r in ds if getattr(r.hyperbolic, t.value) is not None
        )
        for t in TargetInvariant
    }
    result = {
        "records": len(ds),
        "by_class": by_class,
        "with_khovanov": sum(1 for r in ds if r.khovanov is not None),
        "targets_present": targets,
        "provenance": ds.provenance,
    }
    _emit(_artifact("validate", {"data": str(args.data)}, result), args.out)
    return 0


def _cmd_derive(args) -> int:
    ds = filter_class(_load(args), CLASS_NAMES[args.knot_class])
    zeta = parse_zeta(args.zeta)
    rows = []
    for rec in ds:
        deg = degree(rec.jones)
        row: dict = {"name": rec.name, "alternating": rec.alternating, "degree": deg}
        for label, kind in (
            ("det", Determinant()),
            ("mahler", MahlerMeasure()),
            ("zeta_eval", RootOfUnityEval(*zeta)),
        ):
            value = derived_value(rec.jones, kind)
            row[label] = value
            try:
                row[f"rescaled_{label}"] = rescale(value, deg)
            except DataError:
                row[f"rescaled_{label}"] = None
        rows.append(row)
    config = {"data": str(args.data), "class": args.knot_class, "zeta": list(zeta)}
    if args.format == "csv":
        header = [
            "name",
            "alternating",
            "degree",
            "det",
            "mahler",
            "zeta_eval",
            "rescaled_det",
            "rescaled_mahler",
            "rescaled_zeta_eval",
        ]
        lines = [
            "# knotstat derive v1",
            f"# data={config['data']} class={config['class']} "
            f"zeta={zeta[0]}/{zeta[1]}",
            ",".join(header),
        ]
        for row in rows:
            lines.append(",".join(_csv_cell(row[h]) for h in header))
        _emit_text("\n".join(lines) + "\n", args.out)
    else:
        _emit(_artifact("derive", config, rows), args.out)
    return 0


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _cmd_correlate(args) -> int:
    ds = _load(args)
    zeta = parse_zeta(args.zeta)
    table = run_correlation_table(ds, classes=_table_classes(args), zeta=zeta)
    config = {"data": str(args.data), "zeta": list(zeta), "class": args.knot_class}
    if args.format == "text":
        _emit_text(table.render_text(), args.out)
    else:
        _emit(_artifact("correlate", config, table.to_dict()), args.out)
    return 0


def _table_classes(args) -> tuple[KnotClass, ...]:
    """'all' keeps the full per-class layout; alt/nonalt restrict to one class."""
    if args.knot_class == "all":
        return (KnotClass.ALL, KnotClass.ALTERNATING, KnotClass.NON_ALTERNATING)
    return (CLASS_NAMES[args.knot_class],)


def _cmd_tables(args) -> int:
    ds = _load(args)
    zeta = parse_zeta(args.zeta)
    ann = AnnSpec(
        hidden_layer_sizes=parse_hidden(args.hidden),
        activation=Activation(args.activation),
        train=TrainConfig(
            learning_rate=args.lr,
            batch_size=args.batch,
            epochs=args.epochs,
            momentum=args.momentum,
            seed=args.seed,
            input_standardize=not args.no_standardize,
        ),
    )
    tables = run_error_tables(
        ds,
        classes=_table_classes(args),
        ann=ann,
        split_fraction=args.split,
        split_seed=args.seed,
        zeta=zeta,
    )
    config = {
        "data": str(args.data),
        "zeta": list(zeta),
        "seed": args.seed,
        "class": args.knot_class,
        "split_fraction": args.split,
        "ann": {
            "hidden_layer_sizes": list(ann.hidden_layer_sizes),
            "activation": ann.activation.value,
            "learning_rate": args.lr,
            "batch_size": args.batch,
            "epochs": args.epochs,
            "momentum": args.momentum,
            "standardize": not args.no_standardize,
        },
    }
    if args.format == "text":
        text = tables.render_mape_text() + "\n" + tables.render_relative_mse_text()
        _emit_text(text, args.out)
    else:
        _emit(_artifact("tables", config, tables.to_dict()), args.out)
    return 0


def _cmd_train_ann(args) -> int:
    ds = filter_class(_load(args), CLASS_NAMES[args.knot_class])
    target = TARGET_NAMES[args.target]
    input_invariant = VECTOR_INPUT_NAMES[args.input]
    records = [
        r
        for r in ds
        if getattr(r.hyperbolic, target.value) is not None
        and (input_invariant is not InputInvariant.KHOVANOV_VECTOR or r.khovanov is not None)
    ]
    if len(records) < 2:
        raise DataError(f"only {len(records)} usable record(s) for {args.target}")
    subset = Dataset(tuple(records))
    vec = (
        KhovanovVectorizer()
        if input_invariant is InputInvariant.KHOVANOV_VECTOR
        else JonesVectorizer()
    )
    X = vec.fit(subset).transform(subset)
    y = np.asarray(
        [getattr(r.hyperbolic, target.value) for r in records], dtype=float
    )
    train_idx, test_idx = split_indices(len(records), args.split, args.seed)
    cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=min(args.batch, len(train_idx)),
        epochs=args.epochs,
        momentum=args.momentum,
        seed=args.seed,
        input_standardize=not args.no_standardize,
    )
    spec = NetworkSpec((X.shape[1], *parse_hidden(args.hidden), 1), Activation(args.activation))
    net, history = train_network(spec, X[train_idx], y[train_idx], cfg)
    report = evaluate(net, X[test_idx], y[test_idx])

    window = (
        {"kind": "khovanov", "grid": list(vec.grid_)}
        if input_invariant is InputInvariant.KHOVANOV_VECTOR
        else {"kind": "jones", "window": list(vec.window_)}
    )
    config = {
        "data": str(args.data),
        "input": args.input,
        "target": args.target,
        "class": args.knot_class,
        "hidden": list(parse_hidden(args.hidden)),
        "activation": args.activation,
        "learning_rate": args.lr,
        "batch_size": cfg.batch_size,
        "epochs": args.epochs,
        "momentum": args.momentum,
        "seed": args.seed,
        "split_fraction": args.split,
        "standardize": not args.no_standardize,
    }
    result = {
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
        "final_train_loss": history[-1],
        "test_mse": report.mse,
        "test_mape": report.mape,
        "feature_layout": window,
        "network": network_to_dict(net),
    }
    _emit(_artifact("train-ann", config, result), args.out)
    return 0


def _cmd_evaluate(args) -> int:
    try:
        with open(args.model, encoding="utf-8") as fh:
            artifact = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{args.model}: invalid JSON ({exc})") from None
    if artifact.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{args.model}: unsupported schema version")
    try:
        model_cfg = artifact["config"]
        result = artifact["result"]
        net = network_from_dict(result["network"])
        layout = result["feature_layout"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{args.model}: not a train-ann artifact ({exc})") from None

    ds = _load(args)
    target = TARGET_NAMES[model_cfg["target"]]
    if layout["kind"] == "khovanov":
        records = [
            r
            for r in ds
            if getattr(r.hyperbolic, target.value) is not None and r.khovanov is not None
        ]
        vec = KhovanovVectorizer()
        from .vectorize import KhovanovGrid

        vec.grid_ = KhovanovGrid(*layout["grid"])
    else:
        records = [r for r in ds if getattr(r.hyperbolic, target.value) is not None]
        vec = JonesVectorizer()
        from .vectorize import JonesWindow

        vec.window_ = JonesWindow(*layout["window"])
    if not records:
        raise DataError("no usable records to evaluate on")
    subset = Dataset(tuple(records))
    X = vec.transform(subset)
    y = np.asarray([getattr(r.hyperbolic, target.value) for r in records], dtype=float)
    report = evaluate(net, X, y)
    config = {"model": str(args.model), "data": str(args.data)}
    _emit(
        _artifact(
            "evaluate",
            config,
            {"n": len(records), "mse": report.mse, "mape": report.mape},
        ),
        args.out,
    )
    return 0


def _cmd_distill(args) -> int:
    ds = filter_class(_load(args), CLASS_NAMES[args.knot_class])
    phase = parse_phase(args.phase)
    target = TARGET_NAMES[args.target]
    fit = distill_formula(ds, phase, target)
    config = {
        "data": str(args.data),
        "phase": args.phase,
        "phase_radians": phase,
        "target": args.target,
        "class": args.knot_class,
    }
    _emit(_artifact("distill", config, fit.to_dict()), args.out)
    return 0


def _cmd_sweep(args) -> int:
    ds = filter_class(_load(args), CLASS_NAMES[args.knot_class])
    phases = [parse_zeta(tok) for tok in args.phases.split(",") if tok.strip()]
    target = TARGET_NAMES[args.target]
    ranking = phase_sweep(ds, phases, target)
    config = {
        "data": str(args.data),
        "phases": [f"{k}/{n}" for k, n in phases],
        "target": args.target,
        "class": args.knot_class,
    }
    _emit(
        _artifact("sweep", config, [rank.to_dict() for rank in ranking]),
        args.out,
    )
    return 0


def _cmd_scatter(args) -> int:
    ds = _load(args)
    export_scatter(
        ds,
        SCALAR_INPUT_NAMES[args.input],
        TARGET_NAMES[args.target],
        CLASS_NAMES[args.knot_class],
        args.out,
        zeta=parse_zeta(args.zeta),
    )
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(p: argparse.ArgumentParser, *, out_required: bool = False) -> None:
    p.add_argument(
        "--data",
        default=str(fixture_path()),
        help="dataset CSV/JSON path (default: bundled micro fixture)",
    )
    p.add_argument(
        "--out",
        required=out_required,
        default=None,
        help="output path (default: stdout)" if not out_required else "output path",
    )
    p.add_argument("--seed", type=int, default=42, help="seed for all randomness")
    p.add_argument(
        "--class",
        dest="knot_class",
        choices=sorted(CLASS_NAMES),
        default="all",
        help="knot class filter",
    )


def _add_ann_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hidden", default="100,100", help="hidden layer sizes, e.g. 100,100")
    p.add_argument(
        "--activation", choices=[a.value for a in Activation], default="relu"
    )
    p.add_argument("--lr", type=float, default=1e-3, help="learning rate")
    p.add_argument("--batch", type=int, default=32, help="mini-batch size")
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument(
        "--no-standardize",
        action="store_true",
        help="train on raw inputs instead of standardized columns",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="knotstat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"knotstat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a dataset and report summary counts")
    _add_common(p)

    p = sub.add_parser("derive", help="per-record derived scalar invariants")
    _add_common(p)
    p.add_argument("--zeta", default="3/5", help="root of unity k/n")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("correlate", help="full-data Pearson correlation grid")
    _add_common(p)
    p.add_argument("--zeta", default="3/5")
    p.add_argument("--format", choices=["json", "text"], default="json")

    p = sub.add_parser("tables", help="MAPE and relative-MSE error tables")
    _add_common(p)
    p.add_argument("--zeta", default="3/5")
    p.add_argument("--format", choices=["json", "text"], default="json")
    _add_ann_flags(p)

    p = sub.add_parser("train-ann", help="train one network and emit it as JSON")
    _add_common(p)
    p.add_argument("--input", choices=sorted(VECTOR_INPUT_NAMES), default="jones")
    p.add_argument("--target", choices=sorted(TARGET_NAMES), default="vol")
    _add_ann_flags(p)

    p = sub.add_parser("evaluate", help="evaluate a saved network on a dataset")
    _add_common(p)
    p.add_argument("--model", required=True, help="train-ann output JSON")

    p = sub.add_parser("distill", help="fit target ~ a*ln(|J|+b)-c at a phase")
    _add_common(p)
    p.add_argument("--phase", default="3pi/4", help="'k/n' (2 pi k/n) or 'Xpi/Y'")
    p.add_argument("--target", choices=sorted(TARGET_NAMES), default="vol")

    p = sub.add_parser("sweep", help="rank roots of unity by volume correlation")
    _add_common(p)
    p.add_argument("--phases", default=DEFAULT_SWEEP, help="comma-separated k/n list")
    p.add_argument("--target", choices=sorted(TARGET_NAMES), default="vol")

    p = sub.add_parser("scatter", help="export a scatter CSV with the fitted line")
    _add_common(p, out_required=True)
    p.add_argument("--input", choices=sorted(SCALAR_INPUT_NAMES), default="det")
    p.add_argument("--target", choices=sorted(TARGET_NAMES), default="vol")
    p.add_argument("--zeta", default="3/5")
    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "derive": _cmd_derive,
    "correlate": _cmd_correlate,
    "tables": _cmd_tables,
    "train-ann": _cmd_train_ann,
    "evaluate": _cmd_evaluate,
    "distill": _cmd_distill,
    "sweep": _cmd_sweep,
    "scatter": _cmd_scatter,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ValueError as exc:
        print(f"knotstat: error: {exc}", file=sys.stderr)
        return 1
    except (SchemaError, DataError) as exc:
        print(f"knotstat: data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"knotstat: numeric error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"knotstat: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
