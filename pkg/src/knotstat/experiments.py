"""Config-driven experiments: correlation grids, error tables, formula search.

Every experiment is summarized by an :class:`ExperimentConfig` and produces
a :class:`ResultCell` that records its metrics next to the mean-predicting
baseline evaluated on the identical test split, the drop counts, and the
resolved hyperparameters, so a table of cells is self-describing and
reproducible. Failed cells degrade to absent entries instead of aborting
the whole table.
"""

from __future__ import annotations

import cmath
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import invariants
from .dataset import Dataset, KnotClass, KnotRecord, filter_class
from .errors import DataError, KnotstatError
from .invariants import (
    DEFAULT_ZETA,
    Determinant,
    DerivedInvariantKind,
    MahlerMeasure,
    RootOfUnityEval,
    eval_poly,
)
from .mlp import Activation, NetworkSpec, TrainConfig
from .mlp import predict as net_predict
from .mlp import train
from .stats import linear_fit, mape, mse, pearson
from .vectorize import JonesVectorizer, KhovanovVectorizer

__all__ = [
    "InputInvariant",
    "TargetInvariant",
    "LinearRegressionSpec",
    "AnnSpec",
    "BaselineMeanSpec",
    "ModelSpec",
    "ExperimentConfig",
    "ResultCell",
    "ConstantPredictor",
    "FormulaFit",
    "PhaseRank",
    "CorrelationTable",
    "ErrorTables",
    "split",
    "split_indices",
    "baseline_mean",
    "run_experiment",
    "run_correlation_table",
    "run_error_tables",
    "distill_formula",
    "phase_sweep",
    "export_scatter",
    "golden_section_minimize",
    "scalar_feature_kind",
    "ERROR_TABLE_ROWS",
]

logger = logging.getLogger(__name__)


class InputInvariant(str, Enum):
    RESCALED_DET = "rescaled_det"
    RESCALED_MAHLER = "rescaled_mahler"
    RESCALED_ZETA = "rescaled_zeta"
    JONES_VECTOR = "jones_vector"
    KHOVANOV_VECTOR = "khovanov_vector"

    @property
    def is_scalar(self) -> bool:
        return self in (
            InputInvariant.RESCALED_DET,
            InputInvariant.RESCALED_MAHLER,
            InputInvariant.RESCALED_ZETA,
        )


SCALAR_INPUTS = (
    InputInvariant.RESCALED_DET,
    InputInvariant.RESCALED_MAHLER,
    InputInvariant.RESCALED_ZETA,
)

VECTOR_INPUTS = (InputInvariant.KHOVANOV_VECTOR, InputInvariant.JONES_VECTOR)


class TargetInvariant(str, Enum):
    VOL = "vol"
    LONGITUDE_LENGTH = "longitude_length"
    MERIDIAN_LENGTH = "meridian_length"
    MU_X = "mu_x"
    MU_Y = "mu_y"
    CUSP_VOLUME = "cusp_volume"
    CHERN_SIMONS = "chern_simons"


ALL_TARGETS = tuple(TargetInvariant)
ALL_CLASSES = (KnotClass.ALL, KnotClass.ALTERNATING, KnotClass.NON_ALTERNATING)


@dataclass(frozen=True)
class LinearRegressionSpec:
    pass


@dataclass(frozen=True)
class AnnSpec:
    hidden_layer_sizes: tuple[int, ...] = (100, 100)
    activation: Activation = Activation.RELU
    train: TrainConfig = TrainConfig()


@dataclass(frozen=True)
class BaselineMeanSpec:
    pass


ModelSpec = Union[LinearRegressionSpec, AnnSpec, BaselineMeanSpec]


def _model_to_dict(model: ModelSpec) -> dict:
    if isinstance(model, LinearRegressionSpec):
        return {"kind": "linear_regression"}
    if isinstance(model, BaselineMeanSpec):
        return {"kind": "baseline_mean"}
    return {
        "kind": "ann",
        "hidden_layer_sizes": list(model.hidden_layer_sizes),
        "activation": model.activation.value,
        "train": {
            "learning_rate": model.train.learning_rate,
            "batch_size": model.train.batch_size,
            "epochs": model.train.epochs,
            "momentum": model.train.momentum,
            "seed": model.train.seed,
            "input_standardize": model.train.input_standardize,
        },
    }


@dataclass(frozen=True)
class ExperimentConfig:
    """One cell of the experiment matrix.

    Scalar inputs pair with linear regression, vector inputs with an ANN;
    the baseline ignores the input entirely (input may be None).
    """

    target: TargetInvariant
    model: ModelSpec
    input: Optional[InputInvariant] = None
    knot_class: KnotClass = KnotClass.ALL
    split_fraction: float = 0.8
    split_seed: int = 42
    zeta: tuple[int, int] = DEFAULT_ZETA

    def __post_init__(self) -> None:
        if not 0 < self.split_fraction < 1:
            raise ValueError("split_fraction must lie in (0, 1)")
        if isinstance(self.model, BaselineMeanSpec):
            return
        if self.input is None:
            raise ValueError("non-baseline experiments need an input invariant")
        if isinstance(self.model, LinearRegressionSpec) and not self.input.is_scalar:
            raise ValueError("linear regression takes a scalar input invariant")
        if isinstance(self.model, AnnSpec) and self.input.is_scalar:
            raise ValueError("the ANN takes a vector input invariant")

    def to_dict(self) -> dict:
        return {
            "input": None if self.input is None else self.input.value,
            "target": self.target.value,
            "class": self.knot_class.value,
            "model": _model_to_dict(self.model),
            "split_fraction": self.split_fraction,
            "split_seed": self.split_seed,
            "zeta": list(self.zeta),
        }


@dataclass(frozen=True)
class ResultCell:
    """Metrics of one experiment against its baseline on the same split."""

    mse: float
    relative_mse: float
    mape: Optional[float]
    pearson: Optional[float]
    n_train: int
    n_test: int
    n_dropped: int
    bold_mse: bool
    bold_mape: Optional[bool]
    baseline_mse: float
    baseline_mape: Optional[float]
    config: dict

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "relative_mse": self.relative_mse,
            "mape": self.mape,
            "pearson": self.pearson,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "n_dropped": self.n_dropped,
            "bold_mse": self.bold_mse,
            "bold_mape": self.bold_mape,
            "baseline_mse": self.baseline_mse,
            "baseline_mape": self.baseline_mape,
            "config": self.config,
        }


@dataclass(frozen=True)
class ConstantPredictor:
    value: float

    def predict(self, X) -> np.ndarray:
        return np.full(len(X), self.value)


def baseline_mean(train_targets) -> ConstantPredictor:
    """Predictor that always answers the training-set mean."""
    targets = np.asarray(train_targets, dtype=float)
    if targets.size == 0:
        raise DataError("baseline needs at least one training target")
    return ConstantPredictor(float(np.mean(targets)))


def bold_flag(error: float, baseline_error: float) -> bool:
    """The tables' bold rule: strictly less than half of the baseline error."""
    return error < 0.5 * baseline_error


# ---------------------------------------------------------------------------
# splitting


def split_indices(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle; the first ceil(fraction*n) indices train, the rest test."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    if n < 2:
        raise DataError(f"cannot split {n} record(s) into non-empty train and test")
    n_train = math.ceil(fraction * n)
    if n_train in (0, n):
        raise DataError(
            f"split of {n} records at fraction {fraction} leaves an empty part"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive, seed-deterministic train/test datasets."""
    train_idx, test_idx = split_indices(len(ds), fraction, seed)
    return (
        Dataset(tuple(ds.records[i] for i in train_idx), provenance=ds.provenance),
        Dataset(tuple(ds.records[i] for i in test_idx), provenance=ds.provenance),
    )


# ---------------------------------------------------------------------------
# feature construction


def scalar_feature_kind(
    input_invariant: InputInvariant, zeta: tuple[int, int] = DEFAULT_ZETA
) -> DerivedInvariantKind:
    if input_invariant is InputInvariant.RESCALED_DET:
        return Determinant()
    if input_invariant is InputInvariant.RESCALED_MAHLER:
        return MahlerMeasure()
    if input_invariant is InputInvariant.RESCALED_ZETA:
        return RootOfUnityEval(*zeta)
    raise ValueError(f"{input_invariant.value} is not a scalar invariant")


def _scalar_features(
    records: list[KnotRecord], kind: DerivedInvariantKind
) -> tuple[np.ndarray, list[KnotRecord], int]:
    """Rescaled scalar feature per record; records where it is undefined
    (degree < 2, non-positive value) are dropped and counted."""
    values, kept = [], []
    dropped = 0
    for rec in records:
        try:
            values.append(invariants.rescaled_value(rec.jones, kind))
            kept.append(rec)
        except DataError:
            dropped += 1
    if dropped:
        logger.warning("dropped %d record(s) with undefined %s feature", dropped, kind)
    return np.asarray(values), kept, dropped


def _target_values(records: list[KnotRecord], target: TargetInvariant) -> np.ndarray:
    return np.asarray(
        [getattr(r.hyperbolic, target.value) for r in records], dtype=float
    )


def _drop_missing(
    records, target: TargetInvariant, need_khovanov: bool
) -> tuple[list[KnotRecord], int]:
    kept = [
        r
        for r in records
        if getattr(r.hyperbolic, target.value) is not None
        and (not need_khovanov or r.khovanov is not None)
    ]
    return kept, len(records) - len(kept)


# ---------------------------------------------------------------------------
# single experiment


def run_experiment(ds: Dataset, cfg: ExperimentConfig) -> ResultCell:
    """Fit one configured model on a seeded split and score it against the
    mean baseline on the identical test records.

    Feature windows for vector inputs are computed on the full filtered
    dataset before splitting, so train and test share one layout.
    """
    records = list(filter_class(ds, cfg.knot_class))
    need_khovanov = cfg.input is InputInvariant.KHOVANOV_VECTOR
    records, dropped = _drop_missing(records, cfg.target, need_khovanov)

    X = None
    if cfg.input is not None and cfg.input.is_scalar:
        x_scalar, records, d = _scalar_features(
            records, scalar_feature_kind(cfg.input, cfg.zeta)
        )
        dropped += d
    if len(records) < 2:
        raise DataError(
            f"only {len(records)} usable record(s) for target {cfg.target.value} "
            f"in class {cfg.knot_class.value}"
        )
    if cfg.input in VECTOR_INPUTS:
        subset = Dataset(tuple(records))
        vec = (
            KhovanovVectorizer()
            if cfg.input is InputInvariant.KHOVANOV_VECTOR
            else JonesVectorizer()
        )
        X = vec.fit(subset).transform(subset)

    y = _target_values(records, cfg.target)
    train_idx, test_idx = split_indices(len(records), cfg.split_fraction, cfg.split_seed)
    y_train, y_test = y[train_idx], y[test_idx]

    base = baseline_mean(y_train)
    base_pred = base.predict(test_idx)
    baseline_mse = mse(base_pred, y_test)
    baseline_mape = None if np.any(y_test == 0) else mape(base_pred, y_test)

    effective: dict = cfg.to_dict()
    if isinstance(cfg.model, BaselineMeanSpec):
        preds = base_pred
    elif isinstance(cfg.model, LinearRegressionSpec):
        model, _ = linear_fit(x_scalar[train_idx], y_train)
        preds = model.predict(x_scalar[test_idx])
        effective["fitted"] = {"slope": model.slope, "intercept": model.intercept}
    else:
        spec = NetworkSpec(
            (X.shape[1], *cfg.model.hidden_layer_sizes, 1), cfg.model.activation
        )
        # Tiny datasets get the batch size clamped so train's precondition holds.
        batch = min(cfg.model.train.batch_size, len(train_idx))
        train_cfg = TrainConfig(
            learning_rate=cfg.model.train.learning_rate,
            batch_size=batch,
            epochs=cfg.model.train.epochs,
            momentum=cfg.model.train.momentum,
            seed=cfg.model.train.seed,
            input_standardize=cfg.model.train.input_standardize,
        )
        net, _history = train(spec, X[train_idx], y_train, train_cfg)
        preds = net_predict(net, X[test_idx])
        effective["model"]["train"]["batch_size"] = batch

    test_mse = mse(preds, y_test)
    test_mape = None if np.any(y_test == 0) else mape(preds, y_test)

    if isinstance(cfg.model, BaselineMeanSpec):
        relative = 1.0
        corr = None
    else:
        if baseline_mse == 0:
            raise DataError("degenerate baseline: zero test MSE for the mean predictor")
        relative = test_mse / baseline_mse
        try:
            corr = pearson(preds, y_test)
        except DataError:
            corr = None

    return ResultCell(
        mse=test_mse,
        relative_mse=relative,
        mape=test_mape,
        pearson=corr,
        n_train=len(train_idx),
        n_test=len(test_idx),
        n_dropped=dropped,
        bold_mse=bold_flag(test_mse, baseline_mse),
        bold_mape=(
            None
            if test_mape is None or baseline_mape is None
            else bold_flag(test_mape, baseline_mape)
        ),
        baseline_mse=baseline_mse,
        baseline_mape=baseline_mape,
        config=effective,
    )


# ---------------------------------------------------------------------------
# correlation grid (full data, no split)


@dataclass(frozen=True)
class CorrelationTable:
    classes: tuple[str, ...]
    inputs: tuple[str, ...]
    targets: tuple[str, ...]
    cells: dict  # (class, input, target) -> float | None
    counts: dict  # (class, input, target) -> int
    zeta: tuple[int, int]

    def get(self, knot_class, input_invariant, target) -> Optional[float]:
        return self.cells.get(
            (_value_of(knot_class), _value_of(input_invariant), _value_of(target))
        )

    def to_dict(self) -> dict:
        out: dict = {"zeta": list(self.zeta), "classes": {}}
        for cls in self.classes:
            grid: dict = {}
            for inp in self.inputs:
                grid[inp] = {
                    tgt: {
                        "r": self.cells[(cls, inp, tgt)],
                        "n": self.counts[(cls, inp, tgt)],
                    }
                    for tgt in self.targets
                }
            out["classes"][cls] = grid
        return out

    def render_text(self) -> str:
        lines = []
        width = max(len(t) for t in self.targets) + 2
        label_w = max(len(i) for i in self.inputs) + 2
        for cls in self.classes:
            lines.append(f"Pearson r for class {cls}")
            lines.append(
                " " * label_w + "".join(t.rjust(width) for t in self.targets)
            )
            for inp in self.inputs:
                row = [inp.ljust(label_w)]
                for tgt in self.targets:
                    r = self.cells[(cls, inp, tgt)]
                    row.append(("-" if r is None else f"{r:.2f}").rjust(width))
                lines.append("".join(row))
            lines.append("")
        return "\n".join(lines)


def _value_of(x) -> str:
    return x.value if isinstance(x, Enum) else str(x)


def run_correlation_table(
    ds: Dataset,
    inputs: tuple[InputInvariant, ...] = SCALAR_INPUTS,
    targets: tuple[TargetInvariant, ...] = ALL_TARGETS,
    classes: tuple[KnotClass, ...] = ALL_CLASSES,
    zeta: tuple[int, int] = DEFAULT_ZETA,
) -> CorrelationTable:
    """Full-dataset Pearson correlation per (class, scalar input, target).

    No train/test split is involved; cells where the correlation is
    undefined (fewer than two usable records, zero variance) are None.
    """
    cells: dict = {}
    counts: dict = {}
    for knot_class in classes:
        class_records = list(filter_class(ds, knot_class))
        for inp in inputs:
            if not inp.is_scalar:
                raise ValueError(f"{inp.value} is not a scalar invariant")
            kind = scalar_feature_kind(inp, zeta)
            feature: dict[str, float] = {}
            for rec in class_records:
                try:
                    feature[rec.name] = invariants.rescaled_value(rec.jones, kind)
                except DataError:
                    continue
            for tgt in targets:
                xs, ys = [], []
                for rec in class_records:
                    t = getattr(rec.hyperbolic, tgt.value)
                    if t is None or rec.name not in feature:
                        continue
                    xs.append(feature[rec.name])
                    ys.append(t)
                key = (knot_class.value, inp.value, tgt.value)
                counts[key] = len(xs)
                try:
                    cells[key] = pearson(xs, ys) if len(xs) >= 2 else None
                except DataError:
                    cells[key] = None
    return CorrelationTable(
        classes=tuple(c.value for c in classes),
        inputs=tuple(i.value for i in inputs),
        targets=tuple(t.value for t in targets),
        cells=cells,
        counts=counts,
        zeta=zeta,
    )


# ---------------------------------------------------------------------------
# error tables (Tables 3 and 4 layout)


ERROR_TABLE_ROWS = (
    "khovanov_vector",
    "jones_vector",
    "rescaled_det",
    "rescaled_mahler",
    "rescaled_zeta",
    "baseline",
)


@dataclass(frozen=True)
class ErrorTables:
    classes: tuple[str, ...]
    rows: tuple[str, ...]
    targets: tuple[str, ...]
    cells: dict  # (class, row, target) -> ResultCell | None
    split_seed: int

    def get(self, knot_class, row: str, target) -> Optional[ResultCell]:
        return self.cells.get((_value_of(knot_class), row, _value_of(target)))

    def to_dict(self) -> dict:
        out: dict = {"split_seed": self.split_seed, "classes": {}}
        for cls in self.classes:
            out["classes"][cls] = {
                row: {
                    tgt: (
                        None
                        if self.cells[(cls, row, tgt)] is None
                        else self.cells[(cls, row, tgt)].to_dict()
                    )
                    for tgt in self.targets
                }
                for row in self.rows
            }
        return out

    def _render(self, metric: str) -> str:
        lines = []
        width = max(len(t) for t in self.targets) + 2
        label_w = max(len(r) for r in self.rows) + 2
        title = "MAPE (%)" if metric == "mape" else "relative MSE"
        for cls in self.classes:
            lines.append(f"{title} for class {cls}")
            lines.append(" " * label_w + "".join(t.rjust(width) for t in self.targets))
            for row in self.rows:
                out_row = [row.ljust(label_w)]
                for tgt in self.targets:
                    cell = self.cells[(cls, row, tgt)]
                    out_row.append(_format_cell(cell, metric).rjust(width))
                lines.append("".join(out_row))
            lines.append("")
        return "\n".join(lines)

    def render_mape_text(self) -> str:
        """Percent errors at one decimal; bold-rule winners wrapped in *...*."""
        return self._render("mape")

    def render_relative_mse_text(self) -> str:
        """Baseline-relative MSE at two decimals; bold winners in *...*."""
        return self._render("relative_mse")


def _format_cell(cell: Optional[ResultCell], metric: str) -> str:
    if cell is None:
        return "-"
    if metric == "mape":
        if cell.mape is None:
            return "-"
        text = f"{cell.mape:.1f}"
        return f"*{text}*" if cell.bold_mape else text
    text = f"{cell.relative_mse:.2f}"
    return f"*{text}*" if cell.bold_mse else text


def _cell_config(
    row: str,
    target: TargetInvariant,
    knot_class: KnotClass,
    ann: AnnSpec,
    split_fraction: float,
    split_seed: int,
    cell_index: int,
    zeta: tuple[int, int],
) -> ExperimentConfig:
    # Each cell gets its own derived seeds so tables are reproducible cell by
    # cell whether they run serially or in parallel.
    seeds = np.random.SeedSequence([split_seed, cell_index]).generate_state(2)
    cell_split_seed, cell_train_seed = int(seeds[0]), int(seeds[1])
    if row == "baseline":
        model: ModelSpec = BaselineMeanSpec()
        input_invariant = None
    elif row in ("jones_vector", "khovanov_vector"):
        model = AnnSpec(
            hidden_layer_sizes=ann.hidden_layer_sizes,
            activation=ann.activation,
            train=TrainConfig(
                learning_rate=ann.train.learning_rate,
                batch_size=ann.train.batch_size,
                epochs=ann.train.epochs,
                momentum=ann.train.momentum,
                seed=cell_train_seed,
                input_standardize=ann.train.input_standardize,
            ),
        )
        input_invariant = InputInvariant(row)
    else:
        model = LinearRegressionSpec()
        input_invariant = InputInvariant(row)
    return ExperimentConfig(
        input=input_invariant,
        target=target,
        knot_class=knot_class,
        model=model,
        split_fraction=split_fraction,
        split_seed=cell_split_seed,
        zeta=zeta,
    )


def run_error_tables(
    ds: Dataset,
    classes: tuple[KnotClass, ...] = ALL_CLASSES,
    targets: tuple[TargetInvariant, ...] = ALL_TARGETS,
    ann: AnnSpec = AnnSpec(),
    split_fraction: float = 0.8,
    split_seed: int = 42,
    zeta: tuple[int, int] = DEFAULT_ZETA,
    max_workers: Optional[int] = None,
) -> ErrorTables:
    """The full error matrix: two ANN rows, three linear rows, one baseline row.

    A cell that cannot be computed (missing fields, degenerate split) is
    stored as None and logged; the rest of the table is unaffected.
    max_workers defaults to the KNOTSTAT_THREADS environment variable or 1.
    """
    if max_workers is None:
        max_workers = int(os.environ.get("KNOTSTAT_THREADS", "1") or "1")

    jobs = []
    for knot_class in classes:
        for row in ERROR_TABLE_ROWS:
            for target in targets:
                idx = len(jobs)
                cfg = _cell_config(
                    row, target, knot_class, ann, split_fraction, split_seed, idx, zeta
                )
                jobs.append(((knot_class.value, row, target.value), cfg))

    def run_cell(job) -> Optional[ResultCell]:
        key, cfg = job
        try:
            return run_experiment(ds, cfg)
        except KnotstatError as exc:
            logger.warning("cell %s failed: %s", key, exc)
            return None

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_cell, jobs))
    else:
        results = [run_cell(job) for job in jobs]

    cells = {key: result for (key, _), result in zip(jobs, results)}
    return ErrorTables(
        classes=tuple(c.value for c in classes),
        rows=ERROR_TABLE_ROWS,
        targets=tuple(t.value for t in targets),
        cells=cells,
        split_seed=split_seed,
    )


# ---------------------------------------------------------------------------
# compact formula distillation


@dataclass(frozen=True)
class FormulaFit:
    """target ~ a * ln(|J(e^(i*phase))| + b) - c, with its full-data MAPE (%)."""

    a: float
    b: float
    c: float
    phase: float
    mape: float

    def __post_init__(self) -> None:
        if self.b <= 0:
            raise ValueError("b must be positive (the log argument must stay positive)")

    def predict(self, moduli) -> np.ndarray:
        return self.a * np.log(np.asarray(moduli, dtype=float) + self.b) - self.c

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "phase": self.phase,
            "mape": self.mape,
        }


def golden_section_minimize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> tuple[float, list[float]]:
    """Golden-section search on [lo, hi]; returns (minimizer, best-so-far trace).

    The trace records the running minimum after each function evaluation,
    so it is non-increasing by construction.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = 1.0 - invphi

    trace: list[float] = []
    best = math.inf
    best_x = lo

    def probe(x: float) -> float:
        nonlocal best, best_x
        value = f(x)
        if value < best:
            best, best_x = value, x
        trace.append(best)
        return value

    a, b = lo, hi
    h = b - a
    c = a + invphi2 * h
    d = a + invphi * h
    yc, yd = probe(c), probe(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if yc < yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + invphi2 * h
            yc = probe(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + invphi * h
            yd = probe(d)
    return best_x, trace


def distill_formula(
    ds: Dataset,
    phase: float,
    target: TargetInvariant = TargetInvariant.VOL,
    b_range: tuple[float, float] = (1e-6, 100.0),
    tol: float = 1e-6,
) -> FormulaFit:
    """Fit target ~ a*ln(|J(e^(i*phase))| + b) - c over the whole dataset.

    The problem is one-dimensional in b: for fixed b, the optimal (a, c)
    are a closed-form linear fit of the target against ln(|J| + b). A
    golden-section search over b minimizes that profiled training MSE.
    """
    moduli, targets = [], []
    for rec in ds:
        t = getattr(rec.hyperbolic, target.value)
        if t is None or t <= 0:
            raise DataError(
                f"{rec.name}: target {target.value} must be present and positive"
            )
        moduli.append(abs(eval_poly(rec.jones, cmath.exp(1j * phase))))
        targets.append(t)
    x = np.asarray(moduli)
    y = np.asarray(targets)
    if len(x) < 3:
        raise DataError("distill_formula needs at least three records")

    def profiled_mse(b: float) -> float:
        _, train_mse = linear_fit(np.log(x + b), y)
        return train_mse

    b_best, _trace = golden_section_minimize(profiled_mse, *b_range, tol=tol)
    model, _ = linear_fit(np.log(x + b_best), y)
    fit = FormulaFit(
        a=model.slope,
        b=b_best,
        c=-model.intercept,
        phase=phase,
        mape=mape(model.predict(np.log(x + b_best)), y),
    )
    return fit


# ---------------------------------------------------------------------------
# root-of-unity phase sweep


@dataclass(frozen=True)
class PhaseRank:
    k: int
    n: int
    r: Optional[float]
    n_used: int
    n_dropped: int

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "r": self.r,
            "n_used": self.n_used,
            "n_dropped": self.n_dropped,
        }


def phase_sweep(
    ds: Dataset,
    phases: list[tuple[int, int]],
    target: TargetInvariant = TargetInvariant.VOL,
) -> list[PhaseRank]:
    """Rank roots of unity e^(2 pi i k/n) by how well the rescaled modulus
    of the Jones evaluation correlates with the target.

    Records where the rescaled value is undefined (zero modulus, degree
    below 2) or the target is absent are dropped per phase and counted.
    Result is sorted by descending correlation; undefined cells sort last.
    """
    if not phases:
        raise ValueError("phases must be non-empty")
    ranks = []
    for k, n in phases:
        kind = RootOfUnityEval(k, n)
        xs, ys = [], []
        dropped = 0
        for rec in ds:
            t = getattr(rec.hyperbolic, target.value)
            if t is None:
                dropped += 1
                continue
            try:
                xs.append(invariants.rescaled_value(rec.jones, kind))
            except DataError:
                dropped += 1
                continue
            ys.append(t)
        try:
            r = pearson(xs, ys) if len(xs) >= 2 else None
        except DataError:
            r = None
        ranks.append(PhaseRank(k=k, n=n, r=r, n_used=len(xs), n_dropped=dropped))
    return sorted(ranks, key=lambda p: -math.inf if p.r is None else -p.r)


# ---------------------------------------------------------------------------
# scatter export for external plotting


def export_scatter(
    ds: Dataset,
    input_invariant: InputInvariant,
    target: TargetInvariant,
    knot_class: KnotClass,
    path,
    zeta: tuple[int, int] = DEFAULT_ZETA,
) -> Path:
    """Write (x, y, name, alternating) rows plus the fitted line parameters
    in header comments; enough to redraw one regression panel externally."""
    if not input_invariant.is_scalar:
        raise ValueError("scatter export needs a scalar input invariant")
    records = list(filter_class(ds, knot_class))
    records, dropped = _drop_missing(records, target, need_khovanov=False)
    x, kept, d = _scalar_features(records, scalar_feature_kind(input_invariant, zeta))
    dropped += d
    if len(kept) < 2:
        raise DataError("not enough records to fit a scatter line")
    y = _target_values(kept, target)
    model, train_mse = linear_fit(x, y)

    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# knotstat scatter v1\n")
        fh.write(
            f"# input={input_invariant.value} target={target.value} "
            f"class={knot_class.value} zeta={zeta[0]}/{zeta[1]} "
            f"n={len(kept)} dropped={dropped}\n"
        )
        fh.write(
            f"# slope={model.slope!r} intercept={model.intercept!r} mse={train_mse!r}\n"
        )
        fh.write("x,y,name,alternating\n")
        for xi, yi, rec in zip(x, y, kept):
            fh.write(
                f"{float(xi)!r},{float(yi)!r},{rec.name},"
                f"{str(rec.alternating).lower()}\n"
            )
    return path
