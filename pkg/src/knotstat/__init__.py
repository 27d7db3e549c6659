"""knotstat: statistics linking Jones/Khovanov polynomial data to hyperbolic
knot invariants.

The pipeline: ingest knot records (:mod:`knotstat.dataset`), derive scalar
invariants from the Jones polynomial (:mod:`knotstat.invariants`) or
vectorize the polynomial coefficients (:mod:`knotstat.vectorize`), then
relate them to hyperbolic targets by closed-form regression
(:mod:`knotstat.stats`), from-scratch neural networks (:mod:`knotstat.mlp`)
or a compact logarithmic formula (:mod:`knotstat.experiments`).
"""

__version__ = "0.1.0"

from .dataset import (
    Dataset,
    HyperbolicInvariants,
    KnotClass,
    KnotRecord,
    check_khovanov_alternating,
    filter_class,
    parse_dataset,
    serialize_dataset,
)
from .errors import DataError, KnotstatError, NumericError, SchemaError
from .experiments import (
    AnnSpec,
    BaselineMeanSpec,
    ExperimentConfig,
    FormulaFit,
    InputInvariant,
    LinearRegressionSpec,
    ResultCell,
    TargetInvariant,
    baseline_mean,
    distill_formula,
    export_scatter,
    phase_sweep,
    run_correlation_table,
    run_error_tables,
    run_experiment,
    split,
)
from .invariants import (
    degree,
    determinant,
    eval_poly,
    mahler_jensen_oracle,
    mahler_measure,
    rescale,
    root_of_unity_modulus,
)
from .mlp import (
    Activation,
    MLPRegressor,
    Network,
    NetworkSpec,
    TrainConfig,
    backprop,
    forward,
    grad_check,
    init_network,
    param_count,
    train,
)
from .polynomials import LaurentPoly1, LaurentPoly2
from .stats import (
    LinearModel,
    MetricReport,
    MultilinearModel,
    linear_fit,
    mape,
    mse,
    multilinear_fit,
    pearson,
    sample_stats,
    two_cluster_fit,
)
from .vectorize import (
    JonesVectorizer,
    KhovanovVectorizer,
    vectorize_jones,
    vectorize_khovanov,
)
