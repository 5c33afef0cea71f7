"""Python bindings for the penalearn learn-to-optimize engine."""

from ._penalearn import (
    AdamConfig,
    BenchAggregates,
    BenchReport,
    ConfigError,
    DimensionError,
    Error,
    InputError,
    Mlp,
    OracleConfig,
    OracleFailedError,
    OracleSolution,
    ParseError,
    PenaltyConfig,
    PenaltyMode,
    Problem,
    RegistryError,
    TrainConfig,
    TrainingDivergedError,
    UsageError,
    benchmark,
    grid_scan,
    mac_count,
    make_problem,
    make_quadratic_problem,
    max_violation,
    objective,
    oracle_solve,
    problem_names,
    run_cli,
    sample_params,
    total_loss,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
