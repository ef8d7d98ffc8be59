//! Baselines, the 1-D threshold oracle and the cross-validation driver.

mod bayes;
mod experiment;
mod oracle;

pub use bayes::{naive_bayes_fit, naive_bayes_fit_with, GaussianNb, VARIANCE_FLOOR};
pub use experiment::{
    run_experiment, run_experiment_on, AggregateRow, ClassifierKind, DatasetSpec,
    ExperimentResults, ExperimentSpec, MeanStd, RawRecord, RAW_HEADER, TABLE_HEADER,
};
pub use oracle::{
    threshold_oracle, threshold_oracle_analytic, Objective, OracleResult, ThresholdRule, ToySpec,
};
