//! Per-client fraud scoring with Poisson point-process intensity models.
//!
//! Fraudulent transactions for one client are modelled as events of a Poisson
//! process whose intensity is either constant (homogeneous) or a linear or
//! quadratic function of time (non-homogeneous). The library covers the full
//! workflow:
//!
//! - [`timeline`]: per-client transaction streams, CSV ingestion and
//!   train/test splitting,
//! - [`intensity`]: the intensity families, their closed-form compensators
//!   and the nonnegativity constraints,
//! - [`estimation`]: maximum-likelihood fitting (waiting-time estimator for
//!   the homogeneous case, constrained log-likelihood maximisation
//!   otherwise),
//! - [`prediction`]: fraud-probability scoring of test transactions under
//!   static and rolling-window regimes plus a naive baseline,
//! - [`evaluation`]: ROC-AUC / Average Precision metrics, imbalance grouping
//!   and report aggregation,
//! - [`simulation`]: synthetic datasets with known ground truth,
//! - [`experiment`]: the end-to-end grouped backtest used by the CLI.

pub mod estimation;
pub mod evaluation;
pub mod experiment;
pub mod intensity;
mod optim;
pub mod prediction;
pub mod simulation;
pub mod timeline;

pub use estimation::{estimate_hpp, estimate_nhpp, log_likelihood, FitResult};
pub use evaluation::{
    average_precision, group_clients, roc_auc, summarize, EvaluationReport, ImbalanceGroup,
};
pub use intensity::{feasible, feasible_region_grid, Family, Intensity, IntensityModel};
pub use prediction::{
    fraud_probability, predict_dynamic, predict_naive, predict_static, ModelName, ScoreSeries,
    WindowPolicy,
};
pub use simulation::{simulate_dataset, simulate_hpp, simulate_nhpp, SimSpec};
pub use timeline::{ingest_csv, CsvSchema, EventTimeline, SplitSpec};
