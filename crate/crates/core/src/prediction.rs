//! Fraud-probability scoring of test transactions.
//!
//! A transaction in progress at time `T_δ`, with the fraud history known up
//! to the previous transaction time `T`, is fraudulent with probability
//! `1 - exp(-(A(T_δ) - A(T)))`. Static models fit once on the training
//! segment and score the whole test segment; dynamic models refit on a
//! window that advances one transaction at a time. All transactions,
//! genuine and fraudulent, advance the clock; only fraud times enter
//! estimation.

use crate::estimation::{estimate_hpp, estimate_nhpp};
use crate::intensity::{Family, IntensityModel};
use crate::timeline::EventTimeline;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictionError {
    #[error("transaction gap is negative: T_delta {t_delta} < T_prev {t_prev}")]
    NegativeGap { t_prev: f64, t_delta: f64 },

    #[error("times must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("test segment starts at {test_start} before the training horizon {train_horizon}")]
    TestBeforeTrain { test_start: f64, train_horizon: f64 },

    #[error("train and test belong to different clients: {train:?} vs {test:?}")]
    ClientMismatch { train: String, test: String },

    #[error("split index {split_index} out of range for {len} events")]
    BadSplitIndex { split_index: usize, len: usize },

    #[error("naive baseline needs a nonempty training segment")]
    EmptyTrain,

    #[error("score {score} at position {position} outside [0, 1]")]
    ScoreOutOfRange { position: usize, score: f64 },

    #[error("{scores} scores vs {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
}

/// The seven scoring configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelName {
    HomoStatic,
    HomoDynamic,
    LinearStatic,
    LinearDynamic,
    QuadraticStatic,
    QuadraticDynamic,
    NaiveStatic,
}

impl ModelName {
    pub const ALL: [ModelName; 7] = [
        ModelName::HomoStatic,
        ModelName::HomoDynamic,
        ModelName::LinearStatic,
        ModelName::LinearDynamic,
        ModelName::QuadraticStatic,
        ModelName::QuadraticDynamic,
        ModelName::NaiveStatic,
    ];

    /// The intensity family behind the model; `None` for the baseline.
    pub fn family(self) -> Option<Family> {
        match self {
            ModelName::HomoStatic | ModelName::HomoDynamic => Some(Family::Constant),
            ModelName::LinearStatic | ModelName::LinearDynamic => Some(Family::Linear),
            ModelName::QuadraticStatic | ModelName::QuadraticDynamic => Some(Family::Quadratic),
            ModelName::NaiveStatic => None,
        }
    }

    pub fn is_dynamic(self) -> bool {
        matches!(
            self,
            ModelName::HomoDynamic | ModelName::LinearDynamic | ModelName::QuadraticDynamic
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::HomoStatic => "HomoStatic",
            ModelName::HomoDynamic => "HomoDynamic",
            ModelName::LinearStatic => "LinearStatic",
            ModelName::LinearDynamic => "LinearDynamic",
            ModelName::QuadraticStatic => "QuadraticStatic",
            ModelName::QuadraticDynamic => "QuadraticDynamic",
            ModelName::NaiveStatic => "NaiveStatic",
        }
    }

    fn static_for(family: Family) -> ModelName {
        match family {
            Family::Constant => ModelName::HomoStatic,
            Family::Linear => ModelName::LinearStatic,
            Family::Quadratic => ModelName::QuadraticStatic,
        }
    }

    fn dynamic_for(family: Family) -> ModelName {
        match family {
            Family::Constant => ModelName::HomoDynamic,
            Family::Linear => ModelName::LinearDynamic,
            Family::Quadratic => ModelName::QuadraticDynamic,
        }
    }
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelName::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown model {s:?}"))
    }
}

/// Rolling-window policy for dynamic prediction. The window always begins
/// as the training set; `Expanding` keeps every revealed transaction,
/// `Fixed(n)` keeps only the last `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowPolicy {
    Expanding,
    Fixed(usize),
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Expanding
    }
}

impl std::fmt::Display for WindowPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowPolicy::Expanding => f.write_str("expanding"),
            WindowPolicy::Fixed(n) => write!(f, "fixed:{n}"),
        }
    }
}

impl std::str::FromStr for WindowPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("expanding") {
            return Ok(WindowPolicy::Expanding);
        }
        if let Some(n) = s.strip_prefix("fixed:") {
            let n: usize = n
                .parse()
                .map_err(|_| format!("bad fixed window size in {s:?}"))?;
            if n == 0 {
                return Err("fixed window size must be at least 1".into());
            }
            return Ok(WindowPolicy::Fixed(n));
        }
        Err(format!("unknown window policy {s:?} (expanding | fixed:N)"))
    }
}

/// Per-transaction predicted fraud probabilities over a test segment,
/// aligned with the true labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    client_id: String,
    model: ModelName,
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoreSeries {
    pub fn new(
        client_id: impl Into<String>,
        model: ModelName,
        scores: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self, PredictionError> {
        if scores.len() != labels.len() {
            return Err(PredictionError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if let Some((position, &score)) = scores
            .iter()
            .enumerate()
            .find(|(_, &s)| !(0.0..=1.0).contains(&s))
        {
            return Err(PredictionError::ScoreOutOfRange { position, score });
        }
        Ok(Self {
            client_id: client_id.into(),
            model,
            scores,
            labels,
        })
    }

    pub fn client_id(&self) -> &str {
        &self.client_id
    }

    pub fn model(&self) -> ModelName {
        self.model
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Writes series as CSV rows `client_id,model_name,position,score,label`.
pub fn write_scores_csv<W: Write>(series: &[ScoreSeries], mut w: W) -> std::io::Result<()> {
    writeln!(w, "client_id,model_name,position,score,label")?;
    for s in series {
        for (i, (&score, &label)) in s.scores().iter().zip(s.labels()).enumerate() {
            writeln!(w, "{},{},{},{},{}", s.client_id(), s.model(), i, score, label)?;
        }
    }
    Ok(())
}

/// Probability that a fraud occurs by the transaction at `t_delta`, given
/// history up to `t_prev`: `1 - exp(-(A(t_delta) - A(t_prev)))`.
///
/// Extension beyond the model horizon is deliberate here — scores are for
/// future transactions. A negative compensator difference can then occur
/// for infeasible extrapolations (e.g. a negative slope beyond `T`); it is
/// clamped to zero with a diagnostic, keeping the result in `[0, 1]`.
/// Zero-convention models score exactly 0.
pub fn fraud_probability(
    model: &IntensityModel,
    t_prev: f64,
    t_delta: f64,
) -> Result<f64, PredictionError> {
    if t_prev < 0.0 {
        return Err(PredictionError::NegativeTime(t_prev));
    }
    if t_delta < t_prev {
        return Err(PredictionError::NegativeGap { t_prev, t_delta });
    }
    if model.is_zero() {
        return Ok(0.0);
    }
    let a_prev = model
        .compensator_extended(t_prev)
        .expect("t_prev validated nonnegative");
    let a_delta = model
        .compensator_extended(t_delta)
        .expect("t_delta validated nonnegative");
    let mut diff = a_delta - a_prev;
    if diff < 0.0 {
        log::debug!(
            "negative compensator difference {diff} extrapolating {:?} to [{t_prev}, {t_delta}]; clamping to 0",
            model.params()
        );
        diff = 0.0;
    }
    Ok(-(-diff).exp_m1())
}

/// Scores the whole test segment with one fitted model. The clock starts
/// at the last training transaction; every test transaction, fraudulent or
/// not, advances it.
pub fn predict_static(
    fit: &crate::estimation::FitResult,
    train: &EventTimeline,
    test: &EventTimeline,
) -> Result<ScoreSeries, PredictionError> {
    if train.client_id() != test.client_id() {
        return Err(PredictionError::ClientMismatch {
            train: train.client_id().to_string(),
            test: test.client_id().to_string(),
        });
    }
    let t0 = train.times().last().copied().unwrap_or(train.horizon());
    if let Some(&first) = test.times().first() {
        if first < t0 {
            return Err(PredictionError::TestBeforeTrain {
                test_start: first,
                train_horizon: t0,
            });
        }
    }
    let mut scores = Vec::with_capacity(test.len());
    let mut prev = t0;
    for &t in test.times() {
        scores.push(fraud_probability(&fit.model, prev, t)?);
        prev = t;
    }
    ScoreSeries::new(
        test.client_id(),
        ModelName::static_for(fit.model.family()),
        scores,
        test.labels().to_vec(),
    )
}

/// Rolling-window scoring: for each test position the family is refit on
/// the window of preceding transactions and scores the next gap.
///
/// The window starts as the training segment (`split_index` events) and
/// advances one transaction per step. With a fixed-width window the slice
/// is shifted to its own origin before fitting, so the constraint horizon
/// is the window's span; the expanding default keeps global coordinates.
/// A failed per-step fit degrades to score 0 with a diagnostic instead of
/// aborting the client.
pub fn predict_dynamic(
    family: Family,
    full: &EventTimeline,
    split_index: usize,
    window: WindowPolicy,
) -> Result<ScoreSeries, PredictionError> {
    let n = full.len();
    if split_index < 1 || split_index >= n {
        return Err(PredictionError::BadSplitIndex {
            split_index,
            len: n,
        });
    }
    let times = full.times();
    let labels = full.labels();
    let mut scores = Vec::with_capacity(n - split_index);

    for j in split_index..n {
        let lo = match window {
            WindowPolicy::Expanding => 0,
            WindowPolicy::Fixed(w) => j.saturating_sub(w),
        };
        let offset = if lo == 0 { 0.0 } else { times[lo] };
        let horizon = times[j - 1] - offset;
        let window_times: Vec<f64> = times[lo..j].iter().map(|&t| t - offset).collect();
        let window_labels = labels[lo..j].to_vec();

        let score = EventTimeline::new(full.client_id(), window_times, window_labels, horizon)
            .map_err(|e| e.to_string())
            .and_then(|window_tl| {
                let fit = match family {
                    Family::Constant => Ok(estimate_hpp(&window_tl)),
                    _ => estimate_nhpp(family, &window_tl).map_err(|e| e.to_string()),
                }?;
                fraud_probability(&fit.model, times[j - 1] - offset, times[j] - offset)
                    .map_err(|e| e.to_string())
            })
            .unwrap_or_else(|e| {
                log::debug!(
                    "dynamic step {j} for client {} degraded to score 0: {e}",
                    full.client_id()
                );
                0.0
            });
        scores.push(score);
    }

    ScoreSeries::new(
        full.client_id(),
        ModelName::dynamic_for(family),
        scores,
        labels[split_index..].to_vec(),
    )
}

/// Baseline: every test transaction scores the training-set fraud
/// proportion. Constant scores make this a random classifier under
/// ranking metrics.
pub fn predict_naive(
    train: &EventTimeline,
    test: &EventTimeline,
) -> Result<ScoreSeries, PredictionError> {
    if train.is_empty() {
        return Err(PredictionError::EmptyTrain);
    }
    let p = train.fraud_count() as f64 / train.len() as f64;
    ScoreSeries::new(
        test.client_id(),
        ModelName::NaiveStatic,
        vec![p; test.len()],
        test.labels().to_vec(),
    )
}
