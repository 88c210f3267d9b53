//! Synthetic per-client transaction generators with known ground truth.
//!
//! Genuine transactions arrive as a homogeneous Poisson process; fraud
//! arrivals follow a configured intensity model and are sampled by
//! Lewis–Shedler thinning against the closed-form maximum of the intensity
//! on the horizon. Everything is driven by a counter-based ChaCha8 stream
//! seeded explicitly, with one independent stream per client, so a
//! [`SimSpec`] maps to bit-identical output on every run.

use crate::intensity::IntensityModel;
use crate::timeline::{EventTimeline, TimelineError};
use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Calendar instant mapped to each client's day 0 in emitted CSVs.
pub fn default_base_date() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("genuine rate must be positive, got {0}")]
    BadGenuineRate(f64),

    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),

    #[error("fraud model is infeasible: {0:?}")]
    InfeasibleFraudModel(Vec<f64>),

    #[error("fraud model horizon {model} does not match the simulation horizon {sim}")]
    HorizonMismatch { model: f64, sim: f64 },

    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

/// Specification of one synthetic dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSpec {
    pub n_clients: usize,
    /// Genuine transactions per day (homogeneous).
    pub genuine_rate: f64,
    /// Ground-truth fraud arrival intensity.
    pub fraud_model: IntensityModel,
    pub horizon_days: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.genuine_rate > 0.0 && self.genuine_rate.is_finite()) {
            return Err(SimulationError::BadGenuineRate(self.genuine_rate));
        }
        if !(self.horizon_days > 0.0 && self.horizon_days.is_finite()) {
            return Err(SimulationError::BadHorizon(self.horizon_days));
        }
        if !self.fraud_model.is_feasible() {
            return Err(SimulationError::InfeasibleFraudModel(
                self.fraud_model.params(),
            ));
        }
        let rel = (self.fraud_model.horizon() - self.horizon_days).abs()
            / self.horizon_days.max(1.0);
        if rel > 1e-9 {
            return Err(SimulationError::HorizonMismatch {
                model: self.fraud_model.horizon(),
                sim: self.horizon_days,
            });
        }
        Ok(())
    }
}

/// Homogeneous Poisson event times on `(0, horizon]`: cumulative sums of
/// exponential waits. A zero rate yields no events.
pub fn simulate_hpp(rate: f64, horizon: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_hpp_with(rate, horizon, &mut rng)
}

/// As [`simulate_hpp`] with a caller-provided stream.
pub fn simulate_hpp_with<R: Rng>(rate: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    assert!(rate >= 0.0 && horizon > 0.0);
    if rate == 0.0 {
        return Vec::new();
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    times
}

/// Non-homogeneous Poisson event times on `(0, model.horizon]` by thinning.
///
/// Candidates arrive at the dominating constant rate
/// `λ_max = max_{[0,T]} λ(t)` (exact for polynomials of degree ≤ 2) and are
/// accepted with probability `λ(t)/λ_max`.
pub fn simulate_nhpp(model: &IntensityModel, seed: u64) -> Result<Vec<f64>, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_nhpp_with(model, &mut rng)
}

/// As [`simulate_nhpp`] with a caller-provided stream.
pub fn simulate_nhpp_with<R: Rng>(
    model: &IntensityModel,
    rng: &mut R,
) -> Result<Vec<f64>, SimulationError> {
    if !model.is_feasible() {
        return Err(SimulationError::InfeasibleFraudModel(model.params()));
    }
    let horizon = model.horizon();
    if horizon <= 0.0 || model.is_zero() {
        return Ok(Vec::new());
    }
    let lambda_max = model.intensity().max_on(horizon);
    if lambda_max <= 0.0 {
        return Ok(Vec::new());
    }
    let exp = Exp::new(lambda_max).expect("positive majorant");
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            break;
        }
        let accept = rng.random::<f64>() * lambda_max;
        if accept <= model.intensity().value_at(t).max(0.0) {
            times.push(t);
        }
    }
    Ok(times)
}

/// Ground-truth sidecar emitted next to a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimManifest {
    pub spec: SimSpec,
    pub base_date: DateTime<Utc>,
    /// Times in the dataset are days since each client's first
    /// transaction, matching what ingestion reconstructs.
    pub time_origin: String,
}

/// Generates one timeline per client: genuine HPP events (label 0) merged
/// with fraud arrivals from the ground-truth model (label 1).
///
/// Each client draws from its own deterministic ChaCha stream, so clients
/// are independent and the whole dataset is reproducible from the seed.
/// Timelines are shifted to start at their first transaction (the same
/// normalization ingestion applies), which keeps CSV round-trips exact.
pub fn simulate_dataset(spec: &SimSpec) -> Result<Vec<EventTimeline>, SimulationError> {
    spec.validate()?;
    let mut timelines = Vec::with_capacity(spec.n_clients);
    for client in 0..spec.n_clients {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(client as u64 + 1);
        let genuine = simulate_hpp_with(spec.genuine_rate, spec.horizon_days, &mut rng);
        let fraud = simulate_nhpp_with(&spec.fraud_model, &mut rng)?;

        let mut events: Vec<(f64, u8)> = genuine.into_iter().map(|t| (t, 0)).collect();
        events.extend(fraud.into_iter().map(|t| (t, 1)));
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        if let Some(&(first, _)) = events.first() {
            for e in &mut events {
                e.0 -= first;
            }
        }
        let client_id = format!("client_{client:05}");
        timelines.push(EventTimeline::from_events(client_id, events)?);
    }
    Ok(timelines)
}

/// Writes `dataset.csv` (ingestion schema) and returns the manifest that
/// should be stored alongside it.
pub fn emit_dataset<W: Write>(
    spec: &SimSpec,
    timelines: &[EventTimeline],
    base: DateTime<Utc>,
    csv_writer: W,
) -> Result<SimManifest, SimulationError> {
    crate::timeline::write_csv(timelines, base, csv_writer)?;
    Ok(SimManifest {
        spec: spec.clone(),
        base_date: base,
        time_origin: "days since each client's first transaction".into(),
    })
}
