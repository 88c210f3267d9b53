//! Maximum-likelihood estimation of intensity parameters.
//!
//! For the homogeneous family the estimator is the reciprocal mean waiting
//! time between fraud events, `λ̂ = 1/S̄ = k/τ_k`. For the linear and
//! quadratic families the log-likelihood
//!
//! ```text
//! l(θ) = -∫₀ᵀ λ_θ(s) ds + Σ_i log λ_θ(τ_i)
//! ```
//!
//! is maximised over the feasibility constraints by multi-start
//! Nelder–Mead with a quadratic exterior penalty, followed by projection
//! of the final iterate onto the constraint set.
//!
//! Training segments with no fraud events take the λ ≡ 0 convention: all
//! parameters zero and a flagged [`FitResult`], which downstream scoring
//! turns into identically-zero fraud probabilities.

use crate::intensity::{feasible, Family, Intensity, IntensityError, IntensityModel};
use crate::optim::{latin_hypercube, NelderMead};
use crate::timeline::EventTimeline;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor inside `log λ(τ_i)`; boundary iterates can make λ(τ_i) exactly 0.
pub const LOG_CLAMP: f64 = 1e-12;

/// Coefficient of the quadratic exterior penalty on constraint violations.
pub const PENALTY_COEF: f64 = 1e6;

/// Convergence tolerance on the simplex diameter.
const SIMPLEX_TOL: f64 = 1e-8;

/// Iteration budget per start.
const MAX_ITERS_PER_START: usize = 5000;

/// Number of optimizer starts (anchors plus Latin-hypercube draws).
const N_STARTS: usize = 16;

/// Fixed stream for the Latin-hypercube start generator, so fits are
/// deterministic functions of their inputs.
const LHS_SEED: u64 = 0x7f4a_7c15_9e37_79b9;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("estimate_nhpp expects the linear or quadratic family, got {0}")]
    InvalidFamily(Family),

    #[error("parameters {params:?} infeasible for {family} at horizon {horizon}")]
    Infeasible {
        family: Family,
        params: Vec<f64>,
        horizon: f64,
    },

    #[error("fraud time {t} outside [0, {horizon}]")]
    FraudTimeOutsideHorizon { t: f64, horizon: f64 },

    #[error(transparent)]
    Intensity(#[from] IntensityError),
}

/// Extra estimator output that is not part of the fitted model.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// The censored-interval constant-rate estimator k/T, reported
    /// alongside the waiting-time estimator k/τ_k which is the primary.
    pub censored_rate: Option<f64>,
    /// True when the waiting-time estimator was undefined (fraud only at
    /// time 0, or an empty horizon) and a fallback was used.
    pub degenerate: bool,
}

/// Outcome of fitting one intensity family to one training segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: IntensityModel,
    /// Achieved log-likelihood; `None` under the zero convention, where
    /// the likelihood is undefined.
    pub log_likelihood: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// True when the training segment had no fraud events and λ ≡ 0 was
    /// imposed.
    pub zero_convention: bool,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    fn zero(family: Family, horizon: f64) -> Self {
        FitResult {
            model: IntensityModel::zero(family, horizon),
            log_likelihood: None,
            converged: true,
            iterations: 0,
            zero_convention: true,
            diagnostics: FitDiagnostics::default(),
        }
    }
}

/// JSON row for one client's fit: the serialised form of [`FitResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub client_id: String,
    pub family: Family,
    pub params: Vec<f64>,
    pub log_likelihood: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub zero_convention: bool,
}

impl FitRecord {
    pub fn new(client_id: impl Into<String>, fit: &FitResult) -> Self {
        FitRecord {
            client_id: client_id.into(),
            family: fit.model.family(),
            params: fit.model.params(),
            log_likelihood: fit.log_likelihood,
            converged: fit.converged,
            iterations: fit.iterations,
            zero_convention: fit.zero_convention,
        }
    }
}

/// Waiting-time estimator for the homogeneous family.
///
/// With fraud times τ₁ < … < τ_k the waits are S₁ = τ₁,
/// S_i = τ_i − τ_{i−1}, and λ̂ = 1/S̄ = k/τ_k. No fraud events fall back
/// to the zero convention. A fraud history whose last event sits at time 0
/// leaves S̄ = 0; the estimator then degrades to k/horizon and the result
/// is flagged degenerate.
pub fn estimate_hpp(train: &EventTimeline) -> FitResult {
    let fraud = train.fraud_times();
    let k = fraud.len();
    let horizon = train.horizon();
    if k == 0 {
        return FitResult::zero(Family::Constant, horizon);
    }

    let tau_last = *fraud.last().expect("k >= 1");
    let (rate, degenerate) = if tau_last > 0.0 {
        (k as f64 / tau_last, false)
    } else if horizon > 0.0 {
        (k as f64 / horizon, true)
    } else {
        (0.0, true)
    };

    let censored_rate = (horizon > 0.0).then(|| k as f64 / horizon);
    let model = IntensityModel::new(Intensity::Constant { rate }, horizon)
        .unwrap_or_else(|_| IntensityModel::zero(Family::Constant, horizon));
    let log_likelihood = (horizon > 0.0)
        .then(|| log_likelihood_clamped(model.intensity(), &fraud, horizon));
    FitResult {
        model,
        log_likelihood,
        converged: true,
        iterations: 0,
        zero_convention: false,
        diagnostics: FitDiagnostics {
            censored_rate,
            degenerate,
        },
    }
}

/// Log-likelihood `-A(T) + Σ log λ(τ_i)` (logs floored at [`LOG_CLAMP`]).
///
/// Fails when the parameters are infeasible for the family at horizon `T`
/// or any fraud time falls outside `[0, T]`.
pub fn log_likelihood(
    family: Family,
    params: &[f64],
    fraud_times: &[f64],
    horizon: f64,
) -> Result<f64, EstimationError> {
    let intensity = Intensity::from_params(family, params)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(IntensityError::InvalidHorizon(horizon).into());
    }
    if !feasible(family, params, horizon) {
        return Err(EstimationError::Infeasible {
            family,
            params: params.to_vec(),
            horizon,
        });
    }
    if let Some(&t) = fraud_times.iter().find(|&&t| t < 0.0 || t > horizon) {
        return Err(EstimationError::FraudTimeOutsideHorizon { t, horizon });
    }
    Ok(log_likelihood_clamped(&intensity, fraud_times, horizon))
}

fn log_likelihood_clamped(intensity: &Intensity, fraud_times: &[f64], horizon: f64) -> f64 {
    let log_sum: f64 = fraud_times
        .iter()
        .map(|&t| intensity.value_at(t).max(LOG_CLAMP).ln())
        .sum();
    -intensity.integral_to(horizon) + log_sum
}

/// Constraint shortfalls (positive = violated) of the family at `horizon`.
fn violations(family: Family, params: &[f64], horizon: f64) -> Vec<f64> {
    let mut v = vec![(-params[0]).max(0.0)];
    match family {
        Family::Constant => {}
        Family::Linear => v.push((-(params[1] + params[0] / horizon)).max(0.0)),
        Family::Quadratic => {
            v.push((-(params[1] + params[0] / horizon)).max(0.0));
            v.push((-params[2]).max(0.0));
        }
    }
    v
}

/// Clamps a point onto the constraint set: nonnegative coefficients first,
/// then the slope floor b ≥ -a/T. Feasible points are left unchanged.
fn project(family: Family, params: &[f64], horizon: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    p[0] = p[0].max(0.0);
    if family == Family::Quadratic {
        p[2] = p[2].max(0.0);
    }
    if family != Family::Constant {
        p[1] = p[1].max(-p[0] / horizon);
    }
    p
}

/// Constrained MLE for the linear or quadratic family.
///
/// Multi-start penalized Nelder–Mead: anchor starts (the waiting-time and
/// censored-rate constant points embedded in the family, boundary points,
/// and for the quadratic family the fitted linear optimum) are topped up
/// to [`N_STARTS`] with Latin-hypercube draws over a box scaled by the
/// event count. Every start's final iterate is projected onto the
/// constraint set; the winner is the candidate with the best
/// log-likelihood, ties broken by start index. Starts themselves remain
/// candidates, so the achieved optimum never falls below the best anchor.
pub fn estimate_nhpp(family: Family, train: &EventTimeline) -> Result<FitResult, EstimationError> {
    if family == Family::Constant {
        return Err(EstimationError::InvalidFamily(family));
    }
    let fraud = train.fraud_times();
    let horizon = train.horizon();
    if fraud.is_empty() {
        return Ok(FitResult::zero(family, horizon));
    }
    if horizon <= 0.0 {
        // All events at the origin: no exposure to integrate over.
        let mut fit = FitResult::zero(family, horizon);
        fit.zero_convention = false;
        fit.converged = false;
        fit.log_likelihood = None;
        fit.diagnostics.degenerate = true;
        return Ok(fit);
    }

    let k = fraud.len() as f64;
    let tau_last = *fraud.last().expect("nonempty");
    let wait_rate = if tau_last > 0.0 { k / tau_last } else { k / horizon };
    let censored_rate = k / horizon;

    // Start box: a up to 4k/T, with the analogous count-matched scales for
    // the slope and curvature terms.
    let a_hi = 4.0 * k / horizon;
    let b_hi = 4.0 * 2.0 * k / (horizon * horizon);
    let c_hi = 4.0 * 3.0 * k / (horizon * horizon * horizon);
    let bounds: Vec<(f64, f64)> = match family {
        Family::Linear => vec![(0.0, a_hi), (-b_hi, b_hi)],
        Family::Quadratic => vec![(0.0, a_hi), (-b_hi, b_hi), (0.0, c_hi)],
        Family::Constant => unreachable!(),
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(N_STARTS);
    let embed = |a: f64, b: f64, c: f64| -> Vec<f64> {
        match family {
            Family::Linear => vec![a, b],
            Family::Quadratic => vec![a, b, c],
            Family::Constant => unreachable!(),
        }
    };
    starts.push(embed(wait_rate, 0.0, 0.0));
    starts.push(embed(censored_rate, 0.0, 0.0));
    // Constraint-boundary starts: the b = -a/T edge and the rising a = 0 edge.
    starts.push(embed(
        2.0 * censored_rate,
        -2.0 * censored_rate / horizon,
        0.0,
    ));
    starts.push(embed(0.0, 2.0 * k / (horizon * horizon), 0.0));
    if family == Family::Quadratic {
        starts.push(embed(0.0, 0.0, 3.0 * k / (horizon * horizon * horizon)));
        // Embed the fitted linear optimum so the quadratic fit never falls
        // below it (the families are nested).
        if let Ok(linear_fit) = estimate_nhpp(Family::Linear, train) {
            let p = linear_fit.model.params();
            starts.push(embed(p[0], p[1], 0.0));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LHS_SEED);
    for draw in latin_hypercube(&mut rng, N_STARTS - starts.len(), &bounds) {
        starts.push(draw);
    }
    // Every start is feasible after projection.
    for s in &mut starts {
        *s = project(family, s, horizon);
    }

    let objective = |params: &[f64]| -> f64 {
        if params.iter().any(|p| !p.is_finite()) {
            return f64::INFINITY;
        }
        let intensity = match Intensity::from_params(family, params) {
            Ok(i) => i,
            Err(_) => return f64::INFINITY,
        };
        let penalty: f64 = violations(family, params, horizon)
            .iter()
            .map(|v| v * v)
            .sum();
        -log_likelihood_clamped(&intensity, &fraud, horizon) + PENALTY_COEF * penalty
    };
    let true_ll = |params: &[f64]| -> f64 {
        let intensity = Intensity::from_params(family, params).expect("projected params");
        log_likelihood_clamped(&intensity, &fraud, horizon)
    };

    let nm = NelderMead {
        tol: SIMPLEX_TOL,
        max_iters: MAX_ITERS_PER_START,
    };
    let steps: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo)).collect();

    let mut best: Option<(f64, Vec<f64>, usize, bool)> = None;
    for start in &starts {
        let outcome = nm.minimize(objective, start, &steps);
        let projected = project(family, &outcome.x, horizon);
        let mut ll = true_ll(&projected);
        let mut point = projected;
        // The start itself stays a candidate; projection of a wandering
        // iterate must not lose ground against it.
        let ll_start = true_ll(start);
        if ll_start > ll {
            ll = ll_start;
            point = start.clone();
        }
        let better = match &best {
            None => true,
            Some((best_ll, ..)) => ll > *best_ll,
        };
        if better {
            best = Some((ll, point, outcome.iterations, outcome.converged));
        }
    }

    let (ll, params, iterations, converged) = best.expect("at least one start");
    debug_assert!(feasible(family, &params, horizon));
    let model = IntensityModel::new(Intensity::from_params(family, &params)?, horizon)?;
    Ok(FitResult {
        model,
        log_likelihood: Some(ll),
        converged,
        iterations,
        zero_convention: false,
        diagnostics: FitDiagnostics {
            censored_rate: Some(censored_rate),
            degenerate: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::EventTimeline;

    fn timeline(times: &[f64], labels: &[u8], horizon: f64) -> EventTimeline {
        EventTimeline::new("t", times.to_vec(), labels.to_vec(), horizon).unwrap()
    }

    fn all_fraud(times: &[f64]) -> EventTimeline {
        timeline(times, &vec![1; times.len()], *times.last().unwrap())
    }

    #[test]
    fn hpp_unit_waits() {
        let fit = estimate_hpp(&all_fraud(&[1.0, 2.0, 3.0]));
        assert_eq!(fit.model.params(), vec![1.0]);
        assert!(!fit.zero_convention);
        assert!(fit.converged);
    }

    #[test]
    fn hpp_mean_wait_oracle() {
        // Waits 2, 2, 4: mean 8/3, estimator 3/8.
        let fraud = [2.0, 4.0, 8.0];
        let fit = estimate_hpp(&all_fraud(&fraud));
        let mut waits = vec![fraud[0]];
        waits.extend(fraud.windows(2).map(|w| w[1] - w[0]));
        let mean_wait: f64 = waits.iter().sum::<f64>() / waits.len() as f64;
        assert_eq!(fit.model.params()[0], 1.0 / mean_wait);
        assert_eq!(fit.model.params()[0], 0.375);
    }

    #[test]
    fn hpp_no_fraud_is_zero_convention() {
        let fit = estimate_hpp(&timeline(&[0.0, 1.0, 2.0], &[0, 0, 0], 2.0));
        assert!(fit.zero_convention);
        assert_eq!(fit.model.params(), vec![0.0]);
        assert!(fit.log_likelihood.is_none());
    }

    #[test]
    fn hpp_reports_censored_rate_diagnostic() {
        let fit = estimate_hpp(&timeline(&[1.0, 2.0, 4.0], &[1, 1, 0], 4.0));
        // Waiting-time estimator 2/2 = 1, censored-interval estimator 2/4.
        assert_eq!(fit.model.params(), vec![1.0]);
        assert_eq!(fit.diagnostics.censored_rate, Some(0.5));
    }

    #[test]
    fn hpp_single_fraud_at_origin_falls_back() {
        let fit = estimate_hpp(&timeline(&[0.0, 5.0], &[1, 0], 5.0));
        assert!(fit.diagnostics.degenerate);
        assert_eq!(fit.model.params(), vec![1.0 / 5.0]);
    }

    #[test]
    fn hpp_scale_equivariance_is_exact() {
        let fraud = [0.7, 1.9, 3.4, 7.3];
        let base = estimate_hpp(&all_fraud(&fraud)).model.params()[0];
        for s in [2.0f64, 0.5, 1024.0] {
            let scaled: Vec<f64> = fraud.iter().map(|t| t * s).collect();
            let fit = estimate_hpp(&all_fraud(&scaled)).model.params()[0];
            assert_eq!(fit, base / s, "power-of-two scaling must be bit exact");
        }
        let s = 3.7;
        let scaled: Vec<f64> = fraud.iter().map(|t| t * s).collect();
        let fit = estimate_hpp(&all_fraud(&scaled)).model.params()[0];
        assert!((fit - base / s).abs() <= 1e-12 * base);
    }

    #[test]
    fn log_likelihood_constant_single_event() {
        let ll = log_likelihood(Family::Constant, &[1.0], &[1.0], 2.0).unwrap();
        assert_eq!(ll, -2.0);
    }

    #[test]
    fn log_likelihood_empty_sum() {
        let ll = log_likelihood(Family::Constant, &[1.0], &[], 2.0).unwrap();
        assert_eq!(ll, -2.0);
    }

    #[test]
    fn log_likelihood_family_embedding() {
        let fraud = [0.4, 1.1, 1.9];
        let constant = log_likelihood(Family::Constant, &[1.0], &fraud, 2.0).unwrap();
        let linear = log_likelihood(Family::Linear, &[1.0, 0.0], &fraud, 2.0).unwrap();
        let quadratic = log_likelihood(Family::Quadratic, &[1.0, 0.0, 0.0], &fraud, 2.0).unwrap();
        assert_eq!(constant, linear);
        assert_eq!(constant, quadratic);
    }

    #[test]
    fn log_likelihood_rejects_infeasible() {
        assert!(log_likelihood(Family::Linear, &[1.0, -10.0], &[0.5], 1.0).is_err());
        assert!(log_likelihood(Family::Constant, &[-1.0], &[], 1.0).is_err());
    }

    #[test]
    fn log_likelihood_rejects_fraud_outside_horizon() {
        assert!(log_likelihood(Family::Constant, &[1.0], &[3.0], 2.0).is_err());
    }

    #[test]
    fn constant_profile_maximum_is_censored_rate() {
        // Ternary search over the concave λ ↦ l(λ); the maximiser of the
        // log-likelihood over constants is k/T, not the waiting-time k/τ_k.
        let fraud = [1.0, 2.0, 3.0];
        let horizon = 5.0;
        let f = |lambda: f64| log_likelihood(Family::Constant, &[lambda], &fraud, horizon).unwrap();
        let (mut lo, mut hi) = (1e-6, 10.0);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let argmax = (lo + hi) / 2.0;
        assert!(
            (argmax - 3.0 / 5.0).abs() < 1e-6,
            "numeric maximiser {argmax} vs k/T = 0.6"
        );
    }

    #[test]
    fn nhpp_rejects_constant_family() {
        let tl = all_fraud(&[1.0, 2.0]);
        assert!(matches!(
            estimate_nhpp(Family::Constant, &tl),
            Err(EstimationError::InvalidFamily(_))
        ));
    }

    #[test]
    fn nhpp_no_fraud_zero_convention() {
        let tl = timeline(&[0.0, 1.0, 2.0], &[0, 0, 0], 2.0);
        let fit = estimate_nhpp(Family::Linear, &tl).unwrap();
        assert!(fit.zero_convention);
        assert_eq!(fit.model.params(), vec![0.0, 0.0]);
        let fit = estimate_nhpp(Family::Quadratic, &tl).unwrap();
        assert_eq!(fit.model.params(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn nhpp_single_fraud_midpoint_beats_hpp_embedding() {
        // Fraud at τ = T/2 = 2.5: the linear optimum sits on a constraint
        // boundary and must dominate the embedded waiting-time point.
        let tl = timeline(&[2.5, 5.0], &[1, 0], 5.0);
        let fit = estimate_nhpp(Family::Linear, &tl).unwrap();
        let hpp_point = log_likelihood(Family::Linear, &[1.0 / 2.5, 0.0], &[2.5], 5.0).unwrap();
        let achieved = fit.log_likelihood.unwrap();
        assert!(
            achieved >= hpp_point - 1e-6,
            "achieved {achieved} vs embedded {hpp_point}"
        );
        assert!(fit.model.is_feasible());
    }

    #[test]
    fn nhpp_nesting_on_fixed_timeline() {
        let tl = timeline(
            &[0.5, 1.0, 2.0, 2.5, 4.0, 4.5, 6.0, 7.5, 8.0, 9.0],
            &[0, 1, 0, 1, 0, 1, 1, 0, 1, 0],
            9.0,
        );
        let hpp = estimate_hpp(&tl).log_likelihood.unwrap();
        let linear = estimate_nhpp(Family::Linear, &tl)
            .unwrap()
            .log_likelihood
            .unwrap();
        let quadratic = estimate_nhpp(Family::Quadratic, &tl)
            .unwrap()
            .log_likelihood
            .unwrap();
        assert!(linear >= hpp - 1e-6, "linear {linear} vs constant {hpp}");
        assert!(
            quadratic >= linear - 1e-6,
            "quadratic {quadratic} vs linear {linear}"
        );
    }

    #[test]
    fn nhpp_params_always_feasible() {
        let cases = [
            vec![0.1, 0.9, 1.4, 3.3],
            vec![2.0, 2.1, 2.2],
            vec![5.0],
            vec![0.2, 4.8],
        ];
        for fraud in cases {
            let tl = all_fraud(&fraud);
            for family in [Family::Linear, Family::Quadratic] {
                let fit = estimate_nhpp(family, &tl).unwrap();
                assert!(
                    fit.model.is_feasible(),
                    "{family} fit infeasible on {fraud:?}: {:?}",
                    fit.model.params()
                );
            }
        }
    }

    #[test]
    fn nhpp_is_deterministic() {
        let tl = timeline(&[0.5, 1.5, 2.5, 3.5, 4.5], &[1, 0, 1, 0, 1], 4.5);
        let a = estimate_nhpp(Family::Quadratic, &tl).unwrap();
        let b = estimate_nhpp(Family::Quadratic, &tl).unwrap();
        assert_eq!(a.model.params(), b.model.params());
        assert_eq!(a.log_likelihood, b.log_likelihood);
    }

    /// Dense feasible-grid oracle: the optimizer must reach at least the
    /// best grid value minus 1e-3.
    #[test]
    fn nhpp_beats_grid_oracle_on_small_timelines() {
        let cases: Vec<Vec<f64>> = vec![
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.5, 0.6, 4.5, 4.8, 4.9],
            vec![3.0, 3.5, 4.0, 4.2, 4.4, 4.6],
            vec![0.2, 1.0, 1.1, 2.0, 2.3, 3.1, 3.9, 4.4],
        ];
        for fraud in cases {
            let tl = all_fraud(&fraud);
            let horizon = tl.horizon();
            let k = fraud.len() as f64;
            let fit = estimate_nhpp(Family::Linear, &tl).unwrap();
            let achieved = fit.log_likelihood.unwrap();

            let a_hi = 4.0 * k / horizon;
            let b_hi = 8.0 * k / (horizon * horizon);
            let mut best = f64::NEG_INFINITY;
            for i in 0..200 {
                let a = a_hi * i as f64 / 199.0;
                for j in 0..200 {
                    let b = -b_hi + 2.0 * b_hi * j as f64 / 199.0;
                    if !feasible(Family::Linear, &[a, b], horizon) {
                        continue;
                    }
                    let ll = log_likelihood(Family::Linear, &[a, b], &fraud, horizon).unwrap();
                    if ll > best {
                        best = ll;
                    }
                }
            }
            assert!(
                achieved >= best - 1e-3,
                "optimizer {achieved} below grid oracle {best} on {fraud:?}"
            );
        }
    }
}
