//! Deterministic intensity families and their compensators.
//!
//! Three families are supported: constant `λ(t) = λ`, linear
//! `λ(t) = a + bt` and quadratic `λ(t) = a + bt + ct²`. A model carries a
//! horizon `T`; nonnegativity of the intensity on `[0, T]` is enforced
//! through the constraint sets
//!
//! - constant: `λ ≥ 0`,
//! - linear: `a ≥ 0` and `b + a/T ≥ 0`,
//! - quadratic: `a ≥ 0`, `c ≥ 0` and `b + a/T ≥ 0`,
//!
//! which are sufficient for `λ(t) ≥ 0` on the horizon. The compensator
//! `A(t) = ∫₀ᵗ λ(s) ds` has the closed forms `λt`, `at + bt²/2` and
//! `at + bt²/2 + ct³/3`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A constraint value down to this (negative) tolerance still counts as
/// satisfied, so optimizer iterates that land on a boundary are not
/// rejected.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Errors from intensity-model construction and evaluation.
#[derive(Debug, Error)]
pub enum IntensityError {
    #[error("time {t} outside model domain [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),

    #[error("{family} family takes {expected} parameter(s), got {got}")]
    ParamArity {
        family: Family,
        expected: usize,
        got: usize,
    },

    #[error("non-finite parameter {0}")]
    NonFiniteParam(f64),

    #[error("grid bounds must be positive (a_max={a_max}, b_max={b_max})")]
    InvalidGridBounds { a_max: f64, b_max: f64 },

    #[error("grid resolution must be at least 2, got {0}")]
    InvalidGridResolution(usize),
}

/// The three intensity families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Constant,
    Linear,
    Quadratic,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Constant, Family::Linear, Family::Quadratic];

    /// Number of free parameters of the family.
    pub fn param_count(self) -> usize {
        match self {
            Family::Constant => 1,
            Family::Linear => 2,
            Family::Quadratic => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Linear => "linear",
            Family::Quadratic => "quadratic",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" | "homo" | "hpp" => Ok(Family::Constant),
            "linear" => Ok(Family::Linear),
            "quadratic" => Ok(Family::Quadratic),
            other => Err(format!("unknown intensity family {other:?}")),
        }
    }
}

/// A parameterised intensity function (no horizon attached).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Intensity {
    Constant { rate: f64 },
    Linear { a: f64, b: f64 },
    Quadratic { a: f64, b: f64, c: f64 },
}

impl Intensity {
    /// Builds an intensity from a family tag and a parameter slice.
    pub fn from_params(family: Family, params: &[f64]) -> Result<Self, IntensityError> {
        if params.len() != family.param_count() {
            return Err(IntensityError::ParamArity {
                family,
                expected: family.param_count(),
                got: params.len(),
            });
        }
        if let Some(&bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(IntensityError::NonFiniteParam(bad));
        }
        Ok(match family {
            Family::Constant => Intensity::Constant { rate: params[0] },
            Family::Linear => Intensity::Linear {
                a: params[0],
                b: params[1],
            },
            Family::Quadratic => Intensity::Quadratic {
                a: params[0],
                b: params[1],
                c: params[2],
            },
        })
    }

    /// All-zero member of `family` (the λ ≡ 0 convention).
    pub fn zero(family: Family) -> Self {
        Self::from_params(family, &vec![0.0; family.param_count()]).expect("zero params")
    }

    pub fn family(&self) -> Family {
        match self {
            Intensity::Constant { .. } => Family::Constant,
            Intensity::Linear { .. } => Family::Linear,
            Intensity::Quadratic { .. } => Family::Quadratic,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Intensity::Constant { rate } => vec![rate],
            Intensity::Linear { a, b } => vec![a, b],
            Intensity::Quadratic { a, b, c } => vec![a, b, c],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.params().iter().all(|&p| p == 0.0)
    }

    /// λ(t), with no domain check.
    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            Intensity::Constant { rate } => rate,
            Intensity::Linear { a, b } => a + b * t,
            Intensity::Quadratic { a, b, c } => a + (b + c * t) * t,
        }
    }

    /// Closed-form `∫₀ᵗ λ(s) ds`, with no domain check.
    pub fn integral_to(&self, t: f64) -> f64 {
        match *self {
            Intensity::Constant { rate } => rate * t,
            Intensity::Linear { a, b } => (a + b * t / 2.0) * t,
            Intensity::Quadratic { a, b, c } => (a + (b / 2.0 + c * t / 3.0) * t) * t,
        }
    }

    /// Maximum of λ over `[0, t_end]`, from the closed form of a degree-≤2
    /// polynomial: endpoints plus the vertex when it falls inside.
    pub fn max_on(&self, t_end: f64) -> f64 {
        let mut m = self.value_at(0.0).max(self.value_at(t_end));
        if let Intensity::Quadratic { b, c, .. } = *self {
            if c != 0.0 {
                let vertex = -b / (2.0 * c);
                if vertex > 0.0 && vertex < t_end {
                    m = m.max(self.value_at(vertex));
                }
            }
        }
        m
    }
}

/// Checks the family-specific nonnegativity constraints at horizon `T`.
///
/// Each constraint value must be at least `-FEASIBILITY_TOL`. The zero
/// intensity is feasible in every family; for the constant family this
/// admits the λ = 0 convention used for fraud-free training sets.
///
/// Panics if `params` has the wrong arity or `horizon` is not positive;
/// both are caller contract violations.
pub fn feasible(family: Family, params: &[f64], horizon: f64) -> bool {
    assert!(
        horizon > 0.0 && horizon.is_finite(),
        "feasible() requires horizon > 0, got {horizon}"
    );
    assert_eq!(params.len(), family.param_count(), "param arity mismatch");
    let tol = -FEASIBILITY_TOL;
    match family {
        Family::Constant => params[0] >= tol,
        Family::Linear => params[0] >= tol && params[1] + params[0] / horizon >= tol,
        Family::Quadratic => {
            params[0] >= tol && params[2] >= tol && params[1] + params[0] / horizon >= tol
        }
    }
}

/// An intensity function together with the horizon on which its
/// nonnegativity constraints are enforced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityModel {
    intensity: Intensity,
    horizon: f64,
}

impl IntensityModel {
    /// A horizon of exactly 0 is admitted only for the zero intensity,
    /// which arises from degenerate training segments.
    pub fn new(intensity: Intensity, horizon: f64) -> Result<Self, IntensityError> {
        let zero_ok = horizon == 0.0 && intensity.is_zero();
        if !(horizon > 0.0 && horizon.is_finite()) && !zero_ok {
            return Err(IntensityError::InvalidHorizon(horizon));
        }
        if let Some(&bad) = intensity.params().iter().find(|p| !p.is_finite()) {
            return Err(IntensityError::NonFiniteParam(bad));
        }
        Ok(Self { intensity, horizon })
    }

    /// The λ ≡ 0 model of `family` (always feasible).
    pub fn zero(family: Family, horizon: f64) -> Self {
        Self {
            intensity: Intensity::zero(family),
            horizon: horizon.max(0.0),
        }
    }

    pub fn intensity(&self) -> &Intensity {
        &self.intensity
    }

    pub fn family(&self) -> Family {
        self.intensity.family()
    }

    pub fn params(&self) -> Vec<f64> {
        self.intensity.params()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_zero(&self) -> bool {
        self.intensity.is_zero()
    }

    /// λ(t) for `t ∈ [0, horizon]`. Outside that range the constraints do
    /// not guarantee nonnegativity and the call fails.
    pub fn evaluate(&self, t: f64) -> Result<f64, IntensityError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(IntensityError::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.intensity.value_at(t))
    }

    /// λ(t) for any `t ≥ 0`, extrapolating beyond the horizon. Used by the
    /// prediction path, which scores future transactions.
    pub fn evaluate_extended(&self, t: f64) -> Result<f64, IntensityError> {
        if t < 0.0 {
            return Err(IntensityError::NegativeTime(t));
        }
        Ok(self.intensity.value_at(t))
    }

    /// Compensator `A(t) = ∫₀ᵗ λ(s) ds` for `t ∈ [0, horizon]`.
    pub fn compensator(&self, t: f64) -> Result<f64, IntensityError> {
        if t < 0.0 {
            return Err(IntensityError::NegativeTime(t));
        }
        if t > self.horizon {
            return Err(IntensityError::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.intensity.integral_to(t))
    }

    /// Compensator for any `t ≥ 0`, extrapolating beyond the horizon.
    pub fn compensator_extended(&self, t: f64) -> Result<f64, IntensityError> {
        if t < 0.0 {
            return Err(IntensityError::NegativeTime(t));
        }
        Ok(self.intensity.integral_to(t))
    }

    /// Whether the parameters satisfy the constraint set at this model's
    /// horizon (tolerance `FEASIBILITY_TOL`).
    pub fn is_feasible(&self) -> bool {
        if self.horizon <= 0.0 {
            return self.intensity.is_zero();
        }
        feasible(self.family(), &self.params(), self.horizon)
    }
}

/// One point of a feasibility grid.
#[derive(Debug, Clone, Serialize)]
pub struct RegionCell {
    pub a: f64,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub feasible: bool,
}

/// Boolean feasibility over a parameter lattice, for plotting.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub family: Family,
    pub horizon: f64,
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    /// Serialises as CSV: `a,b[,c],feasible` with feasible ∈ {0,1}. The
    /// constant family uses a single `lambda` column.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        match self.family {
            Family::Constant => writeln!(w, "lambda,feasible")?,
            Family::Linear => writeln!(w, "a,b,feasible")?,
            Family::Quadratic => writeln!(w, "a,b,c,feasible")?,
        }
        for cell in &self.cells {
            let flag = i32::from(cell.feasible);
            match self.family {
                Family::Constant => writeln!(w, "{},{}", cell.a, flag)?,
                Family::Linear => writeln!(w, "{},{},{}", cell.a, cell.b.unwrap_or(0.0), flag)?,
                Family::Quadratic => writeln!(
                    w,
                    "{},{},{},{}",
                    cell.a,
                    cell.b.unwrap_or(0.0),
                    cell.c.unwrap_or(0.0),
                    flag
                )?,
            }
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Evaluates `feasible` over a lattice.
///
/// - Constant: a single axis λ ∈ [0, a_max].
/// - Linear: [0, a_max] × [-b_max, b_max].
/// - Quadratic: the linear lattice crossed with c-slices over [0, a_max].
///
/// `resolution` is the number of points per axis.
pub fn feasible_region_grid(
    family: Family,
    a_max: f64,
    b_max: f64,
    horizon: f64,
    resolution: usize,
) -> Result<RegionGrid, IntensityError> {
    if !(a_max > 0.0) || !(b_max > 0.0) {
        return Err(IntensityError::InvalidGridBounds { a_max, b_max });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(IntensityError::InvalidHorizon(horizon));
    }
    if resolution < 2 {
        return Err(IntensityError::InvalidGridResolution(resolution));
    }

    let a_axis = linspace(0.0, a_max, resolution);
    let mut cells = Vec::new();
    match family {
        Family::Constant => {
            for &a in &a_axis {
                cells.push(RegionCell {
                    a,
                    b: None,
                    c: None,
                    feasible: feasible(family, &[a], horizon),
                });
            }
        }
        Family::Linear => {
            let b_axis = linspace(-b_max, b_max, resolution);
            for &a in &a_axis {
                for &b in &b_axis {
                    cells.push(RegionCell {
                        a,
                        b: Some(b),
                        c: None,
                        feasible: feasible(family, &[a, b], horizon),
                    });
                }
            }
        }
        Family::Quadratic => {
            let b_axis = linspace(-b_max, b_max, resolution);
            let c_axis = linspace(0.0, a_max, resolution);
            for &a in &a_axis {
                for &b in &b_axis {
                    for &c in &c_axis {
                        cells.push(RegionCell {
                            a,
                            b: Some(b),
                            c: Some(c),
                            feasible: feasible(family, &[a, b, c], horizon),
                        });
                    }
                }
            }
        }
    }
    Ok(RegionGrid {
        family,
        horizon,
        cells,
    })
}
