//! Monte Carlo estimators for the critical intensity, the percolation
//! probability and the stretch factor, plus closed-form approximations.

mod approx;
mod crossing;
mod logistic;
mod poisson;
mod stretch;
mod theta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TorusWindow;
use crate::tessellation::{street_window, Tessellation, TessellationKind};

pub use approx::{bernoulli_threshold, pbm_threshold, PBM_CONSTANT};
pub use crossing::{
    crossing_curve, crossing_run, estimate_crossing_probability, scan_threshold,
    CrossingCurvePoint, ScanPlan, ThresholdScan,
};
pub use logistic::{
    fit_logistic, fit_logistic_with, lambda_c_from_fit, logistic, logit, FitMethod, LogisticFit,
    DEFAULT_CROSSING_PROBABILITY,
};
pub use poisson::{poisson_pmf, poisson_upper_tail};
pub use stretch::{
    estimate_stretch, run_stretch_experiment, StretchEstimate, StretchPoint, StretchSample,
};
pub use theta::{
    run_theta_experiment, run_theta_tessellations, theta_curve, theta_hat, theta_run, DeviceBudget,
    ThetaEstimate, ThetaPlan, ThetaSample, ORIGIN_COUNTS_TOWARD_J,
};

// stream tags, one per experiment type
pub(crate) const TAG_CROSSING: u64 = 1;
pub(crate) const TAG_THETA_TESSELLATION: u64 = 2;
pub(crate) const TAG_THETA_PLACEMENT: u64 = 3;
pub(crate) const TAG_STRETCH: u64 = 4;

/// Street model, device range and simulation window shared by all runs of
/// an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: TessellationKind,
    /// Street length intensity, per km.
    pub gamma: f64,
    /// Connection radius, km.
    pub r: f64,
    pub window: TorusWindow,
}

impl Scenario {
    /// Scenario on a `side`-km torus with the default replication band.
    pub fn new(kind: TessellationKind, gamma: f64, r: f64, side: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be positive, got {gamma}"),
            ));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        Ok(Scenario {
            kind,
            gamma,
            r,
            window: street_window(side, kind, gamma)?,
        })
    }

    pub fn r_gamma(&self) -> f64 {
        self.r * self.gamma
    }

    pub fn side(&self) -> f64 {
        self.window.side()
    }

    pub fn sample_tessellation<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<Tessellation> {
        Tessellation::sample(self.kind, self.gamma, &self.window, rng)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "lambda",
            format!("must be finite and >= 0, got {lambda}"),
        ))
    }
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
