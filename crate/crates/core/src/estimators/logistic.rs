//! Logistic model `logit p = a·λ + b` for crossing curves and the
//! threshold read off it.

use serde::{Deserialize, Serialize};

use super::CrossingCurvePoint;
use crate::error::{Error, Result};

/// Crossing probability at which λ_c is read off a fitted curve.
pub const DEFAULT_CROSSING_PROBABILITY: f64 = 0.6;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    /// Least squares on clipped empirical logits.
    #[default]
    Ols,
    /// Binomial maximum likelihood.
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// Slope, km.
    pub a: f64,
    pub b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
}

impl LogisticFit {
    pub fn new(a: f64, b: f64) -> Self {
        LogisticFit {
            a,
            b,
            var_a: 0.0,
            var_b: 0.0,
            cov_ab: 0.0,
        }
    }

    pub fn probability(&self, lambda: f64) -> f64 {
        logistic(self.a * lambda + self.b)
    }

    /// λ at which the fitted curve equals `p`.
    pub fn lambda_at(&self, p: f64) -> Result<f64> {
        if self.a.is_nan() || self.a <= 0.0 {
            return Err(Error::NonPercolatingFit { slope: self.a });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("p", format!("must lie in (0, 1), got {p}")));
        }
        Ok((logit(p) - self.b) / self.a)
    }

    /// Delta-method standard error of [`LogisticFit::lambda_at`].
    pub fn lambda_at_std_error(&self, p: f64) -> Result<f64> {
        let lambda = self.lambda_at(p)?;
        let ga = -lambda / self.a;
        let gb = -1.0 / self.a;
        let var = ga * ga * self.var_a + gb * gb * self.var_b + 2.0 * ga * gb * self.cov_ab;
        Ok(var.max(0.0).sqrt())
    }
}

fn clipped(pt: &CrossingCurvePoint) -> f64 {
    let eps = 0.5 / pt.runs as f64;
    pt.p_hat.clamp(eps, 1.0 - eps)
}

fn validate(points: &[CrossingCurvePoint]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::UnfittableCurve(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    for pt in points {
        if pt.runs == 0 || !(0.0..=1.0).contains(&pt.p_hat) || !pt.lambda.is_finite() {
            return Err(Error::UnfittableCurve(format!("invalid point {pt:?}")));
        }
    }
    if points.iter().all(|pt| pt.p_hat == 0.0 || pt.p_hat == 1.0) {
        return Err(Error::UnfittableCurve(
            "every point is saturated at 0 or 1".into(),
        ));
    }
    let first = points[0].lambda;
    if points.iter().all(|pt| pt.lambda == first) {
        return Err(Error::UnfittableCurve("all points share one lambda".into()));
    }
    Ok(())
}

pub fn fit_logistic(points: &[CrossingCurvePoint]) -> Result<LogisticFit> {
    fit_logistic_with(points, FitMethod::Ols)
}

pub fn fit_logistic_with(points: &[CrossingCurvePoint], method: FitMethod) -> Result<LogisticFit> {
    validate(points)?;
    let ols = fit_ols(points);
    match method {
        FitMethod::Ols => Ok(ols),
        FitMethod::Mle => fit_mle(points, ols),
    }
}

/// Ordinary least squares of clipped logits on λ. The reported variances
/// propagate the binomial noise of each logit, var ≈ 1/(runs·p·(1−p)).
fn fit_ols(points: &[CrossingCurvePoint]) -> LogisticFit {
    let n = points.len() as f64;
    let xbar = points.iter().map(|p| p.lambda).sum::<f64>() / n;
    let ys: Vec<f64> = points.iter().map(|p| logit(clipped(p))).collect();
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.lambda - xbar).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .zip(&ys)
        .map(|(p, y)| (p.lambda - xbar) * (y - ybar))
        .sum();
    let a = sxy / sxx;
    let b = ybar - a * xbar;
    let (mut var_a, mut var_b, mut cov_ab) = (0.0, 0.0, 0.0);
    for pt in points {
        let q = clipped(pt);
        let s2 = 1.0 / (pt.runs as f64 * q * (1.0 - q));
        let wa = (pt.lambda - xbar) / sxx;
        let wb = 1.0 / n - xbar * wa;
        var_a += wa * wa * s2;
        var_b += wb * wb * s2;
        cov_ab += wa * wb * s2;
    }
    LogisticFit {
        a,
        b,
        var_a,
        var_b,
        cov_ab,
    }
}

/// Newton iterations on the binomial log-likelihood, started from OLS.
fn fit_mle(points: &[CrossingCurvePoint], start: LogisticFit) -> Result<LogisticFit> {
    let loglik = |a: f64, b: f64| -> f64 {
        points
            .iter()
            .map(|pt| {
                let eta = a * pt.lambda + b;
                let k = pt.p_hat * pt.runs as f64;
                // log σ(η) = -log(1 + e^{-η})
                let log_p = -softplus(-eta);
                let log_q = -softplus(eta);
                k * log_p + (pt.runs as f64 - k) * log_q
            })
            .sum()
    };
    let (mut a, mut b) = (start.a, start.b);
    let mut ll = loglik(a, b);
    for _ in 0..200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for pt in points {
            let m = pt.runs as f64;
            let p = logistic(a * pt.lambda + b);
            let resid = pt.p_hat * m - m * p;
            let w = m * p * (1.0 - p);
            ga += resid * pt.lambda;
            gb += resid;
            haa += w * pt.lambda * pt.lambda;
            hab += w * pt.lambda;
            hbb += w;
        }
        let det = haa * hbb - hab * hab;
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::UnfittableCurve("singular information matrix".into()));
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nll = loglik(na, nb);
            if nll >= ll - 1e-12 * ll.abs() {
                a = na;
                b = nb;
                ll = nll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        let converged = (step * da).abs() <= 1e-12 * (1.0 + a.abs())
            && (step * db).abs() <= 1e-12 * (1.0 + b.abs());
        if !accepted || converged {
            let (var_a, var_b, cov_ab) = (hbb / det, haa / det, -hab / det);
            if !(a.is_finite() && b.is_finite()) || a.abs() > 1e12 {
                break;
            }
            return Ok(LogisticFit {
                a,
                b,
                var_a,
                var_b,
                cov_ab,
            });
        }
    }
    Err(Error::UnfittableCurve(
        "maximum likelihood did not converge (separated data?)".into(),
    ))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// λ_c at the default crossing probability.
pub fn lambda_c_from_fit(fit: &LogisticFit) -> Result<f64> {
    fit.lambda_at(DEFAULT_CROSSING_PROBABILITY)
}
