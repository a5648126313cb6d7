//! Crossing-probability curves and threshold scans.

use serde::{Deserialize, Serialize};

use super::logistic::{fit_logistic_with, FitMethod, LogisticFit, DEFAULT_CROSSING_PROBABILITY};
use super::{approx::pbm_threshold, check_lambda, Scenario, TAG_CROSSING};
use crate::cox::sample_cox;
use crate::error::{Error, Result};
use crate::geometry::RngState;
use crate::graph::GilbertGraph;
use crate::par::Execution;

/// Fraction of runs at intensity `lambda` whose graph wraps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingCurvePoint {
    pub lambda: f64,
    pub p_hat: f64,
    pub runs: usize,
}

/// One run: a fresh street system and Cox sample; true if some component
/// wraps around the torus.
pub fn crossing_run(s: &Scenario, lambda: f64, stream: RngState) -> Result<bool> {
    let mut rng = stream.rng();
    let t = s.sample_tessellation(&mut rng)?;
    let devices = sample_cox(&t, lambda, &mut rng)?;
    if devices.is_empty() {
        return Ok(false);
    }
    let g = GilbertGraph::build(&devices.positions, s.r, s.window)?;
    Ok(g.wrap_union_find().any_wrapping())
}

fn run_stream(rng: RngState, lambda: f64, run: usize) -> RngState {
    rng.substream(&[TAG_CROSSING, lambda.to_bits(), run as u64])
}

pub fn estimate_crossing_probability(
    s: &Scenario,
    lambda: f64,
    runs: usize,
    rng: RngState,
    exec: Execution,
) -> Result<CrossingCurvePoint> {
    Ok(crossing_curve(s, &[lambda], runs, rng, exec)?.remove(0))
}

/// Crossing probabilities over a λ grid, all runs scheduled together.
pub fn crossing_curve(
    s: &Scenario,
    lambdas: &[f64],
    runs: usize,
    rng: RngState,
    exec: Execution,
) -> Result<Vec<CrossingCurvePoint>> {
    if runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let hits = exec.try_map(lambdas.len() * runs, |job| {
        let lambda = lambdas[job / runs];
        crossing_run(s, lambda, run_stream(rng, lambda, job % runs))
    })?;
    Ok(lambdas
        .iter()
        .zip(hits.chunks(runs))
        .map(|(&lambda, h)| CrossingCurvePoint {
            lambda,
            p_hat: h.iter().filter(|&&x| x).count() as f64 / runs as f64,
            runs,
        })
        .collect())
}

/// Grid sizes for [`scan_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub coarse_points: usize,
    pub coarse_runs: usize,
    /// Coarse grid spans `[lo, hi]` times the Boolean-model guess,
    /// geometrically spaced.
    pub coarse_span: (f64, f64),
    pub fine_points: usize,
    pub fine_runs: usize,
    pub p_cross: f64,
    pub method: FitMethod,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan {
            coarse_points: 8,
            coarse_runs: 20,
            coarse_span: (0.4, 2.5),
            fine_points: 10,
            fine_runs: 50,
            p_cross: DEFAULT_CROSSING_PROBABILITY,
            method: FitMethod::Ols,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub coarse: Vec<CrossingCurvePoint>,
    pub fine: Vec<CrossingCurvePoint>,
    pub fit: LogisticFit,
    pub lambda_c: f64,
    pub lambda_c_se: f64,
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Transition bracket on a coarse curve: the last λ with p̂ ≤ 0.1 before the
/// first λ with p̂ ≥ 0.9. `None` on a side that never gets there.
fn bracket(curve: &[CrossingCurvePoint]) -> (Option<f64>, Option<f64>) {
    let hi = curve.iter().position(|p| p.p_hat >= 0.9);
    let lo_end = hi.unwrap_or(curve.len());
    let lo = curve[..lo_end].iter().rposition(|p| p.p_hat <= 0.1);
    (lo.map(|i| curve[i].lambda), hi.map(|i| curve[i].lambda))
}

/// Two-stage threshold search: a coarse geometric grid around the
/// Boolean-model guess locates the transition, then a linear grid across
/// the transition is fitted with the logistic model.
pub fn scan_threshold(
    s: &Scenario,
    plan: &ScanPlan,
    rng: RngState,
    exec: Execution,
) -> Result<ThresholdScan> {
    if plan.coarse_points < 2 || plan.fine_points < 2 {
        return Err(Error::invalid(
            "points",
            "coarse and fine grids need at least 2 points",
        ));
    }
    let guess = pbm_threshold(s.r_gamma())? * s.gamma;
    let (mut lo, mut hi) = (guess * plan.coarse_span.0, guess * plan.coarse_span.1);
    let widen = plan.coarse_span.1 / plan.coarse_span.0;
    let mut coarse = Vec::new();
    let mut found = None;
    for _ in 0..6 {
        let curve = crossing_curve(
            s,
            &geometric_grid(lo, hi, plan.coarse_points),
            plan.coarse_runs,
            rng,
            exec,
        )?;
        coarse.extend_from_slice(&curve);
        match bracket(&curve) {
            (Some(a), Some(b)) => {
                found = Some((a, b));
                break;
            }
            (_, None) => {
                lo = hi;
                hi *= widen;
            }
            (None, Some(_)) => {
                hi = lo;
                lo /= widen;
            }
        }
    }
    let (a, b) = found.ok_or_else(|| {
        Error::UnfittableCurve(format!("no transition found between {lo} and {hi} per km"))
    })?;
    coarse.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    let fine = crossing_curve(
        s,
        &linear_grid(a, b, plan.fine_points),
        plan.fine_runs,
        rng,
        exec,
    )?;
    let fit = fit_logistic_with(&fine, plan.method)?;
    let lambda_c = fit.lambda_at(plan.p_cross)?;
    let lambda_c_se = fit.lambda_at_std_error(plan.p_cross)?;
    Ok(ThresholdScan {
        coarse,
        fine,
        fit,
        lambda_c,
        lambda_c_se,
    })
}
