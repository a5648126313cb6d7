//! Percolation probability from first-wrap device counts.
//!
//! Devices are added one at a time to a street system that already carries
//! a marked origin. The count `N` at which the origin's component first
//! wraps turns into θ̂(λ) for every λ at once: the origin percolates at
//! intensity λ exactly when the Poisson number of devices is at least `N`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::poisson::poisson_upper_tail;
use super::{check_lambda, mean_and_se, Scenario, TAG_THETA_PLACEMENT, TAG_THETA_TESSELLATION};
use crate::cox::StreetSampler;
use crate::error::{Error, Result};
use crate::geometry::RngState;
use crate::graph::{insert_device, GilbertGraph, WrapUnionFind};
use crate::par::Execution;
use crate::tessellation::Tessellation;

/// Whether the origin itself is counted among the Poisson devices. It is
/// the marked point of the Palm distribution, so by default it is not.
pub const ORIGIN_COUNTS_TOWARD_J: bool = false;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    /// Tessellation index.
    pub k: usize,
    /// Placement index within the tessellation.
    pub i: usize,
    /// Devices present when the origin's component first wrapped; for a
    /// censored run, the budget that was exhausted.
    #[serde(rename = "N")]
    pub n: u64,
    /// Street length of tessellation `k`, km.
    pub nu1: f64,
    pub censored: bool,
}

/// Where to give up on a placement whose origin never wraps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeviceBudget {
    Fixed(u64),
    /// `factor · λ · ν₁` devices, the expected count at `lambda` times
    /// `factor`, rounded up.
    ExpectedAt {
        lambda: f64,
        factor: f64,
    },
}

impl DeviceBudget {
    pub fn devices(&self, nu1: f64) -> u64 {
        match *self {
            DeviceBudget::Fixed(n) => n,
            DeviceBudget::ExpectedAt { lambda, factor } => (factor * lambda * nu1).ceil() as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPlan {
    /// Number of tessellations `n`.
    pub tessellations: usize,
    /// Origin placements `M` per tessellation.
    pub placements: usize,
    pub budget: DeviceBudget,
}

impl ThetaPlan {
    /// `n = 10`, `M = 30`, budget 50 expected devices at `lambda_max`.
    pub fn with_defaults(lambda_max: f64) -> Self {
        ThetaPlan {
            tessellations: 10,
            placements: 30,
            budget: DeviceBudget::ExpectedAt {
                lambda: lambda_max,
                factor: 50.0,
            },
        }
    }
}

/// One placement: draws the origin and then devices uniformly on `t` until
/// the origin's component wraps. Returns `(N, censored)`.
pub fn theta_run(
    s: &Scenario,
    t: &Tessellation,
    budget: u64,
    stream: RngState,
) -> Result<(u64, bool)> {
    let mut sampler = StreetSampler::new(t, stream.rng())?;
    let mut g = GilbertGraph::new(s.r, s.window)?;
    let mut uf = WrapUnionFind::new(0);
    let origin = sampler.next_on_segment().0;
    let offset = u64::from(ORIGIN_COUNTS_TOWARD_J);
    if insert_device(&mut g, &mut uf, origin).any() {
        return Ok((offset, false));
    }
    for added in 1..=budget {
        let (p, _) = sampler.next_on_segment();
        insert_device(&mut g, &mut uf, p);
        if uf.wrap_state(0).any() {
            return Ok((added + offset, false));
        }
    }
    Ok((budget + offset, true))
}

/// Runs `n × M` placements; tessellation `k` and placement `(k, i)` use
/// their own streams.
pub fn run_theta_experiment(
    s: &Scenario,
    plan: &ThetaPlan,
    rng: RngState,
    exec: Execution,
) -> Result<Vec<ThetaSample>> {
    run_theta_tessellations(s, plan, 0..plan.tessellations, rng, exec)
}

/// The samples of tessellations `ks` only; identical to the matching rows
/// of [`run_theta_experiment`], so an interrupted experiment can resume.
pub fn run_theta_tessellations(
    s: &Scenario,
    plan: &ThetaPlan,
    ks: Range<usize>,
    rng: RngState,
    exec: Execution,
) -> Result<Vec<ThetaSample>> {
    if plan.tessellations == 0 || plan.placements == 0 {
        return Err(Error::invalid(
            "n, M",
            "need at least one tessellation and one placement",
        ));
    }
    if ks.end > plan.tessellations {
        return Err(Error::invalid(
            "k",
            format!("tessellations {ks:?} exceed n = {}", plan.tessellations),
        ));
    }
    if let DeviceBudget::ExpectedAt { lambda, factor } = plan.budget {
        check_lambda(lambda)?;
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(
                "budget factor",
                format!("must be positive, got {factor}"),
            ));
        }
    }
    let first = ks.start;
    let tessellations = exec.try_map(ks.len(), |j| {
        let mut r = rng
            .substream(&[TAG_THETA_TESSELLATION, (first + j) as u64])
            .rng();
        s.sample_tessellation(&mut r)
    })?;
    let m = plan.placements;
    exec.try_map(tessellations.len() * m, |job| {
        let (j, i) = (job / m, job % m);
        let k = first + j;
        let t = &tessellations[j];
        let stream = rng.substream(&[TAG_THETA_PLACEMENT, k as u64, i as u64]);
        let (n, censored) = theta_run(s, t, plan.budget.devices(t.nu1()), stream)?;
        Ok(ThetaSample {
            k,
            i,
            n,
            nu1: t.nu1(),
            censored,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub lambda: f64,
    pub theta: f64,
    /// Standard error from the spread of the per-tessellation averages
    /// (per-sample spread when there is a single tessellation).
    pub std_error: f64,
    /// Censored samples, each counted as never percolating.
    pub censored: usize,
}

/// θ̂(λ): the per-tessellation mean of `P(J ≥ N)`, `J ~ Poisson(λ ν₁)`,
/// averaged over tessellations.
pub fn theta_hat(samples: &[ThetaSample], lambda: f64) -> Result<ThetaEstimate> {
    check_lambda(lambda)?;
    if samples.is_empty() {
        return Err(Error::invalid("samples", "no samples"));
    }
    let mut by_k: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    let mut censored = 0;
    for s in samples {
        let v = if s.censored {
            censored += 1;
            0.0
        } else {
            poisson_upper_tail(s.n, lambda * s.nu1)
        };
        by_k.entry(s.k).or_default().push(v);
    }
    let means: Vec<f64> = by_k
        .values()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let (theta, mut std_error) = mean_and_se(&means);
    if means.len() == 1 {
        std_error = mean_and_se(by_k.values().next().expect("one group")).1;
    }
    Ok(ThetaEstimate {
        lambda,
        theta: theta.clamp(0.0, 1.0),
        std_error,
        censored,
    })
}

/// θ̂ over a grid of intensities from one sample set.
pub fn theta_curve(samples: &[ThetaSample], lambdas: &[f64]) -> Result<Vec<ThetaEstimate>> {
    lambdas.iter().map(|&l| theta_hat(samples, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::tessellation::TessellationKind;

    fn sample(k: usize, n: u64, nu1: f64) -> ThetaSample {
        ThetaSample {
            k,
            i: 0,
            n,
            nu1,
            censored: false,
        }
    }

    #[test]
    fn estimator_examples() {
        let all_zero = [sample(0, 0, 3.0), sample(1, 0, 5.0)];
        assert_eq!(theta_hat(&all_zero, 0.7).unwrap().theta, 1.0);
        assert_eq!(theta_hat(&all_zero, 0.0).unwrap().theta, 1.0);
        let one = [sample(0, 1, 1.0)];
        assert!((theta_hat(&one, 1.0).unwrap().theta - 0.632_120_558_828_557_7).abs() < 1e-15);
        let some = [sample(0, 1, 3.0), sample(0, 7, 3.0), sample(1, 2, 4.0)];
        assert_eq!(theta_hat(&some, 0.0).unwrap().theta, 0.0);
        assert!(theta_hat(&some, -1.0).is_err());
        assert!(theta_hat(&[], 1.0).is_err());
    }

    #[test]
    fn groups_by_tessellation_before_averaging() {
        // tessellation 0 has two placements, tessellation 1 has one
        let s = [
            sample(0, 0, 1.0),
            sample(0, 0, 1.0),
            ThetaSample {
                censored: true,
                ..sample(1, 5, 1.0)
            },
        ];
        let e = theta_hat(&s, 2.0).unwrap();
        assert_eq!(e.theta, 0.5);
        assert_eq!(e.censored, 1);
    }

    #[test]
    fn origin_on_self_wrapping_range_needs_no_devices() {
        // r > L: the origin reaches its own copies
        let s = Scenario::new(TessellationKind::Pvt, 10.0, 3.0, 2.0).unwrap();
        let t = Tessellation::from_segments(
            TessellationKind::Pvt,
            s.window,
            [(Point2::new(0.0, 1.0), Point2::new(2.0, 1.0))],
        );
        let (n, censored) = theta_run(&s, &t, 100, RngState::new(1)).unwrap();
        assert_eq!((n, censored), (0, false));
    }

    #[test]
    fn single_street_around_the_torus() {
        // one horizontal street of length 2 that closes on itself, r = 0.5:
        // wraps once the gaps along the loop are all below r
        let s = Scenario::new(TessellationKind::Pvt, 10.0, 0.5, 2.0).unwrap();
        let t = Tessellation::from_segments(
            TessellationKind::Pvt,
            s.window,
            [(Point2::new(0.0, 1.0), Point2::new(2.0, 1.0))],
        );
        for seed in 0..20 {
            let (n, censored) = theta_run(&s, &t, 10_000, RngState::new(seed)).unwrap();
            assert!(!censored);
            // at least 3 more devices are needed to cover a loop of length 2
            assert!(n >= 3, "{n}");
        }
        let (n, censored) = theta_run(&s, &t, 2, RngState::new(0)).unwrap();
        assert_eq!((n, censored), (2, true));
    }

    #[test]
    fn deterministic_and_schedule_free() {
        let s = Scenario::new(TessellationKind::Pdt, 10.0, 0.3, 2.0).unwrap();
        let plan = ThetaPlan {
            tessellations: 2,
            placements: 3,
            budget: DeviceBudget::Fixed(2000),
        };
        let a = run_theta_experiment(&s, &plan, RngState::new(5), Execution::Sequential).unwrap();
        let b = run_theta_experiment(&s, &plan, RngState::new(5), Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!((a[4].k, a[4].i), (1, 1));
        let tail =
            run_theta_tessellations(&s, &plan, 1..2, RngState::new(5), Execution::Sequential)
                .unwrap();
        assert_eq!(tail, a[3..]);
        assert!(
            run_theta_tessellations(&s, &plan, 1..3, RngState::new(5), Execution::Sequential)
                .is_err()
        );
    }

    #[test]
    fn budget_from_expected_count() {
        let b = DeviceBudget::ExpectedAt {
            lambda: 2.0,
            factor: 50.0,
        };
        assert_eq!(b.devices(10.01), 1001);
    }
}
