//! Hop-count stretch factor of the wrapping component.

use serde::{Deserialize, Serialize};

use super::{check_lambda, mean_and_se, Scenario, TAG_STRETCH};
use crate::cox::sample_cox;
use crate::error::{Error, Result};
use crate::geometry::RngState;
use crate::graph::{largest_wrapping_component, GilbertGraph, LiftedHops, UNREACHABLE};
use crate::par::Execution;

/// Hop count and planar distance of one device pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchSample {
    pub hops: u32,
    /// km
    pub euclid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchEstimate {
    /// Mean of hops / distance over qualifying pairs, hops per km.
    pub mu_hat: f64,
    pub pairs: usize,
    /// Standard error treating pairs as independent (they are not, so this
    /// is optimistic).
    pub std_error: f64,
    /// Least-squares slope of hops on distance through the origin.
    pub slope: f64,
    /// Pairs that share a torus component but have no zero-winding path.
    pub unreachable_pairs: usize,
}

/// Stretch factor over all pairs of devices in wrapping components whose
/// planar separation exceeds `min_dist`.
///
/// Hop counts only use paths with zero net winding, so that they belong to
/// the planar separation rather than to a shorter way around the torus.
pub fn estimate_stretch(g: &GilbertGraph, min_dist: f64) -> Result<StretchEstimate> {
    let (samples, unreachable_pairs) = stretch_samples(g, min_dist)?;
    if samples.is_empty() {
        let pos = g.positions();
        let max_separation = pos
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| pos[i + 1..].iter().map(move |&q| p.dist(q)))
            .fold(0.0, f64::max);
        return Err(Error::InsufficientPairs {
            min_dist,
            max_separation,
        });
    }
    let ratios: Vec<f64> = samples
        .iter()
        .map(|s| f64::from(s.hops) / s.euclid)
        .collect();
    let (mu_hat, std_error) = mean_and_se(&ratios);
    let sxy: f64 = samples.iter().map(|s| f64::from(s.hops) * s.euclid).sum();
    let sxx: f64 = samples.iter().map(|s| s.euclid * s.euclid).sum();
    Ok(StretchEstimate {
        mu_hat,
        pairs: samples.len(),
        std_error,
        slope: sxy / sxx,
        unreachable_pairs,
    })
}

/// Qualifying pairs and the number of same-component pairs without a
/// zero-winding path.
pub(crate) fn stretch_samples(
    g: &GilbertGraph,
    min_dist: f64,
) -> Result<(Vec<StretchSample>, usize)> {
    if !(min_dist.is_finite() && min_dist >= 0.0) {
        return Err(Error::invalid(
            "min_dist",
            format!("must be finite and >= 0, got {min_dist}"),
        ));
    }
    let mut uf = g.wrap_union_find();
    let members = largest_wrapping_component(g, &mut uf);
    let roots = uf.roots();
    let pos = g.positions();
    let mut lifted = LiftedHops::new(g);
    let mut samples = Vec::new();
    let mut unreachable = 0;
    let mut targets = Vec::new();
    for (a, &i) in members.iter().enumerate() {
        targets.clear();
        targets.extend(
            members[a + 1..]
                .iter()
                .copied()
                .filter(|&j| roots[j] == roots[i] && pos[i].dist(pos[j]) > min_dist),
        );
        if targets.is_empty() {
            continue;
        }
        let hops = lifted.from_source(i, Some(&targets));
        for &j in &targets {
            if hops[j] == UNREACHABLE {
                unreachable += 1;
            } else {
                samples.push(StretchSample {
                    hops: hops[j],
                    euclid: pos[i].dist(pos[j]),
                });
            }
        }
    }
    Ok((samples, unreachable))
}

/// μ̂ averaged over independent simulations at one intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchPoint {
    pub lambda: f64,
    pub mu_hat: f64,
    pub std_error: f64,
    /// Simulations that produced qualifying pairs.
    pub simulations: usize,
    /// Simulations without a wrapping component or without far pairs.
    pub skipped: usize,
    pub pairs: usize,
    /// Smallest per-simulation estimate.
    pub min_mu_hat: f64,
}

pub fn run_stretch_experiment(
    s: &Scenario,
    lambda: f64,
    simulations: usize,
    min_dist: f64,
    rng: RngState,
    exec: Execution,
) -> Result<StretchPoint> {
    check_lambda(lambda)?;
    if simulations == 0 {
        return Err(Error::invalid("simulations", "must be at least 1"));
    }
    let runs = exec.try_map(simulations, |j| -> Result<Option<StretchEstimate>> {
        let mut r = rng
            .substream(&[TAG_STRETCH, lambda.to_bits(), j as u64])
            .rng();
        let t = s.sample_tessellation(&mut r)?;
        let devices = sample_cox(&t, lambda, &mut r)?;
        let g = GilbertGraph::build(&devices.positions, s.r, s.window)?;
        match estimate_stretch(&g, min_dist) {
            Ok(e) => Ok(Some(e)),
            Err(Error::InsufficientPairs { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let used: Vec<&StretchEstimate> = runs.iter().flatten().collect();
    let mus: Vec<f64> = used.iter().map(|e| e.mu_hat).collect();
    let (mu_hat, std_error) = mean_and_se(&mus);
    Ok(StretchPoint {
        lambda,
        mu_hat,
        std_error,
        simulations: used.len(),
        skipped: simulations - used.len(),
        pairs: used.iter().map(|e| e.pairs).sum(),
        min_mu_hat: mus.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, TorusWindow};

    #[test]
    fn single_edge_pair() {
        // a chain that wraps horizontally
        let w = TorusWindow::new(2.0, 0.0).unwrap();
        let pts: Vec<Point2> = (0..8)
            .map(|i| Point2::new(0.125 + 0.25 * i as f64, 1.0))
            .collect();
        let g = GilbertGraph::build(&pts, 0.3, w).unwrap();
        let e = estimate_stretch(&g, 1.7).unwrap();
        // only 0 and 7 are more than 1.7 apart: 7 hops over 1.75 km
        assert_eq!(e.pairs, 1);
        assert!((e.mu_hat - 7.0 / 1.75).abs() < 1e-12);
        // with a short cut-off, adjacent devices count too
        let e = estimate_stretch(&g, 0.2).unwrap();
        assert_eq!(e.pairs, 28);
        assert!(e.mu_hat >= 1.0 / 0.3);
    }

    #[test]
    fn two_devices_half_a_km_apart() {
        // r > L: everything wraps, the pair is one hop apart
        let w = TorusWindow::new(0.9, 0.0).unwrap();
        let g =
            GilbertGraph::build(&[Point2::new(0.1, 0.1), Point2::new(0.6, 0.1)], 1.0, w).unwrap();
        let e = estimate_stretch(&g, 0.4).unwrap();
        assert_eq!(e.pairs, 1);
        assert!((e.mu_hat - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_far_pairs() {
        let w = TorusWindow::new(2.0, 0.0).unwrap();
        let pts: Vec<Point2> = (0..8)
            .map(|i| Point2::new(0.125 + 0.25 * i as f64, 1.0))
            .collect();
        let g = GilbertGraph::build(&pts, 0.3, w).unwrap();
        match estimate_stretch(&g, 1.9) {
            Err(Error::InsufficientPairs { max_separation, .. }) => {
                assert!((max_separation - 1.75).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        // nothing wraps
        let g = GilbertGraph::build(&pts[..4], 0.3, w).unwrap();
        assert!(matches!(
            estimate_stretch(&g, 0.1),
            Err(Error::InsufficientPairs { .. })
        ));
    }
}
