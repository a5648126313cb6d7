//! Points, torus windows, seeded random streams and planar Poisson sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }

    pub fn translate(self, dx: f64, dy: f64) -> Point2 {
        Point2::new(self.x + dx, self.y + dy)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Square window `[0, side)²` with opposite sides identified.
///
/// `band` is the width of the strip along each side whose seeds are copied
/// to the opposite side before a tessellation is traced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusWindow {
    side: f64,
    band: f64,
}

impl TorusWindow {
    pub fn new(side: f64, band: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::invalid(
                "side",
                format!("must be positive, got {side}"),
            ));
        }
        if !(band.is_finite() && band >= 0.0 && band < side / 2.0) {
            return Err(Error::invalid(
                "band",
                format!("must lie in [0, side/2) = [0, {}), got {band}", side / 2.0),
            ));
        }
        Ok(TorusWindow { side, band })
    }

    /// Window whose replication band is three typical cell diameters of a
    /// seed process with the given planar intensity, capped just below
    /// `side / 2`.
    pub fn with_default_band(side: f64, seed_intensity: f64) -> Result<Self> {
        let band = default_band(seed_intensity).min(0.45 * side);
        TorusWindow::new(side, band)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Maps any point back into `[0, side)²`.
    pub fn wrap(&self, p: Point2) -> Point2 {
        Point2::new(wrap_coord(p.x, self.side), wrap_coord(p.y, self.side))
    }

    /// Shortest periodic displacement from `a` to `b`, each component in
    /// `[-side/2, side/2]`.
    pub fn displacement(&self, a: Point2, b: Point2) -> (f64, f64) {
        let l = self.side;
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        (dx - l * (dx / l).round(), dy - l * (dy / l).round())
    }

    pub fn contains(&self, p: Point2) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }
}

fn wrap_coord(v: f64, l: f64) -> f64 {
    let w = v.rem_euclid(l);
    // rem_euclid can round up to exactly l for tiny negative inputs
    if w >= l {
        0.0
    } else {
        w
    }
}

/// Default replication band: `3 / sqrt(seed intensity)`.
pub fn default_band(seed_intensity: f64) -> f64 {
    3.0 / seed_intensity.sqrt()
}

/// Seed plus stream id of a ChaCha8 generator.
///
/// Equal `(seed, stream)` pairs always yield the same sample sequence, so an
/// experiment keys every run by its indices rather than by execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { seed, stream: 0 }
    }

    /// Derives an independent stream from this one and a key path, e.g.
    /// `state.substream(&[TAG, k, i])`.
    pub fn substream(&self, key: &[u64]) -> RngState {
        let mut h = splitmix64(self.stream ^ 0x5851_f42d_4c95_7f2d);
        for &k in key {
            h = splitmix64(h ^ splitmix64(k.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        RngState {
            seed: self.seed,
            stream: h,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws a Poisson(`mean`) count; `mean == 0` gives 0.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::invalid(
            "mean",
            format!("must be finite and >= 0, got {mean}"),
        ));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::invalid("mean", e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous planar Poisson process of the given intensity (per km²) on
/// `[0, side)²`.
pub fn sample_poisson_points<R: Rng + ?Sized>(
    intensity: f64,
    window: &TorusWindow,
    rng: &mut R,
) -> Result<Vec<Point2>> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(Error::invalid(
            "intensity",
            format!("must be finite and >= 0, got {intensity}"),
        ));
    }
    let n = poisson_count(intensity * window.area(), rng)?;
    let l = window.side();
    Ok((0..n)
        .map(|_| Point2::new(rng.random::<f64>() * l, rng.random::<f64>() * l))
        .collect())
}

/// Copies points lying within `band` of a side to the opposite side (and
/// corner points to the diagonal corner), so that a tessellation traced on
/// the output and restricted to the window is the periodic one.
///
/// The input points come first in the output, in their original order.
pub fn replicate_band(points: &[Point2], window: &TorusWindow) -> Vec<Point2> {
    let l = window.side();
    let band = window.band();
    let mut out = points.to_vec();
    if band == 0.0 {
        return out;
    }
    let shifts =
        |v: f64| -> [Option<f64>; 2] { [(v < band).then_some(l), (v >= l - band).then_some(-l)] };
    for p in points {
        let sx = shifts(p.x);
        let sy = shifts(p.y);
        for dx in sx.iter().flatten() {
            out.push(p.translate(*dx, 0.0));
        }
        for dy in sy.iter().flatten() {
            out.push(p.translate(0.0, *dy));
            for dx in sx.iter().flatten() {
                out.push(p.translate(*dx, *dy));
            }
        }
    }
    out
}

/// Euclidean distance on the torus: the minimum over periodic images.
pub fn torus_distance(a: Point2, b: Point2, window: &TorusWindow) -> f64 {
    let (dx, dy) = window.displacement(a, b);
    dx.hypot(dy)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn square(side: f64) -> Self {
        Rect::new(0.0, 0.0, side, side)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Liang–Barsky clipping of segment `ab` against a closed rectangle.
pub fn clip_segment(a: Point2, b: Point2, rect: &Rect) -> Option<(Point2, Point2)> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let edges = [
        (-dx, a.x - rect.x0),
        (dx, rect.x1 - a.x),
        (-dy, a.y - rect.y0),
        (dy, rect.y1 - a.y),
    ];
    for (p, q) in edges {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
    }
    let clamp = |p: Point2| Point2::new(p.x.clamp(rect.x0, rect.x1), p.y.clamp(rect.y0, rect.y1));
    let start = if t0 == 0.0 { a } else { clamp(a.lerp(b, t0)) };
    let end = if t1 == 1.0 { b } else { clamp(a.lerp(b, t1)) };
    Some((start, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(side: f64, band: f64) -> TorusWindow {
        TorusWindow::new(side, band).unwrap()
    }

    #[test]
    fn zero_intensity_gives_no_points() {
        let mut rng = RngState::new(1).rng();
        let pts = sample_poisson_points(0.0, &window(10.0, 1.0), &mut rng).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn negative_intensity_is_rejected() {
        let mut rng = RngState::new(1).rng();
        let err = sample_poisson_points(-1.0, &window(10.0, 1.0), &mut rng);
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn sampling_is_deterministic() {
        let w = window(10.0, 1.0);
        let a = sample_poisson_points(3.0, &w, &mut RngState::new(7).rng()).unwrap();
        let b = sample_poisson_points(3.0, &w, &mut RngState::new(7).rng()).unwrap();
        assert_eq!(a, b);
        let c =
            sample_poisson_points(3.0, &w, &mut RngState::new(7).substream(&[1]).rng()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_counts_match_mean_and_dispersion() {
        // 1000 seeds at mean 10 000: mean within 3 sigma, variance/mean near 1.
        let w = window(10.0, 1.0);
        let counts: Vec<f64> = (0..1000)
            .map(|s| {
                sample_poisson_points(100.0, &w, &mut RngState::new(s).rng())
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sigma_of_mean = (10_000.0f64 / n).sqrt();
        assert!((mean - 10_000.0).abs() < 3.0 * sigma_of_mean, "mean {mean}");
        // dispersion statistic (n-1) s^2 / mean ~ chi^2_{999}; 1% two-sided
        // quantiles are roughly 897 and 1107.
        let d = (n - 1.0) * var / mean;
        assert!((897.0..1107.0).contains(&d), "dispersion {d}");
    }

    #[test]
    fn points_lie_in_window() {
        let w = window(4.0, 0.5);
        let pts = sample_poisson_points(20.0, &w, &mut RngState::new(3).rng()).unwrap();
        assert!(pts.iter().all(|p| w.contains(*p)));
    }

    #[test]
    fn replicate_band_cases() {
        let p = Point2::new(0.1, 0.1);
        assert_eq!(replicate_band(&[p], &window(10.0, 0.0)), vec![p]);

        let out = replicate_band(&[p], &window(10.0, 1.0));
        assert_eq!(out.len(), 4);
        for q in [
            Point2::new(0.1, 0.1),
            Point2::new(10.1, 0.1),
            Point2::new(0.1, 10.1),
            Point2::new(10.1, 10.1),
        ] {
            assert!(out.iter().any(|o| o.dist(q) < 1e-12), "missing {q:?}");
        }

        let mid = Point2::new(5.0, 5.0);
        assert_eq!(replicate_band(&[mid], &window(10.0, 1.0)), vec![mid]);

        let right = Point2::new(9.5, 5.0);
        let out = replicate_band(&[right], &window(10.0, 1.0));
        assert_eq!(out.len(), 2);
        assert!(out[1].dist(Point2::new(-0.5, 5.0)) < 1e-12);
    }

    #[test]
    fn torus_distance_cases() {
        let w = window(10.0, 1.0);
        let a = Point2::new(3.0, 4.0);
        assert_eq!(torus_distance(a, a, &w), 0.0);
        let d = torus_distance(Point2::new(0.5, 5.0), Point2::new(9.5, 5.0), &w);
        assert!((d - 1.0).abs() < 1e-12);
        let d = torus_distance(Point2::new(0.0, 0.0), Point2::new(5.0, 5.0), &w);
        assert!((d - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn torus_distance_equals_min_over_images() {
        let w = window(3.0, 0.5);
        let mut rng = RngState::new(11).rng();
        for _ in 0..1000 {
            let a = Point2::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0);
            let b = Point2::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0);
            let brute = (-1..=1)
                .flat_map(|i| (-1..=1).map(move |j| (i, j)))
                .map(|(i, j)| a.dist(b.translate(3.0 * i as f64, 3.0 * j as f64)))
                .fold(f64::INFINITY, f64::min);
            assert!((torus_distance(a, b, &w) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_keeps_inside_portion() {
        let r = Rect::square(10.0);
        let (a, b) = clip_segment(Point2::new(-2.0, 5.0), Point2::new(4.0, 5.0), &r).unwrap();
        assert_eq!(a, Point2::new(0.0, 5.0));
        assert_eq!(b, Point2::new(4.0, 5.0));
        assert!(clip_segment(Point2::new(-2.0, -1.0), Point2::new(-1.0, 5.0), &r).is_none());
    }

    #[test]
    fn window_validation() {
        assert!(TorusWindow::new(0.0, 0.0).is_err());
        assert!(TorusWindow::new(10.0, 5.0).is_err());
        assert!(TorusWindow::new(10.0, 4.9).is_ok());
        let w = TorusWindow::with_default_band(10.0, 100.0).unwrap();
        assert!((w.band() - 0.3).abs() < 1e-12);
        let w = TorusWindow::with_default_band(1.0, 1.0).unwrap();
        assert!(w.band() < 0.5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn torus_distance_is_a_metric_below_planar(
                ax in 0.0..10.0f64, ay in 0.0..10.0f64,
                bx in 0.0..10.0f64, by in 0.0..10.0f64,
                cx in 0.0..10.0f64, cy in 0.0..10.0f64,
            ) {
                let w = TorusWindow::new(10.0, 1.0).unwrap();
                let (a, b, c) = (Point2::new(ax, ay), Point2::new(bx, by), Point2::new(cx, cy));
                let ab = torus_distance(a, b, &w);
                prop_assert!(ab <= a.dist(b) + 1e-12);
                prop_assert!((ab - torus_distance(b, a, &w)).abs() < 1e-12);
                prop_assert!(ab <= torus_distance(a, c, &w) + torus_distance(c, b, &w) + 1e-12);
            }

            #[test]
            fn replication_grows_with_band(
                pts in proptest::collection::vec((0.0..10.0f64, 0.0..10.0f64), 0..40),
                b1 in 0.0..4.9f64, b2 in 0.0..4.9f64,
            ) {
                let pts: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
                let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
                let n_lo = replicate_band(&pts, &TorusWindow::new(10.0, lo).unwrap()).len();
                let n_hi = replicate_band(&pts, &TorusWindow::new(10.0, hi).unwrap()).len();
                prop_assert!(n_lo <= n_hi);
                prop_assert!(n_lo >= pts.len());
                let out = replicate_band(&pts, &TorusWindow::new(10.0, hi).unwrap());
                prop_assert!(out.iter().all(|p| p.x >= -hi && p.x < 10.0 + hi && p.y >= -hi && p.y < 10.0 + hi));
            }
        }
    }
}
