//! Poisson-Voronoi and Poisson-Delaunay street systems on a torus window.
//!
//! Seeds are sampled in the window, copied across a band on every side
//! ([`replicate_band`]), triangulated, and the resulting street segments are
//! clipped back to `[0, L]²`. A street crossing the window boundary thus
//! shows up as two clipped pieces, one at each side, and the total clipped
//! length is the street length of the torus.

mod delaunay;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use delaunay::{circumcenter, delaunay_triangulate, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{
    clip_segment, replicate_band, sample_poisson_points, Point2, Rect, TorusWindow,
};

/// Pieces shorter than this fraction of the window side are dropped.
const MIN_PIECE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TessellationKind {
    /// Poisson-Voronoi: cell boundaries, typical of urban street layouts.
    Pvt,
    /// Poisson-Delaunay: triangulation edges, closer to rural road networks.
    Pdt,
}

impl TessellationKind {
    pub const ALL: [TessellationKind; 2] = [TessellationKind::Pvt, TessellationKind::Pdt];
}

impl fmt::Display for TessellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TessellationKind::Pvt => "PVT",
            TessellationKind::Pdt => "PDT",
        })
    }
}

impl FromStr for TessellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PVT" => Ok(TessellationKind::Pvt),
            "PDT" => Ok(TessellationKind::Pdt),
            _ => Err(Error::invalid(
                "kind",
                format!("expected PVT or PDT, got {s:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub length: f64,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment {
            a,
            b,
            length: a.dist(b),
        }
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: Point2) -> f64 {
        let (dx, dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return self.a.dist(p);
        }
        let t = (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len2).clamp(0.0, 1.0);
        self.point_at(t).dist(p)
    }
}

/// A street system: segments clipped to the window plus their total length
/// `nu1`, cached because every estimator needs it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    kind: TessellationKind,
    window: TorusWindow,
    segments: Vec<Segment>,
    nu1: f64,
}

impl Tessellation {
    /// Clips raw segments to `[0, L]²` and drops degenerate pieces. Pieces
    /// running along the edges `x = L` or `y = L` are dropped too, since the
    /// torus identifies them with `x = 0` and `y = 0`.
    pub fn from_segments(
        kind: TessellationKind,
        window: TorusWindow,
        raw: impl IntoIterator<Item = (Point2, Point2)>,
    ) -> Self {
        let rect = Rect::square(window.side());
        let min_len = MIN_PIECE * window.side();
        let segments: Vec<Segment> = raw
            .into_iter()
            .filter_map(|(a, b)| clip_segment(a, b, &rect))
            .map(|(a, b)| Segment::new(a, b))
            .filter(|s| s.length > min_len)
            .filter(|s| {
                let far = |u: f64, v: f64| {
                    (window.side() - u).abs() <= min_len && (window.side() - v).abs() <= min_len
                };
                !far(s.a.x, s.b.x) && !far(s.a.y, s.b.y)
            })
            .collect();
        let nu1 = segments.iter().map(|s| s.length).sum();
        Tessellation {
            kind,
            window,
            segments,
            nu1,
        }
    }

    /// Samples seeds at the intensity matching length intensity `gamma`,
    /// replicates the band and traces the street system.
    pub fn sample<R: Rng + ?Sized>(
        kind: TessellationKind,
        gamma: f64,
        window: &TorusWindow,
        rng: &mut R,
    ) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be positive, got {gamma}"),
            ));
        }
        let seeds = sample_poisson_points(seed_intensity_for_gamma(gamma, kind), window, rng)?;
        let extended = replicate_band(&seeds, window);
        match kind {
            TessellationKind::Pvt => build_pvt(&extended, window),
            TessellationKind::Pdt => build_pdt(&extended, window),
        }
    }

    pub fn kind(&self) -> TessellationKind {
        self.kind
    }

    pub fn window(&self) -> &TorusWindow {
        &self.window
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    /// Street length inside an axis-aligned sub-rectangle.
    pub fn length_in(&self, rect: &Rect) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| clip_segment(s.a, s.b, rect))
            .map(|(a, b)| a.dist(b))
            .sum()
    }
}

/// Total street length in the window (recomputed from the segments).
pub fn total_length(t: &Tessellation) -> f64 {
    t.segments.iter().map(|s| s.length).sum()
}

/// Delaunay edges of the (band-replicated) seeds, clipped to the window.
pub fn build_pdt(seeds: &[Point2], window: &TorusWindow) -> Result<Tessellation> {
    let tri = delaunay_triangulate(seeds)?;
    let raw = tri.edges().map(|(t, e)| {
        let v = tri.triangles[t];
        (seeds[v[(e + 1) % 3]], seeds[v[(e + 2) % 3]])
    });
    Ok(Tessellation::from_segments(
        TessellationKind::Pdt,
        *window,
        raw,
    ))
}

/// Voronoi cell boundaries of the (band-replicated) seeds, clipped to the
/// window: circumcentres of adjacent Delaunay triangles are joined, and each
/// hull edge contributes a ray along its outward bisector.
///
/// Collinear seeds (including just two) give parallel bisector lines.
pub fn build_pvt(seeds: &[Point2], window: &TorusWindow) -> Result<Tessellation> {
    if seeds.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 seeds, got {}",
            seeds.len()
        )));
    }
    let reach = ray_reach(seeds, window);
    let tri = match delaunay_triangulate(seeds) {
        Ok(tri) => tri,
        Err(Error::DegenerateInput(_)) => {
            return Ok(Tessellation::from_segments(
                TessellationKind::Pvt,
                *window,
                collinear_bisectors(seeds, reach),
            ))
        }
        Err(e) => return Err(e),
    };
    let centers = voronoi_vertices(seeds, &tri);
    let raw = tri.edges().map(|(t, e)| match tri.neighbors[t][e] {
        Some(n) => (centers[t], centers[n]),
        None => {
            let v = tri.triangles[t];
            let (a, b) = (seeds[v[(e + 1) % 3]], seeds[v[(e + 2) % 3]]);
            // interior lies left of a -> b
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let norm = dx.hypot(dy);
            let c = centers[t];
            let len = reach + c.dist(a);
            (c, c.translate(dy / norm * len, -dx / norm * len))
        }
    });
    Ok(Tessellation::from_segments(
        TessellationKind::Pvt,
        *window,
        raw,
    ))
}

/// A length that carries any ray from a Voronoi vertex of `seeds` past the
/// window.
fn ray_reach(seeds: &[Point2], window: &TorusWindow) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, window.side(), window.side());
    for p in seeds {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    4.0 * (x1 - x0).hypot(y1 - y0)
}

fn collinear_bisectors(seeds: &[Point2], reach: f64) -> Vec<(Point2, Point2)> {
    let origin = seeds[0];
    let Some(far) = seeds
        .iter()
        .copied()
        .max_by(|a, b| a.dist2(origin).total_cmp(&b.dist2(origin)))
    else {
        return Vec::new();
    };
    let len = far.dist(origin);
    if len == 0.0 {
        return Vec::new();
    }
    let (ux, uy) = ((far.x - origin.x) / len, (far.y - origin.y) / len);
    let mut along: Vec<f64> = seeds
        .iter()
        .map(|p| (p.x - origin.x) * ux + (p.y - origin.y) * uy)
        .collect();
    along.sort_by(f64::total_cmp);
    along.dedup();
    along
        .windows(2)
        .map(|w| {
            let m = origin.translate(ux * (w[0] + w[1]) / 2.0, uy * (w[0] + w[1]) / 2.0);
            (
                m.translate(-uy * reach, ux * reach),
                m.translate(uy * reach, -ux * reach),
            )
        })
        .collect()
}

/// One Voronoi vertex per Delaunay triangle.
pub fn voronoi_vertices(seeds: &[Point2], tri: &Triangulation) -> Vec<Point2> {
    tri.triangles
        .iter()
        .map(|&[a, b, c]| circumcenter(seeds[a], seeds[b], seeds[c]))
        .collect()
}

/// Planar seed intensity (per km²) whose tessellation has length intensity
/// `gamma` (per km): `(γ/2)²` for PVT, `(3πγ/32)²` for PDT.
pub fn seed_intensity_for_gamma(gamma: f64, kind: TessellationKind) -> f64 {
    match kind {
        TessellationKind::Pvt => (gamma / 2.0).powi(2),
        TessellationKind::Pdt => (3.0 * std::f64::consts::PI * gamma / 32.0).powi(2),
    }
}

/// Window for a street system of length intensity `gamma`, with the default
/// band for the matching seed intensity.
pub fn street_window(side: f64, kind: TessellationKind, gamma: f64) -> Result<TorusWindow> {
    TorusWindow::with_default_band(side, seed_intensity_for_gamma(gamma, kind))
}
