//! Gilbert graphs on the torus, wrap detection and hop distances.

mod hops;
mod union_find;

pub use hops::{
    all_pairs_hops, bfs_hops, floyd_warshall, hop_distances, HopTable, LiftedHops,
    FLOYD_WARSHALL_LIMIT, UNREACHABLE,
};
pub use union_find::{WrapState, WrapUnionFind};

use crate::cox::DeviceSet;
use crate::error::{Error, Result};
use crate::geometry::{Point2, TorusWindow};

const MAX_CELLS_PER_AXIS: usize = 1024;

/// A link from one device to the periodic image `to + shift · L` of
/// another, which lies strictly within the connection radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub to: u32,
    pub shift: [i8; 2],
}

impl Link {
    pub fn shift_i32(&self) -> [i32; 2] {
        [i32::from(self.shift[0]), i32::from(self.shift[1])]
    }
}

/// Uniform periodic bucket grid with cells at least `r` wide, so every
/// neighbour of a point lies in the 3×3 block around its cell.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    side: f64,
    per_axis: usize,
    buckets: Vec<Vec<u32>>,
}

impl SpatialGrid {
    pub fn new(window: &TorusWindow, radius: f64) -> Self {
        let per_axis = ((window.side() / radius).floor() as usize).clamp(1, MAX_CELLS_PER_AXIS);
        SpatialGrid {
            side: window.side(),
            per_axis,
            buckets: vec![Vec::new(); per_axis * per_axis],
        }
    }

    pub fn cells_per_axis(&self) -> usize {
        self.per_axis
    }

    fn cell(&self, p: Point2) -> (usize, usize) {
        let m = self.per_axis;
        let f = m as f64 / self.side;
        (
            ((p.x * f) as usize).min(m - 1),
            ((p.y * f) as usize).min(m - 1),
        )
    }

    pub fn insert(&mut self, index: usize, p: Point2) {
        let (cx, cy) = self.cell(p);
        self.buckets[cy * self.per_axis + cx].push(index as u32);
    }

    /// Distinct buckets of the 3×3 block around `p`, wrapping periodically.
    pub fn neighborhood(&self, p: Point2) -> impl Iterator<Item = &[u32]> + '_ {
        let m = self.per_axis;
        let (cx, cy) = self.cell(p);
        let (span, len) = match m {
            1 => ([0, 0, 0], 1),
            2 => ([0, 1, 0], 2),
            _ => ([m - 1, 0, 1], 3),
        };
        span.into_iter().take(len).flat_map(move |dy| {
            span.into_iter().take(len).map(move |dx| {
                let x = (cx + dx) % m;
                let y = (cy + dy) % m;
                self.buckets[y * m + x].as_slice()
            })
        })
    }
}

/// Devices joined whenever their torus distance is strictly below `r`.
///
/// Adjacency lists hold one [`Link`] per periodic image within range; for
/// `r < L/2` that is at most one link per neighbour. There are no
/// self-loops, though for `r > L` every device is within range of its own
/// translates, which [`WrapUnionFind`] accounts for separately.
#[derive(Debug, Clone)]
pub struct GilbertGraph {
    window: TorusWindow,
    radius: f64,
    positions: Vec<Point2>,
    adjacency: Vec<Vec<Link>>,
    grid: SpatialGrid,
    scratch: Vec<Link>,
}

impl GilbertGraph {
    pub fn new(radius: f64, window: TorusWindow) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "r",
                format!("must be positive, got {radius}"),
            ));
        }
        Ok(GilbertGraph {
            window,
            radius,
            positions: Vec::new(),
            adjacency: Vec::new(),
            grid: SpatialGrid::new(&window, radius),
            scratch: Vec::new(),
        })
    }

    pub fn build(points: &[Point2], radius: f64, window: TorusWindow) -> Result<Self> {
        let mut g = GilbertGraph::new(radius, window)?;
        g.positions.reserve(points.len());
        g.adjacency.reserve(points.len());
        for &p in points {
            g.insert(p);
        }
        Ok(g)
    }

    /// Adds a device, links it to everything within range and returns its
    /// index.
    pub fn insert(&mut self, p: Point2) -> usize {
        let p = self.window.wrap(p);
        let idx = self.positions.len();
        let mut links = std::mem::take(&mut self.scratch);
        links.clear();
        self.links_to(p, &mut links);
        for l in &links {
            self.adjacency[l.to as usize].push(Link {
                to: idx as u32,
                shift: [-l.shift[0], -l.shift[1]],
            });
        }
        self.adjacency.push(links.clone());
        self.scratch = links;
        self.positions.push(p);
        self.grid.insert(idx, p);
        idx
    }

    /// Links from a point at `p` to the current devices.
    fn links_to(&self, p: Point2, out: &mut Vec<Link>) {
        let l = self.window.side();
        let r2 = self.radius * self.radius;
        let single_image = self.grid.cells_per_axis() >= 3;
        for bucket in self.grid.neighborhood(p) {
            for &j in bucket {
                let q = self.positions[j as usize];
                if single_image {
                    let (dx, dy) = self.window.displacement(p, q);
                    if dx * dx + dy * dy < r2 {
                        let sx = ((p.x + dx - q.x) / l).round() as i8;
                        let sy = ((p.y + dy - q.y) / l).round() as i8;
                        out.push(Link {
                            to: j,
                            shift: [sx, sy],
                        });
                    }
                } else {
                    for sy in -1i8..=1 {
                        for sx in -1i8..=1 {
                            let img = q.translate(f64::from(sx) * l, f64::from(sy) * l);
                            if img.dist2(p) < r2 {
                                out.push(Link {
                                    to: j,
                                    shift: [sx, sy],
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn window(&self) -> &TorusWindow {
        &self.window
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn neighbors(&self, i: usize) -> &[Link] {
        &self.adjacency[i]
    }

    /// Number of linked device pairs (each pair counted once, whatever the
    /// number of images within range).
    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .enumerate()
            .map(|(i, links)| {
                let mut to: Vec<u32> = links
                    .iter()
                    .map(|l| l.to)
                    .filter(|&j| j as usize > i)
                    .collect();
                to.sort_unstable();
                to.dedup();
                to.len()
            })
            .sum()
    }

    /// True when `r` exceeds the window side, so each device reaches its
    /// own periodic copies.
    pub fn self_wrapping(&self) -> bool {
        self.window.side() < self.radius
    }

    /// Wrap-tracking union-find over the current links.
    pub fn wrap_union_find(&self) -> WrapUnionFind {
        let mut uf = WrapUnionFind::new(self.len());
        for (i, links) in self.adjacency.iter().enumerate() {
            for l in links.iter().filter(|l| l.to as usize > i) {
                uf.union(i, l.to as usize, l.shift_i32());
            }
        }
        if self.self_wrapping() {
            for i in 0..self.len() {
                uf.union(i, i, [1, 0]);
                uf.union(i, i, [0, 1]);
            }
        }
        uf
    }
}

pub fn build_gilbert(devices: &DeviceSet, r: f64, window: &TorusWindow) -> Result<GilbertGraph> {
    GilbertGraph::build(&devices.positions, r, *window)
}

/// Inserts `p` into both structures (which must index the same devices) and
/// returns the wrap state of its component.
pub fn insert_device(g: &mut GilbertGraph, u: &mut WrapUnionFind, p: Point2) -> WrapState {
    debug_assert_eq!(g.len(), u.len());
    let idx = g.insert(p);
    u.add();
    for l in g.neighbors(idx).to_vec() {
        u.union(idx, l.to as usize, l.shift_i32());
    }
    if g.self_wrapping() {
        u.union(idx, idx, [1, 0]);
        u.union(idx, idx, [0, 1]);
    }
    u.wrap_state(idx)
}

/// All devices that belong to a wrapping ("infinite") component, in
/// increasing order.
pub fn largest_wrapping_component(g: &GilbertGraph, u: &mut WrapUnionFind) -> Vec<usize> {
    debug_assert_eq!(g.len(), u.len());
    (0..g.len()).filter(|&i| u.wrap_state(i).any()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(side: f64) -> TorusWindow {
        TorusWindow::new(side, 0.0).unwrap()
    }

    #[test]
    fn strict_radius_rule() {
        let w = window(10.0);
        let g =
            GilbertGraph::build(&[Point2::new(1.0, 1.0), Point2::new(1.25, 1.0)], 0.5, w).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g =
            GilbertGraph::build(&[Point2::new(1.0, 1.0), Point2::new(1.5, 1.0)], 0.5, w).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(GilbertGraph::new(0.0, w).is_err());
    }

    #[test]
    fn links_wrap_around_the_torus() {
        let g = GilbertGraph::build(
            &[Point2::new(0.1, 5.0), Point2::new(9.9, 5.0)],
            0.3,
            window(10.0),
        )
        .unwrap();
        assert_eq!(g.edge_count(), 1);
        // 0 sees device 1 shifted one window to the left
        assert_eq!(
            g.neighbors(0),
            &[Link {
                to: 1,
                shift: [-1, 0]
            }]
        );
        assert_eq!(
            g.neighbors(1),
            &[Link {
                to: 0,
                shift: [1, 0]
            }]
        );
    }

    #[test]
    fn chain_across_the_width_wraps() {
        let w = window(10.0);
        let r = 0.5;
        let mut g = GilbertGraph::new(r, w).unwrap();
        let mut uf = WrapUnionFind::new(0);
        let n = 40; // spacing r/2 = 0.25 across 10 km
        for i in 0..n {
            let state = insert_device(&mut g, &mut uf, Point2::new(0.1 + 0.25 * i as f64, 3.0));
            assert_eq!(state.any(), i == n - 1, "insertion {i}");
        }
        assert!(uf.wrap_state(0).horizontal && !uf.wrap_state(0).vertical);
        assert_eq!(
            largest_wrapping_component(&g, &mut uf),
            (0..n).collect::<Vec<_>>()
        );
    }

    #[test]
    fn isolated_insertion_is_a_singleton() {
        let mut g = GilbertGraph::new(0.5, window(10.0)).unwrap();
        let mut uf = WrapUnionFind::new(0);
        insert_device(&mut g, &mut uf, Point2::new(1.0, 1.0));
        let s = insert_device(&mut g, &mut uf, Point2::new(6.0, 6.0));
        assert!(!s.any());
        assert_eq!(uf.set_size(1), 1);
        assert!(largest_wrapping_component(&g, &mut uf).is_empty());
    }

    #[test]
    fn radius_above_side_wraps_immediately() {
        let mut g = GilbertGraph::new(1.5, window(1.0)).unwrap();
        let mut uf = WrapUnionFind::new(0);
        let s = insert_device(&mut g, &mut uf, Point2::new(0.5, 0.5));
        assert!(s.horizontal && s.vertical);
    }

    #[test]
    fn small_grids_find_every_image() {
        // r between L/3 and L/2: two cells per axis
        let w = window(1.0);
        let g =
            GilbertGraph::build(&[Point2::new(0.05, 0.5), Point2::new(0.6, 0.5)], 0.46, w).unwrap();
        assert_eq!(
            g.neighbors(0),
            &[Link {
                to: 1,
                shift: [-1, 0]
            }]
        );
        // r above L/2: both images of the other device are in range
        let g =
            GilbertGraph::build(&[Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)], 0.6, w).unwrap();
        assert_eq!(g.neighbors(0).len(), 2);
        assert_eq!(g.edge_count(), 1);
        let mut uf = g.wrap_union_find();
        assert!(uf.wrap_state(0).horizontal);
    }

    #[test]
    fn adjacency_matches_exhaustive_check() {
        use crate::geometry::{torus_distance, RngState};
        use rand::Rng;
        let w = window(3.0);
        let mut rng = RngState::new(17).rng();
        let pts: Vec<Point2> = (0..500)
            .map(|_| Point2::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0))
            .collect();
        let r = 0.2;
        let g = GilbertGraph::build(&pts, r, w).unwrap();
        let mut expected = 0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let linked = g.neighbors(i).iter().any(|l| l.to as usize == j);
                let close = torus_distance(pts[i], pts[j], &w) < r;
                assert_eq!(linked, close, "pair ({i}, {j})");
                expected += usize::from(close && i < j);
            }
        }
        assert_eq!(g.edge_count(), expected);
    }
}
