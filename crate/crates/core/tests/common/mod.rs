//! Brute-force reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streetperc::cox::sample_cox;
use streetperc::estimators::Scenario;
use streetperc::{Point2, RngState, TessellationKind, WrapState};

/// Plain disjoint sets.
pub struct Dsu(Vec<usize>);

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

pub const TILES: [(i32, i32); 9] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (0, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// All 9 copies of each point: copy `9·i + t` is point `i` shifted by
/// `TILES[t]` windows.
pub fn replicate_3x3(points: &[Point2], side: f64) -> Vec<Point2> {
    points
        .iter()
        .flat_map(|p| {
            TILES
                .iter()
                .map(move |&(tx, ty)| Point2::new(p.x + tx as f64 * side, p.y + ty as f64 * side))
        })
        .collect()
}

/// Planar Gilbert graph on the copies, as adjacency lists.
pub fn planar_copies_graph(points: &[Point2], r: f64, side: f64) -> Vec<Vec<usize>> {
    let copies = replicate_3x3(points, side);
    let mut adj = vec![Vec::new(); copies.len()];
    for a in 0..copies.len() {
        for b in a + 1..copies.len() {
            if copies[a].dist(copies[b]) < r {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    adj
}

fn torus_dist(a: Point2, b: Point2, side: f64) -> f64 {
    let d = |u: f64, v: f64| {
        let x = (u - v).abs() % side;
        x.min(side - x)
    };
    d(a.x, b.x).hypot(d(a.y, b.y))
}

/// Wrap flags of every device's torus component, from the 3×3 replication:
/// a component wraps horizontally (vertically) when two copies of one of
/// its devices in different tile columns (rows) are joined in the plane.
pub fn wrap_oracle(points: &[Point2], r: f64, side: f64) -> Vec<WrapState> {
    let n = points.len();
    let adj = planar_copies_graph(points, r, side);
    let mut planar = Dsu::new(adj.len());
    for (a, nb) in adj.iter().enumerate() {
        for &b in nb {
            planar.union(a, b);
        }
    }
    let mut own = vec![WrapState::default(); n];
    for (i, flags) in own.iter_mut().enumerate() {
        for (s, ts) in TILES.iter().enumerate() {
            for (t, tt) in TILES.iter().enumerate().skip(s + 1) {
                if planar.find(9 * i + s) == planar.find(9 * i + t) {
                    flags.horizontal |= ts.0 != tt.0;
                    flags.vertical |= ts.1 != tt.1;
                }
            }
        }
    }
    let mut torus = Dsu::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if torus_dist(points[i], points[j], side) < r {
                torus.union(i, j);
            }
        }
    }
    let mut by_root = vec![WrapState::default(); n];
    for (i, f) in own.iter().enumerate() {
        let root = torus.find(i);
        by_root[root].horizontal |= f.horizontal;
        by_root[root].vertical |= f.vertical;
    }
    (0..n).map(|i| by_root[torus.find(i)]).collect()
}

/// Hop counts from `source` to each device's copy in the source's window,
/// by BFS over the planar copy graph.
pub fn lifted_hops_oracle(points: &[Point2], r: f64, side: f64, source: usize) -> Vec<u32> {
    let adj = planar_copies_graph(points, r, side);
    let mut dist = vec![u32::MAX; adj.len()];
    let start = 9 * source + 4;
    dist[start] = 0;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    (0..points.len()).map(|i| dist[9 * i + 4]).collect()
}

/// Forward pmf recursion from e^{-m}: P(J ≥ k) = 1 − Σ_{j<k} pmf(j).
pub fn poisson_tail_oracle(k: u64, m: f64) -> f64 {
    let mut pmf = (-m).exp();
    let mut below = 0.0;
    for j in 0..k {
        below += pmf;
        pmf *= m / (j + 1) as f64;
    }
    1.0 - below
}

/// True if no seed lies strictly inside any triangle's circumcircle
/// (relative slack `tol`).
pub fn empty_circumcircles(seeds: &[Point2], triangles: &[[usize; 3]], tol: f64) -> bool {
    triangles.iter().all(|&[a, b, c]| {
        let (pa, pb, pc) = (seeds[a], seeds[b], seeds[c]);
        let d = 2.0 * (pa.x * (pb.y - pc.y) + pb.x * (pc.y - pa.y) + pc.x * (pa.y - pb.y));
        let sq = |p: Point2| p.x * p.x + p.y * p.y;
        let ux = (sq(pa) * (pb.y - pc.y) + sq(pb) * (pc.y - pa.y) + sq(pc) * (pa.y - pb.y)) / d;
        let uy = (sq(pa) * (pc.x - pb.x) + sq(pb) * (pa.x - pc.x) + sq(pc) * (pb.x - pa.x)) / d;
        let centre = Point2::new(ux, uy);
        let r2 = centre.dist2(pa);
        seeds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != a && i != b && i != c)
            .all(|(_, p)| centre.dist2(*p) >= r2 * (1.0 - tol))
    })
}

/// A small random street configuration with at most `max_devices`
/// devices: returns `(devices, r, side, kind)`.
pub fn random_configuration(
    seed: u64,
    max_devices: usize,
) -> (Vec<Point2>, f64, f64, TessellationKind) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let kind = if rng.random::<bool>() {
            TessellationKind::Pvt
        } else {
            TessellationKind::Pdt
        };
        let side = rng.random_range(0.5..2.0);
        let gamma = rng.random_range(8.0..25.0);
        // mostly below L/2, sometimes beyond L
        let r = side
            * if rng.random::<f64>() < 0.1 {
                rng.random_range(0.5..1.3)
            } else {
                rng.random_range(0.03..0.4)
            };
        let s = Scenario::new(kind, gamma, r, side).unwrap();
        // tiny windows can hold too few seeds for a street system
        let Ok(t) = s.sample_tessellation(&mut rng) else {
            continue;
        };
        if t.nu1() <= 0.0 {
            continue;
        }
        let lambda = rng.random_range(20.0..max_devices as f64 * 1.2) / t.nu1();
        let mut devices = sample_cox(&t, lambda, &mut RngState::new(seed).rng())
            .unwrap()
            .positions;
        devices.truncate(max_devices);
        return (devices, r, side, kind);
    }
}
