//! Incremental Bowyer–Watson Delaunay triangulation.
//!
//! The convex hull is closed off with "ghost" triangles that share a single
//! vertex at infinity, so points outside the current hull are inserted by
//! the same cavity search as interior ones. Orientation and in-circle tests
//! use adaptive exact predicates.
//!
//! Tie-break: a point lying exactly on a circumcircle is *not* in conflict
//! with that triangle. For cocircular inputs the triangulation therefore
//! keeps whichever diagonal existed when the last cocircular point arrived;
//! insertion follows a Hilbert-curve order of the input, so the outcome is
//! deterministic for a given point set.

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};
use crate::geometry::Point2;

const GHOST: u32 = u32::MAX;

/// Delaunay triangles as CCW index triples into the input slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
    /// `neighbors[t][i]` is the triangle across the edge opposite vertex
    /// `i` of triangle `t`; `None` on the convex hull.
    pub neighbors: Vec<[Option<usize>; 3]>,
}

impl Triangulation {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Each undirected edge once, as `(triangle, local edge index)`; the
    /// edge opposite vertex `e` joins vertices `e+1` and `e+2`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(t, nbrs)| {
            nbrs.iter()
                .enumerate()
                .filter(move |(_, n)| n.is_none_or(|n| n > t))
                .map(move |(e, _)| (t, e))
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    n: [u32; 3],
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }

    /// Rotates so that the ghost vertex, if any, sits in the last slot.
    fn normalized(mut self) -> Tri {
        while self.v.contains(&GHOST) && self.v[2] != GHOST {
            self.v.rotate_left(1);
            self.n.rotate_left(1);
        }
        self
    }
}

/// Triangulates `points`. Duplicate points are skipped (they share the
/// vertex of their first occurrence and never appear in the output).
pub fn delaunay_triangulate(points: &[Point2]) -> Result<Triangulation> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput(format!("non-finite point {p:?}")));
    }
    let order = hilbert_order(points);
    let mut builder = Builder::new(points);
    let seeds = builder.start(&order)?;
    for &i in &order {
        if !seeds.contains(&i) {
            builder.insert(i as u32);
        }
    }
    Ok(builder.finish())
}

struct Builder<'a> {
    pts: &'a [Point2],
    tris: Vec<Tri>,
    alive: Vec<bool>,
    free: Vec<u32>,
    mark: Vec<u32>,
    epoch: u32,
    last: u32,
    walk_turn: usize,
    stack: Vec<u32>,
    cavity: Vec<u32>,
    boundary: Vec<(u32, u32, u32)>,
    fresh: Vec<u32>,
}

impl<'a> Builder<'a> {
    fn new(pts: &'a [Point2]) -> Self {
        let cap = 2 * pts.len() + 8;
        Builder {
            pts,
            tris: Vec::with_capacity(cap),
            alive: Vec::with_capacity(cap),
            free: Vec::new(),
            mark: Vec::with_capacity(cap),
            epoch: 0,
            last: 0,
            walk_turn: 0,
            stack: Vec::new(),
            cavity: Vec::new(),
            boundary: Vec::new(),
            fresh: Vec::new(),
        }
    }

    fn coord(&self, i: u32) -> Coord<f64> {
        let p = self.pts[i as usize];
        Coord { x: p.x, y: p.y }
    }

    fn orient(&self, a: u32, b: u32, c: u32) -> f64 {
        orient2d(self.coord(a), self.coord(b), self.coord(c))
    }

    fn same(&self, a: u32, b: u32) -> bool {
        self.pts[a as usize] == self.pts[b as usize]
    }

    /// Builds the first triangle and its three ghosts; returns the indices
    /// used.
    fn start(&mut self, order: &[usize]) -> Result<[usize; 3]> {
        let i0 = order[0] as u32;
        let i1 = order
            .iter()
            .map(|&i| i as u32)
            .find(|&i| !self.same(i, i0))
            .ok_or_else(|| Error::DegenerateInput("all points coincide".into()))?;
        let i2 = order
            .iter()
            .map(|&i| i as u32)
            .find(|&i| self.orient(i0, i1, i) != 0.0)
            .ok_or_else(|| Error::DegenerateInput("all points are collinear".into()))?;
        let v = if self.orient(i0, i1, i2) > 0.0 {
            [i0, i1, i2]
        } else {
            [i0, i2, i1]
        };
        // triangle 0 is finite, 1 + e is the ghost across its edge e
        self.push(Tri { v, n: [1, 2, 3] });
        for e in 0..3 {
            let ghost = Tri {
                v: [v[(e + 2) % 3], v[(e + 1) % 3], GHOST],
                n: [1 + ((e + 2) % 3) as u32, 1 + ((e + 1) % 3) as u32, 0],
            };
            self.push(ghost);
        }
        self.last = 0;
        Ok([i0 as usize, i1 as usize, i2 as usize])
    }

    fn push(&mut self, t: Tri) -> u32 {
        if let Some(id) = self.free.pop() {
            self.tris[id as usize] = t;
            self.alive[id as usize] = true;
            id
        } else {
            self.tris.push(t);
            self.alive.push(true);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn in_conflict(&self, t: u32, p: u32) -> bool {
        let tri = &self.tris[t as usize];
        if tri.is_ghost() {
            let (a, b) = (tri.v[0], tri.v[1]);
            let o = self.orient(a, b, p);
            o > 0.0 || (o == 0.0 && self.strictly_between(a, b, p))
        } else {
            let [a, b, c] = tri.v;
            incircle(self.coord(a), self.coord(b), self.coord(c), self.coord(p)) > 0.0
        }
    }

    /// `p` collinear with `ab`; is it in the open segment?
    fn strictly_between(&self, a: u32, b: u32, p: u32) -> bool {
        let (a, b, p) = (
            self.pts[a as usize],
            self.pts[b as usize],
            self.pts[p as usize],
        );
        let d1 = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
        let d2 = (p.x - b.x) * (a.x - b.x) + (p.y - b.y) * (a.y - b.y);
        d1 > 0.0 && d2 > 0.0
    }

    /// Visibility walk from the last created triangle. Returns a finite
    /// triangle containing `p` (closed) or the ghost beyond which it lies.
    fn locate(&mut self, p: u32) -> u32 {
        let mut t = self.last;
        loop {
            let tri = self.tris[t as usize];
            if tri.is_ghost() {
                return t;
            }
            self.walk_turn = (self.walk_turn + 1) % 3;
            let mut next = None;
            for k in 0..3 {
                let e = (self.walk_turn + k) % 3;
                let a = tri.v[(e + 1) % 3];
                let b = tri.v[(e + 2) % 3];
                if self.orient(a, b, p) < 0.0 {
                    next = Some(tri.n[e]);
                    break;
                }
            }
            match next {
                Some(n) => t = n,
                None => return t,
            }
        }
    }

    fn insert(&mut self, p: u32) {
        let start = self.locate(p);
        let tri = self.tris[start as usize];
        if !tri.is_ghost() && tri.v.iter().any(|&v| self.same(v, p)) {
            return;
        }

        self.epoch += 1;
        let epoch = self.epoch;
        self.stack.clear();
        self.cavity.clear();
        self.boundary.clear();
        self.mark[start as usize] = epoch;
        self.stack.push(start);
        self.cavity.push(start);
        while let Some(t) = self.stack.pop() {
            let tri = self.tris[t as usize];
            for e in 0..3 {
                let nb = tri.n[e];
                if self.mark[nb as usize] == epoch {
                    continue;
                }
                if self.in_conflict(nb, p) {
                    self.mark[nb as usize] = epoch;
                    self.stack.push(nb);
                    self.cavity.push(nb);
                } else {
                    self.boundary
                        .push((tri.v[(e + 1) % 3], tri.v[(e + 2) % 3], nb));
                }
            }
        }

        for &t in &self.cavity {
            self.alive[t as usize] = false;
            self.free.push(t);
        }
        self.fresh.clear();
        for _ in 0..self.boundary.len() {
            let id = self.push(Tri {
                v: [0; 3],
                n: [0; 3],
            });
            self.fresh.push(id);
        }
        // the cavity boundary is a single cycle around p: every vertex
        // (the ghost included) starts exactly one boundary edge
        for (k, &(x, y, outer)) in self.boundary.iter().enumerate() {
            let after = self
                .boundary
                .iter()
                .position(|&(x2, _, _)| x2 == y)
                .expect("cavity boundary is closed");
            let before = self
                .boundary
                .iter()
                .position(|&(_, y2, _)| y2 == x)
                .expect("cavity boundary is closed");
            let id = self.fresh[k];
            self.tris[id as usize] = Tri {
                v: [x, y, p],
                n: [self.fresh[after], self.fresh[before], outer],
            }
            .normalized();
            let o = &mut self.tris[outer as usize];
            for j in 0..3 {
                if o.v[(j + 1) % 3] == y && o.v[(j + 2) % 3] == x {
                    o.n[j] = id;
                }
            }
        }
        self.last = *self
            .fresh
            .iter()
            .find(|&&id| !self.tris[id as usize].is_ghost())
            .expect("insertion creates a finite triangle");
    }

    fn finish(self) -> Triangulation {
        let mut index = vec![usize::MAX; self.tris.len()];
        let mut triangles = Vec::new();
        for (id, tri) in self.tris.iter().enumerate() {
            if self.alive[id] && !tri.is_ghost() {
                index[id] = triangles.len();
                triangles.push(tri.v.map(|v| v as usize));
            }
        }
        let neighbors = self
            .tris
            .iter()
            .enumerate()
            .filter(|(id, tri)| self.alive[*id] && !tri.is_ghost())
            .map(|(_, tri)| {
                tri.n.map(|n| {
                    let i = index[n as usize];
                    (i != usize::MAX).then_some(i)
                })
            })
            .collect();
        Triangulation {
            triangles,
            neighbors,
        }
    }
}

/// Indices sorted along a Hilbert curve over the bounding box.
fn hilbert_order(points: &[Point2]) -> Vec<usize> {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    const ORDER: u32 = 16;
    let cells = ((1u32 << ORDER) - 1) as f64;
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let hx = ((p.x - x0) / span * cells) as u32;
            let hy = ((p.y - y0) / span * cells) as u32;
            (hilbert_index(hx, hy, ORDER), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(mut x: u32, mut y: u32, order: u32) -> u64 {
    let n = 1u32 << order;
    let mut d = 0u64;
    let mut s = n >> 1;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}

/// Circumcentre of triangle `abc`.
pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point2::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RngState;
    use rand::Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = RngState::new(seed).rng();
        (0..n)
            .map(|_| Point2::new(rng.random(), rng.random()))
            .collect()
    }

    /// Brute force: no input point strictly inside any circumcircle.
    fn assert_empty_circumcircles(points: &[Point2], tri: &Triangulation) {
        for t in &tri.triangles {
            let [a, b, c] = t.map(|i| points[i]);
            let ca = Coord { x: a.x, y: a.y };
            let cb = Coord { x: b.x, y: b.y };
            let cc = Coord { x: c.x, y: c.y };
            assert!(orient2d(ca, cb, cc) > 0.0, "triangle {t:?} not CCW");
            for (i, p) in points.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                let inside = incircle(ca, cb, cc, Coord { x: p.x, y: p.y });
                assert!(inside <= 0.0, "point {i} inside circumcircle of {t:?}");
            }
        }
    }

    fn hull_area(points: &[Point2]) -> f64 {
        // monotone chain
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let cross =
            |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        let mut hull: Vec<Point2> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2
                    && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        let n = hull.len();
        (0..n)
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            / 2.0
    }

    fn area(points: &[Point2], tri: &Triangulation) -> f64 {
        tri.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| points[i]);
                ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2.0
            })
            .sum()
    }

    #[test]
    fn three_points_make_one_triangle() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let tri = delaunay_triangulate(&pts).unwrap();
        assert_eq!(tri.len(), 1);
        assert_eq!(tri.neighbors[0], [None, None, None]);
    }

    #[test]
    fn unit_square_gets_two_triangles() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let tri = delaunay_triangulate(&pts).unwrap();
        assert_eq!(tri.len(), 2);
        assert!((area(&pts, &tri) - 1.0).abs() < 1e-12);
        // exactly one diagonal, shared by both triangles
        let shared: Vec<usize> = tri.triangles[0]
            .iter()
            .copied()
            .filter(|v| tri.triangles[1].contains(v))
            .collect();
        assert_eq!(shared.len(), 2);
        let diagonal = [shared[0].min(shared[1]), shared[0].max(shared[1])];
        assert!(diagonal == [0, 2] || diagonal == [1, 3]);
        // deterministic tie-break
        assert_eq!(delaunay_triangulate(&pts).unwrap(), tri);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            delaunay_triangulate(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(Error::DegenerateInput(_))
        ));
        let line: Vec<Point2> = (0..5)
            .map(|i| Point2::new(i as f64, 2.0 * i as f64))
            .collect();
        assert!(matches!(
            delaunay_triangulate(&line),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn random_points_satisfy_empty_circumcircle() {
        for seed in 0..20 {
            let pts = random_points(100, seed);
            let tri = delaunay_triangulate(&pts).unwrap();
            assert_empty_circumcircles(&pts, &tri);
            assert!((area(&pts, &tri) - hull_area(&pts)).abs() < 1e-9);
        }
    }

    #[test]
    fn lattice_with_collinear_hull_is_valid() {
        let pts: Vec<Point2> = (0..8)
            .flat_map(|i| (0..6).map(move |j| Point2::new(i as f64, j as f64)))
            .collect();
        let tri = delaunay_triangulate(&pts).unwrap();
        assert_eq!(tri.len(), 2 * 7 * 5);
        assert!((area(&pts, &tri) - 35.0).abs() < 1e-12);
        assert_empty_circumcircles(&pts, &tri);
    }

    #[test]
    fn duplicates_are_skipped() {
        let mut pts = random_points(50, 3);
        pts.push(pts[10]);
        pts.push(pts[0]);
        let tri = delaunay_triangulate(&pts).unwrap();
        assert!(tri
            .triangles
            .iter()
            .all(|t| !t.contains(&50) && !t.contains(&51)));
        assert_empty_circumcircles(&pts[..50], &tri);
    }

    #[test]
    fn neighbors_are_mutual() {
        let pts = random_points(200, 9);
        let tri = delaunay_triangulate(&pts).unwrap();
        for (t, nbrs) in tri.neighbors.iter().enumerate() {
            for (e, n) in nbrs.iter().enumerate() {
                let a = tri.triangles[t][(e + 1) % 3];
                let b = tri.triangles[t][(e + 2) % 3];
                if let Some(n) = *n {
                    assert!(tri.neighbors[n].contains(&Some(t)));
                    assert!(tri.triangles[n].contains(&a) && tri.triangles[n].contains(&b));
                }
            }
        }
        // Euler: 3 T = 2 E - hull edges
        let hull = tri
            .neighbors
            .iter()
            .flatten()
            .filter(|n| n.is_none())
            .count();
        assert_eq!(tri.edges().count() * 2 - hull, 3 * tri.len());
    }

    #[test]
    fn circumcenter_is_equidistant() {
        let (a, b, c) = (
            Point2::new(0.3, 0.1),
            Point2::new(2.0, 0.5),
            Point2::new(1.1, 1.9),
        );
        let o = circumcenter(a, b, c);
        assert!((o.dist(a) - o.dist(b)).abs() < 1e-12);
        assert!((o.dist(a) - o.dist(c)).abs() < 1e-12);
    }

    #[test]
    fn hilbert_index_is_a_bijection_on_small_grid() {
        let mut seen: Vec<u64> = (0..16)
            .flat_map(|x| (0..16).map(move |y| hilbert_index(x, y, 4)))
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..256).collect::<Vec<_>>());
    }
}
