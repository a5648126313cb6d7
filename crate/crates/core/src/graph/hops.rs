//! Chemical (hop-count) distances.

use std::collections::VecDeque;

use super::GilbertGraph;

pub const UNREACHABLE: u32 = u32::MAX;

/// Largest graph for which [`all_pairs_hops`] uses Floyd–Warshall.
pub const FLOYD_WARSHALL_LIMIT: usize = 2000;

/// Hop counts from each source to every device (`UNREACHABLE` if none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopTable {
    pub sources: Vec<usize>,
    pub rows: Vec<Vec<u32>>,
}

impl HopTable {
    pub fn get(&self, source_row: usize, target: usize) -> u32 {
        self.rows[source_row][target]
    }
}

pub fn bfs_hops(g: &GilbertGraph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.len()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for l in g.neighbors(u) {
            let v = l.to as usize;
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// One breadth-first search per source.
pub fn hop_distances(g: &GilbertGraph, sources: &[usize]) -> HopTable {
    HopTable {
        sources: sources.to_vec(),
        rows: sources.iter().map(|&s| bfs_hops(g, s)).collect(),
    }
}

/// Reference all-pairs hop counts, O(n³).
pub fn floyd_warshall(g: &GilbertGraph) -> Vec<Vec<u32>> {
    let n = g.len();
    let mut d = vec![vec![UNREACHABLE; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
        for l in g.neighbors(i) {
            row[l.to as usize] = 1;
        }
    }
    for k in 0..n {
        let dk = d[k].clone();
        for row in d.iter_mut() {
            let dik = row[k];
            if dik == UNREACHABLE {
                continue;
            }
            for (dij, &dkj) in row.iter_mut().zip(&dk) {
                if dkj != UNREACHABLE && dik + dkj < *dij {
                    *dij = dik + dkj;
                }
            }
        }
    }
    d
}

/// All-pairs hop counts: Floyd–Warshall up to [`FLOYD_WARSHALL_LIMIT`]
/// devices, breadth-first search beyond.
pub fn all_pairs_hops(g: &GilbertGraph) -> Vec<Vec<u32>> {
    if g.len() <= FLOYD_WARSHALL_LIMIT {
        floyd_warshall(g)
    } else {
        (0..g.len()).map(|s| bfs_hops(g, s)).collect()
    }
}

/// Hop counts along paths with zero net winding.
///
/// The torus graph is lifted to a 3×3 block of window copies centred on the
/// source's copy; the distance to a device is the breadth-first distance to
/// its copy in the centre window. These are the hop counts that match
/// planar (unwrapped) separations. Paths that would leave the 3×3 block are
/// not considered.
pub struct LiftedHops<'g> {
    graph: &'g GilbertGraph,
    dist: Vec<u32>,
    queue: VecDeque<u32>,
    out: Vec<u32>,
    target: Vec<u32>,
    epoch: u32,
}

const TILES: usize = 9;
const CENTER: usize = 4;

impl<'g> LiftedHops<'g> {
    pub fn new(graph: &'g GilbertGraph) -> Self {
        LiftedHops {
            graph,
            dist: vec![UNREACHABLE; graph.len() * TILES],
            queue: VecDeque::new(),
            out: vec![UNREACHABLE; graph.len()],
            target: vec![0; graph.len()],
            epoch: 0,
        }
    }

    /// Zero-winding hop counts from `source` to every device. With
    /// `Some(targets)` the search stops once all of them are settled, and
    /// other entries may be left `UNREACHABLE`.
    pub fn from_source(&mut self, source: usize, targets: Option<&[usize]>) -> &[u32] {
        self.dist.fill(UNREACHABLE);
        self.queue.clear();
        self.epoch += 1;
        let mut remaining = usize::MAX;
        if let Some(targets) = targets {
            remaining = 0;
            for &t in targets {
                if t != source && self.target[t] != self.epoch {
                    self.target[t] = self.epoch;
                    remaining += 1;
                }
            }
        }
        let start = source * TILES + CENTER;
        self.dist[start] = 0;
        self.queue.push_back(start as u32);
        while remaining > 0 {
            let Some(state) = self.queue.pop_front() else {
                break;
            };
            let state = state as usize;
            let (u, tile) = (state / TILES, state % TILES);
            let (tx, ty) = ((tile % 3) as i32 - 1, (tile / 3) as i32 - 1);
            let next = self.dist[state] + 1;
            for l in self.graph.neighbors(u) {
                let nx = tx + i32::from(l.shift[0]);
                let ny = ty + i32::from(l.shift[1]);
                if !(-1..=1).contains(&nx) || !(-1..=1).contains(&ny) {
                    continue;
                }
                let ntile = ((ny + 1) * 3 + (nx + 1)) as usize;
                let v = l.to as usize * TILES + ntile;
                if self.dist[v] == UNREACHABLE {
                    self.dist[v] = next;
                    self.queue.push_back(v as u32);
                    if ntile == CENTER && self.target[l.to as usize] == self.epoch {
                        remaining -= 1;
                    }
                }
            }
        }
        for (i, o) in self.out.iter_mut().enumerate() {
            *o = self.dist[i * TILES + CENTER];
        }
        &self.out
    }
}
