use serde::{Deserialize, Serialize};

/// Which torus directions a component winds around.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapState {
    pub horizontal: bool,
    pub vertical: bool,
}

impl WrapState {
    /// A component crossing the window in either direction counts as
    /// "infinite".
    pub fn any(self) -> bool {
        self.horizontal || self.vertical
    }

    fn merge(self, other: WrapState) -> WrapState {
        WrapState {
            horizontal: self.horizontal || other.horizontal,
            vertical: self.vertical || other.vertical,
        }
    }
}

/// Disjoint sets over torus points that also track, for every node, its net
/// winding (in units of the window side) relative to the root of its set.
///
/// Joining two nodes that already share a root but whose implied windings
/// disagree closes a non-contractible loop: the set wraps around the torus.
#[derive(Debug, Clone, Default)]
pub struct WrapUnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    offset: Vec<[i32; 2]>,
    wrap: Vec<WrapState>,
}

impl WrapUnionFind {
    pub fn new(n: usize) -> Self {
        let mut uf = WrapUnionFind::default();
        for _ in 0..n {
            uf.add();
        }
        uf
    }

    pub fn with_capacity(n: usize) -> Self {
        WrapUnionFind {
            parent: Vec::with_capacity(n),
            size: Vec::with_capacity(n),
            offset: Vec::with_capacity(n),
            wrap: Vec::with_capacity(n),
        }
    }

    /// Adds a singleton and returns its index.
    pub fn add(&mut self) -> usize {
        let i = self.parent.len();
        self.parent.push(i as u32);
        self.size.push(1);
        self.offset.push([0, 0]);
        self.wrap.push(WrapState::default());
        i
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Root of `x` and the winding of `x` relative to that root.
    pub fn find(&mut self, x: usize) -> (usize, [i32; 2]) {
        let mut root = x;
        let mut acc = [0i32; 2];
        while self.parent[root] as usize != root {
            acc[0] += self.offset[root][0];
            acc[1] += self.offset[root][1];
            root = self.parent[root] as usize;
        }
        let mut y = x;
        let mut wy = acc;
        while y != root {
            let next = self.parent[y] as usize;
            let old = self.offset[y];
            self.parent[y] = root as u32;
            self.offset[y] = wy;
            wy = [wy[0] - old[0], wy[1] - old[1]];
            y = next;
        }
        (root, acc)
    }

    /// Records a link from `i` to the image of `j` shifted by `shift`
    /// windows, i.e. `winding(j) - winding(i) = shift`. Returns the wrap
    /// state of the merged set.
    pub fn union(&mut self, i: usize, j: usize, shift: [i32; 2]) -> WrapState {
        let (ri, wi) = self.find(i);
        let (rj, wj) = self.find(j);
        if ri == rj {
            let d = [wi[0] + shift[0] - wj[0], wi[1] + shift[1] - wj[1]];
            let found = WrapState {
                horizontal: d[0] != 0,
                vertical: d[1] != 0,
            };
            self.wrap[ri] = self.wrap[ri].merge(found);
            return self.wrap[ri];
        }
        // winding of rj in ri's frame
        let rel = [wi[0] + shift[0] - wj[0], wi[1] + shift[1] - wj[1]];
        let (root, child, child_offset) = if self.size[ri] >= self.size[rj] {
            (ri, rj, rel)
        } else {
            (rj, ri, [-rel[0], -rel[1]])
        };
        self.parent[child] = root as u32;
        self.offset[child] = child_offset;
        self.size[root] += self.size[child];
        self.wrap[root] = self.wrap[root].merge(self.wrap[child]);
        self.wrap[root]
    }

    pub fn wrap_state(&mut self, x: usize) -> WrapState {
        let (root, _) = self.find(x);
        self.wrap[root]
    }

    pub fn same_set(&mut self, i: usize, j: usize) -> bool {
        self.find(i).0 == self.find(j).0
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let (root, _) = self.find(x);
        self.size[root] as usize
    }

    /// True if any set wraps.
    pub fn any_wrapping(&mut self) -> bool {
        (0..self.len()).any(|i| self.parent[i] as usize == i && self.wrap[i].any())
    }

    /// Root index of every node.
    pub fn roots(&mut self) -> Vec<usize> {
        (0..self.len()).map(|i| self.find(i).0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_links_do_not_wrap() {
        let mut uf = WrapUnionFind::new(4);
        assert!(!uf.union(0, 1, [1, 0]).any());
        assert!(!uf.union(1, 2, [0, -1]).any());
        assert!(!uf.union(3, 2, [0, 0]).any());
        assert_eq!(uf.set_size(0), 4);
        // consistent cycle: 0 -> 1 -> 2 has net (1, -1)
        assert!(!uf.union(0, 2, [1, -1]).any());
    }

    #[test]
    fn inconsistent_cycle_wraps() {
        let mut uf = WrapUnionFind::new(3);
        uf.union(0, 1, [0, 0]);
        uf.union(1, 2, [0, 0]);
        let w = uf.union(2, 0, [1, 0]);
        assert!(w.horizontal && !w.vertical);
        let w = uf.union(0, 1, [0, 1]);
        assert!(w.horizontal && w.vertical);
    }

    #[test]
    fn self_link_with_shift_wraps() {
        let mut uf = WrapUnionFind::new(1);
        assert!(uf.union(0, 0, [0, 1]).vertical);
    }

    #[test]
    fn flags_survive_merges() {
        let mut uf = WrapUnionFind::new(4);
        uf.union(0, 1, [0, 0]);
        uf.union(1, 0, [0, 1]);
        uf.union(2, 3, [0, 0]);
        assert!(!uf.wrap_state(3).any());
        uf.union(3, 0, [5, 5]);
        assert!(uf.wrap_state(2).vertical);
        assert!(!uf.wrap_state(2).horizontal);
    }

    #[test]
    fn windings_compose_through_compression() {
        let mut uf = WrapUnionFind::new(5);
        for i in 0..4 {
            uf.union(i, i + 1, [1, 0]);
        }
        let (r, w0) = uf.find(0);
        let (r4, w4) = uf.find(4);
        assert_eq!(r, r4);
        assert_eq!(w4[0] - w0[0], 4);
        assert!(!uf.union(4, 0, [-4, 0]).any());
        assert!(uf.union(4, 0, [-3, 0]).horizontal);
    }
}
