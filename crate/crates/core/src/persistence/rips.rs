use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{distance_matrix, enclosing_radius, DistanceMatrix, Interval, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::takens::PointCloud;

const NO_EDGE: u32 = u32::MAX;

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let next = self.parent[x as usize];
            self.parent[x as usize] = self.parent[next as usize];
            x = next;
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
        true
    }
}

/// Edges of the truncated Rips complex in filtration order, with a dense
/// lookup from vertex pair to edge index.
struct EdgeFiltration {
    n: usize,
    edges: Vec<(u32, u32)>,
    lengths: Vec<f64>,
    index: Vec<u32>,
}

impl EdgeFiltration {
    fn new(dm: &DistanceMatrix, cap: f64) -> Self {
        let n = dm.len();
        let mut order: Vec<(f64, u32, u32)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dm.get(i, j);
                if d <= cap {
                    order.push((d, i as u32, j as u32));
                }
            }
        }
        // (length, lexicographic vertices); the sort is total, so ties are deterministic.
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut index = vec![NO_EDGE; n * n];
        for (k, &(_, i, j)) in order.iter().enumerate() {
            index[i as usize * n + j as usize] = k as u32;
            index[j as usize * n + i as usize] = k as u32;
        }
        EdgeFiltration {
            n,
            edges: order.iter().map(|&(_, i, j)| (i, j)).collect(),
            lengths: order.iter().map(|&(d, _, _)| d).collect(),
            index,
        }
    }

    #[inline]
    fn edge(&self, a: u32, b: u32) -> u32 {
        self.index[a as usize * self.n + b as usize]
    }

    #[inline]
    fn length(&self, e: u32) -> f64 {
        self.lengths[e as usize]
    }

    /// Triangle key: longest edge, then the vertex opposite it. This is the
    /// triangle filtration order; every face precedes its coface.
    #[inline]
    fn key(&self, r: u32, opposite: u32) -> u64 {
        r as u64 * self.n as u64 + opposite as u64
    }

    fn diameter(&self, key: u64) -> f64 {
        self.length((key / self.n as u64) as u32)
    }

    /// First triangle whose longest edge is `e`, if any.
    fn first_in_group(&self, e: u32) -> Option<u64> {
        let (a, b) = self.edges[e as usize];
        (0..self.n as u32)
            .find(|&c| c != a && c != b && self.edge(a, c) < e && self.edge(b, c) < e)
            .map(|c| self.key(e, c))
    }

    /// Keys of the triangles containing edge `e`, in vertex order.
    fn coboundary(&self, e: u32) -> impl Iterator<Item = u64> + '_ {
        let (a, b) = self.edges[e as usize];
        (0..self.n as u32).filter_map(move |c| {
            if c == a || c == b {
                return None;
            }
            let (ea, eb) = (self.edge(a, c), self.edge(b, c));
            if ea == NO_EDGE || eb == NO_EDGE {
                None
            } else if e > ea && e > eb {
                Some(self.key(e, c))
            } else if ea > eb {
                Some(self.key(ea, b))
            } else {
                Some(self.key(eb, a))
            }
        })
    }
}

/// XOR of two sorted sets, written into `out`.
fn symmetric_difference<T: Ord + Copy>(a: &[T], b: &[T], out: &mut Vec<T>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Vietoris–Rips persistence in dimensions `0..=max_dim`.
///
/// H0 comes from union-find over edges in filtration order (every vertex is
/// born at 0, so each merge records `(0, length)`). H1 reduces edge
/// coboundaries over GF(2) in reverse filtration order, which yields the same
/// pairs as reducing triangle boundaries:
///
/// * edges that killed an H0 class are cleared (never reduced);
/// * a positive edge that is the longest edge of some triangle pairs with the
///   first such triangle, a zero-persistence apparent pair, without building
///   its column; such columns are rebuilt on demand when used in a reduction;
/// * only the remaining edges, which start the classes that actually persist,
///   are reduced and stored.
pub fn vr_persistence(cloud: &PointCloud, max_dim: usize) -> Result<PersistenceDiagram> {
    if max_dim > 1 {
        return Err(Error::DimensionUnsupported(max_dim));
    }
    let dm = distance_matrix(cloud);
    Ok(vr_persistence_from_distances(&dm, max_dim))
}

pub(crate) fn vr_persistence_from_distances(dm: &DistanceMatrix, max_dim: usize) -> PersistenceDiagram {
    let n = dm.len();
    let cap = enclosing_radius(dm);
    let filt = EdgeFiltration::new(dm, cap);
    let n_edges = filt.edges.len();

    let mut uf = UnionFind::new(n);
    let mut negative = vec![false; n_edges];
    let mut h0 = Vec::with_capacity(n);
    for (k, &(a, b)) in filt.edges.iter().enumerate() {
        if uf.union(a, b) {
            negative[k] = true;
            h0.push(Interval::new(0.0, filt.lengths[k]));
        }
    }
    h0.push(Interval::new(0.0, cap));

    let h1 = if max_dim >= 1 {
        reduce_coboundaries(&filt, &negative, cap)
    } else {
        Vec::new()
    };
    PersistenceDiagram::new(h0, h1, cap)
}

/// Lowest entry of a GF(2) column kept as a min-heap with repeats; equal
/// entries cancel in pairs. The pivot stays in the heap.
fn column_pivot(heap: &mut BinaryHeap<Reverse<u64>>) -> Option<u64> {
    while let Some(Reverse(top)) = heap.pop() {
        if heap.peek() == Some(&Reverse(top)) {
            heap.pop();
        } else {
            heap.push(Reverse(top));
            return Some(top);
        }
    }
    None
}

fn reduce_coboundaries(filt: &EdgeFiltration, negative: &[bool], cap: f64) -> Vec<Interval> {
    // triangle -> edge whose reduced column has it as lowest entry
    let mut pivot_of: HashMap<u64, u32> = HashMap::new();
    // reduced columns of non-apparent edges, as the sorted set of edges whose
    // coboundaries they sum
    let mut combination: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut h1 = Vec::new();
    let mut heap = BinaryHeap::new();
    let (mut sum, mut scratch) = (Vec::new(), Vec::new());

    for e in (0..filt.edges.len() as u32).rev() {
        if negative[e as usize] {
            continue;
        }
        if let Some(t) = filt.first_in_group(e) {
            pivot_of.insert(t, e);
            continue;
        }
        heap.clear();
        heap.extend(filt.coboundary(e).map(Reverse));
        sum.clear();
        sum.push(e);
        let low = loop {
            let Some(low) = column_pivot(&mut heap) else { break None };
            let Some(&owner) = pivot_of.get(&low) else {
                break Some(low);
            };
            let added = combination
                .get(&owner)
                .map_or(std::slice::from_ref(&owner), Vec::as_slice);
            for &f in added {
                heap.extend(filt.coboundary(f).map(Reverse));
            }
            symmetric_difference(&sum, added, &mut scratch);
            std::mem::swap(&mut sum, &mut scratch);
        };
        match low {
            Some(low) => {
                pivot_of.insert(low, e);
                h1.push(Interval::new(filt.length(e), filt.diameter(low)));
                combination.insert(e, sum.clone());
            }
            // unreachable at the enclosing radius (the complex is a cone)
            None => h1.push(Interval::new(filt.length(e), cap)),
        }
    }
    h1
}
