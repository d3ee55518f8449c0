//! Vietoris–Rips persistent homology in dimensions 0 and 1.
//!
//! The filtration value of a simplex is its diameter (longest pairwise
//! distance), so an edge enters at its length. Every diagram is truncated at
//! the enclosing radius: at that scale the complex is a cone and therefore
//! contractible, so every class still alive is given that value as its death.
//!
//! Two engines compute the same diagrams:
//!
//! * [`vr_persistence`] uses union-find for H0 and a lazily enumerated,
//!   early-terminating reduction of the triangle boundary matrix for H1.
//! * [`brute_force_persistence`] builds the complete boundary matrix and runs
//!   the textbook left-to-right reduction. It exists to check the first one.

mod oracle;
mod rips;

pub use oracle::{brute_force_persistence, FilteredComplex, Simplex, ORACLE_MAX_POINTS};
pub use rips::vr_persistence;

use crate::takens::PointCloud;

/// Symmetric matrix of Euclidean distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Pairwise Euclidean distances. Each pair is computed once and mirrored.
pub fn distance_matrix(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let p = cloud.point(i);
        for j in (i + 1)..n {
            let q = cloud.point(j);
            let d = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { n, values }
}

/// `min_p max_q d(p, q)`; zero for a single point.
pub fn enclosing_radius(dm: &DistanceMatrix) -> f64 {
    if dm.is_empty() {
        return 0.0;
    }
    (0..dm.len())
        .map(|i| dm.row(i).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// One homology class: alive on `[birth, death)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Self {
        Interval { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Intervals for homology dimensions 0 and 1, plus the filtration ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    dims: [Vec<Interval>; 2],
    cap: f64,
}

impl PersistenceDiagram {
    /// Builds a diagram, dropping zero-persistence pairs and sorting each
    /// dimension by (birth, death).
    pub fn new(h0: Vec<Interval>, h1: Vec<Interval>, cap: f64) -> Self {
        let clean = |mut v: Vec<Interval>| {
            v.retain(|iv| iv.death > iv.birth);
            v.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
            v
        };
        PersistenceDiagram {
            dims: [clean(h0), clean(h1)],
            cap,
        }
    }

    pub fn empty(cap: f64) -> Self {
        PersistenceDiagram {
            dims: [Vec::new(), Vec::new()],
            cap,
        }
    }

    /// Intervals in dimension `k`; empty for any `k > 1`.
    pub fn dim(&self, k: usize) -> &[Interval] {
        self.dims.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Multiply every birth, death and the cap by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<Interval>| v.iter().map(|iv| Interval::new(iv.birth * c, iv.death * c)).collect();
        PersistenceDiagram {
            dims: [s(&self.dims[0]), s(&self.dims[1])],
            cap: self.cap * c,
        }
    }

    /// True when both diagrams hold the same intervals per dimension, up to
    /// `tol` on every coordinate.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.cap - other.cap).abs() <= tol
            && (0..2).all(|k| {
                let (a, b) = (self.dim(k), other.dim(k));
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| (x.birth - y.birth).abs() <= tol && (x.death - y.death).abs() <= tol)
            })
    }
}
