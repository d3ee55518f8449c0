use std::collections::HashMap;

use super::{distance_matrix, enclosing_radius, DistanceMatrix, Interval, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::takens::PointCloud;

pub const ORACLE_MAX_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Every simplex up to `max_dim` whose diameter does not exceed `cap`,
/// sorted by (value, dimension, lexicographic vertices).
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    pub simplices: Vec<Simplex>,
}

impl FilteredComplex {
    pub fn vietoris_rips(dm: &DistanceMatrix, max_dim: usize, cap: f64) -> Self {
        let n = dm.len();
        let mut simplices = Vec::new();
        let mut current: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        for k in 0..=max_dim {
            for s in &current {
                simplices.push(Simplex {
                    vertices: s.clone(),
                    value: diameter(dm, s),
                });
            }
            if k == max_dim {
                break;
            }
            let mut next = Vec::new();
            for s in &current {
                let last = *s.last().unwrap();
                for v in (last + 1)..n {
                    let mut t = s.clone();
                    t.push(v);
                    if diameter(dm, &t) <= cap {
                        next.push(t);
                    }
                }
            }
            current = next;
        }
        simplices.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.dim().cmp(&b.dim()))
                .then_with(|| a.vertices.cmp(&b.vertices))
        });
        FilteredComplex { simplices }
    }

    /// Every face of every simplex is present with a value no larger.
    pub fn is_nested(&self) -> bool {
        let pos: HashMap<&[usize], usize> = self
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.as_slice(), i))
            .collect();
        self.simplices.iter().enumerate().all(|(i, s)| {
            s.dim() == 0
                || faces(&s.vertices).all(|f| {
                    pos.get(f.as_slice())
                        .is_some_and(|&j| j < i && self.simplices[j].value <= s.value)
                })
        })
    }

    /// Column `j` lists the row indices of the codimension-1 faces of simplex `j`.
    pub fn boundary_matrix(&self) -> Vec<Vec<usize>> {
        let pos: HashMap<&[usize], usize> = self
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.as_slice(), i))
            .collect();
        self.simplices
            .iter()
            .map(|s| {
                if s.dim() == 0 {
                    return Vec::new();
                }
                let mut col: Vec<usize> = faces(&s.vertices).map(|f| pos[f.as_slice()]).collect();
                col.sort_unstable();
                col
            })
            .collect()
    }
}

fn diameter(dm: &DistanceMatrix, s: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            d = d.max(dm.get(a, b));
        }
    }
    d
}

fn faces(vertices: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..vertices.len()).map(move |skip| {
        vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .collect()
    })
}

/// Standard persistence algorithm on the full boundary matrix, with no
/// clearing, no early exit and no apparent-pair shortcuts.
pub fn brute_force_persistence(cloud: &PointCloud, max_dim: usize) -> Result<PersistenceDiagram> {
    if max_dim > 1 {
        return Err(Error::DimensionUnsupported(max_dim));
    }
    if cloud.len() > ORACLE_MAX_POINTS {
        return Err(Error::TooLargeForOracle {
            n: cloud.len(),
            max: ORACLE_MAX_POINTS,
        });
    }
    let dm = distance_matrix(cloud);
    let cap = enclosing_radius(&dm);
    let complex = FilteredComplex::vietoris_rips(&dm, max_dim + 1, cap);
    let mut columns = complex.boundary_matrix();
    let m = columns.len();
    let mut low_owner: Vec<Option<usize>> = vec![None; m];

    for j in 0..m {
        while let Some(&low) = columns[j].last() {
            let Some(k) = low_owner[low] else { break };
            let other = columns[k].clone();
            let col = &mut columns[j];
            for r in other {
                match col.binary_search(&r) {
                    Ok(pos) => {
                        col.remove(pos);
                    }
                    Err(pos) => col.insert(pos, r),
                }
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner[low] = Some(j);
        }
    }

    let mut dims: [Vec<Interval>; 2] = [Vec::new(), Vec::new()];
    for (j, col) in columns.iter().enumerate() {
        if let Some(&low) = col.last() {
            let born = &complex.simplices[low];
            if born.dim() <= max_dim {
                dims[born.dim()].push(Interval::new(born.value, complex.simplices[j].value));
            }
        } else if low_owner[j].is_none() {
            let s = &complex.simplices[j];
            if s.dim() <= max_dim {
                dims[s.dim()].push(Interval::new(s.value, cap));
            }
        }
    }
    let [h0, h1] = dims;
    Ok(PersistenceDiagram::new(h0, h1, cap))
}
