//! The 18 topological features of a persistence diagram.
//!
//! | ids   | feature                          |
//! |-------|----------------------------------|
//! | 0, 1  | bottleneck amplitude, H0 / H1    |
//! | 2, 3  | wasserstein amplitude            |
//! | 4, 5  | betti amplitude                  |
//! | 6, 7  | landscape amplitude              |
//! | 8, 9  | silhouette amplitude             |
//! | 10, 11| heat amplitude                   |
//! | 12, 13| normalized persistence entropy   |
//! | 14, 15| persistence entropy              |
//! | 16, 17| number of points                 |
//!
//! Amplitudes are distances to the empty diagram. Grid-based ones sample a
//! uniform grid over `[0, cap]`, where `cap` is the diagram's filtration
//! ceiling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{Interval, PersistenceDiagram};

pub const TDA_FEATURE_COUNT: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeMetric {
    Bottleneck,
    Wasserstein,
    Betti,
    Landscape,
    Silhouette,
    Heat,
}

impl AmplitudeMetric {
    /// Table order of the amplitude features.
    pub const ALL: [AmplitudeMetric; 6] = [
        AmplitudeMetric::Bottleneck,
        AmplitudeMetric::Wasserstein,
        AmplitudeMetric::Betti,
        AmplitudeMetric::Landscape,
        AmplitudeMetric::Silhouette,
        AmplitudeMetric::Heat,
    ];
}

impl fmt::Display for AmplitudeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AmplitudeMetric::Bottleneck => "bottleneck",
            AmplitudeMetric::Wasserstein => "wasserstein",
            AmplitudeMetric::Betti => "betti",
            AmplitudeMetric::Landscape => "landscape",
            AmplitudeMetric::Silhouette => "silhouette",
            AmplitudeMetric::Heat => "heat",
        };
        f.write_str(s)
    }
}

impl FromStr for AmplitudeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AmplitudeMetric::ALL
            .into_iter()
            .find(|m| m.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Shared settings for all amplitude metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmplitudeSettings {
    /// Norm order.
    pub p: f64,
    pub grid_size: usize,
    /// Landscape layers.
    pub layers: usize,
    /// Heat kernel width; `None` means `cap / 10`.
    pub sigma: Option<f64>,
    /// Silhouette weight power.
    pub w: f64,
}

impl Default for AmplitudeSettings {
    fn default() -> Self {
        AmplitudeSettings {
            p: 2.0,
            grid_size: 100,
            layers: 2,
            sigma: None,
            w: 1.0,
        }
    }
}

impl AmplitudeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParam(format!(
                "norm order p must be >= 1, got {}",
                self.p
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParam("grid_size must be >= 2".into()));
        }
        if self.layers == 0 {
            return Err(Error::InvalidParam("landscape needs at least one layer".into()));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return Err(Error::InvalidParam(format!("heat sigma must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeParams {
    pub metric: AmplitudeMetric,
    pub settings: AmplitudeSettings,
}

/// Uniform sample points `0, cap/(G-1), ..., cap`.
struct Grid {
    points: Vec<f64>,
    step: f64,
}

impl Grid {
    fn over(cap: f64, size: usize) -> Grid {
        let step = cap / (size - 1) as f64;
        Grid {
            points: (0..size).map(|i| i as f64 * step).collect(),
            step,
        }
    }
}

fn lp_norm(values: impl Iterator<Item = f64>, p: f64, weight: f64) -> f64 {
    (values.map(|v| v.abs().powf(p)).sum::<f64>() * weight).powf(1.0 / p)
}

pub fn num_points(diag: &PersistenceDiagram, k: usize) -> usize {
    diag.dim(k).len()
}

/// Shannon entropy of the lifetimes `l / L`. The normalized form divides by
/// `ln m`; diagrams with fewer than two points have entropy 0.
pub fn persistence_entropy(diag: &PersistenceDiagram, k: usize, normalized: bool) -> f64 {
    let pairs = diag.dim(k);
    let total: f64 = pairs.iter().map(Interval::persistence).sum();
    if pairs.len() < 2 || total <= 0.0 {
        return 0.0;
    }
    let entropy = -pairs
        .iter()
        .map(|iv| {
            let q = iv.persistence() / total;
            if q > 0.0 {
                q * q.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    let entropy = entropy.max(0.0);
    if normalized {
        (entropy / (pairs.len() as f64).ln()).min(1.0)
    } else {
        entropy
    }
}

fn betti_on(pairs: &[Interval], grid: &Grid) -> Vec<f64> {
    grid.points
        .iter()
        .map(|&t| pairs.iter().filter(|iv| iv.birth <= t && t < iv.death).count() as f64)
        .collect()
}

/// Number of alive classes at each point of a `grid_size` grid over `[0, cap]`.
pub fn betti_curve(diag: &PersistenceDiagram, k: usize, grid_size: usize) -> Vec<f64> {
    betti_on(diag.dim(k), &Grid::over(diag.cap(), grid_size.max(2)))
}

fn tent(iv: &Interval, t: f64) -> f64 {
    (t - iv.birth).min(iv.death - t).max(0.0)
}

/// Distance of the dimension-`k` diagram to the empty diagram.
pub fn amplitude(diag: &PersistenceDiagram, k: usize, params: &AmplitudeParams) -> f64 {
    let pairs = diag.dim(k);
    if pairs.is_empty() {
        return 0.0;
    }
    let s = &params.settings;
    let p = s.p;
    let cap = diag.cap();
    match params.metric {
        AmplitudeMetric::Bottleneck => pairs.iter().map(|iv| iv.persistence() / 2.0).fold(0.0, f64::max),
        AmplitudeMetric::Wasserstein => lp_norm(
            pairs.iter().map(|iv| iv.persistence() / std::f64::consts::SQRT_2),
            p,
            1.0,
        ),
        AmplitudeMetric::Betti => {
            let grid = Grid::over(cap, s.grid_size);
            lp_norm(betti_on(pairs, &grid).into_iter(), p, grid.step)
        }
        AmplitudeMetric::Landscape => {
            let grid = Grid::over(cap, s.grid_size);
            let mut values = Vec::with_capacity(grid.points.len() * s.layers);
            let mut tents = Vec::with_capacity(pairs.len());
            for &t in &grid.points {
                tents.clear();
                tents.extend(pairs.iter().map(|iv| tent(iv, t)));
                tents.sort_by(|a, b| b.total_cmp(a));
                values.extend((0..s.layers).map(|l| tents.get(l).copied().unwrap_or(0.0)));
            }
            lp_norm(values.into_iter(), p, grid.step)
        }
        AmplitudeMetric::Silhouette => {
            let grid = Grid::over(cap, s.grid_size);
            let weights: Vec<f64> = pairs.iter().map(|iv| iv.persistence().powf(s.w)).collect();
            let total: f64 = weights.iter().sum();
            let curve = grid
                .points
                .iter()
                .map(|&t| pairs.iter().zip(&weights).map(|(iv, w)| w * tent(iv, t)).sum::<f64>() / total);
            lp_norm(curve, p, grid.step)
        }
        AmplitudeMetric::Heat => heat_amplitude(pairs, cap, s),
    }
}

/// L2 norm of the Gaussian-smoothed diagram minus its reflection through the
/// diagonal, sampled on a `grid_size x grid_size` raster over `[0, cap]^2`.
/// The kernel is separable, so the raster is `A B^T - B A^T` with
/// `A[i][p] = g(t_i - birth_p)` and `B[j][p] = g(t_j - death_p)`.
fn heat_amplitude(pairs: &[Interval], cap: f64, s: &AmplitudeSettings) -> f64 {
    if cap <= 0.0 {
        return 0.0;
    }
    let sigma = s.sigma.unwrap_or(cap / 10.0);
    let grid = Grid::over(cap, s.grid_size);
    let g = grid.points.len();
    let norm = 1.0 / (2.0 * PI * sigma * sigma);
    let gauss = |x: f64| (-x * x / (2.0 * sigma * sigma)).exp();
    let column = |centre: f64| -> Vec<f64> { grid.points.iter().map(|&t| gauss(t - centre)).collect() };
    let births: Vec<Vec<f64>> = pairs.iter().map(|iv| column(iv.birth)).collect();
    let deaths: Vec<Vec<f64>> = pairs.iter().map(|iv| column(iv.death)).collect();

    let mut raster = vec![0.0; g * g];
    for (a, b) in births.iter().zip(&deaths) {
        for i in 0..g {
            let (ai, bi) = (a[i], b[i]);
            let row = &mut raster[i * g..(i + 1) * g];
            for j in 0..g {
                row[j] += ai * b[j] - bi * a[j];
            }
        }
    }
    let sum_sq: f64 = raster.iter().map(|v| (v * norm).powi(2)).sum();
    (sum_sq * grid.step * grid.step).sqrt()
}

/// Topological features in table order; `ids[i] == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TdaFeatureVector {
    pub values: [f64; TDA_FEATURE_COUNT],
}

impl TdaFeatureVector {
    pub fn ids() -> std::ops::Range<usize> {
        0..TDA_FEATURE_COUNT
    }

    /// Human-readable name of feature `id`.
    pub fn name(id: usize) -> String {
        let dim = id % 2;
        match id / 2 {
            m @ 0..=5 => format!("{}_amplitude_h{dim}", AmplitudeMetric::ALL[m]),
            6 => format!("normalized_entropy_h{dim}"),
            7 => format!("entropy_h{dim}"),
            8 => format!("num_points_h{dim}"),
            _ => format!("unknown_{id}"),
        }
    }
}

pub fn extract_tda_features(diag: &PersistenceDiagram, settings: &AmplitudeSettings) -> TdaFeatureVector {
    let mut values = [0.0; TDA_FEATURE_COUNT];
    for (m, metric) in AmplitudeMetric::ALL.into_iter().enumerate() {
        let params = AmplitudeParams {
            metric,
            settings: *settings,
        };
        for k in 0..2 {
            values[2 * m + k] = amplitude(diag, k, &params);
        }
    }
    for k in 0..2 {
        values[12 + k] = persistence_entropy(diag, k, true);
        values[14 + k] = persistence_entropy(diag, k, false);
        values[16 + k] = num_points(diag, k) as f64;
    }
    TdaFeatureVector { values }
}
