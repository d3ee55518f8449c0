//! Stride-based multivariate delay embedding.
//!
//! Every embedded point stacks `dim` delayed copies of the full channel
//! vector: `(x(t), x(t + tau), ..., x(t + (dim - 1) tau))`, so a `d`-channel
//! epoch yields points in `d * dim` dimensions. Start indices advance by
//! `stride` samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Epoch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingParams {
    pub tau: usize,
    pub dim: usize,
    pub stride: usize,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams {
            tau: 1,
            dim: 1,
            stride: 10,
        }
    }
}

impl EmbeddingParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 || self.dim == 0 || self.stride == 0 {
            return Err(Error::InvalidParam(format!(
                "embedding parameters must be >= 1, got tau={} dim={} stride={}",
                self.tau, self.dim, self.stride
            )));
        }
        Ok(())
    }

    /// Number of samples covered by one embedded point.
    pub fn span(&self) -> usize {
        (self.dim - 1) * self.tau + 1
    }

    /// Number of points produced from a window of `window` samples.
    pub fn point_count(&self, window: usize) -> usize {
        if window < self.span() {
            0
        } else {
            (window - self.span()) / self.stride + 1
        }
    }
}

/// `n` points in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<f64>,
    n: usize,
    dim: usize,
    pub epoch_id: usize,
}

impl PointCloud {
    pub fn new(points: Vec<f64>, dim: usize, epoch_id: usize) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} coordinates cannot form points of dimension {dim}",
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("point cloud has non-finite coordinates".into()));
        }
        let n = points.len() / dim;
        Ok(PointCloud {
            points,
            n,
            dim,
            epoch_id,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged point rows".into()));
        }
        Self::new(rows.concat(), dim, 0)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }
}

/// Embed the full (padded) epoch window into a point cloud.
pub fn takens_embed(epoch: &Epoch, params: &EmbeddingParams) -> Result<PointCloud> {
    params.validate()?;
    let window = epoch.window();
    let span = params.span();
    if window < span {
        return Err(Error::WindowTooShort { window, span });
    }
    let channels = epoch.channels();
    let n = params.point_count(window);
    let dim = channels * params.dim;
    let mut points = Vec::with_capacity(n * dim);
    for p in 0..n {
        let t = p * params.stride;
        for lag in 0..params.dim {
            let idx = t + lag * params.tau;
            points.extend((0..channels).map(|c| epoch.channel(c)[idx]));
        }
    }
    PointCloud::new(points, dim, epoch.trial_id)
}
