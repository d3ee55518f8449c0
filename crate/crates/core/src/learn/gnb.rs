use serde::{Deserialize, Serialize};

use super::{argmax, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Added to every variance, as a fraction of the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams { var_smoothing: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

impl GaussianNb {
    pub fn fit(data: &FeatureMatrix, rows: &[usize], params: &GnbParams) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Shape("cannot fit on zero rows".into()));
        }
        if !(params.var_smoothing >= 0.0) {
            return Err(Error::InvalidParam("var_smoothing must be >= 0".into()));
        }
        let k = data.n_classes().max(1);
        let p = data.n_features();
        let y = data.labels();
        let max_var = (0..p)
            .map(|f| mean_var(rows.iter().map(|&r| data.get(r, f))).1)
            .fold(0.0, f64::max);
        let eps = params.var_smoothing * max_var;

        let mut log_prior = vec![f64::NEG_INFINITY; k];
        let mut means = vec![vec![0.0; p]; k];
        let mut vars = vec![vec![0.0; p]; k];
        for c in 0..k {
            let members: Vec<usize> = rows.iter().copied().filter(|&r| y[r] == c).collect();
            if members.is_empty() {
                continue;
            }
            log_prior[c] = (members.len() as f64 / rows.len() as f64).ln();
            for f in 0..p {
                let (m, v) = mean_var(members.iter().map(|&r| data.get(r, f)));
                means[c][f] = m;
                vars[c][f] = v + eps;
            }
        }
        // a variance that is still zero: fall back to the smallest positive
        // class variance of that feature; if none exists the feature is
        // constant within every class
        for f in 0..p {
            let present = (0..k).filter(|&c| log_prior[c].is_finite());
            let floor = present
                .clone()
                .map(|c| vars[c][f])
                .filter(|&v| v > 0.0)
                .fold(f64::INFINITY, f64::min);
            for c in present {
                if vars[c][f] <= 0.0 {
                    if !floor.is_finite() {
                        return Err(Error::DegenerateVariance {
                            feature: data.feature_ids()[f],
                        });
                    }
                    vars[c][f] = floor;
                }
            }
        }
        Ok(GaussianNb { log_prior, means, vars })
    }

    pub fn log_posterior(&self, row: &[f64]) -> Vec<f64> {
        self.log_prior
            .iter()
            .enumerate()
            .map(|(c, &lp)| {
                if !lp.is_finite() {
                    return f64::NEG_INFINITY;
                }
                lp + row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.vars[c])
                    .map(|((x, m), v)| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v))
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.log_posterior(row))
    }
}
