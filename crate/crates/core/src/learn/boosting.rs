use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, Impurity, Target, TreeConfig};
use super::{argmax, mix_seed, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbCriterion {
    Mse,
    FriedmanMse,
}

impl fmt::Display for GbCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GbCriterion::Mse => "mse",
            GbCriterion::FriedmanMse => "friedman_mse",
        })
    }
}

impl FromStr for GbCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(GbCriterion::Mse),
            "friedman_mse" => Ok(GbCriterion::FriedmanMse),
            _ => Err(Error::InvalidParam(format!(
                "unknown gradient boosting criterion '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbParams {
    pub max_depth: usize,
    pub n_estimators: usize,
    pub criterion: GbCriterion,
    /// Row fraction drawn without replacement per boosting stage, in (0, 1].
    pub subsample: f64,
    pub learning_rate: f64,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams {
            max_depth: 3,
            n_estimators: 100,
            criterion: GbCriterion::FriedmanMse,
            subsample: 1.0,
            learning_rate: 0.1,
        }
    }
}

impl GbParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidParam("gradient boosting needs max_depth >= 1".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "subsample {} outside (0, 1]",
                self.subsample
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Multinomial-deviance gradient boosting: one regression tree per class
/// per stage, Newton-step leaf values, additive log-odds.
#[derive(Debug, Clone)]
pub struct GradientBoosting {
    init: Vec<f64>,
    stages: Vec<Vec<DecisionTree>>,
    learning_rate: f64,
    importance: Vec<f64>,
    train_loss: Vec<f64>,
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

fn log_loss(scores: &[Vec<f64>], y: &[usize]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(s, &c)| {
            let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            lse - s[c]
        })
        .sum();
    total / y.len() as f64
}

impl GradientBoosting {
    pub fn fit(data: &FeatureMatrix, rows: &[usize], params: &GbParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if rows.is_empty() {
            return Err(Error::Shape("cannot fit on zero rows".into()));
        }
        let k = data.n_classes().max(1);
        let labels: Vec<usize> = rows.iter().map(|&r| data.labels()[r]).collect();
        let mut counts = vec![0.0f64; k];
        for &c in &labels {
            counts[c] += 1.0;
        }
        let n = rows.len();
        // absent classes get a large negative score rather than -inf
        let init: Vec<f64> = counts.iter().map(|&c| (c.max(1e-12) / n as f64).ln()).collect();
        let mut scores: Vec<Vec<f64>> = vec![init.clone(); n];
        let impurity = match params.criterion {
            GbCriterion::Mse => Impurity::Mse,
            GbCriterion::FriedmanMse => Impurity::FriedmanMse,
        };
        let draw = ((params.subsample * n as f64).round() as usize).clamp(1, n);
        // trees see positions 0..n into `rows`, via a re-indexed view
        let local = data_view(data, rows);

        let mut stages = Vec::with_capacity(params.n_estimators);
        let mut importance = vec![0.0; data.n_features()];
        let mut train_loss = vec![log_loss(&scores, &labels)];
        let factor = (k as f64 - 1.0) / k as f64;
        for stage in 0..params.n_estimators {
            let stage_seed = mix_seed(seed, stage as u64);
            let mut picked: Vec<usize> = if draw == n {
                (0..n).collect()
            } else {
                sample(&mut ChaCha8Rng::seed_from_u64(stage_seed), n, draw).into_vec()
            };
            picked.sort_unstable();
            let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
            let fitted: Vec<(DecisionTree, Vec<f64>)> = (0..k)
                .into_par_iter()
                .map(|c| {
                    let residual: Vec<f64> = (0..n)
                        .map(|i| f64::from(u8::from(labels[i] == c)) - probs[i][c])
                        .collect();
                    let leaf = |leaf_rows: &[usize]| {
                        let num: f64 = leaf_rows.iter().map(|&i| residual[i]).sum();
                        let den: f64 = leaf_rows
                            .iter()
                            .map(|&i| residual[i].abs() * (1.0 - residual[i].abs()))
                            .sum();
                        if den.abs() < 1e-150 {
                            0.0
                        } else {
                            factor * num / den
                        }
                    };
                    let cfg = TreeConfig {
                        max_depth: params.max_depth,
                        max_features: usize::MAX,
                        impurity,
                        seed: mix_seed(stage_seed, c as u64),
                    };
                    grow(
                        &local,
                        &picked,
                        Target::Value {
                            values: &residual,
                            leaf: &leaf,
                        },
                        &cfg,
                    )
                })
                .collect();
            let mut trees = Vec::with_capacity(k);
            for (c, (tree, imp)) in fitted.into_iter().enumerate() {
                for (a, b) in importance.iter_mut().zip(&imp) {
                    *a += b;
                }
                for (i, s) in scores.iter_mut().enumerate() {
                    s[c] += params.learning_rate * tree.predict_row(local.row(i));
                }
                trees.push(tree);
            }
            train_loss.push(log_loss(&scores, &labels));
            stages.push(trees);
        }
        Ok(GradientBoosting {
            init,
            stages,
            learning_rate: params.learning_rate,
            importance,
            train_loss,
        })
    }

    pub fn decision_scores(&self, row: &[f64]) -> Vec<f64> {
        let mut s = self.init.clone();
        for trees in &self.stages {
            for (c, t) in trees.iter().enumerate() {
                s[c] += self.learning_rate * t.predict_row(row);
            }
        }
        s
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.decision_scores(row))
    }

    /// Mean training log-loss after 0, 1, ..., n_estimators stages.
    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }

    pub(crate) fn raw_importance(&self) -> &[f64] {
        &self.importance
    }
}

fn data_view(data: &FeatureMatrix, rows: &[usize]) -> FeatureMatrix {
    let x: Vec<Vec<f64>> = rows.iter().map(|&r| data.row(r).to_vec()).collect();
    let y: Vec<usize> = rows.iter().map(|&r| data.labels()[r]).collect();
    FeatureMatrix::new(x, y, data.feature_ids().to_vec(), data.provenance().to_vec())
        .expect("rows of a valid matrix form a valid matrix")
        .with_n_classes(data.n_classes())
}
