use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, Impurity, Target, TreeConfig};
use super::{argmax, mix_seed, FeatureMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfCriterion {
    Gini,
    Entropy,
}

impl fmt::Display for RfCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RfCriterion::Gini => "gini",
            RfCriterion::Entropy => "entropy",
        })
    }
}

impl FromStr for RfCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(RfCriterion::Gini),
            "entropy" => Ok(RfCriterion::Entropy),
            _ => Err(Error::InvalidParam(format!("unknown random forest criterion '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub max_depth: usize,
    pub n_estimators: usize,
    pub criterion: RfCriterion,
    /// Fraction of features considered at each split, in (0, 1].
    pub max_features: f64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            max_depth: 8,
            n_estimators: 100,
            criterion: RfCriterion::Gini,
            max_features: 0.3,
        }
    }
}

impl RfParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.n_estimators == 0 {
            return Err(Error::InvalidParam(
                "random forest needs max_depth >= 1 and n_estimators >= 1".into(),
            ));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "max_features {} outside (0, 1]",
                self.max_features
            )));
        }
        Ok(())
    }

    fn features_per_split(&self, p: usize) -> usize {
        ((self.max_features * p as f64 - 1e-9).ceil() as usize).clamp(1, p.max(1))
    }
}

/// Bagged classification trees with a hard majority vote.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
    importance: Vec<f64>,
}

impl RandomForest {
    pub fn fit(data: &FeatureMatrix, rows: &[usize], params: &RfParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if rows.is_empty() {
            return Err(Error::Shape("cannot fit on zero rows".into()));
        }
        let n_classes = data.n_classes();
        let y = data.labels();
        let impurity = match params.criterion {
            RfCriterion::Gini => Impurity::Gini,
            RfCriterion::Entropy => Impurity::Entropy,
        };
        let max_features = params.features_per_split(data.n_features());
        let fitted: Vec<(DecisionTree, Vec<f64>)> = (0..params.n_estimators)
            .into_par_iter()
            .map(|t| {
                let tree_seed = mix_seed(seed, t as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let sample: Vec<usize> = (0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())]).collect();
                let cfg = TreeConfig {
                    max_depth: params.max_depth,
                    max_features,
                    impurity,
                    seed: tree_seed,
                };
                grow(data, &sample, Target::Class { y, n_classes }, &cfg)
            })
            .collect();
        let mut importance = vec![0.0; data.n_features()];
        for (_, imp) in &fitted {
            for (a, b) in importance.iter_mut().zip(imp) {
                *a += b;
            }
        }
        Ok(RandomForest {
            trees: fitted.into_iter().map(|(t, _)| t).collect(),
            n_classes,
            importance,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes.max(1)];
        for t in &self.trees {
            votes[t.predict_row(row) as usize] += 1.0;
        }
        argmax(&votes)
    }

    /// Summed (unnormalized) impurity decrease per feature column.
    pub(crate) fn raw_importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}
