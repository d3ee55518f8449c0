//! Classifiers, stratified cross-validation and feature-importance analyses.

mod boosting;
mod cv;
mod forest;
mod gnb;
mod importance;
mod stats;
mod tree;

pub use boosting::{GbCriterion, GbParams, GradientBoosting};
pub use cv::{cross_validate, stratified_kfold, CvReport};
pub use forest::{RandomForest, RfCriterion, RfParams};
pub use gnb::{GaussianNb, GnbParams};
pub use importance::{dense_ranks, impurity_importance, rank_aggregate, ImportanceRow, ImportanceTable};
pub use stats::{correlation_matrix, mutual_information, MI_BINS};
pub use tree::DecisionTree;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a feature column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Tda,
    Pb,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Tda => "TDA",
            Provenance::Pb => "PB",
        })
    }
}

/// Samples x features, with integer feature ids and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    x: Vec<f64>,
    n_features: usize,
    y: Vec<usize>,
    feature_ids: Vec<usize>,
    provenance: Vec<Provenance>,
    n_classes: usize,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        y: Vec<usize>,
        feature_ids: Vec<usize>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let n_features = feature_ids.len();
        if rows.len() != y.len() {
            return Err(Error::Shape(format!("{} rows but {} labels", rows.len(), y.len())));
        }
        if provenance.len() != n_features {
            return Err(Error::Shape("provenance length differs from feature count".into()));
        }
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::Shape(format!("every row must have {n_features} features")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(
                "feature matrix contains NaN or infinite values".into(),
            ));
        }
        let n_classes = y.iter().max().map_or(0, |m| m + 1);
        Ok(FeatureMatrix {
            x: rows.concat(),
            n_features,
            y,
            feature_ids,
            provenance,
            n_classes,
        })
    }

    /// Unlabeled-provenance convenience constructor: ids `0..p`, all PB.
    pub fn from_rows(rows: Vec<Vec<f64>>, y: Vec<usize>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        Self::new(rows, y, (0..p).collect(), vec![Provenance::Pb; p])
    }

    /// Declare more classes than appear in `y` (e.g. for a subset of rows).
    pub fn with_n_classes(mut self, n_classes: usize) -> Self {
        self.n_classes = self.n_classes.max(n_classes);
        self
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.x[i * self.n_features + f]
    }

    pub fn column(&self, f: usize) -> Vec<f64> {
        (0..self.n_samples()).map(|i| self.get(i, f)).collect()
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn feature_ids(&self) -> &[usize] {
        &self.feature_ids
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Keep the columns whose provenance is in `keep`, in their current order.
    pub fn select_provenance(&self, keep: &[Provenance]) -> FeatureMatrix {
        let cols: Vec<usize> = (0..self.n_features)
            .filter(|&f| keep.contains(&self.provenance[f]))
            .collect();
        self.select_columns(&cols)
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let x = (0..self.n_samples())
            .flat_map(|i| cols.iter().map(move |&f| self.get(i, f)))
            .collect();
        FeatureMatrix {
            x,
            n_features: cols.len(),
            y: self.y.clone(),
            feature_ids: cols.iter().map(|&f| self.feature_ids[f]).collect(),
            provenance: cols.iter().map(|&f| self.provenance[f]).collect(),
            n_classes: self.n_classes,
        }
    }

    /// Copy with `f` applied to every value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> FeatureMatrix {
        let mut out = self.clone();
        out.x.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn with_labels(&self, y: Vec<usize>) -> Result<FeatureMatrix> {
        if y.len() != self.n_samples() {
            return Err(Error::Shape("label count differs from sample count".into()));
        }
        let mut out = self.clone();
        out.n_classes = out.n_classes.max(y.iter().max().map_or(0, |m| m + 1));
        out.y = y;
        Ok(out)
    }
}

/// A classifier family with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    RandomForest(RfParams),
    GradientBoosting(GbParams),
    GaussianNb(GnbParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::RandomForest(_) => "random_forest",
            ModelSpec::GradientBoosting(_) => "gradient_boosting",
            ModelSpec::GaussianNb(_) => "gaussian_nb",
        }
    }

    /// Fit on the given rows of `data`.
    pub fn fit(&self, data: &FeatureMatrix, rows: &[usize], seed: u64) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::RandomForest(p) => TrainedModel::RandomForest(RandomForest::fit(data, rows, p, seed)?),
            ModelSpec::GradientBoosting(p) => {
                TrainedModel::GradientBoosting(GradientBoosting::fit(data, rows, p, seed)?)
            }
            ModelSpec::GaussianNb(p) => TrainedModel::GaussianNb(GaussianNb::fit(data, rows, p)?),
        })
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    GaussianNb(GaussianNb),
}

impl TrainedModel {
    pub fn predict_row(&self, row: &[f64]) -> usize {
        match self {
            TrainedModel::RandomForest(m) => m.predict_row(row),
            TrainedModel::GradientBoosting(m) => m.predict_row(row),
            TrainedModel::GaussianNb(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, data: &FeatureMatrix, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&i| self.predict_row(data.row(i))).collect()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// SplitMix64 finalizer; used to derive independent per-tree and per-node
/// seeds from a master seed and a counter.
pub(crate) fn mix_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
