use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Error, Result};

/// Mean decrease in impurity per feature column, normalized to sum to 1.
/// A model that never split returns all zeros.
pub fn impurity_importance(model: &TrainedModel) -> Result<Vec<f64>> {
    let raw = match model {
        TrainedModel::RandomForest(m) => m.raw_importance(),
        TrainedModel::GradientBoosting(m) => m.raw_importance(),
        TrainedModel::GaussianNb(_) => return Err(Error::NotTreeBased),
    };
    let total: f64 = raw.iter().sum();
    Ok(if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; raw.len()]
    })
}

/// Dense ranks, 1 for the largest value; equal values share a rank.
pub fn dense_ranks(values: &[f64]) -> Vec<usize> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    values
        .iter()
        .map(|v| distinct.iter().position(|d| d == v).expect("value is present") + 1)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature_id: usize,
    pub importance: Vec<f64>,
    pub rank: Vec<usize>,
    pub avg_importance: f64,
    pub avg_rank: f64,
}

/// Per-feature importances and ranks across several runs, sorted by
/// ascending average rank (ties by feature id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub runs: Vec<String>,
    pub rows: Vec<ImportanceRow>,
}

/// Combine `(run name, feature ids, importances)` triples. Every run must
/// cover the same feature ids.
pub fn rank_aggregate(runs: &[(String, Vec<usize>, Vec<f64>)]) -> Result<ImportanceTable> {
    let Some((_, first_ids, _)) = runs.first() else {
        return Err(Error::MismatchedFeatureSets);
    };
    let mut reference: Vec<usize> = first_ids.clone();
    reference.sort_unstable();
    let mut per_feature: BTreeMap<usize, (Vec<f64>, Vec<usize>)> = BTreeMap::new();
    for (_, ids, imp) in runs {
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted != reference || ids.len() != imp.len() {
            return Err(Error::MismatchedFeatureSets);
        }
        for ((&id, &v), r) in ids.iter().zip(imp).zip(dense_ranks(imp)) {
            let entry = per_feature.entry(id).or_default();
            entry.0.push(v);
            entry.1.push(r);
        }
    }
    let m = runs.len() as f64;
    let mut rows: Vec<ImportanceRow> = per_feature
        .into_iter()
        .map(|(feature_id, (importance, rank))| ImportanceRow {
            feature_id,
            avg_importance: importance.iter().sum::<f64>() / m,
            avg_rank: rank.iter().sum::<usize>() as f64 / m,
            importance,
            rank,
        })
        .collect();
    rows.sort_by(|a, b| a.avg_rank.total_cmp(&b.avg_rank).then(a.feature_id.cmp(&b.feature_id)));
    Ok(ImportanceTable {
        runs: runs.iter().map(|r| r.0.clone()).collect(),
        rows,
    })
}
