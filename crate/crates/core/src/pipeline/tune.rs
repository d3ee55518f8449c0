//! Hyperparameter search per (model, feature set, variant).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperopt::{optimize, Assignment, OptimizationTrace, OptimizerSettings, ParamSpec, ParamValue, SearchSpace};
use crate::learn::{
    cross_validate, mix_seed, CvReport, FeatureMatrix, GbCriterion, GbParams, GnbParams, ModelSpec, Provenance,
    RfCriterion, RfParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    #[serde(rename = "PB")]
    Pb,
    #[serde(rename = "TDA")]
    Tda,
    #[serde(rename = "PB+TDA")]
    PbTda,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Pb, FeatureSet::Tda, FeatureSet::PbTda];

    pub fn provenance(self) -> &'static [Provenance] {
        match self {
            FeatureSet::Pb => &[Provenance::Pb],
            FeatureSet::Tda => &[Provenance::Tda],
            FeatureSet::PbTda => &[Provenance::Tda, Provenance::Pb],
        }
    }

    /// File-name friendly tag.
    pub fn slug(self) -> &'static str {
        match self {
            FeatureSet::Pb => "pb",
            FeatureSet::Tda => "tda",
            FeatureSet::PbTda => "pb_tda",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Pb => "PB",
            FeatureSet::Tda => "TDA",
            FeatureSet::PbTda => "PB+TDA",
        })
    }
}

fn real_of(name: &str, v: &ParamValue) -> Result<f64> {
    match v {
        ParamValue::Real(x) => Ok(*x),
        ParamValue::Int(x) => Ok(*x as f64),
        ParamValue::Cat(_) => Err(Error::InvalidParam(format!("`{name}` must be numeric"))),
    }
}

fn usize_of(name: &str, v: &ParamValue) -> Result<usize> {
    match v {
        ParamValue::Int(x) if *x >= 0 => Ok(*x as usize),
        _ => Err(Error::InvalidParam(format!("`{name}` must be a non-negative integer"))),
    }
}

fn option_of<'a>(spec: &'a ParamSpec, v: &ParamValue) -> Result<&'a str> {
    match (spec, v) {
        (ParamSpec::Categorical { options, .. }, ParamValue::Cat(i)) => Ok(&options[*i]),
        _ => Err(Error::InvalidParam(format!("`{}` must be categorical", spec.name()))),
    }
}

/// Turn a point of the search space into model hyperparameters; unnamed
/// fields keep their defaults.
pub fn model_from_assignment(model: &str, space: &SearchSpace, a: &Assignment) -> Result<ModelSpec> {
    let pairs = space.params().iter().zip(a);
    let unknown = |name: &str| Error::InvalidParam(format!("`{name}` is not a {model} parameter"));
    match model {
        "random_forest" => {
            let mut p = RfParams::default();
            for (spec, v) in pairs {
                match spec.name() {
                    "max_depth" => p.max_depth = usize_of("max_depth", v)?,
                    "n_estimators" => p.n_estimators = usize_of("n_estimators", v)?,
                    "criterion" => p.criterion = RfCriterion::from_str(option_of(spec, v)?)?,
                    "max_features" => p.max_features = real_of("max_features", v)?,
                    other => return Err(unknown(other)),
                }
            }
            p.validate()?;
            Ok(ModelSpec::RandomForest(p))
        }
        "gradient_boosting" => {
            let mut p = GbParams::default();
            for (spec, v) in pairs {
                match spec.name() {
                    "max_depth" => p.max_depth = usize_of("max_depth", v)?,
                    "n_estimators" => p.n_estimators = usize_of("n_estimators", v)?,
                    "criterion" => p.criterion = GbCriterion::from_str(option_of(spec, v)?)?,
                    "subsample" => p.subsample = real_of("subsample", v)?,
                    "learning_rate" => p.learning_rate = real_of("learning_rate", v)?,
                    other => return Err(unknown(other)),
                }
            }
            p.validate()?;
            Ok(ModelSpec::GradientBoosting(p))
        }
        "gaussian_nb" => {
            let mut p = GnbParams::default();
            for (spec, v) in pairs {
                match spec.name() {
                    "var_smoothing" => p.var_smoothing = real_of("var_smoothing", v)?,
                    other => return Err(unknown(other)),
                }
            }
            if !(p.var_smoothing >= 0.0) {
                return Err(Error::InvalidParam("var_smoothing must be >= 0".into()));
            }
            Ok(ModelSpec::GaussianNb(p))
        }
        other => Err(Error::InvalidParam(format!("unknown model `{other}`"))),
    }
}

/// Seed of the CV folds; shared by every model, variant and feature set so
/// their accuracies are paired.
pub fn fold_seed(seed: u64) -> u64 {
    mix_seed(seed, 0xF01D)
}

pub fn optimizer_seed(seed: u64) -> u64 {
    mix_seed(seed, 0x0B7)
}

/// Outcome of one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    /// `None` for the band-power set, which does not depend on the variant.
    pub variant: Option<String>,
    pub model: String,
    pub feature_set: FeatureSet,
    pub space: SearchSpace,
    pub trace: OptimizationTrace,
    pub best: ModelSpec,
    pub cv: CvReport,
}

pub fn tune(
    model: &str,
    space: &SearchSpace,
    data: &FeatureMatrix,
    folds: usize,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<(OptimizationTrace, ModelSpec, CvReport)> {
    let cv_seed = fold_seed(seed);
    let trace = optimize(
        |a| {
            let spec = model_from_assignment(model, space, a)?;
            Ok(cross_validate(&spec, data, folds, cv_seed)?.mean)
        },
        space,
        settings,
        optimizer_seed(seed),
    )?;
    let best = trace
        .best()
        .ok_or_else(|| Error::ObjectiveFailure(format!("every {model} trial failed")))?;
    let spec = model_from_assignment(model, space, &best.assignment)?;
    let cv = cross_validate(&spec, data, folds, cv_seed)?;
    Ok((trace, spec, cv))
}
