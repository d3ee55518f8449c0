//! Pipeline configuration, stored as TOML.
//!
//! ```toml
//! seed = 7                      # master seed; every stage derives from it
//! folds = 5
//! variants = ["V1", "V2", "V3", "V4"]
//! models = ["random_forest", "gradient_boosting"]
//! window_s = 2.0
//! bandcut_order = 4
//!
//! [synthetic]                   # or an [input] table, not both
//! channels = 60
//!
//! [input]
//! recording = "session.raw"     # raw_f64 or csv
//! format = "raw_f64"
//! sampling_rate = 1200.0        # csv only
//! events = "events.csv"
//!
//! [notch]       base_freq, n_harmonics, order, half_width
//! [embedding]   tau, dim, stride
//! [amplitude]   p, grid_size, layers, sigma, w
//! [hyperopt]    n_calls, n_initial, n_candidates
//! [search]      random_forest / gradient_boosting / gaussian_nb = list of params
//! ```
//!
//! Missing tables take their defaults. Search parameters are
//! `{ kind = "real" | "integer" | "categorical", name, lo, hi | options }`
//! and must name fields of the model's parameter struct; fields not searched
//! keep their defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandpower::BandDefinition;
use crate::diagram_features::AmplitudeSettings;
use crate::error::{Error, Result};
use crate::hyperopt::{ParamSpec, SearchSpace};
use crate::signal::{NotchParams, PreprocVariant, RecordingFormat, VariantId};
use crate::synth::SyntheticSpec;
use crate::takens::EmbeddingParams;

use super::features::FeatureSettings;
use super::tune::model_from_assignment;

pub const MODEL_NAMES: [&str; 3] = ["random_forest", "gradient_boosting", "gaussian_nb"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    RawF64,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFiles {
    pub recording: PathBuf,
    pub format: InputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_rate: Option<f64>,
    pub events: PathBuf,
}

impl InputFiles {
    pub fn recording_format(&self) -> Result<RecordingFormat> {
        match (self.format, self.sampling_rate) {
            (InputFormat::RawF64, _) => Ok(RecordingFormat::RawF64),
            (InputFormat::Csv, Some(sampling_rate)) => Ok(RecordingFormat::Csv { sampling_rate }),
            (InputFormat::Csv, None) => Err(Error::config("input.sampling_rate", "required for csv recordings")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperoptBudget {
    pub n_calls: usize,
    pub n_initial: usize,
    pub n_candidates: usize,
}

impl Default for HyperoptBudget {
    fn default() -> Self {
        HyperoptBudget {
            n_calls: 15,
            n_initial: 10,
            n_candidates: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpaces {
    pub random_forest: Vec<ParamSpec>,
    pub gradient_boosting: Vec<ParamSpec>,
    pub gaussian_nb: Vec<ParamSpec>,
}

fn int(name: &str, lo: i64, hi: i64) -> ParamSpec {
    ParamSpec::Integer {
        name: name.into(),
        lo,
        hi,
    }
}

fn real(name: &str, lo: f64, hi: f64) -> ParamSpec {
    ParamSpec::Real {
        name: name.into(),
        lo,
        hi,
    }
}

fn cat(name: &str, options: &[&str]) -> ParamSpec {
    ParamSpec::Categorical {
        name: name.into(),
        options: options.iter().map(|s| s.to_string()).collect(),
    }
}

impl Default for SearchSpaces {
    fn default() -> Self {
        SearchSpaces {
            random_forest: vec![
                int("max_depth", 2, 12),
                int("n_estimators", 10, 120),
                cat("criterion", &["gini", "entropy"]),
                real("max_features", 0.05, 0.5),
            ],
            gradient_boosting: vec![
                int("max_depth", 1, 4),
                int("n_estimators", 10, 60),
                cat("criterion", &["friedman_mse", "mse"]),
                real("subsample", 0.5, 1.0),
                real("learning_rate", 0.05, 0.5),
            ],
            gaussian_nb: vec![real("var_smoothing", 1e-9, 1e-2)],
        }
    }
}

impl SearchSpaces {
    pub fn get(&self, model: &str) -> Option<&[ParamSpec]> {
        match model {
            "random_forest" => Some(&self.random_forest),
            "gradient_boosting" => Some(&self.gradient_boosting),
            "gaussian_nb" => Some(&self.gaussian_nb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub folds: usize,
    pub variants: Vec<VariantId>,
    pub models: Vec<String>,
    pub window_s: f64,
    pub bandcut_order: usize,
    pub bands: Vec<BandDefinition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    pub notch: NotchParams,
    pub embedding: EmbeddingParams,
    pub amplitude: AmplitudeSettings,
    pub hyperopt: HyperoptBudget,
    pub search: SearchSpaces,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let f = FeatureSettings::default();
        PipelineConfig {
            seed: 7,
            folds: 5,
            variants: vec![VariantId::V1, VariantId::V2, VariantId::V3, VariantId::V4],
            models: vec!["random_forest".into(), "gradient_boosting".into()],
            window_s: f.window_s,
            bandcut_order: f.bandcut_order,
            bands: f.bands,
            input: None,
            synthetic: Some(SyntheticSpec::default()),
            notch: f.notch,
            embedding: f.embedding,
            amplitude: f.amplitude,
            hyperopt: HyperoptBudget::default(),
            search: SearchSpaces::default(),
        }
    }
}

impl PipelineConfig {
    /// Parse without validating.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().trim();
            let field = match msg.strip_prefix("unknown field `") {
                Some(rest) => rest.split('`').next().unwrap_or("config"),
                None => "config",
            };
            Error::config(field, e.to_string().trim().to_string())
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn feature_settings(&self) -> FeatureSettings {
        FeatureSettings {
            notch: self.notch,
            bandcut_order: self.bandcut_order,
            window_s: self.window_s,
            bands: self.bands.clone(),
            embedding: self.embedding,
            amplitude: self.amplitude,
        }
    }

    pub fn preproc_variants(&self) -> Vec<PreprocVariant> {
        self.variants.iter().map(|&id| PreprocVariant::preset(id)).collect()
    }

    /// Search space for one configured model.
    pub fn space(&self, model: &str) -> Result<SearchSpace> {
        let params = self
            .search
            .get(model)
            .ok_or_else(|| Error::config("models", format!("unknown model `{model}`")))?;
        SearchSpace::new(params.to_vec()).map_err(|e| Error::config(format!("search.{model}"), e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.synthetic) {
            (Some(_), Some(_)) => return Err(Error::config("input", "give either [input] or [synthetic], not both")),
            (None, None) => return Err(Error::config("input", "no [input] files and no [synthetic] block")),
            (Some(input), None) => {
                for (field, path) in [("input.recording", &input.recording), ("input.events", &input.events)] {
                    if !path.exists() {
                        return Err(Error::config(field, format!("{} does not exist", path.display())));
                    }
                }
                input.recording_format()?;
            }
            (None, Some(spec)) => spec
                .validate(self.folds)
                .map_err(|e| Error::config("synthetic", e.to_string()))?,
        }
        if self.folds < 2 {
            return Err(Error::config("folds", "need at least 2 folds"));
        }
        if self.variants.is_empty() {
            return Err(Error::config("variants", "list is empty"));
        }
        let mut seen = self.variants.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.variants.len() {
            return Err(Error::config("variants", "duplicate variant"));
        }
        if self.models.is_empty() {
            return Err(Error::config("models", "list is empty"));
        }
        for (i, m) in self.models.iter().enumerate() {
            if !MODEL_NAMES.contains(&m.as_str()) {
                return Err(Error::config(
                    format!("models[{i}]"),
                    format!("unknown model `{m}`; expected one of {}", MODEL_NAMES.join(", ")),
                ));
            }
            if self.models[..i].contains(m) {
                return Err(Error::config(format!("models[{i}]"), format!("duplicate model `{m}`")));
            }
            let space = self.space(m)?;
            let probe = space.sample(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0));
            model_from_assignment(m, &space, &probe)
                .map_err(|e| Error::config(format!("search.{m}"), e.to_string()))?;
        }
        if !(self.window_s > 0.0) {
            return Err(Error::config("window_s", "must be positive"));
        }
        if self.bands.is_empty() {
            return Err(Error::config("bands", "list is empty"));
        }
        let h = self.hyperopt;
        if h.n_initial < 2 || h.n_calls < h.n_initial || h.n_candidates == 0 {
            return Err(Error::config(
                "hyperopt",
                "need n_calls >= n_initial >= 2 and n_candidates >= 1",
            ));
        }
        self.embedding
            .validate()
            .map_err(|e| Error::config("embedding", e.to_string()))?;
        self.amplitude
            .validate()
            .map_err(|e| Error::config("amplitude", e.to_string()))?;
        Ok(())
    }
}
