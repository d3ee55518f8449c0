//! End-to-end runs: data, features, tuning and reports.
//!
//! Every stage reads the previous stage's files from the output directory,
//! so any stage can be re-run on its own. Nothing written depends on wall
//! clock time; identical config and seed give identical bytes.
//!
//! ```text
//! out/
//!   config.toml                      effective configuration
//!   data/recording.raw, events.csv   synthetic input (generate)
//!   features/<V>/features.csv        epoch_id,label,f0..f197
//!   features/<V>/diagrams.csv        epoch_id,hom_dim,birth,death
//!   tune/results.json                searches, best params, CV reports
//!   tune/cv.csv                      model,variant,feature_set,fold,accuracy
//!   tune/<V|shared>/<model>_<set>_trace.csv
//!   report/summary.csv, summary.md
//!   report/importance_<model>.csv    feature_id,imp_v1,rank_v1,...,avg_imp,avg_rank
//!   report/mutual_information.csv, mi_bars.svg
//!   report/<V>/correlation.csv, correlation.svg, convergence_<model>.svg
//! ```

pub mod artifacts;
pub mod config;
pub mod features;
pub mod report;
pub mod svg;
pub mod tune;

use std::fmt;
use std::path::{Path, PathBuf};

pub use config::{HyperoptBudget, InputFiles, InputFormat, PipelineConfig, SearchSpaces, MODEL_NAMES};
pub use features::FeatureSettings;
pub use tune::{FeatureSet, TuneResult};

use crate::bandpower::PB_FEATURE_OFFSET;
use crate::diagram_features::TDA_FEATURE_COUNT;
use crate::error::{Error, Result};
use crate::hyperopt::OptimizerSettings;
use crate::learn::FeatureMatrix;
use crate::signal::{
    load_events, load_recording, write_events, write_recording_raw, EventTable, MultichannelRecording, RecordingFormat,
    VariantId,
};
use crate::synth::generate_synthetic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Generate,
    Features,
    Tune,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Generate => "generate",
            Stage::Features => "features",
            Stage::Tune => "tune",
            Stage::Report => "report",
        })
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

fn tagged<T>(stage: Stage, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|source| StageError { stage, source })
}

/// Paths inside the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn recording(&self) -> PathBuf {
        self.root.join("data").join("recording.raw")
    }

    pub fn events(&self) -> PathBuf {
        self.root.join("data").join("events.csv")
    }

    pub fn features(&self, v: VariantId) -> PathBuf {
        self.root.join("features").join(v.to_string()).join("features.csv")
    }

    pub fn diagrams(&self, v: VariantId) -> PathBuf {
        self.root.join("features").join(v.to_string()).join("diagrams.csv")
    }

    pub fn tune_dir(&self) -> PathBuf {
        self.root.join("tune")
    }

    pub fn tune_results(&self) -> PathBuf {
        self.tune_dir().join("results.json")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }
}

/// Parse and validate, applying an optional seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> std::result::Result<PipelineConfig, StageError> {
    let loaded = PipelineConfig::load(path).map_err(|e| match e {
        Error::Io { path, source } => Error::config("--config", format!("cannot read {}: {source}", path.display())),
        other => other,
    });
    let mut cfg = tagged(Stage::Validate, loaded)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    tagged(Stage::Validate, cfg.validate())?;
    Ok(cfg)
}

/// Write the synthetic recording, or do nothing for file input.
pub fn generate(cfg: &PipelineConfig, out: &Layout) -> Result<()> {
    artifacts::write_text(&out.config(), &cfg.to_toml()?)?;
    let Some(spec) = &cfg.synthetic else {
        log::info!("file input configured; nothing to generate");
        return Ok(());
    };
    let (rec, events) = generate_synthetic(spec, cfg.seed)?;
    std::fs::create_dir_all(out.root.join("data")).map_err(|e| Error::io(out.root.join("data"), e))?;
    write_recording_raw(&rec, &out.recording())?;
    write_events(&events, &out.events())?;
    log::info!(
        "generated {} channels x {} samples, {} events",
        rec.n_channels(),
        rec.len(),
        events.len()
    );
    Ok(())
}

fn load_input(cfg: &PipelineConfig, out: &Layout) -> Result<(MultichannelRecording, EventTable)> {
    match &cfg.input {
        Some(input) => Ok((
            load_recording(&input.recording, input.recording_format()?)?,
            load_events(&input.events)?,
        )),
        None => Ok((
            load_recording(&out.recording(), RecordingFormat::RawF64)?,
            load_events(&out.events())?,
        )),
    }
}

/// Band-power features once, topological features per variant; writes one
/// 198-column matrix per variant.
pub fn extract_features(cfg: &PipelineConfig, out: &Layout) -> Result<()> {
    let settings = cfg.feature_settings();
    let (rec, events) = load_input(cfg, out)?;
    let n_channels = rec.n_channels();
    let notched = features::notched(&rec, &settings)?;
    drop(rec);
    let pb = features::pb_rows(&notched, &events, &settings)?;
    let labels: Vec<usize> = events.events().iter().map(|e| e.label.index()).collect();
    let expected = TDA_FEATURE_COUNT + n_channels * settings.bands.len();
    for v in cfg.preproc_variants() {
        let tda = features::tda_rows(&notched, &events, &v, &settings, false)?;
        let m = features::combine(&tda.values, &pb, labels.clone())?;
        check_layout(&m, expected)?;
        artifacts::write_features(&out.features(v.id), &m)?;
        artifacts::write_diagrams(&out.diagrams(v.id), &tda.diagrams)?;
        log::info!("{}: {} epochs x {} features", v.id, m.n_samples(), m.n_features());
    }
    Ok(())
}

/// Width is 18 + channels x bands and the topological ids come first.
pub fn check_layout(m: &FeatureMatrix, expected_width: usize) -> Result<()> {
    let ids = m.feature_ids();
    let ok = ids.len() == expected_width
        && expected_width >= TDA_FEATURE_COUNT
        && ids[..TDA_FEATURE_COUNT].iter().copied().eq(0..TDA_FEATURE_COUNT)
        && ids[TDA_FEATURE_COUNT..]
            .iter()
            .copied()
            .eq(PB_FEATURE_OFFSET..PB_FEATURE_OFFSET + expected_width - TDA_FEATURE_COUNT);
    if ok {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "feature layout has {} columns, expected {expected_width} with ids 0..",
            ids.len()
        )))
    }
}

pub fn load_features(cfg: &PipelineConfig, out: &Layout) -> Result<Vec<(VariantId, FeatureMatrix)>> {
    cfg.variants
        .iter()
        .map(|&v| Ok((v, artifacts::read_features(&out.features(v))?)))
        .collect()
}

/// Search every configured model on PB (once), and on TDA and PB+TDA per
/// variant. All searches use the same CV folds.
pub fn tune_models(cfg: &PipelineConfig, out: &Layout) -> Result<Vec<TuneResult>> {
    let matrices = load_features(cfg, out)?;
    let settings = OptimizerSettings {
        n_calls: cfg.hyperopt.n_calls,
        n_initial: cfg.hyperopt.n_initial,
        n_candidates: cfg.hyperopt.n_candidates,
        ..OptimizerSettings::default()
    };
    let mut results = Vec::new();
    for model in &cfg.models {
        let space = cfg.space(model)?;
        let mut jobs: Vec<(Option<VariantId>, FeatureSet, FeatureMatrix)> = vec![(
            None,
            FeatureSet::Pb,
            matrices[0].1.select_provenance(FeatureSet::Pb.provenance()),
        )];
        for (v, m) in &matrices {
            for set in [FeatureSet::Tda, FeatureSet::PbTda] {
                jobs.push((Some(*v), set, m.select_provenance(set.provenance())));
            }
        }
        for (variant, set, data) in jobs {
            let (trace, best, cv) = tune::tune(model, &space, &data, cfg.folds, &settings, cfg.seed)?;
            let scope = variant.map_or_else(|| "shared".to_string(), |v| v.to_string());
            log::info!("{model} {scope} {set}: best CV accuracy {:.4}", cv.mean);
            let path = out
                .tune_dir()
                .join(&scope)
                .join(format!("{model}_{}_trace.csv", set.slug()));
            artifacts::write_trace(&path, &space, &trace)?;
            results.push(TuneResult {
                variant: variant.map(|v| v.to_string()),
                model: model.clone(),
                feature_set: set,
                space: space.clone(),
                trace,
                best,
                cv,
            });
        }
    }
    let json = serde_json::to_string_pretty(&results).map_err(|e| Error::Shape(e.to_string()))?;
    artifacts::write_text(&out.tune_results(), &(json + "\n"))?;
    artifacts::write_text(&out.tune_dir().join("cv.csv"), &report::cv_csv(&results, &cfg.variants))?;
    Ok(results)
}

pub fn load_tune_results(out: &Layout) -> Result<Vec<TuneResult>> {
    let path = out.tune_results();
    let text = artifacts::read_text(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Run one stage.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig, out: &Layout) -> std::result::Result<(), StageError> {
    let r = match stage {
        Stage::Validate => cfg.validate(),
        Stage::Generate => generate(cfg, out),
        Stage::Features => extract_features(cfg, out),
        Stage::Tune => tune_models(cfg, out).map(drop),
        Stage::Report => report::write_reports(cfg, out),
    };
    tagged(stage, r)
}

/// Every stage in order.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Layout) -> std::result::Result<(), StageError> {
    for stage in [
        Stage::Validate,
        Stage::Generate,
        Stage::Features,
        Stage::Tune,
        Stage::Report,
    ] {
        log::info!("stage {stage}");
        run_stage(stage, cfg, out)?;
    }
    Ok(())
}
