//! Summary tables, importance rankings, MI, correlation and plots.

use std::fmt::Write as _;

use super::artifacts::{write_importance, write_matrix, write_text};
use super::svg;
use super::tune::{FeatureSet, TuneResult};
use super::{load_features, load_tune_results, Layout, PipelineConfig};
use crate::error::{Error, Result};
use crate::learn::{
    correlation_matrix, impurity_importance, mix_seed, mutual_information, rank_aggregate, FeatureMatrix, ModelSpec,
    Provenance,
};
use crate::signal::VariantId;

/// Combined accuracy must beat both single sets by this much to count as a
/// gain in the summary.
pub const GAIN_MARGIN: f64 = 0.05;

/// Result for `(model, variant, set)`; PB results are shared by all variants.
pub fn lookup<'a>(
    results: &'a [TuneResult],
    model: &str,
    variant: VariantId,
    set: FeatureSet,
) -> Option<&'a TuneResult> {
    let v = variant.to_string();
    results.iter().find(|r| {
        r.model == model
            && r.feature_set == set
            && match set {
                FeatureSet::Pb => r.variant.is_none(),
                _ => r.variant.as_deref() == Some(v.as_str()),
            }
    })
}

fn models_in(results: &[TuneResult]) -> Vec<String> {
    let mut models: Vec<String> = Vec::new();
    for r in results {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
    }
    models
}

fn missing(model: &str, v: VariantId, set: FeatureSet) -> Error {
    Error::Shape(format!(
        "no tuning result for {model} / {v} / {set}; re-run the tune stage"
    ))
}

/// `model,variant,feature_set,fold,accuracy`; each group ends with `mean` and
/// `std` rows in the fold column.
pub fn cv_csv(results: &[TuneResult], variants: &[VariantId]) -> String {
    let mut out = String::from("model,variant,feature_set,fold,accuracy\n");
    for model in models_in(results) {
        for &v in variants {
            for set in FeatureSet::ALL {
                let Some(r) = lookup(results, &model, v, set) else {
                    continue;
                };
                for (f, a) in r.cv.fold_accuracies.iter().enumerate() {
                    let _ = writeln!(out, "{model},{v},{set},{f},{a}");
                }
                let _ = writeln!(out, "{model},{v},{set},mean,{}", r.cv.mean);
                let _ = writeln!(out, "{model},{v},{set},std,{}", r.cv.std);
            }
        }
    }
    out
}

/// One row per (variant, model, feature set).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: VariantId,
    pub model: String,
    pub feature_set: FeatureSet,
    pub accuracy: f64,
    pub std: f64,
}

pub fn summary_rows(results: &[TuneResult], variants: &[VariantId]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for model in models_in(results) {
        for &v in variants {
            for set in FeatureSet::ALL {
                let r = lookup(results, &model, v, set).ok_or_else(|| missing(&model, v, set))?;
                rows.push(SummaryRow {
                    variant: v,
                    model: model.clone(),
                    feature_set: set,
                    accuracy: r.cv.mean,
                    std: r.cv.std,
                });
            }
        }
    }
    Ok(rows)
}

fn params_text(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::RandomForest(p) => format!(
            "max_depth={} n_estimators={} criterion={} max_features={:.4}",
            p.max_depth, p.n_estimators, p.criterion, p.max_features
        ),
        ModelSpec::GradientBoosting(p) => format!(
            "max_depth={} n_estimators={} criterion={} subsample={:.4} learning_rate={:.4}",
            p.max_depth, p.n_estimators, p.criterion, p.subsample, p.learning_rate
        ),
        ModelSpec::GaussianNb(p) => format!("var_smoothing={:e}", p.var_smoothing),
    }
}

fn summary_markdown(cfg: &PipelineConfig, results: &[TuneResult], rows: &[SummaryRow]) -> String {
    let mut md = String::from("# Pipeline summary\n\n");
    let _ = writeln!(
        md,
        "seed {}, {}-fold stratified CV, identical folds for every row.\n",
        cfg.seed, cfg.folds
    );
    md.push_str(
        "Note: band-power (PB) features are computed once from the CAR + notch signal; only the \
         topological (TDA) features change with the preprocessing variant. PB rows are therefore the \
         same in every variant, and PB+TDA joins that single PB block to each variant's TDA block.\n\n",
    );
    md.push_str("| variant | model | PB | TDA | PB+TDA | gain >= 0.05 |\n|---|---|---|---|---|---|\n");
    for chunk in rows.chunks(3) {
        let acc = |s: FeatureSet| {
            chunk
                .iter()
                .find(|r| r.feature_set == s)
                .map_or(f64::NAN, |r| r.accuracy)
        };
        let std = |s: FeatureSet| chunk.iter().find(|r| r.feature_set == s).map_or(f64::NAN, |r| r.std);
        let (pb, tda, both) = (acc(FeatureSet::Pb), acc(FeatureSet::Tda), acc(FeatureSet::PbTda));
        let gain = both >= pb.max(tda) + GAIN_MARGIN;
        let _ = writeln!(
            md,
            "| {} | {} | {pb:.4} ± {:.4} | {tda:.4} ± {:.4} | {both:.4} ± {:.4} | {} |",
            chunk[0].variant,
            chunk[0].model,
            std(FeatureSet::Pb),
            std(FeatureSet::Tda),
            std(FeatureSet::PbTda),
            if gain { "yes" } else { "no" }
        );
    }
    md.push_str("\n## Top 4 trials per search\n");
    for r in results {
        let scope = r.variant.as_deref().unwrap_or("shared");
        let _ = writeln!(md, "\n### {} / {} / {}\n", r.model, scope, r.feature_set);
        let names: Vec<&str> = r.space.params().iter().map(|p| p.name()).collect();
        let _ = writeln!(md, "| trial | {} | accuracy |", names.join(" | "));
        let _ = writeln!(md, "|---|{}---|", "---|".repeat(names.len()));
        for t in r.trace.top_k(4) {
            let values: Vec<String> = t
                .assignment
                .iter()
                .enumerate()
                .map(|(i, v)| r.space.format_value(i, v))
                .collect();
            let _ = writeln!(
                md,
                "| {} | {} | {:.4} |",
                t.index + 1,
                values.join(" | "),
                t.objective.unwrap_or(f64::NAN)
            );
        }
        let _ = writeln!(md, "\nselected: {}", params_text(&r.best));
    }
    md
}

/// Impurity importance of the tuned PB+TDA model, refit on all epochs of
/// each variant, ranked across variants.
fn importance_reports(
    cfg: &PipelineConfig,
    out: &Layout,
    results: &[TuneResult],
    matrices: &[(VariantId, FeatureMatrix)],
) -> Result<()> {
    for model in models_in(results) {
        let mut runs = Vec::new();
        for (i, (v, m)) in matrices.iter().enumerate() {
            let r =
                lookup(results, &model, *v, FeatureSet::PbTda).ok_or_else(|| missing(&model, *v, FeatureSet::PbTda))?;
            if matches!(r.best, ModelSpec::GaussianNb(_)) {
                break;
            }
            let rows: Vec<usize> = (0..m.n_samples()).collect();
            let fitted = r.best.fit(m, &rows, mix_seed(cfg.seed, 0x1A7 + i as u64))?;
            runs.push((v.to_string(), m.feature_ids().to_vec(), impurity_importance(&fitted)?));
        }
        if runs.is_empty() {
            continue;
        }
        let table = rank_aggregate(&runs)?;
        write_importance(&out.report_dir().join(format!("importance_{model}.csv")), &table)?;
    }
    Ok(())
}

fn mi_reports(out: &Layout, matrices: &[(VariantId, FeatureMatrix)]) -> Result<()> {
    let (_, first) = &matrices[0];
    let per_variant: Vec<Vec<f64>> = matrices
        .iter()
        .map(|(_, m)| {
            (0..m.n_features())
                .map(|f| mutual_information(&m.column(f), m.labels()))
                .collect()
        })
        .collect();
    let k = per_variant.len() as f64;
    let avg: Vec<f64> = (0..first.n_features())
        .map(|f| per_variant.iter().map(|v| v[f]).sum::<f64>() / k)
        .collect();
    let mut csv = String::from("feature_id,provenance");
    for (v, _) in matrices {
        let _ = write!(csv, ",mi_{}", v.to_string().to_lowercase());
    }
    csv.push_str(",avg_mi\n");
    for (f, id) in first.feature_ids().iter().enumerate() {
        let _ = write!(csv, "{id},{}", first.provenance()[f]);
        for v in &per_variant {
            let _ = write!(csv, ",{}", v[f]);
        }
        let _ = writeln!(csv, ",{}", avg[f]);
    }
    write_text(&out.report_dir().join("mutual_information.csv"), &csv)?;

    let mut order: Vec<usize> = (0..avg.len()).collect();
    order.sort_by(|&a, &b| avg[b].total_cmp(&avg[a]).then(a.cmp(&b)));
    let bars: Vec<(String, f64, usize)> = order
        .iter()
        .take(30)
        .map(|&f| {
            let group = usize::from(first.provenance()[f] == Provenance::Pb);
            (format!("f{}", first.feature_ids()[f]), avg[f], group)
        })
        .collect();
    let chart = svg::bar_chart(
        "Mutual information, averaged over variants (top 30)",
        "MI (nats)",
        &bars,
        &["TDA", "PB"],
    );
    write_text(&out.report_dir().join("mi_bars.svg"), &chart)
}

fn variant_reports(out: &Layout, results: &[TuneResult], v: VariantId, m: &FeatureMatrix) -> Result<()> {
    let dir = out.report_dir().join(v.to_string());
    let columns: Vec<Vec<f64>> = (0..m.n_features()).map(|f| m.column(f)).collect();
    let corr = correlation_matrix(&columns);
    write_matrix(&dir.join("correlation.csv"), m.feature_ids(), &corr)?;
    let labels: Vec<String> = m.feature_ids().iter().map(|id| id.to_string()).collect();
    write_text(
        &dir.join("correlation.svg"),
        &svg::heatmap(&format!("Feature correlation, {v}"), &corr, &labels, 18),
    )?;
    for model in models_in(results) {
        let series: Vec<(String, Vec<Option<f64>>)> = FeatureSet::ALL
            .iter()
            .filter_map(|&s| lookup(results, &model, v, s).map(|r| (s.to_string(), r.trace.best_so_far.clone())))
            .collect();
        let chart = svg::line_chart(
            &format!("{model} convergence, {v}"),
            "trial",
            "best CV accuracy",
            &series,
        );
        write_text(&dir.join(format!("convergence_{model}.svg")), &chart)?;
    }
    Ok(())
}

pub fn write_reports(cfg: &PipelineConfig, out: &Layout) -> Result<()> {
    let results = load_tune_results(out)?;
    let matrices = load_features(cfg, out)?;
    let rows = summary_rows(&results, &cfg.variants)?;
    let mut csv = String::from("variant,model,feature_set,accuracy,std\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.variant, r.model, r.feature_set, r.accuracy, r.std
        );
    }
    write_text(&out.report_dir().join("summary.csv"), &csv)?;
    write_text(
        &out.report_dir().join("summary.md"),
        &summary_markdown(cfg, &results, &rows),
    )?;
    importance_reports(cfg, out, &results, &matrices)?;
    mi_reports(out, &matrices)?;
    for (v, m) in &matrices {
        variant_reports(out, &results, *v, m)?;
    }
    Ok(())
}
