//! CSV artifacts written and re-read between stages.

use std::fmt::Write as _;
use std::path::Path;

use crate::bandpower::PB_FEATURE_OFFSET;
use crate::error::{Error, Result};
use crate::hyperopt::{OptimizationTrace, SearchSpace};
use crate::learn::{FeatureMatrix, ImportanceTable, Provenance};
use crate::persistence::PersistenceDiagram;
use crate::signal::ClassLabel;

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Wide layout: `epoch_id,label,f<id>...`.
pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut out = String::from("epoch_id,label");
    for id in m.feature_ids() {
        let _ = write!(out, ",f{id}");
    }
    out.push('\n');
    for i in 0..m.n_samples() {
        let label = ClassLabel::from_index(m.labels()[i]).map_or_else(|| m.labels()[i].to_string(), |l| l.to_string());
        let _ = write!(out, "{i},{label}");
        for v in m.row(i) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    if header.len() < 3 || header[0] != "epoch_id" || header[1] != "label" {
        return Err(Error::Parse {
            line: 1,
            message: format!("{}: expected epoch_id,label,f<id>...", path.display()),
        });
    }
    let ids: Vec<usize> = header[2..]
        .iter()
        .map(|h| {
            h.strip_prefix('f')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("bad feature column `{h}`"),
                })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: n + 2,
                message: format!("expected {} fields", header.len()),
            });
        }
        let label: ClassLabel = fields[1]
            .parse()
            .map_err(|message| Error::Parse { line: n + 2, message })?;
        y.push(label.index());
        let row = fields[2..]
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: n + 2,
                    message: format!("`{f}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let prov = ids
        .iter()
        .map(|&id| {
            if id < PB_FEATURE_OFFSET {
                Provenance::Tda
            } else {
                Provenance::Pb
            }
        })
        .collect();
    Ok(FeatureMatrix::new(rows, y, ids, prov)?.with_n_classes(ClassLabel::ALL.len()))
}

pub fn write_diagrams(path: &Path, diagrams: &[PersistenceDiagram]) -> Result<()> {
    let mut out = String::from("epoch_id,hom_dim,birth,death\n");
    for (e, d) in diagrams.iter().enumerate() {
        for k in 0..=1 {
            for iv in d.dim(k) {
                let _ = writeln!(out, "{e},{k},{},{}", iv.birth, iv.death);
            }
        }
    }
    write_text(path, &out)
}

/// `trial,<param>...,objective,best_so_far`; failed trials leave the
/// objective empty.
pub fn write_trace(path: &Path, space: &SearchSpace, trace: &OptimizationTrace) -> Result<()> {
    let mut out = String::from("trial");
    for p in space.params() {
        let _ = write!(out, ",{}", p.name());
    }
    out.push_str(",objective,best_so_far\n");
    for (t, best) in trace.trials.iter().zip(&trace.best_so_far) {
        let _ = write!(out, "{}", t.index + 1);
        for (i, v) in t.assignment.iter().enumerate() {
            let _ = write!(out, ",{}", space.format_value(i, v));
        }
        let _ = writeln!(out, ",{},{}", opt(t.objective), opt(*best));
    }
    write_text(path, &out)
}

/// `feature_id,imp_<run>,rank_<run>...,avg_imp,avg_rank`, rows by average rank.
pub fn write_importance(path: &Path, table: &ImportanceTable) -> Result<()> {
    let mut out = String::from("feature_id");
    for r in &table.runs {
        let r = r.to_lowercase();
        let _ = write!(out, ",imp_{r},rank_{r}");
    }
    out.push_str(",avg_imp,avg_rank\n");
    for row in &table.rows {
        let _ = write!(out, "{}", row.feature_id);
        for (imp, rank) in row.importance.iter().zip(&row.rank) {
            let _ = write!(out, ",{imp},{rank}");
        }
        let _ = writeln!(out, ",{},{}", row.avg_importance, row.avg_rank);
    }
    write_text(path, &out)
}

pub fn write_matrix(path: &Path, ids: &[usize], matrix: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from("feature_id");
    for id in ids {
        let _ = write!(out, ",f{id}");
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(matrix) {
        let _ = write!(out, "f{id}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    write_text(path, &out)
}
