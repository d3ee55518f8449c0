//! Recording + events -> PB and per-variant TDA feature matrices.

use rayon::prelude::*;

use crate::bandpower::{extract_pb_features, BandDefinition, PB_FEATURE_OFFSET};
use crate::diagram_features::{extract_tda_features, AmplitudeSettings, TDA_FEATURE_COUNT};
use crate::error::Result;
use crate::learn::{FeatureMatrix, Provenance};
use crate::persistence::{vr_persistence, PersistenceDiagram};
use crate::signal::{
    bandcut, car_filter, notch_cascade, segment_epochs, EventTable, MultichannelRecording, NotchParams, PreprocVariant,
};
use crate::takens::{takens_embed, EmbeddingParams, PointCloud};

/// Shared preprocessing knobs.
#[derive(Debug, Clone)]
pub struct FeatureSettings {
    pub notch: NotchParams,
    pub bandcut_order: usize,
    pub window_s: f64,
    pub bands: Vec<BandDefinition>,
    pub embedding: EmbeddingParams,
    pub amplitude: AmplitudeSettings,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            notch: NotchParams::default(),
            bandcut_order: 4,
            window_s: 2.0,
            bands: BandDefinition::defaults(),
            embedding: EmbeddingParams::default(),
            amplitude: AmplitudeSettings::default(),
        }
    }
}

/// Topological features of one variant.
#[derive(Debug, Clone)]
pub struct TdaOutput {
    pub values: Vec<[f64; TDA_FEATURE_COUNT]>,
    pub diagrams: Vec<PersistenceDiagram>,
    /// Kept only when requested; large.
    pub clouds: Option<Vec<PointCloud>>,
}

/// Notch the raw recording once; CAR and notch commute, so every later
/// stage starts from this signal.
pub fn notched(rec: &MultichannelRecording, settings: &FeatureSettings) -> Result<MultichannelRecording> {
    notch_cascade(rec, &settings.notch)
}

/// Log band-power rows (one per event) from the CAR + notch signal.
pub fn pb_rows(
    notched: &MultichannelRecording,
    events: &EventTable,
    settings: &FeatureSettings,
) -> Result<Vec<Vec<f64>>> {
    let referenced = car_filter(notched)?;
    let epochs = segment_epochs(&referenced, events, settings.window_s)?;
    let fs = notched.sampling_rate();
    epochs
        .par_iter()
        .map(|e| extract_pb_features(e, &settings.bands, fs).map(|f| f.values))
        .collect()
}

pub fn tda_rows(
    notched: &MultichannelRecording,
    events: &EventTable,
    variant: &PreprocVariant,
    settings: &FeatureSettings,
    keep_clouds: bool,
) -> Result<TdaOutput> {
    let filtered = bandcut(notched, variant, settings.bandcut_order)?;
    let epochs = segment_epochs(&filtered, events, settings.window_s)?;
    drop(filtered);
    let per_epoch: Vec<(PersistenceDiagram, [f64; TDA_FEATURE_COUNT], Option<PointCloud>)> = epochs
        .par_iter()
        .map(|e| {
            let cloud = takens_embed(e, &settings.embedding)?;
            let diagram = vr_persistence(&cloud, 1)?;
            let features = extract_tda_features(&diagram, &settings.amplitude).values;
            Ok((diagram, features, keep_clouds.then_some(cloud)))
        })
        .collect::<Result<_>>()?;
    let mut out = TdaOutput {
        values: Vec::new(),
        diagrams: Vec::new(),
        clouds: keep_clouds.then(Vec::new),
    };
    for (d, f, c) in per_epoch {
        out.values.push(f);
        out.diagrams.push(d);
        if let (Some(all), Some(c)) = (out.clouds.as_mut(), c) {
            all.push(c);
        }
    }
    Ok(out)
}

/// Join TDA (ids 0..18) and PB (ids 18..) columns into one matrix.
pub fn combine(tda: &[[f64; TDA_FEATURE_COUNT]], pb: &[Vec<f64>], labels: Vec<usize>) -> Result<FeatureMatrix> {
    let p_pb = pb.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = tda
        .iter()
        .zip(pb)
        .map(|(t, p)| t.iter().chain(p).copied().collect())
        .collect();
    let ids: Vec<usize> = (0..TDA_FEATURE_COUNT)
        .chain(PB_FEATURE_OFFSET..PB_FEATURE_OFFSET + p_pb)
        .collect();
    let provenance = std::iter::repeat_n(Provenance::Tda, TDA_FEATURE_COUNT)
        .chain(std::iter::repeat_n(Provenance::Pb, p_pb))
        .collect();
    Ok(FeatureMatrix::new(rows, labels, ids, provenance)?.with_n_classes(4))
}
