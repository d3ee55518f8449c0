//! Log band-power features: band-pass each channel, square, average over the
//! valid part of the epoch, take the natural log.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::butterworth::{BandKind, Sos};
use crate::signal::Epoch;

/// Floor applied before the logarithm so silent channels stay finite.
pub const POWER_FLOOR: f64 = 1e-12;

/// First feature id used by band-power features; 0..18 are topological.
pub const PB_FEATURE_OFFSET: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandDefinition {
    pub low: f64,
    pub high: f64,
    pub order: usize,
}

impl BandDefinition {
    pub const fn new(low: f64, high: f64) -> Self {
        BandDefinition { low, high, order: 4 }
    }

    /// 60-90, 110-140 and 160-190 Hz, all 4th order.
    pub fn defaults() -> Vec<BandDefinition> {
        vec![Self::new(60.0, 90.0), Self::new(110.0, 140.0), Self::new(160.0, 190.0)]
    }

    pub fn design(&self, fs: f64) -> Result<Sos> {
        Sos::butterworth(BandKind::Pass, self.order, self.low, self.high, fs)
    }
}

/// Band-power values for one epoch, ordered band-major then channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBandFeatures {
    pub values: Vec<f64>,
    pub feature_ids: Vec<usize>,
}

/// Zero-phase band-pass of the valid region of every channel; the padding
/// stays exactly zero.
pub fn band_filter_epoch(epoch: &Epoch, band: &BandDefinition, fs: f64) -> Result<Epoch> {
    let sos = band.design(fs)?;
    Ok(filter_with(epoch, &sos))
}

fn filter_with(epoch: &Epoch, sos: &Sos) -> Epoch {
    let mut out = epoch.clone();
    let valid = epoch.valid_length();
    for c in 0..epoch.channels() {
        let y = sos.filtfilt(epoch.valid(c));
        out.channel_mut(c)[..valid].copy_from_slice(&y);
    }
    out
}

/// `ln(max(mean(y^2), POWER_FLOOR))` per channel over the valid samples.
pub fn log_band_power(filtered: &Epoch) -> Result<Vec<f64>> {
    let valid = filtered.valid_length();
    if valid == 0 {
        return Err(Error::EmptyEpoch);
    }
    Ok((0..filtered.channels())
        .map(|c| {
            let power = filtered.valid(c).iter().map(|v| v * v).sum::<f64>() / valid as f64;
            power.max(POWER_FLOOR).ln()
        })
        .collect())
}

pub fn extract_pb_features(epoch: &Epoch, bands: &[BandDefinition], fs: f64) -> Result<PowerBandFeatures> {
    let designs = bands.iter().map(|b| b.design(fs)).collect::<Result<Vec<_>>>()?;
    let per_band = designs
        .par_iter()
        .map(|sos| log_band_power(&filter_with(epoch, sos)))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = per_band.concat();
    let feature_ids = (PB_FEATURE_OFFSET..PB_FEATURE_OFFSET + values.len()).collect();
    Ok(PowerBandFeatures { values, feature_ids })
}
