//! Recordings, spatial and temporal filtering, and epoch segmentation.

pub mod butterworth;
mod io;

pub use io::{load_events, load_recording, write_events, write_recording_csv, write_recording_raw, RecordingFormat};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use butterworth::{BandKind, Sos};

/// Channels x time samples at a fixed sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelRecording {
    channels: Vec<Vec<f64>>,
    sampling_rate: f64,
    channel_names: Vec<String>,
}

impl MultichannelRecording {
    pub fn new(channels: Vec<Vec<f64>>, sampling_rate: f64, channel_names: Vec<String>) -> Result<Self> {
        if channels.is_empty() || channels[0].is_empty() {
            return Err(Error::Shape(
                "recording needs at least one channel and one sample".into(),
            ));
        }
        if !(sampling_rate > 0.0 && sampling_rate.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        let len = channels[0].len();
        if let Some((c, _)) = channels.iter().enumerate().find(|(_, ch)| ch.len() != len) {
            return Err(Error::Shape(format!(
                "channel {c} length differs from channel 0 ({len})"
            )));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("recording contains NaN or infinite samples".into()));
        }
        if channel_names.len() != channels.len() {
            return Err(Error::Shape(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                channels.len()
            )));
        }
        Ok(MultichannelRecording {
            channels,
            sampling_rate,
            channel_names,
        })
    }

    /// Names channels `ch0`, `ch1`, ...
    pub fn with_default_names(channels: Vec<Vec<f64>>, sampling_rate: f64) -> Result<Self> {
        let names = (0..channels.len()).map(|c| format!("ch{c}")).collect();
        Self::new(channels, sampling_rate, names)
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn nyquist(&self) -> f64 {
        self.sampling_rate / 2.0
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    /// Apply `f` to every channel independently.
    pub fn map_channels<F>(&self, f: F) -> MultichannelRecording
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        MultichannelRecording {
            channels: self.channels.par_iter().map(|c| f(c)).collect(),
            sampling_rate: self.sampling_rate,
            channel_names: self.channel_names.clone(),
        }
    }
}

/// The four trial classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Rest,
    Rock,
    Paper,
    Scissors,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::Rest,
        ClassLabel::Rock,
        ClassLabel::Paper,
        ClassLabel::Scissors,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassLabel::Rest => "Rest",
            ClassLabel::Rock => "Rock",
            ClassLabel::Paper => "Paper",
            ClassLabel::Scissors => "Scissors",
        };
        f.write_str(s)
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rest" => Ok(ClassLabel::Rest),
            "rock" => Ok(ClassLabel::Rock),
            "paper" => Ok(ClassLabel::Paper),
            "scissors" => Ok(ClassLabel::Scissors),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub onset: usize,
    pub duration: usize,
    pub label: ClassLabel,
}

/// Labeled trial onsets with strictly increasing onset samples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTable {
    events: Vec<Event>,
}

impl EventTable {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        for (i, w) in events.windows(2).enumerate() {
            if w[1].onset <= w[0].onset {
                return Err(Error::InvalidEvents(format!(
                    "onset of event {} ({}) does not follow event {} ({})",
                    i + 1,
                    w[1].onset,
                    i,
                    w[0].onset
                )));
            }
        }
        Ok(EventTable { events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Count of events per class, indexed by [`ClassLabel::index`].
    pub fn histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for e in &self.events {
            h[e.label.index()] += 1;
        }
        h
    }

    pub fn validate_against(&self, len: usize) -> Result<()> {
        for (index, e) in self.events.iter().enumerate() {
            if e.onset + e.duration > len {
                return Err(Error::EventOutOfRange {
                    index,
                    onset: e.onset,
                    duration: e.duration,
                    len,
                });
            }
        }
        Ok(())
    }
}

/// One labeled, fixed-length trial window. Samples past `valid_length` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    data: Vec<f64>,
    channels: usize,
    window: usize,
    pub label: ClassLabel,
    pub trial_id: usize,
    valid_length: usize,
}

impl Epoch {
    /// Builds an epoch from per-channel windows, zeroing everything past
    /// `valid_length`.
    pub fn new(channels: Vec<Vec<f64>>, label: ClassLabel, trial_id: usize, valid_length: usize) -> Result<Self> {
        let window = channels.first().map_or(0, Vec::len);
        if channels.is_empty() || window == 0 || channels.iter().any(|c| c.len() != window) {
            return Err(Error::Shape("epoch channels must be non-empty and equal length".into()));
        }
        if valid_length > window {
            return Err(Error::Shape(format!(
                "valid length {valid_length} exceeds window {window}"
            )));
        }
        let n_channels = channels.len();
        let mut data = channels.concat();
        for c in 0..n_channels {
            data[c * window + valid_length..(c + 1) * window].fill(0.0);
        }
        Ok(Epoch {
            data,
            channels: n_channels,
            window,
            label,
            trial_id,
            valid_length,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn valid_length(&self) -> usize {
        self.valid_length
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.window..(c + 1) * self.window]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.window..(c + 1) * self.window]
    }

    /// Samples of channel `c` before the padding.
    pub fn valid(&self, c: usize) -> &[f64] {
        &self.channel(c)[..self.valid_length]
    }

    pub fn scaled(&self, k: f64) -> Epoch {
        let mut e = self.clone();
        e.data.iter_mut().for_each(|v| *v *= k);
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantId {
    V1,
    V2,
    V3,
    V4,
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A band-cut setting for the topological branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocVariant {
    pub id: VariantId,
    pub band: (f64, f64),
    pub apply_car: bool,
}

impl PreprocVariant {
    pub const fn preset(id: VariantId) -> Self {
        let (band, apply_car) = match id {
            VariantId::V1 => ((1.0, 500.0), true),
            VariantId::V2 => ((100.0, 500.0), true),
            VariantId::V3 => ((50.0, 300.0), true),
            VariantId::V4 => ((1.0, 500.0), false),
        };
        PreprocVariant { id, band, apply_car }
    }

    pub fn all() -> [PreprocVariant; 4] {
        [VariantId::V1, VariantId::V2, VariantId::V3, VariantId::V4].map(Self::preset)
    }
}

/// Subtract the cross-channel mean at every time point.
pub fn car_filter(rec: &MultichannelRecording) -> Result<MultichannelRecording> {
    let n_ch = rec.n_channels();
    if n_ch < 2 {
        return Err(Error::TooFewChannels {
            required: 2,
            found: n_ch,
        });
    }
    let len = rec.len();
    let mut mean = vec![0.0; len];
    for ch in rec.channels() {
        for (m, v) in mean.iter_mut().zip(ch) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n_ch as f64);
    Ok(rec.map_channels(|ch| ch.iter().zip(&mean).map(|(v, m)| v - m).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NotchParams {
    pub base_freq: f64,
    pub n_harmonics: usize,
    pub order: usize,
    pub half_width: f64,
}

impl Default for NotchParams {
    fn default() -> Self {
        NotchParams {
            base_freq: 50.0,
            n_harmonics: 6,
            order: 5,
            half_width: 1.0,
        }
    }
}

impl NotchParams {
    /// The whole harmonic cascade as one section list.
    pub fn design(&self, fs: f64) -> Result<Sos> {
        let nyquist = fs / 2.0;
        let top = self.base_freq * self.n_harmonics as f64;
        if top + self.half_width >= nyquist {
            return Err(Error::NyquistViolation { freq: top, nyquist });
        }
        let mut sections = Vec::new();
        for k in 1..=self.n_harmonics {
            let f = self.base_freq * k as f64;
            let sos = Sos::butterworth(BandKind::Stop, self.order, f - self.half_width, f + self.half_width, fs)?;
            sections.extend(sos.sections);
        }
        Ok(Sos { sections })
    }
}

/// Zero-phase band-stop at every power-line harmonic.
pub fn notch_cascade(rec: &MultichannelRecording, params: &NotchParams) -> Result<MultichannelRecording> {
    let sos = params.design(rec.sampling_rate())?;
    Ok(rec.map_channels(|ch| sos.filtfilt(ch)))
}

/// Optional CAR followed by a zero-phase Butterworth band-pass at the
/// variant's band.
pub fn bandcut(rec: &MultichannelRecording, variant: &PreprocVariant, order: usize) -> Result<MultichannelRecording> {
    let (low, high) = variant.band;
    let sos = Sos::butterworth(BandKind::Pass, order, low, high, rec.sampling_rate())?;
    let base = if variant.apply_car {
        car_filter(rec)?
    } else {
        rec.clone()
    };
    Ok(base.map_channels(|ch| sos.filtfilt(ch)))
}

/// One epoch per event. Events longer than the window are clipped, shorter
/// ones are zero-padded at the end.
pub fn segment_epochs(rec: &MultichannelRecording, events: &EventTable, window_s: f64) -> Result<Vec<Epoch>> {
    events.validate_against(rec.len())?;
    let window = (window_s * rec.sampling_rate()).round() as usize;
    if window == 0 {
        return Err(Error::InvalidParam(format!("window of {window_s} s holds no samples")));
    }
    events
        .events()
        .iter()
        .enumerate()
        .map(|(trial_id, e)| {
            let valid = e.duration.min(window);
            let channels = rec
                .channels()
                .iter()
                .map(|ch| {
                    let mut w = vec![0.0; window];
                    w[..valid].copy_from_slice(&ch[e.onset..e.onset + valid]);
                    w
                })
                .collect();
            Epoch::new(channels, e.label, trial_id, valid)
        })
        .collect()
}
