//! Synthetic multichannel recordings with class-dependent spectral bursts and
//! latent limit cycles.
//!
//! Each trial may carry a narrowband burst on a fixed set of "motor" channels
//! (visible to band power) and a two-dimensional oscillation mixed into all
//! channels through a zero-mean orthonormal projection (a loop in channel
//! space, visible to H1). Background is white noise plus 50 Hz line noise.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::mix_seed;
use crate::signal::{ClassLabel, Event, EventTable, MultichannelRecording};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Burst {
    /// Per-trial frequency is drawn uniformly from `[low, high]` Hz.
    pub low: f64,
    pub high: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentLoop {
    pub radius: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSignature {
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst: Option<Burst>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "loop")]
    pub latent_loop: Option<LatentLoop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub channels: usize,
    pub sampling_rate: f64,
    pub rest: ClassSignature,
    pub rock: ClassSignature,
    pub paper: ClassSignature,
    pub scissors: ClassSignature,
    /// Channels that carry bursts.
    pub motor_channels: usize,
    /// White-noise standard deviation per channel.
    pub noise: f64,
    pub line_noise: f64,
    pub gesture_duration_s: f64,
    pub rest_duration_s: (f64, f64),
    pub gap_s: f64,
    /// Relative per-trial jitter of loop radius.
    pub radius_jitter: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let burst = Some(Burst {
            low: 70.0,
            high: 80.0,
            amplitude: 0.3,
        });
        let latent_loop = Some(LatentLoop {
            radius: 10.0,
            frequency: 233.0,
        });
        SyntheticSpec {
            channels: 60,
            sampling_rate: 1200.0,
            rest: ClassSignature {
                trials: 90,
                burst: None,
                latent_loop: None,
            },
            rock: ClassSignature {
                trials: 30,
                burst,
                latent_loop: None,
            },
            paper: ClassSignature {
                trials: 30,
                burst: None,
                latent_loop,
            },
            scissors: ClassSignature {
                trials: 30,
                burst,
                latent_loop,
            },
            motor_channels: 8,
            noise: 1.0,
            line_noise: 2.0,
            gesture_duration_s: 2.0,
            rest_duration_s: (1.5, 2.5),
            gap_s: 0.2,
            radius_jitter: 0.1,
        }
    }
}

impl SyntheticSpec {
    pub fn signature(&self, label: ClassLabel) -> &ClassSignature {
        match label {
            ClassLabel::Rest => &self.rest,
            ClassLabel::Rock => &self.rock,
            ClassLabel::Paper => &self.paper,
            ClassLabel::Scissors => &self.scissors,
        }
    }

    pub fn total_trials(&self) -> usize {
        ClassLabel::ALL.iter().map(|&l| self.signature(l).trials).sum()
    }

    /// Check ranges; `min_trials` is the smallest allowed per-class count
    /// (the number of CV folds).
    pub fn validate(&self, min_trials: usize) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.channels < 2 {
            return bad(format!("need at least 2 channels, got {}", self.channels));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return bad("sampling_rate must be positive".into());
        }
        if self.motor_channels == 0 || self.motor_channels > self.channels {
            return bad(format!("motor_channels must be in 1..={}", self.channels));
        }
        let nonneg = [self.noise, self.line_noise, self.gap_s, self.radius_jitter];
        if nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || self.radius_jitter >= 1.0 {
            return bad("noise, line_noise, gap_s must be >= 0 and radius_jitter in [0, 1)".into());
        }
        let (lo, hi) = self.rest_duration_s;
        if !(lo > 0.0 && lo <= hi && self.gesture_duration_s > 0.0) {
            return bad("durations must be positive with rest_duration_s.0 <= rest_duration_s.1".into());
        }
        let nyquist = self.sampling_rate / 2.0;
        for label in ClassLabel::ALL {
            let s = self.signature(label);
            if s.trials < min_trials.max(1) {
                return bad(format!(
                    "class {label} has {} trials, need at least {}",
                    s.trials,
                    min_trials.max(1)
                ));
            }
            if let Some(b) = s.burst {
                if !(b.low > 0.0 && b.low <= b.high && b.high < nyquist && b.amplitude >= 0.0) {
                    return bad(format!(
                        "class {label}: burst band must satisfy 0 < low <= high < {nyquist}"
                    ));
                }
            }
            if let Some(l) = s.latent_loop {
                if !(l.frequency > 0.0 && l.frequency < nyquist && l.radius >= 0.0) {
                    return bad(format!("class {label}: loop frequency must be in (0, {nyquist})"));
                }
            }
        }
        for (i, a) in ClassLabel::ALL.iter().enumerate() {
            for b in &ClassLabel::ALL[i + 1..] {
                let (sa, sb) = (self.signature(*a), self.signature(*b));
                if sa.burst == sb.burst && sa.latent_loop == sb.latent_loop {
                    return bad(format!("classes {a} and {b} have identical signatures"));
                }
            }
        }
        Ok(())
    }
}

/// Zero-mean orthonormal `channels x 2` projection.
fn loop_projection(channels: usize, rng: &mut ChaCha8Rng) -> [Vec<f64>; 2] {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut cols: [Vec<f64>; 2] = std::array::from_fn(|_| (0..channels).map(|_| normal.sample(rng)).collect());
    for c in &mut cols {
        let mean = c.iter().sum::<f64>() / channels as f64;
        c.iter_mut().for_each(|v| *v -= mean);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n0 = norm(&cols[0]);
    cols[0].iter_mut().for_each(|v| *v /= n0);
    let dot: f64 = cols[0].iter().zip(&cols[1]).map(|(a, b)| a * b).sum();
    let (c0, c1) = (cols[0].clone(), &mut cols[1]);
    c1.iter_mut().zip(&c0).for_each(|(b, a)| *b -= dot * a);
    let n1 = norm(c1);
    c1.iter_mut().for_each(|v| *v /= n1);
    cols
}

struct PlannedTrial {
    event: Event,
    burst_freq: f64,
    burst_phase: f64,
    loop_radius: f64,
    loop_phase: f64,
}

/// Generate a recording and its event table. Identical `(spec, seed)` give
/// bit-identical output regardless of thread count.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<(MultichannelRecording, EventTable)> {
    spec.validate(1)?;
    let fs = spec.sampling_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projection = loop_projection(spec.channels, &mut rng);
    let mut channel_order: Vec<usize> = (0..spec.channels).collect();
    channel_order.shuffle(&mut rng);
    let mut motor = channel_order[..spec.motor_channels].to_vec();
    motor.sort_unstable();

    let mut labels: Vec<ClassLabel> = ClassLabel::ALL
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, spec.signature(l).trials))
        .collect();
    labels.shuffle(&mut rng);

    let samples = |s: f64| (s * fs).round() as usize;
    let mut cursor = samples(spec.gap_s.max(0.5));
    let mut plan = Vec::with_capacity(labels.len());
    for label in labels {
        let dur_s = match label {
            ClassLabel::Rest => rng.random_range(spec.rest_duration_s.0..=spec.rest_duration_s.1),
            _ => spec.gesture_duration_s,
        };
        let duration = samples(dur_s).max(1);
        let sig = spec.signature(label);
        let burst_freq = sig.burst.map_or(0.0, |b| rng.random_range(b.low..=b.high));
        let burst_phase = rng.random_range(0.0..2.0 * PI);
        let jitter = 1.0 + spec.radius_jitter * rng.random_range(-1.0..=1.0);
        let loop_radius = sig.latent_loop.map_or(0.0, |l| l.radius * jitter);
        let loop_phase = rng.random_range(0.0..2.0 * PI);
        plan.push(PlannedTrial {
            event: Event {
                onset: cursor,
                duration,
                label,
            },
            burst_freq,
            burst_phase,
            loop_radius,
            loop_phase,
        });
        cursor += duration + samples(spec.gap_s);
    }
    let len = cursor + samples(spec.gap_s.max(0.5));
    let line_gain: Vec<(f64, f64)> = (0..spec.channels)
        .map(|_| {
            (
                1.0 + 0.1 * rng.random_range(-1.0..=1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();

    let channels: Vec<Vec<f64>> = (0..spec.channels)
        .into_par_iter()
        .map(|c| {
            let mut crng = ChaCha8Rng::seed_from_u64(mix_seed(seed, c as u64));
            let normal = Normal::new(0.0, spec.noise.max(f64::MIN_POSITIVE)).expect("valid sd");
            let (gain, phase) = line_gain[c];
            let mut x: Vec<f64> = (0..len)
                .map(|t| {
                    let w = if spec.noise > 0.0 {
                        normal.sample(&mut crng)
                    } else {
                        0.0
                    };
                    w + spec.line_noise * gain * (2.0 * PI * 50.0 * t as f64 / fs + phase).sin()
                })
                .collect();
            let is_motor = motor.binary_search(&c).is_ok();
            for p in &plan {
                let sig = spec.signature(p.event.label);
                let span = &mut x[p.event.onset..p.event.onset + p.event.duration];
                if let (Some(b), true) = (sig.burst, is_motor) {
                    for (k, v) in span.iter_mut().enumerate() {
                        *v += b.amplitude * (2.0 * PI * p.burst_freq * k as f64 / fs + p.burst_phase).sin();
                    }
                }
                if let Some(l) = sig.latent_loop {
                    let (u, w) = (projection[0][c] * p.loop_radius, projection[1][c] * p.loop_radius);
                    for (k, v) in span.iter_mut().enumerate() {
                        let theta = 2.0 * PI * l.frequency * k as f64 / fs + p.loop_phase;
                        *v += u * theta.cos() + w * theta.sin();
                    }
                }
            }
            x
        })
        .collect();

    let events = EventTable::new(plan.into_iter().map(|p| p.event).collect())?;
    let rec = MultichannelRecording::with_default_names(channels, fs)?;
    Ok((rec, events))
}
