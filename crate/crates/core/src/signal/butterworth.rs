//! Butterworth band-pass and band-stop designs as cascaded second-order
//! sections, plus zero-phase (forward-backward) application.
//!
//! Designs go through the analog prototype: Butterworth low-pass poles are
//! frequency-transformed to band-pass or band-stop, then mapped to the z-plane
//! with the bilinear transform after pre-warping the band edges.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One biquad, `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct-form II state that holds the output constant for a
    /// unit step input.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * g;
        [g - self.b[0], z2]
    }
}

/// A cascade of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    Pass,
    Stop,
}

fn check_band(low: f64, high: f64, fs: f64) -> Result<()> {
    let nyquist = fs / 2.0;
    if !(low > 0.0 && low < high) || !low.is_finite() || !high.is_finite() {
        return Err(Error::InvalidBand { low, high });
    }
    if high >= nyquist {
        return Err(Error::NyquistViolation { freq: high, nyquist });
    }
    Ok(())
}

impl Sos {
    /// Butterworth band-pass (`kind = Pass`) or band-stop (`kind = Stop`) of
    /// prototype order `order`; the resulting filter has `order` sections.
    pub fn butterworth(kind: BandKind, order: usize, low: f64, high: f64, fs: f64) -> Result<Sos> {
        if order == 0 {
            return Err(Error::InvalidParam("filter order must be >= 1".into()));
        }
        check_band(low, high, fs)?;
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w1, w2) = (warp(low), warp(high));
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;
        let k2fs = 2.0 * fs;

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            let half = match kind {
                BandKind::Pass => p * bw / 2.0,
                BandKind::Stop => bw / (2.0 * p),
            };
            let root = (half * half - w0 * w0).sqrt();
            for s in [half + root, half - root] {
                poles.push((k2fs + s) / (k2fs - s));
            }
        }

        let omega0 = 2.0 * (w0 / k2fs).atan();
        let numerator = match kind {
            BandKind::Pass => [1.0, 0.0, -1.0],
            BandKind::Stop => [1.0, -2.0 * omega0.cos(), 1.0],
        };
        let reference = match kind {
            BandKind::Pass => omega0,
            BandKind::Stop => 0.0,
        };

        let sections = pair_poles(poles)
            .into_iter()
            .map(|(p, q)| {
                let a = [-(p + q).re, (p * q).re];
                let mut bq = Biquad { b: numerator, a };
                let g = bq.response(reference).norm();
                for c in &mut bq.b {
                    *c /= g;
                }
                bq
            })
            .collect();
        Ok(Sos { sections })
    }

    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        self.sections.iter().map(|s| s.response(omega)).product()
    }

    /// Magnitude response at `freq` Hz for sampling rate `fs`.
    pub fn magnitude_at(&self, freq: f64, fs: f64) -> f64 {
        self.response(2.0 * PI * freq / fs).norm()
    }

    /// Causal filtering with initial state `state` (one pair per section).
    fn run(&self, data: &mut [f64], state: &mut [[f64; 2]]) {
        for (sec, z) in self.sections.iter().zip(state.iter_mut()) {
            let [b0, b1, b2] = sec.b;
            let [a1, a2] = sec.a;
            let [mut z1, mut z2] = *z;
            for x in data.iter_mut() {
                let y = b0 * *x + z1;
                z1 = b1 * *x - a1 * y + z2;
                z2 = b2 * *x - a2 * y;
                *x = y;
            }
            *z = [z1, z2];
        }
    }

    /// Per-section steady-state initial conditions for a unit step.
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [z1, z2] = s.step_state();
                let out = [z1 * scale, z2 * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    /// Edge extension used by [`Sos::filtfilt`]: three times the filter order.
    pub fn pad_len(&self) -> usize {
        3 * self.order()
    }

    /// Zero-phase filtering: odd-reflection padding, forward pass, backward
    /// pass, trim. Both passes start from the step steady state scaled by the
    /// first sample they see.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = self.pad_len().min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|k| 2.0 * first - x[k]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|k| 2.0 * last - x[n - 1 - k]));

        let zi = self.step_states();
        let mut state: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * ext[0], z[1] * ext[0]]).collect();
        self.run(&mut ext, &mut state);
        ext.reverse();
        let mut state: Vec<[f64; 2]> = zi.iter().map(|z| [z[0] * ext[0], z[1] * ext[0]]).collect();
        self.run(&mut ext, &mut state);
        ext.reverse();
        ext.drain(..pad);
        ext.truncate(n);
        ext
    }
}

/// Group a conjugate-closed pole set into biquad pairs: each pole in the
/// upper half-plane with its conjugate, real poles two at a time.
fn pair_poles(poles: Vec<Complex64>) -> Vec<(Complex64, Complex64)> {
    let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut pairs = Vec::with_capacity(poles.len() / 2);
    let mut reals = Vec::new();
    for p in poles {
        if p.im > tol {
            pairs.push((p, p.conj()));
        } else if p.im.abs() <= tol {
            reals.push(p.re);
        }
    }
    reals.sort_by(f64::total_cmp);
    for r in reals.chunks(2) {
        let q = r.get(1).copied().unwrap_or(0.0);
        pairs.push((Complex64::new(r[0], 0.0), Complex64::new(q, 0.0)));
    }
    pairs.sort_by(|x, y| x.0.norm().total_cmp(&y.0.norm()));
    pairs
}
