use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoband::signal::{
    bandcut, car_filter, notch_cascade, segment_epochs, ClassLabel, Event, EventTable, MultichannelRecording,
    NotchParams, PreprocVariant, VariantId,
};
use topoband::Error;

const FS: f64 = 1200.0;

fn sine(freq: f64, amp: f64, n: usize) -> Vec<f64> {
    (0..n).map(|t| amp * (2.0 * PI * freq * t as f64 / FS).sin()).collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn rec(channels: Vec<Vec<f64>>) -> MultichannelRecording {
    MultichannelRecording::with_default_names(channels, FS).unwrap()
}

fn noise(seed: u64, channels: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..channels)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

#[test]
fn recording_rejects_nan_and_ragged() {
    assert!(MultichannelRecording::with_default_names(vec![vec![1.0, f64::NAN]], FS).is_err());
    assert!(MultichannelRecording::with_default_names(vec![vec![1.0], vec![1.0, 2.0]], FS).is_err());
    assert!(MultichannelRecording::with_default_names(vec![vec![1.0]], 0.0).is_err());
}

#[test]
fn car_of_common_mode_is_zero() {
    let out = car_filter(&rec(vec![vec![5.0; 10]; 4])).unwrap();
    assert!(out.channels().iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn car_two_channels() {
    let out = car_filter(&rec(vec![vec![1.0; 3], vec![3.0; 3]])).unwrap();
    assert_eq!(out.channel(0), &[-1.0; 3]);
    assert_eq!(out.channel(1), &[1.0; 3]);
}

#[test]
fn car_needs_two_channels() {
    assert!(matches!(
        car_filter(&rec(vec![vec![1.0; 3]])),
        Err(Error::TooFewChannels { found: 1, .. })
    ));
}

#[test]
fn car_columns_sum_to_zero_and_is_idempotent() {
    let r = rec(noise(1, 4, 100));
    let once = car_filter(&r).unwrap();
    for t in 0..100 {
        let s: f64 = (0..4).map(|c| once.channel(c)[t]).sum();
        assert!(s.abs() < 1e-9);
    }
    let twice = car_filter(&once).unwrap();
    for (a, b) in once.channels().iter().flatten().zip(twice.channels().iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn notch_removes_50hz_and_keeps_20hz() {
    let n = 12_000;
    let steady = 1200..n - 1200;
    let params = NotchParams::default();

    let x = sine(50.0, 1.0, n);
    let y = notch_cascade(&rec(vec![x.clone()]), &params).unwrap();
    assert!(rms(&y.channel(0)[steady.clone()]) <= 0.01 * rms(&x[steady.clone()]));

    let x = sine(20.0, 1.0, n);
    let y = notch_cascade(&rec(vec![x.clone()]), &params).unwrap();
    let ratio = rms(&y.channel(0)[steady.clone()]) / rms(&x[steady]);
    assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");

    let y = notch_cascade(&rec(vec![vec![0.0; 500]]), &params).unwrap();
    assert!(y.channel(0).iter().all(|&v| v == 0.0));
}

#[test]
fn notch_attenuates_every_harmonic_by_40db() {
    let sos = NotchParams::default().design(FS).unwrap();
    for k in 1..=6 {
        let gain = sos.magnitude_at(50.0 * k as f64, FS);
        assert!(20.0 * gain.log10() <= -40.0, "harmonic {k}: {gain}");
    }
}

#[test]
fn notch_rejects_harmonics_above_nyquist() {
    let params = NotchParams {
        n_harmonics: 12,
        ..NotchParams::default()
    };
    assert!(matches!(
        notch_cascade(&rec(vec![vec![0.0; 10]]), &params),
        Err(Error::NyquistViolation { .. })
    ));
}

/// Periodogram power summed over `[lo, hi]` Hz, by direct DFT.
fn band_power(x: &[f64], lo: f64, hi: f64) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for k in 0..=n / 2 {
        let f = k as f64 * FS / n as f64;
        if f < lo || f > hi {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in x.iter().enumerate() {
            let ph = -2.0 * PI * (k * t) as f64 / n as f64;
            re += v * ph.cos();
            im += v * ph.sin();
        }
        total += re * re + im * im;
    }
    total
}

#[test]
fn v1_suppresses_content_above_500hz() {
    let r = rec(noise(5, 3, 2400));
    let out = bandcut(&r, &PreprocVariant::preset(VariantId::V1), 4).unwrap();
    let y = out.channel(1);
    assert!(band_power(y, 550.0, 600.0) < 0.05 * band_power(y, 10.0, 450.0));
}

#[test]
fn v4_skips_car() {
    let x = noise(9, 1, 1000).remove(0);
    let out = bandcut(&rec(vec![x.clone(), x]), &PreprocVariant::preset(VariantId::V4), 4).unwrap();
    assert_eq!(out.channel(0), out.channel(1));
    assert!(rms(out.channel(0)) > 0.1);
}

#[test]
fn v2_attenuates_75hz_to_its_designed_response() {
    // |H(75 Hz)|^2 for a 4th-order 100-500 Hz Butterworth band-pass at
    // 1200 Hz is 0.06559 (scipy.signal.butter + sosfreqz); forward-backward
    // filtering applies it once per pass.
    let n = 6000;
    let x = sine(75.0, 1.0, n);
    let zero = vec![0.0; n];
    let out = bandcut(&rec(vec![x.clone(), zero]), &PreprocVariant::preset(VariantId::V2), 4).unwrap();
    let steady = 1200..n - 1200;
    // CAR halves the sine on channel 0
    let ratio = rms(&out.channel(0)[steady.clone()]) / (0.5 * rms(&x[steady]));
    assert!((ratio - 0.06559).abs() < 0.002, "ratio {ratio}");
}

#[test]
fn filters_are_linear() {
    let a = rec(noise(2, 2, 800));
    let b = rec(noise(3, 2, 800));
    let mix = rec((0..2)
        .map(|c| {
            a.channel(c)
                .iter()
                .zip(b.channel(c))
                .map(|(x, y)| 2.5 * x - 0.7 * y)
                .collect()
        })
        .collect());
    let v = PreprocVariant::preset(VariantId::V3);
    let (fa, fb, fm) = (
        bandcut(&a, &v, 4).unwrap(),
        bandcut(&b, &v, 4).unwrap(),
        bandcut(&mix, &v, 4).unwrap(),
    );
    let p = NotchParams::default();
    let (na, nb, nm) = (
        notch_cascade(&a, &p).unwrap(),
        notch_cascade(&b, &p).unwrap(),
        notch_cascade(&mix, &p).unwrap(),
    );
    for c in 0..2 {
        for t in 0..800 {
            assert!((fm.channel(c)[t] - (2.5 * fa.channel(c)[t] - 0.7 * fb.channel(c)[t])).abs() < 1e-9);
            assert!((nm.channel(c)[t] - (2.5 * na.channel(c)[t] - 0.7 * nb.channel(c)[t])).abs() < 1e-9);
        }
    }
}

#[test]
fn forward_backward_has_zero_lag() {
    // band-limited input: noise pre-filtered into the pass band
    let raw = rec(noise(4, 2, 4000));
    let v = PreprocVariant {
        id: VariantId::V4,
        band: (60.0, 200.0),
        apply_car: false,
    };
    let x = bandcut(&raw, &v, 2).unwrap();
    let y = bandcut(
        &x,
        &PreprocVariant {
            band: (30.0, 300.0),
            ..v
        },
        4,
    )
    .unwrap();
    let (xs, ys) = (x.channel(0), y.channel(0));
    let xcorr = |lag: isize| -> f64 { (200..3800).map(|t| xs[t] * ys[(t as isize + lag) as usize]).sum() };
    let best = (-20..=20).max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b))).unwrap();
    assert_eq!(best, 0);
}

#[test]
fn segmentation_pads_with_exact_zeros() {
    let r = rec(noise(6, 2, 5000)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v + 2.0).collect())
        .collect());
    let events = EventTable::new(vec![
        Event {
            onset: 0,
            duration: 2400,
            label: ClassLabel::Rock,
        },
        Event {
            onset: 2400,
            duration: 1800,
            label: ClassLabel::Rest,
        },
    ])
    .unwrap();
    let epochs = segment_epochs(&r, &events, 2.0).unwrap();
    assert_eq!(epochs.len(), 2);
    assert_eq!(epochs[0].valid_length(), 2400);
    assert_eq!(epochs[0].channel(1), &r.channel(1)[..2400]);
    assert_eq!(epochs[1].valid_length(), 1800);
    assert_eq!(epochs[1].label, ClassLabel::Rest);
    for c in 0..2 {
        assert!(epochs[1].channel(c)[1800..].iter().all(|v| v.to_bits() == 0));
        assert_eq!(epochs[1].valid(c), &r.channel(c)[2400..4200]);
    }
}

#[test]
fn segmentation_rejects_events_past_the_end() {
    let r = rec(vec![vec![0.0; 100]]);
    let events = EventTable::new(vec![Event {
        onset: 50,
        duration: 60,
        label: ClassLabel::Rest,
    }])
    .unwrap();
    assert!(matches!(
        segment_epochs(&r, &events, 0.05),
        Err(Error::EventOutOfRange { index: 0, .. })
    ));
}

#[test]
fn event_onsets_must_increase() {
    let e = |onset| Event {
        onset,
        duration: 1,
        label: ClassLabel::Rest,
    };
    assert!(EventTable::new(vec![e(5), e(5)]).is_err());
    assert!(EventTable::new(vec![e(5), e(6)]).is_ok());
}

#[test]
fn variant_presets() {
    let [v1, v2, v3, v4] = PreprocVariant::all();
    assert_eq!((v1.band, v1.apply_car), ((1.0, 500.0), true));
    assert_eq!((v2.band, v2.apply_car), ((100.0, 500.0), true));
    assert_eq!((v3.band, v3.apply_car), ((50.0, 300.0), true));
    assert_eq!((v4.band, v4.apply_car), ((1.0, 500.0), false));
}
