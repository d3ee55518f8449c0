//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Runs the full default pipeline once (several minutes on one core).

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use topoband::bandpower::{band_filter_epoch, log_band_power, BandDefinition};
use topoband::diagram_features::{
    amplitude, extract_tda_features, num_points, persistence_entropy, AmplitudeMetric, AmplitudeParams,
    AmplitudeSettings, TdaFeatureVector,
};
use topoband::hyperopt::{optimize, Assignment, OptimizerSettings, ParamSpec, ParamValue, SearchSpace};
use topoband::learn::{mutual_information, rank_aggregate};
use topoband::persistence::{brute_force_persistence, vr_persistence, Interval, PersistenceDiagram};
use topoband::pipeline::artifacts::read_features;
use topoband::pipeline::report::lookup;
use topoband::pipeline::{load_tune_results, run_pipeline, FeatureSet, HyperoptBudget, Layout, PipelineConfig};
use topoband::signal::{car_filter, notch_cascade, ClassLabel, Epoch, MultichannelRecording, NotchParams};
use topoband::synth::SyntheticSpec;
use topoband::takens::PointCloud;

// tolerances and budgets
const MIN_COMBINED_ACCURACY: f64 = 0.85;
const MIN_GAIN: f64 = 0.05;
const MAX_PIPELINE_TIME: Duration = Duration::from_secs(600);
const N_FEATURES: usize = 198;
const N_PB_FEATURES: usize = 180;
const ORACLE_CLOUDS: usize = 200;
const MAX_ORACLE_TIME: Duration = Duration::from_secs(60);
const PAIR_TOL: f64 = 1e-9;
const ENTROPY_TOL: f64 = 1e-9;
const ENTROPY_1_3: f64 = 0.5623;
const ENTROPY_1_3_TOL: f64 = 1e-4;
const NOTCH_MIN_DB: f64 = 40.0;
const LOG_POWER_TOL: f64 = 0.05;
const CAR_TOL: f64 = 1e-9;
const BRANIN_MIN: f64 = 0.397_887;
const BRANIN_TOL: f64 = 0.5;
const BRANIN_MIN_HITS: usize = 8;
const MI_LABEL_COPY: f64 = 1.2555;
const MI_REL_TOL: f64 = 0.05;
const MI_NOISE_MAX: f64 = 0.05;

const FS: f64 = 1200.0;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn headline(out: &Layout) -> Outcome {
    let cfg = PipelineConfig::default();
    let start = Instant::now();
    run_pipeline(&cfg, out).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let results = load_tune_results(out).map_err(|e| e.to_string())?;
    let mut ok = elapsed < MAX_PIPELINE_TIME;
    let mut detail = format!(
        "runtime {:.0}s on {} thread(s);",
        elapsed.as_secs_f64(),
        rayon::current_num_threads()
    );
    for &v in &cfg.variants {
        let acc = |s: FeatureSet| lookup(&results, "random_forest", v, s).map_or(f64::NAN, |r| r.cv.mean);
        let (pb, tda, both) = (acc(FeatureSet::Pb), acc(FeatureSet::Tda), acc(FeatureSet::PbTda));
        let pass = both >= MIN_COMBINED_ACCURACY && both - pb >= MIN_GAIN && both - tda >= MIN_GAIN;
        ok &= pass;
        detail += &format!(
            " {v} PB {pb:.3} TDA {tda:.3} PB+TDA {both:.3}{}",
            if pass { "" } else { " (short)" }
        );
    }
    check(ok, detail)
}

const TABLE_ORDER: [&str; 18] = [
    "bottleneck_amplitude_h0",
    "bottleneck_amplitude_h1",
    "wasserstein_amplitude_h0",
    "wasserstein_amplitude_h1",
    "betti_amplitude_h0",
    "betti_amplitude_h1",
    "landscape_amplitude_h0",
    "landscape_amplitude_h1",
    "silhouette_amplitude_h0",
    "silhouette_amplitude_h1",
    "heat_amplitude_h0",
    "heat_amplitude_h1",
    "normalized_entropy_h0",
    "normalized_entropy_h1",
    "entropy_h0",
    "entropy_h1",
    "num_points_h0",
    "num_points_h1",
];

fn feature_layout(out: &Layout) -> Outcome {
    for v in PipelineConfig::default().variants {
        let path = out.features(v);
        let m = read_features(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let header = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        let expected: Vec<String> = ["epoch_id".into(), "label".into()]
            .into_iter()
            .chain((0..N_FEATURES).map(|i| format!("f{i}")))
            .collect();
        if m.n_features() != N_FEATURES || m.n_samples() != 180 || header != expected.join(",") {
            return Err(format!(
                "{v}: {} x {} with header {header:.60}...",
                m.n_samples(),
                m.n_features()
            ));
        }
        if m.feature_ids()[18..].len() != N_PB_FEATURES {
            return Err(format!("{v}: {} band-power columns", m.n_features() - 18));
        }
    }
    for (id, name) in TABLE_ORDER.iter().enumerate() {
        if TdaFeatureVector::name(id) != *name {
            return Err(format!("id {id} is {} not {name}", TdaFeatureVector::name(id)));
        }
    }
    // each slot holds the quantity its name says
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cloud = random_cloud(&mut rng, 30, 3);
    let diag = vr_persistence(&cloud, 1).unwrap();
    let settings = AmplitudeSettings::default();
    let vec = extract_tda_features(&diag, &settings).values;
    for k in 0..2 {
        for (m, metric) in AmplitudeMetric::ALL.into_iter().enumerate() {
            let direct = amplitude(&diag, k, &AmplitudeParams { metric, settings });
            if vec[2 * m + k] != direct {
                return Err(format!("slot {} is not {metric} h{k}", 2 * m + k));
            }
        }
        let slots = [
            (12 + k, persistence_entropy(&diag, k, true)),
            (14 + k, persistence_entropy(&diag, k, false)),
            (16 + k, num_points(&diag, k) as f64),
        ];
        if let Some((slot, _)) = slots.iter().find(|(s, v)| vec[*s] != *v) {
            return Err(format!("slot {slot} mismatch"));
        }
    }
    Ok(format!(
        "{N_FEATURES} columns f0..f197 (18 TDA + {N_PB_FEATURES} PB) in every variant; ids 0-17 in table order"
    ))
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::from_rows(&rows).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let start = Instant::now();
    for trial in 0..ORACLE_CLOUDS {
        let n = rng.random_range(1..=12);
        let d = rng.random_range(1..=3);
        let c = random_cloud(&mut rng, n, d);
        let fast = vr_persistence(&c, 1).map_err(|e| e.to_string())?;
        let slow = brute_force_persistence(&c, 1).map_err(|e| e.to_string())?;
        if !fast.approx_eq(&slow, PAIR_TOL) {
            return Err(format!("cloud {trial} (n={n}, d={d}) differs"));
        }
    }
    let t = start.elapsed();
    check(
        t < MAX_ORACLE_TIME,
        format!("{ORACLE_CLOUDS} clouds agree in {:.2}s", t.as_secs_f64()),
    )
}

fn close_pairs(actual: &[Interval], expected: &[(f64, f64)]) -> bool {
    actual.len() == expected.len()
        && actual
            .iter()
            .zip(expected)
            .all(|(a, &(b, d))| (a.birth - b).abs() < PAIR_TOL && (a.death - d).abs() < PAIR_TOL)
}

fn homology_fixtures() -> Outcome {
    let square = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let d = vr_persistence(&square, 1).unwrap();
    if !close_pairs(d.dim(1), &[(1.0, SQRT_2)])
        || !close_pairs(d.dim(0), &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, SQRT_2)])
    {
        return Err(format!("square: {d:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 100.0;
            vec![t.cos() + noise.sample(&mut rng), t.sin() + noise.sample(&mut rng)]
        })
        .collect();
    let circle = vr_persistence(&PointCloud::from_rows(&rows).unwrap(), 1).unwrap();
    let mut pers: Vec<f64> = circle.dim(1).iter().map(Interval::persistence).collect();
    pers.sort_by(|a, b| b.total_cmp(a));
    let top = pers.first().copied().unwrap_or(0.0);
    let runner_up = pers.get(1).copied().unwrap_or(0.0);
    check(
        top > 3.0 * runner_up,
        format!("square H0/H1 exact; circle top H1 persistence {top:.3} vs runner-up {runner_up:.3}"),
    )
}

fn h0(pairs: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(pairs.iter().map(|&(b, d)| Interval::new(b, d)).collect(), vec![], 10.0)
}

fn entropy_fixtures() -> Outcome {
    let e2 = persistence_entropy(&h0(&[(0.0, 1.0), (0.0, 1.0)]), 0, false);
    let e13 = persistence_entropy(&h0(&[(0.0, 1.0), (0.0, 3.0)]), 0, false);
    // independent closed form for lifetimes 1 and 3
    let closed = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let n = rng.random_range(0..30);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let b = rng.random_range(0.0..5.0);
                (b, b + rng.random_range(0.001..5.0))
            })
            .collect();
        let e = persistence_entropy(&h0(&pairs), 0, true);
        worst = (worst.0.min(e), worst.1.max(e));
    }
    check(
        (e2 - LN_2).abs() < ENTROPY_TOL
            && (e13 - ENTROPY_1_3).abs() < ENTROPY_1_3_TOL
            && (e13 - closed).abs() < 1e-12
            && worst.0 >= 0.0
            && worst.1 <= 1.0,
        format!(
            "ln2 case {e2:.10}, (1,3) case {e13:.6}, normalized range [{:.4}, {:.4}] over 1000",
            worst.0, worst.1
        ),
    )
}

fn sine(freq: f64, amp: f64, n: usize) -> Vec<f64> {
    (0..n).map(|t| amp * (2.0 * PI * freq * t as f64 / FS).sin()).collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn filter_fidelity() -> Outcome {
    let n = 12_000;
    let steady = 1200..n - 1200;
    let x = sine(50.0, 1.0, n);
    let rec = MultichannelRecording::with_default_names(vec![x.clone()], FS).unwrap();
    let y = notch_cascade(&rec, &NotchParams::default()).unwrap();
    let measured_db = -20.0 * (rms(&y.channel(0)[steady.clone()]) / rms(&x[steady])).log10();
    let design_db = -20.0
        * NotchParams::default()
            .design(FS)
            .unwrap()
            .magnitude_at(50.0, FS)
            .log10();

    let e = Epoch::new(vec![sine(75.0, 2.0, 2400)], ClassLabel::Rest, 0, 2400).unwrap();
    let lp = log_band_power(&band_filter_epoch(&e, &BandDefinition::new(60.0, 90.0), FS).unwrap()).unwrap()[0];

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let channels: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..2000).map(|_| rng.random_range(-100.0..100.0)).collect())
        .collect();
    let car = car_filter(&MultichannelRecording::with_default_names(channels, FS).unwrap()).unwrap();
    let worst = (0..2000)
        .map(|t| (0..16).map(|c| car.channel(c)[t]).sum::<f64>().abs())
        .fold(0.0, f64::max);

    check(
        measured_db >= NOTCH_MIN_DB && design_db >= NOTCH_MIN_DB && (lp - LN_2).abs() < LOG_POWER_TOL && worst < CAR_TOL,
        format!(
            "50 Hz attenuated {measured_db:.1} dB (design {design_db:.1} dB); 75 Hz log power {lp:.4}; max CAR column sum {worst:.2e}"
        ),
    )
}

fn as_real(v: &ParamValue) -> f64 {
    match v {
        ParamValue::Real(x) => *x,
        _ => unreachable!(),
    }
}

fn branin(a: &Assignment) -> topoband::Result<f64> {
    let (x1, x2) = (as_real(&a[0]), as_real(&a[1]));
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    Ok(-((x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0))
}

fn quadratic(a: &Assignment) -> topoband::Result<f64> {
    let x = as_real(&a[0]);
    Ok(-(x - 0.3) * (x - 0.3))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (v[(n - 1) / 2] + v[n / 2]) / 2.0
}

fn optimizer_benchmarks() -> Outcome {
    let real = |name: &str, lo, hi| ParamSpec::Real {
        name: name.into(),
        lo,
        hi,
    };
    let space = SearchSpace::new(vec![real("x1", -5.0, 10.0), real("x2", 0.0, 15.0)]).unwrap();
    let fifty = OptimizerSettings {
        n_calls: 50,
        ..OptimizerSettings::default()
    };
    let hits = (0..10)
        .filter(|&seed| {
            let t = optimize(branin, &space, &fifty, seed).unwrap();
            (-t.best().unwrap().objective.unwrap() - BRANIN_MIN).abs() < BRANIN_TOL
        })
        .count();

    let q = SearchSpace::new(vec![real("x", 0.0, 1.0)]).unwrap();
    let twenty = OptimizerSettings {
        n_calls: 20,
        ..OptimizerSettings::default()
    };
    let (mut gp, mut random) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        gp.push(
            optimize(quadratic, &q, &twenty, seed)
                .unwrap()
                .best()
                .unwrap()
                .objective
                .unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random.push(
            (0..20)
                .map(|_| quadratic(&q.sample(&mut rng)).unwrap())
                .fold(f64::MIN, f64::max),
        );
    }
    let (gp, random) = (median(gp), median(random));
    check(
        hits >= BRANIN_MIN_HITS && gp >= random,
        format!(
            "Branin {hits}/10 seeds within {BRANIN_TOL}; quadratic median best GP-EI {gp:.2e} vs random {random:.2e}"
        ),
    )
}

fn rank_fixtures() -> Outcome {
    // importances whose per-variant ranks are 16 -> {1,2,2,1}, 4 -> {6,3,3,3}
    let ids = vec![16, 14, 4, 7, 2, 3];
    let runs: Vec<(String, Vec<usize>, Vec<f64>)> = [
        [0.30, 0.20, 0.01, 0.10, 0.05, 0.04],
        [0.20, 0.30, 0.15, 0.02, 0.01, 0.005],
        [0.20, 0.30, 0.15, 0.02, 0.01, 0.005],
        [0.30, 0.20, 0.15, 0.02, 0.01, 0.005],
    ]
    .iter()
    .enumerate()
    .map(|(v, imp)| (format!("V{}", v + 1), ids.clone(), imp.to_vec()))
    .collect();
    let table = rank_aggregate(&runs).map_err(|e| e.to_string())?;
    let row = |id: usize| table.rows.iter().find(|r| r.feature_id == id).unwrap();
    let (a, b) = (row(16), row(4));
    check(
        a.rank == [1, 2, 2, 1] && a.avg_rank == 1.5 && b.rank == [6, 3, 3, 3] && b.avg_rank == 3.75,
        format!("ranks {:?} -> {}, {:?} -> {}", a.rank, a.avg_rank, b.rank, b.avg_rank),
    )
}

fn mutual_information_checks() -> Outcome {
    let mut y = vec![0usize; 90];
    y.extend([1; 30].iter().chain(&[2; 30]).chain(&[3; 30]));
    let x: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    let copy = mutual_information(&x, &y);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let noise: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
    let labels: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..4)).collect();
    let indep = mutual_information(&noise, &labels);
    check(
        (copy - MI_LABEL_COPY).abs() <= MI_REL_TOL * MI_LABEL_COPY && indep < MI_NOISE_MAX,
        format!(
            "label copy {copy:.5} nats ({:+.2}% vs {MI_LABEL_COPY}); independent noise {indep:.4} nats",
            100.0 * (copy / MI_LABEL_COPY - 1.0)
        ),
    )
}

fn reduced_config() -> PipelineConfig {
    let mut spec = SyntheticSpec {
        channels: 12,
        motor_channels: 4,
        ..SyntheticSpec::default()
    };
    spec.rest.trials = 20;
    spec.rock.trials = 10;
    spec.paper.trials = 10;
    spec.scissors.trials = 10;
    let mut cfg = PipelineConfig {
        seed: 21,
        synthetic: Some(spec),
        hyperopt: HyperoptBudget {
            n_calls: 6,
            n_initial: 4,
            n_candidates: 256,
        },
        ..PipelineConfig::default()
    };
    cfg.search.random_forest[1] = ParamSpec::Integer {
        name: "n_estimators".into(),
        lo: 5,
        hi: 30,
    };
    cfg.search.gradient_boosting[1] = ParamSpec::Integer {
        name: "n_estimators".into(),
        lo: 5,
        hi: 20,
    };
    cfg
}

fn determinism() -> Outcome {
    let cfg = reduced_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&cfg, &Layout::new(a.path())).map_err(|e| e.to_string())?;
    run_pipeline(&cfg, &Layout::new(b.path())).map_err(|e| e.to_string())?;
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    let differing: Vec<&String> = sa.keys().filter(|k| sa.get(*k) != sb.get(*k)).collect();
    let count = |p: &str| sa.keys().filter(|k| k.starts_with(p)).count();
    check(
        differing.is_empty() && sa.len() == sb.len(),
        format!(
            "{} files identical ({} feature, {} tune, {} report); differing: {differing:?}",
            sa.len(),
            count("features/"),
            count("tune/"),
            count("report/")
        ),
    )
}

fn main() {
    let full = tempfile::tempdir().expect("temp dir");
    let full = Layout::new(full.path());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "combined features beat PB and TDA alone (default synthetic session)",
            Box::new(|| headline(&full)),
        ),
        (
            "198 features per epoch in table order",
            Box::new(|| feature_layout(&full)),
        ),
        ("homology matches brute-force oracle", Box::new(oracle_equivalence)),
        ("analytic homology fixtures", Box::new(homology_fixtures)),
        ("persistence entropy fixtures", Box::new(entropy_fixtures)),
        ("notch, band power and CAR fidelity", Box::new(filter_fidelity)),
        ("optimizer benchmarks", Box::new(optimizer_benchmarks)),
        ("rank aggregation fixtures", Box::new(rank_fixtures)),
        ("mutual information", Box::new(mutual_information_checks)),
        ("byte-identical reruns", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
