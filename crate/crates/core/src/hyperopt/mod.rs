//! Bayesian optimization over mixed real / integer / categorical spaces with a
//! GP surrogate and expected-improvement proposals.

mod gp;

pub use gp::{expected_improvement, GaussianProcess, GpConfig, MAX_JITTER};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSpec {
    Real { name: String, lo: f64, hi: f64 },
    Integer { name: String, lo: i64, hi: i64 },
    Categorical { name: String, options: Vec<String> },
}

impl ParamSpec {
    pub fn name(&self) -> &str {
        match self {
            ParamSpec::Real { name, .. } | ParamSpec::Integer { name, .. } | ParamSpec::Categorical { name, .. } => {
                name
            }
        }
    }

    fn width(&self) -> usize {
        match self {
            ParamSpec::Categorical { options, .. } => options.len(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    /// Index into the categorical's options.
    Cat(usize),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Cat(i) => write!(f, "#{i}"),
        }
    }
}

pub type Assignment = Vec<ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidParam("search space has no parameters".into()));
        }
        for p in &params {
            let ok = match p {
                ParamSpec::Real { lo, hi, .. } => lo.is_finite() && hi.is_finite() && lo < hi,
                ParamSpec::Integer { lo, hi, .. } => lo < hi,
                ParamSpec::Categorical { options, .. } => !options.is_empty(),
            };
            if !ok {
                return Err(Error::InvalidParam(format!(
                    "parameter '{}' has an empty range",
                    p.name()
                )));
            }
        }
        Ok(SearchSpace { params })
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn encoded_dim(&self) -> usize {
        self.params.iter().map(ParamSpec::width).sum()
    }

    /// Human-readable value, with categorical option names.
    pub fn format_value(&self, index: usize, value: &ParamValue) -> String {
        match (&self.params[index], value) {
            (ParamSpec::Categorical { options, .. }, ParamValue::Cat(i)) => options[*i].clone(),
            _ => value.to_string(),
        }
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.len() == self.params.len()
            && self.params.iter().zip(a).all(|(p, v)| match (p, v) {
                (ParamSpec::Real { lo, hi, .. }, ParamValue::Real(x)) => (lo..=hi).contains(&x),
                (ParamSpec::Integer { lo, hi, .. }, ParamValue::Int(x)) => (lo..=hi).contains(&x),
                (ParamSpec::Categorical { options, .. }, ParamValue::Cat(i)) => *i < options.len(),
                _ => false,
            })
    }

    /// Reals and integers min-max scaled to [0, 1]; categoricals one-hot.
    pub fn encode(&self, a: &Assignment) -> Result<Vec<f64>> {
        if !self.contains(a) {
            return Err(Error::OutOfBounds(format!("{a:?}")));
        }
        let mut out = Vec::with_capacity(self.encoded_dim());
        for (p, v) in self.params.iter().zip(a) {
            match (p, v) {
                (ParamSpec::Real { lo, hi, .. }, ParamValue::Real(x)) => out.push((x - lo) / (hi - lo)),
                (ParamSpec::Integer { lo, hi, .. }, ParamValue::Int(x)) => out.push((x - lo) as f64 / (hi - lo) as f64),
                (ParamSpec::Categorical { options, .. }, ParamValue::Cat(i)) => {
                    out.extend((0..options.len()).map(|j| f64::from(u8::from(j == *i))));
                }
                _ => unreachable!("checked by contains"),
            }
        }
        Ok(out)
    }

    /// Inverse of [`SearchSpace::encode`]; clamps to the box, rounds integers
    /// and snaps categoricals to the largest one-hot coordinate.
    pub fn decode(&self, z: &[f64]) -> Result<Assignment> {
        if z.len() != self.encoded_dim() {
            return Err(Error::Shape(format!(
                "encoded length {} != {}",
                z.len(),
                self.encoded_dim()
            )));
        }
        let mut at = 0;
        let mut out = Vec::with_capacity(self.params.len());
        for p in &self.params {
            let u = z[at].clamp(0.0, 1.0);
            out.push(match p {
                ParamSpec::Real { lo, hi, .. } => ParamValue::Real((lo + u * (hi - lo)).clamp(*lo, *hi)),
                ParamSpec::Integer { lo, hi, .. } => ParamValue::Int(
                    (*lo as f64 + u * (hi - lo) as f64)
                        .round()
                        .clamp(*lo as f64, *hi as f64) as i64,
                ),
                ParamSpec::Categorical { options, .. } => {
                    ParamValue::Cat(crate::learn::argmax(&z[at..at + options.len()]))
                }
            });
            at += p.width();
        }
        Ok(out)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Assignment {
        self.params
            .iter()
            .map(|p| match p {
                ParamSpec::Real { lo, hi, .. } => ParamValue::Real(rng.random_range(*lo..=*hi)),
                ParamSpec::Integer { lo, hi, .. } => ParamValue::Int(rng.random_range(*lo..=*hi)),
                ParamSpec::Categorical { options, .. } => ParamValue::Cat(rng.random_range(0..options.len())),
            })
            .collect()
    }

    /// Single-coordinate moves used by the acquisition refinement.
    fn neighbours(&self, a: &Assignment, step: f64) -> Vec<Assignment> {
        let mut out = Vec::new();
        for (i, p) in self.params.iter().enumerate() {
            match (p, &a[i]) {
                (ParamSpec::Real { lo, hi, .. }, ParamValue::Real(x)) => {
                    for dir in [-1.0, 1.0] {
                        let v = (x + dir * step * (hi - lo)).clamp(*lo, *hi);
                        if v != *x {
                            let mut b = a.clone();
                            b[i] = ParamValue::Real(v);
                            out.push(b);
                        }
                    }
                }
                (ParamSpec::Integer { lo, hi, .. }, ParamValue::Int(x)) => {
                    let delta = ((step * (hi - lo) as f64).round() as i64).max(1);
                    for v in [x - delta, x + delta] {
                        if (lo..=hi).contains(&&v) {
                            let mut b = a.clone();
                            b[i] = ParamValue::Int(v);
                            out.push(b);
                        }
                    }
                }
                (ParamSpec::Categorical { options, .. }, ParamValue::Cat(c)) => {
                    for j in (0..options.len()).filter(|j| j != c) {
                        let mut b = a.clone();
                        b[i] = ParamValue::Cat(j);
                        out.push(b);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub assignment: Assignment,
    /// `None` when the objective failed; failed trials are skipped in the fit.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub trials: Vec<Trial>,
    /// Best objective among trials `0..=i`, `None` until one succeeds.
    pub best_so_far: Vec<Option<f64>>,
    pub seed: u64,
}

impl OptimizationTrace {
    pub fn best(&self) -> Option<&Trial> {
        self.top_k(1).into_iter().next()
    }

    /// Successful trials sorted by objective, descending; ties keep the
    /// earlier trial first.
    pub fn top_k(&self, k: usize) -> Vec<&Trial> {
        let mut ok: Vec<&Trial> = self.trials.iter().filter(|t| t.objective.is_some()).collect();
        ok.sort_by(|a, b| {
            b.objective
                .unwrap()
                .total_cmp(&a.objective.unwrap())
                .then(a.index.cmp(&b.index))
        });
        ok.truncate(k);
        ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub n_calls: usize,
    pub n_initial: usize,
    pub n_candidates: usize,
    pub gp: GpConfig,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            n_calls: 30,
            n_initial: 10,
            n_candidates: 1024,
            gp: GpConfig::default(),
        }
    }
}

/// Maximize `objective` over `space`. The first `n_initial` points are
/// seeded uniform draws; each later point maximizes expected improvement
/// under a GP fit to all successful trials so far.
pub fn optimize<F>(
    mut objective: F,
    space: &SearchSpace,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<OptimizationTrace>
where
    F: FnMut(&Assignment) -> Result<f64>,
{
    let OptimizerSettings {
        n_calls,
        n_initial,
        n_candidates,
        gp,
    } = *settings;
    if n_initial < 2 || n_calls < n_initial {
        return Err(Error::InvalidParam(format!(
            "need n_calls >= n_initial >= 2, got {n_calls} and {n_initial}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials: Vec<Trial> = Vec::with_capacity(n_calls);
    let mut best_so_far = Vec::with_capacity(n_calls);
    let mut best: Option<f64> = None;
    for index in 0..n_calls {
        let assignment = if index < n_initial {
            space.sample(&mut rng)
        } else {
            propose(space, &trials, &gp, n_candidates, &mut rng)?
        };
        let value = match objective(&assignment) {
            Ok(v) if v.is_finite() => Some(v),
            Ok(v) => {
                log::warn!("trial {index}: objective returned {v}; recorded as failed");
                None
            }
            Err(e) => {
                log::warn!("trial {index}: {}", Error::ObjectiveFailure(e.to_string()));
                None
            }
        };
        if let Some(v) = value {
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
        best_so_far.push(best);
        trials.push(Trial {
            index,
            assignment,
            objective: value,
        });
    }
    Ok(OptimizationTrace {
        trials,
        best_so_far,
        seed,
    })
}

fn propose(
    space: &SearchSpace,
    trials: &[Trial],
    gp_cfg: &GpConfig,
    n_candidates: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Assignment> {
    let ok: Vec<&Trial> = trials.iter().filter(|t| t.objective.is_some()).collect();
    // candidates are drawn even when unused so the stream stays aligned
    let candidates: Vec<Assignment> = (0..n_candidates.max(1)).map(|_| space.sample(rng)).collect();
    if ok.len() < 2 {
        return Ok(candidates[0].clone());
    }
    let x: Vec<Vec<f64>> = ok.iter().map(|t| space.encode(&t.assignment)).collect::<Result<_>>()?;
    let y: Vec<f64> = ok.iter().map(|t| t.objective.unwrap()).collect();
    let gp = GaussianProcess::fit(&x, &y, gp_cfg)?;
    let incumbent = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let seen = |a: &Assignment| trials.iter().any(|t| &t.assignment == a);
    let score = |a: &Assignment| -> f64 {
        let z = space.encode(a).expect("candidates lie in the space");
        let (mu, sigma) = gp.predict(&z);
        expected_improvement(mu, sigma, incumbent)
    };

    let mut scored: Vec<(f64, usize)> = candidates.iter().enumerate().map(|(i, a)| (score(a), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(f64, Assignment)> = None;
    for &(s0, i) in scored.iter().take(5) {
        let (mut s, mut a) = (s0, candidates[i].clone());
        for step in [0.1, 0.03, 0.01] {
            loop {
                let mut improved = false;
                for b in space.neighbours(&a, step) {
                    let sb = score(&b);
                    if sb > s {
                        s = sb;
                        a = b;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        if !seen(&a) && best.as_ref().is_none_or(|(bs, _)| s > *bs) {
            best = Some((s, a));
        }
    }
    if let Some((_, a)) = best {
        return Ok(a);
    }
    // every refined candidate was already evaluated: fall back to the best
    // unseen raw candidate
    Ok(scored
        .iter()
        .map(|&(_, i)| &candidates[i])
        .find(|a| !seen(a))
        .unwrap_or(&candidates[0])
        .clone())
}
