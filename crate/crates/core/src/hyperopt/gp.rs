//! Gaussian-process regression with a Matérn-5/2 kernel on encoded points.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest diagonal jitter tried before giving up on a factorization.
pub const MAX_JITTER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpConfig {
    pub length_scale_bounds: (f64, f64),
    /// Observation-noise variance bounds, in standardized objective units.
    pub noise_bounds: (f64, f64),
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            length_scale_bounds: (1e-2, 10.0),
            noise_bounds: (1e-6, 1.0),
        }
    }
}

fn matern52(d: f64) -> f64 {
    let s = 5f64.sqrt() * d;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lower-triangular Cholesky factor, row-major `n x n`.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn solve_lower(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * x[k]).sum();
        x[i] = (b[i] - s) / l[i * n + i];
    }
    x
}

fn solve_upper_t(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (b[i] - s) / l[i * n + i];
    }
    x
}

/// A fitted zero-mean GP on standardized targets.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    x: Vec<Vec<f64>>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    pub length_scale: f64,
    pub noise: f64,
}

struct Factored {
    chol: Vec<f64>,
    alpha: Vec<f64>,
    lml: f64,
}

fn factor(x: &[Vec<f64>], y: &[f64], length_scale: f64, noise: f64) -> Result<Factored> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = matern52(distance(&x[i], &x[j]) / length_scale);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
        k[i * n + i] += noise;
    }
    let mut jitter = 0.0;
    let chol = loop {
        let mut kj = k.clone();
        for i in 0..n {
            kj[i * n + i] += jitter;
        }
        if let Some(l) = cholesky(&kj, n) {
            break l;
        }
        if jitter >= MAX_JITTER {
            return Err(Error::SingularKernel { jitter });
        }
        jitter = if jitter == 0.0 {
            1e-12
        } else {
            (jitter * 10.0).min(MAX_JITTER)
        };
    };
    let alpha = solve_upper_t(&chol, n, &solve_lower(&chol, n, y));
    let fit: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let log_det: f64 = (0..n).map(|i| chol[i * n + i].ln()).sum();
    let lml = -0.5 * fit - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(Factored { chol, alpha, lml })
}

impl GaussianProcess {
    /// Fit length-scale and noise by maximizing the log marginal likelihood
    /// with a multi-start pattern search in log space.
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &GpConfig) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::InvalidParam(
                "GP fit needs at least 2 points and matching targets".into(),
            ));
        }
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        let sd = (y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n).sqrt();
        let y_std = if sd > 0.0 { sd } else { 1.0 };
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();

        let lo = [cfg.length_scale_bounds.0.ln(), cfg.noise_bounds.0.ln()];
        let hi = [cfg.length_scale_bounds.1.ln(), cfg.noise_bounds.1.ln()];
        let objective = |p: [f64; 2]| factor(x, &ys, p[0].exp(), p[1].exp()).map_or(f64::NEG_INFINITY, |f| f.lml);

        let mut best = ([lo[0], lo[1]], f64::NEG_INFINITY);
        for fl in [0.1, 0.35, 0.6, 0.85] {
            for fnoise in [0.1, 0.5, 0.9] {
                let mut p = [lo[0] + fl * (hi[0] - lo[0]), lo[1] + fnoise * (hi[1] - lo[1])];
                let mut val = objective(p);
                let mut step = 1.0;
                while step > 1e-2 {
                    let mut moved = false;
                    for d in 0..2 {
                        for dir in [-1.0, 1.0] {
                            let mut q = p;
                            q[d] = (q[d] + dir * step).clamp(lo[d], hi[d]);
                            let v = objective(q);
                            if v > val {
                                p = q;
                                val = v;
                                moved = true;
                            }
                        }
                    }
                    if !moved {
                        step /= 2.0;
                    }
                }
                if val > best.1 {
                    best = (p, val);
                }
            }
        }
        let (length_scale, noise) = (best.0[0].exp(), best.0[1].exp());
        let f = factor(x, &ys, length_scale, noise)?;
        Ok(GaussianProcess {
            x: x.to_vec(),
            chol: f.chol,
            alpha: f.alpha,
            y_mean,
            y_std,
            length_scale,
            noise,
        })
    }

    /// Posterior mean and standard deviation of the latent function, in the
    /// original objective units.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let ks: Vec<f64> = self
            .x
            .iter()
            .map(|xi| matern52(distance(xi, point) / self.length_scale))
            .collect();
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_lower(&self.chol, n, &ks);
        let var = (1.0 - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (self.y_mean + self.y_std * mean, self.y_std * var.sqrt())
    }

    /// Prior standard deviation, in objective units.
    pub fn prior_std(&self) -> f64 {
        self.y_std
    }
}

/// Expected improvement over `best` for maximization.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64) -> f64 {
    if !(sigma > 0.0) {
        return (mu - best).max(0.0);
    }
    let z = (mu - best) / sigma;
    let n = Normal::standard();
    ((mu - best) * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}
