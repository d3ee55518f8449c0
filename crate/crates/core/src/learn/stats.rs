//! Feature-label mutual information and feature-feature correlation.

/// Number of equal-frequency bins used to discretize a feature.
pub const MI_BINS: usize = 8;

/// Bin edges at the empirical `j / bins` quantiles, deduplicated.
fn quantile_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins).map(|j| sorted[(j * n / bins).min(n - 1)]).collect();
    edges.dedup();
    edges
}

/// Plug-in mutual information (nats) between a feature, discretized into
/// [`MI_BINS`] quantile bins, and integer class labels. Clamped at 0.
pub fn mutual_information(feature: &[f64], labels: &[usize]) -> f64 {
    assert_eq!(feature.len(), labels.len(), "feature and labels differ in length");
    let n = feature.len();
    if n == 0 {
        return 0.0;
    }
    let edges = quantile_edges(feature, MI_BINS);
    let n_bins = edges.len() + 1;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0.0; n_bins * n_classes];
    for (&x, &c) in feature.iter().zip(labels) {
        let b = edges.partition_point(|&e| e < x);
        joint[b * n_classes + c] += 1.0;
    }
    let total = n as f64;
    let pb: Vec<f64> = (0..n_bins)
        .map(|b| joint[b * n_classes..(b + 1) * n_classes].iter().sum())
        .collect();
    let pc: Vec<f64> = (0..n_classes)
        .map(|c| (0..n_bins).map(|b| joint[b * n_classes + c]).sum())
        .collect();
    let mut mi = 0.0;
    for b in 0..n_bins {
        for c in 0..n_classes {
            let j = joint[b * n_classes + c];
            if j > 0.0 {
                mi += j / total * (j * total / (pb[b] * pc[c])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Pearson correlation matrix of the given columns. A constant column
/// correlates 0 with everything else and 1 with itself.
pub fn correlation_matrix(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let centered: Vec<(Vec<f64>, f64)> = columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len().max(1) as f64;
            let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            (d, norm)
        })
        .collect();
    let p = columns.len();
    let mut out = vec![vec![0.0; p]; p];
    for i in 0..p {
        out[i][i] = 1.0;
        for j in i + 1..p {
            let (a, na) = &centered[i];
            let (b, nb) = &centered[j];
            let r = if *na > 0.0 && *nb > 0.0 {
                (a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    out
}
