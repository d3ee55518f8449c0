//! CART trees shared by the forest and the boosting ensemble.
//!
//! Splits are `x[f] <= t` with `t` halfway between adjacent distinct training
//! values, so training partitions are unchanged by strictly increasing
//! feature transforms. Candidate features at each node are drawn by hashing
//! feature ids, not column positions, and ties between equally good splits
//! go to the lower feature id.

use super::{mix_seed, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Impurity {
    Gini,
    Entropy,
    Mse,
    FriedmanMse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// A fitted binary tree. Classification leaves store the class index.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub(crate) enum Target<'a> {
    Class {
        y: &'a [usize],
        n_classes: usize,
    },
    /// Regression on `values`; `leaf` maps the rows of a leaf to its output.
    Value {
        values: &'a [f64],
        leaf: &'a (dyn Fn(&[usize]) -> f64 + Sync),
    },
}

pub(crate) struct TreeConfig {
    pub max_depth: usize,
    /// Number of candidate features per node.
    pub max_features: usize,
    pub impurity: Impurity,
    pub seed: u64,
}

/// Per-node sufficient statistics.
#[derive(Clone)]
enum Stats {
    Class(Vec<f64>),
    Value { sum: f64, sum_sq: f64 },
}

impl Stats {
    fn empty(target: &Target) -> Stats {
        match target {
            Target::Class { n_classes, .. } => Stats::Class(vec![0.0; *n_classes]),
            Target::Value { .. } => Stats::Value { sum: 0.0, sum_sq: 0.0 },
        }
    }

    fn add(&mut self, target: &Target, row: usize, sign: f64) {
        match (self, target) {
            (Stats::Class(c), Target::Class { y, .. }) => c[y[row]] += sign,
            (Stats::Value { sum, sum_sq }, Target::Value { values, .. }) => {
                let v = values[row];
                *sum += sign * v;
                *sum_sq += sign * v * v;
            }
            _ => unreachable!("stats and target kinds always match"),
        }
    }

    /// Impurity per sample for a node holding `n` samples.
    fn impurity(&self, n: f64, kind: Impurity) -> f64 {
        match self {
            Stats::Class(c) => match kind {
                Impurity::Entropy => -c
                    .iter()
                    .filter(|&&k| k > 0.0)
                    .map(|&k| (k / n) * (k / n).ln())
                    .sum::<f64>(),
                _ => 1.0 - c.iter().map(|&k| (k / n) * (k / n)).sum::<f64>(),
            },
            Stats::Value { sum, sum_sq } => (sum_sq / n - (sum / n) * (sum / n)).max(0.0),
        }
    }

    fn mean(&self, n: f64) -> f64 {
        match self {
            Stats::Value { sum, .. } => sum / n,
            Stats::Class(_) => 0.0,
        }
    }
}

/// Split quality, in impurity units per sample of the node.
fn gain(parent: &Stats, left: &Stats, right: &Stats, n_l: f64, n_r: f64, kind: Impurity) -> f64 {
    let n = n_l + n_r;
    match kind {
        Impurity::FriedmanMse => {
            let d = left.mean(n_l) - right.mean(n_r);
            n_l * n_r / n * d * d / n
        }
        _ => parent.impurity(n, kind) - n_l / n * left.impurity(n_l, kind) - n_r / n * right.impurity(n_r, kind),
    }
}

struct Builder<'a> {
    data: &'a FeatureMatrix,
    target: Target<'a>,
    cfg: &'a TreeConfig,
    total: f64,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    node_counter: u64,
    /// Feature columns sorted by id, the order candidates are scanned in.
    by_id: Vec<usize>,
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn leaf_value(&self, rows: &[usize], stats: &Stats) -> f64 {
        match (&self.target, stats) {
            (Target::Class { .. }, Stats::Class(c)) => super::argmax(c) as f64,
            (Target::Value { leaf, .. }, _) => leaf(rows),
            _ => unreachable!(),
        }
    }

    fn candidates(&mut self) -> Vec<usize> {
        let node_seed = mix_seed(self.cfg.seed, self.node_counter);
        self.node_counter += 1;
        let p = self.by_id.len();
        if self.cfg.max_features >= p {
            return self.by_id.clone();
        }
        let ids = self.data.feature_ids();
        let mut keyed: Vec<(u64, usize)> = self
            .by_id
            .iter()
            .map(|&f| (mix_seed(node_seed, ids[f] as u64), f))
            .collect();
        keyed.sort_unstable_by_key(|&(k, f)| (k, ids[f]));
        let mut chosen: Vec<usize> = keyed[..self.cfg.max_features].iter().map(|&(_, f)| f).collect();
        chosen.sort_unstable_by_key(|&f| ids[f]);
        chosen
    }

    fn best_split(&mut self, rows: &[usize], parent: &Stats) -> Option<Best> {
        let n = rows.len() as f64;
        let mut best: Option<Best> = None;
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for f in self.candidates() {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.data.get(r, f), r)));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[pairs.len() - 1].0 {
                continue;
            }
            let mut left = Stats::empty(&self.target);
            let mut right = parent.clone();
            for i in 0..pairs.len() - 1 {
                left.add(&self.target, pairs[i].1, 1.0);
                right.add(&self.target, pairs[i].1, -1.0);
                if pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let n_l = (i + 1) as f64;
                let g = gain(parent, &left, &right, n_l, n - n_l, self.cfg.impurity);
                if best.as_ref().is_none_or(|b| g > b.gain) {
                    let (a, b) = (pairs[i].0, pairs[i + 1].0);
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid >= b { a } else { mid };
                    best = Some(Best {
                        gain: g,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> u32 {
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf(0.0));
        let mut stats = Stats::empty(&self.target);
        for &r in &rows {
            stats.add(&self.target, r, 1.0);
        }
        let n = rows.len() as f64;
        let pure = stats.impurity(n, self.cfg.impurity) <= 1e-14;
        let split = if depth < self.cfg.max_depth && rows.len() >= 2 && !pure {
            self.best_split(&rows, &stats)
        } else {
            None
        };
        let Some(Best {
            gain,
            feature,
            threshold,
        }) = split
        else {
            self.nodes[idx] = Node::Leaf(self.leaf_value(&rows, &stats));
            return idx as u32;
        };
        self.importance[feature] += n / self.total * gain.max(0.0);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.data.get(i, feature) <= threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[idx] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx as u32
    }
}

/// Grow a tree on `rows` (duplicates allowed). Returns the tree and the
/// per-column weighted impurity decrease.
pub(crate) fn grow(data: &FeatureMatrix, rows: &[usize], target: Target, cfg: &TreeConfig) -> (DecisionTree, Vec<f64>) {
    let p = data.n_features();
    let mut by_id: Vec<usize> = (0..p).collect();
    by_id.sort_by_key(|&f| data.feature_ids()[f]);
    let mut b = Builder {
        data,
        target,
        cfg,
        total: rows.len().max(1) as f64,
        nodes: Vec::new(),
        importance: vec![0.0; p],
        node_counter: 0,
        by_id,
    };
    b.build(rows.to_vec(), 0);
    (DecisionTree { nodes: b.nodes }, b.importance)
}
