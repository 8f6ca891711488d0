//! CART decision trees: Gini impurity for classification, squared error for
//! regression. Thresholds sit at the midpoint between consecutive distinct
//! feature values and a sample goes left when `x[f] <= threshold`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => ((n_features as f64).sqrt() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes { labels: &'a [usize], n_classes: usize },
    Values(&'a [f64]),
}

impl Targets<'_> {
    fn width(&self) -> usize {
        match self {
            Targets::Classes { n_classes, .. } => *n_classes,
            Targets::Values(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree. Classification leaves hold class frequencies, regression
/// leaves hold the mean target.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Running sufficient statistics for one side of a split.
#[derive(Clone)]
struct Stats {
    counts: Vec<f64>,
    sum: f64,
    sum_sq: f64,
    n: usize,
}

impl Stats {
    fn new(width: usize) -> Self {
        Self {
            counts: vec![0.0; width],
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
        }
    }

    fn add(&mut self, t: &Targets, i: usize, sign: f64) {
        match t {
            Targets::Classes { labels, .. } => self.counts[labels[i]] += sign,
            Targets::Values(y) => {
                self.sum += sign * y[i];
                self.sum_sq += sign * y[i] * y[i];
            }
        }
        if sign > 0.0 {
            self.n += 1;
        } else {
            self.n -= 1;
        }
    }

    /// Impurity times sample count, so children can simply be added.
    fn weighted_impurity(&self, t: &Targets) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        match t {
            Targets::Classes { .. } => n - self.counts.iter().map(|c| c * c).sum::<f64>() / n,
            Targets::Values(_) => (self.sum_sq - self.sum * self.sum / n).max(0.0),
        }
    }

    fn leaf_value(&self, t: &Targets) -> Vec<f64> {
        let n = self.n as f64;
        match t {
            Targets::Classes { .. } => self.counts.iter().map(|c| c / n).collect(),
            Targets::Values(_) => vec![self.sum / n],
        }
    }

    fn is_pure(&self, t: &Targets) -> bool {
        match t {
            Targets::Classes { .. } => self.counts.iter().filter(|&&c| c > 0.0).count() <= 1,
            Targets::Values(_) => self.weighted_impurity(t) <= 0.0,
        }
    }
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    t: Targets<'a>,
    params: TreeParams,
    n_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn stats(&self, idx: &[usize]) -> Stats {
        let mut s = Stats::new(self.t.width());
        for &i in idx {
            s.add(&self.t, i, 1.0);
        }
        s
    }

    fn best_split(&mut self, idx: &[usize], parent: &Stats) -> Option<(usize, f64, f64)> {
        let m = self.params.max_features.count(self.n_features);
        let mut features: Vec<usize> = if m >= self.n_features {
            (0..self.n_features).collect()
        } else {
            sample(self.rng, self.n_features, m).into_vec()
        };
        features.sort_unstable();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in features {
            let x = self.x;
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            let mut left = Stats::new(self.t.width());
            let mut right = parent.clone();
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left.add(&self.t, i, 1.0);
                right.add(&self.t, i, -1.0);
                let (a, b) = (x[i][f], x[order[pos + 1]][f]);
                if a == b || left.n < min_leaf || right.n < min_leaf {
                    continue;
                }
                let score = left.weighted_impurity(&self.t) + right.weighted_impurity(&self.t);
                if best.is_none_or(|(_, _, s)| score < s) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some((f, threshold, score));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let stats = self.stats(&idx);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf(stats.leaf_value(&self.t)));
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if !depth_ok || idx.len() < self.params.min_samples_split.max(2) || stats.is_pure(&self.t) {
            return slot;
        }
        let Some((feature, threshold, _)) = self.best_split(&idx, &stats) else {
            return slot;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

impl DecisionTree {
    /// Fit on the rows named by `idx` (repeats allowed, as in a bootstrap
    /// sample). The rng is only consulted when `max_features` subsamples.
    pub fn fit<R: Rng>(x: &[Vec<f64>], t: Targets, idx: Vec<usize>, params: TreeParams, rng: &mut R) -> DecisionTree {
        assert!(!idx.is_empty(), "cannot fit a tree on zero samples");
        let mut b = Builder {
            x,
            t,
            params,
            n_features: x[idx[0]].len(),
            rng,
            nodes: Vec::new(),
        };
        b.grow(idx, 0);
        DecisionTree { nodes: b.nodes }
    }

    /// Leaf value reached by `row`.
    pub fn predict(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}
