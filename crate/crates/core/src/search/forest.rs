//! Bagged regression trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 50,
            max_depth: 8,
            min_leaf: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary regression tree with axis-aligned splits chosen to minimize squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// Fits a tree on the rows listed in `sample` (repeats allowed).
    pub fn fit(x: &[Vec<f64>], y: &[f64], sample: &[usize], max_depth: usize, min_leaf: usize) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut idx = sample.to_vec();
        tree.grow(x, y, &mut idx, 0, max_depth, min_leaf.max(1));
        tree
    }

    fn grow(
        &mut self,
        x: &[Vec<f64>],
        y: &[f64],
        idx: &mut [usize],
        depth: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> usize {
        let id = self.nodes.len();
        let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(Node::Leaf(mean));

        let constant = idx.iter().all(|&i| y[i] == y[idx[0]]);
        if depth >= max_depth || idx.len() < 2 * min_leaf || constant {
            if constant {
                self.nodes[id] = Node::Leaf(y[idx[0]]);
            }
            return id;
        }
        let Some((feature, threshold)) = best_split(x, y, idx, min_leaf) else {
            return id;
        };
        let mut split = 0;
        for k in 0..idx.len() {
            if x[idx[k]][feature] <= threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        if split == 0 || split == idx.len() {
            return id;
        }
        let (lo, hi) = idx.split_at_mut(split);
        let left = self.grow(x, y, lo, depth + 1, max_depth, min_leaf);
        let right = self.grow(x, y, hi, depth + 1, max_depth, min_leaf);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// Best `(feature, threshold)` by squared-error reduction with at least
/// `min_leaf` rows on each side.
fn best_split(x: &[Vec<f64>], y: &[f64], idx: &[usize], min_leaf: usize) -> Option<(usize, f64)> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = idx.to_vec();
    for feature in 0..x[idx[0]].len() {
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let (mut sum, mut sq) = (0.0, 0.0);
        for k in 0..n - 1 {
            let yi = y[order[k]];
            sum += yi;
            sq += yi * yi;
            let left_n = k + 1;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let (v, next) = (x[order[k]][feature], x[order[k + 1]][feature]);
            if v == next {
                continue;
            }
            let left_sse = sq - sum * sum / left_n as f64;
            let rs = total - sum;
            let right_sse = (total_sq - sq) - rs * rs / right_n as f64;
            let sse = left_sse + right_sse;
            if sse < parent_sse - 1e-12 * parent_sse.abs() && best.is_none_or(|(b, _, _)| sse < b) {
                let mid = v + (next - v) / 2.0;
                best = Some((sse, feature, if mid < next { mid } else { v }));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Mean of bootstrap-trained regression trees.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionForest {
    trees: Vec<RegressionTree>,
    n_features: usize,
}

impl RegressionForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &ForestConfig) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParam("cannot fit a forest on an empty dataset".into()));
        }
        if x.len() != y.len() {
            return Err(Error::InvalidParam(format!(
                "{} feature rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        let n_features = x[0].len();
        if x.iter().any(|r| r.len() != n_features) {
            return Err(Error::InvalidParam("ragged feature rows".into()));
        }
        if cfg.n_trees == 0 {
            return Err(Error::InvalidParam("n_trees must be >= 1".into()));
        }
        let n = x.len();
        let trees = (0..cfg.n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(t as u64);
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                RegressionTree::fit(x, y, &sample, cfg.max_depth, cfg.min_leaf)
            })
            .collect();
        Ok(RegressionForest { trees, n_features })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.n_features);
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut k = 0;
        while k < order.len() {
            let mut end = k;
            while end + 1 < order.len() && v[order[end + 1]] == v[order[k]] {
                end += 1;
            }
            let avg = (k + end) as f64 / 2.0;
            for &i in &order[k..=end] {
                r[i] = avg;
            }
            k = end + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let (mut va, mut vb) = (0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
        let y = x.iter().map(|r| r[0]).collect();
        (x, y)
    }

    #[test]
    fn constant_targets() {
        let (x, _) = synthetic(1, 100);
        let y = vec![7.0; 100];
        let f = RegressionForest::fit(&x, &y, &ForestConfig::default()).unwrap();
        for row in synthetic(2, 20).0 {
            assert_eq!(f.predict(&row), 7.0);
        }
    }

    #[test]
    fn single_row() {
        let x = vec![vec![0.3, 0.1, 0.0, 2.0, 5.0]];
        let f = RegressionForest::fit(&x, &[4.25], &ForestConfig::default()).unwrap();
        assert_eq!(f.predict(&[9.0, 9.0, 9.0, 9.0, 9.0]), 4.25);
    }

    #[test]
    fn empty_rejected() {
        assert!(RegressionForest::fit(&[], &[], &ForestConfig::default()).is_err());
    }

    #[test]
    fn learns_linear_target() {
        let (x, y) = synthetic(3, 500);
        let (train_x, test_x) = x.split_at(400);
        let (train_y, test_y) = y.split_at(400);
        let f = RegressionForest::fit(train_x, train_y, &ForestConfig::default()).unwrap();
        let pred: Vec<f64> = test_x.iter().map(|r| f.predict(r)).collect();
        assert!(spearman(&pred, test_y) >= 0.8);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = synthetic(4, 200);
        let cfg = ForestConfig { seed: 11, ..Default::default() };
        let a = RegressionForest::fit(&x, &y, &cfg).unwrap();
        let b = RegressionForest::fit(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tree_respects_min_leaf_and_depth() {
        let (x, y) = synthetic(5, 64);
        let all: Vec<usize> = (0..64).collect();
        let stump = RegressionTree::fit(&x, &y, &all, 1, 1);
        assert_eq!(stump.num_nodes(), 3);
        let leaf = RegressionTree::fit(&x, &y, &all, 8, 40);
        assert_eq!(leaf.num_nodes(), 1);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    }
}
