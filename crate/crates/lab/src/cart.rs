//! Classification trees grown best-first on Gini impurity.
//!
//! Every frontier leaf carries the best split found for it when it was
//! created, and the leaf whose split has the largest size-weighted impurity
//! decrease is expanded next. Random feature draws therefore happen in leaf
//! creation order, and a tree grown to `L` leaves is the first `L - 1`
//! expansions of any larger tree grown from the same stream.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError};

/// Decreases closer than this are ties.
const TIE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    All,
    #[default]
    Sqrt,
}

impl FeatureSubset {
    pub fn count(self, dim: usize) -> usize {
        match self {
            FeatureSubset::All => dim,
            FeatureSubset::Sqrt => ((dim as f64).sqrt().floor() as usize).max(1),
        }
    }
}

impl std::str::FromStr for FeatureSubset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(FeatureSubset::All),
            "sqrt" => Ok(FeatureSubset::Sqrt),
            other => Err(format!("unknown feature subset `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    num_classes: usize,
}

impl Tree {
    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows().into_iter().map(|r| self.predict_row(r)).collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        if self.decrease > other.decrease + TIE_EPS {
            return true;
        }
        if self.decrease < other.decrease - TIE_EPS {
            return false;
        }
        (self.feature, self.threshold) < (other.feature, other.threshold)
    }
}

struct Frontier {
    node: usize,
    rows: Vec<usize>,
    split: Option<Candidate>,
}

struct Grower<'a, R: ?Sized> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    counts: &'a [f64],
    num_classes: usize,
    subset: FeatureSubset,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Grower<'_, R> {
    fn class_counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.num_classes];
        for &j in rows {
            c[self.y[j]] += self.counts[j];
        }
        c
    }

    fn majority(&self, rows: &[usize]) -> usize {
        let c = self.class_counts(rows);
        let mut best = 0;
        for k in 1..c.len() {
            if c[k] > c[best] {
                best = k;
            }
        }
        best
    }

    /// `Σ n_k² / n`, so that `n · gini = n - purity`.
    fn purity(class_counts: &[f64]) -> f64 {
        let n: f64 = class_counts.iter().sum();
        if n == 0.0 {
            0.0
        } else {
            class_counts.iter().map(|c| c * c).sum::<f64>() / n
        }
    }

    fn best_for_feature(&self, rows: &[usize], feature: usize, parent_purity: f64) -> Option<Candidate> {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| self.x[[a, feature]].total_cmp(&self.x[[b, feature]]));
        let mut left = vec![0.0; self.num_classes];
        let mut right = self.class_counts(rows);
        let mut best: Option<Candidate> = None;
        for pair in sorted.windows(2) {
            let (j, next) = (pair[0], pair[1]);
            left[self.y[j]] += self.counts[j];
            right[self.y[j]] -= self.counts[j];
            let (a, b) = (self.x[[j, feature]], self.x[[next, feature]]);
            if a == b {
                continue;
            }
            let mid = 0.5 * (a + b);
            let threshold = if mid < b { mid } else { a };
            let cand = Candidate {
                feature,
                threshold,
                decrease: Self::purity(&left) + Self::purity(&right) - parent_purity,
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
        best
    }

    fn find_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let class_counts = self.class_counts(rows);
        if class_counts.iter().filter(|&&c| c > 0.0).count() < 2 {
            return None;
        }
        let dim = self.x.ncols();
        let mut order: Vec<usize> = (0..dim).collect();
        let wanted = self.subset.count(dim);
        if wanted < dim {
            order.shuffle(self.rng);
        }
        let parent = Self::purity(&class_counts);
        let mut best: Option<Candidate> = None;
        for (tried, &f) in order.iter().enumerate() {
            if tried >= wanted && best.is_some() {
                break;
            }
            if let Some(c) = self.best_for_feature(rows, f, parent) {
                if best.as_ref().is_none_or(|b| c.beats(b)) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartOptions {
    pub max_leaf_nodes: usize,
    pub features_per_split: FeatureSubset,
}

/// Grows a tree on the rows with positive `counts` (bootstrap multiplicities;
/// all ones when `None`).
pub fn fit_cart_tree<R: Rng + ?Sized>(
    x: ArrayView2<f64>,
    y: &[usize],
    counts: Option<&[f64]>,
    num_classes: usize,
    opts: &CartOptions,
    rng: &mut R,
) -> Result<Tree, LabError> {
    if opts.max_leaf_nodes < 2 {
        return Err(param("max_leaf_nodes must be at least 2"));
    }
    if x.nrows() != y.len() {
        return Err(param("row/label count mismatch"));
    }
    if y.iter().any(|&c| c >= num_classes) {
        return Err(param("label outside 0..K"));
    }
    let ones;
    let counts = match counts {
        Some(c) if c.len() != y.len() => return Err(param("count length mismatch")),
        Some(c) => c,
        None => {
            ones = vec![1.0; y.len()];
            &ones
        }
    };
    let rows: Vec<usize> = (0..y.len()).filter(|&j| counts[j] > 0.0).collect();
    if rows.is_empty() {
        return Err(param("no training rows"));
    }

    let mut g = Grower {
        x,
        y,
        counts,
        num_classes,
        subset: opts.features_per_split,
        rng,
    };
    let mut nodes = vec![Node::Leaf {
        class: g.majority(&rows),
    }];
    let split = g.find_split(&rows);
    let mut frontier = vec![Frontier { node: 0, rows, split }];
    let mut leaves = 1;

    while leaves < opts.max_leaf_nodes {
        let mut pick: Option<(usize, Candidate)> = None;
        for (i, f) in frontier.iter().enumerate() {
            if let Some(c) = f.split {
                if pick.is_none_or(|(_, best)| c.decrease > best.decrease + TIE_EPS) {
                    pick = Some((i, c));
                }
            }
        }
        let Some((i, c)) = pick else { break };
        let leaf = frontier.remove(i);
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            leaf.rows.into_iter().partition(|&j| x[[j, c.feature]] <= c.threshold);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf {
            class: g.majority(&left_rows),
        });
        nodes.push(Node::Leaf {
            class: g.majority(&right_rows),
        });
        nodes[leaf.node] = Node::Split {
            feature: c.feature,
            threshold: c.threshold,
            left,
            right,
        };
        for (node, rows) in [(left, left_rows), (right, right_rows)] {
            let split = g.find_split(&rows);
            frontier.push(Frontier { node, rows, split });
        }
        leaves += 1;
    }
    Ok(Tree { nodes, num_classes })
}
