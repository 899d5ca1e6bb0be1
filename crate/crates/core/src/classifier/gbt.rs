//! Gradient-boosted regression trees with second-order leaf weights.
//!
//! Trees grow level by level. Every level costs one pass over each feature's
//! presorted column, accumulating gradient statistics per open node, so the
//! split search is exact without re-sorting.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMatrix, RowMatrix};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Logistic,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Minimum hessian sum on each side of a split.
    #[serde(default = "default_min_child_weight")]
    pub min_child_weight: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Row fraction drawn per tree.
    pub subsample: f64,
    /// `None` picks logistic for two classes and softmax otherwise.
    pub loss: Option<Loss>,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            rounds: 300,
            learning_rate: 0.3,
            max_depth: 6,
            min_leaf: 1,
            min_child_weight: 1.0,
            lambda: 1.0,
            subsample: 1.0,
            loss: None,
        }
    }
}

fn default_min_child_weight() -> f64 {
    1.0
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("learning rate must be in (0, 1], got {}", self.learning_rate)));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max depth must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min leaf must be >= 1".into()));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::Config(format!("min child weight must be >= 0, got {}", self.min_child_weight)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::Config(format!("subsample must be in (0, 1], got {}", self.subsample)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree; node 0 is the root. Rows with `x[feature] < threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

/// Boosted ensemble over the classes present at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: GbtParams,
    pub loss: Loss,
    pub n_features: usize,
    /// Size of the class set the model was trained against.
    pub n_classes: usize,
    /// Class ids with training rows, ascending. Logistic treats the second as
    /// positive.
    pub present: Vec<usize>,
    /// Initial margin per output.
    pub base: Vec<f64>,
    /// `trees[round][output]`.
    pub trees: Vec<Vec<Tree>>,
}

impl GbtModel {
    /// Raw margins after the first `rounds` rounds.
    pub fn margins(&self, x: &[f64], rounds: usize) -> Vec<f64> {
        let mut f = self.base.clone();
        for round in self.trees.iter().take(rounds) {
            for (acc, tree) in f.iter_mut().zip(round) {
                *acc += tree.eval(x);
            }
        }
        f
    }

    /// Probabilities over the full class set after `rounds` rounds; classes
    /// absent in training get 0.
    pub fn predict_proba_rounds(&self, x: &RowMatrix, rounds: usize) -> Result<RowMatrix> {
        if x.n_cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.n_cols(),
            });
        }
        let mut out = RowMatrix::from_vec(vec![0.0; x.n_rows() * self.n_classes], x.n_rows(), self.n_classes)?;
        for i in 0..x.n_rows() {
            let f = self.margins(x.row(i), rounds);
            let row = out.row_mut(i);
            match self.loss {
                Loss::Logistic => {
                    let p = sigmoid(f[0]);
                    row[self.present[0]] = 1.0 - p;
                    row[self.present[1]] = p;
                }
                Loss::Softmax => {
                    let p = softmax(&f);
                    for (&c, v) in self.present.iter().zip(p) {
                        row[c] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix> {
        self.predict_proba_rounds(x, self.trees.len())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax(f: &[f64]) -> Vec<f64> {
    let top = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = f.iter().map(|v| (v - top).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Column-major copy of the training data with per-feature sort orders.
struct Columns {
    values: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Columns {
    fn new(x: &RowMatrix) -> Self {
        let values: Vec<Vec<f64>> = (0..x.n_cols()).map(|j| x.column(j)).collect();
        let order = values
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { values, order }
    }
}

const CLOSED: u32 = u32::MAX;

#[derive(Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    n: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

fn leaf_value(s: Stats, params: &GbtParams) -> f64 {
    let denom = s.h + params.lambda;
    if denom > 0.0 {
        -params.learning_rate * s.g / denom
    } else {
        0.0
    }
}

fn build_tree(cols: &Columns, g: &[f64], h: &[f64], sample: Option<&[bool]>, params: &GbtParams) -> Tree {
    let n = g.len();
    let mut node_of = vec![0u32; n];
    let mut root = Stats::default();
    for i in 0..n {
        if sample.is_some_and(|s| !s[i]) {
            node_of[i] = CLOSED;
            continue;
        }
        root.g += g[i];
        root.h += h[i];
        root.n += 1;
    }
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // Open nodes at the current level: (node id, stats).
    let mut open: Vec<(usize, Stats)> = vec![(0, root)];
    let mut slot_of: Vec<u32> = vec![0];

    for depth in 0..=params.max_depth {
        if open.is_empty() {
            break;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
        if depth < params.max_depth {
            let mut acc = vec![Stats::default(); open.len()];
            let mut last = vec![0.0f64; open.len()];
            for (f, order) in cols.order.iter().enumerate() {
                let col = &cols.values[f];
                acc.iter_mut().for_each(|a| *a = Stats::default());
                for &i in order {
                    let i = i as usize;
                    let node = node_of[i];
                    if node == CLOSED {
                        continue;
                    }
                    let s = slot_of[node as usize] as usize;
                    let v = col[i];
                    let a = &mut acc[s];
                    let total = open[s].1;
                    let (gr, hr) = (total.g - a.g, total.h - a.h);
                    if a.n >= params.min_leaf
                        && total.n - a.n >= params.min_leaf
                        && a.h >= params.min_child_weight
                        && hr >= params.min_child_weight
                        && v > last[s]
                    {
                        let gain = score(a.g, a.h, params.lambda) + score(gr, hr, params.lambda)
                            - score(total.g, total.h, params.lambda);
                        if gain > 0.0 && best[s].is_none_or(|b| gain > b.gain) {
                            let mid = last[s] + (v - last[s]) / 2.0;
                            best[s] = Some(Candidate {
                                gain,
                                feature: f,
                                threshold: if mid > last[s] { mid } else { v },
                            });
                        }
                    }
                    a.g += g[i];
                    a.h += h[i];
                    a.n += 1;
                    last[s] = v;
                }
            }
        }

        // Close leaves, open children.
        let mut next_open = Vec::new();
        let mut child_of_slot: Vec<Option<(usize, usize)>> = vec![None; open.len()];
        for (s, &(id, stats)) in open.iter().enumerate() {
            match best[s] {
                Some(c) => {
                    let (l, r) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[id] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: l,
                        right: r,
                    };
                    child_of_slot[s] = Some((l, r));
                }
                None => nodes[id] = Node::Leaf {
                    value: leaf_value(stats, params),
                },
            }
        }
        let mut next_slot_of = vec![CLOSED; nodes.len()];
        for &(l, r) in child_of_slot.iter().flatten() {
            next_slot_of[l] = next_open.len() as u32;
            next_open.push((l, Stats::default()));
            next_slot_of[r] = next_open.len() as u32;
            next_open.push((r, Stats::default()));
        }
        for i in 0..n {
            let node = node_of[i];
            if node == CLOSED {
                continue;
            }
            let s = slot_of[node as usize] as usize;
            match (child_of_slot[s], best[s]) {
                (Some((l, r)), Some(c)) => {
                    let child = if cols.values[c.feature][i] < c.threshold { l } else { r };
                    node_of[i] = child as u32;
                    let st = &mut next_open[next_slot_of[child] as usize].1;
                    st.g += g[i];
                    st.h += h[i];
                    st.n += 1;
                }
                _ => node_of[i] = CLOSED,
            }
        }
        slot_of = next_slot_of;
        open = next_open;
    }
    Tree { nodes }
}

fn present_classes(x: &FeatureMatrix) -> Vec<usize> {
    let mut seen = vec![false; x.classes().len()];
    for &l in x.labels() {
        seen[l] = true;
    }
    (0..seen.len()).filter(|&c| seen[c]).collect()
}

pub fn gbt_train(x: &FeatureMatrix, params: &GbtParams, rng: &mut RandomSource) -> Result<GbtModel> {
    params.validate()?;
    let present = present_classes(x);
    if present.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs >= 2 classes, found {}",
            present.len()
        )));
    }
    let loss = params.loss.unwrap_or(if present.len() == 2 { Loss::Logistic } else { Loss::Softmax });
    if loss == Loss::Logistic && present.len() != 2 {
        return Err(Error::Config("logistic loss needs exactly two classes".into()));
    }
    let n = x.n_rows();
    let mut index_of = vec![usize::MAX; x.classes().len()];
    for (k, &c) in present.iter().enumerate() {
        index_of[c] = k;
    }
    let y: Vec<usize> = x.labels().iter().map(|&l| index_of[l]).collect();
    let k = present.len();
    let mut counts = vec![0usize; k];
    y.iter().for_each(|&c| counts[c] += 1);

    let base: Vec<f64> = match loss {
        Loss::Logistic => {
            let p = counts[1] as f64 / n as f64;
            vec![(p / (1.0 - p)).ln()]
        }
        Loss::Softmax => counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect(),
    };
    let outputs = base.len();
    let cols = Columns::new(x.data());
    let mut margin: Vec<f64> = (0..n).flat_map(|_| base.iter().copied()).collect();
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut sample = vec![true; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut prob = vec![0.0; n * outputs];

    for _ in 0..params.rounds {
        if params.subsample < 1.0 {
            sample.iter_mut().for_each(|s| *s = rng.uniform() < params.subsample);
            if !sample.iter().any(|&s| s) {
                sample[rng.below(n)] = true;
            }
        }
        match loss {
            Loss::Logistic => {
                for i in 0..n {
                    prob[i] = sigmoid(margin[i]);
                }
            }
            Loss::Softmax => {
                for i in 0..n {
                    let p = softmax(&margin[i * k..(i + 1) * k]);
                    prob[i * k..(i + 1) * k].copy_from_slice(&p);
                }
            }
        }
        let mut round = Vec::with_capacity(outputs);
        for out in 0..outputs {
            for i in 0..n {
                let p = prob[i * outputs + out];
                let target = match loss {
                    Loss::Logistic => (y[i] == 1) as u8 as f64,
                    Loss::Softmax => (y[i] == out) as u8 as f64,
                };
                g[i] = p - target;
                h[i] = (p * (1.0 - p)).max(1e-16);
            }
            let tree = build_tree(&cols, &g, &h, (params.subsample < 1.0).then_some(&sample[..]), params);
            for i in 0..n {
                margin[i * outputs + out] += tree.eval(x.row(i));
            }
            round.push(tree);
        }
        trees.push(round);
    }
    Ok(GbtModel {
        params: params.clone(),
        loss,
        n_features: x.n_cols(),
        n_classes: x.classes().len(),
        present,
        base,
        trees,
    })
}
