//! Example-dependent cost-sensitive decision tree.
//!
//! A node's impurity is the cost of its cheaper constant prediction,
//! `I_c(S) = min(Cost(f_0(S)), Cost(f_1(S)))`. A split `(j, l)` sends
//! examples with `x_j <= l` left and the rest right, and its gain is
//! `I_c(S) - |S_l|/|S| I_c(S_l) - |S_r|/|S| I_c(S_r)`. Trees grow greedily
//! on maximum gain and are then pruned bottom-up on cost.
//!
//! Trees are stored as a preorder arena. The serialized form is a nested
//! record ([`TreeNode`]).

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost_model::{AugmentedExample, CostedDataset};
use crate::error::{Error, Result};
use crate::inducers::node_feature_subset;
use crate::rng::Rng;

/// Split criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    /// Cost of the cheaper constant prediction.
    #[default]
    Cost,
    /// Gini index on label counts. Leaves still predict the cheaper class,
    /// so with unit costs this is the usual cost-insensitive tree.
    Gini,
}

/// Threshold candidates considered for each feature at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidates {
    /// Midpoints between consecutive distinct values.
    ExactMidpoints,
    /// At most `q - 1` midpoints, placed at the `j/q` quantiles of the
    /// node's values.
    Quantiles(usize),
}

impl Default for Candidates {
    fn default() -> Self {
        Self::Quantiles(100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsdtConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_gain: f64,
    pub candidates: Candidates,
    pub pruning: bool,
    pub impurity: Impurity,
}

impl Default for CsdtConfig {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_split: 2,
            min_gain: 0.0,
            candidates: Candidates::default(),
            pruning: true,
            impurity: Impurity::Cost,
        }
    }
}

impl CsdtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Config("tree.max_depth must be at least 1".into()));
        }
        if let Candidates::Quantiles(q) = self.candidates {
            if q < 2 {
                return Err(Error::Config(format!("quantile count must be at least 2, got {q}")));
            }
        }
        if !self.min_gain.is_finite() {
            return Err(Error::Config("tree.min_gain must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitRule {
    #[inline]
    pub fn goes_left(&self, features: &[f64]) -> bool {
        features[self.feature] <= self.threshold
    }
}

/// Training statistics of a node. Counts include repeated rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeStats {
    pub cost_f0: f64,
    pub cost_f1: f64,
    pub n: usize,
    pub n_pos: usize,
}

impl NodeStats {
    fn of<'a>(examples: impl Iterator<Item = &'a AugmentedExample>) -> Self {
        let mut s = Self::default();
        for e in examples {
            s.add(e);
        }
        s
    }

    fn add(&mut self, e: &AugmentedExample) {
        self.cost_f0 += e.cost(0);
        self.cost_f1 += e.cost(1);
        self.n += 1;
        self.n_pos += usize::from(e.label);
    }

    /// Cheaper constant class; ties go to 0.
    pub fn class(&self) -> u8 {
        u8::from(self.cost_f1 < self.cost_f0)
    }

    pub fn cost_impurity(&self) -> f64 {
        self.cost_f0.min(self.cost_f1)
    }

    fn gini(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let p = self.n_pos as f64 / self.n as f64;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    }

    fn impurity(&self, kind: Impurity) -> f64 {
        match kind {
            Impurity::Cost => self.cost_impurity(),
            Impurity::Gini => self.gini(),
        }
    }

    /// Laplace-smoothed positive rate.
    pub fn positive_rate(&self) -> f64 {
        (self.n_pos as f64 + 1.0) / (self.n as f64 + 2.0)
    }
}

/// `min(Cost(f_0(S)), Cost(f_1(S)))`; zero for an empty subset.
pub fn cost_impurity(subset: &[AugmentedExample]) -> f64 {
    NodeStats::of(subset.iter()).cost_impurity()
}

/// Gain of `rule` on `subset`. Fails when either side is empty.
pub fn split_gain(subset: &[AugmentedExample], rule: &SplitRule) -> Result<f64> {
    let (left, right): (Vec<&AugmentedExample>, Vec<&AugmentedExample>) =
        subset.iter().partition(|e| rule.goes_left(&e.features));
    if left.is_empty() || right.is_empty() {
        return Err(Error::Split(format!(
            "rule x[{}] <= {} leaves one side empty",
            rule.feature, rule.threshold
        )));
    }
    let n = subset.len() as f64;
    let parent = cost_impurity(subset);
    let l = NodeStats::of(left.iter().copied()).cost_impurity();
    let r = NodeStats::of(right.iter().copied()).cost_impurity();
    Ok(parent - left.len() as f64 / n * l - right.len() as f64 / n * r)
}

#[derive(Debug, Clone, PartialEq)]
enum NodeKind {
    Leaf,
    Split { rule: SplitRule, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    stats: NodeStats,
    kind: NodeKind,
}

/// Nested node record used by the model file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        predicted_class: u8,
        cost_f0: f64,
        cost_f1: f64,
        n: usize,
        n_pos: usize,
    },
    Internal {
        rule: SplitRule,
        cost_f0: f64,
        cost_f1: f64,
        n: usize,
        n_pos: usize,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

/// Serialized tree: config echo, feature count and nested nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsdtRecord {
    pub k: usize,
    pub config: CsdtConfig,
    pub root: TreeNode,
}

/// A trained cost-sensitive decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CsdtRecord", try_from = "CsdtRecord")]
pub struct CsdtModel {
    nodes: Vec<Node>,
    config: CsdtConfig,
    k: usize,
}

/// Feature restrictions applied while growing.
#[derive(Debug, Default)]
pub struct GrowOptions<'a> {
    /// Only these features may be split on; all when `None`.
    pub features: Option<&'a [usize]>,
    /// Random-forest style: sample this many of the allowed features at
    /// every node using `rng`.
    pub per_node: Option<(usize, &'a mut Rng)>,
}

struct Grower<'a> {
    examples: &'a [AugmentedExample],
    config: &'a CsdtConfig,
    allowed: Vec<usize>,
    per_node: Option<(usize, &'a mut Rng)>,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    rule: SplitRule,
}

impl Grower<'_> {
    fn build(&mut self, indices: &mut [usize], depth: usize) -> Result<usize> {
        let stats = NodeStats::of(indices.iter().map(|&i| &self.examples[i]));
        let id = self.nodes.len();
        self.nodes.push(Node { stats, kind: NodeKind::Leaf });

        let pure = stats.n_pos == 0 || stats.n_pos == stats.n;
        if depth >= self.config.max_depth || stats.n < self.config.min_samples_split || pure {
            return Ok(id);
        }
        let features = match self.per_node.as_mut() {
            Some((m, rng)) => {
                let local = node_feature_subset(self.allowed.len(), *m, rng)?;
                local.into_iter().map(|i| self.allowed[i]).collect()
            }
            None => self.allowed.clone(),
        };
        let Some(best) = self.best_split(indices, &stats, &features) else {
            return Ok(id);
        };
        // NaN gains never split
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(best.gain > self.config.min_gain) {
            return Ok(id);
        }
        let rule = best.rule;
        let examples = self.examples;
        let mid = partition_in_place(indices, |&i| rule.goes_left(&examples[i].features));
        let (l, r) = indices.split_at_mut(mid);
        let left = self.build(l, depth + 1)?;
        let right = self.build(r, depth + 1)?;
        self.nodes[id].kind = NodeKind::Split { rule, left, right };
        Ok(id)
    }

    fn best_split(&self, indices: &[usize], parent: &NodeStats, features: &[usize]) -> Option<BestSplit> {
        let kind = self.config.impurity;
        let parent_imp = parent.impurity(kind);
        let n = parent.n as f64;
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
        for &j in features {
            order.clear();
            order.extend(indices.iter().map(|&i| (self.examples[i].features[j], i)));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            // right-side stats by suffix sums so a pure child sums to exactly zero
            let mut suffix = vec![NodeStats::default(); order.len() + 1];
            for w in (0..order.len()).rev() {
                suffix[w] = suffix[w + 1];
                suffix[w].add(&self.examples[order[w].1]);
            }
            // boundaries between distinct values: (left count, left stats, threshold)
            let mut left = NodeStats::default();
            let mut bounds: Vec<(usize, NodeStats, f64)> = Vec::new();
            for w in 0..order.len() {
                left.add(&self.examples[order[w].1]);
                if w + 1 < order.len() && order[w].0 < order[w + 1].0 {
                    bounds.push((w + 1, left, midpoint(order[w].0, order[w + 1].0)));
                }
            }
            for (count, ls, threshold) in select_candidates(bounds, order.len(), self.config.candidates) {
                let rs = suffix[count];
                let gain = parent_imp
                    - ls.n as f64 / n * ls.impurity(kind)
                    - rs.n as f64 / n * rs.impurity(kind);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit { gain, rule: SplitRule { feature: j, threshold } });
                }
            }
        }
        best
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if a <= m && m < b {
        m
    } else {
        a
    }
}

fn select_candidates(
    bounds: Vec<(usize, NodeStats, f64)>,
    n: usize,
    candidates: Candidates,
) -> Vec<(usize, NodeStats, f64)> {
    match candidates {
        Candidates::ExactMidpoints => bounds,
        Candidates::Quantiles(q) if bounds.len() < q => bounds,
        Candidates::Quantiles(q) => {
            let mut out: Vec<(usize, NodeStats, f64)> = Vec::with_capacity(q);
            let mut b = 0;
            for j in 1..q {
                let target = (j * n).div_ceil(q);
                while b < bounds.len() && bounds[b].0 < target {
                    b += 1;
                }
                if b == bounds.len() {
                    break;
                }
                if out.last().is_none_or(|last| last.0 != bounds[b].0) {
                    out.push(bounds[b]);
                }
            }
            out
        }
    }
}

fn partition_in_place<F: Fn(&usize) -> bool>(v: &mut [usize], pred: F) -> usize {
    // stable: keeps the relative order of both sides
    let (l, r): (Vec<usize>, Vec<usize>) = v.iter().partition(|i| pred(i));
    let mid = l.len();
    v[..mid].copy_from_slice(&l);
    v[mid..].copy_from_slice(&r);
    mid
}

/// Grows (and, if configured, prunes on the training set) a tree on the
/// whole dataset.
pub fn grow(train: &CostedDataset, config: &CsdtConfig) -> Result<CsdtModel> {
    let indices: Vec<usize> = (0..train.len()).collect();
    grow_on(train, &indices, config, GrowOptions::default())
}

/// Grows a tree on the rows `indices` of `train` (repeats allowed). When
/// pruning is enabled the same rows are the pruning set.
pub fn grow_on(
    train: &CostedDataset,
    indices: &[usize],
    config: &CsdtConfig,
    options: GrowOptions<'_>,
) -> Result<CsdtModel> {
    config.validate()?;
    if indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = train.k();
    let allowed: Vec<usize> = match options.features {
        Some(f) => {
            if let Some(&bad) = f.iter().find(|&&j| j >= k) {
                return Err(Error::Config(format!("feature index {bad} out of range for k={k}")));
            }
            f.to_vec()
        }
        None => (0..k).collect(),
    };
    let mut grower = Grower {
        examples: train.examples(),
        config,
        allowed,
        per_node: options.per_node,
        nodes: Vec::new(),
    };
    let mut work = indices.to_vec();
    grower.build(&mut work, 0)?;
    let model = CsdtModel { nodes: grower.nodes, config: *config, k };
    if config.pruning {
        let rows: Vec<&AugmentedExample> = indices.iter().map(|&i| &train.examples()[i]).collect();
        Ok(model.prune_rows(&rows))
    } else {
        Ok(model)
    }
}

impl CsdtModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn config(&self) -> &CsdtConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Leaf).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id].kind {
                NodeKind::Leaf => 0,
                NodeKind::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Features used by at least one split, ascending.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Split { rule, .. } => Some(rule.feature),
                NodeKind::Leaf => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    fn leaf_for(&self, features: &[f64]) -> &Node {
        let mut id = 0;
        loop {
            match self.nodes[id].kind {
                NodeKind::Leaf => return &self.nodes[id],
                NodeKind::Split { rule, left, right } => {
                    id = if rule.goes_left(features) { left } else { right };
                }
            }
        }
    }

    fn check_dim(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.k {
            return Err(Error::Dimension { expected: self.k, found: features.len() });
        }
        Ok(())
    }

    pub fn predict(&self, features: &[f64]) -> Result<u8> {
        self.check_dim(features)?;
        Ok(self.leaf_for(features).stats.class())
    }

    /// Laplace-smoothed positive frequency of the reached leaf.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        self.check_dim(features)?;
        Ok(self.leaf_for(features).stats.positive_rate())
    }

    pub fn predict_dataset(&self, dataset: &CostedDataset) -> Result<Vec<u8>> {
        dataset.examples().iter().map(|e| self.predict(&e.features)).collect()
    }

    /// Cost-based pruning on `prune_set`.
    pub fn prune(&self, prune_set: &CostedDataset) -> Result<CsdtModel> {
        if prune_set.k() != self.k {
            return Err(Error::Dimension { expected: self.k, found: prune_set.k() });
        }
        let rows: Vec<&AugmentedExample> = prune_set.examples().iter().collect();
        Ok(self.prune_rows(&rows))
    }

    /// Repeatedly collapses the internal node with the largest
    /// `PC_c = Cost(f(S)) - Cost(f*(S))`, where `f*` replaces that node by
    /// a leaf predicting its cheaper training class. Subtrees whose leaves
    /// all predict the node's class are always collapsed; any other
    /// collapse must lower the pruning-set cost.
    fn prune_rows(&self, rows: &[&AugmentedExample]) -> CsdtModel {
        let n = self.nodes.len();
        // cost on the pruning rows reaching each node if it predicted its own class
        let mut collapse = vec![0.0f64; n];
        for e in rows {
            let mut id = 0;
            loop {
                collapse[id] += e.cost(self.nodes[id].stats.class());
                match self.nodes[id].kind {
                    NodeKind::Leaf => break,
                    NodeKind::Split { rule, left, right } => {
                        id = if rule.goes_left(&e.features) { left } else { right };
                    }
                }
            }
        }
        let mut nodes = self.nodes.clone();
        let mut subtree = vec![0.0f64; n];
        // class shared by every leaf below, if any
        let mut uniform: Vec<Option<u8>> = vec![None; n];
        loop {
            let reach = reachable(&nodes);
            for id in (0..n).rev().filter(|&i| reach[i]) {
                match nodes[id].kind {
                    NodeKind::Leaf => {
                        subtree[id] = collapse[id];
                        uniform[id] = Some(nodes[id].stats.class());
                    }
                    NodeKind::Split { left, right, .. } => {
                        subtree[id] = subtree[left] + subtree[right];
                        uniform[id] = if uniform[left] == uniform[right] { uniform[left] } else { None };
                    }
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for id in (0..n).filter(|&i| reach[i] && nodes[i].kind != NodeKind::Leaf) {
                let pc = subtree[id] - collapse[id];
                let equivalent = uniform[id] == Some(nodes[id].stats.class());
                let tol = 1e-12 * collapse[id].abs().max(1.0);
                let score = if equivalent { pc.max(0.0) } else if pc > tol { pc } else { continue };
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((id, score));
                }
            }
            match best {
                Some((id, _)) => nodes[id].kind = NodeKind::Leaf,
                None => break,
            }
        }
        CsdtModel { nodes: compact(&nodes), config: self.config, k: self.k }
    }

    /// Maps every split feature `j` to `mapping[j]`.
    pub fn remap_features(&self, mapping: &[usize], new_k: usize) -> Result<CsdtModel> {
        let mut nodes = self.nodes.clone();
        for node in &mut nodes {
            if let NodeKind::Split { rule, .. } = &mut node.kind {
                let to = *mapping.get(rule.feature).ok_or(Error::Dimension {
                    expected: rule.feature + 1,
                    found: mapping.len(),
                })?;
                if to >= new_k {
                    return Err(Error::Config(format!("feature {to} out of range for k={new_k}")));
                }
                rule.feature = to;
            }
        }
        Ok(CsdtModel { nodes, config: self.config, k: new_k })
    }

    pub fn to_record(&self) -> CsdtRecord {
        fn go(nodes: &[Node], id: usize) -> TreeNode {
            let s = nodes[id].stats;
            match nodes[id].kind {
                NodeKind::Leaf => TreeNode::Leaf {
                    predicted_class: s.class(),
                    cost_f0: s.cost_f0,
                    cost_f1: s.cost_f1,
                    n: s.n,
                    n_pos: s.n_pos,
                },
                NodeKind::Split { rule, left, right } => TreeNode::Internal {
                    rule,
                    cost_f0: s.cost_f0,
                    cost_f1: s.cost_f1,
                    n: s.n,
                    n_pos: s.n_pos,
                    left: Box::new(go(nodes, left)),
                    right: Box::new(go(nodes, right)),
                },
            }
        }
        CsdtRecord { k: self.k, config: self.config, root: go(&self.nodes, 0) }
    }

    pub fn from_record(record: &CsdtRecord) -> Result<Self> {
        fn go(node: &TreeNode, k: usize, out: &mut Vec<Node>) -> Result<usize> {
            let id = out.len();
            match node {
                TreeNode::Leaf { predicted_class, cost_f0, cost_f1, n, n_pos } => {
                    let stats = NodeStats { cost_f0: *cost_f0, cost_f1: *cost_f1, n: *n, n_pos: *n_pos };
                    if stats.class() != *predicted_class {
                        return Err(Error::Config(format!(
                            "leaf predicts {predicted_class} but its costs favour {}",
                            stats.class()
                        )));
                    }
                    out.push(Node { stats, kind: NodeKind::Leaf });
                }
                TreeNode::Internal { rule, cost_f0, cost_f1, n, n_pos, left, right } => {
                    if rule.feature >= k || !rule.threshold.is_finite() {
                        return Err(Error::Config(format!("invalid split rule {rule:?} for k={k}")));
                    }
                    let stats = NodeStats { cost_f0: *cost_f0, cost_f1: *cost_f1, n: *n, n_pos: *n_pos };
                    out.push(Node { stats, kind: NodeKind::Leaf });
                    let l = go(left, k, out)?;
                    let r = go(right, k, out)?;
                    out[id].kind = NodeKind::Split { rule: *rule, left: l, right: r };
                }
            }
            Ok(id)
        }
        let mut nodes = Vec::new();
        go(&record.root, record.k, &mut nodes)?;
        Ok(Self { nodes, config: record.config, k: record.k })
    }
}

impl From<CsdtModel> for CsdtRecord {
    fn from(m: CsdtModel) -> Self {
        m.to_record()
    }
}

impl TryFrom<CsdtRecord> for CsdtModel {
    type Error = Error;
    fn try_from(r: CsdtRecord) -> Result<Self> {
        Self::from_record(&r)
    }
}

fn reachable(nodes: &[Node]) -> Vec<bool> {
    let mut reach = vec![false; nodes.len()];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        reach[id] = true;
        if let NodeKind::Split { left, right, .. } = nodes[id].kind {
            stack.push(left);
            stack.push(right);
        }
    }
    reach
}

fn compact(nodes: &[Node]) -> Vec<Node> {
    fn go(nodes: &[Node], id: usize, out: &mut Vec<Node>) -> usize {
        let new_id = out.len();
        out.push(Node { stats: nodes[id].stats, kind: NodeKind::Leaf });
        if let NodeKind::Split { rule, left, right } = nodes[id].kind {
            let l = go(nodes, left, out);
            let r = go(nodes, right, out);
            out[new_id].kind = NodeKind::Split { rule, left: l, right: r };
        }
        new_id
    }
    let mut out = Vec::with_capacity(nodes.len());
    go(nodes, 0, &mut out);
    out
}
