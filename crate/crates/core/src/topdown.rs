//! Inverting the Gumbel-max trick: conditional (truncated) Gumbel
//! generation given an argmax and/or maximum, transformation of
//! unconditional perturbed logits to a prescribed maximum, the queue-based
//! top-down construction, and lazy Gumbel-top-k over explicit trees.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec::Vec;

use crate::dist::{CategoricalParams, GumbelParams, TruncGumbelParams};
use crate::math;
use crate::rng::RngState;
use crate::sampling::{index_for_uniform, IndexSubset, PerturbedLogits};
use crate::wor::TopKResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopDownError {
    /// Neither the index nor the maximum was given.
    MissingCondition,
    /// Conditioning on a class with zero unnormalized probability.
    ZeroMassIndex(usize),
    IndexOutOfBounds(usize),
    /// The conditioning maximum must be finite.
    NonFiniteMax,
    /// k exceeds the number of leaves.
    KTooLarge {
        k: usize,
        leaves: usize,
    },
}

impl core::fmt::Display for TopDownError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::MissingCondition => {
                write!(f, "at least one of index or max_value must be given")
            }
            Self::ZeroMassIndex(i) => {
                write!(f, "cannot condition on zero-mass class {i}")
            }
            Self::IndexOutOfBounds(i) => write!(f, "index {i} out of bounds"),
            Self::NonFiniteMax => write!(f, "conditioning maximum must be finite"),
            Self::KTooLarge { k, leaves } => {
                write!(f, "k = {k} exceeds the {leaves} leaves of the tree")
            }
        }
    }
}

impl core::error::Error for TopDownError {}

/// Partial knowledge to invert a Gumbel-max draw from: the winning index,
/// the maximum value, or both.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TopDownCondition {
    pub index: Option<usize>,
    pub max_value: Option<f64>,
}

impl TopDownCondition {
    pub fn index(omega: usize) -> Self {
        Self {
            index: Some(omega),
            max_value: None,
        }
    }

    pub fn max(m: f64) -> Self {
        Self {
            index: None,
            max_value: Some(m),
        }
    }

    pub fn both(omega: usize, m: f64) -> Self {
        Self {
            index: Some(omega),
            max_value: Some(m),
        }
    }
}

/// Fill in whichever of (omega, m) is missing. Because the argmax and the
/// maximum are independent, the missing index is a fresh Cat(pi) draw and
/// the missing maximum a fresh Gumbel(log Z) draw.
pub fn complete_condition(
    cond: &TopDownCondition,
    c: &CategoricalParams,
    mut rng: RngState,
) -> Result<(usize, f64, RngState), TopDownError> {
    if let Some(omega) = cond.index {
        if omega >= c.len() {
            return Err(TopDownError::IndexOutOfBounds(omega));
        }
        if c.effective_logit(omega) == f64::NEG_INFINITY {
            return Err(TopDownError::ZeroMassIndex(omega));
        }
    }
    if let Some(m) = cond.max_value {
        if !m.is_finite() {
            return Err(TopDownError::NonFiniteMax);
        }
    }
    let omega = match cond.index {
        Some(omega) => omega,
        None => {
            if cond.max_value.is_none() {
                return Err(TopDownError::MissingCondition);
            }
            let (u, next) = rng.next_uniform();
            rng = next;
            index_for_uniform(&c.probs(), u)
        }
    };
    let m = match cond.max_value {
        Some(m) => m,
        None => {
            let (u, next) = rng.next_uniform();
            rng = next;
            GumbelParams::new(c.log_partition(), 1.0)
                .expect("log Z is finite")
                .icdf(u)
                .expect("u strictly inside (0,1)")
        }
    };
    Ok((omega, m, rng))
}

/// Sample the full vector of perturbed logits conditional on the argmax
/// being `omega` with maximum `m`: entry `omega` is `m` itself and every
/// other entry is a TruncGumbel(log theta_i, 1, m) draw, evaluated in log
/// space. One uniform is consumed per non-argmax class, in index order.
pub fn conditional_perturbed_logits(
    omega: usize,
    m: f64,
    c: &CategoricalParams,
    mut rng: RngState,
) -> Result<(PerturbedLogits, RngState), TopDownError> {
    if omega >= c.len() {
        return Err(TopDownError::IndexOutOfBounds(omega));
    }
    if c.effective_logit(omega) == f64::NEG_INFINITY {
        return Err(TopDownError::ZeroMassIndex(omega));
    }
    if !m.is_finite() {
        return Err(TopDownError::NonFiniteMax);
    }
    let mut values = Vec::with_capacity(c.len());
    for i in 0..c.len() {
        if i == omega {
            values.push(m);
            continue;
        }
        let (u, next) = rng.next_uniform();
        rng = next;
        let logit = c.effective_logit(i);
        if logit == f64::NEG_INFINITY {
            values.push(f64::NEG_INFINITY);
        } else {
            let trunc = TruncGumbelParams::new(logit, 1.0, m).expect("logit and m finite");
            values.push(trunc.icdf(u).expect("u strictly inside (0,1)"));
        }
    }
    Ok((PerturbedLogits::from_parts(values, c.clone()), rng))
}

/// Shift one perturbed value from a vector with maximum `cur_max` so that
/// the collection's maximum becomes `target`: the composite
/// F_target^-1(F_cur_max(value)) with both truncated CDFs sharing the
/// value's own location, which algebraically reduces to
/// -log(exp(-target) - exp(-cur_max) + exp(-value)).
///
/// Evaluated via softplus/log1mexp so very negative maxima cannot overflow
/// exp(-m); the argmax coordinate maps to `target` exactly.
pub(crate) fn shift_toward_max(value: f64, cur_max: f64, target: f64) -> f64 {
    if value == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if value >= cur_max {
        return target;
    }
    // v with exp(-v) = exp(-value) - exp(-cur_max)
    let v = value - math::log1m_exp(value - cur_max);
    target - math::softplus(target - v)
}

/// Transform unconditional perturbed logits (maximum q) into conditional
/// ones with maximum exactly `target_max`, preserving the argmax and every
/// coordinate's marginal law.
pub fn transform_to_truncated(pl: &PerturbedLogits, target_max: f64) -> PerturbedLogits {
    assert!(target_max.is_finite(), "target maximum must be finite");
    let q = pl
        .values()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    assert!(q.is_finite(), "perturbed logits need a finite maximum");
    let values = pl
        .values()
        .iter()
        .map(|&v| shift_toward_max(v, q, target_max))
        .collect();
    PerturbedLogits::from_parts(values, pl.source().clone())
}

/// How the top-down construction splits the remaining domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum PartitionStrategy {
    /// Split at the median index.
    #[default]
    MedianSplit,
    /// Assign each element to a side by a coin flip from the stream.
    RandomSplit,
}

/// One node of the top-down construction: the sub-domain it owns, the class
/// drawn for it, its (truncated) maximum, and the parent's maximum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TopDownNode {
    pub domain: IndexSubset,
    pub index: usize,
    pub max_value: f64,
    pub parent_max: f64,
}

/// Queue-driven construction that regenerates a complete set of perturbed
/// logits top-down: the root carries a Gumbel(log Z) maximum and a Cat(pi)
/// argmax, and each child sub-domain gets a maximum truncated at its
/// parent's. Yields one node per sampleable class, the root first, in FIFO
/// order.
pub struct TopDownConstruction {
    c: CategoricalParams,
    strategy: PartitionStrategy,
    rng: RngState,
    root: Option<(usize, f64)>,
    started: bool,
    queue: VecDeque<(Vec<usize>, usize, f64)>,
    pending: VecDeque<TopDownNode>,
}

impl TopDownConstruction {
    pub fn new(c: &CategoricalParams, strategy: PartitionStrategy, rng: RngState) -> Self {
        Self {
            c: c.clone(),
            strategy,
            rng,
            root: None,
            started: false,
            queue: VecDeque::new(),
            pending: VecDeque::new(),
        }
    }

    /// Construction rooted at a known (omega, m), e.g. one produced by
    /// [`complete_condition`].
    pub fn with_root(
        c: &CategoricalParams,
        omega: usize,
        m: f64,
        strategy: PartitionStrategy,
        rng: RngState,
    ) -> Result<Self, TopDownError> {
        if omega >= c.len() {
            return Err(TopDownError::IndexOutOfBounds(omega));
        }
        if c.effective_logit(omega) == f64::NEG_INFINITY {
            return Err(TopDownError::ZeroMassIndex(omega));
        }
        if !m.is_finite() {
            return Err(TopDownError::NonFiniteMax);
        }
        let mut this = Self::new(c, strategy, rng);
        this.root = Some((omega, m));
        Ok(this)
    }

    /// Stream state after everything consumed so far.
    pub fn rng_state(&self) -> RngState {
        self.rng
    }

    fn draw_uniform(&mut self) -> f64 {
        let (u, next) = self.rng.next_uniform();
        self.rng = next;
        u
    }

    /// Cat(pi) restricted to `domain` (all members carry mass).
    fn draw_restricted_index(&mut self, domain: &[usize]) -> usize {
        let probs = self.c.probs_over(domain);
        let u = self.draw_uniform();
        domain[index_for_uniform(&probs, u)]
    }

    fn start(&mut self) -> TopDownNode {
        // Zero-mass classes can never be an argmax and would make child
        // partition functions vanish, so the construction runs on the
        // sampleable support.
        let support: Vec<usize> = (0..self.c.len())
            .filter(|&i| self.c.effective_logit(i) != f64::NEG_INFINITY)
            .collect();
        let (omega, m) = match self.root {
            Some(root) => root,
            None => {
                let u = self.draw_uniform();
                let m = GumbelParams::new(self.c.log_partition_over(&support), 1.0)
                    .expect("log Z finite on the support")
                    .icdf(u)
                    .expect("u strictly inside (0,1)");
                let omega = self.draw_restricted_index(&support);
                (omega, m)
            }
        };
        self.queue.push_back((support.clone(), omega, m));
        TopDownNode {
            domain: IndexSubset::new(support).expect("support is nonempty"),
            index: omega,
            max_value: m,
            parent_max: f64::INFINITY,
        }
    }

    fn partition(&mut self, rest: &[usize]) -> (Vec<usize>, Vec<usize>) {
        match self.strategy {
            PartitionStrategy::MedianSplit => {
                let mid = rest.len().div_ceil(2);
                (rest[..mid].to_vec(), rest[mid..].to_vec())
            }
            PartitionStrategy::RandomSplit => {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for &i in rest {
                    if self.draw_uniform() < 0.5 {
                        left.push(i);
                    } else {
                        right.push(i);
                    }
                }
                (left, right)
            }
        }
    }

    fn expand_next(&mut self) {
        let Some((domain, omega, m)) = self.queue.pop_front() else {
            return;
        };
        let rest: Vec<usize> = domain.iter().copied().filter(|&i| i != omega).collect();
        let (left, right) = self.partition(&rest);
        for child in [left, right] {
            if child.is_empty() {
                continue;
            }
            let u = self.draw_uniform();
            let child_m = TruncGumbelParams::new(self.c.log_partition_over(&child), 1.0, m)
                .expect("child partition carries mass")
                .icdf(u)
                .expect("u strictly inside (0,1)");
            let child_omega = self.draw_restricted_index(&child);
            self.pending.push_back(TopDownNode {
                domain: IndexSubset::new(child.clone()).expect("child is nonempty"),
                index: child_omega,
                max_value: child_m,
                parent_max: m,
            });
            self.queue.push_back((child, child_omega, child_m));
        }
    }
}

impl Iterator for TopDownConstruction {
    type Item = TopDownNode;

    fn next(&mut self) -> Option<TopDownNode> {
        if !self.started {
            self.started = true;
            return Some(self.start());
        }
        while self.pending.is_empty() && !self.queue.is_empty() {
            self.expand_next();
        }
        self.pending.pop_front()
    }
}

/// Reassemble a complete perturbed-logit vector from a finished
/// construction: values[omega_k] = m_k, with -inf for zero-mass classes.
pub fn assemble_perturbed_logits(c: &CategoricalParams, nodes: &[TopDownNode]) -> PerturbedLogits {
    let mut values = alloc::vec![f64::NEG_INFINITY; c.len()];
    for node in nodes {
        values[node.index] = node.max_value;
    }
    PerturbedLogits::from_parts(values, c.clone())
}

/// A rooted tree with a logit on every edge; a leaf's log-probability is
/// the sum of edge logits along its path. Node 0 is the root.
#[derive(Debug, Clone, Default)]
pub struct LogitTree {
    children: Vec<Vec<usize>>,
    edge_logit: Vec<f64>,
}

impl LogitTree {
    pub fn new() -> Self {
        Self {
            children: alloc::vec![Vec::new()],
            edge_logit: alloc::vec![0.0],
        }
    }

    /// Append a child under `parent`, returning the new node id.
    pub fn add_child(&mut self, parent: usize, edge_logit: f64) -> usize {
        assert!(parent < self.children.len(), "parent out of bounds");
        assert!(edge_logit.is_finite(), "edge logits must be finite");
        let id = self.children.len();
        self.children.push(Vec::new());
        self.edge_logit.push(edge_logit);
        self.children[parent].push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    /// Leaf ids in increasing order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_leaf(n)).collect()
    }

    /// (leaf ids, path-sum logits), the flat categorical this tree encodes.
    pub fn leaf_logits(&self) -> (Vec<usize>, Vec<f64>) {
        let paths = self.path_logits();
        let leaves = self.leaves();
        let logits = leaves.iter().map(|&n| paths[n]).collect();
        (leaves, logits)
    }

    /// Path-sum logit of every node from the root.
    fn path_logits(&self) -> Vec<f64> {
        let mut paths = alloc::vec![0.0; self.len()];
        let mut stack = alloc::vec![0usize];
        while let Some(node) = stack.pop() {
            for &child in &self.children[node] {
                paths[child] = paths[node] + self.edge_logit[child];
                stack.push(child);
            }
        }
        paths
    }

    /// log of each node's subtree partition function, relative to the node:
    /// 0 at a leaf, logsumexp over (edge + child value) otherwise.
    fn subtree_log_z(&self) -> Vec<f64> {
        let mut log_z = alloc::vec![0.0; self.len()];
        // Children always have larger ids, so a reverse sweep is bottom-up.
        for node in (0..self.len()).rev() {
            if self.is_leaf(node) {
                continue;
            }
            let parts: Vec<f64> = self.children[node]
                .iter()
                .map(|&ch| self.edge_logit[ch] + log_z[ch])
                .collect();
            log_z[node] = math::log_sum_exp(&parts);
        }
        log_z
    }
}

#[derive(PartialEq)]
struct FrontierEntry {
    value: f64,
    node: usize,
}

impl Eq for FrontierEntry {}

impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Max-heap on value; lower node id wins ties for determinism.
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Gumbel-top-k over the leaves of `tree` without enumerating them.
///
/// Max-stability gives the root a Gumbel(log Z) perturbed value; expanding
/// a node samples its children's values conditional on their maximum
/// equaling the node's own. Best-first search then emits leaves in
/// decreasing perturbed order: exactly the law of flat Gumbel-top-k on the
/// enumerated leaf distribution, while popping at most (depth+1) nodes per
/// emitted leaf.
pub fn lazy_tree_topk(
    tree: &LogitTree,
    k: usize,
    rng: RngState,
) -> Result<(TopKResult, RngState), TopDownError> {
    let (result, _, rng) = lazy_tree_topk_counted(tree, k, rng)?;
    Ok((result, rng))
}

/// [`lazy_tree_topk`] plus the number of heap pops spent, for budget
/// checks.
pub fn lazy_tree_topk_counted(
    tree: &LogitTree,
    k: usize,
    mut rng: RngState,
) -> Result<(TopKResult, usize, RngState), TopDownError> {
    let leaf_count = tree.leaves().len();
    if k > leaf_count {
        return Err(TopDownError::KTooLarge {
            k,
            leaves: leaf_count,
        });
    }
    let paths = tree.path_logits();
    let log_z = tree.subtree_log_z();

    let mut heap = BinaryHeap::new();
    let (u, next) = rng.next_uniform();
    rng = next;
    let root_value = GumbelParams::new(log_z[0], 1.0)
        .expect("finite root partition")
        .icdf(u)
        .expect("u strictly inside (0,1)");
    heap.push(FrontierEntry {
        value: root_value,
        node: 0,
    });

    let mut indices = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut pops = 0usize;
    while let Some(FrontierEntry { value, node }) = heap.pop() {
        pops += 1;
        if tree.is_leaf(node) {
            indices.push(node);
            values.push(value);
            if indices.len() == k {
                break;
            }
            continue;
        }
        // Unconditional Gumbels for the children, then shift so their
        // maximum lands exactly on this node's value.
        let kids = &tree.children[node];
        let mut raw = Vec::with_capacity(kids.len());
        for &ch in kids {
            let (u, next) = rng.next_uniform();
            rng = next;
            let loc = paths[ch] + log_z[ch];
            raw.push(
                GumbelParams::new(loc, 1.0)
                    .expect("finite location")
                    .icdf(u)
                    .expect("u strictly inside (0,1)"),
            );
        }
        let cur_max = raw.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        for (&ch, &g) in kids.iter().zip(&raw) {
            heap.push(FrontierEntry {
                value: shift_toward_max(g, cur_max, value),
                node: ch,
            });
        }
    }
    Ok((TopKResult::new(indices, values), pops, rng))
}
