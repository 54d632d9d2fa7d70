//! Sampling without replacement: Gumbel-top-k, the sequential
//! renormalization scheme, rejection sampling, and exact Plackett-Luce /
//! unordered-set probabilities for verification.

use alloc::vec::Vec;

use crate::dist::CategoricalParams;
use crate::rng::RngState;
use crate::sampling::{index_for_uniform, inverse_transform_sample, IndexSubset, PerturbedLogits};

/// Exact permutation enumeration is capped here; beyond it the factorial
/// blow-up calls for Monte Carlo instead.
pub const SET_ENUMERATION_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum WorError {
    /// k exceeds the number of classes that can still be drawn.
    InsufficientSupport {
        k: usize,
        support: usize,
    },
    DuplicateIndex(usize),
    IndexOutOfBounds(usize),
    /// |S|! is too large to enumerate exactly; use Monte Carlo.
    EnumerationGuard {
        size: usize,
    },
    /// Rejection sampling ran out of proposals; carries what was collected.
    ProposalsExhausted {
        partial: Vec<usize>,
        proposals: usize,
    },
}

impl core::fmt::Display for WorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::InsufficientSupport { k, support } => {
                write!(f, "k = {k} exceeds the sampleable support of {support}")
            }
            Self::DuplicateIndex(i) => write!(f, "index {i} appears twice"),
            Self::IndexOutOfBounds(i) => write!(f, "index {i} out of bounds"),
            Self::EnumerationGuard { size } => write!(
                f,
                "set of {size} needs {size}! terms; beyond the exact enumeration \
                 limit of {SET_ENUMERATION_LIMIT}, estimate by Monte Carlo instead"
            ),
            Self::ProposalsExhausted { partial, proposals } => write!(
                f,
                "rejection sampling exhausted {proposals} proposals with only {} unique draws",
                partial.len()
            ),
        }
    }
}

impl core::error::Error for WorError {}

/// The k largest perturbed logits: an ordered sample without replacement.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TopKResult {
    indices: Vec<usize>,
    perturbed_values: Vec<f64>,
}

impl TopKResult {
    pub(crate) fn new(indices: Vec<usize>, perturbed_values: Vec<f64>) -> Self {
        Self {
            indices,
            perturbed_values,
        }
    }

    /// Selected classes, best first.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Matching perturbed values, decreasing.
    pub fn perturbed_values(&self) -> &[f64] {
        &self.perturbed_values
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// Take the k largest entries of one perturbation. All k draws reuse the
/// same noise, so a single call to [`crate::sampling::perturb`] is the only
/// randomness consumed; the ordered output follows the Plackett-Luce law.
pub fn gumbel_topk(pl: &PerturbedLogits, k: usize) -> Result<TopKResult, WorError> {
    let finite = pl.values().iter().filter(|v| v.is_finite()).count();
    if k > finite {
        return Err(WorError::InsufficientSupport { k, support: finite });
    }
    let values = pl.values();
    let mut order: Vec<usize> = (0..values.len()).collect();
    let descending =
        |&a: &usize, &b: &usize| values[b].total_cmp(&values[a]).then_with(|| a.cmp(&b));
    if k < order.len() {
        order.select_nth_unstable_by(k, descending);
        order.truncate(k);
    }
    order.sort_unstable_by(descending);
    order.truncate(k);
    let picked_values = order.iter().map(|&i| values[i]).collect();
    Ok(TopKResult::new(order, picked_values))
}

/// Draw k unique classes by repeated inverse transform sampling, masking
/// each drawn class and renormalizing. Same ordered law as
/// [`gumbel_topk`].
pub fn sequential_wor(
    c: &CategoricalParams,
    k: usize,
    mut rng: RngState,
) -> Result<(Vec<usize>, RngState), WorError> {
    let support = support_size(c);
    if k > support {
        return Err(WorError::InsufficientSupport { k, support });
    }
    let mut current = c.clone();
    let mut out = Vec::with_capacity(k);
    for round in 0..k {
        let (i, next) = inverse_transform_sample(&current, rng);
        rng = next;
        out.push(i);
        if round + 1 < k {
            current = current
                .with_masked(i)
                .expect("support exceeds draws remaining");
        }
    }
    Ok((out, rng))
}

/// Probability of drawing exactly the ordered sequence `sequence` without
/// replacement: prod_i p(x_i) / (1 - sum_{j<i} p(x_j)).
pub fn plackett_luce_prob(c: &CategoricalParams, sequence: &[usize]) -> Result<f64, WorError> {
    let probs = c.probs();
    let mut seen = alloc::vec![false; c.len()];
    let mut remaining = 1.0;
    let mut prob = 1.0;
    for &x in sequence {
        if x >= c.len() {
            return Err(WorError::IndexOutOfBounds(x));
        }
        if seen[x] {
            return Err(WorError::DuplicateIndex(x));
        }
        seen[x] = true;
        if probs[x] == 0.0 {
            return Ok(0.0);
        }
        prob *= probs[x] / remaining;
        remaining -= probs[x];
    }
    Ok(prob)
}

/// Probability that sampling |S| classes without replacement yields exactly
/// the set `set`, in any order: the sum of Plackett-Luce probabilities over
/// all permutations, exact in O(|S|!).
pub fn unordered_set_prob(c: &CategoricalParams, set: &IndexSubset) -> Result<f64, WorError> {
    if set.len() > SET_ENUMERATION_LIMIT {
        return Err(WorError::EnumerationGuard { size: set.len() });
    }
    let mut elements: Vec<usize> = set.members().to_vec();
    let mut total = 0.0;
    let mut result = Ok(());
    let n = elements.len();
    for_each_permutation(&mut elements, n, &mut |perm| {
        if result.is_ok() {
            match plackett_luce_prob(c, perm) {
                Ok(p) => total += p,
                Err(e) => result = Err(e),
            }
        }
    });
    result.map(|()| total)
}

/// Heap's algorithm; calls `f` with every permutation of `items[..n]`.
fn for_each_permutation(items: &mut [usize], n: usize, f: &mut impl FnMut(&[usize])) {
    if n <= 1 {
        f(items);
        return;
    }
    for i in 0..n {
        for_each_permutation(items, n - 1, f);
        if n.is_multiple_of(2) {
            items.swap(i, n - 1);
        } else {
            items.swap(0, n - 1);
        }
    }
}

/// Sample k unique classes by with-replacement proposals, rejecting
/// duplicates. Returns the set plus the number of proposals spent.
pub fn rejection_wor(
    c: &CategoricalParams,
    k: usize,
    mut rng: RngState,
    max_proposals: usize,
) -> Result<(IndexSubset, usize, RngState), WorError> {
    let support = support_size(c);
    if k > support {
        return Err(WorError::InsufficientSupport { k, support });
    }
    let probs = c.probs();
    let mut seen = alloc::vec![false; c.len()];
    let mut collected = Vec::with_capacity(k);
    let mut proposals = 0usize;
    while collected.len() < k {
        if proposals >= max_proposals {
            collected.sort_unstable();
            return Err(WorError::ProposalsExhausted {
                partial: collected,
                proposals,
            });
        }
        let (u, next) = rng.next_uniform();
        rng = next;
        proposals += 1;
        let i = index_for_uniform(&probs, u);
        if !seen[i] {
            seen[i] = true;
            collected.push(i);
        }
    }
    let set = IndexSubset::new(collected).expect("k >= 1 yields a nonempty set");
    Ok((set, proposals, rng))
}

fn support_size(c: &CategoricalParams) -> usize {
    c.logits().iter().filter(|a| a.is_finite()).count()
}
