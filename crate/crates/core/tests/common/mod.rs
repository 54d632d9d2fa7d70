//! Shared helpers for the distributional test suites.
#![allow(dead_code)]

use gumbel_core::{CategoricalParams, RngState};

/// Draw n standard Gumbel variates, advancing the stream.
pub fn standard_gumbels(n: usize, rng: &mut RngState) -> Vec<f64> {
    let g = gumbel_core::GumbelParams::standard();
    (0..n)
        .map(|_| {
            let (u, next) = rng.next_uniform();
            *rng = next;
            g.icdf(u).unwrap()
        })
        .collect()
}

pub fn next_uniform(rng: &mut RngState) -> f64 {
    let (u, next) = rng.next_uniform();
    *rng = next;
    u
}

/// A categorical with logits uniform on [-2, 2], N classes.
pub fn random_categorical(n: usize, rng: &mut RngState) -> CategoricalParams {
    let logits: Vec<f64> = (0..n).map(|_| 4.0 * next_uniform(rng) - 2.0).collect();
    CategoricalParams::new(logits, 1.0).unwrap()
}

pub fn histogram(indices: impl IntoIterator<Item = usize>, n_bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; n_bins];
    for i in indices {
        h[i] += 1;
    }
    h
}

/// Radix-encode an ordered index sequence over a domain of size n.
pub fn sequence_code(seq: &[usize], n: usize) -> usize {
    seq.iter().fold(0, |acc, &i| acc * n + i)
}

/// All ordered k-sequences of distinct indices from {0, .., n-1}.
pub fn all_sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, buf: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if buf.len() == k {
            out.push(buf.clone());
            return;
        }
        for i in 0..n {
            if !buf.contains(&i) {
                buf.push(i);
                rec(n, k, buf, out);
                buf.pop();
            }
        }
    }
    rec(n, k, &mut buf, &mut out);
    out
}

/// All k-subsets of {0, .., n-1}, each sorted.
pub fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if buf.len() == k {
            out.push(buf.clone());
            return;
        }
        for i in start..n {
            buf.push(i);
            rec(i + 1, n, k, buf, out);
            buf.pop();
        }
    }
    rec(0, n, k, &mut buf, &mut out);
    out
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
