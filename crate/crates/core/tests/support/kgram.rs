//! Brute-force k-gram containment over token strings, with no hashing.

use std::collections::BTreeMap;

pub fn grams(tokens: &[String], k: usize) -> Vec<Vec<String>> {
    if tokens.len() < k {
        return Vec::new();
    }
    (0..=tokens.len() - k).map(|i| tokens[i..i + k].to_vec()).collect()
}

/// |multiset(needle grams) ∩ multiset(hay grams)| / |needle grams|.
pub fn containment(needle: &[String], hay: &[String], k: usize) -> f64 {
    let n = grams(needle, k);
    assert!(!n.is_empty());
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for g in grams(hay, k) {
        *counts.entry(g).or_default() += 1;
    }
    let mut hit = 0usize;
    for g in &n {
        if let Some(c) = counts.get_mut(g) {
            if *c > 0 {
                *c -= 1;
                hit += 1;
            }
        }
    }
    hit as f64 / n.len() as f64
}
