//! Random token streams with a verbatim copy of part of one stream planted
//! inside another.

use rand::Rng;

pub struct Plant {
    /// The source file `F`.
    pub source: Vec<String>,
    /// The planted run, a contiguous slice of `source`.
    pub plant: Vec<String>,
    /// The host file `G` containing `plant`.
    pub host: Vec<String>,
}

/// Small vocabulary so that accidental gram repeats actually happen.
pub fn random_tokens(rng: &mut impl Rng, len: usize) -> Vec<String> {
    const VOCAB: &[&str] = &[
        "if", "(", ")", "{", "}", "x", "y", "i", "=", "+", ";", "return", "0", "1", "f", "[", "]",
        "while", "<", "n",
    ];
    (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string()).collect()
}

/// `F` of 50..=500 tokens; at least 10% of it planted into a fresh `G`.
pub fn planted_case(rng: &mut impl Rng, k: usize) -> Plant {
    let n = rng.gen_range(50..=500);
    let source = random_tokens(rng, n);
    let min = n.div_ceil(10).max(k);
    let p = rng.gen_range(min..=(n / 3).max(min));
    let start = rng.gen_range(0..=n - p);
    let plant = source[start..start + p].to_vec();
    let host_len = rng.gen_range(0..300);
    let mut host = random_tokens(rng, host_len);
    let at = rng.gen_range(0..=host.len());
    host.splice(at..at, plant.iter().cloned());
    Plant { source, plant, host }
}
