#![allow(dead_code)]

use aeds_core::codec::ergodicity;
use aeds_core::constructors::*;
use aeds_core::prefix_codes::{build_huffman, huffman_from_weights};
use aeds_core::tans::{build_tans, quantize_counts, tans_to_aeds, SpreadPolicy, TansTable};
use aeds_core::{AedsTable, SourceDistribution};
use rand::Rng;

pub const SIX: [f64; 6] = [0.35, 0.15, 0.15, 0.15, 0.1, 0.1];

pub fn six() -> SourceDistribution {
    SourceDistribution::from_weights(&SIX).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    TreeCode,
    Type1,
    Type2,
    HuffmanMatching,
    Case1,
    Case2,
    Case3,
    LargeN,
    Tans,
    Reoptimized,
}

pub const ALL_KINDS: [Kind; 10] = [
    Kind::TreeCode,
    Kind::Type1,
    Kind::Type2,
    Kind::HuffmanMatching,
    Kind::Case1,
    Kind::Case2,
    Kind::Case3,
    Kind::LargeN,
    Kind::Tans,
    Kind::Reoptimized,
];

pub fn random_source<R: Rng>(rng: &mut R, min: usize, max: usize) -> SourceDistribution {
    let m = rng.random_range(min..=max);
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.02..1.0)).collect();
    SourceDistribution::from_weights(&w).unwrap()
}

/// Random composition of n into m positive parts.
pub fn random_counts<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<usize> {
    let mut c = vec![1usize; m];
    for _ in 0..n - m {
        c[rng.random_range(0..m)] += 1;
    }
    c
}

/// Counts with every N/N_s an integer: start from {1} and repeatedly split a
/// ratio M into k copies of kM.
pub fn integer_ratio_counts<R: Rng>(rng: &mut R, max_symbols: usize, max_n: usize) -> Vec<usize> {
    loop {
        let mut ratios = vec![1usize];
        let target = rng.random_range(2..=max_symbols);
        while ratios.len() < target {
            let i = rng.random_range(0..ratios.len());
            let k = rng.random_range(2..=3);
            if ratios.len() + k - 1 > max_symbols {
                break;
            }
            let r = ratios.remove(i) * k;
            ratios.extend(std::iter::repeat_n(r, k));
        }
        if ratios.len() < 2 {
            continue;
        }
        let n = ratios.iter().fold(1usize, |a, &b| lcm(a, b));
        let scale = rng.random_range(1..=4);
        if n * scale > max_n {
            continue;
        }
        return ratios.iter().map(|&r| n * scale / r).collect();
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A random tree over p's alphabet, from Huffman on unrelated weights.
pub fn random_tree<R: Rng>(rng: &mut R, m: usize) -> aeds_core::prefix_codes::CodeTree {
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
    huffman_from_weights(&w).unwrap()
}

pub fn random_tans<R: Rng>(rng: &mut R) -> (TansTable, SourceDistribution) {
    let p = random_source(rng, 2, 8);
    let k = rng.random_range(3..=8);
    let n = (1usize << k).max(p.len().next_power_of_two());
    let policy = if rng.random_bool(0.5) { SpreadPolicy::SortedInterval } else { SpreadPolicy::Stride };
    (build_tans(&p, n, policy).unwrap(), p)
}

/// One random table of the given kind with the source it was built for.
pub fn random_table<R: Rng>(rng: &mut R, kind: Kind) -> (AedsTable, SourceDistribution) {
    loop {
        let p = random_source(rng, 2, 8);
        let m = p.len();
        let t = match kind {
            Kind::TreeCode => build_tree_code(&random_tree(rng, m), &p),
            Kind::Type1 => {
                let n = rng.random_range(2..=16);
                if rng.random_bool(0.5) {
                    build_type1(&build_huffman(&p).unwrap(), &p, n)
                } else {
                    build_type1(&random_tree(rng, m), &p, n)
                }
            }
            Kind::Type2 => build_type2(&random_tree(rng, m), &p),
            Kind::HuffmanMatching => build_huffman_matching_saeds(&p, 1 << 10),
            Kind::Case1 => {
                let counts = integer_ratio_counts(rng, 8, 256);
                let p = random_source_of_len(rng, counts.len());
                let t = build_saeds_case1(&p, &counts);
                return (t.unwrap(), p);
            }
            Kind::Case2 => {
                let n = rng.random_range(m..=m * 12);
                build_saeds_case2(&p, &random_counts(rng, m, n))
            }
            Kind::Case3 => {
                let n = (1usize << rng.random_range(1..=8)).max(m.next_power_of_two());
                build_saeds_case3(&p, &random_counts(rng, m, n))
            }
            Kind::LargeN => {
                let n = rng.random_range(m.max(8)..=300);
                let counts = if rng.random_bool(0.5) {
                    quantize_counts(&p, n).unwrap()
                } else {
                    random_counts(rng, m, n)
                };
                build_large_n(&p, &counts).map(|(t, _)| t)
            }
            Kind::Tans => {
                let (t, p) = random_tans(rng);
                return (tans_to_aeds(&t), p);
            }
            Kind::Reoptimized => {
                let t = build_type1(&build_huffman(&p).unwrap(), &p, rng.random_range(2..=6)).unwrap();
                reoptimize_codes(&t, &p)
            }
        };
        match t {
            Ok(t) => return (t, p),
            Err(aeds_core::Error::StateBudgetExceeded { .. }) => continue,
            Err(e) => panic!("{kind:?}: {e}"),
        }
    }
}

pub fn random_source_of_len<R: Rng>(rng: &mut R, m: usize) -> SourceDistribution {
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.02..1.0)).collect();
    SourceDistribution::from_weights(&w).unwrap()
}

/// Like [`random_table`] but retries until the encoding chain is ergodic.
pub fn random_ergodic_table<R: Rng>(rng: &mut R, kind: Kind) -> (AedsTable, SourceDistribution) {
    loop {
        let (t, p) = random_table(rng, kind);
        if ergodicity(&t).is_ergodic() {
            return (t, p);
        }
    }
}

pub fn random_sequence<R: Rng>(rng: &mut R, m: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..m)).collect()
}
