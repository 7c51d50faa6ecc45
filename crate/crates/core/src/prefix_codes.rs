//! Prefix code trees: Huffman construction, phased-in codes and the tree
//! metrics P_R, P_L, L_T, L_{T_R}, L_{T_L}.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{Codeword, SourceDistribution, MAX_CODEWORD_BITS};

/// σ = lg lg e + 1 − lg e, the maximum redundancy of a uniform phased-in code.
pub fn sigma() -> f64 {
    let lg_e = std::f64::consts::LOG2_E;
    lg_e.log2() + 1.0 - lg_e
}

/// ⌈lg m⌉ for m ≥ 1.
pub fn ceil_log2(m: usize) -> u32 {
    assert!(m >= 1);
    usize::BITS - (m - 1).leading_zeros()
}

/// ⌊lg m⌋ for m ≥ 1.
pub fn floor_log2(m: usize) -> u32 {
    assert!(m >= 1);
    usize::BITS - 1 - m.leading_zeros()
}

/// A full binary prefix code over symbol indices `0..n`.
///
/// Right branches are bit 1, left branches bit 0. `swapped` records whether
/// the root children were exchanged to get P_R ≥ P_L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTree {
    codewords: Vec<Codeword>,
    swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeMetrics {
    pub p_r: f64,
    pub p_l: f64,
    pub l_t: f64,
    /// Σ_{s∈S_R} p(s)(l_T(s) − 1).
    pub l_tr: f64,
    /// Σ_{s∈S_L} p(s)(l_T(s) − 1).
    pub l_tl: f64,
}

impl CodeTree {
    /// Accepts codewords that form a complete prefix-free set with ≥ 2 leaves.
    pub fn from_codewords(codewords: Vec<Codeword>) -> Result<Self> {
        if codewords.len() < 2 {
            return Err(Error::DegenerateAlphabet(codewords.len()));
        }
        // Trie with (left, right, is_leaf) per node.
        let mut nodes: Vec<([usize; 2], bool)> = vec![([0, 0], false)];
        for c in &codewords {
            let mut cur = 0;
            for i in 0..c.len() {
                if nodes[cur].1 {
                    return Err(Error::MalformedTable(format!("codeword {c} extends a leaf")));
                }
                let b = c.bit(i) as usize;
                if nodes[cur].0[b] == 0 {
                    nodes.push(([0, 0], false));
                    let id = nodes.len() - 1;
                    nodes[cur].0[b] = id;
                }
                cur = nodes[cur].0[b];
            }
            if nodes[cur].1 || nodes[cur].0 != [0, 0] {
                return Err(Error::MalformedTable(format!("codeword {c} is not a leaf")));
            }
            nodes[cur].1 = true;
        }
        if nodes.iter().any(|(ch, leaf)| !leaf && (ch[0] == 0 || ch[1] == 0)) {
            return Err(Error::MalformedTable("code tree is not full".into()));
        }
        Ok(CodeTree { codewords, swapped: false })
    }

    /// Tree with the given lengths, built canonically (shorter codewords first,
    /// ties by index). Lengths must satisfy Kraft equality.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));
        let mut cws = vec![Codeword::EMPTY; lengths.len()];
        let mut code: u128 = 0;
        let mut prev = 0usize;
        for (rank, &i) in order.iter().enumerate() {
            let l = lengths[i];
            if l > MAX_CODEWORD_BITS {
                return Err(Error::CodewordTooLong { max: MAX_CODEWORD_BITS });
            }
            if rank > 0 {
                code = code.checked_add(1).ok_or_else(|| Error::MalformedTable("Kraft sum exceeds 1".into()))?;
            }
            code = code.checked_shl((l - prev) as u32).unwrap_or(0);
            if l < 128 && code >> l != 0 {
                return Err(Error::MalformedTable("Kraft sum exceeds 1".into()));
            }
            cws[i] = Codeword::new(code, l);
            prev = l;
        }
        Self::from_codewords(cws)
    }

    /// Root split over a uniform source: a phased-in subtree of `m_r` leaves on
    /// the right and of `m - m_r` leaves on the left. Items `0..m_r` are right.
    pub fn uniform_split(m: usize, m_r: usize) -> Result<Self> {
        if m < 2 || m_r == 0 || m_r >= m {
            return Err(Error::OutOfRange(format!("split {m_r} of {m}")));
        }
        let right = build_phased_in(m_r, None);
        let left = build_phased_in(m - m_r, None);
        let one = Codeword::parse("1").unwrap();
        let zero = Codeword::parse("0").unwrap();
        let mut cws: Vec<Codeword> = right.codewords.iter().map(|&c| one.concat(c).unwrap()).collect();
        cws.extend(left.codewords.iter().map(|&c| zero.concat(c).unwrap()));
        Self::from_codewords(cws)
    }

    pub fn n_leaves(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn codeword(&self, s: usize) -> Codeword {
        self.codewords[s]
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.codewords.iter().map(Codeword::len).collect()
    }

    pub fn max_len(&self) -> usize {
        self.codewords.iter().map(Codeword::len).max().unwrap_or(0)
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// Whether symbol s lies in the right subtree T_R.
    pub fn is_right(&self, s: usize) -> bool {
        self.codewords[s].bit(0)
    }

    /// l_T(s) with the leading branch bit removed: the codeword in T_R or T_L.
    pub fn subtree_codeword(&self, s: usize) -> Codeword {
        let c = self.codewords[s];
        Codeword::new(c.bits(), c.len() - 1)
    }

    /// Average length Σ p(s) l_T(s).
    pub fn average_length(&self, p: &SourceDistribution) -> f64 {
        p.probs().iter().zip(&self.codewords).map(|(&x, c)| x * c.len() as f64).sum()
    }

    /// Exchanges the root children when P_L > P_R.
    pub fn normalize(mut self, p: &SourceDistribution) -> Self {
        let p_r: f64 = (0..self.n_leaves()).filter(|&s| self.is_right(s)).map(|s| p.prob(s)).sum();
        if p_r < 1.0 - p_r {
            for c in &mut self.codewords {
                let top = 1u128 << (c.len() - 1);
                *c = Codeword::new(c.bits() ^ top, c.len());
            }
            self.swapped = !self.swapped;
        }
        self
    }
}

/// P_R, P_L, L_T and the subtree averages for the tree under p.
pub fn tree_metrics(t: &CodeTree, p: &SourceDistribution) -> Result<TreeMetrics> {
    if t.n_leaves() != p.len() {
        return Err(Error::AlphabetMismatch(format!(
            "tree has {} leaves, source has {} symbols",
            t.n_leaves(),
            p.len()
        )));
    }
    let mut m = TreeMetrics { p_r: 0.0, p_l: 0.0, l_t: 0.0, l_tr: 0.0, l_tl: 0.0 };
    for s in 0..p.len() {
        let w = p.prob(s);
        let l = t.codeword(s).len() as f64;
        m.l_t += w * l;
        if t.is_right(s) {
            m.p_r += w;
            m.l_tr += w * (l - 1.0);
        } else {
            m.p_l += w;
            m.l_tl += w * (l - 1.0);
        }
    }
    Ok(m)
}

#[derive(PartialEq)]
struct Pending {
    weight: f64,
    order: usize,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    // Reversed so the max-heap pops the smallest (weight, order).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Huffman tree over nonnegative weights (at least two items). The node popped
/// first becomes the left child; ties are broken by creation order.
pub fn huffman_from_weights(weights: &[f64]) -> Result<CodeTree> {
    let n = weights.len();
    if n < 2 {
        return Err(Error::DegenerateAlphabet(n));
    }
    // children[i] for internal nodes n.., leaves are 0..n.
    let mut children: Vec<[usize; 2]> = Vec::with_capacity(n - 1);
    let mut heap: BinaryHeap<Pending> =
        weights.iter().enumerate().map(|(i, &w)| Pending { weight: w, order: i, node: i }).collect();
    let mut next = n;
    while heap.len() > 1 {
        let a = heap.pop().unwrap();
        let b = heap.pop().unwrap();
        children.push([a.node, b.node]);
        heap.push(Pending { weight: a.weight + b.weight, order: next, node: next });
        next += 1;
    }
    let root = heap.pop().unwrap().node;
    let mut cws = vec![Codeword::EMPTY; n];
    let mut stack = vec![(root, Codeword::EMPTY)];
    while let Some((node, c)) = stack.pop() {
        if node < n {
            cws[node] = c;
            continue;
        }
        let [l, r] = children[node - n];
        let too_long = || Error::CodewordTooLong { max: MAX_CODEWORD_BITS };
        stack.push((l, c.push(false).ok_or_else(too_long)?));
        stack.push((r, c.push(true).ok_or_else(too_long)?));
    }
    CodeTree::from_codewords(cws)
}

/// Huffman code tree of p, orientation-normalized so that P_R ≥ 0.5.
pub fn build_huffman(p: &SourceDistribution) -> Result<CodeTree> {
    Ok(huffman_from_weights(p.probs())?.normalize(p))
}

/// Phased-in code for M items: 2^k − M codewords of k − 1 bits then
/// 2M − 2^k of k bits, k = ⌈lg M⌉.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasedInCode {
    pub m: usize,
    pub k: u32,
    /// Codeword per item.
    pub codewords: Vec<Codeword>,
}

impl PhasedInCode {
    /// Number of (k−1)-bit codewords.
    pub fn n_short(&self) -> usize {
        n_short(self.m)
    }
}

fn n_short(m: usize) -> usize {
    (1usize << ceil_log2(m)) - m
}

/// The r-th codeword of the canonical phased-in code for M items.
pub fn phased_in_codeword(m: usize, r: usize) -> Codeword {
    let k = ceil_log2(m) as usize;
    let short = n_short(m);
    if r < short {
        Codeword::new(r as u128, k - 1)
    } else {
        Codeword::new((r + short) as u128, k)
    }
}

/// Builds the phased-in code. With `rank_weights`, the short codewords go to
/// the highest-weight items, ties by index; otherwise to the lowest indices.
pub fn build_phased_in(m: usize, rank_weights: Option<&[f64]>) -> PhasedInCode {
    assert!(m >= 1, "phased-in code needs at least one item");
    let mut order: Vec<usize> = (0..m).collect();
    if let Some(w) = rank_weights {
        assert_eq!(w.len(), m, "one weight per item");
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    }
    let mut codewords = vec![Codeword::EMPTY; m];
    for (r, &item) in order.iter().enumerate() {
        codewords[item] = phased_in_codeword(m, r);
    }
    PhasedInCode { m, k: ceil_log2(m), codewords }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasedInStats {
    /// Average length under Q (uniform when Q is absent).
    pub l_pi: f64,
    /// μ_pi(M) = k + 1 − 2^k/M − lg M.
    pub mu_pi: f64,
    /// ν_{M,Q} = Q̂ − (2^k − M)/M; zero in the uniform case.
    pub nu: f64,
}

/// Uniform-source phased-in length k + 1 − 2^k/M, i.e. L_H(M).
pub fn uniform_huffman_length(m: usize) -> f64 {
    if m == 1 {
        return 0.0;
    }
    let k = ceil_log2(m);
    k as f64 + 1.0 - (1u64 << k) as f64 / m as f64
}

/// μ_pi(M), the redundancy of the uniform phased-in code.
pub fn mu_pi(m: usize) -> f64 {
    (uniform_huffman_length(m) - (m as f64).log2()).max(0.0)
}

/// Phased-in length statistics; the short codewords go to the largest Q.
pub fn phased_in_stats(m: usize, q: Option<&[f64]>) -> Result<PhasedInStats> {
    if m == 0 {
        return Err(Error::OutOfRange("phased-in code needs M ≥ 1".into()));
    }
    let mu = mu_pi(m);
    let Some(q) = q else {
        return Ok(PhasedInStats { l_pi: uniform_huffman_length(m), mu_pi: mu, nu: 0.0 });
    };
    if q.len() != m {
        return Err(Error::InvalidWeight { symbol: q.len() as u32, weight: f64::NAN });
    }
    if let Some((i, &w)) = q.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeight { symbol: i as u32, weight: w });
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeight { symbol: 0, weight: total });
    }
    let mut sorted = q.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let short = n_short(m);
    let q_hat: f64 = sorted[..short].iter().sum();
    let nu = q_hat - short as f64 / m as f64;
    let k = ceil_log2(m) as f64;
    Ok(PhasedInStats { l_pi: k - q_hat, mu_pi: mu, nu })
}
