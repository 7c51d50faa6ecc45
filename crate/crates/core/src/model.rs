//! Core domain types: symbols, source distributions, codewords, AEDS tables
//! and the per-symbol state partition of state-divided tables.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on the probability sum of a distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Opaque symbol identifier. Byte alphabets use `Symbol(0..=255)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Memoryless source: an ordered alphabet with strictly positive probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    symbols: Vec<Symbol>,
    probs: Vec<f64>,
}

/// Normalizes raw weights into a distribution; order is preserved.
pub fn validate_distribution(raw: &[(Symbol, f64)]) -> Result<SourceDistribution> {
    let mut seen = std::collections::HashSet::new();
    for &(s, w) in raw {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeight { symbol: s.0, weight: w });
        }
        if !seen.insert(s) {
            return Err(Error::DuplicateSymbol(s.0));
        }
    }
    let positive: Vec<(Symbol, f64)> = raw.iter().copied().filter(|&(_, w)| w > 0.0).collect();
    if positive.len() < 2 {
        return Err(Error::DegenerateAlphabet(positive.len()));
    }
    let total: f64 = positive.iter().map(|&(_, w)| w).sum();
    Ok(SourceDistribution {
        symbols: positive.iter().map(|&(s, _)| s).collect(),
        probs: positive.iter().map(|&(_, w)| w / total).collect(),
    })
}

impl SourceDistribution {
    /// Distribution over `Symbol(0)..Symbol(n-1)` from raw weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let raw: Vec<(Symbol, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (Symbol(i as u32), w))
            .collect();
        if let Some(&(s, w)) = raw.iter().find(|&&(_, w)| w == 0.0) {
            // Zero weights would silently renumber the alphabet here.
            return Err(Error::InvalidWeight { symbol: s.0, weight: w });
        }
        validate_distribution(&raw)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; m])
    }

    /// Byte histogram; bytes that never occur are dropped from the alphabet.
    pub fn from_byte_counts(counts: &[u64; 256]) -> Result<Self> {
        let raw: Vec<(Symbol, f64)> = counts
            .iter()
            .enumerate()
            .map(|(b, &c)| (Symbol(b as u32), c as f64))
            .collect();
        validate_distribution(&raw)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.symbols.iter().position(|&t| t == s)
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// H(p) in bits per symbol.
pub fn entropy(p: &SourceDistribution) -> f64 {
    p.probs.iter().map(|&x| -x * x.log2()).sum()
}

/// D(p‖q) in bits; both distributions must share the same ordered alphabet.
pub fn relative_entropy(p: &SourceDistribution, q: &SourceDistribution) -> Result<f64> {
    if p.symbols != q.symbols {
        return Err(Error::AlphabetMismatch(format!(
            "{} symbols vs {} symbols",
            p.len(),
            q.len()
        )));
    }
    Ok(p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(&a, &b)| a * (a / b).log2())
        .sum::<f64>()
        .max(0.0))
}

/// Maximum codeword length representable by [`Codeword`].
pub const MAX_CODEWORD_BITS: usize = 128;

/// A finite bit string, MSB-first: bit 0 is the most significant of the `len` low bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Codeword {
    bits: u128,
    len: u8,
}

impl Codeword {
    /// The empty codeword λ.
    pub const EMPTY: Codeword = Codeword { bits: 0, len: 0 };

    /// `len` low bits of `bits`. Panics if `len > 128`.
    pub fn new(bits: u128, len: usize) -> Self {
        assert!(len <= MAX_CODEWORD_BITS, "codeword too long");
        let mask = if len == 128 { u128::MAX } else { (1u128 << len) - 1 };
        Codeword { bits: bits & mask, len: len as u8 }
    }

    /// Parses a string of '0'/'1'. Returns `None` on other characters.
    pub fn parse(s: &str) -> Option<Self> {
        let mut c = Codeword::EMPTY;
        for ch in s.chars() {
            c = c.push(match ch {
                '0' => false,
                '1' => true,
                _ => return None,
            })?;
        }
        Some(c)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    /// Bit `i` counted from the front.
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn push(self, bit: bool) -> Option<Self> {
        if self.len() == MAX_CODEWORD_BITS {
            return None;
        }
        Some(Codeword { bits: (self.bits << 1) | bit as u128, len: self.len + 1 })
    }

    pub fn concat(self, other: Codeword) -> Option<Self> {
        let len = self.len() + other.len();
        if len > MAX_CODEWORD_BITS {
            return None;
        }
        let hi = if other.len() == 128 { 0 } else { self.bits << other.len() };
        Some(Codeword { bits: hi | other.bits, len: len as u8 })
    }

    pub fn is_prefix_of(&self, other: &Codeword) -> bool {
        if self.len == 0 {
            return true;
        }
        self.len <= other.len && (other.bits >> (other.len - self.len)) == self.bits
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "λ");
        }
        for i in 0..self.len() {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

/// One encoder cell: β = E_x̂(s) and x = F⁻_x̂(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderEntry {
    pub codeword: Codeword,
    pub next: usize,
}

/// One decoder cell at state x: β ↦ (D_x(β), F⁺_x(β)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderEntry {
    pub codeword: Codeword,
    pub symbol: usize,
    pub next: usize,
}

const NO_LEAF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TrieNode {
    child: [u32; 2],
    leaf: u32,
}

impl TrieNode {
    const EMPTY: TrieNode = TrieNode { child: [0, 0], leaf: NO_LEAF };
}

/// Result of one trie step in [`AedsTable::trie_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrieStep {
    Inner(u32),
    Leaf(DecoderEntry),
    Dead,
}

/// A complete AEDS: per-state encoder maps over the whole alphabet together
/// with the derived per-state prefix-free decoder maps.
///
/// States are dense indices `0..N`; symbols are referenced by their index in
/// [`AedsTable::alphabet`].
#[derive(Debug, Clone, PartialEq)]
pub struct AedsTable {
    n_states: usize,
    alphabet: Vec<Symbol>,
    state_names: Option<Vec<String>>,
    encoder: Vec<EncoderEntry>,
    decoder: Vec<Vec<DecoderEntry>>,
    trie: Vec<TrieNode>,
    roots: Vec<u32>,
}

impl AedsTable {
    /// Builds the table from the encoder side; `encoder[x̂ * |S| + s]`.
    /// Checks ranges and per-state prefix-freeness of the derived decoder sets.
    pub fn from_encoder(
        alphabet: Vec<Symbol>,
        n_states: usize,
        encoder: Vec<EncoderEntry>,
    ) -> Result<Self> {
        let m = alphabet.len();
        if m == 0 {
            return Err(Error::DegenerateAlphabet(0));
        }
        if n_states == 0 {
            return Err(Error::TooFewStates { needed: 1, got: 0 });
        }
        if encoder.len() != n_states * m {
            let x = encoder.len() / m;
            return Err(Error::MissingSymbol { state: x.min(n_states - 1), symbol: encoder.len() % m });
        }
        let mut decoder = vec![Vec::new(); n_states];
        for (i, e) in encoder.iter().enumerate() {
            if e.next >= n_states {
                return Err(Error::StateOutOfRange { next: e.next, n_states });
            }
            decoder[e.next].push(DecoderEntry { codeword: e.codeword, symbol: i % m, next: i / m });
        }
        for d in &mut decoder {
            d.sort_by_key(|e| (e.codeword.len(), e.codeword.bits()));
        }
        let (trie, roots) = build_trie(&decoder, m)?;
        Ok(AedsTable { n_states, alphabet, state_names: None, encoder, decoder, trie, roots })
    }

    /// Builds the table from explicit encoder and decoder maps and checks
    /// that they describe the same bijection (x̂, s) ↔ (x, β).
    pub fn from_parts(
        alphabet: Vec<Symbol>,
        n_states: usize,
        encoder: Vec<EncoderEntry>,
        decoder: Vec<Vec<DecoderEntry>>,
    ) -> Result<Self> {
        let table = Self::from_encoder(alphabet, n_states, encoder)?;
        let m = table.alphabet.len();
        if decoder.len() != n_states {
            return Err(Error::MalformedTable(format!(
                "decoder has {} states, encoder {}",
                decoder.len(),
                n_states
            )));
        }
        let mut used = vec![false; n_states * m];
        for (x, entries) in decoder.iter().enumerate() {
            for d in entries {
                if d.next >= n_states || d.symbol >= m {
                    return Err(Error::StateOutOfRange { next: d.next, n_states });
                }
                let idx = d.next * m + d.symbol;
                let e = table.encoder[idx];
                if used[idx] || e.next != x || e.codeword != d.codeword {
                    return Err(Error::InconsistentTables { state: d.next, symbol: d.symbol });
                }
                used[idx] = true;
            }
        }
        if let Some(idx) = used.iter().position(|&u| !u) {
            return Err(Error::InconsistentTables { state: idx / m, symbol: idx % m });
        }
        Ok(table)
    }

    pub fn with_state_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_states {
            return Err(Error::MalformedTable(format!(
                "{} names for {} states",
                names.len(),
                self.n_states
            )));
        }
        self.state_names = Some(names);
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn symbol_index(&self, s: Symbol) -> Option<usize> {
        self.alphabet.iter().position(|&t| t == s)
    }

    pub fn state_names(&self) -> Option<&[String]> {
        self.state_names.as_deref()
    }

    pub fn state_name(&self, x: usize) -> String {
        match &self.state_names {
            Some(n) => n[x].clone(),
            None => x.to_string(),
        }
    }

    /// (E_x̂(s), F⁻_x̂(s)).
    pub fn encode_entry(&self, state: usize, symbol: usize) -> EncoderEntry {
        self.encoder[state * self.alphabet.len() + symbol]
    }

    pub fn encoder_entries(&self) -> &[EncoderEntry] {
        &self.encoder
    }

    /// The decoder map at state x, sorted by (length, bits).
    pub fn decoder_entries(&self, state: usize) -> &[DecoderEntry] {
        &self.decoder[state]
    }

    /// B^(D)_x as a codeword list.
    pub fn decoding_codewords(&self, state: usize) -> Vec<Codeword> {
        self.decoder[state].iter().map(|d| d.codeword).collect()
    }

    /// Kraft sum of B^(D)_x.
    pub fn kraft_sum(&self, state: usize) -> f64 {
        self.decoder[state].iter().map(|d| (-(d.codeword.len() as f64)).exp2()).sum()
    }

    pub fn max_codeword_len(&self) -> usize {
        self.encoder.iter().map(|e| e.codeword.len()).max().unwrap_or(0)
    }

    /// Trie root of state x.
    pub fn trie_root(&self, state: usize) -> u32 {
        self.roots[state]
    }

    /// Leaf test at a node, used for the empty codeword at the root.
    pub fn trie_leaf(&self, node: u32) -> Option<DecoderEntry> {
        let n = &self.trie[node as usize];
        (n.leaf != NO_LEAF).then(|| self.leaf_entry(n.leaf))
    }

    /// Descends one bit from `node`.
    pub fn trie_step(&self, node: u32, bit: bool) -> TrieStep {
        let c = self.trie[node as usize].child[bit as usize];
        if c == 0 {
            return TrieStep::Dead;
        }
        let n = &self.trie[c as usize];
        if n.leaf != NO_LEAF {
            TrieStep::Leaf(self.leaf_entry(n.leaf))
        } else {
            TrieStep::Inner(c)
        }
    }

    fn leaf_entry(&self, leaf: u32) -> DecoderEntry {
        let idx = leaf as usize;
        let m = self.alphabet.len();
        let e = self.encoder[idx];
        DecoderEntry { codeword: e.codeword, symbol: idx % m, next: idx / m }
    }
}

/// Packs all decoder sets into one node arena. Leaves store the encoder index.
fn build_trie(decoder: &[Vec<DecoderEntry>], m: usize) -> Result<(Vec<TrieNode>, Vec<u32>)> {
    let mut nodes = vec![TrieNode::EMPTY];
    let mut roots = Vec::with_capacity(decoder.len());
    for (x, entries) in decoder.iter().enumerate() {
        let root = nodes.len() as u32;
        nodes.push(TrieNode::EMPTY);
        roots.push(root);
        let mut owner: std::collections::HashMap<u32, Codeword> = std::collections::HashMap::new();
        for d in entries {
            let leaf_id = (d.next * m + d.symbol) as u32;
            let mut cur = root;
            for i in 0..d.codeword.len() {
                if nodes[cur as usize].leaf != NO_LEAF {
                    return Err(Error::PrefixViolation {
                        state: x,
                        first: owner[&cur],
                        second: d.codeword,
                    });
                }
                let b = d.codeword.bit(i) as usize;
                let next = nodes[cur as usize].child[b];
                cur = if next == 0 {
                    let id = nodes.len() as u32;
                    nodes.push(TrieNode::EMPTY);
                    nodes[cur as usize].child[b] = id;
                    id
                } else {
                    next
                };
            }
            let node = nodes[cur as usize];
            if node.leaf != NO_LEAF {
                return Err(Error::PrefixViolation { state: x, first: owner[&cur], second: d.codeword });
            }
            if node.child != [0, 0] {
                let longer = entries
                    .iter()
                    .find(|o| o.codeword != d.codeword && d.codeword.is_prefix_of(&o.codeword))
                    .map(|o| o.codeword)
                    .unwrap_or(d.codeword);
                return Err(Error::PrefixViolation { state: x, first: d.codeword, second: longer });
            }
            nodes[cur as usize].leaf = leaf_id;
            owner.insert(cur, d.codeword);
        }
    }
    Ok((nodes, roots))
}

/// Per-symbol state subsets 𝒳_s of a state-divided table together with the
/// forward sets ℱ⁺_x.
#[derive(Debug, Clone, PartialEq)]
pub struct SAedsPartition {
    owner: Vec<usize>,
    subsets: Vec<Vec<usize>>,
    forward: Vec<Vec<usize>>,
}

impl SAedsPartition {
    /// Succeeds iff every state is reached by exactly one symbol and every
    /// symbol owns at least one state.
    pub fn from_table(table: &AedsTable) -> Result<Self> {
        let m = table.n_symbols();
        let mut owner = vec![usize::MAX; table.n_states()];
        let mut subsets = vec![Vec::new(); m];
        let mut forward = vec![Vec::new(); table.n_states()];
        for x in 0..table.n_states() {
            let entries = table.decoder_entries(x);
            let Some(first) = entries.first() else {
                return Err(Error::KindMismatch(format!("state {x} is never entered")));
            };
            if entries.iter().any(|d| d.symbol != first.symbol) {
                return Err(Error::KindMismatch(format!("state {x} is entered by several symbols")));
            }
            owner[x] = first.symbol;
            subsets[first.symbol].push(x);
            let mut f: Vec<usize> = entries.iter().map(|d| d.next).collect();
            f.sort_unstable();
            forward[x] = f;
        }
        if let Some(s) = subsets.iter().position(|v| v.is_empty()) {
            return Err(Error::KindMismatch(format!("symbol index {s} owns no state")));
        }
        Ok(SAedsPartition { owner, subsets, forward })
    }

    /// Symbol index owning state x.
    pub fn owner(&self, x: usize) -> usize {
        self.owner[x]
    }

    /// 𝒳_s, ascending.
    pub fn subset(&self, s: usize) -> &[usize] {
        &self.subsets[s]
    }

    /// N_s for every symbol.
    pub fn counts(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }

    /// ℱ⁺_x, ascending.
    pub fn forward_set(&self, x: usize) -> &[usize] {
        &self.forward[x]
    }

    /// q(s) = N_s / N as a distribution on the given alphabet.
    pub fn ratio_distribution(&self, alphabet: &[Symbol]) -> Result<SourceDistribution> {
        let raw: Vec<(Symbol, f64)> = alphabet
            .iter()
            .zip(&self.subsets)
            .map(|(&s, v)| (s, v.len() as f64))
            .collect();
        validate_distribution(&raw)
    }

    /// Re-checks the partition invariants: disjoint covering subsets and, per
    /// symbol, forward sets that partition the state set.
    pub fn check(&self) -> bool {
        let n = self.owner.len();
        let mut seen = vec![false; n];
        for (s, sub) in self.subsets.iter().enumerate() {
            if sub.is_empty() {
                return false;
            }
            let mut cover = vec![false; n];
            for &x in sub {
                if seen[x] || self.owner[x] != s || self.forward[x].is_empty() {
                    return false;
                }
                seen[x] = true;
                for &xh in &self.forward[x] {
                    if cover[xh] {
                        return false;
                    }
                    cover[xh] = true;
                }
            }
            if cover.iter().any(|&c| !c) {
                return false;
            }
        }
        seen.iter().all(|&c| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(c: char) -> Symbol {
        Symbol(c as u32)
    }

    #[test]
    fn normalizes_weights() {
        let p = validate_distribution(&[(sym('a'), 3.0), (sym('b'), 1.0)]).unwrap();
        assert_eq!(p.probs(), &[0.75, 0.25]);
        let p = validate_distribution(&[(sym('a'), 1.0), (sym('b'), 1.0)]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn six_symbol_source() {
        let w = [0.35, 0.15, 0.15, 0.15, 0.1, 0.1];
        let raw: Vec<_> = "abcdef".chars().zip(w).map(|(c, w)| (sym(c), w)).collect();
        let p = validate_distribution(&raw).unwrap();
        assert_eq!(p.len(), 6);
        assert!((p.prob(0) - 0.35).abs() < 1e-15);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < SUM_TOLERANCE);
    }

    #[test]
    fn rejects_bad_weights() {
        assert_eq!(
            validate_distribution(&[(Symbol(0), 1.0)]),
            Err(Error::DegenerateAlphabet(1))
        );
        assert_eq!(
            validate_distribution(&[(Symbol(0), 1.0), (Symbol(1), 0.0)]),
            Err(Error::DegenerateAlphabet(1))
        );
        assert!(matches!(
            validate_distribution(&[(Symbol(0), 1.0), (Symbol(1), -0.5)]),
            Err(Error::InvalidWeight { symbol: 1, .. })
        ));
        assert_eq!(
            validate_distribution(&[(Symbol(0), 1.0), (Symbol(0), 1.0)]),
            Err(Error::DuplicateSymbol(0))
        );
    }

    #[test]
    fn entropy_values() {
        assert!((SourceDistribution::uniform(4).unwrap().entropy() - 2.0).abs() < 1e-15);
        let p = SourceDistribution::from_weights(&[0.5, 0.25, 0.25]).unwrap();
        assert!((p.entropy() - 1.5).abs() < 1e-15);
        let p = SourceDistribution::from_weights(&[0.8, 0.2]).unwrap();
        let h = -(0.8f64 * 0.8f64.log2() + 0.2 * 0.2f64.log2());
        assert!((p.entropy() - h).abs() < 1e-15);
        assert!((p.entropy() - 0.721928).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_values() {
        let a = SourceDistribution::from_weights(&[0.75, 0.25]).unwrap();
        let b = SourceDistribution::from_weights(&[0.5, 0.5]).unwrap();
        assert_eq!(relative_entropy(&b, &b).unwrap(), 0.0);
        let d1 = 0.75 * (1.5f64).log2() + 0.25 * (0.5f64).log2();
        assert!((relative_entropy(&a, &b).unwrap() - d1).abs() < 1e-15);
        assert!((relative_entropy(&a, &b).unwrap() - 0.188722).abs() < 1e-6);
        let d2 = 0.5 * (0.5f64 / 0.75).log2() + 0.5 * (0.5f64 / 0.25).log2();
        assert!((relative_entropy(&b, &a).unwrap() - d2).abs() < 1e-15);
        assert!((relative_entropy(&b, &a).unwrap() - 0.207518).abs() < 1e-6);
        let c = SourceDistribution::uniform(3).unwrap();
        assert!(matches!(relative_entropy(&a, &c), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn codeword_ops() {
        let c = Codeword::parse("110").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.to_string(), "110");
        assert_eq!(Codeword::EMPTY.to_string(), "λ");
        assert!(Codeword::parse("11").unwrap().is_prefix_of(&c));
        assert!(!Codeword::parse("10").unwrap().is_prefix_of(&c));
        assert!(Codeword::EMPTY.is_prefix_of(&c));
        assert!(!c.is_prefix_of(&Codeword::parse("11").unwrap()));
        let d = Codeword::parse("01").unwrap();
        assert_eq!(c.concat(d).unwrap().to_string(), "11001");
        assert!(Codeword::parse("1x").is_none());
        let long = Codeword::new(u128::MAX, 128);
        assert!(long.push(true).is_none());
        assert_eq!(Codeword::EMPTY.concat(long).unwrap(), long);
    }

    fn entry(bits: &str, next: usize) -> EncoderEntry {
        EncoderEntry { codeword: Codeword::parse(bits).unwrap(), next }
    }

    #[test]
    fn prefix_violation_detected() {
        let err = AedsTable::from_encoder(vec![Symbol(0), Symbol(1)], 1, vec![entry("0", 0), entry("01", 0)])
            .unwrap_err();
        assert!(matches!(err, Error::PrefixViolation { state: 0, .. }));
        let err = AedsTable::from_encoder(vec![Symbol(0), Symbol(1)], 1, vec![entry("01", 0), entry("0", 0)])
            .unwrap_err();
        assert!(matches!(err, Error::PrefixViolation { state: 0, .. }));
        let err = AedsTable::from_encoder(vec![Symbol(0), Symbol(1)], 1, vec![entry("1", 0), entry("1", 0)])
            .unwrap_err();
        assert!(matches!(err, Error::PrefixViolation { state: 0, .. }));
    }

    #[test]
    fn missing_and_out_of_range() {
        let err = AedsTable::from_encoder(vec![Symbol(0), Symbol(1)], 1, vec![entry("0", 0)]).unwrap_err();
        assert!(matches!(err, Error::MissingSymbol { state: 0, symbol: 1 }));
        let err = AedsTable::from_encoder(vec![Symbol(0), Symbol(1)], 1, vec![entry("0", 0), entry("1", 3)])
            .unwrap_err();
        assert!(matches!(err, Error::StateOutOfRange { next: 3, .. }));
    }

    #[test]
    fn from_parts_consistency() {
        let alphabet = vec![Symbol(0), Symbol(1)];
        let enc = vec![entry("0", 0), entry("1", 0)];
        let good = vec![vec![
            DecoderEntry { codeword: Codeword::parse("0").unwrap(), symbol: 0, next: 0 },
            DecoderEntry { codeword: Codeword::parse("1").unwrap(), symbol: 1, next: 0 },
        ]];
        assert!(AedsTable::from_parts(alphabet.clone(), 1, enc.clone(), good).is_ok());
        let bad = vec![vec![
            DecoderEntry { codeword: Codeword::parse("0").unwrap(), symbol: 0, next: 0 },
            DecoderEntry { codeword: Codeword::parse("1").unwrap(), symbol: 0, next: 0 },
        ]];
        assert!(matches!(
            AedsTable::from_parts(alphabet, 1, enc, bad),
            Err(Error::InconsistentTables { state: 0, symbol: 0 })
        ));
    }
}
