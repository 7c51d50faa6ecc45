//! Table builders: Type-I and Type-II tables from a code tree, the
//! Huffman-matching state-divided table, sAEDS Cases 1–3, the large-N layout,
//! and the optimal root split for uniform sources.

use std::ops::Range;

use crate::analysis::{delta_type1, delta_type2, solve_stationary};
use crate::codec::ergodicity;
use crate::error::{Error, Result};
use crate::model::{AedsTable, Codeword, EncoderEntry, SourceDistribution, Symbol, MAX_CODEWORD_BITS};
use crate::prefix_codes::{
    build_huffman, build_phased_in, ceil_log2, floor_log2, uniform_huffman_length, CodeTree,
};

fn too_long() -> Error {
    Error::CodewordTooLong { max: MAX_CODEWORD_BITS }
}

fn cat(a: Codeword, b: Codeword) -> Result<Codeword> {
    a.concat(b).ok_or_else(too_long)
}

fn bits(s: &str) -> Codeword {
    Codeword::parse(s).expect("literal codeword")
}

fn alpha_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("α{i}")).collect()
}

fn check_tree(t: &CodeTree, p: &SourceDistribution) -> Result<CodeTree> {
    if t.n_leaves() != p.len() {
        return Err(Error::AlphabetMismatch(format!(
            "tree has {} leaves, source has {} symbols",
            t.n_leaves(),
            p.len()
        )));
    }
    Ok(t.clone().normalize(p))
}

/// The five-state, three-symbol example table over a, b, c with states α1..α5.
pub fn worked_example_table() -> AedsTable {
    let rows: [[(&str, usize); 3]; 5] = [
        [("0", 3), ("111", 1), ("00", 0)],
        [("10", 3), ("", 2), ("01", 0)],
        [("110", 3), ("110", 1), ("111", 0)],
        [("", 4), ("10", 1), ("10", 0)],
        [("111", 3), ("0", 1), ("110", 0)],
    ];
    let enc = rows
        .iter()
        .flatten()
        .map(|&(c, next)| EncoderEntry { codeword: bits(c), next })
        .collect();
    let alphabet = "abc".chars().map(|c| Symbol(c as u32)).collect();
    AedsTable::from_encoder(alphabet, 5, enc)
        .and_then(|t| t.with_state_names(alpha_names(5)))
        .expect("example table is well formed")
}

/// One-state table that emits the codewords of `tree` directly.
pub fn build_tree_code(tree: &CodeTree, p: &SourceDistribution) -> Result<AedsTable> {
    if tree.n_leaves() != p.len() {
        return Err(Error::AlphabetMismatch("tree and source differ in size".into()));
    }
    let enc = tree.codewords().iter().map(|&c| EncoderEntry { codeword: c, next: 0 }).collect();
    AedsTable::from_encoder(p.symbols().to_vec(), 1, enc)
}

/// Type-I table with N states α_1..α_N.
///
/// At α_j (j < N) a right-subtree symbol emits its T_R codeword and moves to
/// α_{j+1}; at α_N it emits its full T codeword and returns to α_1. A
/// left-subtree symbol at α_j emits 0, the phased-in codeword of context j,
/// then its T_L codeword, and moves to α_1.
pub fn build_type1(tree: &CodeTree, p: &SourceDistribution, n: usize) -> Result<AedsTable> {
    if n < 2 {
        return Err(Error::TooFewStates { needed: 2, got: n });
    }
    let t = check_tree(tree, p)?;
    let pi = build_phased_in(n, None);
    let m = p.len();
    let mut enc = Vec::with_capacity(n * m);
    for j in 0..n {
        for s in 0..m {
            let sub = t.subtree_codeword(s);
            let e = if t.is_right(s) {
                if j + 1 < n {
                    EncoderEntry { codeword: sub, next: j + 1 }
                } else {
                    EncoderEntry { codeword: t.codeword(s), next: 0 }
                }
            } else {
                EncoderEntry { codeword: cat(cat(bits("0"), pi.codewords[j])?, sub)?, next: 0 }
            };
            enc.push(e);
        }
    }
    AedsTable::from_encoder(p.symbols().to_vec(), n, enc)?.with_state_names(alpha_names(n))
}

/// Type-II table with five states.
///
/// Right-subtree symbols walk α_3 → α_4 → α_5 → α_3 and are entered from α_1
/// and α_2 with a routing prefix; left-subtree symbols go α_1 → α_2 and from
/// every other state back to α_1.
pub fn build_type2(tree: &CodeTree, p: &SourceDistribution) -> Result<AedsTable> {
    let t = check_tree(tree, p)?;
    // (prefix before c_R, next) and (prefix before c_L, next) per state.
    let right: [(&str, usize); 5] = [("0", 2), ("10", 2), ("", 3), ("", 4), ("11", 2)];
    let left: [(&str, usize); 5] = [("", 1), ("110", 0), ("0", 0), ("10", 0), ("111", 0)];
    let m = p.len();
    let mut enc = Vec::with_capacity(5 * m);
    for x in 0..5 {
        for s in 0..m {
            let (pre, next) = if t.is_right(s) { right[x] } else { left[x] };
            enc.push(EncoderEntry { codeword: cat(bits(pre), t.subtree_codeword(s))?, next });
        }
    }
    AedsTable::from_encoder(p.symbols().to_vec(), 5, enc)?.with_state_names(alpha_names(5))
}

/// A forward set ℱ⁺ under construction: the states x̂ (as runs in α order)
/// mapped into one left-side state of `symbol`, with one codeword per member.
#[derive(Debug, Clone)]
struct Group {
    symbol: usize,
    runs: Vec<Range<usize>>,
    codes: Vec<Codeword>,
    /// Reassign phased-in codewords after the stationary solve.
    phased: bool,
}

impl Group {
    fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs.iter().flat_map(|r| r.clone())
    }

    fn size(&self) -> usize {
        self.runs.iter().map(|r| r.len()).sum()
    }

    fn phased_in(symbol: usize, runs: Vec<Range<usize>>) -> Self {
        let size = runs.iter().map(|r| r.len()).sum();
        // α order is descending Q*, so the default short codewords go first.
        let codes = build_phased_in(size, None).codewords;
        Group { symbol, runs, codes, phased: true }
    }

    fn fixed(symbol: usize, run: Range<usize>) -> Self {
        let len = ceil_log2(run.len()) as usize;
        let codes = (0..run.len()).map(|i| Codeword::new(i as u128, len)).collect();
        Group { symbol, runs: vec![run], codes, phased: false }
    }
}

/// Σ Q*(α_i) over α indices in [a, b), telescoped: lg((N+b)/(N+a)).
fn qstar_run(n: usize, r: &Range<usize>) -> f64 {
    ((n + r.end) as f64 / (n + r.start) as f64).log2()
}

/// Ranks groups by p(s)·Σ Q*, descending, ties by construction order, and
/// builds the table with group g occupying state `rank(g)`.
///
/// When every interval is aligned (all N/N_s powers of two) the ranked chain
/// splits into closed classes; construction order is used instead if that
/// one is ergodic.
fn assemble(p: &SourceDistribution, n: usize, groups: &[Group]) -> Result<AedsTable> {
    debug_assert_eq!(groups.len(), n);
    let keys: Vec<f64> = groups
        .iter()
        .map(|g| p.prob(g.symbol) * g.runs.iter().map(|r| qstar_run(n, r)).sum::<f64>())
        .collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    let mut state_of = vec![0usize; groups.len()];
    for (rank, &g) in order.iter().enumerate() {
        state_of[g] = rank;
    }
    let ranked = assemble_with(p, n, groups, &state_of)?;
    if ergodicity(&ranked).is_ergodic() {
        return Ok(ranked);
    }
    let identity: Vec<usize> = (0..groups.len()).collect();
    let alt = assemble_with(p, n, groups, &identity)?;
    Ok(if ergodicity(&alt).is_ergodic() { alt } else { ranked })
}

fn assemble_with(p: &SourceDistribution, n: usize, groups: &[Group], state_of: &[usize]) -> Result<AedsTable> {
    let m = p.len();
    let mut enc = vec![None; n * m];
    for (g, group) in groups.iter().enumerate() {
        for (xh, &c) in group.members().zip(&group.codes) {
            let slot = &mut enc[xh * m + group.symbol];
            if slot.is_some() {
                return Err(Error::InvalidCounts(format!("state {xh} covered twice")));
            }
            *slot = Some(EncoderEntry { codeword: c, next: state_of[g] });
        }
    }
    let enc = enc
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or(Error::MissingSymbol { state: i / m, symbol: i % m }))
        .collect::<Result<Vec<_>>>()?;
    AedsTable::from_encoder(p.symbols().to_vec(), n, enc)
}

/// Builds, then moves the short phased-in codewords of each group onto the
/// members with the largest solved Q. Q itself only depends on ℱ⁺, so one
/// pass suffices. If the chain cannot be solved the Q* order is kept.
fn assemble_reassigned(p: &SourceDistribution, n: usize, mut groups: Vec<Group>) -> Result<AedsTable> {
    let table = assemble(p, n, &groups)?;
    if !groups.iter().any(|g| g.phased) {
        return Ok(table);
    }
    let Ok(q) = solve_stationary(&table, p) else {
        return Ok(table);
    };
    for g in groups.iter_mut().filter(|g| g.phased) {
        let w: Vec<f64> = g.members().map(|xh| q[xh]).collect();
        g.codes = build_phased_in(g.size(), Some(&w)).codewords;
    }
    assemble(p, n, &groups)
}

fn check_counts(p: &SourceDistribution, counts: &[usize]) -> Result<usize> {
    if counts.len() != p.len() {
        return Err(Error::AlphabetMismatch(format!("{} counts for {} symbols", counts.len(), p.len())));
    }
    if let Some(s) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidCounts(format!("symbol index {s} has N_s = 0")));
    }
    Ok(counts.iter().sum())
}

/// sAEDS matching the Huffman code: N = 2^{l_max}, N_s = 2^{l_max − l(s)},
/// each forward set of size 2^{l(s)} with a fixed-length code.
pub fn build_huffman_matching_saeds(p: &SourceDistribution, max_states: usize) -> Result<AedsTable> {
    let tree = build_huffman(p)?;
    let lmax = tree.max_len();
    if lmax >= usize::BITS as usize - 1 || (1usize << lmax) > max_states {
        let needed = if lmax >= usize::BITS as usize - 1 { usize::MAX } else { 1 << lmax };
        return Err(Error::StateBudgetExceeded { needed, cap: max_states });
    }
    let n = 1usize << lmax;
    let mut groups = Vec::with_capacity(n);
    for s in 0..p.len() {
        let size = 1usize << tree.codeword(s).len();
        for j in 0..n / size {
            groups.push(Group::fixed(s, j * size..(j + 1) * size));
        }
    }
    assemble(p, n, &groups)
}

/// Case-1/Case-2 forward sets: per symbol N_s − r_s sets of size ⌊N/N_s⌋
/// followed (toward lower Q*) by r_s sets of size ⌊N/N_s⌋ + 1.
fn case12_groups(counts: &[usize], n: usize) -> Vec<Group> {
    let mut groups = Vec::with_capacity(n);
    for (s, &ns) in counts.iter().enumerate() {
        let m = n / ns;
        let r = n % ns;
        let mut pos = 0;
        for j in 0..ns {
            let size = if j < ns - r { m } else { m + 1 };
            groups.push(Group::phased_in(s, std::iter::once(pos..pos + size).collect()));
            pos += size;
        }
        debug_assert_eq!(pos, n);
    }
    groups
}

/// Case 1: every N/N_s is an integer, forward sets of size N/N_s with
/// phased-in codes.
pub fn build_saeds_case1(p: &SourceDistribution, counts: &[usize]) -> Result<AedsTable> {
    let n = check_counts(p, counts)?;
    if let Some(s) = counts.iter().position(|&c| n % c != 0) {
        return Err(Error::NonIntegerRatio { symbol: s, n, count: counts[s] });
    }
    assemble_reassigned(p, n, case12_groups(counts, n))
}

/// Case 2: any counts; r_s = N mod N_s forward sets get one extra member.
pub fn build_saeds_case2(p: &SourceDistribution, counts: &[usize]) -> Result<AedsTable> {
    let n = check_counts(p, counts)?;
    assemble_reassigned(p, n, case12_groups(counts, n))
}

/// Case 3: N = 2^k. For y ∈ [N_s, 2N_s) the forward set is the α interval
/// [2^{k_y} y − N, 2^{k_y}(y+1) − N) with a fixed k_y-bit code,
/// k_y = k − ⌊lg y⌋. Equals the converted sorted-interval tANS table.
pub fn build_saeds_case3(p: &SourceDistribution, counts: &[usize]) -> Result<AedsTable> {
    let n = check_counts(p, counts)?;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let k = floor_log2(n);
    let mut groups = Vec::with_capacity(n);
    for (s, &ns) in counts.iter().enumerate() {
        for y in ns..2 * ns {
            let ky = k - floor_log2(y);
            groups.push(Group::fixed(s, ((y << ky) - n)..(((y + 1) << ky) - n)));
        }
    }
    assemble(p, n, &groups)
}

/// Group parameters of one symbol in the large-N layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLayout {
    pub count: usize,
    pub kappa: u32,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl SymbolLayout {
    /// |𝒳_{A_sB_s}| = 2^κ N_s − N.
    pub fn ab_size(&self, n: usize) -> usize {
        (self.count << self.kappa) - n
    }

    /// |𝒳_{C_sD_s}| = 2N − 2^κ N_s.
    pub fn cd_size(&self, n: usize) -> usize {
        2 * n - (self.count << self.kappa)
    }

    /// All layout identities.
    pub fn holds(&self, n: usize) -> bool {
        let k = 1usize << self.kappa;
        2 * self.b + self.d == k
            && self.count == self.a + self.c + 1
            && self.ab_size(n) == (k / 2) * self.a + self.b
            && self.cd_size(n) == k * self.c + self.d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargeNLayout {
    pub n: usize,
    pub symbols: Vec<SymbolLayout>,
}

impl LargeNLayout {
    pub fn holds(&self) -> bool {
        self.symbols.iter().all(|l| l.holds(self.n))
    }
}

/// κ_s = ⌈lg(N/N_s)⌉ and the derived A_s, B_s, C_s, D_s.
pub fn large_n_layout(counts: &[usize]) -> Result<LargeNLayout> {
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateSingleSymbol);
    }
    if let Some(s) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidCounts(format!("symbol index {s} has N_s = 0")));
    }
    let n: usize = counts.iter().sum();
    let symbols = counts
        .iter()
        .map(|&ns| {
            let mut kappa = 1u32;
            while ns << kappa < n {
                kappa += 1;
            }
            let ab = (ns << kappa) - n;
            let half = 1usize << (kappa - 1);
            let a = ab / half;
            let b = ab % half;
            let d = (1usize << kappa) - 2 * b;
            let c = ns - a - 1;
            SymbolLayout { count: ns, kappa, a, b, c, d }
        })
        .collect();
    Ok(LargeNLayout { n, symbols })
}

/// The large-N sAEDS: per symbol A_s forward sets of 2^{κ−1} states with
/// (κ−1)-bit codes, C_s sets of 2^κ states with κ-bit codes, and one set made
/// of α_1..α_{B_s} (κ−1 bits) and the last D_s states (κ bits).
pub fn build_large_n(p: &SourceDistribution, counts: &[usize]) -> Result<(AedsTable, LargeNLayout)> {
    let layout = large_n_layout(counts)?;
    check_counts(p, counts)?;
    let n = layout.n;
    let mut groups = Vec::with_capacity(n);
    for (s, l) in layout.symbols.iter().enumerate() {
        let half = 1usize << (l.kappa - 1);
        let full = 1usize << l.kappa;
        let mut pos = l.b;
        for _ in 0..l.a {
            groups.push(Group::fixed(s, pos..pos + half));
            pos += half;
        }
        for _ in 0..l.c {
            groups.push(Group::fixed(s, pos..pos + full));
            pos += full;
        }
        debug_assert_eq!(pos, n - l.d);
        let runs: Vec<Range<usize>> = [0..l.b, n - l.d..n].into_iter().filter(|r| !r.is_empty()).collect();
        let mut last = Group::phased_in(s, runs);
        last.phased = false;
        groups.push(last);
    }
    Ok((assemble(p, n, &groups)?, layout))
}

/// Replaces every decoder set by a Huffman code for p̃(β|x) ∝ p(s)Q(x̂).
/// The transition structure, hence Q, is unchanged.
pub fn reoptimize_codes(table: &AedsTable, p: &SourceDistribution) -> Result<AedsTable> {
    let q = solve_stationary(table, p)?;
    let m = table.n_symbols();
    let mut enc: Vec<EncoderEntry> = table.encoder_entries().to_vec();
    for x in 0..table.n_states() {
        let entries = table.decoder_entries(x);
        if entries.len() == 1 {
            let d = entries[0];
            enc[d.next * m + d.symbol].codeword = Codeword::EMPTY;
            continue;
        }
        let w: Vec<f64> = entries.iter().map(|d| p.prob(d.symbol) * q[d.next]).collect();
        let code = crate::prefix_codes::huffman_from_weights(&w)?;
        for (d, &c) in entries.iter().zip(code.codewords()) {
            enc[d.next * m + d.symbol].codeword = c;
        }
    }
    let out = AedsTable::from_encoder(table.alphabet().to_vec(), table.n_states(), enc)?;
    match table.state_names() {
        Some(n) => out.with_state_names(n.to_vec()),
        None => Ok(out),
    }
}

/// Which reduction formula the split search subtracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVariant {
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResult {
    pub m_r: usize,
    pub m_l: usize,
    /// Minimized L.
    pub l: f64,
    /// δ̂ = L_H(M) − L.
    pub delta_hat: f64,
    /// μ̂ = L − lg M.
    pub mu_hat: f64,
}

/// L_T(M, M_R) = 1 + (M_R/M) L_H(M_R) + (1 − M_R/M) L_H(M − M_R).
pub fn split_tree_length(m: usize, m_r: usize) -> f64 {
    let pr = m_r as f64 / m as f64;
    1.0 + pr * uniform_huffman_length(m_r) + (1.0 - pr) * uniform_huffman_length(m - m_r)
}

/// Minimizes L_T(M, M_R) − δ(M_R/M) over ⌈M/2⌉ ≤ M_R ≤ M − 1, smallest M_R on
/// ties. `n` is the Type-I state count (ignored for Type-II).
pub fn optimal_uniform_split(m: usize, n: usize, variant: SplitVariant) -> Result<SplitResult> {
    if m < 2 {
        return Err(Error::OutOfRange(format!("M = {m} must be at least 2")));
    }
    if variant == SplitVariant::Type1 && n < 2 {
        return Err(Error::TooFewStates { needed: 2, got: n });
    }
    let mut best: Option<(f64, usize)> = None;
    for m_r in m.div_ceil(2)..m {
        let pr = m_r as f64 / m as f64;
        let delta = match variant {
            SplitVariant::Type1 => delta_type1(pr, n),
            SplitVariant::Type2 => delta_type2(pr),
        };
        let l = split_tree_length(m, m_r) - delta;
        // Strict improvement keeps the smallest M_R on exact ties.
        if best.is_none_or(|(b, _)| l < b - 1e-12) {
            best = Some((l, m_r));
        }
    }
    let (l, m_r) = best.expect("range is nonempty for M ≥ 2");
    Ok(SplitResult {
        m_r,
        m_l: m - m_r,
        l,
        delta_hat: uniform_huffman_length(m) - l,
        mu_hat: l - (m as f64).log2(),
    })
}
