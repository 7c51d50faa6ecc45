//! Tabled ANS with N = 2^R states x ∈ [N, 2N): symbol state sets 𝒳_s,
//! correspondence tables C[s, y] and D[x], the arithmetic state updates, and
//! the conversion into an equivalent [`AedsTable`].

use sha2::{Digest, Sha256};

use crate::codec::{ergodicity, read_leb128, write_leb128, BitReader, BitWriter, Bitstream};
use crate::error::{Error, Result};
use crate::model::{AedsTable, Codeword, EncoderEntry, SourceDistribution, Symbol};
use crate::prefix_codes::floor_log2;

pub const TANS_MAGIC: &[u8; 4] = b"TANS";
pub const TANS_VERSION: u8 = 1;

/// How the states N..2N−1 are distributed among symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadPolicy {
    /// State x = C[s, y] ranked by descending p(s)·lg((y+1)/y), ties by
    /// (symbol, y). Reproduces the Case-3 sAEDS layout, including its
    /// fallback to (symbol, y) order when the ranked chain is not ergodic.
    #[default]
    SortedInterval,
    /// Symbols laid out by an odd step close to N·0.618 modulo N; y ascends
    /// with x inside each symbol.
    Stride,
}

impl SpreadPolicy {
    fn code(self) -> u8 {
        match self {
            SpreadPolicy::SortedInterval => 0,
            SpreadPolicy::Stride => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(SpreadPolicy::SortedInterval),
            1 => Ok(SpreadPolicy::Stride),
            _ => Err(Error::MalformedTable(format!("unknown spread policy {c}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TansTable {
    r: u32,
    alphabet: Vec<Symbol>,
    counts: Vec<usize>,
    policy: SpreadPolicy,
    /// D[x] for x = N + i.
    d: Vec<(usize, usize)>,
    /// C[s][y − N_s].
    c: Vec<Vec<usize>>,
}

/// State counts N_s ≥ 1 with Σ N_s = N minimizing Σ |N_s − p(s)N|.
///
/// Starts from max(1, ⌊p(s)N⌋) and moves one unit at a time along the
/// cheapest marginal change, ties by symbol index.
pub fn quantize_counts(p: &SourceDistribution, n: usize) -> Result<Vec<usize>> {
    let m = p.len();
    if n < m {
        return Err(Error::TooFewStates { needed: m, got: n });
    }
    let target: Vec<f64> = p.probs().iter().map(|&x| x * n as f64).collect();
    let mut counts: Vec<usize> = target.iter().map(|&t| (t.floor() as usize).max(1)).collect();
    let cost = |c: usize, t: f64| (c as f64 - t).abs();
    let mut total: usize = counts.iter().sum();
    while total != n {
        let grow = total < n;
        let mut best: Option<(f64, usize)> = None;
        for s in 0..m {
            let c = counts[s];
            if !grow && c == 1 {
                continue;
            }
            let next = if grow { c + 1 } else { c - 1 };
            let delta = cost(next, target[s]) - cost(c, target[s]);
            if best.is_none_or(|(d, _)| delta < d) {
                best = Some((delta, s));
            }
        }
        let (_, s) = best.expect("some count can move");
        if grow {
            counts[s] += 1;
            total += 1;
        } else {
            counts[s] -= 1;
            total -= 1;
        }
    }
    Ok(counts)
}

fn check_counts(n_symbols: usize, counts: &[usize]) -> Result<usize> {
    if counts.len() != n_symbols {
        return Err(Error::AlphabetMismatch(format!("{} counts for {} symbols", counts.len(), n_symbols)));
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateAlphabet(counts.len()));
    }
    if let Some(s) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidCounts(format!("symbol index {s} has no state")));
    }
    Ok(counts.iter().sum())
}

/// Golden-ratio stride: the odd integer nearest N·(√5−1)/2 (coprime to 2^R).
fn stride_step(n: usize) -> usize {
    let s = ((n as f64) * (5f64.sqrt() - 1.0) / 2.0).round() as usize;
    (s | 1) % n.max(2)
}

/// Builds a tANS table from explicit counts.
pub fn build_tans_from_counts(
    alphabet: Vec<Symbol>,
    probs: &[f64],
    counts: &[usize],
    policy: SpreadPolicy,
) -> Result<TansTable> {
    let n = check_counts(alphabet.len(), counts)?;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let r = floor_log2(n);
    let m = alphabet.len();
    // owner list for slots 0..N.
    let mut slots: Vec<(usize, usize)> = Vec::with_capacity(n);
    match policy {
        SpreadPolicy::SortedInterval => {
            let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
            for s in 0..m {
                for y in counts[s]..2 * counts[s] {
                    keyed.push((probs[s] * ((y + 1) as f64 / y as f64).log2(), s, y));
                }
            }
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            slots.extend(keyed.into_iter().map(|(_, s, y)| (s, y)));
            let ranked = assemble_tans(r, &alphabet, counts, policy, slots.clone());
            if ergodicity(&tans_to_aeds(&ranked)).is_ergodic() {
                return Ok(ranked);
            }
            let contiguous: Vec<(usize, usize)> =
                (0..m).flat_map(|s| (counts[s]..2 * counts[s]).map(move |y| (s, y))).collect();
            let alt = assemble_tans(r, &alphabet, counts, policy, contiguous);
            return Ok(if ergodicity(&tans_to_aeds(&alt)).is_ergodic() { alt } else { ranked });
        }
        SpreadPolicy::Stride => {
            let step = if n == 1 { 0 } else { stride_step(n) };
            let mut owner = vec![usize::MAX; n];
            let mut pos = 0usize;
            for (s, &k) in counts.iter().enumerate() {
                for _ in 0..k {
                    owner[pos] = s;
                    pos = (pos + step) % n;
                }
            }
            let mut next_y: Vec<usize> = counts.to_vec();
            for &s in &owner {
                slots.push((s, next_y[s]));
                next_y[s] += 1;
            }
        }
    }
    Ok(assemble_tans(r, &alphabet, counts, policy, slots))
}

fn assemble_tans(
    r: u32,
    alphabet: &[Symbol],
    counts: &[usize],
    policy: SpreadPolicy,
    slots: Vec<(usize, usize)>,
) -> TansTable {
    let n = 1usize << r;
    let mut c: Vec<Vec<usize>> = counts.iter().map(|&k| vec![0; k]).collect();
    for (i, &(s, y)) in slots.iter().enumerate() {
        c[s][y - counts[s]] = n + i;
    }
    TansTable { r, alphabet: alphabet.to_vec(), counts: counts.to_vec(), policy, d: slots, c }
}

/// Quantizes p to N states and spreads them.
pub fn build_tans(p: &SourceDistribution, n: usize, policy: SpreadPolicy) -> Result<TansTable> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let counts = quantize_counts(p, n)?;
    build_tans_from_counts(p.symbols().to_vec(), p.probs(), &counts, policy)
}

impl TansTable {
    pub fn n(&self) -> usize {
        1 << self.r
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn policy(&self) -> SpreadPolicy {
        self.policy
    }

    /// C[s, y] for y ∈ [N_s, 2N_s).
    pub fn c(&self, s: usize, y: usize) -> usize {
        self.c[s][y - self.counts[s]]
    }

    /// D[x] = (s, y) for x ∈ [N, 2N).
    pub fn d(&self, x: usize) -> (usize, usize) {
        self.d[x - self.n()]
    }

    /// 𝒳_s, ascending.
    pub fn state_set(&self, s: usize) -> Vec<usize> {
        let mut v = self.c[s].clone();
        v.sort_unstable();
        v
    }

    /// One backward step: (k, β, x_{t−1}) for symbol s at state x_t.
    pub fn encode_step(&self, x: usize, s: usize) -> (u32, usize, usize) {
        let k = floor_log2(x / self.counts[s]);
        let beta = x & ((1 << k) - 1);
        let y = x >> k;
        (k, beta, self.c(s, y))
    }

    /// Number of bits read after entering state x: R − ⌊lg y⌋.
    pub fn decode_bits(&self, x: usize) -> u32 {
        let (_, y) = self.d(x);
        self.r - floor_log2(y)
    }

    /// Canonical bytes with a SHA-256 trailer.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(TANS_MAGIC);
        out.push(TANS_VERSION);
        write_leb128(&mut out, self.n() as u64);
        write_leb128(&mut out, self.alphabet.len() as u64);
        for (s, &c) in self.alphabet.iter().zip(&self.counts) {
            write_leb128(&mut out, s.0 as u64);
            write_leb128(&mut out, c as u64);
        }
        out.push(self.policy.code());
        for &(s, y) in &self.d {
            write_leb128(&mut out, s as u64);
            write_leb128(&mut out, y as u64);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |w: &str| Error::MalformedTable(w.to_string());
        if bytes.len() < 5 + 32 {
            return Err(bad("truncated tANS table"));
        }
        if &bytes[..4] != TANS_MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes[4] != TANS_VERSION {
            return Err(Error::VersionMismatch { found: bytes[4], expected: TANS_VERSION });
        }
        let body = &bytes[..bytes.len() - 32];
        let mut pos = 5;
        let mut rd = || read_leb128(body, &mut pos).map_err(|_| bad("truncated tANS table"));
        let n = rd()? as usize;
        let m = rd()? as usize;
        if m > body.len() || n > 1 << 30 {
            return Err(bad("implausible tANS dimensions"));
        }
        let mut alphabet = Vec::with_capacity(m);
        let mut counts = Vec::with_capacity(m);
        for _ in 0..m {
            alphabet.push(Symbol(u32::try_from(rd()?).map_err(|_| bad("symbol id overflow"))?));
            counts.push(rd()? as usize);
        }
        let total = check_counts(m, &counts)?;
        if total != n || !n.is_power_of_two() {
            return Err(bad("counts do not sum to a power-of-two N"));
        }
        let policy = SpreadPolicy::from_code(*body.get(pos).ok_or_else(|| bad("truncated tANS table"))?)?;
        pos += 1;
        let mut d = Vec::with_capacity(n);
        let mut c: Vec<Vec<usize>> = counts.iter().map(|&k| vec![usize::MAX; k]).collect();
        for i in 0..n {
            let s = read_leb128(body, &mut pos).map_err(|_| bad("truncated tANS table"))? as usize;
            let y = read_leb128(body, &mut pos).map_err(|_| bad("truncated tANS table"))? as usize;
            if s >= m || y < counts[s] || y >= 2 * counts[s] || c[s][y - counts[s]] != usize::MAX {
                return Err(bad("D is not a bijection"));
            }
            c[s][y - counts[s]] = n + i;
            d.push((s, y));
        }
        if pos != body.len() {
            return Err(bad("trailing bytes in tANS table"));
        }
        if Sha256::digest(body).as_slice() != &bytes[body.len()..] {
            return Err(Error::HashMismatch);
        }
        Ok(TansTable { r: floor_log2(n), alphabet, counts, policy, d, c })
    }
}

/// Encodes symbol indices backward from x_n ∈ [N, 2N).
pub fn tans_encode_indices(table: &TansTable, seq: &[usize], x_n: usize) -> Result<Bitstream> {
    let n = table.n();
    if !(n..2 * n).contains(&x_n) {
        return Err(Error::InvalidInitialState { state: x_n, n_states: n });
    }
    let m = table.alphabet.len();
    let mut rev: Vec<(u32, usize)> = Vec::with_capacity(seq.len());
    let mut x = x_n;
    for (t, &s) in seq.iter().enumerate().rev() {
        if s >= m {
            return Err(Error::UnknownSymbol(t));
        }
        let (k, beta, next) = table.encode_step(x, s);
        rev.push((k, beta));
        x = next;
    }
    let total: u64 = rev.iter().map(|&(k, _)| k as u64).sum();
    let mut w = BitWriter::with_capacity_bits(total as usize);
    for &(k, beta) in rev.iter().rev() {
        w.write_bits(beta as u64, k);
    }
    Ok(Bitstream {
        n_states: n,
        initial_state: x - n,
        n_symbols: seq.len() as u64,
        payload: w.finish(),
        payload_bits: total,
    })
}

pub fn tans_encode(table: &TansTable, seq: &[Symbol], x_n: usize) -> Result<Bitstream> {
    let idx: Vec<usize> = seq
        .iter()
        .enumerate()
        .map(|(t, s)| table.alphabet.iter().position(|a| a == s).ok_or(Error::UnknownSymbol(t)))
        .collect::<Result<_>>()?;
    tans_encode_indices(table, &idx, x_n)
}

pub fn tans_decode_indices(table: &TansTable, stream: &Bitstream) -> Result<Vec<usize>> {
    let n = table.n();
    if stream.n_states != n {
        return Err(Error::MalformedTable(format!("stream has {} states, table {}", stream.n_states, n)));
    }
    if stream.initial_state >= n {
        return Err(Error::InvalidInitialState { state: stream.initial_state, n_states: n });
    }
    let mut r = BitReader::with_bit_len(&stream.payload, stream.payload_bits);
    let count = usize::try_from(stream.n_symbols).map_err(|_| Error::TruncatedStream)?;
    let mut out = Vec::with_capacity(count.min(stream.payload_bits as usize + 1024));
    let mut x = stream.initial_state + n;
    for _ in 0..count {
        let (s, y) = table.d(x);
        let k = table.r - floor_log2(y);
        let beta = r.read_bits(k)? as usize;
        out.push(s);
        x = (y << k) + beta;
    }
    let rest = r.remaining();
    if rest >= 8 || r.read_bits(rest as u32)? != 0 {
        return Err(Error::TrailingGarbage);
    }
    Ok(out)
}

pub fn tans_decode(table: &TansTable, stream: &Bitstream) -> Result<Vec<Symbol>> {
    Ok(tans_decode_indices(table, stream)?.into_iter().map(|i| table.alphabet[i]).collect())
}

/// The equivalent AEDS: state index x − N, E_x̂(s) = the k low bits of x̂ and
/// F⁻_x̂(s) = C[s, ⌊x̂ / 2^k⌋].
pub fn tans_to_aeds(table: &TansTable) -> AedsTable {
    let n = table.n();
    let m = table.alphabet.len();
    let mut enc = Vec::with_capacity(n * m);
    for xh in n..2 * n {
        for s in 0..m {
            let (k, beta, next) = table.encode_step(xh, s);
            enc.push(EncoderEntry { codeword: Codeword::new(beta as u128, k as usize), next: next - n });
        }
    }
    AedsTable::from_encoder(table.alphabet.clone(), n, enc).expect("tANS decoder sets are prefix-free")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec;

    #[test]
    fn quantize_examples() {
        let p = SourceDistribution::from_weights(&[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(quantize_counts(&p, 8).unwrap(), vec![4, 2, 2]);
        let p = SourceDistribution::from_weights(&[0.7, 0.3]).unwrap();
        assert_eq!(quantize_counts(&p, 4).unwrap(), vec![3, 1]);
        let p = SourceDistribution::from_weights(&[0.98, 0.01, 0.01]).unwrap();
        assert_eq!(quantize_counts(&p, 4).unwrap(), vec![2, 1, 1]);
        assert!(matches!(quantize_counts(&p, 2), Err(Error::TooFewStates { needed: 3, got: 2 })));
    }

    #[test]
    fn two_state_table() {
        let p = SourceDistribution::uniform(2).unwrap();
        let t = build_tans(&p, 2, SpreadPolicy::SortedInterval).unwrap();
        assert_eq!(t.state_set(0), vec![2]);
        assert_eq!(t.state_set(1), vec![3]);
        assert_eq!(t.c(0, 1), 2);
        assert_eq!(t.c(1, 1), 3);
        for x in 2..4 {
            for s in 0..2 {
                assert_eq!(t.encode_step(x, s).0, 1);
            }
        }
    }

    #[test]
    fn four_state_inverse() {
        let p = SourceDistribution::from_weights(&[0.7, 0.3]).unwrap();
        for policy in [SpreadPolicy::SortedInterval, SpreadPolicy::Stride] {
            let t = build_tans(&p, 4, policy).unwrap();
            assert_eq!(t.counts(), &[3, 1]);
            for s in 0..2 {
                for y in t.counts()[s]..2 * t.counts()[s] {
                    assert_eq!(t.d(t.c(s, y)), (s, y));
                }
            }
            // decode reads R − ⌊lg y⌋ bits: y = 1 reads 2, y = 3 reads 1
            for x in 4..8 {
                for s in 0..2 {
                    let (k, beta, next) = t.encode_step(x, s);
                    assert_eq!(t.decode_bits(next), k);
                    assert_eq!((t.d(next).1 << k) + beta, x);
                }
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let p = SourceDistribution::uniform(3).unwrap();
        assert_eq!(build_tans(&p, 6, SpreadPolicy::default()), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn table_bytes_roundtrip() {
        let p = SourceDistribution::from_weights(&[0.6, 0.3, 0.1]).unwrap();
        for policy in [SpreadPolicy::SortedInterval, SpreadPolicy::Stride] {
            let t = build_tans(&p, 16, policy).unwrap();
            let bytes = t.to_bytes();
            assert_eq!(TansTable::from_bytes(&bytes).unwrap(), t);
            let mut bad = bytes.clone();
            let last = bad.len() - 40;
            bad[last] ^= 1;
            assert!(TansTable::from_bytes(&bad).is_err());
        }
    }

    #[test]
    fn conversion_streams_match() {
        let p = SourceDistribution::from_weights(&[0.6, 0.3, 0.1]).unwrap();
        let t = build_tans(&p, 16, SpreadPolicy::Stride).unwrap();
        let a = tans_to_aeds(&t);
        let seq: Vec<usize> = (0..200).map(|i| (i * 7 + i / 3) % 3).collect();
        let native = tans_encode_indices(&t, &seq, 16 + 5).unwrap();
        let conv = codec::encode_indices(&a, &seq, codec::InitialState::Index(5)).unwrap();
        assert_eq!(native, conv);
        assert_eq!(tans_decode_indices(&t, &native).unwrap(), seq);
    }
}
