//! The executable AEDS machine: backward encoding, forward decoding, the
//! bitstream framing, table validation and canonical table serialization.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{AedsTable, Codeword, EncoderEntry, Symbol, TrieStep, MAX_CODEWORD_BITS};
use crate::prefix_codes::ceil_log2;

pub const STREAM_MAGIC: &[u8; 4] = b"AEDS";
pub const STREAM_VERSION: u8 = 1;
pub const TABLE_MAGIC: &[u8; 4] = b"AEDT";
pub const TABLE_VERSION: u8 = 1;

/// MSB-first bit writer.
#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    n_acc: u32,
    total: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: usize) -> Self {
        BitWriter { bytes: Vec::with_capacity(bits / 8 + 1), ..Self::default() }
    }

    /// Writes the low `n` bits of `value`, most significant first; n ≤ 32.
    pub fn write_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 32);
        if n == 0 {
            return;
        }
        self.acc = (self.acc << n) | (value & ((1u64 << n) - 1));
        self.n_acc += n;
        self.total += n as u64;
        while self.n_acc >= 8 {
            self.n_acc -= 8;
            self.bytes.push((self.acc >> self.n_acc) as u8);
        }
        self.acc &= (1u64 << self.n_acc) - 1;
    }

    pub fn write_codeword(&mut self, c: Codeword) {
        let mut left = c.len();
        while left > 0 {
            let take = left.min(32);
            let chunk = (c.bits() >> (left - take)) as u64;
            self.write_bits(chunk, take as u32);
            left -= take;
        }
    }

    pub fn write_byte(&mut self, b: u8) {
        self.write_bits(b as u64, 8);
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_byte(b);
        }
    }

    pub fn write_leb128(&mut self, mut v: u64) {
        loop {
            let b = (v & 0x7f) as u8;
            v >>= 7;
            if v == 0 {
                self.write_byte(b);
                return;
            }
            self.write_byte(b | 0x80);
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.total
    }

    /// Pads with zero bits to a byte boundary and returns the bytes.
    pub fn finish(mut self) -> Vec<u8> {
        if self.n_acc > 0 {
            let pad = 8 - self.n_acc;
            self.bytes.push((self.acc << pad) as u8);
        }
        self.bytes
    }
}

/// MSB-first bit reader over a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    end: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0, end: bytes.len() as u64 * 8 }
    }

    /// Reader limited to the first `bits` bits.
    pub fn with_bit_len(bytes: &'a [u8], bits: u64) -> Self {
        BitReader { bytes, pos: 0, end: bits.min(bytes.len() as u64 * 8) }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.end - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.end {
            return Err(Error::TruncatedStream);
        }
        let b = self.bytes[(self.pos / 8) as usize] >> (7 - self.pos % 8) & 1;
        self.pos += 1;
        Ok(b == 1)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 64);
        if self.remaining() < n as u64 {
            return Err(Error::TruncatedStream);
        }
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_byte(&mut self) -> Result<u8> {
        if self.pos.is_multiple_of(8) && self.remaining() >= 8 {
            let b = self.bytes[(self.pos / 8) as usize];
            self.pos += 8;
            return Ok(b);
        }
        Ok(self.read_bits(8)? as u8)
    }

    pub fn read_leb128(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.read_byte()?;
            let part = (b & 0x7f) as u64;
            if shift == 63 && part > 1 {
                return Err(Error::MalformedTable("LEB128 overflow".into()));
            }
            v |= part << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::MalformedTable("LEB128 overflow".into()))
    }
}

/// Byte-level LEB128 helpers for container formats.
pub fn write_leb128(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

/// Reads a LEB128 value at `*pos`, advancing it.
pub fn read_leb128(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let &b = bytes.get(*pos).ok_or(Error::TruncatedStream)?;
        *pos += 1;
        let part = (b & 0x7f) as u64;
        if shift == 63 && part > 1 {
            return Err(Error::MalformedTable("LEB128 overflow".into()));
        }
        v |= part << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::MalformedTable("LEB128 overflow".into()))
}

/// Bits used for the initial decoder state: ⌈lg N⌉.
pub fn state_bits(n_states: usize) -> u32 {
    ceil_log2(n_states.max(1))
}

/// A framed codeword sequence x̂_0 β_1 β_2 ⋯ β_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub n_states: usize,
    /// x̂_0, the state the decoder starts from.
    pub initial_state: usize,
    pub n_symbols: u64,
    /// β_1 ⋯ β_n packed MSB-first.
    pub payload: Vec<u8>,
    /// Number of meaningful bits in `payload` (padding excluded when known).
    pub payload_bits: u64,
}

impl Bitstream {
    /// Header bits: magic, version, N, x̂_0 and n.
    pub fn header_bits(&self) -> u64 {
        let mut w = BitWriter::new();
        self.write_header(&mut w);
        w.bit_len()
    }

    fn write_header(&self, w: &mut BitWriter) {
        w.write_bytes(STREAM_MAGIC);
        w.write_byte(STREAM_VERSION);
        w.write_leb128(self.n_states as u64);
        w.write_bits(self.initial_state as u64, state_bits(self.n_states));
        w.write_leb128(self.n_symbols);
    }

    /// Serialized form: header then payload as one MSB-first bit string,
    /// zero-padded to a byte boundary.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = BitWriter::with_capacity_bits(self.payload_bits as usize + 128);
        self.write_header(&mut w);
        let mut r = BitReader::with_bit_len(&self.payload, self.payload_bits);
        while r.remaining() >= 32 {
            w.write_bits(r.read_bits(32).unwrap(), 32);
        }
        let rest = r.remaining() as u32;
        w.write_bits(r.read_bits(rest).unwrap(), rest);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = BitReader::new(bytes);
        let mut magic = [0u8; 4];
        for m in &mut magic {
            *m = r.read_byte()?;
        }
        if &magic != STREAM_MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.read_byte()?;
        if version != STREAM_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: STREAM_VERSION });
        }
        let n_states = r.read_leb128()? as usize;
        if n_states == 0 {
            return Err(Error::MalformedTable("stream declares zero states".into()));
        }
        let initial_state = r.read_bits(state_bits(n_states))? as usize;
        if initial_state >= n_states {
            return Err(Error::InvalidInitialState { state: initial_state, n_states });
        }
        let n_symbols = r.read_leb128()?;
        let payload_bits = r.remaining();
        let mut w = BitWriter::with_capacity_bits(payload_bits as usize);
        while r.remaining() >= 32 {
            w.write_bits(r.read_bits(32)?, 32);
        }
        let rest = r.remaining() as u32;
        w.write_bits(r.read_bits(rest)?, rest);
        Ok(Bitstream { n_states, initial_state, n_symbols, payload: w.finish(), payload_bits })
    }
}

/// Choice of the encoder's starting state x̂_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    #[default]
    Zero,
    Index(usize),
    /// Try every state and keep the shortest payload.
    MinimizeLength,
}

/// Maps symbols to table indices; fails with the 0-based position of the
/// first symbol outside the alphabet.
pub fn symbol_indices(table: &AedsTable, seq: &[Symbol]) -> Result<Vec<usize>> {
    let alphabet = table.alphabet();
    let max = alphabet.iter().map(|s| s.0).max().unwrap_or(0) as usize;
    if max < 1 << 20 {
        let mut lut = vec![usize::MAX; max + 1];
        for (i, s) in alphabet.iter().enumerate() {
            lut[s.0 as usize] = i;
        }
        seq.iter()
            .enumerate()
            .map(|(t, s)| match lut.get(s.0 as usize) {
                Some(&i) if i != usize::MAX => Ok(i),
                _ => Err(Error::UnknownSymbol(t)),
            })
            .collect()
    } else {
        let map: std::collections::HashMap<Symbol, usize> =
            alphabet.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        seq.iter()
            .enumerate()
            .map(|(t, s)| map.get(s).copied().ok_or(Error::UnknownSymbol(t)))
            .collect()
    }
}

fn payload_len_from(table: &AedsTable, seq: &[usize], start: usize) -> u64 {
    let mut x = start;
    let mut bits = 0u64;
    for &s in seq.iter().rev() {
        let e = table.encode_entry(x, s);
        bits += e.codeword.len() as u64;
        x = e.next;
    }
    bits
}

fn resolve_start(table: &AedsTable, seq: &[usize], policy: InitialState) -> Result<usize> {
    let n = table.n_states();
    match policy {
        InitialState::Zero => Ok(0),
        InitialState::Index(i) if i < n => Ok(i),
        InitialState::Index(i) => Err(Error::InvalidInitialState { state: i, n_states: n }),
        InitialState::MinimizeLength => Ok((0..n)
            .min_by_key(|&x| (payload_len_from(table, seq, x), x))
            .unwrap_or(0)),
    }
}

/// Encodes symbol indices from x̂_n = `start`; returns the stream and the
/// per-symbol codeword lengths l(E_x̂t(s_t)) in forward order.
pub fn encode_indices_traced(table: &AedsTable, seq: &[usize], start: usize) -> Result<(Bitstream, Vec<u8>)> {
    let n = table.n_states();
    if start >= n {
        return Err(Error::InvalidInitialState { state: start, n_states: n });
    }
    let m = table.n_symbols();
    if let Some(t) = seq.iter().position(|&s| s >= m) {
        return Err(Error::UnknownSymbol(t));
    }
    let mut rev: Vec<Codeword> = Vec::with_capacity(seq.len());
    let mut x = start;
    for &s in seq.iter().rev() {
        let EncoderEntry { codeword, next } = table.encode_entry(x, s);
        rev.push(codeword);
        x = next;
    }
    let total: u64 = rev.iter().map(|c| c.len() as u64).sum();
    let mut w = BitWriter::with_capacity_bits(total as usize);
    let mut lengths = Vec::with_capacity(seq.len());
    for c in rev.iter().rev() {
        w.write_codeword(*c);
        lengths.push(c.len() as u8);
    }
    let stream = Bitstream {
        n_states: n,
        initial_state: x,
        n_symbols: seq.len() as u64,
        payload: w.finish(),
        payload_bits: total,
    };
    Ok((stream, lengths))
}

pub fn encode_indices(table: &AedsTable, seq: &[usize], policy: InitialState) -> Result<Bitstream> {
    let start = resolve_start(table, seq, policy)?;
    Ok(encode_indices_traced(table, seq, start)?.0)
}

/// Encodes s_n … s_1 backward and frames the forward codeword sequence.
pub fn encode(table: &AedsTable, seq: &[Symbol], policy: InitialState) -> Result<Bitstream> {
    let idx = symbol_indices(table, seq)?;
    encode_indices(table, &idx, policy)
}

/// Decodes to symbol indices.
pub fn decode_indices(table: &AedsTable, stream: &Bitstream) -> Result<Vec<usize>> {
    if stream.n_states != table.n_states() {
        return Err(Error::MalformedTable(format!(
            "stream has {} states, table {}",
            stream.n_states,
            table.n_states()
        )));
    }
    if stream.initial_state >= table.n_states() {
        return Err(Error::InvalidInitialState { state: stream.initial_state, n_states: table.n_states() });
    }
    let mut r = BitReader::with_bit_len(&stream.payload, stream.payload_bits);
    let n = usize::try_from(stream.n_symbols).map_err(|_| Error::TruncatedStream)?;
    // Every symbol costs at least one bit unless λ codewords exist.
    let mut out = Vec::with_capacity(n.min(stream.payload_bits as usize + 1024));
    let mut x = stream.initial_state;
    for _ in 0..n {
        let root = table.trie_root(x);
        let entry = match table.trie_leaf(root) {
            Some(e) => e,
            None => {
                let mut node = root;
                let mut prefix = Codeword::EMPTY;
                loop {
                    let bit = r.read_bit()?;
                    prefix = prefix.push(bit).ok_or(Error::CodewordTooLong { max: MAX_CODEWORD_BITS })?;
                    match table.trie_step(node, bit) {
                        TrieStep::Inner(c) => node = c,
                        TrieStep::Leaf(e) => break e,
                        TrieStep::Dead => return Err(Error::UnmatchedCodeword { state: x, prefix }),
                    }
                }
            }
        };
        out.push(entry.symbol);
        x = entry.next;
    }
    let rest = r.remaining();
    if rest >= 8 || r.read_bits(rest as u32)? != 0 {
        return Err(Error::TrailingGarbage);
    }
    Ok(out)
}

/// Decodes β_1 … β_n forward from x̂_0.
pub fn decode(table: &AedsTable, stream: &Bitstream) -> Result<Vec<Symbol>> {
    let alphabet = table.alphabet();
    Ok(decode_indices(table, stream)?.into_iter().map(|i| alphabet[i]).collect())
}

/// Irreducibility and period of the encoding chain x̂ → F⁻_x̂(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErgodicityReport {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// gcd of cycle lengths; 0 when the chain is not irreducible.
    pub period: usize,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Ergodicity of the chain where every symbol has positive probability.
pub fn ergodicity(table: &AedsTable) -> ErgodicityReport {
    let n = table.n_states();
    let m = table.n_symbols();
    let succ = |x: usize| (0..m).map(move |s| table.encode_entry(x, s).next);
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        for y in succ(x) {
            pred[y].push(x);
        }
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for y in succ(x) {
            if level[y] == usize::MAX {
                level[y] = level[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let mut back = vec![false; n];
    back[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for &y in &pred[x] {
            if !back[y] {
                back[y] = true;
                stack.push(y);
            }
        }
    }
    let irreducible = level.iter().all(|&l| l != usize::MAX) && back.iter().all(|&b| b);
    if !irreducible {
        return ErgodicityReport { irreducible, aperiodic: false, period: 0 };
    }
    let mut g = 0usize;
    for x in 0..n {
        for y in succ(x) {
            g = gcd(g, (level[x] + 1).abs_diff(level[y]));
        }
    }
    ErgodicityReport { irreducible, aperiodic: g == 1, period: g }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    pub ergodicity: ErgodicityReport,
    /// States whose decoder set has Kraft sum < 1.
    pub incomplete_states: usize,
}

/// Re-checks consistency, alphabet coverage and per-state prefix-freeness,
/// and reports ergodicity (a warning, not an error).
pub fn validate_aeds(table: &AedsTable) -> Result<ValidationReport> {
    let m = table.n_symbols();
    let n = table.n_states();
    if table.encoder_entries().len() != n * m {
        return Err(Error::MissingSymbol { state: table.encoder_entries().len() / m, symbol: 0 });
    }
    let mut seen = vec![false; n * m];
    let mut incomplete = 0;
    for x in 0..n {
        let mut cws: Vec<(Vec<bool>, Codeword)> = Vec::new();
        for d in table.decoder_entries(x) {
            let e = table.encode_entry(d.next, d.symbol);
            let idx = d.next * m + d.symbol;
            if e.next != x || e.codeword != d.codeword || seen[idx] {
                return Err(Error::InconsistentTables { state: d.next, symbol: d.symbol });
            }
            seen[idx] = true;
            cws.push(((0..d.codeword.len()).map(|i| d.codeword.bit(i)).collect(), d.codeword));
        }
        // In lexicographic order a prefix violation always shows up between neighbours.
        cws.sort();
        for w in cws.windows(2) {
            if w[0].1.is_prefix_of(&w[1].1) {
                return Err(Error::PrefixViolation { state: x, first: w[0].1, second: w[1].1 });
            }
        }
        if table.kraft_sum(x) < 1.0 - 1e-12 {
            incomplete += 1;
        }
    }
    if let Some(idx) = seen.iter().position(|&u| !u) {
        return Err(Error::InconsistentTables { state: idx / m, symbol: idx % m });
    }
    Ok(ValidationReport { ergodicity: ergodicity(table), incomplete_states: incomplete })
}

fn table_body(table: &AedsTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(TABLE_MAGIC);
    out.push(TABLE_VERSION);
    write_leb128(&mut out, table.n_states() as u64);
    write_leb128(&mut out, table.n_symbols() as u64);
    for s in table.alphabet() {
        write_leb128(&mut out, s.0 as u64);
    }
    for e in table.encoder_entries() {
        let l = e.codeword.len();
        out.push(l as u8);
        let nbytes = l.div_ceil(8);
        // Left-align the codeword into whole bytes.
        let aligned = if l == 0 { 0 } else { e.codeword.bits() << (nbytes * 8 - l) };
        for i in (0..nbytes).rev() {
            out.push((aligned >> (8 * i)) as u8);
        }
        write_leb128(&mut out, e.next as u64);
    }
    match table.state_names() {
        None => out.push(0),
        Some(names) => {
            out.push(1);
            for name in names {
                write_leb128(&mut out, name.len() as u64);
                out.extend_from_slice(name.as_bytes());
            }
        }
    }
    out
}

/// Canonical bytes: magic, version, N, alphabet, per-(x̂, s) codeword and next
/// state, optional state names, and a SHA-256 trailer over everything before.
pub fn serialize_table(table: &AedsTable) -> Vec<u8> {
    let mut out = table_body(table);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

/// SHA-256 over the canonical table body.
pub fn table_hash(table: &AedsTable) -> [u8; 32] {
    Sha256::digest(table_body(table)).into()
}

pub fn deserialize_table(bytes: &[u8]) -> Result<AedsTable> {
    let malformed = |what: &str| Error::MalformedTable(what.to_string());
    let truncated = |_| malformed("truncated table");
    if bytes.len() < 5 {
        return Err(malformed("truncated table"));
    }
    if &bytes[..4] != TABLE_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes[4] != TABLE_VERSION {
        return Err(Error::VersionMismatch { found: bytes[4], expected: TABLE_VERSION });
    }
    let mut pos = 5;
    let n = read_leb128(bytes, &mut pos).map_err(truncated)? as usize;
    let m = read_leb128(bytes, &mut pos).map_err(truncated)? as usize;
    if n == 0 || m == 0 || n.checked_mul(m).is_none_or(|c| c > bytes.len()) {
        return Err(malformed("implausible table dimensions"));
    }
    let mut alphabet = Vec::with_capacity(m);
    for _ in 0..m {
        let s = read_leb128(bytes, &mut pos).map_err(truncated)?;
        alphabet.push(Symbol(u32::try_from(s).map_err(|_| malformed("symbol id overflow"))?));
    }
    let mut encoder = Vec::with_capacity(n * m);
    for _ in 0..n * m {
        let &l = bytes.get(pos).ok_or_else(|| malformed("truncated table"))?;
        pos += 1;
        let l = l as usize;
        if l > MAX_CODEWORD_BITS {
            return Err(malformed("codeword too long"));
        }
        let nbytes = l.div_ceil(8);
        let raw = bytes.get(pos..pos + nbytes).ok_or_else(|| malformed("truncated table"))?;
        pos += nbytes;
        let mut v: u128 = 0;
        for &b in raw {
            v = (v << 8) | b as u128;
        }
        let pad = nbytes * 8 - l;
        if pad > 0 && v & ((1u128 << pad) - 1) != 0 {
            return Err(malformed("nonzero codeword padding"));
        }
        let bits = if nbytes == 0 { 0 } else { v >> pad };
        let next = read_leb128(bytes, &mut pos).map_err(truncated)? as usize;
        encoder.push(EncoderEntry { codeword: Codeword::new(bits, l), next });
    }
    let &flag = bytes.get(pos).ok_or_else(|| malformed("truncated table"))?;
    pos += 1;
    let names = match flag {
        0 => None,
        1 => {
            let mut names = Vec::with_capacity(n);
            for _ in 0..n {
                let len = read_leb128(bytes, &mut pos).map_err(truncated)? as usize;
                let raw = bytes.get(pos..pos + len).ok_or_else(|| malformed("truncated table"))?;
                pos += len;
                names.push(String::from_utf8(raw.to_vec()).map_err(|_| malformed("state name is not UTF-8"))?);
            }
            Some(names)
        }
        _ => return Err(malformed("bad names flag")),
    };
    match bytes.len() - pos {
        32 => {}
        k if k < 32 => return Err(malformed("truncated table")),
        _ => return Err(malformed("trailing bytes after table")),
    }
    if Sha256::digest(&bytes[..pos]).as_slice() != &bytes[pos..] {
        return Err(Error::HashMismatch);
    }
    let table = AedsTable::from_encoder(alphabet, n, encoder)?;
    match names {
        Some(names) => table.with_state_names(names),
        None => Ok(table),
    }
}
