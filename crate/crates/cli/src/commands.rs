use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use aeds_core::analysis::{check_bound, monte_carlo_rate, stationary_with, write_bound_csv, BoundKind, NearIdealRate, SolverConfig};
use aeds_core::codec::{decode_indices, deserialize_table, encode_indices, serialize_table, table_hash, Bitstream, InitialState};
use aeds_core::{AedsTable, Error, SourceDistribution};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::codecs::{build, Built, Codec};
use crate::container::{self, Header, TableSection, BLOCK_SYMBOLS};
use crate::CliError;

/// Blocks held in memory per parallel batch.
fn batch_blocks() -> usize {
    2 * rayon::current_num_threads().max(1)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(path)?))
}

/// Reads until `buf` is full or the input ends.
fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..])? {
            0 => break,
            k => got += k,
        }
    }
    Ok(got)
}

pub fn histogram(path: &Path) -> Result<([u64; 256], u64), CliError> {
    let mut r = open(path)?;
    let mut counts = [0u64; 256];
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0;
    loop {
        let k = fill(&mut r, &mut buf)?;
        if k == 0 {
            break;
        }
        for &b in &buf[..k] {
            counts[b as usize] += 1;
        }
        total += k as u64;
    }
    Ok((counts, total))
}

/// Byte distribution of a non-empty histogram. A single distinct byte gets a
/// companion with pseudo-count 1 so the alphabet has two symbols.
pub fn byte_distribution(counts: &[u64; 256]) -> Result<SourceDistribution, CliError> {
    let mut c = *counts;
    let present: Vec<usize> = (0..256).filter(|&b| c[b] > 0).collect();
    if present.len() == 1 {
        c[(present[0] + 1) % 256] = 1;
    }
    Ok(SourceDistribution::from_byte_counts(&c)?)
}

pub fn parse_probs(list: &str) -> Result<SourceDistribution, CliError> {
    let w = list
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad probability {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SourceDistribution::from_weights(&w)?)
}

fn byte_lut(table: &AedsTable) -> Result<[u16; 256], CliError> {
    let mut lut = [u16::MAX; 256];
    for (i, s) in table.alphabet().iter().enumerate() {
        let b = u8::try_from(s.0).map_err(|_| Error::AlphabetMismatch(format!("symbol {} is not a byte", s.0)))?;
        lut[b as usize] = i as u16;
    }
    Ok(lut)
}

fn print_build(b: &Built, h: f64) {
    println!("codec: {} (requested {})", b.used.name(), b.requested.name());
    if let Some(r) = &b.fallback_reason {
        println!("fallback: {r}");
    }
    println!("states: {}", b.table.n_states());
    println!("entropy: {h:.6}");
    println!("huffman L: {:.6}", b.huffman_length);
    match b.analytic {
        Some(l) => println!("analytic L: {l:.6}"),
        None => println!("analytic L: unavailable"),
    }
}

pub struct CompressArgs<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub codec: Codec,
    pub states: Option<usize>,
    pub table_out: Option<&'a Path>,
    pub solver: SolverConfig,
}

pub fn compress(a: &CompressArgs) -> Result<(), CliError> {
    let (counts, total) = histogram(a.input)?;
    let mut out = BufWriter::new(File::create(a.output)?);
    if total == 0 {
        container::write_header(&mut out, &Header { table: TableSection::None, total_symbols: 0, blocks: 0 })?;
        out.write_all(&Sha256::digest([]))?;
        out.flush()?;
        println!("empty input: header-only container");
        return Ok(());
    }
    let p = byte_distribution(&counts)?;
    let built = build(&p, a.codec, a.states, &a.solver, true)?;
    print_build(&built, p.entropy());
    let table = &built.table;
    let serialized = serialize_table(table);
    let section = match a.table_out {
        Some(path) => {
            std::fs::write(path, &serialized)?;
            TableSection::Hash(table_hash(table))
        }
        None => TableSection::Embedded(serialized),
    };
    let blocks = container::block_count(total);
    container::write_header(&mut out, &Header { table: section, total_symbols: total, blocks })?;

    let lut = byte_lut(table)?;
    let mut input = open(a.input)?;
    let mut hasher = Sha256::new();
    let (mut seen, mut payload_bits, mut written_blocks) = (0u64, 0u64, 0u64);
    loop {
        let mut batch = Vec::with_capacity(batch_blocks());
        for _ in 0..batch_blocks() {
            let mut buf = vec![0u8; BLOCK_SYMBOLS];
            let k = fill(&mut input, &mut buf)?;
            if k == 0 {
                break;
            }
            buf.truncate(k);
            batch.push(buf);
        }
        if batch.is_empty() {
            break;
        }
        let encoded: Vec<Result<Bitstream, CliError>> = batch
            .par_iter()
            .map(|data| {
                let idx: Vec<usize> = data.iter().map(|&b| lut[b as usize] as usize).collect();
                if let Some(pos) = idx.iter().position(|&i| i == u16::MAX as usize) {
                    return Err(Error::UnknownSymbol(pos).into());
                }
                Ok(encode_indices(table, &idx, InitialState::Zero)?)
            })
            .collect();
        for (data, stream) in batch.iter().zip(encoded) {
            let stream = stream?;
            if stream.n_symbols != data.len() as u64 {
                return Err(CliError::Internal(format!("block encoded {} of {} symbols", stream.n_symbols, data.len())));
            }
            hasher.update(data);
            seen += data.len() as u64;
            payload_bits += stream.payload_bits;
            written_blocks += 1;
            container::write_block(&mut out, &stream.to_bytes())?;
        }
    }
    if seen != total || written_blocks != blocks {
        return Err(CliError::Internal(format!("input changed between passes: {seen} of {total} bytes")));
    }
    out.write_all(&hasher.finalize())?;
    out.flush()?;
    drop(out);
    let size = std::fs::metadata(a.output)?.len();
    println!("payload bits/byte: {:.6}", payload_bits as f64 / total as f64);
    println!("container bits/byte: {:.6}", 8.0 * size as f64 / total as f64);
    Ok(())
}

pub fn decompress(input: &Path, output: &Path, side_table: Option<&Path>) -> Result<(), CliError> {
    let result = decompress_inner(input, output, side_table);
    if result.is_err() {
        let _ = std::fs::remove_file(output);
    }
    result
}

fn decompress_inner(input: &Path, output: &Path, side_table: Option<&Path>) -> Result<(), CliError> {
    let mut r = open(input)?;
    let header = container::read_header(&mut r)?;
    let table = match &header.table {
        TableSection::None => None,
        TableSection::Embedded(bytes) => Some(deserialize_table(bytes)?),
        TableSection::Hash(digest) => {
            let path = side_table.ok_or_else(|| CliError::Usage("container references a side table; pass --table".into()))?;
            let t = deserialize_table(&std::fs::read(path)?)?;
            if &table_hash(&t) != digest {
                return Err(Error::HashMismatch.into());
            }
            Some(t)
        }
    };
    let mut out = BufWriter::new(File::create(output)?);
    let mut hasher = Sha256::new();
    let mut produced = 0u64;
    if let Some(table) = &table {
        let bytes: Vec<u8> = table
            .alphabet()
            .iter()
            .map(|s| u8::try_from(s.0).map_err(|_| Error::AlphabetMismatch(format!("symbol {} is not a byte", s.0))))
            .collect::<Result<_, _>>()?;
        let mut left = header.blocks;
        while left > 0 {
            let k = left.min(batch_blocks() as u64);
            let raw = (0..k).map(|_| container::read_block(&mut r)).collect::<Result<Vec<_>, _>>()?;
            left -= k;
            let decoded: Vec<Result<Vec<u8>, CliError>> = raw
                .par_iter()
                .map(|b| {
                    let stream = Bitstream::from_bytes(b)?;
                    if stream.n_symbols > BLOCK_SYMBOLS as u64 {
                        return Err(Error::MalformedTable(format!("block of {} symbols", stream.n_symbols)).into());
                    }
                    Ok(decode_indices(table, &stream)?.into_iter().map(|i| bytes[i]).collect())
                })
                .collect();
            for d in decoded {
                let d = d?;
                hasher.update(&d);
                produced += d.len() as u64;
                out.write_all(&d)?;
            }
        }
    } else if header.total_symbols != 0 {
        return Err(Error::MalformedTable("symbols declared without a table".into()).into());
    }
    if produced != header.total_symbols {
        return Err(Error::MalformedTable(format!("decoded {produced} of {} symbols", header.total_symbols)).into());
    }
    let digest = container::read_digest(&mut r)?;
    if digest[..] != hasher.finalize()[..] {
        return Err(Error::HashMismatch.into());
    }
    out.flush()?;
    println!("decoded {produced} bytes");
    Ok(())
}

/// Distribution from --probs, or from the byte histogram of --input.
pub fn distribution(input: Option<&Path>, probs: Option<&str>) -> Result<SourceDistribution, CliError> {
    match (input, probs) {
        (_, Some(list)) => parse_probs(list),
        (Some(path), None) => {
            let (counts, total) = histogram(path)?;
            if total == 0 {
                return Err(Error::DegenerateAlphabet(0).into());
            }
            byte_distribution(&counts)
        }
        (None, None) => Err(CliError::Usage("give --input or --probs".into())),
    }
}

pub fn build_table(
    p: &SourceDistribution,
    codec: Codec,
    states: Option<usize>,
    solver: &SolverConfig,
    fallback: bool,
    output: &Path,
) -> Result<(), CliError> {
    let built = build(p, codec, states, solver, fallback)?;
    print_build(&built, p.entropy());
    std::fs::write(output, serialize_table(&built.table))?;
    let hex: String = table_hash(&built.table).iter().map(|b| format!("{b:02x}")).collect();
    println!("table hash: {hex}");
    Ok(())
}

pub struct AnalyzeArgs<'a> {
    pub table: Option<&'a Path>,
    pub codec: Codec,
    pub states: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub csv: Option<&'a PathBuf>,
    pub solver: SolverConfig,
}

/// Bound checks that apply to sAEDS tables; the others are skipped.
const BOUNDS: [BoundKind; 10] = [
    BoundKind::Case1,
    BoundKind::Case2,
    BoundKind::Case3,
    BoundKind::IdealLength,
    BoundKind::HarmonicLength,
    BoundKind::NearIdeal { eta: 1.0, rate: NearIdealRate::InvSquare },
    BoundKind::NearIdeal { eta: 1.0, rate: NearIdealRate::InvNLogN },
    BoundKind::NearIdeal { eta: 1.0, rate: NearIdealRate::InvN },
    BoundKind::ShiftedLength { gamma: 4.0 },
    BoundKind::ShiftedDomination { gamma: 4.0 },
];

pub fn analyze(p: &SourceDistribution, a: &AnalyzeArgs) -> Result<(), CliError> {
    let table = match a.table {
        Some(path) => deserialize_table(&std::fs::read(path)?)?,
        None => build(p, a.codec, a.states, &a.solver, false)?.table,
    };
    let r = stationary_with(&table, p, &a.solver)?;
    println!("states: {}", table.n_states());
    println!("entropy: {:.9}", p.entropy());
    println!("L (encoder view): {:.9}", r.l_encoder_view);
    println!("L (decoder view): {:.9}", r.l_decoder_view);
    println!("method: {:?}, residual {:.3e}", r.method, r.residual);
    if r.skipped_states > 0 {
        println!("decoder view skipped {} states with Q < 1e-300", r.skipped_states);
    }
    if a.samples > 0 {
        let mc = monte_carlo_rate(&table, p, a.samples, a.seed)?;
        println!("monte carlo: {:.6} bits/symbol (stderr {:.2e}, {} samples)", mc.rate, mc.stderr, mc.n);
    }
    let mut reports = Vec::new();
    for kind in BOUNDS {
        match check_bound(&table, p, kind) {
            Ok(rep) => reports.push(rep),
            Err(Error::KindMismatch(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    for rep in &reports {
        let premise = rep.premise.map_or(String::new(), |p| format!(" (premise {p})"));
        println!("{}: {} <= {} {}{premise}", rep.name, rep.left, rep.right, if rep.holds { "ok" } else { "VIOLATED" });
    }
    if let Some(path) = a.csv {
        write_bound_csv(&reports, File::create(path)?)?;
    }
    Ok(())
}
