//! The "AEDC" file: magic, version, table section, symbol and block counts,
//! length-prefixed blocks (each a codec Bitstream), SHA-256 of the original
//! bytes.

use std::io::{Read, Write};

use aeds_core::codec::write_leb128;
use aeds_core::Error;

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"AEDC";
pub const VERSION: u8 = 1;
pub const BLOCK_SYMBOLS: usize = 1 << 20;

const MODE_NONE: u8 = 0;
const MODE_EMBEDDED: u8 = 1;
const MODE_HASH: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableSection {
    /// Empty input: nothing to decode.
    None,
    Embedded(Vec<u8>),
    /// SHA-256 of the table body; the table lives in a side file.
    Hash([u8; 32]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub table: TableSection,
    pub total_symbols: u64,
    pub blocks: u64,
}

pub fn block_count(total: u64) -> u64 {
    total.div_ceil(BLOCK_SYMBOLS as u64)
}

pub fn write_header<W: Write>(w: &mut W, h: &Header) -> std::io::Result<()> {
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    match &h.table {
        TableSection::None => out.push(MODE_NONE),
        TableSection::Embedded(bytes) => {
            out.push(MODE_EMBEDDED);
            write_leb128(&mut out, bytes.len() as u64);
        }
        TableSection::Hash(digest) => {
            out.push(MODE_HASH);
            out.extend_from_slice(digest);
        }
    }
    w.write_all(&out)?;
    if let TableSection::Embedded(bytes) = &h.table {
        w.write_all(bytes)?;
    }
    let mut tail = Vec::new();
    write_leb128(&mut tail, h.total_symbols);
    write_leb128(&mut tail, h.blocks);
    w.write_all(&tail)
}

pub fn write_block<W: Write>(w: &mut W, block: &[u8]) -> std::io::Result<()> {
    let mut len = Vec::new();
    write_leb128(&mut len, block.len() as u64);
    w.write_all(&len)?;
    w.write_all(block)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), CliError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => CliError::Data(Error::TruncatedStream),
        _ => CliError::Io(e),
    })
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, CliError> {
    let mut b = [0u8];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn read_leb<R: Read>(r: &mut R) -> Result<u64, CliError> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = read_u8(r)?;
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(CliError::Data(Error::MalformedTable("LEB128 overflow".into())))
}

/// Refuses lengths that would not fit a block's worst case, so a corrupt
/// prefix cannot trigger a huge allocation.
fn read_sized<R: Read>(r: &mut R, limit: u64) -> Result<Vec<u8>, CliError> {
    let len = read_leb(r)?;
    if len > limit {
        return Err(CliError::Data(Error::MalformedTable(format!("section length {len} exceeds {limit}"))));
    }
    let mut buf = vec![0u8; len as usize];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

pub fn read_header<R: Read>(r: &mut R) -> Result<Header, CliError> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadMagic.into());
    }
    let version = read_u8(r)?;
    if version != VERSION {
        return Err(Error::VersionMismatch { found: version, expected: VERSION }.into());
    }
    let table = match read_u8(r)? {
        MODE_NONE => TableSection::None,
        MODE_EMBEDDED => TableSection::Embedded(read_sized(r, 1 << 32)?),
        MODE_HASH => {
            let mut d = [0u8; 32];
            read_exact(r, &mut d)?;
            TableSection::Hash(d)
        }
        m => return Err(Error::MalformedTable(format!("unknown table mode {m}")).into()),
    };
    let total_symbols = read_leb(r)?;
    let blocks = read_leb(r)?;
    if blocks != block_count(total_symbols) {
        return Err(Error::MalformedTable(format!("{blocks} blocks for {total_symbols} symbols")).into());
    }
    Ok(Header { table, total_symbols, blocks })
}

/// A block holds at most 2^20 codewords of at most 128 bits each.
pub fn read_block<R: Read>(r: &mut R) -> Result<Vec<u8>, CliError> {
    read_sized(r, (BLOCK_SYMBOLS as u64) * 16 + 64)
}

pub fn read_digest<R: Read>(r: &mut R) -> Result<[u8; 32], CliError> {
    let mut d = [0u8; 32];
    read_exact(r, &mut d)?;
    let mut extra = [0u8];
    match r.read(&mut extra)? {
        0 => Ok(d),
        _ => Err(Error::TrailingGarbage.into()),
    }
}
