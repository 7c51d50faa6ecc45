use aeds_core::analysis::{stationary_with, SolverConfig};
use aeds_core::constructors::{
    build_huffman_matching_saeds, build_large_n, build_saeds_case2, build_saeds_case3, build_tree_code, build_type1,
    build_type2,
};
use aeds_core::prefix_codes::build_huffman;
use aeds_core::tans::{build_tans, quantize_counts, tans_to_aeds, SpreadPolicy};
use aeds_core::{AedsTable, SourceDistribution};
use clap::ValueEnum;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Codec {
    Huffman,
    Type1,
    Type2,
    SaedsCase1,
    SaedsCase2,
    SaedsCase3,
    LargeN,
    Tans,
}

impl Codec {
    pub fn name(self) -> &'static str {
        match self {
            Codec::Huffman => "huffman",
            Codec::Type1 => "type1",
            Codec::Type2 => "type2",
            Codec::SaedsCase1 => "saeds-case1",
            Codec::SaedsCase2 => "saeds-case2",
            Codec::SaedsCase3 => "saeds-case3",
            Codec::LargeN => "large-n",
            Codec::Tans => "tans",
        }
    }

    /// N used when --states is absent. For saeds-case1 it is the state budget.
    fn default_states(self, m: usize) -> usize {
        match self {
            Codec::Huffman | Codec::Type2 => 0,
            Codec::Type1 => 2,
            Codec::SaedsCase1 => 1 << 16,
            _ => 1024usize.max(m.next_power_of_two()),
        }
    }
}

pub struct Built {
    pub table: AedsTable,
    pub requested: Codec,
    pub used: Codec,
    pub huffman_length: f64,
    /// Average length from the stationary solve, when it succeeded.
    pub analytic: Option<f64>,
    pub fallback_reason: Option<String>,
}

fn raw_table(p: &SourceDistribution, codec: Codec, states: usize) -> aeds_core::Result<AedsTable> {
    let tree = build_huffman(p)?;
    match codec {
        Codec::Huffman => build_tree_code(&tree, p),
        Codec::Type1 => build_type1(&tree, p, states),
        Codec::Type2 => build_type2(&tree, p),
        Codec::SaedsCase1 => build_huffman_matching_saeds(p, states),
        Codec::SaedsCase2 => build_saeds_case2(p, &quantize_counts(p, states)?),
        Codec::SaedsCase3 => build_saeds_case3(p, &quantize_counts(p, states)?),
        Codec::LargeN => build_large_n(p, &quantize_counts(p, states)?).map(|(t, _)| t),
        Codec::Tans => build_tans(p, states, SpreadPolicy::SortedInterval).map(|t| tans_to_aeds(&t)),
    }
}

/// Builds the requested table and falls back to the plain Huffman code when
/// its solved average length does not beat Huffman.
pub fn build(
    p: &SourceDistribution,
    codec: Codec,
    states: Option<usize>,
    solver: &SolverConfig,
    allow_fallback: bool,
) -> Result<Built, CliError> {
    let states = states.unwrap_or_else(|| codec.default_states(p.len()));
    let huffman_length = build_huffman(p)?.average_length(p);
    let table = raw_table(p, codec, states)?;
    let solved = stationary_with(&table, p, solver);
    let analytic = solved.as_ref().ok().map(|r| r.l_encoder_view);
    let reason = match (&solved, analytic) {
        _ if codec == Codec::Huffman || !allow_fallback => None,
        (Err(e), _) => Some(format!("stationary solve failed: {e}")),
        (_, Some(l)) if huffman_length - l <= 1e-12 => {
            Some(format!("L = {l:.6} does not beat Huffman L = {huffman_length:.6}"))
        }
        _ => None,
    };
    if reason.is_some() {
        return Ok(Built {
            table: raw_table(p, Codec::Huffman, 0)?,
            requested: codec,
            used: Codec::Huffman,
            huffman_length,
            analytic: Some(huffman_length),
            fallback_reason: reason,
        });
    }
    Ok(Built { table, requested: codec, used: codec, huffman_length, analytic, fallback_reason: None })
}
