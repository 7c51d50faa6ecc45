use std::io::Write;

use aeds_core::analysis::{
    analytic_length, delta_type1, delta_type2, format_sig, mu_binary, mu_huffman_uniform, mu_worst_case,
    smallest_dominating_gamma, stationary_distribution, binary_entropy, CurveKind,
};
use aeds_core::constructors::{build_large_n, build_type1, build_type2, optimal_uniform_split, SplitVariant};
use aeds_core::prefix_codes::CodeTree;
use aeds_core::{Codeword, SourceDistribution};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "delta-type1")]
    DeltaType1,
    #[value(name = "delta-type2")]
    DeltaType2,
    #[value(name = "worst-case")]
    WorstCase,
    #[value(name = "uniform-n2")]
    UniformN2,
    #[value(name = "uniform-nsweep")]
    UniformNSweep,
    #[value(name = "uniform-type2")]
    UniformType2,
    #[value(name = "binary")]
    Binary,
    #[value(name = "table1")]
    Table1,
    #[value(name = "largeN-sweep")]
    LargeNSweep,
}

type Rows = (Vec<&'static str>, Vec<Vec<String>>);

fn sig(x: f64) -> String {
    format_sig(x, 12)
}

/// P_R = 0.500, 0.505, ..., 0.995.
fn pr_grid() -> Vec<f64> {
    (500..1000).step_by(5).map(|i| i as f64 / 1000.0).collect()
}

/// Four symbols whose tree puts weight exactly `pr` on the right subtree.
fn split_source(pr: f64) -> (CodeTree, SourceDistribution) {
    let p = SourceDistribution::from_weights(&[0.6 * pr, 0.4 * pr, 0.5 * (1.0 - pr), 0.5 * (1.0 - pr)])
        .expect("positive weights");
    let words = ["11", "10", "01", "00"].iter().map(|s| Codeword::parse(s).unwrap()).collect();
    (CodeTree::from_codewords(words).expect("complete tree"), p)
}

fn solved_delta(pr: f64, type2: bool) -> Result<f64, CliError> {
    let (tree, p) = split_source(pr);
    let t = if type2 { build_type2(&tree, &p)? } else { build_type1(&tree, &p, 2)? };
    Ok(tree.average_length(&p) - analytic_length(&t, &p)?)
}

fn delta_type1_rows() -> Result<Rows, CliError> {
    let sizes = [2, 3, 4, 8, 16];
    let rows = pr_grid()
        .into_iter()
        .map(|pr| {
            let mut row = vec![sig(pr)];
            row.extend(sizes.iter().map(|&n| sig(delta_type1(pr, n))));
            row.push(sig(solved_delta(pr, false)?.max(0.0)));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    Ok((vec!["p_r", "delta_n2", "delta_n3", "delta_n4", "delta_n8", "delta_n16", "solver_n2"], rows))
}

fn delta_type2_rows() -> Result<Rows, CliError> {
    let rows = pr_grid()
        .into_iter()
        .map(|pr| {
            Ok(vec![
                sig(pr),
                sig(delta_type2(pr)),
                sig(delta_type1(pr, 2)),
                sig(solved_delta(pr, true)?.max(0.0)),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    Ok((vec!["p_r", "delta_type2", "delta_type1_n2", "solver_type2"], rows))
}

fn worst_case_rows() -> Rows {
    let kinds = [CurveKind::Huffman, CurveKind::Type1 { n: 2 }, CurveKind::Type1 { n: 4 }, CurveKind::Type2];
    let rows = pr_grid()
        .into_iter()
        .map(|p1| std::iter::once(sig(p1)).chain(kinds.iter().map(|&k| sig(mu_worst_case(k, p1)))).collect())
        .collect();
    (vec!["p1", "mu_huffman", "mu_type1_n2", "mu_type1_n4", "mu_type2"], rows)
}

fn uniform_rows(variant: SplitVariant, n: usize) -> Result<Vec<Vec<String>>, CliError> {
    (2..=256usize)
        .map(|m| {
            let r = optimal_uniform_split(m, n, variant)?;
            Ok(vec![
                m.to_string(),
                sig(mu_huffman_uniform(m)),
                r.m_r.to_string(),
                r.m_l.to_string(),
                sig(r.mu_hat),
                sig(r.delta_hat),
            ])
        })
        .collect()
}

fn nsweep_rows() -> Result<Rows, CliError> {
    let mut rows = Vec::new();
    for n in [2usize, 3, 4, 8, 16] {
        for m in 2..=256usize {
            let r = optimal_uniform_split(m, n, SplitVariant::Type1)?;
            rows.push(vec![m.to_string(), n.to_string(), r.m_r.to_string(), r.m_l.to_string(), sig(r.mu_hat)]);
        }
    }
    Ok((vec!["m", "n", "m_r", "m_l", "mu"], rows))
}

fn binary_rows() -> Rows {
    let rows = pr_grid()
        .into_iter()
        .map(|r| {
            let mut row = vec![sig(r), sig(binary_entropy(r)), sig(mu_binary(CurveKind::Huffman, r))];
            for n in [2, 4, 8, 16] {
                row.push(sig(mu_binary(CurveKind::Type1 { n }, r)));
            }
            row.push(sig(mu_binary(CurveKind::Type2, r)));
            let best = (2..=16)
                .map(|n| mu_binary(CurveKind::Type1 { n }, r))
                .chain([mu_binary(CurveKind::Type2, r), mu_binary(CurveKind::Huffman, r)])
                .fold(f64::INFINITY, f64::min);
            row.push(sig(best));
            row
        })
        .collect();
    (
        vec!["r", "entropy", "mu_huffman", "mu_type1_n2", "mu_type1_n4", "mu_type1_n8", "mu_type1_n16", "mu_type2", "mu_best"],
        rows,
    )
}

fn table1_rows() -> Result<Rows, CliError> {
    let rows = (73..=109usize)
        .map(|m| {
            let r = optimal_uniform_split(m, 2, SplitVariant::Type1)?;
            Ok(vec![m.to_string(), r.m_r.to_string(), r.m_l.to_string(), sig(r.l), sig(r.delta_hat), sig(r.mu_hat)])
        })
        .collect::<Result<_, CliError>>()?;
    Ok((vec!["m", "m_r", "m_l", "l", "delta_hat", "mu_hat"], rows))
}

/// Source {3/8, 3/8, 1/4} at N = 2^3 ... 2^12 with exact counts.
fn large_n_rows() -> Result<Rows, CliError> {
    let p = SourceDistribution::from_weights(&[3.0, 3.0, 2.0]).expect("positive weights");
    let h = p.entropy();
    let rows = (3..=12u32)
        .into_par_iter()
        .map(|k| {
            let n = 1usize << k;
            let (t, _) = build_large_n(&p, &[3 * n / 8, 3 * n / 8, n / 4])?;
            let r = stationary_distribution(&t, &p)?;
            let gamma = smallest_dominating_gamma(&r.q, &[3.0, 4.0, 8.0, 16.0]);
            let excess = r.l_encoder_view - h;
            Ok(vec![
                n.to_string(),
                sig(r.l_encoder_view),
                sig(h),
                sig(excess),
                sig(excess * n as f64),
                gamma.map_or_else(String::new, sig),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    Ok((vec!["n", "l", "entropy", "excess", "excess_times_n", "dominating_gamma"], rows))
}

pub fn rows(figure: Figure) -> Result<Rows, CliError> {
    let uniform_header = vec!["m", "mu_huffman", "m_r", "m_l", "mu", "delta_hat"];
    match figure {
        Figure::DeltaType1 => delta_type1_rows(),
        Figure::DeltaType2 => delta_type2_rows(),
        Figure::WorstCase => Ok(worst_case_rows()),
        Figure::UniformN2 => Ok((uniform_header, uniform_rows(SplitVariant::Type1, 2)?)),
        Figure::UniformNSweep => nsweep_rows(),
        Figure::UniformType2 => Ok((uniform_header, uniform_rows(SplitVariant::Type2, 0)?)),
        Figure::Binary => Ok(binary_rows()),
        Figure::Table1 => table1_rows(),
        Figure::LargeNSweep => large_n_rows(),
    }
}

pub fn write<W: Write>(figure: Figure, out: W) -> Result<(), CliError> {
    let (header, rows) = rows(figure)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}
