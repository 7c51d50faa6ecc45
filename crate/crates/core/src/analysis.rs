//! Stationary analysis of the encoding chain, exact average code lengths, the
//! closed-form reduction and redundancy functions, bound checks and a seeded
//! Monte Carlo rate estimate.

use std::f64::consts::LOG2_E;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{encode_indices_traced, ergodicity};
use crate::error::{Error, Result};
use crate::model::{entropy, relative_entropy, AedsTable, SAedsPartition, SourceDistribution};
use crate::prefix_codes::{ceil_log2, mu_pi, phased_in_stats, sigma};

/// Tolerance used by [`BoundReport::holds`].
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Largest N solved directly.
    pub direct_limit: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { direct_limit: 1024, tolerance: 1e-12, max_iterations: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    DirectSolve,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryReport {
    pub q: Vec<f64>,
    pub method: StationaryMethod,
    /// max_x |Q(x) − (QP)(x)|.
    pub residual: f64,
    /// Largest / smallest pivot magnitude of the direct solve.
    pub condition_estimate: Option<f64>,
    /// Σ_x̂ Σ_s p(s) Q(x̂) l(E_x̂(s)).
    pub l_encoder_view: f64,
    /// Σ_x Σ_β Q(x) p̃(β|x) l(β).
    pub l_decoder_view: f64,
    /// States skipped in the decoder view because Q(x) < 1e-300.
    pub skipped_states: usize,
}

fn check_alphabet(table: &AedsTable, p: &SourceDistribution) -> Result<()> {
    if table.alphabet() != p.symbols() {
        return Err(Error::AlphabetMismatch(format!(
            "table has {} symbols, source {}",
            table.n_symbols(),
            p.len()
        )));
    }
    Ok(())
}

/// (QP)(x) computed over the encoder entries.
fn apply_chain(table: &AedsTable, p: &SourceDistribution, q: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let m = table.n_symbols();
    for (i, e) in table.encoder_entries().iter().enumerate() {
        out[e.next] += p.prob(i % m) * q[i / m];
    }
}

fn residual_of(table: &AedsTable, p: &SourceDistribution, q: &[f64]) -> f64 {
    let mut next = vec![0.0; q.len()];
    apply_chain(table, p, q, &mut next);
    q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Solves (Pᵀ − I)Q = 0 with the last equation replaced by ΣQ = 1.
fn direct_solve(table: &AedsTable, p: &SourceDistribution) -> (Vec<f64>, f64) {
    let n = table.n_states();
    let m = table.n_symbols();
    let mut a = vec![0.0f64; n * n];
    for (i, e) in table.encoder_entries().iter().enumerate() {
        a[e.next * n + i / m] += p.prob(i % m);
    }
    for x in 0..n {
        a[x * n + x] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    let mut b = vec![0.0f64; n];
    b[n - 1] = 1.0;
    let (mut max_piv, mut min_piv) = (0.0f64, f64::INFINITY);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))
            .unwrap();
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        max_piv = max_piv.max(d.abs());
        min_piv = min_piv.min(d.abs());
        if d == 0.0 {
            continue;
        }
        let (top, rest) = a.split_at_mut((col + 1) * n);
        let pivot_row = &top[col * n..];
        for r in 0..n - col - 1 {
            let row = &mut rest[r * n..(r + 1) * n];
            let f = row[col] / d;
            if f != 0.0 {
                for j in col..n {
                    row[j] -= f * pivot_row[j];
                }
                b[col + 1 + r] -= f * b[col];
            }
        }
    }
    let mut q = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for j in row + 1..n {
            s -= a[row * n + j] * q[j];
        }
        let d = a[row * n + row];
        q[row] = if d == 0.0 { 0.0 } else { s / d };
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    (q, if min_piv > 0.0 { max_piv / min_piv } else { f64::INFINITY })
}

fn power_iteration(table: &AedsTable, p: &SourceDistribution, cfg: &SolverConfig) -> Result<(Vec<f64>, f64)> {
    let n = table.n_states();
    let mut q = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut res = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        apply_chain(table, p, &q, &mut next);
        res = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut q, &mut next);
        if res <= cfg.tolerance {
            let total: f64 = q.iter().sum();
            q.iter_mut().for_each(|v| *v /= total);
            return Ok((q, res));
        }
    }
    Err(Error::NoConvergence(res))
}

/// Encoder view of L for any weighting of the states.
pub fn average_length(table: &AedsTable, p: &SourceDistribution, q: &[f64]) -> f64 {
    let m = table.n_symbols();
    table
        .encoder_entries()
        .iter()
        .enumerate()
        .map(|(i, e)| q[i / m] * p.prob(i % m) * e.codeword.len() as f64)
        .sum()
}

/// Decoder view of L: per entered state x, p̃(β|x) = p(s)Q(x̂)/Q(x).
fn decoder_view(table: &AedsTable, p: &SourceDistribution, q: &[f64]) -> (f64, usize) {
    let mut l = 0.0;
    let mut skipped = 0;
    for (x, &qx) in q.iter().enumerate() {
        if qx < 1e-300 {
            skipped += 1;
            continue;
        }
        let inner: f64 = table
            .decoder_entries(x)
            .iter()
            .map(|d| p.prob(d.symbol) * q[d.next] / qx * d.codeword.len() as f64)
            .sum();
        l += qx * inner;
    }
    (l, skipped)
}

pub fn stationary_with(table: &AedsTable, p: &SourceDistribution, cfg: &SolverConfig) -> Result<StationaryReport> {
    check_alphabet(table, p)?;
    let erg = ergodicity(table);
    if !erg.is_ergodic() {
        return Err(Error::NotErgodic { irreducible: erg.irreducible, period: erg.period });
    }
    let (q, method, condition_estimate) = if table.n_states() <= cfg.direct_limit {
        let (q, cond) = direct_solve(table, p);
        (q, StationaryMethod::DirectSolve, Some(cond))
    } else {
        let (q, _) = power_iteration(table, p, cfg)?;
        (q, StationaryMethod::PowerIteration, None)
    };
    let residual = residual_of(table, p, &q);
    let l_encoder_view = average_length(table, p, &q);
    let (l_decoder_view, skipped_states) = decoder_view(table, p, &q);
    Ok(StationaryReport {
        q,
        method,
        residual,
        condition_estimate,
        l_encoder_view,
        l_decoder_view,
        skipped_states,
    })
}

/// Stationary distribution of x̂ → F⁻_x̂(s), s ~ p, with both views of L.
pub fn stationary_distribution(table: &AedsTable, p: &SourceDistribution) -> Result<StationaryReport> {
    stationary_with(table, p, &SolverConfig::default())
}

/// Just Q.
pub fn solve_stationary(table: &AedsTable, p: &SourceDistribution) -> Result<Vec<f64>> {
    Ok(stationary_distribution(table, p)?.q)
}

/// Analytic average code length (encoder view).
pub fn analytic_length(table: &AedsTable, p: &SourceDistribution) -> Result<f64> {
    Ok(stationary_distribution(table, p)?.l_encoder_view)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    Type1 { n: usize },
    Type2,
}

fn check_pr(p_r: f64) -> Result<()> {
    if !(0.5..1.0).contains(&p_r) {
        return Err(Error::OutOfRange(format!("P_R = {p_r} outside [0.5, 1)")));
    }
    Ok(())
}

/// Closed-form stationary distributions of the Type-I and Type-II tables.
pub fn closed_form_stationary(kind: ClosedForm, p_r: f64) -> Result<Vec<f64>> {
    check_pr(p_r)?;
    let p = p_r;
    match kind {
        ClosedForm::Type1 { n } => {
            if n < 2 {
                return Err(Error::TooFewStates { needed: 2, got: n });
            }
            let denom = 1.0 - p.powi(n as i32);
            Ok((0..n).map(|j| p.powi(j as i32) * (1.0 - p) / denom).collect())
        }
        ClosedForm::Type2 => {
            let a = 2.0 - p;
            let b = 1.0 + p + p * p;
            Ok(vec![(1.0 - p) / a, (1.0 - p) * (1.0 - p) / a, p / b, p * p / b, p * p * p / b])
        }
    }
}

/// δ_N^(I)(P_R), clamped at 0.
pub fn delta_type1(p_r: f64, n: usize) -> f64 {
    let p = p_r;
    let k = ceil_log2(n);
    let pn = p.powi(n as i32);
    let v = (1.0 - p.powi(n as i32 - 1)) / (1.0 - pn) * p
        + (1.0 - p.powi((1i32 << k) - n as i32)) / (1.0 - pn) * (1.0 - p)
        - k as f64 * (1.0 - p);
    v.max(0.0)
}

/// δ^(II)(P_R), clamped at 0.
pub fn delta_type2(p_r: f64) -> f64 {
    let p = p_r;
    ((p * p * p - p * p + 2.0 * p - 1.0) / ((2.0 - p) * (1.0 + p + p * p))).max(0.0)
}

/// Positive root of P² + P − 1.
pub fn omega_type1() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real root of P³ − P² + 2P − 1 by bisection on [0.5, 0.7].
pub fn omega_type2() -> f64 {
    bisect(|p| p * p * p - p * p + 2.0 * p - 1.0, 0.5, 0.7, 1e-12)
}

/// Interval of P_R where δ^(II) exceeds δ_2^(I).
pub fn type2_advantage_interval() -> (f64, f64) {
    let hi = bisect(|p| delta_type2(p) - delta_type1(p, 2), omega_type1(), 0.75, 1e-12);
    (omega_type2(), hi)
}

/// h(r).
pub fn binary_entropy(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    -r * r.log2() - (1.0 - r) * (1.0 - r).log2()
}

/// Worst-case Huffman redundancy for a largest probability p_1: 2 − p_1 − h(p_1).
pub fn mu_huffman_worst(p1: f64) -> f64 {
    2.0 - p1 - binary_entropy(p1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Huffman,
    Type1 { n: usize },
    Type2,
}

impl CurveKind {
    fn delta(self, p_r: f64) -> f64 {
        match self {
            CurveKind::Huffman => 0.0,
            CurveKind::Type1 { n } => delta_type1(p_r, n),
            CurveKind::Type2 => delta_type2(p_r),
        }
    }
}

/// μ(p_1) = μ_H(p_1) − δ(p_1) for the worst-case source.
pub fn mu_worst_case(kind: CurveKind, p1: f64) -> f64 {
    mu_huffman_worst(p1) - kind.delta(p1)
}

/// Binary source {r, 1 − r}: μ(r) = 1 − h(r) − δ(r).
pub fn mu_binary(kind: CurveKind, r: f64) -> f64 {
    1.0 - binary_entropy(r) - kind.delta(r)
}

/// Uniform-source Huffman redundancy μ_H(M) = κ + 1 − 2^κ/M − lg M.
pub fn mu_huffman_uniform(m: usize) -> f64 {
    mu_pi(m)
}

/// P_{R,H}(M) as a fraction (numerator, M).
pub fn p_rh_ratio(m: usize) -> (usize, usize) {
    assert!(m >= 2);
    let kappa = ceil_log2(m);
    if kappa < 2 {
        return (1, 2);
    }
    let q = 1usize << (kappa - 2);
    if m >= 3 * q {
        (2 * q, m)
    } else {
        (m - q, m)
    }
}

/// Right-subtree weight of the Huffman tree of a uniform M-ary source.
pub fn p_rh(m: usize) -> f64 {
    let (a, b) = p_rh_ratio(m);
    a as f64 / b as f64
}

/// Tabulates `f` over a grid.
pub fn redundancy_curve(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    grid.iter().map(|&x| (x, f(x))).collect()
}

/// Q*(α_i) = lg((N+i)/(N+i−1)), i = 1..N.
pub fn q_star(n: usize) -> Vec<f64> {
    (1..=n).map(|i| lg_ratio(n, i as f64)).collect()
}

/// lg((N+c)/(N+c−1)) computed via ln_1p.
fn lg_ratio(n: usize, c: f64) -> f64 {
    (1.0 / (n as f64 + c - 1.0)).ln_1p() * LOG2_E
}

/// Q°(α_i) = θ/(N+i−1) normalized.
pub fn q_circ(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|i| 1.0 / (n + i - 1) as f64).collect();
    let theta = 1.0 / raw.iter().sum::<f64>();
    raw.into_iter().map(|v| v * theta).collect()
}

/// Truncation used inside Q*_γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaClamp {
    /// [a]_1 = max(a, 1).
    One,
    /// [a]_+ = max(a, 0).
    Positive,
}

/// Q*_γ(α_i) = lg((N+[i−γ])/(N+[i−γ]−1)).
pub fn q_star_gamma(n: usize, gamma: f64, clamp: GammaClamp) -> Vec<f64> {
    let floor = match clamp {
        GammaClamp::One => 1.0,
        GammaClamp::Positive => 0.0,
    };
    (1..=n).map(|i| lg_ratio(n, (i as f64 - gamma).max(floor))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// left ≤ right.
    Le,
    /// left < right; numerically the same tolerance as `Le`.
    Lt,
    /// left = right.
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub left: f64,
    pub right: f64,
    /// right − left.
    pub slack: f64,
    pub holds: bool,
    pub relation: Relation,
    /// Whether the hypothesis of a conditional statement is met.
    pub premise: Option<bool>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, left: f64, right: f64, relation: Relation) -> Self {
        let slack = right - left;
        let holds = match relation {
            Relation::Le | Relation::Lt => slack >= -BOUND_TOLERANCE,
            Relation::Eq => slack.abs() <= BOUND_TOLERANCE,
        };
        BoundReport { name: name.into(), left, right, slack, holds, relation, premise: None }
    }

    fn with_premise(mut self, premise: bool) -> Self {
        self.premise = Some(premise);
        self
    }
}

/// Rate regime of the near-ideal statements: the premise margin is η/N², η/(N lg N)
/// or η/N and the conclusion margin η/N, η/lg N or η.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NearIdealRate {
    InvSquare,
    InvNLogN,
    InvN,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Case1,
    Case2,
    Case3,
    /// L evaluated at Q = Q* equals H + D.
    IdealLength,
    NearIdeal { eta: f64, rate: NearIdealRate },
    /// Q° < Q* + lg e/(2N²), pointwise (scaled by N²).
    HarmonicPointwise,
    /// L at Q = Q° below H + D + lg e/(2N).
    HarmonicLength,
    /// Q*_γ < Q* + (γ+1/2) lg e/N², pointwise (scaled by N²).
    ShiftedUpper { gamma: f64, clamp: GammaClamp },
    /// Q*_γ > Q* + (γ−2) lg e/(4N²), pointwise (scaled by N²).
    ShiftedLower { gamma: f64, clamp: GammaClamp },
    /// L < H + D + (γ+1/2) lg e/N given Q ≤ Q*_γ.
    ShiftedLength { gamma: f64 },
    /// Solved Q ≤ Q*_γ for every state ([·]_1 clamp).
    ShiftedDomination { gamma: f64 },
}

struct SAedsContext {
    part: SAedsPartition,
    q: Vec<f64>,
    l: f64,
    h: f64,
    d: f64,
    n: usize,
}

fn saeds_context(table: &AedsTable, p: &SourceDistribution) -> Result<SAedsContext> {
    check_alphabet(table, p)?;
    let part = SAedsPartition::from_table(table)?;
    let report = stationary_distribution(table, p)?;
    let ratio = part.ratio_distribution(table.alphabet())?;
    Ok(SAedsContext {
        h: entropy(p),
        d: relative_entropy(p, &ratio)?,
        n: table.n_states(),
        l: report.l_encoder_view,
        q: report.q,
        part,
    })
}

/// Q̃_s(x) = Σ_{x̂∈ℱ⁺_x} Q(x̂).
fn q_tilde(ctx: &SAedsContext, x: usize) -> f64 {
    ctx.part.forward_set(x).iter().map(|&xh| ctx.q[xh]).sum()
}

/// max_i (a_i − b_i).
fn max_excess(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max)
}

/// Q° against Q*, scaled by N².
pub fn harmonic_pointwise(n: usize) -> BoundReport {
    let scale = (n * n) as f64;
    let left = max_excess(&q_circ(n), &q_star(n)) * scale;
    BoundReport::new(format!("harmonic N={n} (x N^2)"), left, LOG2_E / 2.0, Relation::Lt)
}

/// Q*_γ upper side, scaled by N².
pub fn shifted_upper(n: usize, gamma: f64, clamp: GammaClamp) -> BoundReport {
    let scale = (n * n) as f64;
    let left = max_excess(&q_star_gamma(n, gamma, clamp), &q_star(n)) * scale;
    BoundReport::new(format!("shifted-upper N={n} gamma={gamma} (x N^2)"), left, (gamma + 0.5) * LOG2_E, Relation::Lt)
}

/// Q*_γ lower side, scaled by N². Reports the tightest state.
pub fn shifted_lower(n: usize, gamma: f64, clamp: GammaClamp) -> BoundReport {
    let scale = (n * n) as f64;
    let gap = q_star_gamma(n, gamma, clamp)
        .iter()
        .zip(q_star(n))
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min);
    BoundReport::new(
        format!("shifted-lower N={n} gamma={gamma} (x N^2)"),
        (gamma - 2.0) * LOG2_E / 4.0,
        gap * scale,
        Relation::Lt,
    )
}

/// 1-based indices i where the Q*_γ lower inequality fails.
pub fn shifted_lower_violations(n: usize, gamma: f64, clamp: GammaClamp) -> Vec<usize> {
    let bound = (gamma - 2.0) * LOG2_E / 4.0;
    let scale = (n * n) as f64;
    q_star_gamma(n, gamma, clamp)
        .iter()
        .zip(q_star(n))
        .enumerate()
        .filter(|(_, (a, b))| (*a - b) * scale <= bound)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Smallest γ in `candidates` with Q ≤ Q*_γ at every state, if any.
pub fn smallest_dominating_gamma(q: &[f64], candidates: &[f64]) -> Option<f64> {
    let n = q.len();
    candidates.iter().copied().find(|&g| {
        q_star_gamma(n, g, GammaClamp::One)
            .iter()
            .zip(q)
            .all(|(b, a)| a - b <= BOUND_TOLERANCE / (n * n) as f64)
    })
}

/// Evaluates one analytic statement against the table.
pub fn check_bound(table: &AedsTable, p: &SourceDistribution, which: BoundKind) -> Result<BoundReport> {
    let ctx = saeds_context(table, p)?;
    let n = ctx.n;
    let counts = ctx.part.counts();
    let base = ctx.h + ctx.d;
    let report = match which {
        BoundKind::Case1 => {
            for (s, &ns) in counts.iter().enumerate() {
                if n % ns != 0 || ctx.part.subset(s).iter().any(|&x| ctx.part.forward_set(x).len() != n / ns) {
                    return Err(Error::KindMismatch(format!("symbol index {s} is not an integer-ratio layout")));
                }
            }
            BoundReport::new("case1", ctx.l, base + sigma(), Relation::Le)
        }
        BoundKind::Case2 => {
            let mut extra = 0.0;
            for (s, &ns) in counts.iter().enumerate() {
                let m = n / ns;
                let mut big = 0.0;
                for &x in ctx.part.subset(s) {
                    match ctx.part.forward_set(x).len() {
                        k if k == m => {}
                        k if k == m + 1 => big += q_tilde(&ctx, x),
                        _ => return Err(Error::KindMismatch(format!("symbol index {s} has an off-size forward set"))),
                    }
                }
                extra += p.prob(s) * ((m as f64 + big) / (n as f64 / ns as f64)).log2();
            }
            BoundReport::new("case2", ctx.l, base + sigma() + extra, Relation::Le)
        }
        BoundKind::Case3 => {
            if !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n));
            }
            let mut extra = 0.0;
            for (s, &ns) in counts.iter().enumerate() {
                for &x in ctx.part.subset(s) {
                    let lens: Vec<usize> = table.decoder_entries(x).iter().map(|d| d.codeword.len()).collect();
                    if lens.iter().any(|&l| l != lens[0]) {
                        return Err(Error::KindMismatch(format!("state {x} does not use a fixed-length code")));
                    }
                }
                let qt: Vec<f64> = ctx.part.subset(s).iter().map(|&x| q_tilde(&ctx, x)).collect();
                let stats = phased_in_stats(ns, Some(&qt))?;
                extra += p.prob(s) * (stats.nu - mu_pi(ns));
            }
            BoundReport::new("case3", ctx.l, base + extra, Relation::Le)
        }
        BoundKind::IdealLength => {
            let l_star = average_length(table, p, &q_star(n));
            BoundReport::new("ideal-length", l_star, base, Relation::Eq)
        }
        BoundKind::NearIdeal { eta, rate } => {
            let nf = n as f64;
            let (pre, post) = match rate {
                NearIdealRate::InvSquare => (eta / (nf * nf), eta / nf),
                NearIdealRate::InvNLogN => (eta / (nf * nf.log2()), eta / nf.log2()),
                NearIdealRate::InvN => (eta / nf, eta),
            };
            let premise = ctx.q.iter().zip(q_star(n)).all(|(a, b)| *a < b + pre);
            BoundReport::new(format!("near-ideal {rate:?} eta={eta}"), ctx.l, base + post, Relation::Lt).with_premise(premise)
        }
        BoundKind::HarmonicPointwise => harmonic_pointwise(n),
        BoundKind::HarmonicLength => {
            let l = average_length(table, p, &q_circ(n));
            BoundReport::new("harmonic-length", l, base + LOG2_E / (2.0 * n as f64), Relation::Lt)
        }
        BoundKind::ShiftedUpper { gamma, clamp } => shifted_upper(n, gamma, clamp),
        BoundKind::ShiftedLower { gamma, clamp } => shifted_lower(n, gamma, clamp),
        BoundKind::ShiftedLength { gamma } => {
            let qg = q_star_gamma(n, gamma, GammaClamp::One);
            let premise = ctx.q.iter().zip(&qg).all(|(a, b)| *a <= b + BOUND_TOLERANCE / (n * n) as f64);
            BoundReport::new(
                format!("shifted-length gamma={gamma}"),
                ctx.l,
                base + (gamma + 0.5) * LOG2_E / n as f64,
                Relation::Lt,
            )
            .with_premise(premise)
        }
        BoundKind::ShiftedDomination { gamma } => {
            let qg = q_star_gamma(n, gamma, GammaClamp::One);
            let scale = (n * n) as f64;
            BoundReport::new(
                format!("shifted-domination gamma={gamma} (x N^2)"),
                max_excess(&ctx.q, &qg) * scale,
                0.0,
                Relation::Le,
            )
        }
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub n: usize,
    /// Payload bits per symbol.
    pub rate: f64,
    /// Batch-means standard error of `rate`.
    pub stderr: f64,
    pub batches: usize,
}

/// Draws n i.i.d. symbols from p with a seeded ChaCha8 stream, encodes them
/// from state 0 and measures payload bits per symbol.
pub fn monte_carlo_rate(table: &AedsTable, p: &SourceDistribution, n: usize, seed: u64) -> Result<MonteCarloReport> {
    check_alphabet(table, p)?;
    let erg = ergodicity(table);
    if !erg.is_ergodic() {
        return Err(Error::NotErgodic { irreducible: erg.irreducible, period: erg.period });
    }
    if n < 4 {
        return Err(Error::OutOfRange(format!("need at least 4 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(p.probs()).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let seq: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let (stream, lengths) = encode_indices_traced(table, &seq, 0)?;
    let rate = stream.payload_bits as f64 / n as f64;
    let batches = (n as f64).sqrt().floor() as usize;
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| lengths[b * size..(b + 1) * size].iter().map(|&l| l as f64).sum::<f64>() / size as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(MonteCarloReport { n, rate, stderr: (var / batches as f64).sqrt(), batches })
}

/// Decimal rendering with `digits` significant digits and '.' radix.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes bound reports as CSV: name, left, right, slack, pass.
pub fn write_bound_csv<W: std::io::Write>(reports: &[BoundReport], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bound", "left", "right", "slack", "pass"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            format_sig(r.left, 12),
            format_sig(r.right, 12),
            format_sig(r.slack, 12),
            r.holds.to_string(),
        ])?;
    }
    w.flush()
}
