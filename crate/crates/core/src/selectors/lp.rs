use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{centered_candidates, CesaroTrace, PairRecord, Selection, SelectionRule, SubsequenceSelection, TraceQuantity};
use crate::gallery::FunctionSequence;
use crate::measure::{lp_norm_slice, pairing_slice};
use crate::{Error, Result};

/// Generalized binomial coefficient `p (p-1) ⋯ (p-k+1) / k!`.
pub fn binomial(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i as f64) / (i as f64 + 1.0))
}

fn is_integer(p: f64) -> bool {
    libm::floor(p) == p
}

/// `ζ(t) = (|1+t|^p − Σ_{k ≤ ⌊p⌋} C(p,k) t^k) / |t|^p`, extended by 0 at `t = 0`.
///
/// Integer `p` uses the binomial theorem in closed form; small `|t|` uses
/// the power series of `(1+t)^p` beyond degree `⌊p⌋`, which avoids the
/// cancellation of the direct formula.
pub fn zeta(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let at = libm::fabs(t);
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    if is_integer(p) {
        let odd = (p as u64) % 2 == 1;
        return if odd && t < -1.0 { 2.0 * libm::pow(libm::fabs(1.0 + t) / at, p) } else { 0.0 };
    }
    let fp = libm::floor(p) as usize;
    if at <= 0.5 {
        let mut sum = 0.0;
        let mut coeff = binomial(p, fp + 1);
        let mut k = fp + 1;
        while k < 400 {
            let sk = if k.is_multiple_of(2) { 1.0 } else { sign };
            let term = coeff * sk * libm::pow(at, k as f64 - p);
            sum += term;
            if libm::fabs(term) <= 1e-18 * libm::fabs(sum) {
                break;
            }
            coeff *= (p - k as f64) / (k as f64 + 1.0);
            k += 1;
        }
        return sum;
    }
    let mut poly = 0.0;
    for k in 0..=fp {
        let sk = if k % 2 == 0 { 1.0 } else { sign };
        poly += binomial(p, k) * sk * libm::pow(at, k as f64 - p);
    }
    libm::pow(libm::fabs(1.0 + t) / at, p) - poly
}

/// How the bound on `|ζ|` was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEvidence {
    pub grid_points: usize,
    /// Largest `|t|` sampled.
    pub grid_extent: f64,
    /// `max |ζ|` over the sampled grid alone.
    pub sampled_sup: f64,
    pub argmax: f64,
    /// Limits of `ζ` at `−∞` and `+∞`.
    pub limit_neg_inf: f64,
    pub limit_pos_inf: f64,
}

/// Constants of the `L^p` selection bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LpConstants {
    pub p: f64,
    pub floor_p: usize,
    /// `C(p, k)` for `k = 0..=⌊p⌋`.
    pub binomials: Vec<f64>,
    /// Upper bound on `|ζ|`, at least 1.
    pub c: f64,
    /// `Σ_{k=2}^{⌊p⌋} C(p, k)`; zero for `p < 2`.
    pub b: f64,
    pub p_dual: f64,
    pub evidence: ZetaEvidence,
}

/// Sampling grid: uniform on `[-4, 4]` with step `2^-10`, then 100
/// log-spaced magnitudes per decade on `[1e-6, 1e6]` of both signs.
fn zeta_grid() -> Vec<f64> {
    let mut grid = Vec::new();
    for i in -4096i32..=4096 {
        grid.push(i as f64 / 1024.0);
    }
    for i in 0..=1200 {
        let m = libm::pow(10.0, -6.0 + i as f64 / 100.0);
        grid.push(m);
        grid.push(-m);
    }
    grid
}

pub const ZETA_GRID_EXTENT: f64 = 1e6;

pub fn zeta_constant(p: f64) -> Result<LpConstants> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(Error::InvalidExponent(p));
    }
    let floor_p = libm::floor(p) as usize;
    let grid = zeta_grid();
    let mut sampled_sup = 0.0f64;
    let mut argmax = 0.0;
    for &t in &grid {
        let z = libm::fabs(zeta(p, t));
        if z > sampled_sup {
            sampled_sup = z;
            argmax = t;
        }
    }
    let (limit_neg_inf, limit_pos_inf) = if is_integer(p) {
        (if floor_p % 2 == 1 { 2.0 } else { 0.0 }, 0.0)
    } else {
        (1.0, 1.0)
    };
    let sup = sampled_sup.max(limit_neg_inf).max(limit_pos_inf);
    let c = (1.01 * sup).max(1.0);
    let binomials: Vec<f64> = (0..=floor_p).map(|k| binomial(p, k)).collect();
    let b = if floor_p >= 2 { binomials[2..].iter().sum() } else { 0.0 };
    Ok(LpConstants {
        p,
        floor_p,
        binomials,
        c,
        b,
        p_dual: p / (p - 1.0),
        evidence: ZetaEvidence {
            grid_points: grid.len(),
            grid_extent: ZETA_GRID_EXTENT,
            sampled_sup,
            argmax,
            limit_neg_inf,
            limit_pos_inf,
        },
    })
}

/// `r^p/j^p + (p + C r^p)/j^{p-1} + [p ≥ 2] B r^p / j`.
pub fn lp_bound(k: &LpConstants, r: f64, j: usize) -> f64 {
    let p = k.p;
    let jf = j as f64;
    let rp = libm::pow(r, p);
    let mut bound = rp / libm::pow(jf, p) + (p + k.c * rp) / libm::pow(jf, p - 1.0);
    if p >= 2.0 {
        bound += k.b * rp / jf;
    }
    bound
}

/// `|s|^{p-2} s`, zero where `s = 0`.
pub(crate) fn signed_power(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        let a = libm::pow(libm::fabs(s), p - 1.0);
        if s < 0.0 {
            -a
        } else {
            a
        }
    }
}

/// Shared loop of the `L^p` and duality-map selectors: `n_1` is the first
/// candidate, then the smallest later index whose `statistic(S_{j-1}, x)`
/// is at most 1.
/// Indices and pair log of a selection; on exhaustion, the step `j` that
/// found no candidate with the partial result.
pub(crate) type GreedyOutcome = core::result::Result<(Vec<usize>, Vec<PairRecord>), (usize, Vec<usize>, Vec<PairRecord>)>;

pub(crate) fn greedy_partial_sums(
    vectors: &[Vec<f64>],
    statistic: impl Fn(&[f64], &[f64]) -> f64,
) -> GreedyOutcome {
    let mut positions = alloc::vec![0usize];
    let mut log = alloc::vec![PairRecord { value: 0.0, threshold: 1.0 }];
    let mut sum = vectors[0].clone();
    loop {
        let j = positions.len() + 1;
        let start = positions[positions.len() - 1] + 1;
        if start >= vectors.len() {
            return Ok((positions, log));
        }
        let found = (start..vectors.len()).find_map(|cand| {
            let v = statistic(&sum, &vectors[cand]);
            (v <= 1.0).then_some((cand, v))
        });
        match found {
            Some((cand, value)) => {
                for (s, x) in sum.iter_mut().zip(&vectors[cand]) {
                    *s += x;
                }
                positions.push(cand);
                log.push(PairRecord { value, threshold: 1.0 });
            }
            None => return Err((j, positions, log)),
        }
    }
}

/// The `L^p` pairing statistic `∫ |S|^{p-2} S x dμ` (signed).
pub(crate) fn lp_statistic(weights: &[f64], p: f64, sum: &[f64], x: &[f64]) -> f64 {
    let g: Vec<f64> = sum.iter().map(|&s| signed_power(s, p)).collect();
    pairing_slice(weights, &g, x)
}

/// Greedy `L^p` selection: `n_j` is the smallest index after `n_{j-1}` with
/// `∫ |S_{j-1}|^{p-2} S_{j-1} u_{n_j} ≤ 1` (one-sided), terms centered at
/// the declared limit. The trace measures `‖S_j/j‖_p^p` against
/// [`lp_bound`] with `r = max_{n < horizon} ‖u_n − u‖_p`.
pub fn banach_saks_lp_select(seq: &FunctionSequence, p: f64, horizon: usize) -> Result<(Selection, LpConstants)> {
    let constants = zeta_constant(p)?;
    let weights = seq.space().weights();
    let vectors = centered_candidates(seq, seq.limit().values(), horizon)?;
    let r = vectors.iter().map(|x| lp_norm_slice(weights, x, p)).fold(0.0, f64::max);
    let rule = SelectionRule::BanachSaksLp { p };
    let finish = |positions: Vec<usize>, log: Vec<PairRecord>| {
        let selected: Vec<&[f64]> = positions.iter().map(|&i| vectors[i].as_slice()).collect();
        let trace =
            CesaroTrace::build(TraceQuantity::LpPower(p), weights, &selected, |j| Some(lp_bound(&constants, r, j)));
        Selection { selection: SubsequenceSelection { indices: positions, rule, pair_log: log, j0: 1 }, trace }
    };
    match greedy_partial_sums(&vectors, |s, x| lp_statistic(weights, p, s, x)) {
        Ok((pos, log)) => Ok((finish(pos, log), constants)),
        Err((j, pos, log)) => Err(Error::SelectionExhausted { j, partial: Box::new(finish(pos, log)) }),
    }
}
