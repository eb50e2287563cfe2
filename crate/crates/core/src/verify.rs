//! Named verification suites: exhaustive finite-n identities checked against
//! the brute-force enumeration oracle, and closed-form density identities
//! checked against adaptive quadrature. Each check returns one pass/fail row;
//! `run_all` produces the full table.

use crate::density::{
    integrate, log_u, rescaled_point, rho_density, u_cdf, u_density, u_rect, DensityParams,
    QuadratureConfig, RhoParams,
};
use crate::measure::Rect;
use crate::oracle::{
    enumerate_measure, partition_function, permutation_at, rank_of, ExactDistribution,
    MAX_ENUMERATION_N,
};
use crate::perm::Permutation;
use crate::sampler::{decode_lehmer, truncated_geometric_prob, LehmerCode, SeedSpec};
use crate::{Error, Result};
use rand::distr::StandardUniform;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Absolute tolerance on enumerated probabilities (accumulations stay under
/// ~4e5 terms, so double rounding cannot reach this).
const PROB_TOL: f64 = 1e-12;
/// Relative slack on ratio bounds that hold with equality in exact
/// arithmetic; absorbs rounding in the enumerated marginals.
const RATIO_SLACK: f64 = 1e-9;
const MARGINAL_TOL: f64 = 1e-9;
const PDE_REL_TOL: f64 = 1e-5;
const IDENTITY_TOL: f64 = 1e-8;
const CDF_QUAD_TOL: f64 = 1e-9;
const RHO_TOL: f64 = 1e-8;
/// Master seed for the randomized-tuple identity checks; fixed so reruns
/// check the same tuples.
const TUPLE_SEED: u64 = 0x4d61_6c6c_6f77_7331;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Largest symmetric-group size the exhaustive suites enumerate.
    pub max_n: usize,
    /// Weights the exhaustive suites run under.
    pub q_list: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_n: 6,
            q_list: vec![0.3, 0.8, 1.25],
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_n < 1 || self.max_n > MAX_ENUMERATION_N {
            return Err(Error::InvalidConfig(format!(
                "max_n must be in 1..={MAX_ENUMERATION_N}, got {}",
                self.max_n
            )));
        }
        if self.q_list.is_empty() {
            return Err(Error::InvalidConfig("q_list must be nonempty".into()));
        }
        for &q in &self.q_list {
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "q_list entries must be finite and positive, got {q}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

fn pass(name: &str, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: CheckStatus::Pass,
        detail,
    }
}

fn fail(name: &str, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: CheckStatus::Fail,
        detail,
    }
}

fn skip(name: &str, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: CheckStatus::Skipped,
        detail,
    }
}

/// Runs every check at the configured sizes and weights; density checks use
/// their own pinned parameter sets.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<CheckResult>> {
    config.validate()?;
    let n = config.max_n;
    let q = config.q_list.as_slice();
    Ok(vec![
        inversion_delta_counting(n)?,
        partition_function_agreement(n, q)?,
        sampler_exactness(n, q)?,
        reversal_pushforward(n, q)?,
        inverse_pushforward(n, q)?,
        restriction_pushforward(n, q)?,
        restriction_independence(n, q)?,
        marginal_ratio_bounds_by_value(n, q)?,
        marginal_ratio_bounds_by_position(n, q)?,
        pair_ratio_bounds_outside(n, q)?,
        pair_ratio_interior_data(n, q)?,
        interval_difference_bound(n, q)?,
        pair_interval_difference_bound(n, q)?,
        density_marginals(&[-10.0, -2.0, -0.5, 0.0, 0.5, 2.0, 10.0])?,
        density_pde(&[-5.0, -2.0, -0.5, 0.5, 2.0, 5.0])?,
        density_log_ratio_identity(100)?,
        density_rescaling_identity(100)?,
        density_cdf_quadrature(100)?,
        rho_marginals(2.0, -1.0)?,
        rho_collapse(2.0)?,
    ])
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// min/max of q^d and q^{−d}.
fn ratio_bounds(q: f64, d: i32) -> (f64, f64) {
    let up = q.powi(d);
    let down = q.powi(-d);
    (up.min(down), up.max(down))
}

/// max(|1−q^d|, |1−q^{−d}|).
fn interval_bound(q: f64, d: i32) -> f64 {
    let up = (1.0 - q.powi(d)).abs();
    let down = (1.0 - q.powi(-d)).abs();
    up.max(down)
}

/// The delete/reinsert counting formula must reproduce the direct inversion
/// difference for every permutation, position, and target value.
pub fn inversion_delta_counting(max_n: usize) -> Result<CheckResult> {
    const NAME: &str = "inversion-delta-counting";
    let n = max_n.min(5);
    if n < 2 {
        return Ok(skip(NAME, format!("needs max_n >= 2, got {max_n}")));
    }
    let mut checked = 0usize;
    for rank in 0..factorial(n) {
        let p = permutation_at(n, rank);
        let base = p.inversion_number() as i64;
        for i in 1..=n {
            let neighbors = p.q_neighbors(i)?;
            if neighbors.len() != n {
                return Ok(fail(
                    NAME,
                    format!(
                        "reinsert family of {p} at position {i} has {} members, expected {n}",
                        neighbors.len()
                    ),
                ));
            }
            for tau in &neighbors {
                let k = tau.get(i);
                let delta = p.inversion_delta(i, k)?;
                let direct = tau.inversion_number() as i64 - base;
                if delta != direct {
                    return Ok(fail(
                        NAME,
                        format!(
                            "perm {p}, position {i}, value {k}: counting formula {delta} vs direct {direct}"
                        ),
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(pass(
        NAME,
        format!("{checked} delete/reinsert moves at n={n} agree exactly"),
    ))
}

/// The closed-form product must match the brute-force weight sum.
pub fn partition_function_agreement(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "partition-function";
    let hi = max_n.min(8);
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for n in 1..=hi {
        for &q in q_list {
            let closed = partition_function(n, q)?;
            let brute = enumerate_measure(n, q)?.z();
            let rel = (closed - brute).abs() / brute;
            if rel > 1e-12 {
                return Ok(fail(
                    NAME,
                    format!("n={n} q={q}: closed form {closed} vs brute sum {brute} (rel {rel:.3e})"),
                ));
            }
            worst = worst.max(rel);
            cases += 1;
        }
    }
    Ok(pass(
        NAME,
        format!("{cases} (n, q) cases up to n={hi}, worst relative gap {worst:.2e}"),
    ))
}

/// Enumerating every Lehmer code with its truncated-geometric probability and
/// decoding must reproduce the exact distribution atom by atom. The decoder is
/// injectable so a corrupted decode path is detectable as a failure.
pub fn sampler_exactness_with_decoder(
    max_n: usize,
    q_list: &[f64],
    decode: impl Fn(&LehmerCode) -> Result<Permutation>,
) -> Result<CheckResult> {
    const NAME: &str = "sampler-exactness";
    let hi = max_n.min(6);
    let mut worst = 0.0f64;
    let mut atoms = 0usize;
    for n in 1..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            let mut table = vec![0.0f64; factorial(n)];
            let mut digits = vec![0u32; n];
            loop {
                let mut prob = 1.0f64;
                for (i, &c) in digits.iter().enumerate() {
                    prob *= truncated_geometric_prob(q, n - 1 - i, c as usize);
                }
                let code = LehmerCode::new(digits.clone())?;
                let p = decode(&code)?;
                if p.n() != n {
                    return Ok(fail(
                        NAME,
                        format!("decode of a size-{n} code returned size {}", p.n()),
                    ));
                }
                table[rank_of(&p)] += prob;
                // Mixed-radix odometer over digit i in 0..=n−1−i.
                let mut pos = n;
                while pos > 0 {
                    pos -= 1;
                    if (digits[pos] as usize) < n - 1 - pos {
                        digits[pos] += 1;
                        break;
                    }
                    digits[pos] = 0;
                }
                if pos == 0 && digits[0] == 0 {
                    break;
                }
            }
            for (rank, (&got, &want)) in table.iter().zip(dist.probs()).enumerate() {
                let diff = (got - want).abs();
                if diff > PROB_TOL {
                    return Ok(fail(
                        NAME,
                        format!(
                            "n={n} q={q}: atom {} has code-product mass {got} vs exact {want}",
                            permutation_at(n, rank)
                        ),
                    ));
                }
                worst = worst.max(diff);
                atoms += 1;
            }
        }
    }
    Ok(pass(
        NAME,
        format!("{atoms} atoms across n<={hi}, worst gap {worst:.2e}"),
    ))
}

pub fn sampler_exactness(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    sampler_exactness_with_decoder(max_n, q_list, decode_lehmer)
}

fn pushforward_check(
    name: &'static str,
    max_n: usize,
    q_list: &[f64],
    cases: impl Fn(usize, f64) -> Result<Vec<(Vec<f64>, Vec<f64>, String)>>,
) -> Result<CheckResult> {
    let hi = max_n.min(6);
    let mut worst = 0.0f64;
    let mut atoms = 0usize;
    let mut case_count = 0usize;
    for n in 2..=hi {
        for &q in q_list {
            for (got, want, label) in cases(n, q)? {
                if got.len() != want.len() {
                    return Ok(fail(
                        name,
                        format!("{label}: table sizes {} vs {}", got.len(), want.len()),
                    ));
                }
                for (rank, (&g, &w)) in got.iter().zip(&want).enumerate() {
                    let diff = (g - w).abs();
                    if diff > PROB_TOL {
                        return Ok(fail(
                            name,
                            format!("{label}: atom rank {rank} has mass {g} vs {w}"),
                        ));
                    }
                    worst = worst.max(diff);
                    atoms += 1;
                }
                case_count += 1;
            }
        }
    }
    if case_count == 0 {
        return Ok(skip(name, format!("no cases at max_n={max_n}")));
    }
    Ok(pass(
        name,
        format!("{case_count} pushforward tables, {atoms} atoms, worst gap {worst:.2e}"),
    ))
}

/// Reversing a draw inverts the weight: the reversed table must equal the
/// enumeration at weight 1/q.
pub fn reversal_pushforward(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    pushforward_check("reversal-pushforward", max_n, q_list, |n, q| {
        let dist = enumerate_measure(n, q)?;
        let got = dist.pushforward(n, |p| p.reverse())?;
        let want = enumerate_measure(n, 1.0 / q)?.probs().to_vec();
        Ok(vec![(got, want, format!("n={n} q={q} reverse"))])
    })
}

/// Inverting a draw preserves the distribution.
pub fn inverse_pushforward(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    pushforward_check("inverse-pushforward", max_n, q_list, |n, q| {
        let dist = enumerate_measure(n, q)?;
        let got = dist.pushforward(n, |p| p.inverse())?;
        let want = dist.probs().to_vec();
        Ok(vec![(got, want, format!("n={n} q={q} inverse"))])
    })
}

/// The pattern of a prefix or suffix window of a draw is itself distributed
/// with the same weight at the window size.
pub fn restriction_pushforward(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    pushforward_check("restriction-pushforward", max_n, q_list, |n, q| {
        let dist = enumerate_measure(n, q)?;
        let mut out = Vec::new();
        for k in 2..=n.saturating_sub(1) {
            let got = dist.pushforward(k, |p| p.restrict(1, k).expect("window size >= 2"))?;
            let want = enumerate_measure(k, q)?.probs().to_vec();
            out.push((got, want, format!("n={n} q={q} prefix window [1,{k}]")));
        }
        for k in 1..=n.saturating_sub(2) {
            let got =
                dist.pushforward(n - k, |p| p.restrict(k + 1, n).expect("window size >= 2"))?;
            let want = enumerate_measure(n - k, q)?.probs().to_vec();
            out.push((
                got,
                want,
                format!("n={n} q={q} suffix window [{}, {n}]", k + 1),
            ));
        }
        Ok(out)
    })
}

/// The prefix and suffix window patterns of one draw are independent: the
/// joint table factorizes into the product of its marginals.
pub fn restriction_independence(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "restriction-independence";
    let hi = max_n.min(6);
    let mut worst = 0.0f64;
    let mut cells = 0usize;
    let mut cases = 0usize;
    for n in 2..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            for k in 1..=n - 1 {
                let a = k;
                let b = n - k;
                let fa = factorial(a);
                let fb = factorial(b);
                let mut joint = vec![0.0f64; fa * fb];
                for (p, pr) in dist.iter() {
                    let left = if a == 1 {
                        Permutation::identity(1)?
                    } else {
                        p.restrict(1, k)?
                    };
                    let right = if b == 1 {
                        Permutation::identity(1)?
                    } else {
                        p.restrict(k + 1, n)?
                    };
                    joint[rank_of(&left) * fb + rank_of(&right)] += pr;
                }
                let mut row = vec![0.0f64; fa];
                let mut col = vec![0.0f64; fb];
                for ra in 0..fa {
                    for rb in 0..fb {
                        row[ra] += joint[ra * fb + rb];
                        col[rb] += joint[ra * fb + rb];
                    }
                }
                for ra in 0..fa {
                    for rb in 0..fb {
                        let diff = (joint[ra * fb + rb] - row[ra] * col[rb]).abs();
                        if diff > PROB_TOL {
                            return Ok(fail(
                                NAME,
                                format!(
                                    "n={n} q={q} split {k}: joint cell ({ra},{rb}) off by {diff:.3e}"
                                ),
                            ));
                        }
                        worst = worst.max(diff);
                        cells += 1;
                    }
                }
                cases += 1;
            }
        }
    }
    if cases == 0 {
        return Ok(skip(NAME, format!("no splits at max_n={max_n}")));
    }
    Ok(pass(
        NAME,
        format!("{cases} window splits, {cells} joint cells, worst factorization gap {worst:.2e}"),
    ))
}

/// Point-marginal tables for every position, indexed [position−1][value−1].
fn marginal_tables(dist: &ExactDistribution) -> Result<Vec<Vec<f64>>> {
    (1..=dist.n()).map(|i| dist.point_marginal(i)).collect()
}

/// At a fixed position, marginal mass can shift between two values by at most
/// a factor q^{±d} where d is the value gap.
pub fn marginal_ratio_bounds_by_value(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "marginal-ratio-bounds-by-value";
    ratio_bound_check(NAME, max_n, q_list, |marg, n, q| {
        let mut worst_slack = f64::INFINITY;
        let mut checked = 0usize;
        for i in 1..=n {
            for s in 1..=n {
                for t in 1..=n {
                    let d = s.abs_diff(t) as i32;
                    let (lo, hi) = ratio_bounds(q, d);
                    let ratio = marg[i - 1][s - 1] / marg[i - 1][t - 1];
                    if ratio < lo * (1.0 - RATIO_SLACK) || ratio > hi * (1.0 + RATIO_SLACK) {
                        return Err(format!(
                            "position {i}, values {s},{t}: ratio {ratio} outside [{lo}, {hi}]"
                        ));
                    }
                    worst_slack = worst_slack.min((hi - ratio).min(ratio - lo));
                    checked += 1;
                }
            }
        }
        Ok((checked, worst_slack))
    })
}

/// At a fixed value, marginal mass can shift between two positions by at most
/// a factor q^{±d} where d is the position gap.
pub fn marginal_ratio_bounds_by_position(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "marginal-ratio-bounds-by-position";
    ratio_bound_check(NAME, max_n, q_list, |marg, n, q| {
        let mut worst_slack = f64::INFINITY;
        let mut checked = 0usize;
        for i in 1..=n {
            for s in 1..=n {
                for t in 1..=n {
                    let d = s.abs_diff(t) as i32;
                    let (lo, hi) = ratio_bounds(q, d);
                    let ratio = marg[s - 1][i - 1] / marg[t - 1][i - 1];
                    if ratio < lo * (1.0 - RATIO_SLACK) || ratio > hi * (1.0 + RATIO_SLACK) {
                        return Err(format!(
                            "value {i}, positions {s},{t}: ratio {ratio} outside [{lo}, {hi}]"
                        ));
                    }
                    worst_slack = worst_slack.min((hi - ratio).min(ratio - lo));
                    checked += 1;
                }
            }
        }
        Ok((checked, worst_slack))
    })
}

fn ratio_bound_check(
    name: &'static str,
    max_n: usize,
    q_list: &[f64],
    body: impl Fn(&[Vec<f64>], usize, f64) -> std::result::Result<(usize, f64), String>,
) -> Result<CheckResult> {
    let hi = max_n.min(6);
    let mut checked = 0usize;
    for n in 2..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            let marg = marginal_tables(&dist)?;
            match body(&marg, n, q) {
                Ok((count, _)) => checked += count,
                Err(detail) => return Ok(fail(name, format!("n={n} q={q}: {detail}"))),
            }
        }
    }
    if checked == 0 {
        return Ok(skip(name, format!("no cases at max_n={max_n}")));
    }
    Ok(pass(name, format!("{checked} ratios within bounds")))
}

/// Joint value table for every ordered position pair, laid out as
/// [s−1][w−1][i−1][j−1] with s ≠ w and i ≠ j; diagonal cells stay zero.
fn pair_joint(dist: &ExactDistribution) -> Vec<f64> {
    let n = dist.n();
    let mut t = vec![0.0f64; n * n * n * n];
    for (p, pr) in dist.iter() {
        let vals: Vec<usize> = p.values().collect();
        for s in 0..n {
            for w in 0..n {
                if s == w {
                    continue;
                }
                t[((s * n + w) * n + (vals[s] - 1)) * n + (vals[w] - 1)] += pr;
            }
        }
    }
    t
}

fn pair_cell(t: &[f64], n: usize, s: usize, w: usize, i: usize, j: usize) -> f64 {
    t[(((s - 1) * n + (w - 1)) * n + (i - 1)) * n + (j - 1)]
}

/// With the anchor position outside the span of the two compared positions,
/// joint mass ratios obey the same q^{±d} bounds as single marginals.
pub fn pair_ratio_bounds_outside(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "pair-ratio-bounds-outside";
    let hi = max_n.min(6);
    let mut checked = 0usize;
    for n in 3..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            let jt = pair_joint(&dist);
            for s in 1..=n {
                for tpos in 1..=n {
                    if s == tpos {
                        continue;
                    }
                    let d = s.abs_diff(tpos) as i32;
                    let (lo, hi_b) = ratio_bounds(q, d);
                    for w in 1..=n {
                        if w >= s.min(tpos) && w <= s.max(tpos) {
                            continue;
                        }
                        for i in 1..=n {
                            for j in 1..=n {
                                if i == j {
                                    continue;
                                }
                                let num = pair_cell(&jt, n, s, w, i, j);
                                let den = pair_cell(&jt, n, tpos, w, i, j);
                                let ratio = num / den;
                                if ratio < lo * (1.0 - RATIO_SLACK)
                                    || ratio > hi_b * (1.0 + RATIO_SLACK)
                                {
                                    return Ok(fail(
                                        NAME,
                                        format!(
                                            "n={n} q={q} s={s} t={tpos} w={w} i={i} j={j}: ratio {ratio} outside [{lo}, {hi_b}]"
                                        ),
                                    ));
                                }
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    if checked == 0 {
        return Ok(skip(NAME, format!("no cases at max_n={max_n}")));
    }
    Ok(pass(NAME, format!("{checked} outside-anchor ratios within bounds")))
}

/// Violation statistics for anchor positions strictly between the compared
/// positions: (violations, total, worst excess factor, worst-case label).
pub(crate) fn interior_ratio_stats(
    n: usize,
    q: f64,
) -> Result<(usize, usize, f64, String)> {
    let dist = enumerate_measure(n, q)?;
    let jt = pair_joint(&dist);
    let mut violations = 0usize;
    let mut total = 0usize;
    let mut worst = 1.0f64;
    let mut worst_label = String::new();
    for s in 1..=n {
        for tpos in 1..=n {
            if s == tpos {
                continue;
            }
            let d = s.abs_diff(tpos) as i32;
            let (lo, hi) = ratio_bounds(q, d);
            for w in (s.min(tpos) + 1)..s.max(tpos) {
                for i in 1..=n {
                    for j in 1..=n {
                        if i == j {
                            continue;
                        }
                        let ratio = pair_cell(&jt, n, s, w, i, j) / pair_cell(&jt, n, tpos, w, i, j);
                        total += 1;
                        let excess = (ratio / hi).max(lo / ratio);
                        if excess > 1.0 + RATIO_SLACK {
                            violations += 1;
                            if excess > worst {
                                worst = excess;
                                worst_label =
                                    format!("n={n} q={q} s={s} t={tpos} w={w} i={i} j={j}");
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((violations, total, worst, worst_label))
}

/// The outside-anchor bounds are not claimed for interior anchors; this check
/// records how often and how badly they break, and always passes.
pub fn pair_ratio_interior_data(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "pair-ratio-interior-data";
    let hi = max_n.min(6);
    let mut violations = 0usize;
    let mut total = 0usize;
    let mut worst = 1.0f64;
    let mut worst_label = String::new();
    for n in 3..=hi {
        for &q in q_list {
            let (v, t, w, label) = interior_ratio_stats(n, q)?;
            violations += v;
            total += t;
            if w > worst {
                worst = w;
                worst_label = label;
            }
        }
    }
    if total == 0 {
        return Ok(skip(NAME, format!("no cases at max_n={max_n}")));
    }
    let summary = if violations == 0 {
        format!("{total} interior-anchor ratios, none outside the bounds; no bound asserted")
    } else {
        format!(
            "{violations}/{total} interior-anchor ratios breach the outside-anchor bounds, worst excess {worst:.3} at {worst_label}; no bound asserted"
        )
    };
    Ok(pass(NAME, summary))
}

/// Interval-hitting probabilities at two positions differ by at most
/// max(|1−q^d|, |1−q^{−d}|).
pub fn interval_difference_bound(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "interval-difference-bound";
    let hi = max_n.min(6);
    let mut checked = 0usize;
    let mut worst_margin = f64::INFINITY;
    for n in 2..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            let marg = marginal_tables(&dist)?;
            // pref[s−1][v] = P(value at position s is <= v).
            let pref: Vec<Vec<f64>> = marg
                .iter()
                .map(|row| {
                    let mut acc = vec![0.0f64; n + 1];
                    for v in 1..=n {
                        acc[v] = acc[v - 1] + row[v - 1];
                    }
                    acc
                })
                .collect();
            for s in 1..=n {
                for t in 1..=n {
                    let d = s.abs_diff(t) as i32;
                    let m = interval_bound(q, d);
                    for lo in 1..=n {
                        for hi_v in lo..=n {
                            let ps = pref[s - 1][hi_v] - pref[s - 1][lo - 1];
                            let pt = pref[t - 1][hi_v] - pref[t - 1][lo - 1];
                            let diff = (ps - pt).abs();
                            if diff > m + PROB_TOL {
                                return Ok(fail(
                                    NAME,
                                    format!(
                                        "n={n} q={q} positions {s},{t} values [{lo},{hi_v}]: gap {diff} exceeds {m}"
                                    ),
                                ));
                            }
                            worst_margin = worst_margin.min(m - diff);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    if checked == 0 {
        return Ok(skip(NAME, format!("no cases at max_n={max_n}")));
    }
    Ok(pass(
        NAME,
        format!("{checked} interval comparisons within the difference bound"),
    ))
}

/// Same difference bound for joint interval hits, with the anchor position
/// outside the span of the compared positions.
pub fn pair_interval_difference_bound(max_n: usize, q_list: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "pair-interval-difference-bound";
    let hi = max_n.min(6);
    let mut checked = 0usize;
    for n in 3..=hi {
        for &q in q_list {
            let dist = enumerate_measure(n, q)?;
            let jt = pair_joint(&dist);
            // One 2-D prefix table per ordered position pair:
            // pre[v1][v2] = P(value at s <= v1 and value at w <= v2).
            let prefix_for = |s: usize, w: usize| -> Vec<Vec<f64>> {
                let mut pre = vec![vec![0.0f64; n + 1]; n + 1];
                for i in 1..=n {
                    for j in 1..=n {
                        pre[i][j] = pair_cell(&jt, n, s, w, i, j) + pre[i - 1][j] + pre[i][j - 1]
                            - pre[i - 1][j - 1];
                    }
                }
                pre
            };
            let rect = |pre: &[Vec<f64>], a1: usize, a2: usize, b1: usize, b2: usize| -> f64 {
                pre[a2][b2] - pre[a1 - 1][b2] - pre[a2][b1 - 1] + pre[a1 - 1][b1 - 1]
            };
            for s in 1..=n {
                for tpos in 1..=n {
                    if s == tpos {
                        continue;
                    }
                    let d = s.abs_diff(tpos) as i32;
                    let m = interval_bound(q, d);
                    for w in 1..=n {
                        if w >= s.min(tpos) && w <= s.max(tpos) {
                            continue;
                        }
                        let pre_s = prefix_for(s, w);
                        let pre_t = prefix_for(tpos, w);
                        for a1 in 1..=n {
                            for a2 in a1..=n {
                                for b1 in 1..=n {
                                    for b2 in b1..=n {
                                        let ps = rect(&pre_s, a1, a2, b1, b2);
                                        let pt = rect(&pre_t, a1, a2, b1, b2);
                                        let diff = (ps - pt).abs();
                                        if diff > m + PROB_TOL {
                                            return Ok(fail(
                                                NAME,
                                                format!(
                                                    "n={n} q={q} s={s} t={tpos} w={w} A=[{a1},{a2}] B=[{b1},{b2}]: gap {diff} exceeds {m}"
                                                ),
                                            ));
                                        }
                                        checked += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if checked == 0 {
        return Ok(skip(NAME, format!("no cases at max_n={max_n}")));
    }
    Ok(pass(
        NAME,
        format!("{checked} joint interval comparisons within the difference bound"),
    ))
}

/// Both marginals of the limit density integrate to one.
pub fn density_marginals(betas: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "density-marginals";
    let quad = QuadratureConfig::new(1e-11, 8192)?;
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for &beta in betas {
        let dp = DensityParams::new(beta);
        for j in 0..=100 {
            let y = j as f64 / 100.0;
            // The density is symmetric in its two arguments, so the second
            // marginal is the same integral.
            let mass = integrate(|x| u_density(x, y, dp), 0.0, 1.0, &quad)?;
            let dev = (mass - 1.0).abs();
            if dev > MARGINAL_TOL {
                return Ok(fail(
                    NAME,
                    format!("beta={beta} y={y}: marginal mass {mass} off by {dev:.3e}"),
                ));
            }
            worst = worst.max(dev);
            cases += 1;
        }
    }
    Ok(pass(
        NAME,
        format!("{cases} ordinates across {} slopes, worst gap {worst:.2e}", betas.len()),
    ))
}

/// The mixed second partial of the log-density equals twice the slope times
/// the density, checked by central differences on an interior grid.
pub fn density_pde(betas: &[f64]) -> Result<CheckResult> {
    const NAME: &str = "density-pde";
    if betas.iter().any(|b| *b == 0.0) {
        return Err(Error::InvalidParameter(
            "residual is relative; slope 0 has a zero target".into(),
        ));
    }
    let h = 1e-4;
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for &beta in betas {
        let dp = DensityParams::new(beta);
        for i in 1..=9 {
            for j in 1..=9 {
                let x = i as f64 / 10.0;
                let y = j as f64 / 10.0;
                let fd = (log_u(x + h, y + h, dp) - log_u(x + h, y - h, dp)
                    - log_u(x - h, y + h, dp)
                    + log_u(x - h, y - h, dp))
                    / (4.0 * h * h);
                let target = 2.0 * beta * u_density(x, y, dp);
                let rel = (fd - target).abs() / target.abs();
                if rel > PDE_REL_TOL {
                    return Ok(fail(
                        NAME,
                        format!("beta={beta} ({x},{y}): residual {rel:.3e}"),
                    ));
                }
                worst = worst.max(rel);
                cases += 1;
            }
        }
    }
    Ok(pass(
        NAME,
        format!("{cases} interior grid points, worst relative residual {worst:.2e}"),
    ))
}

/// The log-density difference along a vertical line equals the slope times
/// the signed corner-mass expression.
pub fn density_log_ratio_identity(tuples: usize) -> Result<CheckResult> {
    const NAME: &str = "density-log-ratio-identity";
    let quad = QuadratureConfig::new(1e-12, 16384)?;
    let betas = [-3.0, -1.0, 1.0, 3.0];
    let mut rng = SeedSpec::new(TUPLE_SEED).rng(0);
    let mut worst = 0.0f64;
    for trial in 0..tuples {
        let beta = betas[trial % betas.len()];
        let dp = DensityParams::new(beta);
        let a: f64 = rng.sample(StandardUniform);
        let c: f64 = rng.sample(StandardUniform);
        let d: f64 = rng.sample(StandardUniform);
        let lhs = log_u(a, d, dp) - log_u(a, c, dp);
        let (y1, y2, sign) = if d >= c { (c, d, 1.0) } else { (d, c, -1.0) };
        let mass = u_rect(&Rect::closed(0.0, a, y1, y2)?, dp, &quad)?;
        let rhs = -beta * ((d - c) - 2.0 * sign * mass);
        let dev = (lhs - rhs).abs();
        if dev > IDENTITY_TOL {
            return Ok(fail(
                NAME,
                format!("beta={beta} a={a} c={c} d={d}: log ratio {lhs} vs mass form {rhs}"),
            ));
        }
        worst = worst.max(dev);
    }
    Ok(pass(
        NAME,
        format!("{tuples} random tuples, worst gap {worst:.2e}"),
    ))
}

/// Conditioning on a prefix box rescales the CDF: the original CDF at (a, y)
/// equals the CDF at (a/b, y') under slope b·β, where y' is the rescaled
/// ordinate through the box mass.
pub fn density_rescaling_identity(tuples: usize) -> Result<CheckResult> {
    const NAME: &str = "density-rescaling-identity";
    let quad = QuadratureConfig::new(1e-12, 16384)?;
    let betas = [-3.0, -1.0, 1.0, 2.5];
    let mut rng = SeedSpec::new(TUPLE_SEED).rng(1);
    let mut worst = 0.0f64;
    for trial in 0..tuples {
        let beta = betas[trial % betas.len()];
        let dp = DensityParams::new(beta);
        let b = 0.1 + 0.9 * rng.sample::<f64, _>(StandardUniform);
        let a = 0.999 * b * rng.sample::<f64, _>(StandardUniform);
        let y: f64 = rng.sample(StandardUniform);
        let lhs = u_cdf(a, y, dp);
        let yprime = rescaled_point(a, b, y, dp, &quad)?;
        let rhs = u_cdf(a / b, yprime, DensityParams::new(b * beta));
        let dev = (lhs - rhs).abs();
        if dev > IDENTITY_TOL {
            return Ok(fail(
                NAME,
                format!("beta={beta} a={a} b={b} y={y}: cdf {lhs} vs rescaled {rhs}"),
            ));
        }
        worst = worst.max(dev);
    }
    Ok(pass(
        NAME,
        format!("{tuples} random tuples, worst gap {worst:.2e}"),
    ))
}

/// The closed-form CDF matches direct quadrature of the density.
pub fn density_cdf_quadrature(tuples: usize) -> Result<CheckResult> {
    const NAME: &str = "density-cdf-quadrature";
    let quad = QuadratureConfig::new(1e-11, 8192)?;
    let betas = [-5.0, -1.0, 0.5, 3.0, 9.0];
    let mut rng = SeedSpec::new(TUPLE_SEED).rng(2);
    let mut worst = 0.0f64;
    for trial in 0..tuples {
        let beta = betas[trial % betas.len()];
        let dp = DensityParams::new(beta);
        let a: f64 = rng.sample(StandardUniform);
        let y: f64 = rng.sample(StandardUniform);
        let closed = u_cdf(a, y, dp);
        let direct = integrate(|t| u_density(a, t, dp), 0.0, y, &quad)?;
        let dev = (closed - direct).abs();
        if dev > CDF_QUAD_TOL {
            return Ok(fail(
                NAME,
                format!("beta={beta} a={a} y={y}: closed {closed} vs quadrature {direct}"),
            ));
        }
        worst = worst.max(dev);
    }
    Ok(pass(
        NAME,
        format!("{tuples} random evaluation points, worst gap {worst:.2e}"),
    ))
}

/// Both marginals of the product density integrate to one.
pub fn rho_marginals(beta: f64, gamma: f64) -> Result<CheckResult> {
    const NAME: &str = "rho-marginals";
    let rp = RhoParams::new(beta, gamma);
    let quad = QuadratureConfig::default();
    let inner_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        for flip in [false, true] {
            let mass = integrate(
                |t| match if flip {
                    rho_density(t, x, rp, &quad)
                } else {
                    rho_density(x, t, rp, &quad)
                } {
                    Ok(v) => v,
                    Err(e) => {
                        *inner_err.borrow_mut() = Some(e);
                        f64::NAN
                    }
                },
                0.0,
                1.0,
                &quad,
            );
            if let Some(e) = inner_err.borrow_mut().take() {
                return Err(e);
            }
            let mass = mass?;
            let dev = (mass - 1.0).abs();
            if dev > RHO_TOL {
                let axis = if flip { "second" } else { "first" };
                return Ok(fail(
                    NAME,
                    format!("{axis} coordinate {x}: marginal mass {mass} off by {dev:.3e}"),
                ));
            }
            worst = worst.max(dev);
        }
    }
    Ok(pass(
        NAME,
        format!("both marginals at 21 ordinates, worst gap {worst:.2e}"),
    ))
}

/// With either slope zero the product density collapses to the uniform
/// density on the square.
pub fn rho_collapse(beta: f64) -> Result<CheckResult> {
    const NAME: &str = "rho-collapse";
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let y = ((7 * i + 3) % 21) as f64 / 20.0;
        for rp in [RhoParams::new(beta, 0.0), RhoParams::new(0.0, beta)] {
            let val = rho_density(x, y, rp, &quad)?;
            let dev = (val - 1.0).abs();
            if dev > RHO_TOL {
                return Ok(fail(
                    NAME,
                    format!("({x},{y}): product density {val} off uniform by {dev:.3e}"),
                ));
            }
            worst = worst.max(dev);
        }
    }
    Ok(pass(
        NAME,
        format!("42 collapse evaluations, worst gap {worst:.2e}"),
    ))
}
