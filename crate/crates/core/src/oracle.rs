//! Brute-force enumeration of the exact Mallows distribution for small n.
//!
//! Everything here is deliberately naive: inversions are counted by the
//! O(n²) pair scan and permutations are unranked by list scanning, so the
//! oracle shares no code with the optimized paths it is used to test.

use rayon::prelude::*;

use crate::perm::Permutation;
use crate::{Error, Result};

/// Hard guard on enumeration size: 9! atoms ≈ 2.9 MB of probabilities.
pub const MAX_ENUMERATION_N: usize = 9;

const FACTORIAL: [usize; 10] = [1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880];

/// The full probability table of a Mallows measure on S_n, indexed by
/// lexicographic rank of the one-line form.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    n: usize,
    q: f64,
    /// Normalizing constant as the brute sum Σ q^{l(π)}.
    z: f64,
    probs: Vec<f64>,
}

/// Builds the exact table by full enumeration; the weight of each atom is
/// `q^{l(π)}` with `l` counted by the O(n²) scan, and Z is their plain sum.
pub fn enumerate_measure(n: usize, q: f64) -> Result<ExactDistribution> {
    if n < 1 || n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    let total = FACTORIAL[n];
    // Weight computation fans out over rank blocks; the collect preserves
    // rank order, and the normalizing sum stays sequential so the table is
    // bitwise identical regardless of thread count.
    let mut probs: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|rank| {
            let p = permutation_at(n, rank);
            q.powi(brute_inversions(&p) as i32)
        })
        .collect();
    let z: f64 = probs.iter().sum();
    for w in &mut probs {
        *w /= z;
    }
    Ok(ExactDistribution { n, q, z, probs })
}

/// Closed-form normalizing constant: the q-factorial
/// `Π_{i=1..n} (1 + q + … + q^{i−1})`.
pub fn partition_function(n: usize, q: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    let mut product = 1.0;
    let mut term = 1.0;
    for _ in 1..n {
        term = 1.0 + q * term;
        product *= term;
    }
    Ok(product)
}

/// Half the L1 distance between two probability tables over the same support.
pub fn tv_distance(p1: &[f64], p2: &[f64]) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::SupportMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    Ok(p1.iter().zip(p2).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0)
}

impl ExactDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The brute-sum normalizing constant.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Probabilities indexed by lexicographic rank; see [`permutation_at`].
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, p: &Permutation) -> f64 {
        self.probs[rank_of(p)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Permutation, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(rank, &pr)| (permutation_at(self.n, rank), pr))
    }

    /// `P(π(i) = j)` for each value j, as a vector indexed by j−1.
    pub fn point_marginal(&self, i: usize) -> Result<Vec<f64>> {
        self.check_index(i)?;
        let mut out = vec![0.0; self.n];
        for (p, pr) in self.iter() {
            out[p.get(i) - 1] += pr;
        }
        Ok(out)
    }

    /// `P(π(s) = i and π(w) = j)` for distinct positions and distinct values.
    pub fn pair_probability(&self, s: usize, w: usize, i: usize, j: usize) -> Result<f64> {
        self.check_index(s)?;
        self.check_index(w)?;
        self.check_index(i)?;
        self.check_index(j)?;
        if s == w || i == j {
            return Err(Error::InvalidParameter(format!(
                "pair probability needs distinct positions and values, got s={s} w={w} i={i} j={j}"
            )));
        }
        let mut total = 0.0;
        for (p, pr) in self.iter() {
            if p.get(s) == i && p.get(w) == j {
                total += pr;
            }
        }
        Ok(total)
    }

    /// `Cov(1_A(π(i)/n), 1_A(π(j)/n))` under the exact distribution.
    pub fn indicator_covariance(&self, a: &ValueInterval, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::InvalidParameter(
                "covariance indices must be distinct".into(),
            ));
        }
        let mut p_both = 0.0;
        let mut p_i = 0.0;
        let mut p_j = 0.0;
        for (p, pr) in self.iter() {
            let in_i = a.contains(p.get(i));
            let in_j = a.contains(p.get(j));
            if in_i {
                p_i += pr;
            }
            if in_j {
                p_j += pr;
            }
            if in_i && in_j {
                p_both += pr;
            }
        }
        Ok(p_both - p_i * p_j)
    }

    /// Pushes the table through a permutation-valued map into a table over
    /// S_{out_n}; the map must land in S_{out_n} for every atom.
    pub fn pushforward(
        &self,
        out_n: usize,
        f: impl Fn(&Permutation) -> Permutation,
    ) -> Result<Vec<f64>> {
        if out_n < 1 || out_n > MAX_ENUMERATION_N {
            return Err(Error::EnumerationTooLarge {
                n: out_n,
                max: MAX_ENUMERATION_N,
            });
        }
        let mut out = vec![0.0; FACTORIAL[out_n]];
        for (p, pr) in self.iter() {
            let image = f(&p);
            if image.n() != out_n {
                return Err(Error::SizeMismatch {
                    left: image.n(),
                    right: out_n,
                });
            }
            out[rank_of(&image)] += pr;
        }
        Ok(out)
    }

    pub fn tv(&self, other: &ExactDistribution) -> Result<f64> {
        tv_distance(&self.probs, &other.probs)
    }

    /// CSV export with header `permutation,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("permutation,probability\n");
        for (p, pr) in self.iter() {
            out.push_str(&format!("\"{p}\",{pr:.16e}\n"));
        }
        out
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < 1 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }
}

/// Closed interval of values `{lo..=hi}` within `{1..n}`; the exact-side
/// representation of a real interval `[y1, y2]` of `π(i)/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueInterval {
    pub lo: usize,
    pub hi: usize,
}

impl ValueInterval {
    /// Values v with `v/n ∈ [y1, y2]`. Endpoints within 1e−9 of a lattice
    /// point `k/n` count as on it, so thresholds like 0.2·2000 resolve to
    /// the intended integer despite binary rounding.
    pub fn from_real(y1: f64, y2: f64, n: usize) -> Self {
        let lo = ((y1 * n as f64) - 1e-9).ceil().max(1.0) as usize;
        let hi = ((y2 * n as f64) + 1e-9).floor().min(n as f64).max(0.0) as usize;
        ValueInterval { lo, hi }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Number of values covered; zero when empty.
    pub fn len(&self) -> usize {
        self.hi.saturating_sub(self.lo).saturating_add(if self.hi >= self.lo { 1 } else { 0 })
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// The permutation of size n at the given lexicographic rank of one-line
/// forms, `0 <= rank < n!`.
pub fn permutation_at(n: usize, rank: usize) -> Permutation {
    debug_assert!(n >= 1 && n <= MAX_ENUMERATION_N && rank < FACTORIAL[n]);
    let mut remaining: Vec<u32> = (1..=n as u32).collect();
    let mut rest = rank;
    let mut map = Vec::with_capacity(n);
    for i in 0..n {
        let block = FACTORIAL[n - 1 - i];
        let digit = rest / block;
        rest %= block;
        map.push(remaining.remove(digit));
    }
    Permutation::from_one_line(map).expect("unrank produces a bijection")
}

/// Lexicographic rank of a permutation's one-line form; inverse of
/// [`permutation_at`].
pub fn rank_of(p: &Permutation) -> usize {
    let n = p.n();
    let values: Vec<usize> = p.values().collect();
    let mut rank = 0;
    for i in 0..n {
        let smaller_later = values[i + 1..].iter().filter(|&&v| v < values[i]).count();
        rank += smaller_later * FACTORIAL[n - 1 - i];
    }
    rank
}

/// The O(n²) inversion scan; the independent reference for
/// `Permutation::inversion_number`.
pub fn brute_inversions(p: &Permutation) -> u64 {
    let values: Vec<usize> = p.values().collect();
    let mut count = 0u64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] > values[j] {
                count += 1;
            }
        }
    }
    count
}
