//! Permutation representation and the combinatorial operations on it.
//!
//! Permutations are 1-indexed throughout the API and the serialized forms;
//! `map[i] = π(i)` for `i` in `1..=n`. The one-line serialization is
//! comma-separated values, e.g. `"4,1,7,3,6,2,5"`.

use serde::{Deserialize, Serialize};

use crate::fenwick::Fenwick;
use crate::real::Real;
use crate::{Error, Result};

/// A permutation of `{1..n}` in one-line notation.
///
/// # Examples
///
/// ```
/// use mallows_core::Permutation;
///
/// let p: Permutation = "4,1,7,3,6,2,5".parse().unwrap();
/// assert_eq!(p.inversion_number(), 10);
/// assert_eq!(p.inverse().get(4), 1);
/// ```
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    /// Validates that `map` is a bijection of `{1..n}` with `n >= 1`.
    pub fn from_one_line(map: Vec<u32>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidPermutation {
                reason: "size must be at least 1".into(),
            });
        }
        let n = map.len();
        let mut seen = vec![false; n + 1];
        for &v in &map {
            let v = v as usize;
            if v < 1 || v > n {
                return Err(Error::InvalidPermutation {
                    reason: format!("value {v} outside 1..={n}"),
                });
            }
            if seen[v] {
                return Err(Error::InvalidPermutation {
                    reason: format!("value {v} appears twice"),
                });
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Permutation::from_one_line((1..=n as u32).collect())
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// `π(i)` for 1-based `i`. Panics when `i` is out of range.
    pub fn get(&self, i: usize) -> usize {
        self.map[i - 1] as usize
    }

    /// Values `π(1), …, π(n)` in order.
    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.iter().map(|&v| v as usize)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }

    /// The one-line form `"π(1),π(2),…"`.
    pub fn one_line(&self) -> String {
        self.to_string()
    }

    /// `|{(i,j) : i < j, π(i) > π(j)}|` in O(n log n).
    ///
    /// Streams positions left to right and counts, per value, how many
    /// earlier values exceed it. The O(n²) scan lives in the oracle module
    /// as the independent reference.
    pub fn inversion_number(&self) -> u64 {
        let n = self.n();
        let mut bit = Fenwick::zeros(n);
        let mut inversions = 0u64;
        for (placed, &v) in self.map.iter().enumerate() {
            inversions += placed as u64 - bit.prefix(v as usize) as u64;
            bit.add(v as usize, 1);
        }
        inversions
    }

    /// `self ∘ inner`: the permutation `i ↦ self(inner(i))`.
    pub fn compose(&self, inner: &Permutation) -> Result<Permutation> {
        if self.n() != inner.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: inner.n(),
            });
        }
        let map = inner.map.iter().map(|&v| self.map[v as usize - 1]).collect();
        Ok(Permutation { map })
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0u32; self.n()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v as usize - 1] = i as u32 + 1;
        }
        Permutation { map }
    }

    /// The reversal `i ↦ π(n+1−i)`.
    pub fn reverse(&self) -> Permutation {
        let map = self.map.iter().rev().copied().collect();
        Permutation { map }
    }

    /// Deletes position `i` and compresses the remaining values down to
    /// `{1..n−1}`, preserving relative order.
    pub fn delete_index(&self, i: usize) -> Result<Permutation> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidParameter(
                "delete_index needs size at least 2".into(),
            ));
        }
        check_index(i, n)?;
        let j = self.map[i - 1];
        let map = self
            .map
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != i - 1)
            .map(|(_, &v)| if v > j { v - 1 } else { v })
            .collect();
        Ok(Permutation { map })
    }

    /// The n permutations τ that agree with `self` after deleting position
    /// `i`, i.e. all ways to reassign the value at `i`; sorted by `τ(i)`.
    /// Always contains `self` (at `τ(i) = self(i)`).
    pub fn q_neighbors(&self, i: usize) -> Result<Vec<Permutation>> {
        let n = self.n();
        check_index(i, n)?;
        let j = self.map[i - 1];
        // Values at positions ≠ i, compressed to {1..n−1}.
        let compressed: Vec<u32> = self
            .map
            .iter()
            .map(|&v| if v > j { v - 1 } else { v })
            .collect();
        let mut out = Vec::with_capacity(n);
        for k in 1..=n as u32 {
            let map = compressed
                .iter()
                .enumerate()
                .map(|(t, &c)| {
                    if t == i - 1 {
                        k
                    } else if c >= k {
                        c + 1
                    } else {
                        c
                    }
                })
                .collect();
            out.push(Permutation { map });
        }
        Ok(out)
    }

    /// Inversion-count change from reassigning the value at position `i` to
    /// `k` within the delete/reinsert neighborhood: for the τ in
    /// `q_neighbors(self, i)` with `τ(i) = k`, returns `l(τ) − l(self)`,
    /// computed by counting how many intermediate values sit on each side of
    /// position `i` rather than by building τ.
    pub fn inversion_delta(&self, i: usize, k: usize) -> Result<i64> {
        let n = self.n();
        check_index(i, n)?;
        check_index(k, n)?;
        let j = self.get(i);
        let (lo, hi) = if k > j {
            (j + 1, k)
        } else if k < j {
            (k, j - 1)
        } else {
            return Ok(0);
        };
        let mut before = 0i64;
        let mut after = 0i64;
        for (t, &v) in self.map.iter().enumerate() {
            let v = v as usize;
            if v < lo || v > hi {
                continue;
            }
            if t < i - 1 {
                before += 1;
            } else if t > i - 1 {
                after += 1;
            }
        }
        Ok(if k > j { after - before } else { before - after })
    }

    /// The pattern of positions `j..=k`: a permutation of size `k−j+1` whose
    /// value at slot `i` is the rank of `π(j+i−1)` within the window.
    pub fn restrict(&self, j: usize, k: usize) -> Result<Permutation> {
        let n = self.n();
        check_index(j, n)?;
        check_index(k, n)?;
        if j >= k {
            return Err(Error::InvalidParameter(format!(
                "restrict window [{j}, {k}] must have j < k"
            )));
        }
        let window = &self.map[j - 1..k];
        let mut order: Vec<usize> = (0..window.len()).collect();
        order.sort_unstable_by_key(|&t| window[t]);
        let mut map = vec![0u32; window.len()];
        for (rank, &t) in order.iter().enumerate() {
            map[t] = rank as u32 + 1;
        }
        Ok(Permutation { map })
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (t, v) in self.map.iter().enumerate() {
            if t > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl std::str::FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let map = s
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|e| Error::InvalidPermutation {
                    reason: format!("bad entry {tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        Permutation::from_one_line(map)
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<u32>) -> Result<Self> {
        Permutation::from_one_line(map)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.map
    }
}

/// A finite set of points in `[0,1]²` with pairwise distinct x- and
/// y-coordinates, so that sorting by x and ranking the y-values induces a
/// unique permutation.
#[derive(Clone, Debug)]
pub struct PointSet<F> {
    points: Vec<(F, F)>,
}

impl<F: Real> PointSet<F> {
    pub fn new(points: Vec<(F, F)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("point set must be nonempty".into()));
        }
        let zero = F::zero();
        let one = F::one();
        for &(x, y) in &points {
            if !(x >= zero && x <= one && y >= zero && y <= one) {
                return Err(Error::InvalidParameter(
                    "point coordinates must lie in [0,1]".into(),
                ));
            }
        }
        check_distinct(points.iter().map(|p| p.0), 'x')?;
        check_distinct(points.iter().map(|p| p.1), 'y')?;
        Ok(PointSet { points })
    }

    /// The point cloud `{(i/n, π(i)/n)}` of a permutation.
    pub fn of_permutation(p: &Permutation) -> Self {
        let n = F::of_usize(p.n());
        let points = p
            .values()
            .enumerate()
            .map(|(t, v)| (F::of_usize(t + 1) / n, F::of_usize(v) / n))
            .collect();
        PointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(F, F)] {
        &self.points
    }

    /// Number of discordant pairs: pairs whose x- and y-orders disagree.
    /// Deliberately the O(n²) definition, independent of `induce`, so the
    /// two can be tested against each other.
    pub fn point_inversions(&self) -> u64 {
        let zero = F::zero();
        let mut count = 0u64;
        for (t, &(xi, yi)) in self.points.iter().enumerate() {
            for &(xj, yj) in &self.points[t + 1..] {
                if (xi - xj) * (yi - yj) < zero {
                    count += 1;
                }
            }
        }
        count
    }

    /// The permutation induced by sorting on x and ranking the y-values.
    pub fn induce(&self) -> Permutation {
        let mut by_x: Vec<usize> = (0..self.points.len()).collect();
        by_x.sort_unstable_by(|&a, &b| self.points[a].0.partial_cmp(&self.points[b].0).unwrap());
        let mut by_y: Vec<usize> = (0..self.points.len()).collect();
        by_y.sort_unstable_by(|&a, &b| self.points[a].1.partial_cmp(&self.points[b].1).unwrap());
        let mut y_rank = vec![0u32; self.points.len()];
        for (rank, &idx) in by_y.iter().enumerate() {
            y_rank[idx] = rank as u32 + 1;
        }
        let map = by_x.iter().map(|&idx| y_rank[idx]).collect();
        Permutation { map }
    }
}

fn check_distinct<F: Real>(coords: impl Iterator<Item = F>, axis: char) -> Result<()> {
    let mut sorted: Vec<F> = coords.collect();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateCoordinate { axis });
    }
    Ok(())
}

/// All permutations of size n in lexicographic order of one-line form;
/// shared across test modules.
#[cfg(test)]
pub(crate) fn all_permutations(n: usize) -> Vec<Permutation> {
    fn heap_recurse(items: &mut Vec<u32>, k: usize, out: &mut Vec<Permutation>) {
        if k == 1 {
            out.push(Permutation { map: items.clone() });
            return;
        }
        for i in 0..k {
            heap_recurse(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    let mut out = Vec::new();
    let mut items: Vec<u32> = (1..=n as u32).collect();
    heap_recurse(&mut items, n, &mut out);
    out.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
    out
}
