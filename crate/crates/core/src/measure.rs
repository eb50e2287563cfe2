//! Empirical measures of permutations and permutation pairs: rectangle
//! masses, grid counts with prefix-sum discrepancy against a reference
//! density, and the one-dimensional Kolmogorov-Smirnov statistic.

use serde::{Deserialize, Serialize};

use crate::perm::Permutation;
use crate::real::Real;
use crate::{Error, Result};

/// Which edges of a rectangle include their boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClosure {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl EdgeClosure {
    /// (x1,x2]×(y1,y2]: the convention under which grid cells tile (0,1]².
    pub fn half_open() -> Self {
        EdgeClosure { left: false, right: true, bottom: false, top: true }
    }

    pub fn closed() -> Self {
        EdgeClosure { left: true, right: true, bottom: true, top: true }
    }
}

/// Axis-aligned rectangle inside [0,1]² with per-edge closure flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<F> {
    x1: F,
    x2: F,
    y1: F,
    y2: F,
    closure: EdgeClosure,
}

impl<F: Real> Rect<F> {
    pub fn with_closure(x1: F, x2: F, y1: F, y2: F, closure: EdgeClosure) -> Result<Self> {
        let ok = |v: F| v >= F::zero() && v <= F::one();
        if !(ok(x1) && ok(x2) && ok(y1) && ok(y2)) {
            return Err(Error::InvalidParameter(
                "rectangle corners must lie in [0,1]".into(),
            ));
        }
        if !(x1 <= x2 && y1 <= y2) {
            return Err(Error::InvalidParameter(format!(
                "rectangle corners out of order: x {x1}..{x2}, y {y1}..{y2}"
            )));
        }
        Ok(Rect { x1, x2, y1, y2, closure })
    }

    pub fn half_open(x1: F, x2: F, y1: F, y2: F) -> Result<Self> {
        Self::with_closure(x1, x2, y1, y2, EdgeClosure::half_open())
    }

    pub fn closed(x1: F, x2: F, y1: F, y2: F) -> Result<Self> {
        Self::with_closure(x1, x2, y1, y2, EdgeClosure::closed())
    }

    /// Closed unit square.
    pub fn unit() -> Self {
        Rect {
            x1: F::zero(),
            x2: F::one(),
            y1: F::zero(),
            y2: F::one(),
            closure: EdgeClosure::closed(),
        }
    }

    pub fn x1(&self) -> F {
        self.x1
    }

    pub fn x2(&self) -> F {
        self.x2
    }

    pub fn y1(&self) -> F {
        self.y1
    }

    pub fn y2(&self) -> F {
        self.y2
    }

    pub fn closure(&self) -> EdgeClosure {
        self.closure
    }

    pub fn width(&self) -> F {
        self.x2 - self.x1
    }

    pub fn height(&self) -> F {
        self.y2 - self.y1
    }

    pub fn area(&self) -> F {
        self.width() * self.height()
    }

    pub fn contains(&self, x: F, y: F) -> bool {
        let c = self.closure;
        let x_lo = if c.left { x >= self.x1 } else { x > self.x1 };
        let x_hi = if c.right { x <= self.x2 } else { x < self.x2 };
        let y_lo = if c.bottom { y >= self.y1 } else { y > self.y1 };
        let y_hi = if c.top { y <= self.y2 } else { y < self.y2 };
        x_lo && x_hi && y_lo && y_hi
    }
}

/// Fraction of the points (i/n, π(i)/n) inside r.
///
/// Coordinates are formed by true division so that a corner written as the
/// same fraction (say 3/5) lands on the identical float and edge flags
/// resolve boundary points exactly.
pub fn empirical_rect<F: Real>(p: &Permutation, r: &Rect<F>) -> F {
    let n = p.n();
    let fn_ = F::of_usize(n);
    let mut hits = 0usize;
    for i in 1..=n {
        let x = F::of_usize(i) / fn_;
        let y = F::of_usize(p.get(i)) / fn_;
        if r.contains(x, y) {
            hits += 1;
        }
    }
    F::of_usize(hits) / fn_
}

/// Fraction of the points (π(i)/n, τ(i)/n) inside r.
pub fn empirical_pair_rect<F: Real>(p: &Permutation, t: &Permutation, r: &Rect<F>) -> Result<F> {
    if p.n() != t.n() {
        return Err(Error::SizeMismatch { left: p.n(), right: t.n() });
    }
    let n = p.n();
    let fn_ = F::of_usize(n);
    let mut hits = 0usize;
    for i in 1..=n {
        let x = F::of_usize(p.get(i)) / fn_;
        let y = F::of_usize(t.get(i)) / fn_;
        if r.contains(x, y) {
            hits += 1;
        }
    }
    Ok(F::of_usize(hits) / fn_)
}

/// (1/n) Σ f(i/n, π(i)/n).
pub fn empirical_mean<F: Real>(p: &Permutation, f: impl Fn(F, F) -> F) -> F {
    let n = p.n();
    let fn_ = F::of_usize(n);
    let mut sum = F::zero();
    for i in 1..=n {
        sum = sum + f(F::of_usize(i) / fn_, F::of_usize(p.get(i)) / fn_);
    }
    sum / fn_
}

/// Counts of sample points over the m×m half-open grid on (0,1]²;
/// cell (a,b) is ((a−1)/m, a/m]×((b−1)/m, b/m], both indices 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCounts {
    m: usize,
    n: usize,
    counts: Vec<u32>,
}

/// 1-based value v of a permutation on n points lands in band ⌈v·m/n⌉.
fn band(v: usize, m: usize, n: usize) -> usize {
    ((v as u64 * m as u64 + n as u64 - 1) / n as u64) as usize
}

impl GridCounts {
    pub fn from_permutation(p: &Permutation, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        let n = p.n();
        let mut counts = vec![0u32; m * m];
        for i in 1..=n {
            let a = band(i, m, n);
            let b = band(p.get(i), m, n);
            counts[(a - 1) * m + (b - 1)] += 1;
        }
        Ok(GridCounts { m, n, counts })
    }

    /// Counts of the pair points (π(i), τ(i)).
    pub fn from_pair(p: &Permutation, t: &Permutation, m: usize) -> Result<Self> {
        if p.n() != t.n() {
            return Err(Error::SizeMismatch { left: p.n(), right: t.n() });
        }
        if m < 1 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        let n = p.n();
        let mut counts = vec![0u32; m * m];
        for i in 1..=n {
            let a = band(p.get(i), m, n);
            let b = band(t.get(i), m, n);
            counts[(a - 1) * m + (b - 1)] += 1;
        }
        Ok(GridCounts { m, n, counts })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Count in cell (a,b), 1-based.
    pub fn count(&self, a: usize, b: usize) -> u32 {
        assert!(1 <= a && a <= self.m && 1 <= b && b <= self.m, "cell out of range");
        self.counts[(a - 1) * self.m + (b - 1)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Inclusive 2-D prefix table: entry (a,b) counts points in
    /// (0,a/m]×(0,b/m]; row/column 0 entries are 0.
    pub fn prefix(&self) -> Vec<Vec<u64>> {
        let m = self.m;
        let mut pre = vec![vec![0u64; m + 1]; m + 1];
        for a in 1..=m {
            for b in 1..=m {
                pre[a][b] = self.count(a, b) as u64 + pre[a - 1][b] + pre[a][b - 1]
                    - pre[a - 1][b - 1];
            }
        }
        pre
    }

    /// Row-major CSV with header a,b,count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,count\n");
        for a in 1..=self.m {
            for b in 1..=self.m {
                out.push_str(&format!("{a},{b},{}\n", self.count(a, b)));
            }
        }
        out
    }
}

/// Reference masses of the anchored rectangles (0,a/m]×(0,b/m], memoized
/// on grid corners; grid-aligned rectangle masses come out by
/// inclusion-exclusion.
#[derive(Clone, Debug)]
pub struct AnchoredMasses<F> {
    m: usize,
    mass: Vec<F>,
}

impl<F: Real> AnchoredMasses<F> {
    /// Evaluates `anchored(x, y) = reference mass of (0,x]×(0,y]` on all
    /// grid corners (a/m, b/m).
    pub fn from_fn(m: usize, anchored: impl Fn(F, F) -> Result<F>) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        let fm = F::of_usize(m);
        let mut mass = Vec::with_capacity(m * m);
        for a in 1..=m {
            for b in 1..=m {
                mass.push(anchored(F::of_usize(a) / fm, F::of_usize(b) / fm)?);
            }
        }
        Ok(AnchoredMasses { m, mass })
    }

    /// Empirical anchored masses of an observed grid, for self-comparison.
    pub fn from_grid_counts(g: &GridCounts) -> Self {
        let m = g.m();
        let pre = g.prefix();
        let n = F::of_usize(g.n());
        let mut mass = Vec::with_capacity(m * m);
        for a in 1..=m {
            for b in 1..=m {
                mass.push(F::of_usize(pre[a][b] as usize) / n);
            }
        }
        AnchoredMasses { m, mass }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Mass of (0,a/m]×(0,b/m]; index 0 means the empty prefix.
    pub fn anchored(&self, a: usize, b: usize) -> F {
        if a == 0 || b == 0 {
            return F::zero();
        }
        self.mass[(a - 1) * self.m + (b - 1)]
    }

    /// Mass of the grid-aligned rectangle spanning bands a1..=a2 × b1..=b2.
    pub fn rect_mass(&self, a1: usize, a2: usize, b1: usize, b2: usize) -> F {
        self.anchored(a2, b2) - self.anchored(a1 - 1, b2) - self.anchored(a2, b1 - 1)
            + self.anchored(a1 - 1, b1 - 1)
    }
}

/// Which family of grid-aligned rectangles a discrepancy scan ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyMode {
    /// The m² anchored rectangles (0,a/m]×(0,b/m].
    Anchored,
    /// All O(m⁴) grid-aligned rectangles.
    AllCells,
}

/// One rectangle's empirical-vs-reference gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectDeviation<F> {
    pub rect: Rect<F>,
    pub empirical: F,
    pub reference: F,
    pub deviation: F,
}

/// Worst rectangle deviation found by a discrepancy scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport<F> {
    pub max_abs_dev: F,
    pub argmax_rect: Rect<F>,
    /// Full per-rectangle table; populated in anchored mode only.
    pub per_rect_devs: Option<Vec<RectDeviation<F>>>,
}

/// Largest |empirical − reference| over the mode's rectangle family.
pub fn grid_discrepancy<F: Real>(
    g: &GridCounts,
    reference: &AnchoredMasses<F>,
    mode: DiscrepancyMode,
) -> Result<DiscrepancyReport<F>> {
    if g.m() != reference.m() {
        return Err(Error::SupportMismatch { left: g.m(), right: reference.m() });
    }
    let m = g.m();
    let fm = F::of_usize(m);
    let n = F::of_usize(g.n());
    let pre = g.prefix();
    let corner = |k: usize| F::of_usize(k) / fm;
    let deviation = |a1: usize, a2: usize, b1: usize, b2: usize| -> RectDeviation<F> {
        let count = pre[a2][b2] + pre[a1 - 1][b1 - 1] - pre[a1 - 1][b2] - pre[a2][b1 - 1];
        let empirical = F::of_usize(count as usize) / n;
        let reference = reference.rect_mass(a1, a2, b1, b2);
        // Scanned rectangles follow the half-open grid convention.
        let rect = Rect::half_open(corner(a1 - 1), corner(a2), corner(b1 - 1), corner(b2))
            .expect("grid corners are valid");
        RectDeviation { rect, empirical, reference, deviation: (empirical - reference).abs() }
    };
    let mut best: Option<RectDeviation<F>> = None;
    let mut table = Vec::new();
    match mode {
        DiscrepancyMode::Anchored => {
            for a in 1..=m {
                for b in 1..=m {
                    let d = deviation(1, a, 1, b);
                    if best.map_or(true, |bst| d.deviation > bst.deviation) {
                        best = Some(d);
                    }
                    table.push(d);
                }
            }
        }
        DiscrepancyMode::AllCells => {
            for a1 in 1..=m {
                for a2 in a1..=m {
                    for b1 in 1..=m {
                        for b2 in b1..=m {
                            let d = deviation(a1, a2, b1, b2);
                            if best.map_or(true, |bst| d.deviation > bst.deviation) {
                                best = Some(d);
                            }
                        }
                    }
                }
            }
        }
    }
    let best = best.expect("m >= 1 guarantees at least one rectangle");
    Ok(DiscrepancyReport {
        max_abs_dev: best.deviation,
        argmax_rect: best.rect,
        per_rect_devs: match mode {
            DiscrepancyMode::Anchored => Some(table),
            DiscrepancyMode::AllCells => None,
        },
    })
}

/// Two-sided Kolmogorov-Smirnov distance between the sample ECDF and cdf.
pub fn ks_statistic<F: Real>(samples: &[F], cdf: impl Fn(F) -> F) -> Result<F> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let n = F::of_usize(sorted.len());
    let mut d = F::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let fx = cdf(x);
        let hi = (F::of_usize(i + 1) / n - fx).abs();
        let lo = (F::of_usize(i) / n - fx).abs();
        d = d.max(hi).max(lo);
    }
    Ok(d)
}
