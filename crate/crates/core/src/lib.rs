//! Mallows permutations end to end: exact sampling, the closed-form densities
//! of their large-`n` limits, and the statistics connecting the two.
//!
//! A Mallows permutation of size `n` with parameter `q > 0` is a random
//! permutation in which `π` carries probability proportional to `q^{l(π)}`,
//! where `l(π)` counts inversions. Under the scaling `q_n = 1 − β/n` the
//! point cloud `{(i/n, π(i)/n)}` concentrates on an explicit density
//! `u(x, y, β)` on the unit square, and the cloud of a product `τ∘π` of two
//! independent Mallows permutations concentrates on
//! `ρ(x, y) = ∫₀¹ u(x, t, β) u(t, y, γ) dt`.
//!
//! The crate is organized around that correspondence:
//!
//! - [`perm`]: permutation representation and combinatorial operations
//!   (inversions, composition, restriction, delete/reinsert neighborhoods).
//! - [`sampler`]: exact O(n log n) sampling via truncated-geometric inversion
//!   tables, with a reproducible seeded stream contract.
//! - [`density`]: cancellation-safe evaluation of `u`, its CDFs and rectangle
//!   masses, and the product density `ρ`.
//! - [`measure`]: empirical-measure statistics (rectangle counts, grid
//!   discrepancies, Kolmogorov-Smirnov distances).
//! - [`oracle`]: brute-force enumeration of the exact distribution for small
//!   `n`; the independent reference everything else is tested against.
//! - [`verify`]: the exact-identity checks bundled into a pass/fail table.
//! - [`experiments`]: seeded Monte Carlo convergence studies with
//!   deterministic parallel replication and structured reports.
//!
//! Real-valued kernels are generic over the scalar type through [`real::Real`]
//! (`f32` and `f64` both qualify); the `*64` aliases at the crate root pin the
//! `f64` instantiations used by the oracle, the experiments, and the CLI.

pub mod density;
pub mod experiments;
mod fenwick;
pub mod measure;
pub mod oracle;
pub mod perm;
pub mod real;
pub mod sampler;
pub mod verify;

pub use perm::Permutation;
pub use real::Real;

/// `f64` instantiations of the scalar-generic types.
pub type PointSet64 = perm::PointSet<f64>;
pub type Rect64 = measure::Rect<f64>;
pub type DensityParams64 = density::DensityParams<f64>;
pub type RhoParams64 = density::RhoParams<f64>;
pub type QuadratureConfig64 = density::QuadratureConfig<f64>;
pub type MallowsParams64 = sampler::MallowsParams<f64>;

/// Every fallible operation in the crate returns this error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("permutation sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid permutation: {reason}")]
    InvalidPermutation { reason: String },
    #[error("point set has a duplicate {axis}-coordinate")]
    DuplicateCoordinate { axis: char },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Lehmer code entry {index} is {value}; at most {max} allowed there")]
    InvalidLehmerCode { index: usize, value: usize, max: usize },
    #[error("enumeration of S_{n} refused: hard guard is n <= {max}")]
    EnumerationTooLarge { n: usize, max: usize },
    #[error(
        "quadrature did not reach tolerance {tol:e} within {max_subdivisions} subdivisions \
         (worst panel estimate {estimate:e})"
    )]
    QuadratureDidNotConverge {
        tol: f64,
        max_subdivisions: usize,
        estimate: f64,
    },
    #[error("empty sample set")]
    EmptySamples,
    #[error("distribution supports differ: {left} atoms vs {right}")]
    SupportMismatch { left: usize, right: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
