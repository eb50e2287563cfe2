//! Scalar abstraction for the continuous math.

/// Floating-point scalars the density and measure kernels are generic over.
///
/// `num_traits::Float` supplies the transcendentals (including the `exp_m1`
/// and `ln_1p` forms the cancellation-safe paths depend on); the extra
/// conversion helpers keep literal constants readable at call sites.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Embeds an `f64` constant. Panics only if the type cannot represent
    /// finite values at all, which no implementor here can trigger.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    fn of_usize(k: usize) -> Self {
        Self::from_usize(k).unwrap_or_else(|| Self::of(k as f64))
    }
}

impl Real for f32 {}
impl Real for f64 {}
