//! Binary-input problems with closed-form rate-exponent regions.

use crate::channel::{ChannelMatrix, SensingProblem};
use crate::error::Result;

/// On-off sensing: `Z = X ⊕ N_Z` with `N_Z ~ Bern(p)` and `Y = θX ⊕ N_Y` with
/// `N_Y ~ Bern(q)`. Sending `X = 1` costs one unit, `X = 0` is free.
///
/// Under hypothesis 0 the sensor output ignores the input; under hypothesis 1
/// it is a BSC(q), so only the letter `1` is informative.
pub fn example_one(p: f64, q: f64, budget: f64) -> Result<SensingProblem> {
    SensingProblem::new(
        ChannelMatrix::bsc(p)?,
        ChannelMatrix::new("sensing_channel_0", vec![vec![1.0 - q, q], vec![1.0 - q, q]])?,
        ChannelMatrix::bsc(q)?,
        vec![0.0, 1.0],
        budget,
    )
}

/// Symmetric sensing: `W = BSC(p)` against `V = BSC(q)` with a BSC(p)
/// communication link and the same on-off cost. Both letters are equally
/// informative, so the exponent does not depend on the input distribution.
pub fn example_two(p: f64, q: f64, budget: f64) -> Result<SensingProblem> {
    SensingProblem::new(
        ChannelMatrix::bsc(p)?,
        ChannelMatrix::bsc(p)?,
        ChannelMatrix::bsc(q)?,
        vec![0.0, 1.0],
        budget,
    )
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    crate::numeric::neg_xlogx(p) + crate::numeric::neg_xlogx(1.0 - p)
}

/// Binary divergence `d(a‖b)` in nats.
pub fn binary_divergence(a: f64, b: f64) -> f64 {
    let term = |x: f64, y: f64| if x > 0.0 { x * (x / y).ln() } else { 0.0 };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// `a ∗ b = a(1 - b) + b(1 - a)`.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}
