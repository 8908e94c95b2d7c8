//! Rate-exponent trade-offs for joint communication and sensing.
//!
//! A transmitter sends `x^n` over a communication channel `P_{Z|X}` while a
//! co-located sensor observes `Y^n` through `W` (hypothesis 0) or `V`
//! (hypothesis 1) and decides between them. The crate computes the per-letter
//! discrimination exponents, the optimal rate for a required exponent under a
//! cost budget, and simulates both links at finite blocklength.
//!
//! All quantities are in nats.

pub mod channel;
pub mod error;
pub mod exponent;
pub mod numeric;
pub mod presets;
pub mod region;
pub mod sim;

pub use channel::{
    average_cost, empirical_type, parse_distribution, parse_problem, ChannelMatrix, Distribution,
    SensingProblem,
};
pub use error::{Error, Result};
pub use exponent::{
    chernoff_info, conditional_divergence, continuity_bound, finite_n_bounds, mu_derivatives,
    per_symbol_mu, ChernoffResult, FiniteNBounds,
};
pub use region::{
    best_exponent, capacity_cost, mutual_information, rate_for_exponent, region_sweep, Criterion,
    RegionPoint,
};
pub use sim::{ErrorPair, SimReport, TestSpec};
