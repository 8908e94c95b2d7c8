//! Finite-blocklength validation: constant-composition codewords,
//! likelihood-ratio tests with exact binary-output error computation,
//! seeded Monte-Carlo discrimination and a random-coding link simulation.

mod codeword;
mod comm;
mod exact;
mod monte_carlo;
mod rng;

pub use codeword::{composition, constant_composition_sequence};
pub use comm::{
    simulate_communication, simulate_communication_with, CommMethod, MAX_BRUTE_FORCE_CODEBOOK,
};
pub use exact::{calibrate_np_threshold, exact_binary_errors, llr_distribution, LlrAtom, McCalibration};
pub use monte_carlo::{simulate_discrimination, wilson_half_width, SimReport};

use crate::error::{Error, Result};

/// Ties within this (relative) distance of the threshold decide hypothesis 0.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Sensor decision rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestSpec {
    /// Likelihood-ratio test at threshold 0 (equal priors).
    Map,
    /// Decide 0 iff `log W/V ≥ tau` (nats).
    Lrt { tau: f64 },
    /// Most powerful deterministic test with type I error at most `alpha`.
    NeymanPearson { alpha: f64 },
}

impl TestSpec {
    pub fn lrt(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold {tau} is not finite")));
        }
        Ok(TestSpec::Lrt { tau })
    }

    pub fn neyman_pearson(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(TestSpec::NeymanPearson { alpha })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} is outside (0, 1)")));
    }
    Ok(())
}

/// The LRT decision: `true` means hypothesis 0 (channel `W`).
pub fn decides_null(llr: f64, tau: f64) -> bool {
    llr >= tau - TIE_TOLERANCE * (1.0 + tau.abs())
}

/// Type I and type II error probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    /// Deciding 1 when `θ = 0`.
    pub eps0: f64,
    /// Deciding 0 when `θ = 1`.
    pub eps1: f64,
    /// Natural logs of the above; finite even when the probabilities underflow.
    pub log_eps0: f64,
    pub log_eps1: f64,
}

impl ErrorPair {
    pub fn from_logs(log_eps0: f64, log_eps1: f64) -> Self {
        Self {
            eps0: log_eps0.exp().min(1.0),
            eps1: log_eps1.exp().min(1.0),
            log_eps0: log_eps0.min(0.0),
            log_eps1: log_eps1.min(0.0),
        }
    }

    pub fn from_probabilities(eps0: f64, eps1: f64) -> Self {
        Self {
            eps0,
            eps1,
            log_eps0: eps0.ln(),
            log_eps1: eps1.ln(),
        }
    }

    pub fn max(&self) -> f64 {
        self.eps0.max(self.eps1)
    }

    pub fn log_max(&self) -> f64 {
        self.log_eps0.max(self.log_eps1)
    }
}
