//! Chernoff information, conditional divergence and the log-moment function
//! `μ(s) = Σ_x P(x) log Σ_y W(y|x)^{1-s} V(y|x)^s` that ties them to
//! finite-blocklength error bounds.
//!
//! Everything is per symbol and in nats. For a sequence `x^n` the sequence
//! quantity is `n` times the per-symbol value evaluated at its type.

use crate::channel::{Distribution, SensingProblem};
use crate::error::{Error, Result};
use crate::numeric::{golden_section_min, log_sum_exp};

/// Bracket width for the golden-section search over `s`.
const GOLDEN_WIDTH: f64 = 1e-10;

/// `C(W‖V|P)` together with its minimizer and the curvature there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffResult {
    /// Chernoff information in nats.
    pub value: f64,
    /// Minimizer of `μ` on `[0, 1]`; 0.5 when `μ` is identically zero.
    pub s0: f64,
    /// Per-symbol `μ''(s0)` in nats².
    pub mu_second: f64,
}

/// Chernoff upper bound and Shannon-Gallager-Berlekamp floor on the larger
/// of the two discrimination errors at blocklength `n`.
///
/// The log fields stay meaningful when the probabilities underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteNBounds {
    pub n: usize,
    /// `exp(-n C)`.
    pub upper: f64,
    /// `¼ exp(n μ(s0) - sqrt(2 n μ''(s0)))`.
    pub lower_floor: f64,
    pub log_upper: f64,
    pub log_lower_floor: f64,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} is outside [0, 1]")));
    }
    Ok(())
}

/// Log-likelihood pairs `(ln W(y|x), ln V(y|x))` for one input letter,
/// dropping outputs where both channels vanish.
fn letter_logs(w: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    w.iter()
        .zip(v)
        .filter(|(a, b)| **a > 0.0 || **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect()
}

fn tilted_exponent(lw: f64, lv: f64, s: f64) -> f64 {
    if s == 0.0 {
        lw
    } else if s == 1.0 {
        lv
    } else {
        (1.0 - s) * lw + s * lv
    }
}

/// `g_s(x) = log Σ_y W^{1-s} V^s` for one letter and its first two
/// derivatives in `s`. The derivatives are the mean and variance of
/// `log V/W` under the tilted law `W^{1-s} V^s / e^{g}`.
fn letter_mu_with_derivatives(logs: &[(f64, f64)], s: f64) -> (f64, f64, f64) {
    let exps: Vec<f64> = logs
        .iter()
        .map(|&(lw, lv)| tilted_exponent(lw, lv, s))
        .collect();
    let g = log_sum_exp(&exps);
    let mut mean = 0.0;
    for (&e, &(lw, lv)) in exps.iter().zip(logs) {
        let t = (e - g).exp();
        if t > 0.0 {
            mean += t * (lv - lw);
        }
    }
    let mut var = 0.0;
    for (&e, &(lw, lv)) in exps.iter().zip(logs) {
        let t = (e - g).exp();
        if t > 0.0 {
            let d = lv - lw - mean;
            var += t * d * d;
        }
    }
    (g, mean, var)
}

fn letter_mu(logs: &[(f64, f64)], s: f64) -> f64 {
    let exps: Vec<f64> = logs
        .iter()
        .map(|&(lw, lv)| tilted_exponent(lw, lv, s))
        .collect();
    log_sum_exp(&exps)
}

/// `g_s(x)` for every input letter.
pub fn letter_log_mgf(problem: &SensingProblem, s: f64) -> Vec<f64> {
    (0..problem.input_size())
        .map(|x| letter_mu(&letter_logs(problem.w().row(x), problem.v().row(x)), s))
        .collect()
}

/// `D(W(·|x) ‖ V(·|x))` for every input letter.
pub fn letter_divergence(problem: &SensingProblem) -> Vec<f64> {
    (0..problem.input_size())
        .map(|x| {
            problem
                .w()
                .row(x)
                .iter()
                .zip(problem.v().row(x))
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, v)| w * (w / v).ln())
                .sum()
        })
        .collect()
}

/// Precomputed log tables for the support of a distribution.
struct MuFunction {
    letters: Vec<(f64, Vec<(f64, f64)>)>,
}

impl MuFunction {
    fn new(problem: &SensingProblem, dist: &Distribution) -> Result<Self> {
        problem.check_input_len(dist.len())?;
        let letters = dist
            .support()
            .map(|(x, p)| (p, letter_logs(problem.w().row(x), problem.v().row(x))))
            .collect();
        Ok(Self { letters })
    }

    fn value(&self, s: f64) -> f64 {
        self.letters.iter().map(|(p, logs)| p * letter_mu(logs, s)).sum()
    }

    fn with_derivatives(&self, s: f64) -> (f64, f64, f64) {
        self.letters
            .iter()
            .fold((0.0, 0.0, 0.0), |(a, b, c), (p, logs)| {
                let (g, d1, d2) = letter_mu_with_derivatives(logs, s);
                (a + p * g, b + p * d1, c + p * d2)
            })
    }

    /// True when `W(·|x) = V(·|x)` on every support letter, i.e. `μ ≡ 0`.
    fn is_flat(&self) -> bool {
        self.letters
            .iter()
            .all(|(_, logs)| logs.iter().all(|(lw, lv)| lw == lv))
    }
}

/// Per-symbol `μ(s|P)`.
pub fn per_symbol_mu(problem: &SensingProblem, dist: &Distribution, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(MuFunction::new(problem, dist)?.value(s))
}

/// Analytic `(μ'(s|P), μ''(s|P))`.
pub fn mu_derivatives(problem: &SensingProblem, dist: &Distribution, s: f64) -> Result<(f64, f64)> {
    check_s(s)?;
    let (_, d1, d2) = MuFunction::new(problem, dist)?.with_derivatives(s);
    Ok((d1, d2))
}

/// Chernoff information `C(W‖V|P) = -min_{s∈[0,1]} μ(s|P)`.
///
/// Golden-section search narrows the minimizer to a 1e-10 bracket, then a
/// single Newton step on the analytic derivatives polishes it.
pub fn chernoff_info(problem: &SensingProblem, dist: &Distribution) -> Result<ChernoffResult> {
    let mu = MuFunction::new(problem, dist)?;
    if mu.is_flat() {
        return Ok(ChernoffResult {
            value: 0.0,
            s0: 0.5,
            mu_second: 0.0,
        });
    }
    let mut s0 = golden_section_min(|s| mu.value(s), 0.0, 1.0, GOLDEN_WIDTH);
    let (value, d1, d2) = mu.with_derivatives(s0);
    let mut best = value;
    if d2 > 0.0 {
        let polished = (s0 - d1 / d2).clamp(0.0, 1.0);
        let v = mu.value(polished);
        if v <= best {
            s0 = polished;
            best = v;
        }
    }
    let (_, _, mu_second) = mu.with_derivatives(s0);
    Ok(ChernoffResult {
        value: (-best).max(0.0),
        s0,
        mu_second,
    })
}

/// Conditional divergence `D(W‖V|P) = Σ_x P(x) D(W(·|x) ‖ V(·|x))`.
pub fn conditional_divergence(problem: &SensingProblem, dist: &Distribution) -> Result<f64> {
    problem.check_input_len(dist.len())?;
    let per_letter = letter_divergence(problem);
    Ok(dist.support().map(|(x, p)| p * per_letter[x]).sum())
}

/// Finite-`n` bounds on `max{ε0, ε1}` for a codeword of type `dist`.
///
/// The floor is the weaker of the two SGB alternatives, obtained by
/// replacing both `s0` and `1 - s0` with 1.
pub fn finite_n_bounds(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
) -> Result<FiniteNBounds> {
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be positive".into()));
    }
    let c = chernoff_info(problem, dist)?;
    let nf = n as f64;
    let log_upper = -nf * c.value;
    let log_lower_floor = 0.25f64.ln() - nf * c.value - (2.0 * nf * c.mu_second).sqrt();
    Ok(FiniteNBounds {
        n,
        upper: log_upper.exp(),
        lower_floor: log_lower_floor.exp(),
        log_upper,
        log_lower_floor,
    })
}

/// Lipschitz bound on `|C(W‖V|p) - C(W‖V|q)|`.
///
/// Returns `K ‖p - q‖₁` with `K = max_x C(W(·|x) ‖ V(·|x))`. Each `g_s(x)` is
/// non-positive and vanishes at `s ∈ {0, 1}`, so `K ≥ max_s |g_s(x)|`.
pub fn continuity_bound(problem: &SensingProblem, p: &Distribution, q: &Distribution) -> Result<f64> {
    problem.check_input_len(p.len())?;
    let distance = p.l1_distance(q)?;
    if distance == 0.0 {
        return Ok(0.0);
    }
    let size = problem.input_size();
    let mut k: f64 = 0.0;
    for x in 0..size {
        k = k.max(chernoff_info(problem, &Distribution::degenerate(size, x))?.value);
    }
    Ok(k * distance)
}
