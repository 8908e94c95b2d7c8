//! Random constant-composition coding over the communication channel.
//!
//! Small codebooks are drawn explicitly and decoded by maximum likelihood.
//! When `M` is too large to materialize and the input is binary, each trial
//! instead draws only the transmitted codeword and channel output; the law of
//! a random competitor's metric given that output is multivariate
//! hypergeometric in the number of ones it places in each output class, so
//! the probability of correct ML decoding can be evaluated in closed form.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::codeword::{composition, constant_composition_sequence};
use super::monte_carlo::RowSampler;
use super::rng::{stream, Purpose};
use super::TIE_TOLERANCE;
use crate::channel::{Distribution, SensingProblem};
use crate::error::{Error, Result};
use crate::numeric::ln_factorials;
use crate::region::mutual_information;

/// Largest codebook drawn explicitly.
pub const MAX_BRUTE_FORCE_CODEBOOK: u64 = 1 << 16;

/// Upper limit on competitor-profile enumeration in the conditional method.
const MAX_PROFILES: f64 = 1e7;

/// How decoding error is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommMethod {
    /// Explicit codebooks up to [`MAX_BRUTE_FORCE_CODEBOOK`], conditional
    /// evaluation beyond that (binary input only).
    #[default]
    Auto,
    /// Draw every codeword and decode.
    BruteForce,
    /// Average the exact conditional error given the sent codeword and the
    /// channel output. Requires a binary input alphabet.
    Conditional,
}

struct Setup {
    n: usize,
    codebook_size: f64,
    canonical: Vec<usize>,
    /// `log |T|` for the type class of the canonical sequence.
    log_class_size: f64,
    log_comm: Vec<Vec<f64>>,
    sampler: RowSampler,
}

fn ties(a: f64, best: f64) -> bool {
    a >= best - TIE_TOLERANCE * (1.0 + best.abs())
}

/// Average decoding error of random constant-composition coding at `rate`
/// nats/symbol, estimated over `trials` independent codebook draws.
pub fn simulate_communication(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    rate: f64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    simulate_communication_with(problem, dist, n, rate, trials, seed, CommMethod::Auto)
}

/// [`simulate_communication`] with an explicit evaluation method.
pub fn simulate_communication_with(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    rate: f64,
    trials: u64,
    seed: u64,
    method: CommMethod,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate {rate} must be finite and non-negative")));
    }
    problem.check_input_len(dist.len())?;
    let info = mutual_information(problem.comm(), dist)?;
    if rate > info + 1e-12 {
        return Err(Error::RateAboveMutualInformation {
            rate,
            mutual_information: info,
        });
    }
    let canonical = constant_composition_sequence(dist, n)?;
    // The relative shave keeps exact powers like e^{n ln 2 / 2} from
    // rounding up past an integer.
    let codebook_size = ((n as f64 * rate).exp() * (1.0 - 1e-12)).ceil();
    if !codebook_size.is_finite() {
        return Err(Error::CodebookOverflow {
            size: codebook_size,
            limit: MAX_BRUTE_FORCE_CODEBOOK,
        });
    }
    let ln_fact = ln_factorials(n);
    let log_class_size =
        ln_fact[n] - composition(dist, n).iter().map(|&c| ln_fact[c]).sum::<f64>();
    if codebook_size.ln() > log_class_size + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{codebook_size} codewords exceed the {:.0} sequences of the type class",
            log_class_size.exp()
        )));
    }

    let binary = problem.input_size() == 2;
    let brute = match method {
        CommMethod::BruteForce => true,
        CommMethod::Conditional => false,
        CommMethod::Auto => codebook_size <= MAX_BRUTE_FORCE_CODEBOOK as f64 || !binary,
    };
    if brute && codebook_size > MAX_BRUTE_FORCE_CODEBOOK as f64 {
        return Err(Error::CodebookOverflow {
            size: codebook_size,
            limit: MAX_BRUTE_FORCE_CODEBOOK,
        });
    }
    if !brute && !binary {
        return Err(Error::InvalidParameter(
            "conditional evaluation needs a binary input alphabet".into(),
        ));
    }

    let setup = Setup {
        n,
        codebook_size,
        canonical,
        log_class_size,
        log_comm: problem
            .comm()
            .rows()
            .map(|row| row.iter().map(|p| p.ln()).collect())
            .collect(),
        sampler: RowSampler::new(problem.comm()),
    };
    let per_trial: Vec<f64> = if brute {
        (0..trials)
            .into_par_iter()
            .map(|t| brute_force_trial(&setup, seed, t))
            .collect()
    } else {
        (0..trials)
            .into_par_iter()
            .map(|t| conditional_trial(&setup, seed, t))
            .collect::<Result<_>>()?
    };
    Ok(per_trial.iter().sum::<f64>() / trials as f64)
}

fn metric(log_comm: &[Vec<f64>], codeword: &[usize], z: &[usize]) -> f64 {
    codeword.iter().zip(z).map(|(&x, &zi)| log_comm[x][zi]).sum()
}

fn brute_force_trial(setup: &Setup, seed: u64, trial: u64) -> f64 {
    let mut rng = stream(seed, Purpose::Communication, trial);
    let m = setup.codebook_size as usize;
    let mut seen = HashSet::with_capacity(m);
    let mut codebook = Vec::with_capacity(m);
    while codebook.len() < m {
        let mut c = setup.canonical.clone();
        c.shuffle(&mut rng);
        if seen.insert(c.clone()) {
            codebook.push(c);
        }
    }
    let sent = rng.gen_range(0..m);
    let z: Vec<usize> = codebook[sent]
        .iter()
        .map(|&x| setup.sampler.draw(&mut rng, x))
        .collect();
    let metrics: Vec<f64> = codebook
        .iter()
        .map(|c| metric(&setup.log_comm, c, &z))
        .collect();
    let best = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decoded = metrics
        .iter()
        .position(|&v| ties(v, best))
        .expect("the sent codeword has a finite metric");
    if decoded == sent {
        0.0
    } else {
        1.0
    }
}

/// Exact error probability given the sent codeword and output, averaged
/// over the other `M - 1` codewords and the position of the sent message.
fn conditional_trial(setup: &Setup, seed: u64, trial: u64) -> Result<f64> {
    if setup.codebook_size <= 1.0 {
        return Ok(0.0);
    }
    let mut rng = stream(seed, Purpose::Communication, trial);
    // Competitors are uniform over the type class, so by exchangeability the
    // sent codeword can be fixed to the canonical arrangement.
    let x = &setup.canonical;
    let z: Vec<usize> = x.iter().map(|&xi| setup.sampler.draw(&mut rng, xi)).collect();
    let sent_metric = metric(&setup.log_comm, x, &z);

    let outputs = setup.log_comm[0].len();
    let mut class = vec![0usize; outputs];
    for &zi in &z {
        class[zi] += 1;
    }
    let ones = x.iter().filter(|&&xi| xi == 1).count();
    let profiles: f64 = class.iter().map(|&c| (c + 1) as f64).product();
    if profiles > MAX_PROFILES {
        return Err(Error::SupportTooLarge {
            atoms: profiles.min(usize::MAX as f64) as usize,
        });
    }

    let ln_fact = ln_factorials(setup.n);
    let log_binom = |a: usize, b: usize| ln_fact[a] - ln_fact[b] - ln_fact[a - b];
    let log_total = log_binom(setup.n, ones);
    // Contribution of `j` ones (and `c - j` zeros) in output class `b`.
    let term = |b: usize, j: usize| {
        let mut s = 0.0;
        if j > 0 {
            s += j as f64 * setup.log_comm[1][b];
        }
        if class[b] > j {
            s += (class[b] - j) as f64 * setup.log_comm[0][b];
        }
        s
    };

    let (mut greater, mut equal) = (0.0f64, 0.0f64);
    let mut profile = vec![0usize; outputs];
    enumerate_profiles(&class, ones, 0, &mut profile, &mut |p| {
        let score: f64 = p.iter().enumerate().map(|(b, &j)| term(b, j)).sum();
        if score == f64::NEG_INFINITY {
            return;
        }
        let log_prob: f64 = p
            .iter()
            .enumerate()
            .map(|(b, &j)| log_binom(class[b], j))
            .sum::<f64>()
            - log_total;
        let prob = log_prob.exp();
        if (score - sent_metric).abs() <= TIE_TOLERANCE * (1.0 + sent_metric.abs()) {
            equal += prob;
        } else if score > sent_metric {
            greater += prob;
        }
    });

    // Competitors are distinct from the sent codeword: remove its own mass.
    let own = (-setup.log_class_size).exp();
    let keep = 1.0 - own;
    let greater = (greater / keep).clamp(0.0, 1.0);
    let equal = ((equal - own) / keep).clamp(0.0, 1.0 - greater);

    let m = setup.codebook_size;
    let beat_free = 1.0 - greater;
    if beat_free <= 0.0 {
        return Ok(1.0);
    }
    // P[correct] = b^(M-1) * mean over message index of r^(index),
    // b = 1 - P[greater], r = 1 - P[equal] / b.
    let log_b = (-greater).ln_1p();
    let tie_share = equal / beat_free;
    let position_factor = if tie_share == 0.0 {
        1.0
    } else {
        let log_r = (-tie_share).ln_1p();
        -(m * log_r).exp_m1() / (m * tie_share)
    };
    let correct = ((m - 1.0) * log_b).exp() * position_factor;
    Ok((1.0 - correct).clamp(0.0, 1.0))
}

/// Calls `visit` with every vector `j` with `0 ≤ j_b ≤ class_b`, `Σ j_b = ones`.
fn enumerate_profiles(
    class: &[usize],
    ones: usize,
    b: usize,
    profile: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if b + 1 == class.len() {
        if ones <= class[b] {
            profile[b] = ones;
            visit(profile);
        }
        return;
    }
    let rest: usize = class[b + 1..].iter().sum();
    let lo = ones.saturating_sub(rest);
    for j in lo..=ones.min(class[b]) {
        profile[b] = j;
        enumerate_profiles(class, ones - j, b + 1, profile, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMatrix;

    fn problem(comm: ChannelMatrix) -> SensingProblem {
        let k = comm.inputs();
        let sense = ChannelMatrix::new("w", vec![vec![0.5, 0.5]; k]).unwrap();
        SensingProblem::new(comm, sense.clone(), sense, vec![0.0; k], 0.0).unwrap()
    }

    #[test]
    fn noiseless_channel_never_errs() {
        let p = problem(ChannelMatrix::identity(2).unwrap());
        let d = Distribution::uniform(2);
        let rate = 0.5 * 2f64.ln();
        let e = simulate_communication(&p, &d, 20, rate, 50, 3).unwrap();
        assert_eq!(e, 0.0);
        let e = simulate_communication_with(&p, &d, 20, rate, 50, 3, CommMethod::Conditional).unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn single_message_is_always_decoded() {
        let p = problem(ChannelMatrix::bsc(0.4).unwrap());
        let d = Distribution::uniform(2);
        for method in [CommMethod::BruteForce, CommMethod::Conditional] {
            assert_eq!(simulate_communication_with(&p, &d, 10, 0.0, 50, 1, method).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_rates_above_mutual_information() {
        let p = problem(ChannelMatrix::bsc(0.11).unwrap());
        let d = Distribution::uniform(2);
        assert!(matches!(
            simulate_communication(&p, &d, 10, 0.5, 10, 0),
            Err(Error::RateAboveMutualInformation { .. })
        ));
    }

    #[test]
    fn brute_force_refuses_large_codebooks() {
        let p = problem(ChannelMatrix::bsc(0.11).unwrap());
        let d = Distribution::uniform(2);
        assert!(matches!(
            simulate_communication_with(&p, &d, 60, 0.3, 1, 0, CommMethod::BruteForce),
            Err(Error::CodebookOverflow { .. })
        ));
    }

    #[test]
    fn methods_agree_on_small_codebooks() {
        let p = problem(ChannelMatrix::bsc(0.15).unwrap());
        let d = Distribution::uniform(2);
        let (n, rate, trials) = (16, 0.2, 3000);
        let brute = simulate_communication_with(&p, &d, n, rate, trials, 11, CommMethod::BruteForce).unwrap();
        let cond = simulate_communication_with(&p, &d, n, rate, trials, 11, CommMethod::Conditional).unwrap();
        // Brute force is a Bernoulli average; allow five standard errors.
        let se = (cond * (1.0 - cond) / trials as f64).sqrt();
        assert!((brute - cond).abs() <= 5.0 * se + 1e-3, "{brute} vs {cond}");
    }

    #[test]
    fn profiles_cover_the_hypergeometric_law() {
        let class = [3usize, 4, 2];
        let mut count = 0;
        let mut profile = vec![0; 3];
        enumerate_profiles(&class, 4, 0, &mut profile, &mut |p| {
            assert_eq!(p.iter().sum::<usize>(), 4);
            count += 1;
        });
        // Coefficient of t^4 in (1+t+..+t^3)(1+..+t^4)(1+t+t^2).
        assert_eq!(count, 11);
    }
}
