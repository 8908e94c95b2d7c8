//! Exact error probabilities for binary sensing outputs.
//!
//! With `|Y| = 2` the log-likelihood ratio contributed by the `k` positions
//! carrying letter `x` is determined by how many of them read `1`, which is
//! binomial under either hypothesis. The sequence LLR is therefore a sum of
//! independent per-letter binomial contributions and its law can be built by
//! convolution. Probabilities are carried in the log domain because
//! Neyman-Pearson type II errors at large `n` are far below `f64::MIN_POSITIVE`.

use rayon::prelude::*;

use super::monte_carlo::LlrSampler;
use super::rng::{stream, Purpose};
use super::{check_alpha, decides_null, ErrorPair, TestSpec, TIE_TOLERANCE};
use crate::channel::{Distribution, SensingProblem};
use crate::error::{Error, Result};
use crate::numeric::{binomial_log_pmf, ln_factorials, log_add};

/// Upper limit on the number of distinct LLR values tracked.
const MAX_ATOMS: usize = 20_000_000;

/// One point of the LLR law: its value and its log-probability under each
/// hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlrAtom {
    pub llr: f64,
    pub log_p0: f64,
    pub log_p1: f64,
}

/// Monte-Carlo settings for threshold calibration when `|Y| > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McCalibration {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McCalibration {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
        }
    }
}

struct Letter {
    count: usize,
    /// LLR of an observed `0` / `1`.
    llr0: f64,
    llr1: f64,
    log_pmf_w: Vec<f64>,
    log_pmf_v: Vec<f64>,
}

impl Letter {
    fn llr(&self, ones: usize) -> f64 {
        (self.count - ones) as f64 * self.llr0 + ones as f64 * self.llr1
    }
}

fn letters(problem: &SensingProblem, dist: &Distribution, n: usize) -> Result<Vec<Letter>> {
    let outputs = problem.sensing_output_size();
    if outputs != 2 {
        return Err(Error::NonBinaryOutput(outputs));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be positive".into()));
    }
    problem.check_input_len(dist.len())?;
    let counts = dist.counts(n)?;
    let ln_fact = ln_factorials(n);
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(x, &k)| {
            let (w, v) = (problem.w().row(x), problem.v().row(x));
            Letter {
                count: k,
                llr0: w[0].ln() - v[0].ln(),
                llr1: w[1].ln() - v[1].ln(),
                log_pmf_w: binomial_log_pmf(k, w[1], &ln_fact),
                log_pmf_v: binomial_log_pmf(k, v[1], &ln_fact),
            }
        })
        .collect())
}

fn same_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * (1.0 + b.abs())
}

/// Sorts atoms and merges values that only differ by rounding.
fn merge(mut atoms: Vec<LlrAtom>) -> Vec<LlrAtom> {
    atoms.sort_by(|a, b| a.llr.total_cmp(&b.llr));
    let mut out: Vec<LlrAtom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if same_value(a.llr, last.llr) => {
                last.log_p0 = log_add(last.log_p0, a.log_p0);
                last.log_p1 = log_add(last.log_p1, a.log_p1);
            }
            _ => out.push(a),
        }
    }
    out
}

fn convolve<'a>(letters: impl IntoIterator<Item = &'a Letter>) -> Result<Vec<LlrAtom>> {
    let mut atoms = vec![LlrAtom {
        llr: 0.0,
        log_p0: 0.0,
        log_p1: 0.0,
    }];
    for letter in letters {
        let size = atoms.len().saturating_mul(letter.count + 1);
        if size > MAX_ATOMS {
            return Err(Error::SupportTooLarge { atoms: size });
        }
        let mut next = Vec::with_capacity(size);
        for a in &atoms {
            for ones in 0..=letter.count {
                next.push(LlrAtom {
                    llr: a.llr + letter.llr(ones),
                    log_p0: a.log_p0 + letter.log_pmf_w[ones],
                    log_p1: a.log_p1 + letter.log_pmf_v[ones],
                });
            }
        }
        atoms = merge(next);
    }
    Ok(atoms)
}

/// Law of the sequence LLR `log W^n(Y^n|x^n)/V^n(Y^n|x^n)` for any codeword of
/// type `dist` (denominator `n`), sorted by value.
pub fn llr_distribution(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
) -> Result<Vec<LlrAtom>> {
    convolve(&letters(problem, dist, n)?)
}

fn prefix_logs(pmf: &[f64]) -> Vec<f64> {
    pmf.iter()
        .scan(f64::NEG_INFINITY, |acc, &p| {
            *acc = log_add(*acc, p);
            Some(*acc)
        })
        .collect()
}

fn suffix_logs(pmf: &[f64]) -> Vec<f64> {
    let mut out = prefix_logs(&pmf.iter().rev().copied().collect::<Vec<_>>());
    out.reverse();
    out
}

/// Log-probability of `ones ∈ [lo, hi)` from prefix/suffix tables.
fn range_log(prefix: &[f64], suffix: &[f64], lo: usize, hi: usize) -> f64 {
    let k = prefix.len();
    if lo >= hi {
        f64::NEG_INFINITY
    } else if lo == 0 {
        prefix[hi - 1]
    } else {
        debug_assert_eq!(hi, k);
        suffix[lo]
    }
}

/// Exact `(ε0, ε1)` of a deterministic test for a codeword of type `dist`.
///
/// All letters but the most frequent one are convolved into a discrete law;
/// for each of its atoms the decision region of the remaining letter is a
/// prefix or suffix of its binomial outcomes, read off cumulative tables.
pub fn exact_binary_errors(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    test: TestSpec,
) -> Result<ErrorPair> {
    let tau = match test {
        TestSpec::Map => 0.0,
        TestSpec::Lrt { tau } => tau,
        TestSpec::NeymanPearson { alpha } => {
            match calibrate_np_threshold(problem, dist, n, alpha, &McCalibration::default())? {
                TestSpec::Lrt { tau } => tau,
                _ => unreachable!("calibration yields an explicit threshold"),
            }
        }
    };
    let mut letters = letters(problem, dist, n)?;
    let last_idx = letters
        .iter()
        .enumerate()
        .max_by_key(|(i, l)| (l.count, usize::MAX - i))
        .map(|(i, _)| i)
        .expect("a type of positive length has a letter");
    let last = letters.remove(last_idx);
    let atoms = convolve(&letters)?;

    let k = last.count;
    let (pre_w, suf_w) = (prefix_logs(&last.log_pmf_w), suffix_logs(&last.log_pmf_w));
    let (pre_v, suf_v) = (prefix_logs(&last.log_pmf_v), suffix_logs(&last.log_pmf_v));
    let decreasing = last.llr1 < last.llr0;

    let mut log_eps0 = f64::NEG_INFINITY;
    let mut log_eps1 = f64::NEG_INFINITY;
    for a in &atoms {
        let accept = |ones: usize| decides_null(a.llr + last.llr(ones), tau);
        // Outcomes deciding 0 form [0, cut) when the LLR falls with the
        // number of ones and [cut, k] when it rises.
        let (null_lo, null_hi, alt_lo, alt_hi) = if decreasing {
            let cut = (0..=k).collect::<Vec<_>>().partition_point(|&j| accept(j));
            (0, cut, cut, k + 1)
        } else {
            let cut = (0..=k).collect::<Vec<_>>().partition_point(|&j| !accept(j));
            (cut, k + 1, 0, cut)
        };
        let rejects_w = range_log(&pre_w, &suf_w, alt_lo, alt_hi);
        let accepts_v = range_log(&pre_v, &suf_v, null_lo, null_hi);
        log_eps0 = log_add(log_eps0, a.log_p0 + rejects_w);
        log_eps1 = log_add(log_eps1, a.log_p1 + accepts_v);
    }
    Ok(ErrorPair::from_logs(log_eps0, log_eps1))
}

/// Largest threshold whose deterministic LRT keeps the type I error at or
/// below `alpha`, returned as an explicit [`TestSpec::Lrt`].
///
/// Binary outputs use the exact LLR law. Otherwise the threshold is the
/// matching empirical quantile of LLRs sampled under `W` using `mc`.
pub fn calibrate_np_threshold(
    problem: &SensingProblem,
    dist: &Distribution,
    n: usize,
    alpha: f64,
    mc: &McCalibration,
) -> Result<TestSpec> {
    check_alpha(alpha)?;
    let log_alpha = alpha.ln();
    if problem.sensing_output_size() == 2 {
        let atoms = llr_distribution(problem, dist, n)?;
        // Type I error at threshold `atom.llr` is the mass strictly below it.
        let mut below = f64::NEG_INFINITY;
        let mut tau = atoms[0].llr;
        for a in &atoms {
            if below > log_alpha {
                break;
            }
            tau = a.llr;
            below = log_add(below, a.log_p0);
        }
        return TestSpec::lrt(tau);
    }

    if mc.trials == 0 {
        return Err(Error::InvalidParameter("calibration needs at least one trial".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be positive".into()));
    }
    problem.check_input_len(dist.len())?;
    let counts = dist.counts(n)?;
    let codeword: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(a, &c)| std::iter::repeat_n(a, c))
        .collect();
    let sampler = LlrSampler::new(problem);
    let mut samples: Vec<f64> = (0..mc.trials)
        .into_par_iter()
        .map(|t| sampler.draw(&mut stream(mc.seed, Purpose::Calibration, t), &codeword, 0))
        .collect();
    samples.sort_by(f64::total_cmp);
    let limit = alpha * mc.trials as f64;
    let mut tau = samples[0];
    let mut i = 0;
    while i < samples.len() {
        // `i` samples lie strictly below this group of (near-)equal values.
        if i as f64 > limit {
            break;
        }
        tau = samples[i];
        while i < samples.len() && same_value(samples[i], tau) {
            i += 1;
        }
    }
    TestSpec::lrt(tau)
}
