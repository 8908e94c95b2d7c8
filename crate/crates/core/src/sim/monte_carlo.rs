use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use super::exact::{calibrate_np_threshold, McCalibration};
use super::rng::{stream, Purpose};
use super::{decides_null, ErrorPair, TestSpec};
use crate::channel::{empirical_type, ChannelMatrix, SensingProblem};
use crate::error::{Error, Result};
use crate::exponent::{chernoff_info, conditional_divergence, finite_n_bounds, FiniteNBounds};

const Z95: f64 = 1.96;

/// Inverse-CDF sampler for channel rows.
pub(crate) struct RowSampler {
    cdf: Vec<Vec<f64>>,
}

impl RowSampler {
    pub fn new(channel: &ChannelMatrix) -> Self {
        let cdf = channel
            .rows()
            .map(|row| {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = row
                    .iter()
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect();
                // Pin the last reachable output at 1 so rounding never
                // leaves `u` uncovered.
                if let Some(last) = row.iter().rposition(|&p| p > 0.0) {
                    cdf[last..].iter_mut().for_each(|c| *c = 1.0);
                }
                cdf
            })
            .collect();
        Self { cdf }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R, x: usize) -> usize {
        let u: f64 = rng.gen();
        let cdf = &self.cdf[x];
        cdf.iter().position(|&c| c > u).unwrap_or(cdf.len() - 1)
    }
}

/// Draws sequence LLRs `log W/V` under either hypothesis.
pub(crate) struct LlrSampler {
    w: RowSampler,
    v: RowSampler,
    llr: Vec<Vec<f64>>,
}

impl LlrSampler {
    pub fn new(problem: &SensingProblem) -> Self {
        let llr = problem
            .w()
            .rows()
            .zip(problem.v().rows())
            .map(|(w, v)| w.iter().zip(v).map(|(a, b)| a.ln() - b.ln()).collect())
            .collect();
        Self {
            w: RowSampler::new(problem.w()),
            v: RowSampler::new(problem.v()),
            llr,
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R, codeword: &[usize], theta: u8) -> f64 {
        let rows = if theta == 0 { &self.w } else { &self.v };
        codeword
            .iter()
            .map(|&x| self.llr[x][rows.draw(rng, x)])
            .sum()
    }
}

/// Half-width of the Wilson score interval for `successes` out of `trials`.
pub fn wilson_half_width(successes: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Outcome of a Monte-Carlo discrimination run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// LRT threshold actually applied (nats).
    pub threshold: f64,
    pub errors: ErrorPair,
    /// Wilson 95% half-widths for `eps0` and `eps1`.
    pub ci95: [f64; 2],
    pub bounds: FiniteNBounds,
    /// `-log(max error)/n`, or `-log(eps1)/n` for Neyman-Pearson tests.
    pub empirical_exponent: f64,
    /// Chernoff information of the codeword type, or its conditional
    /// divergence for Neyman-Pearson tests.
    pub theory_exponent: f64,
}

impl SimReport {
    pub const CSV_HEADER: &'static str =
        "n,trials,seed,eps0,eps1,ci0,ci1,upper_bound,lower_floor,emp_exponent,theory_exponent";

    fn fields(&self) -> [(&'static str, String); 11] {
        [
            ("n", self.n.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("eps0", format!("{:?}", self.errors.eps0)),
            ("eps1", format!("{:?}", self.errors.eps1)),
            ("ci0", format!("{:?}", self.ci95[0])),
            ("ci1", format!("{:?}", self.ci95[1])),
            ("upper_bound", format!("{:?}", self.bounds.upper)),
            ("lower_floor", format!("{:?}", self.bounds.lower_floor)),
            ("emp_exponent", format!("{:?}", self.empirical_exponent)),
            ("theory_exponent", format!("{:?}", self.theory_exponent)),
        ]
    }

    /// One `key=value` line per field, followed by the threshold.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "threshold={:?}", self.threshold);
        out
    }

    /// A CSV row matching [`SimReport::CSV_HEADER`], without newline.
    pub fn to_csv_row(&self) -> String {
        self.fields().map(|(_, v)| v).join(",")
    }
}

fn count_errors(
    sampler: &LlrSampler,
    codeword: &[usize],
    theta: u8,
    tau: f64,
    trials: u64,
    seed: u64,
) -> u64 {
    (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let llr = sampler.draw(&mut stream(seed, Purpose::Discrimination(theta), t), codeword, theta);
            decides_null(llr, tau) != (theta == 0)
        })
        .count() as u64
}

/// Monte-Carlo estimate of both error probabilities of `test` for a fixed
/// codeword. Each `(θ, trial)` pair uses its own random stream, so the
/// report is identical for serial and parallel execution.
pub fn simulate_discrimination(
    problem: &SensingProblem,
    codeword: &[usize],
    test: TestSpec,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let ty = empirical_type(codeword, problem.input_size())?;
    let n = codeword.len();
    let tau = match test {
        TestSpec::Map => 0.0,
        TestSpec::Lrt { tau } => tau,
        TestSpec::NeymanPearson { alpha } => {
            let mc = McCalibration { trials, seed };
            match calibrate_np_threshold(problem, &ty, n, alpha, &mc)? {
                TestSpec::Lrt { tau } => tau,
                _ => unreachable!("calibration yields an explicit threshold"),
            }
        }
    };

    let sampler = LlrSampler::new(problem);
    let k0 = count_errors(&sampler, codeword, 0, tau, trials, seed);
    let k1 = count_errors(&sampler, codeword, 1, tau, trials, seed);
    let t = trials as f64;
    let errors = ErrorPair::from_probabilities(k0 as f64 / t, k1 as f64 / t);

    let neyman_pearson = matches!(test, TestSpec::NeymanPearson { .. });
    let (empirical_exponent, theory_exponent) = if neyman_pearson {
        (-errors.log_eps1 / n as f64, conditional_divergence(problem, &ty)?)
    } else {
        (-errors.log_max() / n as f64, chernoff_info(problem, &ty)?.value)
    };

    Ok(SimReport {
        n,
        trials,
        seed,
        threshold: tau,
        errors,
        ci95: [
            wilson_half_width(k0, trials, Z95),
            wilson_half_width(k1, trials, Z95),
        ],
        bounds: finite_n_bounds(problem, &ty, n)?,
        empirical_exponent,
        theory_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::example_one;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at z = 1.96: interval (0.05523, 0.17437).
        let h = wilson_half_width(10, 100, 1.96);
        assert!((h - 0.059_571).abs() < 1e-5, "{h}");
        assert!(wilson_half_width(0, 50, 1.96) > 0.0);
    }

    #[test]
    fn identical_hypotheses_give_exact_tie_outcome() {
        let bsc = ChannelMatrix::bsc(0.3).unwrap();
        let p = SensingProblem::new(bsc.clone(), bsc.clone(), bsc, vec![0.0, 0.0], 0.0).unwrap();
        let r = simulate_discrimination(&p, &[0, 1, 1, 0], TestSpec::Map, 500, 1).unwrap();
        assert_eq!((r.errors.eps0, r.errors.eps1), (0.0, 1.0));
    }

    #[test]
    fn reports_are_reproducible() {
        let p = example_one(0.11, 0.25, 1.0).unwrap();
        let cw = vec![1; 12];
        let a = simulate_discrimination(&p, &cw, TestSpec::Map, 3000, 42).unwrap();
        let b = simulate_discrimination(&p, &cw, TestSpec::Map, 3000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_key_value(), b.to_key_value());
        let c = simulate_discrimination(&p, &cw, TestSpec::Map, 3000, 43).unwrap();
        assert_ne!(a.errors, c.errors);
    }

    #[test]
    fn rejects_bad_input() {
        let p = example_one(0.11, 0.25, 1.0).unwrap();
        assert!(simulate_discrimination(&p, &[1, 1], TestSpec::Map, 0, 0).is_err());
        assert!(matches!(
            simulate_discrimination(&p, &[1, 2], TestSpec::Map, 10, 0),
            Err(Error::SymbolOutOfRange { symbol: 2, position: 1, .. })
        ));
        assert!(matches!(
            simulate_discrimination(&p, &[], TestSpec::Map, 10, 0),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn csv_row_matches_header() {
        let p = example_one(0.11, 0.25, 1.0).unwrap();
        let r = simulate_discrimination(&p, &[0, 1, 1], TestSpec::Map, 100, 5).unwrap();
        let cols = SimReport::CSV_HEADER.split(',').count();
        assert_eq!(r.to_csv_row().split(',').count(), cols);
        assert!(r.to_key_value().starts_with("n=3\ntrials=100\nseed=5\n"));
    }
}
