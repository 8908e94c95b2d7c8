//! Small numerical helpers shared by the solvers.

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ exp(x_i)`, factoring out the largest term.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `-x log x` with the `0 log 0 = 0` convention.
pub fn neg_xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`, stopping once the bracket is narrower than `width`.
pub fn golden_section_min<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Table of `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Log-pmf of `Binomial(k, p)` at every outcome `0..=k`.
pub fn binomial_log_pmf(k: usize, p: f64, ln_fact: &[f64]) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=k)
        .map(|j| {
            let mut v = ln_fact[k] - ln_fact[j] - ln_fact[k - j];
            if j > 0 {
                v += j as f64 * lp;
            }
            if j < k {
                v += (k - j) as f64 * lq;
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_matches_direct() {
        let v = log_add(0.3f64.ln(), 0.2f64.ln());
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 1.5), 1.5);
    }

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let s = golden_section_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((s - 0.3).abs() < 1e-8);
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let lf = ln_factorials(40);
        let pmf = binomial_log_pmf(40, 0.27, &lf);
        let total: f64 = pmf.iter().map(|l| l.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Degenerate probabilities must not produce NaN.
        let pmf = binomial_log_pmf(5, 0.0, &lf);
        assert_eq!(pmf[0], 0.0);
        assert_eq!(pmf[1], f64::NEG_INFINITY);
    }
}
