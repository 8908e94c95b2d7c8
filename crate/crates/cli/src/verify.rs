//! Closed-form checks for the two binary examples.

use std::fmt::Write as _;

use jcsd_core::presets::{
    binary_convolution, binary_divergence, binary_entropy, example_one as ex1, example_two as ex2,
};
use jcsd_core::{
    chernoff_info, conditional_divergence, mutual_information, region_sweep, Criterion,
    Distribution, Result,
};

use crate::ExampleParams;

pub const TOLERANCE: f64 = 1e-6;
const RHO_STEPS: usize = 100;

fn rho_grid() -> impl Iterator<Item = f64> {
    (0..=RHO_STEPS).map(|i| i as f64 / RHO_STEPS as f64)
}

/// `H(ρ ∗ p) - H(p)`, the BSC(p) mutual information at `P(X=1) = ρ`.
fn bsc_rate(rho: f64, p: f64) -> f64 {
    binary_entropy(binary_convolution(rho, p)) - binary_entropy(p)
}

#[derive(Default)]
struct Report {
    text: String,
    worst: f64,
}

impl Report {
    fn check(&mut self, name: &str, deviation: f64) {
        let _ = writeln!(self.text, "check={name} max_deviation={deviation:.3e}");
        self.worst = self.worst.max(deviation);
    }

    fn finish(mut self) -> (String, bool) {
        let pass = self.worst <= TOLERANCE;
        let _ = writeln!(
            self.text,
            "result={} max_deviation={:.3e} tolerance={TOLERANCE:e}",
            if pass { "PASS" } else { "FAIL" },
            self.worst
        );
        (self.text, pass)
    }
}

fn max_dev(mut values: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    values.try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

/// Example 1: `C = ρ d(0.5‖q)`, `D = ρ d(q‖1-q)`, and the boundary
/// `R(E) = H(max(E/k, min(1/2, B)) ∗ p) - H(p)` with `k` the per-letter
/// exponent of the informative input.
pub(crate) fn example_one(params: ExampleParams) -> Result<(String, bool)> {
    let ExampleParams { p, q, budget, grid } = params;
    let problem = ex1(p, q, budget)?;
    let k_chernoff = binary_divergence(0.5, q);
    let k_stein = binary_divergence(q, 1.0 - q);
    let mut report = Report::default();
    let _ = writeln!(report.text, "example=1 p={p} q={q} B={budget}");

    report.check(
        "chernoff",
        max_dev(rho_grid().map(|rho| {
            let c = chernoff_info(&problem, &Distribution::binary(rho)?)?;
            Ok((c.value - rho * k_chernoff).abs())
        }))?,
    );
    report.check(
        "chernoff_s0",
        max_dev(rho_grid().map(|rho| Ok((chernoff_info(&problem, &Distribution::binary(rho)?)?.s0 - 0.5).abs())))?,
    );
    report.check(
        "stein",
        max_dev(rho_grid().map(|rho| {
            let d = conditional_divergence(&problem, &Distribution::binary(rho)?)?;
            Ok((d - rho * k_stein).abs())
        }))?,
    );
    report.check(
        "mutual_information",
        max_dev(rho_grid().map(|rho| {
            let i = mutual_information(problem.comm(), &Distribution::binary(rho)?)?;
            Ok((i - bsc_rate(rho, p)).abs())
        }))?,
    );

    let rho_max = budget.min(1.0);
    for (name, criterion, k) in [
        ("region_max_error", Criterion::MaxError, k_chernoff),
        ("region_neyman_pearson", Criterion::NeymanPearson, k_stein),
    ] {
        let points = region_sweep(&problem, criterion, grid)?;
        let last = points.last().map_or(0.0, |pt| pt.exponent);
        let mut dev = (last - rho_max * k).abs();
        for pt in &points {
            let rho = (pt.exponent / k).max(budget.min(0.5)).min(rho_max);
            dev = dev.max((pt.rate - bsc_rate(rho, p)).abs());
        }
        report.check(name, dev);
    }
    Ok(report.finish())
}

/// Per-letter Chernoff information of BSC(p) against BSC(q) by a dense
/// `s` grid, independent of the library's minimizer.
fn bsc_chernoff_by_grid(p: f64, q: f64) -> f64 {
    const STEPS: usize = 200_000;
    (0..=STEPS)
        .map(|i| {
            let s = i as f64 / STEPS as f64;
            let m = p.powf(1.0 - s) * q.powf(s) + (1.0 - p).powf(1.0 - s) * (1.0 - q).powf(s);
            -m.ln()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Example 2: every input letter is equally informative, so `C` and `D` do
/// not depend on the input and the region is a rectangle whose rate side is
/// the capacity-cost value `H(min(1/2, B) ∗ p) - H(p)`.
pub(crate) fn example_two(params: ExampleParams) -> Result<(String, bool)> {
    let ExampleParams { p, q, budget, grid } = params;
    let problem = ex2(p, q, budget)?;
    let c_star = bsc_chernoff_by_grid(p, q);
    let d_star = binary_divergence(p, q);
    let capacity = bsc_rate(budget.min(0.5), p);
    let mut report = Report::default();
    let _ = writeln!(report.text, "example=2 p={p} q={q} B={budget}");
    let _ = writeln!(report.text, "chernoff={c_star:?} divergence={d_star:?} capacity_cost={capacity:?}");

    report.check(
        "chernoff",
        max_dev(rho_grid().map(|rho| Ok((chernoff_info(&problem, &Distribution::binary(rho)?)?.value - c_star).abs())))?,
    );
    report.check(
        "stein",
        max_dev(rho_grid().map(|rho| Ok((conditional_divergence(&problem, &Distribution::binary(rho)?)? - d_star).abs())))?,
    );
    for (name, criterion, e_star) in [
        ("region_max_error", Criterion::MaxError, c_star),
        ("region_neyman_pearson", Criterion::NeymanPearson, d_star),
    ] {
        let points = region_sweep(&problem, criterion, grid)?;
        let last = points.last().map_or(0.0, |pt| pt.exponent);
        let dev = points
            .iter()
            .map(|pt| (pt.rate - capacity).abs())
            .fold((last - e_star).abs(), f64::max);
        report.check(name, dev);
    }
    Ok(report.finish())
}
