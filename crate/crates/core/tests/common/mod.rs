//! Shared generators and oracles for integration tests.
#![allow(dead_code)]

use jcsd_core::{
    chernoff_info, conditional_divergence, mutual_information, ChannelMatrix, Criterion,
    Distribution, SensingProblem,
};
use rand::Rng;

pub fn random_row<R: Rng>(rng: &mut R, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| floor + rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn random_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize, floor: f64) -> ChannelMatrix {
    let rows = (0..inputs).map(|_| random_row(rng, outputs, floor)).collect();
    ChannelMatrix::new("random", rows).unwrap()
}

pub fn random_distribution<R: Rng>(rng: &mut R, len: usize) -> Distribution {
    Distribution::normalized(random_row(rng, len, 0.0)).unwrap()
}

/// Random problem with strictly positive sensing channels and a feasible
/// budget somewhere between the cheapest and the dearest letter.
pub fn random_problem<R: Rng>(rng: &mut R, inputs: usize) -> SensingProblem {
    let y = rng.gen_range(2..=3);
    random_problem_with_outputs(rng, inputs, y)
}

pub fn random_problem_with_outputs<R: Rng>(rng: &mut R, inputs: usize, y: usize) -> SensingProblem {
    let z = rng.gen_range(2..=3);
    let cost: Vec<f64> = (0..inputs).map(|_| rng.gen_range(0.0..2.0)).collect();
    let lo = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cost.iter().copied().fold(0.0, f64::max);
    let budget = lo + rng.gen::<f64>() * (hi - lo) * 1.2;
    SensingProblem::new(
        random_channel(rng, inputs, z, 0.0),
        random_channel(rng, inputs, y, 0.05),
        random_channel(rng, inputs, y, 0.05),
        cost,
        budget,
    )
    .unwrap()
}

/// Exhaustive oracle for binary-input problems: the input is `(1 - ρ, ρ)`,
/// scanned on a grid of step `step` plus every point where a constraint
/// switches on or off (located by bisection between grid neighbours).
pub struct RhoOracle {
    points: Vec<(f64, f64, f64)>,
}

impl RhoOracle {
    pub fn new(problem: &SensingProblem, criterion: Criterion, step: f64) -> Self {
        let steps = (1.0 / step).round() as usize;
        let eval = |rho: f64| {
            let d = Distribution::binary(rho).unwrap();
            let e = match criterion {
                Criterion::MaxError => chernoff_info(problem, &d).unwrap().value,
                Criterion::NeymanPearson => conditional_divergence(problem, &d).unwrap(),
            };
            let cost = (1.0 - rho) * problem.cost()[0] + rho * problem.cost()[1];
            (rho, cost, e)
        };
        let mut grid: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        // Budget edge.
        let (c0, c1) = (problem.cost()[0], problem.cost()[1]);
        if c0 != c1 {
            let rho = (problem.budget() - c0) / (c1 - c0);
            if (0.0..=1.0).contains(&rho) {
                grid.push(rho);
            }
        }
        grid.sort_by(f64::total_cmp);
        let points = grid.into_iter().map(eval).collect();
        Self { points }
    }

    /// Largest `I` over grid inputs with cost ≤ B and exponent ≥ `e`, also
    /// considering the exact crossing of the exponent constraint.
    pub fn rate(&self, problem: &SensingProblem, criterion: Criterion, e: f64) -> Option<f64> {
        let budget = problem.budget() + 1e-12;
        let feasible = |&(_, cost, ex): &(f64, f64, f64)| cost <= budget && ex >= e - 1e-9;
        let mut candidates: Vec<f64> = self
            .points
            .iter()
            .filter(|p| feasible(p))
            .map(|p| p.0)
            .collect();
        let exponent_at = |rho: f64| {
            let d = Distribution::binary(rho).unwrap();
            match criterion {
                Criterion::MaxError => chernoff_info(problem, &d).unwrap().value,
                Criterion::NeymanPearson => conditional_divergence(problem, &d).unwrap(),
            }
        };
        for pair in self.points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if (a.2 >= e) != (b.2 >= e) {
                let (mut lo, mut hi) = (a.0, b.0);
                let lo_ok = a.2 >= e;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (exponent_at(mid) >= e) == lo_ok {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let rho = if lo_ok { lo } else { hi };
                let cost = (1.0 - rho) * problem.cost()[0] + rho * problem.cost()[1];
                if cost <= budget {
                    candidates.push(rho);
                }
            }
        }
        candidates
            .into_iter()
            .map(|rho| mutual_information(problem.comm(), &Distribution::binary(rho).unwrap()).unwrap())
            .fold(None, |best: Option<f64>, v| Some(best.map_or(v, |b| b.max(v))))
    }
}
