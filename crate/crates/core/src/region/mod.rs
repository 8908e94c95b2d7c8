//! Rate-exponent regions.
//!
//! The boundary at exponent `E` is `max I(P, P_{Z|X})` over input
//! distributions with `E_P[b] ≤ B` and criterion exponent at least `E`. For
//! the Neyman-Pearson criterion the exponent `D(W‖V|P)` is linear in `P`, so
//! the feasible set is a polytope. For the maximum-error criterion `C(W‖V|P)`
//! is convex in `P` and `{C ≥ E}` is not convex; it is however the union over
//! `s ∈ [0,1]` of the half-spaces `{-⟨P, g_s⟩ ≥ E}`. Each member of the union
//! is a polytope, solved exactly like the Neyman-Pearson case, and `s` is
//! scanned on a grid with local refinement.

mod frank_wolfe;
mod polytope;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{ChannelMatrix, Distribution, SensingProblem};
use crate::error::{Error, Result};
use crate::exponent::{chernoff_info, conditional_divergence, letter_divergence, letter_log_mgf};
use crate::numeric::neg_xlogx;

use frank_wolfe::maximize_mutual_information;
use polytope::{extreme_points, HalfSpace};

/// Number of `s` values in the uniform grid for the maximum-error criterion.
pub const S_GRID: usize = 512;
/// Iteration cap for Frank-Wolfe.
pub const MAX_ITERATIONS: usize = 2000;
/// Frank-Wolfe stops once the duality gap drops below this.
pub const GAP_TOLERANCE: f64 = 1e-9;
/// A solve whose final gap is above this is reported as non-convergent.
pub const GAP_FAILURE: f64 = 1e-6;
/// Exponent constraints are imposed as `exponent ≥ E - CONSTRAINT_SLACK`.
const CONSTRAINT_SLACK: f64 = 1e-10;
/// Slack accepted when a requested exponent exceeds the best one.
const TARGET_SLACK: f64 = 1e-12;
const REFINE_ROUNDS: usize = 3;
const REFINE_POINTS: i32 = 8;

/// Discrimination error criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Worst of the two error probabilities; exponent `C(W‖V|P)`.
    MaxError,
    /// Type II error with type I held below a fixed level; exponent `D(W‖V|P)`.
    NeymanPearson,
}

impl Criterion {
    /// The criterion's exponent for input distribution `dist`.
    pub fn exponent(self, problem: &SensingProblem, dist: &Distribution) -> Result<f64> {
        match self {
            Criterion::MaxError => Ok(chernoff_info(problem, dist)?.value),
            Criterion::NeymanPearson => conditional_divergence(problem, dist),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::MaxError => "max-error",
            Criterion::NeymanPearson => "neyman-pearson",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-error" | "chernoff" => Ok(Criterion::MaxError),
            "neyman-pearson" | "stein" => Ok(Criterion::NeymanPearson),
            other => Err(Error::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

/// A point on a rate-exponent boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    /// Exponent in nats.
    pub exponent: f64,
    /// Rate in nats per channel use.
    pub rate: f64,
    /// Input distribution achieving `rate` at `exponent`.
    pub argmax: Distribution,
    /// Frank-Wolfe duality gap of the solve that produced `rate`.
    pub gap: f64,
}

fn mutual_information_probs(channel: &ChannelMatrix, probs: &[f64]) -> f64 {
    let mut q = vec![0.0; channel.outputs()];
    let mut conditional = 0.0;
    for (x, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            let row = channel.row(x);
            for (qz, &w) in q.iter_mut().zip(row) {
                *qz += p * w;
            }
            conditional += p * row.iter().map(|&w| neg_xlogx(w)).sum::<f64>();
        }
    }
    let output: f64 = q.iter().map(|&v| neg_xlogx(v)).sum();
    (output - conditional).max(0.0)
}

/// `I(P, channel)` in nats.
pub fn mutual_information(channel: &ChannelMatrix, dist: &Distribution) -> Result<f64> {
    if dist.len() != channel.inputs() {
        return Err(Error::DimensionMismatch {
            expected: channel.inputs(),
            found: dist.len(),
        });
    }
    Ok(mutual_information_probs(channel, dist.probs()))
}

fn cost_constraint(problem: &SensingProblem) -> HalfSpace {
    HalfSpace::new(problem.cost().to_vec(), problem.budget())
}

/// Largest criterion exponent under the cost constraint.
///
/// Both objectives are convex in `P` (the divergence is linear), so the
/// maximum over the cost polytope is attained at one of its extreme points,
/// which are enumerated directly.
pub fn best_exponent(problem: &SensingProblem, criterion: Criterion) -> Result<(f64, Distribution)> {
    let vertices = extreme_points(problem.input_size(), &[cost_constraint(problem)]);
    let mut best: Option<(f64, Distribution)> = None;
    for v in vertices {
        let dist = Distribution::from_solver(v);
        let value = criterion.exponent(problem, &dist)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, dist));
        }
    }
    best.ok_or(Error::InfeasibleBudget {
        min_cost: problem.cost().iter().copied().fold(f64::INFINITY, f64::min),
        budget: problem.budget(),
    })
}

fn solve_polytope(channel: &ChannelMatrix, vertices: &[Vec<f64>]) -> Result<RegionPoint> {
    let out = maximize_mutual_information(channel, vertices, MAX_ITERATIONS, GAP_TOLERANCE);
    if out.gap > GAP_FAILURE {
        return Err(Error::NonConvergence {
            gap: out.gap,
            iterations: out.iterations,
        });
    }
    let argmax = Distribution::from_solver(out.point);
    Ok(RegionPoint {
        exponent: 0.0,
        rate: mutual_information_probs(channel, argmax.probs()),
        argmax,
        gap: out.gap,
    })
}

/// Capacity-cost point: the largest rate with no exponent requirement.
pub fn capacity_cost(problem: &SensingProblem) -> Result<RegionPoint> {
    let vertices = extreme_points(problem.input_size(), &[cost_constraint(problem)]);
    if vertices.is_empty() {
        return Err(Error::InfeasibleBudget {
            min_cost: problem.cost().iter().copied().fold(f64::INFINITY, f64::min),
            budget: problem.budget(),
        });
    }
    solve_polytope(problem.comm(), &vertices)
}

/// Maximizes the rate over `{⟨P, b⟩ ≤ B, ⟨P, h⟩ ≥ threshold}`.
fn solve_with_exponent_vector(
    problem: &SensingProblem,
    h: &[f64],
    threshold: f64,
) -> Result<Option<RegionPoint>> {
    let exponent = HalfSpace::new(h.iter().map(|v| -v).collect(), -threshold);
    let vertices = extreme_points(problem.input_size(), &[cost_constraint(problem), exponent]);
    if vertices.is_empty() {
        return Ok(None);
    }
    solve_polytope(problem.comm(), &vertices).map(Some)
}

fn lexicographic(a: &Distribution, b: &Distribution) -> Ordering {
    a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Higher rate wins; near-ties go to the lexicographically smaller input.
fn better(candidate: &RegionPoint, incumbent: &RegionPoint) -> bool {
    let diff = candidate.rate - incumbent.rate;
    if diff.abs() <= 1e-12 {
        lexicographic(&candidate.argmax, &incumbent.argmax) == Ordering::Less
    } else {
        diff > 0.0
    }
}

/// Quantities shared by every point of a sweep.
struct Anchors {
    best: f64,
    best_argmax: Distribution,
    capacity: RegionPoint,
}

impl Anchors {
    fn new(problem: &SensingProblem, criterion: Criterion) -> Result<Self> {
        let (best, best_argmax) = best_exponent(problem, criterion)?;
        Ok(Self {
            best,
            best_argmax,
            capacity: capacity_cost(problem)?,
        })
    }
}

fn max_error_rate(
    problem: &SensingProblem,
    threshold: f64,
    anchors: &Anchors,
) -> Result<Option<(f64, RegionPoint)>> {
    let solve_at = |s: f64| -> Result<Option<(f64, RegionPoint)>> {
        let h: Vec<f64> = letter_log_mgf(problem, s).iter().map(|g| -g).collect();
        Ok(solve_with_exponent_vector(problem, &h, threshold)?.map(|p| (s, p)))
    };
    let mut candidates: Vec<f64> = (0..S_GRID).map(|i| i as f64 / (S_GRID - 1) as f64).collect();
    candidates.push(chernoff_info(problem, &anchors.capacity.argmax)?.s0);
    candidates.push(chernoff_info(problem, &anchors.best_argmax)?.s0);

    let mut best: Option<(f64, RegionPoint)> = None;
    let consider = |best: &mut Option<(f64, RegionPoint)>, found: Option<(f64, RegionPoint)>| {
        if let Some((s, point)) = found {
            if best.as_ref().is_none_or(|(_, b)| better(&point, b)) {
                *best = Some((s, point));
            }
        }
    };
    for s in candidates {
        consider(&mut best, solve_at(s)?);
    }
    let mut step = 1.0 / (S_GRID - 1) as f64;
    for _ in 0..REFINE_ROUNDS {
        let Some((center, _)) = best.as_ref().map(|(s, p)| (*s, p.rate)) else {
            break;
        };
        for k in -REFINE_POINTS..=REFINE_POINTS {
            if k == 0 {
                continue;
            }
            let s = center + step * k as f64 / REFINE_POINTS as f64;
            if (0.0..=1.0).contains(&s) {
                consider(&mut best, solve_at(s)?);
            }
        }
        step /= REFINE_POINTS as f64;
    }
    Ok(best)
}

fn rate_with_anchors(
    problem: &SensingProblem,
    e_target: f64,
    criterion: Criterion,
    anchors: &Anchors,
) -> Result<RegionPoint> {
    if !e_target.is_finite() || e_target < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target exponent {e_target} must be a non-negative real"
        )));
    }
    if e_target > anchors.best + TARGET_SLACK {
        return Err(Error::ExponentAboveBest {
            requested: e_target,
            best: anchors.best,
            gap: e_target - anchors.best,
        });
    }
    let threshold = e_target - CONSTRAINT_SLACK;
    let capacity = &anchors.capacity;
    if criterion.exponent(problem, &capacity.argmax)? >= threshold {
        return Ok(RegionPoint {
            exponent: e_target,
            ..capacity.clone()
        });
    }
    let found = match criterion {
        Criterion::NeymanPearson => {
            solve_with_exponent_vector(problem, &letter_divergence(problem), threshold)?
        }
        Criterion::MaxError => max_error_rate(problem, threshold, anchors)?.map(|(_, p)| p),
    };
    // The best-exponent input is always feasible; fall back to it if the
    // discretized search found nothing.
    let mut point = found.unwrap_or_else(|| RegionPoint {
        exponent: e_target,
        rate: mutual_information_probs(problem.comm(), anchors.best_argmax.probs()),
        argmax: anchors.best_argmax.clone(),
        gap: 0.0,
    });
    point.exponent = e_target;
    Ok(point)
}

/// Largest rate compatible with exponent `e_target` under `criterion`.
pub fn rate_for_exponent(
    problem: &SensingProblem,
    e_target: f64,
    criterion: Criterion,
) -> Result<RegionPoint> {
    rate_with_anchors(problem, e_target, criterion, &Anchors::new(problem, criterion)?)
}

/// Boundary points on a uniform exponent grid over `[0, E*]`, both ends
/// included. Rates come out non-increasing in the exponent.
pub fn region_sweep(
    problem: &SensingProblem,
    criterion: Criterion,
    grid_size: usize,
) -> Result<Vec<RegionPoint>> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    let anchors = Anchors::new(problem, criterion)?;
    let last = grid_size - 1;
    let mut points = (0..grid_size)
        .into_par_iter()
        .map(|k| {
            let e = if k == last {
                anchors.best
            } else {
                anchors.best * k as f64 / last as f64
            };
            rate_with_anchors(problem, e, criterion, &anchors)
        })
        .collect::<Result<Vec<_>>>()?;
    // A point feasible at a larger exponent is feasible at every smaller one.
    for k in (0..last).rev() {
        if points[k + 1].rate > points[k].rate {
            let exponent = points[k].exponent;
            points[k] = RegionPoint {
                exponent,
                ..points[k + 1].clone()
            };
        }
    }
    Ok(points)
}
