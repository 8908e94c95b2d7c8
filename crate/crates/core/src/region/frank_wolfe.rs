//! Pairwise Frank-Wolfe for maximizing mutual information over the convex
//! hull of a small, explicitly enumerated vertex set.
//!
//! Each step moves weight from the worst active vertex straight to the best
//! vertex, which copes with nearly coincident vertices. Mutual information
//! depends on `P` only through a linear term and the output law, so it is
//! flat along many directions and pure first-order steps zig-zag; every
//! iteration therefore also takes a Newton step on the weights of the active
//! vertices. Along flat directions that step runs into a face and drops the
//! redundant vertex.
//!
//! The linear subproblem is solved exactly by scanning the vertices. Step
//! lengths come from an exact line search: along a segment the objective is
//! concave with derivative `⟨a, d⟩ - Σ_z Δ_z log Q_z(γ)`, which is bisected.

use crate::channel::ChannelMatrix;
use crate::numeric::neg_xlogx;

/// Floor applied to output probabilities inside the gradient so that
/// directions towards unused outputs stay finite.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
pub(crate) struct FwOutcome {
    pub point: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
}

struct Objective<'a> {
    channel: &'a ChannelMatrix,
    /// `Σ_z W(z|x) log W(z|x)` per input letter.
    neg_entropy: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(channel: &'a ChannelMatrix) -> Self {
        let neg_entropy = channel
            .rows()
            .map(|row| -row.iter().map(|&w| neg_xlogx(w)).sum::<f64>())
            .collect();
        Self {
            channel,
            neg_entropy,
        }
    }

    fn output(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.channel.outputs()];
        for (x, &px) in p.iter().enumerate() {
            if px > 0.0 {
                for (qz, w) in q.iter_mut().zip(self.channel.row(x)) {
                    *qz += px * w;
                }
            }
        }
        q
    }

    #[cfg(test)]
    fn value(&self, p: &[f64]) -> f64 {
        let q = self.output(p);
        let linear: f64 = p.iter().zip(&self.neg_entropy).map(|(a, b)| a * b).sum();
        (linear + q.iter().map(|&v| neg_xlogx(v)).sum::<f64>()).max(0.0)
    }

    /// Gradient up to an additive constant (irrelevant on the simplex).
    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let log_q: Vec<f64> = self
            .output(p)
            .iter()
            .map(|&q| q.max(LOG_FLOOR).ln())
            .collect();
        (0..p.len())
            .map(|x| {
                let cross: f64 = self
                    .channel
                    .row(x)
                    .iter()
                    .zip(&log_q)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, l)| w * l)
                    .sum();
                self.neg_entropy[x] - cross
            })
            .collect()
    }

    /// Maximizer of the objective on `p + γ d`, `γ ∈ [0, max_step]`.
    fn line_search(&self, p: &[f64], d: &[f64], max_step: f64) -> f64 {
        let q0 = self.output(p);
        let delta = {
            let mut out = vec![0.0; self.channel.outputs()];
            for (x, &dx) in d.iter().enumerate() {
                if dx != 0.0 {
                    for (o, w) in out.iter_mut().zip(self.channel.row(x)) {
                        *o += dx * w;
                    }
                }
            }
            out
        };
        let linear: f64 = d.iter().zip(&self.neg_entropy).map(|(a, b)| a * b).sum();
        let slope = |gamma: f64| {
            let mut s = linear;
            for (&q, &dz) in q0.iter().zip(&delta) {
                if dz != 0.0 {
                    s -= dz * (q + gamma * dz).max(0.0).ln();
                }
            }
            s
        };
        if !(slope(0.0) > 0.0) {
            return 0.0;
        }
        if slope(max_step) >= 0.0 {
            return max_step;
        }
        let (mut lo, mut hi) = (0.0, max_step);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(vertices: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; vertices[0].len()];
    for (v, &w) in vertices.iter().zip(weights) {
        if w > 0.0 {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += w * vi;
            }
        }
    }
    p
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col] == 0.0 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Regularized Newton direction for the weights of the active vertices,
/// constrained to keep their sum fixed. Returns a full-length direction.
fn newton_direction(
    scores: &[f64],
    vertex_outputs: &[Vec<f64>],
    q: &[f64],
    active: &[usize],
    k: usize,
) -> Option<Vec<f64>> {
    let m = active.len();
    let mut hess = vec![vec![0.0; m]; m];
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate().skip(a) {
            let h: f64 = q
                .iter()
                .enumerate()
                .filter(|(_, &qz)| qz > 0.0)
                .map(|(z, &qz)| vertex_outputs[i][z] * vertex_outputs[j][z] / qz)
                .sum();
            hess[a][b] = -h;
            hess[b][a] = -h;
        }
    }
    let trace: f64 = (0..m).map(|a| -hess[a][a]).sum();
    let ridge = 1e-12 * trace.max(1.0);
    // [H - εI  1; 1ᵀ 0] [Δ; ν] = [-g; 0]
    let mut kkt = vec![vec![0.0; m + 1]; m + 1];
    let mut rhs = vec![0.0; m + 1];
    for a in 0..m {
        kkt[a][..m].copy_from_slice(&hess[a]);
        kkt[a][a] -= ridge;
        kkt[a][m] = 1.0;
        kkt[m][a] = 1.0;
        rhs[a] = -scores[active[a]];
    }
    let sol = solve_dense(kkt, rhs)?;
    let mut direction = vec![0.0; k];
    for (a, &i) in active.iter().enumerate() {
        direction[i] = sol[a];
    }
    Some(direction)
}

/// One Newton step on the active weights with exact line search, truncated
/// at the first weight that reaches zero. Returns whether it moved.
fn newton_step(
    objective: &Objective,
    vertices: &[Vec<f64>],
    vertex_outputs: &[Vec<f64>],
    weights: &mut [f64],
    p: &[f64],
) -> bool {
    let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    if active.len() < 2 {
        return false;
    }
    let grad = objective.gradient(p);
    let scores: Vec<f64> = vertices.iter().map(|v| dot(&grad, v)).collect();
    let q = objective.output(p);
    let Some(direction) = newton_direction(&scores, vertex_outputs, &q, &active, weights.len())
    else {
        return false;
    };
    let (max_step, blocking) = active
        .iter()
        .filter(|&&i| direction[i] < 0.0)
        .map(|&i| (weights[i] / -direction[i], i))
        .fold((1.0, None), |best, (t, i)| if t < best.0 { (t, Some(i)) } else { best });
    let d = combine_signed(vertices, &direction);
    let gamma = objective.line_search(p, &d, max_step);
    if gamma == 0.0 {
        return false;
    }
    for &i in &active {
        weights[i] = (weights[i] + gamma * direction[i]).max(0.0);
    }
    if gamma >= max_step {
        if let Some(i) = blocking {
            weights[i] = 0.0;
        }
    }
    true
}

fn combine_signed(vertices: &[Vec<f64>], coefficients: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; vertices[0].len()];
    for (v, &c) in vertices.iter().zip(coefficients) {
        if c != 0.0 {
            for (di, vi) in d.iter_mut().zip(v) {
                *di += c * vi;
            }
        }
    }
    d
}

/// Maximizes `I(P, channel)` over `conv(vertices)`, starting from the
/// barycenter. `vertices` must be non-empty.
pub(crate) fn maximize_mutual_information(
    channel: &ChannelMatrix,
    vertices: &[Vec<f64>],
    max_iterations: usize,
    tolerance: f64,
) -> FwOutcome {
    let objective = Objective::new(channel);
    let k = vertices.len();
    let vertex_outputs: Vec<Vec<f64>> = vertices.iter().map(|v| objective.output(v)).collect();
    let mut weights = vec![1.0 / k as f64; k];
    let mut p = combine(vertices, &weights);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iterations {
        let grad = objective.gradient(&p);
        let scores: Vec<f64> = vertices.iter().map(|v| dot(&grad, v)).collect();
        let at_p = dot(&grad, &p);
        let (fw, fw_score) = scores
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
        gap = (fw_score - at_p).max(0.0);
        if gap <= tolerance {
            break;
        }
        iterations += 1;

        let away = scores
            .iter()
            .copied()
            .enumerate()
            .filter(|&(i, _)| weights[i] > 0.0)
            .fold((0, f64::INFINITY), |best, (i, s)| if s < best.1 { (i, s) } else { best })
            .0;
        if away == fw {
            break;
        }
        let d: Vec<f64> = vertices[fw]
            .iter()
            .zip(&vertices[away])
            .map(|(a, b)| a - b)
            .collect();
        let gamma = objective.line_search(&p, &d, weights[away]);
        if gamma >= weights[away] {
            weights[fw] += weights[away];
            weights[away] = 0.0;
        } else {
            weights[fw] += gamma;
            weights[away] -= gamma;
        }
        p = combine(vertices, &weights);
        let newton = newton_step(&objective, vertices, &vertex_outputs, &mut weights, &p);
        if gamma == 0.0 && !newton {
            break;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        p = combine(vertices, &weights);
    }

    if iterations == max_iterations || gap.is_infinite() {
        let grad = objective.gradient(&p);
        let at_p = dot(&grad, &p);
        gap = vertices
            .iter()
            .map(|v| dot(&grad, v) - at_p)
            .fold(0.0, f64::max);
    }
    FwOutcome {
        point: p,
        gap,
        iterations,
    }
}
