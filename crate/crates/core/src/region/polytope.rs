//! Extreme points of `{P in the simplex : ⟨a_k, P⟩ ≤ c_k}` for at most two
//! half-spaces.
//!
//! A basic feasible point has at most one more non-zero coordinate than the
//! number of active inequalities, so every extreme point has support of size
//! one (a simplex vertex), two (an edge cut by one hyperplane) or three (a
//! triangle cut by both).

const FEASIBILITY_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub(crate) struct HalfSpace {
    pub normal: Vec<f64>,
    pub bound: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, bound: f64) -> Self {
        Self { normal, bound }
    }

    fn value(&self, point: &[f64]) -> f64 {
        self.normal.iter().zip(point).map(|(a, p)| a * p).sum()
    }

    fn holds(&self, point: &[f64]) -> bool {
        let scale = 1.0 + self.bound.abs() + self.normal.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        self.value(point) <= self.bound + FEASIBILITY_TOL * scale
    }
}

fn push_unique(points: &mut Vec<Vec<f64>>, candidate: Vec<f64>) {
    let duplicate = points.iter().any(|p| {
        p.iter()
            .zip(&candidate)
            .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
    });
    if !duplicate {
        points.push(candidate);
    }
}

/// Enumerates the extreme points in a deterministic order.
pub(crate) fn extreme_points(dim: usize, constraints: &[HalfSpace]) -> Vec<Vec<f64>> {
    assert!(constraints.len() <= 2, "at most two half-spaces are supported");
    let feasible = |p: &[f64]| constraints.iter().all(|h| h.holds(p));
    let mut points = Vec::new();

    for i in 0..dim {
        let mut p = vec![0.0; dim];
        p[i] = 1.0;
        if feasible(&p) {
            push_unique(&mut points, p);
        }
    }

    for h in constraints {
        for i in 0..dim {
            for j in i + 1..dim {
                let denom = h.normal[i] - h.normal[j];
                if denom == 0.0 {
                    continue;
                }
                let lambda = (h.bound - h.normal[j]) / denom;
                if !(lambda > 0.0 && lambda < 1.0) {
                    continue;
                }
                let mut p = vec![0.0; dim];
                p[i] = lambda;
                p[j] = 1.0 - lambda;
                if feasible(&p) {
                    push_unique(&mut points, p);
                }
            }
        }
    }

    if let [h1, h2] = constraints {
        for i in 0..dim {
            for j in i + 1..dim {
                for k in j + 1..dim {
                    let idx = [i, j, k];
                    let m = [
                        [1.0, 1.0, 1.0],
                        idx.map(|t| h1.normal[t]),
                        idx.map(|t| h2.normal[t]),
                    ];
                    let rhs = [1.0, h1.bound, h2.bound];
                    let Some(sol) = solve3(m, rhs) else { continue };
                    if sol.iter().any(|&l| !(l > 0.0)) {
                        continue;
                    }
                    let mut p = vec![0.0; dim];
                    for (t, l) in idx.into_iter().zip(sol) {
                        p[t] = l;
                    }
                    if feasible(&p) {
                        push_unique(&mut points, p);
                    }
                }
            }
        }
    }
    points
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule; `None` for (near-)singular systems.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = det3(m);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if det.abs() <= 1e-14 * scale.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *slot = det3(mc) / det;
    }
    Some(out)
}
