use crate::channel::Distribution;
use crate::error::{Error, Result};

/// Integer composition of `n` closest to `n · dist` in max-deviation:
/// floors first, then the leftover units go to the largest remainders
/// (lower index wins ties). Zero-probability letters get nothing.
pub fn composition(dist: &Distribution, n: usize) -> Vec<usize> {
    let scaled: Vec<f64> = dist.probs().iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len())
        .filter(|&a| dist.probs()[a] > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &a in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[a] += 1;
    }
    counts
}

/// Constant-composition sequence of length `n` for `dist`, in canonical
/// (non-decreasing) order.
pub fn constant_composition_sequence(dist: &Distribution, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidParameter("blocklength must be positive".into()));
    }
    let counts = composition(dist, n);
    Ok(counts
        .iter()
        .enumerate()
        .flat_map(|(a, &k)| std::iter::repeat_n(a, k))
        .collect())
}
