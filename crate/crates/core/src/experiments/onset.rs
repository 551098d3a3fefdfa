/// Relative slack when comparing consecutive ratios.
const RATIO_SLACK: f64 = 1e-12;

/// Local convergence ratios `‖R_m‖ / ‖R_{m-1}‖` for `m = 1, 2, …`, stopping at the first
/// zero norm.
pub fn local_ratios(norms: &[f64]) -> Vec<f64> {
    norms
        .windows(2)
        .take_while(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

/// Step at which the local ratio starts its final sustained decrease.
///
/// Ratios above three quarters of the way from the smallest to the largest ratio count as
/// the slow phase. Starting from the last slow step the detector moves back to the top of
/// the descent it belongs to, then returns the first step `m` that closes a run of
/// `window` strictly decreasing ratios. Returns `None` when no such run exists, e.g. for a
/// purely geometric sequence.
pub fn superlinearity_onset(norms: &[f64], window: usize) -> Option<usize> {
    let r = local_ratios(norms);
    if r.is_empty() || window == 0 {
        return None;
    }
    // r[k] is the ratio at step k + 1.
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let level = lo + 0.75 * (hi - lo);
    let last_slow = r.iter().rposition(|&x| x >= level)?;
    let mut start = last_slow;
    while start > 0 && r[start - 1] > r[start] * (1.0 + RATIO_SLACK) {
        start -= 1;
    }
    let decreasing = |k: usize| r[k + 1] < r[k] * (1.0 - RATIO_SLACK);
    (start + window - 1..r.len())
        .find(|&end| (end + 1 - window..end).all(decreasing))
        .map(|end| end + 1)
}
