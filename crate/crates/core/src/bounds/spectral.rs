use super::{BoundsError, Result};

/// A single ratio `|λ_{j1} − λ_j| / |λ_{j1} − θ_j|` above this value marks the factor as
/// unreliable: the Ritz value sits close enough to a non-target eigenvalue that `α` is
/// dominated by one near-singular denominator.
pub const ALPHA_UNRELIABLE_TOL: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFactor {
    pub value: f64,
    /// Some single ratio exceeded [`ALPHA_UNRELIABLE_TOL`].
    pub unreliable: bool,
    /// Largest single ratio encountered.
    pub max_amplification: f64,
}

/// Spectral amplification factor `α_{m,k1,k2}`.
///
/// `lambdas` is the full ascending spectrum and `ritz` the ascending Ritz values at step `m`.
/// The lower product runs over `θ_1..θ_{k1}` and the upper one over the `k2` largest Ritz
/// values. Since the two products depend on independent indices the joint maximum is the
/// product of the two maxima. The lower index `j1` runs over `k1+1..=n−k2`; the upper
/// comparison eigenvalue is `λ_{n−j2}` for `j2` in `k2..=n−k1−1`. Eigenvalues equal to a
/// deflated one are skipped.
///
/// With `multiplicity` set, the first `k1` eigenvalues are all taken equal to `λ_1`.
pub fn alpha_factor(lambdas: &[f64], ritz: &[f64], k1: usize, k2: usize, multiplicity: bool) -> Result<AlphaFactor> {
    let n = lambdas.len();
    if k1 + k2 == 0 || k1 + k2 >= n {
        return Err(BoundsError::InvalidTarget { k1, k2, n });
    }
    if ritz.len() < k1 + k2 {
        return Err(BoundsError::InsufficientRitz {
            needed: k1 + k2,
            available: ritz.len(),
        });
    }
    let mut worst: f64 = 0.0;
    let low_lambda = |j: usize| if multiplicity { lambdas[0] } else { lambdas[j] };
    let top = ritz.len();

    let mut lower = 1.0;
    if k1 > 0 {
        lower = 0.0;
        for j1 in k1..n - k2 {
            let lj1 = lambdas[j1];
            if (0..k1).any(|j| lj1 == low_lambda(j)) {
                continue;
            }
            let mut p = 1.0;
            for j in 0..k1 {
                let lj = low_lambda(j);
                let den = (lj1 - ritz[j]).abs();
                if den == 0.0 {
                    return Err(BoundsError::DegenerateDenominator { ritz: j, eig: j1 });
                }
                let ratio = (lj1 - lj).abs() / den;
                worst = worst.max(ratio);
                p *= ritz[j] / lj * ratio;
            }
            lower = f64::max(lower, p);
        }
    }

    let mut upper = 1.0;
    if k2 > 0 {
        upper = 0.0;
        for j2 in k2..n - k1 {
            let idx = n - 1 - j2;
            let lc = lambdas[idx];
            if (0..k2).any(|j| lc == lambdas[n - 1 - j]) {
                continue;
            }
            let mut p = 1.0;
            for j in 0..k2 {
                let theta = ritz[top - 1 - j];
                let lt = lambdas[n - 1 - j];
                let den = (theta - lc).abs();
                if den == 0.0 {
                    return Err(BoundsError::DegenerateDenominator {
                        ritz: top - 1 - j,
                        eig: idx,
                    });
                }
                let ratio = (lt - lc).abs() / den;
                worst = worst.max(ratio);
                p *= theta / lt * ratio;
            }
            upper = f64::max(upper, p);
        }
    }

    Ok(AlphaFactor {
        value: lower * upper,
        unreliable: worst > ALPHA_UNRELIABLE_TOL,
        max_amplification: worst,
    })
}
