use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::sum::neumaier_sum;

/// Both sides of van der Corput's inequality
///
/// ```text
/// |Σ_l Υ(l)|² ≤ (n + H)/H · Σ_{|h|<H} (1 − |h|/H) Σ_l Υ(l + h) conj Υ(l)
/// ```
///
/// for a sequence of length `n` (so `β − α = n`). Returns `(lhs, rhs)`.
pub fn vdc_check(seq: &[Complex64], h_max: usize) -> Result<(f64, f64)> {
    let n = seq.len();
    if h_max < 1 || h_max > n {
        return Err(Error::domain(format!("need 1 <= H <= {n}, got H = {h_max}")));
    }
    let lhs = neumaier_sum(seq.iter().copied()).norm_sqr();
    let hf = h_max as f64;
    // The h and -h correlations are conjugate, so their real parts agree.
    let corr = |h: usize| neumaier_sum((0..n - h).map(|l| (seq[l + h] * seq[l].conj()).re));
    let mut inner = corr(0);
    for h in 1..h_max {
        inner += 2.0 * (1.0 - h as f64 / hf) * corr(h);
    }
    let rhs = (n as f64 + hf) / hf * inner;
    Ok((lhs, rhs))
}
