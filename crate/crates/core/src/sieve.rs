//! Rosser's linear-sieve weights of level `D` and their summary constants.
//!
//! For squarefree odd `d = p₁p₂⋯p_k` with `p₁ > p₂ > ⋯ > p_k` primes below
//! `z`, the β = 2 rule is
//!
//! * `λ⁺(d) = μ(d)` iff `p₁⋯p_{m-1} · p_m³ ≤ D` for every odd `m ≤ k`,
//! * `λ⁻(d) = μ(d)` iff the same holds for every even `m ≤ k`,
//!
//! and both vanish when `d > D`. The weights are built by a depth-first walk
//! over primes in descending order that stops as soon as both rules fail.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::sum::neumaier_sum;
use crate::primes::{odd_primes_below, PrimeTable};

/// Most weight entries a single table may hold.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Debug, Serialize)]
pub struct RosserWeights {
    pub d_level: f64,
    pub z: f64,
    /// Odd primes below `z`, ascending.
    pub primes: Vec<u32>,
    /// Supported `d`, ascending.
    pub support: Vec<u64>,
    #[serde(skip)]
    table: HashMap<u64, (i8, i8)>,
    /// Parameter-band notes (z < 5, D outside [z², z³]).
    pub warnings: Vec<String>,
}

fn mobius_sign(k: u32) -> i8 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn build_rosser(d_level: f64, z: f64) -> Result<RosserWeights> {
    if !(d_level >= 1.0 && d_level.is_finite()) || !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("invalid sieve parameters D = {d_level}, z = {z}")));
    }
    let mut warnings = Vec::new();
    if z < 5.0 {
        warnings.push(format!("z = {z} < 5: degenerate sieve"));
    }
    if !(z * z <= d_level && d_level <= z * z * z) {
        warnings.push(format!("D = {d_level} outside [z², z³] for z = {z}"));
    }
    let primes = odd_primes_below(z);
    let dmax = d_level.floor() as u128;
    let mut table = HashMap::new();
    table.insert(1u64, (1i8, 1i8));

    // Stack entries: (d, index bound for the next prime, k, plus_ok, minus_ok).
    let mut stack = vec![(1u128, primes.len(), 0u32, true, true)];
    while let Some((d, bound, k, plus_ok, minus_ok)) = stack.pop() {
        for j in (0..bound).rev() {
            let p = primes[j] as u128;
            let nd = d * p;
            if nd > dmax {
                continue;
            }
            let m = k + 1;
            let cond = d * p * p * p <= dmax;
            let (np, nm) = if m % 2 == 1 {
                (plus_ok && cond, minus_ok)
            } else {
                (plus_ok, minus_ok && cond)
            };
            if !np && !nm {
                continue;
            }
            let sign = mobius_sign(m);
            table.insert(
                nd as u64,
                (if np { sign } else { 0 }, if nm { sign } else { 0 }),
            );
            if table.len() > MAX_ENTRIES {
                return Err(Error::Capacity {
                    what: "Rosser weight table",
                    requested: table.len() as u128,
                    budget: MAX_ENTRIES as u128,
                });
            }
            stack.push((nd, j, m, np, nm));
        }
    }
    let mut support: Vec<u64> = table.keys().copied().collect();
    support.sort_unstable();
    Ok(RosserWeights {
        d_level,
        z,
        primes,
        support,
        table,
        warnings,
    })
}

impl RosserWeights {
    pub fn lam_plus(&self, d: u64) -> i8 {
        self.table.get(&d).map_or(0, |e| e.0)
    }

    pub fn lam_minus(&self, d: u64) -> i8 {
        self.table.get(&d).map_or(0, |e| e.1)
    }

    /// Distinct prime factors of a supported `d`, ascending.
    pub fn factor(&self, mut d: u64) -> Vec<u32> {
        let mut out = Vec::new();
        for &q in &self.primes {
            if d == 1 {
                break;
            }
            if d % q as u64 == 0 {
                out.push(q);
                d /= q as u64;
            }
        }
        out
    }

    /// Rows `(d, λ⁺(d), λ⁻(d))` in ascending `d`.
    pub fn rows(&self) -> Vec<(u64, i8, i8)> {
        self.support
            .iter()
            .map(|&d| (d, self.lam_plus(d), self.lam_minus(d)))
            .collect()
    }

    /// Test hook: corrupt `λ⁺(1)` so the sandwich check must fail.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) {
        if let Some(e) = self.table.get_mut(&1) {
            e.0 = 0;
        }
    }
}

/// Divisors of a squarefree number given by its prime factors.
fn divisors(factors: &[u32]) -> Vec<(u64, u32)> {
    let mut out = vec![(1u64, 0u32)];
    for &q in factors {
        let n = out.len();
        for i in 0..n {
            let (d, k) = out[i];
            out.push((d * q as u64, k + 1));
        }
    }
    out
}

/// `(Σ_{d|n} λ⁻(d), Σ_{d|n} μ(d), Σ_{d|n} λ⁺(d))` for squarefree `n | P(z)`.
pub fn sandwich_check(w: &RosserWeights, n: u64) -> Result<(i64, i64, i64)> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &q in &w.primes {
        let q64 = q as u64;
        if rest % q64 == 0 {
            rest /= q64;
            if rest % q64 == 0 {
                return Err(Error::domain(format!("n = {n} is not squarefree")));
            }
            factors.push(q);
        }
    }
    if rest != 1 {
        return Err(Error::domain(format!("n = {n} does not divide P(z) for z = {}", w.z)));
    }
    let (mut lo, mut mid, mut hi) = (0i64, 0i64, 0i64);
    for (d, k) in divisors(&factors) {
        lo += w.lam_minus(d) as i64;
        mid += mobius_sign(k) as i64;
        hi += w.lam_plus(d) as i64;
    }
    Ok((lo, mid, hi))
}

/// Upper linear-sieve function `F(s) = 2e^γ / s` on `[2, 3]`.
pub fn sieve_upper_f(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2.0 * EULER_GAMMA.exp() / s)
}

/// Lower linear-sieve function `f(s) = 2e^γ log(s - 1) / s` on `[2, 3]`.
pub fn sieve_lower_f(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2.0 * EULER_GAMMA.exp() * (s - 1.0).ln() / s)
}

fn check_s(s: f64) -> Result<()> {
    if (2.0..=3.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::domain(format!("sieve functions are defined on [2, 3], got s = {s}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveSummary {
    pub z: f64,
    pub d_level: f64,
    pub support_size: usize,
    pub frak_p: f64,
    pub frak_n_plus: f64,
    pub frak_n_minus: f64,
    /// `log D / log z`.
    pub s0: f64,
    /// `f(s0)`, present when `s0 ∈ [2, 3]`.
    pub f_s0: Option<f64>,
    #[serde(rename = "F_s0")]
    pub upper_f_s0: Option<f64>,
}

impl SieveSummary {
    /// `𝔑⁻ ≤ 𝔓 ≤ 𝔑⁺`.
    pub fn sandwich_holds(&self) -> bool {
        self.frak_n_minus <= self.frak_p && self.frak_p <= self.frak_n_plus
    }
}

/// `Π_{2<p<z} (1 - 1/(p-1))`.
pub fn frak_p(z: f64) -> f64 {
    odd_primes_below(z)
        .iter()
        .map(|&p| 1.0 - 1.0 / (p as f64 - 1.0))
        .product()
}

/// `φ(d)` for squarefree `d` with known factors.
fn phi_squarefree(factors: &[u32]) -> f64 {
    factors.iter().map(|&q| q as f64 - 1.0).product()
}

pub fn frak_values(w: &RosserWeights) -> SieveSummary {
    let terms: Vec<(f64, f64)> = w
        .support
        .iter()
        .map(|&d| {
            let phi = phi_squarefree(&w.factor(d));
            (w.lam_plus(d) as f64 / phi, w.lam_minus(d) as f64 / phi)
        })
        .collect();
    let s0 = if w.z > 1.0 { w.d_level.ln() / w.z.ln() } else { f64::NAN };
    // Snap values within rounding of the interval ends.
    let s_eval = if (s0 - 2.0).abs() < 1e-12 {
        2.0
    } else if (s0 - 3.0).abs() < 1e-12 {
        3.0
    } else {
        s0
    };
    SieveSummary {
        z: w.z,
        d_level: w.d_level,
        support_size: w.support.len(),
        frak_p: frak_p(w.z),
        frak_n_plus: neumaier_sum(terms.iter().map(|t| t.0)),
        frak_n_minus: neumaier_sum(terms.iter().map(|t| t.1)),
        s0,
        f_s0: sieve_lower_f(s_eval).ok(),
        upper_f_s0: sieve_upper_f(s_eval).ok(),
    }
}

/// Fill `w_plus`/`w_minus` with `Σ_{d | (p+2, P(z))} λ±(d)` for every prime.
pub fn collapse_weights(w: &RosserWeights, mut t: PrimeTable) -> PrimeTable {
    if t.spf_bound != Some(w.z) {
        t.attach_small_factors(w.z);
    }
    let pairs: Vec<(i32, i32)> = (0..t.len())
        .into_par_iter()
        .map(|i| {
            let (mut plus, mut minus) = (0i32, 0i32);
            for (d, _) in divisors(t.small_factors(i)) {
                plus += w.lam_plus(d) as i32;
                minus += w.lam_minus(d) as i32;
            }
            (plus, minus)
        })
        .collect();
    t.w_plus = Some(pairs.iter().map(|p| p.0).collect());
    t.w_minus = Some(pairs.iter().map(|p| p.1).collect());
    t
}

/// The right side of the triple-product inequality
/// `Λ₁Λ₂Λ₃ ≥ Λ₁⁻Λ₂⁺Λ₃⁺ + Λ₁⁺Λ₂⁻Λ₃⁺ + Λ₁⁺Λ₂⁺Λ₃⁻ − 2Λ₁⁺Λ₂⁺Λ₃⁺`.
pub fn lemma3_lower(lm: [f64; 3], lp: [f64; 3]) -> f64 {
    lm[0] * lp[1] * lp[2] + lp[0] * lm[1] * lp[2] + lp[0] * lp[1] * lm[2]
        - 2.0 * lp[0] * lp[1] * lp[2]
}
