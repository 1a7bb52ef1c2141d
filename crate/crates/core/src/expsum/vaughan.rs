//! Vaughan's identity with `U = V = X^{1/3}`.
//!
//! For `U < n ≤ X`,
//!
//! ```text
//! Σ Λ(n) f(n) = S₁ − S₂ − S₃
//! S₁ = Σ_{k≤U}      μ(k) Σ_l log l · f(kl)
//! S₂ = Σ_{k≤U²}     c(k) Σ_l f(kl),         c(k) = Σ_{bm=k, b≤U, m≤U} μ(b) Λ(m)
//! S₃ = Σ_{U<k≤U²}   a(k) Σ_{l>U} Λ(l) f(kl), a(k) = Σ_{d|k, d≤U} μ(d)
//! ```
//!
//! with every inner sum restricted to `μX < kl ≤ X`. S₂ is further split at
//! `k = U` into S₂′ and S₂″.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::sum::Neumaier;
use crate::params::ProblemInstance;

#[derive(Clone, Debug, Serialize)]
pub struct VaughanParts {
    pub s1: Complex64,
    pub s2: Complex64,
    pub s2_prime: Complex64,
    pub s2_doubleprime: Complex64,
    pub s3: Complex64,
    /// `Σ_{μX<n≤X} Λ(n) f(n)` computed directly.
    pub direct: Complex64,
    /// `|S₁ − S₂ − S₃ − direct|`.
    pub residual: f64,
    /// `Σ Λ(n)` over the range, the scale for `residual`.
    pub lambda_mass: f64,
    /// `max_k |a(k)| / τ(k)`.
    pub a_ratio_max: f64,
    /// `|c(k)| ≤ log k` for every `k`.
    pub c_bound_holds: bool,
    #[serde(skip)]
    pub a: Vec<i64>,
    #[serde(skip)]
    pub c: Vec<f64>,
}

impl VaughanParts {
    /// `a(k)`; zero outside `(U, U²]`.
    pub fn a_k(&self, k: usize) -> i64 {
        self.a.get(k).copied().unwrap_or(0)
    }

    /// `c(k)`; zero outside `[1, U²]`.
    pub fn c_k(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }
}

/// Möbius function and von Mangoldt function on `0..=n` (index 0 unused).
fn mobius_and_lambda(n: usize) -> (Vec<i8>, Vec<f64>) {
    let mut mu = vec![1i8; n + 1];
    let mut lam = vec![0.0; n + 1];
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        let sq = p.saturating_mul(p);
        for m in (sq..=n).step_by(sq.max(1)) {
            mu[m] = 0;
        }
        let lp = (p as f64).ln();
        let mut pk = p;
        while pk <= n {
            lam[pk] = lp;
            pk = pk.saturating_mul(p);
        }
    }
    if n >= 1 {
        mu[0] = 0;
    }
    (mu, lam)
}

fn divisor_count(mut k: usize) -> i64 {
    let mut count = 1;
    let mut q = 2;
    while q * q <= k {
        let mut e = 0;
        while k % q == 0 {
            k /= q;
            e += 1;
        }
        count *= e + 1;
        q += 1;
    }
    if k > 1 {
        count *= 2;
    }
    count
}

/// Decompose `Σ_{μX<n≤X} Λ(n) f(n)`; requires `μX ≥ X^{1/3}`.
pub fn vaughan_decompose<F>(inst: &ProblemInstance, f: F) -> Result<VaughanParts>
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let x = inst.x;
    if x > 1e8 {
        return Err(Error::Capacity {
            what: "Vaughan decomposition range",
            requested: x as u128,
            budget: 100_000_000,
        });
    }
    let n_lo = inst.lower().floor() as usize + 1;
    let n_hi = x.floor() as usize;
    // u = max k with k³ ≤ X, u2 = max k with k³ ≤ X².
    let cube_le = |k: usize, bound: f64| ((k as f64).powi(3)) <= bound;
    let mut u = 1;
    while cube_le(u + 1, x) {
        u += 1;
    }
    let mut u2 = u;
    while cube_le(u2 + 1, x * x) {
        u2 += 1;
    }
    if n_lo <= u {
        return Err(Error::domain("Vaughan decomposition needs μX ≥ X^(1/3)"));
    }
    if n_lo > n_hi {
        return Err(Error::domain("empty summation range"));
    }

    let (mu, lam) = mobius_and_lambda(n_hi.max(u2));
    let fv: Vec<Complex64> = (n_lo..=n_hi).map(|n| f(n as u64)).collect();
    let fat = |n: usize| fv[n - n_lo];
    // l with kl in [n_lo, n_hi].
    let l_range = |k: usize| n_lo.div_ceil(k)..=n_hi / k;

    let mut direct = Neumaier::new();
    let mut mass = Neumaier::new();
    for n in n_lo..=n_hi {
        if lam[n] != 0.0 {
            direct.add(fat(n) * lam[n]);
            mass.add(lam[n]);
        }
    }

    let mut s1 = Neumaier::new();
    for k in 1..=u {
        if mu[k] == 0 {
            continue;
        }
        let mut inner = Neumaier::new();
        for l in l_range(k) {
            inner.add(fat(k * l) * (l as f64).ln());
        }
        s1.add(inner.value() * mu[k] as f64);
    }

    let mut c = vec![0.0f64; u2 + 1];
    for b in 1..=u {
        if mu[b] == 0 {
            continue;
        }
        for m in 2..=u {
            if lam[m] != 0.0 && b * m <= u2 {
                c[b * m] += mu[b] as f64 * lam[m];
            }
        }
    }
    let (mut s2p, mut s2pp) = (Neumaier::new(), Neumaier::new());
    for (k, &ck) in c.iter().enumerate().skip(1) {
        if ck == 0.0 {
            continue;
        }
        let mut inner = Neumaier::new();
        for l in l_range(k) {
            inner.add(fat(k * l));
        }
        if k <= u {
            s2p.add(inner.value() * ck);
        } else {
            s2pp.add(inner.value() * ck);
        }
    }

    let mut a = vec![0i64; u2 + 1];
    for d in 1..=u {
        if mu[d] == 0 {
            continue;
        }
        let mut k = d * (u / d + 1);
        while k <= u2 {
            a[k] += mu[d] as i64;
            k += d;
        }
    }
    let mut s3 = Neumaier::new();
    for (k, &ak) in a.iter().enumerate().skip(u + 1) {
        if ak == 0 {
            continue;
        }
        let mut inner = Neumaier::new();
        for l in l_range(k) {
            if l > u && lam[l] != 0.0 {
                inner.add(fat(k * l) * lam[l]);
            }
        }
        s3.add(inner.value() * ak as f64);
    }

    let a_ratio_max = (u + 1..=u2)
        .map(|k| a[k].abs() as f64 / divisor_count(k) as f64)
        .fold(0.0, f64::max);
    let c_bound_holds = (1..=u2).all(|k| c[k].abs() <= (k as f64).ln() * (1.0 + 1e-12));

    let (s1, s2p, s2pp, s3, direct) = (s1.value(), s2p.value(), s2pp.value(), s3.value(), direct.value());
    let s2 = s2p + s2pp;
    Ok(VaughanParts {
        s1,
        s2,
        s2_prime: s2p,
        s2_doubleprime: s2pp,
        s3,
        direct,
        residual: (s1 - s2 - s3 - direct).norm(),
        lambda_mass: mass.value(),
        a_ratio_max,
        c_bound_holds,
        a,
        c,
    })
}
