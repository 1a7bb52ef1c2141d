//! Prime enumeration, factor counting and Chebyshev-function queries.
//!
//! The summation domain of every prime sum is a half-open range `(lo, hi]`.
//! [`sieve_range`] enumerates it with an odd-only segmented sieve and, in the
//! same pass, counts the prime factors of each `p + 2` by sieving the shifted
//! window with the base primes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::sum::neumaier_sum;

/// Largest admissible upper bound.
pub const MAX_HI: u64 = 1 << 50;

/// Widest range (in integers) a single table may cover.
pub const MAX_SPAN: u64 = 1 << 30;

/// Odd numbers per sieve segment: 2^18 bits = 32 KiB.
const SEG_ODDS: u64 = 1 << 18;

/// Primes in `(lo, hi]` with per-prime data used by the sums.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PrimeTable {
    pub lo: f64,
    pub hi: f64,
    pub primes: Vec<u64>,
    pub logp: Vec<f64>,
    /// Ω(p + 2) with multiplicity.
    pub omega_p2: Vec<u32>,
    /// The `z` for which [`small_factors`](Self::small_factors) was filled.
    pub spf_bound: Option<f64>,
    #[serde(skip)]
    factor_offsets: Vec<u32>,
    #[serde(skip)]
    factors: Vec<u32>,
    /// Collapsed upper sieve weights `Σ_{d | (p+2, P(z))} λ⁺(d)`.
    pub w_plus: Option<Vec<i32>>,
    /// Collapsed lower sieve weights.
    pub w_minus: Option<Vec<i32>>,
}

impl PrimeTable {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Record, for every prime, the distinct odd primes `q < z` dividing `p + 2`.
    pub fn attach_small_factors(&mut self, z: f64) {
        let qs = odd_primes_below(z);
        let mut offsets = Vec::with_capacity(self.primes.len() + 1);
        let mut factors = Vec::new();
        offsets.push(0u32);
        for &p in &self.primes {
            let m = p + 2;
            for &q in &qs {
                if m % q as u64 == 0 {
                    factors.push(q);
                }
            }
            offsets.push(factors.len() as u32);
        }
        self.factor_offsets = offsets;
        self.factors = factors;
        self.spf_bound = Some(z);
    }

    /// Distinct odd primes below `spf_bound` dividing `primes[i] + 2`.
    pub fn small_factors(&self, i: usize) -> &[u32] {
        assert!(
            self.spf_bound.is_some(),
            "attach_small_factors must be called first"
        );
        let a = self.factor_offsets[i] as usize;
        let b = self.factor_offsets[i + 1] as usize;
        &self.factors[a..b]
    }

    /// `(p + 2, P(z)) = 1` for every prime, using the attached factor data.
    pub fn sieve_pass(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.small_factors(i).is_empty()).collect()
    }
}

/// Simple sieve of Eratosthenes up to and including `n`.
pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Odd primes `q` with `2 < q < z`, i.e. the prime factors of `P(z)`.
pub fn odd_primes_below(z: f64) -> Vec<u32> {
    if z <= 3.0 {
        return Vec::new();
    }
    let top = z.ceil() as u64;
    primes_upto(top)
        .into_iter()
        .filter(|&q| q > 2 && (q as f64) < z)
        .map(|q| q as u32)
        .collect()
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Integer bounds `(lo_i, hi_i]` equivalent to the real range `(lo, hi]`.
fn integer_bounds(lo: f64, hi: f64) -> Result<(u64, u64)> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::domain(format!("empty or invalid range ({lo}, {hi}]")));
    }
    if hi > MAX_HI as f64 {
        return Err(Error::domain(format!("upper bound {hi} exceeds 2^50")));
    }
    let lo_i = lo.max(0.0).floor() as u64;
    let hi_i = hi.floor() as u64;
    if hi_i.saturating_sub(lo_i) > MAX_SPAN {
        return Err(Error::Capacity {
            what: "prime range",
            requested: (hi_i - lo_i) as u128,
            budget: MAX_SPAN as u128,
        });
    }
    Ok((lo_i, hi_i))
}

/// Exact enumeration of the primes in `(lo, hi]`, with Ω(p + 2) for each.
pub fn sieve_range(lo: f64, hi: f64) -> Result<PrimeTable> {
    let (lo_i, hi_i) = integer_bounds(lo, hi)?;
    let base = primes_upto(isqrt(hi_i + 2) + 1);
    let mut primes = Vec::new();
    let mut omega = Vec::new();
    if lo_i < 2 && hi_i >= 2 {
        primes.push(2);
        omega.push(2); // Ω(4)
    }

    // Odd indices i ↔ n = 2i + 1.
    let first_odd = if (lo_i + 1) % 2 == 1 { lo_i + 1 } else { lo_i + 2 };
    let last_odd = if hi_i % 2 == 1 { hi_i } else { hi_i.saturating_sub(1) };
    if first_odd <= last_odd {
        let i0 = (first_odd - 1) / 2;
        let i1 = (last_odd - 1) / 2;
        let nseg = (i1 - i0) / SEG_ODDS + 1;
        let parts: Vec<(Vec<u64>, Vec<u32>)> = (0..nseg)
            .into_par_iter()
            .map(|s| {
                let start = i0 + s * SEG_ODDS;
                let end = (start + SEG_ODDS - 1).min(i1);
                let ps = sieve_odd_segment(start, end, &base);
                let om = omega_shifted(&ps, 2, &base);
                (ps, om)
            })
            .collect();
        for (ps, om) in parts {
            primes.extend(ps);
            omega.extend(om);
        }
    }
    let logp = primes.iter().map(|&p| (p as f64).ln()).collect();
    Ok(PrimeTable {
        lo,
        hi,
        primes,
        logp,
        omega_p2: omega,
        ..PrimeTable::default()
    })
}

/// Primes among the odd numbers with indices `start..=end`.
fn sieve_odd_segment(start: u64, end: u64, base: &[u64]) -> Vec<u64> {
    let len = (end - start + 1) as usize;
    let mut bits = vec![0u64; len.div_ceil(64)];
    let mark = |j: usize, bits: &mut [u64]| bits[j >> 6] |= 1 << (j & 63);
    let n_lo = 2 * start + 1;
    let n_hi = 2 * end + 1;
    if start == 0 {
        mark(0, &mut bits); // 1 is not prime
    }
    for &q in base.iter().skip(1) {
        if q * q > n_hi {
            break;
        }
        let mut m = n_lo.div_ceil(q) * q;
        if m % 2 == 0 {
            m += q;
        }
        m = m.max(q * q);
        let mut j = ((m - 1) / 2 - start) as usize;
        while j < len {
            mark(j, &mut bits);
            j += q as usize;
        }
    }
    let mut out = Vec::new();
    for (w, &word) in bits.iter().enumerate() {
        let mut free = !word;
        while free != 0 {
            let b = free.trailing_zeros() as usize;
            let j = w * 64 + b;
            if j >= len {
                break;
            }
            out.push(2 * (start + j as u64) + 1);
            free &= free - 1;
        }
    }
    out
}

/// Ω(v + shift) for sorted `values`, by sieving the window they span.
fn omega_shifted(values: &[u64], shift: u64, base: &[u64]) -> Vec<u32> {
    let (Some(&first), Some(&last)) = (values.first(), values.last()) else {
        return Vec::new();
    };
    let lo = first + shift;
    let hi = last + shift;
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut cnt = vec![0u32; len];
    for &q in base {
        if q * q > hi {
            break;
        }
        let mut m = lo.div_ceil(q) * q;
        while m <= hi {
            let j = (m - lo) as usize;
            while rem[j] % q == 0 {
                rem[j] /= q;
                cnt[j] += 1;
            }
            m += q;
        }
    }
    values
        .iter()
        .map(|&v| {
            let j = (v + shift - lo) as usize;
            cnt[j] + u32::from(rem[j] > 1)
        })
        .collect()
}

/// Ω(n): prime factors counted with multiplicity. Ω(1) = 0.
pub fn omega_multiplicity(mut n: u64) -> u32 {
    assert!(n >= 1, "Ω is defined for n >= 1");
    let mut count = 0;
    while n % 2 == 0 {
        n /= 2;
        count += 1;
    }
    let mut q = 3;
    while q * q <= n {
        while n % q == 0 {
            n /= q;
            count += 1;
        }
        q += 2;
    }
    if n > 1 {
        count += 1;
    }
    count
}

/// `(n, P(z)) = 1`: no odd prime below `z` divides `n`.
pub fn coprime_to_pz(n: u64, z: f64) -> bool {
    assert!(n >= 1);
    let m = n >> n.trailing_zeros();
    let mut q = 3u64;
    while (q as f64) < z && q * q <= m {
        if m % q == 0 {
            // The least odd divisor is prime and below z.
            return false;
        }
        q += 2;
    }
    if (q as f64) >= z {
        return true;
    }
    // Trial division stopped at √m, so m is 1 or a prime.
    !(m > 1 && (m as f64) < z)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Euler's totient by trial division.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            while n % q == 0 {
                n /= q;
            }
            result -= result / q;
        }
        q += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Prime powers `n = p^k` in `(lo, hi]` with `Λ(n) = log p`, ascending in `n`.
#[derive(Clone, Debug, Default)]
pub struct LambdaTable {
    pub lo: f64,
    pub hi: f64,
    pub entries: Vec<(u64, f64)>,
}

impl LambdaTable {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let (lo_i, hi_i) = integer_bounds(lo, hi)?;
        let mut entries: Vec<(u64, f64)> = sieve_range(lo, hi)?
            .primes
            .into_iter()
            .map(|p| (p, (p as f64).ln()))
            .collect();
        for p in primes_upto(isqrt(hi_i)) {
            let lp = (p as f64).ln();
            let mut pk = p * p;
            while pk <= hi_i {
                if pk > lo_i {
                    entries.push((pk, lp));
                }
                match pk.checked_mul(p) {
                    Some(v) => pk = v,
                    None => break,
                }
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        Ok(LambdaTable { lo, hi, entries })
    }

    /// `Σ Λ(n)` over the table.
    pub fn total(&self) -> f64 {
        neumaier_sum(self.entries.iter().map(|e| e.1))
    }

    /// `Σ Λ(n)` over `n ≤ y`, `n ≡ l (mod k)`.
    pub fn psi_mod(&self, y: f64, k: u64, l: u64) -> f64 {
        neumaier_sum(
            self.entries
                .iter()
                .take_while(|e| e.0 as f64 <= y)
                .filter(|e| e.0 % k == l)
                .map(|e| e.1),
        )
    }
}

/// A Chebyshev-function query `ψ(y; k, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChebyshevQuery {
    pub y: f64,
    pub k: u64,
    pub l: u64,
}

impl ChebyshevQuery {
    fn check(&self) -> Result<()> {
        if !(self.y >= 2.0) {
            return Err(Error::domain(format!("y = {} below 2", self.y)));
        }
        if self.k == 0 || self.l >= self.k {
            return Err(Error::domain(format!(
                "need k >= 1 and 0 <= l < k, got k={} l={}",
                self.k, self.l
            )));
        }
        Ok(())
    }
}

/// `ψ(y) = Σ_{n ≤ y} Λ(n)`.
pub fn chebyshev_psi(y: f64) -> Result<f64> {
    if !(y >= 2.0) {
        return Err(Error::domain(format!("y = {y} below 2")));
    }
    Ok(LambdaTable::new(0.0, y)?.total())
}

/// `ψ(y; k, l) = Σ_{n ≤ y, n ≡ l (k)} Λ(n)`.
pub fn chebyshev_psi_mod(q: ChebyshevQuery) -> Result<f64> {
    q.check()?;
    Ok(LambdaTable::new(0.0, q.y)?.psi_mod(q.y, q.k, q.l))
}

/// `Δ(y; k, l) = ψ(y; k, l) − y/φ(k)`, defined for `(l, k) = 1`.
pub fn delta_error(q: ChebyshevQuery) -> Result<f64> {
    q.check()?;
    if gcd(q.l, q.k) != 1 {
        return Err(Error::domain(format!("gcd(l={}, k={}) > 1", q.l, q.k)));
    }
    Ok(chebyshev_psi_mod(q)? - q.y / euler_phi(q.k) as f64)
}

/// `max_{y ≤ x} max_{(l,d)=1} |Δ(y; d, l)|` from a table covering `(0, x]`.
///
/// Between consecutive jumps `Δ` is linear in `y`, so the supremum is taken
/// at a jump (just before or just after it) or at `y = x`.
pub fn bv_term(table: &LambdaTable, x: f64, d: u64) -> f64 {
    let phi = euler_phi(d) as f64;
    let du = d as usize;
    let mut psi = vec![0.0f64; du];
    let mut best = vec![0.0f64; du];
    for &(n, lp) in table.entries.iter().take_while(|e| e.0 as f64 <= x) {
        let l = (n % d) as usize;
        let drift = n as f64 / phi;
        let before = (psi[l] - drift).abs();
        psi[l] += lp;
        let after = (psi[l] - drift).abs();
        best[l] = best[l].max(before).max(after);
    }
    let mut m = 0.0f64;
    for l in 0..du {
        if gcd(l as u64, d) == 1 {
            m = m.max(best[l]).max((psi[l] - x / phi).abs());
        }
    }
    m
}

/// Bombieri–Vinogradov sum `Σ_{2 ≤ d ≤ Q} max_{y ≤ x} max_{(l,d)=1} |Δ(y; d, l)|`.
pub fn bv_sum(x: f64, q: f64) -> Result<f64> {
    if !(x >= 10.0) || !(q >= 2.0) {
        return Err(Error::domain(format!("need x >= 10 and Q >= 2, got x={x} Q={q}")));
    }
    let table = LambdaTable::new(0.0, x)?;
    let mut total = 0.0;
    for d in 2..=(q.floor() as u64) {
        total += bv_term(&table, x, d);
    }
    Ok(total)
}

/// [`bv_sum`] together with the comparison values `x (log x)^-A`.
#[derive(Clone, Debug, Serialize)]
pub struct BvReport {
    pub x: f64,
    pub q: f64,
    pub sigma: f64,
    /// `(A, x (log x)^-A, sigma / that)`; empirical, never asserted.
    pub comparisons: Vec<(f64, f64, f64)>,
}

pub fn bv_report(x: f64, q: f64, exponents: &[f64]) -> Result<BvReport> {
    let sigma = bv_sum(x, q)?;
    let comparisons = exponents
        .iter()
        .map(|&a| {
            let cmp = x * x.ln().powf(-a);
            (a, cmp, sigma / cmp)
        })
        .collect();
    Ok(BvReport {
        x,
        q,
        sigma,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_ranges() {
        let t = sieve_range(50.0, 100.0).unwrap();
        assert_eq!(t.primes, vec![53, 59, 61, 67, 71, 73, 79, 83, 89, 97]);
        assert_eq!(sieve_range(2.0, 3.0).unwrap().primes, vec![3]);
        assert!(sieve_range(89.0, 90.0).unwrap().primes.is_empty());
        assert_eq!(sieve_range(0.0, 10.0).unwrap().primes, vec![2, 3, 5, 7]);
        assert_eq!(sieve_range(1.5, 2.0).unwrap().primes, vec![2]);
    }

    #[test]
    fn exhaustive_against_trial_division() {
        let t = sieve_range(0.0, 100_000.0).unwrap();
        let expect: Vec<u64> = (1..=100_000).filter(|&n| trial_is_prime(n)).collect();
        assert_eq!(t.primes, expect);
        for (i, &p) in t.primes.iter().enumerate() {
            assert_eq!(t.omega_p2[i], omega_multiplicity(p + 2), "p={p}");
        }
        // Ranges that straddle segment boundaries at arbitrary offsets.
        for &(lo, hi) in &[(524_000.0, 530_000.0), (1_048_570.0, 1_050_000.0), (99_990.0, 100_000.0)] {
            let t = sieve_range(lo, hi).unwrap();
            let expect: Vec<u64> = ((lo as u64 + 1)..=(hi as u64)).filter(|&n| trial_is_prime(n)).collect();
            assert_eq!(t.primes, expect);
        }
    }

    #[test]
    fn range_errors() {
        assert!(sieve_range(10.0, 10.0).is_err());
        assert!(sieve_range(0.0, 2f64.powi(51)).is_err());
        assert!(matches!(
            sieve_range(0.0, 2f64.powi(40)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_multiplicity(1), 0);
        assert_eq!(omega_multiplicity(12), 3);
        assert_eq!(omega_multiplicity(1024), 10);
        assert_eq!(omega_multiplicity(999_983), 1);
    }

    #[test]
    fn coprime_examples() {
        assert!(coprime_to_pz(1024, 1000.0));
        assert!(!coprime_to_pz(15, 6.0));
        assert!(coprime_to_pz(49, 7.0));
        assert!(!coprime_to_pz(49, 8.0));
        assert!(coprime_to_pz(13, 13.0));
        assert!(!coprime_to_pz(13, 13.5));
        assert!(coprime_to_pz(1, 50.0));
    }

    #[test]
    fn coprime_matches_factorization() {
        let zs = [3.0, 5.5, 7.0, 8.0, 20.0, 31.0];
        for n in 1..20_000u64 {
            for &z in &zs {
                let mut m = n;
                let mut ok = true;
                let mut q = 2;
                while q * q <= m {
                    while m % q == 0 {
                        if q > 2 && (q as f64) < z {
                            ok = false;
                        }
                        m /= q;
                    }
                    q += 1;
                }
                if m > 2 && (m as f64) < z {
                    ok = false;
                }
                assert_eq!(coprime_to_pz(n, z), ok, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn psi_examples() {
        let expect = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((chebyshev_psi(10.0).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 7.83201).abs() < 1e-5);
        assert!((chebyshev_psi(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(chebyshev_psi(1.5).is_err());
    }

    #[test]
    fn residue_partition() {
        let total = chebyshev_psi(100.0).unwrap();
        let parts: f64 = (0..6)
            .map(|l| chebyshev_psi_mod(ChebyshevQuery { y: 100.0, k: 6, l }).unwrap())
            .sum();
        assert!((parts - total).abs() < 1e-10 * total);
    }

    #[test]
    fn delta_error_domain() {
        assert!(delta_error(ChebyshevQuery { y: 100.0, k: 6, l: 2 }).is_err());
        let v = delta_error(ChebyshevQuery { y: 100.0, k: 6, l: 1 }).unwrap();
        let psi = chebyshev_psi_mod(ChebyshevQuery { y: 100.0, k: 6, l: 1 }).unwrap();
        assert!((v - (psi - 50.0)).abs() < 1e-12);
    }

    #[test]
    fn bv_degenerate_and_monotone() {
        let t = LambdaTable::new(0.0, 1000.0).unwrap();
        assert_eq!(bv_sum(1000.0, 2.9).unwrap(), bv_term(&t, 1000.0, 2));
        let mut prev = 0.0;
        for q in 2..30 {
            let v = bv_sum(1000.0, q as f64).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(bv_sum(5.0, 3.0).is_err());
    }

    #[test]
    fn attach_small_factors_lists_divisors() {
        let mut t = sieve_range(100.0, 200.0).unwrap();
        t.attach_small_factors(20.0);
        for i in 0..t.len() {
            let p = t.primes[i];
            let expect: Vec<u32> = odd_primes_below(20.0)
                .into_iter()
                .filter(|&q| (p + 2) % q as u64 == 0)
                .collect();
            assert_eq!(t.small_factors(i), expect.as_slice());
            assert_eq!(t.small_factors(i).is_empty(), coprime_to_pz(p + 2, 20.0));
        }
    }
}
