//! Named invariant suites, one per module, runnable from the command line.
//!
//! Every check is an exact identity or inequality (or a value pinned to a
//! stated tolerance). A failing check means a bug, never a statistical
//! fluke; the random trials are seeded.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{vaughan_decompose, vdc_check, PrimeSum, WeightMode};
use crate::gamma::{enumerate_solutions, gamma14_direct, gamma_direct, GammaContext};
use crate::kernel::{build_kernel, default_grid, verify_lemma1};
use crate::numeric::{e_dd, Dd};
use crate::params::{
    almost_prime_order, centered_target, default_delta_exp, default_xi, derive_instance, Overrides,
    S0_DEFAULT,
};
use crate::primes::{chebyshev_psi, omega_multiplicity, sieve_range};
use crate::sieve::{build_rosser, frak_values, sandwich_check, sieve_lower_f, sieve_upper_f, RosserWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Params,
    Primes,
    Kernel,
    Sieve,
    Expsum,
    Gamma,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Params,
        Suite::Primes,
        Suite::Kernel,
        Suite::Sieve,
        Suite::Expsum,
        Suite::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Params => "params",
            Suite::Primes => "primes",
            Suite::Kernel => "kernel",
            Suite::Sieve => "sieve",
            Suite::Expsum => "expsum",
            Suite::Gamma => "gamma",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown suite `{s}` (params, primes, kernel, sieve, expsum, gamma, all)")))
    }
}

/// A deliberate corruption used to prove the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// Set `λ⁺(1) = 0` in every weight table the sieve suite builds.
    Sandwich,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            suites: Suite::ALL.to_vec(),
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Outcome = Result<(bool, String)>;

struct Runner<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<Check>,
}

impl Runner<'_> {
    fn check(&mut self, suite: Suite, name: &'static str, f: impl FnOnce(&VerifyOptions) -> Outcome) {
        let (passed, detail) = f(self.opts).unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check {
            suite,
            name,
            passed,
            detail,
        });
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut suites = opts.suites.clone();
    suites.sort();
    suites.dedup();
    let mut r = Runner {
        opts,
        checks: Vec::new(),
    };
    for suite in suites {
        match suite {
            Suite::Params => params_suite(&mut r),
            Suite::Primes => primes_suite(&mut r),
            Suite::Kernel => kernel_suite(&mut r),
            Suite::Sieve => sieve_suite(&mut r),
            Suite::Expsum => expsum_suite(&mut r),
            Suite::Gamma => gamma_suite(&mut r),
        }
    }
    let passed = r.checks.iter().filter(|c| c.passed).count();
    VerifyReport {
        seed: opts.seed,
        fault: opts.fault,
        failed: r.checks.len() - passed,
        passed,
        checks: r.checks,
    }
}

/// 1000 points strictly inside `(1, 15/14)`.
pub fn order_grid() -> Vec<f64> {
    let hi = 15.0 / 14.0;
    (1..=1000).map(|i| 1.0 + (hi - 1.0) * i as f64 / 1001.0).collect()
}

fn params_suite(r: &mut Runner) {
    let s = Suite::Params;
    r.check(s, "almost-prime order formula", |_| {
        let mut worst = String::new();
        for c in order_grid() {
            let order = almost_prime_order(c)? as f64;
            let q = 369.0 / (180.0 - 168.0 * c);
            let eta = default_delta_exp(c) / S0_DEFAULT;
            if !(order <= q && q < order + 1.0 && (1.0 / eta).floor() <= order) {
                worst = format!("c = {c}: order {order}, 369/(180-168c) = {q}, 1/eta = {}", 1.0 / eta);
                break;
            }
        }
        Ok((worst.is_empty(), if worst.is_empty() { "1000 grid points".into() } else { worst }))
    });
    r.check(s, "order tends to 30 as c -> 1+", |_| {
        let o = almost_prime_order(1.0 + 1e-12)?;
        Ok((o == 30, format!("order(1 + 1e-12) = {o}")))
    });
    r.check(s, "xi(1.05)", |_| {
        let xi = default_xi(1.05);
        Ok(((xi - 0.3756).abs() < 1e-12, format!("xi = {xi}")))
    });
}

fn is_prime_trial(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn primes_suite(r: &mut Runner) {
    let s = Suite::Primes;
    r.check(s, "segmented sieve against trial division to 1e5", |_| {
        let t = sieve_range(1.0, 1e5)?;
        let expect: Vec<u64> = (2..=100_000).filter(|&n| is_prime_trial(n)).collect();
        Ok((t.primes == expect, format!("{} primes", t.primes.len())))
    });
    r.check(s, "Omega(p + 2) against factorization", |_| {
        let t = sieve_range(1e6, 1.01e6)?;
        let bad = (0..t.len())
            .filter(|&i| t.omega_p2[i] != omega_multiplicity(t.primes[i] + 2))
            .count();
        Ok((bad == 0, format!("{bad} mismatches over {} primes", t.len())))
    });
    r.check(s, "psi(10)", |_| {
        let psi = chebyshev_psi(10.0)?;
        Ok(((psi - 7.83201).abs() <= 1e-5, format!("psi(10) = {psi}")))
    });
}

fn kernel_suite(r: &mut Runner) {
    let s = Suite::Kernel;
    let grid = default_grid();
    r.check(s, "transform bound on the standard grid, r = 1..6", |_| {
        let mut detail = Vec::new();
        let mut ok = true;
        for rr in 1..=6 {
            let rep = verify_lemma1(&build_kernel(0.875, 0.125, rr)?, &grid);
            ok &= rep.within_bound;
            detail.push(format!("r={rr}: {:.6}", rep.max_ratio.unwrap_or(f64::NAN)));
        }
        Ok((ok, format!("max ratio {}", detail.join(", "))))
    });
    r.check(s, "mass equals transform at zero, r = 1..6", |_| {
        let mut worst: f64 = 0.0;
        for rr in 1..=6 {
            worst = worst.max(verify_lemma1(&build_kernel(0.875, 0.125, rr)?, &[]).mass_error);
        }
        Ok((worst <= 1e-8, format!("max |quad - Theta(0)| = {worst:e}")))
    });
    r.check(s, "plateau and support on a dense grid, r = 1..8", |_| {
        let mut bad = 0;
        for rr in 1..=8 {
            let k = build_kernel(0.875, 0.125, rr)?;
            for i in 0..10_000 {
                let y = -1.5 + 3.0 * i as f64 / 9_999.0;
                let t = k.theta(y);
                let inside = y.abs() <= k.a - k.d_k;
                let outside = y.abs() >= k.a + k.d_k;
                if (inside && t != 1.0) || (outside && t != 0.0) || !(0.0..=1.0).contains(&t) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{bad} violations")))
    });
}

/// Every squarefree `n | P(z)`, as products over subsets of the primes.
fn squarefree_divisors(primes: &[u32]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let n = out.len();
        for i in 0..n {
            out.push(out[i] * p as u64);
        }
    }
    out
}

fn weights_for(d: f64, z: f64, fault: Option<Fault>) -> Result<RosserWeights> {
    let mut w = build_rosser(d, z)?;
    if fault == Some(Fault::Sandwich) {
        w.inject_fault();
    }
    Ok(w)
}

/// The `(z, D)` grid with `z ∈ {30, 50}` and `D ∈ {z², z^2.5, z³}`.
pub fn sieve_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for z in [30.0f64, 50.0] {
        for e in [2.0, 2.5, 3.0] {
            out.push((z, z.powf(e)));
        }
    }
    out
}

fn sieve_suite(r: &mut Runner) {
    let s = Suite::Sieve;
    r.check(s, "sandwich for every squarefree n | P(z)", |o| {
        let mut cases = 0;
        let mut bad = Vec::new();
        for (z, d) in sieve_grid() {
            let w = weights_for(d, z, o.fault)?;
            for n in squarefree_divisors(&w.primes) {
                let (lo, mid, hi) = sandwich_check(&w, n)?;
                cases += 1;
                if !(lo <= mid && mid <= hi) && bad.len() < 3 {
                    bad.push(format!("z={z} D={d} n={n}: {lo} <= {mid} <= {hi} fails"));
                }
            }
        }
        Ok((bad.is_empty(), if bad.is_empty() { format!("{cases} cases") } else { bad.join("; ") }))
    });
    r.check(s, "N- <= P <= N+", |o| {
        let mut ok = true;
        let mut detail = Vec::new();
        for (z, d) in sieve_grid() {
            let sum = frak_values(&weights_for(d, z, o.fault)?);
            ok &= sum.sandwich_holds();
            detail.push(format!(
                "z={z} D={d:.0}: {:.6} <= {:.6} <= {:.6}",
                sum.frak_n_minus, sum.frak_p, sum.frak_n_plus
            ));
        }
        Ok((ok, detail.join("; ")))
    });
    r.check(s, "sieve functions at s0 = 2.95", |_| {
        let (big, small) = (sieve_upper_f(2.95)?, sieve_lower_f(2.95)?);
        let ok = (big - 1.20751).abs() <= 1e-4 && (small - 0.806408).abs() <= 1e-4 && 3.0 * small - 2.0 * big > 0.0;
        Ok((ok, format!("F = {big:.6}, f = {small:.6}, 3f - 2F = {:.6}", 3.0 * small - 2.0 * big)))
    });
}

fn expsum_suite(r: &mut Runner) {
    let s = Suite::Expsum;
    r.check(s, "Vaughan identity residual", |_| {
        let inst = derive_instance(1.05, 1e4, 1.0, &Overrides::new().with("x", 5000.0).with("mu", 0.4))?;
        let mut worst: f64 = 0.0;
        for x in [0.0, 0.1, 0.37, 2.5] {
            let v = vaughan_decompose(&inst, |n| e_dd(Dd::powf(n as f64, 1.05).mul_f64(x)))?;
            worst = worst.max(v.residual / v.lambda_mass);
        }
        Ok((worst <= 1e-9, format!("max relative residual {worst:e}")))
    });
    r.check(s, "van der Corput inequality, 1000 seeded trials", |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
        for trial in 0..1000 {
            let (lhs, rhs) = vdc_trial(&mut rng)?;
            if lhs > rhs * (1.0 + 1e-12) {
                return Ok((false, format!("trial {trial}: {lhs} > {rhs}")));
            }
        }
        Ok((true, format!("seed {}", o.seed)))
    });
    r.check(s, "prime sum conjugation symmetry", |_| {
        let inst = derive_instance(1.05, 1e4, 1.0, &Overrides::new().with("x", 3000.0))?;
        let t = sieve_range(inst.lower(), inst.x)?;
        let sum = PrimeSum::new(&inst, &t, WeightMode::Unsieved)?;
        let mut worst: f64 = 0.0;
        for x in [0.013, 0.5, 7.25] {
            worst = worst.max((sum.eval(-x) - sum.eval(x).conj()).norm());
        }
        Ok((worst == 0.0, format!("max |L(-x) - conj L(x)| = {worst:e}")))
    });
}

/// One van der Corput trial: a random complex sequence of length `1..=200`
/// with entries in the unit square and `H ∈ 1..=min(20, n)`.
pub fn vdc_trial(rng: &mut impl Rng) -> Result<(f64, f64)> {
    let n = rng.gen_range(1..=200usize);
    let h = rng.gen_range(1..=n.min(20));
    let seq: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    vdc_check(&seq, h)
}

/// Exhaustive `O(π³)` count of sieved solutions, for comparison with the
/// pair-loop enumeration.
pub fn brute_force_count(ctx: &GammaContext) -> u64 {
    let n = ctx.inst.n;
    let delta = ctx.inst.delta_width;
    let idx: Vec<usize> = (0..ctx.len()).filter(|&i| ctx.pass[i]).collect();
    let mut count = 0;
    for &i in &idx {
        for &j in &idx {
            for &k in &idx {
                let v = (ctx.pcf[i] + ctx.pcf[j] + ctx.pcf[k]) - n;
                if -delta < v && v < delta {
                    count += 1;
                }
            }
        }
    }
    count
}

fn gamma_suite(r: &mut Runner) {
    let s = Suite::Gamma;
    let make = || -> Result<GammaContext> {
        let c = 1.05;
        let x = 2000.0;
        let n = centered_target(c, x, 0.25f64.powf(1.0 / c));
        let ov = Overrides::new()
            .with("x", x)
            .with("delta", 3.0)
            .with("z", 10.0)
            .with("d", 100.0)
            .with("r", 4.0);
        GammaContext::new(&derive_instance(c, n, 1.0, &ov)?)
    };
    let ctx = match make() {
        Ok(ctx) => ctx,
        Err(e) => {
            r.check(s, "desk context", |_| Err(e));
            return;
        }
    };
    r.check(s, "chain G >= G' >= 3 G1 - 2 G4", |_| {
        let (g, gp) = gamma_direct(&ctx);
        let (g1, g4) = gamma14_direct(&ctx);
        let slack = 1e-12 * g.abs();
        let ok = g >= gp - slack && gp >= 3.0 * g1 - 2.0 * g4 - slack;
        Ok((ok, format!("G = {g}, G' = {gp}, 3G1 - 2G4 = {}", 3.0 * g1 - 2.0 * g4)))
    });
    r.check(s, "enumeration equals exhaustive triple loop", |_| {
        let fast = enumerate_solutions(&ctx, 0).count;
        let slow = brute_force_count(&ctx);
        Ok((fast == slow, format!("{fast} vs {slow}")))
    });
    r.check(s, "solutions exist => G > 0", |_| {
        let count = enumerate_solutions(&ctx, 0).count;
        let (g, _) = gamma_direct(&ctx);
        Ok((count == 0 || g > 0.0, format!("{count} solutions, G = {g}")))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let rep = run(&VerifyOptions::default());
        for c in &rep.checks {
            assert!(c.passed, "{} / {}: {}", c.suite.name(), c.name, c.detail);
        }
        assert!(rep.checks.len() >= 15);
    }

    #[test]
    fn fault_is_caught() {
        let rep = run(&VerifyOptions {
            suites: vec![Suite::Sieve],
            seed: 0,
            fault: Some(Fault::Sandwich),
        });
        assert!(!rep.all_passed());
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"sandwich for every squarefree n | P(z)"), "{failed:?}");
    }

    #[test]
    fn single_suite() {
        let rep = run(&VerifyOptions {
            suites: vec![Suite::Kernel],
            ..VerifyOptions::default()
        });
        assert!(rep.checks.iter().all(|c| c.suite == Suite::Kernel));
        assert_eq!(rep.checks.len(), 3);
    }
}
