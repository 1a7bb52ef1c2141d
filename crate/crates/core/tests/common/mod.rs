//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the library routine it is used to check.

#![allow(dead_code)]

use pslab::gamma::GammaContext;
use pslab::params::{centered_target, derive_instance, Overrides, ProblemInstance};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Odd primes below `z`, by trial division.
pub fn odd_primes_below(z: f64) -> Vec<u64> {
    (3..).take_while(|&p| (p as f64) < z).filter(|&p| is_prime(p)).collect()
}

/// `(p + 2, P(z)) = 1` by trial division.
pub fn sieved(p: u64, z: f64) -> bool {
    odd_primes_below(z).iter().all(|&q| (p + 2) % q != 0)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre over sorted breakpoints, each piece split `sub` ways.
pub fn gl_integrate(f: impl Fn(f64) -> f64, breaks: &[f64], rule: &[(f64, f64)], sub: usize) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        for s in 0..sub {
            let lo = a + (b - a) * s as f64 / sub as f64;
            let hi = a + (b - a) * (s + 1) as f64 / sub as f64;
            let (m, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            total += h * rule.iter().map(|&(x, wt)| wt * f(m + h * x)).sum::<f64>();
        }
    }
    total
}

fn sorted_within(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.push(lo);
    v.push(hi);
    v.retain(|x| (lo..=hi).contains(x));
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// The smoothed volume `∫∫∫_{[μX, X]³} θ(t₁^c + t₂^c + t₃^c − N) dt`, with
/// `u = t^c` so that it becomes `∫ θ(s − N) ρ(s) ds`, `ρ = g * g * g`,
/// `g(u) = u^{1/c − 1}/c` on `[A, B]`.
pub fn smoothed_volume(inst: &ProblemInstance, theta: impl Fn(f64) -> f64, knots: &[f64]) -> f64 {
    let c = inst.c;
    let (a, b) = (inst.lower().powf(c), inst.x.powf(c));
    let g = |u: f64| u.powf(1.0 / c - 1.0) / c;
    let rule = gauss_legendre(20);
    // ρ(s) = ∫ g(u₁) ∫ g(u₂) g(s − u₁ − u₂) du₂ du₁.
    let rho = |s: f64| {
        let inner = |u1: f64| {
            let lo = a.max(s - u1 - b);
            let hi = b.min(s - u1 - a);
            if hi <= lo {
                return 0.0;
            }
            gl_integrate(|u2| g(u2) * g(s - u1 - u2), &[lo, hi], &rule, 2)
        };
        let breaks = sorted_within(vec![s - 2.0 * a, s - a - b, s - 2.0 * b], a, b);
        gl_integrate(|u1| g(u1) * inner(u1), &breaks, &rule, 6)
    };
    let n = inst.n;
    gl_integrate(|v| theta(v) * rho(n + v), knots, &gauss_legendre(12), 1)
}

/// All ordered sieved triples with `|p₁^c + p₂^c + p₃^c − N| < Δ`, by a
/// plain triple loop over trial-division primes.
pub fn brute_solutions(inst: &ProblemInstance) -> Vec<(u64, u64, u64)> {
    let lo = inst.lower().floor() as u64;
    let hi = inst.x.floor() as u64;
    let ps: Vec<(u64, f64)> = (lo + 1..=hi)
        .filter(|&p| is_prime(p) && sieved(p, inst.z))
        .map(|p| (p, (p as f64).powf(inst.c)))
        .collect();
    let mut out = Vec::new();
    for &(p1, a) in &ps {
        for &(p2, b) in &ps {
            for &(p3, c) in &ps {
                if (a + b + c - inst.n).abs() < inst.delta_width {
                    out.push((p1, p2, p3));
                }
            }
        }
    }
    out
}

/// `c = 1.05`, `μ = (1/4)^{1/c}`, centered `N`, and the given overrides.
pub fn centered(x: f64, delta: f64, z: f64, d: f64, r: u32) -> ProblemInstance {
    let c = 1.05;
    let mu = 0.25f64.powf(1.0 / c);
    let ov = Overrides::new()
        .with("x", x)
        .with("delta", delta)
        .with("z", z)
        .with("d", d)
        .with("r", r as f64)
        .with("force", 1.0);
    derive_instance(c, centered_target(c, x, mu), 1.0, &ov).unwrap()
}

/// The desk instance: `X = 10⁴`, `Δ = 0.1`, `z = 20`, `D = 400`.
pub fn desk(r: Option<u32>) -> ProblemInstance {
    let c = 1.05;
    let x = 1e4;
    let mu = 0.25f64.powf(1.0 / c);
    let mut ov = Overrides::new()
        .with("x", x)
        .with("delta", 0.1)
        .with("z", 20.0)
        .with("d", 400.0);
    if let Some(r) = r {
        ov = ov.with("r", r as f64);
    }
    derive_instance(c, centered_target(c, x, mu), 1.0, &ov).unwrap()
}

pub fn context(inst: &ProblemInstance) -> GammaContext {
    GammaContext::new(inst).unwrap()
}
