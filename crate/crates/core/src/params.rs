//! Problem parameters.
//!
//! Everything downstream is a function of the exponent `c`, the target `N`
//! and the log-power `E`. The asymptotic choices
//!
//! ```text
//! Δ = (log N)^-E     X = N^(1/c)     z = X^η     D = X^δ     τ = X^(ξ-c)
//! r = [(log X)^2]    Ξ = (log X)^(E+3)
//! ξ = (459c - 435)/125     δ = (180 - 168c)/125     η = δ / 2.95
//! ```
//!
//! are the defaults. At desk scale `(log N)^-E` is not small and `z`, `D`
//! collapse to single digits, so most fields can be overridden; the instance
//! remembers which ones were.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Ratio `δ/η` used for the default sieve limit.
pub const S0_DEFAULT: f64 = 2.95;

/// Kernel smoothness is clamped here; beyond it the sinc-product transform
/// underflows long before the bound it is compared with.
pub const R_CLAMP: u32 = 64;

/// Keys accepted by [`Overrides`].
pub const OVERRIDE_KEYS: &[&str] = &[
    "delta", "mu", "x", "z", "d", "tau", "xi_cap", "r", "eta", "xi", "delta_exp", "test_mode",
    "force",
];

/// User-supplied replacements for derived parameters, keyed by the names in
/// [`OVERRIDE_KEYS`]. `test_mode` and `force` are flags (nonzero = set).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Overrides(BTreeMap<String, f64>);

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !OVERRIDE_KEYS.contains(&key) {
            return Err(Error::Usage(format!(
                "unknown override key `{key}` (expected one of {})",
                OVERRIDE_KEYS.join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(Error::Usage(format!("override `{key}` must be finite")));
        }
        self.0.insert(key.to_string(), value);
        Ok(())
    }

    /// Builder form of [`set`](Self::set); panics on an unknown key.
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.set(key, value).expect("valid override key");
        self
    }

    /// Parse `key=value`.
    pub fn parse_assignment(&mut self, text: &str) -> Result<()> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{text}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("override `{text}`: value is not a number")))?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    fn flag(&self, key: &str) -> bool {
        self.get(key).is_some_and(|v| v != 0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// A fully derived problem instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemInstance {
    pub c: f64,
    pub n: f64,
    pub e_power: f64,
    /// Δ, the half-width of the target window.
    pub delta_width: f64,
    pub x: f64,
    pub mu: f64,
    pub xi: f64,
    pub delta_exp: f64,
    pub eta: f64,
    /// Sieve limit; `P(z)` is the product of the odd primes below it.
    pub z: f64,
    /// Sieve level.
    pub d_level: f64,
    pub tau: f64,
    /// `[(log X)^2]` before clamping.
    pub r_smooth: u32,
    /// Smoothness actually used by the kernel, `min(r_smooth, 64)` unless overridden.
    pub r_kernel: u32,
    pub r_clamped: bool,
    /// Ξ, the outer cut of the Fourier integral.
    pub xi_cap: f64,
    /// `log D / log z`; equals δ/η when neither z nor D is overridden.
    pub s0: f64,
    pub test_mode: bool,
    pub force: bool,
    pub overrides: Overrides,
}

/// A violated constraint with both sides of the inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub message: String,
}

/// Default `ξ = (459c − 435)/125`.
pub fn default_xi(c: f64) -> f64 {
    (459.0 * c - 435.0) / 125.0
}

/// Default `δ = (180 − 168c)/125`.
pub fn default_delta_exp(c: f64) -> f64 {
    (180.0 - 168.0 * c) / 125.0
}

/// Default `μ = (1/4)^(1/c)`, so that `3μ^c = 3/4`.
pub fn default_mu(c: f64) -> f64 {
    0.25f64.powf(1.0 / c)
}

/// `N = X^c (1 + 3μ^c) / 2`, midway between `3(μX)^c` and `X^c`.
///
/// This sits in the lower part of the attainable range `[3(μX)^c, 3X^c]`,
/// so solutions have all three primes fairly small.
pub fn centered_target(c: f64, x: f64, mu: f64) -> f64 {
    x.powf(c) * (1.0 + 3.0 * mu.powf(c)) / 2.0
}

/// Derive an instance from `(c, N, E)` and overrides.
pub fn derive_instance(c: f64, n: f64, e_power: f64, ov: &Overrides) -> Result<ProblemInstance> {
    let test_mode = ov.flag("test_mode");
    let force = ov.flag("force");
    if !(c.is_finite() && n.is_finite() && e_power.is_finite()) {
        return Err(Error::domain("c, N and E must be finite"));
    }
    if n <= 1.0 {
        return Err(Error::domain(format!("N = {n} must exceed 1 (log N undefined)")));
    }
    if c <= 1.0 && !(test_mode && c > 0.0) {
        return Err(Error::domain(format!(
            "c = {c} must exceed 1 (set test_mode=1 to allow 0 < c <= 1)"
        )));
    }
    if e_power <= 0.0 {
        return Err(Error::domain(format!("E = {e_power} must be positive")));
    }

    let xi = ov.get("xi").unwrap_or_else(|| default_xi(c));
    let delta_exp = ov.get("delta_exp").unwrap_or_else(|| default_delta_exp(c));
    let eta = ov.get("eta").unwrap_or(delta_exp / S0_DEFAULT);
    let delta_width = ov.get("delta").unwrap_or_else(|| n.ln().powf(-e_power));
    let x = ov.get("x").unwrap_or_else(|| n.powf(1.0 / c));
    let mu = ov.get("mu").unwrap_or_else(|| default_mu(c));
    if x <= 1.0 {
        return Err(Error::domain(format!("X = {x} must exceed 1")));
    }
    if delta_width <= 0.0 {
        return Err(Error::domain(format!("Δ = {delta_width} must be positive")));
    }
    if !(mu > 0.0) {
        return Err(Error::domain(format!("μ = {mu} must be positive")));
    }
    let log_x = x.ln();
    let z = ov.get("z").unwrap_or_else(|| x.powf(eta));
    let d_level = ov.get("d").unwrap_or_else(|| x.powf(delta_exp));
    let tau = ov.get("tau").unwrap_or_else(|| x.powf(xi - c));
    let xi_cap = ov.get("xi_cap").unwrap_or_else(|| log_x.powf(e_power + 3.0));
    let r_smooth = (log_x * log_x).floor().max(1.0) as u32;
    let (r_kernel, r_clamped) = match ov.get("r") {
        Some(r) => {
            if !(1.0..=R_CLAMP as f64).contains(&r) || r.fract() != 0.0 {
                return Err(Error::domain(format!("r = {r} must be an integer in [1, {R_CLAMP}]")));
            }
            (r as u32, false)
        }
        None => (r_smooth.min(R_CLAMP), r_smooth > R_CLAMP),
    };

    let sieve_overridden = ov.get("z").is_some() || ov.get("d").is_some();
    if sieve_overridden && !force && !(z * z <= d_level && d_level <= z * z * z) {
        return Err(Error::InvalidParams(format!(
            "z^2 <= D <= z^3 violated by z = {z}, D = {d_level} (set force=1 to accept)"
        )));
    }

    Ok(ProblemInstance {
        c,
        n,
        e_power,
        delta_width,
        x,
        mu,
        xi,
        delta_exp,
        eta,
        z,
        d_level,
        tau,
        r_smooth,
        r_kernel,
        r_clamped,
        xi_cap,
        s0: d_level.ln() / z.ln(),
        test_mode,
        force,
        overrides: ov.clone(),
    })
}

impl ProblemInstance {
    /// Lower end `μX` of the prime range.
    pub fn lower(&self) -> f64 {
        self.mu * self.x
    }

    /// All constraint violations; empty iff the instance is admissible.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn used_defaults(&self) -> bool {
        self.overrides.is_empty()
    }
}

/// Check every admissibility condition and report each failure.
pub fn validate(inst: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |constraint, lhs: f64, rhs: f64, message: String| {
        out.push(Violation {
            constraint,
            lhs,
            rhs,
            message,
        })
    };
    if !inst.test_mode && !(inst.c > 1.0 && inst.c < 15.0 / 14.0) {
        push(
            "1 < c < 15/14",
            inst.c,
            15.0 / 14.0,
            format!("c={} not in (1, 15/14)", inst.c),
        );
    }
    if !inst.test_mode && inst.n < 100.0 {
        push("N >= 100", inst.n, 100.0, format!("N={} below 100", inst.n));
    }
    let lhs = inst.xi + 3.0 * inst.delta_exp;
    if !(lhs < 12.0 / 25.0) {
        push(
            "xi + 3 delta < 12/25",
            lhs,
            12.0 / 25.0,
            format!("ξ+3δ={lhs} not below 12/25"),
        );
    }
    let ratio = inst.delta_exp / inst.eta;
    if !(ratio > 2.0 && ratio < 3.0) {
        push(
            "2 < delta/eta < 3",
            ratio,
            if ratio <= 2.0 { 2.0 } else { 3.0 },
            format!("δ/η={ratio} not in (2,3)"),
        );
    }
    if !(inst.mu > 0.0 && inst.mu < 1.0) {
        push("0 < mu < 1", inst.mu, 1.0, format!("μ={} not in (0,1)", inst.mu));
    }
    let three_mu_c = 3.0 * inst.mu.powf(inst.c);
    if !(three_mu_c < 1.0) {
        push(
            "3 mu^c < 1",
            three_mu_c,
            1.0,
            format!("3μᶜ={three_mu_c} ≥ 1"),
        );
    }
    if !(inst.z > 1.0 && inst.d_level > 1.0) {
        push(
            "z > 1, D > 1",
            inst.z.min(inst.d_level),
            1.0,
            format!("z={} and D={} must both exceed 1", inst.z, inst.d_level),
        );
    }
    let z2 = inst.z * inst.z;
    if !(z2 <= inst.d_level && inst.d_level <= z2 * inst.z) {
        push(
            "z^2 <= D <= z^3",
            inst.d_level,
            if inst.d_level < z2 { z2 } else { z2 * inst.z },
            format!("D={} outside [z², z³] = [{}, {}]", inst.d_level, z2, z2 * inst.z),
        );
    }
    out
}

/// `[369 / (180 − 168c)]`, the almost-prime order guaranteed for `p + 2`.
pub fn almost_prime_order(c: f64) -> Result<u32> {
    if !(c > 1.0 && c < 15.0 / 14.0) {
        return Err(Error::domain(format!("c = {c} outside (1, 15/14)")));
    }
    Ok((369.0 / (180.0 - 168.0 * c)).floor() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults(c: f64, n: f64) -> ProblemInstance {
        derive_instance(c, n, 1.0, &Overrides::new()).unwrap()
    }

    #[test]
    fn exponents_at_c_105() {
        let inst = defaults(1.05, 1e9);
        // 459 * 1.05 = 481.95, so xi = 46.95 / 125.
        assert!((inst.xi - 0.3756).abs() < 1e-12);
        assert!((inst.delta_exp - 0.0288).abs() < 1e-12);
        assert!((inst.delta_exp / inst.eta - 2.95).abs() < 1e-12);
    }

    #[test]
    fn xi_plus_three_delta_simplifies() {
        for i in 1..200 {
            let c = 1.0 + (15.0 / 14.0 - 1.0) * i as f64 / 200.0;
            let lhs = default_xi(c) + 3.0 * default_delta_exp(c);
            assert!((lhs - (21.0 - 9.0 * c) / 25.0).abs() < 1e-12);
            assert!(lhs < 12.0 / 25.0);
        }
    }

    #[test]
    fn default_instance_is_valid() {
        assert!(defaults(1.05, 1e9).validate().is_empty());
    }

    #[test]
    fn eta_override_hits_ratio_boundary() {
        let d = default_delta_exp(1.05);
        let inst = derive_instance(1.05, 1e9, 1.0, &Overrides::new().with("eta", d / 2.0)).unwrap();
        let v = inst.validate();
        assert!(v.iter().any(|v| v.message == "δ/η=2 not in (2,3)"), "{v:?}");
    }

    #[test]
    fn large_mu_violates_attainability() {
        let inst = derive_instance(1.05, 1e9, 1.0, &Overrides::new().with("mu", 0.9)).unwrap();
        let v = inst.validate();
        let hit = v.iter().find(|v| v.constraint == "3 mu^c < 1").unwrap();
        assert!((hit.lhs - 3.0 * 0.9f64.powf(1.05)).abs() < 1e-15);
        assert!(hit.lhs > 2.6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(derive_instance(1.05, 1.0, 1.0, &Overrides::new()).is_err());
        assert!(derive_instance(1.05, 0.5, 1.0, &Overrides::new()).is_err());
        assert!(derive_instance(1.0, 1e9, 1.0, &Overrides::new()).is_err());
        assert!(derive_instance(1.05, 1e9, 0.0, &Overrides::new()).is_err());
        let bad_band = Overrides::new().with("z", 20.0).with("d", 100.0);
        assert!(matches!(
            derive_instance(1.05, 1e9, 1.0, &bad_band),
            Err(Error::InvalidParams(_))
        ));
        assert!(derive_instance(1.05, 1e9, 1.0, &bad_band.with("force", 1.0)).is_ok());
    }

    #[test]
    fn test_mode_allows_unit_exponent() {
        let ov = Overrides::new().with("test_mode", 1.0);
        let inst = derive_instance(1.0, 21.0, 1.0, &ov).unwrap();
        assert!(inst.test_mode);
        assert!(!inst.validate().iter().any(|v| v.constraint == "1 < c < 15/14"));
    }

    #[test]
    fn r_is_clamped_and_recorded() {
        let inst = defaults(1.05, 1e9);
        let lx = inst.x.ln();
        assert_eq!(inst.r_smooth, (lx * lx).floor() as u32);
        assert_eq!(inst.r_kernel, inst.r_smooth.min(R_CLAMP));
        assert_eq!(inst.r_clamped, inst.r_smooth > R_CLAMP);
        let big = defaults(1.05, 1e40);
        assert!(big.r_clamped && big.r_kernel == R_CLAMP);
    }

    #[test]
    fn almost_prime_order_examples() {
        assert_eq!(almost_prime_order(1.0 + 1e-12).unwrap(), 30);
        assert_eq!(almost_prime_order(1.01).unwrap(), 35);
        assert_eq!(almost_prime_order(1.05).unwrap(), 102);
        assert!(almost_prime_order(1.0).is_err());
        assert!(almost_prime_order(15.0 / 14.0).is_err());
    }

    #[test]
    fn unknown_override_key() {
        let mut ov = Overrides::new();
        assert!(ov.parse_assignment("bogus=1").is_err());
        assert!(ov.parse_assignment("z=abc").is_err());
        ov.parse_assignment(" z = 20 ").unwrap();
        assert_eq!(ov.get("z"), Some(20.0));
    }
}
