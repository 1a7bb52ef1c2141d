//! The oscillatory integral `I(x) = ∫_{μX}^{X} e(x t^c) dt`.
//!
//! With `u = t^c` it becomes `∫_A^B g(u) e(xu) du`, `g(u) = u^{1/c - 1}/c`,
//! whose phase is linear. Two evaluators are provided: panel-wise
//! Gauss–Kronrod with at least eight panels per period, and the endpoint
//! expansion obtained by repeated integration by parts, which is exact up to
//! a tiny remainder once `2π|x|A` is large.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::quad::{integrate, uniform_breaks, QuadOptions, QuadResult};
use crate::numeric::{e_dd, e_prod, Dd};
use crate::params::ProblemInstance;

/// Most panels [`i_integral`] will lay down.
const MAX_PANELS: usize = 1 << 22;

/// Below this value of `2π|x|A` the endpoint expansion is not used.
const ASYMPTOTIC_THRESHOLD: f64 = 40.0;

fn endpoints(inst: &ProblemInstance) -> (Dd, Dd) {
    (Dd::powf(inst.lower(), inst.c), Dd::powf(inst.x, inst.c))
}

/// Panel Gauss–Kronrod evaluation; the error estimate is at most
/// `tol · (X − μX)` on success.
pub fn i_integral(inst: &ProblemInstance, x: f64, tol: f64) -> Result<QuadResult<Complex64>> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    let length = inst.x - inst.lower();
    if x == 0.0 {
        return Ok(QuadResult {
            value: Complex64::new(length, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let (a, b) = endpoints(inst);
    let (a, b) = (a.to_f64(), b.to_f64());
    let periods = x.abs() * (b - a);
    let panels = (8.0 * periods).ceil().max(8.0);
    if panels > MAX_PANELS as f64 {
        return Err(Error::Capacity {
            what: "I(x) quadrature panels",
            requested: panels as u128,
            budget: MAX_PANELS as u128,
        });
    }
    let alpha = 1.0 / inst.c - 1.0;
    let c = inst.c;
    let g = move |u: f64| e_prod(x, u) * (u.powf(alpha) / c);
    let opts = QuadOptions {
        abs_tol: tol * length,
        rel_tol: 0.0,
        max_panels: 4 * panels as usize + 1024,
    };
    integrate(g, &uniform_breaks(a, b, panels as usize), opts)
}

/// `Σ_k (−1)^k g^{(k)}(u) / (2πix)^{k+1}` with its last retained term, or
/// `None` if the terms stop decreasing before reaching rounding level.
fn endpoint_series(alpha: f64, c: f64, u: f64, x: f64) -> Option<(Complex64, f64)> {
    let w = 2.0 * std::f64::consts::PI * x;
    let mut term = Complex64::new(0.0, -u.powf(alpha) / (c * w));
    let mut total = term;
    let step = Complex64::new(0.0, 1.0 / (w * u));
    for k in 0..200 {
        let next = term * step * (alpha - k as f64);
        let size = next.norm();
        if size <= 1e-18 * total.norm() {
            return Some((total + next, size));
        }
        if size >= term.norm() {
            return None;
        }
        total += next;
        term = next;
    }
    None
}

/// `I(x)` for one instance, with the endpoint powers computed once.
#[derive(Clone, Debug)]
pub struct IntegralEval {
    inst: ProblemInstance,
    a: Dd,
    b: Dd,
    alpha: f64,
}

impl IntegralEval {
    pub fn new(inst: &ProblemInstance) -> Self {
        let (a, b) = endpoints(inst);
        IntegralEval {
            inst: inst.clone(),
            a,
            b,
            alpha: 1.0 / inst.c - 1.0,
        }
    }

    /// Endpoint-expansion value with an error estimate, when valid.
    pub fn asymptotic(&self, x: f64) -> Option<(Complex64, f64)> {
        let (a, b) = (self.a.to_f64(), self.b.to_f64());
        if 2.0 * std::f64::consts::PI * x.abs() * a < ASYMPTOTIC_THRESHOLD {
            return None;
        }
        let (tb, eb) = endpoint_series(self.alpha, self.inst.c, b, x)?;
        let (ta, ea) = endpoint_series(self.alpha, self.inst.c, a, x)?;
        let value = e_dd(self.b.mul_f64(x)) * tb - e_dd(self.a.mul_f64(x)) * ta;
        Some((value, eb + ea))
    }

    /// The expansion when it converges, panel quadrature otherwise.
    pub fn value(&self, x: f64) -> Result<Complex64> {
        if let Some((v, _)) = self.asymptotic(x) {
            return Ok(v);
        }
        Ok(i_integral(&self.inst, x, 1e-13)?.value)
    }
}

/// Endpoint-expansion value of `I(x)` with an error estimate, when valid.
pub fn i_asymptotic(inst: &ProblemInstance, x: f64) -> Option<(Complex64, f64)> {
    IntegralEval::new(inst).asymptotic(x)
}

/// `I(x)` by whichever evaluator applies: the endpoint expansion when it
/// converges, panel quadrature otherwise.
pub fn i_value(inst: &ProblemInstance, x: f64) -> Result<Complex64> {
    IntegralEval::new(inst).value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_instance, Overrides};

    fn inst() -> ProblemInstance {
        let ov = Overrides::new().with("x", 10_000.0);
        derive_instance(1.05, 1e4, 1.0, &ov).unwrap()
    }

    #[test]
    fn zero_frequency() {
        let i = inst();
        let v = i_integral(&i, 0.0, 1e-10).unwrap();
        assert_eq!(v.value.re, i.x - i.lower());
    }

    #[test]
    fn small_frequency_matches_t_quadrature() {
        // Integrate directly in t as an independent route.
        let i = inst();
        let x = 1e-4;
        let f = |t: f64| crate::numeric::e_small(x * t.powf(i.c));
        let direct = integrate(f, &uniform_breaks(i.lower(), i.x, 64), QuadOptions::default()).unwrap();
        let v = i_integral(&i, x, 1e-12).unwrap();
        assert!((v.value - direct.value).norm() < 1e-8, "{} vs {}", v.value, direct.value);
    }

    #[test]
    fn expansion_matches_quadrature() {
        let i = inst();
        for &x in &[0.003, 0.05, -0.21, 1.3] {
            let (asy, err) = i_asymptotic(&i, x).expect("expansion applies");
            let q = i_integral(&i, x, 1e-13).unwrap();
            assert!((asy - q.value).norm() < 1e-8, "x={x}: {asy} vs {}", q.value);
            assert!(err < 1e-12);
        }
        assert!(i_asymptotic(&i, 1e-5).is_none());
    }

    #[test]
    fn bounded_and_conjugate() {
        let i = inst();
        let len = i.x - i.lower();
        for &x in &[1e-5, 3e-4, 0.02, 0.7] {
            let (a, b) = (i_value(&i, x).unwrap(), i_value(&i, -x).unwrap());
            assert!(a.norm() <= len);
            assert!((a - b.conj()).norm() < 1e-9);
        }
    }
}
