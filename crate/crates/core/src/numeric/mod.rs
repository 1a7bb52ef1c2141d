//! Numerical building blocks shared by the analytic modules.

pub mod dd;
pub mod quad;
pub mod sum;

use num_complex::Complex64;

pub use dd::Dd;

/// `e(t) = exp(2 pi i t)` for a phase already reduced to a small range.
#[inline]
pub fn e_small(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `e(t)` for a phase held in double-double; the integer part is discarded
/// exactly before the trigonometric call.
#[inline]
pub fn e_dd(t: Dd) -> Complex64 {
    e_small(t.frac_centered())
}

/// `e(x * y)` with the product formed exactly.
#[inline]
pub fn e_prod(x: f64, y: f64) -> Complex64 {
    e_dd(Dd::from_prod(x, y))
}

/// `sin(u)/u`, with the two-term series where the quotient loses digits.
#[inline]
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1.0 / 67_108_864.0 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}
