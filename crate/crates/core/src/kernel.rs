//! The smoothing kernel θ and its Fourier transform Θ.
//!
//! θ is the indicator of `[-a, a]` convolved with the `r`-fold convolution of
//! the uniform density on `[-h, h]`, `h = d_k / r`. It equals 1 on
//! `|y| ≤ a - d_k`, vanishes for `|y| ≥ a + d_k` and is `C^{r-1}`. Its
//! transform is a product of sinc factors:
//!
//! ```text
//! Θ(x) = 2a · sinc(2πax) · sinc(2πhx)^r
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::sinc;

/// Largest supported smoothness order.
pub const MAX_R: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingKernel {
    pub a: f64,
    pub d_k: f64,
    pub r: u32,
}

pub fn build_kernel(a: f64, d_k: f64, r: u32) -> Result<SmoothingKernel> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("kernel half-width a = {a} must be positive")));
    }
    if !(d_k > 0.0 && d_k < a / 4.0) {
        return Err(Error::domain(format!("need 0 < d_k < a/4, got d_k = {d_k}, a = {a}")));
    }
    if !(1..=MAX_R).contains(&r) {
        return Err(Error::domain(format!("smoothness order r = {r} not in 1..={MAX_R}")));
    }
    Ok(SmoothingKernel { a, d_k, r })
}

/// Cumulative distribution of the Irwin–Hall law of order `r` at `t`.
///
/// Uses `P(V ≤ t) = Σ_i M_{r+1}(t - i)` with `M_k` the cardinal B-spline of
/// order `k`, evaluated by the positive-term triangle recursion. Accurate to
/// a few ulps whenever the result is at most one half.
fn irwin_hall_cdf(r: u32, t: f64) -> f64 {
    let k_max = r as usize + 1;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= r as f64 {
        return 1.0;
    }
    let m = t.floor();
    let u = t - m;
    let m = m as usize;
    // vals[i] = M_k(u + i) for i < k.
    let mut vals = [0.0f64; MAX_R as usize + 2];
    vals[0] = 1.0;
    for k in 2..=k_max {
        let kf = k as f64;
        for i in (0..k).rev() {
            let x = u + i as f64;
            let left = if i > 0 { vals[i - 1] } else { 0.0 };
            vals[i] = (x * vals[i] + (kf - x) * left) / (kf - 1.0);
        }
    }
    vals[..k_max.min(m + 1)].iter().sum()
}

impl SmoothingKernel {
    /// Width `h = d_k / r` of each convolved box.
    pub fn h(&self) -> f64 {
        self.d_k / self.r as f64
    }

    /// θ vanishes outside `[-support, support]`.
    pub fn support(&self) -> f64 {
        self.a + self.d_k
    }

    /// Cumulative function Φ of the smoothing density.
    fn phi(&self, s: f64) -> f64 {
        let t = |s: f64| (s + self.d_k) / (2.0 * self.h());
        if s > 0.0 {
            1.0 - irwin_hall_cdf(self.r, t(-s))
        } else {
            irwin_hall_cdf(self.r, t(s))
        }
    }

    pub fn theta(&self, y: f64) -> f64 {
        self.phi(self.a - y.abs())
    }

    pub fn theta_hat(&self, x: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        2.0 * self.a * sinc(two_pi * self.a * x) * sinc(two_pi * self.h() * x).powi(self.r as i32)
    }

    /// `ln |Θ(x)|`, finite wherever Θ is nonzero even if Θ underflows.
    pub fn log_abs_theta_hat(&self, x: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        (2.0 * self.a).ln()
            + sinc(two_pi * self.a * x).abs().ln()
            + self.r as f64 * sinc(two_pi * self.h() * x).abs().ln()
    }

    /// `ln min(2a, |x|^{-1} (r / (|x| d_k))^r)`.
    pub fn log_bound(&self, x: f64) -> f64 {
        let cap = (2.0 * self.a).ln();
        let ax = x.abs();
        if ax == 0.0 {
            return cap;
        }
        let r = self.r as f64;
        let decay = -ax.ln() + r * (r.ln() - ax.ln() - self.d_k.ln());
        cap.min(decay)
    }

    /// `min(2a, |x|^{-1} (r / (|x| d_k))^r)`.
    pub fn bound(&self, x: f64) -> f64 {
        self.log_bound(x).exp()
    }

    /// Monotone majorant of `|Θ|` on `x > 0`.
    fn envelope(&self, x: f64) -> f64 {
        let u = 2.0 * std::f64::consts::PI * self.h() * x;
        let s = if u <= std::f64::consts::FRAC_PI_2 { sinc(u) } else { 1.0 / u };
        (2.0 * self.a).min(1.0 / (std::f64::consts::PI * x)) * s.powi(self.r as i32)
    }

    /// Rigorous upper bound on `∫_{|x| > x_cut} |Θ(x)| dx`.
    pub fn tail_mass(&self, x_cut: f64) -> f64 {
        let x_cut = x_cut.abs();
        let r = self.r as f64;
        // Beyond x1 the envelope is (πx)^{-1} (2πhx)^{-r}, integrable in closed form.
        let x1 = 1.0 / (4.0 * self.h());
        let closed = |x: f64| {
            2.0 / (std::f64::consts::PI * r)
                * (1.0 / (2.0 * std::f64::consts::PI * self.h() * x)).powf(r)
        };
        if x_cut >= x1 {
            return closed(x_cut);
        }
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_panels: 10_000,
        };
        let lo = x_cut.max(f64::MIN_POSITIVE);
        let numeric = integrate(|x| self.envelope(x), &[lo, x1], opts)
            .map(|q| q.value + q.error)
            .unwrap_or(2.0 * self.a * (x1 - lo));
        2.0 * numeric + closed(x1)
    }

    /// Smallest `x_cut` (to bisection accuracy) with `tail_mass(x_cut) ≤ eps`.
    pub fn cutoff_for(&self, eps: f64) -> f64 {
        assert!(eps > 0.0, "tail tolerance must be positive");
        let mut hi = 1.0 / (4.0 * self.h());
        while self.tail_mass(hi) > eps {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Breakpoints of the piecewise-polynomial θ on its support.
    pub fn knots(&self) -> Vec<f64> {
        let step = 2.0 * self.h();
        let half: Vec<f64> = (0..=self.r)
            .map(|j| self.a - self.d_k + step * j as f64)
            .collect();
        let mut k: Vec<f64> = half.iter().rev().map(|v| -v).collect();
        k.extend(half);
        k
    }
}

/// Outcome of checking `|Θ(x)| ≤ bound(x)` on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub kernel: SmoothingKernel,
    pub points: usize,
    /// `max |Θ| / bound`, `None` for an empty grid.
    pub max_ratio: Option<f64>,
    pub argmax: Option<f64>,
    pub within_bound: bool,
    /// Adaptive quadrature of θ over its support.
    pub quad_mass: f64,
    /// `|quad_mass - Θ(0)|`.
    pub mass_error: f64,
}

pub fn verify_lemma1(k: &SmoothingKernel, grid: &[f64]) -> Lemma1Report {
    let mut max_ratio: Option<f64> = None;
    let mut argmax = None;
    for &x in grid {
        let ratio = (k.log_abs_theta_hat(x) - k.log_bound(x)).exp();
        if max_ratio.map_or(true, |m| ratio > m) {
            max_ratio = Some(ratio);
            argmax = Some(x);
        }
    }
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-14,
        ..QuadOptions::default()
    };
    let quad_mass = integrate(|y| k.theta(y), &k.knots(), opts)
        .map(|q| q.value)
        .unwrap_or(f64::NAN);
    Lemma1Report {
        kernel: *k,
        points: grid.len(),
        max_ratio,
        argmax,
        within_bound: max_ratio.map_or(true, |m| m <= 1.0),
        quad_mass,
        mass_error: (quad_mass - k.theta_hat(0.0)).abs(),
    }
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// The default transform-bound grid: 10⁴ log-spaced points on `[10⁻³, 10⁶]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 10_000)
}
