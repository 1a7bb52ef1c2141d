//! Fourier-side evaluation of the smoothed triple sums.
//!
//! For a weight triple the smoothed sum equals
//!
//! ```text
//! ∫ Θ(x) L₁(x) L₂(x) L₃(x) e(−Nx) dx,
//! ```
//!
//! the transform of a measure carried by the offsets
//! `v = p₁^c + p₂^c + p₃^c − N`, which all lie in a known bounded interval
//! `[v_min, v_max]` (widened by the kernel support). By Poisson summation
//! the trapezoid rule with step `h` is exact for such integrands as soon as
//! `1/h > max(−v_min, v_max)`: every alias `m/h`, `m ≠ 0`, falls outside the
//! support. The only error left is truncation at `|x| = x_cut`, which the
//! kernel's envelope bounds rigorously, and rounding.
//!
//! Sums over nodes `x_k = kh` are evaluated in blocks. Each block starts from
//! phases `e(k₀ h p^c)` formed in double-double and advances them by the
//! fixed rotation `e(h p^c)`, so the inner loop is a complex multiply-add
//! per prime.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::GammaContext;
use crate::error::Result;
use crate::expsum::IntegralEval;
use crate::kernel::SmoothingKernel;
use crate::numeric::quad::{integrate, QuadOptions};
use crate::numeric::sum::{pairwise, Neumaier};
use crate::numeric::{e_dd, Dd};
use crate::params::ProblemInstance;

/// Controls for the Fourier-side integrals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FourierSettings {
    /// Outer cut; chosen from `tol` when absent.
    pub x_cut: Option<f64>,
    /// Target truncation error relative to `Δ X^{3−c}`.
    pub tol: f64,
    /// Nodes per rotation block.
    pub block: usize,
}

impl Default for FourierSettings {
    fn default() -> Self {
        FourierSettings {
            x_cut: None,
            tol: 1e-6,
            block: 2048,
        }
    }
}

/// One Fourier-side triple sum split at `|x| = τ`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FourierParts {
    /// Integral over `|x| < τ`.
    pub inner: f64,
    /// Integral over `τ ≤ |x| ≤ x_cut`.
    pub outer: f64,
    pub total: f64,
    /// `X³ (r / (Δ x_cut))^r`, the heuristic size of the discarded tail.
    pub tail_estimate: f64,
    /// Rigorous bound on the discarded tail.
    pub tail_bound: f64,
    /// `tail_bound` plus rounding and inner-quadrature estimates.
    pub quad_error: f64,
    pub x_cut: f64,
    pub tau: f64,
    pub step: f64,
    pub nodes: usize,
}

/// Trapezoid step that makes the rule exact for offsets in
/// `[3(μX)^c − N − s, 3X^c − N + s]`.
pub fn choose_step(inst: &ProblemInstance, support: f64) -> f64 {
    let a = inst.lower().powf(inst.c);
    let b = inst.x.powf(inst.c);
    let vmin = 3.0 * a - inst.n - support;
    let vmax = 3.0 * b - inst.n + support;
    1.0 / (1.25 * vmin.abs().max(vmax.abs()).max(1.0))
}

/// `X³ (r / (Δ x_cut))^r`, evaluated in logs.
fn spec_tail(inst: &ProblemInstance, r: u32, x_cut: f64) -> f64 {
    let r = r as f64;
    (3.0 * inst.x.ln() + r * (r / (inst.delta_width * x_cut)).ln()).exp()
}

struct Engine<'a> {
    kernel: &'a SmoothingKernel,
    /// `h p^c`, padded to a multiple of four.
    pch: Vec<Dd>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    /// `N h`.
    nh: Dd,
    h: f64,
}

/// Per-block sums: weighted `Re F₁`, `Re F₄` and their absolute values.
type BlockSums = [f64; 4];

impl Engine<'_> {
    fn block(&self, k0: usize, k1: usize) -> BlockSums {
        let n = self.pch.len();
        let mut zr = vec![0.0; n];
        let mut zi = vec![0.0; n];
        let mut cr = vec![0.0; n];
        let mut ci = vec![0.0; n];
        for i in 0..n {
            let z = e_dd(self.pch[i].mul_f64(k0 as f64));
            let c = e_dd(self.pch[i]);
            (zr[i], zi[i], cr[i], ci[i]) = (z.re, z.im, c.re, c.im);
        }
        let mut acc: [Neumaier<f64>; 4] = Default::default();
        for k in k0..k1 {
            let mut pr = [0.0f64; 4];
            let mut pi = [0.0f64; 4];
            let mut mr = [0.0f64; 4];
            let mut mi = [0.0f64; 4];
            for base in (0..n).step_by(4) {
                for l in 0..4 {
                    let i = base + l;
                    let (a, b) = (zr[i], zi[i]);
                    pr[l] += self.plus[i] * a;
                    pi[l] += self.plus[i] * b;
                    mr[l] += self.minus[i] * a;
                    mi[l] += self.minus[i] * b;
                    zr[i] = a * cr[i] - b * ci[i];
                    zi[i] = a * ci[i] + b * cr[i];
                }
            }
            let lp = Complex64::new(pairwise(&pr), pairwise(&pi));
            let lm = Complex64::new(pairwise(&mr), pairwise(&mi));
            let x = k as f64 * self.h;
            let rot = e_dd(self.nh.mul_f64(k as f64)).conj() * self.kernel.theta_hat(x);
            let lp2 = lp * lp;
            let f1 = lm * lp2 * rot;
            let f4 = lp * lp2 * rot;
            let w = if k == 0 { 1.0 } else { 2.0 };
            acc[0].add(w * f1.re);
            acc[1].add(w * f4.re);
            acc[2].add(w * f1.norm());
            acc[3].add(w * f4.norm());
        }
        [acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value()]
    }

    /// `L⁺(x)` and `L⁻(x)` with phases formed directly.
    fn sums_at(&self, pc: &[Dd], x: f64) -> (Complex64, Complex64) {
        let (mut p, mut m) = (Neumaier::new(), Neumaier::new());
        for (i, d) in pc.iter().enumerate() {
            if self.plus[i] == 0.0 && self.minus[i] == 0.0 {
                continue;
            }
            let e = e_dd(d.mul_f64(x));
            p.add(e * self.plus[i]);
            m.add(e * self.minus[i]);
        }
        (p.value(), m.value())
    }
}

/// `(Γ₁, Γ₄)` on the Fourier side, each split at `|x| = τ`.
pub fn gamma1_fourier(ctx: &GammaContext, settings: &FourierSettings) -> Result<(FourierParts, FourierParts)> {
    let inst = &ctx.inst;
    let kernel = &ctx.kernel;
    let w_plus = ctx.table.w_plus.as_ref().expect("weights collapsed");
    let w_minus = ctx.table.w_minus.as_ref().expect("weights collapsed");

    // Keep primes with any nonzero weight, padded to a multiple of four.
    let keep: Vec<usize> = (0..ctx.len())
        .filter(|&i| w_plus[i] != 0 || w_minus[i] != 0)
        .collect();
    let h = choose_step(inst, kernel.support());
    let mut pc: Vec<Dd> = keep.iter().map(|&i| ctx.pc[i]).collect();
    let mut plus: Vec<f64> = keep.iter().map(|&i| w_plus[i] as f64 * ctx.table.logp[i]).collect();
    let mut minus: Vec<f64> = keep.iter().map(|&i| w_minus[i] as f64 * ctx.table.logp[i]).collect();
    while pc.len() % 4 != 0 {
        pc.push(Dd::ZERO);
        plus.push(0.0);
        minus.push(0.0);
    }
    let engine = Engine {
        kernel,
        pch: pc.iter().map(|d| *d * Dd::from_f64(h)).collect(),
        plus,
        minus,
        nh: Dd::from_prod(inst.n, h),
        h,
    };

    let mass_plus: f64 = engine.plus.iter().map(|v| v.abs()).sum();
    let mass_minus: f64 = engine.minus.iter().map(|v| v.abs()).sum();
    let scale = inst.delta_width * inst.x.powf(3.0 - inst.c);
    let x_cut = settings.x_cut.unwrap_or_else(|| {
        let worst = mass_plus.powi(3).max(mass_minus * mass_plus * mass_plus).max(f64::MIN_POSITIVE);
        kernel.cutoff_for(settings.tol * scale / worst)
    });
    let x_cut = x_cut.max(inst.tau);
    let k_max = (x_cut / h).floor() as usize;
    let block = settings.block.max(1);
    let nblocks = (k_max + 1).div_ceil(block);
    let parts: Vec<BlockSums> = (0..nblocks)
        .into_par_iter()
        .map(|b| engine.block(b * block, ((b + 1) * block).min(k_max + 1)))
        .collect();
    let column = |c: usize| h * pairwise(&parts.iter().map(|p| p[c]).collect::<Vec<_>>());
    let (total1, total4, abs1, abs4) = (column(0), column(1), column(2), column(3));

    // Inner piece |x| < τ by adaptive quadrature on [0, τ]; the integrand
    // carries Γ₁ in the real part and Γ₄ in the imaginary part.
    let inner_f = |x: f64| {
        let (lp, lm) = engine.sums_at(&pc, x);
        let rot = e_dd(Dd::from_prod(inst.n, x)).conj() * kernel.theta_hat(x);
        let lp2 = lp * lp;
        Complex64::new(2.0 * (lm * lp2 * rot).re, 2.0 * (lp * lp2 * rot).re)
    };
    let opts = QuadOptions {
        abs_tol: 1e-12 * scale,
        rel_tol: 1e-12,
        max_panels: 20_000,
    };
    let breaks = crate::numeric::quad::uniform_breaks(0.0, inst.tau, 16);
    let inner = integrate(inner_f, &breaks, opts)?;

    // h Σ_{k>K} env(kh) ≤ ∫_{Kh}^∞ env for the monotone envelope.
    let tail_mass = kernel.tail_mass(k_max as f64 * h);
    let rounding = |abs: f64| abs * f64::EPSILON * (block + engine.pch.len()) as f64;
    let make = |total: f64, inner_v: f64, abs: f64, mass3: f64| {
        let tail_bound = tail_mass * mass3;
        FourierParts {
            inner: inner_v,
            outer: total - inner_v,
            total,
            tail_estimate: spec_tail(inst, kernel.r, x_cut),
            tail_bound,
            quad_error: tail_bound + rounding(abs) + inner.error,
            x_cut,
            tau: inst.tau,
            step: h,
            nodes: k_max + 1,
        }
    };
    Ok((
        make(total1, inner.value.re, abs1, mass_minus * mass_plus * mass_plus),
        make(total4, inner.value.im, abs4, mass_plus.powi(3)),
    ))
}

/// The singular integral `𝔍 = ∫ Θ(x) e(−Nx) I(x)³ dx`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrakI {
    pub value: f64,
    /// `𝔍 / (Δ X^{3−c})`.
    pub ratio: f64,
    pub tail_bound: f64,
    pub quad_error: f64,
    pub x_cut: f64,
    pub step: f64,
    pub nodes: usize,
}

pub fn frak_i(inst: &ProblemInstance, kernel: &SmoothingKernel, settings: &FourierSettings) -> Result<FrakI> {
    let h = choose_step(inst, kernel.support());
    let length = inst.x - inst.lower();
    let scale = inst.delta_width * inst.x.powf(3.0 - inst.c);
    let x_cut = settings
        .x_cut
        .unwrap_or_else(|| kernel.cutoff_for(settings.tol * scale / length.powi(3)));
    let k_max = (x_cut / h).floor() as usize;
    let nh = Dd::from_prod(inst.n, h);
    let eval = IntegralEval::new(inst);
    let node = |k: usize| -> Result<(f64, f64)> {
        let x = k as f64 * h;
        let i = eval.value(x)?;
        let f = e_dd(nh.mul_f64(k as f64)).conj() * (i * i * i) * kernel.theta_hat(x);
        let w = if k == 0 { 1.0 } else { 2.0 };
        Ok((w * f.re, w * f.norm()))
    };
    // Surface the first failing node, if any, before summing.
    let chunk = 1024;
    let partials: Vec<Result<(f64, f64)>> = (0..(k_max + 1).div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = Neumaier::new();
            let mut abs = Neumaier::new();
            for k in c * chunk..((c + 1) * chunk).min(k_max + 1) {
                let (v, a) = node(k)?;
                acc.add(v);
                abs.add(a);
            }
            Ok((acc.value(), abs.value()))
        })
        .collect();
    let partials: Vec<(f64, f64)> = partials.into_iter().collect::<Result<_>>()?;
    let value = h * pairwise(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
    let abs = h * pairwise(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
    let tail_bound = kernel.tail_mass(k_max as f64 * h) * length.powi(3);
    Ok(FrakI {
        value,
        ratio: value / scale,
        tail_bound,
        quad_error: tail_bound + abs * 1e-12,
        x_cut,
        step: h,
        nodes: k_max + 1,
    })
}

/// `(𝔍, 𝔑⁻ (𝔑⁺)² 𝔍)`.
pub fn main_term(ctx: &GammaContext, settings: &FourierSettings) -> Result<(FrakI, f64)> {
    let fi = frak_i(&ctx.inst, &ctx.kernel, settings)?;
    let s = &ctx.summary;
    Ok((fi, s.frak_n_minus * s.frak_n_plus * s.frak_n_plus * fi.value))
}
