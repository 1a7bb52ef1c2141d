use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    enumerate_solutions, gamma14_direct, gamma1_fourier, gamma_direct, main_term, FourierParts,
    FourierSettings, FrakI, GammaContext, SolutionList,
};
use crate::error::Result;
use crate::kernel::SmoothingKernel;
use crate::params::{ProblemInstance, Violation};
use crate::sieve::SieveSummary;

/// An exact inequality the pipeline must satisfy; a failure is a bug.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityFlag {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub cap: usize,
    /// Compute the Fourier-side quantities (Γ₁⁽¹⁾, Γ₁⁽²⁾, 𝔍).
    pub fourier: bool,
    pub settings: FourierSettings,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            cap: 1000,
            fourier: true,
            settings: FourierSettings::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub params: ProblemInstance,
    pub validation: Vec<Violation>,
    pub kernel: SmoothingKernel,
    pub sieve: SieveSummary,
    pub sieve_warnings: Vec<String>,
    pub prime_count: usize,
    pub sieved_prime_count: usize,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub gamma1: f64,
    pub gamma4: f64,
    pub gamma1_fourier: Option<FourierParts>,
    pub gamma4_fourier: Option<FourierParts>,
    pub frak_i: Option<FrakI>,
    /// `𝔑⁻ (𝔑⁺)² 𝔍`.
    pub main_term: Option<f64>,
    /// `|3𝔑⁻ − 2𝔑⁺| (𝔑⁺)² 𝔍`.
    pub lower_bound_rhs: Option<f64>,
    /// `3f(s₀) − 2F(s₀)` when `s₀ ∈ [2, 3]`.
    pub sieve_margin: Option<f64>,
    /// Quantities governed by unspecified constants; reported, never asserted.
    pub empirical: BTreeMap<String, f64>,
    pub flags: Vec<InequalityFlag>,
    pub exact_inequalities_hold: bool,
    pub solutions: SolutionList,
}

pub fn assemble_report(inst: &ProblemInstance, opts: &ReportOptions) -> Result<GammaReport> {
    let ctx = GammaContext::new(inst)?;
    assemble_from_context(&ctx, opts)
}

pub(crate) fn assemble_from_context(ctx: &GammaContext, opts: &ReportOptions) -> Result<GammaReport> {
    let inst = &ctx.inst;
    let s = &ctx.summary;
    let (gamma, gamma_prime) = gamma_direct(ctx);
    let (gamma1, gamma4) = gamma14_direct(ctx);
    let solutions = enumerate_solutions(ctx, opts.cap);

    let (mut g1f, mut g4f, mut fi, mut main) = (None, None, None, None);
    if opts.fourier && !ctx.is_empty() {
        let (a, b) = gamma1_fourier(ctx, &opts.settings)?;
        let (f, m) = main_term(ctx, &opts.settings)?;
        (g1f, g4f, fi, main) = (Some(a), Some(b), Some(f), Some(m));
    }

    let log_x = inst.x.ln();
    let mut empirical = BTreeMap::new();
    empirical.insert("frak_p_times_log_x".to_string(), s.frak_p * log_x);
    empirical.insert("frak_n_plus_over_log_x".to_string(), s.frak_n_plus.abs() / log_x);
    empirical.insert("frak_n_minus_over_log_x".to_string(), s.frak_n_minus.abs() / log_x);
    if let (Some(a), Some(b)) = (g1f, g4f) {
        empirical.insert("abs_3_gamma1_inner_minus_2_gamma4_inner".to_string(), (3.0 * a.inner - 2.0 * b.inner).abs());
        empirical.insert("abs_gamma1_outer".to_string(), a.outer.abs());
        empirical.insert("abs_gamma4_outer".to_string(), b.outer.abs());
        if let Some(m) = main {
            empirical.insert("gamma1_inner_over_main_term".to_string(), a.inner / m);
        }
    }
    if let Some(f) = fi {
        empirical.insert("frak_i_over_delta_x_3_minus_c".to_string(), f.ratio);
    }

    let slack = 1e-12 * gamma.abs();
    let chain = 3.0 * gamma1 - 2.0 * gamma4;
    let (wp, wm) = (
        ctx.table.w_plus.as_deref().unwrap_or(&[]),
        ctx.table.w_minus.as_deref().unwrap_or(&[]),
    );
    let pointwise_failures = (0..ctx.len())
        .filter(|&i| {
            let ind = i32::from(ctx.pass[i]);
            !(wm[i] <= ind && ind <= wp[i])
        })
        .count();
    let mut flags = vec![
        InequalityFlag {
            name: "gamma >= gamma_prime",
            holds: gamma >= gamma_prime - slack,
            lhs: gamma,
            rhs: gamma_prime,
        },
        InequalityFlag {
            name: "gamma_prime >= 3 gamma1 - 2 gamma4",
            holds: gamma_prime >= chain - slack,
            lhs: gamma_prime,
            rhs: chain,
        },
        InequalityFlag {
            name: "frak_n_minus <= frak_p",
            holds: s.frak_n_minus <= s.frak_p,
            lhs: s.frak_n_minus,
            rhs: s.frak_p,
        },
        InequalityFlag {
            name: "frak_p <= frak_n_plus",
            holds: s.frak_p <= s.frak_n_plus,
            lhs: s.frak_p,
            rhs: s.frak_n_plus,
        },
        InequalityFlag {
            name: "w_minus <= sieve indicator <= w_plus",
            holds: pointwise_failures == 0,
            lhs: pointwise_failures as f64,
            rhs: 0.0,
        },
    ];
    if solutions.count > 0 {
        flags.push(InequalityFlag {
            name: "solutions exist => gamma > 0",
            holds: gamma > 0.0,
            lhs: gamma,
            rhs: 0.0,
        });
    }
    let exact_inequalities_hold = flags.iter().all(|f| f.holds);

    Ok(GammaReport {
        params: inst.clone(),
        validation: inst.validate(),
        kernel: ctx.kernel,
        sieve: s.clone(),
        sieve_warnings: ctx.weights.warnings.clone(),
        prime_count: ctx.len(),
        sieved_prime_count: ctx.pass.iter().filter(|&&p| p).count(),
        gamma,
        gamma_prime,
        gamma1,
        gamma4,
        gamma1_fourier: g1f,
        gamma4_fourier: g4f,
        frak_i: fi,
        main_term: main,
        lower_bound_rhs: fi.map(|f| {
            (3.0 * s.frak_n_minus - 2.0 * s.frak_n_plus).abs() * s.frak_n_plus * s.frak_n_plus * f.value
        }),
        sieve_margin: match (s.f_s0, s.upper_f_s0) {
            (Some(f), Some(big)) => Some(3.0 * f - 2.0 * big),
            _ => None,
        },
        empirical,
        flags,
        exact_inequalities_hold,
        solutions,
    })
}
