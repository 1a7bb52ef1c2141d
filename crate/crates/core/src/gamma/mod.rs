//! Weighted counts of prime triples near the target and their Fourier-side
//! counterparts.
//!
//! A triple `(p₁, p₂, p₃)` of primes in `(μX, X]` contributes through
//! `v = p₁^c + p₂^c + p₃^c − N`. The direct sums fix `(p₁, p₂)` and binary
//! search the sorted `p^c` values for the window of `p₃` where the weight
//! function of `v` can be nonzero.

mod fourier;
mod report;

pub use fourier::{choose_step, frak_i, gamma1_fourier, main_term, FourierParts, FourierSettings, FrakI};
pub use report::{assemble_report, GammaReport, InequalityFlag, ReportOptions};

use serde::Serialize;

use crate::error::Result;
use crate::kernel::{build_kernel, SmoothingKernel};
use crate::numeric::sum::{par_sum, Neumaier};
use crate::numeric::Dd;
use crate::params::ProblemInstance;
use crate::primes::{sieve_range, PrimeTable};
use crate::sieve::{build_rosser, collapse_weights, frak_values, RosserWeights, SieveSummary};

/// Kernel used for the smoothed counts: `a = 7Δ/8`, `d_k = Δ/8`.
pub fn instance_kernel(inst: &ProblemInstance) -> Result<SmoothingKernel> {
    build_kernel(7.0 * inst.delta_width / 8.0, inst.delta_width / 8.0, inst.r_kernel)
}

/// Everything the triple sums need, built once per instance.
#[derive(Clone, Debug)]
pub struct GammaContext {
    pub inst: ProblemInstance,
    pub table: PrimeTable,
    pub weights: RosserWeights,
    pub summary: SieveSummary,
    pub kernel: SmoothingKernel,
    /// `p^c` in double-double, aligned with `table.primes`.
    pub pc: Vec<Dd>,
    /// `p^c` rounded to double; ascending.
    pub pcf: Vec<f64>,
    /// `(p + 2, P(z)) = 1`.
    pub pass: Vec<bool>,
}

impl GammaContext {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let weights = build_rosser(inst.d_level, inst.z)?;
        Self::with_weights(inst, weights)
    }

    /// Build with an explicit weight table (used for fault injection).
    pub fn with_weights(inst: &ProblemInstance, weights: RosserWeights) -> Result<Self> {
        let table = if inst.lower() < inst.x {
            sieve_range(inst.lower(), inst.x)?
        } else {
            PrimeTable::default()
        };
        let table = collapse_weights(&weights, table);
        let pc = crate::expsum::phase_table(&table.primes, inst.c);
        let pcf = pc.iter().map(|d| d.to_f64()).collect();
        let pass = table.sieve_pass();
        Ok(GammaContext {
            inst: inst.clone(),
            summary: frak_values(&weights),
            kernel: instance_kernel(inst)?,
            table,
            weights,
            pc,
            pcf,
            pass,
        })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Integer weight of prime `i` in a slot.
    pub fn slot_weight(&self, slot: Slot, i: usize) -> i32 {
        match slot {
            Slot::Plus => self.table.w_plus.as_ref().expect("weights collapsed")[i],
            Slot::Minus => self.table.w_minus.as_ref().expect("weights collapsed")[i],
            Slot::Sieved => i32::from(self.pass[i]),
            Slot::Unit => 1,
        }
    }

    /// Indices `k` with `lo < (s + pcf[k]) − N < hi`, as a range.
    ///
    /// Floating addition is monotone, so both predicates are monotone in
    /// `k` and the binary searches are exact for the formula used.
    fn window(&self, s: f64, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let n = self.inst.n;
        let a = self.pcf.partition_point(|&c| (s + c) - n <= lo);
        let b = self.pcf.partition_point(|&c| (s + c) - n < hi);
        a..b.max(a)
    }
}

/// Weight attached to one coordinate of a triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slot {
    Plus,
    Minus,
    /// Indicator of `(p + 2, P(z)) = 1`.
    Sieved,
    Unit,
}

/// `v = ((p₁^c + p₂^c) + p₃^c) − N`, the one formula every code path uses.
#[inline]
pub fn offset(pc1: f64, pc2: f64, pc3: f64, n: f64) -> f64 {
    (pc1 + pc2 + pc3) - n
}

/// `Σ_{triples} Π w_slot(pᵢ) log pᵢ · g(v)` over `lo < v < hi`.
pub fn window_sum<G>(ctx: &GammaContext, slots: [Slot; 3], lo: f64, hi: f64, g: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let m = ctx.len();
    let amp = |slot: Slot| -> Vec<f64> {
        (0..m)
            .map(|i| ctx.slot_weight(slot, i) as f64 * ctx.table.logp[i])
            .collect()
    };
    let (a1, a2, a3) = (amp(slots[0]), amp(slots[1]), amp(slots[2]));
    let n = ctx.inst.n;
    par_sum(m, 16, |range| {
        let mut acc = Neumaier::new();
        for i in range {
            if a1[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                if a2[j] == 0.0 {
                    continue;
                }
                let s = ctx.pcf[i] + ctx.pcf[j];
                let mut inner = Neumaier::new();
                for k in ctx.window(s, lo, hi) {
                    if a3[k] != 0.0 {
                        inner.add(a3[k] * g(offset(ctx.pcf[i], ctx.pcf[j], ctx.pcf[k], n)));
                    }
                }
                acc.add(a1[i] * a2[j] * inner.value());
            }
        }
        acc.value()
    })
}

/// A solution of `|p₁^c + p₂^c + p₃^c − N| < Δ` with all `pᵢ + 2` sieved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionTriple {
    pub p1: u64,
    pub p2: u64,
    pub p3: u64,
    pub value: f64,
    pub omegas: [u32; 3],
    pub sieve_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionList {
    /// Total number of solutions, including any beyond the cap.
    pub count: u64,
    pub truncated: bool,
    pub solutions: Vec<SolutionTriple>,
}

/// All ordered solution triples, in lexicographic order of `(p₁, p₂, p₃)`,
/// keeping at most `cap` of them.
pub fn enumerate_solutions(ctx: &GammaContext, cap: usize) -> SolutionList {
    let delta = ctx.inst.delta_width;
    let n = ctx.inst.n;
    let idx: Vec<usize> = (0..ctx.len()).filter(|&i| ctx.pass[i]).collect();
    let sub: Vec<f64> = idx.iter().map(|&i| ctx.pcf[i]).collect();
    let mut out = Vec::new();
    let mut count = 0u64;
    for &i in &idx {
        for &j in &idx {
            let s = ctx.pcf[i] + ctx.pcf[j];
            let a = sub.partition_point(|&c| (s + c) - n <= -delta);
            let b = sub.partition_point(|&c| (s + c) - n < delta).max(a);
            count += (b - a) as u64;
            for &k in &idx[a..b] {
                if out.len() >= cap {
                    break;
                }
                out.push(SolutionTriple {
                    p1: ctx.table.primes[i],
                    p2: ctx.table.primes[j],
                    p3: ctx.table.primes[k],
                    value: offset(ctx.pcf[i], ctx.pcf[j], ctx.pcf[k], n),
                    omegas: [ctx.table.omega_p2[i], ctx.table.omega_p2[j], ctx.table.omega_p2[k]],
                    sieve_ok: true,
                });
            }
        }
    }
    SolutionList {
        count,
        truncated: count > out.len() as u64,
        solutions: out,
    }
}

/// `(Γ, Γ′)`: the log-weighted solution count and its θ-smoothed minorant.
pub fn gamma_direct(ctx: &GammaContext) -> (f64, f64) {
    let delta = ctx.inst.delta_width;
    let s = ctx.kernel.support();
    let sieved = [Slot::Sieved; 3];
    let gamma = window_sum(ctx, sieved, -delta, delta, |_| 1.0);
    let gamma_prime = window_sum(ctx, sieved, -s, s, |v| ctx.kernel.theta(v));
    (gamma, gamma_prime)
}

/// `(Γ₁, Γ₄)` with weights `w⁻w⁺w⁺` and `w⁺w⁺w⁺`.
pub fn gamma14_direct(ctx: &GammaContext) -> (f64, f64) {
    (
        gamma_weighted(ctx, [Slot::Minus, Slot::Plus, Slot::Plus]),
        gamma_weighted(ctx, [Slot::Plus; 3]),
    )
}

/// θ-smoothed triple sum with arbitrary slot weights.
pub fn gamma_weighted(ctx: &GammaContext, slots: [Slot; 3]) -> f64 {
    let s = ctx.kernel.support();
    window_sum(ctx, slots, -s, s, |v| ctx.kernel.theta(v))
}
