//! Exponential sums over primes and prime powers.
//!
//! All phases `x · n^c` are formed in double-double arithmetic and reduced
//! modulo one before any trigonometric call, so the fractional part stays
//! accurate even when the integer part is near `2^50`.

mod integral;
mod vaughan;
mod vdc;

pub use integral::{i_asymptotic, i_integral, i_value, IntegralEval};
pub use vaughan::{vaughan_decompose, VaughanParts};
pub use vdc::vdc_check;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::quad::QuadResult;
use crate::numeric::sum::{par_sum, Neumaier, CHUNK};
use crate::numeric::{e_dd, Dd};
use crate::params::ProblemInstance;
use crate::primes::{coprime_to_pz, LambdaTable, PrimeTable};
use crate::sieve::{frak_values, RosserWeights};

/// Which per-prime weight multiplies `log p · e(x p^c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Collapsed upper sieve weight `w⁺(p)`.
    Plus,
    /// Collapsed lower sieve weight `w⁻(p)`.
    Minus,
    /// `1` if `(p + 2, P(z)) = 1`, else `0`.
    Moebius,
    /// `1` for every prime.
    Unsieved,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(WeightMode::Plus),
            "minus" => Ok(WeightMode::Minus),
            "moebius" => Ok(WeightMode::Moebius),
            "unsieved" => Ok(WeightMode::Unsieved),
            _ => Err(Error::Usage(format!(
                "unknown weight mode `{s}` (plus, minus, moebius, unsieved)"
            ))),
        }
    }
}

/// `n^c` in double-double for each `n`.
pub fn phase_table(values: &[u64], c: f64) -> Vec<Dd> {
    values.par_iter().map(|&n| Dd::powf(n as f64, c)).collect()
}

/// Per-prime integer weights for `mode`.
pub fn mode_weights(inst: &ProblemInstance, table: &PrimeTable, mode: WeightMode) -> Result<Vec<i32>> {
    let missing = || Error::State("collapsed sieve weights have not been computed".into());
    match mode {
        WeightMode::Plus => table.w_plus.clone().ok_or_else(missing),
        WeightMode::Minus => table.w_minus.clone().ok_or_else(missing),
        WeightMode::Moebius => Ok(if table.spf_bound == Some(inst.z) {
            table.sieve_pass().into_iter().map(i32::from).collect()
        } else {
            table
                .primes
                .iter()
                .map(|&p| i32::from(coprime_to_pz(p + 2, inst.z)))
                .collect()
        }),
        WeightMode::Unsieved => Ok(vec![1; table.len()]),
    }
}

/// A prime table prepared for repeated evaluation of `L(x)`.
#[derive(Clone, Debug)]
pub struct PrimeSum {
    pub pc: Vec<Dd>,
    pub amplitude: Vec<f64>,
}

impl PrimeSum {
    pub fn new(inst: &ProblemInstance, table: &PrimeTable, mode: WeightMode) -> Result<Self> {
        let w = mode_weights(inst, table, mode)?;
        Ok(PrimeSum {
            pc: phase_table(&table.primes, inst.c),
            amplitude: table.logp.iter().zip(&w).map(|(l, &w)| l * w as f64).collect(),
        })
    }

    /// `Σ_p amplitude(p) · e(x p^c)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        par_sum(self.pc.len(), CHUNK, |range| {
            let mut acc = Neumaier::new();
            for i in range {
                if self.amplitude[i] != 0.0 {
                    acc.add(e_dd(self.pc[i].mul_f64(x)) * self.amplitude[i]);
                }
            }
            acc.value()
        })
    }
}

/// Inputs of one prime-sum evaluation.
#[derive(Clone, Copy, Debug)]
pub struct SumSpec<'a> {
    pub instance: &'a ProblemInstance,
    pub table: &'a PrimeTable,
    pub weight_mode: WeightMode,
    pub x: f64,
}

/// `L(x) = Σ_{μX<p≤X} w(p) log p · e(x p^c)`.
pub fn l_sum(s: &SumSpec) -> Result<Complex64> {
    Ok(PrimeSum::new(s.instance, s.table, s.weight_mode)?.eval(s.x))
}

/// `S(x, d) = Σ_{μX<n≤X, d | n+2} Λ(n) e(x n^c)`, from a table on `(μX, X]`.
pub fn s_xd(x: f64, d: u64, inst: &ProblemInstance, lambda: &LambdaTable) -> Result<Complex64> {
    if d == 0 || d % 2 == 0 {
        return Err(Error::domain(format!("modulus d = {d} must be odd and positive")));
    }
    let picked: Vec<(u64, f64)> = lambda
        .entries
        .iter()
        .filter(|e| (e.0 + 2) % d == 0)
        .copied()
        .collect();
    Ok(par_sum(picked.len(), CHUNK, |range| {
        let mut acc = Neumaier::new();
        for &(n, lp) in &picked[range] {
            acc.add(e_dd(Dd::powf(n as f64, inst.c).mul_f64(x)) * lp);
        }
        acc.value()
    }))
}

/// `Y(X) = Σ_{μX<n≤X} Λ(n) e(x n^c)`.
pub fn y_x(inst: &ProblemInstance, lambda: &LambdaTable, x: f64) -> Result<Complex64> {
    s_xd(x, 1, inst, lambda)
}

/// Comparison of `L(x)` with its expected main term `(Σ λ(d)/φ(d)) I(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct Lemma10Report {
    pub x: f64,
    pub mode: WeightMode,
    pub l_value: (f64, f64),
    /// `Σ_{d ≤ D} λ(d)/φ(d)` for the chosen weights.
    pub coefficient: f64,
    pub i_value: (f64, f64),
    pub residual: f64,
    /// `(A, residual / (X (log X)^-A))`; empirical only.
    pub ratios: Vec<(f64, f64)>,
}

pub fn lemma10_residual(
    inst: &ProblemInstance,
    table: &PrimeTable,
    weights: &RosserWeights,
    mode: WeightMode,
    x: f64,
    exponents: &[f64],
) -> Result<Lemma10Report> {
    if x.abs() >= inst.tau {
        return Err(Error::domain(format!("|x| = {} is not below τ = {}", x.abs(), inst.tau)));
    }
    let summary = frak_values(weights);
    let coefficient = match mode {
        WeightMode::Plus => summary.frak_n_plus,
        WeightMode::Minus => summary.frak_n_minus,
        WeightMode::Moebius => summary.frak_p,
        WeightMode::Unsieved => 1.0,
    };
    let l = l_sum(&SumSpec {
        instance: inst,
        table,
        weight_mode: mode,
        x,
    })?;
    let i: QuadResult<Complex64> = i_integral(inst, x, 1e-12)?;
    let residual = (l - i.value * coefficient).norm();
    let lx = inst.x.ln();
    Ok(Lemma10Report {
        x,
        mode,
        l_value: (l.re, l.im),
        coefficient,
        i_value: (i.value.re, i.value.im),
        residual,
        ratios: exponents
            .iter()
            .map(|&a| (a, residual / (inst.x * lx.powf(-a))))
            .collect(),
    })
}
