//! Sample paths of `X(t) = ∫₀¹ K_t(s) dB(s)` by the three discretizations:
//!
//! * left-point `X̃^J(t) = Σ_l K_t(δ_{J,l}) ΔB_{J,l}`;
//! * cell-averaged `X̂^J(t) = Σ_l K̂_t^{J,l} ΔB_{J,l}` (exponent frozen per cell, exact cell integral);
//! * truncated Haar series `X^J(t) = ⟨K_t,𝒰⟩η₀ + Σ_{j<J} Σ_k ⟨K_t,h_{j,k}⟩ ε_{j,k}`.
//!
//! Per-time sums run over `l` in ascending order with compensated
//! accumulation; parallelism is only across evaluation times, so the output
//! does not depend on the thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::brownian::{BrownianPath, DyadicGrid, HaarCoefficients};
use crate::error::{Error, Result};
use crate::exponent::{ExponentProcess, ExponentSpec};
use crate::kernel::{hat_kernel_frozen, KernelContext, QuadraturePolicy};
use crate::scalar::{dyadic_step, from_usize, lit, pow_plus, KahanSum, Scalar};

/// Largest level accepted for a reference path.
pub const REFERENCE_MAX_LEVEL: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Tilde,
    Hat,
    Haar,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Tilde => "tilde",
            Scheme::Hat => "hat",
            Scheme::Haar => "haar",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tilde" => Ok(Scheme::Tilde),
            "hat" => Ok(Scheme::Hat),
            "haar" => Ok(Scheme::Haar),
            _ => Err(Error::Parse(format!(
                "unknown scheme `{s}`; expected tilde, hat or haar"
            ))),
        }
    }
}

/// Evaluation times: `dyadic:<level>` or `list:<t1>,<t2>,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    Dyadic(u32),
    List(Vec<f64>),
}

impl TimeGrid {
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(level) = text.strip_prefix("dyadic:") {
            let level = level
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad dyadic level in `{text}`")))?;
            DyadicGrid::new(level)?;
            Ok(TimeGrid::Dyadic(level))
        } else if let Some(list) = text.strip_prefix("list:") {
            let times = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad time `{s}` in `{text}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(Error::Domain(format!("time {t} outside [0,1]")));
            }
            Ok(TimeGrid::List(times))
        } else {
            Err(Error::Parse(format!(
                "unrecognized time grid `{text}`; expected dyadic:<level> or list:<csv>"
            )))
        }
    }

    pub fn points<T: Scalar>(&self) -> Vec<T> {
        match self {
            TimeGrid::Dyadic(level) => DyadicGrid { level: *level }.points(),
            TimeGrid::List(ts) => ts.iter().map(|&t| lit(t)).collect(),
        }
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeGrid::Dyadic(level) => write!(f, "dyadic:{level}"),
            TimeGrid::List(ts) => {
                let s: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "list:{}", s.join(","))
            }
        }
    }
}

/// A simulated path sampled at `times`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSeries<T> {
    pub scheme: Scheme,
    pub level: u32,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub exponent_ref: String,
    pub seed: u64,
}

impl<T: Scalar> PathSeries<T> {
    /// CSV with `#`-prefixed metadata lines and columns `t,value,scheme,J,seed`.
    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &[(String, String)]) -> Result<()> {
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "t,value,scheme,J,seed")?;
        for (t, x) in self.times.iter().zip(&self.values) {
            writeln!(
                w,
                "{},{:e},{},{},{}",
                t.to_f64().unwrap(),
                x.to_f64().unwrap(),
                self.scheme,
                self.level,
                self.seed
            )?;
        }
        Ok(())
    }

    /// `t,X(t),A(t)` triples for external plotting.
    pub fn write_plot_data<W: Write>(&self, mut w: W, exponent: &ExponentProcess<T>) -> Result<()> {
        writeln!(w, "t,x,a")?;
        for (&t, x) in self.times.iter().zip(&self.values) {
            writeln!(
                w,
                "{},{:e},{}",
                t.to_f64().unwrap(),
                x.to_f64().unwrap(),
                exponent.value_at(t).to_f64().unwrap()
            )?;
        }
        Ok(())
    }
}

fn check_times<T: Scalar>(times: &[T]) -> Result<()> {
    if let Some(t) = times.iter().find(|&&t| !(t >= T::zero() && t <= T::one())) {
        return Err(Error::Domain(format!("time {t} outside [0,1]")));
    }
    Ok(())
}

/// Per-cell data shared by the left-point and cell-averaged sums.
struct CellSums<'a, T> {
    level: u32,
    step: T,
    increments: &'a [T],
    /// `A(δ_{J,l})`.
    frozen: Vec<T>,
    constant: Option<T>,
    /// `ln(n 2^{-J})`, `n = 0..=2^J` (entry 0 unused).
    log_offsets: Vec<T>,
}

impl<'a, T: Scalar> CellSums<'a, T> {
    fn new(path: &'a BrownianPath<T>, exponent: &ExponentProcess<T>) -> Self {
        let level = path.level();
        let step = dyadic_step::<T>(level);
        let n = path.increments().len();
        let frozen = (0..n)
            .map(|l| exponent.value_at(from_usize::<T>(l) * step))
            .collect();
        let log_offsets = (0..=n)
            .map(|i| {
                if i == 0 {
                    T::neg_infinity()
                } else {
                    (from_usize::<T>(i) * step).ln()
                }
            })
            .collect();
        Self {
            level,
            step,
            increments: path.increments(),
            frozen,
            constant: exponent.is_constant().then_some(exponent.lower),
            log_offsets,
        }
    }

    /// `n` with `t = n 2^{-J}`, if `t` lies on the simulation grid.
    fn grid_index(&self, t: T) -> Option<usize> {
        let x = t / self.step;
        (x.fract() == T::zero()).then(|| x.to_usize()).flatten()
    }

    /// Number of cells with `δ_{J,l} < t`.
    fn active_cells(&self, t: T) -> usize {
        let x = (t / self.step).ceil();
        x.to_usize().unwrap_or(0).min(self.increments.len())
    }

    fn tilde_weights(&self) -> Option<Vec<T>> {
        let a = self.constant?;
        let q = a - lit(0.5);
        Some(
            self.log_offsets
                .iter()
                .enumerate()
                .map(|(i, &ln)| if i == 0 { T::zero() } else { (q * ln).exp() })
                .collect(),
        )
    }

    fn hat_weights(&self) -> Option<Vec<T>> {
        let a = self.constant?;
        let p = a + lit(0.5);
        let mut prev = T::zero();
        Some(
            self.log_offsets
                .iter()
                .enumerate()
                .map(|(i, &ln)| {
                    if i == 0 {
                        return T::zero();
                    }
                    let cur = (p * ln).exp();
                    let w = (cur - prev) / (p * self.step);
                    prev = cur;
                    w
                })
                .collect(),
        )
    }

    fn tilde_at(&self, t: T, table: Option<&[T]>) -> T {
        let half: T = lit(0.5);
        let mut acc = KahanSum::new();
        match self.grid_index(t) {
            Some(n_t) => {
                let n_t = n_t.min(self.increments.len());
                match table {
                    Some(w) => {
                        for (l, &d) in self.increments[..n_t].iter().enumerate() {
                            acc.add(w[n_t - l] * d);
                        }
                    }
                    None => {
                        for (l, &d) in self.increments[..n_t].iter().enumerate() {
                            let q = self.frozen[l] - half;
                            acc.add((q * self.log_offsets[n_t - l]).exp() * d);
                        }
                    }
                }
            }
            None => {
                for l in 0..self.active_cells(t) {
                    let left = from_usize::<T>(l) * self.step;
                    acc.add(pow_plus(t - left, self.frozen[l] - half) * self.increments[l]);
                }
            }
        }
        acc.value()
    }

    fn hat_at(&self, t: T, table: Option<&[T]>) -> T {
        let half: T = lit(0.5);
        let mut acc = KahanSum::new();
        match self.grid_index(t) {
            Some(n_t) => {
                let n_t = n_t.min(self.increments.len());
                match table {
                    Some(w) => {
                        for (l, &d) in self.increments[..n_t].iter().enumerate() {
                            acc.add(w[n_t - l] * d);
                        }
                    }
                    None => {
                        for (l, &d) in self.increments[..n_t].iter().enumerate() {
                            let p = self.frozen[l] + half;
                            let n = n_t - l;
                            let hi = (p * self.log_offsets[n]).exp();
                            let lo = if n > 1 {
                                (p * self.log_offsets[n - 1]).exp()
                            } else {
                                T::zero()
                            };
                            acc.add((hi - lo) / (p * self.step) * d);
                        }
                    }
                }
            }
            None => {
                for l in 0..self.active_cells(t) {
                    let k = hat_kernel_frozen(t, self.level, l, self.frozen[l]);
                    acc.add(k * self.increments[l]);
                }
            }
        }
        acc.value()
    }
}

fn series<T: Scalar>(
    scheme: Scheme,
    level: u32,
    times: &[T],
    values: Vec<T>,
    exponent: &ExponentProcess<T>,
    seed: u64,
) -> PathSeries<T> {
    PathSeries {
        scheme,
        level,
        times: times.to_vec(),
        values,
        exponent_ref: exponent.label(),
        seed,
    }
}

/// Left-point scheme `X̃^J(t) = Σ_{δ_{J,l} < t} K_t(δ_{J,l}) ΔB_{J,l}`.
pub fn simulate_tilde<T: Scalar>(
    path: &BrownianPath<T>,
    exponent: &ExponentProcess<T>,
    times: &[T],
) -> Result<PathSeries<T>> {
    check_times(times)?;
    let cells = CellSums::new(path, exponent);
    let table = cells.tilde_weights();
    let values = times
        .par_iter()
        .map(|&t| cells.tilde_at(t, table.as_deref()))
        .collect();
    Ok(series(Scheme::Tilde, cells.level, times, values, exponent, path.seed()))
}

/// Cell-averaged scheme `X̂^J(t) = Σ_l K̂_t^{J,l} ΔB_{J,l}`.
pub fn simulate_hat<T: Scalar>(
    path: &BrownianPath<T>,
    exponent: &ExponentProcess<T>,
    times: &[T],
) -> Result<PathSeries<T>> {
    check_times(times)?;
    let cells = CellSums::new(path, exponent);
    let table = cells.hat_weights();
    let values = times
        .par_iter()
        .map(|&t| cells.hat_at(t, table.as_deref()))
        .collect();
    Ok(series(Scheme::Hat, cells.level, times, values, exponent, path.seed()))
}

/// `X^J(t)` for every `J = 0..=depth` at a single time (partial sums of one series).
pub fn haar_partial_levels<T: Scalar>(
    coeffs: &HaarCoefficients<T>,
    ctx: &KernelContext<'_, T>,
    t: T,
    depth: u32,
) -> Vec<T> {
    let mut acc = KahanSum::new();
    acc.add(ctx.mean_kernel(t, 0, 0) * coeffs.eta0);
    let mut out = Vec::with_capacity(depth as usize + 1);
    out.push(acc.value());
    for j in 0..depth {
        let width = dyadic_step::<T>(j);
        let row = coeffs.level(j);
        let active = ((t / width).ceil().to_usize().unwrap_or(0)).min(row.len());
        for (k, &e) in row[..active].iter().enumerate() {
            acc.add(ctx.wavelet_coefficient(t, j, k) * e);
        }
        out.push(acc.value());
    }
    out
}

/// Truncated Haar series `X^J` at each time.
pub fn simulate_haar_partial<T: Scalar>(
    coeffs: &HaarCoefficients<T>,
    ctx: &KernelContext<'_, T>,
    times: &[T],
    depth: u32,
) -> Result<PathSeries<T>> {
    check_times(times)?;
    if depth > coeffs.depth() {
        return Err(Error::InsufficientResolution {
            level: coeffs.depth(),
            required: depth,
        });
    }
    let values = times
        .par_iter()
        .map(|&t| *haar_partial_levels(coeffs, ctx, t, depth).last().unwrap())
        .collect();
    Ok(PathSeries {
        scheme: Scheme::Haar,
        level: depth,
        times: times.to_vec(),
        values,
        exponent_ref: ctx.exponent.label(),
        seed: 0,
    })
}

/// `Σ_l K̄_t^{J,l} ΔB_{J,l}` with quadrature cell means.
pub fn mean_kernel_sum<T: Scalar>(path: &BrownianPath<T>, ctx: &KernelContext<'_, T>, t: T) -> T {
    let level = path.level();
    let step = dyadic_step::<T>(level);
    let active = ((t / step).ceil().to_usize().unwrap_or(0)).min(path.increments().len());
    let mut acc = KahanSum::new();
    for (l, &d) in path.increments()[..active].iter().enumerate() {
        acc.add(ctx.mean_kernel(t, level, l) * d);
    }
    acc.value()
}

/// Dispatches on `scheme`; the Haar scheme uses `policy` for its inner products.
pub fn simulate<T: Scalar>(
    scheme: Scheme,
    path: &BrownianPath<T>,
    exponent: &ExponentProcess<T>,
    times: &[T],
    policy: QuadraturePolicy<T>,
) -> Result<PathSeries<T>> {
    match scheme {
        Scheme::Tilde => simulate_tilde(path, exponent, times),
        Scheme::Hat => simulate_hat(path, exponent, times),
        Scheme::Haar => {
            let coeffs = HaarCoefficients::from_path(path)?;
            let ctx = KernelContext::new(exponent, policy)?;
            let mut s = simulate_haar_partial(&coeffs, &ctx, times, path.level())?;
            s.seed = path.seed();
            Ok(s)
        }
    }
}

/// High-resolution stand-in for `X`: `X̂^{J_ref}` on the level-`J_ref` path of
/// `seed`, with the exponent rebuilt at that level.
pub fn reference_path<T: Scalar>(
    seed: u64,
    spec: &ExponentSpec,
    ref_level: u32,
    times: &[T],
) -> Result<PathSeries<T>> {
    if ref_level > REFERENCE_MAX_LEVEL {
        return Err(Error::MemoryGuard {
            level: ref_level,
            max: REFERENCE_MAX_LEVEL,
        });
    }
    let path = BrownianPath::sample(seed, ref_level)?;
    let exponent = spec.build(&path)?;
    simulate_hat(&path, &exponent, times)
}
