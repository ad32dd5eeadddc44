//! The random kernel `K_t(s) = (t−s)_+^{A(s)−1/2}` and the quantities derived
//! from it: cell means, the frozen-exponent cell integrals and inner products
//! with the Haar system.

use serde::Serialize;

use crate::brownian::haar_scale;
use crate::error::{Error, Result};
use crate::exponent::ExponentProcess;
use crate::quadrature::{GaussLegendre, GradedIntegrator};
use crate::scalar::{dyadic_step, from_usize, lit, pow_plus, pow_pos, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraturePolicy<T> {
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_cell: usize,
    /// Minimum number of graded bisections toward `s = t`; more are added
    /// until the innermost panel is below the tolerance.
    pub refinement_depth: u32,
    /// Absolute tolerance on cell means and Haar inner products.
    pub abs_tol: T,
}

impl<T: Scalar> Default for QuadraturePolicy<T> {
    fn default() -> Self {
        Self {
            nodes_per_cell: 8,
            refinement_depth: 6,
            abs_tol: lit(1e-10),
        }
    }
}

impl<T: Scalar> QuadraturePolicy<T> {
    /// Looser tolerance for use inside large simulations.
    pub fn simulation() -> Self {
        Self {
            abs_tol: lit(1e-7),
            ..Self::default()
        }
    }
}

/// Element of the Haar system on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaarFunction {
    /// `𝒰 = 1_{[0,1)}`.
    Scaling,
    /// `h_{j,k}`.
    Wavelet { j: u32, k: usize },
}

/// `h_{j,k}(s)`: `2^{j/2}` on the left half of `[k 2^{-j}, (k+1) 2^{-j})`,
/// `−2^{j/2}` on the right half, zero elsewhere.
pub fn haar_eval<T: Scalar>(j: u32, k: usize, s: T) -> Result<T> {
    haar_function_eval(HaarFunction::Wavelet { j, k }, s)
}

pub fn haar_function_eval<T: Scalar>(f: HaarFunction, s: T) -> Result<T> {
    if !(s >= T::zero() && s < T::one()) {
        return Err(Error::Domain(format!("s = {s} outside [0,1)")));
    }
    match f {
        HaarFunction::Scaling => Ok(T::one()),
        HaarFunction::Wavelet { j, k } => {
            check_index(j, k)?;
            let x = s * lit((j as f64).exp2()) - from_usize::<T>(k);
            let half: T = lit(0.5);
            Ok(if x < T::zero() || x >= T::one() {
                T::zero()
            } else if x < half {
                haar_scale(j)
            } else {
                -haar_scale::<T>(j)
            })
        }
    }
}

fn check_index(j: u32, k: usize) -> Result<()> {
    if j >= usize::BITS - 1 || k >= 1usize << j {
        return Err(Error::IndexOutOfRange { j, k });
    }
    Ok(())
}

/// `L_t(u, v) = (t−u)_+^{v−1/2}` without bound checks.
#[inline(always)]
pub fn l_kernel<T: Scalar>(t: T, u: T, v: T) -> T {
    pow_plus(t - u, v - lit(0.5))
}

/// Closed-form frozen-exponent cell integral
/// `K̂_t^{J,l} = 2^J/(A(δ_{J,l})+1/2) ((t−δ_{J,l})_+^{A+1/2} − (t−δ_{J,l+1})_+^{A+1/2})`.
pub fn hat_kernel<T: Scalar>(exponent: &ExponentProcess<T>, t: T, level: u32, l: usize) -> T {
    let h = dyadic_step::<T>(level);
    let left = from_usize::<T>(l) * h;
    hat_kernel_frozen(t, level, l, exponent.value_at(left))
}

/// [`hat_kernel`] with the frozen exponent value supplied by the caller.
#[inline]
pub fn hat_kernel_frozen<T: Scalar>(t: T, level: u32, l: usize, a_left: T) -> T {
    let h = dyadic_step::<T>(level);
    let left = from_usize::<T>(l) * h;
    if t <= left {
        return T::zero();
    }
    let p = a_left + lit(0.5);
    let right = left + h;
    (pow_pos(t - left, p) - pow_plus(t - right, p)) / (p * h)
}

/// Outcome of the kernel increment inequality at one triple `(t, s′, s″)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncrementCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Kernel evaluation context: the exponent plus the quadrature policy.
pub struct KernelContext<'a, T> {
    pub exponent: &'a ExponentProcess<T>,
    pub quadrature: QuadraturePolicy<T>,
    rule: GaussLegendre<T>,
}

impl<'a, T: Scalar> KernelContext<'a, T> {
    pub fn new(exponent: &'a ExponentProcess<T>, quadrature: QuadraturePolicy<T>) -> Result<Self> {
        if quadrature.nodes_per_cell < 4 {
            return Err(Error::Domain(format!(
                "quadrature needs at least 4 nodes per cell, got {}",
                quadrature.nodes_per_cell
            )));
        }
        if !(quadrature.abs_tol > T::zero()) {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        Ok(Self {
            exponent,
            quadrature,
            rule: GaussLegendre::new(quadrature.nodes_per_cell),
        })
    }

    pub fn with_defaults(exponent: &'a ExponentProcess<T>) -> Self {
        Self::new(exponent, QuadraturePolicy::default()).expect("default policy is valid")
    }

    /// `K_t(s)`; zero when `t <= s`, always in `[0, 1]` on the unit square.
    #[inline]
    pub fn kernel_eval(&self, t: T, s: T) -> T {
        if t <= s {
            return T::zero();
        }
        l_kernel(t, s, self.exponent.value_at(s))
    }

    /// `L_t(u, v)` for `v` within the exponent bounds.
    pub fn l_eval(&self, t: T, u: T, v: T) -> Result<T> {
        if !(v >= self.exponent.lower && v <= self.exponent.upper) {
            return Err(Error::Domain(format!(
                "v = {v} outside [{}, {}]",
                self.exponent.lower, self.exponent.upper
            )));
        }
        if !(u >= T::zero() && u <= T::one()) {
            return Err(Error::Domain(format!("u = {u} outside [0,1]")));
        }
        Ok(l_kernel(t, u, v))
    }

    fn integrator(&self, tol: T) -> GradedIntegrator<'_, T> {
        GradedIntegrator {
            rule: &self.rule,
            min_depth: self.quadrature.refinement_depth,
            h_min: tol,
        }
    }

    /// Exponent grid nodes in `(a, b)`, shifted by `-shift`.
    fn kinks(&self, a: T, b: T, shift: T, out: &mut Vec<T>) {
        let Some(level) = self.exponent.breakpoint_level() else {
            return;
        };
        let scale: T = lit((level as f64).exp2());
        let lo = ((a + shift) * scale).ceil().to_usize().unwrap_or(0);
        let hi = ((b + shift) * scale).floor().to_usize().unwrap_or(0);
        let h = dyadic_step::<T>(level);
        for k in lo..=hi {
            let x = from_usize::<T>(k) * h - shift;
            if x > a && x < b {
                out.push(x);
            }
        }
    }

    /// `∫_a^b K_t(s) ds`.
    pub fn integrate_kernel(&self, t: T, a: T, b: T, tol: T) -> T {
        let upper = b.min(t);
        if !(upper > a) {
            return T::zero();
        }
        let mut cuts = Vec::new();
        self.kinks(a, upper, T::zero(), &mut cuts);
        let f = |s: T| self.kernel_eval(t, s);
        self.integrator(tol).integrate(&f, a, upper, &cuts, &[t])
    }

    /// Cell mean `K̄_t^{J,l} = 2^J ∫_{δ_{J,l}}^{δ_{J,l+1}} K_t(s) ds`.
    pub fn mean_kernel(&self, t: T, level: u32, l: usize) -> T {
        let h = dyadic_step::<T>(level);
        let a = from_usize::<T>(l) * h;
        let v = self.integrate_kernel(t, a, a + h, self.quadrature.abs_tol * h) / h;
        v.max(T::zero()).min(T::one())
    }

    /// `⟨K_t, f⟩` for an element of the Haar system. Wavelet coefficients use
    /// `2^{j/2} ∫_{δ_{j,k}}^{δ_{j,k}+2^{-j-1}} (K_t(s) − K_t(s + 2^{-j-1})) ds`.
    pub fn haar_inner_product(&self, t: T, f: HaarFunction) -> Result<T> {
        match f {
            HaarFunction::Scaling => Ok(self.mean_kernel(t, 0, 0)),
            HaarFunction::Wavelet { j, k } => {
                check_index(j, k)?;
                Ok(self.wavelet_coefficient(t, j, k))
            }
        }
    }

    /// `⟨K_t, h_{j,k}⟩` without the index check.
    pub fn wavelet_coefficient(&self, t: T, j: u32, k: usize) -> T {
        let width = dyadic_step::<T>(j);
        let a = from_usize::<T>(k) * width;
        if t <= a {
            return T::zero();
        }
        let half = width * lit(0.5);
        let upper = (a + half).min(t);
        let mut cuts = Vec::new();
        self.kinks(a, upper, T::zero(), &mut cuts);
        self.kinks(a, upper, half, &mut cuts);
        let g = |s: T| self.kernel_eval(t, s) - self.kernel_eval(t, s + half);
        let scale = haar_scale::<T>(j);
        let tol = self.quadrature.abs_tol / scale;
        scale * self.integrator(tol).integrate(&g, a, upper, &cuts, &[t, t - half])
    }

    /// `c₀ = max(ā − 1/2, 1/(e (a̲ − 1/2)), 1)`, from the two mean-value steps
    /// bounding `|K_t(s′) − K_t(s″)|`.
    pub fn c0(&self) -> T {
        let half: T = lit(0.5);
        let lower = self.exponent.lower - half;
        (self.exponent.upper - half)
            .max(T::one() / (T::E() * lower))
            .max(T::one())
    }

    /// `c₄ = c₀/(2a̲ − 1) + 1`.
    pub fn c4(&self) -> T {
        self.c0() / (self.exponent.lower + self.exponent.lower - T::one()) + T::one()
    }

    /// Evaluates both sides of
    /// `|K_t(s′) − K_t(s″)| <= c₀ ((t−s″)^{a̲−3/2}(s″−s′) + |A(s′) − A(s″)|)`.
    ///
    /// `holds` allows a rounding slack of a few ulps of the kernel values.
    pub fn check_increment_bound(&self, t: T, s1: T, s2: T) -> Result<IncrementCheck<T>> {
        if !(T::zero() <= s1 && s1 <= s2 && s2 < t && t <= T::one()) {
            return Err(Error::Domain(format!(
                "need 0 <= s' <= s'' < t <= 1, got s' = {s1}, s'' = {s2}, t = {t}"
            )));
        }
        let k1 = self.kernel_eval(t, s1);
        let k2 = self.kernel_eval(t, s2);
        let lhs = (k1 - k2).abs();
        let a1 = self.exponent.value_at(s1);
        let a2 = self.exponent.value_at(s2);
        let rhs = self.c0()
            * (pow_pos(t - s2, self.exponent.lower - lit(1.5)) * (s2 - s1) + (a1 - a2).abs());
        let slack = T::epsilon() * lit(4.0) * k1.max(k2);
        Ok(IncrementCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + slack,
        })
    }

    /// `S_j(t) = Σ_k |⟨K_t, h_{j,k}⟩|`.
    pub fn coefficient_sum(&self, t: T, j: u32) -> T {
        let n = 1usize << j;
        (0..n)
            .map(|k| self.wavelet_coefficient(t, j, k).abs())
            .sum()
    }

    /// Right-hand side `c₄ 2^{-j/2} + c₀ 2^{j/2} ∫_0^{1−2^{-j-1}} |A(s) − A(s + 2^{-j-1})| ds`.
    pub fn coefficient_sum_bound(&self, j: u32) -> T {
        let scale = haar_scale::<T>(j);
        let shift = dyadic_step::<T>(j + 1);
        self.c4() / scale + self.c0() * scale * shifted_abs_variation(self.exponent, shift)
    }
}

/// `∫_0^{1−d} |A(s) − A(s+d)| ds`.
///
/// Exact for the piecewise-linear kinds (the difference is linear between
/// consecutive kinks); the sinusoid is linearized on a level-14 grid.
pub fn shifted_abs_variation<T: Scalar>(exponent: &ExponentProcess<T>, d: T) -> T {
    if exponent.is_constant() {
        return T::zero();
    }
    let level = exponent.breakpoint_level().unwrap_or(14);
    let h = dyadic_step::<T>(level);
    let end = T::one() - d;
    let n = 1usize << level;
    let mut pts: Vec<T> = (0..=n)
        .flat_map(|k| {
            let x = from_usize::<T>(k) * h;
            [x, x - d]
        })
        .filter(|&x| x >= T::zero() && x <= end)
        .collect();
    pts.push(T::zero());
    pts.push(end);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let diff = |s: T| exponent.value_at(s) - exponent.value_at(s + d);
    let half: T = lit(0.5);
    let mut acc = T::zero();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let (g0, g1) = (diff(w[0]), diff(w[1]));
        acc = acc
            + if g0 * g1 >= T::zero() {
                len * (g0.abs() + g1.abs()) * half
            } else {
                len * (g0 * g0 + g1 * g1) * half / (g0.abs() + g1.abs())
            };
    }
    acc
}
