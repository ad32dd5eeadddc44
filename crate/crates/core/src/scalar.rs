//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Real scalar usable by the simulation and analysis code: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Serialize
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count or index into `T`.
#[inline(always)]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("integer representable in scalar type")
}

/// `2^{-level}`, exact for every level the crate accepts.
#[inline]
pub fn dyadic_step<T: Scalar>(level: u32) -> T {
    T::from_f64((-(level as f64)).exp2()).expect("power of two representable")
}

/// `x^q` for `x > 0` evaluated as `exp(q ln x)`.
///
/// Every kernel evaluation goes through this one formula so the grid-aligned
/// fast paths in the simulator reproduce the pointwise kernel bit-for-bit.
#[inline(always)]
pub fn pow_pos<T: Scalar>(x: T, q: T) -> T {
    (q * x.ln()).exp()
}

/// `(x)_+^q`: zero for `x <= 0`.
#[inline(always)]
pub fn pow_plus<T: Scalar>(x: T, q: T) -> T {
    if x > T::zero() {
        pow_pos(x, q)
    } else {
        T::zero()
    }
}

/// Compensated (Kahan–Babuška/Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline(always)]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Scalar> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope; NaN with fewer than three points.
    pub slope_stderr: T,
}

/// Least-squares fit; `None` with fewer than two points or zero spread in `x`.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Option<LinearFit<T>> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = from_usize::<T>(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx <= T::zero() {
        return None;
    }
    let sxy: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ssr: T = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (ssr / from_usize::<T>(n - 2) / sxx).sqrt()
    } else {
        T::nan()
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
    })
}
