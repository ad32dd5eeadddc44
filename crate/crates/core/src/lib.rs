// `!(a < b)` comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod brownian;
pub mod cli;
pub mod error;
pub mod exponent;
pub mod kernel;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod simulator;

pub use analysis::{HolderReport, RateReport};
pub use brownian::{BrownianPath, DyadicGrid, HaarCoefficients};
pub use error::{Error, Result};
pub use exponent::{ExponentProcess, ExponentSpec};
pub use kernel::{KernelContext, QuadraturePolicy};
pub use scalar::Scalar;
pub use simulator::{PathSeries, Scheme, TimeGrid};

pub type BrownianPath64 = BrownianPath<f64>;
pub type BrownianPath32 = BrownianPath<f32>;
pub type HaarCoefficients64 = HaarCoefficients<f64>;
pub type ExponentProcess64 = ExponentProcess<f64>;
pub type ExponentProcess32 = ExponentProcess<f32>;
pub type PathSeries64 = PathSeries<f64>;
pub type PathSeries32 = PathSeries<f32>;
