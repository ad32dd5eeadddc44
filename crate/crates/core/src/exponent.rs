//! The exponent process `A(s)` with values in `[a̲, ā] ⊂ (1/2, 1)`.
//!
//! Four kinds are supported: constant, deterministic sinusoid, a min–max
//! normalized Riemann–Liouville path (random, adapted when it is built from
//! the driving noise) and arbitrary tabulated values. Random and tabulated
//! kinds are piecewise linear between the nodes of a dyadic grid.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::brownian::{BrownianPath, DyadicGrid};
use crate::error::{Error, Result};
use crate::rng::{replicate_seed, DOMAIN_EXPONENT};
use crate::scalar::{dyadic_step, from_usize, linear_fit, lit, pow_pos, KahanSum, Scalar};

/// Gap between the Hurst index of the normalized R_H exponent and its
/// declared pathwise Hölder order.
pub const GAMMA_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentKind<T> {
    Constant,
    Smooth { frequency: T },
    RiemannLiouville { hurst: T, independent: bool },
    Tabulated,
}

/// Declared regularity of `A`. These are recorded and sanity-checked, never proven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderMetadata<T> {
    /// Pathwise uniform Hölder order γ.
    pub gamma: T,
    /// Grid estimate of the pathwise constant at order γ.
    pub c1_estimate: T,
    /// Mean-square Hölder order ρ.
    pub rho: T,
    /// Mean-square constant, when a Monte Carlo check has been run.
    pub c_estimate: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentProcess<T> {
    pub kind: ExponentKind<T>,
    pub lower: T,
    pub upper: T,
    level: u32,
    grid_values: Vec<T>,
    pub meta: HolderMetadata<T>,
    pub source_seed: Option<u64>,
}

fn check_open_unit_half<T: Scalar>(x: T, what: &str) -> Result<()> {
    let half: T = lit(0.5);
    if !(x > half && x < T::one()) {
        return Err(Error::BoundViolation(format!(
            "exponent must lie in (1/2,1): {what} = {x}"
        )));
    }
    Ok(())
}

fn check_pair<T: Scalar>(a: T, b: T) -> Result<()> {
    check_open_unit_half(a, "a")?;
    check_open_unit_half(b, "b")?;
    if a > b {
        return Err(Error::BoundViolation(format!(
            "exponent bounds must satisfy a <= b, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

impl<T: Scalar> ExponentProcess<T> {
    /// `A ≡ H`; reduces the process to the Riemann–Liouville process `R_H`.
    pub fn constant(h: T) -> Result<Self> {
        check_open_unit_half(h, "H")?;
        Ok(Self {
            kind: ExponentKind::Constant,
            lower: h,
            upper: h,
            level: 0,
            grid_values: vec![h, h],
            meta: HolderMetadata {
                gamma: T::one(),
                c1_estimate: T::zero(),
                rho: T::one(),
                c_estimate: None,
            },
            source_seed: None,
        })
    }

    /// `A(s) = (a+b)/2 + ((b−a)/2) sin(2π f s)`, tabulated at `level`.
    pub fn smooth(a: T, b: T, frequency: T, level: u32) -> Result<Self> {
        check_pair(a, b)?;
        let grid = DyadicGrid::new(level)?;
        let mut p = Self {
            kind: ExponentKind::Smooth { frequency },
            lower: a,
            upper: b,
            level,
            grid_values: Vec::new(),
            meta: HolderMetadata {
                gamma: T::one(),
                c1_estimate: T::zero(),
                rho: T::one(),
                c_estimate: None,
            },
            source_seed: None,
        };
        p.grid_values = grid.points().into_iter().map(|s| p.sinusoid(s)).collect();
        p.meta.c1_estimate = p.estimate_c1(T::one());
        Ok(p)
    }

    /// Min–max normalization of the left-point Riemann–Liouville sum of `path`
    /// into `[a, b]`. Use the driving path for an adapted exponent, or a path
    /// from another stream domain for an independent one.
    pub fn riemann_liouville(hurst: T, a: T, b: T, path: &BrownianPath<T>) -> Result<Self> {
        if !(hurst > T::zero() && hurst < T::one()) {
            return Err(Error::BoundViolation(format!(
                "Hurst index must lie in (0,1), got {hurst}"
            )));
        }
        check_pair(a, b)?;
        if path.level() < 8 {
            return Err(Error::InsufficientResolution {
                level: path.level(),
                required: 8,
            });
        }
        let rl = riemann_liouville_left_sum(path, hurst);
        let (min, max) = rl
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let range = max - min;
        if !(range > T::zero()) || range <= max.abs().max(min.abs()) * T::epsilon() * lit(16.0) {
            return Err(Error::DegenerateNormalization);
        }
        let grid_values = rl
            .iter()
            .map(|&r| {
                let u = (r - min) / range;
                (a * (T::one() - u) + b * u).max(a).min(b)
            })
            .collect();
        let mut p = Self {
            kind: ExponentKind::RiemannLiouville {
                hurst,
                independent: false,
            },
            lower: a,
            upper: b,
            level: path.level(),
            grid_values,
            meta: HolderMetadata {
                gamma: (hurst - lit(GAMMA_MARGIN)).max(T::zero()),
                c1_estimate: T::zero(),
                rho: hurst,
                c_estimate: None,
            },
            source_seed: Some(path.seed()),
        };
        p.meta.c1_estimate = p.estimate_c1(p.meta.gamma.max(lit(1e-3)));
        Ok(p)
    }

    /// Piecewise-linear exponent through `values` at the points of a dyadic grid.
    pub fn tabulated(values: Vec<T>) -> Result<Self> {
        let n = values.len();
        if n < 2 || !(n - 1).is_power_of_two() {
            return Err(Error::Domain(format!(
                "tabulated exponent needs 2^L + 1 values, got {n}"
            )));
        }
        let level = (n - 1).trailing_zeros();
        DyadicGrid::new(level)?;
        for (k, &v) in values.iter().enumerate() {
            check_open_unit_half(v, &format!("value #{k}"))?;
        }
        let lower = values.iter().copied().fold(T::infinity(), T::min);
        let upper = values.iter().copied().fold(T::neg_infinity(), T::max);
        let mut p = Self {
            kind: ExponentKind::Tabulated,
            lower,
            upper,
            level,
            grid_values: values,
            // Piecewise-linear functions are Lipschitz.
            meta: HolderMetadata {
                gamma: T::one(),
                c1_estimate: T::zero(),
                rho: T::one(),
                c_estimate: None,
            },
            source_seed: None,
        };
        p.meta.c1_estimate = p.estimate_c1(T::one());
        Ok(p)
    }

    /// Reads `s,value` rows (optional header) sampled on a dyadic grid.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(s), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "{}:{}: expected `s,value`",
                    path.display(),
                    lineno + 1
                )));
            };
            match (s.parse::<f64>(), v.parse::<f64>()) {
                (Ok(s), Ok(v)) => rows.push((s, v)),
                _ if rows.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "{}:{}: non-numeric row",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let n = rows.len();
        if n < 2 || !(n - 1).is_power_of_two() {
            return Err(Error::Parse(format!(
                "{}: need 2^L + 1 rows on a dyadic grid, got {n}",
                path.display()
            )));
        }
        let step = 1.0 / (n - 1) as f64;
        for (k, &(s, _)) in rows.iter().enumerate() {
            if (s - k as f64 * step).abs() > 1e-12 {
                return Err(Error::Parse(format!(
                    "{}: row {k} has s = {s}, expected {}",
                    path.display(),
                    k as f64 * step
                )));
            }
        }
        Self::tabulated(rows.iter().map(|&(_, v)| lit(v)).collect())
    }

    /// Writes `s,value` rows at the grid points.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,value")?;
        let grid = DyadicGrid { level: self.level };
        for (k, v) in self.grid_values.iter().enumerate() {
            writeln!(w, "{},{}", grid.point::<f64>(k), v.to_f64().unwrap())?;
        }
        Ok(())
    }

    /// Level `J_A` of the grid carrying `grid_values`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn grid_values(&self) -> &[T] {
        &self.grid_values
    }

    /// True when `A` does not vary in `s` (the constant kind).
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ExponentKind::Constant)
    }

    /// Grid nodes where `A` may have a kink (none for the closed-form kinds).
    pub fn breakpoint_level(&self) -> Option<u32> {
        match self.kind {
            ExponentKind::Constant | ExponentKind::Smooth { .. } => None,
            _ => Some(self.level),
        }
    }

    fn sinusoid(&self, s: T) -> T {
        let ExponentKind::Smooth { frequency } = self.kind else {
            unreachable!()
        };
        let half: T = lit(0.5);
        let mid = (self.lower + self.upper) * half;
        let amp = (self.upper - self.lower) * half;
        (mid + amp * (T::TAU() * frequency * s).sin())
            .max(self.lower)
            .min(self.upper)
    }

    /// `A(s)` for `s ∈ [0, 1]`.
    pub fn eval(&self, s: T) -> Result<T> {
        if !(s >= T::zero() && s <= T::one()) {
            return Err(Error::Domain(format!("s = {s} outside [0,1]")));
        }
        Ok(self.value_at(s))
    }

    /// `A(s)` without the domain check; `s` is clamped into `[0, 1]`.
    #[inline]
    pub fn value_at(&self, s: T) -> T {
        match self.kind {
            ExponentKind::Constant => self.lower,
            ExponentKind::Smooth { .. } => self.sinusoid(s.max(T::zero()).min(T::one())),
            _ => self.interpolate(s),
        }
    }

    fn interpolate(&self, s: T) -> T {
        let n = self.grid_values.len() - 1;
        let x = s.max(T::zero()).min(T::one()) * from_usize::<T>(n);
        let i = x.floor();
        let idx = i.to_usize().unwrap().min(n);
        let frac = x - i;
        if frac == T::zero() || idx == n {
            return self.grid_values[idx];
        }
        let (v0, v1) = (self.grid_values[idx], self.grid_values[idx + 1]);
        (v0 + frac * (v1 - v0)).max(self.lower).min(self.upper)
    }

    /// Largest `|A(s″) − A(s′)| / |s″ − s′|^γ` over grid pairs at separations `2^{-j}`, `j <= J_A`.
    pub fn estimate_c1(&self, gamma: T) -> T {
        let v = &self.grid_values;
        let n = v.len() - 1;
        let mut best = T::zero();
        for j in 0..=self.level {
            let sep = n >> j;
            let denom = pow_pos(dyadic_step::<T>(j), gamma);
            for k in 0..=(n - sep) {
                best = best.max((v[k + sep] - v[k]).abs() / denom);
            }
        }
        best
    }

    /// Short identifier used in output metadata.
    pub fn label(&self) -> String {
        match self.kind {
            ExponentKind::Constant => format!("const:{}", self.lower),
            ExponentKind::Smooth { frequency } => {
                format!("sin:{}:{}:{}", self.lower, self.upper, frequency)
            }
            ExponentKind::RiemannLiouville { hurst, independent } => format!(
                "rl:{}:{}:{}{}",
                hurst,
                self.lower,
                self.upper,
                if independent { ":indep" } else { "" }
            ),
            ExponentKind::Tabulated => format!("table:L{}", self.level),
        }
    }
}

/// Left-point Riemann–Liouville sum `R_H(δ_{J,l}) = Σ_{m<l} (δ_{J,l} − δ_{J,m})^{H−1/2} ΔB_{J,m}`
/// at every grid point, `R_H(0) = 0`. Value `l` reads only increments `m < l`.
pub fn riemann_liouville_left_sum<T: Scalar>(path: &BrownianPath<T>, hurst: T) -> Vec<T> {
    let n = path.increments().len();
    let h = dyadic_step::<T>(path.level());
    let q = hurst - lit(0.5);
    let weights: Vec<T> = (0..=n)
        .map(|i| {
            if i == 0 {
                T::zero()
            } else {
                pow_pos(from_usize::<T>(i) * h, q)
            }
        })
        .collect();
    let inc = path.increments();
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::zero());
    for l in 1..=n {
        let mut acc = KahanSum::new();
        for (m, &d) in inc[..l].iter().enumerate() {
            acc.add(weights[l - m] * d);
        }
        out.push(acc.value());
    }
    out
}

/// Textual exponent description accepted on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSpec {
    Constant(f64),
    Sinusoid { a: f64, b: f64, frequency: f64 },
    RiemannLiouville { hurst: f64, a: f64, b: f64, independent: bool },
    Table { source: String, values: Vec<f64> },
}

impl ExponentSpec {
    /// Parses `const:<H>`, `sin:<a>:<b>:<f>`, `rl:<H>:<a>:<b>[:indep]` or `file:<path>`.
    pub fn parse(text: &str) -> Result<Self> {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in exponent `{text}`")))
        };
        let parts: Vec<&str> = text.split(':').collect();
        let spec = match parts.as_slice() {
            ["const", h] => Self::Constant(num(h)?),
            ["sin", a, b, f] => Self::Sinusoid {
                a: num(a)?,
                b: num(b)?,
                frequency: num(f)?,
            },
            ["rl", h, a, b] => Self::RiemannLiouville {
                hurst: num(h)?,
                a: num(a)?,
                b: num(b)?,
                independent: false,
            },
            ["rl", h, a, b, "indep"] => Self::RiemannLiouville {
                hurst: num(h)?,
                a: num(a)?,
                b: num(b)?,
                independent: true,
            },
            ["file", ..] => {
                let path = &text["file:".len()..];
                let table = ExponentProcess::<f64>::from_csv(Path::new(path))?;
                Self::Table {
                    source: path.to_string(),
                    values: table.grid_values,
                }
            }
            _ => {
                return Err(Error::Parse(format!(
                    "unrecognized exponent `{text}`; expected const:<H>, sin:<a>:<b>:<f>, rl:<H>:<a>:<b>[:indep] or file:<path>"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the bounds without building anything.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant(h) => check_open_unit_half(h, "H"),
            Self::Sinusoid { a, b, .. } => check_pair(a, b),
            Self::RiemannLiouville { hurst, a, b, .. } => {
                if !(hurst > 0.0 && hurst < 1.0) {
                    return Err(Error::BoundViolation(format!(
                        "Hurst index must lie in (0,1), got {hurst}"
                    )));
                }
                check_pair(a, b)
            }
            Self::Table { ref values, .. } => {
                for &v in values {
                    check_open_unit_half(v, "table value")?;
                }
                Ok(())
            }
        }
    }

    /// True when the exponent does not depend on the seed.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Self::RiemannLiouville { .. })
    }

    /// Builds the exponent paired with `driving`, tabulated at the driving level.
    pub fn build<T: Scalar>(&self, driving: &BrownianPath<T>) -> Result<ExponentProcess<T>> {
        match *self {
            Self::Constant(h) => ExponentProcess::constant(lit(h)),
            Self::Sinusoid { a, b, frequency } => {
                ExponentProcess::smooth(lit(a), lit(b), lit(frequency), driving.level())
            }
            Self::RiemannLiouville {
                hurst,
                a,
                b,
                independent,
            } => {
                if independent {
                    let noise =
                        BrownianPath::sample_in_domain(driving.seed(), DOMAIN_EXPONENT, driving.level())?;
                    let mut p = ExponentProcess::riemann_liouville(lit(hurst), lit(a), lit(b), &noise)?;
                    p.kind = ExponentKind::RiemannLiouville {
                        hurst: lit(hurst),
                        independent: true,
                    };
                    Ok(p)
                } else {
                    ExponentProcess::riemann_liouville(lit(hurst), lit(a), lit(b), driving)
                }
            }
            Self::Table { ref values, .. } => {
                ExponentProcess::tabulated(values.iter().map(|&v| lit(v)).collect())
            }
        }
    }

    /// Smallest value the exponent can take.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::Sinusoid { a, .. } | Self::RiemannLiouville { a, .. } => a,
            Self::Table { ref values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Declared mean-square Hölder order ρ.
    pub fn rho(&self) -> f64 {
        match *self {
            Self::RiemannLiouville { hurst, .. } => hurst,
            _ => 1.0,
        }
    }
}

impl fmt::Display for ExponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(h) => write!(f, "const:{h}"),
            Self::Sinusoid { a, b, frequency } => write!(f, "sin:{a}:{b}:{frequency}"),
            Self::RiemannLiouville {
                hurst,
                a,
                b,
                independent,
            } => write!(
                f,
                "rl:{hurst}:{a}:{b}{}",
                if *independent { ":indep" } else { "" }
            ),
            Self::Table { source, .. } => write!(f, "file:{source}"),
        }
    }
}

/// Monte Carlo estimate of `E|A(x) − A(y)|²` at dyadic separations.
#[derive(Debug, Clone, Serialize)]
pub struct MeanSquareHolderReport<T> {
    /// Separation levels `j` (separation `2^{-j}`).
    pub levels: Vec<u32>,
    pub mean_square: Vec<T>,
    /// Slope of `log₂ E|ΔA|²` against `log₂` separation; `None` when degenerate.
    pub slope: Option<T>,
    pub degenerate: bool,
    pub target: T,
    pub tolerance: T,
    pub passes: bool,
}

/// Checks `E|A(x)−A(y)|² <= c |x−y|^{2ρ}` by fitting the log–log slope over `levels`.
///
/// `levels` are separation levels `j` with `j <= grid_level`; each level averages
/// every grid pair at distance `2^{-j}` over `n_seeds` replicate exponents.
pub fn check_mean_square_holder<T: Scalar>(
    spec: &ExponentSpec,
    rho: T,
    n_seeds: usize,
    grid_level: u32,
    levels: &[u32],
    master_seed: u64,
    tolerance: T,
) -> Result<MeanSquareHolderReport<T>> {
    let half: T = lit(0.5);
    if !(rho > half && rho <= T::one()) {
        return Err(Error::BoundViolation(format!(
            "mean-square order must lie in (1/2,1], got {rho}"
        )));
    }
    if let Some(&j) = levels.iter().find(|&&j| j > grid_level) {
        return Err(Error::InsufficientResolution {
            level: grid_level,
            required: j,
        });
    }
    let mut sums = vec![T::zero(); levels.len()];
    let n = 1usize << grid_level;
    for i in 0..n_seeds {
        let path = BrownianPath::<T>::sample(replicate_seed(master_seed, i), grid_level)?;
        let a = spec.build(&path)?;
        let grid = DyadicGrid { level: grid_level };
        let vals: Vec<T> = grid.points::<T>().into_iter().map(|s| a.value_at(s)).collect();
        for (slot, &j) in sums.iter_mut().zip(levels) {
            let sep = n >> j;
            let count = n + 1 - sep;
            let ms: T = (0..count)
                .map(|k| {
                    let d = vals[k + sep] - vals[k];
                    d * d
                })
                .sum::<T>()
                / from_usize::<T>(count);
            *slot = *slot + ms;
        }
    }
    let mean_square: Vec<T> = sums
        .into_iter()
        .map(|s| s / from_usize::<T>(n_seeds.max(1)))
        .collect();
    let target = rho + rho;
    let degenerate = mean_square.iter().any(|&m| !(m > T::zero()));
    let slope = if degenerate {
        None
    } else {
        let xs: Vec<T> = levels.iter().map(|&j| -T::from_u32(j).unwrap()).collect();
        let ys: Vec<T> = mean_square.iter().map(|m| m.log2()).collect();
        linear_fit(&xs, &ys).map(|f| f.slope)
    };
    let passes = match slope {
        Some(s) => s >= target - tolerance,
        None => degenerate,
    };
    Ok(MeanSquareHolderReport {
        levels: levels.to_vec(),
        mean_square,
        slope,
        degenerate,
        target,
        tolerance,
        passes,
    })
}
