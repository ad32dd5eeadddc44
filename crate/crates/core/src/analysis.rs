//! Verification harness: convergence rates, windowed Hölder exponents and
//! the growth/modulus checks on the Brownian input.
//!
//! Every Monte Carlo loop derives replicate seeds from a master seed and sums
//! replicate statistics in replicate order, so reports are reproducible
//! bit-for-bit whatever the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::brownian::{BrownianPath, HaarCoefficients};
use crate::error::{Error, Result};
use crate::exponent::{ExponentProcess, ExponentSpec};
use crate::kernel::{KernelContext, QuadraturePolicy};
use crate::rng::replicate_seed;
use crate::scalar::{dyadic_step, from_usize, linear_fit, lit, KahanSum, Scalar};
use crate::simulator::{simulate_hat, simulate_tilde, PathSeries, REFERENCE_MAX_LEVEL};

/// Minimum number of levels in a rate fit.
pub const MIN_RATE_LEVELS: usize = 4;
/// Headroom between the finest study level and the reference level.
pub const REFERENCE_HEADROOM: u32 = 4;
/// Clamp (and zero-oscillation value) of the Hölder estimate.
pub const HOLDER_CAP: f64 = 1.05;

/// Per-level errors and the fitted `log₂(error)` slope against `J`.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport<T> {
    pub statistic: String,
    pub levels: Vec<u32>,
    pub errors: Vec<T>,
    pub fitted_slope: Option<T>,
    pub slope_stderr: Option<T>,
    pub target_slope: T,
    pub n_seeds: usize,
}

impl<T: Scalar> RateReport<T> {
    fn new(statistic: &str, levels: Vec<u32>, errors: Vec<T>, target: T, n_seeds: usize) -> Self {
        let (xs, ys): (Vec<T>, Vec<T>) = levels
            .iter()
            .zip(&errors)
            .filter(|(_, &e)| e > T::zero())
            .map(|(&j, &e)| (T::from_u32(j).unwrap(), e.log2()))
            .unzip();
        let fit = (xs.len() >= 3).then(|| linear_fit(&xs, &ys)).flatten();
        Self {
            statistic: statistic.to_string(),
            levels,
            errors,
            fitted_slope: fit.map(|f| f.slope),
            slope_stderr: fit.map(|f| f.slope_stderr),
            target_slope: target,
            n_seeds,
        }
    }

    /// `errors[first] / errors[last]`.
    pub fn total_reduction(&self) -> T {
        self.errors[0] / self.errors[self.errors.len() - 1]
    }
}

/// `max_i |a_i − b_i|` over a shared time grid.
pub fn sup_distance<T: Scalar>(a: &PathSeries<T>, b: &PathSeries<T>) -> Result<T> {
    if a.times != b.times {
        return Err(Error::GridMismatch(format!(
            "{} vs {} points",
            a.times.len(),
            b.times.len()
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}

fn check_headroom(max_level: u32, ref_level: u32) -> Result<()> {
    if ref_level < max_level + REFERENCE_HEADROOM {
        return Err(Error::BoundViolation(format!(
            "J_ref must exceed J by ≥ {REFERENCE_HEADROOM} (J = {max_level}, J_ref = {ref_level})"
        )));
    }
    Ok(())
}

/// Sup-distances to the reference on one Brownian trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SingleOmegaReport<T> {
    pub seed: u64,
    pub reference_level: u32,
    pub tilde: RateReport<T>,
    pub hat: RateReport<T>,
    /// `sup |X̃^J − X̂^J|` per level.
    pub tilde_vs_hat: Vec<T>,
}

/// `sup_t |X̃^J − X̂^{J_ref}|` and `sup_t |X̂^J − X̂^{J_ref}|` for each `J`,
/// all on the trajectory of `seed` (coarse paths are restrictions of the
/// reference path, exponents rebuilt at each level).
pub fn single_omega_convergence<T: Scalar>(
    seed: u64,
    spec: &ExponentSpec,
    levels: &[u32],
    ref_level: u32,
    times: &[T],
) -> Result<SingleOmegaReport<T>> {
    let max_level = *levels
        .iter()
        .max()
        .ok_or(Error::InsufficientLevels { got: 0, required: 1 })?;
    check_headroom(max_level, ref_level)?;
    if ref_level > REFERENCE_MAX_LEVEL {
        return Err(Error::MemoryGuard {
            level: ref_level,
            max: REFERENCE_MAX_LEVEL,
        });
    }
    let fine = BrownianPath::<T>::sample(seed, ref_level)?;
    let fine_exponent = spec.build(&fine)?;
    let reference = simulate_hat(&fine, &fine_exponent, times)?;
    let mut tilde = Vec::new();
    let mut hat = Vec::new();
    let mut between = Vec::new();
    for &j in levels {
        let path = fine.coarsen(j)?;
        let exponent = spec.build(&path)?;
        let xt = simulate_tilde(&path, &exponent, times)?;
        let xh = simulate_hat(&path, &exponent, times)?;
        tilde.push(sup_distance(&xt, &reference)?);
        hat.push(sup_distance(&xh, &reference)?);
        between.push(sup_distance(&xt, &xh)?);
    }
    let target = -(lit::<T>(spec.lower_bound()) - lit(0.5));
    Ok(SingleOmegaReport {
        seed,
        reference_level: ref_level,
        tilde: RateReport::new("sup |X~^J - X^ref|", levels.to_vec(), tilde, target, 1),
        hat: RateReport::new("sup |X^^J - X^ref|", levels.to_vec(), hat, target, 1),
        tilde_vs_hat: between,
    })
}

/// Haar coefficients `⟨K_t,𝒰⟩` and `⟨K_t,h_{j,k}⟩` at one time, `j < depth`.
struct HaarWeights<T> {
    scaling: T,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> HaarWeights<T> {
    fn new(ctx: &KernelContext<'_, T>, t: T, depth: u32) -> Self {
        let rows = (0..depth)
            .map(|j| {
                let width = dyadic_step::<T>(j);
                let active = ((t / width).ceil().to_usize().unwrap_or(0)).min(1usize << j);
                (0..active).map(|k| ctx.wavelet_coefficient(t, j, k)).collect()
            })
            .collect();
        Self {
            scaling: ctx.mean_kernel(t, 0, 0),
            rows,
        }
    }

    /// Partial sums `X^0 ..= X^depth`.
    fn partial_sums(&self, coeffs: &HaarCoefficients<T>) -> Vec<T> {
        let mut acc = KahanSum::new();
        acc.add(self.scaling * coeffs.eta0);
        let mut out = vec![acc.value()];
        for (j, row) in self.rows.iter().enumerate() {
            for (w, &e) in row.iter().zip(coeffs.level(j as u32)) {
                acc.add(*w * e);
            }
            out.push(acc.value());
        }
        out
    }
}

/// Monte Carlo `E|X^J(t) − X̃^J(t)|` per level with the fitted slope, to be
/// compared with `−(ρ − 1/2)`.
pub fn l1_rate_study<T: Scalar>(
    spec: &ExponentSpec,
    levels: &[u32],
    t_probe: T,
    n_seeds: usize,
    master_seed: u64,
    policy: QuadraturePolicy<T>,
) -> Result<RateReport<T>> {
    let rho = spec.rho();
    if rho <= 0.5 {
        return Err(Error::BoundViolation(format!(
            "mean-square order ρ must exceed 1/2, got {rho}"
        )));
    }
    if levels.len() < MIN_RATE_LEVELS {
        return Err(Error::InsufficientLevels {
            got: levels.len(),
            required: MIN_RATE_LEVELS,
        });
    }
    if !(t_probe >= T::zero() && t_probe <= T::one()) {
        return Err(Error::Domain(format!("t = {t_probe} outside [0,1]")));
    }
    let top = *levels.iter().max().unwrap();
    let shared = if spec.is_deterministic() {
        let probe = BrownianPath::<T>::sample(master_seed, top)?;
        let exponent = spec.build(&probe)?;
        let ctx = KernelContext::new(&exponent, policy)?;
        Some(HaarWeights::new(&ctx, t_probe, top))
    } else {
        None
    };
    let per_seed: Vec<Vec<T>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| -> Result<Vec<T>> {
            let path = BrownianPath::<T>::sample(replicate_seed(master_seed, i), top)?;
            let exponent = spec.build(&path)?;
            let coeffs = HaarCoefficients::from_path(&path)?;
            let haar = match &shared {
                Some(w) => w.partial_sums(&coeffs),
                None => {
                    let ctx = KernelContext::new(&exponent, policy)?;
                    HaarWeights::new(&ctx, t_probe, top).partial_sums(&coeffs)
                }
            };
            levels
                .iter()
                .map(|&j| {
                    let coarse = path.coarsen(j)?;
                    let tilde = simulate_tilde(&coarse, &exponent, &[t_probe])?;
                    Ok((haar[j as usize] - tilde.values[0]).abs())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = from_usize::<T>(n_seeds.max(1));
    let errors = (0..levels.len())
        .map(|i| per_seed.iter().map(|row| row[i]).collect::<KahanSum<T>>().value() / n)
        .collect();
    Ok(RateReport::new(
        "E|X^J(t) - X~^J(t)|",
        levels.to_vec(),
        errors,
        -(lit::<T>(rho) - lit(0.5)),
        n_seeds,
    ))
}

/// Windowed oscillation estimate of the uniform Hölder exponent.
#[derive(Debug, Clone, Serialize)]
pub struct HolderReport<T> {
    pub window: (T, T),
    pub levels: Vec<u32>,
    pub oscillations: Vec<T>,
    pub estimate: T,
    /// Some oscillation vanished; the estimate is then pinned at the cap.
    pub degenerate: bool,
    /// `min A` on the window, when an exponent was supplied.
    pub min_a: Option<T>,
}

/// Level `G` such that `times[i] = i 2^{-G}` exactly.
fn dyadic_level_of<T: Scalar>(times: &[T]) -> Result<u32> {
    let n = times.len().saturating_sub(1);
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::OffGrid(format!(
            "{} samples do not form a dyadic grid",
            times.len()
        )));
    }
    let level = n.trailing_zeros();
    let step = dyadic_step::<T>(level);
    if times
        .iter()
        .enumerate()
        .any(|(i, &t)| t != from_usize::<T>(i) * step)
    {
        return Err(Error::OffGrid("series times are not the dyadic grid".into()));
    }
    Ok(level)
}

/// `osc_j = max |X(δ_{j,k+1}) − X(δ_{j,k})|` over dyadic pairs inside the
/// window; the estimate is minus the least-squares slope of `log₂ osc_j`
/// against `j`, clamped to `[0, 1.05]`.
pub fn estimate_uniform_holder<T: Scalar>(
    series: &PathSeries<T>,
    window: (T, T),
    levels: std::ops::RangeInclusive<u32>,
) -> Result<HolderReport<T>> {
    let grid_level = dyadic_level_of(&series.times)?;
    let (lo, hi) = window;
    if !(T::zero() <= lo && lo < hi && hi <= T::one()) {
        return Err(Error::Domain(format!("bad window [{lo}, {hi}]")));
    }
    let n = 1usize << grid_level;
    let scale = from_usize::<T>(n);
    let (lo_idx, hi_idx) = (lo * scale, hi * scale);
    if lo_idx.fract() != T::zero() || hi_idx.fract() != T::zero() {
        return Err(Error::OffGrid(format!(
            "window [{lo}, {hi}] is not on the level-{grid_level} grid"
        )));
    }
    let (lo_idx, hi_idx) = (lo_idx.to_usize().unwrap(), hi_idx.to_usize().unwrap());
    if *levels.end() + 2 > grid_level {
        return Err(Error::InsufficientResolution {
            level: grid_level,
            required: levels.end() + 2,
        });
    }
    let mut oscillations = Vec::new();
    for j in levels.clone() {
        let stride = n >> j;
        let first = lo_idx.div_ceil(stride);
        let last = hi_idx / stride;
        if last <= first {
            return Err(Error::Domain(format!(
                "window [{lo}, {hi}] holds no dyadic pair at level {j}"
            )));
        }
        let v = &series.values;
        let osc = (first..last).fold(T::zero(), |m, k| {
            m.max((v[(k + 1) * stride] - v[k * stride]).abs())
        });
        oscillations.push(osc);
    }
    let levels: Vec<u32> = levels.collect();
    let degenerate = oscillations.iter().any(|&o| !(o > T::zero()));
    let cap: T = lit(HOLDER_CAP);
    let estimate = if degenerate {
        cap
    } else {
        let xs: Vec<T> = levels.iter().map(|&j| T::from_u32(j).unwrap()).collect();
        let ys: Vec<T> = oscillations.iter().map(|o| o.log2()).collect();
        match linear_fit(&xs, &ys) {
            Some(f) => (-f.slope).max(T::zero()).min(cap),
            None => return Err(Error::InsufficientLevels { got: xs.len(), required: 2 }),
        }
    };
    Ok(HolderReport {
        window,
        levels,
        oscillations,
        estimate,
        degenerate,
        min_a: None,
    })
}

/// Per-window comparison of the Hölder estimate with `min A` on the window.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityCheck<T> {
    pub windows: Vec<HolderReport<T>>,
    /// `estimate − min A` per window.
    pub gaps: Vec<T>,
    pub passes: Vec<bool>,
    pub tolerance: T,
}

impl<T: Scalar> RegularityCheck<T> {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }
}

/// Checks `estimate >= min_{window} A − tolerance` on each window.
pub fn check_regularity_lowerbound<T: Scalar>(
    series: &PathSeries<T>,
    exponent: &ExponentProcess<T>,
    windows: &[(T, T)],
    levels: std::ops::RangeInclusive<u32>,
    tolerance: T,
) -> Result<RegularityCheck<T>> {
    if !(exponent.meta.gamma > lit(0.5)) {
        return Err(Error::BoundViolation(format!(
            "exponent Hölder order γ = {} must exceed 1/2",
            exponent.meta.gamma
        )));
    }
    let mut reports = Vec::with_capacity(windows.len());
    let mut gaps = Vec::with_capacity(windows.len());
    let mut passes = Vec::with_capacity(windows.len());
    for &w in windows {
        let mut r = estimate_uniform_holder(series, w, levels.clone())?;
        let min_a = series
            .times
            .iter()
            .filter(|&&t| t >= w.0 && t <= w.1)
            .map(|&t| exponent.value_at(t))
            .fold(T::infinity(), T::min);
        r.min_a = Some(min_a);
        let gap = r.estimate - min_a;
        gaps.push(gap);
        passes.push(gap >= -tolerance);
        reports.push(r);
    }
    Ok(RegularityCheck {
        windows: reports,
        gaps,
        passes,
        tolerance,
    })
}

/// `max_l |ΔB_{J,l}| / sqrt(2 2^{-J} ln 2^J)`; tends to 1 as `J` grows.
pub fn levy_modulus_ratio<T: Scalar>(path: &BrownianPath<T>) -> Result<T> {
    if path.level() < 10 {
        return Err(Error::InsufficientResolution {
            level: path.level(),
            required: 10,
        });
    }
    let h = dyadic_step::<T>(path.level());
    let modulus = (lit::<T>(2.0) * h * (T::one() / h).ln()).sqrt();
    let max = path
        .increments()
        .iter()
        .fold(T::zero(), |m, &d| m.max(d.abs()));
    Ok(max / modulus)
}

/// `max_{j,k} |ε_{j,k}| / sqrt(j + 1)`, a proxy for the random constant bounding
/// the coefficient growth.
pub fn coefficient_growth_check<T: Scalar>(coeffs: &HaarCoefficients<T>) -> Result<T> {
    if coeffs.depth() < 4 {
        return Err(Error::InsufficientResolution {
            level: coeffs.depth(),
            required: 4,
        });
    }
    Ok((0..coeffs.depth())
        .map(|j| {
            let norm = T::from_u32(j + 1).unwrap().sqrt();
            coeffs
                .level(j)
                .iter()
                .fold(T::zero(), |m, &e| m.max(e.abs() / norm))
        })
        .fold(T::zero(), T::max))
}

/// Monte Carlo second moments of reference-path increments.
#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovReport<T> {
    pub pairs: Vec<(T, T)>,
    pub mean_square: Vec<T>,
    /// Slope of `log₂ E|X(t″)−X(t′)|²` against `log₂ |t″−t′|`.
    pub slope: Option<T>,
    pub slope_stderr: Option<T>,
    /// `2 a̲`.
    pub target: T,
    pub tolerance: T,
    pub passes: bool,
    pub n_seeds: usize,
    pub reference_level: u32,
}

/// Estimates `E|X(t″) − X(t′)|²` with `X̂^{J_ref}` standing in for `X` and
/// checks the fitted slope against `2 a̲ − tolerance`.
pub fn kolmogorov_moment_check<T: Scalar>(
    spec: &ExponentSpec,
    pairs: &[(T, T)],
    n_seeds: usize,
    master_seed: u64,
    ref_level: u32,
    tolerance: T,
) -> Result<KolmogorovReport<T>> {
    if n_seeds < 100 {
        return Err(Error::Domain(format!(
            "moment check needs at least 100 seeds, got {n_seeds}"
        )));
    }
    let mut times: Vec<T> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let index = |t: T| times.iter().position(|&x| x == t).unwrap();
    let slots: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (index(a), index(b))).collect();
    let per_seed: Vec<Vec<T>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| -> Result<Vec<T>> {
            let path = BrownianPath::<T>::sample(replicate_seed(master_seed, i), ref_level)?;
            let exponent = spec.build(&path)?;
            let x = simulate_hat(&path, &exponent, &times)?;
            Ok(slots
                .iter()
                .map(|&(a, b)| {
                    let d = x.values[b] - x.values[a];
                    d * d
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = from_usize::<T>(n_seeds);
    let mean_square: Vec<T> = (0..pairs.len())
        .map(|i| per_seed.iter().map(|r| r[i]).collect::<KahanSum<T>>().value() / n)
        .collect();
    let (xs, ys): (Vec<T>, Vec<T>) = pairs
        .iter()
        .zip(&mean_square)
        .filter(|((a, b), &m)| a != b && m > T::zero())
        .map(|(&(a, b), &m)| ((b - a).abs().log2(), m.log2()))
        .unzip();
    let fit = linear_fit(&xs, &ys);
    let target = lit::<T>(2.0 * spec.lower_bound());
    let passes = fit.is_some_and(|f| f.slope >= target - tolerance);
    Ok(KolmogorovReport {
        pairs: pairs.to_vec(),
        mean_square,
        slope: fit.map(|f| f.slope),
        slope_stderr: fit.map(|f| f.slope_stderr),
        target,
        tolerance,
        passes,
        n_seeds,
        reference_level: ref_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::DyadicGrid;
    use crate::simulator::Scheme;

    fn series_of(values: Vec<f64>) -> PathSeries<f64> {
        let level = (values.len() - 1).trailing_zeros();
        PathSeries {
            scheme: Scheme::Hat,
            level,
            times: DyadicGrid { level }.points(),
            values,
            exponent_ref: String::new(),
            seed: 0,
        }
    }

    #[test]
    fn sup_distance_examples() {
        let a = series_of((0..=8).map(|i| i as f64).collect());
        assert_eq!(sup_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.values.iter_mut().for_each(|v| *v += 0.5);
        assert_eq!(sup_distance(&a, &b).unwrap(), 0.5);
        let mut c = a.clone();
        c.times.pop();
        c.values.pop();
        assert!(matches!(sup_distance(&a, &c), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn holder_of_linear_function() {
        let s = series_of(DyadicGrid { level: 10 }.points());
        let r = estimate_uniform_holder(&s, (0.0, 1.0), 2..=8).unwrap();
        assert!((r.estimate - 1.0).abs() < 0.01);
        assert!(!r.degenerate);
        for w in r.oscillations.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn holder_of_constant_is_degenerate() {
        let s = series_of(vec![3.0; 1025]);
        let r = estimate_uniform_holder(&s, (0.25, 0.75), 3..=8).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.estimate, HOLDER_CAP);
    }

    #[test]
    fn holder_input_validation() {
        let s = series_of(DyadicGrid { level: 8 }.points());
        assert!(matches!(
            estimate_uniform_holder(&s, (0.1, 0.5), 2..=4),
            Err(Error::OffGrid(_))
        ));
        assert!(matches!(
            estimate_uniform_holder(&s, (0.0, 1.0), 2..=7),
            Err(Error::InsufficientResolution { .. })
        ));
        let mut bad = s.clone();
        bad.times[3] += 1e-9;
        assert!(matches!(
            estimate_uniform_holder(&bad, (0.0, 1.0), 2..=4),
            Err(Error::OffGrid(_))
        ));
        assert!(estimate_uniform_holder(&s, (0.0, 0.25), 1..=4).is_err());
    }

    #[test]
    fn holder_invariant_under_scaling_and_sign() {
        let path = BrownianPath::<f64>::sample(4, 10).unwrap();
        let s = series_of(path.values().to_vec());
        let base = estimate_uniform_holder(&s, (0.0, 1.0), 2..=8).unwrap();
        let mut flipped = s.clone();
        flipped.values.iter_mut().for_each(|v| *v *= -3.5);
        let other = estimate_uniform_holder(&flipped, (0.0, 1.0), 2..=8).unwrap();
        assert!((base.estimate - other.estimate).abs() < 1e-12);
    }

    #[test]
    fn levy_ratio_examples() {
        let zero = BrownianPath::from_increments(0, &vec![0.0f64; 1 << 10]).unwrap();
        assert_eq!(levy_modulus_ratio(&zero).unwrap(), 0.0);
        let coarse = BrownianPath::<f64>::sample(1, 9).unwrap();
        assert!(levy_modulus_ratio(&coarse).is_err());
    }

    #[test]
    fn growth_proxy_examples() {
        let eps: Vec<Vec<f64>> = (0..5).map(|j| vec![0.0; 1 << j]).collect();
        let zero = HaarCoefficients::from_parts(0.0, eps).unwrap();
        assert_eq!(coefficient_growth_check(&zero).unwrap(), 0.0);
        let shallow = HaarCoefficients::from_parts(0.0, vec![vec![1.0], vec![0.0, 0.0]]).unwrap();
        assert!(coefficient_growth_check(&shallow).is_err());
    }

    #[test]
    fn rate_report_slope() {
        let r: RateReport<f64> = RateReport::new("x", vec![1, 2, 3, 4], vec![0.5, 0.25, 0.125, 0.0625], -1.0, 1);
        assert!((r.fitted_slope.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(r.total_reduction(), 8.0);
        let r: RateReport<f64> = RateReport::new("x", vec![1, 2, 3], vec![0.5, 0.0, 0.125], -1.0, 1);
        assert!(r.fitted_slope.is_none());
    }

    #[test]
    fn headroom_rule() {
        let e = single_omega_convergence::<f64>(1, &ExponentSpec::Constant(0.7), &[6, 14], 15, &[0.5])
            .unwrap_err();
        assert!(e.to_string().contains("J_ref must exceed J by ≥ 4"));
    }

    #[test]
    fn l1_study_needs_levels_and_rho() {
        let p = QuadraturePolicy::<f64>::simulation();
        assert!(matches!(
            l1_rate_study(&ExponentSpec::Constant(0.7), &[4, 5, 6], 0.7, 4, 1, p),
            Err(Error::InsufficientLevels { .. })
        ));
        let rough = ExponentSpec::RiemannLiouville {
            hurst: 0.4,
            a: 0.6,
            b: 0.9,
            independent: false,
        };
        assert!(l1_rate_study(&rough, &[4, 5, 6, 7], 0.7, 4, 1, p).is_err());
    }

    #[test]
    fn kolmogorov_zero_separation_and_seed_floor() {
        let spec = ExponentSpec::Constant(0.75);
        assert!(kolmogorov_moment_check::<f64>(&spec, &[(0.5, 0.5)], 10, 1, 8, 0.2).is_err());
        let r = kolmogorov_moment_check::<f64>(
            &spec,
            &[(0.5, 0.5), (0.5, 0.625), (0.5, 0.5625), (0.5, 0.53125)],
            100,
            1,
            9,
            0.2,
        )
        .unwrap();
        assert_eq!(r.mean_square[0], 0.0);
        assert!(r.slope.is_some());
    }
}
