//! Composite Gauss–Legendre quadrature with geometric grading toward
//! integrable singularities.
//!
//! The kernel `(t−s)_+^{A(s)−1/2}` is continuous but its derivative blows up
//! at `s = t`. Panels are bisected toward each singular point until a panel
//! is no longer than its distance to the singularity, which keeps every
//! Gauss–Legendre panel inside a fixed Bernstein ellipse of analyticity.

use crate::scalar::{lit, Scalar};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// `m`-point rule; nodes found by Newton iteration on `P_m` in `f64`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(lit(x));
            weights.push(lit(2.0 / ((1.0 - x * x) * dp * dp)));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Single-panel rule on `[a, b]`.
    #[inline]
    pub fn integrate<F: Fn(T) -> T>(&self, f: &F, a: T, b: T) -> T {
        let half: T = lit(0.5);
        let c = (a + b) * half;
        let r = (b - a) * half;
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(c + r * x);
        }
        acc * r
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    if m == 1 {
        return (x, 1.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite integrator over `[a, b]`.
///
/// `cuts` are points where the integrand may have a kink (panel boundaries
/// are forced there); `singular` are points toward which panels are graded.
/// Grading stops once a panel adjacent to a singularity is shorter than
/// `h_min` and at least `min_depth` bisections have been applied.
pub struct GradedIntegrator<'a, T> {
    pub rule: &'a GaussLegendre<T>,
    pub min_depth: u32,
    pub h_min: T,
}

impl<T: Scalar> GradedIntegrator<'_, T> {
    pub fn integrate<F: Fn(T) -> T>(&self, f: &F, a: T, b: T, cuts: &[T], singular: &[T]) -> T {
        if !(b > a) {
            return T::zero();
        }
        let mut points: Vec<T> = Vec::with_capacity(cuts.len() + singular.len() + 2);
        points.push(a);
        points.extend(
            cuts.iter()
                .chain(singular)
                .copied()
                .filter(|&x| x > a && x < b),
        );
        points.push(b);
        points.sort_by(|x, y| x.partial_cmp(y).unwrap());
        points.dedup();
        let mut acc = T::zero();
        for w in points.windows(2) {
            acc = acc + self.graded(f, w[0], w[1], singular, 0);
        }
        acc
    }

    fn graded<F: Fn(T) -> T>(&self, f: &F, x: T, y: T, singular: &[T], depth: u32) -> T {
        let len = y - x;
        let near = singular.iter().any(|&s| {
            let d = if s < x {
                x - s
            } else if s > y {
                s - y
            } else {
                T::zero()
            };
            d < len
        });
        if !near || (len <= self.h_min && depth >= self.min_depth) || depth >= 60 {
            return self.rule.integrate(f, x, y);
        }
        let mid = (x + y) * lit(0.5);
        self.graded(f, x, mid, singular, depth + 1) + self.graded(f, mid, y, singular, depth + 1)
    }
}
