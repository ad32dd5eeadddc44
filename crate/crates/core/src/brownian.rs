//! Brownian paths on dyadic grids, midpoint refinement and Haar coefficients.
//!
//! Path values are kept on a fixed-point lattice of spacing `128 ε` (`2^-45`
//! for `f64`). With `|B| < 2^7` every sum and difference of lattice values is
//! exact, so the telescoping identities between levels hold bit-for-bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::{stream_id, NormalStream, DOMAIN_DRIVING};
use crate::scalar::{dyadic_step, lit, Scalar};

/// Finest level a path may be sampled at: `2^26` increments of 8 bytes.
pub const MAX_LEVEL: u32 = 26;

const DUMP_MAGIC: &[u8; 7] = b"MPREBM1";

/// Points `k 2^{-J}`, `k = 0..=2^J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicGrid {
    pub level: u32,
}

impl DyadicGrid {
    pub fn new(level: u32) -> Result<Self> {
        check_level(level)?;
        Ok(Self { level })
    }

    /// Number of cells, `2^J`.
    pub fn cells(&self) -> usize {
        1usize << self.level
    }

    pub fn step<T: Scalar>(&self) -> T {
        dyadic_step(self.level)
    }

    pub fn point<T: Scalar>(&self, k: usize) -> T {
        T::from_usize(k).unwrap() * self.step::<T>()
    }

    pub fn points<T: Scalar>(&self) -> Vec<T> {
        (0..=self.cells()).map(|k| self.point(k)).collect()
    }
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            level,
            max: MAX_LEVEL,
        });
    }
    Ok(())
}

#[inline]
fn quantum<T: Scalar>() -> T {
    T::epsilon() * lit(128.0)
}

#[inline]
fn quantize<T: Scalar>(x: T) -> T {
    let q = quantum::<T>();
    (x / q).round() * q
}

/// Brownian motion sampled at the points of a dyadic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath<T> {
    level: u32,
    seed: u64,
    domain: u32,
    increments: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> BrownianPath<T> {
    /// Samples the driving Brownian motion at level `level`.
    ///
    /// The path is built from `B(1)` by successive midpoint refinements, so
    /// `sample(seed, J + 1) == sample(seed, J).refine()`.
    pub fn sample(seed: u64, level: u32) -> Result<Self> {
        Self::sample_in_domain(seed, DOMAIN_DRIVING, level)
    }

    /// Same as [`BrownianPath::sample`] on an independent family of streams.
    pub fn sample_in_domain(seed: u64, domain: u32, level: u32) -> Result<Self> {
        check_level(level)?;
        let mut stream = NormalStream::new(seed, stream_id(domain, 0));
        let end = quantize(T::from_f64(stream.next_normal()).unwrap());
        let mut path = Self {
            level: 0,
            seed,
            domain,
            increments: vec![end],
            values: vec![T::zero(), end],
        };
        while path.level < level {
            path = path.refine()?;
        }
        Ok(path)
    }

    /// Builds a path from explicit increments (rounded onto the value lattice).
    pub fn from_increments(seed: u64, increments: &[T]) -> Result<Self> {
        let n = increments.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "increment count {n} is not a power of two"
            )));
        }
        let level = n.trailing_zeros();
        check_level(level)?;
        let mut values = Vec::with_capacity(n + 1);
        values.push(T::zero());
        let mut acc = T::zero();
        for &d in increments {
            acc = acc + quantize(d);
            values.push(acc);
        }
        Ok(Self::from_values(level, seed, DOMAIN_DRIVING, values))
    }

    fn from_values(level: u32, seed: u64, domain: u32, values: Vec<T>) -> Self {
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            level,
            seed,
            domain,
            increments,
            values,
        }
    }

    /// Midpoint (Brownian bridge) refinement to level `J + 1` on the same trajectory.
    ///
    /// The bridge draw for cell `l` is index `l` of stream `(seed, J + 1)`.
    pub fn refine(&self) -> Result<Self> {
        let next = self.level + 1;
        check_level(next)?;
        let sd: T = lit((-((self.level + 2) as f64) / 2.0).exp2());
        let half: T = lit(0.5);
        let mut stream = NormalStream::new(self.seed, stream_id(self.domain, next));
        let mut values = Vec::with_capacity(2 * self.increments.len() + 1);
        values.push(self.values[0]);
        for w in self.values.windows(2) {
            let z = T::from_f64(stream.next_normal()).unwrap();
            values.push(quantize((w[0] + w[1]) * half + sd * z));
            values.push(w[1]);
        }
        Ok(Self::from_values(next, self.seed, self.domain, values))
    }

    /// Restriction to a coarser level (exact subsampling of the values).
    pub fn coarsen(&self, level: u32) -> Result<Self> {
        if level > self.level {
            return Err(Error::Domain(format!(
                "cannot coarsen level {} to finer level {level}",
                self.level
            )));
        }
        let stride = 1usize << (self.level - level);
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok(Self::from_values(level, self.seed, self.domain, values))
    }

    /// Path with every increment multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let inc: Vec<T> = self.increments.iter().map(|&d| d * factor).collect();
        let mut p = Self::from_increments(self.seed, &inc)?;
        p.domain = self.domain;
        Ok(p)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> DyadicGrid {
        DyadicGrid { level: self.level }
    }

    /// `ΔB_{J,l}`, `l = 0..2^J`.
    pub fn increments(&self) -> &[T] {
        &self.increments
    }

    /// `B(δ_{J,k})`, `k = 0..=2^J`, with `B(0) = 0`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `ΔB_{j,m}` for `j <= J`, read off the stored values.
    pub fn coarse_increment(&self, j: u32, m: usize) -> T {
        let stride = 1usize << (self.level - j);
        self.values[(m + 1) * stride] - self.values[m * stride]
    }

    /// `η₀ = B(1) − B(0)`; defined at every level.
    pub fn eta0(&self) -> T {
        self.values[self.values.len() - 1] - self.values[0]
    }

    /// Writes the increments as little-endian `f64` after the
    /// `MPREBM1 | level: u32 | seed: u64` header.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.level.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for &d in &self.increments {
            w.write_all(&d.to_f64().unwrap().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 7];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let level = u32::from_le_bytes(b4);
        check_level(level)?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let n = 1usize << level;
        let mut inc = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)
                .map_err(|_| Error::Format(format!("expected {n} increments")))?;
            inc.push(T::from_f64(f64::from_le_bytes(b8)).unwrap());
        }
        if r.read(&mut b8)? != 0 {
            return Err(Error::Format("trailing bytes".into()));
        }
        Self::from_increments(seed, &inc)
    }
}

/// `η₀` and the triangular array `ε_{j,k}`, `j < depth`, `k < 2^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients<T> {
    pub eta0: T,
    eps: Vec<Vec<T>>,
}

impl<T: Scalar> HaarCoefficients<T> {
    /// Extracts `ε_{j,k} = 2^{j/2}(ΔB_{j+1,2k} − ΔB_{j+1,2k+1})` for all `j < J`.
    pub fn from_path(path: &BrownianPath<T>) -> Result<Self> {
        if path.level == 0 {
            return Err(Error::InsufficientResolution {
                level: 0,
                required: 1,
            });
        }
        let eps = (0..path.level)
            .map(|j| {
                let scale = haar_scale::<T>(j);
                (0..1usize << j)
                    .map(|k| {
                        scale
                            * (path.coarse_increment(j + 1, 2 * k)
                                - path.coarse_increment(j + 1, 2 * k + 1))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            eta0: path.eta0(),
            eps,
        })
    }

    /// Injects coefficients directly; row `j` must hold `2^j` entries.
    pub fn from_parts(eta0: T, eps: Vec<Vec<T>>) -> Result<Self> {
        for (j, row) in eps.iter().enumerate() {
            if row.len() != 1usize << j {
                return Err(Error::Domain(format!(
                    "row {j} has {} entries, expected {}",
                    row.len(),
                    1usize << j
                )));
            }
        }
        Ok(Self { eta0, eps })
    }

    /// Number of complete levels `j` available.
    pub fn depth(&self) -> u32 {
        self.eps.len() as u32
    }

    pub fn level(&self, j: u32) -> &[T] {
        &self.eps[j as usize]
    }

    pub fn get(&self, j: u32, k: usize) -> T {
        self.eps[j as usize][k]
    }

    /// Keeps only levels `j < depth`.
    pub fn truncated(&self, depth: u32) -> Self {
        Self {
            eta0: self.eta0,
            eps: self.eps.iter().take(depth as usize).cloned().collect(),
        }
    }
}

/// Free-function form of [`HaarCoefficients::from_path`].
pub fn haar_coefficients<T: Scalar>(path: &BrownianPath<T>) -> Result<HaarCoefficients<T>> {
    HaarCoefficients::from_path(path)
}

/// `2^{j/2}`.
pub fn haar_scale<T: Scalar>(j: u32) -> T {
    lit((j as f64 / 2.0).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_exact() {
        let g = DyadicGrid::new(10).unwrap();
        let pts: Vec<f64> = g.points();
        assert_eq!(pts.len(), 1025);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[1024], 1.0);
        for w in pts.windows(2) {
            assert_eq!(w[1] - w[0], 2f64.powi(-10));
        }
        assert!(matches!(
            DyadicGrid::new(27),
            Err(Error::LevelOverflow { .. })
        ));
    }

    #[test]
    fn level_zero_single_increment() {
        let p = BrownianPath::<f64>::sample(7, 0).unwrap();
        assert_eq!(p.increments().len(), 1);
        assert_eq!(p.increments()[0], p.values()[1]);
        assert_eq!(p.values()[0], 0.0);
    }

    #[test]
    fn sampling_is_deterministic_and_nested() {
        let a = BrownianPath::<f64>::sample(11, 9).unwrap();
        let b = BrownianPath::<f64>::sample(11, 9).unwrap();
        assert_eq!(a, b);
        let c = BrownianPath::<f64>::sample(11, 10).unwrap();
        assert_eq!(a.refine().unwrap(), c);
        assert_eq!(c.coarsen(9).unwrap(), a);
    }

    #[test]
    fn level_overflow() {
        assert!(matches!(
            BrownianPath::<f64>::sample(1, 27),
            Err(Error::LevelOverflow { level: 27, .. })
        ));
    }

    #[test]
    fn telescoping_is_exact() {
        let p = BrownianPath::<f64>::sample(3, 12).unwrap();
        let mut acc = 0.0;
        for (k, &d) in p.increments().iter().enumerate() {
            assert_eq!(p.values()[k + 1] - p.values()[k], d);
            acc += d;
            assert_eq!(acc, p.values()[k + 1]);
        }
    }

    #[test]
    fn refinement_preserves_parent_increments() {
        let p = BrownianPath::<f64>::sample(5, 8).unwrap();
        let r = p.refine().unwrap();
        for (l, &d) in p.increments().iter().enumerate() {
            let children = r.increments()[2 * l] + r.increments()[2 * l + 1];
            assert_eq!(d - children, 0.0);
        }
    }

    #[test]
    fn haar_example_values() {
        let p = BrownianPath::from_increments(0, &[0.3f64, 0.1]).unwrap();
        let h = p.clone();
        let c = haar_coefficients(&h).unwrap();
        assert!((c.eta0 - 0.4).abs() < 1e-13);
        assert!((c.get(0, 0) - 0.2).abs() < 1e-13);

        let sym = BrownianPath::from_increments(0, &[0.25f64, 0.25]).unwrap();
        assert_eq!(haar_coefficients(&sym).unwrap().get(0, 0), 0.0);
    }

    #[test]
    fn haar_needs_level_one() {
        let p = BrownianPath::<f64>::sample(1, 0).unwrap();
        assert!(matches!(
            haar_coefficients(&p),
            Err(Error::InsufficientResolution { .. })
        ));
        assert_eq!(p.eta0(), p.values()[1]);
    }

    #[test]
    fn haar_refinement_consistency() {
        let p = BrownianPath::<f64>::sample(21, 7).unwrap();
        let c = haar_coefficients(&p).unwrap();
        let cr = haar_coefficients(&p.refine().unwrap()).unwrap();
        assert_eq!(cr.depth(), 8);
        assert_eq!(cr.truncated(7), c);
    }

    #[test]
    fn dump_round_trip() {
        let p = BrownianPath::<f64>::sample(99, 6).unwrap();
        let mut buf = Vec::new();
        p.write_dump(&mut buf).unwrap();
        assert_eq!(&buf[..7], b"MPREBM1");
        assert_eq!(buf.len(), 7 + 4 + 8 + 64 * 8);
        let q = BrownianPath::<f64>::read_dump(&buf[..]).unwrap();
        assert_eq!(q.values(), p.values());
        assert_eq!(q.seed(), 99);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            BrownianPath::<f64>::read_dump(&bad[..]),
            Err(Error::Format(_))
        ));
        assert!(BrownianPath::<f64>::read_dump(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn single_precision_path() {
        let p = BrownianPath::<f32>::sample(4, 10).unwrap();
        let r = p.refine().unwrap();
        for (l, &d) in p.increments().iter().enumerate() {
            assert_eq!(d, r.increments()[2 * l] + r.increments()[2 * l + 1]);
        }
    }
}
