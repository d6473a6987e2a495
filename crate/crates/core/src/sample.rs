//! Sampling grids, per-cell random streams and order-independent extremum
//! accumulators.

use crate::error::{GeomError, Result};
use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// Periodic axes omit the endpoint `hi`.
    pub periodic: bool,
}

impl Axis {
    pub fn closed(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n, periodic: false }
    }

    pub fn periodic(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n, periodic: true }
    }

    pub fn node(&self, i: usize) -> f64 {
        if self.periodic {
            self.lo + (self.hi - self.lo) * i as f64 / self.n as f64
        } else if self.n == 1 {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.n as f64
        } else {
            (self.hi - self.lo) / (self.n.max(2) - 1) as f64
        }
    }
}

/// Tensor-product grid; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.n == 0) {
            return Err(GeomError::Parameter("grid has no points".into()));
        }
        if axes.iter().any(|a| !(a.lo.is_finite() && a.hi.is_finite())) {
            return Err(GeomError::Parameter("grid bounds must be finite".into()));
        }
        Ok(Self { axes })
    }

    /// (t, θ, r) grid: t and θ periodic over [0, 2π), r closed on [r_min, r_max].
    pub fn conormal(n_t: usize, n_theta: usize, n_r: usize, r_min: f64, r_max: f64) -> Result<Self> {
        let tau = core::f64::consts::TAU;
        Self::new(alloc::vec![
            Axis::periodic(0.0, tau, n_t),
            Axis::periodic(0.0, tau, n_theta),
            Axis::closed(r_min, r_max, n_r),
        ])
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = alloc::vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = index % a.n;
            index /= a.n;
        }
        out
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        self.multi_index(index).iter().zip(&self.axes).map(|(&i, a)| a.node(i)).collect()
    }

    /// Uniform point of the bounding box.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.axes.iter().map(|a| a.lo + (a.hi - a.lo) * rng.random::<f64>()).collect()
    }

    /// The same grid with every axis count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let axes = self
            .axes
            .iter()
            .map(|a| {
                let n = if a.periodic || a.n < 2 { a.n * factor } else { (a.n - 1) * factor + 1 };
                Axis { n, ..*a }
            })
            .collect();
        Self { axes }
    }
}

/// Independent deterministic stream for one grid cell.
pub fn cell_rng(seed: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell);
    rng
}

/// Standard normal variate (Box-Muller).
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Running min/max over samples with witnesses. Ties keep the smaller
/// sample index so merging is independent of evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub min: f64,
    pub max: f64,
    pub argmin: Option<(usize, Vec<f64>)>,
    pub argmax: Option<(usize, Vec<f64>)>,
    pub count: usize,
    pub excluded: usize,
}

impl Default for Extremum {
    fn default() -> Self {
        Self::new()
    }
}

fn earlier(a: &Option<(usize, Vec<f64>)>, idx: usize) -> bool {
    a.as_ref().is_none_or(|(i, _)| idx < *i)
}

impl Extremum {
    pub fn new() -> Self {
        Self { min: f64::INFINITY, max: f64::NEG_INFINITY, argmin: None, argmax: None, count: 0, excluded: 0 }
    }

    pub fn push(&mut self, index: usize, at: &[f64], value: f64) {
        self.push_range(index, at, value, value);
    }

    pub fn push_range(&mut self, index: usize, at: &[f64], lo: f64, hi: f64) {
        self.count += 1;
        if lo < self.min || (lo == self.min && earlier(&self.argmin, index)) {
            self.min = lo;
            self.argmin = Some((index, at.to_vec()));
        }
        if hi > self.max || (hi == self.max && earlier(&self.argmax, index)) {
            self.max = hi;
            self.argmax = Some((index, at.to_vec()));
        }
    }

    pub fn exclude(&mut self) {
        self.excluded += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.excluded += other.excluded;
        if let Some((i, at)) = other.argmin {
            if other.min < self.min || (other.min == self.min && earlier(&self.argmin, i)) {
                self.min = other.min;
                self.argmin = Some((i, at));
            }
        }
        if let Some((i, at)) = other.argmax {
            if other.max > self.max || (other.max == self.max && earlier(&self.argmax, i)) {
                self.max = other.max;
                self.argmax = Some((i, at));
            }
        }
        self
    }

    pub fn excluded_fraction(&self) -> f64 {
        let total = self.count + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }

    /// Fails when more than `limit` of the samples were excluded.
    pub fn check_exclusions(&self, limit: f64) -> Result<()> {
        if self.count == 0 {
            return Err(GeomError::Degenerate("every sample was excluded".into()));
        }
        if self.excluded_fraction() > limit {
            return Err(GeomError::Degenerate(format!(
                "{} of {} samples excluded",
                self.excluded,
                self.count + self.excluded
            )));
        }
        Ok(())
    }
}

/// Fraction of excluded samples above which a run fails.
pub const EXCLUSION_LIMIT: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert_eq, proptest};

    #[test]
    fn grid_nodes() {
        let g = GridSpec::conormal(4, 2, 3, 1.0, 2.0).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g.point(0), alloc::vec![0.0, 0.0, 1.0]);
        assert_eq!(g.point(2), alloc::vec![0.0, 0.0, 2.0]);
        let p = g.point(23);
        assert!((p[0] - 1.5 * core::f64::consts::PI).abs() < 1e-15);
        assert_eq!(p[2], 2.0);
        assert!(GridSpec::new(alloc::vec![]).is_err());
        assert!(GridSpec::new(alloc::vec![Axis::closed(0.0, 1.0, 0)]).is_err());
        let r = g.refined(2);
        assert_eq!((r.axes[0].n, r.axes[2].n), (8, 5));
        // refined grids contain the coarse nodes
        assert_eq!(r.axes[2].node(2), g.axes[2].node(1));
    }

    #[test]
    fn streams_reproducible_and_distinct() {
        let a: f64 = cell_rng(7, 3).random();
        let b: f64 = cell_rng(7, 3).random();
        let c: f64 = cell_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut rng = cell_rng(1, 0);
        let v: Vec<f64> = (0..20000).map(|_| gaussian(&mut rng)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(vals in proptest::collection::vec(-5.0f64..5.0, 1..40), split in 0usize..40) {
            let split = split.min(vals.len());
            let mut all = Extremum::new();
            for (i, v) in vals.iter().enumerate() { all.push(i, &[*v], *v); }
            let (mut a, mut b) = (Extremum::new(), Extremum::new());
            for (i, v) in vals.iter().enumerate() {
                if i < split { a.push(i, &[*v], *v) } else { b.push(i, &[*v], *v) }
            }
            prop_assert_eq!(a.clone().merge(b.clone()), all.clone());
            prop_assert_eq!(b.merge(a), all);
        }
    }
}
