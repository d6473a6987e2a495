//! Ambient manifolds in chart coordinates: metric, complex structure,
//! tangent space, Levi-Civita correction and sectional curvature.

use crate::error::{GeomError, Result};
use crate::geom::FUBINI_STUDY_CURVATURE;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub trait Ambient: Sync {
    /// Number of chart coordinates.
    fn dim(&self) -> usize;

    fn metric(&self, y: &[f64], chart: usize) -> DMatrix<f64>;

    /// Columns span the tangent space inside the chart coordinates.
    fn tangent_basis(&self, y: &[f64], chart: usize) -> Result<DMatrix<f64>> {
        let _ = (y, chart);
        Ok(DMatrix::identity(self.dim(), self.dim()))
    }

    fn complex_structure(&self, y: &[f64], chart: usize) -> Option<DMatrix<f64>> {
        let _ = (y, chart);
        None
    }

    /// Γ(a, b): ∇_a b = ∂_a b + Γ(a, b) in these coordinates (before
    /// projecting to the tangent space).
    fn christoffel(&self, y: &[f64], chart: usize, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let _ = (y, chart, a, b);
        DVector::zeros(self.dim())
    }

    fn sectional(&self, y: &[f64], chart: usize, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        let _ = (y, chart, a, b);
        Err(GeomError::Usage("sectional curvature not available for this ambient".into()))
    }
}

/// J as multiplication by i on consecutive (re, im) pairs.
pub fn pairwise_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for b in (0..n).step_by(2) {
        j[(b + 1, b)] = 1.0;
        j[(b, b + 1)] = -1.0;
    }
    j
}

/// J(δx, δp) = (−δp, δx) on ℝ⁴×ℝ⁴.
pub fn phase_j() -> DMatrix<f64> {
    let mut j = DMatrix::zeros(8, 8);
    for k in 0..4 {
        j[(k, 4 + k)] = -1.0;
        j[(4 + k, k)] = 1.0;
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub enum EuclideanJ {
    None,
    /// ℝ⁴×ℝ⁴ with (x, p) blocks.
    Phase,
    /// (re, im) pairs.
    Pairs,
}

/// Flat ℝⁿ with metric scale·I.
#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    pub n: usize,
    pub scale: f64,
    pub j: EuclideanJ,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self { n, scale: 1.0, j: EuclideanJ::None }
    }

    /// T*S³ ⊂ ℝ⁸ with g_st and the standard J.
    pub fn phase_space() -> Self {
        Self { n: 8, scale: 1.0, j: EuclideanJ::Phase }
    }

    /// ℂ⁴ in w real coordinates: g_st = ½Σ|dw|².
    pub fn w_space() -> Self {
        Self { n: 8, scale: 0.5, j: EuclideanJ::Pairs }
    }

    /// ℂᵐ in (re, im) pairs with metric scale·I.
    pub fn complex(m: usize, scale: f64) -> Self {
        Self { n: 2 * m, scale, j: EuclideanJ::Pairs }
    }
}

impl Ambient for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self, _y: &[f64], _chart: usize) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n) * self.scale
    }

    fn complex_structure(&self, _y: &[f64], _chart: usize) -> Option<DMatrix<f64>> {
        match self.j {
            EuclideanJ::None => None,
            EuclideanJ::Phase => Some(phase_j()),
            EuclideanJ::Pairs => Some(pairwise_j(self.n)),
        }
    }

    fn sectional(&self, _y: &[f64], _chart: usize, _a: &DVector<f64>, _b: &DVector<f64>) -> Result<f64> {
        Ok(0.0)
    }
}

/// Round sphere of radius |y| in ℝⁿ embedding coordinates; the Levi-Civita
/// connection is the tangential projection of ∂.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSphere {
    pub n: usize,
}

impl Ambient for RoundSphere {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self, _y: &[f64], _chart: usize) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
    }

    fn tangent_basis(&self, y: &[f64], _chart: usize) -> Result<DMatrix<f64>> {
        let x = DVector::from_column_slice(y);
        let r = x.norm();
        if !(r > 0.0) {
            return Err(GeomError::Degenerate("sphere point at the origin".into()));
        }
        let u = x / r;
        let p = DMatrix::identity(self.n, self.n) - &u * u.transpose();
        // drop the column closest to the normal
        let drop = (0..self.n).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap_or(0);
        let cols: alloc::vec::Vec<_> = (0..self.n).filter(|&c| c != drop).map(|c| p.column(c).into_owned()).collect();
        Ok(DMatrix::from_columns(&cols))
    }

    fn sectional(&self, y: &[f64], _chart: usize, _a: &DVector<f64>, _b: &DVector<f64>) -> Result<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        Ok(1.0 / r2)
    }
}

fn fs_factor(y: &[f64]) -> f64 {
    let d = 1.0 + y[0] * y[0] + y[1] * y[1];
    1.0 / (d * d)
}

fn cplx(v: &DVector<f64>, k: usize) -> Complex64 {
    Complex64::new(v[k], v[k + 1])
}

/// CP¹×ℂ⁴ in chart coordinates (Re ζ, Im ζ, w reals) with
/// ĝ = g_FS ⊕ ½Σ|dw|² and the product complex structure.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProductCp1C4;

impl ProductCp1C4 {
    fn fs_block_sectional(&self, y: &[f64], a: &DVector<f64>, b: &DVector<f64>, g: &DMatrix<f64>) -> f64 {
        let f = fs_factor(y);
        let (a1, b1) = (cplx(a, 0), cplx(b, 0));
        let wedge1 = f * f * (a1.norm_sqr() * b1.norm_sqr() - (a1 * b1.conj()).re.powi(2));
        let gaa = (a.transpose() * g * a)[(0, 0)];
        let gbb = (b.transpose() * g * b)[(0, 0)];
        let gab = (a.transpose() * g * b)[(0, 0)];
        FUBINI_STUDY_CURVATURE * wedge1 / (gaa * gbb - gab * gab)
    }
}

impl Ambient for ProductCp1C4 {
    fn dim(&self) -> usize {
        10
    }

    fn metric(&self, y: &[f64], _chart: usize) -> DMatrix<f64> {
        let mut g = DMatrix::identity(10, 10) * 0.5;
        let f = fs_factor(y);
        g[(0, 0)] = f;
        g[(1, 1)] = f;
        g
    }

    fn complex_structure(&self, _y: &[f64], _chart: usize) -> Option<DMatrix<f64>> {
        Some(pairwise_j(10))
    }

    fn christoffel(&self, y: &[f64], _chart: usize, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        // for the conformal Kähler metric λ|dζ|², ∇_a b = ∂_a b + (∂_ζ log λ)·a·b
        let z = Complex64::new(y[0], y[1]);
        let gamma = -2.0 * z.conj() / (1.0 + z.norm_sqr());
        let v = gamma * cplx(a, 0) * cplx(b, 0);
        let mut out = DVector::zeros(10);
        out[0] = v.re;
        out[1] = v.im;
        out
    }

    fn sectional(&self, y: &[f64], chart: usize, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        let g = self.metric(y, chart);
        let gaa = (a.transpose() * &g * a)[(0, 0)];
        let gbb = (b.transpose() * &g * b)[(0, 0)];
        let gab = (a.transpose() * &g * b)[(0, 0)];
        if gaa * gbb - gab * gab <= 1e-14 * gaa * gbb {
            return Err(GeomError::Degenerate("sectional curvature of a degenerate plane".into()));
        }
        Ok(self.fs_block_sectional(y, a, b, &g))
    }
}

/// The resolved conifold Ĉ ⊂ CP¹×ℂ⁴. Chart 0: ζ = u/v, w₁ = ζw₂, w₃ = ζw₄;
/// chart 1: ζ = v/u, w₂ = ζw₁, w₄ = ζw₃.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResolvedConifold;

impl ResolvedConifold {
    pub fn constraint_residual(y: &[f64], chart: usize) -> f64 {
        let z = Complex64::new(y[0], y[1]);
        let w = |k: usize| Complex64::new(y[2 + 2 * k], y[3 + 2 * k]);
        if chart == 0 {
            (w(0) - z * w(1)).norm().max((w(2) - z * w(3)).norm())
        } else {
            (w(1) - z * w(0)).norm().max((w(3) - z * w(2)).norm())
        }
    }
}

impl Ambient for ResolvedConifold {
    fn dim(&self) -> usize {
        10
    }

    fn metric(&self, y: &[f64], chart: usize) -> DMatrix<f64> {
        ProductCp1C4.metric(y, chart)
    }

    fn tangent_basis(&self, y: &[f64], chart: usize) -> Result<DMatrix<f64>> {
        let z = Complex64::new(y[0], y[1]);
        let w = |k: usize| Complex64::new(y[2 + 2 * k], y[3 + 2 * k]);
        // (dependent, free) index pairs in w
        let (pairs, free) = if chart == 0 { ([(0usize, 1usize), (2, 3)], [1usize, 3]) } else { ([(1, 0), (3, 2)], [0, 2]) };
        let mut cols = alloc::vec::Vec::with_capacity(6);
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            // δζ = unit
            let mut c = DVector::zeros(10);
            c[0] = unit.re;
            c[1] = unit.im;
            for &(dep, fr) in &pairs {
                let d = unit * w(fr);
                c[2 + 2 * dep] = d.re;
                c[3 + 2 * dep] = d.im;
            }
            cols.push(c);
            for (slot, &fr) in free.iter().enumerate() {
                let mut c = DVector::zeros(10);
                c[2 + 2 * fr] = unit.re;
                c[3 + 2 * fr] = unit.im;
                let d = z * unit;
                let dep = pairs[slot].0;
                c[2 + 2 * dep] = d.re;
                c[3 + 2 * dep] = d.im;
                cols.push(c);
            }
        }
        Ok(DMatrix::from_columns(&cols))
    }

    fn complex_structure(&self, _y: &[f64], _chart: usize) -> Option<DMatrix<f64>> {
        Some(pairwise_j(10))
    }

    fn christoffel(&self, y: &[f64], chart: usize, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        ProductCp1C4.christoffel(y, chart, a, b)
    }
}
