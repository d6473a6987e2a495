//! Parametrized submanifolds and grid samplers over them.

use crate::conifold::{cone_embed, contract_feps, ct_point, ct_unknot_oracle, torus_ct_oracle, ChartIndex, ChartPoint, ResolvedPoint};
use crate::conormal::{ConormalCoords, FramedKnot};
use crate::error::{GeomError, Result};
use crate::fd::jacobian;
use crate::sample::GridSpec;
use crate::tol::FdConfig;
use alloc::boxed::Box;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

type EvalFn<'a> = Box<dyn Fn(&[f64], usize) -> Result<DVector<f64>> + Send + Sync + 'a>;
type ChartFn<'a> = Box<dyn Fn(&[f64]) -> Result<usize> + Send + Sync + 'a>;

/// A map from a parameter box into ambient chart coordinates.
pub struct Patch<'a> {
    pub param_dim: usize,
    pub ambient_dim: usize,
    eval: EvalFn<'a>,
    chart: ChartFn<'a>,
}

impl<'a> Patch<'a> {
    pub fn new(param_dim: usize, ambient_dim: usize, eval: EvalFn<'a>) -> Self {
        Self { param_dim, ambient_dim, eval, chart: Box::new(|_| Ok(0)) }
    }

    pub fn with_chart(mut self, chart: ChartFn<'a>) -> Self {
        self.chart = chart;
        self
    }

    pub fn chart_at(&self, u: &[f64]) -> Result<usize> {
        (self.chart)(u)
    }

    pub fn eval(&self, u: &[f64], chart: usize) -> Result<DVector<f64>> {
        (self.eval)(u, chart)
    }

    /// Columns ∂P/∂u_i in a fixed chart.
    pub fn tangent(&self, u: &[f64], chart: usize, fd: &FdConfig) -> Result<DMatrix<f64>> {
        jacobian(&|v: &[f64]| self.eval(v, chart), u, fd)
    }
}

fn resolved_patch<'a, F>(f: F) -> Patch<'a>
where
    F: Fn(&[f64]) -> Result<ResolvedPoint> + Send + Sync + Clone + 'a,
{
    let g = f.clone();
    Patch::new(3, 10, Box::new(move |u, chart| Ok(DVector::from_column_slice(&f(u)?.chart_coords(chart)))))
        .with_chart(Box::new(move |u| Ok(g(u)?.line.preferred_chart())))
}

/// CT(N*_{k,ε}) over (t, θ, r).
pub fn ct_patch(framed: &FramedKnot, eps: f64) -> Patch<'_> {
    resolved_patch(move |u: &[f64]| ct_point(framed, eps, &ConormalCoords::polar(u[0], u[2], u[1])))
}

/// Closed-form CT(N*_unknot) over (t, θ, r).
pub fn unknot_oracle_patch<'a>() -> Patch<'a> {
    resolved_patch(|u: &[f64]| Ok(ct_unknot_oracle(u[0], u[1], u[2])))
}

/// Torus-knot CT built from the explicit frame, over (t, θ, r).
pub fn torus_oracle_patch<'a>(m: i64, n: i64) -> Patch<'a> {
    resolved_patch(move |u: &[f64]| torus_ct_oracle(m, n, u[0], u[1], u[2]))
}

/// N*_{k,ε} ⊂ ℝ⁴×ℝ⁴ over (t, α, β).
pub fn conormal_patch(framed: &FramedKnot, eps: f64) -> Patch<'_> {
    Patch::new(
        3,
        8,
        Box::new(move |u, _| {
            let pt = framed.perturbed_conormal_point(eps, &ConormalCoords::new(u[0], u[1], u[2]))?;
            Ok(DVector::from_column_slice(pt.to_vec8().as_slice()))
        }),
    )
}

/// F_ε(N*_k) ⊂ ℝ⁴×ℝ⁴ over (t, α, β).
pub fn feps_patch(framed: &FramedKnot, eps: f64) -> Patch<'_> {
    Patch::new(
        3,
        8,
        Box::new(move |u, _| {
            let pt = contract_feps(eps, &framed.conormal_point(&ConormalCoords::new(u[0], u[1], u[2]))?)?;
            Ok(DVector::from_column_slice(pt.to_vec8().as_slice()))
        }),
    )
}

/// Sphere of the given radius in ℝ⁴ in Hopf coordinates (η, ξ₁, ξ₂).
pub fn sphere3_patch<'a>(radius: f64) -> Patch<'a> {
    Patch::new(
        3,
        4,
        Box::new(move |u, _| {
            let (se, ce) = u[0].sin_cos();
            let (s1, c1) = u[1].sin_cos();
            let (s2, c2) = u[2].sin_cos();
            Ok(DVector::from_vec(alloc::vec![radius * ce * c1, radius * ce * s1, radius * se * c2, radius * se * s2]))
        }),
    )
}

/// Clifford torus (cos a, sin a, cos b, sin b)/√2.
pub fn clifford_patch<'a>() -> Patch<'a> {
    Patch::new(
        2,
        4,
        Box::new(|u, _| {
            let h = core::f64::consts::FRAC_1_SQRT_2;
            Ok(DVector::from_vec(alloc::vec![h * u[0].cos(), h * u[0].sin(), h * u[1].cos(), h * u[1].sin()]))
        }),
    )
}

/// Cone chart (z, ξ, η) ↦ (ξ, zξ, η, zη) from real coordinates into w reals.
pub fn cone_chart_map(u: &[f64]) -> Result<DVector<f64>> {
    let cp = ChartPoint {
        z: Complex64::new(u[0], u[1]),
        xi: Complex64::new(u[2], u[3]),
        eta: Complex64::new(u[4], u[5]),
        chart: ChartIndex::One,
    };
    Ok(DVector::from_column_slice(&cone_embed(&cp)?.to_reals()))
}

/// The conifold 𝒞 through the cone chart, over (z, ξ, η) reals.
pub fn cone_patch<'a>() -> Patch<'a> {
    Patch::new(6, 8, Box::new(|u, _| cone_chart_map(u)))
}

/// Real tangent basis of 𝒞 at w (w reals), from the cone chart differential.
pub fn cone_tangent_basis(w: &[f64]) -> Result<DMatrix<f64>> {
    let cp = crate::conifold::cone_invert(&crate::geom::ComplexVec4::from_reals(w, crate::geom::CoordSystem::W))?;
    let (z, xi, eta) = (cp.z, cp.xi, cp.eta);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let dirs: [[Complex64; 4]; 3] = [[zero, xi, zero, eta], [one, z, zero, zero], [zero, zero, one, z]];
    let mut cols = Vec::with_capacity(6);
    for d in dirs {
        for unit in [one, Complex64::new(0.0, 1.0)] {
            let mut c = d.map(|v| v * unit);
            if cp.chart == ChartIndex::Two {
                c.swap(0, 1);
                c.swap(2, 3);
            }
            let v = crate::geom::ComplexVec4::w(c).to_reals();
            cols.push(DVector::from_column_slice(&v));
        }
    }
    Ok(DMatrix::from_columns(&cols))
}

/// One evaluated sample of a patch.
#[derive(Debug, Clone)]
pub struct Sample {
    pub index: usize,
    pub u: Vec<f64>,
    pub chart: usize,
    pub y: DVector<f64>,
    pub tangent: DMatrix<f64>,
}

/// A patch, a grid over its parameter box and the FD settings for tangents.
pub struct SubmanifoldSampler<'p, 'a> {
    pub patch: &'p Patch<'a>,
    pub grid: GridSpec,
    pub fd: FdConfig,
}

impl<'p, 'a> SubmanifoldSampler<'p, 'a> {
    pub fn new(patch: &'p Patch<'a>, grid: GridSpec) -> Result<Self> {
        if grid.dim() != patch.param_dim {
            return Err(GeomError::Usage("grid dimension does not match the patch".into()));
        }
        Ok(Self { patch, grid, fd: FdConfig::default() })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.patch.ambient_dim
    }

    pub fn sample_at(&self, index: usize, u: Vec<f64>) -> Result<Sample> {
        let chart = self.patch.chart_at(&u)?;
        let y = self.patch.eval(&u, chart)?;
        let tangent = self.patch.tangent(&u, chart, &self.fd)?;
        Ok(Sample { index, u, chart, y, tangent })
    }

    pub fn sample(&self, index: usize) -> Result<Sample> {
        self.sample_at(index, self.grid.point(index))
    }
}
