//! Phase-space points, the z/w/(ξ,η) coordinate systems, the standard forms
//! and the Fubini–Study metric on the affine chart of CP¹.

use crate::error::{GeomError, Result};
use alloc::format;
use nalgebra::{SVector, Vector4};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type Vec4 = Vector4<f64>;
pub type Vec8 = SVector<f64, 8>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Vec4,
    pub p: Vec4,
}

impl PhasePoint {
    pub fn new(x: Vec4, p: Vec4) -> Self {
        Self { x, p }
    }

    pub fn zero_section(x: Vec4) -> Self {
        Self { x, p: Vec4::zeros() }
    }

    pub fn to_vec8(&self) -> Vec8 {
        let mut v = Vec8::zeros();
        v.fixed_rows_mut::<4>(0).copy_from(&self.x);
        v.fixed_rows_mut::<4>(4).copy_from(&self.p);
        v
    }

    pub fn from_vec8(v: &Vec8) -> Self {
        Self { x: v.fixed_rows::<4>(0).into_owned(), p: v.fixed_rows::<4>(4).into_owned() }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.p.iter()).all(|c| c.is_finite())
    }

    /// |x| = 1 and x·p = 0.
    pub fn on_cotangent_sphere(&self, tol: f64) -> bool {
        (self.x.norm() - 1.0).abs() <= tol && self.x.dot(&self.p).abs() <= tol
    }

    /// |x| = |p| and x·p = 0.
    pub fn on_conifold(&self, tol: f64) -> bool {
        (self.x.norm() - self.p.norm()).abs() <= tol && self.x.dot(&self.p).abs() <= tol
    }

    /// |x|² − |p|² = a² and x·p = 0.
    pub fn on_deformed(&self, a: f64, tol: f64) -> bool {
        (self.x.norm_squared() - self.p.norm_squared() - a * a).abs() <= tol
            && self.x.dot(&self.p).abs() <= tol
    }

    pub fn to_z(&self) -> ComplexVec4 {
        let c = [0, 1, 2, 3].map(|j| Complex64::new(self.x[j], self.p[j]));
        ComplexVec4::z(c)
    }

    pub fn from_z(z: &ComplexVec4) -> Result<Self> {
        z.expect(CoordSystem::Z)?;
        let x = Vec4::new(z.c[0].re, z.c[1].re, z.c[2].re, z.c[3].re);
        let p = Vec4::new(z.c[0].im, z.c[1].im, z.c[2].im, z.c[3].im);
        Ok(Self { x, p })
    }

    pub fn to_w(&self) -> ComplexVec4 {
        z_to_w(&self.to_z().c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordSystem {
    Z,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVec4 {
    pub c: [Complex64; 4],
    pub system: CoordSystem,
}

impl ComplexVec4 {
    pub fn z(c: [Complex64; 4]) -> Self {
        Self { c, system: CoordSystem::Z }
    }

    pub fn w(c: [Complex64; 4]) -> Self {
        Self { c, system: CoordSystem::W }
    }

    pub fn expect(&self, system: CoordSystem) -> Result<()> {
        if self.system == system {
            Ok(())
        } else {
            Err(GeomError::Usage(format!("expected {:?} coordinates, got {:?}", system, self.system)))
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ z_j² for z-vectors, w₁w₄ − w₂w₃ for w-vectors.
    pub fn quadric(&self) -> Complex64 {
        match self.system {
            CoordSystem::Z => self.c.iter().map(|c| c * c).sum(),
            CoordSystem::W => self.c[0] * self.c[3] - self.c[1] * self.c[2],
        }
    }

    /// Real coordinates (re₁, im₁, …, re₄, im₄).
    pub fn to_reals(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for j in 0..4 {
            out[2 * j] = self.c[j].re;
            out[2 * j + 1] = self.c[j].im;
        }
        out
    }

    pub fn from_reals(r: &[f64], system: CoordSystem) -> Self {
        let c = [0, 1, 2, 3].map(|j| Complex64::new(r[2 * j], r[2 * j + 1]));
        Self { c, system }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZwDirection {
    ToW,
    ToZ,
}

fn z_to_w(z: &[Complex64; 4]) -> ComplexVec4 {
    ComplexVec4::w([
        z[0] + I * z[1],
        -z[2] + I * z[3],
        z[2] + I * z[3],
        z[0] - I * z[1],
    ])
}

fn w_to_z(w: &[Complex64; 4]) -> ComplexVec4 {
    ComplexVec4::z([
        (w[0] + w[3]) * 0.5,
        (w[0] - w[3]) / (2.0 * I),
        (w[2] - w[1]) * 0.5,
        (w[1] + w[2]) / (2.0 * I),
    ])
}

pub fn coords_zw(point: &ComplexVec4, direction: ZwDirection) -> Result<ComplexVec4> {
    match direction {
        ZwDirection::ToW => {
            point.expect(CoordSystem::Z)?;
            Ok(z_to_w(&point.c))
        }
        ZwDirection::ToZ => {
            point.expect(CoordSystem::W)?;
            Ok(w_to_z(&point.c))
        }
    }
}

/// ξ = (x₁+ix₂, x₃+ix₄), η = (p₁+ip₂, p₃+ip₄).
pub fn coords_xieta(pt: &PhasePoint) -> ([Complex64; 2], [Complex64; 2]) {
    (
        [Complex64::new(pt.x[0], pt.x[1]), Complex64::new(pt.x[2], pt.x[3])],
        [Complex64::new(pt.p[0], pt.p[1]), Complex64::new(pt.p[2], pt.p[3])],
    )
}

pub fn from_xieta(xi: &[Complex64; 2], eta: &[Complex64; 2]) -> PhasePoint {
    PhasePoint {
        x: Vec4::new(xi[0].re, xi[0].im, xi[1].re, xi[1].im),
        p: Vec4::new(eta[0].re, eta[0].im, eta[1].re, eta[1].im),
    }
}

pub fn xieta_to_w(xi: &[Complex64; 2], eta: &[Complex64; 2]) -> ComplexVec4 {
    ComplexVec4::w([
        xi[0] + I * eta[0],
        -(xi[1].conj() + I * eta[1].conj()),
        xi[1] + I * eta[1],
        xi[0].conj() + I * eta[0].conj(),
    ])
}

/// Linear differential of the w-coordinates applied to a (δx, δp) direction.
pub fn dw(dir: &Vec8) -> [Complex64; 4] {
    let dz = [0, 1, 2, 3].map(|j| Complex64::new(dir[j], dir[4 + j]));
    z_to_w(&dz).c
}

/// Inverse of [`dw`]: (δx, δp) from a w-direction.
pub fn dir_from_dw(dw: &[Complex64; 4]) -> Vec8 {
    let dz = w_to_z(dw).c;
    let mut v = Vec8::zeros();
    for j in 0..4 {
        v[j] = dz[j].re;
        v[4 + j] = dz[j].im;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVec {
    pub base: PhasePoint,
    pub dir: Vec8,
}

impl TangentVec {
    pub fn new(base: PhasePoint, dx: Vec4, dp: Vec4) -> Self {
        let mut dir = Vec8::zeros();
        dir.fixed_rows_mut::<4>(0).copy_from(&dx);
        dir.fixed_rows_mut::<4>(4).copy_from(&dp);
        Self { base, dir }
    }

    pub fn dx(&self) -> Vec4 {
        self.dir.fixed_rows::<4>(0).into_owned()
    }

    pub fn dp(&self) -> Vec4 {
        self.dir.fixed_rows::<4>(4).into_owned()
    }
}

/// Σ dx_j ∧ dp_j on raw directions.
pub fn omega(a: &Vec8, b: &Vec8) -> f64 {
    (0..4).map(|j| a[j] * b[4 + j] - b[j] * a[4 + j]).sum()
}

pub fn omega_eval(u: &TangentVec, v: &TangentVec) -> Result<f64> {
    if u.base != v.base {
        return Err(GeomError::Usage("tangent vectors at different base points".into()));
    }
    Ok(omega(&u.dir, &v.dir))
}

/// λ = −Σ p_j dx_j.
pub fn liouville(base: &PhasePoint, dir: &Vec8) -> f64 {
    -(0..4).map(|j| base.p[j] * dir[j]).sum::<f64>()
}

pub fn liouville_eval(v: &TangentVec) -> f64 {
    liouville(&v.base, &v.dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexStructure {
    /// J∂x = ∂p, J∂p = −∂x.
    StandardZ,
    /// Multiplication by i on ξ and on η.
    SplitXiEta,
}

pub fn complex_j(dir: &Vec8, structure: ComplexStructure) -> Vec8 {
    let mut out = Vec8::zeros();
    match structure {
        ComplexStructure::StandardZ => {
            for j in 0..4 {
                out[j] = -dir[4 + j];
                out[4 + j] = dir[j];
            }
        }
        ComplexStructure::SplitXiEta => {
            for b in [0, 2, 4, 6] {
                out[b] = -dir[b + 1];
                out[b + 1] = dir[b];
            }
        }
    }
    out
}

pub fn complex_j_apply(v: &TangentVec, structure: ComplexStructure) -> TangentVec {
    TangentVec { base: v.base, dir: complex_j(&v.dir, structure) }
}

/// g_FS at the affine coordinate `z` on tangent directions `u`, `v`.
pub fn fubini_study_eval(z: Complex64, u: Complex64, v: Complex64) -> f64 {
    let d = 1.0 + z.norm_sqr();
    (u * v.conj()).re / (d * d)
}

/// Curvature of g_FS. The metric above is the round sphere of radius 1/2.
pub const FUBINI_STUDY_CURVATURE: f64 = 4.0;

/// Homogeneous pair normalized to |u|²+|v|² = 1, first nonzero entry real-positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint {
    pub u: Complex64,
    pub v: Complex64,
}

impl ProjPoint {
    pub fn new(u: Complex64, v: Complex64) -> Result<Self> {
        let n = (u.norm_sqr() + v.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::Singular("[0:0] is not a point of CP¹".into()));
        }
        let (u, v) = (u / n, v / n);
        if u.norm() > 0.0 {
            let phase = u.conj() / u.norm();
            Ok(Self { u: Complex64::new(u.norm(), 0.0), v: v * phase })
        } else {
            Ok(Self { u: Complex64::new(0.0, 0.0), v: Complex64::new(v.norm(), 0.0) })
        }
    }

    /// u/v, infinite when v = 0.
    pub fn ratio(&self) -> Complex64 {
        if self.v.norm() == 0.0 {
            Complex64::new(f64::INFINITY, 0.0)
        } else {
            self.u / self.v
        }
    }

    /// Chart 0 is ζ = u/v (used when |u| ≤ |v|), chart 1 is ζ = v/u.
    pub fn preferred_chart(&self) -> usize {
        if self.u.norm() <= self.v.norm() {
            0
        } else {
            1
        }
    }

    pub fn affine(&self, chart: usize) -> Complex64 {
        if chart == 0 {
            self.u / self.v
        } else {
            self.v / self.u
        }
    }

    pub fn from_affine(zeta: Complex64, chart: usize) -> Result<Self> {
        if chart == 0 {
            Self::new(zeta, Complex64::new(1.0, 0.0))
        } else {
            Self::new(Complex64::new(1.0, 0.0), zeta)
        }
    }

    /// Point on the sphere of radius 1/2 in ℝ³ isometric to (CP¹, g_FS).
    pub fn sphere_point(&self) -> [f64; 3] {
        let s = self.u.norm_sqr() + self.v.norm_sqr();
        let c = self.u * self.v.conj();
        [c.re / s, c.im / s, 0.5 * (self.u.norm_sqr() - self.v.norm_sqr()) / s]
    }
}

/// Wrap an angle into [0, 2π).
pub fn wrap_angle(t: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let r = t % tau;
    if r < 0.0 {
        r + tau
    } else {
        r
    }
}
