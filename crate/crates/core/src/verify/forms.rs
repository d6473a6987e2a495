//! Two-forms and metrics as matrix fields over chart coordinates.

use super::ambient::{phase_j, Ambient};
use crate::conormal::PerturbationField;
use crate::error::{GeomError, Result};
use crate::geom::{dir_from_dw, ComplexVec4, CoordSystem, Vec4};
use alloc::boxed::Box;
use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

pub type MatrixField<'a> = Box<dyn Fn(&[f64], usize) -> Result<DMatrix<f64>> + Send + Sync + 'a>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormTag {
    Omega,
    OmegaHat,
    OmegaTildeEps,
    OmegaFs,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricTag {
    GSt,
    GHat,
    GCone,
    GTilde,
    Custom,
}

/// form(u, v) = uᵀ Ω(y) v.
pub struct FormHandle<'a> {
    pub tag: FormTag,
    field: MatrixField<'a>,
}

impl<'a> FormHandle<'a> {
    pub fn new(tag: FormTag, field: MatrixField<'a>) -> Self {
        Self { tag, field }
    }

    pub fn matrix(&self, y: &[f64], chart: usize) -> Result<DMatrix<f64>> {
        (self.field)(y, chart)
    }

    pub fn eval(&self, y: &[f64], chart: usize, u: &[f64], v: &[f64]) -> Result<f64> {
        let m = self.matrix(y, chart)?;
        if u.len() != m.nrows() || v.len() != m.ncols() {
            return Err(GeomError::Usage("vector length does not match the form".into()));
        }
        Ok((DVector::from_column_slice(u).transpose() * m * DVector::from_column_slice(v))[(0, 0)])
    }

    /// ω = Σ dx_j∧dp_j on ℝ⁴×ℝ⁴.
    pub fn omega() -> Self {
        Self::new(FormTag::Omega, Box::new(|_, _| Ok(phase_j().transpose())))
    }

    /// The Kähler form g(J·, ·) of an ambient with a complex structure:
    /// ω on ℂ⁴, ω̂ = π₁*ω_FS + π₂*ω on CP¹×ℂ⁴.
    pub fn kahler(tag: FormTag, ambient: &'a dyn Ambient) -> Self {
        Self::new(
            tag,
            Box::new(move |y, chart| {
                let j = ambient
                    .complex_structure(y, chart)
                    .ok_or_else(|| GeomError::Usage("ambient has no complex structure".into()))?;
                Ok(j.transpose() * ambient.metric(y, chart))
            }),
        )
    }

    /// (Φ_ε)_*ω on ℝ⁴×ℝ⁴: ω(DΦ_ε⁻¹ ·, DΦ_ε⁻¹ ·).
    pub fn omega_pushforward(field: &'a PerturbationField) -> Self {
        Self::new(
            FormTag::Custom,
            Box::new(move |y, _| {
                let x = Vec4::new(y[0], y[1], y[2], y[3]);
                let d = inverse_isotopy_differential(field.eps, &field.jacobian(&x));
                Ok(d.transpose() * phase_j().transpose() * d)
            }),
        )
    }

    /// ω̃_ε = π₂⁻¹_*(Φ_ε)_*ω on Ĉ chart coordinates: drop the CP¹ part,
    /// pass w to (x, p), apply DΦ_ε⁻¹ and evaluate ω.
    pub fn omega_tilde(field: &'a PerturbationField) -> Self {
        Self::new(
            FormTag::OmegaTildeEps,
            Box::new(move |y, _| {
                if y.len() != 10 {
                    return Err(GeomError::Usage("ω̃_ε expects Ĉ chart coordinates".into()));
                }
                let pi2 = w_block_to_phase();
                let pt = DVector::from_column_slice(&y[2..10]);
                let xp = &pi2.view((0, 2), (8, 8)) * pt;
                let x = Vec4::new(xp[0], xp[1], xp[2], xp[3]);
                let m = inverse_isotopy_differential(field.eps, &field.jacobian(&x)) * pi2;
                Ok(m.transpose() * phase_j().transpose() * m)
            }),
        )
    }
}

/// [[I, 0], [−εDξ, I]].
pub fn inverse_isotopy_differential(eps: f64, dxi: &Matrix4<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::identity(8, 8);
    for r in 0..4 {
        for c in 0..4 {
            d[(4 + r, c)] = -eps * dxi[(r, c)];
        }
    }
    d
}

/// 8×10 matrix sending Ĉ chart directions to (δx, δp): the ζ columns vanish.
pub fn w_block_to_phase() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(8, 10);
    for k in 0..8 {
        let mut e = [0.0; 8];
        e[k] = 1.0;
        let dw = ComplexVec4::from_reals(&e, CoordSystem::W).c;
        let col = dir_from_dw(&dw);
        for r in 0..8 {
            m[(r, 2 + k)] = col[r];
        }
    }
    m
}

/// g(u, v) = uᵀ G(y) v.
pub struct MetricHandle<'a> {
    pub tag: MetricTag,
    field: MatrixField<'a>,
}

impl<'a> MetricHandle<'a> {
    pub fn new(tag: MetricTag, field: MatrixField<'a>) -> Self {
        Self { tag, field }
    }

    pub fn matrix(&self, y: &[f64], chart: usize) -> Result<DMatrix<f64>> {
        (self.field)(y, chart)
    }

    pub fn eval(&self, y: &[f64], chart: usize, u: &[f64], v: &[f64]) -> Result<f64> {
        let m = self.matrix(y, chart)?;
        if u.len() != m.nrows() || v.len() != m.ncols() {
            return Err(GeomError::Usage("vector length does not match the metric".into()));
        }
        Ok((DVector::from_column_slice(u).transpose() * m * DVector::from_column_slice(v))[(0, 0)])
    }

    pub fn of(tag: MetricTag, ambient: &'a dyn Ambient) -> Self {
        Self::new(tag, Box::new(move |y, chart| Ok(ambient.metric(y, chart))))
    }

    pub fn euclidean(n: usize, scale: f64) -> Self {
        Self::new(MetricTag::GSt, Box::new(move |_, _| Ok(DMatrix::identity(n, n) * scale)))
    }

    /// ½((|ξ|²+|η|²)|dz|² + |dξ|² + |dη|²) on (z, ξ, η) reals.
    pub fn cone() -> Self {
        Self::new(MetricTag::GCone, Box::new(|y, _| Ok(weighted_z_metric(y, 0.0))))
    }

    /// ½((1+|ξ|²+|η|²)|dz|² + |dξ|² + |dη|²) on (z, ξ, η) reals.
    pub fn tilde() -> Self {
        Self::new(MetricTag::GTilde, Box::new(|y, _| Ok(weighted_z_metric(y, 1.0))))
    }
}

fn weighted_z_metric(y: &[f64], offset: f64) -> DMatrix<f64> {
    let s: f64 = y[2..6].iter().map(|v| v * v).sum();
    let mut g = DMatrix::identity(6, 6) * 0.5;
    g[(0, 0)] = 0.5 * (offset + s);
    g[(1, 1)] = 0.5 * (offset + s);
    g
}

/// Matrix of g_FS at ζ in (Re, Im) coordinates.
pub fn fubini_study_matrix(z: Complex64) -> DMatrix<f64> {
    let d = 1.0 + z.norm_sqr();
    DMatrix::identity(2, 2) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dw, omega, Vec8};
    use crate::knots::KnotCurve;
    use crate::verify::ambient::{Euclidean, ProductCp1C4};
    use proptest::prelude::*;

    fn v8(v: &[f64]) -> Vec8 {
        Vec8::from_column_slice(v)
    }

    proptest! {
        #[test]
        fn standard_forms_agree(u in proptest::collection::vec(-1.0f64..1.0, 8), v in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let om = FormHandle::omega();
            let a = om.eval(&[0.0; 8], 0, &u, &v).unwrap();
            prop_assert!((a - omega(&v8(&u), &v8(&v))).abs() < 1e-14);
            prop_assert!((a + om.eval(&[0.0; 8], 0, &v, &u).unwrap()).abs() < 1e-14);
            // ω as the Kähler form of (ℂ⁴, ½Σ|dw|²) in w coordinates
            let wsp = Euclidean::w_space();
            let kw = FormHandle::kahler(FormTag::Omega, &wsp);
            let (du, dv) = (ComplexVec4::w(dw(&v8(&u))).to_reals(), ComplexVec4::w(dw(&v8(&v))).to_reals());
            prop_assert!((kw.eval(&[0.0; 8], 0, &du, &dv).unwrap() - a).abs() < 1e-13);
            let ps = Euclidean::phase_space();
            let kp = FormHandle::kahler(FormTag::Omega, &ps);
            prop_assert!((kp.eval(&[0.0; 8], 0, &u, &v).unwrap() - a).abs() < 1e-14);
        }

        #[test]
        fn omega_hat_antisymmetric_and_tames(y in proptest::collection::vec(-2.0f64..2.0, 10), u in proptest::collection::vec(-1.0f64..1.0, 10), v in proptest::collection::vec(-1.0f64..1.0, 10)) {
            let amb = ProductCp1C4;
            let f = FormHandle::kahler(FormTag::OmegaHat, &amb);
            prop_assert!((f.eval(&y, 0, &u, &v).unwrap() + f.eval(&y, 0, &v, &u).unwrap()).abs() < 1e-10);
            let ju = (crate::verify::ambient::pairwise_j(10) * DVector::from_column_slice(&u)).as_slice().to_vec();
            let g = MetricHandle::of(MetricTag::GHat, &amb).eval(&y, 0, &u, &u).unwrap();
            prop_assert!((f.eval(&y, 0, &u, &ju).unwrap() - g).abs() < 1e-12);
        }
    }

    #[test]
    fn w_block_matches_coordinate_change() {
        let m = w_block_to_phase();
        let w = ComplexVec4::w([
            Complex64::new(0.3, 0.1),
            Complex64::new(-1.0, 0.2),
            Complex64::new(0.5, 0.5),
            Complex64::new(0.0, -0.7),
        ]);
        let mut y = [0.0; 10];
        y[2..].copy_from_slice(&w.to_reals());
        let xp = &m * DVector::from_column_slice(&y);
        let direct = dir_from_dw(&w.c);
        assert!((xp - DVector::from_column_slice(direct.as_slice())).norm() < 1e-15);
    }

    #[test]
    fn pushforward_reduces_to_omega_off_support() {
        let knot = KnotCurve::unknot();
        let field = PerturbationField::new(&knot, 0.3).unwrap();
        let f = FormHandle::omega_pushforward(&field);
        // x far outside the radial window: ξ vanishes
        let y = [30.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.4];
        let m = f.matrix(&y, 0).unwrap();
        assert!((m - phase_j().transpose()).norm() < 1e-14);
        assert_eq!(f.tag, FormTag::Custom);
    }
}
