//! Sampling engines: form restrictions, tameness ratios, bi-Lipschitz
//! bounds and totally-real angles.

use super::ambient::Ambient;
use super::forms::{FormHandle, MetricHandle};
use super::patch::{Sample, SubmanifoldSampler};
use crate::conifold::resolve_lift;
use crate::error::{GeomError, Result};
use crate::geom::{ComplexVec4, CoordSystem};
use crate::fd::jacobian;
use crate::sample::{cell_rng, gaussian_vec, Extremum};
use crate::tol::FdConfig;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Condition number of the tangent Gram matrix above which a sample is excluded.
pub const MAX_CONDITION: f64 = 1e8;

/// G-orthonormal basis of span(T) plus the Gram condition number.
pub fn orthonormalize(t: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let gram = t.transpose() * g * t;
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(GeomError::Degenerate(format!("tangent Gram condition number {cond:.3e}")));
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| GeomError::Degenerate("tangent Gram matrix not positive definite".into()))?;
    let linv_t = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| GeomError::Degenerate("singular Cholesky factor".into()))?;
    Ok((t * linv_t, cond))
}

/// max |form(Q_i, Q_j)| over a G-orthonormal tangent basis Q at one sample.
pub fn form_restriction_at(form: &FormHandle, ambient: &dyn Ambient, s: &Sample) -> Result<f64> {
    let ys = s.y.as_slice();
    let (q, _) = orthonormalize(&s.tangent, &ambient.metric(ys, s.chart))?;
    let m = q.transpose() * form.matrix(ys, s.chart)? * &q;
    Ok(m.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// Max of [`form_restriction_at`] over the sampler. Degenerate samples are
/// counted as excluded; other errors propagate.
pub fn form_restriction_max(form: &FormHandle, ambient: &dyn Ambient, sampler: &SubmanifoldSampler) -> Result<Extremum> {
    let mut acc = Extremum::new();
    for i in 0..sampler.len() {
        let s = sampler.sample(i)?;
        match form_restriction_at(form, ambient, &s) {
            Ok(v) => acc.push(i, &s.u, v),
            Err(GeomError::Degenerate(_)) => acc.exclude(),
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

/// Min and max of form(X, JX)/g(X, X) over `count` random X in the ambient
/// tangent space at y. A nonpositive ratio is a taming failure.
pub fn tameness_at(
    form: &FormHandle,
    ambient: &dyn Ambient,
    metric: &MetricHandle,
    y: &[f64],
    chart: usize,
    count: usize,
    seed: u64,
    cell: u64,
) -> Result<(f64, f64)> {
    let j = ambient
        .complex_structure(y, chart)
        .ok_or_else(|| GeomError::Usage("tameness needs a complex structure".into()))?;
    let basis = ambient.tangent_basis(y, chart)?;
    let om = form.matrix(y, chart)?;
    let g = metric.matrix(y, chart)?;
    let mut rng = cell_rng(seed, cell);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..count {
        let c = DVector::from_vec(gaussian_vec(&mut rng, basis.ncols()));
        let x = &basis * c;
        let jx = &j * &x;
        let num = (x.transpose() * &om * &jx)[(0, 0)];
        let den = (x.transpose() * &g * &x)[(0, 0)];
        let ratio = num / den;
        if !(ratio > 0.0) {
            return Err(GeomError::Rejected(format!(
                "taming failure: ω(X,JX)/g(X,X) = {ratio:.6e} at y = {:?}, X = {:?}",
                y,
                x.as_slice()
            )));
        }
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

/// [`tameness_at`] over every sample base point; stream = sample index.
pub fn tameness_bounds(
    form: &FormHandle,
    ambient: &dyn Ambient,
    metric: &MetricHandle,
    sampler: &SubmanifoldSampler,
    vector_samples: usize,
    seed: u64,
) -> Result<Extremum> {
    let mut acc = Extremum::new();
    for i in 0..sampler.len() {
        let u = sampler.grid.point(i);
        let chart = sampler.patch.chart_at(&u)?;
        let y = sampler.patch.eval(&u, chart)?;
        let (lo, hi) = tameness_at(form, ambient, metric, y.as_slice(), chart, vector_samples, seed, i as u64)?;
        acc.push_range(i, &u, lo, hi);
    }
    Ok(acc)
}

/// C = max(sup, 1/inf) for ratios in [inf, sup].
pub fn taming_constant(bounds: &Extremum) -> f64 {
    bounds.max.max(1.0 / bounds.min)
}

/// A map between chart coordinates. `base` is the point where chart
/// choices are made; nearby evaluations reuse them.
pub trait ChartMap: Sync {
    fn target_chart(&self, base: &[f64], chart: usize) -> Result<usize>;
    fn apply(&self, y: &[f64], chart: usize, target_chart: usize, base: &[f64]) -> Result<DVector<f64>>;
}

/// Closure-backed [`ChartMap`] that ignores charts.
pub struct PlainMap<F>(pub F);

impl<F> ChartMap for PlainMap<F>
where
    F: Fn(&[f64]) -> Result<DVector<f64>> + Sync,
{
    fn target_chart(&self, _base: &[f64], _chart: usize) -> Result<usize> {
        Ok(0)
    }

    fn apply(&self, y: &[f64], _chart: usize, _target: usize, _base: &[f64]) -> Result<DVector<f64>> {
        (self.0)(y)
    }
}

/// π₂⁻¹ on 𝒞 ∖ {0}: w reals ↦ Ĉ chart coordinates (or only ζ when
/// `line_only`, i.e. π₁∘π₂⁻¹). The ratio giving ζ is the one with the larger
/// denominator at the base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResolveMap {
    pub line_only: bool,
}

impl ChartMap for ResolveMap {
    fn target_chart(&self, base: &[f64], _chart: usize) -> Result<usize> {
        Ok(resolve_lift(&ComplexVec4::from_reals(base, CoordSystem::W))?.line.preferred_chart())
    }

    fn apply(&self, y: &[f64], _chart: usize, target: usize, base: &[f64]) -> Result<DVector<f64>> {
        let c = |v: &[f64], k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
        let pairs = if target == 0 { [(0, 1), (2, 3)] } else { [(1, 0), (3, 2)] };
        let (num, den) = if c(base, pairs[0].1).norm() >= c(base, pairs[1].1).norm() { pairs[0] } else { pairs[1] };
        let d = c(y, den);
        if d.norm() == 0.0 {
            return Err(GeomError::Singular("vanishing denominator in the line ratio".into()));
        }
        let zeta = c(y, num) / d;
        let mut out = alloc::vec![zeta.re, zeta.im];
        if !self.line_only {
            out.extend_from_slice(y);
        }
        Ok(DVector::from_vec(out))
    }
}

/// Extreme generalized eigenvalues of (DΦ B)ᵀ G̃ (DΦ B) against Bᵀ G B,
/// where B spans the source tangent space (identity if `None`).
pub fn bilipschitz_at(
    map: &dyn ChartMap,
    source: &MetricHandle,
    target: &MetricHandle,
    y: &[f64],
    chart: usize,
    basis: Option<&DMatrix<f64>>,
    fd: &FdConfig,
) -> Result<(f64, f64)> {
    let tc = map.target_chart(y, chart)?;
    let image = map.apply(y, chart, tc, y)?;
    let b = match basis {
        Some(b) => b.clone(),
        None => DMatrix::identity(y.len(), y.len()),
    };
    // directional derivatives along the basis keep the stencil on the source
    let mut cols = Vec::with_capacity(b.ncols());
    for k in 0..b.ncols() {
        let f = |s: &[f64]| -> Result<DVector<f64>> {
            let p: Vec<f64> = y.iter().zip(b.column(k).iter()).map(|(a, d)| a + s[0] * d).collect();
            map.apply(&p, chart, tc, y)
        };
        cols.push(jacobian(&f, &[0.0], fd)?.column(0).into_owned());
    }
    let db = DMatrix::from_columns(&cols);
    let gs = b.transpose() * source.matrix(y, chart)? * &b;
    let gt = db.transpose() * target.matrix(image.as_slice(), tc)? * &db;
    generalized_extremes(&gt, &gs)
}

/// Extreme eigenvalues of M against the positive-definite S.
pub fn generalized_extremes(m: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::Degenerate("source metric not positive definite".into()))?;
    let linv = chol.l().try_inverse().ok_or_else(|| GeomError::Degenerate("singular source metric".into()))?;
    let c = &linv * m * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo > 0.0) {
        return Err(GeomError::Singular(format!("pullback metric degenerate: smallest eigenvalue {lo:.3e}")));
    }
    Ok((lo, hi))
}

/// Smallest principal angle between T and J(T), in [0, π/2].
pub fn totally_real_angle(ambient: &dyn Ambient, s: &Sample) -> Result<f64> {
    let ys = s.y.as_slice();
    let j = ambient
        .complex_structure(ys, s.chart)
        .ok_or_else(|| GeomError::Usage("totally-real angle needs a complex structure".into()))?;
    let g = ambient.metric(ys, s.chart);
    let (q, _) = orthonormalize(&s.tangent, &g)?;
    let m = q.transpose() * &g * (&j * &q);
    let top = m.singular_values().iter().fold(0.0f64, |a, &v| a.max(v));
    Ok(top.min(1.0).acos())
}

pub fn min_totally_real_angle(ambient: &dyn Ambient, sampler: &SubmanifoldSampler) -> Result<Extremum> {
    let mut acc = Extremum::new();
    for i in 0..sampler.len() {
        let s = sampler.sample(i)?;
        match totally_real_angle(ambient, &s) {
            Ok(v) => acc.push(i, &s.u, v),
            Err(GeomError::Degenerate(_)) => acc.exclude(),
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::ambient::Euclidean;
    use crate::verify::forms::{FormTag, MetricTag};
    use crate::verify::patch::Patch;
    use alloc::boxed::Box;

    fn plane_sample(cols: &[[f64; 4]]) -> Sample {
        let t = DMatrix::from_columns(&cols.iter().map(|c| DVector::from_column_slice(c)).collect::<Vec<_>>());
        Sample { index: 0, u: alloc::vec![0.0; cols.len()], chart: 0, y: DVector::zeros(4), tangent: t }
    }

    #[test]
    fn totally_real_examples() {
        let c2 = Euclidean::complex(2, 1.0);
        // ℝ² ⊂ ℂ²: real parts of both coordinates
        let real = plane_sample(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
        assert!((totally_real_angle(&c2, &real).unwrap() - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let line = plane_sample(&[[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]);
        assert!(totally_real_angle(&c2, &line).unwrap().abs() < 1e-7);
    }

    #[test]
    fn zero_section_restriction_vanishes() {
        let p = Patch::new(
            3,
            8,
            Box::new(|u, _| {
                let x = crate::verify::patch::sphere3_patch(1.0).eval(u, 0)?;
                let mut v = DVector::zeros(8);
                v.rows_mut(0, 4).copy_from(&x);
                Ok(v)
            }),
        );
        let grid = crate::sample::GridSpec::new(alloc::vec![
            crate::sample::Axis::closed(0.2, 1.3, 5),
            crate::sample::Axis::periodic(0.0, 6.28, 5),
            crate::sample::Axis::periodic(0.0, 6.28, 5),
        ])
        .unwrap();
        let s = SubmanifoldSampler::new(&p, grid).unwrap();
        let acc = form_restriction_max(&FormHandle::omega(), &Euclidean::phase_space(), &s).unwrap();
        assert_eq!(acc.max, 0.0);
        assert_eq!(acc.count, 125);
    }

    #[test]
    fn degenerate_basis_is_excluded() {
        let p = Patch::new(2, 8, Box::new(|u, _| {
            let mut v = DVector::zeros(8);
            v[0] = u[0] + u[1];
            Ok(v)
        }));
        let grid = crate::sample::GridSpec::new(alloc::vec![crate::sample::Axis::closed(0.0, 1.0, 3); 2]).unwrap();
        let s = SubmanifoldSampler::new(&p, grid).unwrap();
        let acc = form_restriction_max(&FormHandle::omega(), &Euclidean::phase_space(), &s).unwrap();
        assert_eq!((acc.count, acc.excluded), (0, 9));
        assert!(acc.check_exclusions(1e-3).is_err());
    }

    #[test]
    fn standard_triple_tames_with_constant_one() {
        let amb = Euclidean::phase_space();
        let om = FormHandle::omega();
        let g = MetricHandle::of(MetricTag::GSt, &amb);
        let (lo, hi) = tameness_at(&om, &amb, &g, &[0.1; 8], 0, 500, 3, 0).unwrap();
        assert!((lo - 1.0).abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
        // the negated form is rejected with a witness
        let neg = FormHandle::new(FormTag::Custom, Box::new(|_, _| Ok(-crate::verify::ambient::phase_j().transpose())));
        assert!(matches!(tameness_at(&neg, &amb, &g, &[0.0; 8], 0, 5, 3, 0), Err(GeomError::Rejected(_))));
    }

    #[test]
    fn identity_is_isometric() {
        let g = MetricHandle::euclidean(5, 1.0);
        let id = PlainMap(|y: &[f64]| Ok(DVector::from_column_slice(y)));
        let (lo, hi) = bilipschitz_at(&id, &g, &g, &[0.3, 1.0, -2.0, 0.0, 5.0], 0, None, &FdConfig::default()).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        let dbl = PlainMap(|y: &[f64]| Ok(DVector::from_column_slice(y) * 2.0));
        let (lo, hi) = bilipschitz_at(&dbl, &g, &g, &[0.0; 5], 0, None, &FdConfig::default()).unwrap();
        assert!((lo - 4.0).abs() < 1e-8 && (hi - 4.0).abs() < 1e-8);
        let flat = PlainMap(|y: &[f64]| Ok(DVector::from_vec(alloc::vec![y[0], 0.0, 0.0, 0.0, 0.0])));
        assert!(matches!(
            bilipschitz_at(&flat, &g, &g, &[0.0; 5], 0, None, &FdConfig::default()),
            Err(GeomError::Singular(_))
        ));
    }
}
