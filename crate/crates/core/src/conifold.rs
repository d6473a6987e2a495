//! Contractions onto the conifold, the isotopy Φ_ε, the small resolution
//! Ĉ ⊂ CP¹×ℂ⁴, the cone chart, the transition CT and its closed-form oracles.

use crate::conormal::{ConormalCoords, FramedKnot, PerturbationField};
use crate::error::{GeomError, Result};
use crate::geom::{xieta_to_w, ComplexVec4, CoordSystem, PhasePoint, ProjPoint, TangentVec, Vec4, Vec8};
use crate::knots::KnotCurve;
use alloc::format;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const ON_TSTAR_TOL: f64 = 1e-8;

fn check_cotangent(pt: &PhasePoint) -> Result<()> {
    if pt.is_finite() && pt.on_cotangent_sphere(ON_TSTAR_TOL) {
        Ok(())
    } else {
        Err(GeomError::Domain(format!(
            "point off T*S³: |x|-1 = {:.3e}, x·p = {:.3e}",
            pt.x.norm() - 1.0,
            pt.x.dot(&pt.p)
        )))
    }
}

/// F(x,p) = (|p|x, p).
pub fn contract_f(pt: &PhasePoint) -> Result<PhasePoint> {
    check_cotangent(pt)?;
    Ok(PhasePoint::new(pt.x * pt.p.norm(), pt.p))
}

/// F_a(x,p) = (x√(a²+|p|²), p), onto the deformed conifold 𝒞_a.
pub fn contract_fa(a: f64, pt: &PhasePoint) -> Result<PhasePoint> {
    if !(a > 0.0) {
        return Err(GeomError::Parameter(format!("a must be > 0, got {a}")));
    }
    check_cotangent(pt)?;
    Ok(PhasePoint::new(pt.x * (a * a + pt.p.norm_squared()).sqrt(), pt.p))
}

/// F_ε(x,p) = (x√(|p|²+ε²), p).
pub fn contract_feps(eps: f64, pt: &PhasePoint) -> Result<PhasePoint> {
    if !(eps >= 0.0) {
        return Err(GeomError::Parameter(format!("eps must be >= 0, got {eps}")));
    }
    check_cotangent(pt)?;
    Ok(PhasePoint::new(pt.x * (pt.p.norm_squared() + eps * eps).sqrt(), pt.p))
}

/// dF_ε at `v.base` applied to `v.dir`: (s·dx + x (p·dp)/s, dp) with s = √(|p|²+ε²).
pub fn contract_feps_differential(eps: f64, v: &TangentVec) -> Result<Vec8> {
    if !(eps >= 0.0) {
        return Err(GeomError::Parameter(format!("eps must be >= 0, got {eps}")));
    }
    let (x, p) = (v.base.x, v.base.p);
    let dx: Vec4 = v.dir.fixed_rows::<4>(0).into();
    let dp: Vec4 = v.dir.fixed_rows::<4>(4).into();
    let s = (p.norm_squared() + eps * eps).sqrt();
    if s == 0.0 {
        return Err(GeomError::Degenerate("F_0 is not differentiable at p = 0".into()));
    }
    let mut out = Vec8::zeros();
    out.fixed_rows_mut::<4>(0).copy_from(&(dx * s + x * (p.dot(&dp) / s)));
    out.fixed_rows_mut::<4>(4).copy_from(&dp);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotopyDirection {
    Forward,
    Inverse,
}

/// Φ_ε(x,p) = (x, p ± εξ(x)) with ε and ξ taken from the field.
pub fn isotopy_phi(field: &PerturbationField, pt: &PhasePoint, direction: IsotopyDirection) -> PhasePoint {
    let shift = field.value(&pt.x) * field.eps;
    match direction {
        IsotopyDirection::Forward => PhasePoint::new(pt.x, pt.p + shift),
        IsotopyDirection::Inverse => PhasePoint::new(pt.x, pt.p - shift),
    }
}

/// ([u:v], w) ∈ CP¹×ℂ⁴ with v·w₁ = u·w₂ and v·w₃ = u·w₄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPoint {
    pub line: ProjPoint,
    pub w: ComplexVec4,
}

impl ResolvedPoint {
    pub fn constraint_residual(&self) -> f64 {
        let (u, v, w) = (self.line.u, self.line.v, &self.w.c);
        (v * w[0] - u * w[1]).norm().max((v * w[2] - u * w[3]).norm())
    }

    /// Affine CP¹ coordinate u/v of the line.
    pub fn trace(&self) -> Complex64 {
        self.line.ratio()
    }

    pub fn trace_abs(&self) -> f64 {
        let (u, v) = (self.line.u.norm(), self.line.v.norm());
        if v == 0.0 {
            f64::INFINITY
        } else {
            u / v
        }
    }

    /// Chart coordinates (Re ζ, Im ζ, Re w₁, Im w₁, …, Re w₄, Im w₄).
    pub fn chart_coords(&self, chart: usize) -> [f64; 10] {
        let z = self.line.affine(chart);
        let r = self.w.to_reals();
        let mut out = [0.0; 10];
        out[0] = z.re;
        out[1] = z.im;
        out[2..].copy_from_slice(&r);
        out
    }

    pub fn from_chart_coords(y: &[f64], chart: usize) -> Result<Self> {
        let line = ProjPoint::from_affine(Complex64::new(y[0], y[1]), chart)?;
        Ok(Self { line, w: ComplexVec4::from_reals(&y[2..10], CoordSystem::W) })
    }

    /// Embedding of Ĉ in ℝ³ × ℝ⁸: the line on the sphere of radius 1/2
    /// (isometric to g_FS) and w as the Euclidean (x, p) of g_st.
    pub fn ambient_point(&self) -> [f64; 11] {
        let mut out = [0.0; 11];
        out[..3].copy_from_slice(&self.line.sphere_point());
        let z = crate::geom::coords_zw(&self.w, crate::geom::ZwDirection::ToZ).expect("w-system point");
        for j in 0..4 {
            out[3 + j] = z.c[j].re;
            out[7 + j] = z.c[j].im;
        }
        out
    }
}

/// π₂⁻¹ on 𝒞 \ {0}: the line is read off the larger of the pairs (w₁,w₂), (w₃,w₄).
pub fn resolve_lift(w: &ComplexVec4) -> Result<ResolvedPoint> {
    w.expect(CoordSystem::W)?;
    let n = w.norm();
    if !(n >= 1e-10) {
        return Err(GeomError::Singular(format!("|w| = {n:.3e}: the lift is undefined at the node")));
    }
    let q = w.quadric().norm();
    if q > 1e-8 * n * n {
        return Err(GeomError::Domain(format!("w off the conifold: |w₁w₄ − w₂w₃| = {q:.3e}")));
    }
    let c = &w.c;
    let line = if c[0].norm_sqr() + c[1].norm_sqr() >= c[2].norm_sqr() + c[3].norm_sqr() {
        ProjPoint::new(c[0], c[1])?
    } else {
        ProjPoint::new(c[2], c[3])?
    };
    Ok(ResolvedPoint { line, w: *w })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartIndex {
    /// (ξ, zξ, η, zη)
    One,
    /// (zξ, ξ, zη, η)
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub z: Complex64,
    pub xi: Complex64,
    pub eta: Complex64,
    pub chart: ChartIndex,
}

pub fn cone_embed(cp: &ChartPoint) -> Result<ComplexVec4> {
    if !(cp.z.norm() < 2.0) {
        return Err(GeomError::Domain(format!("cone chart needs |z| < 2, got {:.4}", cp.z.norm())));
    }
    let (a, b) = (cp.xi, cp.z * cp.xi);
    let (c, d) = (cp.eta, cp.z * cp.eta);
    Ok(match cp.chart {
        ChartIndex::One => ComplexVec4::w([a, b, c, d]),
        ChartIndex::Two => ComplexVec4::w([b, a, d, c]),
    })
}

/// Inverse of the cone chart; chart 2 is used when (w₂, w₄) dominates (w₁, w₃).
pub fn cone_invert(w: &ComplexVec4) -> Result<ChartPoint> {
    w.expect(CoordSystem::W)?;
    if !(w.norm() >= 1e-10) {
        return Err(GeomError::Singular("cone chart undefined at w = 0".into()));
    }
    let c = &w.c;
    let odd = c[0].norm_sqr() + c[2].norm_sqr();
    let even = c[1].norm_sqr() + c[3].norm_sqr();
    if even > odd {
        let z = (c[0] * c[1].conj() + c[2] * c[3].conj()) / even;
        Ok(ChartPoint { z, xi: c[1], eta: c[3], chart: ChartIndex::Two })
    } else {
        let z = (c[1] * c[0].conj() + c[3] * c[2].conj()) / odd;
        Ok(ChartPoint { z, xi: c[0], eta: c[2], chart: ChartIndex::One })
    }
}

/// π₂⁻¹ ∘ F applied to a point of T*S³ away from the zero section.
pub fn transition_of(pt: &PhasePoint) -> Result<ResolvedPoint> {
    resolve_lift(&contract_f(pt)?.to_w())
}

/// A point of CT(N*_{k,ε}) = π₂⁻¹(F(N*_{k,ε})).
pub fn ct_point(framed: &FramedKnot, eps: f64, coords: &ConormalCoords) -> Result<ResolvedPoint> {
    if !(eps > 0.0) {
        return Err(GeomError::Parameter(format!("CT needs eps > 0, got {eps}")));
    }
    transition_of(&framed.perturbed_conormal_point(eps, coords)?)
}

/// Closed form of CT(N*_unknot): ([α:1], αb, b, b̄, conj(αb)),
/// α = ie^{i(t+θ)}, b = −ire^{−iθ}.
pub fn ct_unknot_oracle(t: f64, theta: f64, r: f64) -> ResolvedPoint {
    let i = Complex64::new(0.0, 1.0);
    let alpha = i * Complex64::from_polar(1.0, t + theta);
    let b = -i * Complex64::from_polar(r, -theta);
    let ab = alpha * b;
    ResolvedPoint {
        line: ProjPoint::new(alpha, Complex64::new(1.0, 0.0)).expect("|α| = 1"),
        w: ComplexVec4::w([ab, b, b.conj(), ab.conj()]),
    }
}

fn check_torus(m: i64, n: i64) -> Result<()> {
    KnotCurve::torus_knot(m, n).map(|_| ())
}

/// Literal closed form of the CP¹ trace of the (m,n) torus-knot transition:
/// −e^{i(m+n)t}(1 − (n√2/√(m²+n²)) sin θ + i cos θ)/(1 + (m√2/√(m²+n²)) sin θ − i cos θ).
pub fn torus_trace(m: i64, n: i64, t: f64, theta: f64) -> Result<Complex64> {
    check_torus(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    let norm = (mf * mf + nf * nf).sqrt();
    let (s, c) = theta.sin_cos();
    let sq2 = core::f64::consts::SQRT_2;
    let num = Complex64::new(1.0 - nf * sq2 / norm * s, c);
    let den = Complex64::new(1.0 + mf * sq2 / norm * s, -c);
    Ok(-Complex64::from_polar(1.0, (mf + nf) * t) * num / den)
}

/// π₂⁻¹F of the torus-knot conormal point built from the explicit frame
/// p¹ = (e^{imt}, −e^{int})/√2, p² = (ine^{imt}, −ime^{int})/√(m²+n²)
/// at (α, β) = r(cos θ, sin θ). Requires r > 0.
pub fn torus_ct_oracle(m: i64, n: i64, t: f64, theta: f64, r: f64) -> Result<ResolvedPoint> {
    check_torus(m, n)?;
    if !(r > 0.0) {
        return Err(GeomError::Parameter(format!("torus oracle needs r > 0, got {r}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let i = Complex64::new(0.0, 1.0);
    let (em, en) = (Complex64::from_polar(1.0, mf * t), Complex64::from_polar(1.0, nf * t));
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let nm = (mf * mf + nf * nf).sqrt();
    let (s, c) = theta.sin_cos();
    let p1 = [em * h, -en * h];
    let p2 = [i * nf * em / nm, -i * mf * en / nm];
    // F scales x by |p| = r
    let xi = [em * (h * r), en * (h * r)];
    let eta = [(p1[0] * c + p2[0] * s) * r, (p1[1] * c + p2[1] * s) * r];
    resolve_lift(&xieta_to_w(&xi, &eta))
}

/// CP¹ trace u/v of [`torus_ct_oracle`]; independent of r.
pub fn torus_trace_from_frame(m: i64, n: i64, t: f64, theta: f64) -> Result<Complex64> {
    Ok(torus_ct_oracle(m, n, t, theta, 1.0)?.trace())
}

/// The x-part of F_ε applied to a perturbed-free conormal point, kept for
/// the commuting square Φ_ε ∘ F_ε = F ∘ (perturbation).
pub fn feps_conormal(framed: &FramedKnot, eps: f64, coords: &ConormalCoords) -> Result<PhasePoint> {
    contract_feps(eps, &framed.conormal_point(coords)?)
}

/// |x| of a point of F(N*_{k,ε}) at fiber radius r.
pub fn cone_radius(eps: f64, r: f64) -> f64 {
    (r * r + eps * eps).sqrt()
}

#[doc(hidden)]
pub fn unit_x(pt: &PhasePoint) -> Vec4 {
    pt.x.normalize()
}
