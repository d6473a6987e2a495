//! Orthonormal frames along a knot, the conormal and perturbed conormal
//! parametrizations, and the perturbation field used by the isotopy Φ_ε.

use crate::error::{GeomError, Result};
use crate::geom::{PhasePoint, TangentVec, Vec4};
use crate::knots::KnotCurve;
use crate::tol::FdConfig;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{Matrix4, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub k: Vec4,
    pub tau: Vec4,
    pub p1: Vec4,
    pub p2: Vec4,
}

impl Frame {
    pub fn gram(&self) -> Matrix4<f64> {
        let m = Matrix4::from_columns(&[self.k, self.tau, self.p1, self.p2]);
        m.transpose() * m
    }
}

/// Frame together with its t-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameJet {
    pub frame: Frame,
    pub dk: Vec4,
    pub dtau: Vec4,
    pub dp1: Vec4,
    pub dp2: Vec4,
}

/// X(a,b,c) with det[a,b,c,X] = |X|², orthogonal to a, b, c.
pub fn triple_cross(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let mut out = Vec4::zeros();
    for i in 0..4 {
        let m = Matrix4::from_columns(&[*a, *b, *c, Vec4::ith(i, 1.0)]);
        out[i] = m.determinant();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConormalCoords {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ConormalCoords {
    pub fn new(t: f64, alpha: f64, beta: f64) -> Self {
        Self { t, alpha, beta }
    }

    pub fn polar(t: f64, r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { t, alpha: r * c, beta: r * s }
    }

    pub fn r(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    pub fn theta(&self) -> f64 {
        crate::geom::wrap_angle(self.beta.atan2(self.alpha))
    }
}

const SEED_SCAN: usize = 1024;
const SEED_MIN_MARGIN: f64 = 0.05;

/// A knot with a globally smooth, periodic normal frame.
///
/// p¹ is the normalized projection of one fixed seed vector onto span{k, k̇}^⊥.
/// The seed is the candidate whose projection stays largest along the whole
/// curve, so the frame never flips and closes up after one period.
#[derive(Debug, Clone)]
pub struct FramedKnot {
    pub knot: KnotCurve,
    seed: Vec4,
    /// min over t of the projected seed length.
    pub seed_margin: f64,
}

fn seed_candidates() -> Vec<Vec4> {
    let mut out = Vec::new();
    for i in 0..4 {
        out.push(Vec4::ith(i, 1.0));
    }
    let r = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in (i + 1)..4 {
            for s in [1.0, -1.0] {
                let mut v = Vec4::zeros();
                v[i] = r;
                v[j] = s * r;
                out.push(v);
            }
        }
    }
    for mask in 0..8u32 {
        let sign = |b: u32| if mask & (1 << b) != 0 { -0.5 } else { 0.5 };
        out.push(Vec4::new(0.5, sign(0), sign(1), sign(2)));
    }
    out
}

impl FramedKnot {
    pub fn new(knot: &KnotCurve) -> Result<Self> {
        let mut jets = Vec::with_capacity(SEED_SCAN);
        for i in 0..SEED_SCAN {
            let t = 2.0 * PI * i as f64 / SEED_SCAN as f64;
            let j = knot.jet(t);
            let speed = j.dk.norm();
            if speed < 1e-12 {
                return Err(GeomError::Degenerate(format!("|k'(t)| = {speed:.3e} at t={t:.6}")));
            }
            jets.push((j.k, j.dk / speed));
        }
        let mut best = (Vec4::zeros(), -1.0);
        for s in seed_candidates() {
            let margin = jets
                .iter()
                .map(|(k, tau)| (s - k * k.dot(&s) - tau * tau.dot(&s)).norm())
                .fold(f64::INFINITY, f64::min);
            if margin > best.1 {
                best = (s, margin);
            }
        }
        if best.1 < SEED_MIN_MARGIN {
            return Err(GeomError::Degenerate(format!("no frame seed with margin above {SEED_MIN_MARGIN}")));
        }
        Ok(Self { knot: knot.clone(), seed: best.0, seed_margin: best.1 })
    }

    pub fn frame_jet(&self, t: f64) -> Result<FrameJet> {
        let j = self.knot.jet(t);
        let speed = j.dk.norm();
        if speed < 1e-12 {
            return Err(GeomError::Degenerate(format!("|k'(t)| = {speed:.3e} at t={t:.6}")));
        }
        let tau = j.dk / speed;
        let dtau = (j.ddk - tau * j.ddk.dot(&tau)) / speed;
        let s = self.seed;
        let q = s - j.k * j.k.dot(&s) - tau * tau.dot(&s);
        let dq = -(j.k * j.dk.dot(&s) + j.dk * j.k.dot(&s) + tau * dtau.dot(&s) + dtau * tau.dot(&s));
        let qn = q.norm();
        if qn < 1e-9 {
            return Err(GeomError::Degenerate(format!("frame seed collapses at t={t:.6}")));
        }
        let p1 = q / qn;
        let dp1 = (dq - p1 * p1.dot(&dq)) / qn;
        let p2 = triple_cross(&j.k, &tau, &p1);
        let dp2 = triple_cross(&j.dk, &tau, &p1) + triple_cross(&j.k, &dtau, &p1) + triple_cross(&j.k, &tau, &dp1);
        Ok(FrameJet { frame: Frame { k: j.k, tau, p1, p2 }, dk: j.dk, dtau, dp1, dp2 })
    }

    pub fn frame_at(&self, t: f64) -> Result<Frame> {
        Ok(self.frame_jet(t)?.frame)
    }

    pub fn conormal_point(&self, c: &ConormalCoords) -> Result<PhasePoint> {
        self.perturbed_conormal_point(0.0, c)
    }

    /// (k(t), αp¹ + βp² + ετ).
    pub fn perturbed_conormal_point(&self, eps: f64, c: &ConormalCoords) -> Result<PhasePoint> {
        if !(eps >= 0.0) {
            return Err(GeomError::Parameter(format!("eps must be >= 0, got {eps}")));
        }
        let f = self.frame_at(c.t)?;
        Ok(PhasePoint::new(f.k, f.p1 * c.alpha + f.p2 * c.beta + f.tau * eps))
    }

    /// K_*∂_t, K_*∂_α, K_*∂_β of the (perturbed) conormal parametrization.
    pub fn conormal_tangent_basis(&self, eps: f64, c: &ConormalCoords) -> Result<[TangentVec; 3]> {
        let fj = self.frame_jet(c.t)?;
        let f = fj.frame;
        let base = PhasePoint::new(f.k, f.p1 * c.alpha + f.p2 * c.beta + f.tau * eps);
        Ok([
            TangentVec::new(base, fj.dk, fj.dp1 * c.alpha + fj.dp2 * c.beta + fj.dtau * eps),
            TangentVec::new(base, Vec4::zeros(), f.p1),
            TangentVec::new(base, Vec4::zeros(), f.p2),
        ])
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Grid used to measure the empirical ‖Dξ‖.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSampling {
    pub n_t: usize,
    pub n_d: usize,
    pub n_phi: usize,
    pub n_s: usize,
}

impl Default for NormSampling {
    fn default() -> Self {
        Self { n_t: 128, n_d: 9, n_phi: 8, n_s: 3 }
    }
}

const PROJECTION_TABLE: usize = 720;

/// ξ(x) = χ(|x|)·φ(d)·τ(t*) on the cone over a tube around the knot.
///
/// t* is the nearest parameter of x/|x| on the knot and d the spherical
/// distance to it, so ξ is homogeneous of degree 0 where χ = 1 and
/// ξ(s·k(t)) = τ(t) there.
#[derive(Debug, Clone)]
pub struct PerturbationField {
    knot: KnotCurve,
    pub eps: f64,
    pub tube_radius: f64,
    /// χ = 1 on [ε/2, r_max].
    pub r_max: f64,
    pub fd: FdConfig,
    table: Vec<(f64, Vec4)>,
}

impl PerturbationField {
    pub const DEFAULT_R_MAX: f64 = 10.0;

    pub fn new(knot: &KnotCurve, eps: f64) -> Result<Self> {
        Self::with_params(knot, eps, Self::default_tube_radius(knot), Self::DEFAULT_R_MAX)
    }

    pub fn with_params(knot: &KnotCurve, eps: f64, tube_radius: f64, r_max: f64) -> Result<Self> {
        if !(eps >= 0.0) || !(tube_radius > 0.0) || !(r_max > eps) {
            return Err(GeomError::Parameter(format!(
                "field needs eps >= 0, tube radius > 0, r_max > eps (got {eps}, {tube_radius}, {r_max})"
            )));
        }
        let table = (0..PROJECTION_TABLE)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / PROJECTION_TABLE as f64;
                (t, knot.point(t))
            })
            .collect();
        Ok(Self { knot: knot.clone(), eps, tube_radius, r_max, fd: FdConfig::default(), table })
    }

    /// min(0.5, half the self-distance at arclength separation ≥ π/2, half the curvature reach).
    pub fn default_tube_radius(knot: &KnotCurve) -> f64 {
        let half_self = 0.5 * knot.self_distance(512, PI / 2.0);
        let kappa = knot.max_geodesic_curvature(512);
        let reach = if kappa > 0.0 { 0.5 / kappa } else { f64::INFINITY };
        0.5f64.min(half_self).min(reach)
    }

    pub fn knot(&self) -> &KnotCurve {
        &self.knot
    }

    fn chi(&self, s: f64) -> f64 {
        let inner = 0.5 * self.eps;
        let lower = if inner > 0.0 { smoothstep((s - 0.5 * inner) / (0.5 * inner)) } else { 1.0 };
        lower * (1.0 - smoothstep((s - self.r_max) / self.r_max))
    }

    fn profile(&self, d: f64) -> f64 {
        1.0 - smoothstep(d / self.tube_radius)
    }

    /// Nearest parameter t* of a unit vector and its spherical distance.
    pub fn nearest(&self, xhat: &Vec4) -> (f64, f64) {
        let (mut t, _) = self
            .table
            .iter()
            .map(|(t, k)| (*t, xhat.dot(k)))
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let spacing = 2.0 * PI / PROJECTION_TABLE as f64;
        // Newton on t ↦ x̂·k̇(t) = 0
        for _ in 0..40 {
            let j = self.knot.jet(t);
            let g = xhat.dot(&j.dk);
            let dg = xhat.dot(&j.ddk);
            if dg >= 0.0 {
                break;
            }
            let step = (-g / dg).clamp(-spacing, spacing);
            t += step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let chord = (xhat - self.knot.point(t)).norm();
        let d = 2.0 * (0.5 * chord).min(1.0).asin();
        (crate::geom::wrap_angle(t), d)
    }

    pub fn value(&self, x: &Vec4) -> Vec4 {
        let s = x.norm();
        if !(s > 0.0) {
            return Vec4::zeros();
        }
        let chi = self.chi(s);
        if chi == 0.0 {
            return Vec4::zeros();
        }
        let xhat = x / s;
        let (t, d) = self.nearest(&xhat);
        if d >= self.tube_radius {
            return Vec4::zeros();
        }
        let tau = self.knot.jet(t).dk.normalize();
        tau * (chi * self.profile(d))
    }

    pub fn jacobian(&self, x: &Vec4) -> Matrix4<f64> {
        let h = self.fd.step * x.norm().max(1.0);
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            let mut e = Vec4::zeros();
            e[i] = h;
            let col = (self.value(&(x + e)) - self.value(&(x - e))) / (2.0 * h);
            m.set_column(i, &col);
        }
        m
    }

    pub fn eval(&self, x: &Vec4) -> (Vec4, Matrix4<f64>) {
        (self.value(x), self.jacobian(x))
    }

    /// Maximum spectral norm of the FD Jacobian over the cone on a tube
    /// grid with |x| in `window`.
    pub fn measure_norm(&self, framed: &FramedKnot, window: (f64, f64), grid: NormSampling) -> Result<f64> {
        let mut best = 0.0f64;
        for it in 0..grid.n_t {
            let t = 2.0 * PI * it as f64 / grid.n_t as f64;
            let f = framed.frame_at(t)?;
            for id in 0..grid.n_d {
                let d = self.tube_radius * id as f64 / (grid.n_d.max(2) - 1) as f64;
                for ip in 0..grid.n_phi {
                    let phi = 2.0 * PI * ip as f64 / grid.n_phi as f64;
                    let dir = (f.p1 * phi.cos() + f.p2 * phi.sin()) * d.sin() + f.k * d.cos();
                    for is in 0..grid.n_s {
                        let s = if grid.n_s == 1 {
                            window.0
                        } else {
                            window.0 + (window.1 - window.0) * is as f64 / (grid.n_s - 1) as f64
                        };
                        best = best.max(spectral_norm(&self.jacobian(&(dir * s))));
                    }
                }
            }
        }
        Ok(best)
    }
}

pub fn spectral_norm(m: &Matrix4<f64>) -> f64 {
    let e = SymmetricEigen::new(m.transpose() * m);
    e.eigenvalues.iter().fold(0.0f64, |a, b| a.max(*b)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{liouville_eval, omega_eval};
    use crate::knots::FourierTerm;
    use approx::assert_abs_diff_eq;

    fn knots() -> Vec<KnotCurve> {
        let t = |axis, harmonic, cos, sin| FourierTerm { axis, harmonic, cos, sin };
        alloc::vec![
            KnotCurve::unknot(),
            KnotCurve::torus_knot(2, 3).unwrap(),
            KnotCurve::fourier_knot(alloc::vec![
                t(0, 1, 1.0, 0.0),
                t(0, 2, 2.0, 0.0),
                t(1, 1, 0.0, 1.0),
                t(1, 2, 0.0, -2.0),
                t(2, 3, 0.0, 1.0),
                t(3, 0, 0.5, 0.0),
            ])
            .unwrap(),
        ]
    }

    /// Residual of projecting `v` onto span{a, b} (a, b orthonormal).
    fn off_span(v: &Vec4, a: &Vec4, b: &Vec4) -> f64 {
        (v - a * a.dot(v) - b * b.dot(v)).norm()
    }

    #[test]
    fn unknot_frame_spans_second_plane() {
        let fk = FramedKnot::new(&KnotCurve::unknot()).unwrap();
        let f = fk.frame_at(0.0).unwrap();
        let (e3, e4) = (Vec4::new(0.0, 0.0, 1.0, 0.0), Vec4::new(0.0, 0.0, 0.0, 1.0));
        assert!(off_span(&f.p1, &e3, &e4) < 1e-12);
        assert!(off_span(&f.p2, &e3, &e4) < 1e-12);
    }

    #[test]
    fn torus_frame_span_at_zero() {
        let fk = FramedKnot::new(&KnotCurve::torus_knot(2, 3).unwrap()).unwrap();
        let f = fk.frame_at(0.0).unwrap();
        let a = Vec4::new(1.0, 0.0, -1.0, 0.0) / 2.0f64.sqrt();
        let b = Vec4::new(0.0, 3.0, 0.0, -2.0) / 13.0f64.sqrt();
        assert!(off_span(&f.p1, &a, &b) < 1e-12);
        assert!(off_span(&f.p2, &a, &b) < 1e-12);
    }

    #[test]
    fn frames_orthonormal_oriented_and_continuous() {
        for knot in knots() {
            let fk = FramedKnot::new(&knot).unwrap();
            let n = 256;
            let spacing = 2.0 * PI / n as f64;
            let mut prev = fk.frame_at(0.0).unwrap();
            for i in 1..=n {
                let f = fk.frame_at(spacing * i as f64).unwrap();
                assert!((f.gram() - Matrix4::identity()).norm() < 1e-9, "{}", knot.name);
                let det = Matrix4::from_columns(&[f.k, f.tau, f.p1, f.p2]).determinant();
                assert_abs_diff_eq!(det, 1.0, epsilon = 1e-9);
                let jump = (f.p1 - prev.p1).norm() + (f.p2 - prev.p2).norm();
                assert!(jump < 10.0 * spacing * knot.jet(0.0).dk.norm().max(1.0), "{} jump {jump}", knot.name);
                prev = f;
            }
        }
    }

    #[test]
    fn frame_derivatives_match_differences() {
        for knot in knots() {
            let fk = FramedKnot::new(&knot).unwrap();
            for i in 0..50 {
                let t = 0.123 * i as f64;
                let j = fk.frame_jet(t).unwrap();
                let h = 1e-6;
                let (a, b) = (fk.frame_at(t + h).unwrap(), fk.frame_at(t - h).unwrap());
                assert!(((a.p1 - b.p1) / (2.0 * h) - j.dp1).norm() < 1e-6);
                assert!(((a.p2 - b.p2) / (2.0 * h) - j.dp2).norm() < 1e-6);
                assert!(((a.tau - b.tau) / (2.0 * h) - j.dtau).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn conormal_examples() {
        let fk = FramedKnot::new(&KnotCurve::unknot()).unwrap();
        let q = fk.conormal_point(&ConormalCoords::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(q.x, Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(q.p.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.p[0].abs() + q.p[1].abs(), 0.0, epsilon = 1e-15);
        let z = fk.conormal_point(&ConormalCoords::new(1.3, 0.0, 0.0)).unwrap();
        assert_eq!(z.p, Vec4::zeros());
        let pe = fk.perturbed_conormal_point(0.1, &ConormalCoords::new(0.0, 1.0, 0.0)).unwrap();
        assert!((pe.p - Vec4::new(0.0, 0.1, 1.0, 0.0)).norm() < 1e-15);
        assert_abs_diff_eq!(pe.p.norm_squared(), 1.01, epsilon = 1e-12);
        let sep = fk.perturbed_conormal_point(0.5, &ConormalCoords::new(2.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(sep.p.norm(), 0.5, epsilon = 1e-15);
        let basis = fk.conormal_tangent_basis(0.0, &ConormalCoords::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(basis[1].dx(), Vec4::zeros());
    }

    #[test]
    fn conormal_is_exact_lagrangian() {
        for knot in knots() {
            let fk = FramedKnot::new(&knot).unwrap();
            for i in 0..100 {
                let c = ConormalCoords::new(0.37 * i as f64, (0.7 * i as f64).sin() * 2.0, (1.3 * i as f64).cos());
                let q = fk.conormal_point(&c).unwrap();
                let j = knot.jet(c.t);
                assert!(q.on_cotangent_sphere(1e-12));
                assert!(q.p.dot(&j.k).abs() < 1e-10 && q.p.dot(&j.dk).abs() < 1e-10);
                let b = fk.conormal_tangent_basis(0.0, &c).unwrap();
                for u in &b {
                    assert!(liouville_eval(u).abs() < 1e-10);
                    for v in &b {
                        assert!(omega_eval(u, v).unwrap().abs() < 1e-10);
                    }
                }
                let pe = fk.perturbed_conormal_point(0.3, &c).unwrap();
                assert!(pe.on_cotangent_sphere(1e-12));
                assert_abs_diff_eq!(pe.p.norm_squared(), c.r() * c.r() + 0.09, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn field_on_knot_is_unit_tangent() {
        for knot in knots() {
            let field = PerturbationField::new(&knot, 0.1).unwrap();
            for i in 0..64 {
                let t = 0.0981 * i as f64;
                let tau = knot.unit_tangent(t).unwrap();
                for s in [0.2, 1.0, 3.0] {
                    let v = field.value(&(knot.point(t) * s));
                    assert!((v - tau).norm() < 1e-12, "{} t={t} s={s}", knot.name);
                }
            }
        }
    }

    #[test]
    fn field_vanishes_off_tube() {
        let field = PerturbationField::new(&KnotCurve::unknot(), 0.1).unwrap();
        let (v, j) = field.eval(&Vec4::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(v, Vec4::zeros());
        assert_eq!(j, Matrix4::zeros());
        assert_eq!(field.value(&Vec4::new(0.01, 0.0, 0.0, 0.0)), Vec4::zeros());
        assert_eq!(field.value(&Vec4::new(100.0, 0.0, 0.0, 0.0)), Vec4::zeros());
        assert_abs_diff_eq!(field.tube_radius, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn measured_norm_scales_inversely_with_radius() {
        let knot = KnotCurve::unknot();
        let fk = FramedKnot::new(&knot).unwrap();
        let field = PerturbationField::new(&knot, 0.1).unwrap();
        let g = NormSampling { n_t: 16, n_d: 9, n_phi: 4, n_s: 1 };
        let s1 = field.measure_norm(&fk, (1.0, 1.0), g).unwrap();
        let s2 = field.measure_norm(&fk, (2.0, 2.0), g).unwrap();
        assert!(s1.is_finite() && s1 > 1.0);
        assert_abs_diff_eq!(s1 / s2, 2.0, epsilon = 1e-6);
    }
}
