//! Closed curves on S³ ⊂ ℝ⁴ with first and second derivatives.

use crate::error::{GeomError, Result};
use crate::geom::Vec4;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speed {
    Unit,
    Constant,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub axis: usize,
    pub harmonic: u32,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Unknot,
    Torus { m: i64, n: i64 },
    Fourier(Vec<FourierTerm>),
}

/// k(t), k̇(t), k̈(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotJet {
    pub k: Vec4,
    pub dk: Vec4,
    pub ddk: Vec4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotCurve {
    kind: Kind,
    pub speed: Speed,
    pub name: String,
}

const FOURIER_MIN_RADIUS: f64 = 0.1;
const FOURIER_MIN_SPEED: f64 = 1e-8;
const FOURIER_SCAN: usize = 4096;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl KnotCurve {
    pub fn unknot() -> Self {
        Self { kind: Kind::Unknot, speed: Speed::Unit, name: "unknot".into() }
    }

    /// k(t) = (e^{imt}, e^{int})/√2.
    pub fn torus_knot(m: i64, n: i64) -> Result<Self> {
        if m == n || gcd(m, n) != 1 {
            return Err(GeomError::Parameter(format!("torus knot ({m},{n}) needs gcd 1 and m != n")));
        }
        Ok(Self { kind: Kind::Torus { m, n }, speed: Speed::Constant, name: format!("torus:{m},{n}") })
    }

    /// Radial projection of a truncated Fourier series onto S³.
    pub fn fourier_knot(terms: Vec<FourierTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.axis > 3) {
            return Err(GeomError::Parameter(format!("axis {} out of range 0..3", t.axis)));
        }
        let curve = Self { kind: Kind::Fourier(terms), speed: Speed::General, name: "fourier".into() };
        for i in 0..FOURIER_SCAN {
            let t = 2.0 * PI * i as f64 / FOURIER_SCAN as f64;
            let (x, _, _) = curve.raw(t);
            let r = x.norm();
            if !(r >= FOURIER_MIN_RADIUS) {
                return Err(GeomError::Rejected(format!("series passes within {r:.3e} of the origin at t={t:.4}")));
            }
            let speed = curve.jet(t).dk.norm();
            if !(speed >= FOURIER_MIN_SPEED) {
                return Err(GeomError::Rejected(format!("projected curve is not immersed at t={t:.4}")));
            }
        }
        Ok(curve)
    }

    pub fn torus_params(&self) -> Option<(i64, i64)> {
        match self.kind {
            Kind::Torus { m, n } => Some((m, n)),
            _ => None,
        }
    }

    fn raw(&self, t: f64) -> (Vec4, Vec4, Vec4) {
        let Kind::Fourier(terms) = &self.kind else { unreachable!() };
        let (mut x, mut dx, mut ddx) = (Vec4::zeros(), Vec4::zeros(), Vec4::zeros());
        for term in terms {
            let h = term.harmonic as f64;
            let (s, c) = (h * t).sin_cos();
            x[term.axis] += term.cos * c + term.sin * s;
            dx[term.axis] += h * (-term.cos * s + term.sin * c);
            ddx[term.axis] += -h * h * (term.cos * c + term.sin * s);
        }
        (x, dx, ddx)
    }

    pub fn jet(&self, t: f64) -> KnotJet {
        match &self.kind {
            Kind::Unknot => {
                let (s, c) = t.sin_cos();
                KnotJet {
                    k: Vec4::new(c, s, 0.0, 0.0),
                    dk: Vec4::new(-s, c, 0.0, 0.0),
                    ddk: Vec4::new(-c, -s, 0.0, 0.0),
                }
            }
            Kind::Torus { m, n } => {
                let (m, n) = (*m as f64, *n as f64);
                let r = core::f64::consts::FRAC_1_SQRT_2;
                let (sm, cm) = (m * t).sin_cos();
                let (sn, cn) = (n * t).sin_cos();
                KnotJet {
                    k: Vec4::new(cm, sm, cn, sn) * r,
                    dk: Vec4::new(-m * sm, m * cm, -n * sn, n * cn) * r,
                    ddk: Vec4::new(-m * m * cm, -m * m * sm, -n * n * cn, -n * n * sn) * r,
                }
            }
            Kind::Fourier(_) => {
                // k = x/|x|, k̇ = (x' − ṅk)/n, k̈ = (x'' − n̈k − 2ṅk̇)/n
                let (x, dx, ddx) = self.raw(t);
                let n = x.norm();
                let k = x / n;
                let nd = k.dot(&dx);
                let dk = (dx - k * nd) / n;
                let ndd = (dx.norm_squared() + x.dot(&ddx) - nd * nd) / n;
                let ddk = (ddx - k * ndd - dk * (2.0 * nd)) / n;
                KnotJet { k, dk, ddk }
            }
        }
    }

    pub fn point(&self, t: f64) -> Vec4 {
        self.jet(t).k
    }

    /// Unit tangent τ = k̇/|k̇|.
    pub fn unit_tangent(&self, t: f64) -> Result<Vec4> {
        let dk = self.jet(t).dk;
        let s = dk.norm();
        if s < 1e-12 {
            return Err(GeomError::Degenerate(format!("|k'(t)| = {s:.3e} at t={t:.6}")));
        }
        Ok(dk / s)
    }

    /// Minimum chordal distance over parameter pairs whose arclength
    /// separation (both ways round) is at least `min_arc`.
    pub fn self_distance(&self, samples: usize, min_arc: f64) -> f64 {
        let pts: Vec<Vec4> = (0..samples).map(|i| self.point(2.0 * PI * i as f64 / samples as f64)).collect();
        let mut arc = Vec::with_capacity(samples + 1);
        arc.push(0.0);
        for i in 0..samples {
            let d = (pts[(i + 1) % samples] - pts[i]).norm();
            arc.push(arc[i] + d);
        }
        let total = arc[samples];
        let mut best = f64::INFINITY;
        for i in 0..samples {
            for j in (i + 1)..samples {
                let a = arc[j] - arc[i];
                if a.min(total - a) >= min_arc {
                    best = best.min((pts[i] - pts[j]).norm());
                }
            }
        }
        best
    }

    /// Maximum geodesic curvature of the curve inside S³.
    pub fn max_geodesic_curvature(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let j = self.jet(2.0 * PI * i as f64 / samples as f64);
                let s2 = j.dk.norm_squared();
                // acceleration minus its components along k and k̇
                let a = j.ddk - j.k * j.k.dot(&j.ddk) - j.dk * (j.dk.dot(&j.ddk) / s2);
                a.norm() / s2
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn trefoil_like() -> KnotCurve {
        let t = |axis, harmonic, cos, sin| FourierTerm { axis, harmonic, cos, sin };
        KnotCurve::fourier_knot(alloc::vec![
            t(0, 1, 1.0, 0.0),
            t(0, 2, 2.0, 0.0),
            t(1, 1, 0.0, 1.0),
            t(1, 2, 0.0, -2.0),
            t(2, 3, 0.0, 1.0),
            t(3, 0, 0.5, 0.0),
        ])
        .unwrap()
    }

    fn all_knots() -> Vec<KnotCurve> {
        alloc::vec![KnotCurve::unknot(), KnotCurve::torus_knot(2, 3).unwrap(), KnotCurve::torus_knot(3, -5).unwrap(), trefoil_like()]
    }

    #[test]
    fn unknot_examples() {
        let k = KnotCurve::unknot();
        let j = k.jet(0.0);
        assert_eq!(j.k, Vec4::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(j.dk, Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert_abs_diff_eq!((k.point(PI / 2.0) - Vec4::new(0.0, 1.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        for i in 0..64 {
            assert_abs_diff_eq!(k.jet(i as f64 * 0.1).dk.norm(), 1.0, epsilon = 1e-15);
        }
        assert_eq!(k.speed, Speed::Unit);
    }

    #[test]
    fn torus_examples() {
        let k = KnotCurve::torus_knot(2, 3).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!((k.point(0.0) - Vec4::new(h, 0.0, h, 0.0)).norm(), 0.0, epsilon = 1e-15);
        for i in 0..256 {
            assert_abs_diff_eq!(k.jet(i as f64 * 0.0245).dk.norm_squared(), 6.5, epsilon = 1e-12);
        }
        assert!(matches!(KnotCurve::torus_knot(2, 2), Err(GeomError::Parameter(_))));
        assert!(matches!(KnotCurve::torus_knot(2, 4), Err(GeomError::Parameter(_))));
    }

    #[test]
    fn fourier_examples() {
        let circle = KnotCurve::fourier_knot(alloc::vec![
            FourierTerm { axis: 0, harmonic: 1, cos: 1.0, sin: 0.0 },
            FourierTerm { axis: 1, harmonic: 1, cos: 0.0, sin: 1.0 },
        ])
        .unwrap();
        let u = KnotCurve::unknot();
        for i in 0..100 {
            let t = i as f64 * 0.0628;
            let (a, b) = (circle.jet(t), u.jet(t));
            assert!((a.k - b.k).norm() < 1e-12);
            assert!((a.dk - b.dk).norm() < 1e-12);
            assert!((a.ddk - b.ddk).norm() < 1e-12);
        }
        let tr = trefoil_like();
        for i in 0..256 {
            assert_abs_diff_eq!(tr.point(i as f64 * 0.0245).norm(), 1.0, epsilon = 1e-12);
        }
        let constant = KnotCurve::fourier_knot(alloc::vec![FourierTerm { axis: 0, harmonic: 0, cos: 1.0, sin: 0.0 }]);
        assert!(matches!(constant, Err(GeomError::Rejected(_))));
        let through_zero = KnotCurve::fourier_knot(alloc::vec![FourierTerm { axis: 0, harmonic: 1, cos: 1.0, sin: 0.0 }]);
        assert!(matches!(through_zero, Err(GeomError::Rejected(_))));
    }

    #[test]
    fn curve_invariants() {
        for knot in all_knots() {
            let closure = (knot.point(0.0) - knot.point(2.0 * PI)).norm();
            assert!(closure < 1e-10, "{}", knot.name);
            for i in 0..256 {
                let t = 2.0 * PI * i as f64 / 256.0;
                let j = knot.jet(t);
                assert!((j.k.norm() - 1.0).abs() < 1e-10);
                assert!(j.k.dot(&j.dk).abs() < 1e-9);
                let h = 1e-5;
                let fd = (knot.point(t + h) - knot.point(t - h)) / (2.0 * h);
                assert!((fd - j.dk).norm() < 1e-6 * j.dk.norm().max(1.0), "{} dk at {t}", knot.name);
                let fdd = (knot.jet(t + h).dk - knot.jet(t - h).dk) / (2.0 * h);
                assert!((fdd - j.ddk).norm() < 1e-6 * j.ddk.norm().max(1.0), "{} ddk at {t}", knot.name);
            }
        }
    }

    #[test]
    fn self_distance_of_unknot() {
        // separation ≥ π/2 along a great circle gives chord ≥ √2
        let d = KnotCurve::unknot().self_distance(512, PI / 2.0);
        assert!((d - 2.0f64.sqrt()).abs() < 1e-2);
        assert_abs_diff_eq!(KnotCurve::unknot().max_geodesic_curvature(64), 0.0, epsilon = 1e-12);
    }
}
