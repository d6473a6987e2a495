//! Interior vs boundary integrals of discs with boundary on a Lagrangian.

use super::forms::FormHandle;
use crate::conormal::{ConormalCoords, FramedKnot, PerturbationField};
use crate::error::{GeomError, Result};
use crate::fd::jacobian;
use crate::geom::{liouville, PhasePoint, Vec4, Vec8};
use crate::tol::FdConfig;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

pub type DiscMap<'a> = Box<dyn Fn(f64, f64) -> Result<DVector<f64>> + Send + Sync + 'a>;
/// (point, direction) ↦ value.
pub type OneForm<'a> = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'a>;
/// Distance-like residual of a point from L.
pub type Membership<'a> = Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync + 'a>;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesReport {
    pub interior: f64,
    pub boundary: f64,
    /// Largest membership residual seen on the boundary nodes.
    pub boundary_residual: f64,
}

impl StokesReport {
    pub fn difference(&self) -> f64 {
        (self.interior - self.boundary).abs()
    }
}

/// ∫_{[0,1]²} f*ω against ∮ f*λ counterclockwise, with `nodes` Gauss points
/// per direction. Boundary points must lie on L within `tol`.
pub fn stokes_check(
    disc: &DiscMap,
    form: &FormHandle,
    primitive: &OneForm,
    membership: Option<&Membership>,
    nodes: usize,
    tol: f64,
) -> Result<StokesReport> {
    if nodes == 0 {
        return Err(GeomError::Parameter("need at least one quadrature node".into()));
    }
    let fd = FdConfig::default();
    let f = |u: &[f64]| disc(u[0], u[1]);
    let (x, w) = gauss_legendre(nodes);
    let mut interior = 0.0;
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in x.iter().enumerate() {
            let u = [a, b];
            let p = f(&u)?;
            let d = jacobian(&f, &u, &fd)?;
            let (da, db) = (d.column(0).into_owned(), d.column(1).into_owned());
            interior += w[i] * w[j] * form.eval(p.as_slice(), 0, da.as_slice(), db.as_slice())?;
        }
    }
    let mut boundary = 0.0;
    let mut residual: f64 = 0.0;
    // (start, direction) of each edge, counterclockwise
    let edges = [([0.0, 0.0], [1.0, 0.0]), ([1.0, 0.0], [0.0, 1.0]), ([1.0, 1.0], [-1.0, 0.0]), ([0.0, 1.0], [0.0, -1.0])];
    for (start, dir) in edges {
        for (k, &s) in x.iter().enumerate() {
            let u = [start[0] + s * dir[0], start[1] + s * dir[1]];
            let p = f(&u)?;
            if let Some(m) = membership {
                let r = m(p.as_slice())?;
                if !(r <= tol) {
                    return Err(GeomError::Domain(format!("boundary point {u:?} is {r:.3e} off the Lagrangian")));
                }
                residual = residual.max(r);
            }
            let v = crate::fd::directional(&f, &u, &dir, &fd)?;
            boundary += w[k] * primitive(p.as_slice(), v.as_slice());
        }
    }
    Ok(StokesReport { interior, boundary, boundary_residual: residual })
}

/// λ = −Σ p dx on ℝ⁴×ℝ⁴.
pub fn liouville_form<'a>() -> OneForm<'a> {
    Box::new(|y, v| {
        let pt = PhasePoint::from_vec8(&Vec8::from_column_slice(y));
        liouville(&pt, &Vec8::from_column_slice(v))
    })
}

/// Residual of (x, p) from the conormal bundle of the field's knot.
pub fn conormal_membership(field: &PerturbationField) -> Membership<'_> {
    Box::new(move |y| {
        let x = Vec4::new(y[0], y[1], y[2], y[3]);
        let p = Vec4::new(y[4], y[5], y[6], y[7]);
        let n = x.norm();
        if n == 0.0 {
            return Ok(f64::INFINITY);
        }
        let (t, _) = field.nearest(&(x / n));
        let jet = field.knot().jet(t);
        let tangent = jet.dk.normalize();
        Ok((x - jet.k).norm().max(p.dot(&tangent).abs()))
    })
}

/// |p|: residual from the zero section, with x on S³.
pub fn zero_section_membership<'a>() -> Membership<'a> {
    Box::new(|y| {
        let x = (y[..4].iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs();
        Ok(x.max(y[4..].iter().map(|v| v * v).sum::<f64>().sqrt()))
    })
}

/// [0,1]² → closed unit disc, smooth, sending the square's boundary onto the circle.
pub fn square_to_disc(s: f64, t: f64) -> (f64, f64) {
    let (a, b) = (2.0 * s - 1.0, 2.0 * t - 1.0);
    (a * (1.0 - 0.5 * b * b).sqrt(), b * (1.0 - 0.5 * a * a).sqrt())
}

/// A disc with boundary on N*_k: the unit disc mapped affinely into
/// conormal coordinates, pushed off L in the interior by (1−|d|²)·B(d).
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalDisc {
    pub center: [f64; 3],
    /// Images of the two disc axes in (t, α, β).
    pub axes: [[f64; 3]; 2],
    /// Constant and linear parts of the interior bump in ℝ⁸.
    pub bump: [[f64; 8]; 3],
}

impl ConormalDisc {
    /// Random disc from a seeded stream: centre anywhere, radii ≤ `size`.
    pub fn random<R: rand::Rng>(rng: &mut R, size: f64) -> Self {
        let mut u = || 2.0 * rng.random::<f64>() - 1.0;
        let center = [core::f64::consts::PI * (u() + 1.0), u(), u()];
        let axes = [[size * u(), size * u(), size * u()], [size * u(), size * u(), size * u()]];
        let mut bump = [[0.0; 8]; 3];
        for row in bump.iter_mut() {
            for v in row.iter_mut() {
                *v = 0.3 * u();
            }
        }
        Self { center, axes, bump }
    }

    pub fn eval(&self, framed: &FramedKnot, s: f64, t: f64) -> Result<DVector<f64>> {
        let (a, b) = square_to_disc(s, t);
        let c: Vec<f64> = (0..3).map(|k| self.center[k] + a * self.axes[0][k] + b * self.axes[1][k]).collect();
        let pt = framed.conormal_point(&ConormalCoords::new(c[0], c[1], c[2]))?;
        let mut v = DVector::from_column_slice(pt.to_vec8().as_slice());
        let h = (1.0 - a * a - b * b).max(0.0);
        for k in 0..8 {
            v[k] += h * (self.bump[0][k] + a * self.bump[1][k] + b * self.bump[2][k]);
        }
        Ok(v)
    }

    pub fn map<'a>(&'a self, framed: &'a FramedKnot) -> DiscMap<'a> {
        Box::new(move |s, t| self.eval(framed, s, t))
    }
}
