//! Second fundamental forms, covariant Hessians and sectional curvature.

use super::ambient::Ambient;
use super::engines::orthonormalize;
use super::patch::Patch;
use crate::error::{GeomError, Result};
use crate::fd::{directional, second_directional};
use crate::tol::FdConfig;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

/// G-orthogonal projector onto span(V).
pub fn projector(v: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = v.transpose() * g * v;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| GeomError::Degenerate("rank-deficient tangent space".into()))?;
    Ok(v * inv * v.transpose() * g)
}

/// Local data of a patch point: position, tangent basis, metric and the
/// projector onto TM ∩ TL⊥.
pub struct PatchFrame {
    pub y: DVector<f64>,
    pub tangent: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub normal_projector: DMatrix<f64>,
}

pub fn patch_frame(ambient: &dyn Ambient, patch: &Patch, u: &[f64], chart: usize, fd: &FdConfig) -> Result<PatchFrame> {
    let y = patch.eval(u, chart)?;
    let tangent = patch.tangent(u, chart, fd)?;
    let metric = ambient.metric(y.as_slice(), chart);
    orthonormalize(&tangent, &metric)?;
    let pr_m = projector(&ambient.tangent_basis(y.as_slice(), chart)?, &metric)?;
    let pr_l = projector(&tangent, &metric)?;
    Ok(PatchFrame { y, tangent, metric, normal_projector: pr_m - pr_l })
}

fn second_fundamental_form_in(
    frame: &PatchFrame,
    ambient: &dyn Ambient,
    patch: &Patch,
    u: &[f64],
    chart: usize,
    x: &[f64],
    y: &[f64],
    fd: &FdConfig,
) -> Result<DVector<f64>> {
    let d2 = second_directional(&|v: &[f64]| patch.eval(v, chart), u, x, y, fd)?;
    let tx = &frame.tangent * DVector::from_column_slice(x);
    let ty = &frame.tangent * DVector::from_column_slice(y);
    let v = d2 + ambient.christoffel(frame.y.as_slice(), chart, &tx, &ty);
    Ok(&frame.normal_projector * v)
}

/// II(X, Y) = pr_{TM∩TL⊥}(∂²P(X, Y) + Γ(∂P X, ∂P Y)) with X, Y given as
/// parameter-space directions.
pub fn second_fundamental_form(
    ambient: &dyn Ambient,
    patch: &Patch,
    u: &[f64],
    chart: usize,
    x: &[f64],
    y: &[f64],
    fd: &FdConfig,
) -> Result<DVector<f64>> {
    let frame = patch_frame(ambient, patch, u, chart, fd)?;
    second_fundamental_form_in(&frame, ambient, patch, u, chart, x, y, fd)
}

/// (Σ_ij |II(e_i, e_j)|²)^½ over an orthonormal tangent basis.
pub fn second_fundamental_norm(ambient: &dyn Ambient, patch: &Patch, u: &[f64], chart: usize, fd: &FdConfig) -> Result<f64> {
    let frame = patch_frame(ambient, patch, u, chart, fd)?;
    let gram = frame.tangent.transpose() * &frame.metric * &frame.tangent;
    let chol = gram.cholesky().ok_or_else(|| GeomError::Degenerate("tangent Gram matrix".into()))?;
    let c = chol.l().transpose().try_inverse().ok_or_else(|| GeomError::Degenerate("tangent Gram matrix".into()))?;
    let k = c.ncols();
    let mut total = 0.0;
    for i in 0..k {
        for j in i..k {
            let (ci, cj) = (c.column(i).into_owned(), c.column(j).into_owned());
            let ii = second_fundamental_form_in(&frame, ambient, patch, u, chart, ci.as_slice(), cj.as_slice(), fd)?;
            let n2 = (ii.transpose() * &frame.metric * &ii)[(0, 0)];
            total += if i == j { n2 } else { 2.0 * n2 };
        }
    }
    Ok(total.sqrt())
}

/// ∇²Φ(X, Y) = ∂²Φ(X, Y) + Γ̃(∂Φ X, ∂Φ Y) − ∂Φ(Γ(X, Y)) in chart 0 of both sides.
pub fn covariant_hessian(
    map: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    source: &dyn Ambient,
    target: &dyn Ambient,
    p: &[f64],
    x: &[f64],
    y: &[f64],
    fd: &FdConfig,
) -> Result<DVector<f64>> {
    let image = map(p)?;
    let d2 = second_directional(&map, p, x, y, fd)?;
    let dx = directional(&map, p, x, fd)?;
    let dy = directional(&map, p, y, fd)?;
    let gamma = source.christoffel(p, 0, &DVector::from_column_slice(x), &DVector::from_column_slice(y));
    let dgamma = directional(&map, p, gamma.as_slice(), fd)?;
    Ok(d2 + target.christoffel(image.as_slice(), 0, &dx, &dy) - dgamma)
}

/// Sectional curvature of the plane spanned by the parameter directions X, Y
/// from the Gauss equation.
pub fn gauss_sectional(
    ambient: &dyn Ambient,
    patch: &Patch,
    u: &[f64],
    chart: usize,
    x: &[f64],
    y: &[f64],
    fd: &FdConfig,
) -> Result<f64> {
    let frame = patch_frame(ambient, patch, u, chart, fd)?;
    let tx = &frame.tangent * DVector::from_column_slice(x);
    let ty = &frame.tangent * DVector::from_column_slice(y);
    let g = &frame.metric;
    let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * g * b)[(0, 0)];
    let (xx, yy, xy) = (ip(&tx, &tx), ip(&ty, &ty), ip(&tx, &ty));
    let det = xx * yy - xy * xy;
    if !(det > 1e-6 * xx * yy) {
        return Err(GeomError::Degenerate(format!("plane Gram determinant {det:.3e}")));
    }
    let sec_m = ambient.sectional(frame.y.as_slice(), chart, &tx, &ty)?;
    let iixx = second_fundamental_form_in(&frame, ambient, patch, u, chart, x, x, fd)?;
    let iiyy = second_fundamental_form_in(&frame, ambient, patch, u, chart, y, y, fd)?;
    let iixy = second_fundamental_form_in(&frame, ambient, patch, u, chart, x, y, fd)?;
    Ok(sec_m + (ip(&iixx, &iiyy) - ip(&iixy, &iixy)) / det)
}

/// Sectional curvature of the coordinate plane (a, b) of a metric given in
/// coordinates, from finite differences of the metric with step `h`.
pub fn intrinsic_sectional(
    metric: &dyn Fn(&[f64]) -> Result<DMatrix<f64>>,
    u: &[f64],
    a: usize,
    b: usize,
    h: f64,
) -> Result<f64> {
    let n = u.len();
    let at = |moves: &[(usize, f64)]| -> Result<DMatrix<f64>> {
        let mut v = u.to_vec();
        for &(i, d) in moves {
            v[i] += d;
        }
        metric(&v)
    };
    let g = at(&[])?;
    let mut d1 = Vec::with_capacity(n);
    for c in 0..n {
        d1.push((at(&[(c, h)])? - at(&[(c, -h)])?) / (2.0 * h));
    }
    let d2 = |c: usize, d: usize| -> Result<DMatrix<f64>> {
        if c == d {
            Ok((at(&[(c, h)])? - &g * 2.0 + at(&[(c, -h)])?) / (h * h))
        } else {
            Ok((at(&[(c, h), (d, h)])? - at(&[(c, h), (d, -h)])? - at(&[(c, -h), (d, h)])? + at(&[(c, -h), (d, -h)])?)
                / (4.0 * h * h))
        }
    };
    let ginv = g.clone().try_inverse().ok_or_else(|| GeomError::Degenerate("singular metric".into()))?;
    // Γ_{f,bc} = ½(∂_b g_fc + ∂_c g_fb − ∂_f g_bc)
    let low = |f: usize, p: usize, q: usize| 0.5 * (d1[p][(f, q)] + d1[q][(f, p)] - d1[f][(p, q)]);
    let quad = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        let mut acc = 0.0;
        for e in 0..n {
            for f in 0..n {
                acc += low(e, p, q) * ginv[(e, f)] * low(f, r, s);
            }
        }
        acc
    };
    // R_abab = ½(2∂a∂b g_ab − ∂a∂a g_bb − ∂b∂b g_aa) + Γ_ab·Γ_ab − Γ_aa·Γ_bb
    let r = 0.5 * (2.0 * d2(a, b)?[(a, b)] - d2(a, a)?[(b, b)] - d2(b, b)?[(a, a)]) + quad(a, b, a, b) - quad(b, b, a, a);
    let det = g[(a, a)] * g[(b, b)] - g[(a, b)] * g[(a, b)];
    if !(det > 0.0) {
        return Err(GeomError::Degenerate("degenerate coordinate plane".into()));
    }
    Ok(r / det)
}

/// Induced metric TᵀGT of a patch as a function of the parameters.
pub fn induced_metric<'a>(
    ambient: &'a dyn Ambient,
    patch: &'a Patch<'a>,
    chart: usize,
    fd: FdConfig,
) -> impl Fn(&[f64]) -> Result<DMatrix<f64>> + 'a {
    move |u: &[f64]| {
        let t = patch.tangent(u, chart, &fd)?;
        let y = patch.eval(u, chart)?;
        Ok(t.transpose() * ambient.metric(y.as_slice(), chart) * t)
    }
}

/// |II^{Φ∘P}(X, Y) − pr⊥(DΦ·II^P(X, Y) + ∇²Φ(DP X, DP Y))| for an immersion
/// Φ between flat coordinate spaces and a surface P in the source.
pub fn composition_residual(
    map: &(dyn Fn(&[f64]) -> Result<DVector<f64>> + Sync),
    source: &dyn Ambient,
    target: &dyn Ambient,
    surface: &Patch,
    u: &[f64],
    x: &[f64],
    y: &[f64],
    fd: &FdConfig,
) -> Result<f64> {
    let composed = Patch::new(
        surface.param_dim,
        target.dim(),
        alloc::boxed::Box::new(move |v: &[f64], c| map(surface.eval(v, c)?.as_slice())),
    );
    let frame = patch_frame(target, &composed, u, 0, fd)?;
    let direct = second_fundamental_form_in(&frame, target, &composed, u, 0, x, y, fd)?;
    let p = surface.eval(u, 0)?;
    let ii_src = second_fundamental_form(source, surface, u, 0, x, y, fd)?;
    let push = directional(&map, p.as_slice(), ii_src.as_slice(), fd)?;
    let t = surface.tangent(u, 0, fd)?;
    let (px, py) = (&t * DVector::from_column_slice(x), &t * DVector::from_column_slice(y));
    let hess = covariant_hessian(map, source, target, p.as_slice(), px.as_slice(), py.as_slice(), fd)?;
    let diff = direct - &frame.normal_projector * (push + hess);
    Ok((diff.transpose() * &frame.metric * &diff)[(0, 0)].sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::ambient::{Euclidean, ProductCp1C4, RoundSphere};
    use crate::verify::forms::fubini_study_matrix;
    use crate::verify::patch::{clifford_patch, cone_chart_map, cone_patch, sphere3_patch};
    use alloc::boxed::Box;
    use num_complex::Complex64;

    fn fd() -> FdConfig {
        FdConfig::default()
    }

    #[test]
    fn sphere_second_fundamental_form() {
        let s = sphere3_patch(1.0);
        let e4 = Euclidean::new(4);
        for i in 0..10 {
            let u = [0.1 + 0.13 * i as f64, 0.4 * i as f64, -0.7 * i as f64];
            let t = s.tangent(&u, 0, &fd()).unwrap();
            let x = s.eval(&u, 0).unwrap();
            // unit tangent direction in parameter space
            let dir = [1.0, 0.0, 0.0];
            let len = (t.column(0).norm()).max(1e-300);
            let dir: Vec<f64> = dir.iter().map(|v| v / len).collect();
            let ii = second_fundamental_form(&e4, &s, &u, 0, &dir, &dir, &fd()).unwrap();
            assert!((ii + &x).norm() < 1e-6, "sample {i}");
            let other = [0.0, 0.3, 0.5];
            let a = second_fundamental_form(&e4, &s, &u, 0, &dir, &other, &fd()).unwrap();
            let b = second_fundamental_form(&e4, &s, &u, 0, &other, &dir, &fd()).unwrap();
            assert!((a.clone() - b).norm() < 1e-7);
            for k in 0..3 {
                assert!(a.dot(&t.column(k)).abs() < 1e-7);
            }
        }
        // affine subspace
        let plane = Patch::new(2, 4, Box::new(|u, _| Ok(DVector::from_vec(alloc::vec![u[0], 2.0 * u[1], u[0] - u[1], 1.0]))));
        let ii = second_fundamental_form(&e4, &plane, &[0.3, 0.1], 0, &[1.0, 0.0], &[0.5, 1.0], &fd()).unwrap();
        assert!(ii.norm() < 1e-8);
        // rank-deficient
        let line = Patch::new(2, 4, Box::new(|u, _| Ok(DVector::from_vec(alloc::vec![u[0] + u[1], 0.0, 0.0, 0.0]))));
        assert!(second_fundamental_form(&e4, &line, &[0.0, 0.0], 0, &[1.0, 0.0], &[1.0, 0.0], &fd()).is_err());
    }

    #[test]
    fn gauss_examples() {
        let e4 = Euclidean::new(4);
        for (r, want) in [(1.0, 1.0), (2.0, 0.25)] {
            let s = sphere3_patch(r);
            for i in 0..8 {
                let u = [0.2 + 0.15 * i as f64, 0.5 * i as f64, 1.1 * i as f64];
                for (x, y) in [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), ([0.0, 1.0, 0.0], [0.0, 0.3, 1.0])] {
                    let k = gauss_sectional(&e4, &s, &u, 0, &x, &y, &fd()).unwrap();
                    assert!((k - want).abs() < 1e-4, "r={r}: {k}");
                }
            }
        }
        let c = clifford_patch();
        for i in 0..8 {
            let k = gauss_sectional(&e4, &c, &[0.3 * i as f64, 0.7 * i as f64], 0, &[1.0, 0.0], &[0.0, 1.0], &fd()).unwrap();
            assert!(k.abs() < 1e-4);
        }
        let s = sphere3_patch(1.0);
        assert!(gauss_sectional(&e4, &s, &[0.5, 0.0, 0.0], 0, &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &fd()).is_err());
    }

    #[test]
    fn gauss_matches_intrinsic_on_s3() {
        let e4 = Euclidean::new(4);
        let s = sphere3_patch(1.0);
        let h = induced_metric(&e4, &s, 0, fd());
        for i in 0..10 {
            let u = [0.2 + 0.11 * i as f64, 0.3 * i as f64, 0.9 * i as f64];
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let mut x = [0.0; 3];
                let mut y = [0.0; 3];
                x[a] = 1.0;
                y[b] = 1.0;
                let gauss = gauss_sectional(&e4, &s, &u, 0, &x, &y, &fd()).unwrap();
                let intr = intrinsic_sectional(&h, &u, a, b, 1e-3).unwrap();
                assert!((gauss - intr).abs() < 1e-3, "{gauss} vs {intr}");
            }
        }
    }

    #[test]
    fn fubini_study_curvature_from_metric() {
        let g = |u: &[f64]| Ok(fubini_study_matrix(Complex64::new(u[0], u[1])));
        for z in [[0.0, 0.0], [0.5, -0.3], [1.5, 2.0]] {
            let k = intrinsic_sectional(&g, &z, 0, 1, 1e-3).unwrap();
            assert!((k - crate::geom::FUBINI_STUDY_CURVATURE).abs() < 1e-4, "{k}");
        }
    }

    #[test]
    fn fs_christoffel_matches_metric_derivatives() {
        // Γ^e_bc from g_FS by FD vs the closed form used by the ambient
        let z = [0.4, -0.25];
        let h = 1e-5;
        let g = |u: &[f64]| fubini_study_matrix(Complex64::new(u[0], u[1]));
        let d: Vec<DMatrix<f64>> = (0..2)
            .map(|c| {
                let (mut p, mut m) = (z, z);
                p[c] += h;
                m[c] -= h;
                (g(&p) - g(&m)) / (2.0 * h)
            })
            .collect();
        let ginv = g(&z).try_inverse().unwrap();
        let mut y = [0.0; 10];
        y[0] = z[0];
        y[1] = z[1];
        for (b, c) in [(0, 0), (0, 1), (1, 1)] {
            let mut gamma = [0.0; 2];
            for e in 0..2 {
                for f in 0..2 {
                    gamma[e] += ginv[(e, f)] * 0.5 * (d[b][(f, c)] + d[c][(f, b)] - d[f][(b, c)]);
                }
            }
            let mut a = DVector::zeros(10);
            let mut bb = DVector::zeros(10);
            a[b] = 1.0;
            bb[c] = 1.0;
            let closed = ProductCp1C4.christoffel(&y, 0, &a, &bb);
            assert!((closed[0] - gamma[0]).abs() < 1e-8 && (closed[1] - gamma[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn covariant_hessian_examples() {
        let e = Euclidean::new(3);
        let lin = |v: &[f64]| -> Result<DVector<f64>> { Ok(DVector::from_vec(alloc::vec![v[0] + 2.0 * v[1], v[2] - v[0], 3.0 * v[1]])) };
        let h = covariant_hessian(&lin, &e, &e, &[0.3, -1.0, 2.0], &[1.0, 0.5, 0.0], &[0.0, 1.0, 1.0], &fd()).unwrap();
        assert!(h.norm() < 1e-8);
        // cone chart second derivatives do not depend on the point
        let (src, tgt) = (Euclidean::new(6), Euclidean::w_space());
        let x = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let y = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let at = |p: [f64; 6]| covariant_hessian(&cone_chart_map, &src, &tgt, &p, &x, &y, &fd()).unwrap();
        let h0 = at([0.1, 0.2, 1.0, 0.0, 0.5, -0.5]);
        for p in [[-1.0, 0.5, 0.3, 2.0, -1.0, 0.0], [0.9, -0.9, 4.0, 1.0, 0.0, 3.0]] {
            assert!((at(p) - &h0).norm() < 1e-6);
        }
        // Φ₁(w) = w₁/w₂ at w₁ = 0, w₂ = 1: ∂²Φ₁ = [[0, −1], [−1, 0]]
        let phi1 = |v: &[f64]| -> Result<DVector<f64>> {
            let q = Complex64::new(v[0], v[1]) / Complex64::new(v[2], v[3]);
            Ok(DVector::from_vec(alloc::vec![q.re, q.im]))
        };
        let (e4, e2) = (Euclidean::new(4), Euclidean::new(2));
        let base = [0.0, 0.0, 1.0, 0.0];
        let dirs = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        let want = [[0.0, -1.0], [-1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                let v = covariant_hessian(&phi1, &e4, &e2, &base, &dirs[i], &dirs[j], &fd()).unwrap();
                assert!((v[0] - want[i][j]).abs() < 1e-6 && v[1].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn composition_identity_cone_chart() {
        let surface = Patch::new(
            2,
            6,
            Box::new(|u, _| {
                Ok(DVector::from_vec(alloc::vec![
                    0.3 + 0.2 * u[0],
                    0.1 * u[1] * u[1],
                    1.0 + 0.5 * u[1],
                    0.2 * u[0] * u[0],
                    -0.4 + 0.3 * (u[0] * u[1]).sin(),
                    0.7 * u[0] - 0.2 * u[1],
                ]))
            }),
        );
        let (src, tgt) = (Euclidean::new(6), Euclidean::w_space());
        for i in 0..6 {
            let u = [-0.5 + 0.2 * i as f64, 0.3 - 0.1 * i as f64];
            let r = composition_residual(&cone_chart_map, &src, &tgt, &surface, &u, &[1.0, 0.0], &[0.3, 1.0], &fd()).unwrap();
            assert!(r < 1e-5, "{r}");
        }
    }

    #[test]
    fn curve_in_sphere_bends_less_than_in_space() {
        let curve = Patch::new(
            1,
            4,
            Box::new(|u, _| {
                let t = u[0];
                let v = DVector::from_vec(alloc::vec![t.cos(), (2.0 * t).sin(), 0.5 * (3.0 * t).cos(), 0.3]);
                Ok(&v / v.norm())
            }),
        );
        let (s3, r4) = (RoundSphere { n: 4 }, Euclidean::new(4));
        for i in 0..40 {
            let u = [0.157 * i as f64];
            let a = second_fundamental_norm(&s3, &curve, &u, 0, &fd()).unwrap();
            let b = second_fundamental_norm(&r4, &curve, &u, 0, &fd()).unwrap();
            assert!(a <= b + 1e-6);
            // with the sphere's normal removed the difference is exactly 1 in square
            assert!((b * b - a * a - 1.0).abs() < 1e-5 * (1.0 + b * b), "{a} {b}");
        }
    }

    #[test]
    fn cone_curvature_decays() {
        let w = Euclidean::w_space();
        let p = cone_patch();
        let at = |delta: f64| {
            let (z, xi, eta) = ([0.3, 0.4], [0.6, 0.0], [0.0, 0.8]);
            let s = delta / ((1.0 + 0.25f64) * 1.0f64).sqrt();
            let u = [z[0], z[1], xi[0] * s, xi[1] * s, eta[0] * s, eta[1] * s];
            second_fundamental_norm(&w, &p, &u, 0, &fd()).unwrap()
        };
        let (a, b) = (at(1.0), at(2.0));
        assert!(b < a);
        assert!((a / b - 2.0).abs() < 1e-3);
    }
}
