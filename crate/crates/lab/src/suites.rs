//! Verification suites. Each suite turns a [`RunConfig`] into check records.

use crate::config::RunConfig;
use crate::error::LabError;
use crate::report::{Comparison, Record};
use conifold_core::conifold::{cone_radius, contract_feps_differential};
use conifold_core::conormal::{spectral_norm, ConormalCoords, FramedKnot, NormSampling, PerturbationField};
use conifold_core::distance::{
    build_mesh, ct_mesh, dilate, intrinsic_distance, path_length, shortest_path, sine_exp_fixture, slice_mesh, two_point_from,
    SampleMesh, TwoPoint,
};
use conifold_core::geom::{liouville_eval, omega, Vec4};
use conifold_core::knots::KnotCurve;
use conifold_core::sample::{cell_rng, gaussian, Extremum, GridSpec, EXCLUSION_LIMIT};
use conifold_core::tol::FdConfig;
use conifold_core::verify::ambient::{phase_j, Euclidean, ProductCp1C4, ResolvedConifold};
use conifold_core::verify::curvature::{composition_residual, gauss_sectional, second_fundamental_norm};
use conifold_core::verify::engines::{
    bilipschitz_at, form_restriction_at, taming_constant, tameness_at, totally_real_angle, PlainMap, ResolveMap,
};
use conifold_core::verify::forms::{FormHandle, MetricHandle, MetricTag};
use conifold_core::verify::patch::{
    clifford_patch, cone_chart_map, cone_patch, cone_tangent_basis, ct_patch, sphere3_patch, Patch, SubmanifoldSampler,
};
use conifold_core::verify::stokes::{conormal_membership, liouville_form, stokes_check, ConormalDisc};
use conifold_core::GeomError;
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lagrangian,
    Tame,
    Bilipschitz,
    Curvature,
    TotallyReal,
    Stokes,
    TwoPoint,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Lagrangian, Suite::Tame, Suite::Bilipschitz, Suite::Curvature, Suite::TotallyReal, Suite::Stokes, Suite::TwoPoint];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lagrangian => "lagrangian",
            Suite::Tame => "tame",
            Suite::Bilipschitz => "bilipschitz",
            Suite::Curvature => "curvature",
            Suite::TotallyReal => "totally-real",
            Suite::Stokes => "stokes",
            Suite::TwoPoint => "two-point",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>, String> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        s.parse().map(|x| vec![x])
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Unit S³ ⊂ ℝ⁴.
    S3,
    /// S³ of radius 2.
    Sphere2,
    Clifford,
    /// II of a composed immersion against pr⊥(DΦ·II + ∇²Φ).
    Composition,
    /// ‖II‖ of the cone at |w| = δ.
    Cone,
}

impl Fixture {
    pub const ALL: [Fixture; 5] = [Fixture::S3, Fixture::Sphere2, Fixture::Clifford, Fixture::Composition, Fixture::Cone];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::S3 => "s3",
            Fixture::Sphere2 => "sphere2",
            Fixture::Clifford => "clifford",
            Fixture::Composition => "composition",
            Fixture::Cone => "cone",
        }
    }
}

impl FromStr for Fixture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown fixture '{s}'"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Curvature fixtures to run; empty means all.
    pub fixtures: Vec<Fixture>,
}

/// Distinct RNG seed per use site.
fn salt(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `f` over 0..n in parallel and reduces into an [`Extremum`]. `Ok(None)`
/// and degenerate samples count as excluded.
pub fn par_extremum<F>(n: usize, f: F) -> Result<Extremum, GeomError>
where
    F: Fn(usize) -> conifold_core::Result<Option<(Vec<f64>, f64, f64)>> + Sync,
{
    (0..n)
        .into_par_iter()
        .try_fold(Extremum::new, |mut acc, i| {
            match f(i) {
                Ok(Some((at, lo, hi))) => acc.push_range(i, &at, lo, hi),
                Ok(None) | Err(GeomError::Degenerate(_)) => acc.exclude(),
                Err(e) => return Err(e),
            }
            Ok(acc)
        })
        .try_reduce(Extremum::new, |a, b| Ok(a.merge(b)))
}

pub fn run(suite: Suite, cfg: &RunConfig, opts: &SuiteOptions) -> Result<Vec<Record>, LabError> {
    cfg.validate()?;
    let knot = cfg.knot_curve()?;
    match suite {
        Suite::Lagrangian => lagrangian(cfg, &knot),
        Suite::Tame => tame(cfg, &knot),
        Suite::Bilipschitz => bilipschitz(cfg),
        Suite::Curvature => curvature(cfg, opts),
        Suite::TotallyReal => totally_real(cfg, &knot),
        Suite::Stokes => stokes(cfg, &knot),
        Suite::TwoPoint => two_point(cfg, &knot),
    }
}

fn exclusions_ok(e: &Extremum) -> bool {
    e.check_exclusions(EXCLUSION_LIMIT).is_ok()
}

/// max |λ(T)| over the exact tangent frames of N*_k at the grid's (t, θ, r).
pub fn liouville_on_conormal(framed: &FramedKnot, grid: &GridSpec) -> Result<Extremum, GeomError> {
    par_extremum(grid.len(), |i| {
        let u = grid.point(i);
        let b = framed.conormal_tangent_basis(0.0, &ConormalCoords::polar(u[0], u[2], u[1]))?;
        let v = b.iter().map(|t| liouville_eval(t).abs()).fold(0.0, f64::max);
        Ok(Some((u, v, v)))
    })
}

/// max |ω(Tᵢ, Tⱼ)| and max |g(JTᵢ, Tⱼ)| on F_ε(N*_k), tangents by central differences.
pub fn isotropy_of_feps(framed: &FramedKnot, eps: f64, grid: &GridSpec) -> Result<(Extremum, Extremum), GeomError> {
    let j = phase_j();
    let one = |i: usize| -> conifold_core::Result<(Vec<f64>, f64, f64)> {
        let u = grid.point(i);
        let c = ConormalCoords::polar(u[0], u[2], u[1]);
        let basis = framed.conormal_tangent_basis(0.0, &c)?;
        let mut cols = Vec::with_capacity(3);
        for v in &basis {
            cols.push(contract_feps_differential(eps, v)?);
        }
        let (mut om, mut gj) = (0.0f64, 0.0f64);
        for a in &cols {
            let ja = &j * DVector::from_column_slice(a.as_slice());
            for b in &cols {
                om = om.max(omega(a, b).abs());
                gj = gj.max(ja.dot(&DVector::from_column_slice(b.as_slice())).abs());
            }
        }
        Ok((u, om, gj))
    };
    let om = par_extremum(grid.len(), |i| one(i).map(|(u, a, _)| Some((u, a, a))))?;
    let gj = par_extremum(grid.len(), |i| one(i).map(|(u, _, b)| Some((u, b, b))))?;
    Ok((om, gj))
}

/// Parallel [`form_restriction_at`] over a sampler.
pub fn par_form_restriction(form: &FormHandle, ambient: &ResolvedConifold, sampler: &SubmanifoldSampler) -> Result<Extremum, GeomError> {
    par_extremum(sampler.len(), |i| {
        let s = sampler.sample(i)?;
        let v = form_restriction_at(form, ambient, &s)?;
        Ok(Some((s.u, v, v)))
    })
}

fn lagrangian(cfg: &RunConfig, knot: &KnotCurve) -> Result<Vec<Record>, LabError> {
    let tol = cfg.tolerances;
    let fk = FramedKnot::new(knot)?;
    let grid = cfg.grid_spec()?;
    let mut out = Vec::new();

    let lam = liouville_on_conormal(&fk, &grid)?;
    out.push(
        Record::new("lagrangian", "liouville form on N*_k", "Lemma 1", lam.max, Comparison::AtMost, tol.exact)
            .samples(lam.count, lam.excluded),
    );

    let (om, gj) = isotropy_of_feps(&fk, cfg.eps, &grid)?;
    out.push(
        Record::new("lagrangian", "omega on F_eps(N*_k)", "Lemma 3", om.max, Comparison::AtMost, tol.exact)
            .samples(om.count, om.excluded),
    );
    out.push(
        Record::new("lagrangian", "g(J., .) on F_eps(N*_k)", "Lemma 3", gj.max, Comparison::AtMost, tol.exact)
            .samples(gj.count, gj.excluded),
    );

    let field = PerturbationField::new(knot, cfg.eps)?;
    let tilde = FormHandle::omega_tilde(&field);
    let patch = ct_patch(&fk, cfg.eps);
    let sampler = SubmanifoldSampler::new(&patch, grid)?;
    let e = par_form_restriction(&tilde, &ResolvedConifold, &sampler)?;
    out.push(
        Record::new("lagrangian", "omega_tilde_eps on CT(N*_k,eps)", "Theorem 2", e.max, Comparison::AtMost, tol.pipeline)
            .samples(e.count, e.excluded)
            .require(exclusions_ok(&e)),
    );
    Ok(out)
}

/// Point of the cone over the tube around the knot with |x| in `window`.
fn tube_point<R: Rng>(rng: &mut R, framed: &FramedKnot, tube: f64, window: (f64, f64)) -> conifold_core::Result<Vec4> {
    let t = TAU * rng.random::<f64>();
    let d = tube * rng.random::<f64>();
    let phi = TAU * rng.random::<f64>();
    let s = window.0 + (window.1 - window.0) * rng.random::<f64>();
    let f = framed.frame_at(t)?;
    Ok(((f.p1 * phi.cos() + f.p2 * phi.sin()) * d.sin() + f.k * d.cos()) * s)
}

/// Outcome of the ℝ⁸ tameness sweep for (Φ_ε)_*ω.
#[derive(Debug, Clone)]
pub struct PushforwardTameness {
    /// max of the tube-grid measurement and the Jacobian norm at the tested points.
    pub sigma: f64,
    pub ratios: Extremum,
    pub samples: usize,
}

/// ω_push(X, JX)/|X|² at `points` random base points over the tube with |x|
/// in `window`, `directions` random X each. Refuses when εσ ≥ 1.
pub fn pushforward_tameness(
    framed: &FramedKnot,
    field: &PerturbationField,
    window: (f64, f64),
    points: usize,
    directions: usize,
    seed: u64,
) -> Result<PushforwardTameness, LabError> {
    let sigma_grid = field.measure_norm(framed, window, NormSampling::default())?;
    refuse_if_untamed(field.eps, sigma_grid)?;
    let base: Vec<Vec<f64>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut rng = cell_rng(salt(seed, 41), i as u64);
            let x = tube_point(&mut rng, framed, field.tube_radius, window)?;
            let mut y = x.as_slice().to_vec();
            y.extend((0..4).map(|_| gaussian(&mut rng)));
            Ok(y)
        })
        .collect::<conifold_core::Result<_>>()?;
    let sigma_pts = base
        .par_iter()
        .map(|y| spectral_norm(&field.jacobian(&Vec4::new(y[0], y[1], y[2], y[3]))))
        .reduce(|| 0.0, f64::max);
    let sigma = sigma_grid.max(sigma_pts);
    refuse_if_untamed(field.eps, sigma)?;
    let form = FormHandle::omega_pushforward(field);
    let amb = Euclidean::phase_space();
    let g = MetricHandle::euclidean(8, 1.0);
    let ratios = par_extremum(points, |i| {
        let (lo, hi) = tameness_at(&form, &amb, &g, &base[i], 0, directions, salt(seed, 42), i as u64)?;
        Ok(Some((base[i].clone(), lo, hi)))
    })
    .map_err(taming_failure)?;
    Ok(PushforwardTameness { sigma, ratios, samples: points * directions })
}

fn refuse_if_untamed(eps: f64, sigma: f64) -> Result<(), LabError> {
    if eps * sigma >= 1.0 {
        return Err(LabError::Refused(format!(
            "eps >= 1/sigma (eps = {eps}, measured sigma = {sigma:.6}, 1/sigma = {:.6})",
            1.0 / sigma
        )));
    }
    Ok(())
}

fn taming_failure(e: GeomError) -> LabError {
    match e {
        // a nonpositive ratio is a measured failure, not bad input
        GeomError::Rejected(m) => LabError::Internal(m),
        e => LabError::from_geom(e),
    }
}

/// Parallel tameness bounds of a form on a sampler, `directions` per base point.
pub fn par_tameness(
    form: &FormHandle,
    metric: &MetricHandle,
    sampler: &SubmanifoldSampler,
    directions: usize,
    seed: u64,
) -> Result<Extremum, GeomError> {
    par_extremum(sampler.len(), |i| {
        let u = sampler.grid.point(i);
        let chart = sampler.patch.chart_at(&u)?;
        let y = sampler.patch.eval(&u, chart)?;
        let (lo, hi) = tameness_at(form, &ResolvedConifold, metric, y.as_slice(), chart, directions, seed, i as u64)?;
        Ok(Some((u, lo, hi)))
    })
}

fn tame(cfg: &RunConfig, knot: &KnotCurve) -> Result<Vec<Record>, LabError> {
    let tol = cfg.tolerances;
    let eps = cfg.eps;
    let fk = FramedKnot::new(knot)?;
    let field = PerturbationField::new(knot, eps)?;
    let window = (cone_radius(eps, cfg.r_range[0]), cone_radius(eps, cfg.r_range[1]));
    let push = pushforward_tameness(&fk, &field, window, 4096, 16, cfg.seed)?;
    let sigma = push.sigma;
    let mut out = Vec::new();
    out.push(
        Record::new("tame", "eps * sigma", "Lemma 4", eps * sigma, Comparison::AtMost, 1.0)
            .note(format!("sigma = {sigma:.6} on |x| in [{:.4}, {:.4}]", window.0, window.1)),
    );
    let r = &push.ratios;
    let dev = (1.0 - r.min).max(r.max - 1.0);
    out.push(
        Record::new("tame", "pushforward omega(X,JX)/|X|^2 deviation from 1", "Lemma 4", dev, Comparison::AtMost, eps * sigma + tol.bound)
            .samples(push.samples, r.excluded)
            .note(format!("ratios in [{:.6}, {:.6}]", r.min, r.max)),
    );

    let tilde = FormHandle::omega_tilde(&field);
    let ghat = MetricHandle::of(MetricTag::GHat, &ResolvedConifold);
    let patch = ct_patch(&fk, eps);
    let sampler = SubmanifoldSampler::new(&patch, cfg.grid_spec()?)?;
    let b = par_tameness(&tilde, &ghat, &sampler, 8, salt(cfg.seed, 43)).map_err(taming_failure)?;
    let c = taming_constant(&b);
    let rr = 2.0 * eps;
    let bound = 1.0 / (1.0 - eps * sigma) * (1.0 + 2.0 / (rr * rr));
    out.push(
        Record::new("tame", "taming constant of omega_tilde_eps on CT", "Lemma 5", c, Comparison::AtMost, bound + tol.bound)
            .samples(b.count * 8, b.excluded)
            .require(b.min > 0.0)
            .note(format!("ratios in [{:.6}, {:.6}]", b.min, b.max)),
    );
    Ok(out)
}

/// Random point of 𝒞 in cone-chart reals with |z| < 2 and |w| = `radius`.
pub fn cone_sample<R: Rng>(rng: &mut R, radius: f64) -> [f64; 6] {
    let z = loop {
        let z = [4.0 * rng.random::<f64>() - 2.0, 4.0 * rng.random::<f64>() - 2.0];
        if z[0] * z[0] + z[1] * z[1] < 3.9 {
            break z;
        }
    };
    let mut q: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let n = (q.iter().map(|v| v * v).sum::<f64>() * (1.0 + z[0] * z[0] + z[1] * z[1])).sqrt();
    for v in &mut q {
        *v *= radius / n;
    }
    [z[0], z[1], q[0], q[1], q[2], q[3]]
}

/// Extreme eigenvalues of the π₂⁻¹ pullback of ĝ against g_st on 𝒞 at |w| = R.
pub fn resolution_bilipschitz(radius: f64, samples: usize, seed: u64) -> Result<(f64, f64), GeomError> {
    let (src, tgt) = (MetricHandle::euclidean(8, 0.5), MetricHandle::of(MetricTag::GHat, &ProductCp1C4));
    let fd = FdConfig::default();
    let e = par_extremum(samples, |i| {
        let mut rng = cell_rng(seed, i as u64);
        let w = cone_chart_map(&cone_sample(&mut rng, radius))?;
        let basis = cone_tangent_basis(w.as_slice())?;
        let (a, b) = bilipschitz_at(&ResolveMap::default(), &src, &tgt, w.as_slice(), 0, Some(&basis), &fd)?;
        Ok(Some((w.as_slice().to_vec(), a, b)))
    })?;
    Ok((e.min, e.max))
}

/// Cone chart against the cone metric, |w| from 0.2 to 5.2.
pub fn cone_chart_bilipschitz(samples: usize, seed: u64) -> Result<(f64, f64), GeomError> {
    let fd = FdConfig::default();
    let (cone, st) = (MetricHandle::cone(), MetricHandle::euclidean(8, 0.5));
    let e = par_extremum(samples, |i| {
        let mut rng = cell_rng(seed, i as u64);
        let y = cone_sample(&mut rng, 0.2 + 5.0 * (i as f64 / samples as f64));
        let (a, b) = bilipschitz_at(&PlainMap(cone_chart_map), &cone, &st, &y, 0, None, &fd)?;
        Ok(Some((y.to_vec(), a, b)))
    })?;
    Ok((e.min, e.max))
}

/// The f-map u ↦ (z₀ + u_z/√(1+|ξ₀|²+|η₀|²), (ξ₀,η₀) + u_w) on the unit ball of
/// ℂ³, against g̃, at base points with |(ξ₀, η₀)| in [3, 13].
pub fn f_map_bilipschitz(samples: usize, seed: u64) -> Result<(f64, f64), GeomError> {
    let fd = FdConfig::default();
    let (gst6, tilde) = (MetricHandle::euclidean(6, 0.5), MetricHandle::tilde());
    let e = par_extremum(samples, |i| {
        let mut rng = cell_rng(seed, i as u64);
        let mut base: Vec<f64> = (0..6).map(|_| gaussian(&mut rng)).collect();
        let n = base[2..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = (3.0 + 10.0 * rng.random::<f64>()) / n;
        for v in &mut base[2..] {
            *v *= scale;
        }
        let s0: f64 = base[2..].iter().map(|v| v * v).sum();
        let k = 1.0 / (1.0 + s0).sqrt();
        let b2 = base.clone();
        let f = move |u: &[f64]| -> conifold_core::Result<DVector<f64>> {
            let mut out = b2.clone();
            out[0] += k * u[0];
            out[1] += k * u[1];
            for j in 2..6 {
                out[j] += u[j];
            }
            Ok(DVector::from_vec(out))
        };
        let mut u: Vec<f64> = (0..6).map(|_| gaussian(&mut rng)).collect();
        let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rad = rng.random::<f64>().powf(1.0 / 6.0) * 0.999;
        for v in &mut u {
            *v *= rad / un;
        }
        let (a, b) = bilipschitz_at(&PlainMap(f), &gst6, &tilde, &u, 0, None, &fd)?;
        Ok(Some((base, a, b)))
    })?;
    Ok((e.min, e.max))
}

fn bilipschitz(cfg: &RunConfig) -> Result<Vec<Record>, LabError> {
    let tol = cfg.tolerances.bound;
    let mut out = Vec::new();
    let mut radii = vec![0.5, 1.0, 2.0];
    if !radii.contains(&(2.0 * cfg.eps)) {
        radii.push(2.0 * cfg.eps);
    }
    const N: usize = 1000;
    for (k, r) in radii.into_iter().enumerate() {
        let (lo, hi) = resolution_bilipschitz(r, N, salt(cfg.seed, 50 + k as u64))?;
        let c = 1.0 + 2.0 / (r * r);
        out.push(Record::new("bilipschitz", &format!("pi2^-1 lower, |w| = {r}"), "Corollary 2", lo, Comparison::AtLeast, 1.0 - tol).samples(N, 0));
        out.push(Record::new("bilipschitz", &format!("pi2^-1 upper, |w| = {r}"), "Corollary 2", hi, Comparison::AtMost, c + tol).samples(N, 0));
    }
    let (lo, hi) = cone_chart_bilipschitz(2 * N, salt(cfg.seed, 60))?;
    out.push(Record::new("bilipschitz", "cone chart lower", "Lemma 10", lo, Comparison::AtLeast, 1.0 / 20.0 - tol).samples(2 * N, 0));
    out.push(Record::new("bilipschitz", "cone chart upper", "Lemma 10", hi, Comparison::AtMost, 20.0 + tol).samples(2 * N, 0));
    let (lo, hi) = f_map_bilipschitz(2 * N, salt(cfg.seed, 61))?;
    out.push(Record::new("bilipschitz", "f-map lower", "Theorem 3", lo, Comparison::AtLeast, 0.25 - tol).samples(2 * N, 0));
    out.push(Record::new("bilipschitz", "f-map upper", "Theorem 3", hi, Comparison::AtMost, 4.0 + tol).samples(2 * N, 0));
    Ok(out)
}

/// max |sec − want| of a patch in ℝ⁴ over fixed sample points and planes.
pub fn sectional_deviation(patch: &Patch, want: f64, points: &[Vec<f64>], planes: &[(Vec<f64>, Vec<f64>)]) -> Result<f64, GeomError> {
    let e4 = Euclidean::new(4);
    let fd = FdConfig::default();
    let mut worst = 0.0f64;
    for u in points {
        for (x, y) in planes {
            worst = worst.max((gauss_sectional(&e4, patch, u, 0, x, y, &fd)? - want).abs());
        }
    }
    Ok(worst)
}

fn sphere_points(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![0.2 + 1.1 * i as f64 / n as f64, 0.5 * i as f64, 1.1 * i as f64]).collect()
}

fn sphere_planes() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]),
        (vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]),
        (vec![0.0, 1.0, 0.0], vec![0.0, 0.3, 1.0]),
    ]
}

/// Composition residual for the cone chart on a test surface in ℝ⁶.
pub fn composition_max(samples: usize) -> Result<f64, GeomError> {
    let surface = Patch::new(
        2,
        6,
        Box::new(|u, _| {
            Ok(DVector::from_vec(vec![
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
    let fd = FdConfig::default();
    let mut worst = 0.0f64;
    for i in 0..samples {
        let u = [-0.5 + i as f64 / samples as f64, 0.3 - 0.6 * i as f64 / samples as f64];
        for (x, y) in [([1.0, 0.0], [1.0, 0.0]), ([1.0, 0.0], [0.3, 1.0]), ([0.0, 1.0], [0.0, 1.0])] {
            worst = worst.max(composition_residual(&cone_chart_map, &src, &tgt, &surface, &u, &x, &y, &fd)?);
        }
    }
    Ok(worst)
}

/// max ‖II‖ of 𝒞 ⊂ ℂ⁴ over random cone points with |w| = δ.
pub fn cone_second_fundamental_max(delta: f64, samples: usize, seed: u64) -> Result<f64, GeomError> {
    let w = Euclidean::w_space();
    let p = cone_patch();
    let fd = FdConfig::default();
    let e = par_extremum(samples, |i| {
        let mut rng = cell_rng(seed, i as u64);
        // keep |z| ≤ 1 so the chart is the preferred one
        let u = loop {
            let u = cone_sample(&mut rng, delta);
            if u[0] * u[0] + u[1] * u[1] <= 1.0 {
                break u;
            }
        };
        let v = second_fundamental_norm(&w, &p, &u, 0, &fd)?;
        Ok(Some((u.to_vec(), v, v)))
    })?;
    Ok(e.max)
}

/// Envelope constant c = max ‖II‖δ² and the largest ratio of consecutive maxima.
pub fn cone_envelope(deltas: &[f64], samples: usize, seed: u64) -> Result<(f64, f64, Vec<f64>), GeomError> {
    let maxima: Vec<f64> = deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| cone_second_fundamental_max(d, samples, salt(seed, 70 + k as u64)))
        .collect::<Result<_, _>>()?;
    let c = deltas.iter().zip(&maxima).map(|(d, m)| m * d * d).fold(0.0, f64::max);
    let trend = maxima.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Ok((c, trend, maxima))
}

fn curvature(cfg: &RunConfig, opts: &SuiteOptions) -> Result<Vec<Record>, LabError> {
    let tol = cfg.tolerances;
    let fixtures = if opts.fixtures.is_empty() { Fixture::ALL.to_vec() } else { opts.fixtures.clone() };
    let mut out = Vec::new();
    let pts = sphere_points(16);
    let planes = sphere_planes();
    let n = pts.len() * planes.len();
    for f in fixtures {
        match f {
            Fixture::S3 => {
                let d = sectional_deviation(&sphere3_patch(1.0), 1.0, &pts, &planes)?;
                out.push(Record::new("curvature", "|sec - 1| on unit S^3", "Gauss equation", d, Comparison::AtMost, tol.curvature).samples(n, 0));
            }
            Fixture::Sphere2 => {
                let d = sectional_deviation(&sphere3_patch(2.0), 0.25, &pts, &planes)?;
                out.push(Record::new("curvature", "|sec - 1/4| on S^3 of radius 2", "Gauss equation", d, Comparison::AtMost, tol.curvature).samples(n, 0));
            }
            Fixture::Clifford => {
                let cp: Vec<Vec<f64>> = (0..16).map(|i| vec![0.3 * i as f64, 0.7 * i as f64]).collect();
                let d = sectional_deviation(&clifford_patch(), 0.0, &cp, &[(vec![1.0, 0.0], vec![0.0, 1.0]), (vec![1.0, 1.0], vec![0.0, 1.0])])?;
                out.push(Record::new("curvature", "|sec| on the Clifford torus", "Gauss equation", d, Comparison::AtMost, tol.curvature).samples(32, 0));
            }
            Fixture::Composition => {
                let r = composition_max(12)?;
                out.push(Record::new("curvature", "composed II residual, cone chart", "Lemma 7", r, Comparison::AtMost, 1e-5).samples(36, 0));
            }
            Fixture::Cone => {
                let deltas = [1.0, 2.0, 4.0, 8.0];
                let (c, trend, maxima) = cone_envelope(&deltas, 200, cfg.seed)?;
                let note = format!("max ||II|| at delta 1,2,4,8: {maxima:.6?}");
                out.push(Record::new("curvature", "cone ||II|| delta^2 envelope", "Corollary 4", c, Comparison::AtMost, 100.0).samples(800, 0).note(note));
                out.push(Record::new("curvature", "cone ||II|| ratio of consecutive maxima", "Corollary 4", trend, Comparison::AtMost, 1.0).samples(800, 0));
            }
        }
    }
    Ok(out)
}

pub fn par_totally_real(sampler: &SubmanifoldSampler) -> Result<Extremum, GeomError> {
    par_extremum(sampler.len(), |i| {
        let s = sampler.sample(i)?;
        let a = totally_real_angle(&ResolvedConifold, &s)?;
        Ok(Some((s.u, a, a)))
    })
}

fn totally_real(cfg: &RunConfig, knot: &KnotCurve) -> Result<Vec<Record>, LabError> {
    let fk = FramedKnot::new(knot)?;
    let patch = ct_patch(&fk, cfg.eps);
    let sampler = SubmanifoldSampler::new(&patch, cfg.grid_spec()?)?;
    let e = par_totally_real(&sampler)?;
    Ok(vec![Record::new("totally-real", "min angle between T(CT) and J T(CT)", "Theorem 2", e.min, Comparison::Above, 0.0)
        .samples(e.count, e.excluded)
        .require(exclusions_ok(&e))])
}

/// (max |interior − boundary|, max |boundary|) over `count` random discs on N*_k.
pub fn stokes_discs(knot: &KnotCurve, count: usize, seed: u64, membership_tol: f64) -> Result<(f64, f64), GeomError> {
    let fk = FramedKnot::new(knot)?;
    let field = PerturbationField::new(knot, 0.1)?;
    let mem = conormal_membership(&field);
    let form = FormHandle::omega();
    let lam = liouville_form();
    let results: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let d = ConormalDisc::random(&mut cell_rng(seed, i as u64), 0.3);
            let r = stokes_check(&d.map(&fk), &form, &lam, Some(&mem), 32, membership_tol)?;
            Ok((r.difference(), r.boundary.abs()))
        })
        .collect::<conifold_core::Result<_>>()?;
    Ok(results.iter().fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(*x), b.max(*y))))
}

fn stokes(cfg: &RunConfig, knot: &KnotCurve) -> Result<Vec<Record>, LabError> {
    let tol = cfg.tolerances.stokes;
    let (diff, bnd) = stokes_discs(knot, 20, salt(cfg.seed, 80), 1e-8)?;
    Ok(vec![
        Record::new("stokes", "|interior - boundary| over random discs", "Remark 1", diff, Comparison::AtMost, tol).samples(20, 0),
        Record::new("stokes", "|boundary integral of lambda|", "Lemma 16", bnd, Comparison::AtMost, tol).samples(20, 0),
    ])
}

/// Empirical 2-point constant with sources split across workers.
pub fn par_two_point(mesh: &SampleMesh, rho: f64, cutoff: f64) -> Result<TwoPoint, GeomError> {
    if !(rho > 0.0) {
        return Err(GeomError::Parameter(format!("rho must be positive, got {rho}")));
    }
    let out = (0..mesh.len())
        .into_par_iter()
        .map(|s| two_point_from(mesh, s, rho, cutoff))
        .reduce(TwoPoint::empty, TwoPoint::merge);
    conifold_core::distance::check_pairs(out, rho)
}

/// dist^L/dist^M between consecutive zeros ln n, ln(n+1) of sin(πeˣ).
pub fn sine_ratio(n: usize) -> Result<f64, GeomError> {
    let (p, x, i, j) = sine_exp_fixture(n, 2e-3)?;
    let m = build_mesh(p, x, 4)?;
    Ok(intrinsic_distance(&m, i, j) / m.ambient_distance(i, j))
}

/// Two-point constants of the slices |p| = r and the path-length factors of
/// the dilation S₁ → S_r on sampled shortest paths.
pub fn slice_scaling(framed: &FramedKnot, eps: f64, radii: &[f64]) -> Result<(Vec<f64>, Vec<(f64, f64)>), GeomError> {
    let consts = radii
        .iter()
        .map(|&r| {
            let m = slice_mesh(framed, eps, r, 64, 32, 8)?;
            Ok(par_two_point(&m, 0.5 * r, 3.0)?.constant)
        })
        .collect::<Result<Vec<_>, GeomError>>()?;
    let s1 = slice_mesh(framed, eps, 1.0, 64, 32, 8)?;
    let mut factors = Vec::new();
    for &r in radii {
        for (a, b) in [(0, 700), (5, 1500), (100, 2000)] {
            let Some(path) = shortest_path(&s1, a, b) else { continue };
            let path: Vec<Vec<f64>> = path.into_iter().map(|v| s1.points[v].clone()).collect();
            let moved: Vec<Vec<f64>> = path.iter().map(|p| dilate(p, r, eps)).collect();
            factors.push((r, path_length(&moved) / path_length(&path)));
        }
    }
    Ok((consts, factors))
}

pub const MESH_K: usize = 12;
pub const MESH_RHO: f64 = 0.5;
pub const MESH_CUTOFF: f64 = 2.5;

fn two_point(cfg: &RunConfig, knot: &KnotCurve) -> Result<Vec<Record>, LabError> {
    let fk = FramedKnot::new(knot)?;
    let mut out = Vec::new();
    let mesh = ct_mesh(&fk, cfg.eps, &cfg.grid_spec()?, MESH_K)?;
    let connected = mesh.is_connected();
    let rec = match par_two_point(&mesh, MESH_RHO, MESH_CUTOFF) {
        Ok(tp) => Record::new("two-point", "empirical C on CT mesh", "Corollary 7", tp.constant, Comparison::Finite, f64::INFINITY)
            .samples(tp.pairs, tp.unreached)
            .require(connected && tp.unreached == 0),
        Err(e) => Record::new("two-point", "empirical C on CT mesh", "Corollary 7", f64::NAN, Comparison::Finite, f64::INFINITY).note(e.to_string()),
    };
    out.push(rec.note(format!("{} points, k = {MESH_K}, {} component(s), rho = {MESH_RHO}", mesh.len(), mesh.components)));

    let ratios: Vec<f64> = [5, 10, 20].into_iter().map(sine_ratio).collect::<Result<_, _>>()?;
    let growth = ratios.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    out.push(
        Record::new("two-point", "sin(pi e^x) ratio growth between windows", "Definition 12", growth, Comparison::Above, 1.0)
            .samples(3, 0)
            .note(format!("ratios at n = 5, 10, 20: {ratios:.4?}")),
    );

    let eps = cfg.eps;
    let radii = [1.0, 2.0, 4.0];
    let (consts, factors) = slice_scaling(&fk, eps, &radii)?;
    let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    out.push(
        Record::new("two-point", "slice constant spread max/min - 1", "Lemma 13", hi / lo - 1.0, Comparison::AtMost, 0.1)
            .samples(consts.len(), 0)
            .note(format!("C at r = 1, 2, 4: {consts:.4?}")),
    );
    let worst = factors
        .iter()
        .map(|&(r, f)| {
            let (a, b) = (r * (1.0 - 2e-2), cone_radius(eps, r) * (1.0 + 2e-2));
            // distance outside [a, b], 0 when inside
            (a - f).max(f - b).max(0.0)
        })
        .fold(0.0, f64::max);
    out.push(
        Record::new("two-point", "dilation factor outside [r, sqrt(r^2+eps^2)](1 +- 2e-2)", "Lemma 13", worst, Comparison::AtMost, 0.0)
            .samples(factors.len(), 0),
    );
    Ok(out)
}
