//! The four CLI commands as library calls.

use crate::config::RunConfig;
use crate::error::LabError;
use crate::report::{Comparison, Record, Report};
use crate::suites::{
    par_tameness, par_totally_real, par_two_point, pushforward_tameness, resolution_bilipschitz, run, Suite, SuiteOptions,
    MESH_CUTOFF, MESH_K, MESH_RHO,
};
use conifold_core::conifold::{cone_radius, ct_point, ResolvedPoint};
use conifold_core::conormal::{ConormalCoords, FramedKnot, PerturbationField};
use conifold_core::distance::ct_mesh;
use conifold_core::verify::ambient::ResolvedConifold;
use conifold_core::verify::engines::taming_constant;
use conifold_core::verify::forms::{FormHandle, MetricHandle, MetricTag};
use conifold_core::verify::patch::{ct_patch, SubmanifoldSampler};
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

pub const CT_SAMPLE_HEADER: [&str; 16] = [
    "t", "theta", "r", "u_re", "u_im", "v_re", "v_im", "w1_re", "w1_im", "w2_re", "w2_im", "w3_re", "w3_im", "w4_re", "w4_im",
    "trace_abs",
];

fn ct_row(u: &[f64], p: &ResolvedPoint) -> Vec<f64> {
    let mut row = vec![u[0], u[1], u[2], p.line.u.re, p.line.u.im, p.line.v.re, p.line.v.im];
    for c in p.w.c {
        row.push(c.re);
        row.push(c.im);
    }
    row.push(p.trace_abs());
    row
}

/// CSV of CT(N*_{k,ε}) over the config grid; returns the row count.
pub fn ct_sample<W: Write>(cfg: &RunConfig, out: W) -> Result<usize, LabError> {
    cfg.validate()?;
    let fk = FramedKnot::new(&cfg.knot_curve()?)?;
    let grid = cfg.grid_spec()?;
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let u = grid.point(i);
            let p = ct_point(&fk, cfg.eps, &ConormalCoords::polar(u[0], u[2], u[1]))?;
            Ok(ct_row(&u, &p))
        })
        .collect::<Result<_, conifold_core::GeomError>>()
        .map_err(|e| LabError::Internal(e.to_string()))?;
    write_csv(out, &CT_SAMPLE_HEADER.map(String::from), rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()))?;
    Ok(rows.len())
}

/// CSV of the CT kNN mesh: id, (t, theta, r), the 11 ambient coordinates.
pub fn mesh_export<W: Write>(cfg: &RunConfig, k: usize, out: W) -> Result<usize, LabError> {
    cfg.validate()?;
    let fk = FramedKnot::new(&cfg.knot_curve()?)?;
    let mesh = ct_mesh(&fk, cfg.eps, &cfg.grid_spec()?, k).map_err(|e| match e {
        conifold_core::GeomError::Parameter(_) | conifold_core::GeomError::Usage(_) => LabError::from_geom(e),
        e => LabError::Internal(e.to_string()),
    })?;
    let mut header: Vec<String> = ["id", "t", "theta", "r"].map(String::from).to_vec();
    header.extend((0..11).map(|i| format!("x{i}")));
    let rows = (0..mesh.len()).map(|i| {
        let mut r = vec![i.to_string()];
        r.extend(mesh.params[i].iter().chain(&mesh.points[i]).map(|v| v.to_string()));
        r
    });
    write_csv(out, &header, rows)?;
    Ok(mesh.len())
}

fn write_csv<W: Write, I: Iterator<Item = Vec<String>>>(out: W, header: &[String], rows: I) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the suites concurrently; records keep the suite order.
pub fn verify(cfg: &RunConfig, suites: &[Suite], opts: &SuiteOptions, wall_time: bool) -> Result<Report, LabError> {
    let start = Instant::now();
    cfg.validate()?;
    cfg.knot_curve()?;
    let parts: Vec<Vec<Record>> = suites.par_iter().map(|&s| run(s, cfg, opts)).collect::<Result<_, _>>()?;
    let mut report = Report::new("verify", cfg, parts.into_iter().flatten().collect());
    if wall_time {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// σ, taming C, bi-Lipschitz C at R = 2ε, empirical 2-point C and the
/// minimum totally-real angle, each with its bound where one exists.
pub fn report_constants(cfg: &RunConfig, wall_time: bool) -> Result<Report, LabError> {
    let start = Instant::now();
    cfg.validate()?;
    let knot = cfg.knot_curve()?;
    let eps = cfg.eps;
    let tol = cfg.tolerances.bound;
    let fk = FramedKnot::new(&knot)?;
    let field = PerturbationField::new(&knot, eps)?;
    let window = (cone_radius(eps, cfg.r_range[0]), cone_radius(eps, cfg.r_range[1]));
    let push = pushforward_tameness(&fk, &field, window, 1024, 8, cfg.seed)?;
    let sigma = push.sigma;
    let mut recs = vec![Record::new("constants", "sigma = ||D xi||", "Lemma 4", sigma, Comparison::AtMost, 1.0 / eps)
        .samples(push.samples, 0)
        .note(format!("|x| in [{:.4}, {:.4}]", window.0, window.1))];

    let patch = ct_patch(&fk, eps);
    let sampler = SubmanifoldSampler::new(&patch, cfg.grid_spec()?)?;
    let tilde = FormHandle::omega_tilde(&field);
    let ghat = MetricHandle::of(MetricTag::GHat, &ResolvedConifold);
    let b = par_tameness(&tilde, &ghat, &sampler, 8, cfg.seed)?;
    let rr = 2.0 * eps;
    let c2 = 1.0 + 2.0 / (rr * rr);
    let c1 = 1.0 / (1.0 - eps * sigma);
    recs.push(
        Record::new("constants", "taming C of omega_tilde_eps", "Lemma 5", taming_constant(&b), Comparison::AtMost, c1 * c2 + tol)
            .samples(b.count * 8, b.excluded),
    );

    let (lo, hi) = resolution_bilipschitz(rr, 1000, cfg.seed)?;
    recs.push(
        Record::new("constants", &format!("bi-Lipschitz C of pi2^-1 at |w| = {rr}"), "Corollary 2", hi.max(1.0 / lo), Comparison::AtMost, c2 + tol)
            .samples(1000, 0),
    );

    let mesh = ct_mesh(&fk, eps, &cfg.grid_spec()?, MESH_K)?;
    let name = "empirical 2-point C";
    recs.push(match par_two_point(&mesh, MESH_RHO, MESH_CUTOFF) {
        Ok(tp) => Record::new("constants", name, "Corollary 7", tp.constant, Comparison::Finite, f64::INFINITY)
            .samples(tp.pairs, tp.unreached)
            .require(mesh.is_connected() && tp.unreached == 0),
        Err(e) => Record::new("constants", name, "Corollary 7", f64::NAN, Comparison::Finite, f64::INFINITY).note(e.to_string()),
    });

    let a = par_totally_real(&sampler)?;
    recs.push(Record::new("constants", "min totally-real angle", "Theorem 2", a.min, Comparison::Above, 0.0).samples(a.count, a.excluded));

    let mut report = Report::new("report-constants", cfg, recs);
    if wall_time {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}
