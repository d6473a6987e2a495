use clap::{Args, Parser, Subcommand};
use conifold_lab::commands;
use conifold_lab::config::{parse_grid, parse_range, parse_tier, Overrides, RunConfig};
use conifold_lab::suites::{Fixture, Suite, SuiteOptions};
use conifold_lab::{thread_cap, LabError, Report};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "conifold-lab", version, about = "Sampled verification of conifold transitions of knot conormals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// unknot, torus:m,n or fourier:<path>.
    #[arg(long)]
    knot: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// n_t,n_theta,n_r (also n_t x n_theta x n_r).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 3]>,
    /// r_min,r_max.
    #[arg(long = "r-range", value_parser = parse_range)]
    r_range: Option<[f64; 2]>,
    #[arg(long)]
    seed: Option<u64>,
    /// tier=value, repeatable (exact, pipeline, bound, curvature, stokes).
    #[arg(long = "tol", value_parser = parse_tier)]
    tol: Vec<(String, f64)>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, LabError> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let o = Overrides {
            knot: self.knot.clone(),
            eps: self.eps,
            grid: self.grid,
            r_range: self.r_range,
            seed: self.seed,
            tolerances: self.tol.clone(),
            output: self.output.clone(),
        };
        let cfg = base.apply(&o)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample CT(N*_{k,eps}) on the grid as CSV.
    CtSample(Common),
    /// Run verification suites and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// lagrangian, tame, bilipschitz, curvature, totally-real, stokes, two-point or all;
        /// repeatable or comma-separated.
        #[arg(long, default_value = "all")]
        suite: Vec<String>,
        /// Curvature fixture: s3, sphere2, clifford, composition, cone. Repeatable.
        #[arg(long)]
        fixture: Vec<Fixture>,
        /// Record wall time in the report (breaks byte-identity between runs).
        #[arg(long)]
        wall_time: bool,
    },
    /// Measured constants as JSON.
    ReportConstants {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        wall_time: bool,
    },
    /// CT kNN mesh as CSV.
    MeshExport {
        #[command(flatten)]
        common: Common,
        /// Neighbours per point.
        #[arg(long, default_value_t = 12)]
        k: usize,
    },
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, LabError> {
    Ok(match &cfg.output {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<u8, LabError> {
    let mut out = sink(cfg)?;
    out.write_all(report.to_json().as_bytes())?;
    out.flush()?;
    for r in report.failures() {
        eprintln!("FAIL [{}] {} ({}): measured {:e}, bound {:e}", r.suite, r.name, r.anchor, r.measured, r.bound);
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn dispatch(cmd: Command) -> Result<u8, LabError> {
    match cmd {
        Command::CtSample(c) => {
            let cfg = c.resolve()?;
            let mut out = sink(&cfg)?;
            commands::ct_sample(&cfg, &mut out)?;
            out.flush()?;
            Ok(0)
        }
        Command::Verify { common, suite, fixture, wall_time } => {
            let cfg = common.resolve()?;
            let mut suites: Vec<Suite> = Vec::new();
            for name in suite.iter().flat_map(|s| s.split(',')) {
                for s in Suite::parse_list(name).map_err(LabError::Config)? {
                    if !suites.contains(&s) {
                        suites.push(s);
                    }
                }
            }
            let report = commands::verify(&cfg, &suites, &SuiteOptions { fixtures: fixture }, wall_time)?;
            emit(&cfg, &report)
        }
        Command::ReportConstants { common, wall_time } => {
            let cfg = common.resolve()?;
            emit(&cfg, &commands::report_constants(&cfg, wall_time)?)
        }
        Command::MeshExport { common, k } => {
            let cfg = common.resolve()?;
            if k == 0 {
                return Err(LabError::Config("k must be positive".into()));
            }
            let mut out = sink(&cfg)?;
            commands::mesh_export(&cfg, k, &mut out)?;
            out.flush()?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_cap(std::env::var("CONIFOLD_LAB_THREADS").ok().as_deref()).and_then(|cap| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cap {
            b = b.num_threads(n);
        }
        let pool = b.build().map_err(|e| LabError::Internal(e.to_string()))?;
        pool.install(|| dispatch(cli.command))
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("conifold-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
