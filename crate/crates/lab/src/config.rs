//! Run configuration: JSON file plus command-line overrides.

use crate::error::LabError;
use conifold_core::knots::{FourierTerm, KnotCurve};
use conifold_core::sample::GridSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Check thresholds by tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tiers {
    /// Identities that hold to roundoff on exact tangents (λ, ω on N*_k).
    pub exact: f64,
    /// Restrictions computed through the full pipeline with FD tangents.
    pub pipeline: f64,
    /// Slack added to analytic bounds.
    pub bound: f64,
    /// Curvature from second differences.
    pub curvature: f64,
    /// Quadrature agreement.
    pub stokes: f64,
}

impl Default for Tiers {
    fn default() -> Self {
        Self { exact: 1e-9, pipeline: 1e-7, bound: 1e-6, curvature: 1e-4, stokes: 1e-6 }
    }
}

impl Tiers {
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), LabError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(LabError::Config(format!("tolerance {name} must be positive, got {value}")));
        }
        let slot = match name {
            "exact" => &mut self.exact,
            "pipeline" => &mut self.pipeline,
            "bound" => &mut self.bound,
            "curvature" => &mut self.curvature,
            "stokes" => &mut self.stokes,
            _ => return Err(LabError::Config(format!("unknown tolerance tier '{name}'"))),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub knot: String,
    pub eps: f64,
    /// (n_t, n_theta, n_r).
    pub grid: [usize; 3],
    pub r_range: [f64; 2],
    pub seed: u64,
    pub tolerances: Tiers,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            knot: "unknot".into(),
            eps: 0.1,
            grid: [32, 32, 4],
            r_range: [0.75, 1.25],
            seed: 0,
            tolerances: Tiers::default(),
            output: None,
        }
    }
}

/// Flag values; `None` keeps the file (or default) value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub knot: Option<String>,
    pub eps: Option<f64>,
    pub grid: Option<[usize; 3]>,
    pub r_range: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub tolerances: Vec<(String, f64)>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, LabError> {
        if let Some(k) = &o.knot {
            self.knot = k.clone();
        }
        if let Some(e) = o.eps {
            self.eps = e;
        }
        if let Some(g) = o.grid {
            self.grid = g;
        }
        if let Some(r) = o.r_range {
            self.r_range = r;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        for (name, v) in &o.tolerances {
            self.tolerances.set(name, *v)?;
        }
        if let Some(p) = &o.output {
            self.output = Some(p.clone());
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.grid.iter().any(|&n| n < 2) {
            return Err(LabError::Config(format!("grid counts must be >= 2, got {:?}", self.grid)));
        }
        let [lo, hi] = self.r_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(LabError::Config(format!("r-range needs 0 < r_min < r_max, got [{lo}, {hi}]")));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(LabError::Config(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        Ok(())
    }

    pub fn knot_curve(&self) -> Result<KnotCurve, LabError> {
        parse_knot(&self.knot)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, LabError> {
        let [nt, nth, nr] = self.grid;
        GridSpec::conormal(nt, nth, nr, self.r_range[0], self.r_range[1]).map_err(LabError::from_geom)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    axis: usize,
    harmonic: u32,
    cos: f64,
    sin: f64,
}

pub fn parse_fourier_json(text: &str) -> Result<Vec<FourierTerm>, LabError> {
    let terms: Vec<TermJson> = serde_json::from_str(text).map_err(|e| LabError::Config(format!("bad Fourier coefficients: {e}")))?;
    Ok(terms.into_iter().map(|t| FourierTerm { axis: t.axis, harmonic: t.harmonic, cos: t.cos, sin: t.sin }).collect())
}

/// `unknot`, `torus:m,n` or `fourier:<path>`.
pub fn parse_knot(spec: &str) -> Result<KnotCurve, LabError> {
    let bad = || LabError::Config(format!("invalid knot spec '{spec}' (expected unknot, torus:m,n or fourier:<path>)"));
    if spec == "unknot" {
        return Ok(KnotCurve::unknot());
    }
    if let Some(rest) = spec.strip_prefix("torus:") {
        let (m, n) = rest.split_once(',').ok_or_else(bad)?;
        let m: i64 = m.trim().parse().map_err(|_| bad())?;
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        return KnotCurve::torus_knot(m, n).map_err(|e| LabError::Config(e.to_string()));
    }
    if let Some(path) = spec.strip_prefix("fourier:") {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{path}: {e}")))?;
        return KnotCurve::fourier_knot(parse_fourier_json(&text)?).map_err(|e| LabError::Config(e.to_string()));
    }
    Err(bad())
}

/// "8,8,4" or "8x8x4".
pub fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split([',', 'x']).collect();
    if parts.len() != 3 {
        return Err(format!("grid needs three counts, got '{s}'"));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("bad grid count '{p}'"))?;
    }
    Ok(out)
}

pub fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("range needs 'lo,hi', got '{s}'"))?;
    let a = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let b = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    Ok([a, b])
}

pub fn parse_tier(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("tolerance needs 'tier=value', got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|_| format!("bad tolerance value '{v}'"))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_specs() {
        assert_eq!(parse_knot("unknot").unwrap().name, "unknot");
        assert_eq!(parse_knot("torus:2,3").unwrap().torus_params(), Some((2, 3)));
        for bad in ["torus:2,2", "torus:2", "torus:a,b", "trefoil", "fourier:/nonexistent/x.json"] {
            assert!(matches!(parse_knot(bad), Err(LabError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn fourier_terms() {
        let t = parse_fourier_json(r#"[{"axis":0,"harmonic":1,"cos":1.0,"sin":0.0},{"axis":1,"harmonic":1,"cos":0.0,"sin":1.0}]"#).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].axis, 1);
        assert!(parse_fourier_json(r#"[{"axis":0,"harmonic":1,"cos":1.0}]"#).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig::from_json(r#"{"knot":"torus:2,3","eps":0.2,"grid":[8,8,2]}"#).unwrap();
        assert_eq!(file.seed, 0);
        let o = Overrides { eps: Some(0.3), tolerances: vec![("stokes".into(), 1e-5)], ..Default::default() };
        let c = file.apply(&o).unwrap();
        assert_eq!((c.knot.as_str(), c.eps, c.grid), ("torus:2,3", 0.3, [8, 8, 2]));
        assert_eq!(c.tolerances.stokes, 1e-5);
        assert!(RunConfig::from_json(r#"{"colour":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let ok = RunConfig::default();
        ok.validate().unwrap();
        for c in [
            RunConfig { grid: [1, 8, 8], ..ok.clone() },
            RunConfig { r_range: [0.0, 1.0], ..ok.clone() },
            RunConfig { r_range: [2.0, 1.0], ..ok.clone() },
            RunConfig { eps: 1.0, ..ok.clone() },
            RunConfig { eps: 0.0, ..ok.clone() },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(Tiers::default().set("nope", 1.0).is_err());
        assert!(Tiers::default().set("exact", -1.0).is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_grid("8,8,4").unwrap(), [8, 8, 4]);
        assert_eq!(parse_grid("8x16x2").unwrap(), [8, 16, 2]);
        assert!(parse_grid("8,8").is_err());
        assert_eq!(parse_range("0.5, 2").unwrap(), [0.5, 2.0]);
        assert_eq!(parse_tier("exact=1e-8").unwrap(), ("exact".to_string(), 1e-8));
    }
}
