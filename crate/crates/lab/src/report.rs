//! Schema-versioned JSON reports.

use crate::config::RunConfig;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
    /// Only finiteness is checked; the bound is ignored.
    #[serde(rename = "finite")]
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub name: String,
    pub anchor: String,
    /// Non-finite values serialize as null.
    pub measured: f64,
    pub comparison: Comparison,
    pub bound: f64,
    pub pass: bool,
    pub samples: usize,
    pub excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    pub fn new(suite: &str, name: &str, anchor: &str, measured: f64, comparison: Comparison, bound: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => measured <= bound,
            Comparison::AtLeast => measured >= bound,
            Comparison::Above => measured > bound,
            Comparison::Finite => measured.is_finite(),
        };
        Self {
            suite: suite.into(),
            name: name.into(),
            anchor: anchor.into(),
            measured,
            comparison,
            bound,
            pass,
            samples: 0,
            excluded: 0,
            note: None,
        }
    }

    pub fn samples(mut self, samples: usize, excluded: usize) -> Self {
        self.samples = samples;
        self.excluded = excluded;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Force a failure, e.g. when a side condition such as connectivity breaks.
    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub excluded: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, records: Vec<Record>) -> Self {
        let excluded = records.iter().map(|r| r.excluded).sum();
        let pass = records.iter().all(|r| r.pass);
        // the output path is not part of the result
        let config = RunConfig { output: None, ..config.clone() };
        Self { schema_version: SCHEMA_VERSION, command: command.into(), config, records, excluded, pass, wall_time_s: None }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
