//! Configuration, verification suites and reports for the `conifold-lab` CLI.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use config::{Overrides, RunConfig};
pub use error::LabError;
pub use report::{Record, Report};

/// Worker count from `CONIFOLD_LAB_THREADS`; `None` lets rayon decide.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, LabError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(LabError::Config(format!("CONIFOLD_LAB_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_cap_parsing() {
        assert_eq!(thread_cap(None).unwrap(), None);
        assert_eq!(thread_cap(Some("3")).unwrap(), Some(3));
        assert!(thread_cap(Some("0")).is_err());
        assert!(thread_cap(Some("many")).is_err());
    }
}
