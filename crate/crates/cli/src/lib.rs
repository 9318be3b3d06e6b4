//! Experiment harness: JSON configs, named function generators, runners for
//! each experiment and tidy CSV output with a JSON manifest.

pub mod config;
pub mod functions;
pub mod runs;
pub mod table;

pub use config::{Experiment, ExperimentConfig};
pub use runs::run;
pub use table::{emit_plot_data, Manifest, Row, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("geometric construction failed: {0}")]
    Geometric(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 1 I/O, 2 config, 3 numerical (uncertified LP), 4 geometric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Geometric(_) => 4,
        }
    }

    pub fn context(self, case: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{case}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{case}: {m}")),
            CliError::Geometric(m) => CliError::Geometric(format!("{case}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{case}: {m}")),
        }
    }
}

impl From<hardy_sobolev::Error> for CliError {
    fn from(e: hardy_sobolev::Error) -> Self {
        use hardy_sobolev::Error as E;
        match &e {
            _ if e.is_geometric() => CliError::Geometric(e.to_string()),
            E::Io(m) => CliError::Io(m.clone()),
            E::Parameter(_) | E::Format(_) | E::Unsupported(_) | E::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Exit code for a finished table: rows flagged `uncertified` or `failed`
/// give 3, rows flagged `geometric` give 4, otherwise 0.
pub fn table_exit_code(table: &Table) -> i32 {
    if table.rows.iter().any(|r| r.status.starts_with("geometric")) {
        4
    } else if table.rows.iter().any(|r| r.status == "uncertified" || r.status.starts_with("failed")) {
        3
    } else {
        0
    }
}
