use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// One observation: a metric of one case at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub case: String,
    /// Resolution, radius, `h_min`, … as named by the table.
    pub parameter: f64,
    pub metric: String,
    pub value: f64,
    /// Relative duality gap of the solve behind the value, if any.
    pub gap: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn ok(case: impl Into<String>, parameter: f64, metric: impl Into<String>, value: f64) -> Self {
        Row { case: case.into(), parameter, metric: metric.into(), value, gap: None, status: "ok".into() }
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = Some(gap);
        self
    }

    pub fn with_status(mut self, status: impl Into<String>) -> Self {
        self.status = status.into();
        self
    }
}

/// Long-format result table with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub experiment: String,
    /// What `parameter` means in this table.
    pub parameter: String,
    pub config_hash: String,
    pub version: String,
    pub rows: Vec<Row>,
}

pub const COLUMNS: [&str; 9] =
    ["experiment", "case", "parameter", "metric", "value", "gap", "status", "config_hash", "version"];

impl Table {
    pub fn new(experiment: &str, parameter: &str, config_hash: &str) -> Self {
        Table {
            experiment: experiment.into(),
            parameter: parameter.into(),
            config_hash: config_hash.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rows: Vec::new(),
        }
    }

    /// Rows with the given metric, in order.
    pub fn metric<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS).map_err(io)?;
        for r in &self.rows {
            // `{:?}` prints the shortest string that parses back exactly
            w.write_record([
                self.experiment.clone(),
                r.case.clone(),
                format!("{:?}", r.parameter),
                r.metric.clone(),
                format!("{:?}", r.value),
                r.gap.map_or(String::new(), |g| format!("{g:?}")),
                r.status.clone(),
                self.config_hash.clone(),
                self.version.clone(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub x: String,
    pub y: String,
    pub series: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Bumped every time the same output path is rewritten.
    pub version: u64,
    pub experiment: String,
    pub kind: String,
    pub csv: String,
    pub columns: Vec<String>,
    pub axes: Axes,
    pub x_label: String,
    pub rows: usize,
    pub config_hash: String,
    pub crate_version: String,
}

/// Writes `<dir>/<kind>.csv` and `<dir>/<kind>.manifest.json`. Existing files
/// are overwritten and the manifest version goes up by one.
pub fn emit_plot_data(table: &Table, kind: &str, dir: &Path) -> Result<Manifest, CliError> {
    if kind.is_empty() || kind.contains(['/', '\\']) {
        return Err(CliError::Config(format!("bad output kind '{kind}'")));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let csv_path = dir.join(format!("{kind}.csv"));
    let manifest_path: PathBuf = dir.join(format!("{kind}.manifest.json"));
    let previous = fs::read_to_string(&manifest_path)
        .ok()
        .and_then(|t| serde_json::from_str::<Manifest>(&t).ok())
        .map_or(0, |m| m.version);
    let file = fs::File::create(&csv_path).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    table.write_csv(std::io::BufWriter::new(file))?;
    let manifest = Manifest {
        version: previous + 1,
        experiment: table.experiment.clone(),
        kind: kind.into(),
        csv: format!("{kind}.csv"),
        columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
        axes: Axes { x: "parameter".into(), y: "value".into(), series: vec!["case".into(), "metric".into()] },
        x_label: table.parameter.clone(),
        rows: table.rows.len(),
        config_hash: table.config_hash.clone(),
        crate_version: table.version.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
    fs::write(&manifest_path, text).map_err(|e| CliError::Io(format!("{}: {e}", manifest_path.display())))?;
    Ok(manifest)
}
