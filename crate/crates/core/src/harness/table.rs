use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // Display prints the shortest representation that round-trips.
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// Rectangular result table with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub config_hash: String,
    pub master_seed: u64,
}

impl ResultTable {
    pub fn new(experiment: &str, columns: &[&str], config_hash: String, master_seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            config_hash,
            master_seed,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column (text cells are skipped).
    pub fn float_column(&self, name: &str) -> Vec<f64> {
        let Some(idx) = self.column_index(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match &r[idx] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// `#`-prefixed provenance lines followed by an RFC 4180 body.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!(
            "# widesense {}\n# experiment={} config_hash={} master_seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            self.config_hash,
            self.master_seed
        );
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|c| c.to_string()))?;
        }
        let body = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Config hash recorded in the provenance header of an existing output.
pub fn read_config_hash(path: &Path) -> Result<Option<String>> {
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines().take(4) {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        if let Some(hash) = line.split_whitespace().find_map(|t| t.strip_prefix("config_hash=")) {
            return Ok(Some(hash.to_owned()));
        }
    }
    Ok(None)
}

/// Writes `table` to `path`, refusing to replace a file produced by a
/// different configuration unless `force` is set.
pub fn write_output(table: &ResultTable, path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        let existing = read_config_hash(path).unwrap_or(None);
        if existing.as_deref() != Some(table.config_hash.as_str()) {
            return Err(Error::config(format!(
                "{} exists with config hash {}; pass --force to overwrite",
                path.display(),
                existing.as_deref().unwrap_or("<none>")
            )));
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(table.to_csv()?.as_bytes())?;
    Ok(())
}
