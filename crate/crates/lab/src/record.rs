//! Experiment results and their files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::LabError;

/// Numeric table with named columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize, LabError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LabError::Config(format!("table has no column '{name}'")))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), LabError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, LabError> {
        let mut r = csv::Reader::from_path(path)?;
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = vec![];
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| LabError::Config(format!("non-numeric cell '{s}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    /// Whitespace-separated columns under a `#` header line.
    pub fn write_dat(&self, path: &Path) -> Result<(), LabError> {
        let mut text = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            text.push_str(
                &row.iter()
                    .map(|x| format!("{x:.10e}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            text.push('\n');
        }
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    /// Per-sample rows; the first column is the seed.
    #[serde(skip)]
    pub samples: Table,
    pub aggregate: BTreeMap<String, Value>,
    /// Plot-ready panels, one data file each.
    pub panels: BTreeMap<String, Table>,
    pub wall_clock_seconds: f64,
    pub code_version: String,
}

impl ResultRecord {
    pub fn samples_path(dir: &Path, experiment: &str) -> PathBuf {
        dir.join(format!("{experiment}_samples.csv"))
    }

    pub fn aggregate_path(dir: &Path, experiment: &str) -> PathBuf {
        dir.join(format!("{experiment}.json"))
    }

    /// Writes the per-sample CSV and the aggregate JSON into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<(), LabError> {
        std::fs::create_dir_all(dir)?;
        self.samples
            .write_csv(&Self::samples_path(dir, &self.experiment))?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(Self::aggregate_path(dir, &self.experiment), json + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path, experiment: &str) -> Result<Self, LabError> {
        let mut rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(
            Self::aggregate_path(dir, experiment),
        )?)?;
        rec.samples = Table::read_csv(&Self::samples_path(dir, experiment))?;
        Ok(rec)
    }
}

/// One plain-text file per panel, named `<experiment>_<panel>.dat`.
pub fn emit_plot_data(record: &ResultRecord, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    std::fs::create_dir_all(dir)?;
    record
        .panels
        .iter()
        .map(|(name, table)| {
            let path = dir.join(format!("{}_{name}.dat", record.experiment));
            table.write_dat(&path)?;
            Ok(path)
        })
        .collect()
}
