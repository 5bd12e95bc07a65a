//! Tables, manifest and plot script.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::Format;
use super::CliError;

/// Version string baked in at build time (`git describe` when available).
pub const VERSION: &str = env!("WQED_VERSION");

/// A column-oriented data table; every column carries a unit.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> Vec<String> {
        self.columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect()
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf, CliError> {
        let path = dir.join(self.file_name(format));
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
                w.write_record(self.header()).map_err(|e| csv_io(&path, e))?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_io(&path, e))?;
                }
                w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
            }
            Format::Json => {
                let header = self.header();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> = header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.clone(), serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number)))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                write_json(&path, &rows)?;
            }
        }
        Ok(path)
    }
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    let _kind = std::io::ErrorKind::Other;
    CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub version: &'static str,
    pub command: &'static str,
    pub threads: usize,
    pub config: &'a C,
    pub files: Vec<String>,
}

/// Gnuplot script over whichever of the known tables a run produced.
pub fn plot_script(tables: &[&Table]) -> String {
    let mut s = String::from(
        "# gnuplot script generated by wqed; run with `gnuplot plots.gp`\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 800,560\n",
    );
    for t in tables {
        let file = format!("{}.csv", t.name);
        match t.name {
            "cloud" => {
                s += &format!(
                    "\n# photon cloud of the ground state, density per site\n\
                     set output 'cloud.png'\n\
                     set logscale y\n\
                     set xlabel 'x [sites]'\n\
                     set ylabel '<a_x^+ a_x>'\n\
                     plot '{file}' using 1:2 with linespoints pt 7\n\
                     unset logscale y\n"
                );
            }
            "fluorescence" => {
                s += &format!(
                    "\n# fluorescence against packet separation\n\
                     set output 'fluorescence.png'\n\
                     set xlabel 'l [sites]'\n\
                     set ylabel 'F'\n\
                     plot '{file}' using 1:2 with linespoints pt 7\n"
                );
            }
            "continuum_fluorescence" => {
                s += &format!(
                    "\nset output 'continuum_fluorescence.png'\n\
                     set logscale y\n\
                     set xlabel 'l [1/c]'\n\
                     set ylabel 'F'\n\
                     plot '{file}' using 1:2 with lines\n\
                     unset logscale y\n"
                );
            }
            "commutator" => {
                s += &format!(
                    "\nset output 'commutator.png'\n\
                     set logscale y\n\
                     set xlabel 'd_c [length]'\n\
                     set ylabel '|I|'\n\
                     plot '{file}' using 2:5 with lines\n\
                     unset logscale y\n"
                );
            }
            "cluster" => {
                s += &format!(
                    "\nset output 'cluster.png'\n\
                     set logscale y\n\
                     set xlabel 'l [sites]'\n\
                     set ylabel 'deviation'\n\
                     plot '{file}' using 1:6 with linespoints pt 7\n\
                     unset logscale y\n"
                );
            }
            _ => {}
        }
    }
    s
}
