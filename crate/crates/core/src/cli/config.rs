//! Run configuration: a JSON object with a `command` tag, a few common keys
//! and the lattice, packet and scatterer objects of the chosen experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::PairGeometry;
use crate::model::LatticeSpec;
use crate::propagate::Method;
use crate::smatrix::{KernelC, ScattererSpec};
use crate::wavepacket::{Dispersion, Envelope, PacketSpec};

use super::CliError;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub experiment: Experiment,
}

/// Keys shared by every command.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Common {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    out: Option<PathBuf>,
}

const COMMON_KEYS: [&str; 3] = ["seed", "format", "out"];

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let value: Value = serde_path_to_error::deserialize(&mut de).map_err(schema)?;
        let Value::Object(mut all) = value else {
            return Err(CliError::Schema {
                path: ".".into(),
                message: "configuration must be a JSON object".into(),
            });
        };
        let mut common = Map::new();
        for key in COMMON_KEYS {
            if let Some(v) = all.remove(key) {
                common.insert(key.into(), v);
            }
        }
        let common: Common = serde_path_to_error::deserialize(Value::Object(common)).map_err(schema)?;
        let experiment = Experiment::from_object(all)?;
        Ok(Self {
            seed: common.seed.unwrap_or(DEFAULT_SEED),
            format: common.format,
            out: common.out,
            experiment,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn command(&self) -> &'static str {
        self.experiment.command()
    }
}

fn schema(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    CliError::Schema {
        path,
        message: e.into_inner().to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Groundstate(GroundstateJob),
    Commutator(CommutatorJob),
    Scatter(ScatterJob),
    FluorescenceScan(FluorescenceJob),
    ClusterCheck(ClusterJob),
    Smatrix(SmatrixJob),
    DecayFit(DecayFitJob),
}

impl Experiment {
    pub const COMMANDS: [&'static str; 7] = [
        "groundstate",
        "commutator",
        "scatter",
        "fluorescence-scan",
        "cluster-check",
        "smatrix",
        "decay-fit",
    ];

    /// Reads the `command` tag, then the job with full field paths in errors.
    fn from_object(mut all: Map<String, Value>) -> Result<Self, CliError> {
        let command = match all.remove("command") {
            Some(Value::String(c)) => c,
            Some(_) => {
                return Err(CliError::Schema {
                    path: "command".into(),
                    message: "must be a string".into(),
                })
            }
            None => {
                return Err(CliError::Schema {
                    path: "command".into(),
                    message: format!("missing; expected one of {}", Self::COMMANDS.join(", ")),
                })
            }
        };
        let body = Value::Object(all);
        fn job<J: serde::de::DeserializeOwned>(v: Value) -> Result<J, CliError> {
            serde_path_to_error::deserialize(v).map_err(schema)
        }
        Ok(match command.as_str() {
            "groundstate" => Experiment::Groundstate(job(body)?),
            "commutator" => Experiment::Commutator(job(body)?),
            "scatter" => Experiment::Scatter(job(body)?),
            "fluorescence-scan" => Experiment::FluorescenceScan(job(body)?),
            "cluster-check" => Experiment::ClusterCheck(job(body)?),
            "smatrix" => Experiment::Smatrix(job(body)?),
            "decay-fit" => Experiment::DecayFit(job(body)?),
            other => {
                return Err(CliError::Schema {
                    path: "command".into(),
                    message: format!("unknown command `{other}`; expected one of {}", Self::COMMANDS.join(", ")),
                })
            }
        })
    }

    pub fn command(&self) -> &'static str {
        match self {
            Experiment::Groundstate(_) => "groundstate",
            Experiment::Commutator(_) => "commutator",
            Experiment::Scatter(_) => "scatter",
            Experiment::FluorescenceScan(_) => "fluorescence-scan",
            Experiment::ClusterCheck(_) => "cluster-check",
            Experiment::Smatrix(_) => "smatrix",
            Experiment::DecayFit(_) => "decay-fit",
        }
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

fn default_widths() -> f64 {
    5.0
}

fn default_width_factor() -> f64 {
    3.0
}

fn default_tol() -> f64 {
    1e-13
}

fn default_dt_report() -> f64 {
    5.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundstateJob {
    pub lattice: LatticeSpec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorJob {
    pub first: Envelope<f64>,
    pub second: Envelope<f64>,
    pub dispersion: Dispersion<f64>,
    /// Time difference `t − t′`.
    pub t: f64,
    /// Positions `x̄ − ȳ`.
    pub x: Range,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub t_plus: f64,
    #[serde(default = "default_dt_report")]
    pub dt_report: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_method() -> Method {
    Method::Chebyshev
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterJob {
    pub lattice: LatticeSpec<f64>,
    pub packets: Vec<PacketSpec<f64>>,
    pub plan: Plan,
    #[serde(default = "default_widths")]
    pub support_widths: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluorescenceJob {
    pub lattice: LatticeSpec<f64>,
    pub geometry: PairGeometry<f64>,
    pub ls: Vec<f64>,
    /// Half-width of the input band in units of the packet energy spread.
    #[serde(default = "default_width_factor")]
    pub width_factor: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_widths")]
    pub support_widths: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterJob {
    pub lattice: LatticeSpec<f64>,
    pub geometry: PairGeometry<f64>,
    pub ls: Vec<f64>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_widths")]
    pub support_widths: f64,
}

/// Two Lorentzian packets on the continuum line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumPackets {
    pub k1: f64,
    pub k2: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionJob {
    #[serde(default)]
    pub kernel: KernelC<f64>,
    pub packets: ContinuumPackets,
    pub l: f64,
    pub mu: usize,
    pub nu: usize,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmatrixJob {
    pub scatterer: ScattererSpec<f64>,
    pub k: Range,
    #[serde(default)]
    pub wavefunction: Option<WavefunctionJob>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub center: f64,
    pub scale: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFitJob {
    pub scatterer: ScattererSpec<f64>,
    #[serde(default)]
    pub kernel: KernelC<f64>,
    pub packets: ContinuumPackets,
    pub mu: usize,
    pub nu: usize,
    pub ls: Range,
    pub grid: GridSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled_in() {
        let c = RunConfig::from_json(
            r#"{"command": "smatrix", "scatterer": {"M": 1, "M_prime": 1, "E": [0.0], "E_tilde": [1.0], "g": [[0.1]]},
                "k": {"start": 0.0, "stop": 2.0, "count": 5}}"#,
        )
        .unwrap();
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.command(), "smatrix");
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["command"], "smatrix");
        assert!(v["wavefunction"].is_null());
    }

    #[test]
    fn errors_carry_the_field_path() {
        let e = RunConfig::from_json(r#"{"command": "groundstate", "lattice": {"L": 5, "epsilon": "one"}}"#).unwrap_err();
        match e {
            CliError::Schema { path, .. } => assert_eq!(path, "lattice.epsilon"),
            other => panic!("{other}"),
        }
        let e = RunConfig::from_json(r#"{"seed": -1, "command": "groundstate"}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::from_json("[1, 2]").is_err());
        assert!(RunConfig::from_json(r#"{"lattice": {}}"#).is_err());
    }

    #[test]
    fn ranges_include_both_ends() {
        let r = Range { start: 1.0, stop: 2.0, count: 5 };
        assert_eq!(r.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(Range { count: 1, ..r }.values(), vec![1.0]);
    }
}
