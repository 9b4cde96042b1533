//! Scenario files: a JSON document with run settings, charges and their
//! prescribed pasts, and output options. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use retarded_core::{ChargeSpec, HistoryOptions, PastSpec, PastTable, RunConfig, TrajectoryHistory, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub run: RunConfig,
    pub charges: Vec<ChargeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeConfig {
    pub label: String,
    pub q: f64,
    pub m0: f64,
    pub past: PastConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PastConfig {
    Rest {
        r0: [f64; 3],
    },
    Uniform {
        r0: [f64; 3],
        v: [f64; 3],
    },
    Circular {
        center: [f64; 3],
        radius: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// CSV with header `t,charge,rx,ry,rz,vx,vy,vz`; rows are selected by
    /// charge label. Relative paths resolve against the scenario file.
    Table {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every `stride`-th committed grid time (the last one always).
    pub stride: usize,
    pub diagnostics: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stride: 1,
            diagnostics: true,
        }
    }
}

/// Rows `(t, r, v)` of one charge.
type TableRows = Vec<(f64, Vec3, Vec3)>;

#[derive(Debug, Deserialize)]
struct TableRow {
    t: f64,
    charge: String,
    rx: f64,
    ry: f64,
    rz: f64,
    vx: f64,
    vy: f64,
    vz: f64,
}

/// A parsed scenario together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let config = parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base_dir })
    }

    /// Builds the initial history (frontier `t = 0`).
    pub fn initial_history(&self) -> Result<TrajectoryHistory, ConfigError> {
        let cfg = &self.config;
        let c = retarded_core::Constants::from(cfg.run.units).c;
        let mut tables: BTreeMap<PathBuf, BTreeMap<String, TableRows>> = BTreeMap::new();
        let mut charges = Vec::with_capacity(cfg.charges.len());
        let mut pasts = Vec::with_capacity(cfg.charges.len());
        for ch in &cfg.charges {
            charges.push(ChargeSpec::new(ch.label.clone(), ch.q, ch.m0));
            let past = match &ch.past {
                PastConfig::Rest { r0 } => PastSpec::Rest { r0: Vec3::from(*r0) },
                PastConfig::Uniform { r0, v } => PastSpec::Uniform {
                    r0: Vec3::from(*r0),
                    v: Vec3::from(*v),
                },
                PastConfig::Circular {
                    center,
                    radius,
                    omega,
                    phase,
                } => PastSpec::Circular {
                    center: Vec3::from(*center),
                    radius: *radius,
                    omega: *omega,
                    phase: *phase,
                },
                PastConfig::Table { path } => {
                    let full = self.base_dir.join(path);
                    if !tables.contains_key(&full) {
                        tables.insert(full.clone(), read_table(&full)?);
                    }
                    let rows = tables[&full]
                        .get(&ch.label)
                        .cloned()
                        .ok_or_else(|| ConfigError(format!("{}: no rows for charge '{}'", full.display(), ch.label)))?;
                    let table = PastTable::new(rows)
                        .map_err(|e| ConfigError(format!("{} (charge '{}'): {e}", full.display(), ch.label)))?;
                    PastSpec::Table(table)
                }
            };
            pasts.push(past);
        }
        let mut opts = HistoryOptions::new(c);
        opts.v_cap = cfg.run.v_cap;
        TrajectoryHistory::make_initial(charges, pasts, opts).map_err(|e| ConfigError(e.to_string()))
    }
}

/// Parses a scenario, reporting the offending field path and position.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError(format!("at `{path}`: {inner}"))
    })?;
    if cfg.output.stride == 0 {
        return Err(ConfigError("at `output.stride`: must be at least 1".into()));
    }
    Ok(cfg)
}

fn read_table(path: &Path) -> Result<BTreeMap<String, TableRows>, ConfigError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let mut out: BTreeMap<String, TableRows> = BTreeMap::new();
    for row in rdr.deserialize::<TableRow>() {
        let row = row.map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        out.entry(row.charge).or_default().push((
            row.t,
            Vec3::new(row.rx, row.ry, row.rz),
            Vec3::new(row.vx, row.vy, row.vz),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "charges": [
            {"label": "e", "q": 1.0, "m0": 1.0, "past": {"kind": "rest", "r0": [0, 0, 0]}}
        ]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.run, RunConfig::default());
        assert_eq!(cfg.output, OutputConfig::default());
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let text = MINIMAL.replace("\"m0\": 1.0", "\"m0\": 1.0, \"mass\": 2");
        let err = parse(&text).unwrap_err().0;
        assert!(err.contains("charges[0]") && err.contains("mass"), "{err}");
    }

    #[test]
    fn missing_mass_reported() {
        let text = MINIMAL.replace(", \"m0\": 1.0", "");
        let err = parse(&text).unwrap_err().0;
        assert!(err.contains("m0"), "{err}");
    }

    #[test]
    fn run_section_is_strict() {
        let text = MINIMAL.replacen('{', r#"{"run": {"inner_stp": 0.1},"#, 1);
        assert!(parse(&text).unwrap_err().0.contains("inner_stp"));
    }

    #[test]
    fn past_kinds_parse() {
        let text = r#"{"charges": [
            {"label": "a", "q": 1, "m0": 1, "past": {"kind": "uniform", "r0": [0,0,0], "v": [0.1,0,0]}},
            {"label": "b", "q": 1, "m0": 1, "past": {"kind": "circular", "center": [1,0,0], "radius": 0.1, "omega": 1}},
            {"label": "c", "q": 1, "m0": 1, "past": {"kind": "table", "path": "p.csv"}}
        ], "run": {"coupling_form": "paper_literal", "exec": "sequential"}}"#;
        let cfg = parse(text).unwrap();
        assert!(matches!(cfg.charges[1].past, PastConfig::Circular { phase, .. } if phase == 0.0));
        assert_eq!(cfg.run.coupling_form, retarded_core::CouplingForm::PaperLiteral);
    }
}
