//! Run artifacts. Floats in CSV files are written with 17 significant
//! digits so reruns can be compared byte for byte.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use retarded_core::RunResult;
use serde::Serialize;

use crate::config::ScenarioConfig;

pub const TRAJECTORY_HEADER: [&str; 11] = ["t", "charge", "rx", "ry", "rz", "vx", "vy", "vz", "ax", "ay", "az"];
pub const DIAGNOSTICS_HEADER: [&str; 7] = [
    "t",
    "charge",
    "det_phi",
    "min_rho",
    "speed",
    "picard_iters",
    "contraction_ratio",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_trajectory(path: &Path, result: &RunResult, stride: usize) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    let samples = result.history.committed();
    let labels: Vec<&str> = result.history.charges().iter().map(|c| c.label.as_str()).collect();
    let last = samples.len().saturating_sub(1);
    for (i, s) in samples.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        for (j, (st, a)) in s.states.iter().zip(&s.acc).enumerate() {
            let mut rec = vec![fmt_f64(s.t), labels[j].to_string()];
            rec.extend(st.r.iter().chain(st.v.iter()).chain(a.iter()).map(|x| fmt_f64(*x)));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()
}

pub fn write_diagnostics(path: &Path, result: &RunResult) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(DIAGNOSTICS_HEADER).map_err(csv_err)?;
    let labels: Vec<&str> = result.history.charges().iter().map(|c| c.label.as_str()).collect();
    for d in &result.steps {
        w.write_record([
            fmt_f64(d.t),
            labels[d.charge].to_string(),
            fmt_f64(d.det_phi),
            fmt_f64(d.min_rho),
            fmt_f64(d.speed),
            d.picard_iters.to_string(),
            fmt_f64(d.contraction_ratio),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_events(path: &Path, result: &RunResult) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in &result.events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub terminator: &'a retarded_core::Terminator,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub wall_time_s: f64,
    pub coupling_form: &'static str,
    pub committed_samples: usize,
    pub windows: usize,
    pub max_lc_residual: f64,
    pub max_momentum_residual: f64,
    pub workers: Option<usize>,
    pub config: &'a ScenarioConfig,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

/// Writes all artifacts of a finished run into `dir`.
pub fn write_run(
    dir: &Path,
    cfg: &ScenarioConfig,
    result: &RunResult,
    wall_time_s: f64,
    workers: Option<usize>,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_trajectory(&dir.join("trajectory.csv"), result, cfg.output.stride)?;
    if cfg.output.diagnostics {
        write_diagnostics(&dir.join("diagnostics.csv"), result)?;
    }
    write_events(&dir.join("events.jsonl"), result)?;
    let summary = Summary {
        terminator: &result.terminator,
        t_max: result.t_max,
        wall_time_s,
        coupling_form: result.coupling_form.as_str(),
        committed_samples: result.history.committed().len(),
        windows: result.windows.len(),
        max_lc_residual: result.max_lc_residual,
        max_momentum_residual: result.max_momentum_residual,
        workers,
        config: cfg,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}
