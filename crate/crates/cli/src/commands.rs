use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use retarded_core::validation::{
    fd_derivative_oracle, gamma_identity_oracle, uniform_motion_oracle, OracleReport, PairConfig,
};
use retarded_core::{inspect, run, CouplingForm, Exec, RunError};

use crate::config::Scenario;
use crate::output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_ORACLE_FAILURE: u8 = 3;

pub const UNIFORM_BETAS: [f64; 4] = [0.0, 0.1, 0.5, 0.9];
pub const UNIFORM_DISTANCES: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
pub const GAMMA_SAMPLES: usize = 1000;
pub const GAMMA_SEED: u64 = 0x5eed;

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    match workers {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| e.to_string())?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    Ok(f())
}

pub fn cmd_run(config: &Path, workers: Option<usize>, out: Option<PathBuf>) -> ExitCode {
    let scenario = match Scenario::load(config) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if workers == Some(0) {
        return fail("--workers must be at least 1");
    }
    let history = match scenario.initial_history() {
        Ok(h) => h,
        Err(e) => return fail(e),
    };
    let mut cfg = scenario.config.clone();
    if workers == Some(1) {
        cfg.run.exec = Exec::Sequential;
    }
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    let started = Instant::now();
    let result = match with_workers(workers, || run(history, &cfg.run)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let result = match result {
        Ok(r) => r,
        Err(RunError::InvalidInitial(msg)) => {
            eprintln!("t = 0 is a singular point: {msg}");
            return ExitCode::from(EXIT_SINGULAR);
        }
        Err(e) => return fail(e),
    };
    let wall = started.elapsed().as_secs_f64();
    if let Err(e) = output::write_run(&dir, &cfg, &result, wall, workers) {
        return fail(format!("writing {}: {e}", dir.display()));
    }
    println!(
        "terminator: {}  T_max = {}  ({} windows, {:.3} s) -> {}",
        serde_json::to_string(&result.terminator).unwrap_or_default(),
        result.t_max,
        result.windows.len(),
        wall,
        dir.display()
    );
    if result.terminator.is_completed() {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_SINGULAR)
    }
}

/// Oracle suites by name.
pub fn suite(name: &str, form: CouplingForm) -> Option<Vec<OracleReport>> {
    let derivative = || {
        [
            PairConfig::static_pair(),
            PairConfig::slow_circular_observer(),
            PairConfig::circling_pair(),
        ]
        .iter()
        .map(|c| fd_derivative_oracle(c, form))
        .collect::<Vec<_>>()
    };
    let uniform = || {
        UNIFORM_BETAS
            .iter()
            .map(|&b| uniform_motion_oracle(b, &UNIFORM_DISTANCES))
            .collect::<Vec<_>>()
    };
    let gamma = || vec![gamma_identity_oracle(GAMMA_SAMPLES, GAMMA_SEED)];
    Some(match name {
        "derivative" => derivative(),
        "uniform" => uniform(),
        "gamma" => gamma(),
        "all" => {
            let mut all = derivative();
            all.extend(uniform());
            all.extend(gamma());
            all
        }
        _ => return None,
    })
}

fn report_file_name(name: &str) -> String {
    let stem: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("oracle_{stem}.json")
}

pub fn cmd_validate(name: &str, out: &Path, form: CouplingForm) -> ExitCode {
    let Some(reports) = suite(name, form) else {
        return fail(format!(
            "unknown suite '{name}' (expected derivative, uniform, gamma or all)"
        ));
    };
    if let Err(e) = fs::create_dir_all(out) {
        return fail(format!("{}: {e}", out.display()));
    }
    let mut all_passed = true;
    for r in &reports {
        let path = out.join(report_file_name(&r.name));
        if let Err(e) = output::write_json(&path, r) {
            return fail(format!("{}: {e}", path.display()));
        }
        all_passed &= r.passed;
        let extra = if r.passing_forms.is_empty() {
            String::new()
        } else {
            format!("  (coupling forms passing: {})", r.passing_forms.join(", "))
        };
        println!("{} {}{extra}", if r.passed { "PASS" } else { "FAIL" }, r.name);
    }
    if all_passed {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_ORACLE_FAILURE)
    }
}

pub fn cmd_inspect(config: &Path) -> ExitCode {
    let scenario = match Scenario::load(config) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let history = match scenario.initial_history() {
        Ok(h) => h,
        Err(e) => return fail(e),
    };
    let report = match inspect(&history, &scenario.config.run) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let labels: Vec<&str> = scenario.config.charges.iter().map(|c| c.label.as_str()).collect();
    println!("t = {}  (l_ref = {})", report.t, report.l_ref);
    for &(a, b, d) in &report.pair_distances {
        println!("  |r_{} - r_{}| = {}", labels[a], labels[b], output::fmt_f64(d));
    }
    for (j, det) in report.det_phi.iter().enumerate() {
        println!("  det Phi[{}] = {}", labels[j], output::fmt_f64(*det));
    }
    for (j, v) in report.speeds.iter().enumerate() {
        println!("  |v_{}| = {}", labels[j], output::fmt_f64(*v));
    }
    println!("{}", report.verdict);
    if report.nonsingular {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_SINGULAR)
    }
}
