//! Configuration-driven front end for `nsit-core`.
//!
//! [`run`] executes one [`config::RunConfig`] and writes its output files;
//! the `nsit` binary wraps it with argument parsing and exit codes.

pub mod config;
pub mod error;
pub mod output;
pub mod tasks;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{parse_config, Format, RunConfig};
pub use error::CliError;

pub const TOOL_NAME: &str = "nsit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn metadata(cfg: &RunConfig, out: &tasks::TaskOutput) -> Value {
    let p = cfg.system_params();
    json!({
        "tool": TOOL_NAME,
        "version": VERSION,
        "task": cfg.task.kind.label(),
        "mode": cfg.mode().label(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "resolved_params": {
            "gamma_e": p.gamma_e,
            "gamma_s": p.gamma_s,
            "gamma_k": p.gamma_k,
            "omega_c_re": p.omega_c_rabi.re,
            "omega_c_im": p.omega_c_rabi.im,
            "omega_p_rabi": p.omega_p_rabi,
            "j_exchange": p.j_exchange,
            "gyro_s": p.gyro_s,
            "gyro_k": p.gyro_k,
            "b_tilde": p.b_tilde,
            "eta": p.eta,
            "gamma0_hz": p.gamma0_hz,
            "source_scale": p.source_scale,
        },
        "grid": out.grid.as_ref().map(output::grid_json),
        "columns": out.table.columns,
        "summary": out.summary,
    })
}

/// Runs `cfg` and writes its output under `out_dir`. `format` overrides the
/// config's format.
pub fn run(cfg: &RunConfig, out_dir: &Path, format: Option<Format>) -> Result<RunReport, CliError> {
    let out = tasks::run_task(cfg)?;
    let stem = cfg.output_stem();
    let mut files = output::write_output(
        out_dir,
        &stem,
        format.unwrap_or(cfg.task.format),
        &out.table,
        &metadata(cfg, &out),
    )?;
    for (suffix, text) in &out.extra {
        let path = out_dir.join(format!("{stem}.{suffix}"));
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    if let Some(message) = out.failure {
        return Err(CliError::Check {
            task: cfg.task.kind.label().to_string(),
            message,
        });
    }
    Ok(RunReport {
        files,
        messages: out.messages,
    })
}
