//! Task runners. Each produces a table plus metadata; writing is left to the caller.

use nsit_core::analysis::slope::slopes;
use nsit_core::analysis::{
    measure_feature, relative_phase, scan_spectrum_with, sweep_feature, FeatureKind, FeatureScan, GridSpec, Mode,
    Normalization, ScanOptions, SweepVariable,
};
use nsit_core::decomposition::background_width;
use nsit_core::dynamics::{integrate_trajectory, write_trajectory_csv};
use nsit_core::{doppler_width, nsit_center, nsit_width, steady_state, SystemParams, TrajectoryConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, TaskKind};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Largest relative deviation accepted by the oracle check.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    pub table: Table,
    pub grid: Option<GridSpec>,
    /// Task-specific scalars recorded in the metadata.
    pub summary: Value,
    /// Additional files as (suffix, contents), written next to the main output.
    pub extra: Vec<(String, String)>,
    /// Lines for stdout.
    pub messages: Vec<String>,
    /// Set when the task ran but its check did not pass.
    pub failure: Option<String>,
}

pub fn run_task(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let label = cfg.task.kind.label();
    let wrap = |e| CliError::compute(label, e);
    match cfg.task.kind {
        TaskKind::Spectrum => spectrum(cfg).map_err(wrap),
        TaskKind::Sweep => Ok(sweep(cfg)),
        TaskKind::Phase => phase(cfg).map_err(wrap),
        TaskKind::Slopes => slope_table(cfg).map_err(wrap),
        TaskKind::OracleCheck => oracle_check(cfg).map_err(wrap),
        TaskKind::DopplerCompare => doppler_compare(cfg).map_err(wrap),
    }
}

fn default_window(cfg: &RunConfig, params: &SystemParams) -> (f64, f64) {
    match cfg.task.window {
        Some([lo, hi]) => (lo, hi),
        None => {
            let w = 3.0 * background_width(params);
            (-w, w)
        }
    }
}

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions {
        normalization: if cfg.task.normalized {
            Normalization::WindowMax
        } else {
            Normalization::None
        },
        ..ScanOptions::default()
    }
}

fn spectrum(cfg: &RunConfig) -> nsit_core::Result<TaskOutput> {
    let params = cfg.system_params();
    let mode = cfg.mode();
    let spec = scan_spectrum_with(&params, default_window(cfg, &params), &mode, &scan_options(cfg))?;
    let decomposed = matches!(mode, Mode::Decomposed);
    let mut cols = vec!["delta_e_gamma0", "absorption_norm", "dispersion_norm"];
    if decomposed {
        cols.extend(["chi1_re", "chi1_im", "chi2_re", "chi2_im", "chi3_re", "chi3_im"]);
    }
    let mut table = Table::new(cols);
    for p in &spec.points {
        let mut row: Vec<Cell> = vec![p.delta_e.into(), p.absorption.into(), p.dispersion.into()];
        if let Some(terms) = p.terms.filter(|_| decomposed) {
            for t in terms {
                row.push(t.re.into());
                row.push(t.im.into());
            }
        }
        table.push(row);
    }
    Ok(TaskOutput {
        table,
        summary: json!({
            "normalization": spec.normalization,
            "normalized": spec.normalized,
            "max_absorption": spec.max_absorption(),
        }),
        grid: Some(spec.grid),
        ..TaskOutput::default()
    })
}

fn feature_scan(cfg: &RunConfig) -> FeatureScan {
    FeatureScan {
        mode: cfg.mode(),
        ..FeatureScan::default()
    }
}

fn sweep(cfg: &RunConfig) -> TaskOutput {
    let s = cfg.sweep.as_ref().expect("validated sweep config has a [sweep] section");
    let params = cfg.system_params();
    let var = SweepVariable::from(s.variable);
    let kind = FeatureKind::from(s.feature);
    // J values are given at full polarization.
    let pol = cfg.polarization_state();
    let factor = if var == SweepVariable::J { (pol.p_a * pol.p_b).sqrt() } else { 1.0 };
    let effective_values: Vec<f64> = s.values.iter().map(|v| v * factor).collect();
    let points = sweep_feature(&params, var, &effective_values, kind, &feature_scan(cfg));
    let mut table = Table::new([
        "value",
        "kind",
        "center_gamma0",
        "fwhm_gamma0",
        "fwhm_hz",
        "amplitude",
        "baseline",
        "mixed",
        "predicted_center_gamma0",
        "predicted_fwhm_gamma0",
        "error",
    ]);
    let mut failures = 0;
    for (value, pt) in s.values.iter().zip(&points) {
        let mut row: Vec<Cell> = vec![(*value).into()];
        match &pt.feature {
            Ok(f) => row.extend([
                f.kind.label().into(),
                f.center.into(),
                f.fwhm.into(),
                f.fwhm_hz(pt.params.gamma0_hz).into(),
                f.amplitude.into(),
                f.baseline.into(),
                f.mixed.into(),
            ]),
            Err(_) => {
                failures += 1;
                row.push("none".into());
                row.extend(std::iter::repeat_n(Cell::Float(f64::NAN), 5));
                row.push(false.into());
            }
        }
        row.push(kind.predicted_center(&pt.params).into());
        row.push(kind.predicted_width(&pt.params).into());
        row.push(pt.feature.as_ref().err().map_or(String::new(), |e| e.to_string()).into());
        table.push(row);
    }
    TaskOutput {
        table,
        summary: json!({
            "variable": var.label(),
            "feature": kind.label(),
            "points": s.values.len(),
            "failed_points": failures,
        }),
        ..TaskOutput::default()
    }
}

/// Parameter sets for the scalar tasks: the swept values if a [sweep]
/// section is present, otherwise the config itself.
fn scalar_points(cfg: &RunConfig) -> Vec<(Option<f64>, SystemParams)> {
    let params = cfg.system_params();
    match &cfg.sweep {
        Some(s) => {
            let var = SweepVariable::from(s.variable);
            let pol = cfg.polarization_state();
            s.values
                .iter()
                .map(|&v| {
                    let v_eff = if var == SweepVariable::J { v * (pol.p_a * pol.p_b).sqrt() } else { v };
                    (Some(v), var.apply(&params, v_eff))
                })
                .collect()
        }
        None => vec![(None, params)],
    }
}

fn value_cell(v: Option<f64>) -> Cell {
    Cell::Float(v.unwrap_or(f64::NAN))
}

fn phase(cfg: &RunConfig) -> nsit_core::Result<TaskOutput> {
    let pts = scalar_points(cfg);
    let phases: Vec<f64> = pts.par_iter().map(|(_, p)| relative_phase(p)).collect::<nsit_core::Result<_>>()?;
    let mut table = Table::new(["value", "b_tilde", "noble_splitting_gamma0", "center_gamma0", "phase_rad"]);
    for ((v, p), phi) in pts.iter().zip(&phases) {
        table.push(vec![value_cell(*v), p.b_tilde.into(), p.noble_splitting().into(), nsit_center(p).into(), (*phi).into()]);
    }
    Ok(TaskOutput {
        table,
        ..TaskOutput::default()
    })
}

fn slope_table(cfg: &RunConfig) -> nsit_core::Result<TaskOutput> {
    let mode = cfg.mode();
    let pts = scalar_points(cfg);
    let reports: Vec<_> = pts.par_iter().map(|(_, p)| slopes(p, &mode)).collect::<nsit_core::Result<_>>()?;
    let mut table = Table::new([
        "value",
        "b_tilde",
        "eit_center_gamma0",
        "eit_slope",
        "nsit_center_gamma0",
        "nsit_slope",
        "group_velocity_ratio",
    ]);
    for ((v, p), r) in pts.iter().zip(&reports) {
        // The ratio compares two distinct features; it is undefined when they coincide.
        let ratio = if p.j_exchange > 0.0 && p.b_tilde != 0.0 { r.ratio() } else { f64::NAN };
        table.push(vec![
            value_cell(*v),
            p.b_tilde.into(),
            r.eit_center.into(),
            r.eit_slope.into(),
            r.nsit_center.into(),
            r.nsit_slope.into(),
            ratio.into(),
        ]);
    }
    Ok(TaskOutput {
        table,
        ..TaskOutput::default()
    })
}

fn oracle_check(cfg: &RunConfig) -> nsit_core::Result<TaskOutput> {
    let params = cfg.system_params();
    let pol = cfg.polarization_state();
    let n = cfg.task.oracle_points;
    let (c, w) = (nsit_center(&params), nsit_width(&params));
    let deltas: Vec<f64> = (0..n)
        .map(|i| if n == 1 { c } else { c + w * (-3.0 + 6.0 * i as f64 / (n - 1) as f64) })
        .collect();
    let base = TrajectoryConfig::default();
    let results: Vec<_> = deltas
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let tc = TrajectoryConfig {
                record: cfg.task.trajectory && i == 0,
                ..base
            };
            let traj = integrate_trajectory(&cfg.params.to_params(), &pol, &tc, d)?;
            let exact = steady_state(&params, d)?;
            Ok((traj, exact))
        })
        .collect::<nsit_core::Result<_>>()?;

    let mut table = Table::new([
        "delta_e_gamma0",
        "rel_dev_x_dp",
        "rel_dev_x_ds",
        "rel_dev_x_nk",
        "max_rel_dev",
        "integrator",
        "t_final",
        "rk_steps",
        "propagator_steps",
    ]);
    let mut worst: f64 = 0.0;
    for (d, (traj, exact)) in deltas.iter().zip(&results) {
        let dev: Vec<f64> = traj
            .state
            .as_array()
            .iter()
            .zip(exact.as_array())
            .map(|(a, b)| if b.norm() == 0.0 { a.norm() } else { (a - b).norm() / b.norm() })
            .collect();
        let m = dev.iter().cloned().fold(0.0, f64::max);
        worst = worst.max(m);
        table.push(vec![
            (*d).into(),
            dev[0].into(),
            dev[1].into(),
            dev[2].into(),
            m.into(),
            format!("{:?}", traj.integrator).to_lowercase().into(),
            traj.t_final.into(),
            traj.rk_steps.into(),
            traj.propagator_steps.into(),
        ]);
    }
    let mut extra = Vec::new();
    if cfg.task.trajectory {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &results[0].0.samples).expect("writing to memory");
        extra.push(("trajectory.csv".to_string(), String::from_utf8(buf).expect("ASCII output")));
    }
    let pass = worst <= ORACLE_TOLERANCE;
    Ok(TaskOutput {
        table,
        summary: json!({ "max_rel_dev": worst, "tolerance": ORACLE_TOLERANCE, "pass": pass }),
        extra,
        messages: vec![format!("max relative deviation: {worst:.3e} (tolerance {ORACLE_TOLERANCE:e})")],
        failure: (!pass).then(|| format!("max relative deviation {worst:e} exceeds {ORACLE_TOLERANCE:e}")),
        ..TaskOutput::default()
    })
}

fn doppler_compare(cfg: &RunConfig) -> nsit_core::Result<TaskOutput> {
    let params = cfg.system_params();
    let hot = match cfg.mode() {
        m @ Mode::Doppler { .. } => m,
        _ => {
            let env = cfg.env.clone().unwrap_or_default();
            Mode::Doppler {
                env: env.to_env(),
                quad_order: env.quad_order,
            }
        }
    };
    let Mode::Doppler { env, .. } = hot else { unreachable!() };
    let window = default_window(cfg, &params);
    let opts = scan_options(cfg);
    let still = scan_spectrum_with(&params, window, &Mode::Exact, &opts)?;
    let moving = scan_spectrum_with(&params, window, &hot, &opts)?;
    let mut table = Table::new([
        "delta_e_gamma0",
        "absorption_still",
        "absorption_doppler",
        "dispersion_still",
        "dispersion_doppler",
    ]);
    let mut worst: f64 = 0.0;
    for (a, b) in still.points.iter().zip(&moving.points) {
        worst = worst.max((a.absorption - b.absorption).abs());
        table.push(vec![a.delta_e.into(), a.absorption.into(), b.absorption.into(), a.dispersion.into(), b.dispersion.into()]);
    }
    let feature = |mode: Mode| measure_feature(&params, FeatureKind::Nsia, &FeatureScan { mode, ..FeatureScan::default() });
    let narrow = match (feature(Mode::Exact), feature(hot)) {
        (Ok(a), Ok(b)) => json!({
            "kind_still": a.kind.label(),
            "kind_doppler": b.kind.label(),
            "fwhm_still_hz": a.fwhm_hz(params.gamma0_hz),
            "fwhm_doppler_hz": b.fwhm_hz(params.gamma0_hz),
            "fwhm_relative_change": b.fwhm / a.fwhm - 1.0,
            "amplitude_still": a.amplitude,
            "amplitude_doppler": b.amplitude,
        }),
        (a, b) => json!({
            "error_still": a.err().map(|e| e.to_string()),
            "error_doppler": b.err().map(|e| e.to_string()),
        }),
    };
    let gd = doppler_width(&env);
    Ok(TaskOutput {
        table,
        summary: json!({
            "doppler_width_hz": gd,
            "doppler_width_gamma0": gd / params.gamma0_hz,
            "max_abs_absorption_difference": worst,
            "narrow_feature": narrow,
        }),
        grid: Some(still.grid),
        ..TaskOutput::default()
    })
}
