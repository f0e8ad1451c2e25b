//! Time-domain integration of the coherence equations and the
//! imperfect-polarization model.
//!
//! The trajectory starts from zero coherences and is sampled on a grid of
//! checkpoints spaced T/m apart, where T = 1/Γ_slow is the lifetime of the
//! slowest mode (Γ_slow = Γ̃ₖ in the perturbative regime). The run stops once
//! no component has changed by more than `steady_eps` (relative) over the
//! last interval T.
//!
//! Between checkpoints an adaptive Dormand–Prince integrator is used when the
//! step budget allows. Otherwise the exact exponential propagator takes one
//! step per checkpoint interval.

mod propagator;
mod rk45;

use std::collections::VecDeque;
use std::io::Write;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::decomposition::nsit_width;
use crate::error::{NsitError, Result};
use crate::params::{make_detunings, SystemParams};
use crate::steady::{damping_terms, system_matrix, SteadyState};

use propagator::ExpPropagator;
use rk45::{DormandPrince, RkError};

/// Polarization degrees of the two ensembles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    /// Alkali polarization p_a ∈ [0, 1].
    pub p_a: f64,
    /// Noble-gas polarization p_b ∈ [0, 1].
    pub p_b: f64,
    /// Exchange rate at full polarization.
    pub j_full: f64,
}

impl PolarizationState {
    pub fn perfect(j_full: f64) -> Self {
        Self {
            p_a: 1.0,
            p_b: 1.0,
            j_full,
        }
    }

    /// J_eff = j_full·sqrt(p_a p_b).
    pub fn j_effective(&self) -> f64 {
        self.j_full * (self.p_a * self.p_b).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(0.0..=1.0).contains(&self.p_a) {
            errs.push(format!("p_a must lie in [0, 1] (got {})", self.p_a));
        }
        if !(0.0..=1.0).contains(&self.p_b) {
            errs.push(format!("p_b must lie in [0, 1] (got {})", self.p_b));
        }
        if !(self.j_full >= 0.0 && self.j_full.is_finite()) {
            errs.push(format!("j_full must be finite and >= 0 (got {})", self.j_full));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(NsitError::InvalidParams(errs))
        }
    }
}

/// Parameters seen by the linear model under partial polarization:
/// J → j_full·sqrt(p_a p_b) and probe source scaled by p_a.
pub fn effective_params(params: &SystemParams, pol: &PolarizationState) -> SystemParams {
    SystemParams {
        j_exchange: pol.j_effective(),
        source_scale: pol.p_a,
        ..*params
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    /// Runge–Kutta while the step budget allows, then the propagator.
    Auto,
    RungeKutta,
    Propagator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    /// Initial Runge–Kutta step in 1/Γ₀. Defaults to 0.01 of the fastest timescale.
    pub dt_initial: Option<f64>,
    /// Horizon in 1/Γ₀. Defaults to 1000·T.
    pub t_max: Option<f64>,
    pub tol_rel: f64,
    /// Steady threshold on the relative change over one interval T.
    pub steady_eps: f64,
    pub integrator: Integrator,
    /// Checkpoints per interval T.
    pub checkpoints: usize,
    pub max_rk_steps: usize,
    /// Keep every checkpoint in the result.
    pub record: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            dt_initial: None,
            t_max: None,
            tol_rel: 1e-10,
            steady_eps: 1e-10,
            integrator: Integrator::Auto,
            checkpoints: 16,
            max_rk_steps: 200_000,
            record: false,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.tol_rel > 1e-14 && self.tol_rel < 1e-3) {
            errs.push(format!("tol_rel must lie in (1e-14, 1e-3) (got {})", self.tol_rel));
        }
        if !(self.steady_eps > 0.0 && self.steady_eps < 1.0) {
            errs.push(format!("steady_eps must lie in (0, 1) (got {})", self.steady_eps));
        }
        if let Some(dt) = self.dt_initial {
            if !(dt > 0.0 && dt.is_finite()) {
                errs.push(format!("dt_initial must be > 0 (got {dt})"));
            }
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                errs.push(format!("t_max must be > 0 (got {t})"));
            }
        }
        if self.checkpoints == 0 {
            errs.push("checkpoints must be >= 1".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(NsitError::InvalidParams(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: SteadyState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub state: SteadyState,
    /// Time at which the steady criterion was met.
    pub t_final: f64,
    /// Slow-mode interval T used for the criterion.
    pub interval: f64,
    /// Integrator that produced the final state.
    pub integrator: Integrator,
    pub rk_steps: usize,
    pub propagator_steps: usize,
    pub samples: Vec<TrajectorySample>,
}

/// Width 2·min|Re λ| of the slowest mode of the homogeneous system.
pub fn slowest_width(params: &SystemParams, delta_e: f64) -> f64 {
    let det = make_detunings(params, delta_e);
    let (m, _) = system_matrix(params, &det);
    let from_eigs = m
        .eigenvalues()
        .map(|ev| ev.iter().map(|l| -2.0 * l.re).fold(f64::INFINITY, f64::min));
    match from_eigs {
        Some(w) if w > 0.0 && w.is_finite() => w,
        _ => nsit_width(params),
    }
}

fn relative_change(now: &Vector3<Complex64>, before: &Vector3<Complex64>) -> f64 {
    (0..3)
        .map(|i| {
            let d = (now[i] - before[i]).norm();
            if d == 0.0 {
                0.0
            } else {
                d / now[i].norm()
            }
        })
        .fold(0.0, f64::max)
}

/// Integrates from zero coherences until the steady criterion holds.
pub fn integrate_trajectory(params: &SystemParams, pol: &PolarizationState, cfg: &TrajectoryConfig, delta_e: f64) -> Result<Trajectory> {
    cfg.validate()?;
    pol.validate()?;
    let p = effective_params(params, pol);
    let det = make_detunings(&p, delta_e);
    damping_terms(&p, &det)?;
    let (m, b) = system_matrix(&p, &det);

    let width = slowest_width(&p, delta_e);
    let interval = 1.0 / width;
    let dt_check = interval / cfg.checkpoints as f64;
    let t_max = cfg.t_max.unwrap_or(1000.0 * interval);
    let fastest = m.iter().map(|z| z.norm()).fold(0.0, f64::max);

    // Explicit stability limits the step to about 3/|λ_max|; skip straight to
    // the propagator when the horizon cannot be covered within budget.
    let rk_hopeless = t_max * fastest / 3.0 > cfg.max_rk_steps as f64;
    let mut current = match cfg.integrator {
        Integrator::Auto if rk_hopeless => Integrator::Propagator,
        Integrator::Auto => Integrator::RungeKutta,
        other => other,
    };

    let scale = b.norm() / fastest.max(f64::MIN_POSITIVE);
    let mut rk = DormandPrince::new(
        m,
        b,
        cfg.tol_rel,
        cfg.tol_rel * 1e-6 * scale,
        cfg.dt_initial.unwrap_or(0.01 / fastest.max(f64::MIN_POSITIVE)),
        cfg.max_rk_steps,
    );
    let mut prop: Option<ExpPropagator> = None;

    let mut x = Vector3::<Complex64>::zeros();
    let mut history: VecDeque<Vector3<Complex64>> = VecDeque::with_capacity(cfg.checkpoints + 1);
    history.push_back(x);
    let mut samples = Vec::new();
    if cfg.record {
        samples.push(TrajectorySample {
            t: 0.0,
            state: SteadyState::from_array([x[0], x[1], x[2]]),
        });
    }
    let mut propagator_steps = 0;
    let mut last_change = f64::INFINITY;
    let mut n: u64 = 0;

    loop {
        let t0 = n as f64 * dt_check;
        let t1 = (n + 1) as f64 * dt_check;
        if t0 >= t_max {
            return Err(NsitError::NoConvergence { t_max, last_change });
        }
        if current == Integrator::RungeKutta {
            let mut trial = x;
            let mut t = t0;
            match rk.advance(&mut trial, &mut t, t1) {
                Ok(()) => x = trial,
                Err(e) => {
                    if cfg.integrator == Integrator::RungeKutta {
                        let (t, reason) = match e {
                            RkError::Underflow { t } => (t, "step size underflow".to_string()),
                            RkError::Budget { t } => (t, format!("step budget of {} exhausted", cfg.max_rk_steps)),
                        };
                        return Err(NsitError::StiffnessFailure { t, reason });
                    }
                    // Resume from the last checkpoint with the propagator.
                    current = Integrator::Propagator;
                }
            }
        }
        if current == Integrator::Propagator {
            let step = prop.get_or_insert_with(|| ExpPropagator::new(m, b, dt_check));
            step.step(&mut x);
            propagator_steps += 1;
        }
        n += 1;
        if cfg.record {
            samples.push(TrajectorySample {
                t: t1,
                state: SteadyState::from_array([x[0], x[1], x[2]]),
            });
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NsitError::StiffnessFailure {
                t: t1,
                reason: "non-finite state".to_string(),
            });
        }
        history.push_back(x);
        if history.len() > cfg.checkpoints + 1 {
            history.pop_front();
        }
        if history.len() == cfg.checkpoints + 1 {
            last_change = relative_change(&x, &history[0]);
            if last_change < cfg.steady_eps {
                return Ok(Trajectory {
                    state: SteadyState::from_array([x[0], x[1], x[2]]),
                    t_final: t1,
                    interval,
                    integrator: current,
                    rk_steps: rk.steps,
                    propagator_steps,
                    samples,
                });
            }
        }
    }
}

/// Steady state reached by time integration from zero coherences.
pub fn integrate_to_steady_state(
    params: &SystemParams,
    pol: &PolarizationState,
    cfg: &TrajectoryConfig,
    delta_e: f64,
) -> Result<SteadyState> {
    integrate_trajectory(params, pol, cfg, delta_e).map(|t| t.state)
}

/// Writes recorded samples as CSV: t and the real/imaginary parts of each coherence.
pub fn write_trajectory_csv<W: Write>(out: &mut W, samples: &[TrajectorySample]) -> std::io::Result<()> {
    writeln!(out, "t,x_dp_re,x_dp_im,x_ds_re,x_ds_im,x_nk_re,x_nk_im")?;
    for s in samples {
        let [a, b, c] = s.state.as_array();
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, a.re, a.im, b.re, b.im, c.re, c.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::steady_state;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn moderate() -> SystemParams {
        SystemParams {
            gamma_e: 2.0,
            gamma_s: 0.05,
            gamma_k: 0.01,
            omega_c_rabi: Complex64::new(0.4, 0.1),
            j_exchange: 0.08,
            gyro_s: 10.0,
            gyro_k: 1.0,
            b_tilde: 0.01,
            ..SystemParams::reference()
        }
    }

    #[test]
    fn polarization_scaling() {
        let p = SystemParams::reference();
        assert_eq!(effective_params(&p, &PolarizationState::perfect(p.j_exchange)), p);
        let q = effective_params(
            &p,
            &PolarizationState {
                p_a: 1.0,
                p_b: 0.25,
                j_full: 1e-6,
            },
        );
        assert_eq!(q.j_exchange, 5e-7);
        let r = effective_params(
            &p,
            &PolarizationState {
                p_a: 1.0,
                p_b: 0.85,
                j_full: 1.0,
            },
        );
        assert!((r.j_exchange - 0.921_954_445_729_288_7).abs() < 1e-15);
    }

    #[test]
    fn zero_probe_stays_dark() {
        let p = SystemParams {
            omega_p_rabi: 0.0,
            ..SystemParams::reference()
        };
        let s = integrate_to_steady_state(&p, &PolarizationState::perfect(p.j_exchange), &TrajectoryConfig::default(), 0.0)
            .unwrap();
        assert_eq!(s.as_array(), [Complex64::new(0.0, 0.0); 3]);
    }

    #[test]
    fn runge_kutta_reaches_analytic_state() {
        let p = moderate();
        let cfg = TrajectoryConfig {
            integrator: Integrator::RungeKutta,
            ..TrajectoryConfig::default()
        };
        let tr = integrate_trajectory(&p, &PolarizationState::perfect(p.j_exchange), &cfg, 0.02).unwrap();
        assert_eq!(tr.integrator, Integrator::RungeKutta);
        let exact = steady_state(&p, 0.02).unwrap();
        for (a, b) in tr.state.as_array().into_iter().zip(exact.as_array()) {
            assert!(rel(a, b) < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn propagator_agrees_with_runge_kutta() {
        let p = moderate();
        let pol = PolarizationState::perfect(p.j_exchange);
        let a = integrate_to_steady_state(
            &p,
            &pol,
            &TrajectoryConfig {
                integrator: Integrator::Propagator,
                ..TrajectoryConfig::default()
            },
            -0.03,
        )
        .unwrap();
        let b = integrate_to_steady_state(
            &p,
            &pol,
            &TrajectoryConfig {
                integrator: Integrator::RungeKutta,
                ..TrajectoryConfig::default()
            },
            -0.03,
        )
        .unwrap();
        for (x, y) in a.as_array().into_iter().zip(b.as_array()) {
            assert!(rel(x, y) < 1e-7);
        }
    }

    #[test]
    fn stiff_reference_set_falls_back_and_matches() {
        let p = SystemParams::reference();
        let tr = integrate_trajectory(&p, &PolarizationState::perfect(p.j_exchange), &TrajectoryConfig::default(), 0.0).unwrap();
        assert_eq!(tr.integrator, Integrator::Propagator);
        let exact = steady_state(&p, 0.0).unwrap();
        for (a, b) in tr.state.as_array().into_iter().zip(exact.as_array()) {
            assert!(rel(a, b) < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn runge_kutta_only_reports_stiffness() {
        let p = SystemParams::reference();
        let cfg = TrajectoryConfig {
            integrator: Integrator::RungeKutta,
            max_rk_steps: 1000,
            ..TrajectoryConfig::default()
        };
        assert!(matches!(
            integrate_to_steady_state(&p, &PolarizationState::perfect(p.j_exchange), &cfg, 0.0),
            Err(NsitError::StiffnessFailure { .. })
        ));
    }

    #[test]
    fn short_horizon_reports_no_convergence() {
        let p = moderate();
        let cfg = TrajectoryConfig {
            t_max: Some(1.0),
            ..TrajectoryConfig::default()
        };
        assert!(matches!(
            integrate_to_steady_state(&p, &PolarizationState::perfect(p.j_exchange), &cfg, 0.0),
            Err(NsitError::NoConvergence { .. })
        ));
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = moderate();
        let cfg = TrajectoryConfig {
            record: true,
            ..TrajectoryConfig::default()
        };
        let tr = integrate_trajectory(&p, &PolarizationState::perfect(p.j_exchange), &cfg, 0.0).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &tr.samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), tr.samples.len() + 1);
        assert_eq!(lines[1].split(',').count(), 7);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let cfg = TrajectoryConfig {
            tol_rel: 0.1,
            ..TrajectoryConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
