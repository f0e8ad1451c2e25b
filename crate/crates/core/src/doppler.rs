//! Thermal velocity averaging.
//!
//! An atom moving with velocity v along the (co-propagating) beams sees the
//! probe shifted by −(v/c)ω_p and the two-photon detunings shifted by
//! −(v/c)(ω_p − ω_c). The susceptibility is averaged over the unit-normalized
//! Maxwell–Boltzmann density (1/(μ√π))·exp(−v²/μ²) with Gauss–Hermite
//! quadrature. Frequencies are ordinary frequencies in Hz.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::decomposition::DecompositionTerms;
use crate::error::{NsitError, Result};
use crate::params::{make_detunings, Detunings, SystemParams};
use crate::steady::susceptibility_at;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Relative change allowed when the quadrature order is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-6;
pub const DEFAULT_QUAD_ORDER: usize = 64;
pub const MIN_QUAD_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerEnv {
    /// Kelvin.
    pub temperature: f64,
    /// Kilograms.
    pub atomic_mass: f64,
    /// Probe frequency ω_p in Hz.
    pub omega_p_abs: f64,
    /// Control frequency ω_c in Hz.
    pub omega_c_abs: f64,
    pub speed_of_light: f64,
    pub boltzmann: f64,
}

impl DopplerEnv {
    pub fn new(temperature: f64, atomic_mass: f64, omega_p_abs: f64, omega_c_abs: f64) -> Self {
        Self {
            temperature,
            atomic_mass,
            omega_p_abs,
            omega_c_abs,
            speed_of_light: SPEED_OF_LIGHT,
            boltzmann: BOLTZMANN,
        }
    }

    /// ⁸⁷Rb vapor at 500 K with degenerate probe and control at 384 THz.
    pub fn rubidium87() -> Self {
        Self::new(500.0, 87.0 * ATOMIC_MASS_UNIT, 3.84e14, 3.84e14)
    }

    /// Most probable speed μ = sqrt(2k_BT/m).
    pub fn most_probable_speed(&self) -> f64 {
        (2.0 * self.boltzmann * self.temperature / self.atomic_mass).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            errs.push(format!("temperature must be > 0 (got {})", self.temperature));
        }
        if !(self.atomic_mass > 0.0 && self.atomic_mass.is_finite()) {
            errs.push(format!("atomic_mass must be > 0 (got {})", self.atomic_mass));
        }
        if !(self.omega_p_abs > 0.0 && self.omega_p_abs.is_finite()) {
            errs.push(format!("probe frequency must be > 0 (got {})", self.omega_p_abs));
        }
        if !(self.omega_c_abs >= 0.0 && self.omega_c_abs.is_finite()) {
            errs.push(format!("control frequency must be >= 0 (got {})", self.omega_c_abs));
        }
        if errs.is_empty() && !(self.most_probable_speed() < self.speed_of_light) {
            errs.push(format!(
                "most probable speed {} m/s is not below the speed of light",
                self.most_probable_speed()
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(NsitError::InvalidEnv(errs))
        }
    }
}

/// Detunings seen by an atom moving with velocity `v_z` (m/s).
pub fn doppler_detunings(params: &SystemParams, env: &DopplerEnv, delta_e: f64, v_z: f64) -> Result<Detunings> {
    if !(v_z.abs() < env.speed_of_light) {
        return Err(NsitError::InvalidVelocity { velocity: v_z });
    }
    let beta = v_z / env.speed_of_light;
    let probe = beta * env.omega_p_abs / params.gamma0_hz;
    let raman = beta * (env.omega_p_abs - env.omega_c_abs) / params.gamma0_hz;
    let d = make_detunings(params, delta_e);
    Ok(Detunings {
        delta_e: d.delta_e - probe,
        delta_s: d.delta_s - raman,
        delta_k: d.delta_k - raman,
    })
}

/// Single-photon Doppler FWHM Γ_D = ω_p·sqrt(8 ln2 k_BT/(mc²)) in Hz.
pub fn doppler_width(env: &DopplerEnv) -> f64 {
    let c = env.speed_of_light;
    env.omega_p_abs * (8.0 * std::f64::consts::LN_2 * env.boltzmann * env.temperature / (env.atomic_mass * c * c)).sqrt()
}

/// Gauss–Hermite nodes and weights for the weight function exp(−x²).
#[derive(Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch eigenvalues as starting points, polished by Newton
    /// iteration on the orthonormal Hermite recurrence; weights follow from
    /// the derivative at each node.
    fn compute(n: usize) -> Self {
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                (0.5 * i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        // Orthonormal ψ_n(z) and ψ_n'(z).
        let eval = |z: f64| {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            (p1, (2.0 * nf).sqrt() * p2)
        };
        let mut weights = vec![0.0; n];
        for (z, w) in nodes.iter_mut().zip(weights.iter_mut()) {
            for _ in 0..8 {
                let (p, dp) = eval(*z);
                let step = p / dp;
                *z -= step;
                if step.abs() <= 1e-16 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, dp) = eval(*z);
            *w = 2.0 / (dp * dp);
        }
        // Enforce exact symmetry of the rule.
        for i in 0..n / 2 {
            let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[n - 1 - i]);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of order `n`, computed once per order.
    pub fn rule(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(r) = cache.read().expect("quadrature cache poisoned").get(&n) {
            return Arc::clone(r);
        }
        let rule = Arc::new(Self::compute(n));
        cache
            .write()
            .expect("quadrature cache poisoned")
            .entry(n)
            .or_insert(rule)
            .clone()
    }
}

fn average_once<const N: usize>(
    params: &SystemParams,
    env: &DopplerEnv,
    delta_e: f64,
    order: usize,
    f: &impl Fn(&Detunings) -> Result<[Complex64; N]>,
) -> Result<[Complex64; N]> {
    let rule = GaussHermite::rule(order);
    let mu = env.most_probable_speed();
    let norm = std::f64::consts::PI.sqrt().recip();
    let mut acc = [Complex64::new(0.0, 0.0); N];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let det = doppler_detunings(params, env, delta_e, mu * x)?;
        let vals = f(&det)?;
        for (a, v) in acc.iter_mut().zip(vals) {
            *a += v * (w * norm);
        }
    }
    Ok(acc)
}

/// Velocity average of any detuning-dependent quantity.
///
/// Evaluates at `order` and `2·order` nodes and fails with
/// [`NsitError::NotConverged`] if the results differ by more than
/// [`CONVERGENCE_TOL`] relative. Returns the order-`order` result.
pub fn doppler_average<const N: usize>(
    params: &SystemParams,
    env: &DopplerEnv,
    delta_e: f64,
    order: usize,
    f: impl Fn(&Detunings) -> Result<[Complex64; N]>,
) -> Result<[Complex64; N]> {
    env.validate()?;
    if order < MIN_QUAD_ORDER {
        return Err(NsitError::InvalidEnv(vec![format!(
            "quadrature order must be >= {MIN_QUAD_ORDER} (got {order})"
        )]));
    }
    let coarse = average_once(params, env, delta_e, order, &f)?;
    let fine = average_once(params, env, delta_e, 2 * order, &f)?;
    let diff: f64 = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let size: f64 = fine.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    let change = if size == 0.0 { diff } else { diff / size };
    if change > CONVERGENCE_TOL {
        return Err(NsitError::NotConverged {
            order,
            change,
            tolerance: CONVERGENCE_TOL,
        });
    }
    Ok(coarse)
}

/// Doppler-averaged susceptibility χ_D.
pub fn doppler_susceptibility(params: &SystemParams, env: &DopplerEnv, delta_e: f64, quad_order: usize) -> Result<Complex64> {
    let [chi] = doppler_average(params, env, delta_e, quad_order, |det| Ok([susceptibility_at(params, det)?]))?;
    Ok(chi)
}

/// Doppler-averaged decomposition terms (χ₁, χ₂, χ₃).
pub fn doppler_decomposition(
    params: &SystemParams,
    env: &DopplerEnv,
    delta_e: f64,
    quad_order: usize,
) -> Result<[Complex64; 3]> {
    let terms = DecompositionTerms::new(params)?;
    doppler_average(params, env, delta_e, quad_order, |det| Ok(terms.eval_at(params, det)))
}
