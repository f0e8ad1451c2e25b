//! Dormand–Prince 5(4) embedded Runge–Kutta pair for dx/dt = M x + b.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

type State = Vector3<Complex64>;

const fn re(x: f64) -> Complex64 {
    Complex64 { re: x, im: 0.0 }
}

// The system is autonomous, so the stage nodes c_i are not needed.
const A21: Complex64 = re(1.0 / 5.0);
const A31: Complex64 = re(3.0 / 40.0);
const A32: Complex64 = re(9.0 / 40.0);
const A41: Complex64 = re(44.0 / 45.0);
const A42: Complex64 = re(-56.0 / 15.0);
const A43: Complex64 = re(32.0 / 9.0);
const A51: Complex64 = re(19372.0 / 6561.0);
const A52: Complex64 = re(-25360.0 / 2187.0);
const A53: Complex64 = re(64448.0 / 6561.0);
const A54: Complex64 = re(-212.0 / 729.0);
const A61: Complex64 = re(9017.0 / 3168.0);
const A62: Complex64 = re(-355.0 / 33.0);
const A63: Complex64 = re(46732.0 / 5247.0);
const A64: Complex64 = re(49.0 / 176.0);
const A65: Complex64 = re(-5103.0 / 18656.0);
const B1: Complex64 = re(35.0 / 384.0);
const B3: Complex64 = re(500.0 / 1113.0);
const B4: Complex64 = re(125.0 / 192.0);
const B5: Complex64 = re(-2187.0 / 6784.0);
const B6: Complex64 = re(11.0 / 84.0);

// Fifth-order weights minus embedded fourth-order weights.
const E1: Complex64 = re(71.0 / 57600.0);
const E3: Complex64 = re(-71.0 / 16695.0);
const E4: Complex64 = re(71.0 / 1920.0);
const E5: Complex64 = re(-17253.0 / 339200.0);
const E6: Complex64 = re(22.0 / 525.0);
const E7: Complex64 = re(-1.0 / 40.0);

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug)]
pub(crate) enum RkError {
    /// The step size fell below the representable increment of t.
    Underflow { t: f64 },
    /// More steps than the configured budget were needed.
    Budget { t: f64 },
}

pub(crate) struct DormandPrince {
    m: Matrix3<Complex64>,
    b: State,
    rtol: f64,
    atol: f64,
    /// Suggested size of the next step.
    pub h: f64,
    pub steps: usize,
    pub max_steps: usize,
    /// Derivative at the current point (first-same-as-last).
    k1: Option<State>,
}

impl DormandPrince {
    pub fn new(m: Matrix3<Complex64>, b: State, rtol: f64, atol: f64, h: f64, max_steps: usize) -> Self {
        Self {
            m,
            b,
            rtol,
            atol,
            h,
            steps: 0,
            max_steps,
            k1: None,
        }
    }

    fn rhs(&self, x: &State) -> State {
        self.m * x + self.b
    }

    fn error_norm(&self, err: &State, x0: &State, x1: &State) -> f64 {
        (0..3)
            .map(|i| err[i].norm() / (self.atol + self.rtol * x0[i].norm().max(x1[i].norm())))
            .fold(0.0, f64::max)
    }

    /// Advances `x` from `t` to exactly `t_end`.
    pub fn advance(&mut self, x: &mut State, t: &mut f64, t_end: f64) -> Result<(), RkError> {
        while *t < t_end {
            if self.steps >= self.max_steps {
                return Err(RkError::Budget { t: *t });
            }
            let last = self.h >= t_end - *t;
            let h = if last { t_end - *t } else { self.h };
            if *t + h == *t {
                return Err(RkError::Underflow { t: *t });
            }
            let hc = Complex64::from(h);
            let k1 = self.k1.unwrap_or_else(|| self.rhs(x));
            let k2 = self.rhs(&(*x + k1 * (hc * A21)));
            let k3 = self.rhs(&(*x + (k1 * A31 + k2 * A32) * hc));
            let k4 = self.rhs(&(*x + (k1 * A41 + k2 * A42 + k3 * A43) * hc));
            let k5 = self.rhs(&(*x + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hc));
            let k6 = self.rhs(&(*x + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hc));
            let x1 = *x + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * hc;
            let k7 = self.rhs(&x1);
            let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hc;
            let en = self.error_norm(&err, x, &x1);
            self.steps += 1;
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if en <= 1.0 {
                *x = x1;
                *t = if last { t_end } else { *t + h };
                self.k1 = Some(k7);
                // A step shortened to hit t_end says nothing about the next one.
                if !last {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay_matches_exponential() {
        let zero = Complex64::new(0.0, 0.0);
        let lam = Complex64::new(-0.7, 2.0);
        let m = Matrix3::from_diagonal(&Vector3::new(lam, lam, lam));
        let mut rk = DormandPrince::new(m, Vector3::new(zero, zero, zero), 1e-11, 1e-14, 1e-3, 100_000);
        let mut x = Vector3::new(Complex64::new(1.0, 0.0), zero, zero);
        let mut t = 0.0;
        rk.advance(&mut x, &mut t, 3.0).unwrap();
        assert_eq!(t, 3.0);
        let exact = (lam * 3.0).exp();
        assert!((x[0] - exact).norm() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let zero = Complex64::new(0.0, 0.0);
        let lam = Complex64::new(-1e6, 0.0);
        let m = Matrix3::from_diagonal(&Vector3::new(lam, lam, lam));
        let b = Vector3::new(Complex64::new(1.0, 0.0), zero, zero);
        let mut rk = DormandPrince::new(m, b, 1e-10, 1e-20, 1e-9, 50);
        let mut x = Vector3::zeros();
        let mut t = 0.0;
        assert!(matches!(rk.advance(&mut x, &mut t, 1.0), Err(RkError::Budget { .. })));
    }
}
