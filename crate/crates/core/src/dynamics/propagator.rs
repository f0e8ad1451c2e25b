//! Fixed-step exponential propagator for the stiff regime.
//!
//! For dx/dt = M x + b the exact step is
//! x(t + h) = x(t) + h·φ₁(hM)(M x(t) + b), with φ₁(z) = (eᶻ − 1)/z.
//! h·φ₁(hM) is read off the exponential of the block matrix
//! [[hM, hI], [0, 0]]. Writing the step as an increment driven by the
//! residual M x + b keeps the fixed point exact even when the exponential
//! itself carries rounding error from the 13-decade spread of rates.

use nalgebra::{Matrix3, Matrix6, Vector3};
use num_complex::Complex64;

pub(crate) struct ExpPropagator {
    m: Matrix3<Complex64>,
    b: Vector3<Complex64>,
    /// h·φ₁(hM).
    phi: Matrix3<Complex64>,
}

impl ExpPropagator {
    pub fn new(m: Matrix3<Complex64>, b: Vector3<Complex64>, h: f64) -> Self {
        let mut aug = Matrix6::<Complex64>::zeros();
        aug.fixed_view_mut::<3, 3>(0, 0).copy_from(&(m * Complex64::from(h)));
        for i in 0..3 {
            aug[(i, i + 3)] = Complex64::from(h);
        }
        let e = aug.exp();
        let phi = e.fixed_view::<3, 3>(0, 3).into_owned();
        Self { m, b, phi }
    }

    pub fn step(&self, x: &mut Vector3<Complex64>) {
        let r = self.m * *x + self.b;
        *x += self.phi * r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_scalar_relaxation() {
        let zero = Complex64::new(0.0, 0.0);
        let lam = Complex64::new(-0.5, 1.5);
        let m = Matrix3::from_diagonal(&Vector3::new(lam, Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)));
        let b = Vector3::new(Complex64::new(0.0, -1.0), zero, zero);
        let p = ExpPropagator::new(m, b, 0.25);
        let mut x = Vector3::zeros();
        for _ in 0..8 {
            p.step(&mut x);
        }
        let fixed = -b[0] / lam;
        let exact = fixed * (Complex64::new(1.0, 0.0) - (lam * 2.0).exp());
        assert!((x[0] - exact).norm() < 1e-13);
    }
}
