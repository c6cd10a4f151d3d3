use num_complex::Complex64;

use crate::point::DiskPoint;
use crate::poly::Polynomial;

/// An analytic function on the disk that harnesses can integrate.
pub trait Analytic: Sync {
    fn value(&self, z: &DiskPoint) -> Complex64;

    /// `f^{(order)}(z)`; order 0 is the value.
    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64;

    /// Points near which `f` varies on small scales; passed to graded rules.
    fn features(&self) -> Vec<DiskPoint> {
        Vec::new()
    }
}

impl Analytic for Polynomial {
    fn value(&self, z: &DiskPoint) -> Complex64 {
        self.eval(z.z())
    }

    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64 {
        let mut d = self.clone();
        for _ in 0..order {
            d = d.derivative();
        }
        d.eval(z.z())
    }
}

const CAUCHY_NODES: usize = 64;

/// `f^{(order)}(z)` from the Cauchy integral on the circle of radius
/// `(1 - |z|)/2` about `z`, by the trapezoid rule.
pub fn cauchy_derivative(f: impl Fn(&DiskPoint) -> Complex64, z: &DiskPoint, order: usize) -> Complex64 {
    if order == 0 {
        return f(z);
    }
    let rho = 0.5 * z.gap();
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..CAUCHY_NODES {
        let u = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / CAUCHY_NODES as f64);
        match DiskPoint::interior(z.z() + rho * u) {
            Ok(q) => s += f(&q) * u.powi(-(order as i32)),
            Err(_) => return Complex64::new(f64::NAN, f64::NAN),
        }
    }
    let factorial: f64 = (1..=order).map(|k| k as f64).product();
    s * factorial / (CAUCHY_NODES as f64 * rho.powi(order as i32))
}
