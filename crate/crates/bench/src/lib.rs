//! Fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use bergman_core::{BlaschkeProduct, DiskPoint, ZeroSequence};
use num_complex::Complex64;

/// Partial product of the exponential family with moduli `1 - sigma^k`.
pub fn exponential_product(sigma: f64, n: usize) -> BlaschkeProduct {
    let seq = ZeroSequence::from_spec(&format!("exp:sigma={sigma},n={n}")).expect("valid spec");
    BlaschkeProduct::from_sequence(&seq).expect("finite product")
}

/// `n` zeros on a spiral that stays inside `|z| <= 0.9`.
pub fn spiral_product(n: usize) -> BlaschkeProduct {
    let zeros: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.9 * (k + 1) as f64 / n as f64, 2.399963 * k as f64))
        .collect();
    BlaschkeProduct::from_complex(&zeros).expect("zeros inside the disk")
}

/// Evaluation points on a ring of radius `r`.
pub fn ring_points(r: f64, n: usize) -> Vec<DiskPoint> {
    (0..n)
        .map(|k| DiskPoint::from_complex(Complex64::from_polar(r, TAU * k as f64 / n as f64)).unwrap())
        .collect()
}
