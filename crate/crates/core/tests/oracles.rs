use std::f64::consts::TAU;

use bergman_core::quad::bergman_norm_pow;
use bergman_core::{pseudohyperbolic, BlaschkeProduct, DiskPoint, DiskQuadrature, Weight};
use num_complex::Complex64;
use proptest::prelude::*;

/// `∫|z|^{2k} (α+1)(1-|z|^2)^α dA = Π_{j=1}^k j/(j+α+1)`.
fn monomial_norm_sq(k: usize, alpha: f64) -> f64 {
    (1..=k).map(|j| j as f64 / (j as f64 + alpha + 1.0)).product()
}

fn direct_factor(a: Complex64, z: Complex64) -> Complex64 {
    let unit = if a.norm() == 0.0 { Complex64::new(-1.0, 0.0) } else { Complex64::new(a.norm(), 0.0) / a };
    unit * (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

fn direct_product(zeros: &[Complex64], z: Complex64) -> Complex64 {
    zeros.iter().map(|&a| direct_factor(a, z)).product()
}

/// `f^{(k)}(z)` from the trapezoid rule on `|ζ - z| = ρ`.
fn cauchy_derivative(f: impl Fn(Complex64) -> Complex64, z: Complex64, k: u32, rho: f64) -> Complex64 {
    let n = 256;
    let fact: f64 = (1..=k).map(f64::from).product();
    let s: Complex64 = (0..n)
        .map(|j| {
            let e = Complex64::from_polar(1.0, TAU * j as f64 / n as f64);
            f(z + rho * e) / (rho * e).powu(k)
        })
        .sum();
    s * fact / n as f64
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.95, 0.0f64..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

#[test]
fn monomial_norms_match_beta_integrals() {
    for alpha in [-0.5, 0.0, 0.75] {
        let w = Weight::standard(alpha).unwrap();
        let rule = DiskQuadrature::new(128, 256, alpha).unwrap();
        for k in [0usize, 1, 3, 7] {
            let got = bergman_norm_pow(|z| z.z().powu(k as u32), 2.0, &w, &rule).unwrap();
            let want = monomial_norm_sq(k, alpha);
            assert!((got - want).abs() <= 1e-10 * want, "alpha {alpha} k {k}: {got} vs {want}");
        }
    }
}

#[test]
fn higher_derivatives_match_cauchy_integrals() {
    let zeros = [Complex64::new(0.3, 0.4), Complex64::new(-0.6, 0.1), Complex64::new(0.0, -0.5)];
    let b = BlaschkeProduct::from_complex(&zeros).unwrap();
    for z in [Complex64::new(0.1, -0.2), Complex64::new(-0.35, 0.3)] {
        let p = DiskPoint::from_complex(z).unwrap();
        for k in 1..=4u32 {
            let want = cauchy_derivative(|x| direct_product(&zeros, x), z, k, 0.05);
            let got = b.derivative(&p, k as usize).unwrap();
            assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0), "order {k}: {got} vs {want}");
        }
    }
}

proptest! {
    #[test]
    fn evaluation_matches_direct_product(zeros in prop::collection::vec(disk_point(), 1..8), z in disk_point()) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let got = b.eval(&DiskPoint::from_complex(z).unwrap());
        let want = direct_product(&zeros, z);
        prop_assert!((got - want).norm() <= 1e-12);
    }

    #[test]
    fn schwarz_pick_holds(zeros in prop::collection::vec(disk_point(), 1..8), z in disk_point()) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let p = DiskPoint::from_complex(z).unwrap();
        let lhs = b.derivative1(&p).norm() * p.one_minus_mod_sq();
        let rhs = 1.0 - b.eval(&p).norm_sqr();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn unimodular_on_the_circle(zeros in prop::collection::vec(disk_point(), 1..8), t in 0.0f64..TAU) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let v = b.eval_complex(Complex64::from_polar(1.0, t)).unwrap();
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pseudohyperbolic_distance_is_mobius_invariant(a in disk_point(), z1 in disk_point(), z2 in disk_point()) {
        let phi = |z: Complex64| (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z);
        let d = |x: Complex64, y: Complex64| {
            pseudohyperbolic(&DiskPoint::from_complex(x).unwrap(), &DiskPoint::from_complex(y).unwrap()).unwrap()
        };
        prop_assert!((d(z1, z2) - d(phi(z1), phi(z2))).abs() <= 1e-9);
    }

    #[test]
    fn frostman_shift_vanishes_on_preimages(zeros in prop::collection::vec(disk_point(), 1..6), xi in (0.0f64..0.5, 0.0f64..TAU)) {
        let b = BlaschkeProduct::from_complex(&zeros).unwrap();
        let xi = Complex64::from_polar(xi.0, xi.1);
        let shifted = b.frostman_shift(xi).unwrap();
        prop_assert_eq!(shifted.degree(), b.degree());
        for root in shifted.zeros() {
            prop_assert!((b.eval(root) - xi).norm() <= 1e-9);
        }
    }
}
