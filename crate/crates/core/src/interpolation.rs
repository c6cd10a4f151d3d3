//! Interpolation in weighted Bergman spaces along separated sequences:
//! the Békollé-type condition, the majorant `P_γ` and the explicit
//! interpolant.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::analytic::{cauchy_derivative, Analytic};
use crate::blaschke::omitted_products;
use crate::diskgeom::{generate_sequence, SequenceKind, ZeroSequence};
use crate::error::{domain, Error, Result};
use crate::point::{DiskPoint, MobiusParts};
use crate::quad::{integrate_disk_value, integrate_gap, GradedDiskRule, QuadOptions};
use crate::report::{geometric_lambda_grid, last_decade_slope, median, RatioReport, Rule, DEFAULT_MAX_SLOPE};
use crate::weights::Weight;

const GAP_ORDER: usize = 32;
/// Largest admissible interpolation residual.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Norm ratios across trials or sweeps: `max <= 3 median`.
pub const NORM_BAND: Rule = Rule::SweepUpper { factor: 3.0 };

fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return domain(format!("interpolation needs p > 1, got {p}"));
    }
    Ok(p / (p - 1.0))
}

/// `a_w/p - 1/q + 1/2`, comfortably inside the admissible range of `γ`.
pub fn default_gamma(w: &Weight, p: f64) -> Result<f64> {
    let q = conjugate_exponent(p)?;
    Ok(w.indices()?.a / p - 1.0 / q + 0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BekolleReport {
    pub holds: bool,
    /// `max_r LHS(r) / (1-r)^{pγ+p}` over the grid.
    pub constant: f64,
    pub grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub slope: Option<f64>,
}

/// Radii with `1 - r` geometric from `0.5` to `1e-6`.
pub fn default_bekolle_grid() -> Vec<f64> {
    geometric_lambda_grid(40, 0.5, 1e-6)
}

/// Evaluates `(∫_r^1 w)(∫_r^1 (1-t)^{γq} w^{-q/p})^{p/q} / (1-r)^{pγ+p}`
/// on the grid.
pub fn bekolle_check(w: &Weight, p: f64, gamma: f64, r_grid: &[f64]) -> Result<BekolleReport> {
    let q = conjugate_exponent(p)?;
    let ix = w.indices()?;
    let inner_power = gamma * q - ix.b * q / p;
    if !(inner_power > -1.0) {
        return Err(Error::Divergence(format!(
            "∫ (1-t)^(γq) w^(-q/p) dt diverges at t = 1 for γ = {gamma} (needs γ > b_w/p - 1/q = {})",
            ix.b / p - 1.0 / q
        )));
    }
    if !(gamma > ix.a / p - 1.0 / q) {
        return Err(Error::Gate(format!(
            "γ = {gamma} must exceed a_w/p - 1/q = {}",
            ix.a / p - 1.0 / q
        )));
    }
    let mut ratios = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if !(0.0..1.0).contains(&r) {
            return domain(format!("radius {r} outside [0, 1)"));
        }
        let g = 1.0 - r;
        let mass = integrate_gap(|x| w.at_gap(x), 0.0, g, ix.b, GAP_ORDER);
        let dual = integrate_gap(
            |x| x.powf(gamma * q) * w.at_gap(x).powf(-q / p),
            0.0,
            g,
            inner_power,
            GAP_ORDER,
        );
        ratios.push(mass * dual.powf(p / q) / g.powf(p * gamma + p));
    }
    let constant = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = last_decade_slope(r_grid, &ratios);
    let holds = constant.is_finite() && slope.is_none_or(|s| s >= -DEFAULT_MAX_SLOPE);
    Ok(BekolleReport {
        holds,
        constant,
        grid: r_grid.to_vec(),
        ratios,
        slope,
    })
}

/// `P_γ g(z) = ∫ (1-|ζ|)^γ |g(ζ)| / |1 - conj(ζ) z|^{γ+2} dA(ζ)`.
pub fn projection_p_gamma(
    g: impl Fn(&DiskPoint) -> Complex64 + Sync,
    gamma: f64,
    z: &DiskPoint,
    opts: &QuadOptions,
) -> Result<f64> {
    if !(gamma > -1.0) {
        return Err(Error::Divergence(format!("P_γ needs γ > -1, got {gamma}")));
    }
    let rule = GradedDiskRule::new(std::slice::from_ref(z), gamma, opts)?;
    integrate_disk_value(
        |zeta| {
            let den = MobiusParts::new(z, zeta).den.norm();
            zeta.gap().powf(gamma) * g(zeta).norm() / den.powf(gamma + 2.0)
        },
        &rule,
    )
}

#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    pub seq: ZeroSequence,
    pub targets: Vec<Complex64>,
    pub p: f64,
    pub w: Weight,
    pub gamma: f64,
}

impl InterpolationProblem {
    /// `gamma = None` selects [`default_gamma`].
    pub fn new(seq: ZeroSequence, targets: Vec<Complex64>, p: f64, w: Weight, gamma: Option<f64>) -> Result<Self> {
        let q = conjugate_exponent(p)?;
        if targets.len() != seq.len() {
            return domain(format!("{} targets for {} nodes", targets.len(), seq.len()));
        }
        if !seq.is_simple() {
            return Err(Error::Separation("interpolation nodes must be distinct".into()));
        }
        let gamma = match gamma {
            Some(g) => g,
            None => default_gamma(&w, p)?,
        };
        let floor = w.indices()?.a / p - 1.0 / q;
        if !(gamma > floor) {
            return Err(Error::Gate(format!("γ = {gamma} must exceed a_w/p - 1/q = {floor}")));
        }
        Ok(Self { seq, targets, p, w, gamma })
    }

    /// `(w(|z_n|) (1-|z_n|)^2)^{1/p}`.
    pub fn normalizer(&self, z: &DiskPoint) -> f64 {
        (self.w.at(z) * z.gap() * z.gap()).powf(1.0 / self.p)
    }

    pub fn with_targets(&self, targets: Vec<Complex64>) -> Result<Self> {
        if targets.len() != self.seq.len() {
            return domain(format!("{} targets for {} nodes", targets.len(), self.seq.len()));
        }
        Ok(Self { targets, ..self.clone() })
    }
}

/// `f(z) = Σ_n c_n (1-|z_n|^2)^{γ+2} B_n(z) / ((1 - conj(z_n) z)^{γ+2} B_n(z_n))`
/// with `B_n` the product without the `n`-th factor.
///
/// This is the kernel sum `a_n (w(|z_n|)(1-|z_n|)^2)^{-1/p} (1-|z_n|^2)^{γ+1}
/// B(z) / ((1 - conj(z_n) z)^{γ+1} (z - z_n) B'(z_n))` with `B(z)/(z - z_n)`
/// cancelled factor by factor, so it is exact at the nodes.
#[derive(Clone, Debug)]
pub struct Interpolant {
    nodes: Vec<DiskPoint>,
    coefficients: Vec<Complex64>,
    exponent: f64,
}

pub fn build_interpolant(prob: &InterpolationProblem) -> Result<Interpolant> {
    if !prob.seq.is_simple() {
        return domain("repeated node: B'(z_n) = 0");
    }
    let nodes = prob.seq.flattened();
    let exponent = prob.gamma + 2.0;
    let coefficients = nodes
        .iter()
        .zip(&prob.targets)
        .enumerate()
        .map(|(n, (z, a))| {
            let own = omitted_products(&nodes, z)[n];
            if own.norm() == 0.0 {
                return domain(format!("omitted product vanishes at node {n}"));
            }
            Ok(a / prob.normalizer(z) * z.one_minus_mod_sq().powf(exponent) / own)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Interpolant {
        nodes,
        coefficients,
        exponent,
    })
}

impl Analytic for Interpolant {
    fn value(&self, z: &DiskPoint) -> Complex64 {
        let partial = omitted_products(&self.nodes, z);
        self.nodes
            .iter()
            .zip(&self.coefficients)
            .zip(partial)
            .map(|((a, c), bn)| {
                let kernel = (-self.exponent * MobiusParts::new(a, z).ln_one_minus_conj_a_z()).exp();
                c * bn * kernel
            })
            .sum()
    }

    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64 {
        cauchy_derivative(|q| self.value(q), z, order)
    }

    fn features(&self) -> Vec<DiskPoint> {
        self.nodes.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    pub gamma: f64,
    /// Worst `|f(z_n) (w(|z_n|)(1-|z_n|)^2)^{1/p} - a_n|` over the problem and
    /// all trials.
    pub max_residual: f64,
    /// `‖f_a‖_{p,w} / ‖a‖_{ℓ^p}`, one per random trial.
    pub norm_ratios: Vec<f64>,
    /// `max / median` of the norm ratios.
    pub band: f64,
}

fn residual(prob: &InterpolationProblem, f: &Interpolant) -> f64 {
    prob.seq
        .flattened()
        .iter()
        .zip(&prob.targets)
        .map(|(z, a)| (f.value(z) * prob.normalizer(z) - a).norm())
        .fold(0.0, f64::max)
}

/// Targets with uniform moduli and phases, scaled to unit `ℓ^p` norm.
pub fn random_targets<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..n)
        .map(|_| {
            let m: f64 = rng.random_range(0.05..1.0);
            let t: f64 = rng.random_range(0.0..TAU);
            Complex64::from_polar(m, t)
        })
        .collect();
    let norm = lp_norm(&raw, p);
    raw.into_iter().map(|a| a / norm).collect()
}

fn lp_norm(a: &[Complex64], p: f64) -> f64 {
    a.iter().map(|x| x.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn interpolant_norm(prob: &InterpolationProblem, f: &Interpolant, opts: &QuadOptions) -> Result<f64> {
    let rule = GradedDiskRule::new(&f.nodes, prob.w.indices()?.b, opts)?;
    let pow = integrate_disk_value(|z| f.value(z).norm().powf(prob.p) * prob.w.at(z), &rule)?;
    Ok(pow.powf(1.0 / prob.p))
}

/// Residuals of the problem itself and of `trials` random unit targets, and
/// the band of norm ratios over the trials.
pub fn verify_interpolation<R: Rng + ?Sized>(
    prob: &InterpolationProblem,
    trials: usize,
    rng: &mut R,
    opts: &QuadOptions,
) -> Result<InterpolationReport> {
    let n = prob.seq.len();
    let mut problems = vec![prob.clone()];
    for _ in 0..trials {
        problems.push(prob.with_targets(random_targets(n, prob.p, rng))?);
    }
    let results: Vec<Result<(f64, f64)>> = problems
        .par_iter()
        .enumerate()
        .map(|(k, pr)| {
            let f = build_interpolant(pr)?;
            let res = residual(pr, &f);
            let ratio = if k == 0 {
                f64::NAN
            } else {
                interpolant_norm(pr, &f, opts)? / lp_norm(&pr.targets, pr.p)
            };
            Ok((res, ratio))
        })
        .collect();
    let mut max_residual = 0.0f64;
    let mut norm_ratios = Vec::with_capacity(trials);
    for (k, r) in results.into_iter().enumerate() {
        let (res, ratio) = r?;
        max_residual = max_residual.max(res);
        if k > 0 {
            norm_ratios.push(ratio);
        }
    }
    let band = norm_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max) / median(&norm_ratios);
    Ok(InterpolationReport {
        gamma: prob.gamma,
        max_residual,
        norm_ratios,
        band,
    })
}

/// Largest norm ratio over `trials` random targets for each exponential
/// sequence of length `n`, checked as `max <= 3 median` across the sweep.
pub fn interpolation_sweep<R: Rng + ?Sized>(
    sigma: f64,
    ns: &[usize],
    p: f64,
    w: &Weight,
    gamma: Option<f64>,
    trials: usize,
    rng: &mut R,
    opts: &QuadOptions,
) -> Result<(RatioReport, f64)> {
    let mut worst = Vec::with_capacity(ns.len());
    let mut max_residual = 0.0f64;
    for &n in ns {
        let seq = generate_sequence(&SequenceKind::Exponential { sigma, n })?;
        let prob = InterpolationProblem::new(seq, vec![Complex64::new(0.0, 0.0); n], p, w.clone(), gamma)?;
        let rep = verify_interpolation(&prob, trials, rng, opts)?;
        max_residual = max_residual.max(rep.max_residual);
        worst.push(rep.norm_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let grid = ns.iter().map(|&n| n as f64).collect();
    let report = RatioReport::new(grid, worst, vec![1.0; ns.len()], NORM_BAND);
    Ok((report, max_residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diskgeom::disjoint_disk_radius;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn radial(moduli: &[f64]) -> ZeroSequence {
        generate_sequence(&SequenceKind::Radial { moduli: moduli.to_vec() }).unwrap()
    }

    #[test]
    fn bekolle_anchor() {
        let w = Weight::standard(0.0).unwrap();
        let r = bekolle_check(&w, 2.0, 1.0, &default_bekolle_grid()).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.constant, 1.0 / 3.0, max_relative = 1e-6);
        assert!(bekolle_check(&w, 2.0, -0.4, &default_bekolle_grid()).unwrap().holds);
        let e = bekolle_check(&w, 2.0, -0.6, &default_bekolle_grid()).unwrap_err();
        assert!(matches!(e, Error::Divergence(_)));
    }

    #[test]
    fn bekolle_standard_matches_oracle() {
        // high-precision values of LHS / (1-r)^{pγ+p} for Standard(0.5), p = 3, γ = 0.5
        let w = Weight::standard(0.5).unwrap();
        let r = bekolle_check(&w, 3.0, 0.5, &[0.5, 0.99]).unwrap();
        assert_relative_eq!(r.ratios[0], ORACLE_HALF, max_relative = 1e-6);
        assert_relative_eq!(r.ratios[1], ORACLE_NEAR, max_relative = 1e-6);
    }

    const ORACLE_HALF: f64 = 0.296_620_883_885_331_4;
    const ORACLE_NEAR: f64 = 0.296_296_392_069_510_2;

    #[test]
    fn projection_examples() {
        let o = DiskPoint::origin();
        let one = |_: &DiskPoint| c(1.0, 0.0);
        let opts = QuadOptions::default();
        assert_relative_eq!(projection_p_gamma(one, 1.0, &o, &opts).unwrap(), 1.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(projection_p_gamma(one, 0.0, &o, &opts).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn projection_is_almost_constant_on_separation_disks() {
        let seq = radial(&[0.0, 0.5]);
        let rep = disjoint_disk_radius(&seq, 0.5).unwrap();
        let opts = QuadOptions::default();
        let g = |z: &DiskPoint| c(1.0, 0.0) + z.z();
        for (a, _) in seq.points() {
            let vals: Vec<f64> = (0..8)
                .map(|k| {
                    let rel = rep.disjoint_radius * (k % 2) as f64;
                    let z = DiskPoint::offset(a, rel, TAU * k as f64 / 8.0).unwrap();
                    projection_p_gamma(g, 1.0, &z, &opts).unwrap()
                })
                .collect();
            let hi = vals.iter().copied().fold(0.0, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(hi <= 4.0 * lo, "{vals:?}");
        }
    }

    #[test]
    fn single_node_interpolant_is_constant() {
        let w = Weight::standard(0.0).unwrap();
        let prob = InterpolationProblem::new(radial(&[0.0]), vec![c(0.7, -0.2)], 2.0, w, Some(1.0)).unwrap();
        let f = build_interpolant(&prob).unwrap();
        for z in [c(0.0, 0.0), c(0.3, 0.4), c(-0.9, 0.1)] {
            let v = f.value(&DiskPoint::from_complex(z).unwrap());
            assert!((v - c(0.7, -0.2)).norm() < 1e-15);
        }
        assert!((f.value(&DiskPoint::origin()) * prob.normalizer(&DiskPoint::origin()) - c(0.7, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn two_node_interpolant_vanishes_at_other_node() {
        let w = Weight::standard(0.0).unwrap();
        let prob = InterpolationProblem::new(radial(&[0.0, 0.5]), vec![c(1.0, 0.0), c(0.0, 0.0)], 2.0, w, Some(1.0)).unwrap();
        let f = build_interpolant(&prob).unwrap();
        let z = DiskPoint::from_gap(0.5, 0.0).unwrap();
        assert!((f.value(&z) * prob.normalizer(&z)).norm() < 1e-10);
        assert!((f.value(&DiskPoint::origin()) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn repeated_nodes_are_rejected() {
        let seq = ZeroSequence::new(vec![(DiskPoint::from_gap(0.5, 0.0).unwrap(), 2)]).unwrap();
        let w = Weight::standard(0.0).unwrap();
        assert!(InterpolationProblem::new(seq, vec![c(1.0, 0.0)], 2.0, w, Some(1.0)).is_err());
    }

    #[test]
    fn exponential_interpolation() {
        let seq = generate_sequence(&SequenceKind::Exponential { sigma: 0.5, n: 10 }).unwrap();
        let w = Weight::standard(0.0).unwrap();
        let prob = InterpolationProblem::new(seq, vec![c(1.0, 0.0); 10], 2.0, w, Some(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rep = verify_interpolation(&prob, 20, &mut rng, &QuadOptions::default()).unwrap();
        assert!(rep.max_residual < 1e-8, "{rep:?}");
        assert!(rep.band <= 3.0, "{rep:?}");
    }

    #[test]
    fn derivative_by_cauchy_integral() {
        let w = Weight::standard(0.0).unwrap();
        let prob = InterpolationProblem::new(radial(&[0.0]), vec![c(1.0, 0.0)], 2.0, w, Some(1.0)).unwrap();
        let f = build_interpolant(&prob).unwrap();
        let z = DiskPoint::from_complex(c(0.2, 0.5)).unwrap();
        assert!(f.derivative(&z, 1).norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn problem(targets: Vec<Complex64>) -> InterpolationProblem {
            let seq = generate_sequence(&SequenceKind::RotatedExponential { sigma: 0.4, n: 4 }).unwrap();
            InterpolationProblem::new(seq, targets, 1.7, Weight::standard(0.3).unwrap(), None).unwrap()
        }

        fn targets() -> impl Strategy<Value = Vec<Complex64>> {
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), 4)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn linear_in_targets(a in targets(), b in targets(), x in -0.9..0.9f64, y in -0.4..0.4f64) {
                let sum: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
                let z = DiskPoint::from_complex(Complex64::new(x, y)).unwrap();
                let fa = build_interpolant(&problem(a)).unwrap().value(&z);
                let fb = build_interpolant(&problem(b)).unwrap().value(&z);
                let fs = build_interpolant(&problem(sum)).unwrap().value(&z);
                prop_assert!((fs - fa - fb).norm() <= 1e-10 * (1.0 + fa.norm() + fb.norm()));
            }

            #[test]
            fn scaling_equivariant(a in targets(), s in -3.0..3.0f64, x in -0.9..0.9f64) {
                let z = DiskPoint::from_complex(Complex64::new(x, 0.1)).unwrap();
                let scaled: Vec<Complex64> = a.iter().map(|u| u * s).collect();
                let fa = build_interpolant(&problem(a)).unwrap().value(&z);
                let fs = build_interpolant(&problem(scaled)).unwrap().value(&z);
                prop_assert!((fs - fa * s).norm() <= 1e-12 * (1.0 + fs.norm()));
            }

            #[test]
            fn interpolates_exactly(a in targets()) {
                let prob = problem(a);
                let f = build_interpolant(&prob).unwrap();
                prop_assert!(residual(&prob, &f) < 1e-10);
            }
        }
    }
}
