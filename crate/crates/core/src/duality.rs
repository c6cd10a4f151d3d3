//! Pairings on the disk: the Cauchy–Green identity, its residue form for
//! Blaschke products, dual-norm estimates over a fixed dictionary and the
//! model-space harness.
//!
//! Area integrals use the normalized measure, so the boundary side of the
//! Cauchy–Green identity is `(1/2πi) ∮ conj(f) g dz`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::analytic::Analytic;
use crate::blaschke::{factor_unit, omitted_products, BlaschkeProduct};
use crate::diskgeom::{generate_sequence, SequenceKind, ZeroSequence};
use crate::error::{domain, Error, Result};
use crate::interpolation::random_targets;
use crate::point::{DiskPoint, MobiusParts};
use crate::poly::Polynomial;
use crate::quad::{circle_integral, integrate_disk_complex, integrate_disk_value, GradedDiskRule, QuadOptions};
use crate::report::{RatioReport, Rule};
use crate::theorems::{
    derivative_integral, exponential_product, exponential_sweep, parameter_gate, require_separated, single,
    GateExtra, GateSpec, TheoremId, TheoremReport,
};
use crate::weights::Weight;

/// Relative agreement required of the area and boundary pairings.
pub const STOKES_TOL: f64 = 1e-8;
/// Relative agreement required of the residue sum.
pub const RESIDUE_TOL: f64 = 1e-7;

/// Sweep rule of the F-property ratios.
pub const FPROPERTY_SWEEP: Rule = Rule::SweepUpper { factor: 5.0 };
/// Band of the derivative norm against the quotient sum.
pub const PROP32_BAND: Rule = Rule::Band { max_spread: 10.0 };
/// Band of the zero sum against the derivative integral in the model-space
/// comparison.
pub const COHN_BAND: Rule = Rule::Band { max_spread: 20.0 };

const MAX_BOUNDARY_NODES: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct PairingResult {
    /// `∫ conj(f') g dA`.
    pub area_value: Complex64,
    /// `(1/2πi) ∮ conj(f) g dz`.
    pub boundary_value: Complex64,
    pub residue_value: Option<Complex64>,
    /// Largest pairwise difference, relative to the largest value (floored
    /// at `1e-6 ∫ |f'| |g| dA`).
    pub max_discrepancy: f64,
}

fn min_feature_gap(features: &[DiskPoint]) -> f64 {
    features.iter().map(|a| a.gap()).fold(1.0, f64::min)
}

fn boundary_pairing(f: &dyn Analytic, g: &Polynomial) -> Complex64 {
    let g_min = min_feature_gap(&f.features());
    let n = ((40.0 / g_min).ceil() as usize)
        .max(512)
        .next_power_of_two()
        .min(MAX_BOUNDARY_NODES);
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let z = DiskPoint::from_gap_unchecked(0.0, TAU * k as f64 / n as f64);
        s += f.value(&z).conj() * g.eval(z.z()) * z.z();
    }
    s / n as f64
}

fn discrepancy(values: &[Complex64], abs_scale: f64) -> f64 {
    let scale = values
        .iter()
        .map(|v| v.norm())
        .fold(1e-6 * abs_scale, f64::max);
    let mut worst = 0.0f64;
    for (i, x) in values.iter().enumerate() {
        for y in &values[i + 1..] {
            worst = worst.max((x - y).norm() / scale);
        }
    }
    worst
}

fn area_pairing(f: &dyn Analytic, g: &Polynomial, opts: &QuadOptions) -> Result<(Complex64, f64)> {
    let rule = GradedDiskRule::new(&f.features(), 0.0, opts)?;
    let value = integrate_disk_complex(|z| f.derivative(z, 1).conj() * g.eval(z.z()), &rule)?;
    let abs = integrate_disk_value(|z| f.derivative(z, 1).norm() * g.eval(z.z()).norm(), &rule)?;
    Ok((value, abs))
}

/// Both sides of `∫ conj(f') g dA = (1/2πi) ∮ conj(f) g dz` for `f`
/// analytic across the circle (polynomials and finite Blaschke products).
pub fn stokes_pairing(f: &dyn Analytic, g: &Polynomial, opts: &QuadOptions) -> Result<PairingResult> {
    let (area_value, abs) = area_pairing(f, g, opts)?;
    let boundary_value = boundary_pairing(f, g);
    let max_discrepancy = discrepancy(&[area_value, boundary_value], abs);
    if !(max_discrepancy <= STOKES_TOL) {
        return Err(Error::IdentityViolation(format!(
            "area pairing {area_value} and boundary pairing {boundary_value} differ by {max_discrepancy:e} (relative)"
        )));
    }
    Ok(PairingResult {
        area_value,
        boundary_value,
        residue_value: None,
        max_discrepancy,
    })
}

/// Nodes `z_n` and weights `(1-|z_n|^2) / (κ_n B_n(z_n))` with
/// `κ_n = -conj(z_n)/|z_n|` (`1` at the origin), so that
/// `(1/2πi) ∮ conj(B) g dz = Σ_n weight_n g(z_n)`.
pub fn residue_weights(b: &BlaschkeProduct) -> Result<Vec<(DiskPoint, Complex64)>> {
    let zeros = b.zeros();
    for (i, a) in zeros.iter().enumerate() {
        if zeros[i + 1..].iter().any(|c| c.z() == a.z()) {
            return Err(Error::Unsupported("residue form needs simple zeros".into()));
        }
    }
    Ok(zeros
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let bn = b.constant() * omitted_products(zeros, a)[n];
            let kappa = -factor_unit(a);
            (*a, a.one_minus_mod_sq() / (kappa * bn))
        })
        .collect())
}

/// The residue sum against the area and boundary pairings of
/// [`stokes_pairing`].
pub fn residue_pairing(b: &BlaschkeProduct, g: &Polynomial, opts: &QuadOptions) -> Result<PairingResult> {
    let weights = residue_weights(b)?;
    let residue: Complex64 = weights.iter().map(|(a, c)| c * g.eval(a.z())).sum();
    let (area_value, abs) = area_pairing(b, g, opts)?;
    let boundary_value = boundary_pairing(b, g);
    let max_discrepancy = discrepancy(&[area_value, boundary_value, residue], abs);
    if !(max_discrepancy <= RESIDUE_TOL) {
        return Err(Error::IdentityViolation(format!(
            "residue sum {residue}, area {area_value}, boundary {boundary_value}: relative discrepancy {max_discrepancy:e}"
        )));
    }
    Ok(PairingResult {
        area_value,
        boundary_value,
        residue_value: Some(residue),
        max_discrepancy,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Monomial(usize),
    /// `(1 - conj(c) z)^{-exponent}`.
    Kernel { center: DiskPoint, exponent: f64 },
}

impl TestFunction {
    pub fn eval(&self, z: &DiskPoint) -> Complex64 {
        match self {
            TestFunction::Monomial(k) => z.z().powu(*k as u32),
            TestFunction::Kernel { center, exponent } => {
                (-exponent * MobiusParts::new(center, z).ln_one_minus_conj_a_z()).exp()
            }
        }
    }

    fn features(&self) -> Vec<DiskPoint> {
        match self {
            TestFunction::Monomial(_) => Vec::new(),
            TestFunction::Kernel { center, .. } => vec![*center],
        }
    }
}

/// Finite family of test functions `g`, each with a scale factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    elements: Vec<(TestFunction, f64)>,
}

pub const DICTIONARY_MONOMIALS: usize = 32;
const KERNEL_RADII: usize = 8;
const KERNEL_ANGLES: usize = 8;

impl Dictionary {
    pub fn new(functions: Vec<TestFunction>) -> Self {
        Self {
            elements: functions.into_iter().map(|g| (g, 1.0)).collect(),
        }
    }

    /// Monomials `z^0..z^31` and kernels `(1 - conj(c) z)^{-s}` for
    /// `s ∈ {1, γ+1}` at 64 centres: moduli `1 - 2^{-j}`, `j = 1..8`, each at
    /// eight angles offset by `π/8` on odd rings.
    pub fn standard(gamma: f64) -> Self {
        let mut exponents = vec![1.0];
        if gamma.abs() > 1e-12 {
            exponents.push(gamma + 1.0);
        }
        let mut f: Vec<TestFunction> = (0..DICTIONARY_MONOMIALS).map(TestFunction::Monomial).collect();
        for j in 1..=KERNEL_RADII {
            for k in 0..KERNEL_ANGLES {
                let theta = TAU * k as f64 / KERNEL_ANGLES as f64 + if j % 2 == 1 { PI / 8.0 } else { 0.0 };
                let center = DiskPoint::from_gap_unchecked(0.5f64.powi(j as i32), theta);
                for &exponent in &exponents {
                    f.push(TestFunction::Kernel { center, exponent });
                }
            }
        }
        Self::new(f)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self {
            elements: self.elements[..n.min(self.len())].to_vec(),
        }
    }

    /// Scaled value of element `k`.
    pub fn eval(&self, k: usize, z: &DiskPoint) -> Complex64 {
        let (g, s) = &self.elements[k];
        g.eval(z) * *s
    }

    pub fn functions(&self) -> impl Iterator<Item = &TestFunction> {
        self.elements.iter().map(|(g, _)| g)
    }

    /// Each element rescaled to unit norm in the dual space of `pairing`.
    pub fn normalized(&self, p: f64, w: &Weight, pairing: DualPairing, opts: &QuadOptions) -> Result<Self> {
        let q = conjugate(p)?;
        let ix = w.indices()?;
        let elements = self
            .elements
            .par_iter()
            .map(|(g, _)| {
                let (extra, hint) = match pairing {
                    DualPairing::Unweighted => (0.0, -ix.b * q / p),
                    DualPairing::Weighted { gamma } => ((q - 1.0) * gamma, (q - 1.0) * gamma - ix.b * q / p),
                };
                let rule = GradedDiskRule::new(&g.features(), hint, opts)?;
                let pow = integrate_disk_value(
                    |z| g.eval(z).norm().powf(q) * w.at(z).powf(-q / p) * z.gap().powf(extra),
                    &rule,
                )?;
                Ok((g.clone(), pow.powf(-1.0 / q)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements })
    }
}

fn conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return domain(format!("duality needs p > 1, got {p}"));
    }
    Ok(p / (p - 1.0))
}

/// Pairing that identifies the dual of `L^p_a(w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualPairing {
    /// `∫ f conj(g) dA` against `L^q(w^{-q/p})`.
    Unweighted,
    /// `∫ f conj(g) (1-|z|^2)^γ dA` against `L^q(w^{-q/p} (1-|z|)^{(q-1)γ})`.
    Weighted { gamma: f64 },
}

/// `sup_g |⟨f, g⟩|` over the dictionary normalized in the dual space: a
/// lower estimate of the norm of `f`. With the unweighted pairing it never
/// exceeds `‖f‖_{p,w}`, by Hölder's inequality.
pub fn dual_norm_estimate(
    f: &dyn Analytic,
    p: f64,
    w: &Weight,
    pairing: DualPairing,
    dictionary: &Dictionary,
    opts: &QuadOptions,
) -> Result<f64> {
    let q = conjugate(p)?;
    match pairing {
        DualPairing::Unweighted => {
            parameter_gate(TheoremId::Duality, p, w, GateExtra::default())?.require_admissible()?;
        }
        DualPairing::Weighted { gamma } => {
            let floor = w.indices()?.a / p - 1.0 / q;
            if !(gamma > floor) {
                return Err(Error::Gate(format!("γ = {gamma} must exceed a_w/p - 1/q = {floor}")));
            }
        }
    }
    if dictionary.is_empty() {
        return Ok(0.0);
    }
    let normalized = dictionary.normalized(p, w, pairing, opts)?;
    let f_features = f.features();
    let values = (0..normalized.len())
        .into_par_iter()
        .map(|k| {
            let mut features = f_features.clone();
            features.extend(normalized.elements[k].0.features());
            let (hint, gamma) = match pairing {
                DualPairing::Unweighted => (0.0, 0.0),
                DualPairing::Weighted { gamma } => (gamma, gamma),
            };
            let rule = GradedDiskRule::new(&features, hint, opts)?;
            let v = integrate_disk_complex(
                |z| {
                    let mut t = f.value(z).conj() * normalized.eval(k, z);
                    if gamma != 0.0 {
                        t *= z.one_minus_mod_sq().powf(gamma);
                    }
                    t
                },
                &rule,
            )?;
            Ok(v.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

fn contains_zeros(outer: &BlaschkeProduct, inner: &BlaschkeProduct) -> bool {
    let mut used = vec![false; outer.degree()];
    inner.zeros().iter().all(|a| {
        match outer
            .zeros()
            .iter()
            .enumerate()
            .position(|(k, c)| !used[k] && (c.z() - a.z()).norm() <= 1e-12)
        {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

/// `‖θ_1'‖_{p,w} / ‖θ_2'‖_{p,w}` for `θ_1` dividing `θ_2`.
pub fn fproperty_check(
    theta1: &BlaschkeProduct,
    theta2: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    opts: &QuadOptions,
) -> Result<f64> {
    parameter_gate(TheoremId::Duality, p, w, GateExtra::default())?.require_admissible()?;
    if !contains_zeros(theta2, theta1) {
        return domain("theta2 / theta1 is not a Blaschke product: zeros of theta1 missing from theta2");
    }
    let n1 = derivative_integral(theta1, p, w, 0.0, false, opts)?.powf(1.0 / p);
    let n2 = derivative_integral(theta2, p, w, 0.0, false, opts)?.powf(1.0 / p);
    Ok(n1 / n2)
}

/// `θ_2` exponential with `N` zeros and `θ_1` its partial product of length
/// `N/2`, checked as `max <= 5 median`.
pub fn fproperty_sweep(sigma: f64, ns: &[usize], p: f64, w: &Weight, opts: &QuadOptions) -> Result<RatioReport> {
    let ratios = ns
        .par_iter()
        .map(|&n| {
            let theta2 = exponential_product(sigma, n)?;
            let theta1 = theta2.partial_product(n / 2)?;
            fproperty_check(&theta1, &theta2, p, w, opts)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RatioReport::new(
        ns.iter().map(|&n| n as f64).collect(),
        ratios,
        vec![1.0; ns.len()],
        FPROPERTY_SWEEP,
    ))
}

/// `Σ (1-|z_n|)^{2-p} w(|z_n|) |B_n(z_n)|^{power}`.
fn weighted_omitted_sum(b: &BlaschkeProduct, p: f64, w: &Weight, power: f64) -> f64 {
    b.zeros()
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let bn = omitted_products(b.zeros(), a)[n].norm();
            a.gap().powf(2.0 - p) * w.at(a) * bn.powf(power)
        })
        .sum()
}

/// `‖B'‖^p / Σ (1-|z_n|)^{2-p} w(|z_n|) / |B_n(z_n)|^p`. The notes carry
/// both sides of the averaged lower bound for `|B_n(z_n)|`, computed but not
/// asserted in either direction.
pub fn prop32_ratio(b: &BlaschkeProduct, p: f64, w: &Weight, opts: &QuadOptions) -> Result<TheoremReport> {
    let gate = parameter_gate(TheoremId::Duality, p, w, GateExtra::default())?;
    gate.require_admissible()?;
    require_separated(b)?;
    let lhs = derivative_integral(b, p, w, 0.0, false, opts)?;
    let quotients = weighted_omitted_sum(b, p, w, -p);
    let products = weighted_omitted_sum(b, p, w, p);
    let mut out = single(gate, b.degree() as f64, lhs, quotients);
    out.report.notes.push(format!(
        "averaged lower bound: sum of quotients {quotients:e}, sum of products {products:e}, ratio {:e}",
        quotients / products
    ));
    Ok(out)
}

/// [`prop32_ratio`] over the exponential family, checked as a band of
/// spread at most 10.
pub fn prop32_sweep(sigma: f64, ns: &[usize], p: f64, w: &Weight, opts: &QuadOptions) -> Result<TheoremReport> {
    exponential_sweep(sigma, ns, PROP32_BAND, |b| prop32_ratio(b, p, w, opts))
}

/// `sup_g |Σ_{n<N} (1-|z_n|^2) g(z_n) / (κ_n B^{[N]}_n(z_n))|` over the
/// dictionary (with its scales), `B^{[N]}` the partial product of length `N`.
pub fn partial_sum_functional(b: &BlaschkeProduct, n: usize, dictionary: &Dictionary) -> Result<f64> {
    let partial = b.partial_product(n)?;
    let weights = residue_weights(&partial)?;
    Ok((0..dictionary.len())
        .map(|k| {
            weights
                .iter()
                .map(|(a, c)| c * dictionary.eval(k, a))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max))
}

/// `f(z) = Σ_n c_n (1-|z_n|)^{1/q} / (1 - conj(z_n) z)`.
#[derive(Clone, Debug)]
pub struct KernelSum {
    nodes: Vec<DiskPoint>,
    coefficients: Vec<Complex64>,
}

/// Radii of the circle means behind the Hardy-norm proxy.
pub const HARDY_RADII: [f64; 3] = [0.9, 0.95, 0.975];
const HARDY_NODES: usize = 4096;

pub fn model_space_sample(seq: &ZeroSequence, c: &[Complex64], q: f64) -> Result<KernelSum> {
    if !(q > 1.0) {
        return domain(format!("conjugate exponent q = {q} must exceed 1"));
    }
    if c.len() != seq.len() {
        return domain(format!("{} coefficients for {} nodes", c.len(), seq.len()));
    }
    if !seq.is_simple() {
        return Err(Error::Separation("model-space nodes must be distinct".into()));
    }
    let nodes = seq.flattened();
    let coefficients = nodes
        .iter()
        .zip(c)
        .map(|(a, c)| c * a.gap().powf(1.0 / q))
        .collect();
    Ok(KernelSum { nodes, coefficients })
}

impl KernelSum {
    /// `‖f‖_{H^p}` from the circle means at [`HARDY_RADII`], extrapolated to
    /// the circle; never below the last mean.
    pub fn hardy_norm_proxy(&self, p: f64) -> Result<f64> {
        let mut m = [0.0; 3];
        for (mi, &r) in m.iter_mut().zip(&HARDY_RADII) {
            *mi = (circle_integral(|z| self.value(z), r, p, HARDY_NODES)? / TAU).powf(1.0 / p);
        }
        let (d1, d2) = (m[1] - m[0], m[2] - m[1]);
        if !(d1 > 0.0 && d2 > 0.0) {
            return Ok(m[2]);
        }
        Ok(if d2 < d1 { m[2] + d2 * d2 / (d1 - d2) } else { m[2] + d2 })
    }
}

impl Analytic for KernelSum {
    fn value(&self, z: &DiskPoint) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.coefficients)
            .map(|(a, c)| c / MobiusParts::new(a, z).one_minus_conj_a_z())
            .sum()
    }

    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64 {
        let factorial: f64 = (1..=order).map(|k| k as f64).product();
        self.nodes
            .iter()
            .zip(&self.coefficients)
            .map(|(a, c)| {
                let d = MobiusParts::new(a, z).one_minus_conj_a_z();
                c * factorial * a.z().conj().powu(order as u32) / d.powu(order as u32 + 1)
            })
            .sum()
    }

    fn features(&self) -> Vec<DiskPoint> {
        self.nodes.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohnReport {
    pub gate: GateSpec,
    /// `1/r = 1/s - 1/p`.
    pub r: f64,
    /// Largest `‖f'‖_{s,w}` over the random unit-coefficient samples.
    pub max_derivative_norm: f64,
    /// `Σ w(|z_n|)^{r/s} (1-|z_n|)^{2-r/q}`.
    pub zero_sum: f64,
    /// `∫ |B'|^{r/q} w^{r/s} dA`.
    pub derivative_integral: f64,
    /// `max_derivative_norm^r / zero_sum`.
    pub sample_ratio: f64,
    /// `zero_sum / derivative_integral`.
    pub sum_ratio: f64,
}

/// Model-space derivatives against the derivative of `B`: samples
/// `f = Σ c_n (1-|z_n|)^{1/q}/(1 - conj(z_n) z)` with `Σ |c_n|^p = 1` and
/// compares `sup ‖f'‖_{s,w}^r`, the zero sum and `∫ |B'|^{r/q} w^{r/s}`.
pub fn verify_cohn_analogue<R: Rng + ?Sized>(
    seq: &ZeroSequence,
    p: f64,
    s: f64,
    w: &Weight,
    trials: usize,
    rng: &mut R,
    opts: &QuadOptions,
) -> Result<CohnReport> {
    let gate = parameter_gate(
        TheoremId::CohnAnalogue,
        p,
        w,
        GateExtra {
            s: Some(s),
            ..Default::default()
        },
    )?;
    gate.require_admissible()?;
    let b = BlaschkeProduct::from_sequence(seq)?;
    require_separated(&b)?;
    let q = conjugate(p)?;
    let r = 1.0 / (1.0 / s - 1.0 / p);
    let ix = w.indices()?;
    let samples: Vec<Vec<Complex64>> = (0..trials).map(|_| random_targets(seq.len(), p, rng)).collect();
    let rule = GradedDiskRule::new(b.zeros(), ix.b, opts)?;
    let norms = samples
        .par_iter()
        .map(|c| {
            let f = model_space_sample(seq, c, q)?;
            Ok(integrate_disk_value(|z| f.derivative(z, 1).norm().powf(s) * w.at(z), &rule)?.powf(1.0 / s))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_derivative_norm = norms.into_iter().fold(0.0, f64::max);
    let zero_sum: f64 = b
        .zeros()
        .iter()
        .map(|a| w.at(a).powf(r / s) * a.gap().powf(2.0 - r / q))
        .sum();
    let t_rule = GradedDiskRule::new(b.zeros(), ix.b * r / s, opts)?;
    let derivative_integral = integrate_disk_value(
        |z| b.derivative1(z).norm().powf(r / q) * w.at(z).powf(r / s),
        &t_rule,
    )?;
    Ok(CohnReport {
        gate,
        r,
        max_derivative_norm,
        zero_sum,
        derivative_integral,
        sample_ratio: max_derivative_norm.powf(r) / zero_sum,
        sum_ratio: zero_sum / derivative_integral,
    })
}

/// [`verify_cohn_analogue`] over exponential sequences: the sample ratios
/// must stay finite and the sum ratios within a band of spread 20.
pub fn cohn_sweep<R: Rng + ?Sized>(
    sigma: f64,
    ns: &[usize],
    p: f64,
    s: f64,
    w: &Weight,
    trials: usize,
    rng: &mut R,
    opts: &QuadOptions,
) -> Result<(RatioReport, RatioReport)> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let seq = generate_sequence(&SequenceKind::Exponential { sigma, n })?;
        rows.push(verify_cohn_analogue(&seq, p, s, w, trials, rng, opts)?);
    }
    let grid: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let samples = RatioReport::new(
        grid.clone(),
        rows.iter().map(|c| c.max_derivative_norm.powf(c.r)).collect(),
        rows.iter().map(|c| c.zero_sum).collect(),
        Rule::Finite,
    );
    let sums = RatioReport::new(
        grid,
        rows.iter().map(|c| c.zero_sum).collect(),
        rows.iter().map(|c| c.derivative_integral).collect(),
        COHN_BAND,
    );
    Ok((samples, sums))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    fn radial(moduli: &[f64]) -> BlaschkeProduct {
        BlaschkeProduct::from_sequence(&generate_sequence(&SequenceKind::Radial { moduli: moduli.to_vec() }).unwrap()).unwrap()
    }

    fn close(x: Complex64, y: f64, tol: f64) -> bool {
        (x - c(y, 0.0)).norm() <= tol
    }

    #[test]
    fn stokes_examples() {
        let one = Polynomial::constant(c(1.0, 0.0));
        let z = Polynomial::monomial(1);
        let z2 = Polynomial::monomial(2);
        let r = stokes_pairing(&z, &one, &opts()).unwrap();
        assert!(close(r.area_value, 1.0, 1e-12) && close(r.boundary_value, 1.0, 1e-12));
        let r = stokes_pairing(&z2, &z, &opts()).unwrap();
        assert!(close(r.area_value, 1.0, 1e-12) && close(r.boundary_value, 1.0, 1e-12));
        let r = stokes_pairing(&z, &z, &opts()).unwrap();
        assert!(close(r.area_value, 0.0, 1e-12) && close(r.boundary_value, 0.0, 1e-12));
    }

    #[test]
    fn residue_examples() {
        let one = Polynomial::constant(c(1.0, 0.0));
        let r = residue_pairing(&radial(&[0.0]), &one, &opts()).unwrap();
        assert!(close(r.residue_value.unwrap(), 1.0, 1e-14));
        // ∫ conj(B') dA = conj(B'(0)) by the mean value property
        let r = residue_pairing(&radial(&[0.0, 0.5]), &one, &opts()).unwrap();
        assert!(close(r.residue_value.unwrap(), 0.5, 1e-14));
        assert!(close(r.area_value, 0.5, 1e-12));
        let r = residue_pairing(&radial(&[0.5]), &one, &opts()).unwrap();
        assert!(close(r.residue_value.unwrap(), -0.75, 1e-14));
        assert!(close(r.area_value, -0.75, 1e-12));
    }

    #[test]
    fn residue_weights_match_derivative() {
        let b = BlaschkeProduct::from_complex(&[c(0.3, 0.4), c(-0.5, 0.1), c(0.0, -0.8)]).unwrap();
        for (a, wt) in residue_weights(&b).unwrap() {
            assert!((wt - 1.0 / b.derivative1(&a)).norm() < 1e-12);
        }
    }

    #[test]
    fn repeated_zeros_are_unsupported() {
        let b = radial(&[0.5, 0.5]);
        let e = residue_pairing(&b, &Polynomial::constant(c(1.0, 0.0)), &opts()).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }

    #[test]
    fn dual_estimate_of_constant() {
        let w = Weight::standard(-0.2).unwrap();
        let one = Polynomial::constant(c(1.0, 0.0));
        let dict = Dictionary::standard(1.0);
        let v = dual_norm_estimate(&one, 1.7, &w, DualPairing::Unweighted, &dict, &opts()).unwrap();
        assert!((0.2..=1.1).contains(&v), "{v}");
        assert!(v <= 1.0 + 1e-6);
        let empty = Dictionary::new(Vec::new());
        assert_eq!(dual_norm_estimate(&one, 1.7, &w, DualPairing::Unweighted, &empty, &opts()).unwrap(), 0.0);
    }

    #[test]
    fn dual_estimate_of_identity_is_positive() {
        let w = Weight::standard(-0.2).unwrap();
        let z = Polynomial::monomial(1);
        let dict = Dictionary::new(vec![TestFunction::Monomial(1)]);
        let v = dual_norm_estimate(&z, 1.7, &w, DualPairing::Unweighted, &dict, &opts()).unwrap();
        assert!(v > 0.0);
        let norm = crate::quad::bergman_norm(|q| q.z(), 1.7, &w, &GradedDiskRule::new(&[], -0.2, &opts()).unwrap()).unwrap();
        assert!(v <= norm * (1.0 + 1e-6));
    }

    #[test]
    fn dual_estimate_is_gated() {
        let w = Weight::standard(-0.5).unwrap();
        let one = Polynomial::constant(c(1.0, 0.0));
        let e = dual_norm_estimate(&one, 2.0, &w, DualPairing::Unweighted, &Dictionary::standard(1.0), &opts());
        assert!(matches!(e, Err(Error::Gate(_))));
    }

    #[test]
    fn fproperty_examples() {
        let w = Weight::standard(-0.4).unwrap();
        let z = radial(&[0.0]);
        let z2 = radial(&[0.0, 0.0]);
        let r = fproperty_check(&z, &z2, 1.5, &w, &opts()).unwrap();
        // ‖1‖ = 1 and ‖2z‖^{3/2} = 2^{3/2} ∫ |z|^{3/2} w dA
        let rule = GradedDiskRule::new(&[], -0.4, &opts()).unwrap();
        let n2 = crate::quad::bergman_norm(|q| q.z() * 2.0, 1.5, &w, &rule).unwrap();
        assert_relative_eq!(r, 1.0 / n2, max_relative = 1e-9);
        assert_relative_eq!(fproperty_check(&z2, &z2, 1.5, &w, &opts()).unwrap(), 1.0, max_relative = 1e-12);
        assert!(fproperty_check(&radial(&[0.5]), &z2, 1.5, &w, &opts()).is_err());
    }

    #[test]
    fn fproperty_sweep_is_bounded() {
        let w = Weight::standard(-0.4).unwrap();
        let r = fproperty_sweep(0.5, &[2, 4, 8, 16], 1.5, &w, &opts()).unwrap();
        assert!(r.verdict.passed(), "{r:?}");
    }

    #[test]
    fn prop32_anchor() {
        let w = Weight::standard(-0.4).unwrap();
        let r = prop32_ratio(&radial(&[0.0]), 1.5, &w, &opts()).unwrap();
        assert_relative_eq!(r.report.ratios[0], 1.0 / 0.6, max_relative = 1e-9);
    }

    #[test]
    fn prop32_ratio_settles() {
        // small N is dominated by the end zeros, whose omitted products are
        // larger; once interior zeros dominate the ratio stabilizes
        let w = Weight::standard(-0.4).unwrap();
        let r = prop32_sweep(0.5, &[16, 32], 1.5, &w, &opts()).unwrap();
        assert!(r.report.spread < 1.5, "{:?}", r.report);
    }

    #[test]
    fn partial_sums() {
        let one = Dictionary::new(vec![TestFunction::Monomial(0)]);
        assert_relative_eq!(partial_sum_functional(&radial(&[0.0]), 1, &one).unwrap(), 1.0);
        assert_relative_eq!(partial_sum_functional(&radial(&[0.0, 0.5]), 2, &one).unwrap(), 0.5, max_relative = 1e-14);
        let b = BlaschkeProduct::from_complex(&[c(0.3, 0.4), c(-0.5, 0.1), c(0.0, -0.8)]).unwrap();
        let dict = Dictionary::new((0..4).map(TestFunction::Monomial).collect());
        let full = partial_sum_functional(&b, 3, &dict).unwrap();
        let best = (0..4)
            .map(|k| {
                let g = Polynomial::monomial(k);
                residue_pairing(&b, &g, &opts()).unwrap().residue_value.unwrap().norm()
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(full, best, max_relative = 1e-12);
    }

    #[test]
    fn model_space_examples() {
        let seq = generate_sequence(&SequenceKind::Radial { moduli: vec![0.0] }).unwrap();
        let f = model_space_sample(&seq, &[c(1.0, 0.0)], 2.0).unwrap();
        assert!(close(f.value(&DiskPoint::from_gap(0.3, 1.0).unwrap()), 1.0, 1e-15));
        assert_relative_eq!(f.hardy_norm_proxy(2.0).unwrap(), 1.0, max_relative = 1e-3);
        let seq = generate_sequence(&SequenceKind::Radial { moduli: vec![0.0, 0.5] }).unwrap();
        let f = model_space_sample(&seq, &[c(1.0, 0.0), c(0.0, 0.0)], 2.0).unwrap();
        assert!(close(f.value(&DiskPoint::from_gap(0.1, 2.0).unwrap()), 1.0, 1e-15));
    }

    #[test]
    fn hardy_proxy_of_kernel() {
        // ‖(1 - a z)^{-1}‖_{H^2}^2 = 1/(1 - a^2)
        let seq = generate_sequence(&SequenceKind::Radial { moduli: vec![0.5] }).unwrap();
        let f = model_space_sample(&seq, &[c(1.0, 0.0)], 2.0).unwrap();
        let exact = 0.5f64.sqrt() / 0.75f64.sqrt();
        assert_relative_eq!(f.hardy_norm_proxy(2.0).unwrap(), exact, max_relative = 1e-3);
    }

    #[test]
    fn model_space_derivatives() {
        let seq = generate_sequence(&SequenceKind::RotatedExponential { sigma: 0.5, n: 3 }).unwrap();
        let f = model_space_sample(&seq, &[c(1.0, 0.5), c(-0.3, 0.2), c(0.1, 0.0)], 1.5).unwrap();
        let z = DiskPoint::from_complex(c(0.2, -0.3)).unwrap();
        for k in 1..3 {
            let numeric = crate::analytic::cauchy_derivative(|q| f.value(q), &z, k);
            assert!((numeric - f.derivative(&z, k)).norm() < 1e-9 * numeric.norm());
        }
    }

    #[test]
    fn cohn_single_kernel() {
        let seq = generate_sequence(&SequenceKind::Radial { moduli: vec![0.0] }).unwrap();
        let w = Weight::standard(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = verify_cohn_analogue(&seq, 3.0, 1.5, &w, 4, &mut rng, &opts()).unwrap();
        assert_eq!(r.max_derivative_norm, 0.0);
        assert_relative_eq!(r.r, 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.zero_sum, 1.1f64.powf(2.0), max_relative = 1e-14);
    }

    #[test]
    fn cohn_sweep_bands() {
        let w = Weight::standard(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (samples, sums) = cohn_sweep(0.5, &[2, 4, 8], 3.0, 1.5, &w, 20, &mut rng, &opts()).unwrap();
        assert!(samples.verdict.passed(), "{samples:?}");
        assert!(sums.verdict.passed(), "{sums:?}");
        let gated = cohn_sweep(0.5, &[8], 3.0, 1.5, &Weight::standard(-0.3).unwrap(), 2, &mut rng, &opts());
        assert!(matches!(gated, Err(Error::Gate(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn zero() -> impl Strategy<Value = Complex64> {
            (0.0..0.9f64, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
        }

        fn poly(max_degree: usize) -> impl Strategy<Value = Polynomial> {
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), 1..=max_degree + 1)
                .prop_map(Polynomial::new)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn residue_identity(zs in prop::collection::vec(zero(), 1..=8), g in poly(5)) {
                let b = BlaschkeProduct::from_complex(&zs).unwrap();
                prop_assume!(residue_weights(&b).is_ok());
                let r = residue_pairing(&b, &g, &QuadOptions::default());
                prop_assert!(r.is_ok(), "{r:?}");
            }

            #[test]
            fn dual_estimate_is_monotone_and_below_norm(k in 1usize..40) {
                let w = Weight::standard(-0.2).unwrap();
                let f = Polynomial::new(vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.2)]);
                let dict = Dictionary::standard(1.0);
                let o = QuadOptions { rad_order: 64, ang_order: 128, kappa: None };
                let small = dual_norm_estimate(&f, 1.7, &w, DualPairing::Unweighted, &dict.truncated(k), &o).unwrap();
                let large = dual_norm_estimate(&f, 1.7, &w, DualPairing::Unweighted, &dict.truncated(k + 1), &o).unwrap();
                prop_assert!(small <= large);
                let norm = crate::quad::bergman_norm(|q| f.eval(q.z()), 1.7, &w, &GradedDiskRule::new(&[], -0.2, &o).unwrap()).unwrap();
                prop_assert!(large <= norm * (1.0 + 1e-6));
            }
        }
    }
}
