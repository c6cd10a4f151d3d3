//! Harnesses for the zero-sum estimates of `‖B'‖_{p,w}`, their endpoint
//! and higher-order variants, and the counting-function estimate.

pub mod gate;
mod inner;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::analytic::Analytic;
use crate::blaschke::{counting_term, BlaschkeProduct};
use crate::diskgeom::{generate_sequence, separation_constant, SequenceKind, ZeroSequence};
use crate::error::{domain, Error, Result};
use crate::point::DiskPoint;
use crate::poly::Polynomial;
use crate::quad::{circle_integral_graded, integrate_disk_value, GradedDiskRule, QuadOptions};
use crate::report::{RatioReport, Rule};
use crate::weights::{log_factor, Weight};

pub use gate::{parameter_gate, Branch, GateExtra, GateSpec, GateVariant, TheoremId};
pub use inner::{averaged_counting, sublevel_integral, verify_inner_est, InnerReport, INNER_AGREEMENT};

/// Ratio report together with the gate that admitted it.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub gate: GateSpec,
    pub report: RatioReport,
}

/// Upper or lower direction of a two-sided estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// `Σ (1-|z|)^{2-p} w(|z|)` over the zeros with multiplicity, times
/// `log(e/(1-|z|))` when `log_variant` is set.
///
/// Equal zeros are grouped first, so that `zero_sum(B^n)` equals
/// `n zero_sum(B)` bit for bit whenever `n` is a power of two.
pub fn zero_sum(b: &BlaschkeProduct, p: f64, w: &Weight, log_variant: bool) -> f64 {
    grouped(b.zeros())
        .iter()
        .map(|(z, m)| *m as f64 * counting_term(z, w, p, log_variant))
        .sum()
}

fn grouped(zeros: &[DiskPoint]) -> Vec<(DiskPoint, usize)> {
    let mut out: Vec<(DiskPoint, usize)> = Vec::new();
    for z in zeros {
        match out.iter_mut().find(|(q, _)| q == z) {
            Some((_, m)) => *m += 1,
            None => out.push((*z, 1)),
        }
    }
    out
}

/// `∫ |B'|^p w (1-|z|)^shift dA`, with a `log(e/(1-|z|))` factor when
/// `log_weight` is set, on a rule graded at the zeros.
pub fn derivative_integral(
    b: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    shift: f64,
    log_weight: bool,
    opts: &QuadOptions,
) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("exponent p = {p} must be positive"));
    }
    let hint = w.indices()?.b + shift;
    let rule = GradedDiskRule::new(b.zeros(), hint, opts)?;
    integrate_disk_value(
        |z| {
            let g = z.gap();
            let mut v = b.derivative1(z).norm().powf(p) * w.at_gap(g);
            if shift != 0.0 {
                v *= g.powf(shift);
            }
            if log_weight {
                v *= log_factor(g);
            }
            v
        },
        &rule,
    )
}

pub(crate) fn single(gate: GateSpec, grid: f64, lhs: f64, rhs: f64) -> TheoremReport {
    TheoremReport {
        gate,
        report: RatioReport::new(vec![grid], vec![lhs], vec![rhs], Rule::Finite),
    }
}

pub(crate) fn require_separated(b: &BlaschkeProduct) -> Result<f64> {
    let delta = separation_constant(&ZeroSequence::simple(b.zeros().to_vec())?);
    if delta > 0.0 {
        Ok(delta)
    } else {
        Err(Error::Separation("zero set is not separated (delta = 0)".into()))
    }
}

/// `‖B'‖^p / zero_sum`, logarithmic zero sum on the limit branch.
pub fn verify_main1_upper(
    b: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    let gate = parameter_gate(TheoremId::Main1Upper, p, w, GateExtra::default())?;
    gate.require_admissible()?;
    let limit = gate.branch == Branch::Limit;
    let lhs = derivative_integral(b, p, w, 0.0, false, opts)?;
    let rhs = zero_sum(b, p, w, limit);
    Ok(single(gate, b.degree() as f64, lhs, rhs))
}

/// `zero_sum / ‖B'‖^p` for separated zeros, log-weighted norm on the limit
/// branch.
pub fn verify_main1_lower(
    b: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    variant: GateVariant,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    let extra = GateExtra {
        variant,
        ..GateExtra::default()
    };
    let gate = parameter_gate(TheoremId::Main1Lower, p, w, extra)?;
    gate.require_admissible()?;
    require_separated(b)?;
    let limit = gate.branch == Branch::Limit;
    let lhs = zero_sum(b, p, w, false);
    let rhs = derivative_integral(b, p, w, 0.0, limit, opts)?;
    Ok(single(gate, b.degree() as f64, lhs, rhs))
}

/// Exponential family `1 - sigma^k`, `k = 1..=n`.
pub fn exponential_product(sigma: f64, n: usize) -> Result<BlaschkeProduct> {
    BlaschkeProduct::from_sequence(&generate_sequence(&SequenceKind::Exponential { sigma, n })?)
}

/// Runs `point` over the exponential family for each `N` in `ns`, in
/// parallel, and applies `rule` to the resulting ratios.
pub fn exponential_sweep(
    sigma: f64,
    ns: &[usize],
    rule: Rule,
    point: impl Fn(&BlaschkeProduct) -> Result<TheoremReport> + Sync,
) -> Result<TheoremReport> {
    sweep_with(ns, rule, |n| point(&exponential_product(sigma, n)?))
}

/// Runs `point` over the partial products of `b` of each length in `ns`.
pub fn partial_sweep(
    b: &BlaschkeProduct,
    ns: &[usize],
    rule: Rule,
    point: impl Fn(&BlaschkeProduct) -> Result<TheoremReport> + Sync,
) -> Result<TheoremReport> {
    sweep_with(ns, rule, |n| point(&b.partial_product(n)?))
}

fn sweep_with(
    ns: &[usize],
    rule: Rule,
    point: impl Fn(usize) -> Result<TheoremReport> + Sync,
) -> Result<TheoremReport> {
    if ns.is_empty() {
        return domain("sweep needs at least one N");
    }
    let rows: Vec<TheoremReport> = ns.par_iter().map(|&n| point(n)).collect::<Result<_>>()?;
    let gate = rows[0].gate.clone();
    let report = RatioReport::new(
        ns.iter().map(|&n| n as f64).collect(),
        rows.iter().map(|r| r.report.lhs[0]).collect(),
        rows.iter().map(|r| r.report.rhs[0]).collect(),
        rule,
    );
    Ok(TheoremReport { gate, report })
}

/// Sweep factor for upper bounds: `max <= 2 median`.
pub const SWEEP_UPPER: Rule = Rule::SweepUpper { factor: 2.0 };
/// Sweep factor for lower bounds: `min >= median / 2`.
pub const SWEEP_LOWER: Rule = Rule::SweepLower { factor: 0.5 };

pub fn main1_sweep(
    direction: Direction,
    sigma: f64,
    ns: &[usize],
    p: f64,
    w: &Weight,
    variant: GateVariant,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    match direction {
        Direction::Upper => exponential_sweep(sigma, ns, SWEEP_UPPER, |b| verify_main1_upper(b, p, w, opts)),
        Direction::Lower => {
            exponential_sweep(sigma, ns, SWEEP_LOWER, |b| verify_main1_lower(b, p, w, variant, opts))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MashregiReport {
    pub gate: GateSpec,
    /// `sup_{1/2<r<1} w(r)(1-r) ∫_0^{2π} |B'(re^{it})|^p dt`.
    pub sup_value: f64,
    pub sup_radius: f64,
    /// Zero sum, logarithmic on the limit branch.
    pub zero_sum: f64,
    pub upper_ratio: f64,
    /// `Σ (1-|z|)^{2-p+eps} w(|z|)`.
    pub shifted_sum: f64,
    /// `shifted_sum / sup_value`, when the lower window admits `(p, w)`.
    pub lower_ratio: Option<f64>,
}

const GOLDEN_ITERS: usize = 80;
const SUP_SEEDS: usize = 96;

fn circle_profile(b: &BlaschkeProduct, p: f64, w: &Weight, gap: f64, opts: &QuadOptions) -> Result<f64> {
    let c = circle_integral_graded(|z| b.derivative1(z), gap, p, b.zeros(), opts)?;
    Ok(w.at_gap(gap) * gap * c)
}

/// `sup_{1/2<r<1}` of the weighted circle means of `|B'|^p`, by seeding on
/// a grid geometric in `1 - r` and golden-section refinement. Returns
/// `(value, radius)`.
pub fn weighted_circle_sup(b: &BlaschkeProduct, p: f64, w: &Weight, opts: &QuadOptions) -> Result<(f64, f64)> {
    let lo = b
        .zeros()
        .iter()
        .map(|z| z.gap() / 16.0)
        .fold(1e-10f64, f64::min);
    let (l0, l1) = (0.5f64.ln(), lo.ln());
    let mut seeds: Vec<f64> = (0..SUP_SEEDS)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (SUP_SEEDS - 1) as f64).exp())
        .collect();
    seeds.extend(b.zeros().iter().map(|z| z.gap()).filter(|&g| g < 0.5));
    seeds.sort_by(|a, b| b.total_cmp(a));
    let vals: Vec<f64> = seeds
        .par_iter()
        .map(|&g| circle_profile(b, p, w, g, opts))
        .collect::<Result<_>>()?;
    let (k, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty seeds");
    let (mut best_g, mut best_v) = (seeds[k], vals[k]);
    // refine in log-gap between the neighbouring seeds
    let mut a = seeds[k.saturating_sub(1)].ln();
    let mut c = seeds[(k + 1).min(seeds.len() - 1)].ln();
    if a < c {
        std::mem::swap(&mut a, &mut c);
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| circle_profile(b, p, w, x.exp(), opts);
    let mut x1 = c + (1.0 - phi) * (a - c);
    let mut x2 = c + phi * (a - c);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..GOLDEN_ITERS {
        if (a - c).abs() < 1e-12 {
            break;
        }
        if f1 > f2 {
            a = x2;
            x2 = x1;
            f2 = f1;
            x1 = c + (1.0 - phi) * (a - c);
            f1 = f(x1)?;
        } else {
            c = x1;
            x1 = x2;
            f1 = f2;
            x2 = c + phi * (a - c);
            f2 = f(x2)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best_v {
            best_v = v;
            best_g = x.exp();
        }
    }
    Ok((best_v, 1.0 - best_g))
}

/// Compares the weighted circle supremum with the zero sum, and the
/// `eps`-shifted zero sum with the supremum.
pub fn verify_mashregi(
    b: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    eps: f64,
    variant: GateVariant,
    opts: &QuadOptions,
) -> Result<MashregiReport> {
    if !(eps > 0.0) {
        return domain(format!("eps = {eps} must be positive"));
    }
    let gate = parameter_gate(TheoremId::Main1Upper, p, w, GateExtra::default())?;
    gate.require_admissible()?;
    let (sup_value, sup_radius) = weighted_circle_sup(b, p, w, opts)?;
    let zs = zero_sum(b, p, w, gate.branch == Branch::Limit);
    let shifted_sum: f64 = b
        .zeros()
        .iter()
        .map(|z| z.gap().powf(2.0 - p + eps) * w.at(z))
        .sum();
    let lower_gate = parameter_gate(
        TheoremId::Main1Lower,
        p,
        w,
        GateExtra {
            variant,
            ..GateExtra::default()
        },
    )?;
    let separated = require_separated(b).is_ok();
    let lower_ratio = (lower_gate.branch.is_admissible() && separated).then(|| shifted_sum / sup_value);
    Ok(MashregiReport {
        gate,
        sup_value,
        sup_radius,
        zero_sum: zs,
        upper_ratio: sup_value / zs,
        shifted_sum,
        lower_ratio,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerGrowthReport {
    pub ns: Vec<usize>,
    /// `‖(B^n)'‖_{1,w} / n`.
    pub ratios: Vec<f64>,
    pub zero_sums: Vec<f64>,
    /// `zero_sum(B^n) == n zero_sum(B)` for every `n`, compared exactly.
    pub zero_sum_exact: bool,
    pub strictly_decreasing: bool,
}

/// `‖(B^n)'‖_{1,w} / n` along `ns`, with powers as repeated zeros.
pub fn verify_power_growth(
    b: &BlaschkeProduct,
    w: &Weight,
    ns: &[usize],
    opts: &QuadOptions,
) -> Result<PowerGrowthReport> {
    if ns.is_empty() || ns.contains(&0) {
        return domain("powers must be a non-empty list of positive integers");
    }
    let base = zero_sum(b, 1.0, w, false);
    let rows: Vec<(f64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let bn = b.power(n)?;
            let norm = derivative_integral(&bn, 1.0, w, 0.0, false, opts)?;
            Ok((norm / n as f64, zero_sum(&bn, 1.0, w, false)))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let zero_sums: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let zero_sum_exact = ns.iter().zip(&zero_sums).all(|(&n, &s)| s == n as f64 * base);
    let strictly_decreasing = ratios.windows(2).all(|p| p[1] < p[0]);
    Ok(PowerGrowthReport {
        ns: ns.to_vec(),
        ratios,
        zero_sums,
        zero_sum_exact,
        strictly_decreasing,
    })
}

/// Ratio `∫|B'|^{p1} w (1-|z|)^{p1-p2} dA / ‖B'‖_{p2,w}^{p2}`; the inverse
/// ratio is the other direction.
pub fn verify_cor24(
    b: &BlaschkeProduct,
    p1: f64,
    p2: f64,
    w: &Weight,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    let gate = parameter_gate(
        TheoremId::Cor24,
        p1,
        w,
        GateExtra {
            p2: Some(p2),
            ..GateExtra::default()
        },
    )?;
    gate.require_admissible()?;
    let lhs = derivative_integral(b, p1, w, p1 - p2, false, opts)?;
    let rhs = derivative_integral(b, p2, w, 0.0, false, opts)?;
    let mut r = single(gate, b.degree() as f64, lhs, rhs);
    r.report.notes.push(format!("inverse ratio {}", rhs / lhs));
    Ok(r)
}

/// `(Σ (1-|z|)^{2-p1} w_1(|z|), Σ (1-|z|)^{2-p2} w(|z|))` with
/// `w_1 = w (1-r)^{p1-p2}`; the two sums agree term by term.
pub fn shifted_zero_sums(b: &BlaschkeProduct, p1: f64, p2: f64, w: &Weight) -> (f64, f64) {
    let shifted: f64 = b
        .zeros()
        .iter()
        .map(|z| {
            let g = z.gap();
            g.powf(2.0 - p1) * (w.at_gap(g) * g.powf(p1 - p2))
        })
        .sum();
    (shifted, zero_sum(b, p2, w, false))
}

/// Function sampled by the higher-order harness.
pub enum HigherSample<'a> {
    Analytic(&'a (dyn Analytic + 'a)),
    Blaschke(&'a BlaschkeProduct),
}

impl HigherSample<'_> {
    fn features(&self) -> Vec<DiskPoint> {
        match self {
            HigherSample::Analytic(f) => f.features(),
            HigherSample::Blaschke(b) => b.zeros().to_vec(),
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        match self {
            HigherSample::Blaschke(b) if k >= 2 && b.rational_form().is_none() => Err(Error::Unsupported(format!(
                "derivative of order {k} needs the rational form of a degree {} product",
                b.degree()
            ))),
            _ => Ok(()),
        }
    }

    /// `f^{(k)}(z)`; callers run [`Self::check_order`] first.
    fn derivative(&self, z: &DiskPoint, k: usize) -> Complex64 {
        match self {
            HigherSample::Analytic(f) => f.derivative(z, k),
            HigherSample::Blaschke(b) => match k {
                0 => b.eval(z),
                _ => b.derivative(z, k).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
            },
        }
    }
}

fn taylor_part(f: &HigherSample<'_>, n: usize, p: f64) -> Result<f64> {
    let o = DiskPoint::origin();
    (0..n)
        .map(|k| {
            f.check_order(k)?;
            Ok(f.derivative(&o, k).norm().powf(p))
        })
        .sum()
}

fn weighted_derivative_integral(
    f: &HigherSample<'_>,
    k: usize,
    p: f64,
    w: &Weight,
    factor_power: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    f.check_order(k)?;
    let hint = w.indices()?.b + factor_power;
    let rule = GradedDiskRule::new(&f.features(), hint, opts)?;
    integrate_disk_value(
        |z| {
            let mut v = f.derivative(z, k).norm().powf(p) * w.at(z);
            if factor_power != 0.0 {
                v *= z.one_minus_mod_sq().powf(factor_power);
            }
            v
        },
        &rule,
    )
}

/// `‖f‖_{p,w}^p` against `Σ_{k<n} |f^{(k)}(0)|^p + ∫ |f^{(n)}|^p (1-|z|^2)^{np} w dA`.
pub fn verify_higher_order(
    f: &(dyn Analytic + '_),
    n: usize,
    p: f64,
    w: &Weight,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    if n == 0 {
        return domain("derivative order n must be at least 1");
    }
    let gate = parameter_gate(TheoremId::HigherOrder, p, w, GateExtra::default())?;
    gate.require_admissible()?;
    let s = HigherSample::Analytic(f);
    let lhs = weighted_derivative_integral(&s, 0, p, w, 0.0, opts)?;
    let rhs = taylor_part(&s, n, p)? + weighted_derivative_integral(&s, n, p, w, n as f64 * p, opts)?;
    Ok(single(gate, n as f64, lhs, rhs))
}

/// Spread allowed across the random polynomial suite.
pub const HIGHER_SUITE_SPREAD: f64 = 50.0;

/// [`verify_higher_order`] on `draws` random polynomials of degree
/// `1..=max_degree` (see [`Polynomial::random`]), checked as a band.
pub fn higher_order_suite<R: Rng + ?Sized>(
    draws: usize,
    max_degree: usize,
    n: usize,
    p: f64,
    w: &Weight,
    rng: &mut R,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    if draws == 0 || max_degree == 0 {
        return domain("polynomial suite needs at least one draw of degree >= 1");
    }
    let polys: Vec<Polynomial> = (0..draws)
        .map(|_| {
            let d = rng.random_range(1..=max_degree);
            Polynomial::random(d, rng)
        })
        .collect();
    let rows: Vec<TheoremReport> = polys
        .par_iter()
        .map(|f| verify_higher_order(f, n, p, w, opts))
        .collect::<Result<_>>()?;
    let gate = rows[0].gate.clone();
    let report = RatioReport::new(
        (0..draws).map(|k| k as f64).collect(),
        rows.iter().map(|r| r.report.lhs[0]).collect(),
        rows.iter().map(|r| r.report.rhs[0]).collect(),
        Rule::Band {
            max_spread: HIGHER_SUITE_SPREAD,
        },
    );
    Ok(TheoremReport { gate, report })
}

/// Higher-order zero-sum bounds: the upper direction reports
/// `(Σ_{k<n} |B^{(k)}(0)|^p + ‖B^{(n)}‖^p) / Σ (1-|z|)^{2-np} w`, the lower
/// direction the reciprocal for separated zeros.
pub fn verify_higher_zero_sum(
    b: &BlaschkeProduct,
    n: usize,
    p: f64,
    w: &Weight,
    direction: Direction,
    variant: GateVariant,
    opts: &QuadOptions,
) -> Result<TheoremReport> {
    if n == 0 {
        return domain("derivative order n must be at least 1");
    }
    let (id, extra) = match direction {
        Direction::Upper => (TheoremId::HigherUpper, GateExtra::default()),
        Direction::Lower => (
            TheoremId::HigherLower,
            GateExtra {
                variant,
                ..GateExtra::default()
            },
        ),
    };
    let gate = parameter_gate(id, p, w, extra)?;
    gate.require_admissible()?;
    let s = HigherSample::Blaschke(b);
    let norm_side = taylor_part(&s, n, p)? + weighted_derivative_integral(&s, n, p, w, 0.0, opts)?;
    let sum_side: f64 = b
        .zeros()
        .iter()
        .map(|z| z.gap().powf(2.0 - n as f64 * p) * w.at(z))
        .sum();
    Ok(match direction {
        Direction::Upper => single(gate, n as f64, norm_side, sum_side),
        Direction::Lower => {
            require_separated(b)?;
            single(gate, n as f64, sum_side, norm_side)
        }
    })
}
