//! The kernel integrals `I_{m,w}(λ) = ∫ w / |1 - conj(λ) z|^{m+2} dA` and
//! `J_{m,w}(λ) = ∫ log|1 / b_λ| w (1 - |z|)^{-m-2} dA`, and the four
//! two-sided and big-O estimates relating them to `w(|λ|) (1 - |λ|)^{-m}`.

use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::point::{DiskPoint, MobiusParts};
use crate::quad::{integrate_disk, integrate_gap, GradedDiskRule, QuadOptions};
use crate::report::{gate_eq, Rule, DEFAULT_MAX_SLOPE, DEFAULT_MAX_SPREAD};
use crate::weights::{check_star_condition, log_factor, Weight};

pub use crate::report::{default_lambda_grid, RatioReport, Verdict};

/// Relative error above which an estimate carries a warning.
pub const ACCURACY_WARN: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    pub warning: Option<String>,
}

impl Estimate {
    fn new(value: f64, err: f64) -> Self {
        let warning = (err > ACCURACY_WARN * value.abs())
            .then(|| format!("quadrature error estimate {err:e} exceeds {ACCURACY_WARN:e} of {value:e}"));
        Self { value, err, warning }
    }
}

/// Features worth grading the rule around: only points near the boundary
/// make the kernel peaked.
fn kernel_features(lambda: &DiskPoint) -> Vec<DiskPoint> {
    if lambda.gap() < 0.5 {
        vec![*lambda]
    } else {
        Vec::new()
    }
}

/// `I_{m,w}(λ)` by graded disk quadrature.
pub fn i_mw(lambda: &DiskPoint, m: f64, w: &Weight, opts: &QuadOptions) -> Result<Estimate> {
    if !(lambda.gap() > 0.0) {
        return domain("I_mw needs |λ| < 1");
    }
    let hint = w.indices()?.b;
    let rule = GradedDiskRule::new(&kernel_features(lambda), hint, opts)?;
    let s = m + 2.0;
    let r = integrate_disk(
        |z| w.at(z) * MobiusParts::new(lambda, z).den.norm().powf(-s),
        &rule,
    )?;
    Ok(Estimate::new(r.value, r.err))
}

/// `J_{m,w}(λ)` by the exact radial reduction
/// `log(1/|λ|) ∫_0^{|λ|} w(r)(1-r)^{-m-2} 2r dr + ∫_{|λ|}^1 log(1/r) w(r)(1-r)^{-m-2} 2r dr`.
pub fn j_mw(lambda_gap: f64, m: f64, w: &Weight, order: usize) -> Result<f64> {
    if !(lambda_gap > 0.0 && lambda_gap <= 1.0) {
        return domain(format!("J_mw needs 0 < 1 - |λ| <= 1, got {lambda_gap}"));
    }
    let b = w.indices()?.b;
    if !(b > m) {
        return Err(Error::Divergence(format!(
            "J_mw diverges unless b_w > m (b_w = {b}, m = {m})"
        )));
    }
    let radial = |gap: f64| w.at_gap(gap) * gap.powf(-m - 2.0) * 2.0 * (1.0 - gap);
    let inner = if lambda_gap < 1.0 {
        let log_inv = -(-lambda_gap).ln_1p();
        log_inv * integrate_gap(radial, lambda_gap, 1.0, 0.0, order)
    } else {
        0.0
    };
    // log(1/r) is singular at the origin, so the part r < 1/2 is
    // integrated in r with panels graded towards r = |λ|.
    let near = lambda_gap.min(0.5);
    let mut outer = integrate_gap(
        |gap| -(-gap).ln_1p() * radial(gap),
        0.0,
        near,
        b - m - 1.0,
        order,
    );
    if lambda_gap > 0.5 {
        outer += integrate_gap(
            |r| -r.ln() * radial(1.0 - r),
            1.0 - lambda_gap,
            0.5,
            0.0,
            order,
        );
    }
    let v = inner + outer;
    if !v.is_finite() {
        return Err(Error::Divergence(format!("J_mw evaluated to {v}")));
    }
    Ok(v)
}

/// `J_{m,w}(λ)` straight from the defining double integral; the
/// independent check on [`j_mw`].
pub fn j_mw_direct(lambda: &DiskPoint, m: f64, w: &Weight, opts: &QuadOptions) -> Result<Estimate> {
    let b = w.indices()?.b;
    if !(b > m) {
        return Err(Error::Divergence(format!(
            "J_mw diverges unless b_w > m (b_w = {b}, m = {m})"
        )));
    }
    let rule = GradedDiskRule::new(&[*lambda], b - m - 1.0, opts)?;
    let r = integrate_disk(
        |z| {
            let pseudo = MobiusParts::new(lambda, z).pseudo();
            if pseudo == 0.0 {
                return 0.0;
            }
            -pseudo.ln() * w.at(z) * z.gap().powf(-m - 2.0)
        },
        &rule,
    )?;
    Ok(Estimate::new(r.value, r.err))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prop12Case {
    /// `I ≍ w(|λ|)(1-|λ|)^{-m}`.
    I,
    /// `J ≍ w(|λ|)(1-|λ|)^{-m}`.
    II,
    /// `I = O(w(|λ|)(1-|λ|)^{-m} log(e/(1-|λ|)))` at the endpoint `a_w = m`.
    III,
    /// `J = O(w(|λ|)(1-|λ|)^{-m} log(e/(1-|λ|)))` at the endpoint `a_w = m + 1`.
    IV,
}

impl Prop12Case {
    fn uses_j(self) -> bool {
        matches!(self, Prop12Case::II | Prop12Case::IV)
    }

    fn is_endpoint(self) -> bool {
        matches!(self, Prop12Case::III | Prop12Case::IV)
    }
}

impl FromStr for Prop12Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Prop12Case::I),
            "ii" => Ok(Prop12Case::II),
            "iii" => Ok(Prop12Case::III),
            "iv" => Ok(Prop12Case::IV),
            _ => Err(Error::Parse(format!("unknown case \"{s}\", expected i, ii, iii or iv"))),
        }
    }
}

impl fmt::Display for Prop12Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prop12Case::I => "i",
            Prop12Case::II => "ii",
            Prop12Case::III => "iii",
            Prop12Case::IV => "iv",
        })
    }
}

/// Radii on which condition (*) is tested: 64 points from `r0` to
/// `1 - 1e-8`, geometric in `1 - r`.
pub fn star_grid(w: &Weight) -> Vec<f64> {
    crate::report::geometric_lambda_grid(64, 1.0 - w.r0() - 1e-9, 1e-8)
}

/// Condition (*) for some exponent in `(0, 1)`, probed on a fixed set.
pub fn star_condition_holds(w: &Weight) -> Result<bool> {
    let grid = star_grid(w);
    for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
        if check_star_condition(w, alpha, &grid)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The parameter window of each case; `Err` carries the failed inequality.
pub fn prop12_gate(case: Prop12Case, m: f64, w: &Weight) -> Result<std::result::Result<(), String>> {
    let ix = w.indices()?;
    let (a, b) = (ix.a, ix.b);
    let fail = |s: String| Ok(Err(s));
    match case {
        Prop12Case::I => {
            if !(m > -1.0 && a < m && b > -1.0) {
                return fail(format!("case i needs m > -1, a_w < m, b_w > -1 (m = {m}, a_w = {a}, b_w = {b})"));
            }
        }
        Prop12Case::II => {
            if !(a < m + 1.0 && b > m) {
                return fail(format!("case ii needs a_w < m + 1, b_w > m (m = {m}, a_w = {a}, b_w = {b})"));
            }
        }
        Prop12Case::III => {
            if !(m > -1.0 && gate_eq(a, m) && b > -1.0) {
                return fail(format!("case iii needs m > -1, a_w = m, b_w > -1 (m = {m}, a_w = {a}, b_w = {b})"));
            }
        }
        Prop12Case::IV => {
            if !(gate_eq(a, m + 1.0) && b > m) {
                return fail(format!("case iv needs a_w = m + 1, b_w > m (m = {m}, a_w = {a}, b_w = {b})"));
            }
        }
    }
    if case.is_endpoint() && !star_condition_holds(w)? {
        return fail("condition (*) fails for every probed exponent".into());
    }
    Ok(Ok(()))
}

/// Ratios of `I` (cases i, iii) or `J` (cases ii, iv) against
/// `w(|λ|)(1-|λ|)^{-m}`, with an extra `log(e/(1-|λ|))` in the endpoint
/// cases, over `λ = |λ|` on the positive axis.
pub fn verify_prop12(
    case: Prop12Case,
    m: f64,
    w: &Weight,
    grid: &[f64],
    opts: &QuadOptions,
) -> Result<RatioReport> {
    if let Err(reason) = prop12_gate(case, m, w)? {
        return Ok(RatioReport::gate_failed(reason));
    }
    if grid.iter().any(|l| !(0.0..1.0).contains(l)) {
        return domain("λ grid must lie in [0, 1)");
    }
    let rows: Vec<(f64, f64, Option<String>)> = grid
        .par_iter()
        .map(|&l| {
            let gap = 1.0 - l;
            let lhs = if case.uses_j() {
                (j_mw(gap, m, w, opts.rad_order / 4)?, None)
            } else {
                let e = i_mw(&DiskPoint::from_gap(gap, 0.0)?, m, w, opts)?;
                (e.value, e.warning.map(|s| format!("|λ| = {l}: {s}")))
            };
            let mut rhs = w.at_gap(gap) * gap.powf(-m);
            if case.is_endpoint() {
                rhs *= log_factor(gap);
            }
            Ok((lhs.0, rhs, lhs.1))
        })
        .collect::<Result<_>>()?;
    let rule = if case.is_endpoint() {
        Rule::UpperEnvelope {
            max_spread: DEFAULT_MAX_SPREAD,
            max_slope: DEFAULT_MAX_SLOPE,
        }
    } else {
        Rule::TwoSided {
            max_spread: DEFAULT_MAX_SPREAD,
            max_slope: DEFAULT_MAX_SLOPE,
        }
    };
    let mut report = RatioReport::new(
        grid.to_vec(),
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rule,
    );
    report.notes.extend(rows.into_iter().filter_map(|r| r.2));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    #[test]
    fn i_at_origin_is_total_mass() {
        for alpha in [-0.5, 0.0, 1.5] {
            let w = Weight::standard(alpha).unwrap();
            for m in [-1.5, 0.0, 3.0] {
                let e = i_mw(&DiskPoint::origin(), m, &w, &opts()).unwrap();
                assert_relative_eq!(e.value, 1.0, max_relative = 1e-10);
                assert!(e.warning.is_none());
            }
        }
    }

    #[test]
    fn j_closed_forms() {
        let w = Weight::standard(0.0).unwrap();
        assert_relative_eq!(j_mw(1.0, -2.0, &w, 32).unwrap(), 0.5, max_relative = 1e-12);
        // Standard(1): ∫ 4r(1-r^2) log(1/r) dr = 1 - 1/4
        let w = Weight::standard(1.0).unwrap();
        assert_relative_eq!(j_mw(1.0, -2.0, &w, 32).unwrap(), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn j_diverges_outside_window() {
        let w = Weight::standard(0.0).unwrap();
        assert!(matches!(j_mw(0.5, 0.0, &w, 32), Err(Error::Divergence(_))));
        assert!(matches!(j_mw(0.5, 0.5, &w, 32), Err(Error::Divergence(_))));
    }

    #[test]
    fn j_reduction_matches_direct() {
        let w = Weight::standard(0.0).unwrap();
        for (gap, theta, m) in [(0.5, 0.0, -0.5), (0.1, 1.0, -1.5), (0.02, -2.0, -0.5)] {
            let l = DiskPoint::from_gap(gap, theta).unwrap();
            let a = j_mw(gap, m, &w, 32).unwrap();
            let b = j_mw_direct(&l, m, &w, &opts()).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-4);
        }
    }

    #[test]
    fn i_is_rotation_invariant() {
        let w = Weight::standard(0.5).unwrap();
        let a = i_mw(&DiskPoint::from_gap(0.01, 0.0).unwrap(), 1.0, &w, &opts()).unwrap().value;
        let b = i_mw(&DiskPoint::from_gap(0.01, 2.3).unwrap(), 1.0, &w, &opts()).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn prop12_examples() {
        let grid = default_lambda_grid();
        let w = Weight::standard(0.0).unwrap();
        let r = verify_prop12(Prop12Case::I, 1.0, &w, &grid, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded, "{r:?}");
        let r = verify_prop12(Prop12Case::II, -0.5, &w, &grid, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded, "{r:?}");
        let r = verify_prop12(Prop12Case::I, 1.0, &Weight::standard(2.0).unwrap(), &grid, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::GateFailed);
        assert!(r.lhs.is_empty());
    }

    #[test]
    fn prop12_endpoint_cases() {
        let grid = default_lambda_grid();
        let w = Weight::standard(0.5).unwrap();
        let r = verify_prop12(Prop12Case::III, 0.5, &w, &grid, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded, "{r:?}");
        let r = verify_prop12(Prop12Case::IV, -0.5, &w, &grid, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded, "{r:?}");
    }

    #[test]
    fn case_names_round_trip() {
        for c in [Prop12Case::I, Prop12Case::II, Prop12Case::III, Prop12Case::IV] {
            assert_eq!(c.to_string().parse::<Prop12Case>().unwrap(), c);
        }
        assert!("v".parse::<Prop12Case>().is_err());
    }
}
