//! Parameter windows of the main estimates, resolved to a branch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimates::star_condition_holds;
use crate::report::gate_eq;
use crate::weights::{Indices, Weight, WeightFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// Upper bound of `‖B'‖^p` by the zero sum.
    Main1Upper,
    /// Lower bound of `‖B'‖^p` by the zero sum for separated zeros.
    Main1Lower,
    /// Two-sided bound of `‖θ'‖^p` by averaged counting functions.
    InnerEstimate,
    /// Comparison of `‖B'‖_{p2}` with a shifted `p1`-integral.
    Cor24,
    /// Derivatives of model spaces versus derivatives of `B`.
    CohnAnalogue,
    /// The duality window shared by the pairing and interpolation results.
    Duality,
    /// Norm equivalence with higher derivatives.
    HigherOrder,
    /// Upper bound of higher derivatives by a zero sum.
    HigherUpper,
    /// Lower bound of higher derivatives by a zero sum.
    HigherLower,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Main1Upper => "main1-upper",
            TheoremId::Main1Lower => "main1-lower",
            TheoremId::InnerEstimate => "inner",
            TheoremId::Cor24 => "cor24",
            TheoremId::CohnAnalogue => "cohn",
            TheoremId::Duality => "duality",
            TheoremId::HigherOrder => "higher",
            TheoremId::HigherUpper => "higher-upper",
            TheoremId::HigherLower => "higher-lower",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    SubLimit,
    Limit,
    Inadmissible,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::SubLimit => "sub_limit",
            Branch::Limit => "limit",
            Branch::Inadmissible => "inadmissible",
        }
    }

    pub fn is_admissible(self) -> bool {
        self != Branch::Inadmissible
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reading of the lower-bound window for `p > 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GateVariant {
    /// `a_w < p - 2`, `b_w > -1`.
    #[default]
    AsPrinted,
    /// `a_w < p - 1`, `b_w > p - 2`, matching the upper bound.
    Harmonized,
}

impl FromStr for GateVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-printed" => Ok(GateVariant::AsPrinted),
            "harmonized" => Ok(GateVariant::Harmonized),
            _ => Err(Error::Parse(format!(
                "unknown gate variant \"{s}\", expected as-printed or harmonized"
            ))),
        }
    }
}

impl fmt::Display for GateVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateVariant::AsPrinted => "as-printed",
            GateVariant::Harmonized => "harmonized",
        })
    }
}

/// Parameters beyond `(p, w)` that some windows need.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GateExtra {
    /// Second exponent `p2` of the comparison corollary.
    pub p2: Option<f64>,
    /// Target exponent `s` of the model-space result.
    pub s: Option<f64>,
    pub variant: GateVariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub theorem: TheoremId,
    pub p: f64,
    pub extra: GateExtra,
    pub indices: Indices,
    pub branch: Branch,
    /// Why the branch was chosen, naming the deciding inequality.
    pub reason: String,
    /// Extra log lines, e.g. the branch under the other gate variant.
    pub notes: Vec<String>,
}

impl GateSpec {
    /// `Err(Error::Gate)` unless the branch is admissible.
    pub fn require_admissible(&self) -> Result<()> {
        if self.branch.is_admissible() {
            Ok(())
        } else {
            Err(Error::Gate(format!("{}: {}", self.theorem, self.reason)))
        }
    }
}

struct Resolved {
    branch: Branch,
    reason: String,
}

fn sub(reason: impl Into<String>) -> Resolved {
    Resolved {
        branch: Branch::SubLimit,
        reason: reason.into(),
    }
}

fn limit(reason: impl Into<String>) -> Resolved {
    Resolved {
        branch: Branch::Limit,
        reason: reason.into(),
    }
}

fn inadmissible(reason: impl Into<String>) -> Resolved {
    Resolved {
        branch: Branch::Inadmissible,
        reason: reason.into(),
    }
}

/// The window shared by the upper bound and the counting-function
/// estimate, with an endpoint branch under condition (*).
fn main_window(p: f64, ix: Indices, w: &Weight, with_limit: bool) -> Result<Resolved> {
    let (a, b) = (ix.a, ix.b);
    if !(p > 0.5) {
        return Ok(inadmissible(format!("p = {p} must exceed 1/2")));
    }
    let (edge, floor, edge_txt, floor_txt) = if p <= 1.0 {
        (2.0 * p - 2.0, -1.0, "2p - 2", "-1")
    } else {
        (p - 1.0, p - 2.0, "p - 1", "p - 2")
    };
    if !(b > floor) {
        return Ok(inadmissible(format!("needs b_w > {floor_txt} = {floor}, got b_w = {b}")));
    }
    if with_limit && gate_eq(a, edge) {
        return Ok(if star_condition_holds(w)? {
            limit(format!("a_w = {edge_txt} = {edge} with condition (*)"))
        } else {
            inadmissible(format!("a_w = {edge_txt} = {edge} but condition (*) fails"))
        });
    }
    if a < edge {
        return Ok(sub(format!("a_w = {a} < {edge_txt} = {edge}, b_w = {b} > {floor_txt}")));
    }
    if p > 1.0 {
        if let WeightFamily::Standard { alpha } = w.family() {
            return Ok(inadmissible(format!(
                "standard weight with alpha = {alpha} > p - 1: the space then contains the derivative of every H^2 function"
            )));
        }
    }
    Ok(inadmissible(format!("needs a_w < {edge_txt} = {edge}, got a_w = {a}")))
}

fn lower_window(p: f64, ix: Indices, w: &Weight, variant: GateVariant, with_limit: bool) -> Result<Resolved> {
    if p <= 1.0 || variant == GateVariant::Harmonized {
        return main_window(p, ix, w, with_limit);
    }
    let (a, b) = (ix.a, ix.b);
    if with_limit && gate_eq(a, p - 1.0) && b > p - 2.0 {
        return Ok(if star_condition_holds(w)? {
            limit(format!("a_w = p - 1 = {} with condition (*)", p - 1.0))
        } else {
            inadmissible("a_w = p - 1 but condition (*) fails")
        });
    }
    if a < p - 2.0 && b > -1.0 {
        Ok(sub(format!("a_w = {a} < p - 2 = {}, b_w = {b} > -1 (as printed)", p - 2.0)))
    } else {
        Ok(inadmissible(format!(
            "as printed the window is a_w < p - 2 = {}, b_w > -1; got a_w = {a}, b_w = {b}",
            p - 2.0
        )))
    }
}

fn cor24_window(p1: f64, p2: f64, ix: Indices) -> Resolved {
    let (a, b) = (ix.a, ix.b);
    let low = |x: f64| x > 0.5 && x <= 1.0;
    if !(p2 - p1 > 0.0 && p2 - p1 < 1.0) {
        return inadmissible(format!("needs 0 < p2 - p1 < 1, got p1 = {p1}, p2 = {p2}"));
    }
    if low(p1) && low(p2) {
        if b > -1.0 && a < 2.0 * p1 - 2.0 {
            sub(format!("b_w > -1 and a_w = {a} < 2 p1 - 2 = {}", 2.0 * p1 - 2.0))
        } else {
            inadmissible(format!(
                "needs b_w > -1, a_w < 2 p1 - 2 = {}; got a_w = {a}, b_w = {b}",
                2.0 * p1 - 2.0
            ))
        }
    } else if p1 > 1.0 && p2 > 1.0 {
        if p2 - 2.0 < b && b <= a && a < p1 - 1.0 {
            sub(format!("p2 - 2 = {} < b_w <= a_w < p1 - 1 = {}", p2 - 2.0, p1 - 1.0))
        } else {
            inadmissible(format!(
                "needs p2 - 2 = {} < b_w <= a_w < p1 - 1 = {}; got a_w = {a}, b_w = {b}",
                p2 - 2.0,
                p1 - 1.0
            ))
        }
    } else {
        inadmissible(format!("p1 = {p1}, p2 = {p2} must both lie in (1/2, 1] or both exceed 1"))
    }
}

fn cohn_window(p: f64, s: f64, ix: Indices) -> Resolved {
    let (a, b) = (ix.a, ix.b);
    if !(1.0 < s && s < p) {
        return inadmissible(format!("needs 1 < s < p, got s = {s}, p = {p}"));
    }
    let lo = s - 2.0 + s / p;
    if lo < b && b <= a && a < s - 1.0 {
        sub(format!("s - 2 + s/p = {lo} < b_w <= a_w < s - 1 = {}", s - 1.0))
    } else {
        inadmissible(format!(
            "needs s - 2 + s/p = {lo} < b_w <= a_w < s - 1 = {}; got a_w = {a}, b_w = {b}",
            s - 1.0
        ))
    }
}

fn duality_window(p: f64, ix: Indices) -> Resolved {
    let (a, b) = (ix.a, ix.b);
    if p > 1.0 && p - 2.0 < b && b <= a && a < p - 1.0 {
        sub(format!("p - 2 = {} < b_w <= a_w < p - 1 = {}", p - 2.0, p - 1.0))
    } else {
        inadmissible(format!(
            "needs p > 1 and p - 2 < b_w <= a_w < p - 1; got p = {p}, a_w = {a}, b_w = {b}"
        ))
    }
}

/// Resolves the branch of `theorem` for `(p, w)`.
///
/// Equalities are tested with tolerance `1e-12`. Index fits that fail
/// propagate as errors.
pub fn parameter_gate(theorem: TheoremId, p: f64, w: &Weight, extra: GateExtra) -> Result<GateSpec> {
    let ix = w.indices()?;
    let mut notes = Vec::new();
    let resolved = match theorem {
        TheoremId::Main1Upper | TheoremId::InnerEstimate => main_window(p, ix, w, true)?,
        TheoremId::HigherUpper => main_window(p, ix, w, false)?,
        TheoremId::Main1Lower | TheoremId::HigherLower => {
            let with_limit = theorem == TheoremId::Main1Lower;
            let r = lower_window(p, ix, w, extra.variant, with_limit)?;
            if p > 1.0 {
                let other = match extra.variant {
                    GateVariant::AsPrinted => GateVariant::Harmonized,
                    GateVariant::Harmonized => GateVariant::AsPrinted,
                };
                let o = lower_window(p, ix, w, other, with_limit)?;
                notes.push(format!("{other} variant: {} ({})", o.branch, o.reason));
            }
            r
        }
        TheoremId::Cor24 => {
            let p2 = extra
                .p2
                .ok_or_else(|| Error::Domain("the comparison corollary needs p2".into()))?;
            cor24_window(p, p2, ix)
        }
        TheoremId::CohnAnalogue => {
            let s = extra
                .s
                .ok_or_else(|| Error::Domain("the model-space result needs s".into()))?;
            cohn_window(p, s, ix)
        }
        TheoremId::Duality => duality_window(p, ix),
        TheoremId::HigherOrder => {
            if ix.b > -1.0 {
                sub(format!("b_w = {} > -1", ix.b))
            } else {
                inadmissible(format!("needs b_w > -1, got b_w = {}", ix.b))
            }
        }
    };
    Ok(GateSpec {
        theorem,
        p,
        extra,
        indices: ix,
        branch: resolved.branch,
        reason: resolved.reason,
        notes,
    })
}
