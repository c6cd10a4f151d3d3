//! Normal radial weights on `[0, 1)`.
//!
//! A weight is normal when `w(r) / (1-r)^a` increases to infinity and
//! `w(r) / (1-r)^b` decreases to zero beyond some `r0`. Standard weights are
//! normalized so that `∫_D w dA = 1` under the normalized area measure.

use rand::Rng;
use std::fmt;
use std::path::Path;

use crate::error::{domain, Error, Result};
use crate::point::DiskPoint;

/// `log(e / (1 - r))` expressed through the gap `1 - r`; always `>= 1`.
#[inline]
pub fn log_factor(gap: f64) -> f64 {
    1.0 - gap.ln()
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    /// `(alpha + 1) (1 - r^2)^alpha`.
    Standard { alpha: f64 },
    /// `(alpha + 1) (1 - r^2)^alpha log(e / (1 - r))^beta`.
    LogPower { alpha: f64, beta: f64 },
    /// Samples interpolated linearly in `log w` against `log(1 - r)`.
    Tabulated(Table),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    r: Vec<f64>,
    log_gap: Vec<f64>,
    log_w: Vec<f64>,
}

impl Table {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData(
                "a tabulated weight needs at least two samples".into(),
            ));
        }
        let mut r = Vec::with_capacity(samples.len());
        let mut log_gap = Vec::with_capacity(samples.len());
        let mut log_w = Vec::with_capacity(samples.len());
        for (i, &(ri, wi)) in samples.iter().enumerate() {
            if !(0.0..1.0).contains(&ri) {
                return domain(format!("table abscissa r = {ri} outside [0, 1)"));
            }
            if !(wi > 0.0) || !wi.is_finite() {
                return domain(format!("table value w({ri}) = {wi} is not positive"));
            }
            if i > 0 && ri <= r[i - 1] {
                return domain("table abscissae must be strictly increasing");
            }
            r.push(ri);
            log_gap.push((1.0 - ri).ln());
            log_w.push(wi.ln());
        }
        Ok(Self { r, log_gap, log_w })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().zip(&self.log_w).map(|(&r, &lw)| (r, lw.exp()))
    }

    fn at_gap(&self, gap: f64) -> f64 {
        let x = gap.ln();
        let n = self.r.len();
        // log_gap is strictly decreasing.
        let seg = match self.log_gap.iter().position(|&lg| lg <= x) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        };
        let (x0, x1) = (self.log_gap[seg], self.log_gap[seg + 1]);
        let (y0, y1) = (self.log_w[seg], self.log_w[seg + 1]);
        let t = (x - x0) / (x1 - x0);
        (y0 + t * (y1 - y0)).exp()
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "w" {
            return Err(Error::Parse(format!(
                "{}: expected header \"r,w\"",
                path.display()
            )));
        }
        let mut samples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k].parse::<f64>().map_err(|e| {
                    Error::Parse(format!("{} line {}: {e}", path.display(), line + 2))
                })
            };
            samples.push((parse(0)?, parse(1)?));
        }
        Table::new(&samples)
    }
}

/// Optimal power indices `(a_w, b_w)`; `band` is the half-width of the
/// confidence band of a fitted estimate (zero for closed forms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Indices {
    pub a: f64,
    pub b: f64,
    pub band: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    family: WeightFamily,
    r0: f64,
    indices: Option<Indices>,
}

pub const DEFAULT_R0: f64 = 0.5;
const MIN_FIT_SAMPLES: usize = 8;

impl Weight {
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return domain(format!("standard weight needs alpha > -1, got {alpha}"));
        }
        Ok(Self {
            family: WeightFamily::Standard { alpha },
            r0: DEFAULT_R0,
            indices: Some(Indices { a: alpha, b: alpha, band: 0.0 }),
        })
    }

    pub fn log_power(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return domain(format!("log-power weight needs alpha > -1, got {alpha}"));
        }
        Ok(Self {
            family: WeightFamily::LogPower { alpha, beta },
            r0: DEFAULT_R0,
            indices: Some(Indices { a: alpha, b: alpha, band: 0.0 }),
        })
    }

    pub fn tabulated(table: Table) -> Self {
        let mut w = Self {
            family: WeightFamily::Tabulated(table),
            r0: DEFAULT_R0,
            indices: None,
        };
        w.indices = w.fit_indices().ok();
        w
    }

    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) {
            return domain(format!("r0 = {r0} outside (0, 1)"));
        }
        self.r0 = r0;
        if matches!(self.family, WeightFamily::Tabulated(_)) {
            self.indices = self.fit_indices().ok();
        }
        Ok(self)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `w(r)` for `0 <= r < 1`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return domain(format!("weight evaluated at r = {r} outside [0, 1)"));
        }
        Ok(self.at_gap(1.0 - r))
    }

    /// `w` at radius `1 - gap`; the hot path used by every integrand.
    #[inline]
    pub fn at_gap(&self, gap: f64) -> f64 {
        match &self.family {
            WeightFamily::Standard { alpha } => {
                (alpha + 1.0) * (gap * (2.0 - gap)).powf(*alpha)
            }
            WeightFamily::LogPower { alpha, beta } => {
                (alpha + 1.0) * (gap * (2.0 - gap)).powf(*alpha) * log_factor(gap).powf(*beta)
            }
            WeightFamily::Tabulated(t) => t.at_gap(gap),
        }
    }

    #[inline]
    pub fn at(&self, p: &DiskPoint) -> f64 {
        self.at_gap(p.gap())
    }

    pub fn indices(&self) -> Result<Indices> {
        self.indices.ok_or_else(|| {
            Error::InsufficientData(format!(
                "index fit needs at least {MIN_FIT_SAMPLES} samples beyond r0 = {}",
                self.r0
            ))
        })
    }

    /// Least-squares slope of `log w` against `log(1 - r)` on `r > r0`.
    fn fit_indices(&self) -> Result<Indices> {
        let WeightFamily::Tabulated(t) = &self.family else {
            return self.indices();
        };
        let pts: Vec<(f64, f64)> = t
            .r
            .iter()
            .zip(t.log_gap.iter().zip(&t.log_w))
            .filter(|(&r, _)| r > self.r0)
            .map(|(_, (&x, &y))| (x, y))
            .collect();
        if pts.len() < MIN_FIT_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "{} samples beyond r0, need {MIN_FIT_SAMPLES}",
                pts.len()
            )));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let resid: f64 = pts
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum();
        let stderr = (resid / (n - 2.0) / sxx).sqrt();
        Ok(Indices {
            a: slope,
            b: slope,
            band: 2.0 * stderr,
        })
    }

    /// Parses `standard:alpha=A`, `logpower:alpha=A,beta=B` or
    /// `table:path=FILE`; every form also accepts `r0=R`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("weight spec \"{spec}\" lacks a family prefix")))?;
        let kv = parse_kv(args)?;
        let allowed: &[&str] = match kind {
            "standard" => &["alpha", "r0"],
            "logpower" => &["alpha", "beta", "r0"],
            "table" => &["path", "r0"],
            _ => return Err(Error::Parse(format!("unknown weight family \"{kind}\""))),
        };
        for (k, _) in &kv {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown key \"{k}\" in weight spec \"{spec}\"")));
            }
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<f64> {
            let v = get(key).ok_or_else(|| Error::Parse(format!("weight spec \"{spec}\" needs {key}")))?;
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("weight spec key {key}: {e}")))
        };
        let w = match kind {
            "standard" => Weight::standard(num("alpha")?)?,
            "logpower" => Weight::log_power(num("alpha")?, num("beta")?)?,
            _ => {
                let path = get("path").ok_or_else(|| Error::Parse("table spec needs path".into()))?;
                Weight::tabulated(Table::from_csv(Path::new(path))?)
            }
        };
        match get("r0") {
            Some(_) => w.with_r0(num("r0")?),
            None => Ok(w),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            WeightFamily::Standard { alpha } => write!(f, "standard:alpha={alpha}"),
            WeightFamily::LogPower { alpha, beta } => write!(f, "logpower:alpha={alpha},beta={beta}"),
            WeightFamily::Tabulated(t) => write!(f, "table:samples={}", t.r.len()),
        }
    }
}

pub(crate) fn parse_kv(args: &str) -> Result<Vec<(String, String)>> {
    args.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got \"{item}\"")))
        })
        .collect()
}

/// Which quotient failed to be monotone at a grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quotient {
    /// `w / (1-r)^a` should increase.
    Upper,
    /// `w / (1-r)^b` should decrease.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityReport {
    pub is_normal: bool,
    pub violations: Vec<(f64, Quotient)>,
    /// First grid radius of the monotone tail that was tested for trend.
    pub tail_start: Option<f64>,
}

/// Checks the two normality quotients on a strictly increasing grid in
/// `(r0, 1)`.
///
/// Monotonicity failures are listed; the weight is reported normal when a
/// tail covering at least a quarter of the grid is monotone for both
/// quotients and their log-log trend points to `+inf` and `0` respectively.
pub fn check_normality(w: &Weight, a: f64, b: f64, grid: &[f64]) -> NormalityReport {
    let mut violations = Vec::new();
    let mut last_bad = 0usize;
    let x: Vec<f64> = grid.iter().map(|r| (1.0 - r).ln()).collect();
    let lw: Vec<f64> = grid.iter().map(|&r| w.at_gap(1.0 - r).ln()).collect();
    let qa: Vec<f64> = lw.iter().zip(&x).map(|(l, x)| l - a * x).collect();
    let qb: Vec<f64> = lw.iter().zip(&x).map(|(l, x)| l - b * x).collect();
    for i in 1..grid.len() {
        let tol = 1e-12 * (1.0 + qa[i].abs());
        if !(qa[i] >= qa[i - 1] - tol) {
            violations.push((grid[i], Quotient::Upper));
            last_bad = i;
        }
        let tol = 1e-12 * (1.0 + qb[i].abs());
        if !(qb[i] <= qb[i - 1] + tol) {
            violations.push((grid[i], Quotient::Lower));
            last_bad = i;
        }
    }
    let n = grid.len();
    let min_tail = (n / 4).max(4);
    if n < min_tail || n - last_bad < min_tail {
        return NormalityReport {
            is_normal: false,
            violations,
            tail_start: None,
        };
    }
    // trend over the last quarter of the tail
    let tail = &(last_bad..n).collect::<Vec<_>>();
    let k0 = tail[tail.len() - (tail.len() / 4).max(2)];
    let k1 = tail[tail.len() - 1];
    let dx = x[k1] - x[k0];
    let slope_a = (qa[k1] - qa[k0]) / dx;
    let slope_b = (qb[k1] - qb[k0]) / dx;
    NormalityReport {
        is_normal: slope_a < 0.0 && slope_b > 0.0,
        violations,
        tail_start: Some(grid[last_bad]),
    }
}

/// Condition (*): `w(r) (1-r)^{-a_w} log^alpha(1/(1-r))` nondecreasing on
/// the grid.
pub fn check_star_condition(w: &Weight, alpha: f64, grid: &[f64]) -> Result<bool> {
    let a = w.indices()?.a;
    let vals: Vec<f64> = grid
        .iter()
        .map(|&r| {
            let gap = 1.0 - r;
            w.at_gap(gap).ln() - a * gap.ln() + alpha * (-gap.ln()).ln()
        })
        .collect();
    Ok(vals
        .windows(2)
        .all(|p| p[1] >= p[0] - 1e-12 * (1.0 + p[0].abs())))
}

/// Empirical `(min, max)` of `w(|zeta|) / w(|z|)` over random pairs with
/// `|z| > r0` and `|z - zeta| < t (1 - |z|)`.
pub fn comparability_constants<R: Rng + ?Sized>(
    w: &Weight,
    t: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("t = {t} outside (0, 1)"));
    }
    if samples == 0 {
        return domain("need at least one sample");
    }
    let (lo_gap, hi_gap) = (1e-9f64, 1.0 - w.r0());
    let mut c = f64::INFINITY;
    let mut big_c = 0.0f64;
    for _ in 0..samples {
        let gap = (lo_gap.ln() + rng.random::<f64>() * (hi_gap.ln() - lo_gap.ln())).exp();
        let z = DiskPoint::from_gap(gap, rng.random::<f64>() * std::f64::consts::TAU)?;
        let rel = t * rng.random::<f64>().sqrt() * (1.0 - 1e-12);
        let zeta = DiskPoint::offset(&z, rel, rng.random::<f64>() * std::f64::consts::TAU)?;
        let q = w.at(&zeta) / w.at(&z);
        c = c.min(q);
        big_c = big_c.max(q);
    }
    Ok((c, big_c))
}

/// The weight `(1 - r)^p w(r)` within the same family, up to the bounded
/// factor `(1 + r)^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociatedWeight {
    pub weight: Weight,
    pub equivalent_up_to_bounded_factor: bool,
}

pub fn associated_weight(w: &Weight, p: f64) -> Result<AssociatedWeight> {
    let shifted = match w.family {
        WeightFamily::Standard { alpha } => Weight::standard(alpha + p)?,
        WeightFamily::LogPower { alpha, beta } => Weight::log_power(alpha + p, beta)?,
        WeightFamily::Tabulated(_) => {
            return Err(Error::Unsupported(
                "associated weight of a tabulated family".into(),
            ))
        }
    };
    Ok(AssociatedWeight {
        weight: shifted.with_r0(w.r0)?,
        equivalent_up_to_bounded_factor: true,
    })
}
