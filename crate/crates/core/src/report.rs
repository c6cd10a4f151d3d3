//! Ratio reports: left/right-hand sides of an estimate over a grid or sweep,
//! the empirical constants and a verdict.

/// Outcome of a ratio check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    UnboundedTrend,
    GateFailed,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Bounded
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::UnboundedTrend => "unbounded_trend",
            Verdict::GateFailed => "gate_failed",
        }
    }
}

/// Which acceptance rule produced the verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    /// `spread <= max_spread` and `|slope| <= max_slope` over the last decade.
    TwoSided { max_spread: f64, max_slope: f64 },
    /// Running maximum grows by at most `max_spread` and the last-decade
    /// slope does not point upward by more than `max_slope`.
    UpperEnvelope { max_spread: f64, max_slope: f64 },
    /// `max <= factor * median` across a sweep.
    SweepUpper { factor: f64 },
    /// `min >= factor * median` across a sweep.
    SweepLower { factor: f64 },
    /// `max / min <= max_spread` across a sweep.
    Band { max_spread: f64 },
    /// Every ratio finite and positive; used for single evaluations.
    Finite,
}

pub const DEFAULT_MAX_SPREAD: f64 = 100.0;
/// Tolerance for the equalities in parameter gates.
pub const GATE_TOL: f64 = 1e-12;

#[inline]
pub fn gate_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= GATE_TOL
}

pub const DEFAULT_MAX_SLOPE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    /// `|λ|` for grids, the swept parameter (`N`, `n`, trial) for sweeps.
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub c_min: f64,
    pub c_max: f64,
    pub spread: f64,
    pub median: f64,
    /// Last-decade slope of `log ratio` against `log(1 - |λ|)`, grids only.
    pub slope: Option<f64>,
    pub verdict: Verdict,
    pub rule: Option<Rule>,
    pub notes: Vec<String>,
}

impl RatioReport {
    pub fn gate_failed(reason: impl Into<String>) -> Self {
        Self {
            grid: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            ratios: Vec::new(),
            c_min: f64::NAN,
            c_max: f64::NAN,
            spread: f64::NAN,
            median: f64::NAN,
            slope: None,
            verdict: Verdict::GateFailed,
            rule: None,
            notes: vec![reason.into()],
        }
    }

    /// Builds the report and applies `rule`.
    pub fn new(grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, rule: Rule) -> Self {
        let ratios: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l / r).collect();
        let finite = !ratios.is_empty() && ratios.iter().all(|r| r.is_finite() && *r > 0.0);
        let c_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = c_max / c_min;
        let median = median(&ratios);
        let needs_slope = matches!(rule, Rule::TwoSided { .. } | Rule::UpperEnvelope { .. });
        let slope = if needs_slope { last_decade_slope(&grid, &ratios) } else { None };
        let ok = finite
            && match rule {
                Rule::TwoSided { max_spread, max_slope } => {
                    spread <= max_spread && slope.is_some_and(|s| s.abs() <= max_slope)
                }
                Rule::UpperEnvelope { max_spread, max_slope } => {
                    c_max / ratios[0] <= max_spread && slope.is_some_and(|s| s >= -max_slope)
                }
                Rule::SweepUpper { factor } => c_max <= factor * median,
                Rule::SweepLower { factor } => c_min >= factor * median,
                Rule::Band { max_spread } => spread <= max_spread,
                Rule::Finite => true,
            };
        Self {
            grid,
            lhs,
            rhs,
            ratios,
            c_min,
            c_max,
            spread,
            median,
            slope,
            verdict: if ok { Verdict::Bounded } else { Verdict::UnboundedTrend },
            rule: Some(rule),
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Growth of the running maximum of the ratios.
    pub fn upper_envelope_spread(&self) -> f64 {
        self.c_max / self.ratios[0]
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `log ratio` against `log(1 - |λ|)` over grid
/// points with `1 - |λ|` within a factor ten of the smallest.
pub fn last_decade_slope(grid: &[f64], ratios: &[f64]) -> Option<f64> {
    let gaps: Vec<f64> = grid.iter().map(|l| 1.0 - l).collect();
    let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .zip(ratios)
        .filter(|(g, _)| **g <= 10.0 * g_min)
        .map(|(g, r)| (g.ln(), r.ln()))
        .collect();
    slope(&pts)
}

pub fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `n` moduli with `1 - |λ|` geometric from `hi_gap` down to `lo_gap`.
pub fn geometric_lambda_grid(n: usize, hi_gap: f64, lo_gap: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
            1.0 - (hi_gap.ln() + t * (lo_gap.ln() - hi_gap.ln())).exp()
        })
        .collect()
}

/// The default 40-point grid from `1 - |λ| = 0.5` to `5e-3`.
pub fn default_lambda_grid() -> Vec<f64> {
    geometric_lambda_grid(40, 0.5, 5e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ratios_are_bounded() {
        let grid = default_lambda_grid();
        let lhs = vec![2.0; grid.len()];
        let rhs = vec![1.0; grid.len()];
        let r = RatioReport::new(grid, lhs, rhs, Rule::TwoSided { max_spread: 100.0, max_slope: 0.1 });
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_eq!(r.spread, 1.0);
        assert_eq!(r.slope, Some(0.0));
    }

    #[test]
    fn power_growth_is_a_trend() {
        let grid = default_lambda_grid();
        let lhs: Vec<f64> = grid.iter().map(|l| (1.0 - l).powf(-0.5)).collect();
        let rhs = vec![1.0; grid.len()];
        let r = RatioReport::new(grid, lhs, rhs, Rule::TwoSided { max_spread: 100.0, max_slope: 0.1 });
        assert_eq!(r.verdict, Verdict::UnboundedTrend);
        assert!((r.slope.unwrap() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn sweep_rules() {
        let r = RatioReport::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.1, 1.9], vec![1.0; 3], Rule::SweepUpper { factor: 2.0 });
        assert!(r.verdict.passed());
        let r = RatioReport::new(vec![1.0, 2.0, 3.0], vec![1.0, 1.1, 0.4], vec![1.0; 3], Rule::SweepLower { factor: 0.5 });
        assert!(!r.verdict.passed());
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn grid_shape() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.5).abs() < 1e-15);
        assert!((1.0 - g[39] - 5e-3).abs() < 1e-15);
    }
}
