//! One experiment per subcommand, reduced to rows of `(lhs, rhs)` pairs.

use bergman_core::duality::{
    fproperty_check, prop32_ratio, residue_pairing, verify_cohn_analogue, COHN_BAND, FPROPERTY_SWEEP, PROP32_BAND,
    RESIDUE_TOL,
};
use bergman_core::estimates::{verify_prop12, Prop12Case};
use bergman_core::interpolation::{
    bekolle_check, default_bekolle_grid, default_gamma, verify_interpolation, InterpolationProblem, NORM_BAND,
    RESIDUAL_TOL,
};
use bergman_core::report::{geometric_lambda_grid, Rule};
use bergman_core::theorems::{
    higher_order_suite, partial_sweep, verify_cor24, verify_higher_zero_sum, verify_inner_est, verify_main1_lower,
    verify_main1_upper, verify_mashregi, verify_power_growth, zero_sum, Branch, Direction, GateSpec, TheoremReport,
    SWEEP_LOWER, SWEEP_UPPER,
};
use bergman_core::{BlaschkeProduct, Error, Polynomial, QuadOptions, RatioReport, Result, Weight, ZeroSequence};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Command, ExperimentConfig, Mode};

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub series: &'static str,
    /// Number of zeros of the product behind the row, when there is one.
    pub n: Option<usize>,
    pub branch: Option<&'static str>,
    /// Sweep coordinate: `N`, `|λ|`, a power, a trial index or `eps`.
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the row enters the doubled-order drift; false for quantities
    /// at rounding level such as residuals.
    pub tracks_drift: bool,
}

impl Row {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub passed: bool,
    pub notes: Vec<String>,
    /// Whether the rows come from the configured sequence.
    pub uses_sequence: bool,
    /// Exponent shown in the `p` column.
    pub p: Option<f64>,
}

impl Outcome {
    fn new(uses_sequence: bool, p: f64) -> Self {
        Self {
            passed: true,
            uses_sequence,
            p: Some(p),
            ..Self::default()
        }
    }

    /// Rows of `r`; `n_sweep` marks grids of sweep lengths `N`.
    fn push_report(&mut self, series: &'static str, r: &RatioReport, n_sweep: bool, branch: Option<Branch>) {
        for k in 0..r.ratios.len() {
            self.rows.push(Row {
                series,
                n: n_sweep.then_some(r.grid[k] as usize),
                branch: branch.map(Branch::as_str),
                x: r.grid[k],
                lhs: r.lhs[k],
                rhs: r.rhs[k],
                tracks_drift: true,
            });
        }
        self.passed &= r.verdict.passed();
        let mut line = format!("{series}: {}", r.verdict.as_str());
        if !r.ratios.is_empty() {
            line.push_str(&format!(
                ", c_min {:e}, c_max {:e}, spread {:e}, median {:e}",
                r.c_min, r.c_max, r.spread, r.median
            ));
        }
        if let Some(s) = r.slope {
            line.push_str(&format!(", slope {s:e}"));
        }
        self.notes.push(line);
        self.notes.extend(r.notes.iter().map(|n| format!("{series}: {n}")));
    }

    fn push_gate(&mut self, series: &'static str, g: &GateSpec) {
        self.notes
            .push(format!("{series} gate: {} branch {}, {}", g.theorem.as_str(), g.branch.as_str(), g.reason));
        self.notes.extend(g.notes.iter().map(|n| format!("{series} gate: {n}")));
    }

    fn push_theorem(&mut self, series: &'static str, t: &TheoremReport, n_sweep: bool) {
        self.push_gate(series, &t.gate);
        self.push_report(series, &t.report, n_sweep, Some(t.gate.branch));
    }

    fn push_row(&mut self, series: &'static str, n: Option<usize>, x: f64, lhs: f64, rhs: f64, tracks_drift: bool) {
        self.rows.push(Row {
            series,
            n,
            branch: None,
            x,
            lhs,
            rhs,
            tracks_drift,
        });
    }

    fn fail(&mut self, note: String) {
        self.passed = false;
        self.notes.push(note);
    }
}

fn weight(cfg: &ExperimentConfig) -> Result<Weight> {
    Weight::from_spec(&cfg.weight)
}

fn sequence(cfg: &ExperimentConfig) -> Result<ZeroSequence> {
    ZeroSequence::from_spec(&cfg.sequence)
}

fn product(cfg: &ExperimentConfig) -> Result<BlaschkeProduct> {
    BlaschkeProduct::from_sequence(&sequence(cfg)?)
}

fn required(x: Option<f64>, key: &str, cfg: &ExperimentConfig) -> Result<f64> {
    x.ok_or_else(|| Error::Domain(format!("{} needs {key}", cfg.command)))
}

/// The configured lengths, or the powers of two below `len` followed by `len`.
fn sweep_lengths(cfg: &ExperimentConfig, len: usize) -> Result<Vec<usize>> {
    let ns = match &cfg.ns {
        Some(ns) => ns.clone(),
        None => {
            let mut ns: Vec<usize> = (0..).map(|k| 1usize << k).take_while(|&n| n < len).collect();
            ns.push(len);
            ns
        }
    };
    if let Some(&bad) = ns.iter().find(|&&n| n == 0 || n > len) {
        return Err(Error::Domain(format!("sweep length {bad} outside 1..={len}")));
    }
    Ok(ns)
}

fn grid_of(ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| n as f64).collect()
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

/// Runs the configured experiment at the given orders.
pub fn execute(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    opts.validate()?;
    match cfg.command {
        Command::Prop12 => prop12(cfg, opts),
        Command::Main1 => main1(cfg, opts),
        Command::Mashregi => mashregi(cfg, opts),
        Command::Inner => inner(cfg, opts),
        Command::Cor24 => cor24(cfg, opts),
        Command::Higher => higher(cfg, opts),
        Command::Interp => interp(cfg, opts),
        Command::Duality => duality(cfg, opts),
        Command::Cohn => cohn(cfg, opts),
        Command::PowerGrowth => power_growth(cfg, opts),
    }
}

fn prop12(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let w = weight(cfg)?;
    let a = w.indices()?.a;
    let m = cfg.m.unwrap_or(match cfg.case {
        Prop12Case::I => a + 1.0,
        Prop12Case::II => a - 0.5,
        Prop12Case::III => a,
        Prop12Case::IV => a - 1.0,
    });
    if cfg.lambda_points < 2 || !(cfg.lambda_min_gap > 0.0 && cfg.lambda_min_gap < 0.5) {
        return Err(Error::Domain("λ grid needs lambda_points >= 2 and lambda_min_gap in (0, 1/2)".into()));
    }
    let grid = geometric_lambda_grid(cfg.lambda_points, 0.5, cfg.lambda_min_gap);
    let r = verify_prop12(cfg.case, m, &w, &grid, opts)?;
    let mut out = Outcome::new(false, m);
    out.notes.push(format!("case {}, m = {m}; the p column carries m", cfg.case));
    out.push_report("kernel", &r, false, None);
    Ok(out)
}

fn main1(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let ns = sweep_lengths(cfg, b.degree())?;
    let mut out = Outcome::new(true, cfg.p);
    if cfg.direction.upper() {
        let t = partial_sweep(&b, &ns, SWEEP_UPPER, |b| verify_main1_upper(b, cfg.p, &w, opts))?;
        out.push_theorem("upper", &t, true);
    }
    if cfg.direction.lower() {
        let t = partial_sweep(&b, &ns, SWEEP_LOWER, |b| {
            verify_main1_lower(b, cfg.p, &w, cfg.gate_variant, opts)
        })?;
        out.push_theorem("lower", &t, true);
    }
    Ok(out)
}

fn mashregi(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let ns = sweep_lengths(cfg, b.degree())?;
    let reports = ns
        .iter()
        .map(|&n| verify_mashregi(&b.partial_product(n)?, cfg.p, &w, cfg.eps, cfg.gate_variant, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::new(true, cfg.p);
    let branch = Some(reports[0].gate.branch);
    out.push_gate("upper", &reports[0].gate);
    let upper = RatioReport::new(
        grid_of(&ns),
        reports.iter().map(|r| r.sup_value).collect(),
        reports.iter().map(|r| r.zero_sum).collect(),
        Rule::Finite,
    );
    out.push_report("upper", &upper, true, branch);
    for (n, r) in ns.iter().zip(&reports) {
        out.notes.push(format!("N = {n}: supremum at r = {}", r.sup_radius));
    }
    if cfg.direction.lower() {
        if reports.iter().all(|r| r.lower_ratio.is_some()) {
            let lower = RatioReport::new(
                grid_of(&ns),
                reports.iter().map(|r| r.shifted_sum).collect(),
                reports.iter().map(|r| r.sup_value).collect(),
                Rule::Finite,
            );
            out.push_report("lower", &lower, true, branch);
        } else {
            out.notes.push("lower: window does not admit (p, w) or zeros not separated; skipped".into());
        }
    }
    Ok(out)
}

fn inner(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let r = verify_inner_est(&b, cfg.p, &w, cfg.eps, opts)?;
    let mut out = Outcome::new(true, cfg.p);
    out.push_gate("inner", &r.gate);
    let single = |lhs: f64, rhs: f64| RatioReport::new(vec![cfg.eps], vec![lhs], vec![rhs], Rule::Finite);
    let branch = Some(r.gate.branch);
    let n = b.degree();
    for (series, rep) in [
        ("cross-check", single(r.by_preimages, r.by_change_of_variables)),
        ("lower", single(r.norm_pow, r.by_preimages)),
        ("upper", single(cfg.eps * cfg.eps * r.norm_pow, r.log_average.unwrap_or(r.by_preimages))),
    ] {
        out.push_report(series, &rep, false, branch);
        if let Some(row) = out.rows.last_mut() {
            row.n = Some(n);
        }
    }
    out.notes.push(format!("relative difference of the two paths {:e}", r.relative_difference));
    if let Some(l) = r.log_norm {
        out.notes.push(format!("log-weighted norm {l:e}"));
    }
    Ok(out)
}

fn cor24(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let p1 = required(cfg.p1, "p1", cfg)?;
    let p2 = required(cfg.p2, "p2", cfg)?;
    let ns = sweep_lengths(cfg, b.degree())?;
    let t = partial_sweep(&b, &ns, SWEEP_UPPER, |b| verify_cor24(b, p1, p2, &w, opts))?;
    let mut out = Outcome::new(true, p1);
    out.notes.push(format!("p1 = {p1}, p2 = {p2}; the p column carries p1"));
    out.push_theorem("forward", &t, true);
    let inverse = RatioReport::new(t.report.grid.clone(), t.report.rhs.clone(), t.report.lhs.clone(), SWEEP_UPPER);
    out.push_report("inverse", &inverse, true, Some(t.gate.branch));
    Ok(out)
}

fn higher(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let w = weight(cfg)?;
    match cfg.mode.unwrap_or(Mode::Polynomials) {
        Mode::Polynomials => {
            let mut out = Outcome::new(false, cfg.p);
            let t = higher_order_suite(cfg.trials, cfg.degree, cfg.n, cfg.p, &w, &mut rng(cfg), opts)?;
            out.notes.push(format!("order n = {}, degrees 1..={}", cfg.n, cfg.degree));
            out.push_theorem("polynomial", &t, false);
            Ok(out)
        }
        Mode::Zeros => {
            let mut out = Outcome::new(true, cfg.p);
            let b = product(cfg)?;
            let ns = sweep_lengths(cfg, b.degree())?;
            out.notes.push(format!("order n = {}", cfg.n));
            for (on, series, dir, rule) in [
                (cfg.direction.upper(), "upper", Direction::Upper, SWEEP_UPPER),
                (cfg.direction.lower(), "lower", Direction::Lower, SWEEP_LOWER),
            ] {
                if on {
                    let t = partial_sweep(&b, &ns, rule, |b| {
                        verify_higher_zero_sum(b, cfg.n, cfg.p, &w, dir, cfg.gate_variant, opts)
                    })?;
                    out.push_theorem(series, &t, true);
                }
            }
            Ok(out)
        }
        m => Err(Error::Domain(format!("verify-higher has no mode {}", m.name()))),
    }
}

fn interp(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (seq, w) = (sequence(cfg)?, weight(cfg)?);
    let gamma = match cfg.gamma {
        Some(g) => g,
        None => default_gamma(&w, cfg.p)?,
    };
    let n = seq.len();
    let mut out = Outcome::new(true, cfg.p);
    let bek = bekolle_check(&w, cfg.p, gamma, &default_bekolle_grid())?;
    for (r, ratio) in bek.grid.iter().zip(&bek.ratios) {
        out.push_row("bekolle", None, *r, *ratio, 1.0, true);
    }
    out.notes.push(format!(
        "bekolle: constant {:e}, slope {}, holds {}",
        bek.constant,
        bek.slope.map_or_else(|| "none".to_string(), |s| format!("{s:e}")),
        bek.holds
    ));
    if !bek.holds {
        out.fail("bekolle: condition fails".into());
    }
    let prob = InterpolationProblem::new(seq, vec![Complex64::new(0.0, 0.0); n], cfg.p, w, Some(gamma))?;
    let r = verify_interpolation(&prob, cfg.trials, &mut rng(cfg), opts)?;
    let trials = RatioReport::new(
        (0..r.norm_ratios.len()).map(|k| k as f64).collect(),
        r.norm_ratios.clone(),
        vec![1.0; r.norm_ratios.len()],
        NORM_BAND,
    );
    out.push_report("trial", &trials, false, None);
    for row in out.rows.iter_mut().filter(|r| r.series == "trial") {
        row.n = Some(n);
    }
    out.push_row("residual", Some(n), n as f64, r.max_residual, RESIDUAL_TOL, false);
    if !(r.max_residual < RESIDUAL_TOL) {
        out.fail(format!("residual {:e} not below {RESIDUAL_TOL:e}", r.max_residual));
    }
    out.notes.push(format!("gamma = {gamma}, band {:e}, max residual {:e}", r.band, r.max_residual));
    Ok(out)
}

fn duality(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let mut out = Outcome::new(true, cfg.p);
    match cfg.mode.unwrap_or(Mode::Prop32) {
        Mode::Prop32 => {
            let ns = sweep_lengths(cfg, b.degree())?;
            let t = partial_sweep(&b, &ns, PROP32_BAND, |b| prop32_ratio(b, cfg.p, &w, opts))?;
            out.push_theorem("prop32", &t, true);
        }
        Mode::FProperty => {
            let ns = sweep_lengths(cfg, b.degree())?;
            if ns.contains(&1) {
                return Err(Error::Domain("fproperty sweep lengths must be at least 2".into()));
            }
            let ratios = ns
                .iter()
                .map(|&n| {
                    let theta2 = b.partial_product(n)?;
                    fproperty_check(&theta2.partial_product(n / 2)?, &theta2, cfg.p, &w, opts)
                })
                .collect::<Result<Vec<_>>>()?;
            let r = RatioReport::new(grid_of(&ns), ratios, vec![1.0; ns.len()], FPROPERTY_SWEEP);
            out.push_report("fproperty", &r, true, None);
        }
        Mode::Residue => {
            out.p = None;
            for k in 0..=cfg.degree {
                let r = residue_pairing(&b, &Polynomial::monomial(k), opts)?;
                out.push_row("residue", Some(b.degree()), k as f64, r.max_discrepancy, RESIDUE_TOL, false);
            }
            out.notes.push("residue: x is the monomial degree, lhs the relative discrepancy".into());
        }
        m => return Err(Error::Domain(format!("verify-duality has no mode {}", m.name()))),
    }
    Ok(out)
}

fn cohn(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (seq, w) = (sequence(cfg)?, weight(cfg)?);
    let s = required(cfg.s, "s", cfg)?;
    let ns = sweep_lengths(cfg, seq.len())?;
    let mut rng = rng(cfg);
    let rows = ns
        .iter()
        .map(|&n| verify_cohn_analogue(&seq.truncated(n)?, cfg.p, s, &w, cfg.trials, &mut rng, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::new(true, cfg.p);
    let branch = Some(rows[0].gate.branch);
    out.push_gate("samples", &rows[0].gate);
    let samples = RatioReport::new(
        grid_of(&ns),
        rows.iter().map(|c| c.max_derivative_norm.powf(c.r)).collect(),
        rows.iter().map(|c| c.zero_sum).collect(),
        Rule::Finite,
    );
    out.push_report("samples", &samples, true, branch);
    let sums = RatioReport::new(
        grid_of(&ns),
        rows.iter().map(|c| c.zero_sum).collect(),
        rows.iter().map(|c| c.derivative_integral).collect(),
        COHN_BAND,
    );
    out.push_report("sums", &sums, true, branch);
    out.notes.push(format!("s = {s}, r = {}", rows[0].r));
    Ok(out)
}

fn power_growth(cfg: &ExperimentConfig, opts: &QuadOptions) -> Result<Outcome> {
    let (b, w) = (product(cfg)?, weight(cfg)?);
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![4, 8, 16, 32]);
    let r = verify_power_growth(&b, &w, &ns, opts)?;
    let base = zero_sum(&b, 1.0, &w, false);
    let d = b.degree();
    let mut out = Outcome::new(true, 1.0);
    for (k, &n) in ns.iter().enumerate() {
        out.push_row("power", Some(n * d), n as f64, r.ratios[k], 1.0, true);
    }
    for (k, &n) in ns.iter().enumerate() {
        out.push_row("zero-sum", Some(n * d), n as f64, r.zero_sums[k], n as f64 * base, true);
    }
    if !r.strictly_decreasing {
        out.fail("power: ratios not strictly decreasing".into());
    }
    if !r.zero_sum_exact {
        out.fail("zero-sum: not exactly linear in the power".into());
    }
    out.notes.push("x is the power n; N counts zeros of B^n".into());
    Ok(out)
}
