//! CSV rendering with a commented run header.

use sha2::{Digest, Sha256};

use crate::commands::{Outcome, Row};
use crate::config::ExperimentConfig;

pub const COLUMNS: [&str; 11] = [
    "family", "sigma", "N", "p", "alpha", "branch", "series", "x", "lhs", "rhs", "ratio",
];

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e16)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.canonical().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Largest `|r' - r| / |r|` between matching rows that track drift.
pub fn drift(base: &[Row], doubled: &[Row]) -> f64 {
    base.iter()
        .zip(doubled)
        .filter(|(a, _)| a.tracks_drift)
        .map(|(a, b)| {
            let (r, s) = (a.ratio(), b.ratio());
            if r == s {
                0.0
            } else {
                (s - r).abs() / r.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Value of `key` in a `kind:key=value,...` spec.
fn spec_value(spec: &str, key: &str) -> Option<f64> {
    let (_, args) = spec.split_once(':')?;
    args.split(',')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .and_then(|(_, v)| v.trim().parse().ok())
}

fn opt_number(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn render(cfg: &ExperimentConfig, outcome: &Outcome, drift: Option<f64>) -> String {
    let mut out = String::new();
    out.push_str(&format!("# bergman-lab {}\n", cfg.command));
    out.push_str(&format!("# config_sha256 = {}\n", config_hash(cfg)));
    out.push_str(&format!("# seed = {}\n", cfg.seed));
    out.push_str(&format!("# rad_order = {}\n", cfg.rad_order));
    out.push_str(&format!("# ang_order = {}\n", cfg.ang_order));
    match drift {
        Some(d) => out.push_str(&format!("# doubled_order_drift = {}\n", format_number(d))),
        None => out.push_str("# doubled_order_drift = skipped\n"),
    }
    out.push_str(&format!("# verdict = {}\n", if outcome.passed { "pass" } else { "fail" }));
    for line in cfg.canonical().lines() {
        out.push_str(&format!("# config: {line}\n"));
    }
    for note in &outcome.notes {
        out.push_str(&format!("# note: {}\n", one_line(note)));
    }
    let (family, sigma) = if outcome.uses_sequence {
        let kind = cfg.sequence.split(':').next().unwrap_or_default().to_string();
        (kind, opt_number(spec_value(&cfg.sequence, "sigma")))
    } else {
        (String::new(), String::new())
    };
    let p = opt_number(outcome.p);
    let alpha = opt_number(spec_value(&cfg.weight, "alpha"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("write to memory");
    for r in &outcome.rows {
        w.write_record([
            family.clone(),
            sigma.clone(),
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            p.clone(),
            alpha.clone(),
            r.branch.unwrap_or_default().to_string(),
            r.series.to_string(),
            format_number(r.x),
            format_number(r.lhs),
            format_number(r.rhs),
            format_number(r.ratio()),
        ])
        .expect("write to memory");
    }
    let body = w.into_inner().expect("flush to memory");
    out.push_str(std::str::from_utf8(&body).expect("utf-8 fields"));
    out
}
