//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bergman_core::estimates::Prop12Case;
use bergman_core::theorems::GateVariant;
use bergman_core::{QuadOptions, Weight, ZeroSequence};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{at}: {msg}")]
pub struct ConfigError {
    /// `FILE:LINE`, or the flag that carried the value.
    pub at: String,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Prop12,
    Main1,
    Mashregi,
    Inner,
    Cor24,
    Higher,
    Interp,
    Duality,
    Cohn,
    PowerGrowth,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Prop12,
        Command::Main1,
        Command::Mashregi,
        Command::Inner,
        Command::Cor24,
        Command::Higher,
        Command::Interp,
        Command::Duality,
        Command::Cohn,
        Command::PowerGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Prop12 => "verify-prop12",
            Command::Main1 => "verify-main1",
            Command::Mashregi => "verify-mashregi",
            Command::Inner => "verify-inner",
            Command::Cor24 => "verify-cor24",
            Command::Higher => "verify-higher",
            Command::Interp => "verify-interp",
            Command::Duality => "verify-duality",
            Command::Cohn => "verify-cohn",
            Command::PowerGrowth => "verify-power-growth",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command \"{s}\""))
    }
}

/// Which side of a two-sided estimate to sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sides {
    Upper,
    Lower,
    Both,
}

impl Sides {
    pub fn upper(self) -> bool {
        self != Sides::Lower
    }

    pub fn lower(self) -> bool {
        self != Sides::Upper
    }
}

impl fmt::Display for Sides {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sides::Upper => "upper",
            Sides::Lower => "lower",
            Sides::Both => "both",
        })
    }
}

impl FromStr for Sides {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "upper" => Ok(Sides::Upper),
            "lower" => Ok(Sides::Lower),
            "both" => Ok(Sides::Both),
            _ => Err(format!("expected upper, lower or both, got \"{s}\"")),
        }
    }
}

/// Sub-experiment of `verify-higher` and `verify-duality`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Polynomials,
    Zeros,
    Prop32,
    FProperty,
    Residue,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Polynomials => "polynomials",
            Mode::Zeros => "zeros",
            Mode::Prop32 => "prop32",
            Mode::FProperty => "fproperty",
            Mode::Residue => "residue",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Mode::Polynomials, Mode::Zeros, Mode::Prop32, Mode::FProperty, Mode::Residue]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode \"{s}\", expected polynomials, zeros, prop32, fproperty or residue"))
    }
}

/// Every key accepted in a config file or by `--set`, in canonical order.
pub const KEYS: [&str; 28] = [
    "weight",
    "alpha",
    "sequence",
    "sigma",
    "length",
    "p",
    "p1",
    "p2",
    "s",
    "gamma",
    "eps",
    "n",
    "m",
    "case",
    "ns",
    "trials",
    "degree",
    "direction",
    "mode",
    "lambda_points",
    "lambda_min_gap",
    "seed",
    "rad_order",
    "ang_order",
    "kappa",
    "gate_variant",
    "drift",
    "out",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub weight: String,
    pub sequence: String,
    pub p: f64,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub eps: f64,
    /// Derivative order of the higher-order estimates.
    pub n: usize,
    /// Exponent `m` of the kernel integrals; defaults per case.
    pub m: Option<f64>,
    pub case: Prop12Case,
    /// Sweep lengths `N` (partial products), or powers for power growth.
    pub ns: Option<Vec<usize>>,
    pub trials: usize,
    pub degree: usize,
    pub direction: Sides,
    pub mode: Option<Mode>,
    pub lambda_points: usize,
    pub lambda_min_gap: f64,
    pub seed: u64,
    pub rad_order: usize,
    pub ang_order: usize,
    /// Clustering exponent override of the tensor rules.
    pub kappa: Option<u32>,
    pub gate_variant: GateVariant,
    /// Rerun at doubled orders and report the drift of the ratios.
    pub drift: bool,
    pub out: Option<PathBuf>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("key {key}: invalid value \"{v}\": {e}"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<usize>, String> {
    let xs = v
        .split(',')
        .map(|s| parse_num::<usize>(key, s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if xs.is_empty() || xs.contains(&0) {
        return Err(format!("key {key}: expected a list of positive integers, got \"{v}\""));
    }
    Ok(xs)
}

fn fmt_opt<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "default".to_string(), T::to_string)
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        let q = QuadOptions::default();
        Self {
            command,
            weight: "standard:alpha=-0.5".into(),
            sequence: "exp:sigma=0.5,n=10".into(),
            p: 1.0,
            p1: None,
            p2: None,
            s: None,
            gamma: None,
            eps: 0.25,
            n: 1,
            m: None,
            case: Prop12Case::I,
            ns: None,
            trials: 20,
            degree: 10,
            direction: Sides::Both,
            mode: None,
            lambda_points: 40,
            lambda_min_gap: 5e-3,
            seed: 0,
            rad_order: q.rad_order,
            ang_order: q.ang_order,
            kappa: q.kappa,
            gate_variant: GateVariant::AsPrinted,
            drift: true,
            out: None,
        }
    }

    /// Applies one `key = value` setting; the error names the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "weight" => {
                Weight::from_spec(v).map_err(|e| format!("key weight: {e}"))?;
                self.weight = v.to_string();
            }
            "alpha" => {
                let a: f64 = parse_num(key, v)?;
                let spec = format!("standard:alpha={a}");
                Weight::from_spec(&spec).map_err(|e| format!("key alpha: {e}"))?;
                self.weight = spec;
            }
            "sequence" => {
                ZeroSequence::from_spec(v).map_err(|e| format!("key sequence: {e}"))?;
                self.sequence = v.to_string();
            }
            "sigma" => self.set_sequence_param("sigma", parse_num::<f64>(key, v)?.to_string())?,
            "length" => self.set_sequence_param("n", parse_num::<usize>(key, v)?.to_string())?,
            "p" => self.p = parse_num(key, v)?,
            "p1" => self.p1 = Some(parse_num(key, v)?),
            "p2" => self.p2 = Some(parse_num(key, v)?),
            "s" => self.s = Some(parse_num(key, v)?),
            "gamma" => self.gamma = Some(parse_num(key, v)?),
            "eps" => self.eps = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "m" => self.m = Some(parse_num(key, v)?),
            "case" => self.case = v.parse().map_err(|e| format!("key case: {e}"))?,
            "ns" => self.ns = Some(parse_list(key, v)?),
            "trials" => self.trials = parse_num(key, v)?,
            "degree" => self.degree = parse_num(key, v)?,
            "direction" => self.direction = v.parse().map_err(|e| format!("key direction: {e}"))?,
            "mode" => self.mode = Some(v.parse().map_err(|e| format!("key mode: {e}"))?),
            "lambda_points" => self.lambda_points = parse_num(key, v)?,
            "lambda_min_gap" => self.lambda_min_gap = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "rad_order" => self.rad_order = parse_num(key, v)?,
            "ang_order" => self.ang_order = parse_num(key, v)?,
            "kappa" => self.kappa = Some(parse_num(key, v)?),
            "gate_variant" => self.gate_variant = v.parse().map_err(|e| format!("key gate_variant: {e}"))?,
            "drift" => self.drift = parse_num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key \"{key}\"")),
        }
        Ok(())
    }

    /// Replaces or adds `param` in an `exp` or `rotexp` sequence spec.
    fn set_sequence_param(&mut self, param: &str, value: String) -> Result<(), String> {
        let (kind, args) = self.sequence.split_once(':').unwrap_or((&self.sequence, ""));
        if kind != "exp" && kind != "rotexp" {
            return Err(format!("{param} applies to exp and rotexp sequences, not \"{}\"", self.sequence));
        }
        let mut parts: Vec<String> = args
            .split(',')
            .filter(|kv| !kv.trim().is_empty() && kv.split('=').next().map(str::trim) != Some(param))
            .map(str::to_string)
            .collect();
        parts.push(format!("{param}={value}"));
        let spec = format!("{kind}:{}", parts.join(","));
        ZeroSequence::from_spec(&spec).map_err(|e| format!("sequence {spec}: {e}"))?;
        self.sequence = spec;
        Ok(())
    }

    /// Applies the settings of a config text, reporting `origin:line` on error.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (k, raw) in text.lines().enumerate() {
            let at = || format!("{origin}:{}", k + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                at: at(),
                msg: format!("expected key = value, got \"{line}\""),
            })?;
            self.set(key.trim(), value).map_err(|msg| ConfigError { at: at(), msg })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            at: origin.clone(),
            msg: e.to_string(),
        })?;
        self.apply_text(&text, &origin)
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            rad_order: self.rad_order,
            ang_order: self.ang_order,
            kappa: self.kappa,
        }
    }

    /// Every effective setting except `out` and the shorthands, one `key=value` per line, in
    /// [`KEYS`] order; the config hash is taken over this text.
    pub fn canonical(&self) -> String {
        let ns = self.ns.as_ref().map(|v| {
            v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        });
        let mut out = format!("command={}\n", self.command);
        for key in KEYS {
            let v = match key {
                "weight" => self.weight.clone(),
                "sequence" => self.sequence.clone(),
                "p" => self.p.to_string(),
                "p1" => fmt_opt(&self.p1),
                "p2" => fmt_opt(&self.p2),
                "s" => fmt_opt(&self.s),
                "gamma" => fmt_opt(&self.gamma),
                "eps" => self.eps.to_string(),
                "n" => self.n.to_string(),
                "m" => fmt_opt(&self.m),
                "case" => self.case.to_string(),
                "ns" => fmt_opt(&ns),
                "trials" => self.trials.to_string(),
                "degree" => self.degree.to_string(),
                "direction" => self.direction.to_string(),
                "mode" => fmt_opt(&self.mode.map(Mode::name)),
                "lambda_points" => self.lambda_points.to_string(),
                "lambda_min_gap" => self.lambda_min_gap.to_string(),
                "seed" => self.seed.to_string(),
                "rad_order" => self.rad_order.to_string(),
                "ang_order" => self.ang_order.to_string(),
                "kappa" => fmt_opt(&self.kappa),
                "gate_variant" => self.gate_variant.to_string(),
                "drift" => self.drift.to_string(),
                _ => continue,
            };
            out.push_str(&format!("{key}={v}\n"));
        }
        out
    }
}
