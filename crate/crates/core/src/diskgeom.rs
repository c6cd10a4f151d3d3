//! Zero sequences, separation constants and disjoint pseudo-disks.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::path::Path;

use crate::blaschke::BlaschkeProduct;
use crate::error::{domain, Error, Result};
use crate::point::{DiskPoint, MobiusParts};
use crate::weights::parse_kv;

/// Distinct points with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSequence {
    points: Vec<(DiskPoint, usize)>,
    blaschke_sum: f64,
}

impl ZeroSequence {
    pub fn new(points: Vec<(DiskPoint, usize)>) -> Result<Self> {
        for (p, m) in &points {
            if !(p.gap() > 0.0) {
                return domain(format!("zero with |z| = {} is not inside the disk", p.modulus()));
            }
            if *m == 0 {
                return domain("multiplicities must be at least 1");
            }
        }
        let blaschke_sum = points.iter().map(|(p, m)| *m as f64 * p.gap()).sum();
        Ok(Self {
            points,
            blaschke_sum,
        })
    }

    /// Simple zeros.
    pub fn simple(points: Vec<DiskPoint>) -> Result<Self> {
        Self::new(points.into_iter().map(|p| (p, 1)).collect())
    }

    pub fn points(&self) -> &[(DiskPoint, usize)] {
        &self.points
    }

    /// `Σ m_n (1 - |z_n|)`.
    pub fn blaschke_sum(&self) -> f64 {
        self.blaschke_sum
    }

    /// Zeros repeated by multiplicity, in stored order.
    pub fn flattened(&self) -> Vec<DiskPoint> {
        self.points
            .iter()
            .flat_map(|(p, m)| std::iter::repeat_n(*p, *m))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.points.iter().all(|(_, m)| *m == 1)
    }

    /// The first `n` distinct points.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::new(self.points[..n.min(self.points.len())].to_vec())
    }

    /// Every point rotated by a common angle.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            points: self.points.iter().map(|(p, m)| (p.rotated(angle), *m)).collect(),
            blaschke_sum: self.blaschke_sum,
        }
    }

    /// Parses `exp:sigma=S,n=N`, `rotexp:sigma=S,n=N`,
    /// `radial:moduli=R1;R2;...` or `explicit:path=FILE` (CSV `re,im,mult`).
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("sequence spec \"{spec}\" lacks a kind prefix")))?;
        let kv = parse_kv(args)?;
        let allowed: &[&str] = match kind {
            "exp" | "rotexp" => &["sigma", "n"],
            "radial" => &["moduli"],
            "explicit" => &["path"],
            _ => return Err(Error::Parse(format!("unknown sequence kind \"{kind}\""))),
        };
        for (k, _) in &kv {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown key \"{k}\" in sequence spec \"{spec}\"")));
            }
        }
        let get = |key: &str| {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse(format!("sequence spec \"{spec}\" needs {key}")))
        };
        let kind = match kind {
            "exp" | "rotexp" => {
                let sigma = get("sigma")?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("sigma: {e}")))?;
                let n = get("n")?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("n: {e}")))?;
                if kind == "exp" {
                    SequenceKind::Exponential { sigma, n }
                } else {
                    SequenceKind::RotatedExponential { sigma, n }
                }
            }
            "radial" => SequenceKind::Radial {
                moduli: get("moduli")?
                    .split(';')
                    .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("moduli: {e}"))))
                    .collect::<Result<_>>()?,
            },
            _ => return Self::from_csv(Path::new(get("path")?)),
        };
        generate_sequence(&kind)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["re", "im", "mult"] {
            return Err(Error::Parse(format!("{}: expected header \"re,im,mult\"", path.display())));
        }
        let mut pts = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |e: String| Error::Parse(format!("{} line {}: {e}", path.display(), line + 2));
            let re = rec[0].parse::<f64>().map_err(|e| bad(e.to_string()))?;
            let im = rec[1].parse::<f64>().map_err(|e| bad(e.to_string()))?;
            let m = rec[2].parse::<usize>().map_err(|e| bad(e.to_string()))?;
            pts.push((DiskPoint::interior(Complex64::new(re, im))?, m));
        }
        Self::new(pts)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceKind {
    /// Moduli `1 - sigma^k`, `k = 1..=n`, on the positive axis.
    Exponential { sigma: f64, n: usize },
    /// Given moduli on the positive axis.
    Radial { moduli: Vec<f64> },
    /// Exponential moduli at angles `2π φ k` with `φ` the golden ratio.
    RotatedExponential { sigma: f64, n: usize },
}

pub fn generate_sequence(kind: &SequenceKind) -> Result<ZeroSequence> {
    match kind {
        SequenceKind::Exponential { sigma, n } | SequenceKind::RotatedExponential { sigma, n } => {
            if !(*sigma > 0.0 && *sigma < 1.0) {
                return domain(format!("sigma = {sigma} outside (0, 1)"));
            }
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            let rotate = matches!(kind, SequenceKind::RotatedExponential { .. });
            let pts = (1..=*n)
                .map(|k| {
                    let theta = if rotate { TAU * (golden * k as f64).fract() } else { 0.0 };
                    DiskPoint::from_gap(sigma.powi(k as i32), theta)
                })
                .collect::<Result<Vec<_>>>()?;
            ZeroSequence::simple(pts)
        }
        SequenceKind::Radial { moduli } => {
            let pts = moduli
                .iter()
                .map(|&r| {
                    if !(0.0..1.0).contains(&r) {
                        return domain(format!("modulus {r} outside [0, 1)"));
                    }
                    DiskPoint::from_gap(1.0 - r, 0.0)
                })
                .collect::<Result<Vec<_>>>()?;
            ZeroSequence::simple(pts)
        }
    }
}

/// `min_n Π_{k != n} ρ(z_k, z_n)`; zero when any multiplicity exceeds one.
pub fn separation_constant(seq: &ZeroSequence) -> f64 {
    if !seq.is_simple() {
        return 0.0;
    }
    let pts: Vec<DiskPoint> = seq.points().iter().map(|(p, _)| *p).collect();
    let mut delta = 1.0f64;
    for (n, zn) in pts.iter().enumerate() {
        let mut prod = 1.0;
        for (k, zk) in pts.iter().enumerate() {
            if k != n {
                prod *= MobiusParts::new(zk, zn).pseudo().min(1.0);
            }
        }
        delta = delta.min(prod);
    }
    delta
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationReport {
    pub delta: f64,
    /// `R` such that the disks `|ζ - z_n| < R (1 - |z_n|)` are pairwise disjoint.
    pub disjoint_radius: f64,
    /// `max |B|` over the boundaries of those disks.
    pub rho_r: f64,
}

const DISK_BOUNDARY_SAMPLES: usize = 64;

/// Starts from `R = delta / 4`, halving until the disks are pairwise
/// disjoint, and estimates `sup |B|` on their union.
pub fn disjoint_disk_radius(seq: &ZeroSequence, delta: f64) -> Result<SeparationReport> {
    if !(delta > 0.0) {
        return Err(Error::Separation(format!("delta = {delta} is not positive")));
    }
    let pts: Vec<DiskPoint> = seq.points().iter().map(|(p, _)| *p).collect();
    let mut r = (delta / 4.0).min(0.25);
    let mut verified = false;
    for _ in 0..=20 {
        let disjoint = pts.iter().enumerate().all(|(i, a)| {
            pts[i + 1..]
                .iter()
                .all(|b| MobiusParts::new(a, b).dist() > r * (a.gap() + b.gap()))
        });
        if disjoint {
            verified = true;
            break;
        }
        r *= 0.5;
    }
    if !verified {
        return Err(Error::Separation(format!(
            "disks not disjoint down to R = {r:e}"
        )));
    }
    let b = BlaschkeProduct::from_sequence(seq)?;
    let mut rho = 0.0f64;
    for a in &pts {
        for k in 0..DISK_BOUNDARY_SAMPLES {
            let t = TAU * k as f64 / DISK_BOUNDARY_SAMPLES as f64;
            let q = DiskPoint::offset(a, r, t)?;
            rho = rho.max(b.eval(&q).norm());
        }
    }
    Ok(SeparationReport {
        delta,
        disjoint_radius: r,
        rho_r: rho,
    })
}
