//! Disk, circle and radial quadrature under the normalized area measure.
//!
//! Two disk rules share the [`DiskRule`] interface. [`DiskQuadrature`] is the
//! tensor Gauss–Legendre × trapezoid rule with algebraic clustering at the
//! boundary. [`GradedDiskRule`] is built a priori from a list of feature
//! points (zeros, kernel centers): radial panels are dyadic in `1 - r` down
//! past the innermost feature scale and angular panels are geometrically
//! graded around each feature angle, so integrands peaked at scale `1 - |a|`
//! near a point `a` close to the circle are resolved without adaptivity.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Error, Result};
use crate::point::{wrap_angle, DiskPoint};
use crate::weights::Weight;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let wgt = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = wgt;
            weights[n - 1 - i] = wgt;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Maps the rule to `[a, b]`, yielding `(x, weight)` pairs.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule of order `n >= 1`.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n.max(1))
        .or_insert_with(|| Arc::new(GaussLegendre::compute(n.max(1))))
        .clone()
}

/// `∫_a^b f` by an `n`-point Gauss rule.
pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    gauss_legendre(n).on(a, b).map(|(x, w)| w * f(x)).sum()
}

/// Boundary clustering exponent for integrands behaving like `(1-r)^gamma`.
pub fn clustering_exponent(gamma: f64) -> u32 {
    if gamma <= -1.0 {
        return 64;
    }
    (2.0 / (1.0 + gamma) - 1e-9).ceil().clamp(1.0, 64.0) as u32
}

/// `∫_lo^hi f(gap) dgap` for integrands that are smooth on dyadic panels
/// relative to the distance from `lo`.
///
/// With `lo > 0` the panels are `[lo 2^k, lo 2^{k+1}]`; with `lo = 0` they
/// are `[hi 2^{-k-1}, hi 2^{-k}]` down to `hi 2^{-48}`, followed by a panel
/// at zero under the substitution `gap = t^kappa` chosen from `gamma_hint`.
pub fn integrate_gap(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    gamma_hint: f64,
    order: usize,
) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let gl = gauss_legendre(order);
    let mut total = 0.0;
    if lo > 0.0 {
        let mut a = lo;
        while a < hi {
            let b = (2.0 * a).min(hi);
            total += gl.on(a, b).map(|(x, w)| w * f(x)).sum::<f64>();
            a = b;
        }
        return total;
    }
    let mut b = hi;
    for _ in 0..48 {
        let a = 0.5 * b;
        total += gl.on(a, b).map(|(x, w)| w * f(x)).sum::<f64>();
        b = a;
    }
    total + integrate_at_zero(&f, b, clustering_exponent(gamma_hint), &gl)
}

/// `∫_0^g f` with `x = g t^kappa`.
fn integrate_at_zero(f: &impl Fn(f64) -> f64, g: f64, kappa: u32, gl: &GaussLegendre) -> f64 {
    let k = kappa as f64;
    gl.on(0.0, 1.0)
        .map(|(t, w)| {
            let x = g * t.powi(kappa as i32);
            w * f(x) * g * k * t.powi(kappa as i32 - 1)
        })
        .sum()
}

/// One circle of a disk rule: nodes at radius `1 - gap`.
///
/// `weight` is the radial weight including the `2r` Jacobian; angular
/// weights sum to one.
#[derive(Clone, Debug)]
pub struct Ring {
    pub gap: f64,
    pub weight: f64,
    pub angles: Arc<[(f64, f64)]>,
}

/// A product-type rule for `∫_D f dA` whose total weight is one.
pub trait DiskRule: Sync {
    fn rings(&self) -> &[Ring];
    /// The same rule at half the order, for error estimation.
    fn embedded(&self) -> Self
    where
        Self: Sized;

    fn node_count(&self) -> usize {
        self.rings().iter().map(|r| r.angles.len()).sum()
    }
}

/// Orders shared by every rule built inside a harness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Tensor radial order; graded rules use `3 rad_order / 32` nodes per panel.
    pub rad_order: usize,
    /// Tensor angular count; graded rules use `ang_order / 32` nodes per panel.
    pub ang_order: usize,
    /// Overrides the clustering exponent derived from the boundary hint.
    pub kappa: Option<u32>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rad_order: 128,
            ang_order: 256,
            kappa: None,
        }
    }
}

impl QuadOptions {
    pub fn doubled(&self) -> Self {
        Self {
            rad_order: 2 * self.rad_order,
            ang_order: 2 * self.ang_order,
            kappa: self.kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rad_order < 4 || self.ang_order < 8 || !self.ang_order.is_power_of_two() {
            return domain(format!(
                "quadrature orders need rad_order >= 4 and ang_order a power of two >= 8, got {} x {}",
                self.rad_order, self.ang_order
            ));
        }
        Ok(())
    }

    fn radial_panel_order(&self) -> usize {
        (3 * self.rad_order / 32).max(3)
    }

    fn angular_panel_order(&self) -> usize {
        (self.ang_order / 32).max(2)
    }

    fn kappa_for(&self, hint: f64) -> u32 {
        self.kappa.unwrap_or_else(|| clustering_exponent(hint))
    }
}

/// Tensor rule: Gauss–Legendre in `u` with `1 - r = (1 - u)^kappa`, times
/// the trapezoid rule in angle.
#[derive(Clone, Debug)]
pub struct DiskQuadrature {
    rad_order: usize,
    ang_order: usize,
    kappa: u32,
    hint: f64,
    rings: Vec<Ring>,
}

impl DiskQuadrature {
    pub fn new(rad_order: usize, ang_order: usize, boundary_hint: f64) -> Result<Self> {
        Self::with_kappa(rad_order, ang_order, boundary_hint, clustering_exponent(boundary_hint))
    }

    pub fn from_options(opts: &QuadOptions, boundary_hint: f64) -> Result<Self> {
        opts.validate()?;
        Self::with_kappa(opts.rad_order, opts.ang_order, boundary_hint, opts.kappa_for(boundary_hint))
    }

    pub fn with_kappa(rad_order: usize, ang_order: usize, boundary_hint: f64, kappa: u32) -> Result<Self> {
        if rad_order < 2 || ang_order < 2 || !ang_order.is_power_of_two() || kappa == 0 {
            return domain(format!(
                "invalid tensor rule {rad_order} x {ang_order} with kappa {kappa}"
            ));
        }
        let angles: Arc<[(f64, f64)]> = (0..ang_order)
            .map(|k| (wrap_angle(TAU * k as f64 / ang_order as f64), 1.0 / ang_order as f64))
            .collect();
        let k = kappa as f64;
        let rings = gauss_legendre(rad_order)
            .on(0.0, 1.0)
            .map(|(u, w)| {
                let v = 1.0 - u;
                let gap = v.powi(kappa as i32);
                let jac = k * v.powi(kappa as i32 - 1);
                Ring {
                    gap,
                    weight: w * jac * 2.0 * (1.0 - gap),
                    angles: angles.clone(),
                }
            })
            .collect();
        Ok(Self {
            rad_order,
            ang_order,
            kappa,
            hint: boundary_hint,
            rings,
        })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn boundary_hint(&self) -> f64 {
        self.hint
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.rad_order, self.ang_order)
    }
}

impl DiskRule for DiskQuadrature {
    fn rings(&self) -> &[Ring] {
        &self.rings
    }

    fn embedded(&self) -> Self {
        Self::with_kappa(
            (self.rad_order / 2).max(1),
            (self.ang_order / 2).max(1),
            self.hint,
            self.kappa,
        )
        .expect("halving a valid rule stays valid")
    }
}

/// Rule graded a priori around feature points.
///
/// Nodes carry absolute angles, so a feature at angle `phi` is resolved down
/// to scales of a few ulps of `phi`; features on the positive real axis have
/// no such floor.
#[derive(Clone, Debug)]
pub struct GradedDiskRule {
    features: Vec<DiskPoint>,
    hint: f64,
    opts: QuadOptions,
    rings: Vec<Ring>,
}

const RADIAL_SUBDIVISIONS: [f64; 8] = [
    0.5, 0.75, 0.875, 0.9375, 1.0625, 1.125, 1.25, 1.5,
];
const BASE_ANGULAR_PANELS: usize = 32;
/// Dyadic radial panels always reach this gap, so that smooth non-integer
/// powers of the gap are integrated without relying on the final panel.
const RADIAL_FLOOR: f64 = 9.094947017729282e-13;
/// Feature angles closer than this share one graded cluster.
const ANGLE_MERGE: f64 = 1e-12;

impl GradedDiskRule {
    pub fn new(features: &[DiskPoint], boundary_hint: f64, opts: &QuadOptions) -> Result<Self> {
        opts.validate()?;
        let features = features.to_vec();
        let rings = build_graded_rings(&features, boundary_hint, opts);
        Ok(Self {
            features,
            hint: boundary_hint,
            opts: *opts,
            rings,
        })
    }

    pub fn features(&self) -> &[DiskPoint] {
        &self.features
    }

    pub fn options(&self) -> &QuadOptions {
        &self.opts
    }
}

impl DiskRule for GradedDiskRule {
    fn rings(&self) -> &[Ring] {
        &self.rings
    }

    fn embedded(&self) -> Self {
        let half = QuadOptions {
            rad_order: (self.opts.rad_order / 2).max(4),
            ang_order: (self.opts.ang_order / 2).max(8),
            kappa: self.opts.kappa,
        };
        Self {
            features: self.features.clone(),
            hint: self.hint,
            opts: half,
            rings: build_graded_rings(&self.features, self.hint, &half),
        }
    }
}

fn radial_breakpoints(features: &[DiskPoint]) -> Vec<f64> {
    let min_gap = features
        .iter()
        .map(|f| f.gap())
        .filter(|&g| g > 0.0)
        .fold(1.0f64, f64::min);
    let mut pts = vec![1.0];
    let mut g = 1.0;
    let floor = (0.25 * min_gap).min(RADIAL_FLOOR);
    while g > floor && g > 1e-300 {
        g *= 0.5;
        pts.push(g);
    }
    for f in features {
        let gf = f.gap();
        if gf > 0.0 && gf < 1.0 {
            pts.push(gf);
            for c in RADIAL_SUBDIVISIONS {
                let b = gf * c;
                if b < 1.0 {
                    pts.push(b);
                }
            }
        }
    }
    pts.sort_by(|a, b| b.total_cmp(a));
    pts.dedup_by(|a, b| (*b - *a).abs() <= 1e-9 * *b);
    pts
}

fn build_graded_rings(features: &[DiskPoint], hint: f64, opts: &QuadOptions) -> Vec<Ring> {
    let gl_r = gauss_legendre(opts.radial_panel_order());
    let kappa = opts.kappa_for(hint);
    let pts = radial_breakpoints(features);
    let mut radial: Vec<(f64, f64)> = Vec::new();
    for pair in pts.windows(2) {
        let (b, a) = (pair[0], pair[1]);
        radial.extend(gl_r.on(a, b));
    }
    let g_last = *pts.last().unwrap();
    let k = kappa as f64;
    radial.extend(gl_r.on(0.0, 1.0).map(|(t, w)| {
        (
            g_last * t.powi(kappa as i32),
            w * g_last * k * t.powi(kappa as i32 - 1),
        )
    }));

    let clusters = angle_clusters(features);
    let gl_a = gauss_legendre(opts.angular_panel_order());
    radial
        .into_par_iter()
        .map(|(gap, w)| {
            let weight = w * 2.0 * (1.0 - gap);
            let angles = angular_nodes(&clusters, gap, &gl_a);
            Ring { gap, weight, angles }
        })
        .collect()
}

/// `(angle, smallest feature gap)` for each distinct feature angle; the
/// origin carries no angular information.
fn angle_clusters(features: &[DiskPoint]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = features
        .iter()
        .filter(|f| !f.is_origin())
        .map(|f| (f.theta(), f.gap()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (t, g) in pts {
        match out.last_mut() {
            Some(last) if (t - last.0).abs() <= ANGLE_MERGE => last.1 = last.1.min(g),
            _ => out.push((t, g)),
        }
    }
    out
}

fn angular_nodes(clusters: &[(f64, f64)], ring_gap: f64, gl: &GaussLegendre) -> Arc<[(f64, f64)]> {
    // Breakpoints are kept as (center, offset) so that nodes close to a
    // feature angle are formed as center + small offset.
    let mut bps: Vec<(f64, f64)> = (0..=BASE_ANGULAR_PANELS)
        .map(|k| (0.0, -PI + TAU * k as f64 / BASE_ANGULAR_PANELS as f64))
        .collect();
    for &(phi, g) in clusters {
        let h = g + ring_gap;
        // offsets below a few ulps of the center cannot be represented
        let mut d = (0.5 * h).max(4.0 * f64::EPSILON * phi.abs());
        bps.push((phi, 0.0));
        while d < PI {
            for off in [d, -d] {
                let abs = phi + off;
                if abs > -PI && abs < PI {
                    bps.push((phi, off));
                }
            }
            d *= 2.0;
        }
    }
    bps.sort_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)));
    bps.dedup_by(|a, b| a.0 + a.1 == b.0 + b.1);
    let mut nodes = Vec::with_capacity(bps.len() * gl.nodes.len());
    for pair in bps.windows(2) {
        let (c0, o0) = pair[0];
        let (c1, o1) = pair[1];
        // panel width measured in the frame of the nearer center
        let (center, a, b) = if c0 == c1 {
            (c0, o0, o1)
        } else if o0.abs() <= o1.abs() {
            (c0, o0, (c1 - c0) + o1)
        } else {
            (c1, (c0 - c1) + o0, o1)
        };
        if !(b > a) {
            continue;
        }
        for (x, w) in gl.on(a, b) {
            nodes.push((center + x, w / TAU));
        }
    }
    nodes.into()
}

/// Value and embedded-rule error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskIntegral {
    pub value: f64,
    pub err: f64,
}

/// `∫_D f dA` by the rule alone.
pub fn integrate_disk_value<R: DiskRule>(f: impl Fn(&DiskPoint) -> f64 + Sync, rule: &R) -> Result<f64> {
    let sums: Vec<Result<f64>> = rule
        .rings()
        .par_iter()
        .map(|ring| {
            let mut s = 0.0;
            for &(theta, aw) in ring.angles.iter() {
                let p = DiskPoint::from_gap_unchecked(ring.gap, theta);
                let v = f(&p);
                if !v.is_finite() {
                    return Err(Error::Evaluation {
                        r: 1.0 - ring.gap,
                        theta,
                    });
                }
                s += aw * v;
            }
            Ok(ring.weight * s)
        })
        .collect();
    let mut total = 0.0;
    for s in sums {
        total += s?;
    }
    Ok(total)
}

/// `∫_D f dA` for complex-valued `f`.
pub fn integrate_disk_complex<R: DiskRule>(
    f: impl Fn(&DiskPoint) -> Complex64 + Sync,
    rule: &R,
) -> Result<Complex64> {
    let sums: Vec<Result<Complex64>> = rule
        .rings()
        .par_iter()
        .map(|ring| {
            let mut s = Complex64::new(0.0, 0.0);
            for &(theta, aw) in ring.angles.iter() {
                let v = f(&DiskPoint::from_gap_unchecked(ring.gap, theta));
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Evaluation {
                        r: 1.0 - ring.gap,
                        theta,
                    });
                }
                s += aw * v;
            }
            Ok(ring.weight * s)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for s in sums {
        total += s?;
    }
    Ok(total)
}

/// `∫_D f dA` with an error estimate from the embedded half-order rule.
pub fn integrate_disk<R: DiskRule>(f: impl Fn(&DiskPoint) -> f64 + Sync, rule: &R) -> Result<DiskIntegral> {
    let value = integrate_disk_value(&f, rule)?;
    let coarse = integrate_disk_value(&f, &rule.embedded())?;
    Ok(DiskIntegral {
        value,
        err: (value - coarse).abs(),
    })
}

/// `(∫_D |f|^p w dA)^{1/p}`.
pub fn bergman_norm<R: DiskRule>(
    f: impl Fn(&DiskPoint) -> Complex64 + Sync,
    p: f64,
    w: &Weight,
    rule: &R,
) -> Result<f64> {
    Ok(bergman_norm_pow(f, p, w, rule)?.powf(1.0 / p))
}

/// `∫_D |f|^p w dA`.
pub fn bergman_norm_pow<R: DiskRule>(
    f: impl Fn(&DiskPoint) -> Complex64 + Sync,
    p: f64,
    w: &Weight,
    rule: &R,
) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("Bergman exponent p = {p} must be positive"));
    }
    integrate_disk_value(|z| f(z).norm().powf(p) * w.at(z), rule)
}

/// `∫_0^{2π} |f(r e^{it})|^p dt` by the `n`-point trapezoid rule.
pub fn circle_integral(f: impl Fn(&DiskPoint) -> Complex64, r: f64, p: f64, n: usize) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("circle radius {r} outside (0, 1)"));
    }
    if n == 0 {
        return domain("circle rule needs at least one node");
    }
    let mut s = 0.0;
    for k in 0..n {
        let p_k = DiskPoint::from_gap_unchecked(1.0 - r, TAU * k as f64 / n as f64);
        s += f(&p_k).norm().powf(p);
    }
    Ok(s * TAU / n as f64)
}

/// Circle integral on `|z| = 1 - gap` with angular panels graded around the
/// features; accurate when `f` is peaked near feature angles.
pub fn circle_integral_graded(
    f: impl Fn(&DiskPoint) -> Complex64,
    gap: f64,
    p: f64,
    features: &[DiskPoint],
    opts: &QuadOptions,
) -> Result<f64> {
    if !(gap > 0.0 && gap < 1.0) {
        return domain(format!("circle gap {gap} outside (0, 1)"));
    }
    let gl = gauss_legendre(opts.angular_panel_order());
    let nodes = angular_nodes(&angle_clusters(features), gap, &gl);
    let mut s = 0.0;
    for &(theta, w) in nodes.iter() {
        s += w * f(&DiskPoint::from_gap_unchecked(gap, theta)).norm().powf(p);
    }
    Ok(s * TAU)
}

/// `∫_{|ζ|<eps} f(ζ) dA(ζ)` by a tensor rule rescaled to the small disk.
pub fn integrate_small_disk(
    f: impl Fn(Complex64) -> f64 + Sync,
    eps: f64,
    rad_order: usize,
    ang_order: usize,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("small-disk radius {eps} outside (0, 1)"));
    }
    let gl = gauss_legendre(rad_order);
    let rows: Vec<(f64, f64)> = gl.on(0.0, 1.0).collect();
    let sums: Vec<Result<f64>> = rows
        .par_iter()
        .map(|&(r, w)| {
            let mut s = 0.0;
            for k in 0..ang_order {
                let t = TAU * k as f64 / ang_order as f64;
                let zeta = Complex64::from_polar(eps * r, t);
                let v = f(zeta);
                if !v.is_finite() {
                    return Err(Error::Evaluation { r: eps * r, theta: t });
                }
                s += v;
            }
            Ok(w * 2.0 * r * s / ang_order as f64)
        })
        .collect();
    let mut total = 0.0;
    for s in sums {
        total += s?;
    }
    Ok(eps * eps * total)
}
