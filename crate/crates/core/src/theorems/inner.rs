//! Averaged counting functions, by preimages and by change of variables.

use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::blaschke::BlaschkeProduct;
use crate::error::{domain, Error, Result};
use crate::point::DiskPoint;
use crate::quad::{gauss_legendre, integrate_small_disk, QuadOptions};
use crate::weights::{log_factor, Weight};

use super::gate::{parameter_gate, Branch, GateExtra, GateSpec, TheoremId};
use super::derivative_integral;

/// Relative agreement required between the two computations.
pub const INNER_AGREEMENT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct InnerReport {
    pub gate: GateSpec,
    pub eps: f64,
    /// `∫_{|ζ|<eps} N_{B,p,w} dA` from preimages.
    pub by_preimages: f64,
    /// The same integral as `∫_{|B|<eps} |B'|^2 w (1-|z|)^{2-p} dA`.
    pub by_change_of_variables: f64,
    pub relative_difference: f64,
    /// `‖B'‖_{p,w}^p`.
    pub norm_pow: f64,
    /// `‖B'‖^p / A`, bounded below by the estimate.
    pub lower_ratio: f64,
    /// `eps^2 ‖B'‖^p / A`, bounded above; the averaged counting function
    /// carries the logarithm on the limit branch.
    pub upper_ratio: f64,
    /// Limit branch only: `∫_{|ζ|<eps} N^ℓ dA` and the log-weighted norm.
    pub log_average: Option<f64>,
    pub log_norm: Option<f64>,
}

fn counting_density(z: &DiskPoint, w: &Weight, p: f64, log_variant: bool) -> f64 {
    let g = z.gap();
    let v = g.powf(2.0 - p) * w.at_gap(g);
    if log_variant {
        v * log_factor(g)
    } else {
        v
    }
}

/// `∫_{|ζ|<eps} N dA(ζ)` by tensor quadrature over `ζ`.
pub fn averaged_counting(
    b: &BlaschkeProduct,
    w: &Weight,
    p: f64,
    eps: f64,
    log_variant: bool,
    opts: &QuadOptions,
) -> Result<f64> {
    let failure = std::sync::Mutex::new(None);
    let v = integrate_small_disk(
        |zeta| match b.counting_function(w, p, zeta, log_variant) {
            Ok(v) => v,
            Err(e) => {
                *failure.lock().expect("lock") = Some(e);
                f64::NAN
            }
        },
        eps,
        (opts.rad_order / 2).max(16),
        (opts.ang_order / 2).max(16),
    );
    match failure.into_inner().expect("lock") {
        Some(e) => Err(e),
        None => v,
    }
}

/// Intervals of `{θ : |B(r e^{iθ})| < eps}` on one circle.
#[derive(Clone, Debug, PartialEq)]
enum Slice {
    Empty,
    Full,
    Arcs(Vec<(f64, f64)>),
}

impl Slice {
    fn signature(&self) -> usize {
        match self {
            Slice::Empty => 0,
            Slice::Full => usize::MAX,
            Slice::Arcs(a) => a.len(),
        }
    }
}

struct Sublevel<'a> {
    b: &'a BlaschkeProduct,
    eps: f64,
    samples: usize,
}

impl Sublevel<'_> {
    fn excess(&self, r: f64, theta: f64) -> f64 {
        let z = DiskPoint::from_gap_unchecked(1.0 - r, theta);
        self.b.eval(&z).norm() - self.eps
    }

    fn slice(&self, r: f64) -> Slice {
        let n = self.samples;
        let h = TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|k| self.excess(r, h * k as f64)).collect();
        let mut pts: Vec<(f64, f64)> = vals.iter().enumerate().map(|(k, &v)| (h * k as f64, v)).collect();
        for k in 0..n {
            let (prev, v, next) = (vals[(k + n - 1) % n], vals[k], vals[(k + 1) % n]);
            let sign = if v >= 0.0 && v < prev && v <= next {
                1.0
            } else if v < 0.0 && v > prev && v >= next {
                -1.0
            } else {
                continue;
            };
            let t = golden_min(|t| sign * self.excess(r, t), h * k as f64 - h, h * k as f64 + h);
            let e = self.excess(r, t);
            if (e < 0.0) != (v < 0.0) {
                pts.push((t.rem_euclid(TAU), e));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(start) = pts.iter().position(|&(_, v)| v >= 0.0) else {
            return Slice::Full;
        };
        if pts.iter().all(|&(_, v)| v >= 0.0) {
            return Slice::Empty;
        }
        let m = pts.len();
        let at = |j: usize| {
            let (t, v) = pts[(start + j) % m];
            (if start + j >= m { t + TAU } else { t }, v)
        };
        let mut arcs = Vec::new();
        let mut open: Option<f64> = None;
        for j in 0..m {
            let ((t0, v0), (t1, v1)) = (at(j), at(j + 1));
            if (v0 >= 0.0) != (v1 >= 0.0) {
                let t = self.bisect_angle(r, t0, t1, v0 < 0.0);
                if v1 < 0.0 {
                    open = Some(t);
                } else if let Some(a) = open.take() {
                    arcs.push((a, t));
                }
            }
        }
        Slice::Arcs(arcs)
    }

    /// Crossing in `(t0, t1)`; `inside_first` tells which end is inside.
    fn bisect_angle(&self, r: f64, mut t0: f64, mut t1: f64, inside_first: bool) -> f64 {
        for _ in 0..60 {
            let m = 0.5 * (t0 + t1);
            if m == t0 || m == t1 {
                break;
            }
            let inside = self.excess(r, m) < 0.0;
            if inside == inside_first {
                t0 = m;
            } else {
                t1 = m;
            }
        }
        0.5 * (t0 + t1)
    }
}

/// Minimizer of `f` on `[a, b]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `∫_{|B|<eps} F dA` for `F = |B'|^2 w (1-|z|)^{2-p}` (times the log factor
/// when requested), computed in the `z`-plane.
///
/// Each circle is cut at the exact crossings of `|B| = eps`. Radii where the
/// number of arcs changes are located by bisection and used as panel ends;
/// on each panel `r = a + (b - a)(1 - cos πu)/2` absorbs the square-root
/// behaviour of the arc lengths there.
pub fn sublevel_integral(
    b: &BlaschkeProduct,
    w: &Weight,
    p: f64,
    eps: f64,
    log_variant: bool,
    opts: &QuadOptions,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps = {eps} outside (0, 1)"));
    }
    let d = b.degree();
    if d == 0 {
        return Ok(0.0);
    }
    // |B| < eps forces some factor below eps^{1/d}
    let t = eps.powf(1.0 / d as f64);
    let r_hi = b
        .zeros()
        .iter()
        .map(|a| {
            let m = a.modulus();
            (m + t) / (1.0 + t * m)
        })
        .fold(0.0f64, f64::max)
        .min(1.0 - 1e-12);
    let min_gap = b.zeros().iter().map(|a| a.gap()).fold(1.0f64, f64::min);
    let samples = ((16.0 * PI / (min_gap * (1.0 - t).max(1e-3))).ceil() as usize)
        .next_power_of_two()
        .clamp(1024, 1 << 16);
    let level = Sublevel { b, eps, samples };

    const SCAN: usize = 128;
    let scan_r: Vec<f64> = (0..=SCAN).map(|k| r_hi * k as f64 / SCAN as f64).collect();
    let sigs: Vec<usize> = scan_r.par_iter().map(|&r| level.slice(r).signature()).collect();
    let mut breaks = vec![0.0];
    for k in 0..SCAN {
        if sigs[k] != sigs[k + 1] {
            let (mut lo, mut hi) = (scan_r[k], scan_r[k + 1]);
            for _ in 0..50 {
                let m = 0.5 * (lo + hi);
                if level.slice(m).signature() == sigs[k] {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            breaks.push(0.5 * (lo + hi));
        }
    }
    breaks.push(r_hi);

    let gl_t = gauss_legendre((opts.ang_order / 16).max(8));
    let integrand = |z: &DiskPoint| b.derivative1(z).norm_sqr() * counting_density(z, w, p, log_variant);
    let ring = |r: f64| {
        let arcs = match level.slice(r) {
            Slice::Empty => return 0.0,
            Slice::Full => vec![(0.0, TAU)],
            Slice::Arcs(a) => a,
        };
        let mut s = 0.0;
        for (t0, t1) in arcs {
            let pieces = ((t1 - t0) / (PI / 8.0)).ceil().max(1.0) as usize;
            let h = (t1 - t0) / pieces as f64;
            for j in 0..pieces {
                let lo = t0 + h * j as f64;
                for (theta, wt) in gl_t.on(lo, lo + h) {
                    s += wt * integrand(&DiskPoint::from_gap_unchecked(1.0 - r, theta));
                }
            }
        }
        2.0 * r * s / TAU
    };
    let panels: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).filter(|(a, c)| c > a).collect();
    Ok(adaptive_radial(&ring, &panels, (opts.rad_order / 8).max(16)))
}

/// Minimum relative accuracy of the radial integration.
const RADIAL_TOL: f64 = 1e-10;
const RADIAL_DEPTH: u32 = 40;

#[derive(Clone, Copy)]
struct Piece {
    panel: (f64, f64),
    lo: f64,
    hi: f64,
    depth: u32,
}

/// `Σ ∫_a^c f(r) dr` over the panels with `r = a + (c - a)(1 - cos πu)/2`,
/// bisecting in `u` until halves and whole agree.
fn adaptive_radial(f: &(impl Fn(f64) -> f64 + Sync), panels: &[(f64, f64)], order: usize) -> f64 {
    let gl = gauss_legendre(order);
    let quad = |piece: &Piece| -> f64 {
        let (a, c) = piece.panel;
        gl.on(piece.lo, piece.hi)
            .map(|(u, wu)| {
                let r = a + (c - a) * 0.5 * (1.0 - (PI * u).cos());
                wu * f(r) * (c - a) * 0.5 * PI * (PI * u).sin()
            })
            .sum()
    };
    let mut pending: Vec<(Piece, f64)> = panels
        .par_iter()
        .map(|&panel| {
            let piece = Piece { panel, lo: 0.0, hi: 1.0, depth: 0 };
            (piece, quad(&piece))
        })
        .collect();
    let span = panels.len().max(1) as f64;
    let mut accepted = 0.0;
    while !pending.is_empty() {
        let scale = accepted + pending.iter().map(|(_, q)| q).sum::<f64>();
        let target = RADIAL_TOL * scale.abs();
        let halves: Vec<(Piece, f64, Piece, f64)> = pending
            .par_iter()
            .map(|(piece, _)| {
                let mid = 0.5 * (piece.lo + piece.hi);
                let left = Piece { hi: mid, depth: piece.depth + 1, ..*piece };
                let right = Piece { lo: mid, depth: piece.depth + 1, ..*piece };
                (left, quad(&left), right, quad(&right))
            })
            .collect();
        let mut next = Vec::new();
        for ((piece, whole), (left, ql, right, qr)) in pending.iter().zip(halves) {
            let allowed = target * (piece.hi - piece.lo) / span;
            if (whole - (ql + qr)).abs() <= allowed || piece.depth >= RADIAL_DEPTH {
                accepted += ql + qr;
            } else {
                next.push((left, ql));
                next.push((right, qr));
            }
        }
        pending = next;
    }
    accepted
}

/// Both computations of the averaged counting function, checked against
/// each other, and the sandwich ratios with `‖B'‖_{p,w}^p`.
pub fn verify_inner_est(
    b: &BlaschkeProduct,
    p: f64,
    w: &Weight,
    eps: f64,
    opts: &QuadOptions,
) -> Result<InnerReport> {
    if !(eps > 0.0 && eps < 0.5) {
        return domain(format!("eps must be < 1/2 and positive, got {eps}"));
    }
    let gate = parameter_gate(TheoremId::InnerEstimate, p, w, GateExtra::default())?;
    gate.require_admissible()?;
    let by_preimages = averaged_counting(b, w, p, eps, false, opts)?;
    let by_change_of_variables = sublevel_integral(b, w, p, eps, false, opts)?;
    let relative_difference = (by_preimages - by_change_of_variables).abs() / by_preimages.abs();
    if !(relative_difference <= INNER_AGREEMENT) {
        return Err(Error::CrossCheck(format!(
            "averaged counting function: preimages give {by_preimages:e}, change of variables {by_change_of_variables:e} (relative difference {relative_difference:e})"
        )));
    }
    let norm_pow = derivative_integral(b, p, w, 0.0, false, opts)?;
    let limit = gate.branch == Branch::Limit;
    let (log_average, log_norm) = if limit {
        (
            Some(averaged_counting(b, w, p, eps, true, opts)?),
            Some(derivative_integral(b, p, w, 0.0, true, opts)?),
        )
    } else {
        (None, None)
    };
    let upper_base = log_average.unwrap_or(by_preimages);
    Ok(InnerReport {
        gate,
        eps,
        by_preimages,
        by_change_of_variables,
        relative_difference,
        norm_pow,
        lower_ratio: norm_pow / by_preimages,
        upper_ratio: eps * eps * norm_pow / upper_base,
        log_average,
        log_norm,
    })
}
