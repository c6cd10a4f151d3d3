//! Finite Blaschke products in factor form with an exact rational form.
//!
//! Each factor is `b_a(z) = (conj(a)/|a|) (a - z) / (1 - conj(a) z)` for
//! `a != 0` and `b_0(z) = z`, so that `b_a(0) = |a|`. A product may carry an
//! extra unimodular constant (Frostman shifts produce one).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::Analytic;
use crate::diskgeom::ZeroSequence;
use crate::error::{domain, Error, Result};
use crate::point::{DiskPoint, MobiusParts};
use crate::poly::Polynomial;
use crate::weights::{log_factor, Weight};

/// Degree cap for the rational form.
pub const MAX_RATIONAL_DEGREE: usize = 128;
/// Above this degree the rational form is flagged as ill-conditioned.
pub const CONDITIONING_WARN_DEGREE: usize = 64;
const LOG_SPACE_THRESHOLD: usize = 64;
const NEAR_ZERO: f64 = 1e-6;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug)]
pub struct RationalForm {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
    /// Set when the degree exceeds [`CONDITIONING_WARN_DEGREE`].
    pub ill_conditioned: bool,
}

#[derive(Clone, Debug)]
pub struct BlaschkeProduct {
    zeros: Vec<DiskPoint>,
    constant: Complex64,
    rational: Option<RationalForm>,
}

/// The unimodular constant `conj(a)/|a|` of a factor, `-1` for `a = 0`
/// (so that `b_0(z) = -(0 - z)`).
pub(crate) fn factor_unit(a: &DiskPoint) -> Complex64 {
    if a.is_origin() {
        -ONE
    } else {
        Complex64::from_polar(1.0, -a.theta())
    }
}

/// `b_a(z)`.
#[inline]
pub fn factor(a: &DiskPoint, z: &DiskPoint) -> Complex64 {
    if a.is_origin() {
        return z.z();
    }
    let m = MobiusParts::new(a, z);
    m.num / m.den
}

/// `b_a'(z)`.
#[inline]
pub fn factor_derivative(a: &DiskPoint, z: &DiskPoint) -> Complex64 {
    if a.is_origin() {
        return ONE;
    }
    let m = MobiusParts::new(a, z);
    -a.one_minus_mod_sq() * Complex64::from_polar(1.0, -z.theta()) / (m.den * m.den)
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<DiskPoint>) -> Result<Self> {
        Self::with_constant(zeros, ONE)
    }

    pub fn with_constant(zeros: Vec<DiskPoint>, constant: Complex64) -> Result<Self> {
        if let Some(z) = zeros.iter().find(|z| !(z.gap() > 0.0)) {
            return domain(format!("zero at |z| = {} is not inside the disk", z.modulus()));
        }
        if !((constant.norm() - 1.0).abs() < 1e-12) {
            return domain(format!("constant {constant} is not unimodular"));
        }
        let rational = build_rational(&zeros, constant);
        Ok(Self {
            zeros,
            constant,
            rational,
        })
    }

    pub fn from_sequence(seq: &ZeroSequence) -> Result<Self> {
        Self::new(seq.flattened())
    }

    /// Convenience constructor from complex zeros.
    pub fn from_complex(zeros: &[Complex64]) -> Result<Self> {
        Self::new(
            zeros
                .iter()
                .map(|&z| DiskPoint::interior(z))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn zeros(&self) -> &[DiskPoint] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn rational_form(&self) -> Option<&RationalForm> {
        self.rational.as_ref()
    }

    /// `B(z)`, in log-magnitude form when the degree exceeds 64.
    pub fn eval(&self, z: &DiskPoint) -> Complex64 {
        if self.zeros.len() > LOG_SPACE_THRESHOLD {
            self.eval_log_space(z)
        } else {
            self.eval_direct(z)
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(&DiskPoint::from_complex(z)?))
    }

    pub(crate) fn eval_direct(&self, z: &DiskPoint) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.constant, |acc, a| acc * factor(a, z))
    }

    pub(crate) fn eval_log_space(&self, z: &DiskPoint) -> Complex64 {
        let mut log_mod = 0.0;
        let mut arg = self.constant.arg();
        for a in &self.zeros {
            let b = factor(a, z);
            if b == ZERO {
                return ZERO;
            }
            log_mod += b.norm().ln();
            arg += b.arg();
        }
        Complex64::from_polar(log_mod.exp(), arg)
    }

    /// `log |B(z)|`, accurate where `|B|` underflows.
    pub fn log_abs(&self, z: &DiskPoint) -> f64 {
        self.zeros
            .iter()
            .map(|a| {
                if a.is_origin() {
                    z.modulus().ln()
                } else {
                    let m = MobiusParts::new(a, z);
                    m.num.norm().ln() - m.den.norm().ln()
                }
            })
            .sum()
    }

    /// `B'(z)` from the logarithmic derivative, switching to the product
    /// rule within pseudohyperbolic distance `1e-6` of a zero.
    pub fn derivative1(&self, z: &DiskPoint) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -z.theta());
        let mut prod = self.constant;
        let mut log_d = ZERO;
        for a in &self.zeros {
            if a.is_origin() {
                let zz = z.z();
                if zz.norm() < NEAR_ZERO {
                    return self.derivative_product_rule(z);
                }
                prod *= zz;
                log_d += ONE / zz;
                continue;
            }
            let m = MobiusParts::new(a, z);
            let f = m.num / m.den;
            if f.norm() < NEAR_ZERO {
                return self.derivative_product_rule(z);
            }
            prod *= f;
            log_d -= a.one_minus_mod_sq() * rot / (m.den * m.num);
        }
        prod * log_d
    }

    fn derivative_product_rule(&self, z: &DiskPoint) -> Complex64 {
        let factors: Vec<Complex64> = self.zeros.iter().map(|a| factor(a, z)).collect();
        let n = factors.len();
        let mut prefix = vec![ONE; n + 1];
        for k in 0..n {
            prefix[k + 1] = prefix[k] * factors[k];
        }
        let mut suffix = ONE;
        let mut sum = ZERO;
        for k in (0..n).rev() {
            sum += factor_derivative(&self.zeros[k], z) * prefix[k] * suffix;
            suffix *= factors[k];
        }
        self.constant * sum
    }

    /// `B^{(order)}(z)` for `order >= 1`.
    ///
    /// Order one uses [`Self::derivative1`]; higher orders differentiate the
    /// rational form via `B^{(k)} = N_k / Q^{k+1}`.
    pub fn derivative(&self, z: &DiskPoint, order: usize) -> Result<Complex64> {
        match order {
            0 => domain("derivative order must be at least 1"),
            1 => Ok(self.derivative1(z)),
            _ => {
                let rf = self.rational.as_ref().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "higher derivatives need the rational form (degree <= {MAX_RATIONAL_DEGREE})"
                    ))
                })?;
                let q = &rf.denominator;
                let dq = q.derivative();
                let mut n_k = &(&rf.numerator.derivative() * q) - &(&rf.numerator * &dq);
                for k in 1..order {
                    n_k = &(&n_k.derivative() * q) - &(&n_k * &dq).scale(Complex64::new((k + 1) as f64, 0.0));
                }
                let zc = z.z();
                Ok(n_k.eval(zc) / q.eval(zc).powu(order as u32 + 1))
            }
        }
    }

    /// `B_n`: the product with one copy of zero `n` (0-based) removed.
    pub fn omit_factor(&self, n: usize) -> Result<Self> {
        if n >= self.zeros.len() {
            return domain(format!("zero index {n} out of range for degree {}", self.degree()));
        }
        let mut zeros = self.zeros.clone();
        zeros.remove(n);
        Self::with_constant(zeros, self.constant)
    }

    /// `B^{[N]}`: the first `N` zeros in stored order.
    pub fn partial_product(&self, n: usize) -> Result<Self> {
        if n > self.zeros.len() {
            return domain(format!("partial product of length {n} exceeds degree {}", self.degree()));
        }
        Self::with_constant(self.zeros[..n].to_vec(), self.constant)
    }

    /// `B^n` as a product with every zero repeated `n` times.
    pub fn power(&self, n: usize) -> Result<Self> {
        let mut zeros = Vec::with_capacity(self.zeros.len() * n);
        for _ in 0..n {
            zeros.extend_from_slice(&self.zeros);
        }
        Self::with_constant(zeros, self.constant.powu(n as u32))
    }

    /// Roots of `B(z) = zeta` with multiplicity.
    ///
    /// Eigenvalues of the companion matrix of `P - zeta Q` are polished by
    /// Newton steps on the factor form, taken in gap coordinates so that
    /// roots near the circle keep their distance to it.
    pub fn preimages(&self, zeta: Complex64) -> Result<Vec<DiskPoint>> {
        if !(zeta.norm() < 1.0) {
            return domain(format!("|zeta| = {} is not < 1", zeta.norm()));
        }
        let d = self.degree();
        if d == 0 {
            return domain("preimages of a constant product");
        }
        let rf = self.rational.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("preimages need degree <= {MAX_RATIONAL_DEGREE}"))
        })?;
        let poly = &rf.numerator - &rf.denominator.scale(zeta);
        let coeffs = poly.coeffs();
        if coeffs.len() != d + 1 {
            return Err(Error::Convergence {
                worst_residual: f64::INFINITY,
            });
        }
        let lead = coeffs[d];
        let companion = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
            if j == d - 1 {
                -coeffs[i] / lead
            } else if i == j + 1 {
                ONE
            } else {
                ZERO
            }
        });
        let eig = companion
            .schur()
            .eigenvalues()
            .ok_or(Error::Convergence {
                worst_residual: f64::INFINITY,
            })?;
        let mut roots = Vec::with_capacity(d);
        let mut worst = 0.0f64;
        for &z0 in eig.iter() {
            let start = clamp_into_disk(z0);
            let root = self.polish(start, zeta);
            let res = (self.eval(&root) - zeta).norm();
            worst = worst.max(res);
            roots.push(root);
        }
        if !(worst < 1e-9) || roots.iter().any(|r| !(r.gap() > 0.0)) {
            return Err(Error::Convergence { worst_residual: worst });
        }
        Ok(roots)
    }

    fn polish(&self, mut z: DiskPoint, zeta: Complex64) -> DiskPoint {
        let mut res = (self.eval(&z) - zeta).norm();
        for step in 0..12 {
            if res == 0.0 {
                break;
            }
            let d = self.derivative1(&z);
            if d == ZERO {
                break;
            }
            let delta = -(self.eval(&z) - zeta) / d;
            let Some(next) = newton_move(&z, delta) else { break };
            let next_res = (self.eval(&next) - zeta).norm();
            if next_res < res || step < 2 && next_res <= res * 1.0001 {
                z = next;
                res = next_res;
            } else {
                break;
            }
        }
        z
    }

    /// The Frostman shift `(B - xi) / (1 - conj(xi) B)` as a product: zeros
    /// are the preimages of `xi`, the unimodular constant is fitted at a
    /// point away from them.
    pub fn frostman_shift(&self, xi: Complex64) -> Result<Self> {
        if !(xi.norm() < 1.0) {
            return domain(format!("|xi| = {} is not < 1", xi.norm()));
        }
        let zeros = self.preimages(xi)?;
        let bare = Self::new(zeros.clone())?;
        let candidates = [0.0, 0.5, -0.5, 0.25, -0.25, 0.75]
            .iter()
            .flat_map(|&x| [Complex64::new(x, 0.0), Complex64::new(0.0, x)]);
        let test = candidates
            .map(|c| DiskPoint::from_complex(c).expect("candidate inside the disk"))
            .max_by(|a, b| {
                let da = bare.eval(a).norm();
                let db = bare.eval(b).norm();
                da.total_cmp(&db)
            })
            .expect("non-empty candidates");
        let b = self.eval(&test);
        let target = (b - xi) / (ONE - xi.conj() * b);
        let lambda = target / bare.eval(&test);
        Self::with_constant(zeros, lambda / lambda.norm())
    }

    /// `N_{B,w,p}(zeta)`, with the `log(e/(1-|z|))` factor when requested.
    pub fn counting_function(&self, w: &Weight, p: f64, zeta: Complex64, log_variant: bool) -> Result<f64> {
        Ok(self
            .preimages(zeta)?
            .iter()
            .map(|z| counting_term(z, w, p, log_variant))
            .sum())
    }
}

pub(crate) fn counting_term(z: &DiskPoint, w: &Weight, p: f64, log_variant: bool) -> f64 {
    let g = z.gap();
    let base = g.powf(2.0 - p) * w.at_gap(g);
    if log_variant {
        base * log_factor(g)
    } else {
        base
    }
}

fn clamp_into_disk(z: Complex64) -> DiskPoint {
    let m = z.norm();
    if m < 1.0 - 1e-15 {
        DiskPoint::from_complex(z).expect("inside the disk")
    } else {
        DiskPoint::from_gap(1e-15, z.arg()).expect("valid gap")
    }
}

/// `z + delta`, formed in gap coordinates for small moves.
fn newton_move(z: &DiskPoint, delta: Complex64) -> Option<DiskPoint> {
    let g = z.gap();
    let len = delta.norm();
    if len == 0.0 {
        return Some(*z);
    }
    if g > 0.0 && len < 0.5 * g && !z.is_origin() {
        return DiskPoint::offset(z, len / g, delta.arg() - z.theta()).ok();
    }
    let next = z.z() + delta;
    match DiskPoint::from_complex(next) {
        Ok(p) if p.gap() > 0.0 => Some(p),
        _ => None,
    }
}

fn build_rational(zeros: &[DiskPoint], constant: Complex64) -> Option<RationalForm> {
    if zeros.len() > MAX_RATIONAL_DEGREE {
        return None;
    }
    let mut num = Polynomial::constant(constant);
    let mut den = Polynomial::constant(ONE);
    for a in zeros {
        let c = factor_unit(a);
        num = &num * &Polynomial::linear(c * a.z(), -c);
        den = &den * &Polynomial::linear(ONE, -a.z().conj());
    }
    Some(RationalForm {
        numerator: num,
        denominator: den,
        ill_conditioned: zeros.len() > CONDITIONING_WARN_DEGREE,
    })
}

/// `Π_{k != n} b_{a_k}(z)` for every `n`, by prefix and suffix products.
pub(crate) fn omitted_products(zeros: &[DiskPoint], z: &DiskPoint) -> Vec<Complex64> {
    let n = zeros.len();
    let f: Vec<Complex64> = zeros.iter().map(|a| factor(a, z)).collect();
    let mut suffix = vec![ONE; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * f[k];
    }
    let mut prefix = ONE;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(prefix * suffix[k + 1]);
        prefix *= f[k];
    }
    out
}

impl Analytic for BlaschkeProduct {
    fn value(&self, z: &DiskPoint) -> Complex64 {
        self.eval(z)
    }

    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64 {
        match order {
            0 => self.eval(z),
            k => BlaschkeProduct::derivative(self, z, k).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    fn features(&self) -> Vec<DiskPoint> {
        self.zeros.clone()
    }
}

/// `B'` as an analytic function, so norms of derivatives can be integrated
/// through the same interface.
#[derive(Clone, Debug)]
pub struct Derivative<'a>(pub &'a BlaschkeProduct);

impl Analytic for Derivative<'_> {
    fn value(&self, z: &DiskPoint) -> Complex64 {
        self.0.derivative1(z)
    }

    fn derivative(&self, z: &DiskPoint, order: usize) -> Complex64 {
        Analytic::derivative(self.0, z, order + 1)
    }

    fn features(&self) -> Vec<DiskPoint> {
        self.0.features()
    }
}
