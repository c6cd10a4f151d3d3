//! Points of the closed unit disk in polar-gap form.
//!
//! Near the unit circle the modulus of a point carries almost no information
//! in floating point: `1 - |z|` for `|z| = 1 - 1e-12` is only known to about
//! four digits when computed from `z`. Every quantity the estimates depend on
//! (`1 - |z|`, `|1 - conj(a) z|`, pseudohyperbolic distance) is a function of
//! that gap, so points are stored as `(gap, theta)` with `gap = 1 - |z|` and
//! all Möbius quantities are formed from gaps and half-angle sines without
//! ever subtracting two numbers close to one.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{domain, Result};

/// A point `z = (1 - gap) e^{i theta}` with `0 <= gap <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    gap: f64,
    theta: f64,
    z: Complex64,
}

impl DiskPoint {
    /// Builds a point from its gap `1 - |z|` and argument.
    ///
    /// `gap = 1` is the origin (the angle is then normalized to 0) and
    /// `gap = 0` lies on the circle.
    pub fn from_gap(gap: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gap) || !theta.is_finite() {
            return domain(format!("point with gap {gap} is not in the closed disk"));
        }
        Ok(Self::from_gap_unchecked(gap, theta))
    }

    pub(crate) fn from_gap_unchecked(gap: f64, theta: f64) -> Self {
        let theta = if gap >= 1.0 { 0.0 } else { wrap_angle(theta) };
        let z = Complex64::from_polar(1.0 - gap, theta);
        Self { gap, theta, z }
    }

    /// Converts a complex number with `|z| <= 1`.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        let m = z.norm();
        if !(m <= 1.0) {
            return domain(format!("|z| = {m} exceeds 1"));
        }
        if m == 0.0 {
            return Ok(Self::origin());
        }
        Ok(Self {
            gap: 1.0 - m,
            theta: z.arg(),
            z,
        })
    }

    /// Converts a complex number that must lie strictly inside the disk.
    pub fn interior(z: Complex64) -> Result<Self> {
        let p = Self::from_complex(z)?;
        if p.gap <= 0.0 {
            return domain(format!("|z| = {} is not < 1", z.norm()));
        }
        Ok(p)
    }

    pub fn origin() -> Self {
        Self {
            gap: 1.0,
            theta: 0.0,
            z: Complex64::new(0.0, 0.0),
        }
    }

    /// `1 - |z|`.
    #[inline]
    pub fn gap(&self) -> f64 {
        self.gap
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn modulus(&self) -> f64 {
        1.0 - self.gap
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        self.z
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.gap >= 1.0
    }

    /// `1 - |z|^2`, accurate to relative precision for every gap.
    #[inline]
    pub fn one_minus_mod_sq(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }

    /// Rotates by a common angle.
    pub fn rotated(&self, angle: f64) -> Self {
        Self::from_gap_unchecked(self.gap, self.theta + angle)
    }

    /// The point `center + rel * (1 - |center|) e^{it}`, computed without
    /// losing the gap of the result.
    pub fn offset(center: &DiskPoint, rel: f64, t: f64) -> Result<Self> {
        let g = center.gap;
        let m = 1.0 - g;
        let rad = rel * g;
        let (s, c) = t.sin_cos();
        // |z|^2 = m^2 + 2 m rad cos t + rad^2, so
        // 1 - |z|^2 = g (2 - g) - 2 m rad cos t - rad^2.
        let one_minus_sq = g * (2.0 - g) - 2.0 * m * rad * c - rad * rad;
        if one_minus_sq < 0.0 {
            return domain("offset point leaves the disk");
        }
        let modulus_sq = 1.0 - one_minus_sq;
        let gap = one_minus_sq / (1.0 + modulus_sq.max(0.0).sqrt());
        let theta = center.theta + (rad * s).atan2(m + rad * c);
        Self::from_gap(gap.min(1.0), theta)
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = crate::error::Error;
    fn try_from(z: Complex64) -> Result<Self> {
        DiskPoint::from_complex(z)
    }
}

/// Reduces an angle to `(-pi, pi]`.
#[inline]
pub fn wrap_angle(t: f64) -> f64 {
    if t > -PI && t <= PI {
        return t;
    }
    let mut r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// The pieces of the Möbius factor attached to a zero `a`, evaluated at `z`.
///
/// With `h = (arg z - arg a) / 2`, the identities
/// `1 - conj(a) z = e^{ih} den` and `a - z = e^{i(arg a + h)} num` hold, where
/// `num` and `den` are formed from gaps and `sin h`, `cos h` only.
#[derive(Clone, Copy, Debug)]
pub struct MobiusParts {
    pub num: Complex64,
    pub den: Complex64,
    pub half_angle: f64,
}

impl MobiusParts {
    #[inline]
    pub fn new(a: &DiskPoint, z: &DiskPoint) -> Self {
        let ga = a.gap;
        let gz = z.gap;
        let h = 0.5 * wrap_angle(z.theta - a.theta);
        let (s, c) = h.sin_cos();
        let big_g = ga + gz - ga * gz;
        let num = Complex64::new((gz - ga) * c, -(2.0 - ga - gz) * s);
        let den = Complex64::new(big_g * c, -(2.0 - big_g) * s);
        Self {
            num,
            den,
            half_angle: h,
        }
    }

    /// `|a - z|`.
    #[inline]
    pub fn dist(&self) -> f64 {
        self.num.norm()
    }

    /// `|(a - z) / (1 - conj(a) z)|`.
    #[inline]
    pub fn pseudo(&self) -> f64 {
        self.num.norm() / self.den.norm()
    }

    /// `1 - conj(a) z` as a complex number.
    #[inline]
    pub fn one_minus_conj_a_z(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.half_angle) * self.den
    }

    /// Principal logarithm of `1 - conj(a) z`; the real part of that
    /// quantity is positive in the disk, so the branch is unambiguous.
    #[inline]
    pub fn ln_one_minus_conj_a_z(&self) -> Complex64 {
        Complex64::new(
            self.den.norm().ln(),
            wrap_angle(self.half_angle + self.den.arg()),
        )
    }
}

/// Pseudohyperbolic distance `|(z1 - z2) / (1 - conj(z2) z1)|`.
pub fn pseudohyperbolic(z1: &DiskPoint, z2: &DiskPoint) -> Result<f64> {
    if z1.gap <= 0.0 || z2.gap <= 0.0 {
        return domain("pseudohyperbolic distance needs points inside the disk");
    }
    Ok(MobiusParts::new(z2, z1).pseudo().min(1.0))
}

/// Disk automorphism `phi_a(z) = (a - z) / (1 - conj(a) z)` on complex input.
pub fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}
