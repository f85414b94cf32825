//! Elliptic special functions: Carlson's symmetric integral `R_F`, the
//! incomplete integral of the first kind `F(φ, l)` and the Jacobi functions
//! `sn, cn, dn`. All functions take the modulus `l` (not the parameter `l²`).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Below this distance from `l = 1` the Jacobi functions use the hyperbolic
/// expansion instead of the AGM recursion.
pub const NEAR_UNIT_MODULUS: f64 = 1e-12;

/// Elliptic modulus `0 ≤ l ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(l: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&l) {
            Ok(Self(l))
        } else {
            Err(Error::DomainError(format!("modulus {l} outside [0, 1]")))
        }
    }

    /// Builds the modulus from `l²` (the form the root ratios produce).
    pub fn from_parameter(l2: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&l2) {
            Ok(Self(l2.sqrt()))
        } else {
            Err(Error::DomainError(format!("parameter l² = {l2} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `√(1 − l²)`.
    pub fn complement(self) -> Self {
        Self(((1.0 - self.0) * (1.0 + self.0)).max(0.0).sqrt())
    }
}

/// Carlson's `R_F(x, y, z) = ½∫₀^∞ dt / √((t+x)(t+y)(t+z))` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) {
        return Err(Error::DomainError(format!(
            "R_F arguments must be nonnegative, got ({x}, {y}, {z})"
        )));
    }
    if [x, y, z].iter().filter(|&&v| v == 0.0).count() > 1 {
        return Err(Error::DomainError(format!(
            "R_F needs at most one zero argument, got ({x}, {y}, {z})"
        )));
    }
    if x.is_infinite() || y.is_infinite() || z.is_infinite() {
        return Ok(0.0);
    }

    let (x0, y0) = (x, y);
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    // Q = (3r)^{-1/6} max|A₀ − ·|, truncation error of the series is below r
    const R: f64 = 1e-17;
    let spread = (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let q = (3.0 * R).powf(-1.0 / 6.0) * spread;
    let mut a = a0;
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let dx = (a0 - x0) * pow4 / a;
    let dy = (a0 - y0) * pow4 / a;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
    Ok(series / a.sqrt())
}

/// Complete integral `K(l) = R_F(0, 1 − l², 1)`; infinite at `l = 1`.
pub fn complete_k(l: EllipticModulus) -> f64 {
    let lc2 = (1.0 - l.0) * (1.0 + l.0);
    if lc2 <= 0.0 {
        return f64::INFINITY;
    }
    carlson_rf(0.0, lc2, 1.0).expect("valid R_F arguments")
}

/// Incomplete integral of the first kind `F(φ, l) = ∫₀^φ dψ / √(1 − l² sin²ψ)`.
///
/// Odd in `φ`; beyond `|φ| ≤ π/2` it is extended with
/// `F(φ + nπ, l) = F(φ, l) + 2nK(l)`.
pub fn ellip_f(phi: f64, l: f64) -> Result<f64> {
    let l = EllipticModulus::new(l)?;
    if !phi.is_finite() {
        return Err(Error::DomainError(format!("amplitude {phi} is not finite")));
    }
    let sign = if phi < 0.0 { -1.0 } else { 1.0 };
    let phi = phi.abs();
    let n = (phi / PI).round();
    let reduced = phi - n * PI;
    let principal = principal_f(reduced, l)?;
    let value = if n == 0.0 {
        principal
    } else {
        principal + 2.0 * n * complete_k(l)
    };
    Ok(sign * value)
}

fn principal_f(phi: f64, l: EllipticModulus) -> Result<f64> {
    debug_assert!(phi.abs() <= FRAC_PI_2 + 1e-15);
    let (s, c) = phi.sin_cos();
    if s == 0.0 {
        return Ok(0.0);
    }
    let ls = l.0 * s;
    let delta2 = (1.0 - ls) * (1.0 + ls);
    if c * c == 0.0 && delta2 == 0.0 {
        return Ok(s.signum() * f64::INFINITY);
    }
    Ok(s * carlson_rf(c * c, delta2, 1.0)?)
}

/// `(sn, cn, dn)` at real argument `u` and modulus `l ∈ [0, 1]`.
///
/// Descending Landen (AGM) recursion after reducing `u` modulo `4K`; within
/// `NEAR_UNIT_MODULUS` of `l = 1` the first-order hyperbolic expansion is used.
/// Returns NaNs outside the modulus domain.
pub fn jacobi_sncndn(u: f64, l: f64) -> (f64, f64, f64) {
    if !(0.0..=1.0).contains(&l) || !u.is_finite() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    if l == 0.0 {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    let lc2 = (1.0 - l) * (1.0 + l);
    if 1.0 - l < NEAR_UNIT_MODULUS {
        return near_unit(u, lc2);
    }

    let modulus = EllipticModulus(l);
    let period = 4.0 * complete_k(modulus);
    let u = u - period * (u / period).round();

    const MAX_LEVELS: usize = 16;
    let mut a = [0.0f64; MAX_LEVELS + 1];
    let mut c = [0.0f64; MAX_LEVELS + 1];
    a[0] = 1.0;
    c[0] = l;
    let mut b = lc2.sqrt();
    let mut n = 0;
    while n < MAX_LEVELS && c[n].abs() > f64::EPSILON * a[n] {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        c[n + 1] = 0.5 * (an - bn);
        b = (an * bn).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - l * l * sn * sn).max(0.0).sqrt();
    (sn, cn, dn)
}

fn near_unit(u: f64, lc2: f64) -> (f64, f64, f64) {
    let t = u.tanh();
    let sech = 1.0 / u.cosh();
    let (sinh, cosh) = (u.sinh(), u.cosh());
    let q = 0.25 * lc2;
    let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
    let sn = t + q * finite((sinh * cosh - u) * sech * sech);
    let cn = sech - q * finite((sinh * cosh - u) * t * sech);
    let dn = sech + q * finite((sinh * cosh + u) * t * sech);
    (sn.clamp(-1.0, 1.0), cn, dn)
}

/// Jacobi `sn(u, l)`.
pub fn jacobi_sn(u: f64, l: f64) -> f64 {
    jacobi_sncndn(u, l).0
}
