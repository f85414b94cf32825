//! Free inputs of the dual-power NLSE reduction and the coefficients the
//! trial-equation constraints fix in terms of them.
//!
//! The ansatz is `v = τ₀ + τ₁Γ` with `(Γ')² = (ξ₄Γ⁴ + ξ₃Γ³ + ξ₂Γ² + ξ₁Γ + ξ₀)/ζ₀`,
//! where the envelope is `u = v^{1/(2m)}`. Requiring the reduced envelope ODE to
//! vanish identically in Γ fixes `ξ₀, ξ₂, ζ₀, τ₁, χ₃`; `ω₃` follows from the
//! vanishing of the imaginary part of the substituted equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Relative threshold used for every "≠ 0" input condition.
pub const NONZERO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    /// Nonlinearity exponent.
    pub m: f64,
    /// Dual-power (saturation) coefficient.
    pub k: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub xi1: f64,
    pub xi3: f64,
    pub xi4: f64,
    pub tau0: f64,
}

impl ProblemParams {
    /// `1 + 2m + 4k(1+m)τ₀`.
    pub fn upsilon(&self) -> f64 {
        (1.0 + 2.0 * self.m) + 4.0 * self.k * (1.0 + self.m) * self.tau0
    }

    /// `ω₁² + ω₂²`.
    pub fn width_sq(&self) -> f64 {
        self.omega1 * self.omega1 + self.omega2 * self.omega2
    }

    /// Soliton velocity forced by the imaginary part: `ω₃ = −(χ₁ω₁ + χ₂ω₂)`.
    pub fn omega3(&self) -> f64 {
        -(self.chi1 * self.omega1 + self.chi2 * self.omega2)
    }

    fn fields(&self) -> [(&'static str, f64); 10] {
        [
            ("m", self.m),
            ("k", self.k),
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("xi1", self.xi1),
            ("xi3", self.xi3),
            ("xi4", self.xi4),
            ("tau0", self.tau0),
        ]
    }
}

fn is_zero(value: f64, scale: f64) -> bool {
    value.abs() <= NONZERO_TOL * (1.0 + scale.abs())
}

/// Returns every violated input invariant; an empty list means the
/// parameters are admissible.
pub fn validate(p: &ProblemParams) -> Vec<Violation> {
    let mut out = Vec::new();
    for (field, value) in p.fields() {
        if !value.is_finite() {
            out.push(Violation::NonFinite { field });
        }
    }
    if !out.is_empty() {
        return out;
    }

    if [0.0, -1.0, -0.5].iter().any(|&bad| is_zero(p.m - bad, bad)) {
        out.push(Violation::ForbiddenExponent { m: p.m });
    }
    for (field, value) in [("k", p.k), ("xi3", p.xi3), ("xi4", p.xi4), ("tau0", p.tau0)] {
        if is_zero(value, 0.0) {
            out.push(Violation::ZeroCoefficient { field, value });
        }
    }
    if is_zero(p.width_sq(), 0.0) {
        out.push(Violation::ZeroWidth {
            omega1: p.omega1,
            omega2: p.omega2,
        });
    }
    let upsilon = p.upsilon();
    let scale = (1.0 + 2.0 * p.m).abs() + (4.0 * p.k * (1.0 + p.m) * p.tau0).abs();
    if is_zero(upsilon, scale) {
        out.push(Violation::DegenerateUpsilon { upsilon });
    }
    out
}

/// Degree relation between the trial polynomial (θ), its denominator (ε)
/// and the ansatz (δ) from balancing the highest powers of Γ.
pub fn balance_exponents(delta: u32, epsilon: u32) -> u32 {
    2 * delta + epsilon + 2
}

/// Everything fixed by the constraint solution for `(θ, ε, δ) = (4, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoefficients {
    pub xi0: f64,
    pub xi2: f64,
    pub zeta0: f64,
    pub tau1: f64,
    pub chi3: f64,
    pub omega3: f64,
    pub upsilon: f64,
    /// `A² = ζ₀/ξ₄`. Negative whenever `k(1+2m) > 0`.
    pub a_squared: f64,
    /// Principal square root of `A²`; purely imaginary when `A² < 0`.
    pub a_const: Complex64,
}

impl DerivedCoefficients {
    /// Real amplitude constant, or `NonRealAmplitude` when `A² ≤ 0`.
    pub fn real_amplitude(&self) -> Result<f64> {
        if self.a_squared > 0.0 {
            Ok(self.a_squared.sqrt())
        } else {
            Err(Error::NonRealAmplitude {
                radicand: self.a_squared,
            })
        }
    }
}

/// Solves the trial-equation constraint system in closed form.
///
/// `ξ₀, ξ₂, τ₁, χ₃` follow the published closed forms. `ζ₀` carries the sign
/// obtained by equating Γ-coefficients of the reduced ODE,
/// `ζ₀ = −k(1+m)²(1+2m)(ω₁²+ω₂²)ξ₃² / (8m²ξ₄Υ²)`; with the opposite sign the
/// `Γ⁴` coefficient of the identity does not vanish.
pub fn derive_coefficients(p: &ProblemParams) -> Result<DerivedCoefficients> {
    let violations = validate(p);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }

    let ProblemParams {
        m,
        k,
        chi1,
        chi2,
        xi1,
        xi3,
        xi4,
        tau0,
        ..
    } = *p;
    let one_m = 1.0 + m;
    let one_2m = 1.0 + 2.0 * m;
    let kp = k * one_m;
    let upsilon = p.upsilon();
    let ups2 = upsilon * upsilon;
    let w = p.width_sq();

    // shared pieces: s = ξ₁ξ₄²Υ³, g = k²(1+m)²ξ₃³τ₀
    let s = xi1 * xi4 * xi4 * ups2 * upsilon;
    let g = kp * kp * xi3 * xi3 * xi3 * tau0;

    let tau1 = xi4 * upsilon / (kp * xi3);
    let zeta0 = -(kp * one_m * one_2m * w * xi3 * xi3) / (8.0 * m * m * xi4 * ups2);
    let xi2 = (s + g * tau0 * (3.0 * one_2m + 8.0 * kp * tau0))
        / (2.0 * kp * xi3 * xi4 * tau0 * ups2);
    let xi0 = -(kp * xi3 * tau0) * (g * tau0 * (one_2m + 2.0 * kp * tau0) - s)
        / (2.0 * xi4 * xi4 * xi4 * ups2 * ups2);
    let chi_sq = chi1 * chi1 + chi2 * chi2;
    let chi3 = -(s + g * (one_m * one_2m * chi_sq - tau0 * (3.0 * one_2m + 4.0 * kp * tau0)))
        / (2.0 * kp * kp * one_m * one_2m * xi3 * xi3 * xi3 * tau0);

    let a_squared = zeta0 / xi4;
    if a_squared == 0.0 || !a_squared.is_finite() {
        return Err(Error::NonRealAmplitude {
            radicand: a_squared,
        });
    }

    Ok(DerivedCoefficients {
        xi0,
        xi2,
        zeta0,
        tau1,
        chi3,
        omega3: p.omega3(),
        upsilon,
        a_squared,
        a_const: Complex64::new(a_squared, 0.0).sqrt(),
    })
}
