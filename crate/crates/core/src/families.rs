//! Closed-form solution families selected by the root pattern, and their
//! evaluation as envelope profiles `u(η)` and complex fields `q(x, y, t)`.
//!
//! Every family is written as an inner profile `v(η̃) = τ₀ + τ₁Γ(η̃)` with
//! `η̃ = η − η₀`; the envelope is `u = v^{1/(2m)}` on the complex principal
//! branch.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedCoefficients, ProblemParams};
use crate::quartic::{elliptic_parameter, RootClassification, RootPattern, DEFAULT_CLUSTER_TOL};
use crate::special::jacobi_sncndn;

/// Relative denominator size below which a profile evaluation is refused.
pub const SINGULAR_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Rational, quadruple root.
    Q1,
    /// Rational, triple root.
    Q2,
    /// Exponential / singular coth, two double roots.
    Q3,
    /// Hyperbolic soliton (or periodic wave when `B²<0`).
    Q4,
    /// Jacobi elliptic.
    Q5,
    /// `l = 1` limit of Q5.
    Q6,
    /// `l = 0` limit of Q5.
    Q7,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Q1 => "Q1",
            Family::Q2 => "Q2",
            Family::Q3 => "Q3",
            Family::Q4 => "Q4",
            Family::Q5 => "Q5",
            Family::Q6 => "Q6",
            Family::Q7 => "Q7",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Family::Q1 => "rational",
            Family::Q2 => "rational",
            Family::Q3 => "singular-coth",
            Family::Q4 => "soliton",
            Family::Q5 => "elliptic",
            Family::Q6 => "tanh-limit",
            Family::Q7 => "periodic-limit",
        }
    }

    /// Number of distinct roots the family formula refers to.
    pub fn root_count(self) -> usize {
        match self {
            Family::Q1 => 1,
            Family::Q2 | Family::Q3 => 2,
            Family::Q4 => 3,
            Family::Q5 | Family::Q6 | Family::Q7 => 4,
        }
    }

    fn is_elliptic(self) -> bool {
        matches!(self, Family::Q5 | Family::Q6 | Family::Q7)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "Q1" => Family::Q1,
            "Q2" => Family::Q2,
            "Q3" => Family::Q3,
            "Q4" => Family::Q4,
            "Q5" => Family::Q5,
            "Q6" => Family::Q6,
            "Q7" => Family::Q7,
            _ => return Err(Error::Config(format!("unknown family {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSign {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl BranchSign {
    pub fn value(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// Which simple root of a `DoubleTwoSimple` pattern the soliton turns at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurningRoot {
    /// The simple root adjacent to the double root where `Λ ≥ 0` and the
    /// envelope line is positive; falls back to `Lower`.
    #[default]
    Auto,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructOptions {
    /// Pin `τ₀` to `−τ₁α₁` (`−τ₁α₂` for the elliptic families) and `η₀ = 0`.
    pub reduced: bool,
    pub eta0: f64,
    pub branch_sign: BranchSign,
    pub turning_root: TurningRoot,
    /// Reject negative amplitude radicands instead of taking complex roots.
    pub real_only: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            reduced: false,
            eta0: 0.0,
            branch_sign: BranchSign::Plus,
            turning_root: TurningRoot::Auto,
            real_only: false,
        }
    }
}

/// Named constants of a family. Fields that do not apply are `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub a: Complex64,
    /// `τ₁A`.
    pub a1: Option<Complex64>,
    /// `(2τ₁(α₁−α₂)(α₁−α₃)/(α₂−α₃))^{1/(2m)}`.
    pub a2: Option<Complex64>,
    /// `√((α₁−α₂)(α₁−α₃))/A`.
    pub b: Option<Complex64>,
    /// `(2α₁−α₂−α₃)/(α₃−α₂)`.
    pub d: Option<f64>,
    /// `(τ₁(α₁−α₂)(α₄−α₂))^{1/(2m)}`.
    pub a3: Option<Complex64>,
    /// `α₄ − α₂`.
    pub m: Option<f64>,
    /// `α₁ − α₄`.
    pub n: Option<f64>,
    /// Elliptic modulus `l`.
    pub modulus: Option<f64>,
}

/// Everything needed to build a family without going through the
/// coefficient derivation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyInputs {
    pub m: f64,
    pub k: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub a_const: Complex64,
    pub phase: [f64; 3],
    pub wave: [f64; 3],
}

impl FamilyInputs {
    pub fn from_derived(params: &ProblemParams, derived: &DerivedCoefficients) -> Self {
        Self {
            m: params.m,
            k: params.k,
            tau0: params.tau0,
            tau1: derived.tau1,
            a_const: derived.a_const,
            phase: [params.chi1, params.chi2, derived.chi3],
            wave: [params.omega1, params.omega2, derived.omega3],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionDescriptor {
    pub family: Family,
    /// `α₁, α₂, …` in the slots the family formula uses.
    pub roots: Vec<f64>,
    pub constants: FamilyConstants,
    pub tau0: f64,
    pub tau1: f64,
    pub eta0: f64,
    pub m: f64,
    pub k: f64,
    /// `1/(2m)`.
    pub exponent: f64,
    /// `(χ₁, χ₂, χ₃)`.
    pub phase: [f64; 3],
    /// `(ω₁, ω₂, ω₃)`.
    pub wave: [f64; 3],
    pub reduced: bool,
    pub branch_sign: BranchSign,
}

/// Principal branch `z^e`, with real arithmetic on the nonnegative axis.
/// A negative real with a `−0.0` imaginary part is taken on the upper side
/// of the cut, like any other negative real.
pub fn principal_pow(z: Complex64, e: f64) -> Complex64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            Complex64::new(z.re.powf(e), 0.0)
        } else {
            Complex64::new(z.re, 0.0).powf(e)
        }
    } else {
        z.powf(e)
    }
}

fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Splits a complex square `z` that should be real into its real value.
fn real_part_of(z: Complex64) -> Option<f64> {
    (z.im.abs() <= 1e-12 * z.norm()).then_some(z.re)
}

/// Maps a classification onto its family and builds the descriptor from
/// derived coefficients.
pub fn construct_solution(
    cls: &RootClassification,
    params: &ProblemParams,
    derived: &DerivedCoefficients,
    options: &ConstructOptions,
) -> Result<SolutionDescriptor> {
    let inputs = FamilyInputs::from_derived(params, derived);
    let (family, roots) = match cls.pattern {
        RootPattern::Quadruple { a1 } => (Family::Q1, vec![a1]),
        RootPattern::TripleSimple { a1, a2 } => (Family::Q2, vec![a1, a2]),
        RootPattern::DoubleDouble { a1, a2 } => (Family::Q3, vec![a1, a2]),
        RootPattern::DoubleTwoSimple { a1, a2, a3 } => {
            let turning = pick_turning_root(a1, a2, a3, &inputs, options);
            let other = if turning == a3 { a2 } else { a3 };
            (Family::Q4, vec![a1, other, turning])
        }
        RootPattern::FourDistinct { a1, a2, a3, a4 } => (Family::Q5, vec![a1, a2, a3, a4]),
        RootPattern::Unsupported { ref description } => {
            return Err(Error::UnsupportedPattern(description.clone()))
        }
    };
    construct_raw(family, &roots, &inputs, options)
}

/// Chooses the formula's `α₃` slot among the two simple roots `hi > lo`.
fn pick_turning_root(a1: f64, hi: f64, lo: f64, inputs: &FamilyInputs, options: &ConstructOptions) -> f64 {
    match options.turning_root {
        TurningRoot::Lower => return lo,
        TurningRoot::Upper => return hi,
        TurningRoot::Auto => {}
    }
    let tau0 = if options.reduced { -inputs.tau1 * a1 } else { inputs.tau0 };
    let a2 = inputs.a_const * inputs.a_const;
    let lambda = |g: f64| creal((g - a1) * (g - a1) * (g - hi) * (g - lo)) / a2;
    let admissible = |r: f64| {
        let other = if r == hi { lo } else { hi };
        let (from, to) = (a1.min(r), a1.max(r));
        if other > from && other < to {
            return false;
        }
        let mid = 0.5 * (a1 + r);
        let lam = lambda(mid);
        let line = |g: f64| tau0 + inputs.tau1 * g;
        real_part_of(lam).is_some_and(|l| l >= 0.0) && line(mid) > 0.0 && line(r) > 0.0
    };
    match (admissible(hi), admissible(lo)) {
        (true, false) => hi,
        _ => lo,
    }
}

/// Builds a descriptor for an explicit family, root list and constants.
/// Used directly by figure mode, where the caption constants are not tied to
/// a coefficient derivation.
pub fn construct_raw(
    family: Family,
    roots: &[f64],
    inputs: &FamilyInputs,
    options: &ConstructOptions,
) -> Result<SolutionDescriptor> {
    if roots.len() != family.root_count() {
        return Err(Error::Config(format!(
            "family {family} takes {} roots, got {}",
            family.root_count(),
            roots.len()
        )));
    }
    if !(inputs.m.is_finite() && inputs.m != 0.0) {
        return Err(Error::Config(format!("exponent m = {} is unusable", inputs.m)));
    }
    let exponent = 1.0 / (2.0 * inputs.m);
    let (tau0, eta0) = if options.reduced {
        let pin = if family.is_elliptic() { roots[1] } else { roots[0] };
        (-inputs.tau1 * pin, 0.0)
    } else {
        (inputs.tau0, options.eta0)
    };
    let a = inputs.a_const;
    let tau1 = inputs.tau1;
    let mut c = FamilyConstants {
        a,
        ..FamilyConstants::default()
    };
    let amplitude = |radicand: f64| -> Result<Complex64> {
        if options.real_only && radicand < 0.0 {
            return Err(Error::NonRealAmplitude { radicand });
        }
        Ok(principal_pow(creal(radicand), exponent))
    };

    match family {
        Family::Q1 => c.a1 = Some(a * tau1),
        Family::Q2 | Family::Q3 => {}
        Family::Q4 => {
            let (a1, a2, a3) = (roots[0], roots[1], roots[2]);
            let (p, q) = (a1 - a2, a1 - a3);
            c.a2 = Some(amplitude(2.0 * tau1 * p * q / (a2 - a3))?);
            c.b = Some(creal(p * q).sqrt() / a);
            c.d = Some((2.0 * a1 - a2 - a3) / (a3 - a2));
        }
        Family::Q5 | Family::Q6 | Family::Q7 => {
            let (a1, a2, a3, a4) = (roots[0], roots[1], roots[2], roots[3]);
            c.a3 = Some(amplitude(tau1 * (a1 - a2) * (a4 - a2))?);
            c.m = Some(a4 - a2);
            c.n = Some(a1 - a4);
            c.modulus = Some(match family {
                Family::Q6 => 1.0,
                Family::Q7 => 0.0,
                _ => {
                    let l2 = elliptic_parameter(a1, a2, a3, a4);
                    if !(0.0..=1.0).contains(&l2) {
                        return Err(Error::DomainError(format!(
                            "elliptic parameter l² = {l2} outside [0, 1] for roots {roots:?}"
                        )));
                    }
                    l2.sqrt()
                }
            });
        }
    }

    Ok(SolutionDescriptor {
        family,
        roots: roots.to_vec(),
        constants: c,
        tau0,
        tau1,
        eta0,
        m: inputs.m,
        k: inputs.k,
        exponent,
        phase: inputs.phase,
        wave: inputs.wave,
        reduced: options.reduced,
        branch_sign: options.branch_sign,
    })
}

/// `v = base + num·weight/den`, with the relative size of `den` as the
/// distance to the nearest pole.
struct Parts {
    base: Complex64,
    num: Complex64,
    weight: f64,
    den: Complex64,
    scale: f64,
}

impl Parts {
    fn v(&self) -> Complex64 {
        self.base + self.num * self.weight / self.den
    }

    fn margin(&self) -> f64 {
        if self.scale == 0.0 {
            return f64::INFINITY;
        }
        self.den.norm() / self.scale
    }
}

impl SolutionDescriptor {
    /// The root multiset `Λ(Γ) = ∏(Γ − αᵢ)/A²` is built from.
    pub fn root_multiset(&self) -> [f64; 4] {
        let r = &self.roots;
        match self.family {
            Family::Q1 => [r[0]; 4],
            Family::Q2 => [r[0], r[0], r[0], r[1]],
            Family::Q3 => [r[0], r[0], r[1], r[1]],
            Family::Q4 => [r[0], r[0], r[1], r[2]],
            Family::Q5 | Family::Q6 | Family::Q7 => [r[0], r[1], r[2], r[3]],
        }
    }

    /// Traveling coordinate `η = ω₁x + ω₂y + ω₃t`.
    pub fn eta(&self, x: f64, y: f64, t: f64) -> f64 {
        self.wave[0] * x + self.wave[1] * y + self.wave[2] * t
    }

    /// Linear phase `χ₁x + χ₂y + χ₃t`.
    pub fn phase_at(&self, x: f64, y: f64, t: f64) -> f64 {
        self.phase[0] * x + self.phase[1] * y + self.phase[2] * t
    }

    fn parts(&self, eta: f64) -> Result<Parts> {
        let et = eta - self.eta0;
        let r = &self.roots;
        let (tau0, tau1) = (self.tau0, self.tau1);
        let a = self.constants.a;
        let s = self.branch_sign.value();
        Ok(match self.family {
            Family::Q1 => Parts {
                base: creal(tau0 + tau1 * r[0]),
                num: a * (s * tau1),
                weight: 1.0,
                den: creal(et),
                scale: 1.0 + eta.abs() + self.eta0.abs(),
            },
            Family::Q2 => {
                let d = r[0] - r[1];
                let four_a2 = a * a * 4.0;
                let sq = (d * et) * (d * et);
                Parts {
                    base: creal(tau0 + tau1 * r[0]),
                    num: four_a2 * (-d * tau1),
                    weight: 1.0,
                    den: four_a2 - sq,
                    scale: four_a2.norm() + sq,
                }
            }
            Family::Q3 => {
                let d = r[0] - r[1];
                let w = creal(d * et) / a;
                // the plus branch is the exp form anchored at α₂, minus at α₁
                let (anchor, num) = match self.branch_sign {
                    BranchSign::Plus => (r[1], -d * tau1),
                    BranchSign::Minus => (r[0], d * tau1),
                };
                let base = creal(tau0 + tau1 * anchor);
                // 1/(e^w − 1) without overflow
                if w.re > 0.0 {
                    let e = (-w).exp();
                    Parts {
                        base,
                        num: e * num,
                        weight: 1.0,
                        den: Complex64::new(1.0, 0.0) - e,
                        scale: 1.0 + e.norm(),
                    }
                } else {
                    let e = w.exp();
                    Parts {
                        base,
                        num: creal(num),
                        weight: 1.0,
                        den: e - 1.0,
                        scale: 1.0 + e.norm(),
                    }
                }
            }
            Family::Q4 => {
                let (p, q) = (r[0] - r[1], r[0] - r[2]);
                let ch = self.q4_cosh(et);
                if self.reduced {
                    let d = self.constants.d.expect("Q4 carries D");
                    Parts {
                        base: creal(0.0),
                        num: creal(2.0 * tau1 * p * q / (r[1] - r[2])),
                        weight: 1.0,
                        den: ch + d,
                        scale: d.abs() + ch.norm(),
                    }
                } else {
                    Parts {
                        base: creal(tau0 + tau1 * r[0]),
                        num: creal(-2.0 * p * q * tau1),
                        weight: 1.0,
                        den: ch * (p - q) + (p + q),
                        scale: (p + q).abs() + (p - q).abs() * ch.norm(),
                    }
                }
            }
            Family::Q5 | Family::Q6 | Family::Q7 => {
                let mm = self.constants.m.expect("elliptic family carries M");
                let nn = self.constants.n.expect("elliptic family carries N");
                let l = self.constants.modulus.expect("elliptic family carries l");
                let kappa2 = creal((r[0] - r[2]) * (r[1] - r[3])) / (a * a * 4.0);
                let kappa2 = real_part_of(kappa2).ok_or_else(|| {
                    Error::DomainError(format!("complex elliptic argument scale κ² = {kappa2}"))
                })?;
                let base = if self.reduced {
                    creal(0.0)
                } else {
                    creal(tau0 + tau1 * r[1])
                };
                let num = creal(tau1 * (r[0] - r[1]) * (r[3] - r[1]));
                if kappa2 >= 0.0 {
                    let (sn, _, _) = jacobi_sncndn(kappa2.sqrt() * et, l);
                    let s2 = sn * sn;
                    Parts {
                        base,
                        num,
                        weight: 1.0,
                        den: creal(mm + nn * s2),
                        scale: mm.abs() + nn.abs() * s2,
                    }
                } else {
                    // sn(iu, l) = i·sc(u, l'): M + N sn² = (M cn² − N sn²)/cn² at l'
                    let lc = ((1.0 - l) * (1.0 + l)).max(0.0).sqrt();
                    let (sn, cn, _) = jacobi_sncndn((-kappa2).sqrt() * et, lc);
                    let (s2, c2) = (sn * sn, cn * cn);
                    Parts {
                        base,
                        num,
                        weight: c2,
                        den: creal(mm * c2 - nn * s2),
                        scale: mm.abs() * c2 + nn.abs() * s2,
                    }
                }
            }
        })
    }

    /// `cosh(Bη̃)`, or `cos(√(−B²)η̃)` when `B²` is negative.
    fn q4_cosh(&self, et: f64) -> Complex64 {
        let b = self.constants.b.expect("Q4 carries B");
        match real_part_of(b * b) {
            Some(b2) if b2 >= 0.0 => creal((b2.sqrt() * et).cosh()),
            Some(b2) => creal(((-b2).sqrt() * et).cos()),
            None => (b * et).cosh(),
        }
    }

    /// Inner profile `v(η)` and its relative distance to the nearest pole.
    pub fn inner_profile(&self, eta: f64) -> Result<(Complex64, f64)> {
        let p = self.parts(eta)?;
        Ok((p.v(), p.margin()))
    }

    /// Relative distance of `η` to the nearest pole of the family.
    pub fn singularity_margin(&self, eta: f64) -> Result<f64> {
        Ok(self.parts(eta)?.margin())
    }

    /// Envelope `u(η)`.
    pub fn evaluate_profile(&self, eta: f64) -> Result<Complex64> {
        let p = self.parts(eta)?;
        let margin = p.margin();
        if !(margin >= SINGULAR_TOL) {
            return Err(Error::SingularPoint { eta, margin });
        }
        if self.reduced && matches!(self.family, Family::Q4 | Family::Q5 | Family::Q6 | Family::Q7) {
            let amp = match self.family {
                Family::Q4 => self.constants.a2,
                _ => self.constants.a3,
            }
            .expect("reduced families carry their amplitude");
            let w = principal_pow(creal(p.weight), self.exponent);
            return Ok(amp * w / principal_pow(p.den, self.exponent));
        }
        Ok(principal_pow(p.v(), self.exponent))
    }

    /// `q = e^{i(χ₁x+χ₂y+χ₃t)} u(ω₁x+ω₂y+ω₃t)`.
    pub fn evaluate_field(&self, x: f64, y: f64, t: f64) -> Result<Complex64> {
        let u = self.evaluate_profile(self.eta(x, y, t))?;
        Ok(Complex64::from_polar(1.0, self.phase_at(x, y, t)) * u)
    }

    /// Flat `key=value` lines describing the descriptor.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("family".to_string(), self.family.name().to_string()),
            ("kind".to_string(), self.family.description().to_string()),
        ];
        for (i, r) in self.roots.iter().enumerate() {
            out.push((format!("alpha{}", i + 1), format!("{r:.16e}")));
        }
        let cplx = |z: Complex64| format!("{:.16e}{:+.16e}i", z.re, z.im);
        let c = &self.constants;
        out.push(("A".into(), cplx(c.a)));
        let opt_c = [("A1", c.a1), ("A2", c.a2), ("B", c.b), ("A3", c.a3)];
        for (key, v) in opt_c {
            if let Some(v) = v {
                out.push((key.into(), cplx(v)));
            }
        }
        let opt_r = [("D", c.d), ("M", c.m), ("N", c.n), ("l", c.modulus)];
        for (key, v) in opt_r {
            if let Some(v) = v {
                out.push((key.into(), format!("{v:.16e}")));
            }
        }
        for (key, v) in [
            ("tau0", self.tau0),
            ("tau1", self.tau1),
            ("eta0", self.eta0),
            ("m", self.m),
            ("k", self.k),
            ("exponent", self.exponent),
            ("chi1", self.phase[0]),
            ("chi2", self.phase[1]),
            ("chi3", self.phase[2]),
            ("omega1", self.wave[0]),
            ("omega2", self.wave[1]),
            ("omega3", self.wave[2]),
        ] {
            out.push((key.into(), format!("{v:.16e}")));
        }
        out.push(("reduced".into(), self.reduced.to_string()));
        out.push(("branch_sign".into(), if self.branch_sign == BranchSign::Plus { "+" } else { "-" }.into()));
        out
    }
}

/// Converts an elliptic descriptor with a coincident root pair into its
/// hyperbolic (`α₃ = α₄`, Q6) or trigonometric (`α₂ = α₃`, Q7) limit.
pub fn degenerate_limits(desc: &SolutionDescriptor, tol: f64) -> Result<SolutionDescriptor> {
    if desc.family != Family::Q5 {
        return Err(Error::NotDegenerate(format!("{} is not an elliptic family", desc.family)));
    }
    let r = &desc.roots;
    let radius = tol * (1.0 + r.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let family = if (r[2] - r[3]).abs() <= radius {
        Family::Q6
    } else if (r[1] - r[2]).abs() <= radius {
        Family::Q7
    } else {
        return Err(Error::NotDegenerate(format!(
            "roots {r:?} have no coincident pair within {tol:e}"
        )));
    };
    let mut out = desc.clone();
    out.family = family;
    out.constants.modulus = Some(if family == Family::Q6 { 1.0 } else { 0.0 });
    Ok(out)
}

/// [`degenerate_limits`] at the default cluster tolerance.
pub fn degenerate_limits_default(desc: &SolutionDescriptor) -> Result<SolutionDescriptor> {
    degenerate_limits(desc, DEFAULT_CLUSTER_TOL)
}
