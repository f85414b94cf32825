//! The monic root polynomial of the trial equation, its roots and the
//! multiplicity pattern that selects a solution family.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedCoefficients, ProblemParams};

/// Default relative clustering tolerance for multiplicity detection.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Relative coefficient backward error under which nearby roots are merged
/// into one multiple root.
const MERGE_BACKWARD_TOL: f64 = 1e-12;

/// `Γ⁴ + c3 Γ³ + c2 Γ² + c1 Γ + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticPoly {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticPoly {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    /// Expands `∏(Γ − rᵢ)` for four real roots.
    pub fn from_roots(r: [f64; 4]) -> Self {
        let c = expand(&r.map(|x| Complex64::new(x, 0.0)));
        Self::new(c[0].re, c[1].re, c[2].re, c[3].re)
    }

    /// `[c3, c2, c1, c0]`.
    pub fn coeffs(&self) -> [f64; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_finite())
    }

    /// Euclidean norm of the non-leading coefficients.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((z + self.c3) * z + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    /// Value and first derivative.
    fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let p = self.eval(z);
        let dp = ((z * 4.0 + 3.0 * self.c3) * z + 2.0 * self.c2) * z + self.c1;
        (p, dp)
    }

    /// `j`-th derivative, `0 ≤ j ≤ 3`.
    fn derivative(&self, j: usize, z: Complex64) -> Complex64 {
        match j {
            0 => self.eval(z),
            1 => self.eval_d(z).1,
            2 => (z * 12.0 + 6.0 * self.c3) * z + 2.0 * self.c2,
            3 => z * 24.0 + 6.0 * self.c3,
            _ => Complex64::new(24.0, 0.0),
        }
    }
}

impl fmt::Display for QuarticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "G^4 + ({:e}) G^3 + ({:e}) G^2 + ({:e}) G + ({:e})",
            self.c3, self.c2, self.c1, self.c0
        )
    }
}

/// Monic form of `ξ₄Γ⁴ + ξ₃Γ³ + ξ₂Γ² + ξ₁Γ + ξ₀`.
pub fn build_quartic(params: &ProblemParams, derived: &DerivedCoefficients) -> QuarticPoly {
    let xi4 = params.xi4;
    QuarticPoly::new(
        params.xi3 / xi4,
        derived.xi2 / xi4,
        params.xi1 / xi4,
        derived.xi0 / xi4,
    )
}

/// Non-leading coefficients `[c3, c2, c1, c0]` of `∏(Γ − rᵢ)`.
fn expand(r: &[Complex64; 4]) -> [Complex64; 4] {
    let mut c = [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default()];
    for (n, &root) in r.iter().enumerate() {
        for j in (1..=n + 1).rev() {
            c[j] -= root * c[j - 1];
        }
    }
    [c[1], c[2], c[3], c[4]]
}

/// Magnitude scale for each coefficient: coefficients of `∏(Γ + |rᵢ|)`.
fn expansion_scale(r: &[Complex64; 4]) -> [f64; 4] {
    let c = expand(&r.map(|z| Complex64::new(-z.norm(), 0.0)));
    c.map(|z| z.re)
}

/// All four roots, polished on the original polynomial.
///
/// Ferrari's construction seeds a simultaneous Newton (Aberth) refinement.
/// Roots whose merger into a multiple root changes the expanded coefficients
/// by less than `1e-12` of their natural scale are snapped to a common value,
/// so exact multiplicities survive the ~`ε^{1/k}` splitting that rounding of
/// the coefficients causes.
pub fn find_roots(q: &QuarticPoly) -> [Complex64; 4] {
    let mut roots = ferrari(q);
    aberth_polish(q, &mut roots);
    snap_multiplicities(q, &roots)
}

fn ferrari(q: &QuarticPoly) -> [Complex64; 4] {
    let QuarticPoly { c3, c2, c1, c0 } = *q;
    // Γ = y − c3/4 gives y⁴ + p y² + r1 y + r0
    let s = c3 / 4.0;
    let p = c2 - 6.0 * s * s;
    let r1 = c1 - 2.0 * c2 * s + 8.0 * s * s * s;
    let r0 = c0 - c1 * s + c2 * s * s - 3.0 * s * s * s * s;
    let shift = Complex64::new(-s, 0.0);

    let quad = |b: Complex64, c: Complex64| -> [Complex64; 2] {
        let d = (b * b - c * 4.0).sqrt();
        let r = if (b.conj() * d).re >= 0.0 { -(b + d) * 0.5 } else { (d - b) * 0.5 };
        if r.norm() == 0.0 {
            [r, r]
        } else {
            [r, c / r]
        }
    };

    let ys: [Complex64; 4] = if r1.abs() <= 1e-14 * (1.0 + p.abs() + r0.abs()) {
        // biquadratic
        let [z1, z2] = quad(Complex64::new(p, 0.0), Complex64::new(r0, 0.0));
        let (a, b) = (z1.sqrt(), z2.sqrt());
        [a, -a, b, -b]
    } else {
        // resolvent 8μ³ + 8pμ² + (2p² − 8r0)μ − r1² = 0, need μ ≠ 0
        let mu = cubic_roots(p, 0.25 * p * p - r0, -r1 * r1 / 8.0)
            .into_iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        let w = (mu * 2.0).sqrt();
        let half = Complex64::new(0.5 * p, 0.0) + mu;
        let t = Complex64::new(r1, 0.0) / (w * 2.0);
        // (y² + p/2 + μ)² = (w y − t)²
        let [a1, a2] = quad(-w, half + t);
        let [b1, b2] = quad(w, half - t);
        [a1, a2, b1, b2]
    };
    ys.map(|y| y + shift)
}

/// Roots of `x³ + a x² + b x + c` (Cardano, complex arithmetic).
fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = Complex64::new(-a / 3.0, 0.0);
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u3 = Complex64::new(-q / 2.0, 0.0) + disc;
    if u3.norm() < Complex64::new(-q / 2.0, 0.0).sub_norm(disc) {
        u3 = Complex64::new(-q / 2.0, 0.0) - disc;
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let u = u3.cbrt_principal();
    let mut out = [Complex64::default(); 3];
    let mut uk = u;
    for slot in out.iter_mut() {
        let v = if uk.norm() == 0.0 {
            Complex64::default()
        } else {
            -p / (uk * 3.0)
        };
        *slot = uk + v + shift;
        uk *= omega;
    }
    out
}

trait ComplexExt {
    fn cbrt_principal(self) -> Self;
    fn sub_norm(self, other: Self) -> f64;
}

impl ComplexExt for Complex64 {
    fn cbrt_principal(self) -> Self {
        if self.norm() == 0.0 {
            self
        } else {
            Complex64::from_polar(self.norm().cbrt(), self.arg() / 3.0)
        }
    }

    fn sub_norm(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

fn aberth_polish(q: &QuarticPoly, roots: &mut [Complex64; 4]) {
    let scale = 1.0 + q.coeff_norm();
    // separate exact duplicates so the repulsion term is finite
    for i in 0..4 {
        for j in 0..i {
            if roots[i] == roots[j] {
                let bump = 1e-7 * (1.0 + roots[i].norm());
                roots[i] += Complex64::from_polar(bump, 0.7 + i as f64);
            }
        }
    }
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let (p, dp) = q.eval_d(roots[i]);
            if p.norm() <= f64::EPSILON * scale * 1e-3 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..4)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = roots[i] - roots[j];
                    if d.norm() == 0.0 {
                        Complex64::default()
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 || !denom.is_finite() {
                ratio
            } else {
                ratio / denom
            };
            if step.is_finite() {
                roots[i] -= step;
                moved = moved.max(step.norm() / (1.0 + roots[i].norm()));
            }
        }
        if moved < 1e-17 {
            break;
        }
    }
}

/// Enumerates the 15 set partitions of four indices as block labels.
fn partitions() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for b in 0..1 {
        for c in 0..=b + 1 {
            for d in 0..=b.max(c) + 1 {
                for e in 0..=b.max(c).max(d) + 1 {
                    out.push([b, c, d, e]);
                }
            }
        }
    }
    out
}

fn snap_multiplicities(q: &QuarticPoly, roots: &[Complex64; 4]) -> [Complex64; 4] {
    let target = q.coeffs().map(|c| Complex64::new(c, 0.0));
    let scale = expansion_scale(roots);
    let backward = |cand: &[Complex64; 4]| -> f64 {
        let c = expand(cand);
        (0..4)
            .map(|j| (c[j] - target[j]).norm() / (scale[j] + f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    let mut best = *roots;
    let mut best_blocks = 4;
    let mut best_err = backward(roots);
    for labels in partitions() {
        let blocks = labels.iter().max().unwrap() + 1;
        if blocks >= 4 {
            continue;
        }
        let mut cand = *roots;
        let mut quotient = vec![Complex64::new(1.0, 0.0)];
        quotient.extend(target);
        let mut simple = Vec::new();
        for block in 0..blocks {
            let members: Vec<usize> = (0..4).filter(|&i| labels[i] == block).collect();
            let mult = members.len();
            if mult == 1 {
                simple.push(members[0]);
                continue;
            }
            let mut center = members.iter().map(|&i| roots[i]).sum::<Complex64>() / mult as f64;
            if center.im.abs() <= 1e-9 * (1.0 + center.re.abs()) {
                center.im = 0.0;
            }
            center = refine_center(q, center, mult);
            for &i in &members {
                cand[i] = center;
            }
            for _ in 0..mult {
                quotient = deflate(&quotient, center);
            }
        }
        // simple roots near a multiple one inherit its rounding error, so
        // they are recomputed from the deflated factor
        if blocks < 4 {
            let rest: Vec<Complex64> = match quotient.len() {
                2 => vec![-quotient[1]],
                3 => {
                    let (b, c) = (quotient[1], quotient[2]);
                    let d = (b * b - c * 4.0).sqrt();
                    let r = if (b.conj() * d).re >= 0.0 { -(b + d) * 0.5 } else { (d - b) * 0.5 };
                    if r.norm() == 0.0 { vec![r, r] } else { vec![r, c / r] }
                }
                _ => Vec::new(),
            };
            match (simple.as_slice(), rest.as_slice()) {
                ([i], [r]) => cand[*i] = *r,
                ([i, j], [r, s]) => {
                    let direct = (roots[*i] - r).norm() + (roots[*j] - s).norm();
                    let swapped = (roots[*i] - s).norm() + (roots[*j] - r).norm();
                    let (r, s) = if direct <= swapped { (*r, *s) } else { (*s, *r) };
                    cand[*i] = r;
                    cand[*j] = s;
                }
                _ => {}
            }
        }
        let err = backward(&cand);
        if err <= MERGE_BACKWARD_TOL && (blocks < best_blocks || (blocks == best_blocks && err < best_err)) {
            best = cand;
            best_blocks = blocks;
            best_err = err;
        }
    }
    best
}

/// Synthetic division of a monic polynomial by `(Γ − r)`, remainder dropped.
fn deflate(c: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(c.len() - 1);
    let mut acc = Complex64::default();
    for &coef in &c[..c.len() - 1] {
        acc = acc * r + coef;
        out.push(acc);
    }
    out
}

/// Newton on `p^{(k−1)}`, which has a simple root at a `k`-fold root of `p`.
fn refine_center(q: &QuarticPoly, start: Complex64, mult: usize) -> Complex64 {
    if mult <= 1 {
        return start;
    }
    let order = mult - 1;
    let mut z = start;
    for _ in 0..8 {
        let f = q.derivative(order, z);
        let df = q.derivative(order + 1, z);
        if df.norm() == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        if !step.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    if start.im == 0.0 {
        z.im = 0.0;
    }
    z
}

/// Multiplicity pattern of the quartic's roots. Roots of one multiplicity
/// class are sorted descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RootPattern {
    Quadruple { a1: f64 },
    /// `a1` triple, `a2` simple.
    TripleSimple { a1: f64, a2: f64 },
    /// Two double roots, `a1 > a2`.
    DoubleDouble { a1: f64, a2: f64 },
    /// `a1` double, `a2 > a3` simple.
    DoubleTwoSimple { a1: f64, a2: f64, a3: f64 },
    /// `a1 > a2 > a3 > a4`.
    FourDistinct { a1: f64, a2: f64, a3: f64, a4: f64 },
    /// At least one non-real root.
    Unsupported { description: String },
}

impl RootPattern {
    pub fn name(&self) -> &'static str {
        match self {
            RootPattern::Quadruple { .. } => "Quadruple",
            RootPattern::TripleSimple { .. } => "TripleSimple",
            RootPattern::DoubleDouble { .. } => "DoubleDouble",
            RootPattern::DoubleTwoSimple { .. } => "DoubleTwoSimple",
            RootPattern::FourDistinct { .. } => "FourDistinct",
            RootPattern::Unsupported { .. } => "Unsupported",
        }
    }

    /// The root multiset, each root repeated by its multiplicity.
    pub fn multiset(&self) -> Option<[f64; 4]> {
        Some(match *self {
            RootPattern::Quadruple { a1 } => [a1; 4],
            RootPattern::TripleSimple { a1, a2 } => [a1, a1, a1, a2],
            RootPattern::DoubleDouble { a1, a2 } => [a1, a1, a2, a2],
            RootPattern::DoubleTwoSimple { a1, a2, a3 } => [a1, a1, a2, a3],
            RootPattern::FourDistinct { a1, a2, a3, a4 } => [a1, a2, a3, a4],
            RootPattern::Unsupported { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootClassification {
    pub pattern: RootPattern,
    pub roots_raw: [Complex64; 4],
    pub cluster_tol: f64,
}

impl RootClassification {
    /// `l²` of the elliptic family, defined for `FourDistinct` only.
    pub fn modulus_sq(&self) -> Option<f64> {
        match self.pattern {
            RootPattern::FourDistinct { a1, a2, a3, a4 } => Some(elliptic_parameter(a1, a2, a3, a4)),
            _ => None,
        }
    }
}

/// `l² = (α₂−α₃)(α₁−α₄) / ((α₁−α₃)(α₂−α₄))`.
pub fn elliptic_parameter(a1: f64, a2: f64, a3: f64, a4: f64) -> f64 {
    ((a2 - a3) * (a1 - a4)) / ((a1 - a3) * (a2 - a4))
}

/// Groups roots closer than `tol·(1 + max|root|)` and maps the multiplicity
/// signature onto a pattern.
pub fn classify_roots(roots: &[Complex64; 4], tol: f64) -> Result<RootClassification> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("cluster tolerance must be positive, got {tol}")));
    }
    let radius = tol * (1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let close = |i: usize, j: usize| (roots[i] - roots[j]).norm() <= radius;

    // connected components of the "close" graph
    let mut label = [usize::MAX; 4];
    let mut next = 0;
    for i in 0..4 {
        if label[i] != usize::MAX {
            continue;
        }
        label[i] = next;
        let mut stack = vec![i];
        while let Some(a) = stack.pop() {
            for b in 0..4 {
                if label[b] == usize::MAX && close(a, b) {
                    label[b] = next;
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    // a component that is not a clique admits more than one clustering
    for i in 0..4 {
        for j in 0..i {
            if label[i] == label[j] && !close(i, j) {
                return Err(Error::AmbiguousClustering { tol });
            }
        }
    }

    let mut clusters: Vec<(Complex64, usize)> = (0..next)
        .map(|c| {
            let members: Vec<Complex64> = (0..4).filter(|&i| label[i] == c).map(|i| roots[i]).collect();
            let n = members.len();
            (members.into_iter().sum::<Complex64>() / n as f64, n)
        })
        .collect();

    let complex: Vec<_> = clusters.iter().filter(|(z, _)| z.im.abs() > radius).collect();
    if !complex.is_empty() {
        let description = complex
            .iter()
            .map(|(z, n)| format!("{}{:+}i (x{})", z.re, z.im, n))
            .collect::<Vec<_>>()
            .join(", ");
        return Ok(RootClassification {
            pattern: RootPattern::Unsupported {
                description: format!("non-real roots: {description}"),
            },
            roots_raw: *roots,
            cluster_tol: tol,
        });
    }

    // multiplicity descending, then value descending
    clusters.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.re.total_cmp(&a.0.re)));
    let r: Vec<f64> = clusters.iter().map(|c| c.0.re).collect();
    let sig: Vec<usize> = clusters.iter().map(|c| c.1).collect();
    let pattern = match sig.as_slice() {
        [4] => RootPattern::Quadruple { a1: r[0] },
        [3, 1] => RootPattern::TripleSimple { a1: r[0], a2: r[1] },
        [2, 2] => RootPattern::DoubleDouble { a1: r[0], a2: r[1] },
        [2, 1, 1] => RootPattern::DoubleTwoSimple {
            a1: r[0],
            a2: r[1],
            a3: r[2],
        },
        [1, 1, 1, 1] => RootPattern::FourDistinct {
            a1: r[0],
            a2: r[1],
            a3: r[2],
            a4: r[3],
        },
        other => unreachable!("multiplicities {other:?} do not sum to four"),
    };
    Ok(RootClassification {
        pattern,
        roots_raw: *roots,
        cluster_tol: tol,
    })
}
