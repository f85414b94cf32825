//! Reference implementations used only as test oracles. None of them share
//! code with the library.

#![allow(dead_code)]

use nalgebra::Matrix4;
use num_complex::Complex64;

use dualnls::ProblemParams;

/// Double-exponential quadrature of `f` over `[0, ∞)` with
/// `t = exp(π/2 · sinh s)`.
pub fn exp_sinh(f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    let n = (6.0 / h) as i64;
    for k in -n..=n {
        let s = k as f64 * h;
        let t = (half_pi * s.sinh()).exp();
        if t == 0.0 || !t.is_finite() {
            continue;
        }
        let w = t * half_pi * s.cosh();
        let v = f(t) * w;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * h
}

/// Tanh-sinh quadrature of `f` over `[a, b]`.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    let n = (4.0 / h) as i64;
    for k in -n..=n {
        let s = k as f64 * h;
        let u = half_pi * s.sinh();
        let x = u.tanh();
        let w = half_pi * s.cosh() / (u.cosh() * u.cosh());
        if w == 0.0 {
            continue;
        }
        let v = f(c + r * x) * w;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * h * r
}

/// `R_F` straight from its defining integral.
pub fn rf_quadrature(x: f64, y: f64, z: f64) -> f64 {
    0.5 * exp_sinh(|t| 1.0 / ((t + x) * (t + y) * (t + z)).sqrt())
}

/// `F(φ, l)` straight from its defining integral.
pub fn ellip_f_quadrature(phi: f64, l: f64) -> f64 {
    tanh_sinh(|p| 1.0 / (1.0 - l * l * p.sin() * p.sin()).sqrt(), 0.0, phi)
}

/// `sn(u, l)` for `0 ≤ u ≤ K(l)` by inverting the quadrature `F`:
/// bisection to bracket, then Newton with `dF/dφ = 1/√(1 − l² sin²φ)`.
pub fn sn_by_inversion(u: f64, l: f64) -> f64 {
    let f = |phi: f64| ellip_f_quadrature(phi, l) - u;
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut phi = 0.5 * (lo + hi);
    for _ in 0..6 {
        let d = 1.0 / (1.0 - l * l * phi.sin() * phi.sin()).sqrt();
        phi -= f(phi) / d;
    }
    phi.sin()
}

/// Eigenvalues of the companion matrix of `Γ⁴ + c3Γ³ + c2Γ² + c1Γ + c0`.
pub fn companion_roots(c: [f64; 4]) -> Vec<Complex64> {
    let [c3, c2, c1, c0] = c;
    #[rustfmt::skip]
    let m = Matrix4::new(
        -c3, -c2, -c1, -c0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    );
    m.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// Coefficients `[c3, c2, c1, c0]` of `∏(Γ − rᵢ)` by direct expansion.
pub fn expand_roots(r: [f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = r;
    [
        -(a + b + c + d),
        a * b + a * c + a * d + b * c + b * d + c * d,
        -(a * b * c + a * b * d + a * c * d + b * c * d),
        a * b * c * d,
    ]
}

pub fn golden() -> ProblemParams {
    ProblemParams {
        m: 1.0,
        k: 1.0,
        chi1: 1.0,
        chi2: 2.0,
        omega1: -1.0,
        omega2: 1.0,
        xi1: 0.0,
        xi3: 1.0,
        xi4: 1.0,
        tau0: 1.0,
    }
}

/// Moves `ξ₁` so that `−2χ₃ − χ₁² − χ₂²` takes the value `target`; `χ₃` is
/// affine in `ξ₁`, so two evaluations fix it.
pub fn tune_xi1(base: ProblemParams, target: f64) -> ProblemParams {
    let c_of = |xi1: f64| {
        let p = ProblemParams { xi1, ..base };
        let d = dualnls::derive_coefficients(&p).unwrap();
        -2.0 * d.chi3 - p.chi1 * p.chi1 - p.chi2 * p.chi2
    };
    let (c0, c1) = (c_of(0.0), c_of(1.0));
    ProblemParams {
        xi1: (target - c0) / (c1 - c0),
        ..base
    }
}

/// Randomized admissible parameters: log-uniform `m ∈ [0.25, 3]`,
/// `k ∈ [0.1, 10]` with random sign, other fields uniform in `[−3, 3]`.
pub fn random_params(rng: &mut impl rand::Rng) -> ProblemParams {
    loop {
        let m = (rng.gen_range(0.25f64.ln()..3f64.ln())).exp();
        let k = (rng.gen_range(0.1f64.ln()..10f64.ln())).exp() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut u = || rng.gen_range(-3.0..3.0);
        let p = ProblemParams {
            m,
            k,
            chi1: u(),
            chi2: u(),
            omega1: u(),
            omega2: u(),
            xi1: u(),
            xi3: u(),
            xi4: u(),
            tau0: u(),
        };
        // stay clear of the invariant boundaries
        let clear = [p.xi3, p.xi4, p.tau0].iter().all(|v| v.abs() > 1e-3)
            && p.upsilon().abs() > 1e-3
            && p.width_sq() > 1e-3;
        if clear && dualnls::validate(&p).is_empty() {
            return p;
        }
    }
}
