//! Residual checks for constructed solutions: the reduced-ODE identity in `Γ`,
//! finite-difference residuals of the full PDE
//! `i q_t + ½(q_xx + q_yy) + (|q|^{2m} + k|q|^{4m}) q = 0`, and shooting
//! against the reduced ODE.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::SolutionDescriptor;
use crate::grid::Grid;
use crate::params::{DerivedCoefficients, ProblemParams};

/// Default relative pole distance below which grid points are excluded.
pub const DEFAULT_EXCLUSION: f64 = 1e-6;

/// Smallest integrator step before a stiffness failure is declared.
const MIN_STEP: f64 = 1e-12;

/// Maximum over `gammas` of the reduced envelope ODE evaluated on the trial
/// ansatz, normalized by the largest of its five terms.
///
/// Term magnitudes are taken before cancellation inside each term
/// (`|τ₀| + |τ₁Γ|` for `|v|`, `Σ|ξᵢ||Γ|ⁱ` for the quartic), so the ratio stays
/// meaningful at `Γ = −τ₀/τ₁`, where `v` and `Λ` vanish together.
pub fn ode_identity_residual(params: &ProblemParams, derived: &DerivedCoefficients, gammas: &[f64]) -> f64 {
    let m = params.m;
    let w = params.width_sq();
    let c = -2.0 * derived.chi3 - params.chi1 * params.chi1 - params.chi2 * params.chi2;
    let (xi4, xi3, xi2, xi1, xi0) = (params.xi4, params.xi3, derived.xi2, params.xi1, derived.xi0);
    let (tau0, tau1, zeta0) = (params.tau0, derived.tau1, derived.zeta0);

    gammas
        .iter()
        .map(|&g| {
            let lambda = ((((xi4 * g + xi3) * g + xi2) * g + xi1) * g + xi0) / zeta0;
            let dlambda = (((4.0 * xi4 * g + 3.0 * xi3) * g + 2.0 * xi2) * g + xi1) / zeta0;
            let v = tau0 + tau1 * g;
            let vp2 = tau1 * tau1 * lambda;
            let vpp = tau1 * dlambda / 2.0;
            let terms = [
                c * 4.0 * m * m * v * v,
                w * (1.0 - 2.0 * m) * vp2,
                w * 2.0 * m * v * vpp,
                8.0 * m * m * v * v * v,
                8.0 * params.k * m * m * v * v * v * v,
            ];

            let a = g.abs();
            let lam_mag = ((((xi4.abs() * a + xi3.abs()) * a + xi2.abs()) * a + xi1.abs()) * a + xi0.abs()) / zeta0.abs();
            let dlam_mag = (((4.0 * xi4.abs() * a + 3.0 * xi3.abs()) * a + 2.0 * xi2.abs()) * a + xi1.abs()) / zeta0.abs();
            let vm = tau0.abs() + (tau1 * g).abs();
            let magnitudes = [
                (c * 4.0 * m * m).abs() * vm * vm,
                (w * (1.0 - 2.0 * m)).abs() * tau1 * tau1 * lam_mag,
                (w * m * tau1).abs() * vm * dlam_mag,
                8.0 * m * m * vm * vm * vm,
                (8.0 * params.k * m * m).abs() * vm * vm * vm * vm,
            ];
            let scale = magnitudes.iter().fold(0.0f64, |acc, t| acc.max(*t));
            if scale == 0.0 {
                0.0
            } else {
                terms.iter().sum::<f64>().abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sup_norm: f64,
    pub mean_abs: f64,
    pub n_points: usize,
    /// Points whose stencil comes within the exclusion margin of a pole.
    pub n_excluded: usize,
    /// Points where `v = u^{2m}` is not real and nonnegative, so `|q|^{2m} ≠ v`.
    pub n_off_branch: usize,
    pub step: f64,
    pub stencil_order: u32,
    /// `log₂` of the sup-norm ratio between steps `h` and `h/2`.
    pub converged_order: f64,
}

impl ResidualReport {
    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("sup_norm".into(), format!("{:.16e}", self.sup_norm)),
            ("mean_abs".into(), format!("{:.16e}", self.mean_abs)),
            ("n_points".into(), self.n_points.to_string()),
            ("n_excluded".into(), self.n_excluded.to_string()),
            ("n_off_branch".into(), self.n_off_branch.to_string()),
            ("step".into(), format!("{:.16e}", self.step)),
            ("stencil_order".into(), self.stencil_order.to_string()),
            ("converged_order".into(), format!("{:.6}", self.converged_order)),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeOptions {
    pub step: f64,
    pub stencil_order: u32,
    pub exclusion: f64,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self {
            step: 0.05,
            stencil_order: 4,
            exclusion: DEFAULT_EXCLUSION,
        }
    }
}

/// Central-difference weights for the first and second derivative on the
/// offsets `−p..=p`.
fn stencil(order: u32) -> Result<(&'static [f64], &'static [f64], f64, f64)> {
    match order {
        2 => Ok((&[-0.5, 0.0, 0.5], &[1.0, -2.0, 1.0], 1.0, 1.0)),
        4 => Ok((
            &[1.0, -8.0, 0.0, 8.0, -1.0],
            &[-1.0, 16.0, -30.0, 16.0, -1.0],
            12.0,
            12.0,
        )),
        _ => Err(Error::Config(format!("stencil order must be 2 or 4, got {order}"))),
    }
}

/// PDE residual at one point, or `None` when a stencil point is too close
/// to a pole.
fn point_residual(desc: &SolutionDescriptor, p: [f64; 3], h: f64, order: u32, exclusion: f64) -> Result<Option<f64>> {
    let (d1, d2, n1, n2) = stencil(order)?;
    let half = (d1.len() / 2) as i32;
    let field = |x: f64, y: f64, t: f64| -> Result<Option<Complex64>> {
        if desc.singularity_margin(desc.eta(x, y, t))? < exclusion {
            return Ok(None);
        }
        Ok(Some(desc.evaluate_field(x, y, t)?))
    };
    let mut q_t = Complex64::default();
    let mut q_xx = Complex64::default();
    let mut q_yy = Complex64::default();
    for (j, (&w1, &w2)) in d1.iter().zip(d2).enumerate() {
        let o = (j as i32 - half) as f64 * h;
        let (Some(ft), Some(fx), Some(fy)) = (
            field(p[0], p[1], p[2] + o)?,
            field(p[0] + o, p[1], p[2])?,
            field(p[0], p[1] + o, p[2])?,
        ) else {
            return Ok(None);
        };
        q_t += ft * w1;
        q_xx += fx * w2;
        q_yy += fy * w2;
    }
    q_t /= n1 * h;
    q_xx /= n2 * h * h;
    q_yy /= n2 * h * h;
    let q = desc.evaluate_field(p[0], p[1], p[2])?;
    let mod2 = q.norm_sqr();
    let nonlinear = mod2.powf(desc.m) + desc.k * mod2.powf(2.0 * desc.m);
    let r = Complex64::i() * q_t + (q_xx + q_yy) * 0.5 + q * nonlinear;
    Ok(Some(r.norm()))
}

/// `v` is real and nonnegative at this point.
fn on_branch(desc: &SolutionDescriptor, eta: f64) -> Result<bool> {
    let (v, _) = desc.inner_profile(eta)?;
    Ok(v.im.abs() <= 1e-12 * v.norm() && v.re >= 0.0)
}

/// `(sup, mean)` per step, then the excluded and off-branch counts.
type StudyStats = (Vec<(f64, f64)>, usize, usize);

/// Sup-norm and mean residual on a fixed point set for several step sizes,
/// excluding points that are singular or off-branch at any step.
fn residual_study(
    desc: &SolutionDescriptor,
    points: &[[f64; 3]],
    steps: &[f64],
    order: u32,
    exclusion: f64,
) -> Result<StudyStats> {
    stencil(order)?;
    let mut per_point: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    let (mut excluded, mut off_branch) = (0, 0);
    'points: for &p in points {
        if !on_branch(desc, desc.eta(p[0], p[1], p[2]))? {
            off_branch += 1;
            continue;
        }
        let mut row = Vec::with_capacity(steps.len());
        for &h in steps {
            match point_residual(desc, p, h, order, exclusion)? {
                Some(r) => row.push(r),
                None => {
                    excluded += 1;
                    continue 'points;
                }
            }
        }
        per_point.push(row);
    }
    if per_point.is_empty() {
        return Err(Error::AllPointsSingular { n_points: points.len() });
    }
    let n = per_point.len() as f64;
    let stats = (0..steps.len())
        .map(|j| {
            let sup = per_point.iter().fold(0.0f64, |a, r| a.max(r[j]));
            let mean = per_point.iter().map(|r| r[j]).sum::<f64>() / n;
            (sup, mean)
        })
        .collect();
    Ok((stats, excluded, off_branch))
}

/// Finite-difference PDE residual on `points`; the convergence order comes
/// from repeating the stencil at half the step.
pub fn pde_residual_points(desc: &SolutionDescriptor, points: &[[f64; 3]], opts: &PdeOptions) -> Result<ResidualReport> {
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {}", opts.step)));
    }
    let steps = [opts.step, opts.step / 2.0];
    let (stats, n_excluded, n_off_branch) = residual_study(desc, points, &steps, opts.stencil_order, opts.exclusion)?;
    let (sup, mean) = stats[0];
    let converged_order = if stats[1].0 > 0.0 && sup > 0.0 {
        (sup / stats[1].0).log2()
    } else {
        f64::NAN
    };
    Ok(ResidualReport {
        sup_norm: sup,
        mean_abs: mean,
        n_points: points.len(),
        n_excluded,
        n_off_branch,
        step: opts.step,
        stencil_order: opts.stencil_order,
        converged_order,
    })
}

pub fn pde_residual(desc: &SolutionDescriptor, grid: &Grid, step: f64, stencil_order: u32) -> Result<ResidualReport> {
    pde_residual_with(
        desc,
        grid,
        &PdeOptions {
            step,
            stencil_order,
            exclusion: DEFAULT_EXCLUSION,
        },
    )
}

pub fn pde_residual_with(desc: &SolutionDescriptor, grid: &Grid, opts: &PdeOptions) -> Result<ResidualReport> {
    grid.validate()?;
    pde_residual_points(desc, &grid.points(), opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    /// `(h, sup_norm)` per step.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log sup_norm` against `log h`.
    pub fitted_order: f64,
    pub n_excluded: usize,
    pub n_off_branch: usize,
}

/// Sup-norm residuals at each step over a common point set, with the
/// fitted convergence order.
pub fn convergence_study(
    desc: &SolutionDescriptor,
    grid: &Grid,
    steps: &[f64],
    stencil_order: u32,
    exclusion: f64,
) -> Result<ConvergenceStudy> {
    grid.validate()?;
    if steps.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two steps".into()));
    }
    let (stats, n_excluded, n_off_branch) = residual_study(desc, &grid.points(), steps, stencil_order, exclusion)?;
    let samples: Vec<(f64, f64)> = steps.iter().zip(&stats).map(|(&h, &(sup, _))| (h, sup)).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(h, s)| (h.ln(), s.ln())).unzip();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ConvergenceStudy {
        samples,
        fitted_order: sxy / sxx,
        n_excluded,
        n_off_branch,
    })
}

/// A stored field sample `(x, y, t, q)`.
pub type FieldSample = ([f64; 3], Complex64);

/// Re-verifies exported samples: the PDE residual on their coordinates and
/// the largest difference between stored and recomputed field values.
pub fn verify_samples(desc: &SolutionDescriptor, samples: &[FieldSample], opts: &PdeOptions) -> Result<(ResidualReport, f64)> {
    let mut mismatch = 0.0f64;
    for &(p, q) in samples {
        if let Ok(fresh) = desc.evaluate_field(p[0], p[1], p[2]) {
            mismatch = mismatch.max((fresh - q).norm());
        }
    }
    let points: Vec<[f64; 3]> = samples.iter().map(|s| s.0).collect();
    Ok((pde_residual_points(desc, &points, opts)?, mismatch))
}

/// Right-hand side used to integrate the inner profile `v(η)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShootModel {
    /// The reduced envelope ODE in `v`, using the descriptor's phase and
    /// wave numbers.
    #[default]
    Envelope,
    /// `v'' = τ₁Λ'(Γ)/2` from the trial equation with the family's roots;
    /// valid for any root set, whether or not it came from a derivation.
    Trial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    pub model: ShootModel,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            model: ShootModel::Envelope,
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

fn second_derivative(desc: &SolutionDescriptor, model: ShootModel, v: f64, vp: f64) -> f64 {
    match model {
        ShootModel::Envelope => {
            let m = desc.m;
            let [c1, c2, c3] = desc.phase;
            let [w1, w2, _] = desc.wave;
            let w = w1 * w1 + w2 * w2;
            let c = -2.0 * c3 - c1 * c1 - c2 * c2;
            let num = 4.0 * m * m * c * v * v
                + w * (1.0 - 2.0 * m) * vp * vp
                + 8.0 * m * m * v * v * v
                + 8.0 * desc.k * m * m * v * v * v * v;
            -num / (2.0 * m * w * v)
        }
        ShootModel::Trial => {
            if desc.tau1 == 0.0 {
                return 0.0;
            }
            let g = (v - desc.tau0) / desc.tau1;
            let r = desc.root_multiset();
            let a2 = (desc.constants.a * desc.constants.a).re;
            // d/dΓ ∏(Γ − rᵢ)
            let dprod: f64 = (0..4)
                .map(|i| (0..4).filter(|&j| j != i).map(|j| g - r[j]).product::<f64>())
                .sum();
            desc.tau1 * dprod / (2.0 * a2)
        }
    }
}

/// Initial `(v, v')` at `eta`: `|v'|` from `τ₁²Λ(Γ)`, its sign from a
/// difference quotient of the closed form.
fn initial_state(desc: &SolutionDescriptor, eta: f64) -> Result<[f64; 2]> {
    let (v, _) = desc.inner_profile(eta)?;
    if v.im.abs() > 1e-12 * (1.0 + v.norm()) {
        return Err(Error::DomainError(format!("shooting needs a real profile, v({eta}) = {v}")));
    }
    if desc.tau1 == 0.0 {
        return Ok([v.re, 0.0]);
    }
    let g = (v.re - desc.tau0) / desc.tau1;
    let a2 = desc.constants.a * desc.constants.a;
    let lambda = desc.root_multiset().iter().map(|r| g - r).product::<f64>() / a2.re;
    let speed = (desc.tau1 * desc.tau1 * lambda.max(0.0)).sqrt();
    let h = 1e-6 * (1.0 + eta.abs());
    let (ahead, _) = desc.inner_profile(eta + h)?;
    let (behind, _) = desc.inner_profile(eta - h)?;
    let slope = (ahead.re - behind.re) / (2.0 * h);
    Ok([v.re, speed.copysign(slope)])
}

/// One Dormand-Prince 5(4) step; returns the 5th-order state and the
/// embedded error estimate.
fn dp45_step(f: &impl Fn([f64; 2]) -> [f64; 2], y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0f64; 2]; 7];
    k[0] = f(y);
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = C[s - 1][j];
            ys[0] += h * a * kj[0];
            ys[1] += h * a * kj[1];
        }
        k[s] = f(ys);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err)
}

/// Integrates the inner profile from `eta_range.0` with adaptive DP5(4) and
/// returns the largest `|v_numeric − v_closed|` over `n_steps` equally spaced
/// checkpoints.
pub fn ode_shoot_compare(
    desc: &SolutionDescriptor,
    eta_range: (f64, f64),
    n_steps: usize,
    opts: &ShootOptions,
) -> Result<f64> {
    let (a, b) = eta_range;
    if !(a.is_finite() && b.is_finite() && b > a) || n_steps == 0 {
        return Err(Error::Config(format!("bad shooting window [{a}, {b}] with {n_steps} steps")));
    }
    let f = |y: [f64; 2]| [y[1], second_derivative(desc, opts.model, y[0], y[1])];
    let mut y = initial_state(desc, a)?;
    let mut eta = a;
    let mut h = (b - a) / n_steps as f64;
    let min_step = MIN_STEP * (1.0 + (b - a));
    let mut deviation = 0.0f64;

    for i in 1..=n_steps {
        let target = if i == n_steps { b } else { a + (b - a) * i as f64 / n_steps as f64 };
        while eta < target {
            let step = h.min(target - eta);
            let (y_new, err) = dp45_step(&f, y, step);
            let norm = (0..2)
                .map(|j| err[j].abs() / (opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs())))
                .fold(0.0f64, f64::max);
            if norm <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                eta = if step == target - eta { target } else { eta + step };
                y = y_new;
                let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                h = step * grow;
            } else {
                let shrink = if norm.is_finite() { (0.9 * norm.powf(-0.25)).clamp(0.1, 0.5) } else { 0.1 };
                h = step * shrink;
                if h < min_step {
                    return Err(Error::StiffnessFailure { eta, step: h });
                }
            }
        }
        let (closed, _) = desc.inner_profile(target)?;
        deviation = deviation.max((y[0] - closed.re).abs());
    }
    Ok(deviation)
}
