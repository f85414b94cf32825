//! Python bindings: parameters, coefficient derivation, root classification,
//! solution descriptors and the residual checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use dualnls::cli::{figure_descriptor, Pipeline, RunOptions};
use dualnls::quartic::DEFAULT_CLUSTER_TOL;
use dualnls::verify::{PdeOptions, ShootModel, ShootOptions};
use dualnls::{BranchSign, ConstructOptions, Error, Grid, SolutionDescriptor};

fn to_py(err: Error) -> PyErr {
    let msg = format!("{}: {err}", err.kind());
    if err.is_validation() {
        PyValueError::new_err(msg)
    } else {
        PyArithmeticError::new_err(msg)
    }
}

/// Input parameters of the reduced problem.
#[pyclass(name = "ProblemParams", get_all, set_all, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams {
    m: f64,
    k: f64,
    chi1: f64,
    chi2: f64,
    omega1: f64,
    omega2: f64,
    xi1: f64,
    xi3: f64,
    xi4: f64,
    tau0: f64,
}

impl From<PyParams> for dualnls::ProblemParams {
    fn from(p: PyParams) -> Self {
        Self {
            m: p.m,
            k: p.k,
            chi1: p.chi1,
            chi2: p.chi2,
            omega1: p.omega1,
            omega2: p.omega2,
            xi1: p.xi1,
            xi3: p.xi3,
            xi4: p.xi4,
            tau0: p.tau0,
        }
    }
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (m, k, chi1, chi2, omega1, omega2, xi1, xi3, xi4, tau0))]
    #[allow(clippy::too_many_arguments)]
    fn new(m: f64, k: f64, chi1: f64, chi2: f64, omega1: f64, omega2: f64, xi1: f64, xi3: f64, xi4: f64, tau0: f64) -> Self {
        Self {
            m,
            k,
            chi1,
            chi2,
            omega1,
            omega2,
            xi1,
            xi3,
            xi4,
            tau0,
        }
    }

    /// Violated invariants as human-readable strings; empty when valid.
    fn validate(&self) -> Vec<String> {
        dualnls::validate(&(*self).into()).iter().map(|v| v.to_string()).collect()
    }

    /// Derived coefficients; `a` is complex.
    fn derive(&self) -> PyResult<BTreeMap<&'static str, Complex64>> {
        let d = dualnls::derive_coefficients(&(*self).into()).map_err(to_py)?;
        let r = |x: f64| Complex64::new(x, 0.0);
        Ok(BTreeMap::from([
            ("xi0", r(d.xi0)),
            ("xi2", r(d.xi2)),
            ("zeta0", r(d.zeta0)),
            ("tau1", r(d.tau1)),
            ("chi3", r(d.chi3)),
            ("omega3", r(d.omega3)),
            ("upsilon", r(d.upsilon)),
            ("a_squared", r(d.a_squared)),
            ("a", d.a_const),
        ]))
    }

    /// Normalized reduced-ODE identity residual at the given `Γ` samples.
    fn identity_residual(&self, gammas: Vec<f64>) -> PyResult<f64> {
        let p = (*self).into();
        let d = dualnls::derive_coefficients(&p).map_err(to_py)?;
        Ok(dualnls::ode_identity_residual(&p, &d, &gammas))
    }

    fn __repr__(&self) -> String {
        format!(
            "ProblemParams(m={}, k={}, chi1={}, chi2={}, omega1={}, omega2={}, xi1={}, xi3={}, xi4={}, tau0={})",
            self.m, self.k, self.chi1, self.chi2, self.omega1, self.omega2, self.xi1, self.xi3, self.xi4, self.tau0
        )
    }
}

/// All four roots of `Γ⁴ + c3Γ³ + c2Γ² + c1Γ + c0`.
#[pyfunction]
fn find_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<Complex64> {
    dualnls::find_roots(&dualnls::QuarticPoly::new(c3, c2, c1, c0)).to_vec()
}

/// Pattern name and root multiset (`None` for non-real roots).
#[pyfunction]
#[pyo3(signature = (roots, tol = DEFAULT_CLUSTER_TOL))]
fn classify_roots(roots: [Complex64; 4], tol: f64) -> PyResult<(String, Option<[f64; 4]>)> {
    let cls = dualnls::classify_roots(&roots, tol).map_err(to_py)?;
    Ok((cls.pattern.name().to_string(), cls.pattern.multiset()))
}

/// A constructed solution family.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    desc: SolutionDescriptor,
}

fn branch(sign: &str) -> PyResult<BranchSign> {
    match sign {
        "+" => Ok(BranchSign::Plus),
        "-" => Ok(BranchSign::Minus),
        _ => Err(PyValueError::new_err(format!("branch_sign must be '+' or '-', got {sign:?}"))),
    }
}

#[pymethods]
impl PySolution {
    /// Runs the full pipeline: derivation, roots, classification, family.
    #[staticmethod]
    #[pyo3(signature = (params, reduced = false, eta0 = 0.0, branch_sign = "+", cluster_tol = DEFAULT_CLUSTER_TOL))]
    fn from_params(params: PyParams, reduced: bool, eta0: f64, branch_sign: &str, cluster_tol: f64) -> PyResult<Self> {
        let pipe = Pipeline::new(&params.into(), cluster_tol).map_err(to_py)?;
        let opts = ConstructOptions {
            reduced,
            eta0,
            branch_sign: branch(branch_sign)?,
            ..Default::default()
        };
        Ok(Self {
            desc: pipe.solution(&opts).map_err(to_py)?,
        })
    }

    /// The descriptor behind one of the six caption parameter sets.
    #[staticmethod]
    fn figure(figure_id: u8) -> PyResult<Self> {
        Ok(Self {
            desc: figure_descriptor(figure_id, &RunOptions::default()).map_err(to_py)?,
        })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.desc.family.name()
    }

    #[getter]
    fn roots(&self) -> Vec<f64> {
        self.desc.roots.clone()
    }

    /// Flat description of every constant, as strings.
    fn describe(&self) -> BTreeMap<String, String> {
        self.desc.key_values().into_iter().collect()
    }

    /// Envelope `u(η)`.
    fn profile(&self, eta: f64) -> PyResult<Complex64> {
        self.desc.evaluate_profile(eta).map_err(to_py)
    }

    /// Field `q(x, y, t)`.
    fn field(&self, x: f64, y: f64, t: f64) -> PyResult<Complex64> {
        self.desc.evaluate_field(x, y, t).map_err(to_py)
    }

    /// Finite-difference PDE residual on a box grid.
    #[pyo3(signature = (x_range, y_range, t_range, counts, step = 0.05, stencil_order = 4, exclusion = dualnls::verify::DEFAULT_EXCLUSION))]
    #[allow(clippy::too_many_arguments)]
    fn pde_residual(
        &self,
        x_range: (f64, f64),
        y_range: (f64, f64),
        t_range: (f64, f64),
        counts: (usize, usize, usize),
        step: f64,
        stencil_order: u32,
        exclusion: f64,
    ) -> PyResult<BTreeMap<String, String>> {
        let grid = Grid {
            x_min: x_range.0,
            x_max: x_range.1,
            nx: counts.0,
            y_min: y_range.0,
            y_max: y_range.1,
            ny: counts.1,
            t_min: t_range.0,
            t_max: t_range.1,
            nt: counts.2,
        };
        let opts = PdeOptions {
            step,
            stencil_order,
            exclusion,
        };
        let report = dualnls::verify::pde_residual_with(&self.desc, &grid, &opts).map_err(to_py)?;
        Ok(report.key_values().into_iter().collect())
    }

    /// Largest deviation between the closed form and an adaptive integration
    /// of the profile ODE over `[a, b]`.
    #[pyo3(signature = (a, b, checkpoints = 100, model = "envelope", rtol = 1e-12))]
    fn shoot(&self, a: f64, b: f64, checkpoints: usize, model: &str, rtol: f64) -> PyResult<f64> {
        let model = match model {
            "envelope" => ShootModel::Envelope,
            "trial" => ShootModel::Trial,
            _ => return Err(PyValueError::new_err(format!("model must be 'envelope' or 'trial', got {model:?}"))),
        };
        let opts = ShootOptions {
            model,
            rtol,
            atol: rtol * 1e-2,
        };
        dualnls::ode_shoot_compare(&self.desc, (a, b), checkpoints, &opts).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Solution(family={}, roots={:?})", self.desc.family, self.desc.roots)
    }
}

#[pymodule]
#[pyo3(name = "dualnls")]
fn dualnls_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(find_roots, m)?)?;
    m.add_function(wrap_pyfunction!(classify_roots, m)?)?;
    Ok(())
}
