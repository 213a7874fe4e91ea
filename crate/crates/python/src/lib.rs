//! Python bindings for the rearrangement laboratory: sampled functions,
//! rearrangement profiles, Lorentz/Besov functionals, and inequality
//! checks. Exponents accept `float('inf')`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use verifylab::corpus::{self, FamilySpec, GeneratorId};
use verifylab::functionals::{self, BesovParams, LorentzExponents, NormAnchor};
use verifylab::inequality::{self, InequalityId, InequalityParams};
use verifylab::mesh::{build_grid, MeasureSpec, SampledFunction};
use verifylab::rearrange::{self, RearrangementProfile};
use verifylab::search::{self, SearchBudget};
use verifylab::tgrid;

fn err<T>(r: verifylab::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A compactly supported function sampled on a uniform grid.
#[pyclass]
struct Function {
    inner: SampledFunction,
}

#[pymethods]
impl Function {
    /// Generate a corpus-family function.
    #[staticmethod]
    #[pyo3(signature = (generator, theta, dim, half_width, points_per_axis, seed=0, measure="lebesgue"))]
    fn generate(
        generator: &str,
        theta: Vec<f64>,
        dim: usize,
        half_width: f64,
        points_per_axis: usize,
        seed: u64,
        measure: &str,
    ) -> PyResult<Self> {
        let gen: GeneratorId = err(generator.parse())?;
        let m: MeasureSpec = err(measure.parse())?;
        let grid = err(build_grid(dim, half_width, points_per_axis))?;
        Ok(Function { inner: err(corpus::generate(gen, &theta, seed, &grid, m))? })
    }

    /// Wrap raw cell values (lexicographic order, boundary layer zero).
    #[staticmethod]
    #[pyo3(signature = (values, dim, half_width, points_per_axis, measure="lebesgue"))]
    fn from_values(
        values: Vec<f64>,
        dim: usize,
        half_width: f64,
        points_per_axis: usize,
        measure: &str,
    ) -> PyResult<Self> {
        let m: MeasureSpec = err(measure.parse())?;
        let grid = err(build_grid(dim, half_width, points_per_axis))?;
        Ok(Function { inner: err(SampledFunction::new(grid, m, values))? })
    }

    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Self> {
        Ok(Function { inner: err(SampledFunction::load_csv(std::path::Path::new(path)))? })
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        err(self.inner.save_csv(std::path::Path::new(path)))
    }

    #[pyo3(signature = (absolute=true))]
    fn integrate(&self, absolute: bool) -> f64 {
        if absolute {
            self.inner.integrate_abs()
        } else {
            self.inner.integrate_signed()
        }
    }

    fn support_measure(&self) -> f64 {
        self.inner.support_measure()
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn scale(&self, c: f64) -> PyResult<Function> {
        Ok(Function { inner: err(self.inner.map_values(|_, v| c * v))? })
    }

    /// L1 norm of the centered-difference gradient magnitude.
    fn gradient_l1(&self) -> PyResult<f64> {
        let g = err(verifylab::calculus::gradient_magnitude(&self.inner))?;
        Ok(g.magnitude.integrate_abs())
    }

    /// Distribution function at level s.
    fn distribution(&self, s: f64) -> PyResult<f64> {
        err(rearrange::distribution(&self.inner, s))
    }

    /// Modulus of continuity in the L^p anchor at width t.
    fn modulus(&self, p: f64, t: f64) -> PyResult<f64> {
        err(functionals::modulus(&self.inner, &NormAnchor::Lp(p), t))
    }

    /// Besov seminorm with L^p anchor (r = p).
    fn besov(&self, alpha: f64, p: f64, q: f64) -> PyResult<f64> {
        let params = err(BesovParams::new(alpha, p, p, q))?;
        err(functionals::besov_seminorm(&self.inner, &params))
    }

    /// Tabulate the rearrangement profile on a log-spaced grid.
    #[pyo3(signature = (t_min=1e-4, t_max=1e4, points=256))]
    fn rearrange(&self, t_min: f64, t_max: f64, points: usize) -> PyResult<Profile> {
        let t = err(tgrid::log_spaced(t_min, t_max, points))?;
        Ok(Profile { inner: err(rearrange::rearrange(&self.inner, &t))? })
    }
}

/// f*, f**, and the oscillation on a log-spaced t grid.
#[pyclass]
struct Profile {
    inner: RearrangementProfile,
}

#[pymethods]
impl Profile {
    fn t(&self) -> Vec<f64> {
        self.inner.t_grid.clone()
    }

    fn f_star(&self) -> Vec<f64> {
        self.inner.f_star.clone()
    }

    fn f_star_star(&self) -> Vec<f64> {
        self.inner.f_star_star.clone()
    }

    fn osc(&self) -> Vec<f64> {
        self.inner.osc.clone()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn supp(&self) -> f64 {
        self.inner.supp
    }

    #[getter]
    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm
    }

    /// Lorentz norm; p = inf gives the oscillation form.
    fn lorentz_norm(&self, p: f64, q: f64) -> PyResult<f64> {
        err(functionals::lorentz_norm(&self.inner, err(LorentzExponents::new(p, q))?))
    }

    fn llogl(&self, omega: f64) -> PyResult<f64> {
        err(functionals::llogl_norm(&self.inner, omega))
    }

    fn hbw(&self, omega: f64, n: usize) -> PyResult<f64> {
        err(functionals::hbw_functional(&self.inner, omega, n))
    }

    fn normalized_linf_q(&self, omega: f64, q: f64) -> PyResult<f64> {
        err(functionals::normalized_linf_q(&self.inner, omega, q))
    }

    /// (tail_integral, product_rule, parts_formula) relative residuals.
    fn identity_residuals(&self) -> PyResult<(f64, f64, f64)> {
        let r = err(rearrange::identity_residuals(&self.inner))?;
        Ok((r.tail_integral, r.product_rule, r.parts_formula))
    }
}

fn params_from(
    n: usize,
    k: usize,
    p: f64,
    q: f64,
    alpha: Option<f64>,
    r: Option<f64>,
) -> InequalityParams {
    let mut pr = InequalityParams::new(n, k, p, q);
    pr.alpha = alpha;
    pr.r = r;
    pr
}

/// Gaussian isoperimetric profile I(t) = phi(N^{-1}(t)).
#[pyfunction]
fn gaussian_profile(t: f64) -> PyResult<f64> {
    err(inequality::gaussian_profile(t))
}

/// Admissibility of (n, k, p, q[, alpha, r]) for an inequality id.
#[pyfunction]
#[pyo3(signature = (id, n, k=1, p=1.0, q=1.0, alpha=None, r=None))]
fn admissible(id: &str, n: usize, k: usize, p: f64, q: f64, alpha: Option<f64>, r: Option<f64>) -> PyResult<bool> {
    let id: InequalityId = err(id.parse())?;
    Ok(inequality::admissible(id, &params_from(n, k, p, q, alpha, r)))
}

/// Evaluate one inequality check; returns a dict with lhs, rhs, ratio, pass.
#[pyfunction]
#[pyo3(signature = (id, f, n, k=1, p=1.0, q=1.0, alpha=None, r=None, budget=f64::INFINITY))]
#[allow(clippy::too_many_arguments)]
fn evaluate_check(
    py: Python<'_>,
    id: &str,
    f: &Function,
    n: usize,
    k: usize,
    p: f64,
    q: f64,
    alpha: Option<f64>,
    r: Option<f64>,
    budget: f64,
) -> PyResult<Py<PyDict>> {
    let id: InequalityId = err(id.parse())?;
    let params = params_from(n, k, p, q, alpha, r);
    let result = err(inequality::evaluate_check(id, &f.inner, "py", &params, budget))?;
    let d = PyDict::new(py);
    d.set_item("id", result.id.as_str())?;
    d.set_item("lhs", result.lhs)?;
    d.set_item("rhs", result.rhs)?;
    d.set_item("ratio", result.ratio)?;
    d.set_item("budget", result.budget)?;
    d.set_item("pass", result.pass)?;
    Ok(d.into())
}

/// Random-search + refinement estimate of the best ratio over a family.
#[pyfunction]
#[pyo3(signature = (id, family, bounds, n, seed=0, samples=40, refine=6, dim_points=None, half_width=None))]
#[allow(clippy::too_many_arguments)]
fn estimate_constant(
    py: Python<'_>,
    id: &str,
    family: &str,
    bounds: Vec<(f64, f64)>,
    n: usize,
    seed: u64,
    samples: usize,
    refine: usize,
    dim_points: Option<usize>,
    half_width: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let id: InequalityId = err(id.parse())?;
    let generator: GeneratorId = err(family.parse())?;
    let measure = if id == InequalityId::V6Gauss {
        MeasureSpec::Gaussian
    } else {
        MeasureSpec::Lebesgue
    };
    let l = half_width.unwrap_or(if measure == MeasureSpec::Gaussian { 8.0 } else { 2.0 });
    let m = dim_points.unwrap_or(if n == 1 { 2001 } else { 201 });
    let grid = err(build_grid(n, l, m))?;
    let spec = FamilySpec { generator, bounds, seed };
    let budget = SearchBudget { random_samples: samples, refine_steps: refine, step_shrink: 0.5, seed };
    let params = InequalityParams::new(n, 1, 1.0, 1.0);
    let est = err(search::estimate_constant(id, &spec, &params, &budget, &grid, measure))?;
    let d = PyDict::new(py);
    d.set_item("id", est.id.as_str())?;
    d.set_item("best_ratio", est.best_ratio)?;
    d.set_item("argmax_theta", est.argmax_theta)?;
    d.set_item("trace_len", est.trace.len())?;
    Ok(d.into())
}

#[pymodule]
fn verifylab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Function>()?;
    m.add_class::<Profile>()?;
    m.add_function(wrap_pyfunction!(gaussian_profile, m)?)?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_check, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_constant, m)?)?;
    Ok(())
}
