//! Python bindings for the dilation-bound library.
//!
//! Matrices cross the boundary as nested lists of Python complex
//! numbers (row-major) and scalar polynomials as `(zdeg, wdeg, coeff)`
//! term triples. Chain reports are returned as the same JSON payload
//! the command-line tool writes, so Python consumers can `json.loads`
//! them. All entry points run with the default tolerance set; JSON
//! files and the CLI remain the interface for tolerance overrides.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ando_lab_core::bounds::{self, ChainConfig};
use ando_lab_core::cmatrix::{self, CMatrix};
use ando_lab_core::contraction::{self, CommutingPair, PartClass, RowContraction};
use ando_lab_core::dilation::{self, ExtensionMode};
use ando_lab_core::error::Error;
use ando_lab_core::polynomial::{self, BiTerm, BivariatePolyMatrix};
use ando_lab_core::report::{self, ChainRunReport};
use ando_lab_core::{model, Tolerances};

type PyMatrix = Vec<Vec<Complex64>>;
type PyTerms = Vec<(usize, usize, Complex64)>;

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

/// Domain validation errors become `ValueError`; numerical failures
/// (conditioning, certificate violations) become `RuntimeError`.
fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::ShapeMismatch(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_cmatrix(rows: &PyMatrix) -> PyResult<CMatrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(PyValueError::new_err("matrix must be non-empty"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    let mut m = cmatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

fn from_cmatrix(m: &CMatrix) -> PyMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn scalar_poly(terms: &PyTerms) -> PyResult<BivariatePolyMatrix> {
    let terms = terms
        .iter()
        .map(|&(zdeg, wdeg, coeff)| BiTerm { zdeg, wdeg, coeff })
        .collect();
    BivariatePolyMatrix::scalar(terms).map_err(to_py_err)
}

fn pair_from(t1: &PyMatrix, t2: &PyMatrix, tol: &Tolerances) -> PyResult<CommutingPair> {
    let r1 = RowContraction::single(to_cmatrix(t1)?, tol).map_err(to_py_err)?;
    let r2 = RowContraction::single(to_cmatrix(t2)?, tol).map_err(to_py_err)?;
    CommutingPair::new(r1, r2, tol).map_err(to_py_err)
}

fn class_name(c: PartClass) -> &'static str {
    match c {
        PartClass::Unitary => "unitary",
        PartClass::Cnu => "cnu",
    }
}

// ---------------------------------------------------------------------------
// Linear-algebra and polynomial helpers
// ---------------------------------------------------------------------------

/// Largest singular value of a complex matrix.
#[pyfunction]
fn operator_norm(m: PyMatrix) -> PyResult<f64> {
    cmatrix::operator_norm(&to_cmatrix(&m)?).map_err(to_py_err)
}

/// Largest eigenvalue modulus of a square complex matrix.
#[pyfunction]
fn spectral_radius(m: PyMatrix) -> PyResult<f64> {
    cmatrix::spectral_radius(&to_cmatrix(&m)?).map_err(to_py_err)
}

/// Singular values in descending order.
#[pyfunction]
fn singular_values(m: PyMatrix) -> PyResult<Vec<f64>> {
    cmatrix::singular_values(&to_cmatrix(&m)?).map_err(to_py_err)
}

/// Roots of the minimal polynomial with multiplicities, as
/// `[(root, multiplicity), ...]` in stored order.
#[pyfunction]
fn minimal_polynomial(m: PyMatrix) -> PyResult<Vec<(Complex64, usize)>> {
    let data = model::minimal_polynomial(&to_cmatrix(&m)?, &Tolerances::default())
        .map_err(to_py_err)?;
    Ok(data.roots().to_vec())
}

/// Certified bracket `(lo, hi)` for the sup of a scalar polynomial on
/// the unit torus: `lo` is the exact grid maximum, `hi` adds the
/// smoothness correction.
#[pyfunction]
#[pyo3(signature = (terms, grid = 2048))]
fn torus_sup_norm(terms: PyTerms, grid: usize) -> PyResult<(f64, f64)> {
    let p = scalar_poly(&terms)?;
    let bracket = polynomial::torus_sup_norm(&p, grid).map_err(to_py_err)?;
    Ok((bracket.lo, bracket.hi))
}

/// Coefficient bound on the sup deviation of the degree-`m` Fejér
/// smoothing from the polynomial itself.
#[pyfunction]
fn fejer_deviation_bound(terms: PyTerms, m: usize) -> PyResult<f64> {
    Ok(polynomial::fejer_deviation_bound(&scalar_poly(&terms)?, m))
}

/// Four-way joint splitting of a commuting pair into
/// (unitary/unitary, unitary/cnu, cnu/unitary, cnu/cnu) blocks,
/// returned as `[(class1, class2, dim), ...]` in that order.
#[pyfunction]
fn structure_blocks(t1: PyMatrix, t2: PyMatrix) -> PyResult<Vec<(String, String, usize)>> {
    let tol = Tolerances::default();
    let pair = pair_from(&t1, &t2, &tol)?;
    let dec = contraction::structure_decomposition(&pair, &tol).map_err(to_py_err)?;
    Ok(dec
        .blocks
        .iter()
        .map(|b| (class_name(b.class1).into(), class_name(b.class2).into(), b.dim()))
        .collect())
}

// ---------------------------------------------------------------------------
// Model space
// ---------------------------------------------------------------------------

/// Finite model space of the minimal polynomial of a contraction.
///
/// Usage from Python:
///
///     ms = ando_lab.ModelSpace([[0.5, 0.1], [0.0, -0.25]])
///     ms.dim, ms.roots(), ms.compressed_shift()
#[pyclass(frozen)]
struct ModelSpace {
    inner: model::ModelSpace,
}

#[pymethods]
impl ModelSpace {
    /// Builds the model space for the minimal polynomial of `t`.
    #[new]
    fn new(t: PyMatrix) -> PyResult<Self> {
        let tol = Tolerances::default();
        let data = model::minimal_polynomial(&to_cmatrix(&t)?, &tol).map_err(to_py_err)?;
        let inner = model::build_model_space(&data, &tol).map_err(to_py_err)?;
        Ok(ModelSpace { inner })
    }

    /// Model dimension (degree of the Blaschke product).
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// True when a root sits close enough to the circle that the Gram
    /// conditioning degrades and certificates are advisory.
    #[getter]
    fn ill_conditioned(&self) -> bool {
        self.inner.ill_conditioned
    }

    /// Blaschke roots with multiplicities.
    fn roots(&self) -> Vec<(Complex64, usize)> {
        self.inner.blaschke.roots().to_vec()
    }

    /// Compressed shift on the orthonormalized model basis.
    fn compressed_shift(&self) -> PyMatrix {
        from_cmatrix(&self.inner.b)
    }

    /// Exact Gram matrix of the kernel-derivative basis.
    fn gram(&self) -> PyMatrix {
        from_cmatrix(&self.inner.gram)
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelSpace(dim={}, roots={}, ill_conditioned={})",
            self.inner.dim(),
            self.inner.blaschke.roots().len(),
            self.inner.ill_conditioned
        )
    }
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Model-based norm bound minimized over unitary extensions.
#[pyclass(frozen, get_all)]
struct Am3Bound {
    /// Minimum over the canonical and all sampled extensions.
    value: f64,
    /// Bound from the deterministic extension.
    canonical: f64,
    /// `(seed, bound)` per sampled extension.
    sampled: Vec<(u64, f64)>,
    /// Conditioning caveat: the value is still a bound, but advisory.
    flagged: bool,
}

#[pymethods]
impl Am3Bound {
    fn __repr__(&self) -> String {
        format!(
            "Am3Bound(value={}, canonical={}, samples={}, flagged={})",
            self.value,
            self.canonical,
            self.sampled.len(),
            self.flagged
        )
    }
}

/// Model-based bound for a commuting pair with `T1` completely
/// non-unitary, minimized over `samples` sampled unitary extensions in
/// addition to the canonical one.
#[pyfunction]
#[pyo3(signature = (t1, t2, terms, samples = 8, seed = 0))]
fn bound_am3(t1: PyMatrix, t2: PyMatrix, terms: PyTerms, samples: usize, seed: u64) -> PyResult<Am3Bound> {
    let tol = Tolerances::default();
    let pair = pair_from(&t1, &t2, &tol)?;
    let p = scalar_poly(&terms)?;
    let data = bounds::bound_am3(&pair, &p, samples, seed, &tol).map_err(to_py_err)?;
    Ok(Am3Bound {
        value: data.value,
        canonical: data.canonical,
        sampled: data.sampled,
        flagged: data.flagged,
    })
}

/// Exact bound for a pair of commuting unitaries: returns
/// `(joint_spectrum_max, direct_norm)`; the two agree within 1e-10 or
/// the call fails.
#[pyfunction]
fn bound_two_unitary_exact(t1: PyMatrix, t2: PyMatrix, terms: PyTerms) -> PyResult<(f64, f64)> {
    let tol = Tolerances::default();
    let pair = pair_from(&t1, &t2, &tol)?;
    let p = scalar_poly(&terms)?;
    let b = bounds::bound_two_unitary_exact(&pair, &p, &tol).map_err(to_py_err)?;
    Ok((b.value, b.direct))
}

/// Runs the full bound chain and returns the report as the same JSON
/// payload the command-line tool writes (schema-versioned envelope).
#[pyfunction]
#[pyo3(signature = (t1, t2, terms, grid = 2048, samples = 16, seed = 0, chain_tol = 1e-7))]
fn verify_chain_json(
    t1: PyMatrix,
    t2: PyMatrix,
    terms: PyTerms,
    grid: usize,
    samples: usize,
    seed: u64,
    chain_tol: f64,
) -> PyResult<String> {
    let tol = Tolerances::default();
    let pair = pair_from(&t1, &t2, &tol)?;
    let p = scalar_poly(&terms)?;
    let config = ChainConfig { samples, seed, grid, chain_tol };
    let bounds = bounds::verify_chain(&pair, &p, &config, &tol).map_err(to_py_err)?;
    let envelope = report::envelope("python verify-chain", ChainRunReport { config, bounds });
    serde_json::to_string_pretty(&envelope).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

// ---------------------------------------------------------------------------
// Dilations and lifting
// ---------------------------------------------------------------------------

/// A certified dilation pair `(B1 x I, phi(B1))` on the model
/// ampliation, together with its isometric kernel.
#[pyclass(frozen)]
struct Dilation {
    inner: dilation::AndoDilation,
}

#[pymethods]
impl Dilation {
    /// Residual of `K* K = I`.
    #[getter]
    fn kernel_isometry(&self) -> f64 {
        self.inner.certificates.kernel_isometry
    }

    /// Residual of the `T1` adjoint intertwining.
    #[getter]
    fn intertwine_t1(&self) -> f64 {
        self.inner.certificates.intertwine_t1
    }

    /// Residual of the `T2` adjoint intertwining.
    #[getter]
    fn intertwine_t2(&self) -> f64 {
        self.inner.certificates.intertwine_t2
    }

    /// Commutator norm of the dilation pair.
    #[getter]
    fn commutation(&self) -> f64 {
        self.inner.certificates.commutation
    }

    /// Operator norm of `phi(B1)` (contractive up to certificate slack).
    #[getter]
    fn transfer_norm(&self) -> f64 {
        self.inner.certificates.transfer_norm
    }

    /// Dimension of the underlying model space.
    #[getter]
    fn model_dim(&self) -> usize {
        self.inner.model.dim()
    }

    /// The isometric kernel, `(N * d1) x dim`.
    fn kernel(&self) -> PyMatrix {
        from_cmatrix(&self.inner.kernel)
    }

    /// First dilation operator `B1 x I`.
    fn v1(&self) -> PyMatrix {
        from_cmatrix(&self.inner.v1)
    }

    /// Second dilation operator `phi(B1)`.
    fn v2(&self) -> PyMatrix {
        from_cmatrix(&self.inner.v2)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dilation(model_dim={}, kernel_isometry={:.3e}, commutation={:.3e})",
            self.inner.model.dim(),
            self.inner.certificates.kernel_isometry,
            self.inner.certificates.commutation
        )
    }
}

/// Builds the certified dilation pair for a commuting pair of
/// contraction matrices with `T1` completely non-unitary. Pass a seed
/// to replace the canonical unitary extension with a sampled one.
#[pyfunction]
#[pyo3(signature = (t1, t2, seed = None))]
fn ando_dilation(t1: PyMatrix, t2: PyMatrix, seed: Option<u64>) -> PyResult<Dilation> {
    let tol = Tolerances::default();
    let pair = pair_from(&t1, &t2, &tol)?;
    let mode = match seed {
        Some(s) => ExtensionMode::Sampled(s),
        None => ExtensionMode::Canonical,
    };
    let inner = dilation::ando_dilation_pair(&pair, mode, &tol).map_err(to_py_err)?;
    Ok(Dilation { inner })
}

/// A commutant lift: the interpolating symbol `Psi` with
/// `‖Psi‖ = ‖A‖` and its certificates.
#[pyclass(frozen)]
struct Lift {
    inner: dilation::CommutantLift,
}

#[pymethods]
impl Lift {
    /// `‖A‖`; zero for the zero operator.
    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale
    }

    /// Largest `‖Psi(z)‖` over the boundary sampling grid.
    #[getter]
    fn grid_norm(&self) -> f64 {
        self.inner.grid_norm
    }

    /// Certified two-sided estimate of `‖Psi‖`, equal to `‖A‖` in
    /// exact arithmetic.
    #[getter]
    fn certified_norm(&self) -> f64 {
        self.inner.certified_norm
    }

    /// Residual of the interpolation identity on the model space.
    #[getter]
    fn interpolation_residual(&self) -> f64 {
        self.inner.interpolation_residual
    }

    /// Evaluates the symbol `Psi(z)` inside the disc.
    fn eval(&self, z: Complex64) -> PyResult<PyMatrix> {
        let m = self.inner.eval(z, &Tolerances::default()).map_err(to_py_err)?;
        Ok(from_cmatrix(&m))
    }

    fn __repr__(&self) -> String {
        format!(
            "Lift(certified_norm={}, interpolation_residual={:.3e})",
            self.inner.certified_norm, self.inner.interpolation_residual
        )
    }
}

/// Lifts an operator `A` in the commutant relation `T A = A T'` to an
/// analytic symbol of the same norm interpolating `A` on the joint
/// model space.
#[pyfunction]
fn commutant_lift(t: PyMatrix, tp: PyMatrix, a: PyMatrix) -> PyResult<Lift> {
    let tol = Tolerances::default();
    let inner = dilation::commutant_lift(&to_cmatrix(&t)?, &to_cmatrix(&tp)?, &to_cmatrix(&a)?, &tol)
        .map_err(to_py_err)?;
    Ok(Lift { inner })
}

// ---------------------------------------------------------------------------
// Module
// ---------------------------------------------------------------------------

#[pymodule]
fn ando_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(operator_norm, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_radius, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(torus_sup_norm, m)?)?;
    m.add_function(wrap_pyfunction!(fejer_deviation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(structure_blocks, m)?)?;
    m.add_function(wrap_pyfunction!(bound_am3, m)?)?;
    m.add_function(wrap_pyfunction!(bound_two_unitary_exact, m)?)?;
    m.add_function(wrap_pyfunction!(verify_chain_json, m)?)?;
    m.add_function(wrap_pyfunction!(ando_dilation, m)?)?;
    m.add_function(wrap_pyfunction!(commutant_lift, m)?)?;
    m.add_class::<ModelSpace>()?;
    m.add_class::<Am3Bound>()?;
    m.add_class::<Dilation>()?;
    m.add_class::<Lift>()?;
    Ok(())
}
