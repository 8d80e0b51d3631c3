//! Python bindings. Rationals cross the boundary as strings such as `"3/2"`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use steiner_core::geometry::SpaceDescriptor;
use steiner_core::l1l2::Surd;
use steiner_core::verifier::{self, Route, StarInstance, VerifyOptions};
use steiner_core::zspace::{self, ExtremalVariant, StarVerdict};
use steiner_core::{extremal, oracle, parens, Rational};

fn err(e: steiner_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_points(points: Vec<Vec<String>>) -> PyResult<Vec<Vec<Rational>>> {
    points
        .into_iter()
        .map(|p| p.iter().map(|s| s.parse::<Rational>().map_err(err)).collect())
        .collect()
}

fn parse_space(space: &str) -> PyResult<SpaceDescriptor> {
    space.parse().map_err(err)
}

fn parse_route(route: &str) -> PyResult<Route> {
    match route {
        "auto" => Ok(Route::Auto),
        "criterion" => Ok(Route::Criterion),
        "lp" => Ok(Route::Lp),
        other => Err(PyValueError::new_err(format!("route must be auto, criterion or lp, got {other:?}"))),
    }
}

#[pyclass(name = "SignedSet", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PySignedSet {
    inner: steiner_core::SignedSet,
}

#[pymethods]
impl PySignedSet {
    /// Positive and negative parts as 1-based indices over `[m]`.
    #[new]
    fn new(pos: Vec<usize>, neg: Vec<usize>, m: usize) -> PyResult<Self> {
        steiner_core::SignedSet::from_indices(&pos, &neg, m).map(|inner| PySignedSet { inner }).map_err(err)
    }

    /// Parses `+{1,2}-{3}`.
    #[staticmethod]
    fn parse(text: &str, m: usize) -> PyResult<Self> {
        steiner_core::SignedSet::parse(text, m).map(|inner| PySignedSet { inner }).map_err(err)
    }

    #[getter]
    fn pos(&self) -> Vec<usize> {
        self.inner.pos_indices()
    }

    #[getter]
    fn neg(&self) -> Vec<usize> {
        self.inner.neg_indices()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.ground()
    }

    fn negated(&self) -> Self {
        PySignedSet { inner: self.inner.negated() }
    }

    /// The point of norm one at the barycenter of the face.
    fn face_point(&self) -> Vec<String> {
        zspace::face_point(&self.inner).coords().iter().map(Rational::to_string).collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SignedSet({:?}, {:?}, {})", self.pos(), self.neg(), self.m())
    }
}

#[pyclass(name = "Verdict", frozen, get_all)]
struct PyVerdict {
    is_smt: bool,
    method: String,
    /// JSON text, or None for an SMT.
    witness: Option<String>,
}

#[pymethods]
impl PyVerdict {
    fn __bool__(&self) -> bool {
        self.is_smt
    }

    fn __repr__(&self) -> String {
        format!("Verdict(is_smt={}, method={:?})", self.is_smt, self.method)
    }
}

impl From<verifier::Verdict> for PyVerdict {
    fn from(v: verifier::Verdict) -> Self {
        let method = serde_json::to_value(v.method).ok().and_then(|m| m.as_str().map(str::to_owned)).unwrap_or_default();
        PyVerdict {
            is_smt: v.is_smt,
            method,
            witness: v.witness.map(|w| serde_json::to_string(&w).expect("witness serializes")),
        }
    }
}

fn instance(space: &str, points: Vec<Vec<String>>) -> PyResult<StarInstance> {
    StarInstance::from_rays(parse_space(space)?, parse_points(points)?).map_err(err)
}

/// Is the star from the origin to `points` an SMT of its center and endpoints?
#[pyfunction]
#[pyo3(signature = (space, points, route = "auto"))]
fn verify_node(space: &str, points: Vec<Vec<String>>, route: &str) -> PyResult<PyVerdict> {
    let opts = VerifyOptions { route: parse_route(route)?, ..VerifyOptions::default() };
    verifier::verify_node_star_with(&instance(space, points)?, &opts).map(PyVerdict::from).map_err(err)
}

/// Is the star an SMT of its endpoints alone?
#[pyfunction]
#[pyo3(signature = (space, points, route = "auto"))]
fn verify_steiner(space: &str, points: Vec<Vec<String>>, route: &str) -> PyResult<PyVerdict> {
    let opts = VerifyOptions { route: parse_route(route)?, ..VerifyOptions::default() };
    verifier::verify_steiner_star_with(&instance(space, points)?, &opts).map(PyVerdict::from).map_err(err)
}

#[pyfunction]
fn moore_check(space: &str, points: Vec<Vec<String>>) -> PyResult<bool> {
    verifier::moore_check(&parse_space(space)?, &parse_points(points)?).map_err(err)
}

/// None when the family passes, otherwise a violating quadruple of 0-based indices.
#[pyfunction]
fn star_criterion(sets: Vec<PySignedSet>) -> PyResult<Option<(usize, usize, usize, usize)>> {
    let xs: Vec<_> = sets.into_iter().map(|s| s.inner).collect();
    match zspace::star_criterion(&xs).map_err(err)? {
        StarVerdict::Smt => Ok(None),
        StarVerdict::NotSmt(w) => Ok(Some((w.a, w.b, w.c, w.d))),
    }
}

#[pyfunction]
fn max_degree(n: usize) -> PyResult<u128> {
    zspace::max_degree(n).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, variant = "low"))]
fn extremal_family(n: usize, variant: &str) -> PyResult<Vec<PySignedSet>> {
    let v: ExtremalVariant = variant.parse().map_err(err)?;
    let fam = zspace::extremal_family(n, v).map_err(err)?;
    Ok(fam.into_iter().map(|inner| PySignedSet { inner }).collect())
}

#[pyfunction]
fn antichain(n: usize) -> PyResult<Vec<Vec<String>>> {
    let pts = zspace::antichain_equilateral(n).map_err(err)?;
    Ok(pts.iter().map(|p| p.coords().iter().map(Rational::to_string).collect()).collect())
}

#[pyfunction]
fn count_parens(k: usize) -> PyResult<(u128, Option<u128>)> {
    let rooted = parens::count_rooted(k).map_err(err)?;
    let unrooted = if k >= 2 { Some(parens::count_unrooted(k).map_err(err)?) } else { None };
    Ok((rooted, unrooted))
}

#[pyfunction]
#[pyo3(signature = (k, unrooted = false))]
fn enumerate_parens(k: usize, unrooted: bool) -> PyResult<Vec<String>> {
    let labels = parens::labels(k);
    let trees = if unrooted { parens::enumerate_unrooted(&labels) } else { parens::enumerate_rooted(&labels) };
    Ok(trees.map_err(err)?.iter().map(|t| t.canonical_key()).collect())
}

/// `lam` is a rational or `a+b*sqrt(n)`.
#[pyfunction]
fn l1l2_check(n: usize, lam: &str) -> PyResult<bool> {
    let lam: Surd = lam.parse().map_err(err)?;
    steiner_core::l1l2::steiner_star_check(n, &lam).map_err(err)
}

/// Numerical SMT length and the topology attaining it.
#[pyfunction]
#[pyo3(signature = (space, terminals, seed = None))]
fn smt_length(space: &str, terminals: Vec<Vec<f64>>, seed: Option<u64>) -> PyResult<(f64, String)> {
    let mut opts = oracle::OracleOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    let (len, tree) = oracle::smt_length(&terminals, &parse_space(space)?, &opts).map_err(err)?;
    Ok((len, tree.topology))
}

#[pyfunction]
fn sperner_max(m: usize) -> PyResult<u128> {
    extremal::sperner_max(m).map_err(err)
}

#[pyfunction]
fn two_level_max(m: usize) -> PyResult<u128> {
    extremal::two_level_max(m).map_err(err)
}

#[pymodule]
fn steiner_local(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignedSet>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(verify_node, m)?)?;
    m.add_function(wrap_pyfunction!(verify_steiner, m)?)?;
    m.add_function(wrap_pyfunction!(moore_check, m)?)?;
    m.add_function(wrap_pyfunction!(star_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(max_degree, m)?)?;
    m.add_function(wrap_pyfunction!(extremal_family, m)?)?;
    m.add_function(wrap_pyfunction!(antichain, m)?)?;
    m.add_function(wrap_pyfunction!(count_parens, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_parens, m)?)?;
    m.add_function(wrap_pyfunction!(l1l2_check, m)?)?;
    m.add_function(wrap_pyfunction!(smt_length, m)?)?;
    m.add_function(wrap_pyfunction!(sperner_max, m)?)?;
    m.add_function(wrap_pyfunction!(two_level_max, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
