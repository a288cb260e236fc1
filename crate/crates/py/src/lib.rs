//! Python bindings: finite categories, globular sets, free strict
//! n-categories, monoid presentations, monad law checks, fibration checks
//! and the command line entry point.

use multicat::base_kernel::{categories_isomorphic, plus_construction, FiniteCategory, GlobMap, GlobularSet};
use multicat::coequaliser::{algebra_coequaliser, presentation_pair};
use multicat::contractibility::{generators, recursive_check, trivial_fibration_check, ClassKind};
use multicat::formats::{self, Input};
use multicat::graph_monad::{check_monad_laws, free_ncat};
use multicat::term::{atom, int, Term};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::collections::BTreeMap;

fn err(e: multicat::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Names that read as integers become integer terms, as in the text formats.
fn name(s: &str) -> Term {
    s.parse::<i64>().map(int).unwrap_or_else(|_| atom(s))
}

fn loads<'py>(py: Python<'py>, j: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (j.to_string(),))
}

fn parse_as(text: &str, kind: &str) -> PyResult<Input> {
    let x = formats::parse(text).map_err(err)?;
    if x.kind() != kind {
        return Err(PyValueError::new_err(format!("expected a {kind}, got a {}", x.kind())));
    }
    Ok(x)
}

fn class_kind(truncated: bool) -> ClassKind {
    if truncated {
        ClassKind::Truncated
    } else {
        ClassKind::Plain
    }
}

#[pyclass(name = "Category", module = "multicat_py", frozen, skip_from_py_object)]
struct PyCategory {
    inner: FiniteCategory,
}

#[pymethods]
impl PyCategory {
    /// Reads the category text format or its JSON form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        match parse_as(text, "category")? {
            Input::Category(c) => Ok(PyCategory { inner: c }),
            _ => unreachable!(),
        }
    }

    #[getter]
    fn objects(&self) -> Vec<String> {
        self.inner.objects.iter().map(|o| o.to_string()).collect()
    }

    /// `(name, source, target)` for every arrow, identities included.
    #[getter]
    fn arrows(&self) -> Vec<(String, String, String)> {
        self.inner.arrows.iter().map(|a| (a.id.to_string(), a.source.to_string(), a.target.to_string())).collect()
    }

    /// The composite `g . f`, or None when they are not composable.
    fn compose(&self, g: &str, f: &str) -> Option<String> {
        self.inner.comp(&name(g), &name(f)).map(|t| t.to_string())
    }

    fn product(&self, other: &PyCategory) -> PyCategory {
        PyCategory { inner: self.inner.product(&other.inner) }
    }

    /// The category with a new terminal object adjoined.
    fn plus(&self) -> PyCategory {
        PyCategory { inner: plus_construction(&self.inner) }
    }

    fn isomorphic(&self, other: &PyCategory) -> bool {
        categories_isomorphic(&self.inner, &other.inner)
    }

    fn to_text(&self) -> PyResult<String> {
        formats::to_text(&Input::Category(self.inner.clone())).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        loads(py, &formats::to_json(&Input::Category(self.inner.clone())))
    }

    fn __repr__(&self) -> String {
        format!("Category({} objects, {} arrows)", self.inner.objects.len(), self.inner.arrows.len())
    }
}

#[pyclass(name = "GlobularSet", module = "multicat_py", frozen, skip_from_py_object)]
struct PyGlobularSet {
    inner: GlobularSet,
}

#[pymethods]
impl PyGlobularSet {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        match parse_as(text, "globular")? {
            Input::Globular(g) => Ok(PyGlobularSet { inner: g }),
            _ => unreachable!(),
        }
    }

    /// The `k`-globe as a `dim`-globular set.
    #[staticmethod]
    fn globe(dim: usize, k: usize) -> PyResult<Self> {
        if k > dim {
            return Err(PyValueError::new_err(format!("a {k}-globe does not fit in dimension {dim}")));
        }
        Ok(PyGlobularSet { inner: GlobularSet::globe(dim, k) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Number of cells in each dimension.
    fn counts(&self) -> Vec<usize> {
        self.inner.counts()
    }

    fn cells(&self, k: usize) -> Vec<String> {
        self.inner.cells.get(k).map(|cs| cs.iter().map(|c| c.to_string()).collect()).unwrap_or_default()
    }

    /// Cells of the free strict `n`-category up to rank `bound`, with the
    /// per-dimension counts and the number of cells cut off by the bound.
    #[pyo3(signature = (bound = 3))]
    fn free_ncat<'py>(&self, py: Python<'py>, bound: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = free_ncat(self.inner.dim, &self.inner.to_graph(), bound).map_err(err)?;
        loads(py, &serde_json::to_value(&r).expect("serialisable"))
    }

    fn to_text(&self) -> PyResult<String> {
        formats::to_text(&Input::Globular(self.inner.clone())).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        loads(py, &formats::to_json(&Input::Globular(self.inner.clone())))
    }

    fn __repr__(&self) -> String {
        format!("GlobularSet(dim={}, counts={:?})", self.inner.dim, self.inner.counts())
    }
}

/// Parses any supported input and returns its JSON form.
#[pyfunction]
fn parse<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    loads(py, &formats::to_json(&formats::parse(text).map_err(err)?))
}

/// The monoid presented by generators and relations `lhs = rhs`, as its
/// size, its elements (words of normal forms) and whether the quotient was
/// certified stable within the bound.
#[pyfunction]
#[pyo3(signature = (generators, relations, bound = 5))]
fn coequalise<'py>(
    py: Python<'py>,
    generators: Vec<String>,
    relations: Vec<(Vec<String>, Vec<String>)>,
    bound: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let gens: Vec<Term> = generators.iter().map(|g| name(g)).collect();
    let word = |w: &[String]| w.iter().map(|x| name(x)).collect::<Vec<_>>();
    let rels: Vec<(Vec<Term>, Vec<Term>)> = relations.iter().map(|(l, r)| (word(l), word(r))).collect();
    let c = algebra_coequaliser(&presentation_pair(&gens, &rels), None, bound).map_err(err)?;
    let elements: Vec<Vec<String>> = c
        .carrier
        .iter()
        .map(|e| multicat::enriched_graph::components(e).iter().map(|x| x.to_string()).collect())
        .collect();
    let j = serde_json::json!({
        "size": c.len(),
        "elements": elements,
        "certified": c.certificate.certified(),
        "certificate": c.certificate,
    });
    loads(py, &j)
}

/// Checks the unit and associativity laws of a named monad on a globular
/// set (`free-category`, `ncat:N`, `identity:L`).
#[pyfunction]
#[pyo3(signature = (monad, x, bound = 3))]
fn check_monad<'py>(py: Python<'py>, monad: &str, x: &PyGlobularSet, bound: usize) -> PyResult<Bound<'py, PyAny>> {
    let t = multicat::cli::monad_spec(monad).map_err(err)?;
    let r = check_monad_laws(t.as_ref(), &x.inner.to_graph(), bound);
    let j = serde_json::json!({"passed": r.passed(), "checks": r.checks});
    loads(py, &j)
}

/// Whether `f : x → y` lifts against the boundary inclusions up to the
/// dimension of its sets. `mapping` has one dict of cell names per
/// dimension. Returns the exhaustive and the recursive verdicts.
#[pyfunction]
#[pyo3(signature = (x, y, mapping, truncated = false))]
fn trivial_fibration(x: &PyGlobularSet, y: &PyGlobularSet, mapping: Vec<BTreeMap<String, String>>, truncated: bool) -> PyResult<(bool, bool)> {
    let (x, y) = (&x.inner, &y.inner);
    let dim = x.dim.max(y.dim);
    let mut maps = vec![BTreeMap::new(); x.dim + 1];
    for (k, m) in mapping.iter().enumerate() {
        if k > x.dim {
            return Err(PyValueError::new_err(format!("mapping has dimension {k} but the domain stops at {}", x.dim)));
        }
        maps[k] = m.iter().map(|(a, b)| (name(a), name(b))).collect();
    }
    let f = GlobMap { maps };
    f.validate(x, y).map_err(err)?;
    let kind = class_kind(truncated);
    let exhaustive = trivial_fibration_check(&f, x, y, &generators(dim, kind, dim)).passed;
    let recursive = recursive_check(&f, x, y, kind, dim).passed;
    Ok((exhaustive, recursive))
}

/// Runs the command line with `args` (without the program name) and
/// returns `(exit code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    multicat::cli::run(std::iter::once("multicat".to_string()).chain(args))
}

#[pymodule]
fn multicat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCategory>()?;
    m.add_class::<PyGlobularSet>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(coequalise, m)?)?;
    m.add_function(wrap_pyfunction!(check_monad, m)?)?;
    m.add_function(wrap_pyfunction!(trivial_fibration, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
