//! Python bindings: `ckforms.LieAlgebra`, `ckforms.sweep`, `ckforms.selftest`.
//!
//! Reports cross the boundary as plain dicts with the same layout as the CLI's JSON output.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use ckforms::identities::SuiteOptions;
use ckforms::killing::BUNDLE_ORDERING;
use ckforms::liealg::AlgebraInput;
use ckforms::report::{
    cmd_analyze, cmd_selftest, cmd_sweep, parse_axis, AlgebraSource, AnalyzeOptions, BackendChoice, CliError, Family,
    FamilySpec,
};
use ckforms::{Rational, Scalar, Tolerance};

create_exception!(ckforms, ParseError, PyValueError, "Malformed input.");
create_exception!(ckforms, ValidationError, PyValueError, "Input is well formed but not a valid metric Lie algebra.");

fn to_py(e: CliError) -> PyErr {
    match e {
        CliError::Parse(m) => ParseError::new_err(m),
        CliError::Validation(m) => ValidationError::new_err(m),
    }
}

fn options(backend: &str, tol: f64, matrices: bool) -> Result<AnalyzeOptions, CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Parse(format!("tol must be positive, got {tol}")));
    }
    Ok(AnalyzeOptions { backend: backend.parse::<BackendChoice>()?, tol: Tolerance::new(tol), matrices })
}

/// Scalar literal from an int, str, float or `fractions.Fraction`.
fn literal(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if v.is_instance_of::<pyo3::types::PyBool>() {
        return Err(ParseError::new_err("booleans are not scalars"));
    }
    Ok(v.str()?.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn family_source(family: Family, params: &[(&str, &Bound<'_, PyAny>)]) -> PyResult<LieAlgebra> {
    let mut lits = Vec::with_capacity(params.len());
    for (name, v) in params {
        lits.push((name.to_string(), literal(v)?));
    }
    let spec = FamilySpec { family, params: lits };
    // fail early on bad literals and parameter ranges
    if spec.params.iter().all(|(_, v)| ckforms::scalar::try_exact(v).is_some()) {
        spec.build::<Rational>().map_err(to_py)?;
    } else {
        spec.build::<f64>().map_err(to_py)?;
    }
    Ok(LieAlgebra { source: AlgebraSource::Family(spec) })
}

/// A four-dimensional metric Lie algebra on an orthonormal frame `e1..e4`.
#[pyclass(module = "ckforms", frozen)]
struct LieAlgebra {
    source: AlgebraSource,
}

#[pymethods]
impl LieAlgebra {
    #[staticmethod]
    fn abelian() -> PyResult<Self> {
        family_source(Family::Abelian, &[])
    }

    #[staticmethod]
    fn type2(c: &Bound<'_, PyAny>) -> PyResult<Self> {
        family_source(Family::Type2, &[("c", c)])
    }

    #[staticmethod]
    fn type3(alpha: &Bound<'_, PyAny>) -> PyResult<Self> {
        family_source(Family::Type3, &[("alpha", alpha)])
    }

    #[staticmethod]
    fn type4(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Self> {
        family_source(Family::Type4, &[("a", a), ("b", b)])
    }

    #[staticmethod]
    fn type6() -> PyResult<Self> {
        family_source(Family::Type6, &[])
    }

    #[staticmethod]
    fn gab(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Self> {
        family_source(Family::Gab, &[("a", a), ("b", b)])
    }

    /// Parses the JSON input schema used by `ckforms analyze <path>`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let source = AlgebraSource::from_json_text(text).map_err(to_py)?;
        if source.is_rational() {
            source.build::<Rational>().map_err(to_py)?;
        }
        Ok(LieAlgebra { source })
    }

    /// JSON in the input schema; exact inputs only.
    fn to_json(&self) -> PyResult<String> {
        let mla = self.source.build::<Rational>().map_err(to_py)?;
        Ok(serde_json::to_string(&AlgebraInput::from_algebra(&mla)).expect("input serializes"))
    }

    #[getter]
    fn label(&self) -> PyResult<String> {
        let mla = if self.source.is_rational() {
            self.source.build::<Rational>().map_err(to_py)?.label().to_string()
        } else {
            self.source.build::<f64>().map_err(to_py)?.label().to_string()
        };
        Ok(mla)
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.source.is_rational()
    }

    /// Nonzero brackets as `(i, j, [c1, c2, c3, c4])`, 1-based, components as strings.
    fn brackets(&self) -> PyResult<Vec<(usize, usize, Vec<String>)>> {
        fn list<S: Scalar>(src: &AlgebraSource) -> Result<Vec<(usize, usize, Vec<String>)>, CliError> {
            Ok(src
                .build::<S>()?
                .nonzero_brackets()
                .into_iter()
                .map(|(i, j, v)| (i + 1, j + 1, v.0.iter().map(ToString::to_string).collect()))
                .collect())
        }
        if self.source.is_rational() { list::<Rational>(&self.source) } else { list::<f64>(&self.source) }
            .map_err(to_py)
    }

    /// Triples where the Jacobi identity fails, with their defects.
    #[pyo3(signature = (tol = 1e-9))]
    fn jacobi_violations(&self, tol: f64) -> PyResult<Vec<String>> {
        let tol = Tolerance::new(tol);
        let v: Vec<String> = if self.source.is_rational() {
            let m = self.source.build::<Rational>().map_err(to_py)?;
            m.validate(&tol).iter().map(ToString::to_string).collect()
        } else {
            let m = self.source.build::<f64>().map_err(to_py)?;
            m.validate(&tol).iter().map(ToString::to_string).collect()
        };
        Ok(v)
    }

    /// Full classification report as a dict.
    #[pyo3(signature = (backend = "auto", tol = 1e-9, matrices = false))]
    fn analyze<'py>(&self, py: Python<'py>, backend: &str, tol: f64, matrices: bool) -> PyResult<Bound<'py, PyAny>> {
        let opts = options(backend, tol, matrices).map_err(to_py)?;
        let source = self.source.clone();
        let report = py.detach(move || cmd_analyze(&source, &opts)).map_err(to_py)?;
        json_to_py(py, &report.to_json())
    }

    /// `(dim CK+, dim CK-)`.
    #[pyo3(signature = (backend = "auto", tol = 1e-9))]
    fn ck_dims(&self, py: Python<'_>, backend: &str, tol: f64) -> PyResult<(usize, usize)> {
        let opts = options(backend, tol, false).map_err(to_py)?;
        let source = self.source.clone();
        let report = py.detach(move || cmd_analyze(&source, &opts)).map_err(to_py)?;
        Ok((report.ck_dims.plus, report.ck_dims.minus))
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("LieAlgebra({})", self.label()?))
    }
}

/// Analyzes `family` over a grid. `axes` maps each parameter name to a list of
/// values or to a string `"v1,v2,.."` / `"lo:step:hi"`.
#[pyfunction]
#[pyo3(signature = (family, axes, backend = "auto", tol = 1e-9))]
fn sweep<'py>(
    py: Python<'py>,
    family: &str,
    axes: &Bound<'py, PyDict>,
    backend: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let family: Family = family.parse().map_err(to_py)?;
    let opts = options(backend, tol, false).map_err(to_py)?;
    let mut grid = Vec::new();
    for name in family.parameters() {
        let v = axes.get_item(name)?.ok_or_else(|| ParseError::new_err(format!("missing axis `{name}`")))?;
        let values = if let Ok(list) = v.cast::<PyList>() {
            list.iter().map(|x| literal(&x)).collect::<PyResult<Vec<_>>>()?
        } else {
            parse_axis(&literal(&v)?).map_err(to_py)?
        };
        grid.push((name.to_string(), values));
    }
    for key in axes.keys() {
        let k: String = key.extract()?;
        if !family.parameters().contains(&k.as_str()) {
            return Err(ParseError::new_err(format!("family {} takes no `{k}`", family.name())));
        }
    }
    let table = py.detach(move || cmd_sweep(family, &grid, &opts));
    json_to_py(py, &table.to_json())
}

/// Runs the identity suites; returns `{"passed", "backend", "outcomes", "notes"}`.
#[pyfunction]
#[pyo3(signature = (trials = 25, seed = 7, flip_ricci_sign = false, backend = "rational"))]
fn selftest<'py>(
    py: Python<'py>,
    trials: usize,
    seed: u64,
    flip_ricci_sign: bool,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let choice: BackendChoice = backend.parse().map_err(to_py)?;
    let suite = SuiteOptions { trials, seed, flip_ricci_term: flip_ricci_sign };
    let summary = py.detach(move || cmd_selftest(choice, &suite, &Tolerance::default()));
    let out = json_to_py(py, &serde_json::to_string(&summary).expect("summary serializes"))?;
    out.set_item("passed", summary.passed())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "ckforms")]
fn ckforms_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<LieAlgebra>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("BUNDLE_ORDERING", BUNDLE_ORDERING)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_reject_bad_tolerance_and_backend() {
        assert!(options("auto", 0.0, false).is_err());
        assert!(options("auto", f64::NAN, false).is_err());
        assert!(matches!(options("exact", 1e-9, false), Err(CliError::Parse(_))));
        assert_eq!(options("float", 1e-6, true).unwrap().backend, BackendChoice::Float);
    }
}
