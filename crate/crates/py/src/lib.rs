//! Python bindings for the DG-algebra verification engine: build graded
//! algebras and maps, compute cohomology tables on finite windows, and run
//! the theorem-level verdict pipelines or whole scenario files.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dgcheck::cdga::{AlgebraMap, DGAlgebra, GeneratorSpec};
use dgcheck::derived::{diagonal_retraction, koszul};
use dgcheck::error::DgError;
use dgcheck::exactla::FieldSpec;
use dgcheck::scenario::{
    parse_element, parse_scenario, print_scenario, render_structured, render_text, run,
};
use dgcheck::strata::{compile_algebra, CohomologyTable, Window};
use dgcheck::verdicts::{
    self, is_perfect_diagonal, is_quasi_iso_alg, is_regular_sequence, rigid_module,
    verify_flathz, verify_lci, verify_smoothness_equivalence, verify_vdb, VdbModule,
};

fn err(e: DgError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_field(s: &str) -> PyResult<FieldSpec> {
    match s {
        "q" | "Q" => Ok(FieldSpec::Q),
        other => match other.strip_prefix("fp:") {
            Some(p) => {
                let p: u64 = p
                    .parse()
                    .map_err(|_| PyValueError::new_err(format!("bad prime '{p}'")))?;
                FieldSpec::fp(p).map_err(err)
            }
            None => Err(PyValueError::new_err(format!(
                "bad field '{other}', expected 'q' or 'fp:P'"
            ))),
        },
    }
}

fn window(w: (i32, i32, i32)) -> PyResult<Window> {
    Window::new(w.0, w.1, w.2).map_err(err)
}

/// A cohomology dimension grid on a window, rows indexed by degree.
#[pyclass(name = "Table", skip_from_py_object)]
#[derive(Clone)]
struct PyTable {
    inner: CohomologyTable,
}

#[pymethods]
impl PyTable {
    /// Dimension of the `(deg, wt)` stratum.
    fn dim(&self, deg: i32, wt: i32) -> usize {
        self.inner.dim(deg, wt)
    }

    /// The weight row of one degree, weights `0..=wt_cap`.
    fn row(&self, deg: i32) -> Vec<usize> {
        self.inner.row(deg)
    }

    /// All nonzero entries as `{(deg, wt): dim}`.
    fn entries(&self) -> std::collections::BTreeMap<(i32, i32), usize> {
        self.inner.entries().filter(|(_, d)| *d > 0).collect()
    }

    #[getter]
    fn window(&self) -> (i32, i32, i32) {
        let w = self.inner.window;
        (w.deg_lo, w.deg_hi, w.wt_cap)
    }

    fn __repr__(&self) -> String {
        let w = self.inner.window;
        let rows: Vec<String> = (w.deg_lo..=w.deg_hi)
            .rev()
            .map(|d| format!("deg {d}: {:?}", self.inner.row(d)))
            .collect();
        format!("Table(\n  {}\n)", rows.join("\n  "))
    }
}

/// Outcome of one verification: status, window, evidence, caveats.
#[pyclass(name = "Verdict", skip_from_py_object)]
#[derive(Clone)]
struct PyVerdict {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    window: (i32, i32, i32),
    #[pyo3(get)]
    evidence: Vec<String>,
    #[pyo3(get)]
    caveats: Vec<String>,
}

impl From<verdicts::Verdict> for PyVerdict {
    fn from(v: verdicts::Verdict) -> PyVerdict {
        PyVerdict {
            status: v.status.label().to_string(),
            window: (v.window.deg_lo, v.window.deg_hi, v.window.wt_cap),
            evidence: v.evidence,
            caveats: v.caveats,
        }
    }
}

#[pymethods]
impl PyVerdict {
    /// True when the status is holds-on-window.
    fn holds(&self) -> bool {
        self.status == "holds-on-window"
    }

    fn __repr__(&self) -> String {
        format!("Verdict({}, evidence={:?})", self.status, self.evidence)
    }
}

/// A finitely presented non-positively graded commutative DG-algebra.
#[pyclass(name = "Algebra", skip_from_py_object)]
#[derive(Clone)]
struct PyAlgebra {
    inner: Arc<DGAlgebra>,
}

#[pymethods]
impl PyAlgebra {
    /// `Algebra("q", [("x", 0, 1), ("e", -1, 2)], {"e": "x^2"})`
    #[new]
    #[pyo3(signature = (field, gens, diffs = None))]
    fn new(
        field: &str,
        gens: Vec<(String, i32, i32)>,
        diffs: Option<std::collections::HashMap<String, String>>,
    ) -> PyResult<PyAlgebra> {
        let field = parse_field(field)?;
        let specs: Vec<GeneratorSpec> = gens
            .iter()
            .map(|(n, d, w)| GeneratorSpec::new(n, *d, *w))
            .collect();
        // two passes: build with zero differentials, then parse expressions
        let probe = DGAlgebra::new(
            field,
            specs.clone(),
            vec![dgcheck::cdga::Element::zero(); specs.len()],
        )
        .map_err(err)?;
        let diffs = diffs.unwrap_or_default();
        let parsed = gens
            .iter()
            .map(|(n, _, _)| match diffs.get(n) {
                Some(text) => parse_element(text, &probe).map_err(err),
                None => Ok(dgcheck::cdga::Element::zero()),
            })
            .collect::<PyResult<Vec<_>>>()?;
        for name in diffs.keys() {
            if !gens.iter().any(|(n, _, _)| n == name) {
                return Err(PyValueError::new_err(format!(
                    "differential given for unknown generator '{name}'"
                )));
            }
        }
        Ok(PyAlgebra {
            inner: DGAlgebra::new(field, specs, parsed).map_err(err)?,
        })
    }

    /// Extend by new generators: `a.extend([("x", 0, 1)], {"x": None})`.
    #[pyo3(signature = (gens, diffs = None))]
    fn extend(
        &self,
        gens: Vec<(String, i32, i32)>,
        diffs: Option<std::collections::HashMap<String, String>>,
    ) -> PyResult<(PyAlgebra, PyMap)> {
        let specs: Vec<GeneratorSpec> = gens
            .iter()
            .map(|(n, d, w)| GeneratorSpec::new(n, *d, *w))
            .collect();
        let (probe, _) = self
            .inner
            .extend(
                specs.clone(),
                vec![dgcheck::cdga::Element::zero(); specs.len()],
            )
            .map_err(err)?;
        let diffs = diffs.unwrap_or_default();
        let parsed = gens
            .iter()
            .map(|(n, _, _)| match diffs.get(n) {
                Some(text) => parse_element(text, &probe).map_err(err),
                None => Ok(dgcheck::cdga::Element::zero()),
            })
            .collect::<PyResult<Vec<_>>>()?;
        let (ext, incl) = self.inner.extend(specs, parsed).map_err(err)?;
        Ok((PyAlgebra { inner: ext }, PyMap { inner: incl }))
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn generators(&self) -> Vec<(String, i32, i32)> {
        self.inner
            .generators()
            .iter()
            .map(|g| (g.name.clone(), g.deg, g.wt))
            .collect()
    }

    /// Cohomology dimension grid on `(deg_lo, deg_hi, wt_cap)`.
    fn cohomology(&self, window_spec: (i32, i32, i32)) -> PyResult<PyTable> {
        let w = window(window_spec)?;
        let t = compile_algebra(&self.inner, w.margin(1))
            .map_err(err)?
            .cohomology(w);
        Ok(PyTable { inner: t })
    }

    /// Kill elements (scenario expression strings) by a Koszul extension.
    fn koszul(&self, lifts: Vec<String>) -> PyResult<(PyAlgebra, PyMap)> {
        let parsed = lifts
            .iter()
            .map(|t| parse_element(t, &self.inner).map_err(err))
            .collect::<PyResult<Vec<_>>>()?;
        let (k, incl) = koszul(&self.inner, &parsed).map_err(err)?;
        Ok((PyAlgebra { inner: k }, PyMap { inner: incl }))
    }

    /// Two-route regular-sequence certificate for degree-0 elements.
    fn regular_sequence(
        &self,
        seq: Vec<String>,
        window_spec: (i32, i32, i32),
    ) -> PyResult<PyVerdict> {
        let parsed = seq
            .iter()
            .map(|t| parse_element(t, &self.inner).map_err(err))
            .collect::<PyResult<Vec<_>>>()?;
        let v = is_regular_sequence(&self.inner, &parsed, window(window_spec)?).map_err(err)?;
        Ok(v.into())
    }

    /// Smoothness over the base field versus concentration in degree 0;
    /// returns `(smooth, reduced, consistent)` verdicts.
    #[pyo3(signature = (window_spec, max_stages = 8))]
    fn flathz(
        &self,
        window_spec: (i32, i32, i32),
        max_stages: usize,
    ) -> PyResult<(PyVerdict, PyVerdict, PyVerdict)> {
        let rep = verify_flathz(&self.inner, window(window_spec)?, max_stages).map_err(err)?;
        Ok((rep.smooth.into(), rep.reduced.into(), rep.overall.into()))
    }

    fn __repr__(&self) -> String {
        format!("Algebra({})", self.inner)
    }
}

/// A map of DG-algebras, determined by generator images.
#[pyclass(name = "Map", skip_from_py_object)]
#[derive(Clone)]
struct PyMap {
    inner: AlgebraMap,
}

#[pymethods]
impl PyMap {
    /// `Map(a, b, {"x": "x", "e": "e"})`; images are expression strings
    /// over the target.
    #[new]
    fn new(
        source: &PyAlgebra,
        target: &PyAlgebra,
        images: std::collections::HashMap<String, String>,
    ) -> PyResult<PyMap> {
        let mut vec = Vec::with_capacity(source.inner.arity());
        for g in source.inner.generators() {
            let text = images.get(&g.name).ok_or_else(|| {
                PyValueError::new_err(format!("no image for generator '{}'", g.name))
            })?;
            vec.push(parse_element(text, &target.inner).map_err(err)?);
        }
        Ok(PyMap {
            inner: AlgebraMap::new(source.inner.clone(), target.inner.clone(), vec)
                .map_err(err)?,
        })
    }

    #[getter]
    fn source(&self) -> PyAlgebra {
        PyAlgebra {
            inner: self.inner.source().clone(),
        }
    }

    #[getter]
    fn target(&self) -> PyAlgebra {
        PyAlgebra {
            inner: self.inner.target().clone(),
        }
    }

    /// Is the map a quasi-isomorphism on the window?
    fn quasi_iso(&self, window_spec: (i32, i32, i32)) -> PyResult<PyVerdict> {
        Ok(is_quasi_iso_alg(&self.inner, window(window_spec)?)
            .map_err(err)?
            .into())
    }

    /// Perfectness of the target over its derived diagonal.
    #[pyo3(signature = (window_spec, max_stages = 8))]
    fn perfect_diagonal(
        &self,
        window_spec: (i32, i32, i32),
        max_stages: usize,
    ) -> PyResult<PyVerdict> {
        let r = diagonal_retraction(&self.inner).map_err(err)?;
        Ok(is_perfect_diagonal(&r, window(window_spec)?, max_stages)
            .map_err(err)?
            .into())
    }

    /// Both sides of the smoothness equivalence; returns
    /// `(perfect_side, h0_side, agreement)`.
    #[pyo3(signature = (window_spec, max_stages = 8))]
    fn smooth_equiv(
        &self,
        window_spec: (i32, i32, i32),
        max_stages: usize,
    ) -> PyResult<(PyVerdict, PyVerdict, PyVerdict)> {
        let rep = verify_smoothness_equivalence(&self.inner, window(window_spec)?, max_stages)
            .map_err(err)?;
        Ok((
            rep.perfect_side.into(),
            rep.h0_side.into(),
            rep.agreement.into(),
        ))
    }

    /// Local-complete-intersection certificate; returns a dict of verdicts.
    fn lci(&self, window_spec: (i32, i32, i32)) -> PyResult<std::collections::BTreeMap<String, PyVerdict>> {
        let rep = verify_lci(&self.inner, None, window(window_spec)?).map_err(err)?;
        Ok([
            ("kernel".to_string(), rep.kernel.into()),
            ("composition".to_string(), rep.composition.into()),
            ("hilbert".to_string(), rep.hilbert.into()),
            ("regularity".to_string(), rep.regular.into()),
            ("overall".to_string(), rep.overall.into()),
        ]
        .into_iter()
        .collect())
    }

    /// Duality check across test modules; module names are "E", "B", or
    /// "B[s]". Returns `(n, twist, matched, per_module)`.
    #[pyo3(signature = (window_spec, modules = vec!["E".to_string(), "B".to_string()]))]
    fn vdb(
        &self,
        window_spec: (i32, i32, i32),
        modules: Vec<String>,
    ) -> PyResult<(i32, i32, bool, std::collections::BTreeMap<String, PyVerdict>)> {
        let w = window(window_spec)?;
        let parsed = modules
            .iter()
            .map(|m| parse_vdb_module(m))
            .collect::<PyResult<Vec<_>>>()?;
        let lci = verify_lci(&self.inner, None, w).map_err(err)?;
        let rep = verify_vdb(&lci, &parsed, w).map_err(err)?;
        let mut per: std::collections::BTreeMap<String, PyVerdict> = rep
            .per_module
            .into_iter()
            .map(|(n, v)| (n, v.into()))
            .collect();
        per.insert("invertibility".to_string(), rep.invertible.into());
        Ok((rep.n, rep.twist, rep.matched, per))
    }

    /// The rigid-module table identity (requires matched duality).
    fn rigid(&self, window_spec: (i32, i32, i32)) -> PyResult<PyVerdict> {
        let w = window(window_spec)?;
        let lci = verify_lci(&self.inner, None, w).map_err(err)?;
        let vdb = verify_vdb(&lci, &[VdbModule::Diagonal], w).map_err(err)?;
        let (_, v) = rigid_module(&lci, &vdb, w).map_err(err)?;
        Ok(v.into())
    }

    /// Flat-dimension-0 battery over the default test modules.
    fn flat_check(&self, window_spec: (i32, i32, i32)) -> PyResult<PyVerdict> {
        let w = window(window_spec)?;
        let fw = verdicts::flat_witness(&self.inner, w).map_err(err)?;
        let mods = verdicts::default_test_modules(self.inner.source()).map_err(err)?;
        Ok(verdicts::check_flat_dim0(&fw, &mods, w).map_err(err)?.into())
    }

    fn __repr__(&self) -> String {
        format!(
            "Map({} generators -> {} generators)",
            self.inner.source().arity(),
            self.inner.target().arity()
        )
    }
}

fn parse_vdb_module(s: &str) -> PyResult<VdbModule> {
    if s == "E" {
        return Ok(VdbModule::Diagonal);
    }
    if s == "B" {
        return Ok(VdbModule::Target(0));
    }
    if let Some(rest) = s.strip_prefix("B[") {
        if let Some(num) = rest.strip_suffix(']') {
            if let Ok(n) = num.parse::<i32>() {
                return Ok(VdbModule::Target(n));
            }
        }
    }
    Err(PyValueError::new_err(format!(
        "bad duality module '{s}', expected E, B, or B[s]"
    )))
}

/// Run a scenario file's tasks; returns `(rendered_report, exit_code)`.
/// `fmt` is "text" or "structured".
#[pyfunction]
#[pyo3(signature = (text, fmt = "structured", max_stages = None))]
fn run_scenario(text: &str, fmt: &str, max_stages: Option<usize>) -> PyResult<(String, i32)> {
    let s = parse_scenario(text).map_err(err)?;
    let report = run(&s, max_stages);
    let rendered = match fmt {
        "text" => render_text(&report),
        "structured" => render_structured(&report),
        other => {
            return Err(PyValueError::new_err(format!(
                "bad format '{other}', expected 'text' or 'structured'"
            )))
        }
    };
    Ok((rendered, report.exit_code()))
}

/// Canonical printing of a scenario file (round-trip stable).
#[pyfunction]
fn canonical_scenario(text: &str) -> PyResult<String> {
    Ok(print_scenario(&parse_scenario(text).map_err(err)?))
}

#[pymodule]
fn dgcheck_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_scenario, m)?)?;
    Ok(())
}
