//! Python bindings: load traces and models, compute dependencies and slices.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use tracelens_core::{
    fixtures, validate_against_model, DependencyEdge, DependencyEngine, DependencyKind, Error, EventTrace,
    LsruReading, SliceMode, SliceOptions, SliceResult, SystemModel, TraceFormat,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::IndexOutOfRange { .. } | Error::NotAMember(_) => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn reading(strict: bool) -> LsruReading {
    if strict {
        LsruReading::Literal
    } else {
        LsruReading::OtherProcesses
    }
}

fn parse_mode(mode: &str) -> PyResult<SliceMode> {
    mode.parse().map_err(PyValueError::new_err)
}

type EdgeTuple = (String, Option<String>, usize, usize);

fn edge_tuple(e: &DependencyEdge) -> EdgeTuple {
    (e.kind.to_string(), e.base.map(|b| DependencyKind::from(b).to_string()), e.from, e.to)
}

#[pyclass(name = "EventTrace", frozen)]
struct PyTrace(EventTrace);

#[pymethods]
impl PyTrace {
    /// Parses TSV or JSON text; `format` is "tsv", "json", or None to guess.
    #[staticmethod]
    #[pyo3(signature = (text, format=None))]
    fn parse(text: &str, format: Option<&str>) -> PyResult<Self> {
        let format = match format {
            Some(f) => f.parse::<TraceFormat>().map_err(PyValueError::new_err)?,
            None => TraceFormat::detect(None, text),
        };
        EventTrace::parse(text, format).map(PyTrace).map_err(py_err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        EventTrace::parse(&text, TraceFormat::detect(Some(path), &text)).map(PyTrace).map_err(py_err)
    }

    /// The bundled 37-event example trace.
    #[staticmethod]
    fn example() -> Self {
        PyTrace(fixtures::example_trace())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Events as `(no, process, operation, resource, old_state, new_state)`.
    fn events(&self) -> Vec<(usize, String, String, String, String, String)> {
        self.0
            .iter()
            .map(|e| (e.index, e.process.clone(), e.operation.clone(), e.resource.clone(), e.old_state.clone(), e.new_state.clone()))
            .collect()
    }

    fn to_tsv(&self) -> String {
        self.0.serialize(TraceFormat::Tsv)
    }

    fn to_json(&self) -> String {
        self.0.serialize(TraceFormat::Json)
    }
}

#[pyclass(name = "SystemModel", frozen)]
struct PyModel(SystemModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        SystemModel::parse(text).map(PyModel).map_err(py_err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Self::parse(&text)
    }

    /// A permissive model with no rules, built from the trace itself.
    #[staticmethod]
    fn inferred(trace: &PyTrace) -> Self {
        PyModel(SystemModel::inferred_from(&trace.0))
    }

    /// The bundled model matching `EventTrace.example()`.
    #[staticmethod]
    #[pyo3(signature = (lock_held=false))]
    fn example(lock_held: bool) -> Self {
        PyModel(if lock_held { fixtures::lock_held_model() } else { fixtures::fixture_model() })
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Violations as `(event, kind, message)`.
    fn validate(&self, trace: &PyTrace) -> Vec<(usize, String, String)> {
        validate_against_model(&trace.0, &self.0)
            .into_iter()
            .map(|v| (v.event_index, format!("{:?}", v.kind), v.message))
            .collect()
    }
}

#[pyclass(name = "SliceResult", frozen)]
struct PySlice(SliceResult);

#[pymethods]
impl PySlice {
    #[getter]
    fn start(&self) -> usize {
        self.0.start_index
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.mode.to_string()
    }

    #[getter]
    fn members(&self) -> Vec<usize> {
        self.0.members.iter().copied().collect()
    }

    /// Edges as `(kind, base, from, to)`; base is set only for CE edges.
    #[getter]
    fn edges(&self) -> Vec<EdgeTuple> {
        self.0.edges.iter().map(edge_tuple).collect()
    }

    #[getter]
    fn reduction_ratio(&self) -> f64 {
        self.0.stats.reduction_ratio
    }

    fn explain(&self, member: usize) -> PyResult<Vec<EdgeTuple>> {
        Ok(self.0.explain(member).map_err(py_err)?.iter().map(edge_tuple).collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, index: usize) -> bool {
        self.0.contains(index)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_dot(&self, trace: &PyTrace) -> String {
        tracelens_core::to_dot(&self.0, &trace.0)
    }

    fn __repr__(&self) -> String {
        format!("SliceResult(start={}, mode={}, members={:?})", self.0.start_index, self.0.mode, self.0.members)
    }
}

/// Backward slice from `start` (1-based). `mode` is "basic" or "cause-effect".
#[pyfunction]
#[pyo3(signature = (trace, model, start, mode="basic", lsru_strict=false))]
fn slice(trace: &PyTrace, model: &PyModel, start: usize, mode: &str, lsru_strict: bool) -> PyResult<PySlice> {
    let opts = SliceOptions { mode: parse_mode(mode)?, lsru: reading(lsru_strict), ..Default::default() };
    tracelens_core::slice_with(&trace.0, &model.0, start, opts).map(PySlice).map_err(py_err)
}

/// Direct dependencies of one event. Without a mode, every kind is reported.
#[pyfunction]
#[pyo3(signature = (trace, model, event, mode=None, lsru_strict=false))]
fn dependencies(
    trace: &PyTrace,
    model: &PyModel,
    event: usize,
    mode: Option<&str>,
    lsru_strict: bool,
) -> PyResult<Vec<EdgeTuple>> {
    let eng = DependencyEngine::new(&trace.0, &model.0).with_lsru_reading(reading(lsru_strict));
    let edges = match mode {
        Some(m) => eng.all_dependencies(event, parse_mode(m)?).map_err(py_err)?,
        None => {
            let mut all = eng.all_dependencies(event, SliceMode::Basic).map_err(py_err)?;
            all.extend(eng.ce_predecessors(event).map_err(py_err)?);
            all
        }
    };
    Ok(edges.iter().map(edge_tuple).collect())
}

#[pymodule]
fn tracelens(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrace>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PySlice>()?;
    m.add_function(wrap_pyfunction!(slice, m)?)?;
    m.add_function(wrap_pyfunction!(dependencies, m)?)?;
    Ok(())
}
