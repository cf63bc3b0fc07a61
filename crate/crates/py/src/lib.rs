//! Python bindings: scenario construction and the main analysis
//! operations of the engine, with matrices exposed as nested lists of
//! Python complex numbers.

// the #[pymethods] expansion inserts identity `.into()` calls on PyErr
#![allow(clippy::useless_conversion)]

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use decohist::decoherence::{
    check_consistency, collapse_oracle, decoherence_matrix, probabilities,
    time_symmetric_decoherence_matrix, Condition, DecoherenceMatrix, DEFAULT_EPSILON,
};
use decohist::families::are_compatible;
use decohist::histories::HistoryFamily;
use decohist::hpo::{hpo_embed, hpo_negate, HpoProjector, HpoStructure};
use decohist::kinematics::HilbertSpace;
use decohist::matrix::CMatrix;
use decohist::scenario::{
    branch_names, builtin_spin_half, load_scenario, save_scenario, spin_half_scenario,
};
use decohist::{Error, Tolerance};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Parse(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn condition_from(name: &str) -> PyResult<Condition> {
    match name {
        "weak" => Ok(Condition::Weak),
        "medium" => Ok(Condition::Medium),
        other => Err(PyValueError::new_err(format!(
            "condition must be 'weak' or 'medium', got '{other}'"
        ))),
    }
}

fn matrix_to_py(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// A validated scenario: dynamics, states, and one history family.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: decohist::scenario::Scenario,
}

impl PyScenario {
    fn family(&self) -> PyResult<HistoryFamily> {
        self.inner.family(&Tolerance::default()).map_err(err)
    }

    fn matrix(&self, final_state: bool) -> PyResult<(HistoryFamily, DecoherenceMatrix)> {
        let family = self.family()?;
        let dm = if final_state {
            time_symmetric_decoherence_matrix(&family, &Tolerance::default())
        } else {
            decoherence_matrix(&family, &Tolerance::default())
        }
        .map_err(err)?;
        Ok((family, dm))
    }
}

#[pymethods]
impl PyScenario {
    /// Load and validate a scenario file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: load_scenario(path).map_err(err)?,
        })
    }

    /// The two-time spin-1/2 family: alternatives along `nprime` at t1 and
    /// `n` at t2, started along `n0`.
    #[staticmethod]
    fn spin_half(n0: [f64; 3], nprime: [f64; 3], n: [f64; 3]) -> Self {
        PyScenario {
            inner: spin_half_scenario(n0, nprime, n),
        }
    }

    /// The all-axes-aligned spin-1/2 example.
    #[staticmethod]
    fn builtin() -> Self {
        PyScenario {
            inner: builtin_spin_half(),
        }
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_scenario(&self.inner, path).map_err(err)
    }

    /// Every violated invariant; empty iff the scenario is valid.
    fn validate(&self) -> Vec<String> {
        self.inner.validate(&Tolerance::default())
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    fn labels(&self) -> PyResult<Vec<Vec<usize>>> {
        Ok(self
            .family()?
            .histories()
            .iter()
            .map(|h| h.label.clone())
            .collect())
    }

    /// Human-readable branch names, one per history label.
    fn branch_names(&self) -> PyResult<Vec<String>> {
        Ok(branch_names(&self.family()?)
            .into_iter()
            .map(|(_, n)| n)
            .collect())
    }

    /// The full matrix of d(α,β) values, row/column order matching
    /// `labels()`.
    #[pyo3(signature = (final_state = false))]
    fn decoherence_matrix(&self, final_state: bool) -> PyResult<Vec<Vec<Complex64>>> {
        let (_, dm) = self.matrix(final_state)?;
        Ok(matrix_to_py(dm.entries()))
    }

    #[pyo3(signature = (condition = "weak", epsilon = DEFAULT_EPSILON, final_state = false))]
    fn is_consistent(&self, condition: &str, epsilon: f64, final_state: bool) -> PyResult<bool> {
        let (_, dm) = self.matrix(final_state)?;
        let report = check_consistency(&dm, condition_from(condition)?, epsilon).map_err(err)?;
        Ok(report.consistent())
    }

    /// Dict with the verdict and every violating pair.
    #[pyo3(signature = (condition = "weak", epsilon = DEFAULT_EPSILON, final_state = false))]
    fn consistency_report<'py>(
        &self,
        py: Python<'py>,
        condition: &str,
        epsilon: f64,
        final_state: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (_, dm) = self.matrix(final_state)?;
        let report = check_consistency(&dm, condition_from(condition)?, epsilon).map_err(err)?;
        let out = PyDict::new_bound(py);
        out.set_item("condition", condition)?;
        out.set_item("epsilon", epsilon)?;
        out.set_item("consistent", report.consistent())?;
        let violations: Vec<(Vec<usize>, Vec<usize>, f64)> = report
            .violations
            .iter()
            .map(|v| (v.alpha.clone(), v.beta.clone(), v.residual))
            .collect();
        out.set_item("violations", violations)?;
        Ok(out)
    }

    /// Mapping from branch name to probability; raises if inconsistent.
    #[pyo3(signature = (condition = "weak", epsilon = DEFAULT_EPSILON, final_state = false))]
    fn probabilities<'py>(
        &self,
        py: Python<'py>,
        condition: &str,
        epsilon: f64,
        final_state: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (family, dm) = self.matrix(final_state)?;
        let table = probabilities(&dm, condition_from(condition)?, epsilon).map_err(err)?;
        let names = branch_names(&family);
        let out = PyDict::new_bound(py);
        for (label, p) in &table.entries {
            let name = names
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, n)| n.clone())
                .unwrap_or_else(|| format!("{label:?}"));
            out.set_item(name, *p)?;
        }
        Ok(out)
    }

    /// Probability of one history by explicit sequential collapse — an
    /// independent route to the functional's diagonal.
    fn collapse_probability(&self, label: Vec<usize>) -> PyResult<f64> {
        collapse_oracle(&self.family()?, &label).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name='{}', dimension={}, times={:?})",
            self.inner.name, self.inner.dimension, self.inner.times
        )
    }
}

/// Relation between two families: 'refines', 'coarsens', 'compatible',
/// 'incompatible', or 'complementary', plus the obstruction if any.
#[pyfunction]
#[pyo3(signature = (a, b, condition = "weak", epsilon = DEFAULT_EPSILON))]
fn compat<'py>(
    py: Python<'py>,
    a: &PyScenario,
    b: &PyScenario,
    condition: &str,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fa = a.family()?;
    let fb = b.family()?;
    let report = are_compatible(
        &fa,
        &fb,
        condition_from(condition)?,
        epsilon,
        &Tolerance::default(),
    )
    .map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("relation", report.relation.to_string())?;
    out.set_item("obstruction", report.obstruction)?;
    Ok(out)
}

/// The 2ⁿ−1 homogeneous terms of ¬(P₁⊗…⊗Pₙ), each as per-slot matrices.
#[pyfunction]
fn negation_terms(slots: Vec<Vec<Vec<Complex64>>>) -> PyResult<Vec<Vec<Vec<Vec<Complex64>>>>> {
    let tol = Tolerance::default();
    let slot_matrices: Vec<CMatrix> = slots
        .iter()
        .map(|rows| {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err("slot matrices must be square"));
            }
            Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
        })
        .collect::<PyResult<_>>()?;
    let p = HpoProjector::homogeneous(slot_matrices, &tol).map_err(err)?;
    let neg = hpo_negate(&p, &tol).map_err(err)?;
    let HpoStructure::Sum { terms, .. } = neg.structure() else {
        return Err(PyValueError::new_err("expected an expansion"));
    };
    Ok(terms
        .iter()
        .map(|term| term.iter().map(matrix_to_py).collect())
        .collect())
}

/// Tensor-space projector of one history of a scenario, as a dense matrix.
#[pyfunction]
fn history_projector(scenario: &PyScenario, label: Vec<usize>) -> PyResult<Vec<Vec<Complex64>>> {
    let family = scenario.family()?;
    let h = family.history(&label).map_err(err)?;
    let space = HilbertSpace::new(family.dim()).map_err(err)?;
    let p = hpo_embed(h, space, &Tolerance::default()).map_err(err)?;
    Ok(matrix_to_py(p.matrix()))
}

#[pymodule]
fn decohist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(compat, m)?)?;
    m.add_function(wrap_pyfunction!(negation_terms, m)?)?;
    m.add_function(wrap_pyfunction!(history_projector, m)?)?;
    m.add("DEFAULT_EPSILON", DEFAULT_EPSILON)?;
    Ok(())
}
