//! Scenario files, built-in examples, and report rendering.
//!
//! Scenarios are JSON: complex numbers as two-element `[re, im]` arrays,
//! matrices as row-major nested arrays. The format is bit-exactly
//! specifiable and diff-friendly, so analysis output can be pinned against
//! golden files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::decoherence::{ConsistencyReport, DecoherenceKind, DecoherenceMatrix, ProbabilityTable};
use crate::error::{Error, Result};
use crate::families::FamilyRelationReport;
use crate::histories::{
    branch_dependent_family, product_family, HistoryFamily, Label, TemporalSupport,
};
use crate::kinematics::{
    bloch_state, spin_decomposition, DecompositionOfUnity, DensityOperator, Dynamics, Projector,
};
use crate::matrix::{self, CMatrix, Tolerance};
use crate::psg::FinitePsg;

/// Complex scalar on disk: `[re, im]`.
pub type JsonComplex = [f64; 2];
/// Matrix on disk: row-major nested arrays of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix, dim: usize, what: &str) -> Result<CMatrix> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::Shape(format!(
            "{what}: expected a {dim}×{dim} matrix"
        )));
    }
    let rows: Vec<Vec<Complex64>> = m
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    let out = matrix::from_rows(&rows)?;
    matrix::ensure_finite(&out)?;
    Ok(out)
}

/// A state literal: density matrix, pure vector, or qubit Bloch axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Density(JsonMatrix),
    Pure(Vec<JsonComplex>),
    Bloch([f64; 3]),
}

impl StateSpec {
    pub fn to_density(&self, dim: usize, tol: &Tolerance) -> Result<DensityOperator> {
        match self {
            StateSpec::Density(m) => {
                DensityOperator::new(matrix_from_json(m, dim, "density matrix")?, "density", tol)
            }
            StateSpec::Pure(v) => {
                if v.len() != dim {
                    return Err(Error::Shape(format!(
                        "pure state vector has {} entries, expected {dim}",
                        v.len()
                    )));
                }
                let vec: Vec<Complex64> =
                    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                DensityOperator::pure(&vec, "pure")
            }
            StateSpec::Bloch(axis) => {
                if dim != 2 {
                    return Err(Error::Domain(
                        "Bloch-axis states are defined for dimension 2 only".into(),
                    ));
                }
                bloch_state(*axis, tol)
            }
        }
    }

    pub fn from_density(rho: &DensityOperator) -> StateSpec {
        StateSpec::Density(matrix_to_json(rho.matrix()))
    }
}

/// One decomposition of unity on disk: explicit projector matrices, or a
/// qubit spin-axis shorthand expanding to {(I ± σ·n̂)/2}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionSpec {
    Projectors(Vec<JsonMatrix>),
    Axis([f64; 3]),
}

impl DecompositionSpec {
    pub fn to_decomposition(
        &self,
        dim: usize,
        time: f64,
        tol: &Tolerance,
    ) -> Result<DecompositionOfUnity> {
        match self {
            DecompositionSpec::Projectors(ms) => {
                let projectors: Vec<Projector> = ms
                    .iter()
                    .enumerate()
                    .map(|(a, m)| {
                        Projector::new(
                            matrix_from_json(m, dim, &format!("projector {a}"))?,
                            a.to_string(),
                            tol,
                        )
                    })
                    .collect::<Result<_>>()?;
                DecompositionOfUnity::new(projectors, time, tol)
            }
            DecompositionSpec::Axis(axis) => {
                if dim != 2 {
                    return Err(Error::Domain(
                        "axis shorthand is defined for dimension 2 only".into(),
                    ));
                }
                spin_decomposition(*axis, time, tol)
            }
        }
    }
}

/// Branch-dependent families on disk: a tree whose node at depth j holds
/// the decomposition used at time t_j, with one child per branch index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchNode {
    pub decomposition: DecompositionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchNode>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub dimension: usize,
    /// Defaults to H = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<JsonMatrix>,
    /// Reference time of the Heisenberg picture; defaults to the earliest
    /// scenario time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_time: Option<f64>,
    pub initial_state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<StateSpec>,
    pub times: Vec<f64>,
    /// Product family: one decomposition per time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompositions: Option<Vec<DecompositionSpec>>,
    /// Branch-dependent family; mutually exclusive with `decompositions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_tree: Option<BranchNode>,
}

impl Scenario {
    /// Every violated invariant, not just the first. Empty iff valid.
    pub fn validate(&self, tol: &Tolerance) -> Vec<String> {
        let mut problems = Vec::new();
        if self.dimension == 0 {
            problems.push("dimension must be ≥ 1".into());
            return problems;
        }
        if self.times.is_empty() {
            problems.push("times must be nonempty".into());
        }
        for w in self.times.windows(2) {
            if w[0] >= w[1] || w[0].is_nan() || w[1].is_nan() {
                problems.push(format!(
                    "times not strictly increasing: {} then {}",
                    w[0], w[1]
                ));
            }
        }
        if let Some(t) = self.times.iter().find(|t| !t.is_finite()) {
            problems.push(format!("non-finite time {t}"));
        }
        if let Some(h) = &self.hamiltonian {
            match matrix_from_json(h, self.dimension, "hamiltonian") {
                Ok(m) if !matrix::is_hermitian(&m, tol) => {
                    problems.push("hamiltonian is not Hermitian".into())
                }
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
        }
        if let Err(e) = self.initial_state.to_density(self.dimension, tol) {
            problems.push(format!("initial_state: {e}"));
        }
        if let Some(fs) = &self.final_state {
            if let Err(e) = fs.to_density(self.dimension, tol) {
                problems.push(format!("final_state: {e}"));
            }
        }
        match (&self.decompositions, &self.branch_tree) {
            (None, None) => problems.push("scenario needs decompositions or a branch_tree".into()),
            (Some(_), Some(_)) => {
                problems.push("decompositions and branch_tree are mutually exclusive".into())
            }
            (Some(ds), None) => {
                if ds.len() != self.times.len() {
                    problems.push(format!(
                        "{} decompositions for {} times",
                        ds.len(),
                        self.times.len()
                    ));
                }
                for (j, (d, &t)) in ds.iter().zip(&self.times).enumerate() {
                    if let Err(e) = d.to_decomposition(self.dimension, t, tol) {
                        problems.push(format!("decomposition {j} (t = {t}): {e}"));
                    }
                }
            }
            (None, Some(root)) => {
                self.validate_branch_node(root, 0, &mut problems, tol);
            }
        }
        problems
    }

    fn validate_branch_node(
        &self,
        node: &BranchNode,
        depth: usize,
        problems: &mut Vec<String>,
        tol: &Tolerance,
    ) {
        if depth >= self.times.len() {
            problems.push(format!(
                "branch tree deeper than the {} times",
                self.times.len()
            ));
            return;
        }
        let t = self.times[depth];
        let n_branches = match node.decomposition.to_decomposition(self.dimension, t, tol) {
            Ok(d) => Some(d.len()),
            Err(e) => {
                problems.push(format!("branch node at depth {depth} (t = {t}): {e}"));
                None
            }
        };
        let last = depth == self.times.len() - 1;
        match (&node.branches, last) {
            (Some(_), true) => {
                problems.push(format!("branch node at final depth {depth} must be a leaf"))
            }
            (None, false) => problems.push(format!(
                "branch node at depth {depth} needs children for the remaining times"
            )),
            (Some(children), false) => {
                if let Some(n) = n_branches {
                    if children.len() != n {
                        problems.push(format!(
                            "branch node at depth {depth} has {} children for {n} branches",
                            children.len()
                        ));
                    }
                }
                for child in children {
                    self.validate_branch_node(child, depth + 1, problems, tol);
                }
            }
            (None, true) => {}
        }
    }

    pub fn dynamics(&self, tol: &Tolerance) -> Result<Dynamics> {
        let t_ref = self
            .reference_time
            .unwrap_or_else(|| self.times.first().copied().unwrap_or(0.0));
        match &self.hamiltonian {
            None => Ok(Dynamics::trivial(self.dimension, t_ref)),
            Some(h) => Dynamics::new(
                matrix_from_json(h, self.dimension, "hamiltonian")?,
                t_ref,
                tol,
            ),
        }
    }

    /// Builds the validated history family. Validation problems are
    /// reported all at once.
    pub fn family(&self, tol: &Tolerance) -> Result<HistoryFamily> {
        let problems = self.validate(tol);
        if !problems.is_empty() {
            return Err(Error::Validation(problems.join("\n")));
        }
        let support = TemporalSupport::new(self.times.clone())?;
        let dynamics = self.dynamics(tol)?;
        let rho = self.initial_state.to_density(self.dimension, tol)?;
        let family = if let Some(ds) = &self.decompositions {
            let decomps: Vec<DecompositionOfUnity> = ds
                .iter()
                .zip(&self.times)
                .map(|(d, &t)| d.to_decomposition(self.dimension, t, tol))
                .collect::<Result<_>>()?;
            product_family(support, decomps, dynamics, rho, tol)?
        } else {
            let root = self.branch_tree.as_ref().expect("validated above");
            let dim = self.dimension;
            let resolver = |prefix: &[usize], time: f64| -> Result<DecompositionOfUnity> {
                let mut node = root;
                for &a in prefix {
                    let children = node.branches.as_ref().ok_or_else(|| {
                        Error::Lookup(format!("no branch below prefix {prefix:?}"))
                    })?;
                    node = children
                        .get(a)
                        .ok_or_else(|| Error::Lookup(format!("branch index {a} out of range")))?;
                }
                node.decomposition.to_decomposition(dim, time, tol)
            };
            branch_dependent_family(support, &resolver, dynamics, rho, tol)?
        };
        match &self.final_state {
            None => Ok(family),
            Some(fs) => family.with_final_state(fs.to_density(self.dimension, tol)?),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{} (line {}, column {})", e, e.line(), e.column())))?;
    let problems = scenario.validate(&Tolerance::default());
    if problems.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Validation(problems.join("\n")))
    }
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(scenario).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path.as_ref(), text + "\n")?;
    Ok(())
}

/// The spin-half scenario: free qubit, initial state up along `n0`, the
/// decomposition along `nprime` at t = 1 and along `n` at t = 2.
pub fn spin_half_scenario(n0: [f64; 3], nprime: [f64; 3], n: [f64; 3]) -> Scenario {
    Scenario {
        name: "spin-half".into(),
        description: "free spin-1/2: S·n̂′ alternatives at t1, S·n̂ at t2".into(),
        dimension: 2,
        hamiltonian: None,
        reference_time: Some(0.0),
        initial_state: StateSpec::Bloch(n0),
        final_state: None,
        times: vec![1.0, 2.0],
        decompositions: Some(vec![
            DecompositionSpec::Axis(nprime),
            DecompositionSpec::Axis(n),
        ]),
        branch_tree: None,
    }
}

/// The built-in example: all axes along ẑ, which is consistent with
/// probabilities (1, 0).
pub fn builtin_spin_half() -> Scenario {
    let z = [0.0, 0.0, 1.0];
    spin_half_scenario(z, z, z)
}

/// Composition-table file for a finite partial semigroup: the element
/// names plus (left, right, result) triples; absent pairs are undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsgFile {
    pub elements: Vec<String>,
    pub table: Vec<(String, String, String)>,
}

impl PsgFile {
    pub fn to_psg(&self) -> Result<FinitePsg> {
        let index: HashMap<&str, usize> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        if index.len() != self.elements.len() {
            return Err(Error::Validation("duplicate element names".into()));
        }
        let mut table = HashMap::new();
        for (a, b, c) in &self.table {
            let resolve = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::Lookup(format!("unknown element '{name}'")))
            };
            let key = (resolve(a)?, resolve(b)?);
            if table.insert(key, resolve(c)?).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate table entry for ({a}, {b})"
                )));
            }
        }
        FinitePsg::new(self.elements.clone(), table)
    }
}

pub fn load_psg(path: impl AsRef<Path>) -> Result<FinitePsg> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let file: PsgFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{} (line {}, column {})", e, e.line(), e.column())))?;
    file.to_psg()
}

/// Report emission form: a human table or machine-readable JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Structured,
}

/// Matrix entries print with 12 significant digits, probabilities with 10:
/// reproducible golden files above the 1e-10 tolerance floor.
pub const MATRIX_SIG_DIGITS: usize = 12;
pub const PROBABILITY_SIG_DIGITS: usize = 10;

pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{:.*e}", sig - 1, x)
}

pub fn fmt_complex(z: Complex64, sig: usize) -> String {
    format!(
        "{} {} i·{}",
        fmt_sig(z.re, sig),
        if z.im < 0.0 { "-" } else { "+" },
        fmt_sig(z.im.abs(), sig)
    )
}

fn label_str(label: &[usize]) -> String {
    let parts: Vec<String> = label.iter().map(|a| a.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Resolves each history label to the projector labels along its branch,
/// e.g. `[0,1]` → `+,-`.
pub fn branch_names(family: &HistoryFamily) -> Vec<(Label, String)> {
    family
        .histories()
        .iter()
        .map(|h| {
            let names: Vec<&str> = h
                .events()
                .iter()
                .map(|e| e.projector.label.as_str())
                .collect();
            (h.label.clone(), names.join(","))
        })
        .collect()
}

pub fn render_decoherence_matrix(dm: &DecoherenceMatrix, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => {
            let kind = match dm.kind {
                DecoherenceKind::Standard => "standard",
                DecoherenceKind::TimeSymmetric => "time-symmetric",
            };
            let mut out = format!(
                "decoherence matrix ({kind}), {} histories\n",
                dm.labels().len()
            );
            for (i, la) in dm.labels().iter().enumerate() {
                for (j, lb) in dm.labels().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "  d({}, {}) = {}",
                        label_str(la),
                        label_str(lb),
                        fmt_complex(dm.entries()[(i, j)], MATRIX_SIG_DIGITS)
                    );
                }
            }
            out
        }
        ReportFormat::Structured => {
            let entries: Vec<Vec<JsonComplex>> = (0..dm.labels().len())
                .map(|i| {
                    (0..dm.labels().len())
                        .map(|j| [dm.entries()[(i, j)].re, dm.entries()[(i, j)].im])
                        .collect()
                })
                .collect();
            let v = json!({
                "kind": match dm.kind {
                    DecoherenceKind::Standard => "standard",
                    DecoherenceKind::TimeSymmetric => "time_symmetric",
                },
                "labels": dm.labels(),
                "entries": entries,
            });
            serde_json::to_string_pretty(&v).expect("json value serializes")
        }
    }
}

pub fn render_consistency(report: &ConsistencyReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => format!("{report}"),
        ReportFormat::Structured => {
            let v = json!({
                "condition": report.condition.to_string(),
                "epsilon": report.epsilon,
                "consistent": report.consistent(),
                "violations": report.violations.iter().map(|viol| json!({
                    "alpha": viol.alpha,
                    "beta": viol.beta,
                    "residual": viol.residual,
                })).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&v).expect("json value serializes")
        }
    }
}

pub fn render_probabilities(
    table: &ProbabilityTable,
    names: &[(Label, String)],
    format: ReportFormat,
) -> String {
    let name_of = |label: &[usize]| {
        names
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| label_str(label))
    };
    match format {
        ReportFormat::Table => {
            let mut out = String::from("probabilities\n");
            let mut sum = 0.0;
            for (label, p) in &table.entries {
                sum += p;
                let _ = writeln!(
                    out,
                    "  {} ({}): {}",
                    label_str(label),
                    name_of(label),
                    fmt_sig(*p, PROBABILITY_SIG_DIGITS)
                );
            }
            let _ = writeln!(out, "  sum: {}", fmt_sig(sum, PROBABILITY_SIG_DIGITS));
            let _ = writeln!(out, "  sum residual: {:.3e}", table.sum_residual);
            out
        }
        ReportFormat::Structured => {
            let v = json!({
                "entries": table.entries.iter().map(|(label, p)| json!({
                    "label": label,
                    "name": name_of(label),
                    "probability": p,
                })).collect::<Vec<_>>(),
                "sum_residual": table.sum_residual,
            });
            serde_json::to_string_pretty(&v).expect("json value serializes")
        }
    }
}

pub fn render_relation(report: &FamilyRelationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => {
            let mut out = format!("relation: {}\n", report.relation);
            if let Some(obs) = &report.obstruction {
                let _ = writeln!(out, "obstruction: {obs}");
            }
            if report.witness.is_some() {
                let _ = writeln!(out, "common refinement constructed");
            }
            out
        }
        ReportFormat::Structured => {
            let v = json!({
                "relation": report.relation.to_string(),
                "obstruction": report.obstruction,
                "has_witness": report.witness.is_some(),
            });
            serde_json::to_string_pretty(&v).expect("json value serializes")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::{
        check_consistency, decoherence_matrix, probabilities, Condition, DEFAULT_EPSILON,
    };
    use crate::matrix::max_abs_diff;
    use tempfile::tempdir;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn builtin_spin_half_is_valid_and_consistent() {
        let s = builtin_spin_half();
        assert!(s.validate(&tol()).is_empty());
        let family = s.family(&tol()).unwrap();
        let dm = decoherence_matrix(&family, &tol()).unwrap();
        let report = check_consistency(&dm, Condition::Weak, DEFAULT_EPSILON).unwrap();
        assert!(report.consistent());
        let table = probabilities(&dm, Condition::Weak, DEFAULT_EPSILON).unwrap();
        assert!((table.probability(&[0, 0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(table.probability(&[1, 1]).unwrap() < 1e-12);
    }

    #[test]
    fn validate_reports_all_problems_at_once() {
        let mut s = builtin_spin_half();
        s.times = vec![2.0, 1.0];
        s.initial_state = StateSpec::Bloch([0.0, 0.0, 2.0]);
        let problems = s.validate(&tol());
        assert!(problems.iter().any(|p| p.contains("strictly increasing")));
        assert!(problems.iter().any(|p| p.contains("initial_state")));
        assert!(problems.len() >= 2);
    }

    #[test]
    fn validate_names_the_offending_time_pair() {
        let mut s = builtin_spin_half();
        s.times = vec![1.0, 1.0];
        let problems = s.validate(&tol());
        assert!(problems.iter().any(|p| p.contains("1 then 1")));
    }

    #[test]
    fn non_projector_decomposition_entry_embeds_residuals() {
        let mut s = builtin_spin_half();
        let half = vec![vec![[0.5, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]];
        s.decompositions = Some(vec![
            DecompositionSpec::Projectors(vec![half.clone(), half]),
            DecompositionSpec::Axis([0.0, 0.0, 1.0]),
        ]);
        let problems = s.validate(&tol());
        assert!(problems.iter().any(|p| p.contains("decomposition 0")));
        assert!(s.family(&tol()).is_err());
    }

    #[test]
    fn roundtrip_preserves_matrices_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        let mut s = builtin_spin_half();
        // use explicit literals so the round-trip exercises matrix encoding
        let family = s.family(&tol()).unwrap();
        let rho = family.initial_state().clone();
        s.initial_state = StateSpec::from_density(&rho);
        save_scenario(&s, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(s, loaded);
        let rho2 = loaded.initial_state.to_density(2, &tol()).unwrap();
        assert!(max_abs_diff(rho.matrix(), rho2.matrix()) < 1e-15);
    }

    #[test]
    fn load_rejects_malformed_json_with_location() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{ \"name\": ").unwrap();
        match load_scenario(&path) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line")),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_scenario("/nonexistent/x.json"),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn branch_tree_scenario_builds_a_branch_dependent_family() {
        let z = DecompositionSpec::Axis([0.0, 0.0, 1.0]);
        let x = DecompositionSpec::Axis([1.0, 0.0, 0.0]);
        let s = Scenario {
            name: "branchy".into(),
            description: String::new(),
            dimension: 2,
            hamiltonian: None,
            reference_time: None,
            initial_state: StateSpec::Bloch([0.0, 0.0, 1.0]),
            final_state: None,
            times: vec![1.0, 2.0],
            decompositions: None,
            branch_tree: Some(BranchNode {
                decomposition: z.clone(),
                branches: Some(vec![
                    BranchNode {
                        decomposition: z,
                        branches: None,
                    },
                    BranchNode {
                        decomposition: x,
                        branches: None,
                    },
                ]),
            }),
        };
        assert!(s.validate(&tol()).is_empty());
        let family = s.family(&tol()).unwrap();
        assert_eq!(family.histories().len(), 4);
        assert!(matches!(
            family.structure(),
            crate::histories::FamilyStructure::BranchDependent
        ));
    }

    #[test]
    fn branch_tree_arity_mismatch_is_flagged() {
        let z = DecompositionSpec::Axis([0.0, 0.0, 1.0]);
        let s = Scenario {
            name: "bad".into(),
            description: String::new(),
            dimension: 2,
            hamiltonian: None,
            reference_time: None,
            initial_state: StateSpec::Bloch([0.0, 0.0, 1.0]),
            final_state: None,
            times: vec![1.0, 2.0],
            decompositions: None,
            branch_tree: Some(BranchNode {
                decomposition: z.clone(),
                branches: Some(vec![BranchNode {
                    decomposition: z,
                    branches: None,
                }]),
            }),
        };
        let problems = s.validate(&tol());
        assert!(problems.iter().any(|p| p.contains("children")));
    }

    #[test]
    fn psg_file_round_trip_and_lookup_errors() {
        let file = PsgFile {
            elements: vec!["a".into(), "b".into()],
            table: vec![
                ("a".into(), "a".into(), "a".into()),
                ("a".into(), "b".into(), "b".into()),
            ],
        };
        let psg = file.to_psg().unwrap();
        assert_eq!(psg.compose(0, 0), Some(0));
        assert_eq!(psg.compose(0, 1), Some(1));
        assert_eq!(psg.compose(1, 1), None);

        let bad = PsgFile {
            elements: vec!["a".into()],
            table: vec![("a".into(), "z".into(), "a".into())],
        };
        assert!(matches!(bad.to_psg(), Err(Error::Lookup(_))));
    }

    #[test]
    fn sig_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(1.0, 10), "1.000000000e0");
        assert_eq!(fmt_sig(-0.5, 3), "-5.00e-1");
        let z = Complex64::new(0.25, -0.125);
        assert_eq!(fmt_complex(z, 3), "2.50e-1 - i·1.25e-1");
    }

    #[test]
    fn structured_probability_report_is_valid_json() {
        let s = builtin_spin_half();
        let family = s.family(&tol()).unwrap();
        let dm = decoherence_matrix(&family, &tol()).unwrap();
        let table = probabilities(&dm, Condition::Weak, DEFAULT_EPSILON).unwrap();
        let names = branch_names(&family);
        let out = render_probabilities(&table, &names, ReportFormat::Structured);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["entries"].as_array().unwrap().len(), 4);
        // branch names resolved from projector labels
        assert_eq!(v["entries"][0]["name"], "+,+");
    }
}
