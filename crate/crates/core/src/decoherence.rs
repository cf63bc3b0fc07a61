//! Decoherence functionals (standard and time-symmetric), consistency
//! conditions, probability assignment, interference analysis, and the
//! sequential-collapse oracle.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::histories::{chain_operator, completeness_residual, HistoryFamily, Label};
use crate::kinematics::propagator;
use crate::matrix::{self, CMatrix, Tolerance};

/// Which decoherence condition gates probability assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Re d(α,β) = 0 for α ≠ β; necessary and sufficient for the
    /// probability sum rules.
    Weak,
    /// d(α,β) = 0 for α ≠ β; stronger and more commonly used.
    Medium,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Weak => write!(f, "weak"),
            Condition::Medium => write!(f, "medium"),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoherenceKind {
    Standard,
    TimeSymmetric,
}

/// The Hermitian matrix of d(α,β) values over a family's histories.
#[derive(Debug, Clone)]
pub struct DecoherenceMatrix {
    labels: Vec<Label>,
    entries: CMatrix,
    pub kind: DecoherenceKind,
}

impl DecoherenceMatrix {
    /// Wraps a raw matrix, enforcing hermiticity, nonnegative diagonal and
    /// unit entry sum within tolerance.
    pub fn new(
        labels: Vec<Label>,
        entries: CMatrix,
        kind: DecoherenceKind,
        tol: &Tolerance,
    ) -> Result<Self> {
        if entries.nrows() != labels.len() || entries.ncols() != labels.len() {
            return Err(Error::Shape(
                "decoherence matrix must be square over the labels".into(),
            ));
        }
        let herm = matrix::max_abs_diff(&entries.adjoint(), &entries);
        if herm > tol.abs_eps.max(1e-9) {
            return Err(Error::Numeric(format!(
                "decoherence matrix not Hermitian, residual {herm:.3e}"
            )));
        }
        for i in 0..labels.len() {
            if entries[(i, i)].re < -tol.abs_eps {
                return Err(Error::Numeric(format!(
                    "negative diagonal entry {:.3e} at {:?}",
                    entries[(i, i)].re,
                    labels[i]
                )));
            }
        }
        let sum: Complex64 = entries.iter().sum();
        if (sum - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::Numeric(format!(
                "decoherence matrix entries sum to {sum} instead of 1"
            )));
        }
        Ok(DecoherenceMatrix {
            labels,
            entries,
            kind,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, alpha: &[usize], beta: &[usize]) -> Result<Complex64> {
        let i = self.index_of(alpha)?;
        let j = self.index_of(beta)?;
        Ok(self.entries[(i, j)])
    }

    fn index_of(&self, label: &[usize]) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Lookup(format!("{label:?}")))
    }
}

/// One flagged pair of an ε-consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyViolation {
    pub alpha: Label,
    pub beta: Label,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub condition: Condition,
    pub epsilon: f64,
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.consistent() {
            write!(
                f,
                "{}-consistent at ε = {:.1e}",
                self.condition, self.epsilon
            )
        } else {
            writeln!(
                f,
                "{} condition violated at ε = {:.1e} by {} pair(s):",
                self.condition,
                self.epsilon,
                self.violations.len()
            )?;
            for v in &self.violations {
                writeln!(
                    f,
                    "  ({:?}, {:?}): residual {:.6e}",
                    v.alpha, v.beta, v.residual
                )?;
            }
            Ok(())
        }
    }
}

/// Probabilities p(α) = d(α,α) over a consistent family.
#[derive(Debug, Clone)]
pub struct ProbabilityTable {
    pub entries: Vec<(Label, f64)>,
    /// |Σ p(α) − 1| before clamping; reported because ε-approximate
    /// consistency gives no a-priori bound on the sum rule.
    pub sum_residual: f64,
}

impl ProbabilityTable {
    pub fn probability(&self, label: &[usize]) -> Result<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::Lookup(format!("{label:?}")))
    }
}

fn chain_operators(family: &HistoryFamily) -> Result<Vec<(Label, CMatrix)>> {
    family
        .histories()
        .iter()
        .map(|h| chain_operator(family, &h.label).map(|c| (c.label, c.matrix)))
        .collect()
}

/// d(α,β) = Tr(C_α ρ C_β†) over the whole family.
pub fn decoherence_matrix(family: &HistoryFamily, tol: &Tolerance) -> Result<DecoherenceMatrix> {
    let residual = completeness_residual(family)?;
    if residual > tol.abs_eps.max(1e-9) {
        return Err(Error::Incomplete { residual });
    }
    let chains = chain_operators(family)?;
    let rho = family.initial_state().matrix();
    let n = chains.len();
    let mut entries = matrix::zeros(n, n);
    for (i, (_, ca)) in chains.iter().enumerate() {
        let ca_rho = ca * rho;
        for (j, (_, cb)) in chains.iter().enumerate() {
            entries[(i, j)] = (&ca_rho * cb.adjoint()).trace();
        }
    }
    let labels = chains.into_iter().map(|(l, _)| l).collect();
    DecoherenceMatrix::new(labels, entries, DecoherenceKind::Standard, tol)
}

/// d(α,β) = N Tr(ρ_f C_α ρ_in C_β†), with N fixed by the normalization
/// axiom Σ d = 1.
pub fn time_symmetric_decoherence_matrix(
    family: &HistoryFamily,
    tol: &Tolerance,
) -> Result<DecoherenceMatrix> {
    let rho_f = family
        .final_state()
        .ok_or_else(|| Error::Domain("time-symmetric functional requires a final state".into()))?
        .matrix()
        .clone();
    let residual = completeness_residual(family)?;
    if residual > tol.abs_eps.max(1e-9) {
        return Err(Error::Incomplete { residual });
    }
    let chains = chain_operators(family)?;
    let rho_in = family.initial_state().matrix();
    let n = chains.len();
    let mut entries = matrix::zeros(n, n);
    for (i, (_, ca)) in chains.iter().enumerate() {
        let left = &rho_f * ca * rho_in;
        for (j, (_, cb)) in chains.iter().enumerate() {
            entries[(i, j)] = (&left * cb.adjoint()).trace();
        }
    }
    let sum: Complex64 = entries.iter().sum();
    if sum.norm() <= tol.abs_eps {
        return Err(Error::Domain(
            "degenerate posterior: time-symmetric normalization sum vanishes".into(),
        ));
    }
    let entries = entries.map(|z| z / sum);
    let labels = chains.into_iter().map(|(l, _)| l).collect();
    DecoherenceMatrix::new(labels, entries, DecoherenceKind::TimeSymmetric, tol)
}

/// Flags off-diagonal pairs violating the chosen condition. The residual
/// is scaled by max(1, √(d(α,α)·d(β,β))) so verdicts do not depend on the
/// family size.
pub fn check_consistency(
    dm: &DecoherenceMatrix,
    condition: Condition,
    epsilon: f64,
) -> Result<ConsistencyReport> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain(
            "epsilon must be finite and nonnegative".into(),
        ));
    }
    let n = dm.labels.len();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dm.entries[(i, j)];
            let scale = (dm.entries[(i, i)].re.max(0.0) * dm.entries[(j, j)].re.max(0.0))
                .sqrt()
                .max(1.0);
            let residual = match condition {
                Condition::Weak => d.re.abs(),
                Condition::Medium => d.norm(),
            };
            if residual > epsilon * scale {
                violations.push(ConsistencyViolation {
                    alpha: dm.labels[i].clone(),
                    beta: dm.labels[j].clone(),
                    residual,
                });
            }
        }
    }
    Ok(ConsistencyReport {
        condition,
        epsilon,
        violations,
    })
}

/// p(α) = d(α,α); refuses when the family fails the chosen consistency
/// condition.
pub fn probabilities(
    dm: &DecoherenceMatrix,
    condition: Condition,
    epsilon: f64,
) -> Result<ProbabilityTable> {
    let report = check_consistency(dm, condition, epsilon)?;
    if !report.consistent() {
        return Err(Error::Inconsistent(report));
    }
    let mut entries = Vec::with_capacity(dm.labels.len());
    let mut sum = 0.0;
    for (i, label) in dm.labels.iter().enumerate() {
        let p = dm.entries[(i, i)].re;
        sum += p;
        entries.push((label.clone(), p.clamp(0.0, 1.0)));
    }
    Ok(ProbabilityTable {
        entries,
        sum_residual: (sum - 1.0).abs(),
    })
}

/// Diagonal values and interference term for a pair of histories that
/// differ by orthogonal projectors at exactly one time.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceRecord {
    pub p_alpha: f64,
    pub p_beta: f64,
    /// 2·Re d(α,β), the term that breaks the OR sum rule.
    pub cross: f64,
    /// Probability of the OR history, from C_γ = C_α + C_β.
    pub p_or: f64,
}

pub fn interference_decomposition(
    family: &HistoryFamily,
    label_alpha: &[usize],
    label_beta: &[usize],
    tol: &Tolerance,
) -> Result<InterferenceRecord> {
    if label_alpha == label_beta {
        return Err(Error::Domain(
            "interference requires two distinct histories".into(),
        ));
    }
    let ha = family.history(label_alpha)?;
    let hb = family.history(label_beta)?;
    let mut differing = Vec::new();
    for (j, (ea, eb)) in ha.events().iter().zip(hb.events().iter()).enumerate() {
        if matrix::max_abs_diff(ea.projector.matrix(), eb.projector.matrix()) > tol.abs_eps {
            differing.push(j);
        }
    }
    if differing.len() != 1 {
        return Err(Error::Domain(format!(
            "histories must differ at exactly one time, found {} differing slots",
            differing.len()
        )));
    }
    let j = differing[0];
    let p = ha.events()[j].projector.matrix();
    let q = hb.events()[j].projector.matrix();
    if matrix::max_abs(&(p * q)) > tol.abs_eps {
        return Err(Error::Domain(
            "the differing projectors must be mutually orthogonal".into(),
        ));
    }
    let ca = chain_operator(family, label_alpha)?.matrix;
    let cb = chain_operator(family, label_beta)?.matrix;
    let rho = family.initial_state().matrix();
    let d_aa = (&ca * rho * ca.adjoint()).trace().re;
    let d_bb = (&cb * rho * cb.adjoint()).trace().re;
    let d_ab = (&ca * rho * cb.adjoint()).trace();
    let c_or = &ca + &cb;
    let p_or = (&c_or * rho * c_or.adjoint()).trace().re;
    Ok(InterferenceRecord {
        p_alpha: d_aa,
        p_beta: d_bb,
        cross: 2.0 * d_ab.re,
        p_or,
    })
}

/// Probability of a history by explicit alternation of unitary evolution
/// and projection/renormalization over the ensemble decomposition of ρ,
/// multiplying the conditional probabilities p_1 p_2 … p_n.
///
/// This is an independent route to the same number as the decoherence
/// matrix diagonal; it never touches chain operators.
pub fn collapse_oracle(family: &HistoryFamily, label: &[usize]) -> Result<f64> {
    let history = family.history(label)?;
    let dyn_ = family.dynamics();
    let rho = family.initial_state().matrix();

    // ensemble decomposition ρ = Σ w_i |φ_i⟩⟨φ_i| via the spectral theorem
    let mut total = 0.0;
    for (weight, vector) in matrix::hermitian_eigenpairs(rho) {
        if weight <= 1e-14 {
            continue;
        }
        let mut state = nalgebra::DVector::from_vec(vector);
        let mut t_prev = dyn_.reference_time;
        let mut joint = 1.0;
        let mut dead = false;
        for event in history.events() {
            let u = propagator(dyn_, t_prev, event.time)?;
            state = &u * state;
            let projected = event.projector.matrix() * &state;
            let p_cond = projected.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if p_cond <= 0.0 {
                // zero-probability branch: no renormalization possible
                dead = true;
                break;
            }
            joint *= p_cond;
            state = projected / Complex64::new(p_cond.sqrt(), 0.0);
            t_prev = event.time;
        }
        if !dead {
            total += weight * joint;
        }
    }
    Ok(total)
}

/// Residuals of the generalized decoherence-functional axioms, evaluated
/// on a matrix and a coarse-graining of its labels.
#[derive(Debug, Clone)]
pub struct FunctionalAxiomReport {
    pub hermiticity_residual: f64,
    pub min_diagonal: f64,
    pub normalization_residual: f64,
    /// Residuals of the coarse (block-summed) matrix against the same
    /// axioms: biadditivity must preserve them.
    pub coarse_hermiticity_residual: f64,
    pub coarse_min_diagonal: f64,
    pub coarse_normalization_residual: f64,
}

impl FunctionalAxiomReport {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        let eps = tol.abs_eps.max(1e-9);
        self.hermiticity_residual <= eps
            && self.min_diagonal >= -eps
            && self.normalization_residual <= eps
            && self.coarse_hermiticity_residual <= eps
            && self.coarse_min_diagonal >= -eps
            && self.coarse_normalization_residual <= eps
    }
}

/// Block-sums a decoherence matrix over a partition of its label indices.
/// This is the biadditivity axiom as a computation: coarse entries are
/// d(ᾱ,β̄) = Σ_{α∈ᾱ} Σ_{β∈β̄} d(α,β).
pub fn block_sum(dm: &DecoherenceMatrix, partition: &[Vec<usize>]) -> Result<CMatrix> {
    let n = dm.labels.len();
    let mut seen = vec![false; n];
    for group in partition {
        for &i in group {
            if i >= n || seen[i] {
                return Err(Error::Domain(format!(
                    "partition must cover each of the {n} labels exactly once"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Domain("partition must cover all labels".into()));
    }
    let m = partition.len();
    let mut coarse = matrix::zeros(m, m);
    for (a, ga) in partition.iter().enumerate() {
        for (b, gb) in partition.iter().enumerate() {
            let mut sum = Complex64::new(0.0, 0.0);
            for &i in ga {
                for &j in gb {
                    sum += dm.entries[(i, j)];
                }
            }
            coarse[(a, b)] = sum;
        }
    }
    Ok(coarse)
}

pub fn validate_generalized_functional(
    dm: &DecoherenceMatrix,
    partition: &[Vec<usize>],
) -> Result<FunctionalAxiomReport> {
    let coarse = block_sum(dm, partition)?;
    let diag_min = |m: &CMatrix| {
        (0..m.nrows())
            .map(|i| m[(i, i)].re)
            .fold(f64::INFINITY, f64::min)
    };
    let sum_res = |m: &CMatrix| {
        let s: Complex64 = m.iter().sum();
        (s - Complex64::new(1.0, 0.0)).norm()
    };
    Ok(FunctionalAxiomReport {
        hermiticity_residual: matrix::max_abs_diff(&dm.entries.adjoint(), &dm.entries),
        min_diagonal: diag_min(&dm.entries),
        normalization_residual: sum_res(&dm.entries),
        coarse_hermiticity_residual: matrix::max_abs_diff(&coarse.adjoint(), &coarse),
        coarse_min_diagonal: diag_min(&coarse),
        coarse_normalization_residual: sum_res(&coarse),
    })
}
