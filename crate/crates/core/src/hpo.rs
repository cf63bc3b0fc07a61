//! History projection operators on the n-fold tensor power of the Hilbert
//! space, and the orthoalgebra operations on history propositions.
//!
//! Homogeneity is tracked structurally, by construction provenance: a raw
//! matrix is never inspected for tensor factorizability.

use crate::error::{Error, Result};
use crate::histories::{chain_operator, History, HistoryFamily};
use crate::kinematics::HilbertSpace;
use crate::matrix::{self, CMatrix, Tolerance};

/// Dense tensor spaces explode quickly; everything of interest here is
/// exercised at qubit/qutrit scale.
pub const MAX_HPO_DIM: usize = 4096;

/// How an HPO projector was built.
#[derive(Debug, Clone, PartialEq)]
pub enum HpoStructure {
    /// slot_1 ⊗ … ⊗ slot_n of per-slot projectors.
    Homogeneous(Vec<CMatrix>),
    /// Sum of pairwise orthogonal homogeneous terms (inhomogeneous in
    /// general). `complement_of` records the homogeneous projector this
    /// sum negates, when it was produced by negation.
    Sum {
        terms: Vec<Vec<CMatrix>>,
        complement_of: Option<Vec<CMatrix>>,
    },
}

/// A projector on H̃ = H ⊗ … ⊗ H (n slots).
#[derive(Debug, Clone, PartialEq)]
pub struct HpoProjector {
    matrix: CMatrix,
    n_slots: usize,
    slot_dim: usize,
    structure: HpoStructure,
}

impl HpoProjector {
    pub fn homogeneous(slots: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Shape(
                "an HPO projector needs at least one slot".into(),
            ));
        }
        let slot_dim = slots[0].nrows();
        let mut total_dim = 1usize;
        for (j, s) in slots.iter().enumerate() {
            if s.nrows() != slot_dim || s.ncols() != slot_dim {
                return Err(Error::Shape(format!("slot {j} has mismatched dimensions")));
            }
            if !matrix::is_projector(s, tol) {
                return Err(Error::Domain(format!("slot {j} is not a projector")));
            }
            total_dim = total_dim
                .checked_mul(slot_dim)
                .filter(|&d| d <= MAX_HPO_DIM)
                .ok_or_else(|| {
                    Error::Domain(format!("HPO dimension exceeds the cap of {MAX_HPO_DIM}"))
                })?;
        }
        let mut m = slots[0].clone();
        for s in &slots[1..] {
            m = matrix::kron(&m, s);
        }
        Ok(HpoProjector {
            matrix: m,
            n_slots: slots.len(),
            slot_dim,
            structure: HpoStructure::Homogeneous(slots),
        })
    }

    /// The unit proposition I ⊗ … ⊗ I.
    pub fn unit(n_slots: usize, slot_dim: usize, tol: &Tolerance) -> Result<Self> {
        Self::homogeneous(vec![matrix::identity(slot_dim); n_slots], tol)
    }

    /// The null proposition (zero matrix).
    pub fn zero(n_slots: usize, slot_dim: usize) -> Result<Self> {
        let total = slot_dim
            .checked_pow(n_slots as u32)
            .filter(|&d| d <= MAX_HPO_DIM)
            .ok_or_else(|| {
                Error::Domain(format!("HPO dimension exceeds the cap of {MAX_HPO_DIM}"))
            })?;
        Ok(HpoProjector {
            matrix: matrix::zeros(total, total),
            n_slots,
            slot_dim,
            structure: HpoStructure::Sum {
                terms: vec![],
                complement_of: None,
            },
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn slot_dim(&self) -> usize {
        self.slot_dim
    }

    pub fn structure(&self) -> &HpoStructure {
        &self.structure
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.structure, HpoStructure::Homogeneous(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryProposition {
    pub hpo: HpoProjector,
    pub label: String,
}

/// Embeds a history kinematically as the homogeneous projector
/// P_1 ⊗ … ⊗ P_n. Dynamics does not enter here; time labels give the slot
/// order only.
pub fn hpo_embed(history: &History, space: HilbertSpace, tol: &Tolerance) -> Result<HpoProjector> {
    let slots: Vec<CMatrix> = history
        .events()
        .iter()
        .map(|e| {
            if e.projector.dim() != space.dim {
                Err(Error::Shape(format!(
                    "projector at time {} has dimension {} ≠ {}",
                    e.time,
                    e.projector.dim(),
                    space.dim
                )))
            } else {
                Ok(e.projector.matrix().clone())
            }
        })
        .collect::<Result<_>>()?;
    HpoProjector::homogeneous(slots, tol)
}

/// ¬p. For homogeneous p = P_1 ⊗ … ⊗ P_n the result carries the expansion
/// into the 2ⁿ − 1 pairwise orthogonal homogeneous terms built from all
/// slot patterns of {P_j, I − P_j} except the all-P pattern.
pub fn hpo_negate(p: &HpoProjector, tol: &Tolerance) -> Result<HpoProjector> {
    let total = p.matrix.nrows();
    let complement = matrix::identity(total) - &p.matrix;
    match &p.structure {
        HpoStructure::Homogeneous(slots) => {
            let n = slots.len();
            let dim = p.slot_dim;
            let negs: Vec<CMatrix> = slots.iter().map(|s| matrix::identity(dim) - s).collect();
            let mut terms = Vec::with_capacity((1usize << n) - 1);
            // bit k of the pattern selects I−P at slot k
            for pattern in 1u32..(1 << n) {
                let term: Vec<CMatrix> = (0..n)
                    .map(|k| {
                        if pattern & (1 << k) != 0 {
                            negs[k].clone()
                        } else {
                            slots[k].clone()
                        }
                    })
                    .collect();
                terms.push(term);
            }
            Ok(HpoProjector {
                matrix: complement,
                n_slots: n,
                slot_dim: dim,
                structure: HpoStructure::Sum {
                    terms,
                    complement_of: Some(slots.clone()),
                },
            })
        }
        HpoStructure::Sum {
            complement_of: Some(slots),
            ..
        } => {
            // ¬¬α = α
            HpoProjector::homogeneous(slots.clone(), tol)
        }
        HpoStructure::Sum {
            terms,
            complement_of: None,
        } if terms.is_empty() => {
            // negation of the null proposition
            HpoProjector::unit(p.n_slots, p.slot_dim, tol)
        }
        HpoStructure::Sum { .. } => Err(Error::Domain(
            "negation of a general inhomogeneous projector has no homogeneous expansion".into(),
        )),
    }
}

fn check_same_shape(a: &HistoryProposition, b: &HistoryProposition) -> Result<()> {
    if a.hpo.n_slots != b.hpo.n_slots || a.hpo.matrix.nrows() != b.hpo.matrix.nrows() {
        return Err(Error::Shape(format!(
            "propositions live on different spaces: {} slots of dim {} vs {} slots of dim {}",
            a.hpo.n_slots, a.hpo.slot_dim, b.hpo.n_slots, b.hpo.slot_dim
        )));
    }
    Ok(())
}

/// α ≤ β: subspace containment, ab = ba = a.
pub fn prop_leq(a: &HistoryProposition, b: &HistoryProposition, tol: &Tolerance) -> Result<bool> {
    check_same_shape(a, b)?;
    let (ma, mb) = (&a.hpo.matrix, &b.hpo.matrix);
    let ab = ma * mb;
    let ba = mb * ma;
    Ok(
        matrix::max_abs_diff(&ab, ma) <= tol.abs_eps
            && matrix::max_abs_diff(&ba, ma) <= tol.abs_eps,
    )
}

/// α ⊥ β: mutual exclusion, ab = 0.
pub fn prop_disjoint(
    a: &HistoryProposition,
    b: &HistoryProposition,
    tol: &Tolerance,
) -> Result<bool> {
    check_same_shape(a, b)?;
    Ok(matrix::max_abs(&(&a.hpo.matrix * &b.hpo.matrix)) <= tol.abs_eps)
}

/// α ⊕ β for disjoint propositions: the matrix sum, which is again a
/// projector.
pub fn prop_ojoin(
    a: &HistoryProposition,
    b: &HistoryProposition,
    tol: &Tolerance,
) -> Result<HistoryProposition> {
    if !prop_disjoint(a, b, tol)? {
        return Err(Error::Domain(
            "⊕ is defined only for disjoint propositions".into(),
        ));
    }
    let m = &a.hpo.matrix + &b.hpo.matrix;
    let collect_terms = |p: &HpoProjector| -> Vec<Vec<CMatrix>> {
        match &p.structure {
            HpoStructure::Homogeneous(slots) => vec![slots.clone()],
            HpoStructure::Sum { terms, .. } => terms.clone(),
        }
    };
    let mut terms = collect_terms(&a.hpo);
    terms.extend(collect_terms(&b.hpo));
    Ok(HistoryProposition {
        hpo: HpoProjector {
            matrix: m,
            n_slots: a.hpo.n_slots,
            slot_dim: a.hpo.slot_dim,
            structure: HpoStructure::Sum {
                terms,
                complement_of: None,
            },
        },
        label: format!("{}⊕{}", a.label, b.label),
    })
}

/// Findings of the orthoalgebra axiom scan over a finite proposition set.
#[derive(Debug, Clone, Default)]
pub struct OrthoalgebraReport {
    pub issues: Vec<String>,
    /// Axioms that could not be checked because a required element is
    /// missing from the supplied set.
    pub notes: Vec<String>,
}

impl OrthoalgebraReport {
    pub fn passes(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks the orthoalgebra axioms on the supplied set: ⊕ behaviour on
/// disjoint pairs, the order/⊕ relation, uniqueness and involutivity of
/// negation, and 0/1 behaviour.
pub fn orthoalgebra_axiom_suite(
    props: &[HistoryProposition],
    tol: &Tolerance,
) -> Result<OrthoalgebraReport> {
    let mut report = OrthoalgebraReport::default();
    if props.is_empty() {
        report
            .notes
            .push("empty proposition set; nothing to check".into());
        return Ok(report);
    }
    for p in props {
        check_same_shape(&props[0], p)?;
        if !matrix::is_projector(&p.hpo.matrix, tol) {
            report.issues.push(format!(
                "'{}' is not a projector on the tensor space",
                p.label
            ));
        }
    }
    if !report.issues.is_empty() {
        return Ok(report);
    }
    let total = props[0].hpo.matrix.nrows();
    let unit = matrix::identity(total);

    let zero_present = props
        .iter()
        .any(|p| matrix::max_abs(&p.hpo.matrix) <= tol.abs_eps);
    let unit_present = props
        .iter()
        .any(|p| matrix::max_abs_diff(&p.hpo.matrix, &unit) <= tol.abs_eps);
    if !zero_present {
        report
            .notes
            .push("null proposition 0 not in the supplied set".into());
    }
    if !unit_present {
        report
            .notes
            .push("unit proposition 1 not in the supplied set".into());
    }

    for (i, a) in props.iter().enumerate() {
        // 0 ≤ α ≤ 1 is automatic for projectors; check ¬¬α = α and
        // uniqueness of negation at the matrix level
        let neg = &unit - &a.hpo.matrix;
        if !matrix::is_projector(&neg, tol) {
            report
                .issues
                .push(format!("complement of '{}' is not a projector", a.label));
            continue;
        }
        let neg_neg = &unit - &neg;
        if matrix::max_abs_diff(&neg_neg, &a.hpo.matrix) > tol.abs_eps {
            report
                .issues
                .push(format!("¬¬ does not return '{}'", a.label));
        }
        // any disjoint b with a ⊕ b = 1 must equal ¬a
        for b in props {
            let sum = &a.hpo.matrix + &b.hpo.matrix;
            if matrix::max_abs(&(&a.hpo.matrix * &b.hpo.matrix)) <= tol.abs_eps
                && matrix::max_abs_diff(&sum, &unit) <= tol.abs_eps
                && matrix::max_abs_diff(&b.hpo.matrix, &neg) > tol.abs_eps
            {
                report.issues.push(format!(
                    "negation of '{}' is not unique: '{}' also completes it",
                    a.label, b.label
                ));
            }
        }
        for (j, b) in props.iter().enumerate() {
            let disjoint = matrix::max_abs(&(&a.hpo.matrix * &b.hpo.matrix)) <= tol.abs_eps;
            if disjoint {
                let sum = &a.hpo.matrix + &b.hpo.matrix;
                if !matrix::is_projector(&sum, tol) {
                    report.issues.push(format!(
                        "⊕ of disjoint '{}' and '{}' is not a projector",
                        a.label, b.label
                    ));
                }
                // associativity across disjoint chains
                for c in props.iter().skip(j + 1) {
                    let bc_disjoint =
                        matrix::max_abs(&(&b.hpo.matrix * &c.hpo.matrix)) <= tol.abs_eps;
                    let ac_disjoint =
                        matrix::max_abs(&(&a.hpo.matrix * &c.hpo.matrix)) <= tol.abs_eps;
                    if bc_disjoint && ac_disjoint {
                        let left = &sum + &c.hpo.matrix;
                        let right = &a.hpo.matrix + (&b.hpo.matrix + &c.hpo.matrix);
                        if matrix::max_abs_diff(&left, &right) > tol.abs_eps {
                            report.issues.push(format!(
                                "⊕ not associative over '{}', '{}', '{}'",
                                a.label, b.label, c.label
                            ));
                        }
                    }
                }
            }
            // α ≤ β iff γ := β − α is a projector disjoint from α
            if i != j {
                let leq = {
                    let ab = &a.hpo.matrix * &b.hpo.matrix;
                    let ba = &b.hpo.matrix * &a.hpo.matrix;
                    matrix::max_abs_diff(&ab, &a.hpo.matrix) <= tol.abs_eps
                        && matrix::max_abs_diff(&ba, &a.hpo.matrix) <= tol.abs_eps
                };
                let gamma = &b.hpo.matrix - &a.hpo.matrix;
                let gamma_ok = matrix::is_projector(&gamma, tol)
                    && matrix::max_abs(&(&a.hpo.matrix * &gamma)) <= tol.abs_eps;
                if leq != gamma_ok {
                    report.issues.push(format!(
                        "order/⊕ relation broken between '{}' and '{}'",
                        a.label, b.label
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// C_γ for a proposition given as a disjoint join of family labels:
/// the sum of the constituent chain operators.
pub fn chain_of_proposition(family: &HistoryFamily, labels: &[Vec<usize>]) -> Result<CMatrix> {
    if labels.is_empty() {
        return Err(Error::Domain(
            "proposition needs at least one history label".into(),
        ));
    }
    for (i, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(i + 1) {
            if a == b {
                return Err(Error::Domain(format!("label {a:?} listed twice")));
            }
        }
    }
    let dim = family.dim();
    let mut sum = matrix::zeros(dim, dim);
    for label in labels {
        sum += &chain_operator(family, label)?.matrix;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histories::{product_family, TemporalSupport};
    use crate::kinematics::{
        bloch_state, spin_decomposition, DensityOperator, Dynamics, Projector,
    };
    use crate::matrix::{identity, max_abs, max_abs_diff};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn pz() -> CMatrix {
        spin_decomposition([0.0, 0.0, 1.0], 0.0, &tol())
            .unwrap()
            .projectors()[0]
            .matrix()
            .clone()
    }

    fn px() -> CMatrix {
        spin_decomposition([1.0, 0.0, 0.0], 0.0, &tol())
            .unwrap()
            .projectors()[0]
            .matrix()
            .clone()
    }

    fn prop(name: &str, slots: Vec<CMatrix>) -> HistoryProposition {
        HistoryProposition {
            hpo: HpoProjector::homogeneous(slots, &tol()).unwrap(),
            label: name.into(),
        }
    }

    #[test]
    fn embed_two_event_history() {
        let support = TemporalSupport::new(vec![1.0, 2.0]).unwrap();
        let decomps = vec![
            spin_decomposition([0.0, 0.0, 1.0], 1.0, &tol()).unwrap(),
            spin_decomposition([1.0, 0.0, 0.0], 2.0, &tol()).unwrap(),
        ];
        let f = product_family(
            support,
            decomps,
            Dynamics::trivial(2, 0.0),
            DensityOperator::maximally_mixed(2),
            &tol(),
        )
        .unwrap();
        let h = f.history(&[0, 0]).unwrap();
        let embedded = hpo_embed(h, HilbertSpace::new(2).unwrap(), &tol()).unwrap();
        let expected = matrix::kron(&pz(), &px());
        assert!(max_abs_diff(embedded.matrix(), &expected) < 1e-12);
        assert!((embedded.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(matrix::is_projector(embedded.matrix(), &tol()));
    }

    #[test]
    fn embed_all_identity_history_gives_identity() {
        let support = TemporalSupport::new(vec![1.0, 2.0]).unwrap();
        let id =
            crate::kinematics::DecompositionOfUnity::new(vec![Projector::identity(2)], 0.0, &tol())
                .unwrap();
        let f = product_family(
            support,
            vec![id.clone(), id],
            Dynamics::trivial(2, 0.0),
            DensityOperator::maximally_mixed(2),
            &tol(),
        )
        .unwrap();
        let h = f.history(&[0, 0]).unwrap();
        let embedded = hpo_embed(h, HilbertSpace::new(2).unwrap(), &tol()).unwrap();
        assert!(max_abs_diff(embedded.matrix(), &identity(4)) < 1e-15);
    }

    #[test]
    fn negation_expansion_two_slots() {
        let p = HpoProjector::homogeneous(vec![pz(), px()], &tol()).unwrap();
        let neg = hpo_negate(&p, &tol()).unwrap();
        let HpoStructure::Sum { terms, .. } = neg.structure() else {
            panic!("expected a sum");
        };
        assert_eq!(terms.len(), 3);
        // terms pairwise orthogonal and summing to I⊗I − P⊗Q
        let matrices: Vec<CMatrix> = terms.iter().map(|t| matrix::kron(&t[0], &t[1])).collect();
        for (i, a) in matrices.iter().enumerate() {
            for b in matrices.iter().skip(i + 1) {
                assert!(max_abs(&(a * b)) < 1e-12);
            }
        }
        let sum = matrices.iter().fold(matrix::zeros(4, 4), |acc, m| acc + m);
        assert!(max_abs_diff(&sum, neg.matrix()) < 1e-12);
        assert!(max_abs_diff(neg.matrix(), &(identity(4) - p.matrix())) < 1e-15);
    }

    #[test]
    fn negation_of_unit_is_zero() {
        let unit = HpoProjector::unit(2, 2, &tol()).unwrap();
        let neg = hpo_negate(&unit, &tol()).unwrap();
        assert!(max_abs(neg.matrix()) < 1e-15);
    }

    #[test]
    fn double_negation_restores_homogeneous_input() {
        let p = HpoProjector::homogeneous(vec![pz(), px(), pz()], &tol()).unwrap();
        let neg = hpo_negate(&p, &tol()).unwrap();
        let HpoStructure::Sum { terms, .. } = neg.structure() else {
            panic!("expected a sum");
        };
        assert_eq!(terms.len(), 7);
        let back = hpo_negate(&neg, &tol()).unwrap();
        assert!(back.is_homogeneous());
        assert!(max_abs_diff(back.matrix(), p.matrix()) < 1e-12);
    }

    #[test]
    fn leq_and_disjoint_basics() {
        let id = identity(2);
        let a = prop("z+x+", vec![pz(), px()]);
        let b = prop("z+I", vec![pz(), id.clone()]);
        let unit = prop("1", vec![id.clone(), id.clone()]);
        let zero = HistoryProposition {
            hpo: HpoProjector::zero(2, 2).unwrap(),
            label: "0".into(),
        };
        assert!(prop_leq(&a, &b, &tol()).unwrap());
        assert!(!prop_leq(&b, &a, &tol()).unwrap());
        assert!(prop_leq(&a, &unit, &tol()).unwrap());
        assert!(prop_leq(&zero, &a, &tol()).unwrap());

        let zminus = identity(2) - pz();
        let c = prop("z-I", vec![zminus, id]);
        assert!(prop_disjoint(&b, &c, &tol()).unwrap());
        assert!(!prop_disjoint(&b, &b, &tol()).unwrap());
    }

    #[test]
    fn ojoin_of_complementary_slots_is_unit() {
        let id = identity(2);
        let b = prop("z+I", vec![pz(), id.clone()]);
        let zminus = identity(2) - pz();
        let c = prop("z-I", vec![zminus, id]);
        let joined = prop_ojoin(&b, &c, &tol()).unwrap();
        assert!(max_abs_diff(joined.hpo.matrix(), &identity(4)) < 1e-12);
    }

    #[test]
    fn ojoin_with_negation_gives_unit() {
        let p = HpoProjector::homogeneous(vec![pz(), px()], &tol()).unwrap();
        let neg = hpo_negate(&p, &tol()).unwrap();
        let a = HistoryProposition {
            hpo: p,
            label: "α".into(),
        };
        let na = HistoryProposition {
            hpo: neg,
            label: "¬α".into(),
        };
        let joined = prop_ojoin(&a, &na, &tol()).unwrap();
        assert!(max_abs_diff(joined.hpo.matrix(), &identity(4)) < 1e-12);
    }

    #[test]
    fn ojoin_rejects_non_disjoint() {
        let a = prop("a", vec![pz(), px()]);
        assert!(prop_ojoin(&a, &a, &tol()).is_err());
    }

    #[test]
    fn negation_terms_are_pairwise_disjoint_propositions() {
        let p = HpoProjector::homogeneous(vec![pz(), px()], &tol()).unwrap();
        let neg = hpo_negate(&p, &tol()).unwrap();
        let HpoStructure::Sum { terms, .. } = neg.structure() else {
            panic!("expected a sum");
        };
        let props: Vec<HistoryProposition> = terms
            .iter()
            .enumerate()
            .map(|(k, t)| prop(&format!("t{k}"), t.clone()))
            .collect();
        for (i, a) in props.iter().enumerate() {
            for b in props.iter().skip(i + 1) {
                assert!(prop_disjoint(a, b, &tol()).unwrap());
            }
        }
    }

    #[test]
    fn axiom_suite_on_one_slot_decomposition() {
        let id = identity(2);
        let mut props = vec![
            prop("z+", vec![pz(), id.clone()]),
            prop("z-", vec![identity(2) - pz(), id.clone()]),
            prop("1", vec![id.clone(), id]),
        ];
        props.push(HistoryProposition {
            hpo: HpoProjector::zero(2, 2).unwrap(),
            label: "0".into(),
        });
        let report = orthoalgebra_axiom_suite(&props, &tol()).unwrap();
        assert!(report.passes(), "issues: {:?}", report.issues);
        assert!(report.notes.is_empty());
    }

    #[test]
    fn axiom_suite_flags_non_projector() {
        let bad = HistoryProposition {
            hpo: HpoProjector {
                matrix: matrix::pauli_x().kronecker(&identity(2)),
                n_slots: 2,
                slot_dim: 2,
                structure: HpoStructure::Sum {
                    terms: vec![],
                    complement_of: None,
                },
            },
            label: "bad".into(),
        };
        let report = orthoalgebra_axiom_suite(&[bad], &tol()).unwrap();
        assert!(!report.passes());
    }

    #[test]
    fn axiom_suite_on_full_pattern_set() {
        // all 2² homogeneous patterns of {P, I−P} ⊗ {Q, I−Q}, plus 0 and 1
        let patterns = [
            (pz(), px()),
            (pz(), identity(2) - px()),
            (identity(2) - pz(), px()),
            (identity(2) - pz(), identity(2) - px()),
        ];
        let mut props: Vec<HistoryProposition> = patterns
            .iter()
            .enumerate()
            .map(|(k, (a, b))| prop(&format!("p{k}"), vec![a.clone(), b.clone()]))
            .collect();
        props.push(prop("1", vec![identity(2), identity(2)]));
        props.push(HistoryProposition {
            hpo: HpoProjector::zero(2, 2).unwrap(),
            label: "0".into(),
        });
        let report = orthoalgebra_axiom_suite(&props, &tol()).unwrap();
        assert!(report.passes(), "issues: {:?}", report.issues);
    }

    #[test]
    fn chain_of_proposition_sums_chain_operators() {
        let support = TemporalSupport::new(vec![1.0, 2.0]).unwrap();
        let decomps = vec![
            spin_decomposition([1.0, 0.0, 0.0], 1.0, &tol()).unwrap(),
            spin_decomposition([0.0, 0.0, 1.0], 2.0, &tol()).unwrap(),
        ];
        let f = product_family(
            support,
            decomps,
            Dynamics::trivial(2, 0.0),
            bloch_state([1.0, 0.0, 0.0], &tol()).unwrap(),
            &tol(),
        )
        .unwrap();
        // single label
        let single = chain_of_proposition(&f, &[vec![0, 0]]).unwrap();
        let direct = chain_operator(&f, &[0, 0]).unwrap();
        assert!(max_abs_diff(&single, &direct.matrix) < 1e-15);
        // all labels: completeness
        let all: Vec<Vec<usize>> = f.labels().cloned().collect();
        let total = chain_of_proposition(&f, &all).unwrap();
        assert!(max_abs_diff(&total, &identity(2)) < 1e-12);
        // duplicate labels rejected
        assert!(chain_of_proposition(&f, &[vec![0, 0], vec![0, 0]]).is_err());
    }

    #[test]
    fn or_probability_decomposes_via_interference_terms() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let support = TemporalSupport::new(vec![1.0, 2.0]).unwrap();
        let decomps = vec![
            spin_decomposition([s, 0.0, s], 1.0, &tol()).unwrap(),
            spin_decomposition([0.0, 0.0, 1.0], 2.0, &tol()).unwrap(),
        ];
        let f = product_family(
            support,
            decomps,
            Dynamics::trivial(2, 0.0),
            bloch_state([1.0, 0.0, 0.0], &tol()).unwrap(),
            &tol(),
        )
        .unwrap();
        let dm = crate::decoherence::decoherence_matrix(&f, &tol()).unwrap();
        let c_or = chain_of_proposition(&f, &[vec![0, 0], vec![1, 0]]).unwrap();
        let rho = f.initial_state().matrix();
        let p_or = (&c_or * rho * c_or.adjoint()).trace().re;
        let d_aa = dm.entry(&[0, 0], &[0, 0]).unwrap().re;
        let d_bb = dm.entry(&[1, 0], &[1, 0]).unwrap().re;
        let d_ab = dm.entry(&[0, 0], &[1, 0]).unwrap();
        assert!((p_or - d_aa - d_bb - 2.0 * d_ab.re).abs() < 1e-10);
    }
}
