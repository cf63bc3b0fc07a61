//! Relations between consistent history families: refinement,
//! compatibility and complementarity.
//!
//! Compatibility does not search the space of all conceivable refinements:
//! for product families over fixed times a common refinement exists iff all
//! cross pairs of projectors commute, in which case the product
//! decomposition is the canonical common refinement. That candidate is the
//! only one tested.

use std::fmt;

use crate::decoherence::{check_consistency, decoherence_matrix, Condition};
use crate::error::{Error, Result};
use crate::histories::{product_family, FamilyStructure, HistoryFamily, TemporalSupport};
use crate::kinematics::{DecompositionOfUnity, Projector};
use crate::matrix::{self, Tolerance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// The first family refines the second.
    Refines,
    /// The first family coarsens the second.
    Coarsens,
    /// A common consistent refinement exists.
    Compatible,
    /// A common refinement exists but is not consistent.
    Incompatible,
    /// Both families are consistent but no common refinement exists
    /// (non-commuting decompositions at a shared time).
    Complementary,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Refines => "refines",
            Relation::Coarsens => "coarsens",
            Relation::Compatible => "compatible",
            Relation::Incompatible => "incompatible",
            Relation::Complementary => "complementary",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct FamilyRelationReport {
    pub relation: Relation,
    /// The common refinement, when one exists.
    pub witness: Option<HistoryFamily>,
    /// Human-readable reason when no common refinement exists or it is
    /// inconsistent.
    pub obstruction: Option<String>,
}

fn product_decomps(f: &HistoryFamily) -> Result<&[DecompositionOfUnity]> {
    match f.structure() {
        FamilyStructure::Product(d) => Ok(d),
        FamilyStructure::BranchDependent => Err(Error::UnsupportedStructure(
            "family relations are defined for product families only".into(),
        )),
    }
}

fn times_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

/// True iff `g` refines `f`: supp(g) ⊇ supp(f), and at each time of f the
/// decomposition used by g is the same or finer (every projector of f is a
/// sum of projectors of g).
pub fn is_refinement(g: &HistoryFamily, f: &HistoryFamily, tol: &Tolerance) -> Result<bool> {
    let gd = product_decomps(g)?;
    let fd = product_decomps(f)?;
    if g.dim() != f.dim() {
        return Ok(false);
    }
    for (ft, fdec) in f.support().times().iter().zip(fd) {
        let Some(gi) = g
            .support()
            .times()
            .iter()
            .position(|gt| times_equal(*gt, *ft))
        else {
            return Ok(false);
        };
        let gdec = &gd[gi];
        for p in fdec.projectors() {
            // members of g's decomposition lying under P
            let mut sum = matrix::zeros(f.dim(), f.dim());
            for q in gdec.projectors() {
                let pq = p.matrix() * q.matrix();
                if matrix::max_abs_diff(&pq, q.matrix()) <= tol.abs_eps {
                    sum += q.matrix();
                }
            }
            if matrix::max_abs_diff(&sum, p.matrix()) > tol.abs_eps {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Outcome of the canonical common-refinement construction.
#[derive(Debug, Clone)]
pub enum RefinementOutcome {
    Refinement(HistoryFamily),
    /// Non-commuting projector pair at a shared time.
    Obstructed {
        time: f64,
        first: String,
        second: String,
    },
}

/// Builds the product-decomposition common refinement of two product
/// families over the union of their supports, or reports the first
/// non-commuting obstruction.
pub fn common_refinement(
    f1: &HistoryFamily,
    f2: &HistoryFamily,
    tol: &Tolerance,
) -> Result<RefinementOutcome> {
    let d1 = product_decomps(f1)?;
    let d2 = product_decomps(f2)?;
    if f1.dim() != f2.dim() {
        return Err(Error::Domain(
            "families live on different Hilbert spaces".into(),
        ));
    }
    let dyn1 = f1.dynamics();
    let dyn2 = f2.dynamics();
    if matrix::max_abs_diff(dyn1.hamiltonian(), dyn2.hamiltonian()) > tol.abs_eps
        || !times_equal(dyn1.reference_time, dyn2.reference_time)
    {
        return Err(Error::Domain("families have different dynamics".into()));
    }
    if matrix::max_abs_diff(f1.initial_state().matrix(), f2.initial_state().matrix()) > tol.abs_eps
    {
        return Err(Error::Domain(
            "families have different initial states".into(),
        ));
    }

    // merged, sorted union of the two supports
    let mut times: Vec<f64> = f1.support().times().to_vec();
    for &t in f2.support().times() {
        if !times.iter().any(|&u| times_equal(u, t)) {
            times.push(t);
        }
    }
    times.sort_by(|a, b| a.total_cmp(b));

    let mut decomps = Vec::with_capacity(times.len());
    for &t in &times {
        let a = f1
            .support()
            .times()
            .iter()
            .position(|&u| times_equal(u, t))
            .map(|i| &d1[i]);
        let b = f2
            .support()
            .times()
            .iter()
            .position(|&u| times_equal(u, t))
            .map(|i| &d2[i]);
        let decomp = match (a, b) {
            (Some(da), None) => da.clone(),
            (None, Some(db)) => db.clone(),
            (Some(da), Some(db)) => {
                for p in da.projectors() {
                    for q in db.projectors() {
                        let comm = p.matrix() * q.matrix() - q.matrix() * p.matrix();
                        if matrix::max_abs(&comm) > tol.abs_eps {
                            return Ok(RefinementOutcome::Obstructed {
                                time: t,
                                first: p.label.clone(),
                                second: q.label.clone(),
                            });
                        }
                    }
                }
                // commuting: the products PQ refine both decompositions;
                // zero products correspond to impossible label pairs and
                // are dropped
                let mut projectors = Vec::new();
                for p in da.projectors() {
                    for q in db.projectors() {
                        let pq = p.matrix() * q.matrix();
                        if matrix::max_abs(&pq) > tol.abs_eps {
                            projectors.push(Projector::new(
                                pq,
                                format!("{}&{}", p.label, q.label),
                                tol,
                            )?);
                        }
                    }
                }
                DecompositionOfUnity::new(projectors, t, tol)?
            }
            (None, None) => unreachable!("time came from one of the supports"),
        };
        decomps.push(decomp);
    }
    let support = TemporalSupport::new(times)?;
    let family = product_family(
        support,
        decomps,
        f1.dynamics().clone(),
        f1.initial_state().clone(),
        tol,
    )?;
    Ok(RefinementOutcome::Refinement(family))
}

/// Decides compatibility of two individually consistent families.
pub fn are_compatible(
    f1: &HistoryFamily,
    f2: &HistoryFamily,
    condition: Condition,
    epsilon: f64,
    tol: &Tolerance,
) -> Result<FamilyRelationReport> {
    for f in [f1, f2] {
        let dm = decoherence_matrix(f, tol)?;
        let report = check_consistency(&dm, condition, epsilon)?;
        if !report.consistent() {
            return Err(Error::Inconsistent(report));
        }
    }
    match common_refinement(f1, f2, tol)? {
        RefinementOutcome::Obstructed {
            time,
            first,
            second,
        } => Ok(FamilyRelationReport {
            relation: Relation::Complementary,
            witness: None,
            obstruction: Some(format!(
                "projectors {first} and {second} do not commute at time {time}"
            )),
        }),
        RefinementOutcome::Refinement(witness) => {
            let dm = decoherence_matrix(&witness, tol)?;
            let report = check_consistency(&dm, condition, epsilon)?;
            if !report.consistent() {
                return Ok(FamilyRelationReport {
                    relation: Relation::Incompatible,
                    witness: None,
                    obstruction: Some(format!("common refinement is inconsistent: {report}")),
                });
            }
            let relation = if is_refinement(f1, f2, tol)? {
                Relation::Refines
            } else if is_refinement(f2, f1, tol)? {
                Relation::Coarsens
            } else {
                Relation::Compatible
            };
            Ok(FamilyRelationReport {
                relation,
                witness: Some(witness),
                obstruction: None,
            })
        }
    }
}
