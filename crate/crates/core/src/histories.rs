//! Histories as time-ordered sequences of quantum events, family
//! construction (product and branch-dependent), coarse-graining and chain
//! operators.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kinematics::{
    heisenberg_projector, DecompositionOfUnity, DensityOperator, Dynamics, Projector,
};
use crate::matrix::{self, CMatrix, Tolerance};

/// Branch-index tuple (α_1, …, α_n), one coordinate per support time.
pub type Label = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumEvent {
    pub time: f64,
    pub projector: Projector,
}

/// A single history: nonempty time-ordered events with a branch label.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    events: Vec<QuantumEvent>,
    pub label: Label,
}

impl History {
    pub fn new(events: Vec<QuantumEvent>, label: Label) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::Domain(
                "a history must contain at least one event".into(),
            ));
        }
        for pair in events.windows(2) {
            if pair[0].time >= pair[1].time {
                return Err(Error::Domain(format!(
                    "history times must strictly increase, got {} then {}",
                    pair[0].time, pair[1].time
                )));
            }
        }
        Ok(History { events, label })
    }

    pub fn events(&self) -> &[QuantumEvent] {
        &self.events
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSupport {
    times: Vec<f64>,
}

impl TemporalSupport {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Domain("temporal support must be nonempty".into()));
        }
        for pair in times.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Domain(format!(
                    "support times must strictly increase, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(TemporalSupport { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// How a family's projectors were chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyStructure {
    /// One fixed decomposition of unity per support time.
    Product(Vec<DecompositionOfUnity>),
    /// Projector choice at each time may depend on earlier branch indices.
    BranchDependent,
}

/// An exclusive, exhaustive labeled set of histories over one support,
/// carrying the dynamics and the initial (and optional final) state.
#[derive(Debug, Clone)]
pub struct HistoryFamily {
    support: TemporalSupport,
    histories: Vec<History>,
    dynamics: Dynamics,
    initial_state: DensityOperator,
    final_state: Option<DensityOperator>,
    structure: FamilyStructure,
}

/// C_α, the time-ordered product of Heisenberg projectors. Generally not
/// itself a projector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    pub matrix: CMatrix,
    pub label: Label,
}

/// Resolves the decomposition of unity to use at the next time, given the
/// branch indices chosen so far.
pub trait BranchResolver {
    fn decomposition(&self, prefix: &[usize], time: f64) -> Result<DecompositionOfUnity>;
}

impl<F> BranchResolver for F
where
    F: Fn(&[usize], f64) -> Result<DecompositionOfUnity>,
{
    fn decomposition(&self, prefix: &[usize], time: f64) -> Result<DecompositionOfUnity> {
        self(prefix, time)
    }
}

/// All branch-index tuples for the given per-time branch counts, in
/// lexicographic order.
fn cartesian_labels(sizes: &[usize]) -> Vec<Label> {
    let mut labels: Vec<Label> = vec![vec![]];
    for &size in sizes {
        let mut next = Vec::with_capacity(labels.len() * size);
        for label in &labels {
            for a in 0..size {
                let mut l = label.clone();
                l.push(a);
                next.push(l);
            }
        }
        labels = next;
    }
    labels
}

/// Builds the family of all branch sequences over fixed per-time
/// decompositions of unity.
pub fn product_family(
    support: TemporalSupport,
    decomps: Vec<DecompositionOfUnity>,
    dynamics: Dynamics,
    initial_state: DensityOperator,
    tol: &Tolerance,
) -> Result<HistoryFamily> {
    if decomps.len() != support.len() {
        return Err(Error::Shape(format!(
            "need one decomposition per support time: {} times, {} decompositions",
            support.len(),
            decomps.len()
        )));
    }
    let dim = dynamics.dim();
    for (j, d) in decomps.iter().enumerate() {
        if d.dim() != dim {
            return Err(Error::Shape(format!(
                "decomposition {j} has dimension {} ≠ {dim}",
                d.dim()
            )));
        }
        let report = d.validate(tol);
        if !report.is_empty() {
            return Err(Error::Domain(format!(
                "decomposition {j} invalid: {}",
                report[0].constraint
            )));
        }
    }
    if initial_state.dim() != dim {
        return Err(Error::Shape("initial state dimension mismatch".into()));
    }
    let sizes: Vec<usize> = decomps.iter().map(|d| d.len()).collect();
    let mut histories = Vec::new();
    for label in cartesian_labels(&sizes) {
        let events: Vec<QuantumEvent> = label
            .iter()
            .enumerate()
            .map(|(j, &a)| QuantumEvent {
                time: support.times()[j],
                projector: decomps[j].projectors()[a].clone(),
            })
            .collect();
        histories.push(History::new(events, label)?);
    }
    Ok(HistoryFamily {
        support,
        histories,
        dynamics,
        initial_state,
        final_state: None,
        structure: FamilyStructure::Product(decomps),
    })
}

/// Builds a branch-dependent family: the decomposition used at time t_j may
/// depend on the branch indices (α_1, …, α_{j−1}).
pub fn branch_dependent_family(
    support: TemporalSupport,
    tree: &dyn BranchResolver,
    dynamics: Dynamics,
    initial_state: DensityOperator,
    tol: &Tolerance,
) -> Result<HistoryFamily> {
    let dim = dynamics.dim();
    if initial_state.dim() != dim {
        return Err(Error::Shape("initial state dimension mismatch".into()));
    }
    // depth-first expansion of the branch tree
    let mut histories = Vec::new();
    let mut stack: Vec<(Label, Vec<QuantumEvent>)> = vec![(vec![], vec![])];
    while let Some((prefix, events)) = stack.pop() {
        let j = prefix.len();
        if j == support.len() {
            histories.push(History::new(events, prefix)?);
            continue;
        }
        let time = support.times()[j];
        let decomp = tree.decomposition(&prefix, time)?;
        if decomp.dim() != dim {
            return Err(Error::Domain(format!(
                "branch resolver returned a decomposition of dimension {} at prefix {prefix:?}",
                decomp.dim()
            )));
        }
        let report = decomp.validate(tol);
        if !report.is_empty() {
            return Err(Error::Domain(format!(
                "branch resolver returned an invalid decomposition at prefix {prefix:?}: {}",
                report[0].constraint
            )));
        }
        // push in reverse so branches come out in ascending order
        for a in (0..decomp.len()).rev() {
            let mut label = prefix.clone();
            label.push(a);
            let mut evs = events.clone();
            evs.push(QuantumEvent {
                time,
                projector: decomp.projectors()[a].clone(),
            });
            stack.push((label, evs));
        }
    }
    histories.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(HistoryFamily {
        support,
        histories,
        dynamics,
        initial_state,
        final_state: None,
        structure: FamilyStructure::BranchDependent,
    })
}

/// Per-time regrouping of branch indices. `None` leaves a time untouched;
/// `Some(groups)` must partition the branch indices at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraining {
    pub groups_per_time: Vec<Option<Vec<Vec<usize>>>>,
}

impl CoarseGraining {
    pub fn identity(n_times: usize) -> Self {
        CoarseGraining {
            groups_per_time: vec![None; n_times],
        }
    }
}

fn check_partition(groups: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        if g.is_empty() {
            return Err(Error::Domain(
                "coarse-graining groups must be nonempty".into(),
            ));
        }
        for &i in g {
            if i >= n || !seen.insert(i) {
                return Err(Error::Domain(format!(
                    "coarse-graining groups must partition 0..{n}; index {i} repeated or out of range"
                )));
            }
        }
    }
    if seen.len() != n {
        return Err(Error::Domain(format!(
            "coarse-graining groups must cover all {n} branch indices"
        )));
    }
    Ok(())
}

/// Replaces the decomposition at chosen times by sums of its members,
/// Q^(β) = Σ_{α∈β} P^(α). The temporal support is unchanged.
pub fn coarse_grain(
    family: &HistoryFamily,
    grouping: &CoarseGraining,
    tol: &Tolerance,
) -> Result<HistoryFamily> {
    let decomps = match &family.structure {
        FamilyStructure::Product(d) => d,
        FamilyStructure::BranchDependent => {
            // regrouping per-time branch indices presupposes a fixed
            // decomposition at each time
            return Err(Error::UnsupportedStructure(
                "coarse-graining of branch-dependent families is not defined".into(),
            ));
        }
    };
    if grouping.groups_per_time.len() != family.support.len() {
        return Err(Error::Shape("grouping must list every support time".into()));
    }
    let mut coarse_decomps = Vec::with_capacity(decomps.len());
    for (j, (decomp, groups)) in decomps.iter().zip(&grouping.groups_per_time).enumerate() {
        match groups {
            None => coarse_decomps.push(decomp.clone()),
            Some(groups) => {
                check_partition(groups, decomp.len())?;
                let dim = decomp.dim();
                let mut projectors = Vec::with_capacity(groups.len());
                for group in groups {
                    let mut m = matrix::zeros(dim, dim);
                    let mut names = Vec::new();
                    for &a in group {
                        m += decomp.projectors()[a].matrix();
                        names.push(decomp.projectors()[a].label.clone());
                    }
                    projectors.push(Projector::new(m, names.join("+"), tol)?);
                }
                coarse_decomps.push(DecompositionOfUnity::new(
                    projectors,
                    family.support.times()[j],
                    tol,
                )?);
            }
        }
    }
    let mut coarse = product_family(
        family.support.clone(),
        coarse_decomps,
        family.dynamics.clone(),
        family.initial_state.clone(),
        tol,
    )?;
    coarse.final_state = family.final_state.clone();
    Ok(coarse)
}

/// Fine labels of `family` that map onto the given coarse label under the
/// grouping.
pub fn fine_labels_of(
    family: &HistoryFamily,
    grouping: &CoarseGraining,
    coarse_label: &[usize],
) -> Result<Vec<Label>> {
    if coarse_label.len() != family.support.len() {
        return Err(Error::Shape("coarse label length mismatch".into()));
    }
    let mut out = Vec::new();
    'outer: for h in &family.histories {
        for (j, (&fine, groups)) in h.label.iter().zip(&grouping.groups_per_time).enumerate() {
            let matches = match groups {
                None => fine == coarse_label[j],
                Some(groups) => groups
                    .get(coarse_label[j])
                    .map(|g| g.contains(&fine))
                    .ok_or_else(|| Error::Domain("coarse label index out of range".into()))?,
            };
            if !matches {
                continue 'outer;
            }
        }
        out.push(h.label.clone());
    }
    Ok(out)
}

impl HistoryFamily {
    pub fn support(&self) -> &TemporalSupport {
        &self.support
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.histories.iter().map(|h| &h.label)
    }

    pub fn history(&self, label: &[usize]) -> Result<&History> {
        self.histories
            .iter()
            .find(|h| h.label == label)
            .ok_or_else(|| Error::Lookup(format!("{label:?}")))
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn initial_state(&self) -> &DensityOperator {
        &self.initial_state
    }

    pub fn final_state(&self) -> Option<&DensityOperator> {
        self.final_state.as_ref()
    }

    pub fn structure(&self) -> &FamilyStructure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }

    /// Same family data bound to a different initial state.
    pub fn with_initial_state(&self, rho: DensityOperator) -> Result<HistoryFamily> {
        if rho.dim() != self.dim() {
            return Err(Error::Shape("initial state dimension mismatch".into()));
        }
        let mut f = self.clone();
        f.initial_state = rho;
        Ok(f)
    }

    /// Attaches a final state, enabling the time-symmetric decoherence
    /// functional.
    pub fn with_final_state(&self, rho_f: DensityOperator) -> Result<HistoryFamily> {
        if rho_f.dim() != self.dim() {
            return Err(Error::Shape("final state dimension mismatch".into()));
        }
        let mut f = self.clone();
        f.final_state = Some(rho_f);
        Ok(f)
    }

    #[cfg(test)]
    pub(crate) fn drop_history_for_test(&mut self, label: &[usize]) {
        self.histories.retain(|h| h.label != label);
    }
}

/// C_α = P_n(t_n) … P_1(t_1), latest leftmost, in the Heisenberg picture.
pub fn chain_operator(family: &HistoryFamily, label: &[usize]) -> Result<ChainOperator> {
    let history = family.history(label)?;
    let dim = family.dim();
    let mut product = matrix::identity(dim);
    for event in history.events() {
        let heis = heisenberg_projector(family.dynamics(), &event.projector, event.time)?;
        product = heis.matrix() * product;
    }
    Ok(ChainOperator {
        matrix: product,
        label: label.to_vec(),
    })
}

/// ‖Σ_α C_α − I‖ in the max-entry norm; zero for a complete family.
pub fn completeness_residual(family: &HistoryFamily) -> Result<f64> {
    let dim = family.dim();
    let mut sum = matrix::zeros(dim, dim);
    for h in family.histories() {
        sum += &chain_operator(family, &h.label)?.matrix;
    }
    Ok(matrix::max_abs_diff(&sum, &matrix::identity(dim)))
}

/// Completeness check against a tolerance.
pub fn completeness_check(family: &HistoryFamily, tol: &Tolerance) -> Result<bool> {
    Ok(completeness_residual(family)? <= tol.abs_eps)
}
