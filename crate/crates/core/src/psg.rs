//! Partial semigroups: the temporal-support psg K1, the history psg K2,
//! quasitemporal structures, and exhaustive validators for user-supplied
//! finite composition tables.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::histories::QuantumEvent;

/// A finite ordered set of time points {t_1 < t_2 < … < t_n}.
#[derive(Debug, Clone, PartialEq)]
pub struct K1Element {
    times: Vec<f64>,
}

impl K1Element {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Domain(
                "a K1 element must contain at least one time".into(),
            ));
        }
        for pair in times.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Domain(format!(
                    "K1 times must strictly increase, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(K1Element { times })
    }

    pub fn singleton(t: f64) -> Self {
        K1Element { times: vec![t] }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_nuclear(&self) -> bool {
        self.times.len() == 1
    }
}

/// A history viewed as a psg element: its ordered events.
#[derive(Debug, Clone, PartialEq)]
pub struct K2Element {
    events: Vec<QuantumEvent>,
}

impl K2Element {
    pub fn new(events: Vec<QuantumEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::Domain(
                "a K2 element must contain at least one event".into(),
            ));
        }
        for pair in events.windows(2) {
            if pair[0].time >= pair[1].time {
                return Err(Error::Domain(format!(
                    "K2 event times must strictly increase, got {} then {}",
                    pair[0].time, pair[1].time
                )));
            }
        }
        Ok(K2Element { events })
    }

    pub fn events(&self) -> &[QuantumEvent] {
        &self.events
    }

    pub fn is_nuclear(&self) -> bool {
        self.events.len() == 1
    }
}

/// s ∘ t on K1: defined when s_m ≤ t_1; a shared endpoint is merged, so in
/// particular {t} ∘ {t} = {t}.
pub fn k1_compose(s: &K1Element, t: &K1Element) -> Option<K1Element> {
    let s_last = *s.times.last().expect("nonempty");
    let t_first = t.times[0];
    if s_last < t_first {
        let mut times = s.times.clone();
        times.extend_from_slice(&t.times);
        Some(K1Element { times })
    } else if s_last == t_first {
        let mut times = s.times.clone();
        times.extend_from_slice(&t.times[1..]);
        Some(K1Element { times })
    } else {
        None
    }
}

/// The irreducible decomposition t = {t_1} ∘ {t_2} ∘ … ∘ {t_n}.
pub fn k1_nuclear_decomposition(t: &K1Element) -> Vec<K1Element> {
    t.times.iter().map(|&ti| K1Element::singleton(ti)).collect()
}

/// α ∘ β on K2: defined only for strictly ordered supports; there is no
/// merge convention since two projectors at one time cannot be combined.
pub fn k2_compose(a: &K2Element, b: &K2Element) -> Option<K2Element> {
    let a_last = a.events.last().expect("nonempty").time;
    let b_first = b.events[0].time;
    if a_last < b_first {
        let mut events = a.events.clone();
        events.extend_from_slice(&b.events);
        Some(K2Element { events })
    } else {
        None
    }
}

/// The homomorphism σ: K2 → K1 extracting the temporal support.
pub fn sigma_support(a: &K2Element) -> K1Element {
    K1Element {
        times: a.events.iter().map(|e| e.time).collect(),
    }
}

/// A finite psg given by an explicit partial composition table over opaque
/// element names.
#[derive(Debug, Clone)]
pub struct FinitePsg {
    pub elements: Vec<String>,
    /// (left index, right index) → result index, where defined.
    pub table: HashMap<(usize, usize), usize>,
}

/// Default cap on table size for the O(n³) validators.
pub const MAX_PSG_ELEMENTS: usize = 64;

impl FinitePsg {
    pub fn new(elements: Vec<String>, table: HashMap<(usize, usize), usize>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Domain("a psg must have at least one element".into()));
        }
        if elements.len() > MAX_PSG_ELEMENTS {
            return Err(Error::Domain(format!(
                "finite psg validators are capped at {MAX_PSG_ELEMENTS} elements"
            )));
        }
        let n = elements.len();
        for (&(a, b), &c) in &table {
            if a >= n || b >= n || c >= n {
                return Err(Error::Domain("composition table index out of range".into()));
            }
        }
        Ok(FinitePsg { elements, table })
    }

    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        self.table.get(&(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Structural findings of an exhaustive finite-psg scan.
#[derive(Debug, Clone)]
pub struct PsgReport {
    /// Triples (s,t,u) with (s∘t)∘u ≠ s∘(t∘u) while both sides defined.
    pub associativity_violations: Vec<(usize, usize, usize)>,
    pub unit: Option<usize>,
    pub absorbing: Option<usize>,
    /// Elements not expressible as s∘t with both s and t typical.
    pub nuclear: Vec<usize>,
    /// False iff some typical pair s ≠ t has both s∘t and t∘s defined.
    pub directed: bool,
    pub directedness_counterexample: Option<(usize, usize)>,
}

impl PsgReport {
    pub fn associative(&self) -> bool {
        self.associativity_violations.is_empty()
    }
}

/// Exhaustive O(n³) validation of a finite composition table.
pub fn validate_finite_psg(p: &FinitePsg) -> PsgReport {
    let n = p.len();
    let mut associativity_violations = Vec::new();
    for s in 0..n {
        for t in 0..n {
            for u in 0..n {
                let left = p.compose(s, t).and_then(|st| p.compose(st, u));
                let right = p.compose(t, u).and_then(|tu| p.compose(s, tu));
                if let (Some(l), Some(r)) = (left, right) {
                    if l != r {
                        associativity_violations.push((s, t, u));
                    }
                }
            }
        }
    }
    let unit =
        (0..n).find(|&e| (0..n).all(|s| p.compose(e, s) == Some(s) && p.compose(s, e) == Some(s)));
    let absorbing =
        (0..n).find(|&a| (0..n).all(|s| p.compose(a, s) == Some(a) && p.compose(s, a) == Some(a)));
    let typical = |x: usize| Some(x) != unit && Some(x) != absorbing;
    // decompositions with s = x or t = x (idempotent redundancies like
    // {t}∘{t} = {t}) do not count as genuine decompositions
    let nuclear: Vec<usize> = (0..n)
        .filter(|&x| {
            typical(x)
                && !(0..n).any(|s| {
                    (0..n).any(|t| {
                        typical(s) && typical(t) && s != x && t != x && p.compose(s, t) == Some(x)
                    })
                })
        })
        .collect();
    let mut directedness_counterexample = None;
    'outer: for s in 0..n {
        for t in 0..n {
            if s != t
                && typical(s)
                && typical(t)
                && p.compose(s, t).is_some()
                && p.compose(t, s).is_some()
            {
                directedness_counterexample = Some((s, t));
                break 'outer;
            }
        }
    }
    PsgReport {
        associativity_violations,
        unit,
        absorbing,
        nuclear,
        directed: directedness_counterexample.is_none(),
        directedness_counterexample,
    }
}

/// Violations of the causality condition: chains of nuclear elements
/// α ◁ β ◁ … ◁ γ with σ(α) = σ(γ) but the chain not constant.
#[derive(Debug, Clone)]
pub struct CausalityReport {
    /// Offending chains, as element-index sequences.
    pub violations: Vec<Vec<usize>>,
}

impl CausalityReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the causality condition on a finite instance: no closed `time
/// loops' among nuclear elements. `sigma_map[i]` is the index in `support`
/// of σ(element i); it must be a homomorphism of the supplied tables.
pub fn check_causality(
    p: &FinitePsg,
    sigma_map: &[usize],
    support: &FinitePsg,
) -> Result<CausalityReport> {
    if sigma_map.len() != p.len() {
        return Err(Error::Domain("sigma map must cover every element".into()));
    }
    if sigma_map.iter().any(|&i| i >= support.len()) {
        return Err(Error::Domain("sigma map index out of range".into()));
    }
    // homomorphism: s∘t defined ⇒ σ(s)∘σ(t) defined and equal to σ(s∘t)
    for (&(a, b), &c) in &p.table {
        match support.compose(sigma_map[a], sigma_map[b]) {
            Some(sc) if sc == sigma_map[c] => {}
            _ => {
                return Err(Error::Domain(format!(
                    "sigma map is not a homomorphism at ({}, {})",
                    p.elements[a], p.elements[b]
                )))
            }
        }
    }
    let report = validate_finite_psg(p);
    let support_report = validate_finite_psg(support);
    let nuclear = &report.nuclear;
    let _ = support_report;

    // breadth-first search over ◁-chains of nuclear elements; chain length
    // is bounded by the element count since a violating chain needs no
    // repeats beyond its endpoints
    let precedes = |a: usize, b: usize| p.compose(a, b).is_some();
    let mut violations = Vec::new();
    for &start in nuclear {
        let mut frontier: Vec<Vec<usize>> = vec![vec![start]];
        for _ in 0..p.len() {
            let mut next = Vec::new();
            for chain in &frontier {
                let last = *chain.last().expect("nonempty");
                for &cand in nuclear {
                    if precedes(last, cand) {
                        let mut c = chain.clone();
                        c.push(cand);
                        if sigma_map[start] == sigma_map[cand] && c.iter().any(|&x| x != start) {
                            violations.push(c.clone());
                        }
                        next.push(c);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    Ok(CausalityReport { violations })
}
