use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{restrict, Weight};
use crate::constraint::{extend_measure, CanonicalKey, Closure, ConstraintGraph, Extension, Formula, Measure, Var};
use crate::diagram::Osdd;
use crate::error::InferenceError;
use crate::switch::Switches;
use crate::term::{GroundTerm, SwitchInstance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMeasure {
    /// Switch instances from the root to the edge's source node.
    pub path: Vec<SwitchInstance>,
    pub label: String,
    /// False for `true` labels.
    pub constrained: bool,
    /// `None` when the path formula with the label is not saturated.
    pub measure: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurabilityReport {
    pub measurable: bool,
    /// Reachable edges in depth-first order.
    pub edges: Vec<EdgeMeasure>,
    /// Path to the first node with an unmeasurable edge.
    pub offending: Option<Vec<SwitchInstance>>,
}

impl MeasurabilityReport {
    pub fn measures(&self) -> Vec<Option<usize>> {
        self.edges.iter().map(|e| e.measure).collect()
    }

    /// Measures of edges with a nonempty label.
    pub fn constrained_measures(&self) -> Vec<Option<usize>> {
        self.edges.iter().filter(|e| e.constrained).map(|e| e.measure).collect()
    }
}

/// Checks saturation of every reachable edge's label conjoined with its
/// path formula, and records the measure of the node variable.
pub fn measurability(d: &Osdd) -> MeasurabilityReport {
    fn go(
        n: &Osdd,
        phi: &Formula,
        path: &mut Vec<SwitchInstance>,
        seen: &mut HashSet<(usize, CanonicalKey)>,
        out: &mut MeasurabilityReport,
    ) {
        let Some(y) = n.var() else { return };
        if !seen.insert((n.id(), phi.canonical_key())) {
            return;
        }
        path.push(y.switch_instance().unwrap().clone());
        let graph = closed(phi);
        for e in n.edges() {
            let measure = match extend_measure(&graph, phi, y, &e.label) {
                Extension::Unsatisfiable => continue,
                Extension::Measure(Measure::Count(c)) => Some(c),
                Extension::Measure(Measure::NotMeasurable) => None,
            };

            if measure.is_none() && out.measurable {
                out.measurable = false;
                out.offending = Some(path.clone());
            }
            out.edges.push(EdgeMeasure {
                path: path.clone(),
                label: e.label.to_string(),
                constrained: !e.label.is_empty(),
                measure,
            });
            if !e.child.is_leaf() {
                go(&e.child, &phi.and(&e.label), path, seen, out);
            }
        }
        path.pop();
    }
    let mut out = MeasurabilityReport { measurable: true, edges: Vec::new(), offending: None };
    go(d, &Formula::new(), &mut Vec::new(), &mut HashSet::new(), &mut out);
    out
}

/// `P(d)` using one representative outcome per edge weighted by the edge's
/// measure. Requires a measurable diagram whose switches are all uniform.
pub fn exact_prob_measurable<P: Weight>(d: &Osdd, switches: &Switches) -> Result<P, InferenceError> {
    let mut checked = HashSet::new();
    let mut bad = None;
    d.visit(|n| {
        if let Some(y) = n.var() {
            let name = y.switch_instance().map(|s| s.switch.clone());
            if checked.insert(name.clone()) && bad.is_none() {
                bad = match switches.decl_of(y) {
                    Ok(decl) if decl.is_uniform() => None,
                    Ok(_) => Some(InferenceError::NotApplicable(format!("switch `{}` is not uniform", decl_name(y)))),
                    Err(e) => Some(e),
                };
            }
        }
    });
    if let Some(e) = bad {
        return Err(e);
    }
    if !d.free_vars().is_empty() {
        return Err(InferenceError::NotApplicable("diagram has free variables".into()));
    }
    Fast { memo: HashMap::new() }.pi(d, &Formula::new(), &BTreeMap::new())
}

fn closed(phi: &Formula) -> ConstraintGraph {
    match phi.close() {
        Closure::Graph(g) => g,
        Closure::Unsatisfiable => Formula::new().close().graph().cloned().expect("empty formula closes"),
    }
}

fn decl_name(y: &Var) -> String {
    y.switch_instance().map(|s| s.switch.to_string()).unwrap_or_else(|| y.name().to_string())
}

struct Fast<P> {
    memo: HashMap<(usize, Vec<GroundTerm>), P>,
}

impl<P: Weight> Fast<P> {
    fn pi(&mut self, n: &Osdd, phi: &Formula, sigma: &BTreeMap<Var, GroundTerm>) -> Result<P, InferenceError> {
        if let Some(v) = n.leaf_value() {
            return Ok(if v { P::one() } else { P::zero() });
        }
        let key = (n.id(), sigma.values().cloned().collect::<Vec<_>>());
        if let Some(p) = self.memo.get(&key) {
            return Ok(p.clone());
        }
        let y = n.var().unwrap();
        let q = P::from_ratio(&BigRational::new(BigInt::from(1), BigInt::from(y.domain().len())));
        let mut total = P::zero();
        let graph = closed(phi);
        for e in n.edges() {
            let m = match extend_measure(&graph, phi, y, &e.label) {
                Extension::Unsatisfiable | Extension::Measure(Measure::Count(0)) => continue,
                Extension::Measure(Measure::Count(m)) => m,
                Extension::Measure(Measure::NotMeasurable) => {
                    return Err(InferenceError::NotApplicable(format!(
                        "edge `{}` of {} is not measurable",
                        e.label,
                        y.switch_instance().unwrap()
                    )))
                }
            };
            let s = e
                .label
                .project_ground(y, |v| sigma.get(v).cloned())
                .ok_or_else(|| InferenceError::Improper(format!("label `{}` mentions an unassigned variable", e.label)))?;
            let Some(rep) = s.min_value(y) else { continue };
            let mut next = sigma.clone();
            next.insert(y.clone(), rep);
            let next = restrict(&next, &e.child);
            let weight = P::from_ratio(&BigRational::from_integer(BigInt::from(m)));
            let below = if e.child.is_leaf() { self.pi(&e.child, phi, &next)? } else { self.pi(&e.child, &phi.and(&e.label), &next)? };
            total = total + weight * q.clone() * below;
        }
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}
