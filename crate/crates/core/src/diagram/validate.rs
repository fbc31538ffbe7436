use std::collections::HashSet;
use std::fmt;

use super::proper::implicit_atom;
use super::Osdd;
use crate::constraint::{CanonicalKey, Formula, Var};
use crate::term::SwitchInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Ordering,
    MutualExclusion,
    Completeness,
    Urgency,
    ExplicitConstraints,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    /// Switch instances from the root to the offending node.
    pub path: Vec<SwitchInstance>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|s| s.to_string()).collect();
        write!(f, "{:?} at {}: {}", self.condition, path.join("/"), self.detail)
    }
}

pub(crate) fn validate(d: &Osdd) -> Vec<Violation> {
    let mut v = Validator { out: Vec::new(), reported: HashSet::new(), seen: HashSet::new() };
    v.go(d, &Formula::new(), &[], &mut Vec::new());
    v.out
}

struct Validator {
    out: Vec<Violation>,
    reported: HashSet<(usize, Condition)>,
    seen: HashSet<(usize, CanonicalKey, Vec<Var>)>,
}

impl Validator {
    fn report(&mut self, n: &Osdd, condition: Condition, path: &[SwitchInstance], detail: String) {
        if self.reported.insert((n.id(), condition)) {
            self.out.push(Violation { condition, path: path.to_vec(), detail });
        }
    }

    fn go(&mut self, n: &Osdd, phi: &Formula, scope: &[Var], path: &mut Vec<SwitchInstance>) {
        let Some(y) = n.var() else { return };
        if !self.seen.insert((n.id(), phi.canonical_key(), scope.to_vec())) {
            return;
        }
        let si = y.switch_instance().unwrap().clone();
        path.push(si.clone());
        let edges = n.edges();

        for e in edges {
            if let Some(c) = e.child.switch_instance() {
                if c <= &si {
                    self.report(n, Condition::Ordering, path, format!("child {c} does not follow {si}"));
                }
            }
        }
        if edges.windows(2).any(|w| w[0].key >= w[1].key) {
            self.report(n, Condition::Ordering, path, "edges are not in canonical order".into());
        }

        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let both = phi.and(&edges[i].label).and(&edges[j].label);
                if both.satisfiable().unwrap_or(true) {
                    let detail = format!("`{}` overlaps `{}`", edges[i].label, edges[j].label);
                    self.report(n, Condition::MutualExclusion, path, detail);
                }
            }
        }

        let negations: Option<Vec<Vec<Formula>>> =
            edges.iter().map(|e| e.label.negate().ok()).collect();
        if let Some(negs) = negations {
            if !edges.iter().any(|e| e.label.is_empty()) && uncovered(phi, &negs) {
                self.report(n, Condition::Completeness, path, "some value of the node variable has no edge".into());
            }
        }

        let mut inner = scope.to_vec();
        inner.push(y.clone());
        inner.sort();
        for e in edges {
            if e.label.is_empty() {
                continue;
            }
            let vars = e.label.vars();
            if !vars.contains(y) || vars.iter().any(|v| inner.binary_search(v).is_err()) {
                self.report(n, Condition::Urgency, path, format!("label `{}` is misplaced", e.label));
            }
        }

        for e in edges {
            if let Some(b) = implicit_atom(phi, &e.label, scope) {
                let detail = format!("`{}` entails `{b}` which is not on the path", e.label);
                self.report(n, Condition::ExplicitConstraints, path, detail);
            }
        }

        for e in edges {
            let next = phi.and(&e.label);
            if next.satisfiable().unwrap_or(false) {
                self.go(&e.child, &next, &inner, path);
            }
        }
        path.pop();
    }
}

/// Whether `phi` is compatible with the negation of every label, i.e. some
/// assignment takes no edge.
fn uncovered(phi: &Formula, negs: &[Vec<Formula>]) -> bool {
    let Some((first, rest)) = negs.split_first() else {
        return phi.satisfiable().unwrap_or(false);
    };
    first.iter().any(|m| {
        let next = phi.and(m);
        next.satisfiable().unwrap_or(false) && uncovered(&next, rest)
    })
}
