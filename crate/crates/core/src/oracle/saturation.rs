//! Exhaustive comparison of structural saturation against brute-force
//! constancy of solution counts.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::constraint::{AtomicConstraint, Formula, Measure, Operand, Var};
use crate::term::{GroundTerm, TypeDomain};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SaturationReport {
    pub formulas: usize,
    pub mismatches: usize,
    /// Formulas whose domain has at least as many values as the graph has nodes.
    pub in_class: usize,
    pub in_class_mismatches: usize,
    /// Saturated formulas whose structural measure differs from the count.
    pub measure_mismatches: usize,
    /// Saturated formulas with varying counts.
    pub saturated_but_varying: usize,
    /// Mismatches on formulas with no solution over their domain.
    pub unsatisfiable_mismatches: usize,
    pub examples: Vec<String>,
}

/// Per variable, the set of solution counts over all assignments of the
/// other variables that extend to a solution.
fn counts(f: &Formula, vars: &[Var], dom: &TypeDomain) -> Vec<BTreeSet<usize>> {
    let d = dom.len();
    vars.iter()
        .enumerate()
        .map(|(xi, x)| {
            let context: Formula = f.atoms().filter(|a| !a.mentions(x)).cloned().collect();
            let mut seen = BTreeSet::new();
            let others = vars.len() - 1;
            for code in 0..d.pow(others as u32) {
                let mut sigma = vec![0usize; vars.len()];
                let mut c = code;
                for (j, s) in sigma.iter_mut().enumerate() {
                    if j != xi {
                        *s = c % d;
                        c /= d;
                    }
                }
                let value = |v: &Var| vars.iter().position(|w| w == v).map(|j| dom.values()[sigma[j]].clone());
                if context.holds(value) != Some(true) {
                    continue;
                }
                let n = (0..d)
                    .filter(|&k| {
                        sigma[xi] = k;
                        let value = |v: &Var| vars.iter().position(|w| w == v).map(|j| dom.values()[sigma[j]].clone());
                        f.holds(value) == Some(true)
                    })
                    .count();
                if n > 0 {
                    seen.insert(n);
                }
            }
            seen
        })
        .collect()
}

fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            cur.push(c);
            go(i + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

/// Injective partial maps from `k` classes into `d` constants.
fn bindings(k: usize, d: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|b: Vec<Option<usize>>| {
                let mut next = vec![[b.clone(), vec![None]].concat()];
                for c in 0..d {
                    if !b.contains(&Some(c)) {
                        next.push([b.clone(), vec![Some(c)]].concat());
                    }
                }
                next
            })
            .collect();
    }
    out
}

fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (0..1usize << items.len())
        .map(move |mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone()).collect())
}

/// Every closed constraint graph over up to `max_vars` variables and the
/// constants of domains `1..=max_domain`.
pub fn check_saturation(max_vars: usize, max_domain: usize) -> SaturationReport {
    let mut rep = SaturationReport::default();
    for d in 1..=max_domain {
        let dom = Arc::new(TypeDomain::range("t", 1, d as i64).expect("nonempty range"));
        let konst = |c: usize| Operand::Const(GroundTerm::int(c as i64 + 1));
        for n in 1..=max_vars {
            let vars: Vec<Var> = (0..n).map(|i| Var::named(&format!("V{i}"), dom.clone())).collect();
            for part in partitions(n) {
                let k = part.iter().max().unwrap() + 1;
                let rep_of = |c: usize| vars[part.iter().position(|&p| p == c).unwrap()].clone();
                let mut base = Vec::new();
                for (i, &c) in part.iter().enumerate() {
                    let r = rep_of(c);
                    if r != vars[i] {
                        base.push(AtomicConstraint::eq(vars[i].clone(), r));
                    }
                }
                for bind in bindings(k, d) {
                    let pairs: Vec<(usize, usize)> = (0..k)
                        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
                        .filter(|&(a, b)| bind[a].is_none() || bind[b].is_none())
                        .collect();
                    let mut fixed = base.clone();
                    for (c, b) in bind.iter().enumerate() {
                        if let Some(v) = b {
                            fixed.push(AtomicConstraint::eq(rep_of(c), konst(*v)));
                        }
                    }
                    let free: Vec<usize> = (0..k).filter(|&c| bind[c].is_none()).collect();
                    let const_edges: Vec<(usize, usize)> =
                        free.iter().flat_map(|&c| (0..d).map(move |v| (c, v))).collect();
                    for ne in subsets(&pairs) {
                        for ce in subsets(&const_edges) {
                            let mut atoms = fixed.clone();
                            atoms.extend(ne.iter().map(|&(a, b)| AtomicConstraint::neq(rep_of(a), rep_of(b))));
                            atoms.extend(ce.iter().map(|&(c, v)| AtomicConstraint::neq(rep_of(c), konst(v))));
                            let f = Formula::from_atoms(atoms);
                            let mentioned: BTreeSet<usize> = bind
                                .iter()
                                .flatten()
                                .copied()
                                .chain(ce.iter().map(|&(_, v)| v))
                                .collect();
                            let in_class = d >= n + mentioned.len();
                            tally(&mut rep, &f, &vars, &dom, in_class);
                        }
                    }
                }
            }
        }
    }
    rep
}

fn tally(rep: &mut SaturationReport, f: &Formula, vars: &[Var], dom: &TypeDomain, in_class: bool) {
    let per_var = counts(f, vars, dom);
    let constant = per_var.iter().all(|s| s.len() <= 1);
    let saturated = f.is_saturated();
    rep.formulas += 1;
    rep.in_class += usize::from(in_class);
    if saturated != constant {
        rep.mismatches += 1;
        rep.in_class_mismatches += usize::from(in_class);
        rep.saturated_but_varying += usize::from(saturated);
        rep.unsatisfiable_mismatches += usize::from(per_var.iter().all(|s| s.is_empty()));
        if rep.examples.len() < 5 {
            rep.examples.push(format!("{f} over {} values: saturated={saturated}", dom.len()));
        }
    }
    if saturated {
        for (x, s) in vars.iter().zip(&per_var) {
            if let (Some(&c), Measure::Count(m)) = (s.iter().next(), f.measure(x)) {
                if s.len() == 1 && c != m {
                    rep.measure_mismatches += usize::from(in_class);
                }
            }
        }
    }
}
