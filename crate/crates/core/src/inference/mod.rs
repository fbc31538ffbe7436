//! Exact probability of OSDDs.

mod measurable;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::constraint::{Operand, SolutionSet, Var};
use crate::diagram::{Mdd, Osdd};
use crate::error::InferenceError;
use crate::switch::Switches;
use crate::term::GroundTerm;

pub use measurable::{exact_prob_measurable, measurability, EdgeMeasure, MeasurabilityReport};

/// Number types probabilities can be computed in.
pub trait Weight: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_ratio(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
}

impl Weight for f64 {
    fn from_ratio(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Weight for BigRational {
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Outcome probabilities per switch, converted once.
pub(crate) struct Table<P> {
    sw: HashMap<Arc<str>, Vec<P>>,
}

impl<P: Weight> Table<P> {
    pub(crate) fn new(switches: &Switches) -> Self {
        let sw = switches
            .iter()
            .filter(|d| d.dist.is_some())
            .map(|d| (d.name.clone(), d.probs().iter().map(P::from_ratio).collect()))
            .collect();
        Table { sw }
    }

    pub(crate) fn of(&self, v: &Var) -> Result<&[P], InferenceError> {
        let name = v.switch_instance().map(|s| &*s.switch).unwrap_or(v.name());
        self.sw.get(name).map(Vec::as_slice).ok_or_else(|| InferenceError::MissingDistribution(name.to_string()))
    }

    pub(crate) fn mass(&self, v: &Var, s: &SolutionSet) -> Result<P, InferenceError> {
        let p = self.of(v)?;
        let at = |g: &GroundTerm| v.domain().position(g).map(|i| p[i].clone()).unwrap_or_else(P::zero);
        Ok(match s {
            SolutionSet::Empty => P::zero(),
            SolutionSet::Single(g) => at(g),
            SolutionSet::Except(ex) => ex.iter().fold(P::one(), |acc, g| acc - at(g)),
            SolutionSet::Explicit(vs) => vs.iter().fold(P::zero(), |acc, g| acc + at(g)),
        })
    }
}

type Sigma = BTreeMap<Var, GroundTerm>;

fn restrict(sigma: &Sigma, d: &Osdd) -> Sigma {
    match d.free_ref() {
        Some(free) => sigma.iter().filter(|(v, _)| free.contains(*v)).map(|(v, g)| (v.clone(), g.clone())).collect(),
        None => Sigma::new(),
    }
}

struct Exact<'a, P> {
    table: &'a Table<P>,
    memo: HashMap<(usize, Vec<GroundTerm>), P>,
    /// Domains whose switches are all uniform, when symmetry is used.
    symmetric: Option<HashSet<Arc<str>>>,
    consts: HashMap<usize, Arc<BTreeSet<GroundTerm>>>,
}

impl<P: Weight> Exact<'_, P> {
    fn consts_of(&mut self, d: &Osdd) -> Arc<BTreeSet<GroundTerm>> {
        if let Some(c) = self.consts.get(&d.id()) {
            return c.clone();
        }
        let mut out = BTreeSet::new();
        for e in d.edges() {
            for a in e.label.atoms() {
                if let Operand::Const(g) = a.rhs() {
                    out.insert(g.clone());
                }
            }
            out.extend(self.consts_of(&e.child).iter().cloned());
        }
        let out = Arc::new(out);
        self.consts.insert(d.id(), out.clone());
        out
    }

    /// Renames values of symmetric domains that no label below `d`
    /// mentions to the earliest unused such values, in order of first
    /// occurrence.
    fn canon(&mut self, d: &Osdd, sigma: Sigma) -> Sigma {
        let Some(sym) = &self.symmetric else { return sigma };
        if sigma.is_empty() || !sigma.keys().any(|v| sym.contains(v.domain().name())) {
            return sigma;
        }
        let sym = sym.clone();
        let fixed = self.consts_of(d);
        let mut maps: HashMap<&str, (HashMap<GroundTerm, GroundTerm>, usize)> = HashMap::new();
        let mut out = Sigma::new();
        for (v, g) in &sigma {
            let dom = v.domain();
            if !sym.contains(dom.name()) || fixed.contains(g) {
                out.insert(v.clone(), g.clone());
                continue;
            }
            let (map, next) = maps.entry(dom.name()).or_default();
            let c = match map.get(g) {
                Some(c) => c.clone(),
                None => {
                    while fixed.contains(&dom.values()[*next]) {
                        *next += 1;
                    }
                    let c = dom.values()[*next].clone();
                    *next += 1;
                    map.insert(g.clone(), c.clone());
                    c
                }
            };
            out.insert(v.clone(), c);
        }
        out
    }

    /// Sums over groundings of free variables of `d` that `sigma` leaves
    /// open, then evaluates the node.
    fn big_pi(&mut self, d: &Osdd, sigma: &Sigma) -> Result<P, InferenceError> {
        let open: Vec<Var> = d.free_ref().map(|f| f.iter().filter(|v| !sigma.contains_key(*v)).cloned().collect()).unwrap_or_default();
        let Some((first, _)) = open.split_first() else {
            return self.pi(d, &restrict(sigma, d));
        };
        let mut total = P::zero();
        for g in first.domain().values() {
            let mut next = sigma.clone();
            next.insert(first.clone(), g.clone());
            total = total + self.big_pi(d, &next)?;
        }
        Ok(total)
    }

    fn pi(&mut self, d: &Osdd, sigma: &Sigma) -> Result<P, InferenceError> {
        if let Some(v) = d.leaf_value() {
            return Ok(if v { P::one() } else { P::zero() });
        }
        let sigma = &self.canon(d, sigma.clone());
        let key = (d.id(), sigma.values().cloned().collect::<Vec<_>>());
        if let Some(p) = self.memo.get(&key) {
            return Ok(p.clone());
        }
        let y = d.var().unwrap();
        let probs = self.table.of(y)?;
        let mut total = P::zero();
        for e in d.edges() {
            let s = e
                .label
                .project_ground(y, |v| sigma.get(v).cloned())
                .ok_or_else(|| InferenceError::Improper(format!("label `{}` mentions an unassigned variable", e.label)))?;
            if s.is_empty(y) {
                continue;
            }
            let needs_y = e.child.free_ref().is_some_and(|f| f.contains(y));
            if needs_y {
                for g in s.values(y) {
                    let mut next = sigma.clone();
                    next.insert(y.clone(), g.clone());
                    let p = probs[y.domain().position(&g).unwrap()].clone();
                    total = total + p * self.big_pi(&e.child, &next)?;
                }
            } else {
                total = total + self.table.mass(y, &s)? * self.big_pi(&e.child, sigma)?;
            }
        }
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}

/// `P(d)` by the general recursion over groundings consistent with each
/// edge, memoized on the node and the values of its free variables.
pub fn exact_prob<P: Weight>(d: &Osdd, switches: &Switches) -> Result<P, InferenceError> {
    exact_prob_with(d, switches, true)
}

/// As [`exact_prob`]; with `symmetry`, assignments that differ by a
/// permutation of unmentioned values of uniform switches share a memo
/// entry.
pub fn exact_prob_with<P: Weight>(d: &Osdd, switches: &Switches, symmetry: bool) -> Result<P, InferenceError> {
    let table = Table::new(switches);
    let symmetric = symmetry.then(|| {
        let mut uniform: HashMap<Arc<str>, bool> = HashMap::new();
        for decl in switches.iter() {
            let ok = decl.dist.is_some() && decl.is_uniform();
            *uniform.entry(Arc::from(decl.domain.name())).or_insert(true) &= ok;
        }
        uniform.into_iter().filter(|(_, u)| *u).map(|(n, _)| n).collect()
    });
    Exact { table: &table, memo: HashMap::new(), symmetric, consts: HashMap::new() }.big_pi(d, &Sigma::new())
}

/// `P(q | e) = P(q and e) / P(e)`; `None` when `P(e) = 0`.
pub fn exact_conditional(q: &Osdd, e: &Osdd, switches: &Switches) -> Result<Option<BigRational>, InferenceError> {
    let joint = q.and(e).map_err(|x| InferenceError::Improper(x.to_string()))?;
    let pe: BigRational = exact_prob(e, switches)?;
    if pe.is_zero() {
        return Ok(None);
    }
    Ok(Some(exact_prob::<BigRational>(&joint, switches)? / pe))
}

/// Probability of a ground diagram by weighted traversal.
pub fn mdd_prob<P: Weight>(m: &Mdd, switches: &Switches) -> Result<P, InferenceError> {
    fn go<P: Weight>(m: &Mdd, t: &Table<P>, memo: &mut HashMap<usize, P>) -> Result<P, InferenceError> {
        if let Some(v) = m.leaf_value() {
            return Ok(if v { P::one() } else { P::zero() });
        }
        if let Some(p) = memo.get(&m.id()) {
            return Ok(p.clone());
        }
        let y = m.var().unwrap();
        let probs = t.of(y)?;
        let mut total = P::zero();
        for (i, (_, c)) in m.children().iter().enumerate() {
            total = total + probs[i].clone() * go(c, t, memo)?;
        }
        memo.insert(m.id(), total.clone());
        Ok(total)
    }
    go(m, &Table::new(switches), &mut HashMap::new())
}

/// Size parameters of a diagram: largest domain `d`, internal node count
/// `n`, and largest free-variable set `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub d: usize,
    pub n: usize,
    pub v: usize,
}

pub fn diagnostics(o: &Osdd) -> Diagnostics {
    let (mut d, mut v) = (0, 0);
    o.visit(|n| {
        if let Some(y) = n.var() {
            d = d.max(y.domain().len());
            v = v.max(n.free_ref().map_or(0, |f| f.len()));
        }
    });
    Diagnostics { d, n: o.internal_count(), v }
}
