//! Conjunctive equality/disequality constraints over finite-domain variables.
//!
//! A [`Formula`] is a set of [`AtomicConstraint`]s read conjunctively. Its
//! [`ConstraintGraph`] is the entailment closure used for canonical ordering,
//! saturation and measures. Substitutions are formulas made of ground
//! equalities.

mod graph;
mod measure;
mod solve;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::ConstraintError;
use crate::term::{GroundTerm, SwitchInstance, TypeDomain};

pub use graph::{CanonicalKey, Closure, ConstraintGraph, GraphEdge};
pub use measure::{extend_measure, Extension, Measure};
pub use solve::SolutionSet;
pub use text::parse_formula;
pub(crate) use text::parse_ground as text_ground;

/// Identity of a variable. Output variables of diagram nodes are identified
/// with the switch instance they record; other variables are named.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    Instance(SwitchInstance),
    Named(Arc<str>),
}

struct VarData {
    key: VarKey,
    name: Arc<str>,
    domain: Arc<TypeDomain>,
}

/// A typed variable. Equality, hashing and ordering only look at the key;
/// the display name is cosmetic.
#[derive(Clone)]
pub struct Var(Arc<VarData>);

impl Var {
    /// The outcome variable of a switch instance.
    pub fn instance(si: SwitchInstance, domain: Arc<TypeDomain>) -> Self {
        let name = default_instance_name(&si);
        Var(Arc::new(VarData { key: VarKey::Instance(si), name: Arc::from(name), domain }))
    }

    pub fn instance_named(si: SwitchInstance, name: &str, domain: Arc<TypeDomain>) -> Self {
        Var(Arc::new(VarData { key: VarKey::Instance(si), name: Arc::from(name), domain }))
    }

    pub fn named(name: &str, domain: Arc<TypeDomain>) -> Self {
        Var(Arc::new(VarData {
            key: VarKey::Named(Arc::from(name)),
            name: Arc::from(name),
            domain,
        }))
    }

    pub fn key(&self) -> &VarKey {
        &self.0.key
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn domain(&self) -> &Arc<TypeDomain> {
        &self.0.domain
    }

    pub fn switch_instance(&self) -> Option<&SwitchInstance> {
        match &self.0.key {
            VarKey::Instance(si) => Some(si),
            VarKey::Named(_) => None,
        }
    }
}

fn default_instance_name(si: &SwitchInstance) -> String {
    let clean = |s: &str| -> String {
        s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
    };
    format!("X_{}_{}", clean(&si.switch), clean(&si.instance.to_string()))
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.key == other.0.key
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.key.hash(state)
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.key.cmp(&other.0.key)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

/// A node of a constraint graph: a ground term or a variable. Ground terms
/// order before variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operand {
    Const(GroundTerm),
    Var(Var),
}

impl Operand {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Const(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Operand::Var(_))
    }
}

impl From<Var> for Operand {
    fn from(v: Var) -> Self {
        Operand::Var(v)
    }
}

impl From<GroundTerm> for Operand {
    fn from(t: GroundTerm) -> Self {
        Operand::Const(t)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Const(c) => c.fmt(f),
            Operand::Var(v) => v.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Eq,
    Neq,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Eq => Polarity::Neq,
            Polarity::Neq => Polarity::Eq,
        }
    }
}

/// `X = T` or `X != T`. Stored with the larger variable on the left so that
/// `X = Y` and `Y = X` are the same atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicConstraint {
    lhs: Var,
    rhs: Operand,
    polarity: Polarity,
}

impl AtomicConstraint {
    /// Returns `None` when neither side is a variable.
    pub fn new(a: Operand, b: Operand, polarity: Polarity) -> Option<Self> {
        let (lhs, rhs) = match (a, b) {
            (Operand::Var(x), Operand::Var(y)) => {
                if x >= y {
                    (x, Operand::Var(y))
                } else {
                    (y, Operand::Var(x))
                }
            }
            (Operand::Var(x), c @ Operand::Const(_)) | (c @ Operand::Const(_), Operand::Var(x)) => (x, c),
            (Operand::Const(_), Operand::Const(_)) => return None,
        };
        Some(AtomicConstraint { lhs, rhs, polarity })
    }

    pub fn eq(a: impl Into<Operand>, b: impl Into<Operand>) -> Self {
        Self::new(a.into(), b.into(), Polarity::Eq).expect("atomic constraint needs a variable")
    }

    pub fn neq(a: impl Into<Operand>, b: impl Into<Operand>) -> Self {
        Self::new(a.into(), b.into(), Polarity::Neq).expect("atomic constraint needs a variable")
    }

    pub fn lhs(&self) -> &Var {
        &self.lhs
    }

    pub fn rhs(&self) -> &Operand {
        &self.rhs
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn negated(&self) -> Self {
        AtomicConstraint { lhs: self.lhs.clone(), rhs: self.rhs.clone(), polarity: self.polarity.flip() }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        std::iter::once(&self.lhs).chain(self.rhs.as_var())
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.vars().any(|x| x == v)
    }

    /// Truth value under a full assignment of its variables.
    pub fn holds(&self, lookup: impl Fn(&Var) -> Option<GroundTerm>) -> Option<bool> {
        let l = lookup(&self.lhs)?;
        let r = match &self.rhs {
            Operand::Const(c) => c.clone(),
            Operand::Var(v) => lookup(v)?,
        };
        Some((l == r) == (self.polarity == Polarity::Eq))
    }
}

impl fmt::Display for AtomicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        };
        write!(f, "{} {} {}", self.lhs, op, self.rhs)
    }
}

/// A conjunction of atomic constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Formula {
    atoms: BTreeSet<AtomicConstraint>,
}

/// A ground substitution, kept ordered for deterministic iteration.
pub type Assignment = BTreeMap<Var, GroundTerm>;

impl Formula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = AtomicConstraint>) -> Self {
        Formula { atoms: atoms.into_iter().collect() }
    }

    pub fn single(atom: AtomicConstraint) -> Self {
        Self::from_atoms([atom])
    }

    /// The substitution `{X = v, ...}` as a formula.
    pub fn from_assignment(sigma: &Assignment) -> Self {
        Self::from_atoms(sigma.iter().map(|(v, t)| AtomicConstraint::eq(v.clone(), t.clone())))
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = &AtomicConstraint> + Clone {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: &AtomicConstraint) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: AtomicConstraint) -> bool {
        self.atoms.insert(atom)
    }

    pub fn remove(&mut self, atom: &AtomicConstraint) -> bool {
        self.atoms.remove(atom)
    }

    pub fn with(&self, atom: AtomicConstraint) -> Self {
        let mut f = self.clone();
        f.atoms.insert(atom);
        f
    }

    pub fn and(&self, other: &Formula) -> Self {
        if other.atoms.is_empty() {
            return self.clone();
        }
        if self.atoms.is_empty() {
            return other.clone();
        }
        let mut f = self.clone();
        f.atoms.extend(other.atoms.iter().cloned());
        f
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.atoms.iter().flat_map(|a| a.vars().cloned()).collect()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.atoms.iter().any(|a| a.mentions(v))
    }

    /// Entailment closure of the formula.
    pub fn close(&self) -> Closure {
        graph::close(self)
    }

    pub fn satisfiable(&self) -> Result<bool, ConstraintError> {
        solve::satisfiable(self)
    }

    pub fn compatible(&self, other: &Formula) -> Result<bool, ConstraintError> {
        self.and(other).satisfiable()
    }

    /// Pairwise exclusive formulas whose union is the complement of `self`:
    /// `[{!b1}, {b1, !b2}, ...]` in atom order, unsatisfiable members dropped.
    pub fn negate(&self) -> Result<Vec<Formula>, ConstraintError> {
        let mut out = Vec::with_capacity(self.atoms.len());
        let mut prefix = Formula::new();
        for atom in &self.atoms {
            let member = prefix.with(atom.negated());
            if member.satisfiable()? {
                out.push(member);
            }
            prefix.atoms.insert(atom.clone());
        }
        Ok(out)
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey::of(self)
    }

    /// Values `v` of `x` such that `self /\ partial /\ x = v` is satisfiable.
    pub fn solutions(&self, x: &Var, partial: &Formula) -> Result<BTreeSet<GroundTerm>, ConstraintError> {
        Ok(self.solution_set(x, partial)?.to_set(x))
    }

    pub fn solution_set(&self, x: &Var, partial: &Formula) -> Result<SolutionSet, ConstraintError> {
        solve::solution_set(&self.and(partial), x)
    }

    /// Solutions for `x` when every other variable of the formula is
    /// assigned by `lookup`. Returns `None` if some other variable is not.
    pub fn project_ground(
        &self,
        x: &Var,
        lookup: impl Fn(&Var) -> Option<GroundTerm>,
    ) -> Option<SolutionSet> {
        solve::project_ground(self, x, lookup)
    }

    /// The closure restricted to constants and the variables accepted by
    /// `keep`. `None` if the formula is unsatisfiable by closure.
    pub fn project(&self, keep: impl Fn(&Var) -> bool) -> Option<Formula> {
        let g = match self.close() {
            Closure::Graph(g) => g,
            Closure::Unsatisfiable => return None,
        };
        Some(
            g.edges()
                .into_iter()
                .filter(|e| [&e.a, &e.b].iter().all(|o| o.as_var().is_none_or(&keep)))
                .filter_map(|e| AtomicConstraint::new(e.a, e.b, e.label))
                .collect(),
        )
    }

    pub fn is_saturated(&self) -> bool {
        match self.close() {
            Closure::Graph(g) => g.is_saturated(),
            Closure::Unsatisfiable => false,
        }
    }

    /// The structural measure of `x`, or `NotMeasurable` if the formula is
    /// not saturated.
    pub fn measure(&self, x: &Var) -> Measure {
        match self.close() {
            Closure::Graph(g) => g.measure(x),
            Closure::Unsatisfiable => Measure::NotMeasurable,
        }
    }

    /// Evaluates the formula under a full assignment of its variables.
    pub fn holds(&self, lookup: impl Fn(&Var) -> Option<GroundTerm>) -> Option<bool> {
        let mut all = true;
        for a in &self.atoms {
            all &= a.holds(&lookup)?;
        }
        Some(all)
    }
}

impl FromIterator<AtomicConstraint> for Formula {
    fn from_iter<T: IntoIterator<Item = AtomicConstraint>>(iter: T) -> Self {
        Formula::from_atoms(iter)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            a.fmt(f)?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn atom_orientation_is_normalized() {
        let d = dom(3);
        let (x, y) = (var("X", &d), var("Y", &d));
        assert_eq!(AtomicConstraint::eq(x.clone(), y.clone()), AtomicConstraint::eq(y.clone(), x.clone()));
        let a = AtomicConstraint::neq(c("a"), x.clone());
        assert_eq!(a.lhs(), &x);
        assert!(AtomicConstraint::new(c("a"), c("b"), Polarity::Eq).is_none());
    }

    #[test]
    fn negate_single_atom() {
        let d = dom(3);
        let x = var("X", &d);
        let f = Formula::single(AtomicConstraint::eq(x.clone(), c("a")));
        let n = f.negate().unwrap();
        assert_eq!(n, vec![Formula::single(AtomicConstraint::neq(x, c("a")))]);
    }

    #[test]
    fn negate_two_atoms_follows_atom_order() {
        let d = dom(3);
        let (x, y) = (var("X", &d), var("Y", &d));
        let b1 = AtomicConstraint::eq(x.clone(), c("a"));
        let b2 = AtomicConstraint::neq(x.clone(), y.clone());
        let f = Formula::from_atoms([b1.clone(), b2.clone()]);
        let first = f.atoms().next().unwrap().clone();
        let second = f.atoms().nth(1).unwrap().clone();
        assert_eq!(
            f.negate().unwrap(),
            vec![Formula::single(first.negated()), Formula::from_atoms([first, second.negated()])]
        );
    }

    #[test]
    fn negate_partitions_complement_on_three_values() {
        // {X != Y, X = a} over {a,b,c}: enumerate all 9 (X,Y) assignments.
        let d = dom(3);
        let (x, y) = (var("X", &d), var("Y", &d));
        let f = Formula::from_atoms([AtomicConstraint::neq(x.clone(), y.clone()), AtomicConstraint::eq(x.clone(), c("a"))]);
        let members = f.negate().unwrap();
        assert_eq!(members.len(), 2);
        for xv in d.values() {
            for yv in d.values() {
                let look = |v: &Var| Some(if v == &x { xv.clone() } else { yv.clone() });
                let in_f = f.holds(look).unwrap();
                let hits = members.iter().filter(|m| m.holds(look).unwrap()).count();
                assert_eq!(hits, usize::from(!in_f), "x={xv} y={yv}");
            }
        }
    }

    #[test]
    fn compatible_examples() {
        let d = dom(3);
        let (x, y) = (var("X", &d), var("Y", &d));
        let xa = Formula::single(AtomicConstraint::eq(x.clone(), c("a")));
        let xna = Formula::single(AtomicConstraint::neq(x.clone(), c("a")));
        assert!(!xa.compatible(&xna).unwrap());
        assert!(Formula::new().compatible(&xa).unwrap());
        let xy = Formula::single(AtomicConstraint::neq(x.clone(), y.clone()));
        let ab = Formula::from_atoms([AtomicConstraint::eq(x, c("a")), AtomicConstraint::eq(y, c("b"))]);
        assert!(xy.compatible(&ab).unwrap());
    }

    #[test]
    fn display_uses_text_syntax() {
        let d = dom(3);
        let (x, y) = (var("X1", &d), var("X3", &d));
        let f = Formula::from_atoms([AtomicConstraint::neq(x.clone(), y.clone())]);
        assert_eq!(f.to_string(), "X3 != X1");
        assert_eq!(Formula::new().to_string(), "true");
    }
}
