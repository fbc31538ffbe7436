use std::collections::{HashMap, HashSet};
use std::sync::{Arc, LazyLock};

use crate::constraint::{AtomicConstraint, Formula, Var};
use crate::diagram::Osdd;
use crate::error::EvalError;
use crate::prolog::{Program, Term};
use crate::term::{GroundTerm, SwitchInstance};

static PRELUDE: LazyLock<Program> = LazyLock::new(|| {
    Program::parse(
        "append([], L, L).\n\
         append([H|T], L, [H|R]) :- append(T, L, R).\n\
         member(X, [X|_]).\n\
         member(X, [_|T]) :- member(X, T).\n",
    )
    .expect("prelude parses")
});

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    /// Stop alternatives up to the barrier with this id.
    Cut(u64),
}

use Flow::{Continue, Cut};

type Res = Result<Flow, EvalError>;
pub(crate) type K<'a, 'p> = &'a mut dyn FnMut(&mut Machine<'p>, Osdd) -> Res;

struct Answer {
    term: Term,
    nvars: usize,
    osdd: Osdd,
}

/// Outcomes of switch instances for concrete evaluation; `None` means the
/// instance is not yet decided.
pub(crate) type World<'p> = &'p dyn Fn(&SwitchInstance) -> Option<GroundTerm>;

pub(crate) struct Machine<'p> {
    prog: &'p Program,
    world: Option<World<'p>>,
    bind: Vec<Option<Term>>,
    trail: Vec<usize>,
    tables: HashMap<(String, usize), Arc<Vec<Answer>>>,
    active: HashSet<(String, usize)>,
    pinned: Vec<Osdd>,
    vars: HashMap<SwitchInstance, Var>,
    depth: usize,
    max_depth: usize,
    barriers: u64,
}

impl<'p> Machine<'p> {
    pub(crate) fn new(prog: &'p Program, max_depth: usize) -> Self {
        Machine {
            prog,
            world: None,
            bind: Vec::new(),
            trail: Vec::new(),
            tables: HashMap::new(),
            active: HashSet::new(),
            pinned: Vec::new(),
            vars: HashMap::new(),
            depth: 0,
            max_depth,
            barriers: 0,
        }
    }

    /// Evaluates `msw` against fixed outcomes instead of symbolically.
    pub(crate) fn with_world(mut self, world: World<'p>) -> Self {
        self.world = Some(world);
        self
    }

    pub(crate) fn load(&mut self, t: &Term, nvars: usize) -> Term {
        let base = self.bind.len();
        self.bind.resize(base + nvars, None);
        t.map_vars(&mut |i| Term::Var(base + i))
    }

    fn barrier(&mut self) -> u64 {
        self.barriers += 1;
        self.barriers
    }

    fn deref(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(i) = t {
            match &self.bind[i] {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    pub(crate) fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Compound(f, args) => Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect()),
            t => t,
        }
    }

    fn undo(&mut self, mark: usize) {
        for i in self.trail.drain(mark..) {
            self.bind[i] = None;
        }
    }

    fn bind_var(&mut self, i: usize, t: Term) {
        self.bind[i] = Some(t);
        self.trail.push(i);
    }

    /// Unifies `a` and `b`. Comparisons involving switch outcomes succeed
    /// symbolically and push the atoms they require.
    fn unify(&mut self, a: &Term, b: &Term, atoms: &mut Vec<AtomicConstraint>) -> Result<bool, EvalError> {
        let (a, b) = (self.deref(a), self.deref(b));
        Ok(match (&a, &b) {
            (Term::Var(i), Term::Var(j)) if i == j => true,
            (Term::Var(i), _) => {
                self.bind_var(*i, b);
                true
            }
            (_, Term::Var(j)) => {
                self.bind_var(*j, a);
                true
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Real(x), Term::Real(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Ok(false);
                }
                for (x, y) in xs.iter().zip(ys.iter()) {
                    if !self.unify(x, y, atoms)? {
                        return Ok(false);
                    }
                }
                true
            }
            (Term::Sym(x), Term::Sym(y)) => {
                if x == y {
                    return Ok(true);
                }
                if x.domain() != y.domain() {
                    return Err(EvalError::Type(format!("outcomes of {x} and {y} have different types")));
                }
                atoms.push(AtomicConstraint::eq(x.clone(), y.clone()));
                true
            }
            (Term::Sym(x), c) | (c, Term::Sym(x)) => match c.as_ground() {
                Some(g) if x.domain().contains(&g) => {
                    atoms.push(AtomicConstraint::eq(x.clone(), g));
                    true
                }
                _ => false,
            },
            _ => false,
        })
    }

    fn constrain(&self, o: &Osdd, atoms: &[AtomicConstraint]) -> Result<Osdd, EvalError> {
        let mut o = o.clone();
        for a in atoms {
            if o.leaf_value() == Some(false) {
                break;
            }
            o = o.apply_constraint(a)?;
        }
        Ok(o)
    }

    pub(crate) fn solve(&mut self, goal: &Term, o: Osdd, cut: u64, k: K<'_, 'p>) -> Res {
        let g = self.deref(goal);
        let (name, arity) = match &g {
            Term::Var(_) => return Err(EvalError::Instantiation("goal is an unbound variable".into())),
            Term::Atom(a) => (a.clone(), 0),
            Term::Compound(f, a) => (f.clone(), a.len()),
            t => return Err(EvalError::Type(format!("`{t}` is not callable"))),
        };
        let args = g.args();
        match (&*name, arity) {
            ("true", 0) => k(self, o),
            ("fail" | "false", 0) => Ok(Continue),
            (",", 2) => {
                let rest = args[1].clone();
                self.solve(&args[0], o, cut, &mut |m, o2| m.solve(&rest, o2, cut, &mut *k))
            }
            ("!", 0) => match k(self, o)? {
                Continue => Ok(Cut(cut)),
                c => Ok(c),
            },
            (";", 2) if args[0].is("->", 2) => {
                let c = &args[0].args()[0];
                self.ite(c, &args[0].args()[1], &args[1], o, cut, k)
            }
            (";", 2) => {
                if let c @ Cut(_) = self.solve(&args[0], o.clone(), cut, &mut *k)? {
                    return Ok(c);
                }
                self.solve(&args[1], o, cut, k)
            }
            ("->", 2) => self.ite(&args[0], &args[1], &Term::atom("fail"), o, cut, k),
            ("\\+", 1) => self.not(&args[0], o, k),
            ("=", 2) => {
                let mark = self.trail.len();
                let mut atoms = Vec::new();
                let mut r = Ok(Continue);
                if self.unify(&args[0], &args[1], &mut atoms)? {
                    let o2 = self.constrain(&o, &atoms)?;
                    if o2.leaf_value() != Some(false) {
                        r = k(self, o2);
                    }
                }
                self.undo(mark);
                r
            }
            ("\\=", 2) => {
                let mark = self.trail.len();
                let mut atoms = Vec::new();
                let ok = self.unify(&args[0], &args[1], &mut atoms)?;
                self.undo(mark);
                if !ok {
                    return k(self, o);
                }
                for member in Formula::from_atoms(atoms).negate()? {
                    let o2 = o.apply_formula(&member)?;
                    if o2.leaf_value() != Some(false) {
                        if let c @ Cut(_) = k(self, o2)? {
                            return Ok(c);
                        }
                    }
                }
                Ok(Continue)
            }
            ("==", 2) => {
                if self.identical(&args[0], &args[1]) {
                    k(self, o)
                } else {
                    Ok(Continue)
                }
            }
            ("\\==", 2) => {
                if self.identical(&args[0], &args[1]) {
                    Ok(Continue)
                } else {
                    k(self, o)
                }
            }
            ("is", 2) => {
                let v = self.eval(&args[1])?;
                self.unify_then(&args[0], &Term::Int(v), o, k)
            }
            ("<" | ">" | "=<" | ">=" | "=:=" | "=\\=", 2) => {
                let (a, b) = (self.eval(&args[0])?, self.eval(&args[1])?);
                let holds = match &*name {
                    "<" => a < b,
                    ">" => a > b,
                    "=<" => a <= b,
                    ">=" => a >= b,
                    "=:=" => a == b,
                    _ => a != b,
                };
                if holds {
                    k(self, o)
                } else {
                    Ok(Continue)
                }
            }
            ("between" | "for", 3) => {
                let (x, lo, hi) = match &*name {
                    "between" => (&args[2], &args[0], &args[1]),
                    _ => (&args[0], &args[1], &args[2]),
                };
                let (lo, hi) = (self.eval(lo)?, self.eval(hi)?);
                match self.deref(x) {
                    Term::Int(v) if lo <= v && v <= hi => k(self, o),
                    Term::Var(_) => {
                        for v in lo..=hi {
                            if let c @ Cut(_) = self.unify_then(x, &Term::Int(v), o.clone(), &mut *k)? {
                                return Ok(c);
                            }
                        }
                        Ok(Continue)
                    }
                    Term::Int(_) => Ok(Continue),
                    t => Err(EvalError::Type(format!("`{t}` is not an integer"))),
                }
            }
            (":", 2) => self.solve(&args[1], o, cut, k),
            ("call", n) if n >= 1 => {
                let goal = self.deref(&args[0]).extend(args[1..].to_vec());
                let goal = goal.ok_or_else(|| EvalError::Type(format!("`{}` is not callable", args[0])))?;
                self.opaque(&goal, o, k)
            }
            ("phrase", 2 | 3) => {
                let rest = args.get(2).cloned().unwrap_or_else(Term::nil);
                let body = self.deref(&args[0]);
                let goal = body
                    .extend(vec![args[1].clone(), rest])
                    .ok_or_else(|| EvalError::Type(format!("`{body}` is not a grammar body")))?;
                self.opaque(&goal, o, k)
            }
            ("length", 2) => self.length(&args[0], &args[1], o, k),
            ("msw", 3) => self.msw(&args[0], &args[1], &args[2], o, k),
            ("msw", 2) => Err(EvalError::Unsupported("msw/2 without an instance argument".into())),
            _ => self.call_user(&g, &name, arity, o, k),
        }
    }

    fn opaque(&mut self, goal: &Term, o: Osdd, k: K<'_, 'p>) -> Res {
        let id = self.barrier();
        match self.solve(goal, o, id, k)? {
            Cut(c) if c == id => Ok(Continue),
            r => Ok(r),
        }
    }

    fn unify_then(&mut self, a: &Term, b: &Term, o: Osdd, k: K<'_, 'p>) -> Res {
        let mark = self.trail.len();
        let mut atoms = Vec::new();
        let r = if self.unify(a, b, &mut atoms)? {
            let o2 = self.constrain(&o, &atoms)?;
            if o2.leaf_value() == Some(false) {
                Ok(Continue)
            } else {
                k(self, o2)
            }
        } else {
            Ok(Continue)
        };
        self.undo(mark);
        r
    }

    fn not(&mut self, g: &Term, o: Osdd, k: K<'_, 'p>) -> Res {
        let id = self.barrier();
        let mut found = false;
        let before = o.clone();
        self.solve(g, o.clone(), id, &mut |_, o2| {
            if o2 != before {
                return Err(EvalError::Unsupported("negation of a probabilistic goal".into()));
            }
            found = true;
            Ok(Cut(id))
        })?;
        if found {
            Ok(Continue)
        } else {
            k(self, o)
        }
    }

    /// If-then-else. A condition that compares switch outcomes splits into
    /// the constrained branches instead of committing.
    fn ite(&mut self, c: &Term, t: &Term, e: &Term, o: Osdd, cut: u64, k: K<'_, 'p>) -> Res {
        let c = self.deref(c);
        if c.is("=", 2) || c.is("\\=", 2) {
            let positive = c.is("=", 2);
            let mark = self.trail.len();
            let mut atoms = Vec::new();
            let ok = self.unify(&c.args()[0], &c.args()[1], &mut atoms)?;
            if ok && !atoms.is_empty() {
                let (yes, no) = if positive { (t, e) } else { (e, t) };
                let o_yes = self.constrain(&o, &atoms)?;
                if !positive {
                    self.undo(mark);
                }
                if o_yes.leaf_value() != Some(false) {
                    if let r @ Cut(_) = self.solve(yes, o_yes, cut, &mut *k)? {
                        self.undo(mark);
                        return Ok(r);
                    }
                }
                self.undo(mark);
                for member in Formula::from_atoms(atoms).negate()? {
                    let o_no = o.apply_formula(&member)?;
                    if o_no.leaf_value() != Some(false) {
                        if let r @ Cut(_) = self.solve(no, o_no, cut, &mut *k)? {
                            return Ok(r);
                        }
                    }
                }
                return Ok(Continue);
            }
            if ok && positive {
                let r = self.solve(t, o, cut, k);
                self.undo(mark);
                return r;
            }
            self.undo(mark);
            return self.solve(if ok == positive { t } else { e }, o, cut, k);
        }
        let id = self.barrier();
        let mut found = false;
        let then = t.clone();
        let r = self.solve(&c, o.clone(), id, &mut |m, o2| {
            found = true;
            match m.solve(&then, o2, cut, &mut *k)? {
                Continue => Ok(Cut(id)),
                r => Ok(r),
            }
        })?;
        match r {
            Cut(x) if x == id => Ok(Continue),
            Cut(x) => Ok(Cut(x)),
            Continue if found => Ok(Continue),
            Continue => self.solve(e, o, cut, k),
        }
    }

    fn identical(&self, a: &Term, b: &Term) -> bool {
        match (self.deref(a), self.deref(b)) {
            (Term::Var(i), Term::Var(j)) => i == j,
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Real(x), Term::Real(y)) => x == y,
            (Term::Sym(x), Term::Sym(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.identical(x, y))
            }
            _ => false,
        }
    }

    fn eval(&self, t: &Term) -> Result<i64, EvalError> {
        let overflow = || EvalError::Type("integer overflow".into());
        match self.deref(t) {
            Term::Int(i) => Ok(i),
            Term::Var(_) => Err(EvalError::Instantiation("arithmetic on an unbound variable".into())),
            Term::Sym(v) => Err(EvalError::Instantiation(format!("arithmetic on the random outcome {v}"))),
            Term::Compound(f, a) if a.len() == 1 => {
                let x = self.eval(&a[0])?;
                match &*f {
                    "-" => x.checked_neg().ok_or_else(overflow),
                    "+" => Ok(x),
                    "abs" => x.checked_abs().ok_or_else(overflow),
                    _ => Err(EvalError::Type(format!("unknown arithmetic function {f}/1"))),
                }
            }
            Term::Compound(f, a) if a.len() == 2 => {
                let (x, y) = (self.eval(&a[0])?, self.eval(&a[1])?);
                let zero = || EvalError::Type("division by zero".into());
                match &*f {
                    "+" => x.checked_add(y).ok_or_else(overflow),
                    "-" => x.checked_sub(y).ok_or_else(overflow),
                    "*" => x.checked_mul(y).ok_or_else(overflow),
                    "//" => x.checked_div(y).ok_or_else(zero),
                    "/" if y != 0 && x % y == 0 => Ok(x / y),
                    "/" => Err(EvalError::Type(format!("{x}/{y} is not an integer"))),
                    "mod" => x.checked_rem_euclid(y).ok_or_else(zero),
                    "rem" => x.checked_rem(y).ok_or_else(zero),
                    "min" => Ok(x.min(y)),
                    "max" => Ok(x.max(y)),
                    _ => Err(EvalError::Type(format!("unknown arithmetic function {f}/2"))),
                }
            }
            t => Err(EvalError::Type(format!("`{t}` is not an integer expression"))),
        }
    }

    fn length(&mut self, list: &Term, n: &Term, o: Osdd, k: K<'_, 'p>) -> Res {
        let mut len = 0i64;
        let mut t = self.deref(list);
        loop {
            match t {
                Term::Atom(ref a) if &**a == "[]" => return self.unify_then(n, &Term::Int(len), o, k),
                Term::Compound(ref f, ref a) if &**f == "." && a.len() == 2 => {
                    len += 1;
                    t = self.deref(&a[1]);
                }
                Term::Var(_) => break,
                _ => return Ok(Continue),
            }
        }
        let Term::Int(want) = self.deref(n) else {
            return Err(EvalError::Instantiation("length/2 of a partial list needs a length".into()));
        };
        if want < len {
            return Ok(Continue);
        }
        let extra: Vec<Term> = (len..want)
            .map(|_| {
                self.bind.push(None);
                Term::Var(self.bind.len() - 1)
            })
            .collect();
        self.unify_then(&t, &Term::list(extra, Term::nil()), o, k)
    }

    fn msw(&mut self, s: &Term, inst: &Term, y: &Term, o: Osdd, k: K<'_, 'p>) -> Res {
        let name = match self.deref(s) {
            Term::Atom(a) => a,
            Term::Var(_) => return Err(EvalError::Instantiation("msw switch name is unbound".into())),
            t => return Err(EvalError::Type(format!("switch name `{t}` must be an atom"))),
        };
        let instance = match self.deref(inst) {
            Term::Var(_) => {
                return Err(EvalError::Instantiation(format!("msw({name}, _, _) needs a ground instance")))
            }
            t => t.as_ground().ok_or_else(|| EvalError::Type(format!("switch instance `{t}` must be an atom or integer")))?,
        };
        let decl = self.prog.switches().get(&name).ok_or_else(|| EvalError::UndeclaredSwitch(name.to_string()))?;
        let si = SwitchInstance { switch: name.clone(), instance };
        if let Some(world) = self.world {
            let value = world(&si).ok_or_else(|| EvalError::NeedInstance(si.clone()))?;
            return self.unify_then(y, &Term::from(value), o, k);
        }
        let domain = decl.domain.clone();
        let v = self.vars.entry(si.clone()).or_insert_with(|| Var::instance(si, domain)).clone();
        match self.deref(y) {
            t @ (Term::Atom(_) | Term::Int(_)) if !v.domain().contains(&t.as_ground().unwrap()) => {
                return Err(EvalError::OutsideDomain { switch: name.to_string(), value: t.to_string() })
            }
            t @ (Term::Compound(..) | Term::Real(_)) => {
                return Err(EvalError::OutsideDomain { switch: name.to_string(), value: t.to_string() })
            }
            _ => {}
        }
        let o2 = o.and(&Osdd::unconstrained(v.clone(), Osdd::one()))?;
        self.unify_then(y, &Term::Sym(v), o2, k)
    }

    fn call_user(&mut self, g: &Term, name: &Arc<str>, arity: usize, o: Osdd, k: K<'_, 'p>) -> Res {
        let prog = if self.prog.defines(name, arity) {
            self.prog
        } else if PRELUDE.defines(name, arity) {
            &*PRELUDE
        } else {
            return Err(EvalError::UnknownProcedure(format!("{name}/{arity}")));
        };
        let call = self.resolve(g);
        let key = (variant_key(&call), o.id());
        let answers = match self.tables.get(&key) {
            Some(a) => a.clone(),
            None => {
                if !self.active.insert(key.clone()) {
                    return Err(EvalError::Unsupported(format!(
                        "`{call}` calls itself with the same arguments (left recursion)"
                    )));
                }
                if self.depth >= self.max_depth {
                    self.active.remove(&key);
                    return Err(EvalError::DepthLimit(self.max_depth));
                }
                self.depth += 1;
                let found = self.complete(prog, &call, name, arity, &o);
                self.depth -= 1;
                self.active.remove(&key);
                let answers = Arc::new(found?);
                self.pinned.push(o.clone());
                self.tables.insert(key, answers.clone());
                answers
            }
        };
        for a in answers.iter() {
            let mark = self.trail.len();
            let base = self.bind.len();
            let inst = self.load(&a.term, a.nvars);
            let mut atoms = Vec::new();
            let ok = self.unify(&call, &inst, &mut atoms)?;
            debug_assert!(ok && atoms.is_empty());
            let r = k(self, a.osdd.clone());
            self.undo(mark);
            self.bind.truncate(base);
            if let c @ Cut(_) = r? {
                return Ok(c);
            }
        }
        Ok(Continue)
    }

    /// All answers to `call` under `o`, grouped by variant with their
    /// diagrams combined by disjunction.
    fn complete(&mut self, prog: &Program, call: &Term, name: &str, arity: usize, o: &Osdd) -> Result<Vec<Answer>, EvalError> {
        let mut raw: Vec<(Term, Osdd)> = Vec::new();
        for clause in prog.clauses_of(name, arity) {
            let mark = self.trail.len();
            let base = self.bind.len();
            self.bind.resize(base + clause.nvars(), None);
            let head = clause.head.map_vars(&mut |i| Term::Var(base + i));
            let body = clause.body.map_vars(&mut |i| Term::Var(base + i));
            let mut atoms = Vec::new();
            let mut flow = Continue;
            if self.unify(&head, call, &mut atoms)? {
                let o1 = self.constrain(o, &atoms)?;
                if o1.leaf_value() != Some(false) {
                    let id = self.barrier();
                    let target = call.clone();
                    flow = self.solve(&body, o1, id, &mut |m, o2| {
                        raw.push((m.resolve(&target), o2));
                        Ok(Continue)
                    })?;
                }
            }
            self.undo(mark);
            self.bind.truncate(base);
            if flow != Continue {
                break;
            }
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut out: Vec<Answer> = Vec::new();
        for (t, d) in raw {
            let (term, nvars) = normalize(&t);
            match index.get(&variant_key(&term)) {
                Some(&i) => out[i].osdd = out[i].osdd.or(&d)?,
                None => {
                    index.insert(variant_key(&term), out.len());
                    out.push(Answer { term, nvars, osdd: d });
                }
            }
        }
        Ok(out)
    }
}

/// Renumbers variables `0..n` in order of first occurrence.
fn normalize(t: &Term) -> (Term, usize) {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let out = t.map_vars(&mut |i| {
        let n = map.len();
        Term::Var(*map.entry(i).or_insert(n))
    });
    (out, map.len())
}

/// A string equal for two terms exactly when they are variants.
fn variant_key(t: &Term) -> String {
    fn go(t: &Term, vars: &mut HashMap<usize, usize>, out: &mut String) {
        use std::fmt::Write;
        match t {
            Term::Var(i) => {
                let n = vars.len();
                let _ = write!(out, "_{}", vars.entry(*i).or_insert(n));
            }
            Term::Atom(a) => {
                let _ = write!(out, "a{}:{a}", a.len());
            }
            Term::Int(i) => {
                let _ = write!(out, "i{i};");
            }
            Term::Real(r) => {
                let _ = write!(out, "r{r};");
            }
            Term::Sym(v) => {
                let si = v.switch_instance().expect("outcome of a switch instance");
                let inst = match &si.instance {
                    GroundTerm::Int(i) => format!("i{i}"),
                    GroundTerm::Atom(a) => format!("a{}:{a}", a.len()),
                };
                let _ = write!(out, "s{}:{}{inst}", si.switch.len(), si.switch);
            }
            Term::Compound(f, args) => {
                let _ = write!(out, "c{}:{f}/{}(", f.len(), args.len());
                for a in args.iter() {
                    go(a, vars, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(t, &mut HashMap::new(), &mut out);
    out
}
