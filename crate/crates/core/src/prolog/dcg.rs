use super::term::Term;

/// Difference-list translation of `Head --> Body`. New variables are
/// appended to `names`.
pub(crate) fn translate(head: &Term, body: &Term, names: &mut Vec<String>) -> Result<(Term, Term), String> {
    if head.is(",", 2) {
        return Err("pushback in grammar rule heads is not supported".into());
    }
    let mut fresh = |names: &mut Vec<String>| {
        let i = names.len();
        names.push(format!("S{i}"));
        Term::Var(i)
    };
    let s0 = fresh(names);
    let s = fresh(names);
    let h = head.extend(vec![s0.clone(), s.clone()]).ok_or("grammar rule head must be callable")?;
    let b = body_of(body, s0, s, names, &mut fresh)?;
    Ok((h, b))
}

fn body_of(
    t: &Term,
    s0: Term,
    s: Term,
    names: &mut Vec<String>,
    fresh: &mut impl FnMut(&mut Vec<String>) -> Term,
) -> Result<Term, String> {
    let unify = |a: Term, b: Term| Term::compound("=", vec![a, b]);
    match t {
        Term::Var(_) => Ok(Term::compound("phrase", vec![t.clone(), s0, s])),
        _ if t.is(",", 2) => {
            let mid = fresh(names);
            let a = body_of(&t.args()[0], s0, mid.clone(), names, fresh)?;
            let b = body_of(&t.args()[1], mid, s, names, fresh)?;
            Ok(Term::compound(",", vec![a, b]))
        }
        _ if t.is("->", 2) => {
            let mid = fresh(names);
            let a = body_of(&t.args()[0], s0, mid.clone(), names, fresh)?;
            let b = body_of(&t.args()[1], mid, s, names, fresh)?;
            Ok(Term::compound("->", vec![a, b]))
        }
        _ if t.is(";", 2) || t.is("|", 2) => {
            let a = body_of(&t.args()[0], s0.clone(), s.clone(), names, fresh)?;
            let b = body_of(&t.args()[1], s0, s, names, fresh)?;
            Ok(Term::compound(";", vec![a, b]))
        }
        _ if t.is("\\+", 1) => {
            let rest = fresh(names);
            let g = body_of(&t.args()[0], s0.clone(), rest, names, fresh)?;
            Ok(Term::compound(",", vec![Term::compound("\\+", vec![g]), unify(s0, s)]))
        }
        _ if t.is("{}", 1) => Ok(Term::compound(",", vec![t.args()[0].clone(), unify(s0, s)])),
        _ if t.is("!", 0) => Ok(Term::compound(",", vec![t.clone(), unify(s0, s)])),
        _ if t.is("[]", 0) => Ok(unify(s0, s)),
        _ if t.is(".", 2) => {
            let items = t.list_items().ok_or("terminal list must be proper")?;
            Ok(unify(s0, Term::list(items, s)))
        }
        _ if t.is("call", t.arity()) && t.arity() > 0 => {
            Ok(t.extend(vec![s0, s]).expect("callable"))
        }
        Term::Atom(_) | Term::Compound(..) => Ok(t.extend(vec![s0, s]).expect("callable")),
        _ => Err(format!("`{t}` is not a grammar body")),
    }
}
