use super::{AtomicConstraint, Formula, Operand, Polarity, Var};
use crate::error::ConstraintError;
use crate::term::GroundTerm;

fn split_top(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut start, mut quoted, mut escaped) = (0, false, false);
    for (i, ch) in text.char_indices() {
        match ch {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '\'' => quoted = !quoted,
            ',' if !quoted => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn find_op(s: &str) -> Option<(usize, usize, Polarity)> {
    let mut quoted = false;
    let bytes = s.as_bytes();
    for (i, ch) in s.char_indices() {
        match ch {
            '\'' => quoted = !quoted,
            _ if quoted => {}
            '!' | '\\' if bytes.get(i + 1) == Some(&b'=') => return Some((i, 2, Polarity::Neq)),
            '≠' => return Some((i, ch.len_utf8(), Polarity::Neq)),
            '=' => return Some((i, 1, Polarity::Eq)),
            _ => {}
        }
    }
    None
}

pub(crate) fn parse_ground(s: &str) -> Option<GroundTerm> {
    if let Ok(v) = s.parse::<i64>() {
        return Some(GroundTerm::Int(v));
    }
    if s.len() >= 2 && s.starts_with('\'') && s.ends_with('\'') {
        return Some(GroundTerm::atom(&s[1..s.len() - 1].replace("\\'", "'")));
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') => {
            Some(GroundTerm::atom(s))
        }
        _ => None,
    }
}

fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `X3 != X1, X3 = X2` (or `true`). Variable names are mapped to
/// typed variables by `resolve`.
pub fn parse_formula(
    text: &str,
    mut resolve: impl FnMut(&str) -> Result<Var, ConstraintError>,
) -> Result<Formula, ConstraintError> {
    let text = text.trim();
    if text.is_empty() || text == "true" {
        return Ok(Formula::new());
    }
    let mut f = Formula::new();
    for part in split_top(text) {
        let part = part.trim();
        let (i, len, pol) =
            find_op(part).ok_or_else(|| ConstraintError::Syntax(format!("no operator in `{part}`")))?;
        let mut operand = |s: &str| -> Result<Operand, ConstraintError> {
            let s = s.trim();
            if is_var_name(s) {
                resolve(s).map(Operand::Var)
            } else {
                parse_ground(s)
                    .map(Operand::Const)
                    .ok_or_else(|| ConstraintError::Syntax(format!("bad operand `{s}`")))
            }
        };
        let (a, b) = (operand(&part[..i])?, operand(&part[i + len..])?);
        let atom = AtomicConstraint::new(a, b, pol)
            .ok_or_else(|| ConstraintError::Syntax(format!("`{part}` has no variable")))?;
        match atom.rhs() {
            Operand::Const(k) if !atom.lhs().domain().contains(k) => {
                return Err(ConstraintError::Syntax(format!("`{k}` is not a value of {}", atom.lhs())));
            }
            Operand::Var(y) if y.domain() != atom.lhs().domain() => {
                return Err(ConstraintError::Syntax(format!("`{part}` relates variables of different types")));
            }
            _ => {}
        }
        f.insert(atom);
    }
    Ok(f)
}
