use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::Osdd;
use crate::constraint::{parse_formula, Var};
use crate::error::{ConstraintError, DiagramError};
use crate::term::{SwitchInstance, TypeDomain};

pub(crate) fn write_osdd(d: &Osdd, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if let Some(v) = d.leaf_value() {
        return write!(f, "{}", u8::from(v));
    }
    let y = d.var().unwrap();
    let si = y.switch_instance().unwrap();
    write!(f, "({}, {}, {})[", si.switch, si.instance, y)?;
    for (i, e) in d.edges().iter().enumerate() {
        if i > 0 {
            f.write_str(" ; ")?;
        }
        write!(f, "{} : ", e.label)?;
        write_osdd(&e.child, f)?;
    }
    f.write_str("]")
}

enum Raw {
    Leaf(bool),
    Node { si: SwitchInstance, var: String, edges: Vec<(String, usize, Raw)> },
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> DiagramError {
        DiagramError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DiagramError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    /// Text up to the first of `stops` outside quotes and parentheses.
    fn until(&mut self, stops: &[char]) -> Result<&'a str, DiagramError> {
        let start = self.pos;
        let (mut depth, mut quoted) = (0i32, false);
        for (i, c) in self.src[start..].char_indices() {
            match c {
                '\'' => quoted = !quoted,
                _ if quoted => {}
                '(' | '[' => depth += 1,
                ')' | ']' if depth > 0 => depth -= 1,
                _ if depth == 0 && stops.contains(&c) => {
                    self.pos = start + i;
                    return Ok(self.src[start..start + i].trim());
                }
                _ => {}
            }
        }
        self.pos = self.src.len();
        Err(self.err(format!("expected one of {stops:?}")))
    }

    fn diagram(&mut self) -> Result<Raw, DiagramError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with('0') || rest.starts_with('1') {
            self.pos += 1;
            return Ok(Raw::Leaf(rest.starts_with('1')));
        }
        self.expect('(')?;
        let switch = self.until(&[','])?.to_string();
        self.expect(',')?;
        let inst_text = self.until(&[','])?;
        let instance = crate::constraint::text_ground(inst_text)
            .ok_or_else(|| self.err(format!("bad instance `{inst_text}`")))?;
        self.expect(',')?;
        let var = self.until(&[')'])?.to_string();
        self.expect(')')?;
        self.expect('[')?;
        let mut edges = Vec::new();
        self.skip_ws();
        if self.src[self.pos..].starts_with(']') {
            self.pos += 1;
        } else {
            loop {
                let at = self.pos;
                let label = self.until(&[':'])?.to_string();
                self.expect(':')?;
                let child = self.diagram()?;
                edges.push((label, at, child));
                self.skip_ws();
                match self.src[self.pos..].chars().next() {
                    Some(';') => self.pos += 1,
                    Some(']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `;` or `]`")),
                }
            }
        }
        Ok(Raw::Node { si: SwitchInstance { switch: Arc::from(switch.as_str()), instance }, var, edges })
    }
}

fn collect_vars(
    raw: &Raw,
    domain_of: &dyn Fn(&str) -> Option<Arc<TypeDomain>>,
    vars: &mut HashMap<String, Var>,
) -> Result<(), DiagramError> {
    if let Raw::Node { si, var, edges } = raw {
        let dom = domain_of(&si.switch)
            .ok_or_else(|| DiagramError::Syntax { pos: 0, msg: format!("unknown switch `{}`", si.switch) })?;
        let v = Var::instance_named(si.clone(), var, dom);
        if let Some(old) = vars.get(var) {
            if old != &v {
                return Err(DiagramError::Syntax { pos: 0, msg: format!("variable `{var}` names two nodes") });
            }
        } else {
            vars.insert(var.clone(), v);
        }
        for (_, _, c) in edges {
            collect_vars(c, domain_of, vars)?;
        }
    }
    Ok(())
}

fn build(raw: &Raw, vars: &HashMap<String, Var>) -> Result<Osdd, DiagramError> {
    match raw {
        Raw::Leaf(v) => Ok(Osdd::leaf(*v)),
        Raw::Node { var, edges, .. } => {
            let y = vars[var].clone();
            let mut out = Vec::new();
            for (text, at, child) in edges {
                let label = parse_formula(text, |n| {
                    Ok::<_, ConstraintError>(vars.get(n).cloned().unwrap_or_else(|| Var::named(n, y.domain().clone())))
                })
                .map_err(|e| DiagramError::Syntax { pos: *at, msg: e.to_string() })?;
                out.push((label, build(child, vars)?));
            }
            Ok(Osdd::node(y, out)?)
        }
    }
}

/// Parses the textual form `(switch, instance, Var)[formula : child ; ...]`
/// with leaves `0` and `1`. Variables that name no node are free and take
/// the type of the node whose label mentions them.
pub fn parse_osdd(text: &str, domain_of: impl Fn(&str) -> Option<Arc<TypeDomain>>) -> Result<Osdd, DiagramError> {
    let mut p = Parser { src: text, pos: 0 };
    let raw = p.diagram()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    let mut vars = HashMap::new();
    collect_vars(&raw, &domain_of, &mut vars)?;
    build(&raw, &vars)
}
