use std::collections::HashMap;
use std::fmt::Write;

use super::Osdd;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: internal nodes are boxes labelled `msw(s,k,X)`,
/// leaves are circles, edges carry their constraint formulas.
pub(crate) fn to_dot(d: &Osdd) -> String {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    d.visit(|n| {
        ids.insert(n.id(), order.len());
        order.push(n.clone());
    });
    let mut out = String::from("digraph osdd {\n");
    for (i, n) in order.iter().enumerate() {
        match n.leaf_value() {
            Some(v) => writeln!(out, "  n{i} [shape=circle, label=\"{}\"];", u8::from(v)).unwrap(),
            None => {
                let y = n.var().unwrap();
                let si = y.switch_instance().unwrap();
                let label = escape(&format!("msw({},{},{})", si.switch, si.instance, y));
                writeln!(out, "  n{i} [shape=box, label=\"{label}\"];").unwrap();
            }
        }
    }
    for (i, n) in order.iter().enumerate() {
        for e in n.edges() {
            let j = ids[&e.child.id()];
            let label = if e.label.is_empty() { String::new() } else { escape(&e.label.to_string()) };
            writeln!(out, "  n{i} -> n{j} [label=\"{label}\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}
