//! Deterministic Graphviz export: agents in canonical order, scalar
//! promises as node attributes sorted by label, `+adj` offers as edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::model::{BodyKind, Polarity, World};
use crate::topology::adjacency_matrix;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn export_dot(w: &World) -> String {
    let mut out = String::from("digraph W {\n");
    for a in w.agents() {
        let mut scalars: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for p in w
            .scalar_promises(a)
            .filter(|p| p.polarity == Polarity::Plus)
        {
            debug_assert_eq!(p.body.kind, BodyKind::Scalar);
            scalars
                .entry(p.body.label.as_str())
                .or_default()
                .extend(p.body.payload.iter().map(String::as_str));
        }
        if scalars.is_empty() {
            writeln!(out, "  {};", quote(a.as_str())).expect("string write");
        } else {
            let attrs: Vec<String> = scalars
                .iter()
                .map(|(k, v)| {
                    format!(
                        "{}={}",
                        quote(k),
                        quote(&v.iter().copied().collect::<Vec<_>>().join(","))
                    )
                })
                .collect();
            writeln!(out, "  {} [{}];", quote(a.as_str()), attrs.join(", ")).expect("string write");
        }
    }
    let m = adjacency_matrix(w);
    let mut dirs: BTreeMap<(usize, usize), BTreeSet<&str>> = BTreeMap::new();
    for p in w
        .promises()
        .iter()
        .filter(|p| p.polarity == Polarity::Plus && p.is_adjacency())
    {
        let r = m.index_of(&p.promiser).expect("agent");
        let c = m.index_of(&p.promisee).expect("agent");
        if let Some(d) = &p.body.direction {
            dirs.entry((r, c)).or_default().insert(d);
        }
    }
    for r in 0..m.len() {
        for c in 0..m.len() {
            if !m.positive(r, c) {
                continue;
            }
            let (from, to) = (quote(m.order[r].as_str()), quote(m.order[c].as_str()));
            match dirs.get(&(r, c)) {
                Some(d) if r != c => {
                    let label = d.iter().copied().collect::<Vec<_>>().join(",");
                    writeln!(out, "  {from} -> {to} [label={}];", quote(&label))
                        .expect("string write");
                }
                _ => writeln!(out, "  {from} -> {to};").expect("string write"),
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{aid, Promise, PromiseBody};

    #[test]
    fn empty_world() {
        assert_eq!(export_dot(&World::new()), "digraph W {\n}\n");
    }

    #[test]
    fn g4_has_six_edges() {
        let dot = export_dot(&fixtures::g4());
        assert_eq!(dot.matches(" -> ").count(), 6);
        assert!(dot.contains("  \"4\" -> \"4\";\n"));
        assert!(dot.contains("  \"1\" -> \"2\" [label=\"a\"];\n"));
        assert_eq!(dot, export_dot(&fixtures::g4()));
    }

    #[test]
    fn scalars_become_sorted_attributes() {
        let w = fixtures::undirected_chain(&["A", "B"])
            .make_promise(Promise::plus(
                &aid("A"),
                PromiseBody::scalar("red"),
                &aid("B"),
            ))
            .unwrap()
            .make_promise(Promise::plus(
                &aid("A"),
                PromiseBody::scalar("blue").with_payload(["x"]),
                &aid("B"),
            ))
            .unwrap();
        let dot = export_dot(&w);
        assert!(
            dot.contains("  \"A\" [\"blue\"=\"x\", \"red\"=\"\"];\n"),
            "{dot}"
        );
    }
}
