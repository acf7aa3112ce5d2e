//! Graphviz export of an e-pos: solid undirected edges for E, dashed edges
//! for the covers of L drawn from the larger index down to the smaller.

use std::fmt::Write;

use crate::groupoid::EPos;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn epos_to_dot(e: &EPos) -> String {
    let mut out = String::from("digraph epos {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for i in e.indices() {
        let _ = writeln!(out, "  {};", quote(e.name(i)));
    }
    for (a, b) in e.equiv_pairs() {
        if a < b {
            let _ = writeln!(out, "  {} -> {} [dir=none, style=solid, constraint=false];", quote(e.name(a)), quote(e.name(b)));
        }
    }
    for (lo, hi) in e.covers() {
        let _ = writeln!(out, "  {} -> {} [dir=none, style=dashed];", quote(e.name(lo)), quote(e.name(hi)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{projective_epos, sphere_epos};

    #[test]
    fn sphere_dot() {
        let dot = epos_to_dot(&sphere_epos());
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("style=solid").count(), 1);
        assert_eq!(dot.matches("style=dashed").count(), 2);
        assert!(dot.contains("\"n_s\" -> \"n\" [dir=none, style=dashed]"));
    }

    #[test]
    fn plane_dot_counts() {
        let e = projective_epos(2).unwrap();
        let dot = epos_to_dot(&e);
        let nodes = dot.lines().filter(|l| l.trim_end().ends_with("\";")).count();
        assert_eq!(nodes, 12);
        // each 3-element E-class contributes 3 undirected edges, each pair 1
        let expected: usize = e.classes().iter().map(|c| c.len() * (c.len() - 1) / 2).sum();
        assert_eq!(dot.matches("style=solid").count(), expected);
        assert_eq!(dot.matches("style=dashed").count(), e.covers().len());
    }

    #[test]
    fn names_are_quoted() {
        let e = EPos::from_generators(vec!["a\"b".into()], [], []);
        assert!(epos_to_dot(&e).contains("\"a\\\"b\";"));
    }
}
