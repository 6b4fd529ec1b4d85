use std::collections::BTreeSet;
use std::fmt::Write;

use super::{DdError, Edge, LimTdd, Manager, NodeId, Var};

impl Manager {
    /// Graphviz text: dashed low edges, solid high edges, unit weights unlabeled.
    pub fn export_dot(&self, f: &LimTdd) -> Result<String, DdError> {
        self.check(f)?;
        let mut nodes = BTreeSet::new();
        let mut stack = vec![f.edge.v];
        while let Some(v) = stack.pop() {
            if !nodes.insert(v) {
                continue;
            }
            if let Some((lo, hi)) = self.node_children(v) {
                stack.push(lo.v);
                stack.push(hi.v);
            }
        }
        let mut out = String::from("digraph limtdd {\n  root [shape=point];\n");
        for &v in &nodes {
            let label = if v == NodeId::TERMINAL { "1".to_string() } else { self.order.name(self.node(v).var).to_string() };
            let shape = if v == NodeId::TERMINAL { "box" } else { "circle" };
            let _ = writeln!(out, "  n{} [label=\"{}\", shape={}];", v.0, escape(&label), shape);
        }
        let _ = writeln!(out, "  root -> n{}{};", f.edge.v.0, self.edge_label(&f.edge, &f.vars));
        for &v in &nodes {
            if v == NodeId::TERMINAL {
                continue;
            }
            let node = self.node(v);
            let rest = &self.sets.get(node.set)[1..];
            for (e, style) in [(&node.low, "dashed"), (&node.high, "solid")] {
                let mut attrs = self.edge_label(e, rest);
                if attrs.is_empty() {
                    let _ = write!(attrs, " [style={style}]");
                } else {
                    attrs.insert_str(attrs.len() - 1, &format!(", style={style}"));
                }
                let _ = writeln!(out, "  n{} -> n{}{};", v.0, e.v.0, attrs);
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    fn edge_label(&self, e: &Edge, vars: &[Var]) -> String {
        if e.w.is_one() {
            return String::new();
        }
        let text = if e.is_zero() { "0".to_string() } else { e.w.to_lim(vars, self.n).to_string() };
        format!(" [label=\"{}\"]", escape(&text))
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
