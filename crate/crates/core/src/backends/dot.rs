// SPDX-License-Identifier: Apache-2.0
//! Graphviz rendering of a circuit's syntax tree. Nodes are numbered in
//! pre-order, so output is a pure function of the input.

use std::fmt::Write as _;

use crate::ir::{Assign, Choice, CircuitDef, Expr, Stmt};

struct Graph {
    out: String,
    next: usize,
}

impl Graph {
    fn node(&mut self, parent: Option<usize>, label: &str) -> usize {
        let id = self.next;
        self.next += 1;
        let escaped = label.replace('\\', "\\\\").replace('"', "\\\"");
        let _ = writeln!(self.out, "  n{id} [label=\"{escaped}\"];");
        if let Some(p) = parent {
            let _ = writeln!(self.out, "  n{p} -> n{id};");
        }
        id
    }

    fn expr(&mut self, parent: usize, e: &Expr) {
        let (label, kids): (String, Vec<&Expr>) = match e {
            Expr::Lit(v) => (format!("lit {v}"), vec![]),
            Expr::Ref(n) => (format!("ref {n}"), vec![]),
            Expr::PortRef(i, p) => (format!("port {i}.{p}"), vec![]),
            Expr::State(s) => (format!("state {s}"), vec![]),
            Expr::Unary(op, x) => (format!("op {}", op.symbol()), vec![x]),
            Expr::Binary(op, l, r) => (format!("op {}", op.symbol()), vec![l, r]),
            Expr::Index(b, i) => ("index".into(), vec![b, i]),
            Expr::Field(b, f) => (format!("field {f}"), vec![b]),
            Expr::Aggregate(fields) => {
                let id = self.node(Some(parent), "aggregate");
                for (n, x) in fields {
                    let f = self.node(Some(id), &format!("field {n}"));
                    self.expr(f, x);
                }
                return;
            }
        };
        let id = self.node(Some(parent), &label);
        for k in kids {
            self.expr(id, k);
        }
    }

    fn assign(&mut self, parent: usize, label: &str, a: &Assign) {
        let id = self.node(Some(parent), label);
        self.expr(id, &a.lhs);
        self.expr(id, &a.rhs);
    }

    fn body(&mut self, parent: usize, label: &str, stmts: &[Stmt]) {
        let id = self.node(Some(parent), label);
        self.stmts(id, stmts);
    }

    fn stmts(&mut self, parent: usize, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(parent, s);
        }
    }

    fn stmt(&mut self, parent: usize, s: &Stmt) {
        match s {
            Stmt::Assign(a) => self.assign(parent, "assign", a),
            Stmt::CombAssign(a) => self.assign(parent, "comb_assign", a),
            Stmt::NextState(n) => {
                self.node(Some(parent), &format!("next_state {n}"));
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let id = self.node(Some(parent), "if");
                self.expr(id, cond);
                self.body(id, "then", then_body);
                if !else_body.is_empty() {
                    self.body(id, "else", else_body);
                }
            }
            Stmt::Case {
                selector,
                arms,
                default,
            } => {
                let id = self.node(Some(parent), "case");
                self.expr(id, selector);
                for arm in arms {
                    let c = match &arm.choice {
                        Choice::Value(v) => v.to_string(),
                        Choice::State(s) => s.clone(),
                    };
                    self.body(id, &format!("when {c}"), &arm.body);
                }
                if !default.is_empty() {
                    self.body(id, "default", default);
                }
            }
            Stmt::Sequential { label, body } => self.body(parent, &format!("sequential {label}"), body),
            Stmt::Combinatorial { label, body } => {
                let l = label.as_deref().map_or("combinatorial".to_string(), |l| format!("combinatorial {l}"));
                self.body(parent, &l, body);
            }
            Stmt::Fsm(f) => {
                let id = self.node(Some(parent), &format!("fsm {}", f.label));
                for d in &f.defaults {
                    self.assign(id, "default", d);
                }
                for st in &f.states {
                    self.body(id, &format!("state {}", st.name), &st.body);
                }
            }
        }
    }
}

/// `digraph <name>` with one node per declaration, statement and
/// expression of the circuit as written.
pub fn emit_dot(def: &CircuitDef) -> String {
    let mut g = Graph {
        out: String::new(),
        next: 0,
    };
    let _ = writeln!(g.out, "digraph \"{}\" {{", def.name);
    g.out.push_str("  node [shape=box];\n");
    let root = g.node(None, &format!("circuit {}", def.name));
    for t in &def.typedefs {
        g.node(Some(root), &format!("typedef {} = {}", t.name, t.desc));
    }
    for p in &def.ports {
        g.node(Some(root), &format!("{} {} : {}", p.direction.keyword(), p.name, p.ty));
    }
    for w in &def.wires {
        g.node(Some(root), &format!("wire {} : {}", w.name, w.ty));
    }
    for i in &def.instances {
        g.node(Some(root), &format!("component {} : {}", i.name, i.child.name));
    }
    g.stmts(root, &def.statements);
    g.out.push_str("}\n");
    g.out
}
