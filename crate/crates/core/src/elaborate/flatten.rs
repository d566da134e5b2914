// SPDX-License-Identifier: Apache-2.0
//! Inlining of the instance hierarchy.
//!
//! Signal `x` of instance `i` becomes `i__x`; port `p` of a child is a
//! wire `i__p` in the parent. The result has no instances and no typedefs
//! (all types are resolved).

use std::collections::HashSet;

use super::ElaboratedCircuit;
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::ir::{Assign, CaseArm, CircuitDef, Expr, Fsm, StateDecl, Stmt, WireDecl};

/// Joins hierarchical name parts.
pub fn mangle(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}__{name}")
    }
}

pub fn flatten(elab: &ElaboratedCircuit) -> Result<CircuitDef, Diagnostics> {
    let mut out = CircuitDef::new(elab.name());
    for p in &elab.lowered.ports {
        let mut p = p.clone();
        p.ty = elab.symbols.get(&p.name).expect("port symbol").ty.clone();
        out.ports.push(p);
    }
    inline(elab, "", &mut out);

    let mut seen = HashSet::new();
    let mut diags = Diagnostics::new();
    for n in out.ports.iter().map(|p| &p.name).chain(out.wires.iter().map(|w| &w.name)) {
        if !seen.insert(n.clone()) {
            diags.push(
                Diagnostic::error(Rule::NameCollision, format!("flattened name `{n}` is not unique"))
                    .in_circuit(elab.name()),
            );
        }
    }
    if diags.has_errors() {
        Err(diags)
    } else {
        Ok(out)
    }
}

fn inline(elab: &ElaboratedCircuit, prefix: &str, out: &mut CircuitDef) {
    if !prefix.is_empty() {
        for p in &elab.lowered.ports {
            out.wires.push(WireDecl {
                name: mangle(prefix, &p.name),
                ty: elab.symbols.get(&p.name).expect("port symbol").ty.clone(),
            });
        }
    }
    for w in &elab.lowered.wires {
        out.wires.push(WireDecl {
            name: mangle(prefix, &w.name),
            ty: elab.symbols.get(&w.name).expect("wire symbol").ty.clone(),
        });
    }
    for s in &elab.lowered.statements {
        out.statements.push(rename_stmt(s, prefix));
    }
    for inst in &elab.lowered.instances {
        let child = elab.instance_child(&inst.name).expect("elaborated child");
        inline(child, &mangle(prefix, &inst.name), out);
    }
}

fn rename_expr(e: &Expr, prefix: &str) -> Expr {
    e.map_refs(&|r| match r {
        Expr::Ref(n) => Expr::Ref(mangle(prefix, n)),
        Expr::PortRef(i, p) => Expr::Ref(mangle(&mangle(prefix, i), p)),
        other => other.clone(),
    })
}

fn rename_assign(a: &Assign, prefix: &str) -> Assign {
    Assign {
        lhs: rename_expr(&a.lhs, prefix),
        rhs: rename_expr(&a.rhs, prefix),
        kind: a.kind,
    }
}

fn rename_body(b: &[Stmt], prefix: &str) -> Vec<Stmt> {
    b.iter().map(|s| rename_stmt(s, prefix)).collect()
}

fn rename_stmt(s: &Stmt, prefix: &str) -> Stmt {
    match s {
        Stmt::Assign(a) => Stmt::Assign(rename_assign(a, prefix)),
        Stmt::CombAssign(a) => Stmt::CombAssign(rename_assign(a, prefix)),
        Stmt::NextState(t) => Stmt::NextState(t.clone()),
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => Stmt::If {
            cond: rename_expr(cond, prefix),
            then_body: rename_body(then_body, prefix),
            else_body: rename_body(else_body, prefix),
        },
        Stmt::Case {
            selector,
            arms,
            default,
        } => Stmt::Case {
            selector: rename_expr(selector, prefix),
            arms: arms
                .iter()
                .map(|a| CaseArm {
                    choice: a.choice.clone(),
                    body: rename_body(&a.body, prefix),
                })
                .collect(),
            default: rename_body(default, prefix),
        },
        Stmt::Sequential { label, body } => Stmt::Sequential {
            label: mangle(prefix, label),
            body: rename_body(body, prefix),
        },
        Stmt::Combinatorial { label, body } => Stmt::Combinatorial {
            label: label.as_ref().map(|l| mangle(prefix, l)),
            body: rename_body(body, prefix),
        },
        Stmt::Fsm(f) => Stmt::Fsm(Fsm {
            label: mangle(prefix, &f.label),
            defaults: f.defaults.iter().map(|a| rename_assign(a, prefix)).collect(),
            states: f
                .states
                .iter()
                .map(|st| StateDecl {
                    name: st.name.clone(),
                    body: rename_body(&st.body, prefix),
                })
                .collect(),
        }),
    }
}
