// SPDX-License-Identifier: Apache-2.0
//! Indented, human-readable rendering of a circuit as written.

use std::fmt::Write as _;

use crate::ir::{Assign, Choice, CircuitDef, Stmt};

fn line(out: &mut String, depth: usize, text: impl std::fmt::Display) {
    let _ = writeln!(out, "{:width$}{text}", "", width = depth * 2);
}

fn choice(c: &Choice) -> String {
    match c {
        Choice::Value(v) => v.to_string(),
        Choice::State(s) => s.clone(),
    }
}

fn assign(out: &mut String, depth: usize, a: &Assign, op: &str) {
    line(out, depth, format_args!("{} {op} {}", a.lhs, a.rhs));
}

fn stmts(out: &mut String, depth: usize, body: &[Stmt]) {
    for s in body {
        stmt(out, depth, s);
    }
}

fn stmt(out: &mut String, depth: usize, s: &Stmt) {
    match s {
        Stmt::Assign(a) => assign(out, depth, a, "<="),
        Stmt::CombAssign(a) => assign(out, depth, a, "<=c"),
        Stmt::NextState(n) => line(out, depth, format_args!("next_state {n}")),
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            line(out, depth, format_args!("if {cond}"));
            stmts(out, depth + 1, then_body);
            if !else_body.is_empty() {
                line(out, depth, "else");
                stmts(out, depth + 1, else_body);
            }
        }
        Stmt::Case {
            selector,
            arms,
            default,
        } => {
            line(out, depth, format_args!("case {selector}"));
            for arm in arms {
                line(out, depth + 1, format_args!("when {}", choice(&arm.choice)));
                stmts(out, depth + 2, &arm.body);
            }
            if !default.is_empty() {
                line(out, depth + 1, "default");
                stmts(out, depth + 2, default);
            }
        }
        Stmt::Sequential { label, body } => {
            line(out, depth, format_args!("sequential {label}"));
            stmts(out, depth + 1, body);
        }
        Stmt::Combinatorial { label, body } => {
            match label {
                Some(l) => line(out, depth, format_args!("combinatorial {l}")),
                None => line(out, depth, "combinatorial"),
            }
            stmts(out, depth + 1, body);
        }
        Stmt::Fsm(f) => {
            line(out, depth, format_args!("fsm {}", f.label));
            for d in &f.defaults {
                assign(out, depth + 1, d, "<=");
            }
            for st in &f.states {
                line(out, depth + 1, format_args!("state {}", st.name));
                stmts(out, depth + 2, &st.body);
            }
        }
    }
}

/// `circuit <name>` followed by declarations and statements, two spaces
/// per nesting level. Combinational FSM assignments print as `<=c`.
pub fn pretty(def: &CircuitDef) -> String {
    let mut out = String::new();
    line(&mut out, 0, format_args!("circuit {}", def.name));
    for t in &def.typedefs {
        line(&mut out, 1, format_args!("typedef {} = {}", t.name, t.desc));
    }
    for p in &def.ports {
        line(&mut out, 1, format_args!("{} {} : {}", p.direction.keyword(), p.name, p.ty));
    }
    for w in &def.wires {
        line(&mut out, 1, format_args!("wire {} : {}", w.name, w.ty));
    }
    for i in &def.instances {
        line(&mut out, 1, format_args!("component {} : {}", i.name, i.child.name));
    }
    stmts(&mut out, 1, &def.statements);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn half_adder() {
        assert_eq!(
            pretty(&builtins::half_adder()),
            "circuit half_adder\n  input a : bit\n  input b : bit\n  output sum : bit\n  output cout : bit\n  sum <= (a ^ b)\n  cout <= (a & b)\n"
        );
    }

    #[test]
    fn nesting() {
        let t = pretty(&builtins::counter());
        assert!(t.contains("  sequential counting\n    if (tick == 1)\n      if (count == 255)\n        count <= 0\n      else\n"), "{t}");
        let f = pretty(&builtins::fsm1());
        assert!(f.contains("  fsm simple\n    f <= 0\n    state s0\n      f <= 1\n"), "{f}");
    }

    #[test]
    fn empty_circuit() {
        assert_eq!(pretty(&CircuitDef::new("e")), "circuit e\n");
    }
}
