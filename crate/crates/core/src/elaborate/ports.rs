// SPDX-License-Identifier: Apache-2.0
//! Recovering inputs and outputs of circuits whose signals are all plain.
//!
//! Classification of a wire `s`:
//! - no statement drives `s`: input (a warning is added if nothing reads it
//!   either);
//! - `s` is read by a statement other than the one driving it: internal;
//! - otherwise: output.
//!
//! A "statement" here is a top-level driving context: one continuous
//! assignment or one block. An override file with `input <name>` /
//! `output <name>` lines takes precedence over the rules.

use std::collections::{BTreeSet, HashSet};

use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::ir::{CircuitDef, Direction, Expr, PortDecl, Stmt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortClass {
    Input,
    Output,
    Internal,
}

/// Total, disjoint classification of a circuit's signals, in declaration
/// order within each class.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PortPartition {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub internals: Vec<String>,
}

impl PortPartition {
    pub fn class_of(&self, name: &str) -> Option<PortClass> {
        if self.inputs.iter().any(|n| n == name) {
            Some(PortClass::Input)
        } else if self.outputs.iter().any(|n| n == name) {
            Some(PortClass::Output)
        } else if self.internals.iter().any(|n| n == name) {
            Some(PortClass::Internal)
        } else {
            None
        }
    }
}

/// Explicit port directions read from a sidecar file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PortOverrides {
    entries: Vec<(String, Direction)>,
}

impl PortOverrides {
    /// Parses `input <name>` / `output <name>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<PortOverrides, Diagnostic> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let dir = match words.next() {
                Some("input") => Direction::Input,
                Some("output") => Direction::Output,
                _ => {
                    return Err(Diagnostic::error(
                        Rule::StrayToken,
                        format!("line {}: expected `input <name>` or `output <name>`", n + 1),
                    ))
                }
            };
            match (words.next(), words.next()) {
                (Some(name), None) => entries.push((name.to_string(), dir)),
                _ => {
                    return Err(Diagnostic::error(
                        Rule::Arity,
                        format!("line {}: expected exactly one name", n + 1),
                    ))
                }
            }
        }
        Ok(PortOverrides { entries })
    }

    pub fn direction(&self, name: &str) -> Option<Direction> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }
}

/// True for circuits that declare no output at all, such as flat files
/// exported from another tool.
pub fn needs_port_inference(def: &CircuitDef) -> bool {
    !def.ports.iter().any(|p| p.direction == Direction::Output)
}

#[derive(Default)]
struct Context {
    driven: HashSet<String>,
    read: HashSet<String>,
}

fn reads_of(e: &Expr, out: &mut HashSet<String>) {
    e.for_each_ref(&mut |r| {
        if let Some(k) = r.ref_key() {
            out.insert(k);
        }
    });
}

fn target(lhs: &Expr, ctx: &mut Context) {
    if let Some(k) = lhs.root().and_then(Expr::ref_key) {
        ctx.driven.insert(k.clone());
        let mut idx = HashSet::new();
        reads_of(lhs, &mut idx);
        idx.remove(&k);
        ctx.read.extend(idx);
    }
}

fn scan(s: &Stmt, ctx: &mut Context) {
    s.walk(&mut |s| match s {
        Stmt::Assign(a) | Stmt::CombAssign(a) => {
            target(&a.lhs, ctx);
            reads_of(&a.rhs, &mut ctx.read);
        }
        Stmt::If { cond, .. } => reads_of(cond, &mut ctx.read),
        Stmt::Case { selector, .. } => reads_of(selector, &mut ctx.read),
        Stmt::Fsm(f) => {
            for a in &f.defaults {
                target(&a.lhs, ctx);
                reads_of(&a.rhs, &mut ctx.read);
            }
        }
        _ => {}
    });
}

/// Classifies every wire of `def` and returns the circuit with inputs and
/// outputs promoted to ports. Declared ports keep their direction.
pub fn infer_ports(
    def: &CircuitDef,
    overrides: Option<&PortOverrides>,
) -> (CircuitDef, PortPartition, Diagnostics) {
    let mut diags = Diagnostics::new();
    let contexts: Vec<Context> = def
        .statements
        .iter()
        .map(|s| {
            let mut c = Context::default();
            scan(s, &mut c);
            c
        })
        .collect();

    if let Some(o) = overrides {
        let known: BTreeSet<&str> = def
            .wires
            .iter()
            .map(|w| w.name.as_str())
            .chain(def.ports.iter().map(|p| p.name.as_str()))
            .collect();
        for n in o.names() {
            if !known.contains(n) {
                diags.push(
                    Diagnostic::error(Rule::UnknownName, format!("override names unknown signal `{n}`"))
                        .in_circuit(&def.name),
                );
            }
        }
    }

    let mut part = PortPartition::default();
    let mut out = def.clone();
    out.wires.clear();
    let mut new_ports = Vec::new();

    for p in &def.ports {
        match p.direction {
            Direction::Input => part.inputs.push(p.name.clone()),
            Direction::Output => part.outputs.push(p.name.clone()),
        }
    }
    for w in &def.wires {
        let n = &w.name;
        let drivers: Vec<usize> = (0..contexts.len()).filter(|&i| contexts[i].driven.contains(n)).collect();
        let read_anywhere = contexts.iter().any(|c| c.read.contains(n));
        let read_elsewhere = contexts
            .iter()
            .enumerate()
            .any(|(i, c)| !drivers.contains(&i) && c.read.contains(n));
        let class = match overrides.and_then(|o| o.direction(n)) {
            Some(Direction::Input) => PortClass::Input,
            Some(Direction::Output) => PortClass::Output,
            None if drivers.is_empty() => {
                if !read_anywhere {
                    diags.push(
                        Diagnostic::warning(
                            Rule::DanglingSignal,
                            format!("`{n}` is neither driven nor read; treated as an input"),
                        )
                        .in_circuit(&def.name),
                    );
                }
                PortClass::Input
            }
            None if read_elsewhere => PortClass::Internal,
            None => PortClass::Output,
        };
        match class {
            PortClass::Input | PortClass::Output => {
                let direction = if class == PortClass::Input {
                    part.inputs.push(n.clone());
                    Direction::Input
                } else {
                    part.outputs.push(n.clone());
                    Direction::Output
                };
                new_ports.push(PortDecl {
                    name: n.clone(),
                    direction,
                    ty: w.ty.clone(),
                });
            }
            PortClass::Internal => {
                part.internals.push(n.clone());
                out.wires.push(w.clone());
            }
        }
    }
    out.ports.extend(new_ports);
    (out, part, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::CircuitBuilder;

    #[test]
    fn driven_never_read_is_output() {
        let mut b = CircuitBuilder::new("flat");
        let x = b.wire("x", "bit").unwrap();
        let y = b.wire("y", "bit").unwrap();
        let z = b.wire("z", "bit").unwrap();
        b.wire("lonely", "bit").unwrap();
        b.assign(&y, !&x).unwrap();
        b.assign(&z, &y).unwrap();
        let (c, part, diags) = infer_ports(&b.finish().unwrap(), None);
        assert_eq!(part.inputs, vec!["x", "lonely"]);
        assert_eq!(part.outputs, vec!["z"]);
        assert_eq!(part.internals, vec!["y"]);
        assert_eq!(diags.warnings().count(), 1);
        assert_eq!(c.ports.len(), 3);
        assert_eq!(c.wires.len(), 1);
    }

    #[test]
    fn own_reads_do_not_count() {
        let mut b = CircuitBuilder::new("cnt");
        let t = b.wire("t", "bit").unwrap();
        let c = b.wire("c", "byte").unwrap();
        b.sequential("s", |b| b.if_(t.equals(1), |b| b.assign(&c, &c + 1)))
            .unwrap();
        let (_, part, _) = infer_ports(&b.finish().unwrap(), None);
        assert_eq!(part.class_of("c"), Some(PortClass::Output));
        assert_eq!(part.class_of("t"), Some(PortClass::Input));
    }

    #[test]
    fn overrides_take_precedence() {
        let mut b = CircuitBuilder::new("o");
        let x = b.wire("x", "bit").unwrap();
        let y = b.wire("y", "bit").unwrap();
        let z = b.wire("z", "bit").unwrap();
        b.assign(&y, &x).unwrap();
        b.assign(&z, &y).unwrap();
        let o = PortOverrides::parse("# sidecar\noutput y\n").unwrap();
        let (_, part, diags) = infer_ports(&b.finish().unwrap(), Some(&o));
        assert_eq!(part.class_of("y"), Some(PortClass::Output));
        assert!(diags.is_empty());
        assert!(PortOverrides::parse("inout q").is_err());
        assert!(PortOverrides::parse("input a b").is_err());
    }
}
