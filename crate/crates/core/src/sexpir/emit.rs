// SPDX-License-Identifier: Apache-2.0
//! Emission of an elaborated circuit as a flat Sexpir file.
//!
//! The hierarchy is inlined (see [`crate::elaborate::flatten`]) and FSMs
//! appear in lowered form: the state register is a `signal` of
//! `state_bits` width and states are their declaration indices.

use super::parse::SexpNode;
use super::print::print;
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::elaborate::ElaboratedCircuit;
use crate::ir::{Choice, CircuitDef, Direction, Expr, Stmt, TypeDesc, UnOp};

type Result<T> = std::result::Result<T, Diagnostic>;

fn unsupported(what: String) -> Diagnostic {
    Diagnostic::error(Rule::Unsupported, what)
}

fn field(name: &str, value: SexpNode) -> SexpNode {
    SexpNode::list([SexpNode::ident(name), value])
}

fn type_field(ty: &TypeDesc, is_port: bool) -> Result<SexpNode> {
    Ok(match ty {
        TypeDesc::Bit => field("type", SexpNode::ident("bit")),
        TypeDesc::Unsigned(w) => field("type", SexpNode::ident(format!("uint{w}"))),
        TypeDesc::BitVector(w) if is_port => field("type", SexpNode::ident(format!("bv{w}"))),
        TypeDesc::Signed(w) if is_port => field("type", SexpNode::ident(format!("int{w}"))),
        TypeDesc::BitVector(w) => field("bits_sign", SexpNode::int(*w)),
        TypeDesc::Signed(w) => field(
            "bits_sign",
            SexpNode::list([SexpNode::int(*w), SexpNode::ident("signed")]),
        ),
        TypeDesc::Enum { .. } if !is_port => {
            field("bits_sign", SexpNode::int(ty.width().expect("enum width") as u32))
        }
        other => return Err(unsupported(format!("type {other} has no Sexpir form"))),
    })
}

struct Emitter<'a> {
    def: &'a CircuitDef,
}

impl Emitter<'_> {
    fn states_of(&self, e: &Expr) -> Option<&[String]> {
        let Expr::Ref(n) = e else { return None };
        match &self.def.wire(n)?.ty {
            TypeDesc::Enum { states, .. } => Some(states),
            _ => None,
        }
    }

    fn state_index(&self, reg: &Expr, state: &str) -> Result<SexpNode> {
        self.states_of(reg)
            .and_then(|s| s.iter().position(|x| x == state))
            .map(|i| SexpNode::int(i as i128))
            .ok_or_else(|| unsupported(format!("state `{state}` outside a state-register context")))
    }

    /// `context` is the state register an enum constant belongs to.
    fn expr(&self, e: &Expr, context: Option<&Expr>) -> Result<SexpNode> {
        Ok(match e {
            Expr::Lit(v) => SexpNode::int(*v),
            Expr::Ref(n) => SexpNode::ident(n.clone()),
            Expr::PortRef(i, p) => return Err(unsupported(format!("port reference {i}.{p} in a flat circuit"))),
            Expr::State(s) => match context {
                Some(reg) => self.state_index(reg, s)?,
                None => return Err(unsupported(format!("state `{s}` without context"))),
            },
            Expr::Unary(op, x) => {
                let sym = match op {
                    UnOp::Not => "~",
                    UnOp::Neg => "-",
                };
                if let (UnOp::Neg, Expr::Lit(v)) = (op, &**x) {
                    return Ok(SexpNode::int(-i128::from(*v)));
                }
                SexpNode::list([SexpNode::op(sym), self.expr(x, None)?])
            }
            Expr::Binary(op, l, r) => {
                let lc = self.states_of(r).map(|_| &**r);
                let rc = self.states_of(l).map(|_| &**l);
                SexpNode::list([SexpNode::op(op.symbol()), self.expr(l, lc)?, self.expr(r, rc)?])
            }
            Expr::Index(b, i) => SexpNode::list([SexpNode::ident("index"), self.expr(b, None)?, self.expr(i, None)?]),
            Expr::Field(..) | Expr::Aggregate(_) => {
                return Err(unsupported(format!("record expression `{e}` has no Sexpir form")))
            }
        })
    }

    fn lvalue(&self, e: &Expr) -> Result<SexpNode> {
        match e {
            Expr::Ref(n) => Ok(SexpNode::ident(n.clone())),
            Expr::Index(b, i) if matches!(**b, Expr::Ref(_)) && matches!(**i, Expr::Lit(_)) => self.expr(e, None),
            other => Err(unsupported(format!("assignment target `{other}` has no Sexpir form"))),
        }
    }

    fn body(&self, head: SexpNode, stmts: &[Stmt]) -> Result<SexpNode> {
        let mut items = vec![head];
        for s in stmts {
            items.push(self.stmt(s)?);
        }
        Ok(SexpNode::List(items))
    }

    fn stmt(&self, s: &Stmt) -> Result<SexpNode> {
        match s {
            Stmt::Assign(a) => {
                let ctx = self.states_of(&a.lhs).map(|_| &a.lhs);
                Ok(SexpNode::list([
                    SexpNode::ident("assign"),
                    self.lvalue(&a.lhs)?,
                    self.expr(&a.rhs, ctx)?,
                ]))
            }
            Stmt::Sequential { label, body } => {
                let mut n = self.body(SexpNode::ident("sequential"), body)?;
                insert_label(&mut n, SexpNode::ident(label.clone()));
                Ok(n)
            }
            Stmt::Combinatorial { label, body } => {
                let mut n = self.body(SexpNode::ident("combinatorial"), body)?;
                insert_label(&mut n, SexpNode::ident(label.clone().unwrap_or_else(|| "nil".into())));
                Ok(n)
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let mut items = vec![
                    SexpNode::ident("if"),
                    self.expr(cond, None)?,
                    self.body(SexpNode::ident("then"), then_body)?,
                ];
                if !else_body.is_empty() {
                    items.push(self.body(SexpNode::ident("else"), else_body)?);
                }
                Ok(SexpNode::List(items))
            }
            Stmt::Case {
                selector,
                arms,
                default,
            } => {
                let mut items = vec![SexpNode::ident("case"), self.expr(selector, None)?];
                for arm in arms {
                    let choice = match &arm.choice {
                        Choice::Value(v) => SexpNode::int(*v),
                        Choice::State(s) => self.state_index(selector, s)?,
                    };
                    let mut n = self.body(SexpNode::ident("when"), &arm.body)?;
                    insert_label(&mut n, choice);
                    items.push(n);
                }
                if !default.is_empty() {
                    items.push(self.body(SexpNode::ident("default"), default)?);
                }
                Ok(SexpNode::List(items))
            }
            Stmt::CombAssign(_) | Stmt::NextState(_) | Stmt::Fsm(_) => {
                Err(unsupported("FSM forms only exist before lowering".into()))
            }
        }
    }
}

fn insert_label(list: &mut SexpNode, label: SexpNode) {
    if let SexpNode::List(items) = list {
        items.insert(1, label);
    }
}

/// Builds the Sexpir tree of an elaborated circuit.
pub fn to_sexp(elab: &ElaboratedCircuit) -> std::result::Result<SexpNode, Diagnostics> {
    let flat = elab.flatten()?;
    let e = Emitter { def: &flat };
    let wrap = |d: Diagnostic| Diagnostics::from(d.in_circuit(flat.name.clone()));
    let mut items = vec![SexpNode::ident("circuit"), SexpNode::ident(flat.name.clone())];
    for p in &flat.ports {
        let kw = match p.direction {
            Direction::Input => "input",
            Direction::Output => "output",
        };
        items.push(SexpNode::list([
            SexpNode::ident(kw),
            field("name", SexpNode::ident(p.name.clone())),
            type_field(&p.ty, true).map_err(wrap)?,
        ]));
    }
    for w in &flat.wires {
        items.push(SexpNode::list([
            SexpNode::ident("signal"),
            field("name", SexpNode::ident(w.name.clone())),
            type_field(&w.ty, false).map_err(wrap)?,
        ]));
    }
    for s in &flat.statements {
        items.push(e.stmt(s).map_err(wrap)?);
    }
    Ok(SexpNode::List(items))
}

/// Canonical Sexpir text of an elaborated circuit.
pub fn emit_sexpir(elab: &ElaboratedCircuit) -> std::result::Result<String, Diagnostics> {
    to_sexp(elab).map(|n| print(&n))
}
