// SPDX-License-Identifier: Apache-2.0
//! Translation of a validated tree into a [`CircuitDef`].

use super::parse::{Atom, SexpNode};
use super::validate::{validate, width_spec, BINARY_OPS};
use crate::diag::{Diagnostic, Diagnostics};
use crate::ir::{BinOp, Choice, CircuitBuilder, CircuitDef, Direction, Expr, TypeDesc};

type Result<T> = std::result::Result<T, Diagnostic>;

fn decl_parts(items: &[SexpNode]) -> (String, TypeDesc) {
    let mut name = String::new();
    let mut ty = TypeDesc::Bit;
    for f in &items[1..] {
        let f = f.as_list().expect("validated field");
        match f[0].as_ident() {
            Some("name") => name = f[1].as_ident().expect("validated name").to_string(),
            Some("type") => ty = TypeDesc::named(f[1].as_ident().expect("validated type")),
            _ => {
                let (w, signed) = width_spec(&f[1]).expect("validated width");
                ty = if signed { TypeDesc::Signed(w) } else { TypeDesc::BitVector(w) };
            }
        }
    }
    (name, ty)
}

fn expr(node: &SexpNode) -> Expr {
    match node {
        SexpNode::Atom(Atom::Int(v)) => {
            let mag = u64::try_from(v.unsigned_abs()).unwrap_or(u64::MAX);
            if *v < 0 {
                -Expr::lit(mag)
            } else {
                Expr::lit(mag)
            }
        }
        SexpNode::Atom(Atom::Ident(n)) => Expr::sig(n.clone()),
        SexpNode::Atom(Atom::Op(_)) => unreachable!("validated expression"),
        SexpNode::List(items) => {
            let head = node.head().expect("validated operator");
            match (head, items.len()) {
                ("~", 2) => !expr(&items[1]),
                ("-", 2) => -expr(&items[1]),
                ("index", 3) => expr(&items[1]).index(expr(&items[2])),
                (op, 3) if BINARY_OPS.contains(&op) => Expr::binary(
                    BinOp::from_symbol(op).expect("known operator"),
                    expr(&items[1]),
                    expr(&items[2]),
                ),
                _ => unreachable!("validated expression"),
            }
        }
    }
}

struct Lowerer {
    b: CircuitBuilder,
    anonymous_sequential: usize,
}

impl Lowerer {
    fn stmts(&mut self, items: &[SexpNode]) -> Result<()> {
        items.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, node: &SexpNode) -> Result<()> {
        let items = node.as_list().expect("validated statement");
        match node.head().expect("validated statement") {
            "assign" => self.b.assign(expr(&items[1]), expr(&items[2])),
            "combinatorial" => {
                let label = items[1].as_ident().filter(|l| *l != "nil");
                self.b.open_combinatorial(label)?;
                self.stmts(&items[2..])?;
                self.b.close()
            }
            "sequential" => {
                let label = match items[1].as_ident() {
                    Some("nil") | None => {
                        self.anonymous_sequential += 1;
                        format!("sync_{}", self.anonymous_sequential - 1)
                    }
                    Some(l) => l.to_string(),
                };
                self.b.open_sequential(&label)?;
                self.stmts(&items[2..])?;
                self.b.close()
            }
            "case" => {
                self.b.open_case(expr(&items[1]))?;
                for arm in &items[2..] {
                    let a = arm.as_list().expect("validated arm");
                    if arm.head() == Some("when") {
                        let v = a[1].as_int().expect("validated choice");
                        self.b.open_when(Choice::Value(v as u64))?;
                        self.stmts(&a[2..])?;
                    } else {
                        self.b.open_default()?;
                        self.stmts(&a[1..])?;
                    }
                    self.b.close()?;
                }
                self.b.close()
            }
            "if" => {
                self.b.open_if(expr(&items[1]))?;
                self.stmts(&items[2].as_list().expect("validated then")[1..])?;
                self.b.close()?;
                if let Some(e) = items.get(3) {
                    self.b.open_else()?;
                    self.stmts(&e.as_list().expect("validated else")[1..])?;
                    self.b.close()?;
                }
                Ok(())
            }
            other => unreachable!("validated statement head {other}"),
        }
    }
}

/// Validates `root` and builds the circuit it describes. Declarations are
/// processed before statements, so order between them does not matter.
pub fn lower_to_ir(root: &SexpNode) -> std::result::Result<CircuitDef, Diagnostics> {
    let diags = validate(root);
    if diags.has_errors() {
        return Err(diags);
    }
    let items = root.as_list().expect("validated circuit");
    let name = items[1].as_ident().expect("validated name");
    let mut l = Lowerer {
        b: CircuitBuilder::new(name),
        anonymous_sequential: 0,
    };
    let run = |l: &mut Lowerer| -> Result<()> {
        for item in &items[2..] {
            let Some(kind @ ("input" | "output" | "signal")) = item.head() else {
                continue;
            };
            let (n, ty) = decl_parts(item.as_list().expect("validated decl"));
            match kind {
                "input" => l.b.declare_port(&n, Direction::Input, Some(ty)).map(drop)?,
                "output" => l.b.declare_port(&n, Direction::Output, Some(ty)).map(drop)?,
                _ => l.b.wire(&n, ty).map(drop)?,
            }
        }
        for item in &items[2..] {
            if !matches!(item.head(), Some("input" | "output" | "signal")) {
                l.stmt(item)?;
            }
        }
        Ok(())
    };
    run(&mut l).map_err(Diagnostics::from)?;
    l.b.finish().map_err(Diagnostics::from)
}
