// SPDX-License-Identifier: Apache-2.0
//! Elaboration-time evaluation over constant continuous assignments.

use crate::diag::{Diagnostic, Rule};
use crate::ir::{BinOp, CircuitDef, Expr, Stmt, UnOp};
use crate::typesys::fold_constants;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstValue {
    Int(i128),
    Aggregate(Vec<(String, ConstValue)>),
}

impl ConstValue {
    pub fn as_int(&self) -> Option<i128> {
        match self {
            ConstValue::Int(v) => Some(*v),
            ConstValue::Aggregate(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Seg {
    Index(u64),
    Field(String),
}

#[derive(Debug, Clone)]
struct Binding {
    root: String,
    path: Vec<Seg>,
    value: Expr,
}

/// Constant assignments visible to [`const_eval`], keyed by target path.
#[derive(Debug, Clone, Default)]
pub struct ConstEnv {
    bindings: Vec<Binding>,
}

const MAX_DEPTH: usize = 64;

fn split_path(e: &Expr) -> Option<(String, Vec<Seg>)> {
    match e {
        Expr::Ref(_) | Expr::PortRef(..) => Some((e.ref_key()?, Vec::new())),
        Expr::Index(b, i) => {
            let (root, mut p) = split_path(b)?;
            match fold_constants(i) {
                Expr::Lit(v) => p.push(Seg::Index(v)),
                _ => return None,
            }
            Some((root, p))
        }
        Expr::Field(b, f) => {
            let (root, mut p) = split_path(b)?;
            p.push(Seg::Field(f.clone()));
            Some((root, p))
        }
        _ => None,
    }
}

impl ConstEnv {
    pub fn new() -> Self {
        ConstEnv::default()
    }

    /// Records every top-level assignment whose target path is constant.
    pub fn from_circuit(def: &CircuitDef) -> Self {
        let mut env = ConstEnv::new();
        for s in &def.statements {
            if let Stmt::Assign(a) = s {
                env.bind(&a.lhs, a.rhs.clone());
            }
        }
        env
    }

    /// Adds `target <= value`; returns false for a non-constant target path.
    pub fn bind(&mut self, target: &Expr, value: Expr) -> bool {
        match split_path(target) {
            Some((root, path)) => {
                self.bindings.push(Binding { root, path, value });
                true
            }
            None => false,
        }
    }

    fn lookup(&self, root: &str, path: &[Seg]) -> Option<(&Binding, usize)> {
        self.bindings
            .iter()
            .rev()
            .find(|b| b.root == root && b.path.len() <= path.len() && path.starts_with(&b.path))
            .map(|b| (b, b.path.len()))
    }
}

fn not_constant(msg: String) -> Diagnostic {
    Diagnostic::error(Rule::NotConstant, msg)
}

/// Evaluates `expr`, following index and field chains through the
/// recorded constant assignments.
pub fn const_eval(expr: &Expr, env: &ConstEnv) -> Result<ConstValue, Diagnostic> {
    eval(expr, env, 0)
}

fn eval(expr: &Expr, env: &ConstEnv, depth: usize) -> Result<ConstValue, Diagnostic> {
    if depth > MAX_DEPTH {
        return Err(not_constant(format!("`{expr}` does not reduce to a constant")));
    }
    let int = |e: &Expr| -> Result<i128, Diagnostic> {
        eval(e, env, depth + 1)?
            .as_int()
            .ok_or_else(|| not_constant(format!("`{e}` is an aggregate, not an integer")))
    };
    match expr {
        Expr::Lit(v) => Ok(ConstValue::Int(i128::from(*v))),
        Expr::Unary(UnOp::Neg, x) => Ok(ConstValue::Int(-int(x)?)),
        Expr::Unary(UnOp::Not, _) => Err(not_constant(format!(
            "`{expr}` depends on a width and is not evaluated at elaboration time"
        ))),
        Expr::Binary(op, l, r) => {
            let (a, b) = (int(l)?, int(r)?);
            Ok(ConstValue::Int(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::And => a & b,
                BinOp::Or => a | b,
                BinOp::Xor => a ^ b,
                BinOp::Eq => (a == b) as i128,
                BinOp::Neq => (a != b) as i128,
                BinOp::Lt => (a < b) as i128,
                BinOp::Gt => (a > b) as i128,
                BinOp::Le => (a <= b) as i128,
                BinOp::Ge => (a >= b) as i128,
            }))
        }
        Expr::Aggregate(fields) => Ok(ConstValue::Aggregate(
            fields
                .iter()
                .map(|(n, e)| Ok((n.clone(), eval(e, env, depth + 1)?)))
                .collect::<Result<_, Diagnostic>>()?,
        )),
        Expr::State(s) => Err(not_constant(format!("state `{s}` has no integer value here"))),
        Expr::Ref(_) | Expr::PortRef(..) | Expr::Index(..) | Expr::Field(..) => {
            let (root, path) = split_path(expr)
                .ok_or_else(|| not_constant(format!("`{expr}` has a non-constant index")))?;
            let (binding, used) = env
                .lookup(&root, &path)
                .ok_or_else(|| not_constant(format!("`{expr}` has no constant assignment")))?;
            let mut value = eval(&binding.value, env, depth + 1)?;
            for seg in &path[used..] {
                value = match (seg, value) {
                    (Seg::Field(f), ConstValue::Aggregate(fields)) => fields
                        .into_iter()
                        .find(|(n, _)| n == f)
                        .map(|(_, v)| v)
                        .ok_or_else(|| not_constant(format!("no field `{f}` in the value of `{expr}`")))?,
                    (Seg::Index(i), ConstValue::Int(v)) if *i < 127 => ConstValue::Int((v >> i) & 1),
                    _ => return Err(not_constant(format!("cannot select into the value of `{expr}`"))),
                };
            }
            Ok(value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn follows_chains() {
        let mut env = ConstEnv::new();
        let mem = Expr::sig("mem");
        for i in 0..4u64 {
            env.bind(&mem.index(i), Expr::aggregate([("re", i), ("im", 2 * i)]));
        }
        env.bind(&Expr::sig("k"), Expr::sig("mem").index(3).field("re") + 1);
        assert_eq!(const_eval(&mem.index(3).field("im"), &env), Ok(ConstValue::Int(6)));
        assert_eq!(const_eval(&Expr::sig("k"), &env), Ok(ConstValue::Int(4)));
        let d = const_eval(&mem.index(Expr::sig("x")).field("im"), &env).unwrap_err();
        assert_eq!(d.rule, Rule::NotConstant);
        let d = const_eval(&mem.index(9), &env).unwrap_err();
        assert_eq!(d.rule, Rule::NotConstant);
    }

    #[test]
    fn self_reference_terminates() {
        let mut env = ConstEnv::new();
        env.bind(&Expr::sig("a"), Expr::sig("a") + 1);
        assert_eq!(const_eval(&Expr::sig("a"), &env).unwrap_err().rule, Rule::NotConstant);
    }
}
