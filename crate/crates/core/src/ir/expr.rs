// SPDX-License-Identifier: Apache-2.0
//! Expression trees and the operator sugar used to build them.

use std::fmt;
use std::ops;

use super::types::{literal_width, TypeDesc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Eq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl BinOp {
    pub const ALL: [BinOp; 11] = [
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Eq,
        BinOp::Neq,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
    ];

    /// Symbolic spelling, shared by Sexpir and the pretty printer.
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub)
    }

    pub fn is_bitwise(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor)
    }
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "~",
            UnOp::Neg => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Nonnegative literal of type `RUInt(literal_width(value))`.
    Lit(u64),
    Ref(String),
    /// Port of a child instance: `(instance, port)`.
    PortRef(String, String),
    /// Enumerated state constant; typed by the state register it meets.
    State(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, String),
    Aggregate(Vec<(String, Expr)>),
}

impl Expr {
    pub fn lit(value: u64) -> Expr {
        Expr::Lit(value)
    }

    pub fn sig(name: impl Into<String>) -> Expr {
        Expr::Ref(name.into())
    }

    pub fn port(instance: impl Into<String>, port: impl Into<String>) -> Expr {
        Expr::PortRef(instance.into(), port.into())
    }

    pub fn aggregate<N: Into<String>, E: Into<Expr>>(
        fields: impl IntoIterator<Item = (N, E)>,
    ) -> Expr {
        Expr::Aggregate(fields.into_iter().map(|(n, e)| (n.into(), e.into())).collect())
    }

    /// Type of a literal node, `None` for every other node.
    pub fn literal_type(&self) -> Option<TypeDesc> {
        match self {
            Expr::Lit(v) => Some(TypeDesc::RUInt(literal_width(*v))),
            _ => None,
        }
    }

    pub fn binary(op: BinOp, lhs: impl Into<Expr>, rhs: impl Into<Expr>) -> Expr {
        Expr::Binary(op, Box::new(lhs.into()), Box::new(rhs.into()))
    }

    pub fn equals(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Eq, self.clone(), rhs)
    }

    pub fn not_equals(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Neq, self.clone(), rhs)
    }

    pub fn lt(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Lt, self.clone(), rhs)
    }

    pub fn gt(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Gt, self.clone(), rhs)
    }

    pub fn le(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Le, self.clone(), rhs)
    }

    pub fn ge(&self, rhs: impl Into<Expr>) -> Expr {
        Expr::binary(BinOp::Ge, self.clone(), rhs)
    }

    pub fn index(&self, i: impl Into<Expr>) -> Expr {
        Expr::Index(Box::new(self.clone()), Box::new(i.into()))
    }

    pub fn field(&self, name: impl Into<String>) -> Expr {
        Expr::Field(Box::new(self.clone()), name.into())
    }

    /// True when the tree contains no signal references.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Lit(_) | Expr::State(_) => true,
            Expr::Ref(_) | Expr::PortRef(..) => false,
            Expr::Unary(_, e) | Expr::Field(e, _) => e.is_constant(),
            Expr::Binary(_, l, r) | Expr::Index(l, r) => l.is_constant() && r.is_constant(),
            Expr::Aggregate(fields) => fields.iter().all(|(_, e)| e.is_constant()),
        }
    }

    /// The signal at the root of an lvalue-shaped chain.
    pub fn root(&self) -> Option<&Expr> {
        match self {
            Expr::Ref(_) | Expr::PortRef(..) => Some(self),
            Expr::Index(base, _) | Expr::Field(base, _) => base.root(),
            _ => None,
        }
    }

    /// Visits every `Ref`/`PortRef` in the tree, pre-order.
    pub fn for_each_ref(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Expr::Ref(_) | Expr::PortRef(..) => f(self),
            Expr::Lit(_) | Expr::State(_) => {}
            Expr::Unary(_, e) | Expr::Field(e, _) => e.for_each_ref(f),
            Expr::Binary(_, l, r) | Expr::Index(l, r) => {
                l.for_each_ref(f);
                r.for_each_ref(f);
            }
            Expr::Aggregate(fields) => fields.iter().for_each(|(_, e)| e.for_each_ref(f)),
        }
    }

    /// Renames every reference through `f`; used for flattening.
    pub fn map_refs(&self, f: &impl Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Ref(_) | Expr::PortRef(..) => f(self),
            Expr::Lit(_) | Expr::State(_) => self.clone(),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.map_refs(f))),
            Expr::Field(e, n) => Expr::Field(Box::new(e.map_refs(f)), n.clone()),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Box::new(l.map_refs(f)), Box::new(r.map_refs(f)))
            }
            Expr::Index(l, r) => Expr::Index(Box::new(l.map_refs(f)), Box::new(r.map_refs(f))),
            Expr::Aggregate(fields) => Expr::Aggregate(
                fields.iter().map(|(n, e)| (n.clone(), e.map_refs(f))).collect(),
            ),
        }
    }

    /// Key naming the referenced signal: `name` or `inst.port`.
    pub fn ref_key(&self) -> Option<String> {
        match self {
            Expr::Ref(n) => Some(n.clone()),
            Expr::PortRef(i, p) => Some(format!("{i}.{p}")),
            _ => None,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Ref(n) | Expr::State(n) => f.write_str(n),
            Expr::PortRef(i, p) => write!(f, "{i}.{p}"),
            Expr::Unary(op, e) => write!(f, "{}{e}", op.symbol()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Index(b, i) => write!(f, "{b}[{i}]"),
            Expr::Field(b, n) => write!(f, "{b}.{n}"),
            Expr::Aggregate(fields) => {
                f.write_str("{")?;
                for (i, (n, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {e}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl From<u64> for Expr {
    fn from(v: u64) -> Self {
        Expr::Lit(v)
    }
}

impl From<u32> for Expr {
    fn from(v: u32) -> Self {
        Expr::Lit(v.into())
    }
}

impl From<usize> for Expr {
    fn from(v: usize) -> Self {
        Expr::Lit(v as u64)
    }
}

/// Negative values become `Unary(Neg, Lit(|v|))`.
impl From<i32> for Expr {
    fn from(v: i32) -> Self {
        if v < 0 {
            Expr::Unary(UnOp::Neg, Box::new(Expr::Lit(u64::from(v.unsigned_abs()))))
        } else {
            Expr::Lit(v as u64)
        }
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! binop_sugar {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<T: Into<Expr>> ops::$trait<T> for Expr {
            type Output = Expr;
            fn $method(self, rhs: T) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }

        impl<T: Into<Expr>> ops::$trait<T> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: T) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
    };
}

binop_sugar!(BitAnd, bitand, BinOp::And);
binop_sugar!(BitOr, bitor, BinOp::Or);
binop_sugar!(BitXor, bitxor, BinOp::Xor);
binop_sugar!(Add, add, BinOp::Add);
binop_sugar!(Sub, sub, BinOp::Sub);

impl ops::Not for Expr {
    type Output = Expr;
    fn not(self) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(self))
    }
}

impl ops::Not for &Expr {
    type Output = Expr;
    fn not(self) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(self.clone()))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(self))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(self.clone()))
    }
}
