// SPDX-License-Identifier: Apache-2.0
//! Circuit intermediate representation.
//!
//! A [`CircuitDef`] is normally produced by a [`CircuitBuilder`], which
//! rejects malformed constructs as they are added. Every construct the IR
//! can express is synthesizable: there are only continuous assignments,
//! clocked (`Sequential`) blocks, combinational blocks and FSMs.

mod builder;
mod expr;
mod types;

use std::sync::Arc;

pub use builder::{CircuitBuilder, Instance};
pub use expr::{BinOp, Expr, UnOp};
pub use types::{builtin, literal_width, state_bits, TypeDesc};

use crate::diag::{Diagnostic, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub ty: TypeDesc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireDecl {
    pub name: String,
    pub ty: TypeDesc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedefDecl {
    pub name: String,
    pub desc: TypeDesc,
    /// Declared before any port, so it belongs in the circuit's package.
    pub in_package: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: String,
    pub child: Arc<CircuitDef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignKind {
    /// Top-level, always-active assignment.
    Continuous,
    /// Inside a sequential, combinational or FSM block.
    Embedded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assign {
    pub lhs: Expr,
    pub rhs: Expr,
    pub kind: AssignKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Choice {
    Value(u64),
    State(String),
}

impl From<u64> for Choice {
    fn from(v: u64) -> Self {
        Choice::Value(v)
    }
}

impl From<u32> for Choice {
    fn from(v: u32) -> Self {
        Choice::Value(v.into())
    }
}

impl From<i32> for Choice {
    fn from(v: i32) -> Self {
        Choice::Value(u64::try_from(v).expect("case choices are nonnegative"))
    }
}

impl From<&str> for Choice {
    fn from(s: &str) -> Self {
        Choice::State(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseArm {
    pub choice: Choice,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsm {
    pub label: String,
    /// Per-cycle synchronous defaults, evaluated before the state case.
    pub defaults: Vec<Assign>,
    /// The first state is the reset state.
    pub states: Vec<StateDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign(Assign),
    /// Combinational assignment inside an FSM state.
    CombAssign(Assign),
    NextState(String),
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    Case {
        selector: Expr,
        arms: Vec<CaseArm>,
        default: Vec<Stmt>,
    },
    Sequential {
        label: String,
        body: Vec<Stmt>,
    },
    Combinatorial {
        label: Option<String>,
        body: Vec<Stmt>,
    },
    Fsm(Fsm),
}

/// Statement kind tag, used for statistics and round-trip comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StmtKind {
    Assign,
    CombAssign,
    NextState,
    If,
    Case,
    Sequential,
    Combinatorial,
    Fsm,
}

impl Stmt {
    pub fn kind(&self) -> StmtKind {
        match self {
            Stmt::Assign(_) => StmtKind::Assign,
            Stmt::CombAssign(_) => StmtKind::CombAssign,
            Stmt::NextState(_) => StmtKind::NextState,
            Stmt::If { .. } => StmtKind::If,
            Stmt::Case { .. } => StmtKind::Case,
            Stmt::Sequential { .. } => StmtKind::Sequential,
            Stmt::Combinatorial { .. } => StmtKind::Combinatorial,
            Stmt::Fsm(_) => StmtKind::Fsm,
        }
    }

    /// Pre-order walk over this statement and every nested one.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for body in self.bodies() {
            for s in body {
                s.walk(f);
            }
        }
    }

    /// Nested statement lists, in source order. FSM defaults are not
    /// statements and are not included.
    pub fn bodies(&self) -> Vec<&[Stmt]> {
        match self {
            Stmt::Assign(_) | Stmt::CombAssign(_) | Stmt::NextState(_) => vec![],
            Stmt::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            Stmt::Case { arms, default, .. } => {
                let mut v: Vec<&[Stmt]> = arms.iter().map(|a| a.body.as_slice()).collect();
                v.push(default);
                v
            }
            Stmt::Sequential { body, .. } | Stmt::Combinatorial { body, .. } => vec![body],
            Stmt::Fsm(fsm) => fsm.states.iter().map(|s| s.body.as_slice()).collect(),
        }
    }
}

/// Counts statements by kind over a statement list, recursively.
pub fn count_kinds(stmts: &[Stmt]) -> std::collections::BTreeMap<StmtKind, usize> {
    let mut counts = std::collections::BTreeMap::new();
    for s in stmts {
        s.walk(&mut |s| *counts.entry(s.kind()).or_insert(0) += 1);
    }
    counts
}

/// A named circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDef {
    pub name: String,
    pub typedefs: Vec<TypedefDecl>,
    pub ports: Vec<PortDecl>,
    pub wires: Vec<WireDecl>,
    pub instances: Vec<InstanceDecl>,
    pub statements: Vec<Stmt>,
}

/// What a signal name refers to inside a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    Input,
    Output,
    Wire,
    /// Port of a child instance, with the child's direction.
    InstancePort(Direction),
}

impl CircuitDef {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitDef {
            name: name.into(),
            typedefs: Vec::new(),
            ports: Vec::new(),
            wires: Vec::new(),
            instances: Vec::new(),
            statements: Vec::new(),
        }
    }

    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn wire(&self, name: &str) -> Option<&WireDecl> {
        self.wires.iter().find(|w| w.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceDecl> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn typedef(&self, name: &str) -> Option<&TypedefDecl> {
        self.typedefs.iter().find(|t| t.name == name)
    }

    /// True if `name` is taken in the signal namespace (ports, wires,
    /// instances).
    pub fn signal_name_taken(&self, name: &str) -> bool {
        self.port(name).is_some() || self.wire(name).is_some() || self.instance(name).is_some()
    }

    /// Declared type and kind of a `Ref` or `PortRef` expression.
    pub fn lookup(&self, e: &Expr) -> Option<(&TypeDesc, SignalKind)> {
        match e {
            Expr::Ref(n) => {
                if let Some(p) = self.port(n) {
                    let kind = match p.direction {
                        Direction::Input => SignalKind::Input,
                        Direction::Output => SignalKind::Output,
                    };
                    Some((&p.ty, kind))
                } else {
                    self.wire(n).map(|w| (&w.ty, SignalKind::Wire))
                }
            }
            Expr::PortRef(i, p) => {
                let port = self.instance(i)?.child.port(p)?;
                Some((&port.ty, SignalKind::InstancePort(port.direction)))
            }
            _ => None,
        }
    }

    /// Resolves aliases through this circuit's typedef table.
    pub fn resolve_type(&self, ty: &TypeDesc) -> Result<TypeDesc, Diagnostic> {
        resolve_in(ty, &self.typedefs, self.typedefs.len() + 1)
    }

    pub fn has_fsm(&self) -> bool {
        self.statements.iter().any(|s| matches!(s, Stmt::Fsm(_)))
    }
}

fn resolve_in(ty: &TypeDesc, table: &[TypedefDecl], fuel: usize) -> Result<TypeDesc, Diagnostic> {
    if fuel == 0 {
        return Err(Diagnostic::error(
            Rule::TypeCycle,
            format!("alias chain through `{ty}` does not terminate"),
        ));
    }
    Ok(match ty {
        TypeDesc::Alias(name) => {
            if let Some(b) = builtin(name) {
                return Ok(b);
            }
            let decl = table.iter().find(|t| &t.name == name).ok_or_else(|| {
                Diagnostic::error(Rule::UnresolvedType, format!("unknown type `{name}`"))
            })?;
            resolve_in(&decl.desc, table, fuel - 1)?
        }
        TypeDesc::Record(fields) => TypeDesc::Record(
            fields
                .iter()
                .map(|(n, t)| Ok((n.clone(), resolve_in(t, table, fuel)?)))
                .collect::<Result<_, Diagnostic>>()?,
        ),
        TypeDesc::Array(len, elem) => {
            TypeDesc::Array(*len, Box::new(resolve_in(elem, table, fuel)?))
        }
        other => other.clone(),
    })
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("rx_data"));
        assert!(is_identifier("_x9"));
        assert!(!is_identifier("9x"));
        assert!(!is_identifier("rx_data]"));
        assert!(!is_identifier(""));
    }

    #[test]
    fn resolve_alias_chain() {
        let mut c = CircuitDef::new("t");
        c.typedefs.push(TypedefDecl {
            name: "cplx".into(),
            desc: TypeDesc::record([("re", "int6".into()), ("im", "int6".into())]),
            in_package: true,
        });
        c.typedefs.push(TypedefDecl {
            name: "cplx_ary".into(),
            desc: TypeDesc::array(256, "cplx"),
            in_package: true,
        });
        let resolved = c.resolve_type(&"cplx_ary".into()).unwrap();
        assert_eq!(
            resolved,
            TypeDesc::array(
                256,
                TypeDesc::record([("re", TypeDesc::Signed(6)), ("im", TypeDesc::Signed(6))])
            )
        );
        let err = c.resolve_type(&"nosuchtype".into()).unwrap_err();
        assert_eq!(err.rule, Rule::UnresolvedType);
    }

    #[test]
    fn cyclic_table_terminates() {
        let mut c = CircuitDef::new("t");
        c.typedefs.push(TypedefDecl {
            name: "t".into(),
            desc: TypeDesc::Alias("t".into()),
            in_package: true,
        });
        assert_eq!(c.resolve_type(&"t".into()).unwrap_err().rule, Rule::TypeCycle);
    }
}
