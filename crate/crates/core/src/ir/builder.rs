// SPDX-License-Identifier: Apache-2.0
//! Mutating construction API for [`CircuitDef`].
//!
//! Blocks can be built either with explicit `open_*` / [`close`] calls or
//! with the closure composers ([`sequential`], [`if_`], [`else_`], ...),
//! which are thin wrappers around them. An `else_` attaches to the `If`
//! closed immediately before it in the same block, so
//! `if_(c, t); else_(e)` yields the same node as `if_else(c, t, e)`.
//!
//! [`close`]: CircuitBuilder::close
//! [`sequential`]: CircuitBuilder::sequential
//! [`if_`]: CircuitBuilder::if_
//! [`else_`]: CircuitBuilder::else_

use std::sync::Arc;

use super::{
    is_identifier, Assign, AssignKind, CaseArm, Choice, CircuitDef, Direction, Expr, Fsm,
    InstanceDecl, PortDecl, SignalKind, StateDecl, Stmt, TypeDesc, TypedefDecl, WireDecl,
};
use crate::diag::{Diagnostic, Rule};
use crate::ir::literal_width;

type Result<T> = std::result::Result<T, Diagnostic>;

/// Handle to a component instance; its ports are addressable as
/// [`Expr::PortRef`].
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    child: Arc<CircuitDef>,
}

impl Instance {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn child(&self) -> &Arc<CircuitDef> {
        &self.child
    }

    pub fn port(&self, port: &str) -> Expr {
        Expr::port(self.name.clone(), port)
    }
}

#[derive(Debug)]
enum FrameKind {
    Sequential(String),
    Combinatorial(Option<String>),
    Fsm {
        label: String,
        defaults: Vec<Assign>,
        states: Vec<StateDecl>,
    },
    State(String),
    If(Expr),
    Else(usize),
    Case {
        selector: Expr,
        arms: Vec<CaseArm>,
        default: Option<Vec<Stmt>>,
    },
    When(Choice),
    Default,
}

impl FrameKind {
    fn describe(&self) -> String {
        match self {
            FrameKind::Sequential(l) => format!("sequential {l}"),
            FrameKind::Combinatorial(Some(l)) => format!("combinatorial {l}"),
            FrameKind::Combinatorial(None) => "combinatorial".into(),
            FrameKind::Fsm { label, .. } => format!("fsm {label}"),
            FrameKind::State(s) => format!("state {s}"),
            FrameKind::If(_) => "if".into(),
            FrameKind::Else(_) => "else".into(),
            FrameKind::Case { .. } => "case".into(),
            FrameKind::When(Choice::Value(v)) => format!("when {v}"),
            FrameKind::When(Choice::State(s)) => format!("when {s}"),
            FrameKind::Default => "default".into(),
        }
    }
}

#[derive(Debug)]
struct Frame {
    kind: FrameKind,
    body: Vec<Stmt>,
    /// Index of an `If` in `body` that may still receive an else branch.
    else_slot: Option<usize>,
}

pub struct CircuitBuilder {
    def: CircuitDef,
    frames: Vec<Frame>,
    top_else_slot: Option<usize>,
    fsm_labels: Vec<String>,
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitBuilder {
            def: CircuitDef::new(name),
            frames: Vec::new(),
            top_else_slot: None,
            fsm_labels: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    /// The circuit as constructed so far.
    pub fn peek(&self) -> &CircuitDef {
        &self.def
    }

    fn diag(&self, rule: Rule, msg: impl Into<String>) -> Diagnostic {
        let path = self
            .frames
            .iter()
            .map(|f| f.kind.describe())
            .collect::<Vec<_>>()
            .join(".");
        Diagnostic::error(rule, msg)
            .in_circuit(self.def.name.clone())
            .at(path)
    }

    fn check_ident(&self, name: &str) -> Result<()> {
        if is_identifier(name) {
            Ok(())
        } else {
            Err(self.diag(Rule::InvalidIdentifier, format!("`{name}` is not a legal identifier")))
        }
    }

    fn check_signal_name(&self, name: &str) -> Result<()> {
        self.check_ident(name)?;
        if self.def.signal_name_taken(name) {
            return Err(self.diag(Rule::DuplicateName, format!("`{name}` is already declared")));
        }
        Ok(())
    }

    /// Validates a type used in a declaration; returns it unchanged.
    fn check_decl_type(&self, ty: &TypeDesc) -> Result<()> {
        fn internal(ty: &TypeDesc) -> bool {
            match ty {
                TypeDesc::RUInt(_) | TypeDesc::Enum { .. } => true,
                TypeDesc::Record(fields) => fields.iter().any(|(_, t)| internal(t)),
                TypeDesc::Array(_, e) => internal(e),
                _ => false,
            }
        }
        if internal(ty) {
            return Err(self.diag(
                Rule::LiteralType,
                format!("type {ty} is internal and cannot be declared"),
            ));
        }
        if let Some(msg) = ty.shape_error() {
            return Err(self.diag(Rule::InvalidWidth, msg));
        }
        self.def
            .resolve_type(ty)
            .map_err(|d| self.diag(d.rule, d.message))?;
        Ok(())
    }

    // ---- declarations -------------------------------------------------

    pub fn typedef(&mut self, name: &str, desc: impl Into<TypeDesc>) -> Result<()> {
        let desc = desc.into();
        self.check_ident(name)?;
        if self.def.typedef(name).is_some() || crate::ir::builtin(name).is_some() {
            return Err(self.diag(Rule::DuplicateName, format!("type `{name}` is already declared")));
        }
        let mut self_ref = false;
        desc.for_each_alias(&mut |a| self_ref |= a == name);
        if self_ref {
            return Err(self.diag(Rule::TypeCycle, format!("type `{name}` refers to itself")));
        }
        self.check_decl_type(&desc)?;
        let in_package = self.def.ports.is_empty();
        self.def.typedefs.push(TypedefDecl {
            name: name.to_string(),
            desc,
            in_package,
        });
        Ok(())
    }

    pub fn declare_port(
        &mut self,
        name: &str,
        direction: Direction,
        ty: Option<TypeDesc>,
    ) -> Result<Expr> {
        self.check_signal_name(name)?;
        let ty = ty.unwrap_or(TypeDesc::Bit);
        self.check_decl_type(&ty)?;
        self.def.ports.push(PortDecl {
            name: name.to_string(),
            direction,
            ty,
        });
        Ok(Expr::sig(name))
    }

    /// Single-bit input.
    pub fn input(&mut self, name: &str) -> Result<Expr> {
        self.declare_port(name, Direction::Input, None)
    }

    pub fn input_of(&mut self, name: &str, ty: impl Into<TypeDesc>) -> Result<Expr> {
        self.declare_port(name, Direction::Input, Some(ty.into()))
    }

    /// Single-bit output.
    pub fn output(&mut self, name: &str) -> Result<Expr> {
        self.declare_port(name, Direction::Output, None)
    }

    pub fn output_of(&mut self, name: &str, ty: impl Into<TypeDesc>) -> Result<Expr> {
        self.declare_port(name, Direction::Output, Some(ty.into()))
    }

    pub fn wire(&mut self, name: &str, ty: impl Into<TypeDesc>) -> Result<Expr> {
        let ty = ty.into();
        self.check_signal_name(name)?;
        self.check_decl_type(&ty)?;
        self.def.wires.push(WireDecl {
            name: name.to_string(),
            ty,
        });
        Ok(Expr::sig(name))
    }

    pub fn component(&mut self, name: &str, child: impl Into<Arc<CircuitDef>>) -> Result<Instance> {
        self.check_signal_name(name)?;
        let child = child.into();
        self.def.instances.push(InstanceDecl {
            name: name.to_string(),
            child: child.clone(),
        });
        Ok(Instance {
            name: name.to_string(),
            child,
        })
    }

    // ---- statements ---------------------------------------------------

    fn check_refs(&self, e: &Expr) -> Result<()> {
        let mut err = None;
        e.for_each_ref(&mut |r| {
            if err.is_none() && self.def.lookup(r).is_none() {
                err = Some(self.diag(Rule::UnresolvedRef, format!("`{r}` does not name a signal")));
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn check_target(&self, lhs: &Expr) -> Result<()> {
        let root = lhs.root().ok_or_else(|| {
            self.diag(Rule::IllegalTarget, format!("`{lhs}` cannot be assigned"))
        })?;
        self.check_refs(lhs)?;
        match self.def.lookup(root).map(|(_, k)| k) {
            Some(SignalKind::Input) => Err(self.diag(
                Rule::IllegalTarget,
                format!("input `{root}` cannot be driven"),
            )),
            Some(SignalKind::InstancePort(Direction::Output)) => Err(self.diag(
                Rule::IllegalTarget,
                format!("output `{root}` of a child instance cannot be driven"),
            )),
            _ => Ok(()),
        }
    }

    fn in_state(&self) -> bool {
        self.frames.iter().any(|f| matches!(f.kind, FrameKind::State(_)))
    }

    fn push_stmt(&mut self, stmt: Stmt) -> Result<()> {
        match self.frames.last_mut() {
            None => {
                self.def.statements.push(stmt);
                self.top_else_slot = None;
            }
            Some(frame) => match frame.kind {
                FrameKind::Case { .. } => {
                    return Err(self.diag(
                        Rule::Misplaced,
                        "statements in a case must be inside a when or default arm",
                    ))
                }
                FrameKind::Fsm { .. } => {
                    return Err(self.diag(
                        Rule::Misplaced,
                        "only default assignments and states may appear directly in an fsm",
                    ))
                }
                _ => {
                    frame.body.push(stmt);
                    frame.else_slot = None;
                }
            },
        }
        Ok(())
    }

    /// `lhs <= rhs`. Continuous at top level, embedded inside blocks, and a
    /// per-cycle default directly inside an FSM.
    pub fn assign(&mut self, lhs: impl Into<Expr>, rhs: impl Into<Expr>) -> Result<()> {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        self.check_target(&lhs)?;
        self.check_refs(&rhs)?;
        let kind = if self.frames.is_empty() {
            AssignKind::Continuous
        } else {
            AssignKind::Embedded
        };
        let assign = Assign { lhs, rhs, kind };
        if let Some(Frame {
            kind: FrameKind::Fsm { defaults, .. },
            ..
        }) = self.frames.last_mut()
        {
            defaults.push(assign);
            return Ok(());
        }
        self.push_stmt(Stmt::Assign(assign))
    }

    /// Combinational assignment inside an FSM state.
    pub fn comb_assign(&mut self, lhs: impl Into<Expr>, rhs: impl Into<Expr>) -> Result<()> {
        if !self.in_state() {
            return Err(self.diag(Rule::Misplaced, "comb_assign is only legal inside an fsm state"));
        }
        let (lhs, rhs) = (lhs.into(), rhs.into());
        self.check_target(&lhs)?;
        self.check_refs(&rhs)?;
        self.push_stmt(Stmt::CombAssign(Assign {
            lhs,
            rhs,
            kind: AssignKind::Embedded,
        }))
    }

    pub fn next_state(&mut self, state: &str) -> Result<()> {
        if !self.in_state() {
            return Err(self.diag(Rule::Misplaced, "next_state is only legal inside an fsm state"));
        }
        self.push_stmt(Stmt::NextState(state.to_string()))
    }

    fn open(&mut self, kind: FrameKind) {
        self.frames.push(Frame {
            kind,
            body: Vec::new(),
            else_slot: None,
        });
    }

    fn open_top_block(&mut self, kind: FrameKind) -> Result<()> {
        if !self.frames.is_empty() {
            return Err(self.diag(
                Rule::NestedBlock,
                format!("{} must appear at circuit top level", kind.describe()),
            ));
        }
        self.open(kind);
        Ok(())
    }

    pub fn open_sequential(&mut self, label: &str) -> Result<()> {
        self.check_ident(label)?;
        self.open_top_block(FrameKind::Sequential(label.to_string()))
    }

    pub fn open_combinatorial(&mut self, label: Option<&str>) -> Result<()> {
        if let Some(l) = label {
            self.check_ident(l)?;
        }
        self.open_top_block(FrameKind::Combinatorial(label.map(str::to_string)))
    }

    pub fn open_fsm(&mut self, label: &str) -> Result<()> {
        self.check_ident(label)?;
        if self.fsm_labels.iter().any(|l| l == label) {
            return Err(self.diag(Rule::DuplicateName, format!("fsm `{label}` is already declared")));
        }
        self.open_top_block(FrameKind::Fsm {
            label: label.to_string(),
            defaults: Vec::new(),
            states: Vec::new(),
        })
    }

    pub fn open_state(&mut self, name: &str) -> Result<()> {
        self.check_ident(name)?;
        match self.frames.last() {
            Some(Frame {
                kind: FrameKind::Fsm { states, .. },
                ..
            }) => {
                if states.iter().any(|s| s.name == name) {
                    return Err(
                        self.diag(Rule::DuplicateName, format!("state `{name}` is already declared"))
                    );
                }
            }
            _ => return Err(self.diag(Rule::Misplaced, "state must appear directly inside an fsm")),
        }
        self.open(FrameKind::State(name.to_string()));
        Ok(())
    }

    fn check_behavioural_context(&self, what: &str) -> Result<()> {
        match self.frames.last() {
            None => Err(self.diag(
                Rule::Misplaced,
                format!("{what} must appear inside a sequential, combinatorial or fsm block"),
            )),
            Some(Frame {
                kind: FrameKind::Fsm { .. } | FrameKind::Case { .. },
                ..
            }) => Err(self.diag(Rule::Misplaced, format!("{what} is not legal here"))),
            Some(_) => Ok(()),
        }
    }

    pub fn open_if(&mut self, cond: impl Into<Expr>) -> Result<()> {
        let cond = cond.into();
        self.check_behavioural_context("if")?;
        self.check_refs(&cond)?;
        self.open(FrameKind::If(cond));
        Ok(())
    }

    pub fn open_else(&mut self) -> Result<()> {
        let slot = match self.frames.last() {
            None => self.top_else_slot,
            Some(f) => f.else_slot,
        };
        let Some(idx) = slot else {
            return Err(self.diag(Rule::DanglingElse, "else without a preceding if"));
        };
        match self.frames.last_mut() {
            None => self.top_else_slot = None,
            Some(f) => f.else_slot = None,
        }
        self.open(FrameKind::Else(idx));
        Ok(())
    }

    pub fn open_case(&mut self, selector: impl Into<Expr>) -> Result<()> {
        let selector = selector.into();
        self.check_behavioural_context("case")?;
        self.check_refs(&selector)?;
        self.open(FrameKind::Case {
            selector,
            arms: Vec::new(),
            default: None,
        });
        Ok(())
    }

    pub fn open_when(&mut self, choice: impl Into<Choice>) -> Result<()> {
        let choice = choice.into();
        let selector_width = match self.frames.last() {
            Some(Frame {
                kind: FrameKind::Case { selector, arms, .. },
                ..
            }) => {
                if arms.iter().any(|a| a.choice == choice) {
                    return Err(self.diag(Rule::DuplicateArm, "duplicate case choice"));
                }
                self.def
                    .lookup(selector)
                    .and_then(|(t, _)| self.def.resolve_type(t).ok())
                    .and_then(|t| t.width())
            }
            _ => return Err(self.diag(Rule::Misplaced, "when must appear directly inside a case")),
        };
        if let (Choice::Value(v), Some(w)) = (&choice, selector_width) {
            if u64::from(literal_width(*v)) > w {
                return Err(self.diag(
                    Rule::ArmWidth,
                    format!(
                        "choice {v} needs {} bits but the selector has {w}",
                        literal_width(*v)
                    ),
                ));
            }
        }
        self.open(FrameKind::When(choice));
        Ok(())
    }

    pub fn open_default(&mut self) -> Result<()> {
        match self.frames.last() {
            Some(Frame {
                kind: FrameKind::Case { default, .. },
                ..
            }) => {
                if default.is_some() {
                    return Err(self.diag(Rule::DuplicateArm, "case already has a default arm"));
                }
            }
            _ => return Err(self.diag(Rule::Misplaced, "default must appear directly inside a case")),
        }
        self.open(FrameKind::Default);
        Ok(())
    }

    /// Closes the innermost open block and attaches it to its parent.
    pub fn close(&mut self) -> Result<()> {
        let Some(frame) = self.frames.pop() else {
            return Err(self.diag(Rule::UnclosedBlock, "close without an open block"));
        };
        let body = frame.body;
        match frame.kind {
            FrameKind::Sequential(label) => self.push_stmt(Stmt::Sequential { label, body }),
            FrameKind::Combinatorial(label) => self.push_stmt(Stmt::Combinatorial { label, body }),
            FrameKind::Fsm {
                label,
                defaults,
                states,
            } => {
                if states.is_empty() {
                    return Err(self.diag(Rule::NoStates, format!("fsm `{label}` declares no states")));
                }
                let mut unknown = None;
                for s in &states {
                    for stmt in &s.body {
                        stmt.walk(&mut |st| {
                            if let Stmt::NextState(t) = st {
                                if unknown.is_none() && !states.iter().any(|s| &s.name == t) {
                                    unknown = Some(t.clone());
                                }
                            }
                        });
                    }
                }
                if let Some(t) = unknown {
                    return Err(self.diag(
                        Rule::UnknownState,
                        format!("next_state target `{t}` is not a state of fsm `{label}`"),
                    ));
                }
                self.fsm_labels.push(label.clone());
                self.push_stmt(Stmt::Fsm(Fsm {
                    label,
                    defaults,
                    states,
                }))
            }
            FrameKind::State(name) => match self.frames.last_mut() {
                Some(Frame {
                    kind: FrameKind::Fsm { states, .. },
                    ..
                }) => {
                    states.push(StateDecl { name, body });
                    Ok(())
                }
                _ => unreachable!("state frames only open inside fsm frames"),
            },
            FrameKind::If(cond) => {
                self.push_stmt(Stmt::If {
                    cond,
                    then_body: body,
                    else_body: Vec::new(),
                })?;
                match self.frames.last_mut() {
                    None => self.top_else_slot = Some(self.def.statements.len() - 1),
                    Some(f) => f.else_slot = Some(f.body.len() - 1),
                }
                Ok(())
            }
            FrameKind::Else(idx) => {
                let parent_body = match self.frames.last_mut() {
                    None => &mut self.def.statements,
                    Some(f) => &mut f.body,
                };
                match parent_body.get_mut(idx) {
                    Some(Stmt::If { else_body, .. }) => *else_body = body,
                    _ => unreachable!("else slot always points at an if"),
                }
                Ok(())
            }
            FrameKind::Case {
                selector,
                arms,
                default,
            } => self.push_stmt(Stmt::Case {
                selector,
                arms,
                default: default.unwrap_or_default(),
            }),
            FrameKind::When(choice) => match self.frames.last_mut() {
                Some(Frame {
                    kind: FrameKind::Case { arms, .. },
                    ..
                }) => {
                    arms.push(CaseArm { choice, body });
                    Ok(())
                }
                _ => unreachable!("when frames only open inside case frames"),
            },
            FrameKind::Default => match self.frames.last_mut() {
                Some(Frame {
                    kind: FrameKind::Case { default, .. },
                    ..
                }) => {
                    *default = Some(body);
                    Ok(())
                }
                _ => unreachable!("default frames only open inside case frames"),
            },
        }
    }

    fn scoped(
        &mut self,
        opened: Result<()>,
        f: impl FnOnce(&mut Self) -> Result<()>,
    ) -> Result<()> {
        opened?;
        let depth = self.frames.len();
        match f(self) {
            Ok(()) => {
                if self.frames.len() != depth {
                    return Err(self.diag(Rule::UnclosedBlock, "block closure left a block open"));
                }
                self.close()
            }
            Err(e) => {
                self.frames.truncate(depth - 1);
                Err(e)
            }
        }
    }

    pub fn sequential(&mut self, label: &str, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_sequential(label);
        self.scoped(opened, f)
    }

    pub fn combinatorial(
        &mut self,
        label: Option<&str>,
        f: impl FnOnce(&mut Self) -> Result<()>,
    ) -> Result<()> {
        let opened = self.open_combinatorial(label);
        self.scoped(opened, f)
    }

    pub fn fsm(&mut self, label: &str, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_fsm(label);
        self.scoped(opened, f)
    }

    pub fn state(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_state(name);
        self.scoped(opened, f)
    }

    pub fn if_(&mut self, cond: impl Into<Expr>, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_if(cond);
        self.scoped(opened, f)
    }

    pub fn else_(&mut self, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_else();
        self.scoped(opened, f)
    }

    pub fn if_else(
        &mut self,
        cond: impl Into<Expr>,
        then_f: impl FnOnce(&mut Self) -> Result<()>,
        else_f: impl FnOnce(&mut Self) -> Result<()>,
    ) -> Result<()> {
        self.if_(cond, then_f)?;
        self.else_(else_f)
    }

    pub fn case(&mut self, selector: impl Into<Expr>, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_case(selector);
        self.scoped(opened, f)
    }

    pub fn when(&mut self, choice: impl Into<Choice>, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_when(choice);
        self.scoped(opened, f)
    }

    pub fn default(&mut self, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let opened = self.open_default();
        self.scoped(opened, f)
    }

    pub fn finish(self) -> Result<CircuitDef> {
        if !is_identifier(&self.def.name) {
            return Err(self.diag(
                Rule::InvalidIdentifier,
                format!("`{}` is not a legal circuit name", self.def.name),
            ));
        }
        if let Some(f) = self.frames.last() {
            return Err(self.diag(Rule::UnclosedBlock, format!("{} is still open", f.kind.describe())));
        }
        Ok(self.def)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::BinOp;

    type R = std::result::Result<(), Diagnostic>;

    fn half_adder() -> CircuitDef {
        let mut b = CircuitBuilder::new("half_adder");
        let a = b.input("a").unwrap();
        let bb = b.input("b").unwrap();
        let sum = b.output("sum").unwrap();
        let cout = b.output("cout").unwrap();
        b.assign(sum, &a ^ &bb).unwrap();
        b.assign(cout, &a & &bb).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn default_port_type_is_bit() {
        let c = half_adder();
        assert_eq!(
            c.ports[0],
            PortDecl {
                name: "a".into(),
                direction: Direction::Input,
                ty: TypeDesc::Bit
            }
        );
        assert!(matches!(
            &c.statements[0],
            Stmt::Assign(Assign { kind: AssignKind::Continuous, .. })
        ));
    }

    #[test]
    fn byte_port() {
        let mut b = CircuitBuilder::new("counter");
        b.output_of("count", "byte").unwrap();
        assert_eq!(b.peek().ports[0].ty, TypeDesc::BitVector(8));
    }

    #[test]
    fn duplicate_port() {
        let mut b = CircuitBuilder::new("c");
        b.input("a").unwrap();
        assert_eq!(b.input("a").unwrap_err().rule, Rule::DuplicateName);
    }

    #[test]
    fn literal_type_rejected() {
        let mut b = CircuitBuilder::new("c");
        assert_eq!(
            b.input_of("a", TypeDesc::RUInt(3)).unwrap_err().rule,
            Rule::LiteralType
        );
    }

    #[test]
    fn wires_and_typedefs() {
        let mut b = CircuitBuilder::new("c");
        assert_eq!(b.wire("x", "nosuchtype").unwrap_err().rule, Rule::UnresolvedType);
        b.wire("w1", "bv8").unwrap();
        assert_eq!(b.peek().wire("w1").unwrap().ty, TypeDesc::BitVector(8));
        assert_eq!(b.typedef("t", TypeDesc::Alias("t".into())).unwrap_err().rule, Rule::TypeCycle);
        assert_eq!(
            b.typedef("fwd", TypeDesc::array(4, "later")).unwrap_err().rule,
            Rule::UnresolvedType
        );
        b.typedef("cplx", TypeDesc::record([("re", "int6".into()), ("im", "int6".into())]))
            .unwrap();
        b.typedef("cplx_ary", TypeDesc::array(256, "cplx")).unwrap();
        b.wire("mem", "cplx_ary").unwrap();
        let resolved = b.peek().resolve_type(&b.peek().wire("mem").unwrap().ty).unwrap();
        assert_eq!(resolved.width(), Some(3072));
        assert_eq!(b.typedef("cplx", TypeDesc::Bit).unwrap_err().rule, Rule::DuplicateName);
    }

    #[test]
    fn components_and_targets() {
        let ha = Arc::new(half_adder());
        let mut b = CircuitBuilder::new("full_adder");
        let a = b.input("a").unwrap();
        let ha1 = b.component("ha1", ha.clone()).unwrap();
        b.assign(ha1.port("a"), &a).unwrap();
        assert_eq!(b.component("ha1", ha.clone()).unwrap_err().rule, Rule::DuplicateName);
        assert_eq!(b.assign(&a, 1).unwrap_err().rule, Rule::IllegalTarget);
        assert_eq!(b.assign(ha1.port("sum"), 1).unwrap_err().rule, Rule::IllegalTarget);
        assert_eq!(b.assign(ha1.port("nope"), 1).unwrap_err().rule, Rule::UnresolvedRef);
        assert_eq!(b.assign(&a + 1, 1).unwrap_err().rule, Rule::IllegalTarget);
    }

    #[test]
    fn split_if_else_equals_combined() {
        let build = |split: bool| -> CircuitDef {
            let mut b = CircuitBuilder::new("counter");
            let tick = b.input("tick").unwrap();
            let count = b.output_of("count", "byte").unwrap();
            b.sequential("counting", |b| {
                b.if_(tick.equals(1), |b| {
                    if split {
                        b.if_(count.equals(255), |b| b.assign(&count, 0))?;
                        b.else_(|b| b.assign(&count, &count + 1))
                    } else {
                        b.if_else(
                            count.equals(255),
                            |b| b.assign(&count, 0),
                            |b| b.assign(&count, &count + 1),
                        )
                    }
                })
            })
            .unwrap();
            b.finish().unwrap()
        };
        let split = build(true);
        assert_eq!(split, build(false));
        let Stmt::Sequential { body, .. } = &split.statements[0] else { panic!() };
        let Stmt::If { then_body, else_body, .. } = &body[0] else { panic!() };
        assert!(else_body.is_empty());
        let Stmt::If { else_body, .. } = &then_body[0] else { panic!() };
        assert_eq!(else_body.len(), 1);
    }

    #[test]
    fn explicit_open_close_matches_closures() {
        let mut b = CircuitBuilder::new("c");
        let t = b.input("t").unwrap();
        let x = b.output("x").unwrap();
        b.open_sequential("s").unwrap();
        b.open_if(t.equals(1)).unwrap();
        b.assign(&x, 1).unwrap();
        b.close().unwrap();
        b.open_else().unwrap();
        b.assign(&x, 0).unwrap();
        b.close().unwrap();
        b.close().unwrap();
        let explicit = b.finish().unwrap();

        let mut b = CircuitBuilder::new("c");
        let t = b.input("t").unwrap();
        let x = b.output("x").unwrap();
        b.sequential("s", |b| b.if_else(t.equals(1), |b| b.assign(&x, 1), |b| b.assign(&x, 0)))
            .unwrap();
        assert_eq!(explicit, b.finish().unwrap());
    }

    #[test]
    fn dangling_else() {
        let mut b = CircuitBuilder::new("c");
        let x = b.output("x").unwrap();
        let r: R = b.sequential("s", |b| {
            b.assign(&x, 0)?;
            b.else_(|b| b.assign(&x, 1))
        });
        assert_eq!(r.unwrap_err().rule, Rule::DanglingElse);
        // a statement between if and else breaks the pairing too
        let mut b = CircuitBuilder::new("c");
        let x = b.output("x").unwrap();
        let r: R = b.sequential("s", |b| {
            b.if_(x.equals(1), |b| b.assign(&x, 0))?;
            b.assign(&x, 1)?;
            b.else_(|b| b.assign(&x, 1))
        });
        assert_eq!(r.unwrap_err().rule, Rule::DanglingElse);
        // two elses for one if
        let mut b = CircuitBuilder::new("c");
        let x = b.output("x").unwrap();
        let r: R = b.sequential("s", |b| {
            b.if_(x.equals(1), |b| b.assign(&x, 0))?;
            b.else_(|b| b.assign(&x, 1))?;
            b.else_(|b| b.assign(&x, 1))
        });
        assert_eq!(r.unwrap_err().rule, Rule::DanglingElse);
        assert!(b.finish().is_ok());
    }

    #[test]
    fn case_arms() {
        let mut b = CircuitBuilder::new("c");
        let sel = b.input_of("sel", "bv2").unwrap();
        let y = b.output_of("y", "bv2").unwrap();
        b.combinatorial(None, |b| {
            b.case(&sel, |b| {
                b.when(0, |b| b.assign(&y, 1))?;
                b.when(1, |b| b.assign(&y, 2))?;
                b.when(2, |b| b.assign(&y, 3))?;
                b.default(|b| b.assign(&y, 0))
            })
        })
        .unwrap();
        let c = b.finish().unwrap();
        let Stmt::Combinatorial { body, .. } = &c.statements[0] else { panic!() };
        let Stmt::Case { arms, default, .. } = &body[0] else { panic!() };
        assert_eq!(arms.len(), 3);
        assert_eq!(default.len(), 1);

        let mut b = CircuitBuilder::new("c");
        let sel = b.input_of("sel", "bv2").unwrap();
        let r: R = b.combinatorial(None, |b| {
            b.case(&sel, |b| {
                b.when(1, |_| Ok(()))?;
                b.when(1, |_| Ok(()))
            })
        });
        assert_eq!(r.unwrap_err().rule, Rule::DuplicateArm);
        let r: R = b.combinatorial(None, |b| b.case(&sel, |b| b.when(5, |_| Ok(()))));
        assert_eq!(r.unwrap_err().rule, Rule::ArmWidth);
    }

    #[test]
    fn nesting_rules() {
        let mut b = CircuitBuilder::new("c");
        let r: R = b.sequential("a", |b| b.sequential("b", |_| Ok(())));
        assert_eq!(r.unwrap_err().rule, Rule::NestedBlock);
        let x = b.output("x").unwrap();
        assert_eq!(b.if_(x.equals(1), |_| Ok(())).unwrap_err().rule, Rule::Misplaced);
        b.sequential("empty", |_| Ok(())).unwrap();
        assert_eq!(b.peek().statements.len(), 1);
    }

    #[test]
    fn fsm_construction() {
        let mut b = CircuitBuilder::new("fsm1");
        let go = b.input("go").unwrap();
        let f = b.output_of("f", "bv2").unwrap();
        b.fsm("simple", |b| {
            b.assign(&f, 0)?;
            b.state("s0", |b| {
                b.assign(&f, 1)?;
                b.if_(go.equals(1), |b| b.next_state("s1"))
            })?;
            b.state("s1", |b| {
                b.assign(&f, 2)?;
                b.next_state("s2")
            })?;
            b.state("s2", |b| {
                b.assign(&f, 3)?;
                b.next_state("s0")
            })
        })
        .unwrap();
        let c = b.finish().unwrap();
        let Stmt::Fsm(fsm) = &c.statements[0] else { panic!() };
        assert_eq!(fsm.defaults.len(), 1);
        assert_eq!(fsm.states[0].name, "s0");
        assert_eq!(fsm.states.len(), 3);

        let mut b = CircuitBuilder::new("c");
        assert_eq!(b.fsm("e", |_| Ok(())).unwrap_err().rule, Rule::NoStates);
        let r: R = b.fsm("m", |b| b.state("a", |b| b.next_state("s9")));
        assert_eq!(r.unwrap_err().rule, Rule::UnknownState);
        b.fsm("one", |b| b.state("only", |_| Ok(()))).unwrap();
        assert_eq!(b.next_state("only").unwrap_err().rule, Rule::Misplaced);
    }

    #[test]
    fn unresolved_reference() {
        let mut b = CircuitBuilder::new("c");
        let x = b.output("x").unwrap();
        let err = b.assign(&x, Expr::sig("ghost")).unwrap_err();
        assert_eq!(err.rule, Rule::UnresolvedRef);
        assert_eq!(err.circuit, "c");
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(half_adder(), half_adder());
        let c = half_adder();
        let Stmt::Assign(a) = &c.statements[0] else { panic!() };
        assert!(matches!(a.rhs, Expr::Binary(BinOp::Xor, ..)));
    }
}
