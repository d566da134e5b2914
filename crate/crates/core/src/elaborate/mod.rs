// SPDX-License-Identifier: Apache-2.0
//! Elaboration: structural validation, typedef resolution, FSM lowering,
//! type checking, drive rules and the dependency graph.
//!
//! [`elaborate`] never stops at the first problem inside a pass; it returns
//! every diagnostic the pass found. Type checking only runs on circuits
//! that are structurally sound.

mod consteval;
mod depgraph;
mod flatten;
mod lower;
mod ports;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

pub use consteval::{const_eval, ConstEnv, ConstValue};
pub use depgraph::{build_dep_graph, DependencyGraph, EdgeKind};
pub use flatten::{flatten, mangle};
pub use lower::{lower_fsm, state_register_name, state_type, LoweredFsm};
pub use ports::{infer_ports, needs_port_inference, PortClass, PortOverrides, PortPartition};

use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::ir::{
    is_identifier, Choice, CircuitDef, Direction, Expr, SignalKind, Stmt, TypeDesc,
};
use crate::typesys::{self, Plan, PlanNode, SymbolTable};

/// A typed assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TAssign {
    pub lhs: Plan,
    pub rhs: Plan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TArm {
    pub choice: Choice,
    pub body: Vec<TStmt>,
}

/// Lowered, typed statement. There is no FSM form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TStmt {
    Assign(TAssign),
    If {
        cond: Plan,
        then_body: Vec<TStmt>,
        else_body: Vec<TStmt>,
    },
    Case {
        selector: Plan,
        arms: Vec<TArm>,
        default: Vec<TStmt>,
    },
    Sequential {
        label: String,
        body: Vec<TStmt>,
    },
    Combinatorial {
        label: Option<String>,
        body: Vec<TStmt>,
    },
}

impl TStmt {
    pub fn bodies(&self) -> Vec<&[TStmt]> {
        match self {
            TStmt::Assign(_) => vec![],
            TStmt::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            TStmt::Case { arms, default, .. } => {
                let mut v: Vec<&[TStmt]> = arms.iter().map(|a| a.body.as_slice()).collect();
                v.push(default);
                v
            }
            TStmt::Sequential { body, .. } | TStmt::Combinatorial { body, .. } => vec![body],
        }
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TStmt)) {
        f(self);
        for b in self.bodies() {
            for s in b {
                s.walk(f);
            }
        }
    }

    /// Signal keys read anywhere in this statement, including index
    /// expressions of assignment targets. May contain repeats.
    pub fn reads(&self) -> Vec<String> {
        fn lvalue(p: &Plan, out: &mut Vec<String>) {
            match &p.node {
                PlanNode::Index(b, i) => {
                    lvalue(b, out);
                    i.reads(out);
                }
                PlanNode::Field(b, _) => lvalue(b, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        self.walk(&mut |s| match s {
            TStmt::Assign(a) => {
                lvalue(&a.lhs, &mut out);
                a.rhs.reads(&mut out);
            }
            TStmt::If { cond, .. } => cond.reads(&mut out),
            TStmt::Case { selector, .. } => selector.reads(&mut out),
            _ => {}
        });
        out
    }

    /// Root keys assigned anywhere in this statement, first-assignment order.
    pub fn assigned_roots(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.walk(&mut |s| {
            if let TStmt::Assign(a) = s {
                if let Some(k) = a.lhs.root_key() {
                    if !out.contains(&k) {
                        out.push(k);
                    }
                }
            }
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRegister {
    pub fsm: String,
    pub name: String,
    /// Always a [`TypeDesc::Enum`].
    pub ty: TypeDesc,
}

/// A fully resolved, lowered and checked circuit.
#[derive(Debug, Clone)]
pub struct ElaboratedCircuit {
    pub source: CircuitDef,
    /// `source` with FSMs replaced by their lowered blocks and state
    /// registers added as wires. Elaborating it again is a fixpoint.
    pub lowered: CircuitDef,
    pub symbols: SymbolTable,
    /// Typed form of `lowered.statements`, index for index.
    pub statements: Vec<TStmt>,
    pub state_registers: Vec<StateRegister>,
    /// Unique child definitions, dependencies first.
    pub children: Vec<Arc<ElaboratedCircuit>>,
    pub graph: DependencyGraph,
    pub warnings: Diagnostics,
}

impl ElaboratedCircuit {
    pub fn name(&self) -> &str {
        &self.source.name
    }

    pub fn child(&self, name: &str) -> Option<&Arc<ElaboratedCircuit>> {
        self.children.iter().find(|c| c.name() == name)
    }

    /// Elaborated definition behind instance `inst`.
    pub fn instance_child(&self, inst: &str) -> Option<&ElaboratedCircuit> {
        let decl = self.lowered.instance(inst)?;
        self.child(&decl.child.name).map(|c| c.as_ref())
    }

    /// True if this circuit or any descendant contains a register.
    pub fn has_registers(&self) -> bool {
        self.statements
            .iter()
            .any(|s| matches!(s, TStmt::Sequential { .. }))
            || self.children.iter().any(|c| c.has_registers())
    }

    pub fn state_register(&self, key: &str) -> Option<&StateRegister> {
        self.state_registers.iter().find(|r| r.name == key)
    }

    /// Hierarchy inlined into one flat circuit (see [`flatten`]).
    pub fn flatten(&self) -> Result<CircuitDef, Diagnostics> {
        flatten(self)
    }

    /// Structural equality of everything but the original source.
    pub fn same_lowering(&self, other: &ElaboratedCircuit) -> bool {
        self.lowered == other.lowered
            && self.symbols == other.symbols
            && self.statements == other.statements
            && self.state_registers == other.state_registers
            && self.graph == other.graph
    }
}

/// Elaborates `def` and, recursively, every child definition.
pub fn elaborate(def: &CircuitDef) -> Result<ElaboratedCircuit, Diagnostics> {
    let mut cache = HashMap::new();
    elaborate_cached(def, &mut cache).map(Arc::unwrap_or_clone)
}

type Cache = HashMap<String, Arc<ElaboratedCircuit>>;

fn elaborate_cached(def: &CircuitDef, cache: &mut Cache) -> Result<Arc<ElaboratedCircuit>, Diagnostics> {
    let mut diags = validate(def);
    let name = def.name.clone();

    // children first
    let mut children: Vec<Arc<ElaboratedCircuit>> = Vec::new();
    let mut child_failed = false;
    for inst in &def.instances {
        let child = &inst.child;
        let elab = match cache.get(&child.name) {
            Some(c) if c.source == **child => Ok(c.clone()),
            Some(_) => {
                diags.push(
                    Diagnostic::error(
                        Rule::NameCollision,
                        format!("two different circuits are named `{}`", child.name),
                    )
                    .in_circuit(&name)
                    .at(inst.name.clone()),
                );
                child_failed = true;
                continue;
            }
            None => elaborate_cached(child, cache),
        };
        match elab {
            Ok(c) => {
                cache.insert(c.name().to_string(), c.clone());
                for grand in c.children.iter().chain(std::iter::once(&c)) {
                    if !children.iter().any(|k| k.name() == grand.name()) {
                        children.push(grand.clone());
                    }
                }
            }
            Err(ds) => {
                child_failed = true;
                if !diags.iter().any(|d| d.circuit == child.name) {
                    diags.extend(ds);
                }
            }
        }
    }
    if diags.has_errors() || child_failed {
        return Err(diags);
    }

    // FSM lowering
    let mut lowered = def.clone();
    lowered.statements.clear();
    let mut state_registers = Vec::new();
    for stmt in &def.statements {
        match stmt {
            Stmt::Fsm(fsm) => {
                let l = lower_fsm(fsm);
                if def.signal_name_taken(&l.register.name) {
                    diags.push(
                        Diagnostic::error(
                            Rule::NameCollision,
                            format!("state register `{}` clashes with a declared name", l.register.name),
                        )
                        .in_circuit(&name)
                        .at(format!("fsm {}", fsm.label)),
                    );
                    continue;
                }
                state_registers.push(StateRegister {
                    fsm: fsm.label.clone(),
                    name: l.register.name.clone(),
                    ty: l.register.ty.clone(),
                });
                lowered.wires.push(l.register);
                lowered.statements.push(l.update);
                lowered.statements.extend(l.comb);
            }
            other => lowered.statements.push(other.clone()),
        }
    }
    // state registers that survive from an earlier lowering
    for w in &def.wires {
        if let TypeDesc::Enum { name: tname, .. } = &w.ty {
            state_registers.push(StateRegister {
                fsm: tname.strip_suffix("_state_t").unwrap_or(tname).to_string(),
                name: w.name.clone(),
                ty: w.ty.clone(),
            });
        }
    }
    if diags.has_errors() {
        return Err(diags);
    }

    // symbol table
    let mut symbols = SymbolTable::new();
    for p in &lowered.ports {
        let kind = match p.direction {
            Direction::Input => SignalKind::Input,
            Direction::Output => SignalKind::Output,
        };
        symbols.insert(p.name.clone(), lowered.resolve_type(&p.ty).expect("validated"), kind);
    }
    for w in &lowered.wires {
        symbols.insert(w.name.clone(), lowered.resolve_type(&w.ty).expect("validated"), SignalKind::Wire);
    }
    let child_of = |n: &str| children.iter().find(|c| c.name() == n).cloned();
    for inst in &lowered.instances {
        let child = child_of(&inst.child.name).expect("child elaborated");
        for p in &child.lowered.ports {
            let ty = child.symbols.get(&p.name).expect("child port").ty.clone();
            symbols.insert(
                format!("{}.{}", inst.name, p.name),
                ty,
                SignalKind::InstancePort(p.direction),
            );
        }
    }

    // typing
    let mut statements = Vec::new();
    for (i, s) in lowered.statements.iter().enumerate() {
        let path = format!("stmt[{i}]");
        match type_stmt(s, &symbols, &path, &mut diags) {
            Some(t) => statements.push(t),
            None => debug_assert!(diags.has_errors()),
        }
    }
    for d in diags.0.iter_mut() {
        if d.circuit.is_empty() {
            d.circuit = name.clone();
        }
    }
    if diags.has_errors() {
        return Err(diags);
    }

    check_drivers(&statements, &name, &mut diags);

    let mut graph = DependencyGraph::new();
    for (key, _) in symbols.iter() {
        graph.add_node(key);
    }
    let instance_children: Vec<(String, Arc<ElaboratedCircuit>)> = lowered
        .instances
        .iter()
        .map(|i| (i.name.clone(), child_of(&i.child.name).expect("child elaborated")))
        .collect();
    let refs: Vec<(String, &ElaboratedCircuit)> = instance_children
        .iter()
        .map(|(n, c)| (n.clone(), c.as_ref()))
        .collect();
    depgraph::build(&mut graph, &statements, &refs);
    for cycle in graph.comb_cycles() {
        diags.push(
            Diagnostic::error(
                Rule::CombinationalCycle,
                format!("combinational cycle through {}", cycle.join(", ")),
            )
            .in_circuit(&name),
        );
    }

    empty_body_warnings(def, &mut diags);
    if diags.has_errors() {
        return Err(diags);
    }

    Ok(Arc::new(ElaboratedCircuit {
        source: def.clone(),
        lowered,
        symbols,
        statements,
        state_registers,
        children,
        graph,
        warnings: diags,
    }))
}

fn type_stmt(s: &Stmt, syms: &SymbolTable, path: &str, diags: &mut Diagnostics) -> Option<TStmt> {
    let body = |stmts: &[Stmt], part: &str, diags: &mut Diagnostics| -> Option<Vec<TStmt>> {
        let mut out = Vec::with_capacity(stmts.len());
        let mut ok = true;
        for (j, s) in stmts.iter().enumerate() {
            match type_stmt(s, syms, &format!("{path}.{part}[{j}]"), diags) {
                Some(t) => out.push(t),
                None => ok = false,
            }
        }
        ok.then_some(out)
    };
    match s {
        Stmt::Assign(a) => {
            let lhs = typesys::check_target(&a.lhs, syms).map_err(|d| d.within(path));
            let lhs = match lhs {
                Ok(l) => l,
                Err(d) => {
                    diags.push(d);
                    return None;
                }
            };
            match typesys::check_assign(&lhs.ty, &a.rhs, syms) {
                Ok(rhs) => Some(TStmt::Assign(TAssign { lhs, rhs })),
                Err(d) => {
                    diags.push(d.within(path));
                    None
                }
            }
        }
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            let c = typesys::check_condition(cond, syms)
                .map_err(|d| diags.push(d.within(path)))
                .ok();
            let t = body(then_body, "then", diags);
            let e = body(else_body, "else", diags);
            Some(TStmt::If {
                cond: c?,
                then_body: t?,
                else_body: e?,
            })
        }
        Stmt::Case {
            selector,
            arms,
            default,
        } => {
            let sel = typesys::check_case(selector, arms.iter().map(|a| &a.choice), syms)
                .map_err(|d| diags.push(d.within(path)))
                .ok();
            let mut typed = Vec::new();
            let mut ok = true;
            for (j, arm) in arms.iter().enumerate() {
                match body(&arm.body, &format!("when[{j}]"), diags) {
                    Some(b) => typed.push(TArm {
                        choice: arm.choice.clone(),
                        body: b,
                    }),
                    None => ok = false,
                }
            }
            let d = body(default, "default", diags);
            if !ok {
                return None;
            }
            Some(TStmt::Case {
                selector: sel?,
                arms: typed,
                default: d?,
            })
        }
        Stmt::Sequential { label, body: b } => Some(TStmt::Sequential {
            label: label.clone(),
            body: body(b, "body", diags)?,
        }),
        Stmt::Combinatorial { label, body: b } => Some(TStmt::Combinatorial {
            label: label.clone(),
            body: body(b, "body", diags)?,
        }),
        Stmt::CombAssign(_) | Stmt::NextState(_) | Stmt::Fsm(_) => {
            unreachable!("removed by lowering and validation")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Seg {
    Const(u64),
    Field(String),
    Dynamic,
}

fn lvalue_path(p: &Plan) -> Vec<Seg> {
    let mut segs = Vec::new();
    let mut cur = p;
    loop {
        match &cur.node {
            PlanNode::Index(b, i) => {
                segs.push(match i.node {
                    PlanNode::Lit(v) => Seg::Const(v),
                    _ => Seg::Dynamic,
                });
                cur = b;
            }
            PlanNode::Field(b, f) => {
                segs.push(Seg::Field(f.clone()));
                cur = b;
            }
            _ => break,
        }
    }
    segs.reverse();
    segs
}

fn overlaps(a: &[Seg], b: &[Seg]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Seg::Const(i), Seg::Const(j)) => i == j,
        (Seg::Field(f), Seg::Field(g)) => f == g,
        _ => true,
    })
}

/// One driving context per continuous assignment or block.
fn check_drivers(stmts: &[TStmt], circuit: &str, diags: &mut Diagnostics) {
    let mut by_root: indexmap::IndexMap<String, Vec<(usize, Vec<Seg>)>> = Default::default();
    for (ctx, s) in stmts.iter().enumerate() {
        s.walk(&mut |s| {
            if let TStmt::Assign(a) = s {
                if let Some(root) = a.lhs.root_key() {
                    by_root.entry(root).or_default().push((ctx, lvalue_path(&a.lhs)));
                }
            }
        });
    }
    for (root, entries) in &by_root {
        let mut clash = None;
        'outer: for (i, (ci, pi)) in entries.iter().enumerate() {
            for (cj, pj) in &entries[i + 1..] {
                if ci != cj && overlaps(pi, pj) {
                    clash = Some((*ci, *cj));
                    break 'outer;
                }
            }
        }
        if let Some((a, b)) = clash {
            diags.push(
                Diagnostic::error(
                    Rule::MultipleDrivers,
                    format!("`{root}` is driven by stmt[{a}] and stmt[{b}]"),
                )
                .in_circuit(circuit),
            );
        }
    }
}

fn empty_body_warnings(def: &CircuitDef, diags: &mut Diagnostics) {
    for (i, s) in def.statements.iter().enumerate() {
        let what = match s {
            Stmt::Sequential { label, body } if body.is_empty() => Some(format!("sequential {label}")),
            Stmt::Combinatorial { body, .. } if body.is_empty() => Some("combinatorial".to_string()),
            Stmt::Fsm(f) => f
                .states
                .iter()
                .find(|st| st.body.is_empty())
                .map(|st| format!("state {}", st.name)),
            _ => None,
        };
        if let Some(w) = what {
            diags.push(
                Diagnostic::warning(Rule::EmptyBody, format!("{w} has an empty body"))
                    .in_circuit(&def.name)
                    .at(format!("stmt[{i}]")),
            );
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Block,
    State,
}

/// Structural checks, the same ones the builder applies incrementally.
fn validate(def: &CircuitDef) -> Diagnostics {
    let mut diags = Diagnostics::new();
    let circuit = def.name.clone();
    let mut err = |rule: Rule, path: String, msg: String| {
        diags.push(Diagnostic::error(rule, msg).in_circuit(&circuit).at(path));
    };

    if !is_identifier(&def.name) {
        err(Rule::InvalidIdentifier, String::new(), format!("`{}` is not a legal circuit name", def.name));
    }

    let mut type_names = HashSet::new();
    for t in &def.typedefs {
        if !is_identifier(&t.name) {
            err(Rule::InvalidIdentifier, format!("typedef {}", t.name), format!("`{}` is not a legal identifier", t.name));
        }
        if !type_names.insert(t.name.as_str()) || crate::ir::builtin(&t.name).is_some() {
            err(Rule::DuplicateName, format!("typedef {}", t.name), format!("type `{}` is already defined", t.name));
        }
        if let Some(m) = t.desc.shape_error() {
            err(Rule::InvalidWidth, format!("typedef {}", t.name), m);
        }
        if let Err(d) = def.resolve_type(&TypeDesc::Alias(t.name.clone())) {
            err(d.rule, format!("typedef {}", t.name), d.message);
        }
    }

    let mut names = HashSet::new();
    let decls = def
        .ports
        .iter()
        .map(|p| (p.name.as_str(), Some(&p.ty), true))
        .chain(def.wires.iter().map(|w| (w.name.as_str(), Some(&w.ty), false)))
        .chain(def.instances.iter().map(|i| (i.name.as_str(), None, false)));
    for (n, ty, is_port) in decls {
        if !is_identifier(n) {
            err(Rule::InvalidIdentifier, n.to_string(), format!("`{n}` is not a legal identifier"));
        }
        if !names.insert(n) {
            err(Rule::DuplicateName, n.to_string(), format!("`{n}` is declared twice"));
        }
        let Some(ty) = ty else { continue };
        if contains_literal_type(ty) || (is_port && matches!(ty, TypeDesc::Enum { .. })) {
            err(Rule::LiteralType, n.to_string(), format!("type {ty} cannot be declared here"));
            continue;
        }
        if let Some(m) = ty.shape_error() {
            err(Rule::InvalidWidth, n.to_string(), m);
        } else if let Err(d) = def.resolve_type(ty) {
            err(d.rule, n.to_string(), d.message);
        }
    }

    let mut labels = HashSet::new();
    for (i, s) in def.statements.iter().enumerate() {
        let label = match s {
            Stmt::Sequential { label, .. } | Stmt::Combinatorial { label: Some(label), .. } => Some(label.clone()),
            Stmt::Fsm(f) => Some(f.label.clone()),
            _ => None,
        };
        if let Some(l) = label {
            if !is_identifier(&l) {
                err(Rule::InvalidIdentifier, format!("stmt[{i}]"), format!("`{l}` is not a legal label"));
            }
            if !labels.insert(l.clone()) {
                err(Rule::DuplicateName, format!("stmt[{i}]"), format!("label `{l}` is used twice"));
            }
        }
        check_stmt(def, s, Ctx::Top, None, &format!("stmt[{i}]"), &mut err);
    }
    diags
}

fn contains_literal_type(ty: &TypeDesc) -> bool {
    match ty {
        TypeDesc::RUInt(_) => true,
        TypeDesc::Record(f) => f.iter().any(|(_, t)| contains_literal_type(t) || matches!(t, TypeDesc::Enum { .. })),
        TypeDesc::Array(_, e) => contains_literal_type(e) || matches!(**e, TypeDesc::Enum { .. }),
        _ => false,
    }
}

fn check_refs(def: &CircuitDef, e: &Expr, path: &str, err: &mut dyn FnMut(Rule, String, String)) {
    e.for_each_ref(&mut |r| {
        if def.lookup(r).is_none() {
            err(Rule::UnresolvedRef, path.to_string(), format!("`{r}` does not name a signal"));
        }
    });
}

fn check_target(def: &CircuitDef, lhs: &Expr, path: &str, err: &mut dyn FnMut(Rule, String, String)) {
    let Some(root) = lhs.root() else {
        err(Rule::IllegalTarget, path.to_string(), format!("`{lhs}` cannot be assigned"));
        return;
    };
    check_refs(def, lhs, path, err);
    match def.lookup(root).map(|(_, k)| k) {
        Some(SignalKind::Input) => err(Rule::IllegalTarget, path.to_string(), format!("input `{root}` cannot be driven")),
        Some(SignalKind::InstancePort(Direction::Output)) => err(
            Rule::IllegalTarget,
            path.to_string(),
            format!("output `{root}` of a child instance cannot be driven"),
        ),
        _ => {}
    }
}

fn check_stmt(
    def: &CircuitDef,
    s: &Stmt,
    ctx: Ctx,
    states: Option<&[String]>,
    path: &str,
    err: &mut dyn FnMut(Rule, String, String),
) {
    let inner = if ctx == Ctx::State { Ctx::State } else { Ctx::Block };
    let p = path.to_string();
    let each = |stmts: &[Stmt], part: &str, ctx: Ctx, err: &mut dyn FnMut(Rule, String, String)| {
        for (j, s) in stmts.iter().enumerate() {
            check_stmt(def, s, ctx, states, &format!("{path}.{part}[{j}]"), err);
        }
    };
    match s {
        Stmt::Assign(a) => {
            check_target(def, &a.lhs, path, err);
            check_refs(def, &a.rhs, path, err);
        }
        Stmt::CombAssign(a) => {
            if ctx != Ctx::State {
                err(Rule::Misplaced, p.clone(), "comb_assign is only legal inside an fsm state".into());
            }
            check_target(def, &a.lhs, path, err);
            check_refs(def, &a.rhs, path, err);
        }
        Stmt::NextState(target) => match states {
            Some(st) if ctx == Ctx::State => {
                if !st.contains(target) {
                    err(Rule::UnknownState, p, format!("no state named `{target}`"));
                }
            }
            _ => err(Rule::Misplaced, p, "next_state is only legal inside an fsm state".into()),
        },
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            if ctx == Ctx::Top {
                err(Rule::Misplaced, p.clone(), "if must appear inside a block".into());
            }
            check_refs(def, cond, path, err);
            each(then_body, "then", inner, err);
            each(else_body, "else", inner, err);
        }
        Stmt::Case {
            selector,
            arms,
            default,
        } => {
            if ctx == Ctx::Top {
                err(Rule::Misplaced, p.clone(), "case must appear inside a block".into());
            }
            check_refs(def, selector, path, err);
            for (j, a) in arms.iter().enumerate() {
                if arms[..j].iter().any(|b| b.choice == a.choice) {
                    err(Rule::DuplicateArm, p.clone(), format!("choice {:?} appears twice", a.choice));
                }
                each(&a.body, &format!("when[{j}]"), inner, err);
            }
            each(default, "default", inner, err);
        }
        Stmt::Sequential { body, .. } | Stmt::Combinatorial { body, .. } => {
            if ctx != Ctx::Top {
                err(Rule::NestedBlock, p, "blocks must appear at circuit top level".into());
            }
            each(body, "body", Ctx::Block, err);
        }
        Stmt::Fsm(fsm) => {
            if ctx != Ctx::Top {
                err(Rule::NestedBlock, p.clone(), "fsm must appear at circuit top level".into());
            }
            if fsm.states.is_empty() {
                err(Rule::NoStates, p.clone(), format!("fsm `{}` declares no states", fsm.label));
            }
            let names: Vec<String> = fsm.states.iter().map(|s| s.name.clone()).collect();
            for (j, st) in fsm.states.iter().enumerate() {
                if !is_identifier(&st.name) {
                    err(Rule::InvalidIdentifier, p.clone(), format!("`{}` is not a legal state name", st.name));
                }
                if names[..j].contains(&st.name) {
                    err(Rule::DuplicateName, p.clone(), format!("state `{}` is declared twice", st.name));
                }
            }
            for a in &fsm.defaults {
                check_target(def, &a.lhs, path, err);
                check_refs(def, &a.rhs, path, err);
            }
            for (j, st) in fsm.states.iter().enumerate() {
                for (k, s) in st.body.iter().enumerate() {
                    check_stmt(def, s, Ctx::State, Some(&names), &format!("{path}.state[{j}][{k}]"), err);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Assign, AssignKind, CircuitBuilder};

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
    fn half_adder_elaborates() {
        let e = elaborate(&half_adder()).unwrap();
        assert_eq!(e.statements.len(), 2);
        assert!(!e.has_registers());
        let edges: Vec<_> = e.graph.edges().into_iter().map(|(a, b, _)| (a, b)).collect();
        assert_eq!(
            edges,
            vec![
                ("a".into(), "cout".into()),
                ("a".into(), "sum".into()),
                ("b".into(), "cout".into()),
                ("b".into(), "sum".into())
            ]
        );
    }

    #[test]
    fn multiple_drivers() {
        let mut c = half_adder();
        c.statements.push(Stmt::Assign(Assign {
            lhs: Expr::sig("sum"),
            rhs: Expr::sig("a"),
            kind: AssignKind::Continuous,
        }));
        let ds = elaborate(&c).unwrap_err();
        assert!(ds.iter().any(|d| d.rule == Rule::MultipleDrivers));
    }

    #[test]
    fn combinational_loop() {
        let mut b = CircuitBuilder::new("loop");
        let x = b.wire("x", "bit").unwrap();
        let y = b.wire("y", "bit").unwrap();
        b.assign(&x, &y).unwrap();
        b.assign(&y, &x).unwrap();
        let ds = elaborate(&b.finish().unwrap()).unwrap_err();
        let d = ds.iter().find(|d| d.rule == Rule::CombinationalCycle).unwrap();
        assert!(d.message.contains("x, y"));
    }

    #[test]
    fn collects_every_type_error() {
        let mut b = CircuitBuilder::new("t");
        let f1 = b.wire("f1", "bit").unwrap();
        let f2 = b.wire("f2", "bit").unwrap();
        b.assign(&f1, 42).unwrap();
        b.assign(&f2, 7).unwrap();
        let ds = elaborate(&b.finish().unwrap()).unwrap_err();
        assert_eq!(ds.errors().count(), 2);
        assert!(ds.iter().all(|d| d.rule == Rule::LiteralTooWide && d.circuit == "t"));
    }

    #[test]
    fn manual_def_structure_is_checked() {
        let mut c = CircuitDef::new("bad");
        c.statements.push(Stmt::NextState("s0".into()));
        c.statements.push(Stmt::Assign(Assign {
            lhs: Expr::sig("nope"),
            rhs: Expr::lit(0),
            kind: AssignKind::Continuous,
        }));
        let ds = elaborate(&c).unwrap_err();
        let rules: Vec<Rule> = ds.iter().map(|d| d.rule).collect();
        assert!(rules.contains(&Rule::Misplaced));
        assert!(rules.contains(&Rule::UnresolvedRef));
    }
}
