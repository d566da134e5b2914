// SPDX-License-Identifier: Apache-2.0
//! Structural VHDL-93 emission. Each circuit definition becomes one entity
//! with a single `rtl` architecture; children are instantiated with
//! `entity work.<child>_c`, never inlined.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use super::support::{emit_support_package, SUPPORT_PACKAGE};
use super::{EmissionUnit, UnitKind};
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::elaborate::{ElaboratedCircuit, TAssign, TStmt};
use crate::ir::{builtin, BinOp, Choice, Direction, TypeDesc, UnOp};
use crate::typesys::{Conversion, Plan, PlanNode};

/// Names of the implicit clock and reset ports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VhdlOptions {
    pub clock: String,
    /// Asynchronous, active low.
    pub reset: String,
    /// Synchronous, active high.
    pub sreset: String,
}

impl Default for VhdlOptions {
    fn default() -> Self {
        VhdlOptions {
            clock: "clk".into(),
            reset: "reset_n".into(),
            sreset: "sreset".into(),
        }
    }
}

const RESERVED: &[&str] = &[
    "abs", "access", "after", "alias", "all", "and", "architecture", "array", "assert",
    "attribute", "begin", "block", "body", "buffer", "bus", "case", "component",
    "configuration", "constant", "disconnect", "downto", "else", "elsif", "end", "entity",
    "exit", "file", "for", "function", "generate", "generic", "group", "guarded", "if",
    "impure", "in", "inertial", "inout", "is", "label", "library", "linkage", "literal",
    "loop", "map", "mod", "nand", "new", "next", "nor", "not", "null", "of", "on", "open",
    "or", "others", "out", "package", "port", "postponed", "procedure", "process", "pure",
    "range", "record", "register", "reject", "rem", "report", "return", "rol", "ror",
    "select", "severity", "shared", "signal", "sla", "sll", "sra", "srl", "subtype", "then",
    "to", "transport", "type", "unaffected", "units", "until", "use", "variable", "wait",
    "when", "while", "with", "xnor", "xor",
    // names the generated code relies on
    "ieee", "std", "work", "std_logic", "std_logic_vector", "signed", "unsigned", "natural",
    "integer", "boolean", "resize", "to_bv", "to_uint", "to_sl", "to_integer", "to_signed",
    "to_unsigned", "rising_edge", "rtl", "rtlforge_support",
];

fn is_basic(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.contains("__")
        && !name.ends_with('_')
}

/// VHDL spelling of an IR identifier: lowercased, or an extended
/// identifier when the name is not a legal basic identifier.
pub fn vhdl_identifier(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    if is_basic(name) && !RESERVED.contains(&lower.as_str()) {
        lower
    } else {
        format!("\\{name}\\")
    }
}

pub fn entity_name(circuit: &str) -> String {
    vhdl_identifier(&format!("{}_c", circuit.to_ascii_lowercase()))
}

fn package_name(circuit: &str) -> String {
    vhdl_identifier(&format!("{}_pkg", circuit.to_ascii_lowercase()))
}

fn file_stem(circuit: &str) -> String {
    circuit.to_ascii_lowercase()
}

/// One per-circuit VHDL namespace; VHDL is case-insensitive.
#[derive(Default)]
struct Namespace {
    taken: HashMap<String, String>,
}

impl Namespace {
    fn key(ident: &str) -> String {
        if ident.starts_with('\\') {
            ident.to_string()
        } else {
            ident.to_ascii_lowercase()
        }
    }

    fn claim(&mut self, ident: &str, what: &str) -> Result<(), String> {
        let k = Self::key(ident);
        if let Some(prev) = self.taken.get(&k) {
            return Err(format!("VHDL name `{ident}` of {what} collides with {prev}"));
        }
        self.taken.insert(k, what.to_string());
        Ok(())
    }

    fn contains(&self, ident: &str) -> bool {
        self.taken.contains_key(&Self::key(ident))
    }

    /// `base`, or `base_N` for the first free `N`.
    fn fresh(&mut self, base: &str, what: &str) -> String {
        let mut cand = vhdl_identifier(base);
        let mut n = 1;
        while self.contains(&cand) {
            cand = vhdl_identifier(&format!("{base}_{n}"));
            n += 1;
        }
        self.taken.insert(Self::key(&cand), what.to_string());
        cand
    }
}

struct Entity<'a> {
    elab: &'a ElaboratedCircuit,
    opts: &'a VhdlOptions,
    ns: Namespace,
    /// IR signal key to VHDL signal name (after shadowing).
    signal: HashMap<String, String>,
    pkg_types: Vec<String>,
    arch_types: Vec<String>,
    errors: Diagnostics,
}

fn vector(kind: &str, w: u32) -> String {
    format!("{kind}({} downto 0)", w.saturating_sub(1))
}

fn bit_string(value: u64, width: u32) -> String {
    let bits: String = (0..width)
        .rev()
        .map(|i| if i < 64 && (value >> i) & 1 == 1 { '1' } else { '0' })
        .collect();
    format!("\"{bits}\"")
}

impl<'a> Entity<'a> {
    fn err(&mut self, rule: Rule, msg: String) {
        self.errors
            .push(Diagnostic::error(rule, msg).in_circuit(self.elab.name()));
    }

    fn claim(&mut self, ident: &str, what: &str) {
        if let Err(m) = self.ns.claim(ident, what) {
            self.err(Rule::NameCollision, m);
        }
    }

    /// Type mark for a declared type. Anonymous composites are hoisted
    /// into a named type; `in_package` selects where.
    fn type_mark(&mut self, ty: &TypeDesc, hint: &str, in_package: bool) -> String {
        match ty {
            TypeDesc::Bit => "std_logic".into(),
            TypeDesc::BitVector(w) => vector("std_logic_vector", *w),
            TypeDesc::Unsigned(w) => vector("unsigned", *w),
            TypeDesc::Signed(w) => vector("signed", *w),
            TypeDesc::Enum { name, .. } => vhdl_identifier(name),
            TypeDesc::Alias(n) => match builtin(n) {
                Some(b) => self.type_mark(&b, hint, in_package),
                None => vhdl_identifier(n),
            },
            TypeDesc::Record(_) | TypeDesc::Array(..) => {
                let name = self.ns.fresh(&format!("{hint}_t"), "a generated type");
                let decl = self.type_decl(&name, ty, in_package);
                if in_package {
                    self.pkg_types.push(decl);
                } else {
                    self.arch_types.push(decl);
                }
                name
            }
            TypeDesc::RUInt(_) => {
                self.err(Rule::Unsupported, "literal type cannot be declared".into());
                "integer".into()
            }
        }
    }

    fn type_decl(&mut self, name: &str, desc: &TypeDesc, in_package: bool) -> String {
        let bare = name.trim_matches('\\');
        match desc {
            TypeDesc::Record(fields) => {
                let mut s = format!("  type {name} is record\n");
                for (f, t) in fields {
                    let mark = self.type_mark(t, &format!("{bare}_{f}"), in_package);
                    let _ = writeln!(s, "    {} : {mark};", vhdl_identifier(f));
                }
                s.push_str("  end record;\n");
                s
            }
            TypeDesc::Array(len, elem) => {
                let mark = self.type_mark(elem, &format!("{bare}_elem"), in_package);
                format!("  type {name} is array (0 to {}) of {mark};\n", len.saturating_sub(1))
            }
            other => {
                let mark = self.type_mark(other, bare, in_package);
                format!("  subtype {name} is {mark};\n")
            }
        }
    }

    fn zero(&self, ty: &TypeDesc) -> String {
        match ty {
            TypeDesc::Bit => "'0'".into(),
            TypeDesc::Enum { states, .. } => vhdl_identifier(&states[0]),
            TypeDesc::Record(fields) => {
                let parts: Vec<String> = fields
                    .iter()
                    .map(|(f, t)| format!("{} => {}", vhdl_identifier(f), self.zero(t)))
                    .collect();
                format!("({})", parts.join(", "))
            }
            TypeDesc::Array(_, elem) => format!("(others => {})", self.zero(elem)),
            _ => "(others=>'0')".into(),
        }
    }

    fn name_of(&self, key: &str) -> String {
        self.signal.get(key).cloned().unwrap_or_else(|| vhdl_identifier(key))
    }

    fn literal(&self, v: u64, ty: &TypeDesc) -> String {
        match ty {
            TypeDesc::Bit => format!("'{}'", v & 1),
            _ => v.to_string(),
        }
    }

    /// Integer-valued rendering of an index plan.
    fn index_value(&self, p: &Plan) -> String {
        if let PlanNode::Lit(v) = p.node {
            return v.to_string();
        }
        let s = self.value(p);
        match p.ty {
            TypeDesc::Bit => format!("to_integer(to_uint({s},1))"),
            TypeDesc::Unsigned(_) => format!("to_integer({s})"),
            _ => format!("to_integer(unsigned({s}))"),
        }
    }

    fn base(&self, p: &Plan) -> String {
        match &p.node {
            PlanNode::Lit(v) => self.literal(*v, &p.natural),
            PlanNode::Ref(n) => self.name_of(n),
            PlanNode::PortRef(i, n) => self.name_of(&format!("{i}.{n}")),
            PlanNode::State { name, .. } => vhdl_identifier(name),
            PlanNode::Unary(UnOp::Not, x) => format!("(not {})", self.value(x)),
            PlanNode::Unary(UnOp::Neg, x) => format!("(-{})", self.value(x)),
            PlanNode::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::And => "and",
                    BinOp::Or => "or",
                    BinOp::Xor => "xor",
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Eq => "=",
                    BinOp::Neq => "/=",
                    BinOp::Lt => "<",
                    BinOp::Gt => ">",
                    BinOp::Le => "<=",
                    BinOp::Ge => ">=",
                };
                let inner = format!("({} {sym} {})", self.value(l), self.value(r));
                if op.is_comparison() {
                    format!("to_sl{inner}")
                } else {
                    inner
                }
            }
            PlanNode::Index(b, i) => format!("{}({})", self.value(b), self.index_value(i)),
            PlanNode::Field(b, f) => format!("{}.{}", self.value(b), vhdl_identifier(f)),
            PlanNode::Aggregate(fields) => {
                let parts: Vec<String> = fields
                    .iter()
                    .map(|(f, e)| format!("{} => {}", vhdl_identifier(f), self.value(e)))
                    .collect();
                format!("({})", parts.join(", "))
            }
        }
    }

    /// Rendering of a plan in its context type, conversions applied.
    fn value(&self, p: &Plan) -> String {
        let mut s;
        let mut cur = p.natural.clone();
        let mut convs = p.conversions.as_slice();
        match (&p.node, convs.first()) {
            (PlanNode::Lit(v), Some(Conversion::Resize(w))) => {
                s = if *v <= i32::MAX as u64 {
                    format!("to_bv({v},{w})")
                } else {
                    bit_string(*v, *w)
                };
                cur = TypeDesc::BitVector(*w);
                convs = &convs[1..];
            }
            _ => s = self.base(p),
        }
        for c in convs {
            match *c {
                Conversion::Resize(w) => {
                    s = format!("resize({s},{w})");
                    cur = match cur {
                        TypeDesc::Unsigned(_) => TypeDesc::Unsigned(w),
                        TypeDesc::Signed(_) => TypeDesc::Signed(w),
                        _ => TypeDesc::BitVector(w),
                    };
                }
                Conversion::ToSigned(w) => {
                    s = format!("signed({s})");
                    cur = TypeDesc::Signed(w);
                }
                Conversion::ToUnsigned(w) => {
                    s = format!("unsigned({s})");
                    cur = TypeDesc::Unsigned(w);
                }
                Conversion::BitToUint(w) => {
                    s = format!("to_uint({s},{w})");
                    cur = TypeDesc::Unsigned(w);
                }
            }
        }
        if let (PlanNode::Lit(v), true) = (&p.node, p.conversions.is_empty()) {
            return self.literal(*v, &p.ty);
        }
        match (&cur, &p.ty) {
            (TypeDesc::Unsigned(_) | TypeDesc::Signed(_), TypeDesc::BitVector(_)) => {
                format!("std_logic_vector({s})")
            }
            (TypeDesc::BitVector(_), TypeDesc::Bit) => format!("to_sl({s})"),
            (TypeDesc::Unsigned(_) | TypeDesc::Signed(_), TypeDesc::Bit) => {
                format!("to_sl(std_logic_vector({s}))")
            }
            (TypeDesc::Signed(_), TypeDesc::Unsigned(_)) => format!("unsigned({s})"),
            (TypeDesc::Unsigned(_), TypeDesc::Signed(_)) => format!("signed({s})"),
            _ => s,
        }
    }

    /// Assignment right-hand side: outer parentheses dropped.
    fn rhs(&self, p: &Plan) -> String {
        let s = self.value(p);
        let outer = matches!(p.node, PlanNode::Binary(op, ..) if !op.is_comparison())
            || matches!(p.node, PlanNode::Unary(..));
        if outer && p.conversions.is_empty() && p.natural == p.ty {
            strip_parens(&s)
        } else {
            s
        }
    }

    fn condition(&self, p: &Plan) -> String {
        match (&p.node, &p.ty) {
            (PlanNode::Lit(v), _) => if *v != 0 { "true" } else { "false" }.into(),
            (PlanNode::Binary(op, ..), TypeDesc::Bit) if op.is_comparison() && p.conversions.is_empty() => {
                self.base(p)["to_sl".len()..].to_string()
            }
            (_, TypeDesc::Bit) => format!("({} = '1')", self.value(p)),
            (_, TypeDesc::Unsigned(_)) => format!("({} = 1)", self.value(p)),
            _ => format!("({} = \"1\")", self.value(p)),
        }
    }

    fn choice(&self, c: &Choice, selector: &Plan) -> String {
        match c {
            Choice::State(s) => vhdl_identifier(s),
            Choice::Value(v) => match selector.ty {
                TypeDesc::Bit => format!("'{}'", v & 1),
                TypeDesc::BitVector(w) | TypeDesc::Unsigned(w) | TypeDesc::Signed(w) => {
                    bit_string(*v, w)
                }
                TypeDesc::Enum { ref states, .. } => states
                    .get(*v as usize)
                    .map(|s| vhdl_identifier(s))
                    .unwrap_or_else(|| v.to_string()),
                _ => v.to_string(),
            },
        }
    }

    fn body(&self, out: &mut String, stmts: &[TStmt], depth: usize) {
        if stmts.is_empty() {
            indent(out, depth);
            out.push_str("null;\n");
        }
        for s in stmts {
            self.stmt(out, s, depth);
        }
    }

    fn assign(&self, out: &mut String, a: &TAssign, depth: usize) {
        indent(out, depth);
        let _ = writeln!(out, "{} <= {};", self.value(&a.lhs), self.rhs(&a.rhs));
    }

    fn stmt(&self, out: &mut String, s: &TStmt, depth: usize) {
        match s {
            TStmt::Assign(a) => self.assign(out, a, depth),
            TStmt::If {
                cond,
                then_body,
                else_body,
            } => {
                indent(out, depth);
                let _ = writeln!(out, "if {} then", self.condition(cond));
                self.body(out, then_body, depth + 1);
                if !else_body.is_empty() {
                    indent(out, depth);
                    out.push_str("else\n");
                    self.body(out, else_body, depth + 1);
                }
                indent(out, depth);
                out.push_str("end if;\n");
            }
            TStmt::Case {
                selector,
                arms,
                default,
            } => {
                indent(out, depth);
                let _ = writeln!(out, "case {} is", self.value(selector));
                for arm in arms {
                    indent(out, depth + 1);
                    let _ = writeln!(out, "when {} =>", self.choice(&arm.choice, selector));
                    self.body(out, &arm.body, depth + 2);
                }
                indent(out, depth + 1);
                out.push_str("when others =>\n");
                self.body(out, default, depth + 2);
                indent(out, depth);
                out.push_str("end case;\n");
            }
            TStmt::Sequential { .. } | TStmt::Combinatorial { .. } => {
                unreachable!("blocks only occur at circuit level")
            }
        }
    }

    fn resets(&self, out: &mut String, roots: &[String], depth: usize) {
        for r in roots {
            let ty = &self.elab.symbols.get(r).expect("assigned root has a symbol").ty;
            indent(out, depth);
            let _ = writeln!(out, "{} <= {};", self.name_of(r), self.zero(ty));
        }
    }

    fn sequential(&self, out: &mut String, label: &str, body: &[TStmt]) {
        let mut roots: Vec<String> = Vec::new();
        for s in body {
            for r in s.assigned_roots() {
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        // state registers reset first
        roots.sort_by_key(|r| self.elab.state_register(r).is_none());
        let VhdlOptions { clock, reset, sreset } = self.opts;
        let (clock, reset, sreset) = (vhdl_identifier(clock), vhdl_identifier(reset), vhdl_identifier(sreset));
        let _ = writeln!(out, "  {} : process({reset},{clock})", vhdl_identifier(label));
        out.push_str("  begin\n");
        let _ = writeln!(out, "    if {reset}='0' then");
        self.resets(out, &roots, 3);
        let _ = writeln!(out, "    elsif rising_edge({clock}) then");
        let _ = writeln!(out, "      if {sreset}='1' then");
        self.resets(out, &roots, 4);
        out.push_str("      else\n");
        self.body(out, body, 4);
        out.push_str("      end if;\n");
        out.push_str("    end if;\n");
        out.push_str("  end process;\n");
    }

    fn combinatorial(&self, out: &mut String, label: Option<&str>, body: &[TStmt]) {
        let mut reads = Vec::new();
        for s in body {
            reads.extend(s.reads());
        }
        let mut seen = HashSet::new();
        let sens: Vec<String> = reads
            .into_iter()
            .filter(|r| seen.insert(r.clone()))
            .map(|r| self.name_of(&r))
            .collect();
        out.push_str("  ");
        if let Some(l) = label {
            let _ = write!(out, "{} : ", vhdl_identifier(l));
        }
        if sens.is_empty() {
            out.push_str("process\n");
        } else {
            let _ = writeln!(out, "process({})", sens.join(","));
        }
        out.push_str("  begin\n");
        self.body(out, body, 2);
        if sens.is_empty() {
            out.push_str("    wait;\n");
        }
        out.push_str("  end process;\n");
    }
}

fn strip_parens(s: &str) -> String {
    if !(s.starts_with('(') && s.ends_with(')')) {
        return s.to_string();
    }
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i + 1 != s.len() {
                    return s.to_string();
                }
            }
            _ => {}
        }
    }
    s[1..s.len() - 1].to_string()
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Circuits reachable from `top`, dependencies first, each once.
fn definitions(top: &ElaboratedCircuit) -> Vec<&ElaboratedCircuit> {
    fn visit<'a>(c: &'a ElaboratedCircuit, seen: &mut BTreeSet<String>, out: &mut Vec<&'a ElaboratedCircuit>) {
        for child in &c.children {
            visit(child.as_ref(), seen, out);
        }
        if seen.insert(c.name().to_string()) {
            out.push(c);
        }
    }
    let mut out = Vec::new();
    visit(top, &mut BTreeSet::new(), &mut out);
    out
}

fn has_package(c: &ElaboratedCircuit) -> bool {
    c.lowered.typedefs.iter().any(|t| t.in_package)
}

const PREAMBLE: &str = "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n";

fn emit_entity(elab: &ElaboratedCircuit, opts: &VhdlOptions) -> Result<Vec<EmissionUnit>, Diagnostics> {
    let def = &elab.lowered;
    let mut e = Entity {
        elab,
        opts,
        ns: Namespace::default(),
        signal: HashMap::new(),
        pkg_types: Vec::new(),
        arch_types: Vec::new(),
        errors: Diagnostics::new(),
    };
    let ent = entity_name(&def.name);
    e.claim(&ent, "the entity");
    let registers = elab.has_registers();
    let implicit = [&opts.clock, &opts.reset, &opts.sreset];
    if registers {
        for n in implicit {
            e.claim(&vhdl_identifier(n), "an implicit clock or reset port");
        }
    }
    for t in &def.typedefs {
        e.claim(&vhdl_identifier(&t.name), &format!("typedef `{}`", t.name));
    }
    for p in &def.ports {
        e.claim(&vhdl_identifier(&p.name), &format!("port `{}`", p.name));
        e.signal.insert(p.name.clone(), vhdl_identifier(&p.name));
    }
    for w in &def.wires {
        e.claim(&vhdl_identifier(&w.name), &format!("signal `{}`", w.name));
        e.signal.insert(w.name.clone(), vhdl_identifier(&w.name));
        if let TypeDesc::Enum { name, .. } = &w.ty {
            e.claim(&vhdl_identifier(name), &format!("state type `{name}`"));
        }
    }
    for i in &def.instances {
        e.claim(&vhdl_identifier(&i.name), &format!("instance `{}`", i.name));
    }
    for s in &elab.statements {
        let label = match s {
            TStmt::Sequential { label, .. } => Some(label),
            TStmt::Combinatorial { label: Some(l), .. } => Some(l),
            _ => None,
        };
        if let Some(l) = label {
            e.claim(&vhdl_identifier(l), &format!("process `{l}`"));
        }
    }
    let state_literals: BTreeSet<String> = def
        .wires
        .iter()
        .filter_map(|w| match &w.ty {
            TypeDesc::Enum { states, .. } => Some(states.iter().map(|s| vhdl_identifier(s))),
            _ => None,
        })
        .flatten()
        .collect();
    for lit in &state_literals {
        if let Some(prev) = e.ns.taken.get(&Namespace::key(lit)).cloned() {
            e.err(Rule::NameCollision, format!("state `{lit}` collides with {prev}"));
        }
    }

    // outputs read inside the architecture get an internal shadow
    let mut reads = Vec::new();
    for s in &elab.statements {
        match s {
            TStmt::Sequential { body, .. } | TStmt::Combinatorial { body, .. } => {
                body.iter().for_each(|s| reads.extend(s.reads()))
            }
            other => reads.extend(other.reads()),
        }
    }
    let read: HashSet<String> = reads.into_iter().collect();
    let mut shadows = Vec::new();
    for p in &def.ports {
        if p.direction == Direction::Output && read.contains(&p.name) {
            let s = e.ns.fresh(&format!("{}_int", p.name), "an output shadow");
            e.signal.insert(p.name.clone(), s.clone());
            shadows.push((p, s));
        }
    }

    // instance port signals
    let mut inst_signals = Vec::new();
    for i in &def.instances {
        let child = elab.instance_child(&i.name).expect("elaborated child");
        for p in &child.lowered.ports {
            let s = e.ns.fresh(&format!("{}_{}", i.name, p.name), "an instance port signal");
            e.signal.insert(format!("{}.{}", i.name, p.name), s.clone());
            inst_signals.push((i, child, p, s));
        }
    }

    // types
    let mut pkg_decls = String::new();
    let mut arch_decls = String::new();
    for t in &def.typedefs {
        let decl = e.type_decl(&vhdl_identifier(&t.name), &t.desc, t.in_package);
        let hoisted = std::mem::take(if t.in_package { &mut e.pkg_types } else { &mut e.arch_types });
        let target = if t.in_package { &mut pkg_decls } else { &mut arch_decls };
        hoisted.iter().for_each(|h| target.push_str(h));
        target.push_str(&decl);
    }
    let mut port_lines = Vec::new();
    for p in &def.ports {
        let mark = e.type_mark(&p.ty, &p.name, true);
        let mode = match p.direction {
            Direction::Input => "in",
            Direction::Output => "out",
        };
        port_lines.push(format!("    {} : {mode} {mark}", vhdl_identifier(&p.name)));
    }
    if registers {
        for n in implicit {
            port_lines.push(format!("    {} : in std_logic", vhdl_identifier(n)));
        }
    }
    let mut signal_lines = String::new();
    for w in &def.wires {
        if let TypeDesc::Enum { name, states } = &w.ty {
            let lits: Vec<String> = states.iter().map(|s| vhdl_identifier(s)).collect();
            let _ = writeln!(arch_decls, "  type {} is ({});", vhdl_identifier(name), lits.join(","));
        }
        let mark = e.type_mark(&w.ty, &w.name, false);
        let _ = writeln!(signal_lines, "  signal {} : {mark};", vhdl_identifier(&w.name));
    }
    for (p, s) in &shadows {
        let mark = e.type_mark(&p.ty, &p.name, true);
        let _ = writeln!(signal_lines, "  signal {s} : {mark};");
    }
    let mut child_packages = BTreeSet::new();
    for (_, child, p, s) in &inst_signals {
        let composite = matches!(child.lowered.resolve_type(&p.ty), Ok(t) if !t.is_scalar());
        if composite {
            if has_package(child) && matches!(p.ty, TypeDesc::Alias(_)) {
                child_packages.insert(package_name(child.name()));
            } else {
                e.err(
                    Rule::Unsupported,
                    format!(
                        "port `{}` of `{}` needs a packaged type to be connected",
                        p.name,
                        child.name()
                    ),
                );
            }
        }
        let mark = match &p.ty {
            TypeDesc::Alias(n) if builtin(n).is_none() => vhdl_identifier(n),
            other => e.type_mark(other, s, false),
        };
        let _ = writeln!(signal_lines, "  signal {s} : {mark};");
    }
    e.pkg_types.drain(..).for_each(|h| pkg_decls.push_str(&h));
    e.arch_types.drain(..).for_each(|h| arch_decls.insert_str(0, &h));

    // architecture body
    let mut body = String::new();
    for s in &elab.statements {
        match s {
            TStmt::Assign(a) => e.assign(&mut body, a, 1),
            TStmt::Sequential { label, body: b } => e.sequential(&mut body, label, b),
            TStmt::Combinatorial { label, body: b } => e.combinatorial(&mut body, label.as_deref(), b),
            other => e.stmt(&mut body, other, 1),
        }
    }
    for (p, s) in &shadows {
        let _ = writeln!(body, "  {} <= {s};", vhdl_identifier(&p.name));
    }
    for i in &def.instances {
        let child = elab.instance_child(&i.name).expect("elaborated child");
        let _ = writeln!(body, "  {} : entity work.{}", vhdl_identifier(&i.name), entity_name(child.name()));
        body.push_str("    port map (\n");
        let mut maps: Vec<String> = child
            .lowered
            .ports
            .iter()
            .map(|p| format!("      {} => {}", vhdl_identifier(&p.name), e.name_of(&format!("{}.{}", i.name, p.name))))
            .collect();
        if child.has_registers() {
            for n in implicit {
                maps.push(format!("      {} => {}", vhdl_identifier(n), vhdl_identifier(n)));
            }
        }
        body.push_str(&maps.join(",\n"));
        body.push_str("\n    );\n");
    }

    if e.errors.has_errors() {
        return Err(e.errors);
    }

    let stem = file_stem(&def.name);
    let mut units = Vec::new();
    let own_package = !pkg_decls.is_empty();
    if own_package {
        let pkg = package_name(&def.name);
        let mut text = String::from(PREAMBLE);
        let _ = write!(text, "\npackage {pkg} is\n{pkg_decls}end package {pkg};\n");
        units.push(EmissionUnit {
            file_name: format!("{stem}_pkg.vhd"),
            kind: UnitKind::TypesPackage,
            text,
        });
    }
    let mut text = String::from(PREAMBLE);
    let _ = writeln!(text, "use work.{SUPPORT_PACKAGE}.all;");
    for p in &child_packages {
        let _ = writeln!(text, "use work.{p}.all;");
    }
    if own_package {
        let _ = writeln!(text, "use work.{}.all;", package_name(&def.name));
    }
    let _ = write!(text, "\nentity {ent} is\n");
    if !port_lines.is_empty() {
        let _ = write!(text, "  port (\n{}\n  );\n", port_lines.join(";\n"));
    }
    let _ = writeln!(text, "end entity {ent};");
    let _ = write!(text, "\narchitecture rtl of {ent} is\n{arch_decls}{signal_lines}begin\n{body}end architecture rtl;\n");
    units.push(EmissionUnit {
        file_name: format!("{stem}_c.vhd"),
        kind: UnitKind::Entity,
        text,
    });
    Ok(units)
}

/// The support package, then for every definition (children first) its
/// types package, if it has one, and its entity.
pub fn emit_vhdl(elab: &ElaboratedCircuit, opts: &VhdlOptions) -> Result<Vec<EmissionUnit>, Diagnostics> {
    let mut units = vec![emit_support_package()];
    let mut errors = Diagnostics::new();
    for def in definitions(elab) {
        match emit_entity(def, opts) {
            Ok(u) => units.extend(u),
            Err(d) => errors.extend(d),
        }
    }
    if errors.has_errors() {
        return Err(errors);
    }
    Ok(units)
}
