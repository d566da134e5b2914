// SPDX-License-Identifier: Apache-2.0
//! Contextual type analysis and automatic conversions.
//!
//! The checker turns an [`Expr`] into a [`Plan`]: the same tree where every
//! node carries its natural type, the type it takes in context, and the
//! conversions inserted to get from one to the other. The rules:
//!
//! 1. A literal of natural width `w` fits a scalar target of width `W` iff
//!    `w <= W`; it is zero-extended.
//! 2. Results of `+`/`-`/negation never go into a `Bit` target.
//! 3. Arithmetic in assignment context runs at the target width with
//!    wraparound; every operand must be at most that wide and is resized.
//! 4. Operands feeding a signed target are wrapped in a to-signed
//!    conversion (likewise to-unsigned for unsigned targets).
//! 5. Bitwise operators need equal widths; a literal takes the width of the
//!    other operand.
//! 6. Comparisons yield `Bit`. A single-bit signal compared to literal 0/1
//!    is viewed as a 1-bit unsigned; otherwise the literal takes the
//!    width of the signal operand.
//!
//! Right-hand sides are constant-folded before checking.

use indexmap::IndexMap;

use crate::diag::{Diagnostic, Rule};
use crate::ir::{literal_width, BinOp, Expr, SignalKind, TypeDesc, UnOp};

type Result<T> = std::result::Result<T, Diagnostic>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conversion {
    /// Widen to `n` bits (zero-extend, sign-extend for signed values).
    Resize(u32),
    ToUnsigned(u32),
    ToSigned(u32),
    /// View a single bit as a 1-bit unsigned number.
    BitToUint(u32),
}

impl Conversion {
    pub fn width(self) -> u32 {
        match self {
            Conversion::Resize(n)
            | Conversion::ToUnsigned(n)
            | Conversion::ToSigned(n)
            | Conversion::BitToUint(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    Lit(u64),
    Ref(String),
    PortRef(String, String),
    /// Enumerated state constant with its position in the enum.
    State { name: String, index: u32 },
    Unary(UnOp, Box<Plan>),
    Binary(BinOp, Box<Plan>, Box<Plan>),
    Index(Box<Plan>, Box<Plan>),
    Field(Box<Plan>, String),
    Aggregate(Vec<(String, Plan)>),
}

/// An expression annotated with types and inserted conversions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub node: PlanNode,
    /// Type of the node before conversions.
    pub natural: TypeDesc,
    /// Type after conversions, i.e. the type in context.
    pub ty: TypeDesc,
    pub conversions: Vec<Conversion>,
}

impl Plan {
    fn new(node: PlanNode, natural: TypeDesc) -> Plan {
        Plan {
            node,
            ty: natural.clone(),
            natural,
            conversions: Vec::new(),
        }
    }

    /// Context width in bits.
    pub fn width(&self) -> u64 {
        self.ty.width().expect("plans carry alias-free types")
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.node, PlanNode::Lit(_))
    }

    pub fn children(&self) -> Vec<&Plan> {
        match &self.node {
            PlanNode::Lit(_) | PlanNode::Ref(_) | PlanNode::PortRef(..) | PlanNode::State { .. } => {
                vec![]
            }
            PlanNode::Unary(_, p) | PlanNode::Field(p, _) => vec![p],
            PlanNode::Binary(_, l, r) | PlanNode::Index(l, r) => vec![l, r],
            PlanNode::Aggregate(fields) => fields.iter().map(|(_, p)| p).collect(),
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Plan)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Every conversion in the tree, pre-order.
    pub fn all_conversions(&self) -> Vec<Conversion> {
        let mut out = Vec::new();
        self.walk(&mut |p| out.extend(p.conversions.iter().copied()));
        out
    }

    /// Signal keys read by this plan (`name` or `inst.port`).
    pub fn reads(&self, out: &mut Vec<String>) {
        self.walk(&mut |p| match &p.node {
            PlanNode::Ref(n) => out.push(n.clone()),
            PlanNode::PortRef(i, n) => out.push(format!("{i}.{n}")),
            _ => {}
        });
    }

    /// Root signal key of an lvalue plan.
    pub fn root_key(&self) -> Option<String> {
        match &self.node {
            PlanNode::Ref(n) => Some(n.clone()),
            PlanNode::PortRef(i, n) => Some(format!("{i}.{n}")),
            PlanNode::Index(b, _) | PlanNode::Field(b, _) => b.root_key(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolInfo {
    /// Fully resolved, alias-free type.
    pub ty: TypeDesc,
    pub kind: SignalKind,
}

/// Resolved signals of one circuit, keyed by `name` or `inst.port`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    entries: IndexMap<String, SymbolInfo>,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, ty: TypeDesc, kind: SignalKind) {
        self.entries.insert(key.into(), SymbolInfo { ty, kind });
    }

    pub fn get(&self, key: &str) -> Option<&SymbolInfo> {
        self.entries.get(key)
    }

    pub fn lookup(&self, e: &Expr) -> Option<&SymbolInfo> {
        self.get(&e.ref_key()?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SymbolInfo)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }
}

/// Bit width of a fully resolved type.
pub fn width_of(ty: &TypeDesc) -> Result<u64> {
    ty.width().ok_or_else(|| {
        Diagnostic::error(
            Rule::UnresolvedType,
            format!("internal: width of unresolved type {ty} requested"),
        )
    })
}

fn const_value(e: &Expr) -> Option<i128> {
    match e {
        Expr::Lit(v) => Some(i128::from(*v)),
        Expr::Unary(UnOp::Neg, inner) => const_value(inner).map(|v| -v),
        _ => None,
    }
}

fn const_expr(v: i128) -> Option<Expr> {
    if let Ok(u) = u64::try_from(v) {
        Some(Expr::Lit(u))
    } else {
        u64::try_from(-v)
            .ok()
            .map(|m| Expr::Unary(UnOp::Neg, Box::new(Expr::Lit(m))))
    }
}

/// Replaces literal-only subtrees by a single literal. Negative results
/// stay in `Unary(Neg, Lit)` form.
pub fn fold_constants(e: &Expr) -> Expr {
    match e {
        Expr::Lit(_) | Expr::Ref(_) | Expr::PortRef(..) | Expr::State(_) => e.clone(),
        Expr::Unary(UnOp::Neg, inner) => {
            let inner = fold_constants(inner);
            match &inner {
                Expr::Unary(UnOp::Neg, x) if matches!(**x, Expr::Lit(_)) => (**x).clone(),
                Expr::Lit(0) => Expr::Lit(0),
                _ => Expr::Unary(UnOp::Neg, Box::new(inner)),
            }
        }
        Expr::Unary(UnOp::Not, inner) => Expr::Unary(UnOp::Not, Box::new(fold_constants(inner))),
        Expr::Binary(op, l, r) => {
            let (l, r) = (fold_constants(l), fold_constants(r));
            if let (Some(a), Some(b)) = (const_value(&l), const_value(&r)) {
                let folded = match op {
                    BinOp::Add => const_expr(a + b),
                    BinOp::Sub => const_expr(a - b),
                    BinOp::Eq => Some(Expr::Lit((a == b) as u64)),
                    BinOp::Neq => Some(Expr::Lit((a != b) as u64)),
                    BinOp::Lt => Some(Expr::Lit((a < b) as u64)),
                    BinOp::Gt => Some(Expr::Lit((a > b) as u64)),
                    BinOp::Le => Some(Expr::Lit((a <= b) as u64)),
                    BinOp::Ge => Some(Expr::Lit((a >= b) as u64)),
                    BinOp::And | BinOp::Or | BinOp::Xor if a >= 0 && b >= 0 => {
                        let (a, b) = (a as u64, b as u64);
                        Some(Expr::Lit(match op {
                            BinOp::And => a & b,
                            BinOp::Or => a | b,
                            _ => a ^ b,
                        }))
                    }
                    _ => None,
                };
                if let Some(f) = folded {
                    return f;
                }
            }
            Expr::Binary(*op, Box::new(l), Box::new(r))
        }
        Expr::Index(b, i) => Expr::Index(Box::new(fold_constants(b)), Box::new(fold_constants(i))),
        Expr::Field(b, n) => Expr::Field(Box::new(fold_constants(b)), n.clone()),
        Expr::Aggregate(fields) => Expr::Aggregate(
            fields
                .iter()
                .map(|(n, e)| (n.clone(), fold_constants(e)))
                .collect(),
        ),
    }
}

/// Typing rank for unifying two operands of the same width.
fn rank(ty: &TypeDesc) -> Option<u8> {
    match ty {
        TypeDesc::Bit => Some(0),
        TypeDesc::BitVector(_) => Some(1),
        TypeDesc::Unsigned(_) => Some(2),
        TypeDesc::Signed(_) => Some(3),
        _ => None,
    }
}

fn is_arithmetic(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Unary(UnOp::Neg, _) | Expr::Binary(BinOp::Add | BinOp::Sub, ..)
    )
}

/// Conversions that bring a literal into a scalar target.
fn literal_conversions(target: &TypeDesc) -> Vec<Conversion> {
    match *target {
        TypeDesc::BitVector(w) => vec![Conversion::Resize(w)],
        TypeDesc::Unsigned(w) => vec![Conversion::Resize(w), Conversion::ToUnsigned(w)],
        TypeDesc::Signed(w) => vec![Conversion::Resize(w), Conversion::ToSigned(w)],
        _ => vec![],
    }
}

struct Checker<'a> {
    syms: &'a SymbolTable,
}

fn sub(path: &str, part: &str) -> String {
    if path.is_empty() {
        part.to_string()
    } else {
        format!("{path}.{part}")
    }
}

fn err(rule: Rule, path: &str, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(rule, msg).at(path.to_string())
}

impl Checker<'_> {
    /// Bottom-up typing with no context.
    fn infer(&self, e: &Expr, path: &str) -> Result<Plan> {
        match e {
            Expr::Lit(v) => Ok(Plan::new(PlanNode::Lit(*v), TypeDesc::RUInt(literal_width(*v)))),
            Expr::Ref(_) | Expr::PortRef(..) => {
                let info = self.syms.lookup(e).ok_or_else(|| {
                    err(Rule::UnresolvedRef, path, format!("`{e}` does not name a signal"))
                })?;
                let node = match e {
                    Expr::Ref(n) => PlanNode::Ref(n.clone()),
                    Expr::PortRef(i, p) => PlanNode::PortRef(i.clone(), p.clone()),
                    _ => unreachable!(),
                };
                Ok(Plan::new(node, info.ty.clone()))
            }
            Expr::State(s) => Err(err(
                Rule::TypeMismatch,
                path,
                format!("state constant `{s}` needs a state register context"),
            )),
            Expr::Unary(UnOp::Not, x) => {
                let p = self.infer(x, &sub(path, "arg"))?;
                if !p.ty.is_scalar() || p.is_literal() {
                    return Err(err(
                        Rule::TypeMismatch,
                        path,
                        format!("`~` needs a signal operand, found {}", p.ty),
                    ));
                }
                let ty = p.ty.clone();
                Ok(Plan::new(PlanNode::Unary(UnOp::Not, Box::new(p)), ty))
            }
            Expr::Unary(UnOp::Neg, _) | Expr::Binary(BinOp::Add | BinOp::Sub, ..) => {
                let target = self.arith_natural(e, path)?;
                self.coerce_arith(e, &target, path)
            }
            Expr::Binary(op, l, r) if op.is_bitwise() => {
                let (pl, pr) = self.unify(l, r, path)?;
                let ty = pl.ty.clone();
                Ok(Plan::new(PlanNode::Binary(*op, Box::new(pl), Box::new(pr)), ty))
            }
            Expr::Binary(op, l, r) => {
                let (pl, pr) = self.compare_operands(l, r, path)?;
                Ok(Plan::new(
                    PlanNode::Binary(*op, Box::new(pl), Box::new(pr)),
                    TypeDesc::Bit,
                ))
            }
            Expr::Index(base, idx) => {
                let pb = self.infer(base, &sub(path, "base"))?;
                match &pb.ty {
                    TypeDesc::Array(len, elem) => {
                        let elem = (**elem).clone();
                        let pi = match fold_constants(idx) {
                            Expr::Lit(i) if i < u64::from(*len) => {
                                Plan::new(PlanNode::Lit(i), TypeDesc::RUInt(literal_width(i)))
                            }
                            Expr::Lit(i) => {
                                return Err(err(
                                    Rule::IndexOutOfRange,
                                    path,
                                    format!("index {i} outside array of length {len}"),
                                ))
                            }
                            other => {
                                let pi = self.infer(&other, &sub(path, "index"))?;
                                if !matches!(
                                    pi.ty,
                                    TypeDesc::Bit | TypeDesc::BitVector(_) | TypeDesc::Unsigned(_)
                                ) {
                                    return Err(err(
                                        Rule::TypeMismatch,
                                        path,
                                        format!("array index must be unsigned, found {}", pi.ty),
                                    ));
                                }
                                pi
                            }
                        };
                        Ok(Plan::new(PlanNode::Index(Box::new(pb), Box::new(pi)), elem))
                    }
                    TypeDesc::BitVector(w) | TypeDesc::Unsigned(w) | TypeDesc::Signed(w) => {
                        let w = *w;
                        match fold_constants(idx) {
                            Expr::Lit(i) if i < u64::from(w) => Ok(Plan::new(
                                PlanNode::Index(
                                    Box::new(pb),
                                    Box::new(Plan::new(
                                        PlanNode::Lit(i),
                                        TypeDesc::RUInt(literal_width(i)),
                                    )),
                                ),
                                TypeDesc::Bit,
                            )),
                            Expr::Lit(i) => Err(err(
                                Rule::IndexOutOfRange,
                                path,
                                format!("bit {i} outside {w}-bit vector"),
                            )),
                            _ => Err(err(
                                Rule::TypeMismatch,
                                path,
                                "bit-vector index must be a constant",
                            )),
                        }
                    }
                    other => Err(err(
                        Rule::TypeMismatch,
                        path,
                        format!("cannot index a value of type {other}"),
                    )),
                }
            }
            Expr::Field(base, name) => {
                let pb = self.infer(base, &sub(path, "base"))?;
                let TypeDesc::Record(fields) = &pb.ty else {
                    return Err(err(
                        Rule::UnknownField,
                        path,
                        format!("`.{name}` on non-record type {}", pb.ty),
                    ));
                };
                let fty = fields
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| {
                        err(Rule::UnknownField, path, format!("record has no field `{name}`"))
                    })?;
                Ok(Plan::new(PlanNode::Field(Box::new(pb), name.clone()), fty))
            }
            Expr::Aggregate(_) => Err(err(
                Rule::TypeMismatch,
                path,
                "record aggregate needs a record-typed context",
            )),
        }
    }

    /// Context type for arithmetic with no assignment target: the widest
    /// operand, signed if any operand is.
    fn arith_natural(&self, e: &Expr, path: &str) -> Result<TypeDesc> {
        let mut width = 1u32;
        let mut signed = false;
        let mut unsigned = false;
        let mut leaves = Vec::new();
        collect_arith_leaves(e, &mut leaves);
        for leaf in leaves {
            if leaf.is_constant() {
                if let Some(v) = const_value(leaf) {
                    width = width.max(literal_width(v.unsigned_abs() as u64));
                }
                continue;
            }
            let p = self.infer(leaf, path)?;
            let w = match &p.ty {
                t if t.is_scalar() => t.width().unwrap_or(1) as u32,
                other => {
                    return Err(err(
                        Rule::TypeMismatch,
                        path,
                        format!("arithmetic on non-scalar type {other}"),
                    ))
                }
            };
            width = width.max(w);
            signed |= p.ty.is_signed();
            unsigned |= matches!(p.ty, TypeDesc::Unsigned(_));
        }
        Ok(if signed {
            TypeDesc::Signed(width)
        } else if unsigned {
            TypeDesc::Unsigned(width)
        } else {
            TypeDesc::BitVector(width)
        })
    }

    /// Arithmetic evaluated at the width of `target` (rule 3).
    fn coerce_arith(&self, e: &Expr, target: &TypeDesc, path: &str) -> Result<Plan> {
        if *target == TypeDesc::Bit {
            return Err(err(
                Rule::ArithmeticIntoBit,
                path,
                format!("arithmetic result `{e}` cannot drive a bit"),
            ));
        }
        let node = match e {
            Expr::Unary(UnOp::Neg, x) => {
                PlanNode::Unary(UnOp::Neg, Box::new(self.arith_operand(x, target, &sub(path, "arg"))?))
            }
            Expr::Binary(op, l, r) => PlanNode::Binary(
                *op,
                Box::new(self.arith_operand(l, target, &sub(path, "lhs"))?),
                Box::new(self.arith_operand(r, target, &sub(path, "rhs"))?),
            ),
            _ => unreachable!("coerce_arith only sees arithmetic nodes"),
        };
        Ok(Plan::new(node, target.clone()))
    }

    fn arith_operand(&self, e: &Expr, target: &TypeDesc, path: &str) -> Result<Plan> {
        if is_arithmetic(e) {
            return self.coerce_arith(e, target, path);
        }
        if let Expr::Lit(v) = e {
            return self.coerce_literal(*v, target, path);
        }
        let p = self.infer(e, path)?;
        self.fit(p, target, path)
    }

    fn coerce_literal(&self, v: u64, target: &TypeDesc, path: &str) -> Result<Plan> {
        let w = literal_width(v);
        let tw = match target {
            t if t.is_scalar() && !matches!(t, TypeDesc::RUInt(_)) => t.width().unwrap_or(0),
            other => {
                return Err(err(
                    Rule::TypeMismatch,
                    path,
                    format!("literal {v} cannot have type {other}"),
                ))
            }
        };
        if u64::from(w) > tw {
            return Err(err(
                Rule::LiteralTooWide,
                path,
                format!("literal {v} (ruint{w}) does not fit {target}"),
            ));
        }
        let mut p = Plan::new(PlanNode::Lit(v), TypeDesc::RUInt(w));
        p.conversions = literal_conversions(target);
        p.ty = target.clone();
        Ok(p)
    }

    /// Widens and re-views a typed plan so it takes type `target`.
    fn fit(&self, mut p: Plan, target: &TypeDesc, path: &str) -> Result<Plan> {
        if p.ty == *target {
            return Ok(p);
        }
        if let PlanNode::Lit(v) = p.node {
            if p.conversions.is_empty() {
                return self.coerce_literal(v, target, path);
            }
        }
        let (Some(from_rank), Some(to_rank)) = (rank(&p.ty), rank(target)) else {
            return Err(err(
                Rule::TypeMismatch,
                path,
                format!("cannot use {} where {target} is expected", p.ty),
            ));
        };
        let w = p.width();
        let tw = target.width().unwrap_or(0);
        if w > tw {
            return Err(err(
                Rule::OperandTooWide,
                path,
                format!("{}-bit operand does not fit {target}", w),
            ));
        }
        let tw32 = tw as u32;
        if w < tw || (from_rank == 0) != (to_rank == 0) {
            p.conversions.push(Conversion::Resize(tw32));
        }
        match target {
            TypeDesc::Signed(_) if !p.ty.is_signed() => {
                p.conversions.push(Conversion::ToSigned(tw32))
            }
            TypeDesc::Unsigned(_) if !matches!(p.ty, TypeDesc::Unsigned(_)) => {
                p.conversions.push(Conversion::ToUnsigned(tw32))
            }
            _ => {}
        }
        p.ty = target.clone();
        Ok(p)
    }

    /// Two operands of a bitwise operator (rule 5).
    fn unify(&self, l: &Expr, r: &Expr, path: &str) -> Result<(Plan, Plan)> {
        let (lp, rp) = (sub(path, "lhs"), sub(path, "rhs"));
        match (l.is_constant(), r.is_constant()) {
            (true, true) => Err(err(
                Rule::TypeMismatch,
                path,
                "operator on two constants has no width",
            )),
            (true, false) => {
                let pr = self.infer(r, &rp)?;
                let pl = self.coerce(l, &pr.ty, &lp)?;
                Ok((pl, pr))
            }
            (false, true) => {
                let pl = self.infer(l, &lp)?;
                let pr = self.coerce(r, &pl.ty, &rp)?;
                Ok((pl, pr))
            }
            (false, false) => {
                let pl = self.infer(l, &lp)?;
                let pr = self.infer(r, &rp)?;
                if pl.ty == pr.ty {
                    return Ok((pl, pr));
                }
                if pl.ty.width() != pr.ty.width() {
                    return Err(err(
                        Rule::WidthMismatch,
                        path,
                        format!("operands have types {} and {}", pl.ty, pr.ty),
                    ));
                }
                match (rank(&pl.ty), rank(&pr.ty)) {
                    (Some(2), Some(3)) | (Some(3), Some(2)) | (None, _) | (_, None) => {
                        Err(err(
                            Rule::TypeMismatch,
                            path,
                            format!("operands have types {} and {}", pl.ty, pr.ty),
                        ))
                    }
                    (Some(a), Some(b)) if a < b => {
                        let ty = pr.ty.clone();
                        Ok((self.fit(pl, &ty, &lp)?, pr))
                    }
                    _ => {
                        let ty = pl.ty.clone();
                        let pr = self.fit(pr, &ty, &rp)?;
                        Ok((pl, pr))
                    }
                }
            }
        }
    }

    /// Two operands of a comparison (rule 6).
    fn compare_operands(&self, l: &Expr, r: &Expr, path: &str) -> Result<(Plan, Plan)> {
        let swap = l.is_constant() && !r.is_constant();
        let (sig, konst) = if swap { (r, l) } else { (l, r) };
        if !konst.is_constant() || sig.is_constant() {
            return self.unify(l, r, path);
        }
        let (sp, kp) = if swap {
            (sub(path, "rhs"), sub(path, "lhs"))
        } else {
            (sub(path, "lhs"), sub(path, "rhs"))
        };
        let mut ps = self.infer(sig, &sp)?;
        let pk = match (&ps.ty, konst) {
            (TypeDesc::Bit, Expr::Lit(v @ (0 | 1))) => {
                ps.conversions.push(Conversion::BitToUint(1));
                ps.ty = TypeDesc::Unsigned(1);
                Plan::new(PlanNode::Lit(*v), TypeDesc::RUInt(1))
            }
            (TypeDesc::Bit, Expr::Lit(v)) => {
                return Err(err(
                    Rule::LiteralTooWide,
                    &kp,
                    format!("bit compared with literal {v}"),
                ))
            }
            (TypeDesc::Enum { states, .. }, Expr::State(s)) => {
                let index = states.iter().position(|x| x == s).ok_or_else(|| {
                    err(Rule::UnknownState, &kp, format!("`{s}` is not a state of {}", ps.ty))
                })?;
                Plan::new(
                    PlanNode::State {
                        name: s.clone(),
                        index: index as u32,
                    },
                    ps.ty.clone(),
                )
            }
            _ => {
                let ty = ps.ty.clone();
                self.coerce(konst, &ty, &kp)?
            }
        };
        Ok(if swap { (pk, ps) } else { (ps, pk) })
    }

    /// Types `e` so that it takes type `target` (assignment context).
    fn coerce(&self, e: &Expr, target: &TypeDesc, path: &str) -> Result<Plan> {
        match target {
            TypeDesc::Record(fields) => {
                if let Expr::Aggregate(given) = e {
                    for (n, _) in given {
                        if !fields.iter().any(|(f, _)| f == n) {
                            return Err(err(
                                Rule::UnknownField,
                                path,
                                format!("record has no field `{n}`"),
                            ));
                        }
                    }
                    let mut out = Vec::with_capacity(fields.len());
                    for (fname, fty) in fields {
                        let (_, fe) = given.iter().find(|(n, _)| n == fname).ok_or_else(|| {
                            err(
                                Rule::MissingField,
                                path,
                                format!("aggregate lacks field `{fname}`"),
                            )
                        })?;
                        out.push((fname.clone(), self.coerce(fe, fty, &sub(path, fname))?));
                    }
                    return Ok(Plan::new(PlanNode::Aggregate(out), target.clone()));
                }
                self.exact(e, target, path)
            }
            TypeDesc::Array(..) => self.exact(e, target, path),
            TypeDesc::Enum { states, .. } => {
                if let Expr::State(s) = e {
                    let index = states.iter().position(|x| x == s).ok_or_else(|| {
                        err(Rule::UnknownState, path, format!("`{s}` is not a state of {target}"))
                    })?;
                    return Ok(Plan::new(
                        PlanNode::State {
                            name: s.clone(),
                            index: index as u32,
                        },
                        target.clone(),
                    ));
                }
                self.exact(e, target, path)
            }
            TypeDesc::Alias(_) | TypeDesc::RUInt(_) => Err(err(
                Rule::TypeMismatch,
                path,
                format!("cannot assign to type {target}"),
            )),
            _ => {
                if let Expr::Lit(v) = e {
                    return self.coerce_literal(*v, target, path);
                }
                if is_arithmetic(e) {
                    return self.coerce_arith(e, target, path);
                }
                if let Expr::Unary(UnOp::Not, x) = e {
                    if x.is_constant() {
                        let inner = self.coerce(x, target, &sub(path, "arg"))?;
                        return Ok(Plan::new(
                            PlanNode::Unary(UnOp::Not, Box::new(inner)),
                            target.clone(),
                        ));
                    }
                }
                let p = self.infer(e, path)?;
                self.fit(p, target, path)
            }
        }
    }

    fn exact(&self, e: &Expr, target: &TypeDesc, path: &str) -> Result<Plan> {
        let p = self.infer(e, path)?;
        if p.ty != *target {
            return Err(err(
                Rule::TypeMismatch,
                path,
                format!("expected {target}, found {}", p.ty),
            ));
        }
        Ok(p)
    }
}

fn collect_arith_leaves<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Unary(UnOp::Neg, x) if !x.is_constant() => collect_arith_leaves(x, out),
        Expr::Binary(BinOp::Add | BinOp::Sub, l, r) => {
            collect_arith_leaves(l, out);
            collect_arith_leaves(r, out);
        }
        _ => out.push(e),
    }
}

/// Types the right-hand side of `lhs <= rhs` against the target type.
pub fn check_assign(lhs_type: &TypeDesc, rhs: &Expr, syms: &SymbolTable) -> Result<Plan> {
    let folded = fold_constants(rhs);
    Checker { syms }.coerce(&folded, lhs_type, "rhs")
}

/// Types an assignment target (no conversions are ever inserted).
pub fn check_target(lhs: &Expr, syms: &SymbolTable) -> Result<Plan> {
    Checker { syms }.infer(lhs, "lhs")
}

/// Types any expression without context.
pub fn infer(e: &Expr, syms: &SymbolTable) -> Result<Plan> {
    Checker { syms }.infer(&fold_constants(e), "")
}

/// Types an `if` condition; it must come out single-bit.
pub fn check_condition(expr: &Expr, syms: &SymbolTable) -> Result<Plan> {
    let folded = fold_constants(expr);
    if let Expr::Lit(v @ (0 | 1)) = folded {
        return Ok(Plan::new(PlanNode::Lit(v), TypeDesc::RUInt(1)));
    }
    let p = Checker { syms }.infer(&folded, "cond")?;
    match p.ty {
        TypeDesc::Bit | TypeDesc::BitVector(1) | TypeDesc::Unsigned(1) => Ok(p),
        _ => Err(err(
            Rule::NotBoolean,
            "cond",
            format!("condition `{expr}` has type {}", p.ty),
        )),
    }
}

/// Types a case selector against the choices of its arms.
pub fn check_case<'c>(
    selector: &Expr,
    choices: impl IntoIterator<Item = &'c crate::ir::Choice>,
    syms: &SymbolTable,
) -> Result<Plan> {
    use crate::ir::Choice;
    let p = Checker { syms }.infer(&fold_constants(selector), "selector")?;
    for c in choices {
        match (c, &p.ty) {
            (Choice::Value(v), t) if t.is_scalar() => {
                let w = literal_width(*v);
                if u64::from(w) > p.width() {
                    return Err(err(
                        Rule::ArmWidth,
                        "selector",
                        format!("choice {v} needs {w} bits but the selector has {}", p.width()),
                    ));
                }
            }
            (Choice::State(s), TypeDesc::Enum { states, .. }) => {
                if !states.contains(s) {
                    return Err(err(
                        Rule::UnknownState,
                        "selector",
                        format!("`{s}` is not a state of {}", p.ty),
                    ));
                }
            }
            (c, t) => {
                return Err(err(
                    Rule::TypeMismatch,
                    "selector",
                    format!("choice {c:?} does not match selector type {t}"),
                ))
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(entries: &[(&str, TypeDesc)]) -> SymbolTable {
        let mut t = SymbolTable::new();
        for (n, ty) in entries {
            t.insert(*n, ty.clone(), SignalKind::Wire);
        }
        t
    }

    fn conversion_symbols() -> SymbolTable {
        syms(&[
            ("a", TypeDesc::Bit),
            ("f1", TypeDesc::Bit),
            ("f2", TypeDesc::Bit),
            ("b", TypeDesc::BitVector(8)),
            ("w1", TypeDesc::BitVector(8)),
            ("w2", TypeDesc::Bit),
            ("w3", TypeDesc::Signed(8)),
        ])
    }

    fn a() -> Expr {
        Expr::sig("a")
    }

    #[test]
    fn width_of_types() {
        assert_eq!(width_of(&TypeDesc::Bit).unwrap(), 1);
        let cplx = TypeDesc::record([("re", TypeDesc::Signed(6)), ("im", TypeDesc::Signed(6))]);
        assert_eq!(width_of(&cplx).unwrap(), 12);
        assert_eq!(width_of(&TypeDesc::array(256, cplx)).unwrap(), 3072);
        assert_eq!(width_of(&"cplx".into()).unwrap_err().rule, Rule::UnresolvedType);
    }

    #[test]
    fn folding() {
        assert_eq!(fold_constants(&(Expr::lit(1) + 1)), Expr::Lit(2));
        let e = &a() + 1;
        assert_eq!(fold_constants(&e), e);
        assert_eq!(fold_constants(&(Expr::lit(2) + 3).equals(5)), Expr::Lit(1));
        assert_eq!(fold_constants(&(Expr::lit(2) + 3).equals(6)), Expr::Lit(0));
        assert_eq!(fold_constants(&(Expr::lit(1) - 3)), Expr::from(-2));
        assert_eq!(fold_constants(&-(Expr::from(-4))), Expr::Lit(4));
    }

    #[test]
    fn bit_accepts_literal_one_unchanged() {
        let p = check_assign(&TypeDesc::Bit, &Expr::lit(1), &conversion_symbols()).unwrap();
        assert!(p.all_conversions().is_empty());
        assert_eq!(p.natural, TypeDesc::RUInt(1));
    }

    #[test]
    fn bit_rejects_wide_literal() {
        let d = check_assign(&TypeDesc::Bit, &Expr::lit(42), &conversion_symbols()).unwrap_err();
        assert_eq!(d.rule, Rule::LiteralTooWide);
        assert!(d.message.contains("ruint6"));
    }

    #[test]
    fn bitvector_resizes_bit_plus_literal() {
        let p = check_assign(&TypeDesc::BitVector(8), &(&a() + 1), &conversion_symbols()).unwrap();
        let PlanNode::Binary(BinOp::Add, l, r) = &p.node else { panic!() };
        assert_eq!(l.conversions, vec![Conversion::Resize(8)]);
        assert_eq!(r.conversions, vec![Conversion::Resize(8)]);
        assert_eq!(p.width(), 8);
    }

    #[test]
    fn arithmetic_into_bit() {
        let d = check_assign(&TypeDesc::Bit, &(&a() + 1), &conversion_symbols()).unwrap_err();
        assert_eq!(d.rule, Rule::ArithmeticIntoBit);
        // constant arithmetic folds first and then fails on width
        let d = check_assign(&TypeDesc::Bit, &(Expr::lit(1) + 1), &conversion_symbols()).unwrap_err();
        assert_eq!(d.rule, Rule::LiteralTooWide);
        assert!(d.message.contains("ruint2"));
    }

    #[test]
    fn signed_target_wraps_operands() {
        let p = check_assign(&TypeDesc::Signed(8), &(&a() + 5), &conversion_symbols()).unwrap();
        let PlanNode::Binary(_, l, r) = &p.node else { panic!() };
        assert_eq!(l.conversions, vec![Conversion::Resize(8), Conversion::ToSigned(8)]);
        assert_eq!(r.conversions, vec![Conversion::Resize(8), Conversion::ToSigned(8)]);
        assert_eq!(r.natural, TypeDesc::RUInt(3));
        assert!(p.ty.is_signed());
    }

    #[test]
    fn counter_increment_typechecks() {
        let s = syms(&[("count", TypeDesc::BitVector(8))]);
        let p = check_assign(&TypeDesc::BitVector(8), &(Expr::sig("count") + 1), &s).unwrap();
        let PlanNode::Binary(_, l, _) = &p.node else { panic!() };
        assert!(l.conversions.is_empty());
    }

    #[test]
    fn operand_too_wide() {
        let s = syms(&[("x", TypeDesc::BitVector(8)), ("y", TypeDesc::BitVector(4))]);
        let d = check_assign(&TypeDesc::BitVector(4), &(Expr::sig("x") + 1), &s).unwrap_err();
        assert_eq!(d.rule, Rule::OperandTooWide);
        let d = check_assign(&TypeDesc::BitVector(4), &Expr::sig("x"), &s).unwrap_err();
        assert_eq!(d.rule, Rule::OperandTooWide);
        // widening a plain reference zero-extends
        let p = check_assign(&TypeDesc::BitVector(8), &Expr::sig("y"), &s).unwrap();
        assert_eq!(p.conversions, vec![Conversion::Resize(8)]);
    }

    #[test]
    fn conditions() {
        let s = syms(&[
            ("go", TypeDesc::Bit),
            ("count", TypeDesc::BitVector(8)),
            ("a4", TypeDesc::BitVector(4)),
            ("b8", TypeDesc::BitVector(8)),
        ]);
        let p = check_condition(&Expr::sig("go").equals(1), &s).unwrap();
        let PlanNode::Binary(BinOp::Eq, l, r) = &p.node else { panic!() };
        assert_eq!(l.conversions, vec![Conversion::BitToUint(1)]);
        assert!(r.conversions.is_empty());

        let p = check_condition(&Expr::sig("count").equals(255), &s).unwrap();
        let PlanNode::Binary(_, l, r) = &p.node else { panic!() };
        assert!(l.conversions.is_empty());
        assert_eq!(r.conversions, vec![Conversion::Resize(8)]);
        assert_eq!(r.width(), 8);

        let d = check_condition(&Expr::sig("a4").equals(Expr::sig("b8")), &s).unwrap_err();
        assert_eq!(d.rule, Rule::WidthMismatch);
        let d = check_condition(&Expr::sig("count").equals(256), &s).unwrap_err();
        assert_eq!(d.rule, Rule::LiteralTooWide);
        let d = check_condition(&Expr::sig("count"), &s).unwrap_err();
        assert_eq!(d.rule, Rule::NotBoolean);
        // literal on the left is symmetric
        let p = check_condition(&Expr::lit(1).equals(Expr::sig("go")), &s).unwrap();
        let PlanNode::Binary(_, _, r) = &p.node else { panic!() };
        assert_eq!(r.conversions, vec![Conversion::BitToUint(1)]);
    }

    #[test]
    fn bitwise_rules() {
        let s = syms(&[
            ("x", TypeDesc::BitVector(4)),
            ("y", TypeDesc::BitVector(4)),
            ("z", TypeDesc::BitVector(8)),
            ("b1", TypeDesc::BitVector(1)),
            ("bit", TypeDesc::Bit),
        ]);
        let p = check_assign(&TypeDesc::BitVector(4), &(Expr::sig("x") & 3), &s).unwrap();
        let PlanNode::Binary(_, _, r) = &p.node else { panic!() };
        assert_eq!(r.conversions, vec![Conversion::Resize(4)]);
        let d = check_assign(&TypeDesc::BitVector(8), &(Expr::sig("x") ^ Expr::sig("z")), &s)
            .unwrap_err();
        assert_eq!(d.rule, Rule::WidthMismatch);
        let d = check_assign(&TypeDesc::BitVector(4), &(Expr::sig("x") | 31), &s).unwrap_err();
        assert_eq!(d.rule, Rule::LiteralTooWide);
        let p = check_assign(&TypeDesc::BitVector(1), &(Expr::sig("b1") & Expr::sig("bit")), &s)
            .unwrap();
        let PlanNode::Binary(_, _, r) = &p.node else { panic!() };
        assert_eq!(r.conversions, vec![Conversion::Resize(1)]);
    }

    #[test]
    fn records_and_arrays() {
        let cplx = TypeDesc::record([("re", TypeDesc::Signed(6)), ("im", TypeDesc::Signed(6))]);
        let s = syms(&[
            ("mem", TypeDesc::array(256, cplx.clone())),
            ("i", TypeDesc::BitVector(8)),
        ]);
        let agg = Expr::aggregate([("re", Expr::lit(13)), ("im", Expr::lit(26))]);
        let p = check_assign(&cplx, &agg, &s).unwrap();
        assert!(matches!(p.node, PlanNode::Aggregate(ref f) if f.len() == 2));
        let missing = Expr::aggregate([("re", Expr::lit(1))]);
        assert_eq!(check_assign(&cplx, &missing, &s).unwrap_err().rule, Rule::MissingField);
        let extra = Expr::aggregate([("re", 1u64), ("im", 1u64), ("zz", 1u64)]);
        assert_eq!(check_assign(&cplx, &extra, &s).unwrap_err().rule, Rule::UnknownField);
        let wide = Expr::aggregate([("re", 510u64), ("im", 0u64)]);
        assert_eq!(check_assign(&cplx, &wide, &s).unwrap_err().rule, Rule::LiteralTooWide);

        let mem = Expr::sig("mem");
        let t = check_target(&mem.index(13).field("im"), &s).unwrap();
        assert_eq!(t.ty, TypeDesc::Signed(6));
        let t = check_target(&mem.index(Expr::sig("i")), &s).unwrap();
        assert_eq!(t.ty, cplx);
        assert_eq!(check_target(&mem.index(256), &s).unwrap_err().rule, Rule::IndexOutOfRange);
        assert_eq!(
            check_target(&mem.index(0).field("zz"), &s).unwrap_err().rule,
            Rule::UnknownField
        );
    }

    #[test]
    fn case_selectors() {
        use crate::ir::Choice;
        let s = syms(&[("sel", TypeDesc::BitVector(2))]);
        let ok = [Choice::Value(0), Choice::Value(3)];
        check_case(&Expr::sig("sel"), &ok, &s).unwrap();
        let bad = [Choice::Value(5)];
        assert_eq!(check_case(&Expr::sig("sel"), &bad, &s).unwrap_err().rule, Rule::ArmWidth);
    }

    #[test]
    fn enum_states() {
        let st = TypeDesc::Enum {
            name: "simple_state_t".into(),
            states: vec!["s0".into(), "s1".into()],
        };
        let s = syms(&[("simple_state", st.clone())]);
        let p = check_assign(&st, &Expr::State("s1".into()), &s).unwrap();
        assert_eq!(
            p.node,
            PlanNode::State {
                name: "s1".into(),
                index: 1
            }
        );
        assert_eq!(
            check_assign(&st, &Expr::State("s7".into()), &s).unwrap_err().rule,
            Rule::UnknownState
        );
    }

    fn arb_expr() -> impl proptest::strategy::Strategy<Value = Expr> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            (0u64..300).prop_map(Expr::Lit),
            prop::sample::select(vec!["a", "b", "w2", "w3", "n4"]).prop_map(Expr::sig),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            let op = prop::sample::select(BinOp::ALL.to_vec());
            prop_oneof![
                (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
                inner.clone().prop_map(|e| !e),
                inner.prop_map(|e| -e),
            ]
        })
    }

    proptest::proptest! {
        #[test]
        fn accepted_plans_never_narrow(
            e in arb_expr(),
            target in proptest::sample::select(vec![
                TypeDesc::Bit,
                TypeDesc::BitVector(4),
                TypeDesc::BitVector(8),
                TypeDesc::Signed(8),
                TypeDesc::Unsigned(9),
            ]),
        ) {
            let mut s = conversion_symbols();
            s.insert("n4", TypeDesc::BitVector(4), SignalKind::Wire);
            if let Ok(plan) = check_assign(&target, &e, &s) {
                proptest::prop_assert_eq!(&plan.ty, &target);
                plan.walk(&mut |p| {
                    let natural = p.natural.width().unwrap();
                    for c in &p.conversions {
                        assert!(u64::from(c.width()) >= natural, "{c:?} narrows {}", p.natural);
                    }
                });
            }
        }
    }
}
