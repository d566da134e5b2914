// SPDX-License-Identifier: Apache-2.0
//! Translation of typed statements into slot-addressed instructions.
//!
//! Every signal owns a contiguous run of scalar slots, one per leaf of its
//! type. Records lay fields out in declaration order and arrays repeat the
//! element layout.

use indexmap::IndexMap;

use crate::diag::{Diagnostic, Rule};
use crate::elaborate::{TStmt, TAssign};
use crate::ir::{BinOp, Choice, TypeDesc, UnOp};
use crate::typesys::{Conversion, Plan, PlanNode, SymbolTable};

type Result<T> = std::result::Result<T, Diagnostic>;

pub(crate) fn mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

fn sign_extend(v: u64, from: u32) -> u64 {
    if from == 0 || from >= 64 {
        return v;
    }
    let shift = 64 - from;
    (((v << shift) as i64) >> shift) as u64
}

pub(crate) fn leaf_count(ty: &TypeDesc) -> usize {
    match ty {
        TypeDesc::Record(fields) => fields.iter().map(|(_, t)| leaf_count(t)).sum(),
        TypeDesc::Array(len, elem) => *len as usize * leaf_count(elem),
        _ => 1,
    }
}

fn leaf_widths(ty: &TypeDesc, out: &mut Vec<u32>) -> Result<()> {
    match ty {
        TypeDesc::Record(fields) => fields.iter().try_for_each(|(_, t)| leaf_widths(t, out)),
        TypeDesc::Array(len, elem) => (0..*len).try_for_each(|_| leaf_widths(elem, out)),
        other => {
            let w = other.width().unwrap_or(1);
            if w > 64 {
                return Err(Diagnostic::error(
                    Rule::Unsupported,
                    format!("simulation of {w}-bit scalars is not supported"),
                ));
            }
            out.push(w as u32);
            Ok(())
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SignalSlots {
    pub base: usize,
    pub ty: TypeDesc,
}

/// Slot assignment for every symbol of a flat circuit.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub signals: IndexMap<String, SignalSlots>,
    pub widths: Vec<u32>,
}

impl Layout {
    pub fn new(symbols: &SymbolTable) -> Result<Layout> {
        let mut signals = IndexMap::new();
        let mut widths = Vec::new();
        for (name, info) in symbols.iter() {
            let base = widths.len();
            leaf_widths(&info.ty, &mut widths)?;
            signals.insert(
                name.clone(),
                SignalSlots {
                    base,
                    ty: info.ty.clone(),
                },
            );
        }
        Ok(Layout { signals, widths })
    }
}

/// Slot address: a static offset plus bounded dynamic index terms.
#[derive(Debug, Clone)]
pub(crate) struct Addr {
    pub offset: usize,
    pub terms: Vec<(CExpr, usize, u64)>,
}

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Const(u64),
    Load(Box<Addr>),
    Bit(Box<CExpr>, u32),
    Not(Box<CExpr>, u32),
    Neg(Box<CExpr>, u32),
    Bin(BinOp, Box<CExpr>, Box<CExpr>, u32),
    /// Comparison; `Some(w)` compares as `w`-bit two's complement.
    Cmp(BinOp, Box<CExpr>, Box<CExpr>, Option<u32>),
    SignExtend(Box<CExpr>, u32, u32),
}

#[derive(Debug, Clone)]
pub(crate) enum Target {
    Slots(Addr, usize),
    Bit(Addr, u32),
}

#[derive(Debug, Clone)]
pub(crate) enum CStmt {
    Assign(Target, Vec<CExpr>),
    If(CExpr, Vec<CStmt>, Vec<CStmt>),
    Case(CExpr, Vec<(u64, Vec<CStmt>)>, Vec<CStmt>),
}

/// Read and write access used by the interpreter.
pub(crate) trait Memory {
    fn read(&self, slot: usize) -> u64;
    fn write(&mut self, slot: usize, value: u64);
    /// Value a write would modify; differs from `read` when writes are
    /// deferred.
    fn pending(&self, slot: usize) -> u64 {
        self.read(slot)
    }
}

impl Addr {
    fn fixed(offset: usize) -> Addr {
        Addr {
            offset,
            terms: Vec::new(),
        }
    }

    /// `None` when a dynamic index is out of range.
    fn resolve(&self, m: &dyn Memory) -> Option<usize> {
        let mut at = self.offset;
        for (e, stride, len) in &self.terms {
            let i = e.eval(m);
            if i >= *len {
                return None;
            }
            at += i as usize * stride;
        }
        Some(at)
    }
}

impl CExpr {
    pub fn eval(&self, m: &dyn Memory) -> u64 {
        match self {
            CExpr::Const(v) => *v,
            CExpr::Load(a) => a.resolve(m).map_or(0, |s| m.read(s)),
            CExpr::Bit(x, i) => (x.eval(m) >> i) & 1,
            CExpr::Not(x, w) => !x.eval(m) & mask(*w),
            CExpr::Neg(x, w) => x.eval(m).wrapping_neg() & mask(*w),
            CExpr::Bin(op, l, r, w) => {
                let (a, b) = (l.eval(m), r.eval(m));
                let v = match op {
                    BinOp::And => a & b,
                    BinOp::Or => a | b,
                    BinOp::Xor => a ^ b,
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    _ => unreachable!("comparisons compile to Cmp"),
                };
                v & mask(*w)
            }
            CExpr::Cmp(op, l, r, signed) => {
                let (a, b) = (l.eval(m), r.eval(m));
                let ord = match signed {
                    Some(w) => (sign_extend(a, *w) as i64).cmp(&(sign_extend(b, *w) as i64)),
                    None => a.cmp(&b),
                };
                use std::cmp::Ordering::*;
                let t = match op {
                    BinOp::Eq => ord == Equal,
                    BinOp::Neq => ord != Equal,
                    BinOp::Lt => ord == Less,
                    BinOp::Gt => ord == Greater,
                    BinOp::Le => ord != Greater,
                    BinOp::Ge => ord != Less,
                    _ => unreachable!("bitwise and arithmetic compile to Bin"),
                };
                t as u64
            }
            CExpr::SignExtend(x, from, to) => sign_extend(x.eval(m), *from) & mask(*to),
        }
    }
}

impl CStmt {
    pub fn exec(&self, m: &mut dyn Memory, widths: &[u32]) {
        match self {
            CStmt::Assign(target, values) => {
                let vals: Vec<u64> = values.iter().map(|v| v.eval(m)).collect();
                match target {
                    Target::Slots(addr, n) => {
                        if let Some(at) = addr.resolve(m) {
                            for (k, v) in vals.into_iter().enumerate().take(*n) {
                                m.write(at + k, v & mask(widths[at + k]));
                            }
                        }
                    }
                    Target::Bit(addr, bit) => {
                        if let Some(at) = addr.resolve(m) {
                            let old = m.pending(at);
                            let v = (old & !(1 << bit)) | ((vals[0] & 1) << bit);
                            m.write(at, v);
                        }
                    }
                }
            }
            CStmt::If(c, t, e) => {
                let body = if c.eval(m) != 0 { t } else { e };
                body.iter().for_each(|s| s.exec(m, widths));
            }
            CStmt::Case(sel, arms, default) => {
                let v = sel.eval(m);
                let body = arms.iter().find(|(c, _)| *c == v).map_or(default, |(_, b)| b);
                body.iter().for_each(|s| s.exec(m, widths));
            }
        }
    }
}

pub(crate) struct Compiler<'a> {
    pub layout: &'a Layout,
}

fn unsupported(msg: String) -> Diagnostic {
    Diagnostic::error(Rule::Unsupported, msg)
}

impl Compiler<'_> {
    fn base_slots(&self, key: &str) -> Result<&SignalSlots> {
        self.layout
            .signals
            .get(key)
            .ok_or_else(|| Diagnostic::error(Rule::UnknownName, format!("no signal `{key}`")))
    }

    fn is_place(p: &Plan) -> bool {
        match &p.node {
            PlanNode::Ref(_) | PlanNode::PortRef(..) => true,
            PlanNode::Field(b, _) => Self::is_place(b),
            PlanNode::Index(b, _) => matches!(b.ty, TypeDesc::Array(..)) && Self::is_place(b),
            _ => false,
        }
    }

    fn place(&self, p: &Plan) -> Result<Addr> {
        match &p.node {
            PlanNode::Ref(n) => Ok(Addr::fixed(self.base_slots(n)?.base)),
            PlanNode::PortRef(i, n) => Ok(Addr::fixed(self.base_slots(&format!("{i}.{n}"))?.base)),
            PlanNode::Field(b, f) => {
                let mut a = self.place(b)?;
                let TypeDesc::Record(fields) = &b.ty else {
                    return Err(unsupported(format!("field `{f}` of a non-record")));
                };
                for (n, t) in fields {
                    if n == f {
                        break;
                    }
                    a.offset += leaf_count(t);
                }
                Ok(a)
            }
            PlanNode::Index(b, i) => {
                let TypeDesc::Array(len, elem) = &b.ty else {
                    return Err(unsupported("bit selection is not a slot".into()));
                };
                let mut a = self.place(b)?;
                let stride = leaf_count(elem);
                match i.node {
                    PlanNode::Lit(k) => a.offset += k as usize * stride,
                    _ => a.terms.push((self.scalar(i)?, stride, u64::from(*len))),
                }
                Ok(a)
            }
            _ => Err(unsupported("expression is not addressable".into())),
        }
    }

    /// Scalar value of `p` in its context type.
    pub fn scalar(&self, p: &Plan) -> Result<CExpr> {
        let w = |t: &TypeDesc| t.width().unwrap_or(1) as u32;
        let mut e = match &p.node {
            PlanNode::Lit(v) => CExpr::Const(*v),
            PlanNode::State { index, .. } => CExpr::Const(u64::from(*index)),
            _ if Self::is_place(p) => CExpr::Load(Box::new(self.place(p)?)),
            PlanNode::Index(b, i) => {
                let PlanNode::Lit(k) = i.node else {
                    return Err(unsupported("dynamic bit selection".into()));
                };
                CExpr::Bit(Box::new(self.scalar(b)?), k as u32)
            }
            PlanNode::Field(..) | PlanNode::Ref(_) | PlanNode::PortRef(..) => {
                return Err(unsupported("composite value in scalar context".into()))
            }
            PlanNode::Unary(UnOp::Not, x) => CExpr::Not(Box::new(self.scalar(x)?), w(&p.natural)),
            PlanNode::Unary(UnOp::Neg, x) => CExpr::Neg(Box::new(self.scalar(x)?), w(&p.natural)),
            PlanNode::Binary(op, l, r) if op.is_comparison() => {
                let signed = l.ty.is_signed().then(|| w(&l.ty));
                CExpr::Cmp(*op, Box::new(self.scalar(l)?), Box::new(self.scalar(r)?), signed)
            }
            PlanNode::Binary(op, l, r) => CExpr::Bin(
                *op,
                Box::new(self.scalar(l)?),
                Box::new(self.scalar(r)?),
                w(&p.natural),
            ),
            PlanNode::Aggregate(_) => return Err(unsupported("aggregate in scalar context".into())),
        };
        let mut signed_from = p.natural.is_signed().then(|| w(&p.natural));
        for c in &p.conversions {
            match *c {
                Conversion::Resize(n) => {
                    if let Some(from) = signed_from {
                        if from < n {
                            e = CExpr::SignExtend(Box::new(e), from, n);
                        }
                        signed_from = Some(n);
                    }
                }
                Conversion::ToSigned(n) => signed_from = Some(n),
                Conversion::ToUnsigned(_) | Conversion::BitToUint(_) => signed_from = None,
            }
        }
        Ok(e)
    }

    /// One expression per leaf slot of the value of `p`.
    fn leaves(&self, p: &Plan) -> Result<Vec<CExpr>> {
        match &p.ty {
            TypeDesc::Record(_) | TypeDesc::Array(..) => {}
            _ => return Ok(vec![self.scalar(p)?]),
        }
        if let PlanNode::Aggregate(fields) = &p.node {
            let mut out = Vec::new();
            for (_, f) in fields {
                out.extend(self.leaves(f)?);
            }
            return Ok(out);
        }
        let a = self.place(p)?;
        Ok((0..leaf_count(&p.ty))
            .map(|k| {
                let mut a = a.clone();
                a.offset += k;
                CExpr::Load(Box::new(a))
            })
            .collect())
    }

    fn target(&self, lhs: &Plan) -> Result<Target> {
        if let PlanNode::Index(b, i) = &lhs.node {
            if !matches!(b.ty, TypeDesc::Array(..)) {
                let PlanNode::Lit(k) = i.node else {
                    return Err(unsupported("dynamic bit selection".into()));
                };
                return Ok(Target::Bit(self.place(b)?, k as u32));
            }
        }
        Ok(Target::Slots(self.place(lhs)?, leaf_count(&lhs.ty)))
    }

    fn assign(&self, a: &TAssign) -> Result<CStmt> {
        Ok(CStmt::Assign(self.target(&a.lhs)?, self.leaves(&a.rhs)?))
    }

    pub fn stmts(&self, body: &[TStmt]) -> Result<Vec<CStmt>> {
        body.iter().map(|s| self.stmt(s)).collect()
    }

    pub fn stmt(&self, s: &TStmt) -> Result<CStmt> {
        Ok(match s {
            TStmt::Assign(a) => self.assign(a)?,
            TStmt::If {
                cond,
                then_body,
                else_body,
            } => CStmt::If(self.scalar(cond)?, self.stmts(then_body)?, self.stmts(else_body)?),
            TStmt::Case {
                selector,
                arms,
                default,
            } => {
                let mut out = Vec::new();
                for arm in arms {
                    let v = match &arm.choice {
                        Choice::Value(v) => *v,
                        Choice::State(s) => match &selector.ty {
                            TypeDesc::Enum { states, .. } => {
                                states.iter().position(|x| x == s).unwrap_or(usize::MAX) as u64
                            }
                            _ => return Err(unsupported(format!("state `{s}` on a non-state selector"))),
                        },
                    };
                    out.push((v, self.stmts(&arm.body)?));
                }
                CStmt::Case(self.scalar(selector)?, out, self.stmts(default)?)
            }
            TStmt::Sequential { .. } | TStmt::Combinatorial { .. } => {
                return Err(unsupported("nested block".into()))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_and_sign_extension() {
        assert_eq!(mask(3), 7);
        assert_eq!(mask(64), u64::MAX);
        assert_eq!(sign_extend(0b110, 3) & mask(8), 0b1111_1110);
        assert_eq!(sign_extend(0b010, 3), 0b010);
    }

    #[test]
    fn record_layout() {
        let ty = TypeDesc::array(4, TypeDesc::record([("re", TypeDesc::Signed(6)), ("im", TypeDesc::Signed(6))]));
        assert_eq!(leaf_count(&ty), 8);
        let mut w = Vec::new();
        leaf_widths(&ty, &mut w).unwrap();
        assert_eq!(w, vec![6; 8]);
    }
}
