// SPDX-License-Identifier: Apache-2.0
//! Grammar conformance checks; lists every violation.

use super::parse::{Atom, SexpNode};
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::ir::builtin;

pub(crate) const BINARY_OPS: &[&str] = &["==", "!=", "<=", ">=", "<", ">", "+", "-", "&", "|", "^"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    Block,
}

struct Validator {
    diags: Diagnostics,
    circuit: String,
}

impl Validator {
    fn err(&mut self, rule: Rule, path: &str, msg: impl Into<String>) {
        self.diags.push(
            Diagnostic::error(rule, msg)
                .in_circuit(self.circuit.clone())
                .at(path.to_string()),
        );
    }

    fn decl(&mut self, items: &[SexpNode], path: &str) {
        let (mut name, mut ty) = (0, 0);
        for field in &items[1..] {
            let Some(f) = field.as_list() else {
                self.err(Rule::StrayToken, path, format!("expected a field form, found {}", atom_text(field)));
                continue;
            };
            match field.head() {
                Some("name") => {
                    name += 1;
                    if f.len() != 2 || f[1].as_ident().is_none() {
                        self.err(Rule::Arity, path, "(name ...) takes one identifier");
                    }
                }
                Some("type") => {
                    ty += 1;
                    match f.get(1).and_then(SexpNode::as_ident) {
                        Some(t) if f.len() == 2 && builtin(t).is_some() => {}
                        Some(t) if f.len() == 2 => {
                            self.err(Rule::UnresolvedType, path, format!("unknown type `{t}`"))
                        }
                        _ => self.err(Rule::Arity, path, "(type ...) takes one type name"),
                    }
                }
                Some("bits_sign") => {
                    ty += 1;
                    if f.len() != 2 || width_spec(&f[1]).is_none() {
                        self.err(
                            Rule::NonIntegerWidth,
                            path,
                            "bits_sign expects a positive integer or (K signed)",
                        );
                    }
                }
                Some(other) => self.err(Rule::UnknownForm, path, format!("unknown declaration field `{other}`")),
                None => self.err(Rule::UnknownForm, path, "declaration field without a head"),
            }
        }
        if name == 0 {
            self.err(Rule::MissingField, path, "declaration lacks (name ...)");
        }
        if ty == 0 {
            self.err(Rule::MissingField, path, "declaration lacks (type ...) or (bits_sign ...)");
        }
        if name > 1 || ty > 1 {
            self.err(Rule::Arity, path, "declaration repeats a field");
        }
    }

    fn body(&mut self, items: &[SexpNode], path: &str, part: &str) {
        for (i, s) in items.iter().enumerate() {
            self.stmt(s, Ctx::Block, &format!("{path}.{part}[{i}]"));
        }
    }

    fn stmt(&mut self, node: &SexpNode, ctx: Ctx, path: &str) {
        let Some(items) = node.as_list() else {
            self.err(Rule::StrayToken, path, format!("expected a statement, found `{}`", atom_text(node)));
            return;
        };
        match node.head() {
            Some("assign") => {
                if items.len() != 3 {
                    self.err(Rule::Arity, path, "assign takes a target and an expression");
                    return;
                }
                self.lvalue(&items[1], path);
                self.expr(&items[2], path);
            }
            Some(head @ ("combinatorial" | "sequential")) => {
                if ctx != Ctx::Top {
                    self.err(Rule::NestedBlock, path, format!("{head} must be at circuit level"));
                }
                if items.len() < 2 || items[1].as_ident().is_none() {
                    self.err(Rule::Arity, path, format!("{head} needs a label or nil"));
                    return;
                }
                self.body(&items[2..], path, "body");
            }
            Some("case") => {
                if ctx == Ctx::Top {
                    self.err(Rule::Misplaced, path, "case must be inside a block");
                }
                if items.len() < 2 {
                    self.err(Rule::Arity, path, "case needs a selector");
                    return;
                }
                self.expr(&items[1], path);
                let arms = &items[2..];
                for (i, arm) in arms.iter().enumerate() {
                    let p = format!("{path}.arm[{i}]");
                    let Some(a) = arm.as_list() else {
                        self.err(Rule::StrayToken, &p, "expected (when ...) or (default ...)");
                        continue;
                    };
                    match arm.head() {
                        Some("when") => match a.get(1).and_then(SexpNode::as_int) {
                            Some(v) if v >= 0 => self.body(&a[2..], &p, "body"),
                            _ => self.err(Rule::Arity, &p, "when needs a nonnegative integer choice"),
                        },
                        Some("default") => {
                            if i + 1 != arms.len() {
                                self.err(Rule::Misplaced, &p, "default must be the last arm");
                            }
                            self.body(&a[1..], &p, "body");
                        }
                        Some(other) => self.err(Rule::UnknownForm, &p, format!("unknown case arm `{other}`")),
                        None => self.err(Rule::UnknownForm, &p, "case arm without a head"),
                    }
                }
            }
            Some("if") => {
                if ctx == Ctx::Top {
                    self.err(Rule::Misplaced, path, "if must be inside a block");
                }
                if !(3..=4).contains(&items.len()) {
                    self.err(Rule::Arity, path, "if takes a condition, (then ...) and optionally (else ...)");
                    return;
                }
                self.expr(&items[1], path);
                for (node, want) in items[2..].iter().zip(["then", "else"]) {
                    match (node.head(), node.as_list()) {
                        (Some(h), Some(b)) if h == want => self.body(&b[1..], path, want),
                        _ => self.err(Rule::Misplaced, path, format!("expected ({want} ...)")),
                    }
                }
            }
            Some(head @ ("input" | "output" | "signal")) => {
                self.err(Rule::Misplaced, path, format!("{head} declarations belong at circuit level"));
            }
            Some(other) => self.err(Rule::UnknownForm, path, format!("unknown form `{other}`")),
            None => self.err(Rule::UnknownForm, path, "statement without a head"),
        }
    }

    fn lvalue(&mut self, node: &SexpNode, path: &str) {
        if node.as_ident().is_some() {
            return;
        }
        if node.head() == Some("index") {
            let items = node.as_list().unwrap_or(&[]);
            if items.len() == 3 && items[1].as_ident().is_some() && items[2].as_int().is_some_and(|v| v >= 0) {
                return;
            }
        }
        self.err(Rule::Misplaced, path, "assignment target must be a name or (index name k)");
    }

    fn expr(&mut self, node: &SexpNode, path: &str) {
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            let items = match n {
                SexpNode::Atom(Atom::Int(_) | Atom::Ident(_)) => continue,
                SexpNode::Atom(Atom::Op(o)) => {
                    self.err(Rule::StrayToken, path, format!("operator `{o}` outside a form"));
                    continue;
                }
                SexpNode::List(items) => items,
            };
            let args = items.len().saturating_sub(1);
            match n.head() {
                Some("-") if args == 1 || args == 2 => {}
                Some("~") if args == 1 => {}
                Some(op) if BINARY_OPS.contains(&op) && args == 2 => {}
                Some("index") if args == 2 => {
                    if items[2].as_int().is_none_or(|v| v < 0) {
                        self.err(Rule::Arity, path, "index takes a constant nonnegative position");
                    }
                    stack.push(&items[1]);
                    continue;
                }
                Some(op) if BINARY_OPS.contains(&op) || op == "~" || op == "index" => {
                    self.err(Rule::Arity, path, format!("`{op}` has {args} operand(s)"));
                    continue;
                }
                Some(other) => {
                    self.err(Rule::UnknownForm, path, format!("unknown operator `{other}`"));
                    continue;
                }
                None => {
                    self.err(Rule::UnknownForm, path, "expression list without an operator");
                    continue;
                }
            }
            stack.extend(items[1..].iter());
        }
    }
}

fn atom_text(n: &SexpNode) -> String {
    match n {
        SexpNode::Atom(a) => a.to_string(),
        SexpNode::List(_) => "(...)".into(),
    }
}

/// `K` or `(K signed)` with `K >= 1`; returns (width, signed).
pub(crate) fn width_spec(n: &SexpNode) -> Option<(u32, bool)> {
    let positive = |n: &SexpNode| n.as_int().filter(|&v| v >= 1).and_then(|v| u32::try_from(v).ok());
    match n {
        SexpNode::Atom(_) => positive(n).map(|w| (w, false)),
        SexpNode::List(items) if items.len() == 2 && items[1].as_ident() == Some("signed") => {
            positive(&items[0]).map(|w| (w, true))
        }
        SexpNode::List(_) => None,
    }
}

/// Checks that `root` is one well-formed `(circuit ...)` form.
pub fn validate(root: &SexpNode) -> Diagnostics {
    let mut v = Validator {
        diags: Diagnostics::new(),
        circuit: String::new(),
    };
    let items = match (root.head(), root.as_list()) {
        (Some("circuit"), Some(items)) => items,
        (Some(other), _) => {
            v.err(Rule::UnknownForm, "", format!("expected (circuit ...), found `{other}`"));
            return v.diags;
        }
        _ => {
            v.err(Rule::UnknownForm, "", "expected a (circuit ...) form");
            return v.diags;
        }
    };
    match items.get(1).and_then(SexpNode::as_ident) {
        Some(n) => v.circuit = n.to_string(),
        None => {
            v.err(Rule::Arity, "", "circuit needs a name");
            return v.diags;
        }
    }
    for (i, item) in items[2..].iter().enumerate() {
        let path = format!("item[{i}]");
        match item.head() {
            Some("input" | "output" | "signal") => v.decl(item.as_list().unwrap_or(&[]), &path),
            _ => v.stmt(item, Ctx::Top, &path),
        }
    }
    v.diags
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    fn rules_of(text: &str) -> Vec<Rule> {
        validate(&parse(text).unwrap()).iter().map(|d| d.rule).collect()
    }

    #[test]
    fn declaration_errors() {
        assert_eq!(rules_of("(circuit c (input (type bv1)))"), vec![Rule::MissingField]);
        assert_eq!(rules_of("(circuit c (signal (name x) (bits_sign eight)))"), vec![Rule::NonIntegerWidth]);
        assert_eq!(rules_of("(circuit c (signal (name x) (bits_sign (8 signed))))"), vec![]);
        assert_eq!(rules_of("(circuit c (signal (name x) (type word)))"), vec![Rule::UnresolvedType]);
    }

    #[test]
    fn statement_errors() {
        assert_eq!(rules_of("(circuit c (frobnicate x))"), vec![Rule::UnknownForm]);
        let d = validate(&parse("(circuit c (frobnicate x))").unwrap());
        assert!(d.0[0].message.contains("frobnicate"));
        assert_eq!(rules_of("(circuit c (assign x))"), vec![Rule::Arity]);
        assert_eq!(rules_of("(circuit c (if a (then)))"), vec![Rule::Misplaced]);
        assert_eq!(
            rules_of("(circuit c (combinatorial nil (sequential s)))"),
            vec![Rule::NestedBlock]
        );
        assert_eq!(rules_of("(circuit c (combinatorial nil (assign x (+ a))))"), vec![Rule::Arity]);
        assert_eq!(rules_of("(circuit c (combinatorial nil (assign x (mul a b))))"), vec![Rule::UnknownForm]);
    }

    #[test]
    fn collects_all() {
        let n = parse("(circuit c (frob) (assign x) (input (type bit)))").unwrap();
        assert_eq!(validate(&n).len(), 3);
    }
}
