// SPDX-License-Identifier: Apache-2.0
//! Tokenizer and iterative parser.

use std::fmt;

use crate::diag::{Diagnostic, Rule};

/// Operator spellings accepted as atoms.
pub const OPERATORS: &[&str] = &["==", "!=", "<=", ">=", "<", ">", "+", "-", "&", "|", "^", "~"];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Ident(String),
    Int(i128),
    Op(String),
}

impl Atom {
    /// Classifies a token; `None` if it is not a legal atom.
    pub fn classify(token: &str) -> Option<Atom> {
        if OPERATORS.contains(&token) {
            return Some(Atom::Op(token.to_string()));
        }
        let digits = token.strip_prefix('-').unwrap_or(token);
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return token.parse().ok().map(Atom::Int);
        }
        crate::ir::is_identifier(token).then(|| Atom::Ident(token.to_string()))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Ident(s) | Atom::Op(s) => f.write_str(s),
            Atom::Int(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SexpNode {
    Atom(Atom),
    List(Vec<SexpNode>),
}

impl SexpNode {
    pub fn ident(s: impl Into<String>) -> SexpNode {
        SexpNode::Atom(Atom::Ident(s.into()))
    }

    pub fn int(v: impl Into<i128>) -> SexpNode {
        SexpNode::Atom(Atom::Int(v.into()))
    }

    pub fn op(s: &str) -> SexpNode {
        SexpNode::Atom(Atom::Op(s.to_string()))
    }

    pub fn list(items: impl IntoIterator<Item = SexpNode>) -> SexpNode {
        SexpNode::List(items.into_iter().collect())
    }

    pub fn as_list(&self) -> Option<&[SexpNode]> {
        match self {
            SexpNode::List(v) => Some(v),
            SexpNode::Atom(_) => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            SexpNode::Atom(Atom::Ident(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i128> {
        match self {
            SexpNode::Atom(Atom::Int(v)) => Some(*v),
            _ => None,
        }
    }

    /// Head identifier or operator of a list form.
    pub fn head(&self) -> Option<&str> {
        match self.as_list()?.first()? {
            SexpNode::Atom(Atom::Ident(s) | Atom::Op(s)) => Some(s),
            _ => None,
        }
    }

    /// Maximum list nesting depth (atoms have depth 0).
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self, 0usize)];
        while let Some((n, d)) = stack.pop() {
            if let SexpNode::List(items) = n {
                max = max.max(d + 1);
                stack.extend(items.iter().map(|c| (c, d + 1)));
            }
        }
        max
    }
}

impl Drop for SexpNode {
    // Deep trees would otherwise overflow the stack when dropped.
    fn drop(&mut self) {
        let SexpNode::List(items) = self else { return };
        if items.iter().all(|c| matches!(c, SexpNode::Atom(_))) {
            return;
        }
        let mut pending: Vec<SexpNode> = std::mem::take(items);
        while let Some(mut n) = pending.pop() {
            if let SexpNode::List(children) = &mut n {
                pending.append(children);
            }
        }
    }
}

fn located(rule: Rule, line: usize, col: usize, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(rule, msg).at(format!("{line}:{col}"))
}

/// Parses one s-expression. `;` starts a comment running to end of line.
pub fn parse(text: &str) -> Result<SexpNode, Diagnostic> {
    let mut stack: Vec<(Vec<SexpNode>, usize, usize)> = Vec::new();
    let mut result: Option<SexpNode> = None;
    let (mut line, mut col) = (1usize, 1usize);
    let mut chars = text.char_indices().peekable();

    let mut push = |node: SexpNode,
                    stack: &mut Vec<(Vec<SexpNode>, usize, usize)>,
                    line: usize,
                    col: usize|
     -> Result<(), Diagnostic> {
        match stack.last_mut() {
            Some((items, _, _)) => {
                items.push(node);
                Ok(())
            }
            None if result.is_none() => {
                result = Some(node);
                Ok(())
            }
            None => Err(located(Rule::StrayToken, line, col, "unexpected input after the top-level form")),
        }
    };

    while let Some(&(i, c)) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                let Some((items, _, _)) = stack.pop() else {
                    return Err(located(Rule::UnbalancedParen, line, col, "`)` without a matching `(`"));
                };
                push(SexpNode::List(items), &mut stack, line, col)?;
                col += 1;
            }
            _ => {
                let start = i;
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    end = j + c.len_utf8();
                    chars.next();
                }
                let token = &text[start..end];
                let atom = Atom::classify(token).ok_or_else(|| {
                    located(Rule::StrayToken, line, col, format!("`{token}` is not a legal atom"))
                })?;
                push(SexpNode::Atom(atom), &mut stack, line, col)?;
                col += token.chars().count();
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(located(Rule::UnbalancedParen, *l, *c, "`(` is never closed"));
    }
    result.ok_or_else(|| located(Rule::EmptyInput, line, col, "no s-expression in input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assign_form() {
        let n = parse("(assign rx_strobe (== rx_counter 0))").unwrap();
        assert_eq!(
            n,
            SexpNode::list([
                SexpNode::ident("assign"),
                SexpNode::ident("rx_strobe"),
                SexpNode::list([SexpNode::op("=="), SexpNode::ident("rx_counter"), SexpNode::int(0)]),
            ])
        );
    }

    #[test]
    fn comments_and_errors() {
        let n = parse(";; comment\n(circuit x)").unwrap();
        assert_eq!(n, SexpNode::list([SexpNode::ident("circuit"), SexpNode::ident("x")]));
        let d = parse("(a (b").unwrap_err();
        assert_eq!(d.rule, Rule::UnbalancedParen);
        assert!(d.path.starts_with("1:"));
        assert_eq!(parse("  ;; only\n").unwrap_err().rule, Rule::EmptyInput);
        assert_eq!(parse("(a))").unwrap_err().rule, Rule::UnbalancedParen);
        assert_eq!(parse("(name rx_data])").unwrap_err().rule, Rule::StrayToken);
        assert_eq!(parse("(a) (b)").unwrap_err().rule, Rule::StrayToken);
        let d = parse("(a\n  #)").unwrap_err();
        assert_eq!(d.path, "2:3");
    }

    #[test]
    fn integers() {
        assert_eq!(Atom::classify("-12"), Some(Atom::Int(-12)));
        assert_eq!(Atom::classify("-"), Some(Atom::Op("-".into())));
        assert_eq!(Atom::classify("x-1"), None);
        assert_eq!(Atom::classify("nil"), Some(Atom::Ident("nil".into())));
    }

    #[test]
    fn deep_nesting() {
        let depth = 5000;
        let text = "(".repeat(depth) + &")".repeat(depth);
        let n = parse(&text).unwrap();
        assert_eq!(n.depth(), depth);
    }
}
