// SPDX-License-Identifier: Apache-2.0
//! Canonical printer.
//!
//! Block forms (`circuit`, `combinatorial`, `sequential`, `case`, `when`,
//! `default`, `if`, `then`, `else`) keep their header arguments on the
//! opening line, put each body element on its own line indented two more
//! spaces, and close with `)` on a line of its own. All other lists, and
//! block forms without a body, print on one line.

use super::parse::SexpNode;

/// Block heads and the number of header arguments they keep inline.
const BLOCKS: &[(&str, usize)] = &[
    ("circuit", 1),
    ("combinatorial", 1),
    ("sequential", 1),
    ("case", 1),
    ("when", 1),
    ("default", 0),
    ("if", 1),
    ("then", 0),
    ("else", 0),
];

fn header_len(items: &[SexpNode]) -> Option<usize> {
    let head = items.first()?.as_ident()?;
    let (_, h) = BLOCKS.iter().find(|(b, _)| *b == head)?;
    (items.len() > 1 + h).then_some(1 + h)
}

enum Task<'a> {
    Text(&'static str),
    Pad(usize),
    Inline(&'a SexpNode),
    Block(&'a SexpNode, usize),
}

/// Renders `node` in canonical form, followed by a newline.
pub fn print(node: &SexpNode) -> String {
    let mut out = String::new();
    let mut tasks = vec![Task::Text("\n"), Task::Block(node, 0)];
    while let Some(t) = tasks.pop() {
        match t {
            Task::Text(s) => out.push_str(s),
            Task::Pad(n) => out.extend(std::iter::repeat_n(' ', n)),
            Task::Inline(SexpNode::Atom(a)) | Task::Block(SexpNode::Atom(a), _) => {
                out.push_str(&a.to_string())
            }
            Task::Inline(SexpNode::List(items)) => {
                tasks.push(Task::Text(")"));
                for (i, item) in items.iter().enumerate().rev() {
                    tasks.push(Task::Inline(item));
                    if i > 0 {
                        tasks.push(Task::Text(" "));
                    }
                }
                tasks.push(Task::Text("("));
            }
            Task::Block(n @ SexpNode::List(items), indent) => {
                let Some(h) = header_len(items) else {
                    tasks.push(Task::Inline(n));
                    continue;
                };
                tasks.push(Task::Text(")"));
                tasks.push(Task::Pad(indent));
                for item in items[h..].iter().rev() {
                    tasks.push(Task::Text("\n"));
                    tasks.push(Task::Block(item, indent + 2));
                    tasks.push(Task::Pad(indent + 2));
                }
                tasks.push(Task::Text("\n"));
                for (i, item) in items[..h].iter().enumerate().rev() {
                    tasks.push(Task::Inline(item));
                    if i > 0 {
                        tasks.push(Task::Text(" "));
                    }
                }
                tasks.push(Task::Text("("));
            }
        }
    }
    out
}
