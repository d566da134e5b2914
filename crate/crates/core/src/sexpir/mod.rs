// SPDX-License-Identifier: Apache-2.0
//! Sexpir: an s-expression interchange format for flat RTL circuits.
//!
//! # Grammar
//!
//! ```text
//! file     = circuit ;
//! circuit  = "(" "circuit" ident { decl | stmt } ")" ;
//! decl     = "(" ( "input" | "output" | "signal" ) name kind ")" ;
//! name     = "(" "name" ident ")" ;
//! kind     = "(" "type" tname ")" | "(" "bits_sign" width ")" ;
//! tname    = "bit" | "byte" | "bv" K | "uint" K | "int" K ;
//! width    = K | "(" K "signed" ")" ;
//! stmt     = assign | block | case | if ;
//! assign   = "(" "assign" target expr ")" ;
//! target   = ident | "(" "index" ident int ")" ;
//! block    = "(" ( "combinatorial" | "sequential" ) label { stmt } ")" ;
//! label    = "nil" | ident ;
//! case     = "(" "case" expr { "(" "when" int { stmt } ")" }
//!            [ "(" "default" { stmt } ")" ] ")" ;
//! if       = "(" "if" expr "(" "then" { stmt } ")" [ "(" "else" { stmt } ")" ] ")" ;
//! expr     = int | ident
//!          | "(" binop expr expr ")" | "(" ( "~" | "-" ) expr ")"
//!          | "(" "index" expr int ")" ;
//! binop    = "==" | "!=" | "<" | ">" | "<=" | ">=" | "+" | "-" | "&" | "|" | "^" ;
//! ident    = [A-Za-z_][A-Za-z0-9_]* ;
//! int      = [-]?[0-9]+ ;
//! ```
//!
//! `;` starts a comment (files conventionally use `;;`). `bits_sign` with
//! a bare integer declares an unsigned bit vector; the `(K signed)` width
//! and the `index` form are extensions of this implementation. `if` and
//! `case` only appear inside blocks, and blocks only at circuit level.
//! A `sequential nil` block is given the label `sync_<k>` when lowered.

mod emit;
mod lower;
mod parse;
mod print;
mod validate;

pub use emit::{emit_sexpir, to_sexp};
pub use lower::lower_to_ir;
pub use parse::{parse, Atom, SexpNode, OPERATORS};
pub use print::print;
pub use validate::validate;

use crate::diag::Diagnostics;
use crate::ir::CircuitDef;

/// Parses and lowers Sexpir text in one step.
pub fn read_circuit(text: &str) -> Result<CircuitDef, Diagnostics> {
    let tree = parse(text).map_err(Diagnostics::from)?;
    lower_to_ir(&tree)
}
