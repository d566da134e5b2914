// SPDX-License-Identifier: Apache-2.0
//! Contextual conversions: which assignments are accepted and what the
//! checker inserts.

use rtlforge::ir::{Expr, SignalKind, TypeDesc};
use rtlforge::typesys::{check_assign, Plan, SymbolTable};

fn describe(p: &Plan) -> String {
    let mut parts = Vec::new();
    p.walk(&mut |n| {
        if !n.conversions.is_empty() {
            parts.push(format!("{:?} -> {:?}", n.natural, n.conversions));
        }
    });
    if parts.is_empty() {
        "no conversion".into()
    } else {
        parts.join("; ")
    }
}

fn main() {
    let mut syms = SymbolTable::new();
    syms.insert("a", TypeDesc::Bit, SignalKind::Wire);
    let a = Expr::sig("a");

    let cases = [
        ("bit   <= 1", TypeDesc::Bit, Expr::lit(1)),
        ("bit   <= 42", TypeDesc::Bit, Expr::lit(42)),
        ("bv8   <= a + 1", TypeDesc::BitVector(8), &a + 1),
        ("bit   <= a + 1", TypeDesc::Bit, &a + 1),
        ("bit   <= 1 + 1", TypeDesc::Bit, Expr::lit(1) + 1),
        ("int8  <= a + 5", TypeDesc::Signed(8), &a + 5),
        ("uint4 <= a + 3", TypeDesc::Unsigned(4), &a + 3),
    ];
    for (label, ty, rhs) in cases {
        match check_assign(&ty, &rhs, &syms) {
            Ok(plan) => println!("{label:<16} ok     {}", describe(&plan)),
            Err(d) => println!("{label:<16} error  {}: {}", d.rule.id(), d.message),
        }
    }
}
