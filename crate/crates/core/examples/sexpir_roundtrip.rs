// SPDX-License-Identifier: Apache-2.0
//! Export circuits to Sexpir text, read them back and compare.

use rtlforge::builtins;
use rtlforge::elaborate::elaborate;
use rtlforge::sexpir::{emit_sexpir, parse, print, read_circuit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (spec, def) in builtins::all() {
        let elab = elaborate(&def)?;
        let text = emit_sexpir(&elab)?;
        let back = elaborate(&read_circuit(&text)?)?;
        let again = emit_sexpir(&back)?;
        println!(
            "{spec:<12} {:>5} bytes, {:>3} signals, stable: {}",
            text.len(),
            back.symbols.len(),
            again == text
        );
    }

    let counter = emit_sexpir(&elaborate(&builtins::counter())?)?;
    println!("\n{counter}");

    // the printer is canonical: parse and print agree on any tree
    let tree = parse("(a (b 1 -2) (+ x y) ())")?;
    println!("{}", print(&tree));
    Ok(())
}
