// SPDX-License-Identifier: Apache-2.0
//! Build a half adder with the builder API and print every view of it.

use rtlforge::backends::{emit_dot, emit_vhdl, pretty, VhdlOptions};
use rtlforge::elaborate::elaborate;
use rtlforge::ir::CircuitBuilder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut b = CircuitBuilder::new("half_adder");
    let a = b.input("a")?;
    let bb = b.input("b")?;
    let sum = b.output("sum")?;
    let cout = b.output("cout")?;
    b.assign(sum, &a ^ &bb)?;
    b.assign(cout, &a & &bb)?;
    let def = b.finish()?;

    println!("{}", pretty(&def));
    println!("{}", emit_dot(&def));

    let elab = elaborate(&def)?;
    for unit in emit_vhdl(&elab, &VhdlOptions::default())? {
        println!("-- {}", unit.file_name);
        println!("{}", unit.text);
    }
    Ok(())
}
