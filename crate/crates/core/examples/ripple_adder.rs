// SPDX-License-Identifier: Apache-2.0
//! A parameterized ripple-carry adder: hierarchy, per-level VHDL files and
//! simulation through the flattened netlist.

use rtlforge::backends::{emit_vhdl, VhdlOptions};
use rtlforge::builtins;
use rtlforge::elaborate::elaborate;
use rtlforge::sim::Simulator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let width: u32 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let def = builtins::adder(width)?;
    let elab = elaborate(&def)?;

    println!("design units:");
    for unit in emit_vhdl(&elab, &VhdlOptions::default())? {
        println!("  {}", unit.file_name);
    }

    let mut sim = Simulator::new(&elab)?;
    let top = 1u64 << width;
    for (a, b) in [(0, 0), (1, 1), (top - 1, 1), (top / 2, top / 2 + 3), (top - 1, top - 1)] {
        sim.poke_many(&[("a", a), ("b", b)])?;
        let sum = sim.peek("sum")?;
        let cout = sim.peek("cout")?;
        println!("{a:>5} + {b:>5} = {sum:>5} carry {cout}");
    }
    // internal nets of the hierarchy are visible by dotted path
    println!("fa_0.ha1.sum = {}", sim.peek("fa_0.ha1.sum")?);
    Ok(())
}
