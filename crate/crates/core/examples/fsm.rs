// SPDX-License-Identifier: Apache-2.0
//! A three-state machine: lowering, the generated process and its state
//! sequence under simulation.

use rtlforge::backends::{emit_vhdl, VhdlOptions};
use rtlforge::builtins;
use rtlforge::elaborate::elaborate;
use rtlforge::sim::Simulator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let elab = elaborate(&builtins::fsm1())?;
    let reg = &elab.state_registers[0];
    println!("state register {} : {:?}", reg.name, reg.ty);

    let units = emit_vhdl(&elab, &VhdlOptions::default())?;
    println!("{}", units.last().expect("entity").text);

    let mut sim = Simulator::new(&elab)?;
    for go in [1, 0] {
        sim.reset();
        sim.poke("go", go)?;
        let mut seen = Vec::new();
        for _ in 0..6 {
            sim.step();
            seen.push(format!("f={} s={}", sim.peek("f")?, sim.peek(&reg.name)?));
        }
        println!("go={go}: {}", seen.join(", "));
    }
    Ok(())
}
