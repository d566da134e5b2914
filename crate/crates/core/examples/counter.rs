// SPDX-License-Identifier: Apache-2.0
//! A registered counter: two-phase stepping, enable input, wraparound.

use rtlforge::builtins;
use rtlforge::elaborate::elaborate;
use rtlforge::sim::Simulator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let elab = elaborate(&builtins::counter())?;
    let mut sim = Simulator::new(&elab)?;

    sim.poke("tick", 1)?;
    sim.step_n(250);
    for _ in 0..8 {
        println!("cycle {:>3}: count = {}", sim.cycle(), sim.peek("count")?);
        sim.step();
    }

    sim.poke("tick", 0)?;
    let held = sim.peek("count")?;
    sim.step_n(10);
    println!("tick=0 for 10 cycles: {held} -> {}", sim.peek("count")?);
    Ok(())
}
