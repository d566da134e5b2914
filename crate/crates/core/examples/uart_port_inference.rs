// SPDX-License-Identifier: Apache-2.0
//! Recover port directions of a flat receiver netlist, then clock a byte
//! through it.

use rtlforge::elaborate::{elaborate, infer_ports};
use rtlforge::sexpir::read_circuit;
use rtlforge::sim::Simulator;

const UART: &str = include_str!("data/uart.sexp");
const BIT: u64 = 16;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let def = read_circuit(UART)?;
    let (ported, part, warnings) = infer_ports(&def, None);
    println!("inputs:    {}", part.inputs.join(" "));
    println!("outputs:   {}", part.outputs.join(" "));
    println!("internals: {}", part.internals.join(" "));
    print!("{warnings}");

    let elab = elaborate(&ported)?;
    let mut sim = Simulator::new(&elab)?;
    let byte = 0xA5u64;

    // idle high, start bit, eight data bits LSB first, stop bit
    let mut line = vec![1u64; 4];
    line.extend(std::iter::repeat_n(0, BIT as usize));
    for i in 0..8 {
        line.extend(std::iter::repeat_n((byte >> i) & 1, BIT as usize));
    }
    line.extend(std::iter::repeat_n(1, 2 * BIT as usize));

    for (cycle, rx) in line.into_iter().enumerate() {
        sim.poke("rx", rx)?;
        if sim.peek("rx_ready")? == 1 {
            println!("cycle {cycle}: rx_data = {:#04x}", sim.peek("rx_data")?);
        }
        if sim.peek("rx_error")? == 1 {
            println!("cycle {cycle}: framing error");
        }
        sim.step();
    }
    Ok(())
}
