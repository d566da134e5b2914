// SPDX-License-Identifier: Apache-2.0
//! Drive a circuit from a stimulus script and print the transcript.

use rtlforge::builtins;
use rtlforge::elaborate::elaborate;
use rtlforge::sim::{run_stimulus, Simulator, Stimulus};

const SCRIPT: &str = include_str!("data/counter.stim");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let elab = elaborate(&builtins::counter())?;
    let mut sim = Simulator::new(&elab)?;
    let script = Stimulus::parse(SCRIPT)?;
    let transcript = run_stimulus(&mut sim, &script)?;
    print!("{transcript}");
    if !transcript.passed() {
        print!("{}", transcript.diagnostics(elab.name()));
        std::process::exit(1);
    }
    Ok(())
}
