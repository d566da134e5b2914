// SPDX-License-Identifier: Apache-2.0
//! Line-oriented stimulus scripts.
//!
//! ```text
//! # comment
//! poke tick 1
//! step 3
//! expect count 3
//! ```
//!
//! `step` without a count is one cycle. Values are decimal, `0x` hex or
//! `0b` binary.

use std::fmt;

use super::Simulator;
use crate::diag::{Diagnostic, Diagnostics, Rule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Poke(String, u64),
    Step(u64),
    Expect(String, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stimulus {
    /// Commands with their 1-based line numbers.
    pub commands: Vec<(usize, Command)>,
}

fn parse_value(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    if let Some(h) = s.strip_prefix("0x") {
        u64::from_str_radix(h, 16).ok()
    } else if let Some(b) = s.strip_prefix("0b") {
        u64::from_str_radix(b, 2).ok()
    } else {
        s.parse().ok()
    }
}

impl Stimulus {
    pub fn parse(text: &str) -> Result<Stimulus, Diagnostics> {
        let mut out = Stimulus::default();
        let mut diags = Diagnostics::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let at = format!("line {}", i + 1);
            let bad = |msg: String| Diagnostic::error(Rule::StrayToken, msg).at(at.clone());
            let value = |w: &str| parse_value(w).ok_or_else(|| bad(format!("`{w}` is not a number")));
            let cmd = match words.as_slice() {
                ["poke", name, v] => value(v).map(|v| Command::Poke(name.to_string(), v)),
                ["expect", name, v] => value(v).map(|v| Command::Expect(name.to_string(), v)),
                ["step"] => Ok(Command::Step(1)),
                ["step", n] => value(n).map(Command::Step),
                [head, ..] if ["poke", "expect", "step"].contains(head) => {
                    Err(Diagnostic::error(Rule::Arity, format!("wrong operands for `{head}`")).at(at.clone()))
                }
                [head, ..] => Err(Diagnostic::error(Rule::UnknownForm, format!("unknown command `{head}`")).at(at.clone())),
                [] => unreachable!("blank lines skipped"),
            };
            match cmd {
                Ok(c) => out.commands.push((i + 1, c)),
                Err(d) => diags.push(d),
            }
        }
        if diags.has_errors() {
            Err(diags)
        } else {
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectResult {
    pub line: usize,
    pub cycle: u64,
    pub name: String,
    pub expected: u64,
    pub actual: u64,
}

impl ExpectResult {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

/// Outcome of a script run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub expects: Vec<ExpectResult>,
    pub cycles: u64,
    pub outputs: Vec<(String, u64)>,
}

impl Transcript {
    pub fn passed(&self) -> bool {
        self.expects.iter().all(ExpectResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectResult> {
        self.expects.iter().filter(|e| !e.passed())
    }

    /// Failed expectations as diagnostics.
    pub fn diagnostics(&self, circuit: &str) -> Diagnostics {
        let mut d = Diagnostics::new();
        for f in self.failures() {
            d.push(
                Diagnostic::error(
                    Rule::ExpectFailed,
                    format!("cycle {}: {} is {}, expected {}", f.cycle, f.name, f.actual, f.expected),
                )
                .in_circuit(circuit)
                .at(format!("line {}", f.line)),
            );
        }
        d
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.expects {
            let verdict = if e.passed() { "ok" } else { "FAIL" };
            writeln!(
                f,
                "{verdict} line {} cycle {}: {} = {} (expected {})",
                e.line, e.cycle, e.name, e.actual, e.expected
            )?;
        }
        writeln!(f, "cycles: {}", self.cycles)?;
        for (n, v) in &self.outputs {
            writeln!(f, "{n} = {v}")?;
        }
        Ok(())
    }
}

/// Runs `script` on `sim`. Unknown names and oversized values abort the
/// run; failed expectations are recorded in the transcript.
pub fn run_stimulus(sim: &mut Simulator, script: &Stimulus) -> Result<Transcript, Diagnostics> {
    let mut t = Transcript::default();
    let ctx = |d: Diagnostic, line: usize, name: &str| {
        Diagnostics::from(d.in_circuit(name).at(format!("line {line}")))
    };
    for (line, cmd) in &script.commands {
        match cmd {
            Command::Poke(n, v) => sim.poke(n, *v).map_err(|d| ctx(d, *line, sim.name()))?,
            Command::Step(k) => sim.step_n(*k),
            Command::Expect(n, v) => {
                let actual = sim.peek(n).map_err(|d| ctx(d, *line, sim.name()))?;
                t.expects.push(ExpectResult {
                    line: *line,
                    cycle: sim.cycle(),
                    name: n.clone(),
                    expected: *v,
                    actual,
                });
            }
        }
    }
    t.cycles = sim.cycle();
    t.outputs = sim.output_values();
    Ok(t)
}
