// SPDX-License-Identifier: Apache-2.0
//! Command-line driver. [`run`] is the whole tool; the binary only
//! forwards process arguments and streams to it.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backends::{emit_dot, emit_vhdl, pretty, VhdlOptions};
use crate::builtins;
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::elaborate::{elaborate, infer_ports, needs_port_inference, ElaboratedCircuit, PortOverrides};
use crate::ir::CircuitDef;
use crate::sexpir::{emit_sexpir, read_circuit};
use crate::sim::{run_stimulus, Simulator, Stimulus};

#[derive(Debug, Parser)]
#[command(name = "rtlforge", version, about = "RTL circuit elaboration, conversion and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Elaborate and report diagnostics only.
    Check(Common),
    /// Emit VHDL.
    Vhdl(Common),
    /// Emit a Graphviz view of the syntax tree.
    Dot(Common),
    /// Emit the indented text form.
    Pretty(Common),
    /// Emit Sexpir.
    ToSexp(Common),
    /// Read a Sexpir file and emit the selected outputs (VHDL by default).
    FromSexp(Common),
    /// Run a stimulus script against the simulator.
    Sim {
        #[command(flatten)]
        common: Common,
        /// Stimulus file with poke, step and expect lines.
        #[arg(long)]
        script: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Vhdl,
    Dot,
    Pretty,
    Sexp,
}

#[derive(Debug, Args)]
pub struct Common {
    /// A Sexpir file or `builtin:<name>[:<param>]`.
    pub input: String,
    /// Additional outputs; may repeat.
    #[arg(long, value_enum)]
    pub emit: Vec<Emit>,
    /// Output directory; without it results go to standard output.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Clock port name in generated VHDL.
    #[arg(long, default_value = "clk")]
    pub clock: String,
    /// Active-low asynchronous reset port name.
    #[arg(long, default_value = "reset_n")]
    pub reset: String,
    /// Active-high synchronous reset port name.
    #[arg(long, default_value = "sreset")]
    pub sreset: String,
    /// Port direction overrides (`input <name>` / `output <name>` lines).
    #[arg(long)]
    pub ports: Option<PathBuf>,
    /// Print diagnostics as JSON.
    #[arg(long)]
    pub structured: bool,
}

struct Outcome {
    diags: Diagnostics,
}

impl Outcome {
    fn fail(&mut self, d: impl Into<Diagnostics>) -> Result<(), ()> {
        self.diags.extend(d.into());
        Err(())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Diagnostic {
    Diagnostic::error(Rule::Io, format!("{}: {e}", path.display()))
}

/// Writes `text` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Diagnostic> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| io_error(&target, e))?;
    tmp.persist(&target).map_err(|e| io_error(&target, e.error))?;
    Ok(target)
}

/// Loads a circuit: a builtin, or a Sexpir file with port inference
/// when it declares no outputs or an override file is given.
pub fn load_circuit(input: &str, ports: Option<&Path>) -> Result<(CircuitDef, Diagnostics), Diagnostics> {
    if let Some(spec) = input.strip_prefix("builtin:") {
        return builtins::lookup(spec).map(|c| (c, Diagnostics::new())).map_err(Diagnostics::from);
    }
    let path = Path::new(input);
    let text = std::fs::read_to_string(path).map_err(|e| Diagnostics::from(io_error(path, e)))?;
    let def = read_circuit(&text)?;
    let overrides = match ports {
        Some(p) => {
            let t = std::fs::read_to_string(p).map_err(|e| Diagnostics::from(io_error(p, e)))?;
            Some(PortOverrides::parse(&t).map_err(Diagnostics::from)?)
        }
        None => None,
    };
    if overrides.is_none() && !needs_port_inference(&def) {
        return Ok((def, Diagnostics::new()));
    }
    let (def, _, diags) = infer_ports(&def, overrides.as_ref());
    if diags.has_errors() {
        return Err(diags);
    }
    Ok((def, diags))
}

struct Driver<'a> {
    out: &'a mut dyn Write,
    outcome: Outcome,
}

impl Driver<'_> {
    fn emit(&mut self, dir: Option<&Path>, name: &str, text: &str) -> Result<(), ()> {
        match dir {
            Some(d) => match write_atomic(d, name, text) {
                Ok(_) => Ok(()),
                Err(e) => self.outcome.fail(e),
            },
            None => {
                let _ = self.out.write_all(text.as_bytes());
                Ok(())
            }
        }
    }

    fn outputs(&mut self, c: &Common, src: &CircuitDef, elab: &ElaboratedCircuit, kinds: &[Emit]) -> Result<(), ()> {
        let dir = c.output.as_deref();
        let stem = src.name.to_ascii_lowercase();
        for kind in kinds {
            match kind {
                Emit::Vhdl => {
                    let opts = VhdlOptions {
                        clock: c.clock.clone(),
                        reset: c.reset.clone(),
                        sreset: c.sreset.clone(),
                    };
                    let units = match emit_vhdl(elab, &opts) {
                        Ok(u) => u,
                        Err(d) => return self.outcome.fail(d),
                    };
                    for u in units {
                        self.emit(dir, &u.file_name, &u.text)?;
                    }
                }
                Emit::Dot => self.emit(dir, &format!("{stem}.dot"), &emit_dot(src))?,
                Emit::Pretty => self.emit(dir, &format!("{stem}.txt"), &pretty(src))?,
                Emit::Sexp => match emit_sexpir(elab) {
                    Ok(t) => self.emit(dir, &format!("{stem}.sexp"), &t)?,
                    Err(d) => return self.outcome.fail(d),
                },
            }
        }
        Ok(())
    }

    fn run(&mut self, cmd: &Command) -> Result<(), ()> {
        let (c, implied) = match cmd {
            Command::Check(c) => (c, None),
            Command::Vhdl(c) | Command::FromSexp(c) => (c, Some(Emit::Vhdl)),
            Command::Dot(c) => (c, Some(Emit::Dot)),
            Command::Pretty(c) => (c, Some(Emit::Pretty)),
            Command::ToSexp(c) => (c, Some(Emit::Sexp)),
            Command::Sim { common, .. } => (common, None),
        };
        let (def, warnings) = match load_circuit(&c.input, c.ports.as_deref()) {
            Ok(x) => x,
            Err(d) => return self.outcome.fail(d),
        };
        self.outcome.diags.extend(warnings);
        let elab = match elaborate(&def) {
            Ok(e) => e,
            Err(d) => return self.outcome.fail(d),
        };
        self.outcome.diags.extend(elab.warnings.clone());

        let mut kinds: Vec<Emit> = Vec::new();
        let explicit = !c.emit.is_empty();
        match implied {
            Some(Emit::Vhdl) if matches!(cmd, Command::FromSexp(_)) && explicit => {}
            Some(k) => kinds.push(k),
            None => {}
        }
        for k in &c.emit {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
        self.outputs(c, &def, &elab, &kinds)?;

        if let Command::Sim { script, .. } = cmd {
            let text = match std::fs::read_to_string(script) {
                Ok(t) => t,
                Err(e) => return self.outcome.fail(io_error(script, e)),
            };
            let stim = match Stimulus::parse(&text) {
                Ok(s) => s,
                Err(d) => return self.outcome.fail(d),
            };
            let mut sim = match Simulator::new(&elab) {
                Ok(s) => s,
                Err(d) => return self.outcome.fail(d),
            };
            match run_stimulus(&mut sim, &stim) {
                Ok(t) => {
                    let _ = write!(self.out, "{t}");
                    self.outcome.diags.extend(t.diagnostics(elab.name()));
                }
                Err(d) => return self.outcome.fail(d),
            }
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the tool. Returns
/// the exit status: 0 iff no error diagnostic was produced, 2 for usage
/// errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let structured = match &cli.command {
        Command::Check(c)
        | Command::Vhdl(c)
        | Command::Dot(c)
        | Command::Pretty(c)
        | Command::ToSexp(c)
        | Command::FromSexp(c)
        | Command::Sim { common: c, .. } => c.structured,
    };
    let mut d = Driver {
        out,
        outcome: Outcome {
            diags: Diagnostics::new(),
        },
    };
    let _ = d.run(&cli.command);
    let diags = d.outcome.diags;
    if structured {
        let _ = writeln!(err, "{}", diags.to_json());
    } else {
        let _ = write!(err, "{diags}");
    }
    i32::from(diags.has_errors())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut full = vec!["rtlforge"];
        full.extend_from_slice(args);
        let code = run(full, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn check_builtin_is_silent() {
        assert_eq!(call(&["check", "builtin:fsm1"]), (0, String::new(), String::new()));
    }

    #[test]
    fn unknown_builtin_fails() {
        let (code, _, err) = call(&["check", "builtin:nope"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error unknown-name"), "{err}");
    }

    #[test]
    fn repeated_emit_to_directory() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, stdout, _) = call(&["vhdl", "builtin:counter", "--emit", "dot", "--emit", "pretty", "-o", out]);
        assert_eq!(code, 0);
        assert!(stdout.is_empty());
        for f in ["counter_c.vhd", "rtlforge_support.vhd", "counter.dot", "counter.txt"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn usage_error() {
        assert_eq!(call(&["frobnicate"]).0, 2);
    }

    #[test]
    fn structured_diagnostics() {
        let (code, _, err) = call(&["check", "builtin:adder:0", "--structured"]);
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert!(v.as_array().is_some_and(|a| !a.is_empty()));
    }
}
