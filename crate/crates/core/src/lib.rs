// SPDX-License-Identifier: Apache-2.0
//! Register-transfer-level circuits as data.
//!
//! A circuit is built with [`ir::CircuitBuilder`] or read from Sexpir text
//! ([`sexpir::read_circuit`]), then [`elaborate::elaborate`]d: names are
//! resolved, state machines lowered, every assignment type-checked with
//! contextual conversions ([`typesys`]) and a signal dependency graph
//! built. The result feeds the backends ([`backends`]: VHDL, Graphviz,
//! indented text), the Sexpir emitter and the cycle-based simulator
//! ([`sim`]).
//!
//! ```
//! use rtlforge::{builtins, elaborate::elaborate, sim::Simulator};
//!
//! let adder = elaborate(&builtins::adder(4).unwrap()).unwrap();
//! let mut sim = Simulator::new(&adder).unwrap();
//! sim.poke_many(&[("a", 9), ("b", 8)]).unwrap();
//! assert_eq!(sim.peek("sum").unwrap(), 1);
//! assert_eq!(sim.peek("cout").unwrap(), 1);
//! ```

pub mod diag;
pub mod ir;
pub mod typesys;
pub mod elaborate;
pub mod builtins;
pub mod sexpir;
pub mod backends;
pub mod sim;
pub mod cli;
