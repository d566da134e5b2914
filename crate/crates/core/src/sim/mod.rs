// SPDX-License-Identifier: Apache-2.0
//! Cycle-based two-state simulator.
//!
//! The hierarchy is flattened first. Continuous assignments and
//! combinational blocks are settled in dependency order after every input
//! change; [`Simulator::step`] models one rising clock edge, with every
//! register reading pre-edge values. Registers start at zero, which is
//! also the reset state of every FSM.

mod compile;
mod stimulus;

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub use stimulus::{run_stimulus, Command, ExpectResult, Stimulus, Transcript};

use compile::{mask, CStmt, Compiler, Layout, Memory};
use crate::diag::{Diagnostic, Diagnostics, Rule};
use crate::elaborate::{elaborate, mangle, ElaboratedCircuit, TStmt};
use crate::ir::{Direction, SignalKind};

struct Process {
    body: Vec<CStmt>,
}

struct Immediate<'a> {
    slots: &'a mut [u64],
    changed: bool,
}

impl Memory for Immediate<'_> {
    fn read(&self, slot: usize) -> u64 {
        self.slots[slot]
    }
    fn write(&mut self, slot: usize, value: u64) {
        if self.slots[slot] != value {
            self.slots[slot] = value;
            self.changed = true;
        }
    }
}

struct TwoPhase<'a> {
    cur: &'a [u64],
    next: &'a mut [u64],
}

impl Memory for TwoPhase<'_> {
    fn read(&self, slot: usize) -> u64 {
        self.cur[slot]
    }
    fn write(&mut self, slot: usize, value: u64) {
        self.next[slot] = value;
    }
    fn pending(&self, slot: usize) -> u64 {
        self.next[slot]
    }
}

/// Simulation state of one elaborated circuit.
pub struct Simulator {
    name: String,
    layout: Layout,
    slots: Vec<u64>,
    /// Combinational processes grouped into strongly connected sets, in
    /// evaluation order.
    comb: Vec<Vec<Process>>,
    seq: Vec<Process>,
    registers: Vec<usize>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    dirty: bool,
    cycle: u64,
}

fn name_error(msg: String) -> Diagnostic {
    Diagnostic::error(Rule::UnknownName, msg)
}

impl Simulator {
    pub fn new(elab: &ElaboratedCircuit) -> Result<Simulator, Diagnostics> {
        Self::build(elab, None)
    }

    /// Same semantics with a pseudo-random (but valid) evaluation order.
    pub fn with_seed(elab: &ElaboratedCircuit, seed: u64) -> Result<Simulator, Diagnostics> {
        Self::build(elab, Some(seed))
    }

    fn build(elab: &ElaboratedCircuit, seed: Option<u64>) -> Result<Simulator, Diagnostics> {
        let flat = elaborate(&elab.flatten()?)?;
        let wrap = |d: Diagnostic| Diagnostics::from(d.in_circuit(elab.name()));
        let layout = Layout::new(&flat.symbols).map_err(wrap)?;
        let c = Compiler { layout: &layout };

        let mut comb_src: Vec<(Vec<CStmt>, Vec<String>, Vec<String>)> = Vec::new();
        let mut seq = Vec::new();
        let mut registers = Vec::new();
        for s in &flat.statements {
            let reads = s.reads();
            match s {
                TStmt::Sequential { body, .. } => {
                    for root in s.assigned_roots() {
                        let sl = &layout.signals[&root];
                        registers.extend(sl.base..sl.base + compile::leaf_count(&sl.ty));
                    }
                    seq.push(Process {
                        body: c.stmts(body).map_err(wrap)?,
                    });
                }
                TStmt::Combinatorial { body, .. } => {
                    comb_src.push((c.stmts(body).map_err(wrap)?, reads, s.assigned_roots()))
                }
                other => comb_src.push((vec![c.stmt(other).map_err(wrap)?], reads, other.assigned_roots())),
            }
        }

        // process dependency graph: writer -> reader
        let mut g = DiGraph::<usize, ()>::new();
        let ix: Vec<_> = (0..comb_src.len()).map(|i| g.add_node(i)).collect();
        let mut writers: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, (_, _, writes)) in comb_src.iter().enumerate() {
            for w in writes {
                writers.entry(w.as_str()).or_default().push(i);
            }
        }
        for (i, (_, reads, _)) in comb_src.iter().enumerate() {
            let mut seen = HashSet::new();
            for r in reads {
                for &w in writers.get(r.as_str()).into_iter().flatten() {
                    if seen.insert(w) {
                        g.add_edge(ix[w], ix[i], ());
                    }
                }
            }
        }
        let sccs = tarjan_scc(&g);
        let order = topological_groups(&g, &sccs, seed);
        let mut bodies: Vec<Option<Vec<CStmt>>> = comb_src.into_iter().map(|(b, _, _)| Some(b)).collect();
        let comb = order
            .into_iter()
            .map(|group| {
                group
                    .into_iter()
                    .map(|i| Process {
                        body: bodies[i].take().expect("each process once"),
                    })
                    .collect()
            })
            .collect();

        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for p in &flat.lowered.ports {
            match p.direction {
                Direction::Input => inputs.push(p.name.clone()),
                Direction::Output => outputs.push(p.name.clone()),
            }
        }
        let mut sim = Simulator {
            name: elab.name().to_string(),
            slots: vec![0; layout.widths.len()],
            layout,
            comb,
            seq,
            registers,
            inputs,
            outputs,
            dirty: true,
            cycle: 0,
        };
        sim.settle();
        Ok(sim)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Rising edges simulated since construction.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    fn settle(&mut self) {
        let widths = &self.layout.widths;
        for group in &self.comb {
            // an acyclic group settles in one pass; a cycle at process
            // level (never at signal level) needs a few
            let limit = if group.len() == 1 { 2 } else { group.len() * 4 + 2 };
            for _ in 0..limit {
                let mut m = Immediate {
                    slots: &mut self.slots,
                    changed: false,
                };
                for p in group {
                    p.body.iter().for_each(|s| s.exec(&mut m, widths));
                }
                if !m.changed {
                    break;
                }
            }
        }
        self.dirty = false;
    }

    fn settled(&mut self) {
        if self.dirty {
            self.settle();
        }
    }

    fn resolve(&self, name: &str) -> String {
        name.split('.').fold(String::new(), |acc, part| mangle(&acc, part))
    }

    fn scalar_slot(&self, name: &str) -> Result<(usize, u32), Diagnostic> {
        let key = self.resolve(name);
        let sl = self
            .layout
            .signals
            .get(&key)
            .ok_or_else(|| name_error(format!("no signal `{name}` in `{}`", self.name)))?;
        if compile::leaf_count(&sl.ty) != 1 {
            return Err(Diagnostic::error(
                Rule::Unsupported,
                format!("`{name}` has composite type {}", sl.ty),
            ));
        }
        Ok((sl.base, self.layout.widths[sl.base]))
    }

    fn set_input(&mut self, name: &str, value: u64) -> Result<(), Diagnostic> {
        if !self.inputs.iter().any(|i| i == name) {
            return Err(name_error(format!("`{name}` is not an input of `{}`", self.name)));
        }
        let (slot, w) = self.scalar_slot(name)?;
        if value & !mask(w) != 0 {
            return Err(Diagnostic::error(
                Rule::ValueOverflow,
                format!("{value} does not fit the {w}-bit input `{name}`"),
            ));
        }
        self.slots[slot] = value;
        self.dirty = true;
        Ok(())
    }

    pub fn poke(&mut self, name: &str, value: u64) -> Result<(), Diagnostic> {
        self.set_input(name, value)
    }

    /// Sets several inputs before settling once.
    pub fn poke_many(&mut self, values: &[(&str, u64)]) -> Result<(), Diagnostic> {
        values.iter().try_for_each(|(n, v)| self.set_input(n, *v))
    }

    /// Current raw value of a scalar signal. Hierarchical names use dots
    /// (`fa_0.ha1.sum`).
    pub fn peek(&mut self, name: &str) -> Result<u64, Diagnostic> {
        self.settled();
        let (slot, _) = self.scalar_slot(name)?;
        Ok(self.slots[slot])
    }

    /// All output values, in declaration order.
    pub fn output_values(&mut self) -> Vec<(String, u64)> {
        self.settled();
        let names = self.outputs.clone();
        names
            .into_iter()
            .filter_map(|n| self.scalar_slot(&n).ok().map(|(s, _)| (n, self.slots[s])))
            .collect()
    }

    /// One rising clock edge.
    pub fn step(&mut self) {
        self.settled();
        let mut next = self.slots.clone();
        {
            let mut m = TwoPhase {
                cur: &self.slots,
                next: &mut next,
            };
            for p in &self.seq {
                p.body.iter().for_each(|s| s.exec(&mut m, &self.layout.widths));
            }
        }
        for &r in &self.registers {
            self.slots[r] = next[r];
        }
        self.cycle += 1;
        self.settle();
    }

    pub fn step_n(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    /// Asynchronous reset: every register back to zero.
    pub fn reset(&mut self) {
        for &r in &self.registers {
            self.slots[r] = 0;
        }
        self.settle();
    }

    pub fn signal_kind(&self, name: &str) -> Option<SignalKind> {
        let key = self.resolve(name);
        self.layout.signals.get(&key)?;
        Some(if self.inputs.contains(&key) {
            SignalKind::Input
        } else if self.outputs.contains(&key) {
            SignalKind::Output
        } else {
            SignalKind::Wire
        })
    }
}

/// Strongly connected groups in a dependency-respecting order. With a
/// seed, ties between ready groups and the order inside a group are
/// broken at random.
fn topological_groups(
    g: &DiGraph<usize, ()>,
    sccs: &[Vec<petgraph::graph::NodeIndex>],
    seed: Option<u64>,
) -> Vec<Vec<usize>> {
    let mut group_of = vec![0; g.node_count()];
    for (k, scc) in sccs.iter().enumerate() {
        for n in scc {
            group_of[n.index()] = k;
        }
    }
    let mut indeg = vec![0usize; sccs.len()];
    let mut succ: Vec<HashSet<usize>> = vec![HashSet::new(); sccs.len()];
    for e in g.raw_edges() {
        let (a, b) = (group_of[e.source().index()], group_of[e.target().index()]);
        if a != b && succ[a].insert(b) {
            indeg[b] += 1;
        }
    }
    let mut rng = seed.map(StdRng::seed_from_u64);
    let mut ready: Vec<usize> = (0..sccs.len()).filter(|&k| indeg[k] == 0).collect();
    ready.sort_unstable();
    let mut out = Vec::with_capacity(sccs.len());
    while !ready.is_empty() {
        let pick = match rng.as_mut() {
            Some(r) => r.gen_range(0..ready.len()),
            None => 0,
        };
        let k = ready.remove(pick);
        let mut members: Vec<usize> = sccs[k].iter().map(|n| g[*n]).collect();
        members.sort_unstable();
        if let Some(r) = rng.as_mut() {
            use rand::seq::SliceRandom;
            members.shuffle(r);
        }
        out.push(members);
        let mut next: Vec<usize> = succ[k].iter().copied().collect();
        next.sort_unstable();
        for s in next {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                let at = ready.partition_point(|&x| x < s);
                ready.insert(at, s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    fn sim(def: &crate::ir::CircuitDef) -> Simulator {
        Simulator::new(&elaborate(def).unwrap()).unwrap()
    }

    #[test]
    fn half_adder_truth_table() {
        let mut s = sim(&builtins::half_adder());
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            s.poke_many(&[("a", a), ("b", b)]).unwrap();
            assert_eq!(s.peek("sum").unwrap(), a ^ b);
            assert_eq!(s.peek("cout").unwrap(), a & b);
        }
    }

    #[test]
    fn hierarchical_peek() {
        let mut s = sim(&builtins::full_adder());
        s.poke_many(&[("a", 1), ("b", 1), ("cin", 0)]).unwrap();
        assert_eq!(s.peek("ha1.cout").unwrap(), 1);
        assert_eq!(s.peek("cout").unwrap(), 1);
    }

    #[test]
    fn counter_counts() {
        let mut s = sim(&builtins::counter());
        s.poke("tick", 1).unwrap();
        s.step_n(3);
        assert_eq!(s.peek("count").unwrap(), 3);
        s.reset();
        assert_eq!(s.peek("count").unwrap(), 0);
    }

    #[test]
    fn poke_errors() {
        let mut s = sim(&builtins::counter());
        assert_eq!(s.poke("tick", 2).unwrap_err().rule, Rule::ValueOverflow);
        assert_eq!(s.poke("nope", 0).unwrap_err().rule, Rule::UnknownName);
        assert_eq!(s.poke("count", 0).unwrap_err().rule, Rule::UnknownName);
        assert_eq!(s.peek("nope").unwrap_err().rule, Rule::UnknownName);
    }

    #[test]
    fn seeded_orders_agree() {
        let e = elaborate(&builtins::adder(4).unwrap()).unwrap();
        let mut base = Simulator::new(&e).unwrap();
        for seed in 0..5 {
            let mut s = Simulator::with_seed(&e, seed).unwrap();
            for (a, b) in [(3, 5), (15, 15), (9, 6)] {
                s.poke_many(&[("a", a), ("b", b)]).unwrap();
                base.poke_many(&[("a", a), ("b", b)]).unwrap();
                assert_eq!(s.output_values(), base.output_values());
            }
        }
    }
}
