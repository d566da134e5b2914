// SPDX-License-Identifier: Apache-2.0
//! Signal-level data-dependency graph.

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;

use super::{ElaboratedCircuit, TStmt};
use crate::ir::Direction;
use crate::typesys::{Plan, PlanNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Combinational,
    Registered,
}

/// Nodes are signal keys (`name` or `inst.port`); an edge `s -> t` means
/// `s` is read when computing `t`.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    graph: DiGraph<String, EdgeKind>,
    nodes: IndexMap<String, NodeIndex>,
    seen: HashSet<(NodeIndex, NodeIndex, EdgeKind)>,
}

impl PartialEq for DependencyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.node_names() == other.node_names() && self.edges() == other.edges()
    }
}

impl DependencyGraph {
    pub fn new() -> Self {
        DependencyGraph::default()
    }

    pub fn add_node(&mut self, key: &str) -> NodeIndex {
        if let Some(&ix) = self.nodes.get(key) {
            return ix;
        }
        let ix = self.graph.add_node(key.to_string());
        self.nodes.insert(key.to_string(), ix);
        ix
    }

    pub fn add_edge(&mut self, from: &str, to: &str, kind: EdgeKind) {
        let (a, b) = (self.add_node(from), self.add_node(to));
        if self.seen.insert((a, b, kind)) {
            self.graph.add_edge(a, b, kind);
        }
    }

    pub fn node_names(&self) -> BTreeSet<&str> {
        self.nodes.keys().map(String::as_str).collect()
    }

    /// Sorted edge set, convenient for comparisons.
    pub fn edges(&self) -> BTreeSet<(String, String, EdgeKind)> {
        self.graph
            .edge_references()
            .map(|e| {
                (
                    self.graph[e.source()].clone(),
                    self.graph[e.target()].clone(),
                    *e.weight(),
                )
            })
            .collect()
    }

    pub fn has_edge(&self, from: &str, to: &str, kind: EdgeKind) -> bool {
        match (self.nodes.get(from), self.nodes.get(to)) {
            (Some(&a), Some(&b)) => self.seen.contains(&(a, b, kind)),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// True if `to` is reachable from `from` over combinational edges.
    pub fn comb_path(&self, from: &str, to: &str) -> bool {
        let (Some(&start), Some(&goal)) = (self.nodes.get(from), self.nodes.get(to)) else {
            return false;
        };
        let mut stack = vec![start];
        let mut visited = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == goal {
                return true;
            }
            if !visited.insert(n) {
                continue;
            }
            for e in self.graph.edges(n) {
                if *e.weight() == EdgeKind::Combinational {
                    stack.push(e.target());
                }
            }
        }
        false
    }

    /// Strongly connected components of the combinational subgraph that
    /// form cycles, each as a list of signal keys.
    pub fn comb_cycles(&self) -> Vec<Vec<String>> {
        let comb = self.graph.filter_map(
            |_, n| Some(n.clone()),
            |_, k| (*k == EdgeKind::Combinational).then_some(()),
        );
        let mut cycles: Vec<Vec<String>> = tarjan_scc(&comb)
            .into_iter()
            .filter(|scc| scc.len() > 1 || comb.contains_edge(scc[0], scc[0]))
            .map(|scc| {
                let mut names: Vec<String> = scc.into_iter().map(|n| comb[n].clone()).collect();
                names.sort();
                names
            })
            .collect();
        cycles.sort();
        cycles
    }
}

/// Collects every signal key read by a plan.
pub(crate) fn plan_reads(p: &Plan) -> Vec<String> {
    let mut v = Vec::new();
    p.reads(&mut v);
    v
}

/// Keys read by an lvalue other than the assigned root (dynamic indices).
pub(crate) fn target_index_reads(p: &Plan) -> Vec<String> {
    let mut v = Vec::new();
    let mut cur = p;
    loop {
        match &cur.node {
            PlanNode::Index(b, i) => {
                i.reads(&mut v);
                cur = b;
            }
            PlanNode::Field(b, _) => cur = b,
            _ => break,
        }
    }
    v
}

pub(crate) fn build(
    graph: &mut DependencyGraph,
    stmts: &[TStmt],
    instances: &[(String, &ElaboratedCircuit)],
) {
    fn walk(g: &mut DependencyGraph, stmts: &[TStmt], guards: &mut Vec<String>, kind: EdgeKind) {
        for s in stmts {
            match s {
                TStmt::Assign(a) => {
                    let Some(target) = a.lhs.root_key() else { continue };
                    let mut sources = plan_reads(&a.rhs);
                    sources.extend(target_index_reads(&a.lhs));
                    sources.extend(guards.iter().cloned());
                    for src in sources {
                        g.add_edge(&src, &target, kind);
                    }
                }
                TStmt::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    let mark = guards.len();
                    guards.extend(plan_reads(cond));
                    walk(g, then_body, guards, kind);
                    walk(g, else_body, guards, kind);
                    guards.truncate(mark);
                }
                TStmt::Case {
                    selector,
                    arms,
                    default,
                } => {
                    let mark = guards.len();
                    guards.extend(plan_reads(selector));
                    for arm in arms {
                        walk(g, &arm.body, guards, kind);
                    }
                    walk(g, default, guards, kind);
                    guards.truncate(mark);
                }
                TStmt::Sequential { body, .. } => walk(g, body, guards, EdgeKind::Registered),
                TStmt::Combinatorial { body, .. } => {
                    walk(g, body, guards, EdgeKind::Combinational)
                }
            }
        }
    }
    walk(graph, stmts, &mut Vec::new(), EdgeKind::Combinational);

    for (inst, child) in instances {
        let ports = &child.lowered.ports;
        for p in ports.iter().filter(|p| p.direction == Direction::Input) {
            for q in ports.iter().filter(|q| q.direction == Direction::Output) {
                if child.graph.comb_path(&p.name, &q.name) {
                    graph.add_edge(
                        &format!("{inst}.{}", p.name),
                        &format!("{inst}.{}", q.name),
                        EdgeKind::Combinational,
                    );
                }
            }
        }
    }
}

/// Rebuilds the dependency graph of an elaborated circuit.
pub fn build_dep_graph(elab: &ElaboratedCircuit) -> DependencyGraph {
    let mut g = DependencyGraph::new();
    for (key, _) in elab.symbols.iter() {
        g.add_node(key);
    }
    let instances: Vec<(String, &ElaboratedCircuit)> = elab
        .lowered
        .instances
        .iter()
        .map(|i| (i.name.clone(), elab.instance_child(&i.name).expect("elaborated child")))
        .collect();
    build(&mut g, &elab.statements, &instances);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_are_found() {
        let mut g = DependencyGraph::new();
        g.add_edge("x", "y", EdgeKind::Combinational);
        g.add_edge("y", "x", EdgeKind::Combinational);
        g.add_edge("c", "c", EdgeKind::Registered);
        assert_eq!(g.comb_cycles(), vec![vec!["x".to_string(), "y".to_string()]]);
        g.add_edge("z", "z", EdgeKind::Combinational);
        assert_eq!(g.comb_cycles().len(), 2);
    }

    #[test]
    fn comb_reachability_ignores_registers() {
        let mut g = DependencyGraph::new();
        g.add_edge("a", "r", EdgeKind::Registered);
        g.add_edge("r", "q", EdgeKind::Combinational);
        g.add_edge("b", "q", EdgeKind::Combinational);
        assert!(!g.comb_path("a", "q"));
        assert!(g.comb_path("b", "q"));
        assert!(g.comb_path("r", "q"));
    }
}
