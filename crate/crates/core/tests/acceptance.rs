// SPDX-License-Identifier: Apache-2.0
//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rtlforge::backends::{emit_dot, emit_vhdl, pretty, VhdlOptions};
use rtlforge::builtins;
use rtlforge::diag::Rule;
use rtlforge::elaborate::{
    const_eval, elaborate, infer_ports, ConstEnv, ConstValue, EdgeKind, ElaboratedCircuit, PortClass,
};
use rtlforge::ir::{count_kinds, CircuitBuilder, CircuitDef, Expr, SignalKind, StmtKind, TypeDesc};
use rtlforge::sexpir::{emit_sexpir, parse, print, read_circuit, SexpNode, OPERATORS};
use rtlforge::sim::Simulator;
use rtlforge::typesys::{check_assign, Conversion, PlanNode, SymbolTable};

const UART: &str = include_str!("../examples/data/uart.sexp");

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

enum Verdict {
    Pass,
    Fail(String),
    Skip(String),
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn elab(c: &CircuitDef) -> Result<ElaboratedCircuit, String> {
    elaborate(c).map_err(|d| d.to_string())
}

fn width(e: &ElaboratedCircuit, name: &str) -> u64 {
    e.symbols.get(name).and_then(|s| s.ty.width()).expect("scalar signal")
}

// 1 ---------------------------------------------------------------------

enum Expected {
    Accept(Vec<Conversion>),
    Reject(Rule),
}

fn conversion_table() -> Outcome {
    let mut syms = SymbolTable::new();
    for (n, ty) in [
        ("a", TypeDesc::Bit),
        ("f1", TypeDesc::Bit),
        ("f2", TypeDesc::Bit),
        ("b", TypeDesc::BitVector(8)),
        ("w1", TypeDesc::BitVector(8)),
        ("w2", TypeDesc::Bit),
        ("w3", TypeDesc::Signed(8)),
    ] {
        syms.insert(n, ty, SignalKind::Wire);
    }
    let a = Expr::sig("a");
    // (target type, rhs, outcome; for accepts, conversions on the
    // rightmost leaf)
    let cases = [
        ("f2 <= 1", TypeDesc::Bit, Expr::lit(1), Expected::Accept(vec![])),
        ("f1 <= 42", TypeDesc::Bit, Expr::lit(42), Expected::Reject(Rule::LiteralTooWide)),
        (
            "w1 <= a + 1",
            TypeDesc::BitVector(8),
            &a + 1,
            Expected::Accept(vec![Conversion::Resize(8)]),
        ),
        ("w2 <= a + 1", TypeDesc::Bit, &a + 1, Expected::Reject(Rule::ArithmeticIntoBit)),
        ("w2 <= 1 + 1", TypeDesc::Bit, Expr::lit(1) + 1, Expected::Reject(Rule::LiteralTooWide)),
        (
            "w3 <= a + 5",
            TypeDesc::Signed(8),
            &a + 5,
            Expected::Accept(vec![Conversion::Resize(8), Conversion::ToSigned(8)]),
        ),
    ];
    for (label, ty, rhs, expected) in cases {
        let got = check_assign(&ty, &rhs, &syms);
        match (expected, got) {
            (Expected::Accept(conv), Ok(plan)) => {
                let leaf = match &plan.node {
                    PlanNode::Binary(_, _, r) => r.conversions.clone(),
                    _ => plan.conversions.clone(),
                };
                ensure!(leaf == conv, "{label}: conversions {leaf:?}, wanted {conv:?}");
                ensure!(plan.ty == ty, "{label}: result type {:?}", plan.ty);
            }
            (Expected::Reject(rule), Err(d)) => ensure!(d.rule == rule, "{label}: rejected as {}", d.rule.id()),
            (Expected::Accept(_), Err(d)) => return Err(format!("{label}: unexpected error {d}")),
            (Expected::Reject(rule), Ok(_)) => return Err(format!("{label}: accepted, wanted {}", rule.id())),
        }
    }

    // the accepted conversions as emitted text
    let mut b = CircuitBuilder::new("conv");
    let a = b.input("a").map_err(|d| d.to_string())?;
    let w1 = b.output_of("w1", TypeDesc::BitVector(8)).map_err(|d| d.to_string())?;
    let w3 = b.output_of("w3", TypeDesc::Signed(8)).map_err(|d| d.to_string())?;
    b.assign(&w1, &a + 1).map_err(|d| d.to_string())?;
    b.assign(&w3, &a + 5).map_err(|d| d.to_string())?;
    let e = elab(&b.finish().map_err(|d| d.to_string())?)?;
    let units = emit_vhdl(&e, &VhdlOptions::default()).map_err(|d| d.to_string())?;
    let text = &units.last().expect("entity unit").text;
    let line = |target: &str| text.lines().find(|l| l.trim_start().starts_with(target)).unwrap_or("");
    ensure!(line("w1 <=").contains("resize(a,8)"), "w1 line: {}", line("w1 <="));
    ensure!(line("w3 <=").contains("signed(resize(a,8))"), "w3 line: {}", line("w3 <="));
    Ok(())
}

// 2 ---------------------------------------------------------------------

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase()
}

fn fsm_codegen() -> Outcome {
    let e = elab(&builtins::fsm1())?;
    let units = emit_vhdl(&e, &VhdlOptions::default()).map_err(|d| d.to_string())?;
    let text = units.iter().map(|u| u.text.as_str()).collect::<String>();
    let norm = squash(&text);
    for anchor in [
        "type simple_state_t is (s0,s1,s2)",
        "if reset_n='0'",
        "if sreset='1'",
        "f <= to_bv(1,2)",
        "if (to_uint(go,1) = 1)",
    ] {
        ensure!(norm.contains(&squash(anchor)), "missing `{anchor}`");
    }
    // the asynchronous branch precedes the clocked one
    let arst = norm.find("ifreset_n='0'").unwrap_or(usize::MAX);
    let edge = norm.find("rising_edge(clk)").unwrap_or(0);
    ensure!(arst < edge, "reset branch is not first");
    Ok(())
}

// 3 ---------------------------------------------------------------------

fn adder_exhaustive() -> Outcome {
    let e = elab(&builtins::adder(8).map_err(|d| d.to_string())?)?;
    let mut sim = Simulator::new(&e).map_err(|d| d.to_string())?;
    for a in 0u64..256 {
        for b in 0u64..256 {
            sim.poke_many(&[("a", a), ("b", b)]).map_err(|d| d.to_string())?;
            let sum = sim.peek("sum").map_err(|d| d.to_string())?;
            let cout = sim.peek("cout").map_err(|d| d.to_string())?;
            let total = a + b;
            ensure!(
                sum == total % 256 && cout == total / 256,
                "{a} + {b}: sum {sum} cout {cout}"
            );
        }
    }
    Ok(())
}

// 4 ---------------------------------------------------------------------

fn counter_wraps() -> Outcome {
    let e = elab(&builtins::counter())?;
    let mut sim = Simulator::new(&e).map_err(|d| d.to_string())?;
    sim.poke("tick", 1).map_err(|d| d.to_string())?;
    for cycle in 0u64..=300 {
        let count = sim.peek("count").map_err(|d| d.to_string())?;
        ensure!(count == cycle % 256, "cycle {cycle}: count {count}");
        sim.step();
    }
    sim.poke("tick", 0).map_err(|d| d.to_string())?;
    let held = sim.peek("count").map_err(|d| d.to_string())?;
    for _ in 0..20 {
        sim.step();
        let now = sim.peek("count").map_err(|d| d.to_string())?;
        ensure!(now == held, "count moved from {held} to {now} with tick=0");
    }
    Ok(())
}

// 5 ---------------------------------------------------------------------

fn fsm_sequence() -> Outcome {
    let e = elab(&builtins::fsm1())?;
    let mut sim = Simulator::new(&e).map_err(|d| d.to_string())?;
    sim.poke("go", 1).map_err(|d| d.to_string())?;
    let mut seen = Vec::new();
    for _ in 0..6 {
        sim.step();
        seen.push(sim.peek("f").map_err(|d| d.to_string())?);
    }
    ensure!(seen == [1, 2, 3, 1, 2, 3], "go=1: f = {seen:?}");

    let state = &e.state_registers[0].name;
    sim.reset();
    sim.poke("go", 0).map_err(|d| d.to_string())?;
    for cycle in 0..6 {
        sim.step();
        let s = sim.peek(state).map_err(|d| d.to_string())?;
        let f = sim.peek("f").map_err(|d| d.to_string())?;
        ensure!(s == 0 && f == 1, "go=0 cycle {cycle}: state {s} f {f}");
    }
    Ok(())
}

// 6 ---------------------------------------------------------------------

type Shape = (
    BTreeMap<String, u64>,
    BTreeMap<StmtKind, usize>,
    BTreeSet<(String, String, EdgeKind)>,
);

fn shape(e: &ElaboratedCircuit) -> Shape {
    let widths = e
        .symbols
        .iter()
        .map(|(k, s)| (k.clone(), s.ty.width().unwrap_or(0)))
        .collect();
    (widths, count_kinds(&e.lowered.statements), e.graph.edges())
}

fn random_atom(rng: &mut StdRng) -> SexpNode {
    match rng.gen_range(0..3) {
        0 => {
            let len = rng.gen_range(1..8);
            let mut s = String::new();
            s.push(rng.gen_range(b'a'..=b'z') as char);
            for _ in 1..len {
                let pool = b"abcdefghijklmnopqrstuvwxyz0123456789_";
                s.push(pool[rng.gen_range(0..pool.len())] as char);
            }
            SexpNode::ident(s)
        }
        1 => SexpNode::int(rng.gen_range(-1_000_000i64..1_000_000)),
        _ => SexpNode::op(OPERATORS[rng.gen_range(0..OPERATORS.len())]),
    }
}

fn random_tree(rng: &mut StdRng, depth: u32) -> SexpNode {
    let n = rng.gen_range(0..6);
    SexpNode::list((0..n).map(|_| {
        if depth > 0 && rng.gen_bool(0.35) {
            random_tree(rng, depth - 1)
        } else {
            random_atom(rng)
        }
    }))
}

fn sexpir_round_trip() -> Outcome {
    for (spec, c) in builtins::all() {
        let e = elab(&c)?;
        let text = emit_sexpir(&e).map_err(|d| format!("{spec}: {d}"))?;
        let back = elab(&read_circuit(&text).map_err(|d| format!("{spec}: {d}"))?)?;
        let flat = elab(&e.flatten().map_err(|d| d.to_string())?)?;
        let (want, got) = (shape(&flat), shape(&back));
        ensure!(want.0 == got.0, "{spec}: signals {:?} vs {:?}", want.0, got.0);
        ensure!(want.1 == got.1, "{spec}: statement kinds {:?} vs {:?}", want.1, got.1);
        ensure!(want.2 == got.2, "{spec}: dependency edges differ");
        let again = emit_sexpir(&back).map_err(|d| d.to_string())?;
        ensure!(again == text, "{spec}: second emission differs");
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for i in 0..100 {
        let tree = random_tree(&mut rng, 4);
        let printed = print(&tree);
        let reparsed = parse(&printed).map_err(|d| format!("tree {i}: {d}\n{printed}"))?;
        ensure!(reparsed == tree, "tree {i} changed:\n{printed}");
    }
    Ok(())
}

// 7 ---------------------------------------------------------------------

fn uart_ports() -> Outcome {
    let def = read_circuit(UART).map_err(|d| d.to_string())?;
    let (promoted, part, diags) = infer_ports(&def, None);
    ensure!(!diags.has_errors(), "{diags}");
    for (name, class) in [
        ("sys_rst", PortClass::Input),
        ("sys_clk", PortClass::Input),
        ("rx_strobe", PortClass::Internal),
    ] {
        ensure!(part.class_of(name) == Some(class), "{name}: {:?}", part.class_of(name));
    }
    let all: BTreeSet<&str> = def
        .ports
        .iter()
        .map(|p| p.name.as_str())
        .chain(def.wires.iter().map(|w| w.name.as_str()))
        .collect();
    let total = part.inputs.len() + part.outputs.len() + part.internals.len();
    ensure!(total == all.len(), "{total} classified of {}", all.len());
    ensure!(all.iter().all(|n| part.class_of(n).is_some()), "unclassified signal");
    for _ in 0..5 {
        let (p2, again, _) = infer_ports(&def, None);
        ensure!(again == part && p2 == promoted, "classification changed between runs");
    }
    elab(&promoted)?;
    Ok(())
}

// 8 ---------------------------------------------------------------------

fn constant_evaluation() -> Outcome {
    let c = builtins::complex_memory();
    let env = ConstEnv::from_circuit(&c);
    let mem = Expr::sig("mem");
    let im = const_eval(&mem.index(13).field("im"), &env).map_err(|d| d.to_string())?;
    let re = const_eval(&mem.index(0).field("re"), &env).map_err(|d| d.to_string())?;
    ensure!(im == ConstValue::Int(26), "mem[13].im = {im:?}");
    ensure!(re == ConstValue::Int(0), "mem[0].re = {re:?}");
    Ok(())
}

// 9 ---------------------------------------------------------------------

fn emissions(c: &CircuitDef) -> Result<Vec<String>, String> {
    let e = elab(c)?;
    let mut out: Vec<String> = emit_vhdl(&e, &VhdlOptions::default())
        .map_err(|d| d.to_string())?
        .into_iter()
        .map(|u| u.text)
        .collect();
    out.push(emit_dot(c));
    out.push(pretty(c));
    out.push(emit_sexpir(&e).map_err(|d| d.to_string())?);
    Ok(out)
}

fn trace(e: &ElaboratedCircuit, sim: &mut Simulator, seed: u64) -> Result<Vec<Vec<(String, u64)>>, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let inputs: Vec<(String, u64)> = sim.inputs().iter().map(|n| (n.clone(), width(e, n))).collect();
    let mut rows = Vec::new();
    for _ in 0..40 {
        for (n, w) in &inputs {
            let v = if *w >= 64 { rng.gen() } else { rng.gen_range(0..1u64 << w) };
            sim.poke(n, v).map_err(|d| d.to_string())?;
        }
        rows.push(sim.output_values());
        sim.step();
        rows.push(sim.output_values());
    }
    Ok(rows)
}

fn determinism() -> Outcome {
    for (spec, c) in builtins::all() {
        let first = emissions(&c)?;
        for _ in 0..3 {
            ensure!(emissions(&c)? == first, "{spec}: emission not byte-identical");
        }
        let e = elab(&c)?;
        let mut base = Simulator::new(&e).map_err(|d| d.to_string())?;
        let want = trace(&e, &mut base, 7)?;
        for shuffle in 0..10 {
            let mut sim = Simulator::with_seed(&e, 1000 + shuffle).map_err(|d| d.to_string())?;
            ensure!(trace(&e, &mut sim, 7)? == want, "{spec}: shuffle {shuffle} diverged");
        }
    }
    Ok(())
}

// 10 --------------------------------------------------------------------

fn ghdl_analysis() -> Result<Verdict, String> {
    use std::process::Command;
    let present = Command::new("ghdl").arg("--version").output().is_ok_and(|o| o.status.success());
    if !present {
        return Ok(Verdict::Skip("ghdl not found".into()));
    }
    for (spec, c) in builtins::all() {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let e = elab(&c)?;
        let units = emit_vhdl(&e, &VhdlOptions::default()).map_err(|d| d.to_string())?;
        for u in &units {
            let path = dir.path().join(&u.file_name);
            std::fs::write(&path, &u.text).map_err(|e| e.to_string())?;
            let out = Command::new("ghdl")
                .args(["-a", "--std=08"])
                .arg(&path)
                .current_dir(dir.path())
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Ok(Verdict::Fail(format!(
                    "{spec}/{}: {}",
                    u.file_name,
                    String::from_utf8_lossy(&out.stderr)
                )));
            }
        }
    }
    Ok(Verdict::Pass)
}

fn main() -> ExitCode {
    let plain: [Criterion; 9] = [
        ("conversion table", conversion_table, Duration::from_secs(1)),
        ("fsm codegen anchors", fsm_codegen, Duration::from_secs(1)),
        ("adder:8 exhaustive", adder_exhaustive, Duration::from_secs(10)),
        ("counter wrap and hold", counter_wraps, Duration::from_secs(1)),
        ("fsm sequencing", fsm_sequence, Duration::from_secs(1)),
        ("sexpir round trip", sexpir_round_trip, Duration::from_secs(5)),
        ("uart port inference", uart_ports, Duration::from_secs(1)),
        ("constant evaluation", constant_evaluation, Duration::from_secs(1)),
        ("determinism and shuffles", determinism, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    let mut report = |n: usize, name: &str, v: Verdict, took: Duration| {
        let ms = took.as_millis();
        match v {
            Verdict::Pass => println!("PASS {n:>2} {name} ({ms} ms)"),
            Verdict::Skip(why) => println!("SKIP {n:>2} {name}: {why}"),
            Verdict::Fail(why) => {
                failed += 1;
                println!("FAIL {n:>2} {name} ({ms} ms): {why}");
            }
        }
    };
    for (i, (name, check, budget)) in plain.into_iter().enumerate() {
        let t = Instant::now();
        let v = match check() {
            Ok(()) if t.elapsed() <= budget => Verdict::Pass,
            Ok(()) => Verdict::Fail(format!("over the {} ms budget", budget.as_millis())),
            Err(e) => Verdict::Fail(e),
        };
        report(i + 1, name, v, t.elapsed());
    }
    let t = Instant::now();
    let v = ghdl_analysis().unwrap_or_else(Verdict::Fail);
    report(10, "ghdl analysis", v, t.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
