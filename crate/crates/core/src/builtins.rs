// SPDX-License-Identifier: Apache-2.0
//! Example circuits compiled into the library, addressable as
//! `builtin:<name>[:<param>]` from the command line.

use std::sync::Arc;

use crate::diag::{Diagnostic, Rule};
use crate::ir::{CircuitBuilder, CircuitDef, Expr, TypeDesc};

type Result<T> = std::result::Result<T, Diagnostic>;

/// Names accepted by [`lookup`]; `adder` takes an optional width.
pub const NAMES: &[&str] = &["half_adder", "full_adder", "adder", "counter", "fsm1"];

/// Width used for `builtin:adder` without a parameter.
pub const DEFAULT_ADDER_WIDTH: u32 = 8;

pub fn half_adder() -> CircuitDef {
    let mut b = CircuitBuilder::new("half_adder");
    build_half_adder(&mut b).expect("half_adder is well formed");
    b.finish().expect("half_adder is complete")
}

fn build_half_adder(b: &mut CircuitBuilder) -> Result<()> {
    let a = b.input("a")?;
    let bb = b.input("b")?;
    let sum = b.output("sum")?;
    let cout = b.output("cout")?;
    b.assign(sum, &a ^ &bb)?;
    b.assign(cout, &a & &bb)
}

pub fn full_adder() -> CircuitDef {
    full_adder_with(Arc::new(half_adder()))
}

fn full_adder_with(ha: Arc<CircuitDef>) -> CircuitDef {
    let build = || -> Result<CircuitDef> {
        let mut b = CircuitBuilder::new("full_adder");
        let a = b.input("a")?;
        let bb = b.input("b")?;
        let cin = b.input("cin")?;
        let sum = b.output("sum")?;
        let cout = b.output("cout")?;
        let ha1 = b.component("ha1", ha.clone())?;
        let ha2 = b.component("ha2", ha)?;
        b.assign(ha1.port("a"), a)?;
        b.assign(ha1.port("b"), bb)?;
        b.assign(ha2.port("a"), cin)?;
        b.assign(ha2.port("b"), ha1.port("sum"))?;
        b.assign(sum, ha2.port("sum"))?;
        b.assign(cout, ha1.port("cout") | ha2.port("cout"))?;
        b.finish()
    };
    build().expect("full_adder is well formed")
}

/// Ripple-carry adder of `nbits` full adders named `fa_0 .. fa_{n-1}`.
pub fn adder(nbits: u32) -> Result<CircuitDef> {
    if nbits == 0 {
        return Err(Diagnostic::error(Rule::InvalidWidth, "adder width must be at least 1"));
    }
    let fa = Arc::new(full_adder());
    let mut b = CircuitBuilder::new("adder");
    let a = b.input_of("a", TypeDesc::BitVector(nbits))?;
    let bb = b.input_of("b", TypeDesc::BitVector(nbits))?;
    let sum = b.output_of("sum", TypeDesc::BitVector(nbits))?;
    let cout = b.output("cout")?;
    let adders = (0..nbits)
        .map(|i| b.component(&format!("fa_{i}"), fa.clone()))
        .collect::<Result<Vec<_>>>()?;
    for (i, fa_i) in adders.iter().enumerate() {
        b.assign(fa_i.port("a"), a.index(i))?;
        b.assign(fa_i.port("b"), bb.index(i))?;
        if i == 0 {
            b.assign(fa_i.port("cin"), 0)?;
        } else {
            b.assign(fa_i.port("cin"), adders[i - 1].port("cout"))?;
        }
        b.assign(sum.index(i), fa_i.port("sum"))?;
    }
    b.assign(cout, adders[adders.len() - 1].port("cout"))?;
    b.finish()
}

pub fn counter() -> CircuitDef {
    let build = || -> Result<CircuitDef> {
        let mut b = CircuitBuilder::new("counter");
        let tick = b.input("tick")?;
        let count = b.output_of("count", "byte")?;
        b.sequential("counting", |b| {
            b.if_(tick.equals(1), |b| {
                b.if_(count.equals(255), |b| b.assign(&count, 0))?;
                b.else_(|b| b.assign(&count, &count + 1))
            })
        })?;
        b.finish()
    };
    build().expect("counter is well formed")
}

pub fn fsm1() -> CircuitDef {
    let build = || -> Result<CircuitDef> {
        let mut b = CircuitBuilder::new("fsm1");
        let go = b.input("go")?;
        let f = b.output_of("f", "bv2")?;
        b.fsm("simple", |b| {
            b.assign(&f, 0)?;
            b.state("s0", |b| {
                b.assign(&f, 1)?;
                b.if_(go.equals(1), |b| b.next_state("s1"))
            })?;
            b.state("s1", |b| {
                b.assign(&f, 2)?;
                b.next_state("s2")
            })?;
            b.state("s2", |b| {
                b.assign(&f, 3)?;
                b.next_state("s0")
            })
        })?;
        b.finish()
    };
    build().expect("fsm1 is well formed")
}

/// An array of 256 complex numbers, element `i` bound to `{re: i, im: 2i}`.
///
/// Literals wider than the 6-bit `int6` fields start at `i = 32` (`im`)
/// and `i = 64` (`re`), so the circuit does not elaborate; it exists for
/// elaboration-time constant evaluation.
pub fn complex_memory() -> CircuitDef {
    let build = || -> Result<CircuitDef> {
        let mut b = CircuitBuilder::new("complex_memory");
        b.typedef("cplx", TypeDesc::record([("re", "int6".into()), ("im", "int6".into())]))?;
        b.typedef("cplx_ary", TypeDesc::array(256, "cplx"))?;
        let mem = b.wire("mem", "cplx_ary")?;
        for i in 0..256u64 {
            b.assign(mem.index(i), Expr::aggregate([("re", i), ("im", i * 2)]))?;
        }
        b.finish()
    };
    build().expect("complex_memory is well formed")
}

/// Resolves `name[:param]` (without the `builtin:` prefix).
pub fn lookup(spec: &str) -> Result<CircuitDef> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let no_param = |c: CircuitDef| match param {
        None => Ok(c),
        Some(_) => Err(Diagnostic::error(
            Rule::Arity,
            format!("builtin `{name}` takes no parameter"),
        )),
    };
    match name {
        "half_adder" => no_param(half_adder()),
        "full_adder" => no_param(full_adder()),
        "counter" => no_param(counter()),
        "fsm1" => no_param(fsm1()),
        "adder" => {
            let n = match param {
                None => DEFAULT_ADDER_WIDTH,
                Some(p) => p.parse().map_err(|_| {
                    Diagnostic::error(Rule::NonIntegerWidth, format!("`{p}` is not a width"))
                })?,
            };
            adder(n)
        }
        _ => Err(Diagnostic::error(
            Rule::UnknownName,
            format!("no builtin named `{name}` (known: {})", NAMES.join(", ")),
        )),
    }
}

/// Every builtin with its default parameter, as `(spec, circuit)`.
pub fn all() -> Vec<(String, CircuitDef)> {
    NAMES
        .iter()
        .map(|n| {
            let spec = if *n == "adder" {
                format!("adder:{DEFAULT_ADDER_WIDTH}")
            } else {
                n.to_string()
            };
            let c = lookup(&spec).expect("builtins build");
            (spec, c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elaborate::{const_eval, elaborate, ConstEnv, ConstValue, EdgeKind};
    use crate::ir::{count_kinds, StmtKind};

    #[test]
    fn all_builtins_elaborate() {
        for (spec, c) in all() {
            let e = elaborate(&c).unwrap_or_else(|d| panic!("{spec}: {d}"));
            assert!(e.warnings.is_empty(), "{spec}: {}", e.warnings);
        }
    }

    #[test]
    fn half_adder_shape() {
        let e = elaborate(&half_adder()).unwrap();
        assert_eq!(e.lowered.ports.len(), 4);
        assert_eq!(count_kinds(&e.lowered.statements)[&StmtKind::Assign], 2);
        assert!(!e.has_registers());
    }

    #[test]
    fn adder_hierarchy() {
        let e = elaborate(&adder(8).unwrap()).unwrap();
        assert_eq!(e.lowered.instances.len(), 8);
        let names: Vec<&str> = e.children.iter().map(|c| c.name()).collect();
        assert_eq!(names, vec!["half_adder", "full_adder"]);
        assert!(e.graph.has_edge("fa_0.cout", "fa_1.cin", EdgeKind::Combinational));
        assert!(e.graph.has_edge("fa_0.cin", "fa_0.cout", EdgeKind::Combinational));
    }

    #[test]
    fn counter_edges_are_registered() {
        let e = elaborate(&counter()).unwrap();
        assert!(e.graph.has_edge("tick", "count", EdgeKind::Registered));
        assert!(e.graph.has_edge("count", "count", EdgeKind::Registered));
        assert!(e.graph.comb_cycles().is_empty());
    }

    #[test]
    fn fsm_lowering_is_idempotent() {
        let e = elaborate(&fsm1()).unwrap();
        assert_eq!(e.state_registers.len(), 1);
        assert_eq!(e.state_registers[0].name, "simple_state");
        let again = elaborate(&e.lowered).unwrap();
        assert!(e.same_lowering(&again));
    }

    #[test]
    fn complex_memory_constants() {
        let c = complex_memory();
        let env = ConstEnv::from_circuit(&c);
        let mem = Expr::sig("mem");
        assert_eq!(const_eval(&mem.index(13).field("im"), &env), Ok(ConstValue::Int(26)));
        assert_eq!(const_eval(&mem.index(0).field("re"), &env), Ok(ConstValue::Int(0)));
        assert!(elaborate(&c).is_err());
    }

    #[test]
    fn lookup_specs() {
        assert_eq!(lookup("adder:4").unwrap().port("a").unwrap().ty, TypeDesc::BitVector(4));
        assert!(lookup("adder:x").is_err());
        assert!(lookup("adder:0").is_err());
        assert!(lookup("counter:3").is_err());
        assert_eq!(lookup("nope").unwrap_err().rule, Rule::UnknownName);
    }
}
