// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use rtlforge::builtins;
use rtlforge::elaborate::{elaborate, infer_ports, PortClass};
use rtlforge::ir::Direction;
use rtlforge::sexpir::{parse, print, read_circuit, SexpNode, OPERATORS};
use rtlforge::sim::Simulator;

fn atom() -> impl Strategy<Value = SexpNode> {
    prop_oneof![
        "[a-z_][a-z0-9_]{0,7}".prop_map(SexpNode::ident),
        any::<i64>().prop_map(SexpNode::int),
        proptest::sample::select(OPERATORS).prop_map(SexpNode::op),
    ]
}

fn tree() -> impl Strategy<Value = SexpNode> {
    let leaf = prop::collection::vec(atom(), 0..4).prop_map(SexpNode::list);
    leaf.prop_recursive(5, 96, 6, |inner| {
        prop::collection::vec(prop_oneof![atom(), inner], 0..6).prop_map(SexpNode::list)
    })
}

/// A flat chain `x0 -> x1 -> ... -> xn` of continuous assignments with an
/// optional unused signal, all declared as plain signals.
fn chain_file(len: usize, with_dangling: bool) -> String {
    let mut s = String::from("(circuit chain\n");
    for i in 0..=len {
        s.push_str(&format!("  (signal (name x{i}) (bits_sign 4))\n"));
    }
    if with_dangling {
        s.push_str("  (signal (name spare) (bits_sign 1))\n");
    }
    for i in 1..=len {
        s.push_str(&format!("  (assign x{i} (+ x{} 1))\n", i - 1));
    }
    s.push(')');
    s
}

proptest! {
    #[test]
    fn parse_inverts_print(t in tree()) {
        let text = print(&t);
        prop_assert_eq!(parse(&text).unwrap(), t);
    }

    #[test]
    fn printing_is_a_fixpoint(t in tree()) {
        let once = print(&t);
        prop_assert_eq!(print(&parse(&once).unwrap()), once);
    }

    #[test]
    fn chain_classification(len in 1usize..12, dangling: bool) {
        let def = read_circuit(&chain_file(len, dangling)).unwrap();
        let (ported, part, diags) = infer_ports(&def, None);
        prop_assert_eq!(part.class_of("x0"), Some(PortClass::Input));
        prop_assert_eq!(part.class_of(&format!("x{len}")), Some(PortClass::Output));
        for i in 1..len {
            prop_assert_eq!(part.class_of(&format!("x{i}")), Some(PortClass::Internal));
        }
        if dangling {
            prop_assert_eq!(part.class_of("spare"), Some(PortClass::Input));
            prop_assert_eq!(diags.len(), 1);
        }
        let total = part.inputs.len() + part.outputs.len() + part.internals.len();
        prop_assert_eq!(total, len + 1 + usize::from(dangling));

        // the chain adds its length to the input
        let e = elaborate(&ported).unwrap();
        let mut sim = Simulator::new(&e).unwrap();
        sim.poke("x0", 3).unwrap();
        prop_assert_eq!(sim.peek(&format!("x{len}")).unwrap(), (3 + len as u64) % 16);
        prop_assert!(ported.ports.iter().any(|p| p.name == "x0" && p.direction == Direction::Input));
    }

    #[test]
    fn adders_add(width in 1u32..=16, a: u64, b: u64, seed: u64) {
        let m = 1u64 << width;
        let (a, b) = (a % m, b % m);
        let e = elaborate(&builtins::adder(width).unwrap()).unwrap();
        let mut sim = Simulator::with_seed(&e, seed).unwrap();
        sim.poke_many(&[("a", a), ("b", b)]).unwrap();
        prop_assert_eq!(sim.peek("sum").unwrap(), (a + b) % m);
        prop_assert_eq!(sim.peek("cout").unwrap(), (a + b) / m);
    }

    #[test]
    fn counter_tracks_enabled_cycles(ticks in prop::collection::vec(any::<bool>(), 0..600)) {
        let e = elaborate(&builtins::counter()).unwrap();
        let mut sim = Simulator::new(&e).unwrap();
        let mut enabled = 0u64;
        for t in ticks {
            sim.poke("tick", u64::from(t)).unwrap();
            sim.step();
            enabled += u64::from(t);
            prop_assert_eq!(sim.peek("count").unwrap(), enabled % 256);
        }
    }

    #[test]
    fn poke_rejects_values_wider_than_the_port(v in 2u64..) {
        let e = elaborate(&builtins::half_adder()).unwrap();
        let mut sim = Simulator::new(&e).unwrap();
        prop_assert!(sim.poke("a", v).is_err());
        prop_assert!(sim.poke("a", v & 1).is_ok());
    }
}
