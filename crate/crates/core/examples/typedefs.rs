// SPDX-License-Identifier: Apache-2.0
//! Records, arrays and elaboration-time constant evaluation.

use rtlforge::backends::{emit_vhdl, UnitKind, VhdlOptions};
use rtlforge::builtins;
use rtlforge::elaborate::{const_eval, elaborate, ConstEnv};
use rtlforge::ir::{CircuitBuilder, Expr, TypeDesc};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a 256-entry table of complex numbers bound element by element
    let mem_def = builtins::complex_memory();
    let env = ConstEnv::from_circuit(&mem_def);
    let mem = Expr::sig("mem");
    for i in [0u64, 1, 13, 31] {
        let re = const_eval(&mem.index(i).field("re"), &env)?;
        let im = const_eval(&mem.index(i).field("im"), &env)?;
        println!("mem[{i}] = {{re: {re:?}, im: {im:?}}}");
    }
    // the same table does not fit its 6-bit fields once it is checked
    if let Err(d) = elaborate(&mem_def) {
        println!("elaboration: {} diagnostic(s), first: {}", d.len(), d.iter().next().expect("one"));
    }

    // a record port emitted with its own type package
    let mut b = CircuitBuilder::new("swap");
    b.typedef("cplx", TypeDesc::record([("re", TypeDesc::Signed(8)), ("im", TypeDesc::Signed(8))]))?;
    let x = b.input_of("x", "cplx")?;
    let y = b.output_of("y", "cplx")?;
    b.assign(y.field("re"), x.field("im"))?;
    b.assign(y.field("im"), x.field("re"))?;
    let elab = elaborate(&b.finish()?)?;
    for unit in emit_vhdl(&elab, &VhdlOptions::default())? {
        if unit.kind != UnitKind::SupportPackage {
            println!("-- {}\n{}", unit.file_name, unit.text);
        }
    }
    Ok(())
}
