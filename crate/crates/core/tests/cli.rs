// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rtlforge"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn uart() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/uart.sexp")
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn from_sexp_writes_entity_and_support_package() {
    let out = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(bin().arg("from-sexp").arg(uart()).args(["--emit", "vhdl", "-o"]).arg(out.path()));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.is_empty());
    let entity = std::fs::read_to_string(out.path().join("uart_c.vhd")).unwrap();
    let support = std::fs::read_to_string(out.path().join("rtlforge_support.vhd")).unwrap();
    assert!(entity.contains("entity uart_c is"));
    assert!(entity.contains("rx : in std_logic_vector(0 downto 0)"), "{entity}");
    assert!(entity.contains("signal rx_strobe"));
    assert!(support.contains("package rtlforge_support is"));
    // nothing but the two units and no temporary leftovers
    let mut names: Vec<String> = std::fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["rtlforge_support.vhd", "uart_c.vhd"]);
}

#[test]
fn unbalanced_file_reports_one_parse_error() {
    let (code, stdout, stderr) = run(bin().arg("check").arg(data("bad.sexp")).arg("--structured"));
    assert_ne!(code, 0);
    assert!(stdout.is_empty());
    let diags: serde_json::Value = serde_json::from_str(&stderr).unwrap();
    let diags = diags.as_array().unwrap();
    assert_eq!(diags.len(), 1, "{stderr}");
    assert_eq!(diags[0]["rule"], "unbalanced-paren");
    assert_eq!(diags[0]["severity"], "error");
}

#[test]
fn failing_expect_sets_exit_status() {
    let (code, stdout, stderr) =
        run(bin().arg("sim").arg(data("counter.sexp")).arg("--script").arg(data("counter_fail.stim")));
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL line 4 cycle 3: count = 3 (expected 4)"), "{stdout}");
    assert!(stderr.contains("expect-failed"), "{stderr}");
}

#[test]
fn passing_script_exits_zero() {
    let stim = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(stim.path(), "poke tick 1\nstep 256\nexpect count 0\n").unwrap();
    let (code, stdout, _) = run(bin().args(["sim", "builtin:counter", "--script"]).arg(stim.path()));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("ok line 3 cycle 256"), "{stdout}");
}

#[test]
fn builtin_through_sexp_file_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(bin().args(["to-sexp", "builtin:fsm1", "-o"]).arg(dir.path()));
    assert_eq!(code, 0);
    let file = dir.path().join("fsm1.sexp");
    let (code, vhdl, stderr) = run(bin().arg("from-sexp").arg(&file));
    assert_eq!(code, 0, "{stderr}");
    assert!(vhdl.contains("entity fsm1_c is"));
    let (code, again, _) = run(bin().args(["to-sexp"]).arg(&file));
    assert_eq!(code, 0);
    assert_eq!(again, std::fs::read_to_string(&file).unwrap());
}

#[test]
fn port_overrides_change_directions() {
    let ports = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(ports.path(), "# expose the strobe\noutput rx_strobe\n").unwrap();
    let (code, text, stderr) = run(bin().arg("vhdl").arg(uart()).arg("--ports").arg(ports.path()));
    assert_eq!(code, 0, "{stderr}");
    assert!(text.contains("rx_strobe : out"), "{text}");
}

#[test]
fn custom_clock_and_reset_names() {
    let (code, text, _) = run(bin().args(["vhdl", "builtin:counter", "--clock", "sys_clk", "--reset", "rst_n"]));
    assert_eq!(code, 0);
    assert!(text.contains("rising_edge(sys_clk)"));
    assert!(text.contains("if rst_n='0' then"));
}

#[test]
fn every_subcommand_accepts_builtins() {
    for sub in ["check", "vhdl", "dot", "pretty", "to-sexp"] {
        for name in ["half_adder", "full_adder", "adder:3", "counter", "fsm1"] {
            let (code, _, stderr) = run(bin().args([sub, &format!("builtin:{name}")]));
            assert_eq!(code, 0, "{sub} {name}: {stderr}");
        }
    }
}

#[test]
fn missing_input_file() {
    let (code, _, stderr) = run(bin().args(["check", "/nonexistent/x.sexp"]));
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error io"), "{stderr}");
}
