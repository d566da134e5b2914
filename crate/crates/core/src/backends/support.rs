// SPDX-License-Identifier: Apache-2.0
//! The fixed VHDL helper package referenced by every generated entity.

use super::{EmissionUnit, UnitKind};

pub const SUPPORT_PACKAGE: &str = "rtlforge_support";

const TEXT: &str = r#"-- Helper functions used by generated entities.
library ieee;
use ieee.std_logic_1164.all;
use ieee.numeric_std.all;

package rtlforge_support is
  function to_bv(v : integer; w : natural) return std_logic_vector;
  function to_uint(b : std_logic; w : natural) return unsigned;
  function to_uint(v : std_logic_vector; w : natural) return unsigned;
  function resize(b : std_logic; w : natural) return std_logic_vector;
  function resize(v : std_logic_vector; w : natural) return std_logic_vector;
  function to_sl(b : boolean) return std_logic;
  function to_sl(v : std_logic_vector) return std_logic;
  function "+"(a, b : std_logic_vector) return std_logic_vector;
  function "-"(a, b : std_logic_vector) return std_logic_vector;
  function "-"(a : std_logic_vector) return std_logic_vector;
  function "-"(a : unsigned) return unsigned;
end package rtlforge_support;

package body rtlforge_support is
  function to_bv(v : integer; w : natural) return std_logic_vector is
  begin
    if v < 0 then
      return std_logic_vector(to_signed(v, w));
    end if;
    return std_logic_vector(to_unsigned(v, w));
  end function to_bv;

  function to_uint(b : std_logic; w : natural) return unsigned is
    variable r : unsigned(w - 1 downto 0) := (others => '0');
  begin
    r(0) := b;
    return r;
  end function to_uint;

  function to_uint(v : std_logic_vector; w : natural) return unsigned is
  begin
    return resize(unsigned(v), w);
  end function to_uint;

  function resize(b : std_logic; w : natural) return std_logic_vector is
    variable r : std_logic_vector(w - 1 downto 0) := (others => '0');
  begin
    r(0) := b;
    return r;
  end function resize;

  function resize(v : std_logic_vector; w : natural) return std_logic_vector is
  begin
    return std_logic_vector(resize(unsigned(v), w));
  end function resize;

  function to_sl(b : boolean) return std_logic is
  begin
    if b then
      return '1';
    end if;
    return '0';
  end function to_sl;

  function to_sl(v : std_logic_vector) return std_logic is
  begin
    return v(v'low);
  end function to_sl;

  function "+"(a, b : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(unsigned(a) + unsigned(b));
  end function "+";

  function "-"(a, b : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(unsigned(a) - unsigned(b));
  end function "-";

  function "-"(a : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(to_unsigned(0, a'length) - unsigned(a));
  end function "-";

  function "-"(a : unsigned) return unsigned is
  begin
    return to_unsigned(0, a'length) - a;
  end function "-";
end package body rtlforge_support;
"#;

pub fn emit_support_package() -> EmissionUnit {
    EmissionUnit {
        file_name: format!("{SUPPORT_PACKAGE}.vhd"),
        kind: UnitKind::SupportPackage,
        text: TEXT.to_string(),
    }
}
