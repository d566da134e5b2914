// SPDX-License-Identifier: Apache-2.0
//! Output backends: VHDL, Graphviz dot and a textual pretty-printer.
//! Sexpir emission lives in [`crate::sexpir`].

mod dot;
mod pretty;
mod support;
mod vhdl;

pub use dot::emit_dot;
pub use pretty::pretty;
pub use support::{emit_support_package, SUPPORT_PACKAGE};
pub use vhdl::{emit_vhdl, entity_name, vhdl_identifier, VhdlOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    SupportPackage,
    TypesPackage,
    Entity,
}

/// One generated file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmissionUnit {
    pub file_name: String,
    pub kind: UnitKind,
    pub text: String,
}
