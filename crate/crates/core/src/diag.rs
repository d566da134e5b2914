// SPDX-License-Identifier: Apache-2.0
//! Structured diagnostics shared by every pass.
//!
//! A diagnostic renders to a single line of the form
//! `<severity> <rule-id> <circuit>.<path>: <message>`; the structured form
//! is the serde representation of [`Diagnostic`].

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

macro_rules! rules {
    ($($variant:ident => $id:literal,)*) => {
        /// Closed set of rule identifiers a diagnostic may carry.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
        pub enum Rule {
            $(#[serde(rename = $id)] $variant,)*
        }

        impl Rule {
            pub const ALL: &'static [Rule] = &[$(Rule::$variant,)*];

            pub fn id(self) -> &'static str {
                match self {
                    $(Rule::$variant => $id,)*
                }
            }
        }
    };
}

rules! {
    // construction / structure
    DuplicateName => "duplicate-name",
    LiteralType => "literal-only-type",
    UnresolvedType => "unresolved-type",
    TypeCycle => "type-cycle",
    InvalidWidth => "invalid-width",
    InvalidIdentifier => "invalid-identifier",
    UnresolvedRef => "unresolved-ref",
    IllegalTarget => "illegal-target",
    DanglingElse => "dangling-else",
    DuplicateArm => "duplicate-arm",
    ArmWidth => "arm-width",
    NestedBlock => "nested-block",
    Misplaced => "misplaced-statement",
    UnclosedBlock => "unclosed-block",
    EmptyBody => "empty-body",
    NoStates => "no-states",
    UnknownState => "unknown-state",
    // typing
    LiteralTooWide => "literal-too-wide",
    ArithmeticIntoBit => "arithmetic-into-bit",
    OperandTooWide => "operand-too-wide",
    WidthMismatch => "width-mismatch",
    TypeMismatch => "type-mismatch",
    NotBoolean => "not-boolean",
    UnknownField => "unknown-field",
    IndexOutOfRange => "index-out-of-range",
    // elaboration
    MultipleDrivers => "multiple-drivers",
    CombinationalCycle => "combinational-cycle",
    DanglingSignal => "dangling-signal",
    NameCollision => "name-collision",
    NotConstant => "not-constant",
    // sexpir
    UnbalancedParen => "unbalanced-paren",
    StrayToken => "stray-token",
    EmptyInput => "empty-input",
    UnknownForm => "unknown-form",
    Arity => "arity",
    MissingField => "missing-field",
    NonIntegerWidth => "non-integer-width",
    // simulation / tooling
    Unsupported => "unsupported",
    ValueOverflow => "value-overflow",
    UnknownName => "unknown-name",
    ExpectFailed => "expect-failed",
    Io => "io",
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: Rule,
    /// Circuit name the diagnostic belongs to (may be empty for file level).
    pub circuit: String,
    /// Dotted path inside the circuit, e.g. `stmt[2].then[0]`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(rule: Rule, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule,
            circuit: String::new(),
            path: String::new(),
            message: message.into(),
        }
    }

    pub fn warning(rule: Rule, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(rule, message)
        }
    }

    pub fn in_circuit(mut self, circuit: impl Into<String>) -> Self {
        self.circuit = circuit.into();
        self
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = path.into();
        self
    }

    /// Prefixes the path, keeping the innermost location last.
    pub fn within(mut self, outer: &str) -> Self {
        if self.path.is_empty() {
            self.path = outer.to_string();
        } else if !outer.is_empty() {
            self.path = format!("{outer}.{}", self.path);
        }
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.severity, self.rule)?;
        match (self.circuit.is_empty(), self.path.is_empty()) {
            (true, true) => {}
            (false, true) => write!(f, " {}", self.circuit)?,
            (true, false) => write!(f, " {}", self.path)?,
            (false, false) => write!(f, " {}.{}", self.circuit, self.path)?,
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// A non-empty batch of diagnostics returned by passes that collect
/// everything they find.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Diagnostics(Vec::new())
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn extend(&mut self, ds: impl IntoIterator<Item = Diagnostic>) {
        self.0.extend(ds);
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(Diagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| !d.is_error())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("diagnostics serialize")
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

impl IntoIterator for Diagnostics {
    type Item = Diagnostic;
    type IntoIter = std::vec::IntoIter<Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Diagnostics {
    type Item = &'a Diagnostic;
    type IntoIter = std::slice::Iter<'a, Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_form() {
        let d = Diagnostic::error(Rule::LiteralTooWide, "literal 42 needs 6 bits")
            .in_circuit("conv")
            .at("stmt[1].rhs");
        assert_eq!(
            d.to_string(),
            "error literal-too-wide conv.stmt[1].rhs: literal 42 needs 6 bits"
        );
    }

    #[test]
    fn rule_ids_unique() {
        let mut ids: Vec<_> = Rule::ALL.iter().map(|r| r.id()).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(n, ids.len());
    }

    #[test]
    fn structured_form_uses_rule_ids() {
        let ds = Diagnostics::from(Diagnostic::warning(Rule::EmptyBody, "empty").in_circuit("c"));
        let json = ds.to_json();
        assert!(json.contains("\"empty-body\""));
        assert!(json.contains("\"warning\""));
    }
}
