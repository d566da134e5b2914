// SPDX-License-Identifier: Apache-2.0
//! Type descriptors and the built-in alias table.

use std::fmt;

/// Semantic type of a signal or expression.
///
/// `RUInt` is the type of integer literals and can never be declared.
/// `Enum` only appears on state registers produced by FSM lowering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeDesc {
    Bit,
    BitVector(u32),
    Unsigned(u32),
    Signed(u32),
    RUInt(u32),
    Record(Vec<(String, TypeDesc)>),
    Array(u32, Box<TypeDesc>),
    Alias(String),
    Enum { name: String, states: Vec<String> },
}

impl TypeDesc {
    /// Looks `name` up in the built-in alias table (`bit`, `byte`, `bvN`,
    /// `intN`, `uintN`), falling back to a named alias.
    pub fn named(name: &str) -> TypeDesc {
        builtin(name).unwrap_or_else(|| TypeDesc::Alias(name.to_string()))
    }

    pub fn record<N: Into<String>>(fields: impl IntoIterator<Item = (N, TypeDesc)>) -> TypeDesc {
        TypeDesc::Record(fields.into_iter().map(|(n, t)| (n.into(), t)).collect())
    }

    pub fn array(len: u32, elem: impl Into<TypeDesc>) -> TypeDesc {
        TypeDesc::Array(len, Box::new(elem.into()))
    }

    /// Bit width for alias-free types; `None` while an alias is unresolved.
    pub fn width(&self) -> Option<u64> {
        Some(match self {
            TypeDesc::Bit => 1,
            TypeDesc::BitVector(n)
            | TypeDesc::Unsigned(n)
            | TypeDesc::Signed(n)
            | TypeDesc::RUInt(n) => u64::from(*n),
            TypeDesc::Record(fields) => {
                let mut total = 0;
                for (_, t) in fields {
                    total += t.width()?;
                }
                total
            }
            TypeDesc::Array(len, elem) => u64::from(*len) * elem.width()?,
            TypeDesc::Alias(_) => return None,
            TypeDesc::Enum { states, .. } => u64::from(state_bits(states.len())),
        })
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            TypeDesc::Bit
                | TypeDesc::BitVector(_)
                | TypeDesc::Unsigned(_)
                | TypeDesc::Signed(_)
                | TypeDesc::RUInt(_)
        )
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, TypeDesc::Signed(_))
    }

    /// Calls `f` on every alias name referenced by this descriptor.
    pub fn for_each_alias(&self, f: &mut impl FnMut(&str)) {
        match self {
            TypeDesc::Alias(n) => f(n),
            TypeDesc::Record(fields) => fields.iter().for_each(|(_, t)| t.for_each_alias(f)),
            TypeDesc::Array(_, elem) => elem.for_each_alias(f),
            _ => {}
        }
    }

    /// First structural problem with the descriptor itself (zero widths).
    pub fn shape_error(&self) -> Option<String> {
        match self {
            TypeDesc::BitVector(0) | TypeDesc::Unsigned(0) | TypeDesc::Signed(0) => {
                Some(format!("type {self} has zero width"))
            }
            TypeDesc::Array(0, _) => Some(format!("type {self} has zero length")),
            TypeDesc::Array(_, elem) => elem.shape_error(),
            TypeDesc::Record(fields) if fields.is_empty() => Some("record has no fields".into()),
            TypeDesc::Record(fields) => {
                for (i, (n, _)) in fields.iter().enumerate() {
                    if fields[..i].iter().any(|(m, _)| m == n) {
                        return Some(format!("record field `{n}` declared twice"));
                    }
                }
                fields.iter().find_map(|(_, t)| t.shape_error())
            }
            TypeDesc::Enum { states, .. } if states.is_empty() => Some("enum has no states".into()),
            _ => None,
        }
    }
}

impl From<&str> for TypeDesc {
    fn from(name: &str) -> Self {
        TypeDesc::named(name)
    }
}

impl fmt::Display for TypeDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDesc::Bit => f.write_str("bit"),
            TypeDesc::BitVector(n) => write!(f, "bv{n}"),
            TypeDesc::Unsigned(n) => write!(f, "uint{n}"),
            TypeDesc::Signed(n) => write!(f, "int{n}"),
            TypeDesc::RUInt(n) => write!(f, "ruint{n}"),
            TypeDesc::Record(fields) => {
                f.write_str("record(")?;
                for (i, (n, t)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {t}")?;
                }
                f.write_str(")")
            }
            TypeDesc::Array(len, elem) => write!(f, "array({len}, {elem})"),
            TypeDesc::Alias(n) => f.write_str(n),
            TypeDesc::Enum { name, .. } => f.write_str(name),
        }
    }
}

/// Built-in type names.
pub fn builtin(name: &str) -> Option<TypeDesc> {
    fn width(digits: &str) -> Option<u32> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok().filter(|&n| n >= 1)
    }
    match name {
        "bit" => Some(TypeDesc::Bit),
        "byte" => Some(TypeDesc::BitVector(8)),
        _ => {
            if let Some(n) = name.strip_prefix("bv").and_then(width) {
                Some(TypeDesc::BitVector(n))
            } else if let Some(n) = name.strip_prefix("uint").and_then(width) {
                Some(TypeDesc::Unsigned(n))
            } else {
                name.strip_prefix("int").and_then(width).map(TypeDesc::Signed)
            }
        }
    }
}

/// Natural width of a nonnegative literal: 1 for 0 and 1, else floor(log2 v)+1.
pub fn literal_width(value: u64) -> u32 {
    if value <= 1 {
        1
    } else {
        64 - value.leading_zeros()
    }
}

/// Register width used for an enumerated state register with `count` states.
pub fn state_bits(count: usize) -> u32 {
    if count <= 2 {
        1
    } else {
        usize::BITS - (count - 1).leading_zeros()
    }
}
