use thiserror::Error;

use crate::model::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("invalid ratio {num}/{den}: both parts must be positive")]
    InvalidRatio { num: String, den: String },
    #[error("malformed ratio literal `{0}`")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(Symbol),
    #[error("unknown unit `{0}`")]
    UnknownUnit(Symbol),
    #[error("unit `{unit}` refers to undeclared dimension `{dimension}`")]
    UnknownDimension { unit: Symbol, dimension: Symbol },
    #[error("{kind} `{symbol}` is already defined differently")]
    Redefinition { kind: &'static str, symbol: Symbol },
    #[error("invalid {kind} symbol `{symbol}`")]
    InvalidSymbol { kind: &'static str, symbol: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rules are not well-defining: dependency cycle {}", display_cycle(.cycle))]
    NotWellDefining { cycle: Vec<Symbol> },
    #[error("rule for `{base}` changes dimension: {left} vs {right}")]
    DimensionMismatch {
        base: Symbol,
        left: String,
        right: String,
    },
    #[error("more than one rule for base unit `{0}`")]
    DuplicateRule(Symbol),
    #[error("rule source is not a bare base unit")]
    NotBasic,
}

fn display_cycle(cycle: &[Symbol]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(|s| s.to_string()).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.to_string());
    }
    parts.join(" > ")
}

/// Failure while parsing a unit expression; `position` is a character offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown identifier `{ident}` at {position}")]
    UnknownIdentifier { ident: String, position: usize },
    #[error("unexpected {found} at {position}, expected {expected}")]
    Unexpected {
        found: String,
        expected: &'static str,
        position: usize,
    },
    #[error("exponent out of range at {position}")]
    Exponent { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Syntax {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{source_name}: {message}")]
    Validation { source_name: String, message: String },
    #[error("unknown bundled registry `{0}`")]
    UnknownBundle(String),
}
