//! Unit registries: a unit system plus defining rules, loaded from TOML.
//!
//! See `docs/format.md` for the file format. Several documents can be
//! merged; declarations must agree and later rules replace earlier ones for
//! the same base unit. Rule expressions are parsed against the merged
//! system, so a document may build on units declared by another.

mod syntax;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::convert::{Converter, DefiningConversion, Rule};
use crate::error::{ConvertError, ParseError, RegistryError};
use crate::model::{Dimension, EvaluatedUnit, NormalizedUnit, PreUnit, Unit, UnitSystem};
use crate::numeric::{Magnitude, PosRatio};
use crate::Symbol;

pub use syntax::{
    canonical_text, format_dimension, format_evaluated, format_normalized, format_preunit, format_symbols,
    format_unit, parse_unit, resolve,
};

/// Registries shipped with the library, by name.
pub const BUNDLES: &[(&str, &str)] = &[
    ("si", include_str!("../../data/si.toml")),
    ("accepted", include_str!("../../data/accepted.toml")),
    ("uk", include_str!("../../data/uk.toml")),
];

pub fn bundle(name: &str) -> Option<&'static str> {
    BUNDLES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    dimensions: Vec<Spanned<String>>,
    #[serde(default)]
    prefixes: Vec<PrefixEntry>,
    #[serde(default)]
    units: Vec<UnitEntry>,
    #[serde(default)]
    rules: Vec<RuleEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrefixEntry {
    symbol: Spanned<String>,
    value: Spanned<Number>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitEntry {
    symbol: Spanned<String>,
    #[serde(default)]
    dimension: BTreeMap<String, i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    base: Spanned<String>,
    #[serde(default)]
    ratio: Option<Spanned<Number>>,
    unit: Spanned<String>,
    #[serde(default)]
    pathological: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Int(u64),
    Text(String),
}

impl Number {
    fn parse<T: Magnitude>(&self) -> Result<PosRatio<T>, String> {
        let text = match self {
            Number::Int(n) => n.to_string(),
            Number::Text(t) => t.clone(),
        };
        text.parse().map_err(|e| format!("{e}"))
    }
}

struct Source<'a> {
    name: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, offset: usize, message: impl Into<String>) -> RegistryError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        RegistryError::Syntax {
            source_name: self.name.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn error_in(&self, span: Range<usize>, message: impl Into<String>) -> RegistryError {
        self.error_at(span.start, message)
    }

    /// A semantic error at a known place.
    fn invalid_at(&self, span: Range<usize>, message: impl std::fmt::Display) -> RegistryError {
        match self.error_in(span, "") {
            RegistryError::Syntax { line, column, .. } => self.invalid(format!("line {line}, column {column}: {message}")),
            other => other,
        }
    }

    fn invalid(&self, message: impl Into<String>) -> RegistryError {
        RegistryError::Validation {
            source_name: self.name.to_string(),
            message: message.into(),
        }
    }
}

/// A unit system together with its defining conversion.
#[derive(Clone, Debug)]
pub struct Registry<T> {
    system: UnitSystem<T>,
    conversion: DefiningConversion<T>,
}

impl<T: Magnitude> Registry<T> {
    pub fn new(system: UnitSystem<T>, conversion: DefiningConversion<T>) -> Self {
        Self { system, conversion }
    }

    /// Loads a single document; `name` is used in error messages.
    pub fn load(name: &str, text: &str) -> Result<Self, RegistryError> {
        Self::load_all(&[(name, text)])
    }

    /// Loads and merges `(name, text)` documents in order.
    pub fn load_all(documents: &[(&str, &str)]) -> Result<Self, RegistryError> {
        let mut parsed = Vec::new();
        for (name, text) in documents {
            let src = Source { name, text };
            let doc: Document = toml::from_str(text).map_err(|e| match e.span() {
                Some(span) => src.error_in(span, e.message()),
                None => src.invalid(e.message()),
            })?;
            parsed.push((src, doc));
        }

        let mut builder = UnitSystem::builder();
        for (src, doc) in &parsed {
            for dim in &doc.dimensions {
                builder
                    .dimension(canonical_text(dim.get_ref()).as_str())
                    .map_err(|e| src.invalid_at(dim.span(), e))?;
            }
            for p in &doc.prefixes {
                let value = p.value.get_ref().parse().map_err(|m| src.error_in(p.value.span(), m))?;
                builder
                    .prefix(canonical_text(p.symbol.get_ref()).as_str(), value)
                    .map_err(|e| src.invalid_at(p.symbol.span(), e))?;
            }
            for u in &doc.units {
                let dim: Dimension = u
                    .dimension
                    .iter()
                    .map(|(d, z)| (Symbol::from(canonical_text(d)), *z))
                    .collect();
                builder
                    .unit(canonical_text(u.symbol.get_ref()).as_str(), dim)
                    .map_err(|e| src.invalid_at(u.symbol.span(), e))?;
            }
        }
        let system = builder.build().map_err(|e| RegistryError::Validation {
            source_name: documents.iter().map(|(n, _)| *n).collect::<Vec<_>>().join("+"),
            message: e.to_string(),
        })?;

        let mut rules: BTreeMap<Symbol, Rule<T>> = BTreeMap::new();
        for (src, doc) in &parsed {
            let mut in_this_doc = BTreeMap::new();
            for r in &doc.rules {
                let base_text = canonical_text(r.base.get_ref());
                let base = system
                    .unit_symbol(&base_text)
                    .ok_or_else(|| src.invalid_at(r.base.span(), format!("rule for unknown unit `{base_text}`")))?
                    .clone();
                if in_this_doc.insert(base.clone(), ()).is_some() {
                    return Err(src.invalid_at(r.base.span(), format!("more than one rule for `{base}`")));
                }
                let ratio = match &r.ratio {
                    Some(n) => n.get_ref().parse().map_err(|m| src.error_in(n.span(), m))?,
                    None => PosRatio::one(),
                };
                let target = parse_unit(&system, r.unit.get_ref()).map_err(|e| {
                    // +1 skips the opening quote of the TOML string
                    let offset = r.unit.span().start + 1 + parse_error_offset(r.unit.get_ref(), &e);
                    src.error_at(offset, e.to_string())
                })?;
                rules.insert(
                    base,
                    Rule {
                        ratio,
                        target,
                        pathological: r.pathological,
                    },
                );
            }
        }
        let conversion = DefiningConversion::new(&system, rules).map_err(|e| RegistryError::Validation {
            source_name: documents.last().map_or("", |(n, _)| *n).to_string(),
            message: e.to_string(),
        })?;
        Ok(Self { system, conversion })
    }

    /// Loads bundled registries by name, merged in the given order.
    pub fn from_bundles(names: &[&str]) -> Result<Self, RegistryError> {
        let docs = names
            .iter()
            .map(|n| bundle(n).map(|t| (*n, t)).ok_or_else(|| RegistryError::UnknownBundle(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::load_all(&docs)
    }

    pub fn system(&self) -> &UnitSystem<T> {
        &self.system
    }

    pub fn conversion(&self) -> &DefiningConversion<T> {
        &self.conversion
    }

    /// The same registry with a different rule set.
    pub fn with_conversion(&self, conversion: DefiningConversion<T>) -> Self {
        Self {
            system: self.system.clone(),
            conversion,
        }
    }

    /// Fails with the dependency cycle when the rules are not well-defining.
    pub fn converter(&self) -> Result<Converter<'_, T>, ConvertError> {
        Converter::new(&self.system, &self.conversion)
    }

    pub fn parse(&self, text: &str) -> Result<Unit, ParseError> {
        parse_unit(&self.system, text)
    }

    pub fn resolve(&self, ident: &str) -> Option<PreUnit> {
        resolve(&self.system, ident)
    }

    pub fn format_unit(&self, u: &Unit) -> String {
        format_unit(&self.system, u)
    }

    pub fn format_normalized(&self, n: &NormalizedUnit) -> String {
        format_normalized(n)
    }

    pub fn format_evaluated(&self, e: &EvaluatedUnit<T>) -> String {
        format_evaluated(e)
    }

    pub fn format_dimension(&self, d: &Dimension) -> String {
        format_dimension(&self.system, d)
    }
}

/// Byte offset in `text` of the character position reported by `e`.
fn parse_error_offset(text: &str, e: &ParseError) -> usize {
    let position = match e {
        ParseError::UnknownIdentifier { position, .. }
        | ParseError::Unexpected { position, .. }
        | ParseError::Exponent { position } => *position,
    };
    text.char_indices().nth(position).map_or(text.len(), |(i, _)| i)
}
