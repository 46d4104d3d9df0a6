//! Unit-of-measure structures over a [`UnitSystem`]: prefixes, preunits,
//! units and their normalized, evaluated and abstract interpretations.
//!
//! Everything that does not consult contingent data (prefix values, unit
//! dimensions) is a free function; the rest are methods on [`UnitSystem`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::abelian::{beta, ExponentMap, FreeAbelian, Pair};
use crate::error::ModelError;
use crate::numeric::{Magnitude, PosRatio, RatioGroup};

/// Interned symbol for dimensions, prefixes and base units. Ordered by text.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(text: &str) -> Self {
        Symbol(Arc::from(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(text: &str) -> Self {
        Symbol::new(text)
    }
}

impl From<String> for Symbol {
    fn from(text: String) -> Self {
        Symbol(Arc::from(text))
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

pub type Dimension = ExponentMap<Symbol>;
pub type Prefix = ExponentMap<Symbol>;
pub type RootUnit = ExponentMap<Symbol>;

/// A prefix applied to a single base unit, e.g. kilogram.
///
/// Ordered by base symbol first, then by prefix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PreUnit {
    pub base: Symbol,
    pub prefix: Prefix,
}

impl PreUnit {
    pub fn new(prefix: Prefix, base: impl Into<Symbol>) -> Self {
        Self {
            base: base.into(),
            prefix,
        }
    }

    pub fn bare(base: impl Into<Symbol>) -> Self {
        Self::new(Prefix::new(), base)
    }

    pub fn to_pair(&self) -> Pair<Prefix, Symbol> {
        Pair::new(self.prefix.clone(), self.base.clone())
    }
}

/// Free abelian group over preunits; the faithful model of unit notation.
pub type Unit = ExponentMap<PreUnit>;

/// `⌊u⌋`: the unprefixed base unit as a unit.
pub fn base_unit(base: impl Into<Symbol>) -> Unit {
    Unit::delta(PreUnit::bare(base))
}

/// A single prefixed base unit as a unit.
pub fn prefixed(prefix: Prefix, base: impl Into<Symbol>) -> Unit {
    Unit::delta(PreUnit::new(prefix, base))
}

/// Direct sum of a prefix and a root unit.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct NormalizedUnit {
    pub prefix: Prefix,
    pub root: RootUnit,
}

impl NormalizedUnit {
    pub fn new(prefix: Prefix, root: RootUnit) -> Self {
        Self { prefix, root }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.prefix.mul(&other.prefix), self.root.mul(&other.root))
    }

    pub fn inv(&self) -> Self {
        Self::new(self.prefix.inv(), self.root.inv())
    }

    pub fn pow(&self, z: i64) -> Self {
        Self::new(self.prefix.pow(z), self.root.pow(z))
    }
}

/// Direct sum of a ratio and a root unit.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EvaluatedUnit<T> {
    pub factor: PosRatio<T>,
    pub root: RootUnit,
}

impl<T: Magnitude> EvaluatedUnit<T> {
    pub fn new(factor: PosRatio<T>, root: RootUnit) -> Self {
        Self { factor, root }
    }

    pub fn one() -> Self {
        Self::new(PosRatio::one(), RootUnit::new())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.factor.mul(&other.factor), self.root.mul(&other.root))
    }

    pub fn inv(&self) -> Self {
        Self::new(self.factor.inv(), self.root.inv())
    }

    pub fn pow(&self, z: i64) -> Self {
        Self::new(self.factor.pow(z), self.root.pow(z))
    }

    pub fn to_pair(&self) -> Pair<PosRatio<T>, RootUnit> {
        Pair::new(self.factor.clone(), self.root.clone())
    }

    pub fn from_pair(pair: Pair<PosRatio<T>, RootUnit>) -> Self {
        Self::new(pair.first, pair.second)
    }
}

/// Direct sum of a ratio and a dimension.
///
/// This interpretation identifies every pair of codimensional units with
/// equal prefix values, which is too coarse for conversion decisions;
/// nothing in the conversion engine consults it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AbstractUnit<T> {
    pub factor: PosRatio<T>,
    pub dimension: Dimension,
}

/// The four kernel equivalences, finest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Equivalence {
    /// Normalizations coincide.
    Normal,
    /// Evaluations coincide.
    Numerical,
    /// Roots coincide.
    Root,
    /// Dimensions coincide (codimensionality).
    Dimensional,
}

impl Equivalence {
    pub const ALL: [Equivalence; 4] = [
        Equivalence::Normal,
        Equivalence::Numerical,
        Equivalence::Root,
        Equivalence::Dimensional,
    ];
}

pub fn pref(u: &Unit) -> Prefix {
    norm(u).prefix
}

pub fn root(u: &Unit) -> RootUnit {
    u.map(|p| p.base.clone())
}

pub fn unroot(r: &RootUnit) -> Unit {
    r.map(|b| PreUnit::bare(b.clone()))
}

pub fn strip(u: &Unit) -> Unit {
    unroot(&root(u))
}

/// Splits a unit into the product of its prefixes and its root unit.
pub fn norm(u: &Unit) -> NormalizedUnit {
    let pairs = u.map(PreUnit::to_pair);
    let split = beta(&FreeAbelian, &pairs);
    NormalizedUnit::new(split.first, split.second)
}

/// Attaches a further prefix to a normalized unit (pairing-monad multiplication).
pub fn prefix_apply(p: &Prefix, n: &NormalizedUnit) -> NormalizedUnit {
    Pair::new(p.clone(), n.clone().into_pair())
        .mu(&FreeAbelian)
        .into()
}

impl NormalizedUnit {
    fn into_pair(self) -> Pair<Prefix, RootUnit> {
        Pair::new(self.prefix, self.root)
    }
}

impl From<Pair<Prefix, RootUnit>> for NormalizedUnit {
    fn from(p: Pair<Prefix, RootUnit>) -> Self {
        NormalizedUnit::new(p.first, p.second)
    }
}

/// Base dimensions, base prefixes with their values and base units with
/// their dimensions. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSystem<T> {
    dimensions: Vec<Symbol>,
    prefixes: BTreeMap<Symbol, PosRatio<T>>,
    prefix_order: Vec<Symbol>,
    units: BTreeMap<Symbol, Dimension>,
    unit_order: Vec<Symbol>,
}

/// Accumulates declarations for a [`UnitSystem`]. Repeating a declaration
/// with identical data is accepted; changing it is an error.
#[derive(Clone, Debug)]
pub struct UnitSystemBuilder<T> {
    system: UnitSystem<T>,
}

impl<T: Magnitude> Default for UnitSystemBuilder<T> {
    fn default() -> Self {
        Self {
            system: UnitSystem {
                dimensions: Vec::new(),
                prefixes: BTreeMap::new(),
                prefix_order: Vec::new(),
                units: BTreeMap::new(),
                unit_order: Vec::new(),
            },
        }
    }
}

impl<T: Magnitude> UnitSystemBuilder<T> {
    pub fn dimension(&mut self, symbol: impl Into<Symbol>) -> Result<&mut Self, ModelError> {
        let symbol = symbol.into();
        check_symbol("dimension", &symbol)?;
        if !self.system.dimensions.contains(&symbol) {
            self.system.dimensions.push(symbol);
        }
        Ok(self)
    }

    pub fn prefix(
        &mut self,
        symbol: impl Into<Symbol>,
        value: PosRatio<T>,
    ) -> Result<&mut Self, ModelError> {
        let symbol = symbol.into();
        check_symbol("prefix", &symbol)?;
        if symbol.as_str().contains('_') {
            return Err(ModelError::InvalidSymbol {
                kind: "prefix",
                symbol: symbol.to_string(),
            });
        }
        match self.system.prefixes.get(&symbol) {
            Some(existing) if *existing != value => {
                return Err(ModelError::Redefinition {
                    kind: "prefix",
                    symbol,
                })
            }
            Some(_) => {}
            None => {
                self.system.prefix_order.push(symbol.clone());
                self.system.prefixes.insert(symbol, value);
            }
        }
        Ok(self)
    }

    pub fn unit(
        &mut self,
        symbol: impl Into<Symbol>,
        dimension: Dimension,
    ) -> Result<&mut Self, ModelError> {
        let symbol = symbol.into();
        check_symbol("unit", &symbol)?;
        match self.system.units.get(&symbol) {
            Some(existing) if *existing != dimension => {
                return Err(ModelError::Redefinition { kind: "unit", symbol })
            }
            Some(_) => {}
            None => {
                self.system.unit_order.push(symbol.clone());
                self.system.units.insert(symbol, dimension);
            }
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<UnitSystem<T>, ModelError> {
        for unit in &self.system.unit_order {
            for dim in self.system.units[unit].support() {
                if !self.system.dimensions.contains(dim) {
                    return Err(ModelError::UnknownDimension {
                        unit: unit.clone(),
                        dimension: dim.clone(),
                    });
                }
            }
        }
        Ok(self.system.clone())
    }
}

/// Characters that may appear in registry symbols. `~` and the expression
/// operators are reserved for the unit grammar.
pub fn is_symbol_char(c: char) -> bool {
    !(c.is_whitespace() || c.is_ascii_digit() || "*/^()~·".contains(c) || c.is_control())
}

fn check_symbol(kind: &'static str, symbol: &Symbol) -> Result<(), ModelError> {
    let s = symbol.as_str();
    if s.is_empty() || !s.chars().all(is_symbol_char) || s.starts_with('_') || s.ends_with('_') {
        return Err(ModelError::InvalidSymbol {
            kind,
            symbol: s.to_string(),
        });
    }
    Ok(())
}

impl<T: Magnitude> UnitSystem<T> {
    pub fn builder() -> UnitSystemBuilder<T> {
        UnitSystemBuilder::default()
    }

    /// Base dimensions in declaration order.
    pub fn dimensions(&self) -> &[Symbol] {
        &self.dimensions
    }

    /// Base prefixes with values, in declaration order.
    pub fn prefixes(&self) -> impl Iterator<Item = (&Symbol, &PosRatio<T>)> + '_ {
        self.prefix_order.iter().map(move |s| (s, &self.prefixes[s]))
    }

    /// Base units with dimensions, in declaration order.
    pub fn units(&self) -> impl Iterator<Item = (&Symbol, &Dimension)> + '_ {
        self.unit_order.iter().map(move |s| (s, &self.units[s]))
    }

    pub fn has_prefix(&self, symbol: &str) -> bool {
        self.prefixes.contains_key(symbol)
    }

    pub fn has_unit(&self, symbol: &str) -> bool {
        self.units.contains_key(symbol)
    }

    pub fn prefix_symbol(&self, symbol: &str) -> Option<&Symbol> {
        self.prefixes.get_key_value(symbol).map(|(k, _)| k)
    }

    pub fn unit_symbol(&self, symbol: &str) -> Option<&Symbol> {
        self.units.get_key_value(symbol).map(|(k, _)| k)
    }

    pub fn base_value(&self, prefix: &Symbol) -> Result<&PosRatio<T>, ModelError> {
        self.prefixes
            .get(prefix)
            .ok_or_else(|| ModelError::UnknownPrefix(prefix.clone()))
    }

    pub fn base_dimension(&self, unit: &Symbol) -> Result<&Dimension, ModelError> {
        self.units
            .get(unit)
            .ok_or_else(|| ModelError::UnknownUnit(unit.clone()))
    }

    /// Checks that every prefix and base unit in `u` is registered.
    pub fn check_unit(&self, u: &Unit) -> Result<(), ModelError> {
        for pre in u.support() {
            self.base_dimension(&pre.base)?;
            for p in pre.prefix.support() {
                self.base_value(p)?;
            }
        }
        Ok(())
    }

    /// Numerical value of a prefix word.
    pub fn val(&self, p: &Prefix) -> Result<PosRatio<T>, ModelError> {
        p.lift(&RatioGroup, |s| self.base_value(s).cloned())
    }

    /// Product of the prefix values of a unit.
    pub fn pval(&self, u: &Unit) -> Result<PosRatio<T>, ModelError> {
        u.lift(&RatioGroup, |pre| self.val(&pre.prefix))
    }

    pub fn dim_root(&self, r: &RootUnit) -> Result<Dimension, ModelError> {
        r.lift(&FreeAbelian, |b| self.base_dimension(b).cloned())
    }

    pub fn dim(&self, u: &Unit) -> Result<Dimension, ModelError> {
        u.lift(&FreeAbelian, |pre| self.base_dimension(&pre.base).cloned())
    }

    pub fn eval(&self, u: &Unit) -> Result<EvaluatedUnit<T>, ModelError> {
        self.check_unit(u)?;
        Ok(EvaluatedUnit::new(self.pval(u)?, root(u)))
    }

    pub fn eval_norm(&self, n: &NormalizedUnit) -> Result<EvaluatedUnit<T>, ModelError> {
        for b in n.root.support() {
            self.base_dimension(b)?;
        }
        Ok(EvaluatedUnit::new(self.val(&n.prefix)?, n.root.clone()))
    }

    pub fn abs(&self, u: &Unit) -> Result<AbstractUnit<T>, ModelError> {
        Ok(AbstractUnit {
            factor: self.pval(u)?,
            dimension: self.dim(u)?,
        })
    }

    pub fn abs_eval(&self, e: &EvaluatedUnit<T>) -> Result<AbstractUnit<T>, ModelError> {
        Ok(AbstractUnit {
            factor: e.factor.clone(),
            dimension: self.dim_root(&e.root)?,
        })
    }

    pub fn equiv(&self, u: &Unit, v: &Unit, level: Equivalence) -> Result<bool, ModelError> {
        self.check_unit(u)?;
        self.check_unit(v)?;
        Ok(match level {
            Equivalence::Normal => norm(u) == norm(v),
            Equivalence::Numerical => self.eval(u)? == self.eval(v)?,
            Equivalence::Root => root(u) == root(v),
            Equivalence::Dimensional => self.dim(u)? == self.dim(v)?,
        })
    }
}
