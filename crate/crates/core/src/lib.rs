//! Exact units-of-measure calculus.
//!
//! Units are values of a free abelian group over prefixed base units. They
//! can be normalized, evaluated to an exact ratio times a root unit, and
//! converted into one another under a set of defining rules by exhaustive
//! rewriting, which yields exact rational conversion factors.
//!
//! The core is generic over the integer type backing its ratios; the aliases
//! below fix it to arbitrary-precision integers.
//!
//! ```
//! use unical::{registry, Registry};
//!
//! let reg = Registry::from_bundles(&["si", "uk"]).unwrap();
//! let u = reg.parse("lbf*s").unwrap();
//! let v = reg.parse("N*s").unwrap();
//! let ratio = reg.converter().unwrap().convert(&u, &v).unwrap().unwrap();
//! assert_eq!(ratio.to_string(), "8896443230521/2000000000000");
//! assert_eq!(ratio.to_decimal(15).text, "4.4482216152605");
//! # let _ = registry::BUNDLES;
//! ```

pub mod abelian;
pub mod convert;
pub mod error;
pub mod model;
pub mod numeric;
pub mod registry;

use num_bigint::BigUint;

pub use abelian::{ExponentMap, Group, Pair};
pub use error::{ConvertError, ModelError, NumericError, ParseError, RegistryError};
pub use model::{Dimension, Equivalence, NormalizedUnit, PreUnit, Prefix, RootUnit, Symbol, Unit};

pub type Ratio = numeric::PosRatio<BigUint>;
pub type UnitSystem = model::UnitSystem<BigUint>;
pub type EvaluatedUnit = model::EvaluatedUnit<BigUint>;
pub type AbstractUnit = model::AbstractUnit<BigUint>;
pub type ConvTriple = convert::ConvTriple<BigUint>;
pub type DefiningConversion = convert::DefiningConversion<BigUint>;
pub type Converter<'a> = convert::Converter<'a, BigUint>;
pub type Registry = registry::Registry<BigUint>;
