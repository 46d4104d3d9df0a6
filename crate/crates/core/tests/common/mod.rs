//! Deterministic random units and unit systems for integration tests.

#![allow(dead_code)]

use proptest::prelude::RngExt;
use proptest::test_runner::{RngAlgorithm, TestRng};
use unical::convert::Rule;
use unical::model::Dimension;
use unical::{DefiningConversion, ExponentMap, PreUnit, Prefix, Ratio, Symbol, Unit, UnitSystem};

pub fn rng(tag: &str) -> TestRng {
    let mut seed = [7u8; 32];
    for (i, b) in tag.bytes().enumerate() {
        seed[i % 32] ^= b;
    }
    TestRng::from_seed(RngAlgorithm::ChaCha, &seed)
}

pub fn ratio(num: u64, den: u64) -> Ratio {
    Ratio::new(num.into(), den.into()).unwrap()
}

pub fn random_ratio(rng: &mut TestRng) -> Ratio {
    ratio(rng.random_range(1..=12), rng.random_range(1..=12))
}

/// A random word over `symbols` with up to `len` factors.
pub fn random_word(rng: &mut TestRng, symbols: &[Symbol], len: usize, max_exp: i64) -> ExponentMap<Symbol> {
    let mut out = ExponentMap::new();
    if symbols.is_empty() {
        return out;
    }
    for _ in 0..rng.random_range(0..=len) {
        let s = symbols[rng.random_range(0..symbols.len())].clone();
        let mut z = rng.random_range(1..=max_exp);
        if rng.random_bool(0.5) {
            z = -z;
        }
        out = out.mul(&ExponentMap::from_entries([(s, z)]));
    }
    out
}

/// A random unit: up to `len` preunits over `units`, each carrying up to
/// `prefix_len` prefix factors from `prefixes`.
pub fn random_unit(
    rng: &mut TestRng,
    prefixes: &[Symbol],
    units: &[Symbol],
    len: usize,
    prefix_len: usize,
) -> Unit {
    let mut out = Unit::new();
    for _ in 0..rng.random_range(0..=len) {
        let base = units[rng.random_range(0..units.len())].clone();
        let prefix: Prefix = random_word(rng, prefixes, prefix_len, 2);
        let mut z = rng.random_range(1..=3);
        if rng.random_bool(0.5) {
            z = -z;
        }
        out = out.mul(&Unit::from_entries([(PreUnit::new(prefix, base), z)]));
    }
    out
}

/// A random well-defining system together with its parts.
pub struct RandomSystem {
    pub sys: UnitSystem,
    pub conv: DefiningConversion,
    pub units: Vec<Symbol>,
    pub prefixes: Vec<Symbol>,
}

pub struct SystemShape {
    pub max_units: usize,
    pub rule_probability: f64,
    pub target_len: usize,
    pub prefix_probability: f64,
}

const NAMES: [&str; 8] = ["a", "b", "e", "f", "g", "j", "q", "w"];

/// Units get a random hidden order; a rule may only mention units that
/// come earlier, so the dependency order is well-founded by construction.
pub fn random_system(rng: &mut TestRng, shape: &SystemShape) -> RandomSystem {
    let n = rng.random_range(2..=shape.max_units.min(NAMES.len()));
    let mut names: Vec<Symbol> = NAMES[..n].iter().map(|s| Symbol::new(s)).collect();
    for i in (1..n).rev() {
        names.swap(i, rng.random_range(0..=i));
    }
    let prefixes: Vec<Symbol> = ["k", "c"].iter().map(|s| Symbol::new(s)).collect();
    let dims = [Symbol::new("X"), Symbol::new("Y")];

    let mut unit_dims: Vec<Dimension> = Vec::new();
    let mut rules = Vec::new();
    for i in 0..n {
        if rng.random_bool(shape.rule_probability) {
            let mut target = Unit::new();
            for _ in 0..rng.random_range(0..=shape.target_len) {
                if i == 0 {
                    break;
                }
                let j = rng.random_range(0..i);
                let prefix: Prefix = if rng.random_bool(shape.prefix_probability) {
                    ExponentMap::delta(prefixes[rng.random_range(0..prefixes.len())].clone())
                } else {
                    Prefix::new()
                };
                let z = [-2, -1, 1, 2][rng.random_range(0..4)];
                target = target.mul(&Unit::from_entries([(PreUnit::new(prefix, names[j].clone()), z)]));
            }
            let dim = target
                .iter()
                .fold(Dimension::new(), |acc, (p, z)| {
                    let k = names.iter().position(|s| *s == p.base).unwrap();
                    acc.mul(&unit_dims[k].pow(z))
                });
            unit_dims.push(dim);
            rules.push((names[i].clone(), Rule::new(random_ratio(rng), target)));
        } else {
            unit_dims.push(random_word(rng, &dims, 2, 2));
        }
    }

    let mut b = UnitSystem::builder();
    for d in &dims {
        b.dimension(d.clone()).unwrap();
    }
    b.prefix("k", ratio(1000, 1)).unwrap();
    b.prefix("c", ratio(1, 100)).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| names[i].clone());
    for i in order {
        b.unit(names[i].clone(), unit_dims[i].clone()).unwrap();
    }
    let sys = b.build().unwrap();
    let conv = DefiningConversion::new(&sys, rules).unwrap();
    let mut units = names;
    units.sort();
    RandomSystem {
        sys,
        conv,
        units,
        prefixes,
    }
}
