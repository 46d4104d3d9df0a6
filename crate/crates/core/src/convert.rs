//! Conversion relations between units.
//!
//! A [`DefiningConversion`] holds at most one rewriting rule per base unit.
//! When its dependency order is well-founded, [`Converter`] decides
//! convertibility of arbitrary units by rewriting both sides exhaustively
//! and comparing the resulting root units; the ratio of the accumulated
//! factors is the exact conversion factor.
//!
//! [`explore_closure`] is a bounded breadth-first saturation of an arbitrary
//! finite relation under the closure axioms. It never claims completeness
//! and exists to cross-check the rewriting route on small inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::abelian::{xi, ExponentMap, FreeAbelian, Pair};
use crate::error::{ConvertError, ModelError};
use crate::model::{self, EvaluatedUnit, NormalizedUnit, RootUnit, Symbol, Unit, UnitSystem};
use crate::numeric::{Magnitude, PosRatio, RatioGroup};

/// `⟨source, ratio, target⟩`: one `source` is `ratio` `target`s.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConvTriple<T> {
    pub source: Unit,
    pub ratio: PosRatio<T>,
    pub target: Unit,
}

impl<T: Magnitude> PartialOrd for ConvTriple<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Magnitude> Ord for ConvTriple<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.source, &self.ratio, &self.target).cmp(&(&other.source, &other.ratio, &other.target))
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for ConvTriple<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{:?}, {:?}, {:?}>", self.source, self.ratio, self.target)
    }
}

impl<T: Magnitude> ConvTriple<T> {
    pub fn new(source: Unit, ratio: PosRatio<T>, target: Unit) -> Self {
        Self {
            source,
            ratio,
            target,
        }
    }

    /// `⟨∅, 1, ∅⟩`.
    pub fn identity() -> Self {
        Self::new(Unit::new(), PosRatio::one(), Unit::new())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.source.mul(&other.source),
            self.ratio.mul(&other.ratio),
            self.target.mul(&other.target),
        )
    }

    pub fn inv(&self) -> Self {
        Self::new(self.source.inv(), self.ratio.inv(), self.target.inv())
    }

    /// Total absolute exponent count of both units.
    pub fn word_size(&self) -> u64 {
        self.source.weight() + self.target.weight()
    }

    /// `⟨∅, r, ∅⟩` with `r ≠ 1`, which makes a closure inconsistent.
    pub fn is_contradiction(&self) -> bool {
        self.source.is_empty() && self.target.is_empty() && !self.ratio.is_one()
    }
}

/// Right-hand side of a defining rule for one base unit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule<T> {
    pub ratio: PosRatio<T>,
    pub target: Unit,
    /// Set for rules that identify distinct units only through cancellation
    /// (e.g. `rad = m/m`); callers may choose to drop them.
    pub pathological: bool,
}

impl<T: Magnitude> Rule<T> {
    pub fn new(ratio: PosRatio<T>, target: Unit) -> Self {
        Self {
            ratio,
            target,
            pathological: false,
        }
    }
}

/// At most one rule per base unit, each dimensionally consistent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DefiningConversion<T> {
    rules: BTreeMap<Symbol, Rule<T>>,
}

impl<T: Magnitude> Default for DefiningConversion<T> {
    fn default() -> Self {
        Self {
            rules: BTreeMap::new(),
        }
    }
}

impl<T: Magnitude> DefiningConversion<T> {
    /// The empty conversion, whose closure is the regular conversion.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I>(sys: &UnitSystem<T>, rules: I) -> Result<Self, ConvertError>
    where
        I: IntoIterator<Item = (Symbol, Rule<T>)>,
    {
        let mut out = BTreeMap::new();
        for (base, rule) in rules {
            sys.base_dimension(&base)?;
            sys.check_unit(&rule.target)?;
            let left = sys.base_dimension(&base)?.clone();
            let right = sys.dim(&rule.target)?;
            if left != right {
                return Err(ConvertError::DimensionMismatch {
                    base,
                    left: format!("{left:?}"),
                    right: format!("{right:?}"),
                });
            }
            if out.contains_key(&base) {
                return Err(ConvertError::DuplicateRule(base));
            }
            out.insert(base, rule);
        }
        Ok(Self { rules: out })
    }

    /// Reads a relation as a defining conversion. Fails unless every source
    /// is a bare base unit and each base unit has a single rule.
    pub fn from_triples(sys: &UnitSystem<T>, triples: &[ConvTriple<T>]) -> Result<Self, ConvertError> {
        let mut rules: BTreeMap<Symbol, Rule<T>> = BTreeMap::new();
        for t in triples {
            let base = bare_base(&t.source).ok_or(ConvertError::NotBasic)?;
            let rule = Rule::new(t.ratio.clone(), t.target.clone());
            match rules.get(&base) {
                Some(existing) if existing.ratio != rule.ratio || existing.target != rule.target => {
                    return Err(ConvertError::DuplicateRule(base));
                }
                Some(_) => {}
                None => {
                    rules.insert(base, rule);
                }
            }
        }
        Self::new(sys, rules)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Symbol, &Rule<T>)> + '_ {
        self.rules.iter()
    }

    pub fn rule(&self, base: &str) -> Option<&Rule<T>> {
        self.rules.get(base)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The same conversion with the rule for `base` removed.
    pub fn without(&self, base: &str) -> Self {
        let mut rules = self.rules.clone();
        rules.remove(base);
        Self { rules }
    }

    pub fn without_pathological(&self) -> Self {
        Self {
            rules: self
                .rules
                .iter()
                .filter(|(_, r)| !r.pathological)
                .map(|(b, r)| (b.clone(), r.clone()))
                .collect(),
        }
    }

    /// Replaces or adds rules from `other`.
    pub fn extended(&self, other: &Self) -> Self {
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().map(|(b, r)| (b.clone(), r.clone())));
        Self { rules }
    }

    pub fn to_triples(&self) -> Vec<ConvTriple<T>> {
        self.rules
            .iter()
            .map(|(b, r)| ConvTriple::new(model::base_unit(b.clone()), r.ratio.clone(), r.target.clone()))
            .collect()
    }

    /// Totalized expansion: the rule for `base`, or `(1, ⌊base⌋)`.
    pub fn xpd(&self, base: &Symbol) -> (PosRatio<T>, Unit) {
        match self.rules.get(base) {
            Some(rule) => (rule.ratio.clone(), rule.target.clone()),
            None => (PosRatio::one(), model::base_unit(base.clone())),
        }
    }
}

fn bare_base(u: &Unit) -> Option<Symbol> {
    let mut it = u.iter();
    match (it.next(), it.next()) {
        (Some((pre, 1)), None) if pre.prefix.is_empty() => Some(pre.base.clone()),
        _ => None,
    }
}

/// Why a relation fails to be a unit conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleViolation<T> {
    DimensionMismatch(ConvTriple<T>),
    RatioConflict { first: ConvTriple<T>, second: ConvTriple<T> },
    Model(ModelError),
}

/// Checks dimensional consistency and functionality of a relation,
/// reporting the first offending triple or pair.
pub fn check_triples<T: Magnitude>(
    sys: &UnitSystem<T>,
    triples: &[ConvTriple<T>],
) -> Result<(), TripleViolation<T>> {
    let mut seen: HashMap<(&Unit, &Unit), &ConvTriple<T>> = HashMap::new();
    for t in triples {
        let left = sys.dim(&t.source).map_err(TripleViolation::Model)?;
        let right = sys.dim(&t.target).map_err(TripleViolation::Model)?;
        sys.check_unit(&t.source).map_err(TripleViolation::Model)?;
        sys.check_unit(&t.target).map_err(TripleViolation::Model)?;
        if left != right {
            return Err(TripleViolation::DimensionMismatch(t.clone()));
        }
        match seen.get(&(&t.source, &t.target)) {
            Some(prev) if prev.ratio != t.ratio => {
                return Err(TripleViolation::RatioConflict {
                    first: (*prev).clone(),
                    second: t.clone(),
                })
            }
            _ => {
                seen.insert((&t.source, &t.target), t);
            }
        }
    }
    Ok(())
}

/// Dependency order of a defining conversion with depths and iteration bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyReport {
    /// Direct dependencies: base units in the root of each rule's target.
    pub edges: BTreeMap<Symbol, BTreeSet<Symbol>>,
    /// Transitive closure of `edges`, the dependency order itself.
    pub order: BTreeSet<(Symbol, Symbol)>,
    pub well_founded: bool,
    /// A dependency cycle, listed from its smallest-named entry point.
    pub cycle_witness: Option<Vec<Symbol>>,
    /// Depth of every base unit of the system; empty unless well-founded.
    pub depth: BTreeMap<Symbol, usize>,
    /// Maximal depth, the number of rewriting steps that reaches a fixpoint.
    pub iteration_bound: Option<usize>,
}

impl DependencyReport {
    pub fn depends_on(&self, a: &str, b: &str) -> bool {
        self.order.contains(&(Symbol::new(a), Symbol::new(b)))
    }
}

pub fn analyze<T: Magnitude>(sys: &UnitSystem<T>, c: &DefiningConversion<T>) -> DependencyReport {
    let edges: BTreeMap<Symbol, BTreeSet<Symbol>> = c
        .rules()
        .map(|(b, r)| (b.clone(), model::root(&r.target).support().cloned().collect()))
        .collect();

    let mut order = BTreeSet::new();
    for start in edges.keys() {
        let mut stack: Vec<&Symbol> = edges[start].iter().collect();
        let mut seen = BTreeSet::new();
        while let Some(next) = stack.pop() {
            if seen.insert(next) {
                order.insert((start.clone(), next.clone()));
                if let Some(succ) = edges.get(next) {
                    stack.extend(succ.iter());
                }
            }
        }
    }

    let cycle_witness = find_cycle(&edges);
    let well_founded = cycle_witness.is_none();
    let mut depth = BTreeMap::new();
    let mut iteration_bound = None;
    if well_founded {
        for (unit, _) in sys.units() {
            unit_depth(unit, &edges, &mut depth);
        }
        for unit in edges.keys() {
            unit_depth(unit, &edges, &mut depth);
        }
        iteration_bound = Some(depth.values().copied().max().unwrap_or(0));
    }
    DependencyReport {
        edges,
        order,
        well_founded,
        cycle_witness,
        depth,
        iteration_bound,
    }
}

fn unit_depth(
    unit: &Symbol,
    edges: &BTreeMap<Symbol, BTreeSet<Symbol>>,
    memo: &mut BTreeMap<Symbol, usize>,
) -> usize {
    if let Some(d) = memo.get(unit) {
        return *d;
    }
    let d = match edges.get(unit) {
        None => 0,
        Some(succ) => 1 + succ.iter().map(|s| unit_depth(s, edges, memo)).max().unwrap_or(0),
    };
    memo.insert(unit.clone(), d);
    d
}

fn find_cycle(edges: &BTreeMap<Symbol, BTreeSet<Symbol>>) -> Option<Vec<Symbol>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&Symbol, Mark> = BTreeMap::new();
    for start in edges.keys() {
        if marks.contains_key(start) {
            continue;
        }
        // explicit DFS stack of (node, remaining successors)
        let mut path: Vec<&Symbol> = vec![start];
        let mut iters = vec![edges[start].iter()];
        marks.insert(start, Mark::Open);
        while let Some(it) = iters.last_mut() {
            match it.next() {
                Some(next) => match marks.get(next) {
                    Some(Mark::Open) => {
                        let at = path.iter().position(|s| *s == next).expect("open node is on the path");
                        return Some(path[at..].iter().map(|s| (*s).clone()).collect());
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        path.push(next);
                        iters.push(edges.get(next).map(|s| s.iter()).unwrap_or_default());
                    }
                },
                None => {
                    let done = path.pop().expect("path and iterators move together");
                    marks.insert(done, Mark::Done);
                    iters.pop();
                }
            }
        }
    }
    None
}

/// One base unit rewritten once and evaluated: `μ ∘ Pair(eval) ∘ xpd`.
pub fn rwr_base<T: Magnitude>(
    sys: &UnitSystem<T>,
    c: &DefiningConversion<T>,
    base: &Symbol,
) -> Result<EvaluatedUnit<T>, ModelError> {
    let (ratio, target) = c.xpd(base);
    let nested = Pair::new(ratio, sys.eval(&target)?.to_pair());
    Ok(EvaluatedUnit::from_pair(nested.mu(&RatioGroup)))
}

/// One simultaneous rewriting step on every base unit of `e`.
pub fn rwr_eval<T: Magnitude>(
    sys: &UnitSystem<T>,
    c: &DefiningConversion<T>,
    e: &EvaluatedUnit<T>,
) -> Result<EvaluatedUnit<T>, ModelError> {
    let inner = e.root.try_map(|b| rwr_base(sys, c, b).map(|x| x.to_pair()))?;
    Ok(EvaluatedUnit::from_pair(xi(&RatioGroup, &Pair::new(e.factor.clone(), inner))))
}

/// Exhaustive rewriting under a well-defining conversion.
pub fn rwr_star<T: Magnitude>(
    sys: &UnitSystem<T>,
    c: &DefiningConversion<T>,
    u: &Unit,
) -> Result<EvaluatedUnit<T>, ConvertError> {
    Ok(Converter::new(sys, c)?.rwr_star(u)?)
}

/// The conversion factor from `u` to `v`, if any.
pub fn convert<T: Magnitude>(
    sys: &UnitSystem<T>,
    c: &DefiningConversion<T>,
    u: &Unit,
    v: &Unit,
) -> Result<Option<PosRatio<T>>, ConvertError> {
    Ok(Converter::new(sys, c)?.convert(u, v)?)
}

pub fn coherent<T: Magnitude>(
    sys: &UnitSystem<T>,
    c: &DefiningConversion<T>,
    u: &Unit,
    v: &Unit,
) -> Result<bool, ConvertError> {
    Ok(Converter::new(sys, c)?.coherent(u, v)?)
}

/// Both sides of a conversion query after exhaustive rewriting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome<T> {
    pub source: EvaluatedUnit<T>,
    pub target: EvaluatedUnit<T>,
    /// `Some` iff the rewritten roots coincide.
    pub ratio: Option<PosRatio<T>>,
}

/// Decision procedure for a well-defining conversion, with the one-step
/// expansion of every base unit precomputed.
#[derive(Clone, Debug)]
pub struct Converter<'a, T> {
    sys: &'a UnitSystem<T>,
    conv: &'a DefiningConversion<T>,
    report: DependencyReport,
    expansions: BTreeMap<Symbol, EvaluatedUnit<T>>,
}

impl<'a, T: Magnitude> Converter<'a, T> {
    pub fn new(sys: &'a UnitSystem<T>, conv: &'a DefiningConversion<T>) -> Result<Self, ConvertError> {
        let report = analyze(sys, conv);
        if let Some(cycle) = report.cycle_witness.clone() {
            return Err(ConvertError::NotWellDefining { cycle });
        }
        let expansions = conv
            .rules()
            .map(|(b, _)| Ok((b.clone(), rwr_base(sys, conv, b)?)))
            .collect::<Result<_, ModelError>>()?;
        Ok(Self {
            sys,
            conv,
            report,
            expansions,
        })
    }

    pub fn system(&self) -> &UnitSystem<T> {
        self.sys
    }

    pub fn conversion(&self) -> &DefiningConversion<T> {
        self.conv
    }

    pub fn report(&self) -> &DependencyReport {
        &self.report
    }

    /// Number of steps after which rewriting is stationary for every input.
    pub fn iteration_bound(&self) -> usize {
        self.report.iteration_bound.unwrap_or(0)
    }

    /// Depth of an evaluated unit: the largest depth among its base units.
    pub fn depth(&self, e: &EvaluatedUnit<T>) -> usize {
        e.root
            .support()
            .map(|b| self.report.depth.get(b).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn rwr_eval(&self, e: &EvaluatedUnit<T>) -> EvaluatedUnit<T> {
        let inner = e.root.map(|b| match self.expansions.get(b) {
            Some(x) => x.to_pair(),
            None => Pair::new(PosRatio::one(), RootUnit::delta(b.clone())),
        });
        EvaluatedUnit::from_pair(xi(&RatioGroup, &Pair::new(e.factor.clone(), inner)))
    }

    pub fn rwr_star(&self, u: &Unit) -> Result<EvaluatedUnit<T>, ModelError> {
        let mut e = self.sys.eval(u)?;
        for _ in 0..self.iteration_bound() {
            e = self.rwr_eval(&e);
        }
        Ok(e)
    }

    /// `eval(u)` followed by every rewriting step up to the first fixpoint.
    pub fn trace(&self, u: &Unit) -> Result<Vec<EvaluatedUnit<T>>, ModelError> {
        let mut steps = vec![self.sys.eval(u)?];
        loop {
            let last = steps.last().expect("trace starts non-empty");
            let next = self.rwr_eval(last);
            if &next == last {
                return Ok(steps);
            }
            steps.push(next);
        }
    }

    pub fn outcome(&self, u: &Unit, v: &Unit) -> Result<Outcome<T>, ModelError> {
        let source = self.rwr_star(u)?;
        let target = self.rwr_star(v)?;
        let ratio = (source.root == target.root).then(|| source.factor.div(&target.factor));
        Ok(Outcome {
            source,
            target,
            ratio,
        })
    }

    pub fn convert(&self, u: &Unit, v: &Unit) -> Result<Option<PosRatio<T>>, ModelError> {
        Ok(self.outcome(u, v)?.ratio)
    }

    pub fn coherent(&self, u: &Unit, v: &Unit) -> Result<bool, ModelError> {
        Ok(self.convert(u, v)?.is_some_and(|r| r.is_one()))
    }

    /// Symbolic expansion at the normalized level: every base unit whose
    /// rule has ratio one is replaced by the normalization of its target,
    /// carrying prefixes along. Base units with other ratios have no
    /// symbolic expansion and are left in place.
    pub fn expand_normalized(&self, n: &NormalizedUnit) -> NormalizedUnit {
        let mut current = n.clone();
        loop {
            let inner = current.root.map(|b| match self.conv.rule(b.as_str()) {
                Some(rule) if rule.ratio.is_one() => {
                    let t = model::norm(&rule.target);
                    Pair::new(t.prefix, t.root)
                }
                _ => Pair::new(ExponentMap::new(), RootUnit::delta(b.clone())),
            });
            let next: NormalizedUnit = xi(&FreeAbelian, &Pair::new(current.prefix.clone(), inner)).into();
            if next == current {
                return next;
            }
            current = next;
        }
    }
}

/// Limits for [`explore_closure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureBounds {
    /// Saturation rounds after the seed round.
    pub max_steps: usize,
    /// Largest admitted [`ConvTriple::word_size`].
    pub max_word: u64,
    /// Hard cap on the number of stored triples.
    pub max_triples: usize,
    /// Stop as soon as a contradiction is derived.
    pub stop_at_witness: bool,
}

impl Default for ClosureBounds {
    fn default() -> Self {
        Self {
            max_steps: 4,
            max_word: 12,
            max_triples: 20_000,
            stop_at_witness: true,
        }
    }
}

/// Result of a bounded closure exploration.
#[derive(Clone, Debug)]
pub struct ClosureExploration<T> {
    triples: Vec<ConvTriple<T>>,
    found_at: HashMap<ConvTriple<T>, usize>,
    /// First `⟨∅, r, ∅⟩` with `r ≠ 1` encountered.
    pub witness: Option<ConvTriple<T>>,
    /// Rounds actually run; fewer than the bound when saturation stopped early.
    pub steps_run: usize,
    /// Set when the triple cap discarded anything.
    pub truncated: bool,
    /// Set when no further triple could be generated within the word bound.
    pub saturated: bool,
}

impl<T: Magnitude> ClosureExploration<T> {
    /// Triples in discovery order.
    pub fn triples(&self) -> &[ConvTriple<T>] {
        &self.triples
    }

    pub fn contains(&self, t: &ConvTriple<T>) -> bool {
        self.found_at.contains_key(t)
    }

    /// Round in which `t` was first generated (0 for seeds).
    pub fn found_at(&self, t: &ConvTriple<T>) -> Option<usize> {
        self.found_at.get(t).copied()
    }

    pub fn witness_step(&self) -> Option<usize> {
        self.witness.as_ref().and_then(|w| self.found_at(w))
    }

    /// All ratios recorded between `u` and `v`.
    pub fn ratios(&self, u: &Unit, v: &Unit) -> Vec<&PosRatio<T>> {
        self.triples
            .iter()
            .filter(|t| &t.source == u && &t.target == v)
            .map(|t| &t.ratio)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

struct Explorer<'a, T> {
    sys: &'a UnitSystem<T>,
    bounds: ClosureBounds,
    out: ClosureExploration<T>,
    by_pair: HashMap<(Unit, Unit), PosRatio<T>>,
    dist_done: BTreeSet<Unit>,
}

impl<T: Magnitude> Explorer<'_, T> {
    fn insert(&mut self, t: ConvTriple<T>, step: usize) -> bool {
        if t.word_size() > self.bounds.max_word || self.out.found_at.contains_key(&t) {
            return false;
        }
        if self.out.triples.len() >= self.bounds.max_triples {
            self.out.truncated = true;
            return false;
        }
        let key = (t.source.clone(), t.target.clone());
        let conflict = match self.by_pair.get(&key) {
            Some(r) if *r != t.ratio => Some(t.ratio.div(r)),
            Some(_) => None,
            None => {
                self.by_pair.insert(key, t.ratio.clone());
                None
            }
        };
        if t.is_contradiction() && self.out.witness.is_none() {
            self.out.witness = Some(t.clone());
        }
        self.out.found_at.insert(t.clone(), step);
        self.out.triples.push(t);
        if let Some(r) = conflict {
            // two ratios for one pair: their quotient relates ∅ to ∅
            self.insert(ConvTriple::new(Unit::new(), r, Unit::new()), step);
        }
        true
    }

    /// Both halves of the prefix-stripping axiom for `u`.
    fn distribute(&mut self, u: &Unit, step: usize) -> Result<(), ModelError> {
        if !self.dist_done.insert(u.clone()) {
            return Ok(());
        }
        let p = self.sys.pval(u)?;
        let s = model::strip(u);
        self.insert(ConvTriple::new(u.clone(), p.clone(), s.clone()), step);
        self.insert(ConvTriple::new(s, p.inv(), u.clone()), step);
        Ok(())
    }
}

/// Bounded saturation of `triples` under products, inverses and the
/// prefix-stripping axiom.
///
/// The prefix-stripping axiom is instantiated for the empty unit, for every
/// unit in `triples` and `seeds`, and for every unit of a newly generated
/// triple. Each round multiplies the previous round's triples with all
/// stored ones and inverts them. Triples above `max_word` are discarded.
pub fn explore_closure<T: Magnitude>(
    sys: &UnitSystem<T>,
    triples: &[ConvTriple<T>],
    seeds: &[Unit],
    bounds: ClosureBounds,
) -> Result<ClosureExploration<T>, ModelError> {
    let mut ex = Explorer {
        sys,
        bounds,
        out: ClosureExploration {
            triples: Vec::new(),
            found_at: HashMap::new(),
            witness: None,
            steps_run: 0,
            truncated: false,
            saturated: false,
        },
        by_pair: HashMap::new(),
        dist_done: BTreeSet::new(),
    };
    for t in triples {
        sys.check_unit(&t.source)?;
        sys.check_unit(&t.target)?;
        ex.insert(t.clone(), 0);
    }
    ex.distribute(&Unit::new(), 0)?;
    for t in triples {
        ex.distribute(&t.source, 0)?;
        ex.distribute(&t.target, 0)?;
    }
    for u in seeds {
        sys.check_unit(u)?;
        ex.distribute(u, 0)?;
    }

    let mut frontier_start = 0;
    for step in 1..=bounds.max_steps {
        let frontier_end = ex.out.triples.len();
        if frontier_start == frontier_end {
            ex.out.saturated = true;
            break;
        }
        ex.out.steps_run = step;
        'round: for i in frontier_start..frontier_end {
            let f = ex.out.triples[i].clone();
            let candidates = std::iter::once(f.inv()).chain((0..frontier_end).map(|j| f.mul(&ex.out.triples[j])));
            let candidates: Vec<_> = candidates.filter(|t| t.word_size() <= bounds.max_word).collect();
            for t in candidates {
                let (src, tgt) = (t.source.clone(), t.target.clone());
                if ex.insert(t, step) {
                    ex.distribute(&src, step)?;
                    ex.distribute(&tgt, step)?;
                }
                if ex.out.truncated || (bounds.stop_at_witness && ex.out.witness.is_some()) {
                    break 'round;
                }
            }
        }
        frontier_start = frontier_end;
        if ex.out.truncated || (bounds.stop_at_witness && ex.out.witness.is_some()) {
            break;
        }
    }
    let stopped = bounds.stop_at_witness && ex.out.witness.is_some();
    if !ex.out.saturated && !ex.out.truncated && !stopped && frontier_start == ex.out.triples.len() {
        ex.out.saturated = true;
    }
    Ok(ex.out)
}

/// Outcome of the consistency question in [`ClassificationReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency<T> {
    /// Well-defining rule sets are always consistent.
    Guaranteed,
    /// Bounded exploration derived `⟨∅, r, ∅⟩` with `r ≠ 1`.
    WitnessFound(ConvTriple<T>),
    Unknown,
}

/// Position of a finite relation in the conversion hierarchy.
#[derive(Clone, Debug)]
pub struct ClassificationReport<T> {
    /// Why the relation is not a unit conversion at all, if it is not.
    pub violation: Option<TripleViolation<T>>,
    pub is_defining: bool,
    pub is_well_defining: bool,
    pub is_regular: bool,
    pub consistency: Consistency<T>,
    /// Present for defining relations.
    pub dependencies: Option<DependencyReport>,
}

pub fn classify<T: Magnitude>(
    sys: &UnitSystem<T>,
    triples: &[ConvTriple<T>],
    bounds: ClosureBounds,
) -> Result<ClassificationReport<T>, ModelError> {
    let violation = check_triples(sys, triples).err();
    if let Some(TripleViolation::Model(e)) = violation {
        return Err(e);
    }
    let defining = if violation.is_none() {
        DefiningConversion::from_triples(sys, triples).ok()
    } else {
        None
    };
    let dependencies = defining.as_ref().map(|c| analyze(sys, c));
    let is_defining = defining.is_some();
    let is_well_defining = dependencies.as_ref().is_some_and(|d| d.well_founded);
    let consistency = if is_well_defining {
        Consistency::Guaranteed
    } else {
        let found = explore_closure(sys, triples, &[], bounds)?;
        match found.witness {
            Some(w) => Consistency::WitnessFound(w),
            None => Consistency::Unknown,
        }
    };
    Ok(ClassificationReport {
        violation,
        is_defining,
        is_well_defining,
        is_regular: triples.is_empty(),
        consistency,
        dependencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{base_unit, prefixed, Dimension, PreUnit, Prefix};
    use crate::{DefiningConversion, Ratio, UnitSystem};

    fn r(s: &str) -> Ratio {
        s.parse().unwrap()
    }

    fn em(parts: &[(&str, i64)]) -> ExponentMap<Symbol> {
        parts.iter().map(|(s, z)| (Symbol::new(s), *z)).collect()
    }

    fn bare(parts: &[(&str, i64)]) -> Unit {
        parts.iter().map(|(s, z)| (PreUnit::bare(*s), *z)).collect()
    }

    /// m, s, g, A plus N, J, W, h, L and a dimensionless pair a/b.
    fn system() -> UnitSystem {
        let mut b = UnitSystem::builder();
        for dim in ["L", "T", "M", "I"] {
            b.dimension(dim).unwrap();
        }
        for (s, v) in [("d", "10^-1"), ("c", "10^-2"), ("m", "10^-3"), ("k", "10^3"), ("h", "10^2")] {
            b.prefix(s, r(v)).unwrap();
        }
        let units: [(&str, Dimension); 12] = [
            ("m", em(&[("L", 1)])),
            ("s", em(&[("T", 1)])),
            ("g", em(&[("M", 1)])),
            ("A", em(&[("I", 1)])),
            ("N", em(&[("L", 1), ("M", 1), ("T", -2)])),
            ("J", em(&[("L", 2), ("M", 1), ("T", -2)])),
            ("W", em(&[("L", 2), ("M", 1), ("T", -3)])),
            ("h", em(&[("T", 1)])),
            ("L", em(&[("L", 3)])),
            ("a", Dimension::new()),
            ("b", Dimension::new()),
            ("x", em(&[("L", 1)])),
        ];
        for (s, dim) in units {
            b.unit(s, dim).unwrap();
        }
        b.build().unwrap()
    }

    fn kg() -> Unit {
        prefixed(em(&[("k", 1)]), "g")
    }

    fn rules(sys: &UnitSystem) -> DefiningConversion {
        let n_target = kg().mul(&bare(&[("m", 1), ("s", -2)]));
        DefiningConversion::new(
            sys,
            [
                (Symbol::new("N"), Rule::new(Ratio::one(), n_target)),
                (Symbol::new("J"), Rule::new(Ratio::one(), bare(&[("N", 1), ("m", 1)]))),
                (Symbol::new("W"), Rule::new(Ratio::one(), bare(&[("J", 1), ("s", -1)]))),
                (Symbol::new("h"), Rule::new(r("3600"), base_unit("s"))),
                (Symbol::new("L"), Rule::new(Ratio::one(), prefixed(em(&[("d", 1)]), "m").pow(3))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triple_checks() {
        let sys = system();
        let ok = [ConvTriple::new(base_unit("h"), r("3600"), base_unit("s"))];
        assert_eq!(check_triples(&sys, &ok), Ok(()));
        let conflict = [
            ConvTriple::new(base_unit("a"), r("2"), base_unit("b")),
            ConvTriple::new(base_unit("a"), r("3"), base_unit("b")),
        ];
        assert!(matches!(check_triples(&sys, &conflict), Err(TripleViolation::RatioConflict { .. })));
        let mismatch = [ConvTriple::new(base_unit("m"), r("1"), base_unit("s"))];
        assert!(matches!(check_triples(&sys, &mismatch), Err(TripleViolation::DimensionMismatch(_))));
    }

    #[test]
    fn rule_validation() {
        let sys = system();
        let bad = DefiningConversion::new(&sys, [(Symbol::new("N"), Rule::new(Ratio::one(), base_unit("m")))]);
        assert!(matches!(bad, Err(ConvertError::DimensionMismatch { .. })));
        let unknown = DefiningConversion::new(&sys, [(Symbol::new("furlong"), Rule::new(Ratio::one(), base_unit("m")))]);
        assert!(matches!(unknown, Err(ConvertError::Model(ModelError::UnknownUnit(_)))));
        let not_basic = [ConvTriple::new(kg(), r("1000"), base_unit("g"))];
        assert_eq!(DefiningConversion::from_triples(&sys, &not_basic), Err(ConvertError::NotBasic));
        let dup = [
            ConvTriple::new(base_unit("a"), r("2"), base_unit("b")),
            ConvTriple::new(base_unit("a"), r("2"), Unit::new()),
        ];
        assert!(matches!(DefiningConversion::from_triples(&sys, &dup), Err(ConvertError::DuplicateRule(_))));
    }

    #[test]
    fn dependency_analysis() {
        let sys = system();
        let report = analyze(&sys, &rules(&sys));
        assert!(report.well_founded);
        assert!(report.depends_on("W", "g"));
        assert!(!report.depends_on("g", "W"));
        assert_eq!(report.depth["N"], 1);
        assert_eq!(report.depth["J"], 2);
        assert_eq!(report.depth["W"], 3);
        assert_eq!(report.depth["m"], 0);
        assert_eq!(report.iteration_bound, Some(3));
    }

    #[test]
    fn cycles_are_reported() {
        let sys = system();
        let c = DefiningConversion::new(
            &sys,
            [
                (Symbol::new("a"), Rule::new(r("2"), base_unit("b"))),
                (Symbol::new("b"), Rule::new(r("3"), base_unit("a"))),
            ],
        )
        .unwrap();
        let report = analyze(&sys, &c);
        assert!(!report.well_founded);
        assert_eq!(report.cycle_witness, Some(vec![Symbol::new("a"), Symbol::new("b")]));
        assert!(report.depth.is_empty());
        assert!(matches!(Converter::new(&sys, &c), Err(ConvertError::NotWellDefining { .. })));
        assert!(matches!(rwr_star(&sys, &c, &base_unit("a")), Err(ConvertError::NotWellDefining { .. })));
    }

    #[test]
    fn empty_target_has_depth_one() {
        let sys = system();
        let dozen = DefiningConversion::new(&sys, [(Symbol::new("a"), Rule::new(r("12"), Unit::new()))]).unwrap();
        assert_eq!(analyze(&sys, &dozen).depth["a"], 1);
    }

    #[test]
    fn expansion() {
        let sys = system();
        let c = rules(&sys);
        assert_eq!(c.xpd(&Symbol::new("L")), (Ratio::one(), prefixed(em(&[("d", 1)]), "m").pow(3)));
        assert_eq!(c.xpd(&Symbol::new("x")), (Ratio::one(), base_unit("x")));
        let n = c.xpd(&Symbol::new("N"));
        let expected: Unit = [
            (PreUnit::new(em(&[("k", 1)]), "g"), 1),
            (PreUnit::bare("m"), 1),
            (PreUnit::bare("s"), -2),
        ]
        .into_iter()
        .collect();
        assert_eq!(n, (Ratio::one(), expected));
    }

    #[test]
    fn single_rewriting_steps() {
        let sys = system();
        let c = rules(&sys);
        let centi_litre = EvaluatedUnit::new(r("1/100"), em(&[("L", 1)]));
        assert_eq!(rwr_eval(&sys, &c, &centi_litre).unwrap(), EvaluatedUnit::new(r("10^-5"), em(&[("m", 3)])));
        let gram = EvaluatedUnit::new(r("7/2"), em(&[("g", 1)]));
        assert_eq!(rwr_eval(&sys, &c, &gram).unwrap(), gram);
        // W -> J/s -> one step only expands W
        let watt = EvaluatedUnit::new(Ratio::one(), em(&[("W", 1)]));
        assert_eq!(rwr_eval(&sys, &c, &watt).unwrap(), EvaluatedUnit::new(Ratio::one(), em(&[("J", 1), ("s", -1)])));
        let conv = Converter::new(&sys, &c).unwrap();
        assert_eq!(conv.rwr_eval(&watt), rwr_eval(&sys, &c, &watt).unwrap());
    }

    #[test]
    fn exhaustive_rewriting() {
        let sys = system();
        let c = rules(&sys);
        let conv = Converter::new(&sys, &c).unwrap();
        let ns = bare(&[("N", 1), ("s", 1)]);
        assert_eq!(conv.rwr_star(&ns).unwrap(), EvaluatedUnit::new(r("1000"), em(&[("g", 1), ("m", 1), ("s", -1)])));
        assert_eq!(conv.rwr_star(&Unit::new()).unwrap(), EvaluatedUnit::one());
        let w = conv.rwr_star(&base_unit("W")).unwrap();
        assert_eq!(w, EvaluatedUnit::new(r("1000"), em(&[("g", 1), ("m", 2), ("s", -3)])));
        assert_eq!(conv.rwr_eval(&w), w);
        let trace = conv.trace(&base_unit("W")).unwrap();
        assert_eq!(trace.len(), 4);
        assert_eq!(trace.last(), Some(&w));
    }

    #[test]
    fn conversion_decisions() {
        let sys = system();
        let c = rules(&sys);
        let conv = Converter::new(&sys, &c).unwrap();
        let cl = prefixed(em(&[("c", 1)]), "L");
        assert_eq!(conv.convert(&cl, &bare(&[("m", 3)])).unwrap(), Some(r("1/100000")));
        assert_eq!(conv.convert(&ns_like(), &ns_like()).unwrap(), Some(Ratio::one()));
        assert_eq!(conv.convert(&base_unit("m"), &base_unit("s")).unwrap(), None);
        assert!(!conv.coherent(&base_unit("h"), &base_unit("s")).unwrap());
        assert_eq!(conv.convert(&base_unit("h"), &base_unit("s")).unwrap(), Some(r("3600")));
        assert!(conv.coherent(&kg(), &kg()).unwrap());
        assert_eq!(convert(&sys, &c, &base_unit("J"), &bare(&[("N", 1), ("m", 1)])).unwrap(), Some(Ratio::one()));
        assert!(coherent(&sys, &c, &base_unit("J"), &bare(&[("N", 1), ("m", 1)])).unwrap());
        let hw = prefixed(em(&[("h", 1)]), "W");
        let o = conv.outcome(&hw, &base_unit("W")).unwrap();
        assert_eq!(o.ratio, Some(r("100")));
    }

    fn ns_like() -> Unit {
        bare(&[("N", 1), ("s", 1)])
    }

    #[test]
    fn normalized_expansion_keeps_prefixes() {
        let sys = system();
        let c = rules(&sys);
        let conv = Converter::new(&sys, &c).unwrap();
        let w = conv.expand_normalized(&model::norm(&base_unit("W")));
        assert_eq!(w, NormalizedUnit::new(em(&[("k", 1)]), em(&[("g", 1), ("m", 2), ("s", -3)])));
        // h has ratio 3600 and stays symbolic
        let h = conv.expand_normalized(&model::norm(&base_unit("h")));
        assert_eq!(h, model::norm(&base_unit("h")));
        let l = conv.expand_normalized(&model::norm(&base_unit("L")));
        assert_eq!(l, NormalizedUnit::new(em(&[("d", 3)]), em(&[("m", 3)])));
    }

    #[test]
    fn closure_contains_derived_triples() {
        let sys = system();
        let (x, a) = (base_unit("a"), base_unit("b"));
        let seed = [ConvTriple::new(x.clone(), r("2"), a.clone())];
        let found = explore_closure(&sys, &seed, &[], ClosureBounds::default()).unwrap();
        assert!(found.contains(&ConvTriple::new(x.mul(&a.inv()), r("2"), Unit::new())));
        assert!(found.contains(&ConvTriple::identity()));
        assert!(found.witness.is_none());
    }

    #[test]
    fn closure_finds_inconsistency() {
        let sys = system();
        let (u, v) = (base_unit("a"), base_unit("b"));
        let seed = [
            ConvTriple::new(u.clone(), r("2"), v.clone()),
            ConvTriple::new(u.inv(), r("3"), v.inv()),
        ];
        let found = explore_closure(&sys, &seed, &[], ClosureBounds::default()).unwrap();
        let w = found.witness.unwrap();
        assert!(w.is_contradiction());
        assert!(w.ratio == r("6") || w.ratio == r("1/6"), "{w:?}");
    }

    #[test]
    fn regular_closure_strips_prefixes() {
        let sys = system();
        let found = explore_closure(&sys, &[], &[kg()], ClosureBounds::default()).unwrap();
        assert!(found.contains(&ConvTriple::new(kg(), r("1000"), base_unit("g"))));
        assert!(found.contains(&ConvTriple::new(base_unit("g"), r("1/1000"), kg())));
    }

    #[test]
    fn classification() {
        let sys = system();
        let empty = classify(&sys, &[], ClosureBounds::default()).unwrap();
        assert!(empty.is_regular && empty.is_well_defining && empty.is_defining);
        assert_eq!(empty.consistency, Consistency::Guaranteed);

        let c = rules(&sys);
        let report = classify(&sys, &c.to_triples(), ClosureBounds::default()).unwrap();
        assert!(report.is_defining && report.is_well_defining && !report.is_regular);
        assert_eq!(report.consistency, Consistency::Guaranteed);

        let cyclic = [
            ConvTriple::new(base_unit("a"), r("2"), base_unit("b")),
            ConvTriple::new(base_unit("b"), r("3"), base_unit("a")),
        ];
        let report = classify(&sys, &cyclic, ClosureBounds::default()).unwrap();
        assert!(report.is_defining && !report.is_well_defining);
        match report.consistency {
            Consistency::WitnessFound(w) => assert!(w.is_contradiction()),
            other => panic!("expected witness, got {other:?}"),
        }

        let not_conv = [ConvTriple::new(base_unit("m"), r("1"), base_unit("s"))];
        let report = classify(&sys, &not_conv, ClosureBounds::default()).unwrap();
        assert!(report.violation.is_some() && !report.is_defining);
        let _ = Prefix::new();
    }
}
