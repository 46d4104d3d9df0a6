//! Free abelian groups as canonical exponent maps, together with the pairing
//! monad and the distributive law that exchanges the two.
//!
//! An [`ExponentMap`] is a finitely supported integer-valued function on a
//! generator alphabet. Zero exponents are never stored, so structural
//! equality is group equality and iteration follows the generator order.

use std::collections::BTreeMap;
use std::fmt;

/// An abelian group given by its operations, used as the target of
/// [`ExponentMap::eval`] and as the left component of [`Pair`].
///
/// Implementations are expected to satisfy the abelian group laws; nothing
/// here checks them.
pub trait Group<T> {
    fn neutral(&self) -> T;
    fn combine(&self, a: &T, b: &T) -> T;
    fn invert(&self, a: &T) -> T;

    /// `a` combined with itself `z` times (inverted for negative `z`).
    fn pow(&self, a: &T, z: i64) -> T {
        let mut base = if z < 0 { self.invert(a) } else { self.combine(a, &self.neutral()) };
        let mut e = z.unsigned_abs();
        let mut acc = self.neutral();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.combine(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.combine(&base, &base);
            }
        }
        acc
    }
}

/// Finitely supported map from generators to nonzero integer exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentMap<G: Ord> {
    entries: BTreeMap<G, i64>,
}

impl<G: Ord> Default for ExponentMap<G> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<G: Ord + Clone> ExponentMap<G> {
    /// The neutral element, the empty map.
    pub fn new() -> Self {
        Self::default()
    }

    /// The singleton `{x ↦ 1}`.
    pub fn delta(x: G) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(x, 1);
        Self { entries }
    }

    /// Collects `(generator, exponent)` pairs, summing repeated generators
    /// and dropping whatever cancels to zero.
    pub fn from_entries<I: IntoIterator<Item = (G, i64)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (g, z) in iter {
            out.add_exponent(g, z);
        }
        out
    }

    fn add_exponent(&mut self, g: G, z: i64) {
        if z == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.entries.entry(g) {
            Entry::Vacant(v) => {
                v.insert(z);
            }
            Entry::Occupied(mut o) => {
                let sum = *o.get() + z;
                if sum == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Exponent of `g`, zero outside the support.
    pub fn get(&self, g: &G) -> i64 {
        self.entries.get(g).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = &G> + '_ {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&G, i64)> + '_ {
        self.entries.iter().map(|(g, z)| (g, *z))
    }

    /// The unique factorization into nonzero powers of distinct generators,
    /// in generator order.
    pub fn factors(&self) -> Vec<(G, i64)> {
        self.entries.iter().map(|(g, z)| (g.clone(), *z)).collect()
    }

    /// Sum of absolute exponents.
    pub fn weight(&self) -> u64 {
        self.entries.values().map(|z| z.unsigned_abs()).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, z) in other.iter() {
            out.add_exponent(g.clone(), z);
        }
        out
    }

    pub fn inv(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|(g, z)| (g.clone(), -z)).collect(),
        }
    }

    pub fn pow(&self, z: i64) -> Self {
        if z == 0 {
            return Self::new();
        }
        Self {
            entries: self.entries.iter().map(|(g, e)| (g.clone(), e * z)).collect(),
        }
    }

    /// Functorial action: relabel generators through `f`, summing the
    /// exponents of generators that `f` identifies.
    pub fn map<H: Ord + Clone>(&self, mut f: impl FnMut(&G) -> H) -> ExponentMap<H> {
        ExponentMap::from_entries(self.iter().map(|(g, z)| (f(g), z)))
    }

    /// Fallible variant of [`ExponentMap::map`].
    pub fn try_map<H: Ord + Clone, E>(
        &self,
        mut f: impl FnMut(&G) -> Result<H, E>,
    ) -> Result<ExponentMap<H>, E> {
        let mut out = ExponentMap::new();
        for (g, z) in self.iter() {
            out.add_exponent(f(g)?, z);
        }
        Ok(out)
    }

    /// Multiplies the map out in `group`, reading exponents as powers.
    pub fn eval<Gr: Group<G>>(&self, group: &Gr) -> G {
        self.iter().fold(group.neutral(), |acc, (g, z)| {
            group.combine(&acc, &group.pow(g, z))
        })
    }

    /// The unique homomorphic extension of `f` to the free group, i.e.
    /// `eval ∘ map(f)` without materializing the intermediate map.
    pub fn lift<T, Gr: Group<T>, E>(
        &self,
        group: &Gr,
        mut f: impl FnMut(&G) -> Result<T, E>,
    ) -> Result<T, E> {
        let mut acc = group.neutral();
        for (g, z) in self.iter() {
            acc = group.combine(&acc, &group.pow(&f(g)?, z));
        }
        Ok(acc)
    }
}

impl<G: Ord + Clone> ExponentMap<ExponentMap<G>> {
    /// Monad multiplication: distributes the outer exponents over the inner
    /// maps and combines the results.
    pub fn flatten(&self) -> ExponentMap<G> {
        let mut out = ExponentMap::new();
        for (inner, outer) in self.iter() {
            for (g, z) in inner.iter() {
                out.add_exponent(g.clone(), z * outer);
            }
        }
        out
    }
}

impl<G: Ord + Clone> FromIterator<(G, i64)> for ExponentMap<G> {
    fn from_iter<I: IntoIterator<Item = (G, i64)>>(iter: I) -> Self {
        Self::from_entries(iter)
    }
}

impl<G: Ord + fmt::Debug> fmt::Debug for ExponentMap<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// The free abelian group itself, as a [`Group`] over its exponent maps.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreeAbelian;

impl<G: Ord + Clone> Group<ExponentMap<G>> for FreeAbelian {
    fn neutral(&self) -> ExponentMap<G> {
        ExponentMap::new()
    }
    fn combine(&self, a: &ExponentMap<G>, b: &ExponentMap<G>) -> ExponentMap<G> {
        a.mul(b)
    }
    fn invert(&self, a: &ExponentMap<G>) -> ExponentMap<G> {
        a.inv()
    }
    fn pow(&self, a: &ExponentMap<G>, z: i64) -> ExponentMap<G> {
        a.pow(z)
    }
}

/// An element of a fixed abelian group paired with an arbitrary value.
///
/// With the group's neutral element and operation this forms a monad
/// ([`Pair::eta`], [`Pair::mu`]); when the right component is a free
/// abelian group, [`beta`] distributes the pairing over it and [`theta`] /
/// [`xi`] are the unit and multiplication of the composite monad.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair<G, X> {
    pub first: G,
    pub second: X,
}

impl<G, X> Pair<G, X> {
    pub fn new(first: G, second: X) -> Self {
        Self { first, second }
    }

    pub fn map<Y>(self, f: impl FnOnce(X) -> Y) -> Pair<G, Y> {
        Pair::new(self.first, f(self.second))
    }

    pub fn eta<Gr: Group<G>>(group: &Gr, x: X) -> Self {
        Pair::new(group.neutral(), x)
    }
}

impl<G, X> Pair<G, Pair<G, X>> {
    pub fn mu<Gr: Group<G>>(self, group: &Gr) -> Pair<G, X> {
        Pair::new(group.combine(&self.first, &self.second.first), self.second.second)
    }
}

/// Distributive law: splits a free group word over pairs into the product
/// of the left components and the word over the right components.
pub fn beta<G, X, Gr>(group: &Gr, word: &ExponentMap<Pair<G, X>>) -> Pair<G, ExponentMap<X>>
where
    G: Ord + Clone,
    X: Ord + Clone,
    Gr: Group<G>,
{
    let left = word.iter().fold(group.neutral(), |acc, (p, z)| {
        group.combine(&acc, &group.pow(&p.first, z))
    });
    Pair::new(left, word.map(|p| p.second.clone()))
}

/// Unit of the composite monad.
pub fn theta<G, X: Ord + Clone, Gr: Group<G>>(group: &Gr, x: X) -> Pair<G, ExponentMap<X>> {
    Pair::eta(group, ExponentMap::delta(x))
}

/// Multiplication of the composite monad: distribute the inner pairs, then
/// combine group components and flatten the nested word.
pub fn xi<G, X, Gr>(
    group: &Gr,
    nested: &Pair<G, ExponentMap<Pair<G, ExponentMap<X>>>>,
) -> Pair<G, ExponentMap<X>>
where
    G: Ord + Clone,
    X: Ord + Clone,
    Gr: Group<G>,
{
    let inner = beta(group, &nested.second);
    Pair::new(nested.first.clone(), inner)
        .mu(group)
        .map(|words| words.flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RatioGroup;
    use crate::Ratio;
    use proptest::prelude::*;

    type Em = ExponentMap<char>;

    fn em(entries: &[(char, i64)]) -> Em {
        entries.iter().copied().collect()
    }

    fn q(s: &str) -> Ratio {
        s.parse().unwrap()
    }

    fn g1() -> Em {
        em(&[('a', 2), ('b', -1), ('c', 1)])
    }

    fn g2() -> Em {
        em(&[('b', 2), ('c', -1), ('d', -2)])
    }

    fn lump(x: &char) -> char {
        match x {
            'a' | 'b' => 'a',
            _ => 'b',
        }
    }

    #[test]
    fn empty_and_delta() {
        assert!(Em::new().is_empty());
        assert_eq!(Em::new().support().count(), 0);
        assert_eq!(Em::new().mul(&g1()), g1());
        assert_eq!(Em::delta('a'), em(&[('a', 1)]));
        assert_eq!(Em::delta('a').mul(&Em::delta('a').inv()), Em::new());
    }

    #[test]
    fn pointwise_product_drops_zeros() {
        assert_eq!(g1().mul(&g2()), em(&[('a', 2), ('b', 1), ('d', -2)]));
        assert_eq!(g1().mul(&g1().inv()), Em::new());
        assert_eq!(g1().mul(&Em::new()), g1());
    }

    #[test]
    fn powers() {
        assert_eq!(em(&[('a', 2)]).pow(3), em(&[('a', 6)]));
        assert_eq!(g1().pow(-1), g1().inv());
        assert_eq!(g1().pow(0), Em::new());
        assert_eq!(Em::delta('d').pow(3), em(&[('d', 3)]));
    }

    #[test]
    fn map_lumps_identified_generators() {
        assert_eq!(g1().map(lump), em(&[('a', 1), ('b', 1)]));
        assert_eq!(g2().map(lump), em(&[('a', 2), ('b', -3)]));
        assert_eq!(g1().mul(&g2()).map(lump), em(&[('a', 3), ('b', -2)]));
        assert_eq!(g1().map(|x| *x), g1());
    }

    #[test]
    fn flatten_distributes() {
        let nested: ExponentMap<Em> = [(g1(), -2), (g2(), -1)].into_iter().collect();
        assert_eq!(nested.flatten(), em(&[('a', -4), ('c', -1), ('d', 2)]));
        assert_eq!(ExponentMap::<Em>::new().flatten(), Em::new());
        assert_eq!(ExponentMap::delta(g1()).flatten(), g1());
    }

    #[test]
    fn eval_in_rationals() {
        let q1: ExponentMap<Ratio> = [(q("2"), -3), (q("3"), 2), (q("2/5"), -1)].into_iter().collect();
        assert_eq!(q1.eval(&RatioGroup), q("45/16"));
        assert_eq!(ExponentMap::<Ratio>::new().eval(&RatioGroup), Ratio::one());
        assert_eq!(ExponentMap::delta(q("7/3")).eval(&RatioGroup), q("7/3"));
    }

    #[test]
    fn factor_list() {
        let v: ExponentMap<&str> = [("m", 1), ("s", -1)].into_iter().collect();
        assert_eq!(v.factors(), vec![("m", 1), ("s", -1)]);
        assert!(Em::new().factors().is_empty());
    }

    #[test]
    fn pairing_monad() {
        assert_eq!(Pair::eta(&RatioGroup, 'a'), Pair::new(q("1"), 'a'));
        let nested = Pair::new(q("2"), Pair::new(q("3"), 'b'));
        assert_eq!(nested.mu(&RatioGroup), Pair::new(q("6"), 'b'));
        assert_eq!(Pair::new(q("5"), 'c').map(|c| lump(&c)), Pair::new(q("5"), 'b'));
    }

    #[test]
    fn beta_splits_pairs() {
        let word: ExponentMap<Pair<Ratio, char>> = [
            (Pair::new(q("2"), 'a'), -3),
            (Pair::new(q("3"), 'b'), 2),
            (Pair::new(q("2/5"), 'c'), -1),
        ]
        .into_iter()
        .collect();
        assert_eq!(beta(&RatioGroup, &word), Pair::new(q("45/16"), em(&[('a', -3), ('b', 2), ('c', -1)])));
    }

    #[test]
    fn composite_monad() {
        assert_eq!(theta(&RatioGroup, 'c'), Pair::new(q("1"), Em::delta('c')));
        let nested = Pair::new(
            q("2"),
            [
                (Pair::new(q("3"), em(&[('a', 5)])), -2),
                (Pair::new(q("7"), em(&[('b', -1)])), 1),
            ]
            .into_iter()
            .collect(),
        );
        assert_eq!(xi(&RatioGroup, &nested), Pair::new(q("14/9"), em(&[('a', -10), ('b', -1)])));
    }

    fn arb_em() -> impl Strategy<Value = Em> {
        prop::collection::vec((prop::sample::select(vec!['a', 'b', 'c', 'd', 'e']), -4i64..=4), 0..6)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn never_stores_zero(f in arb_em(), g in arb_em(), z in -3i64..=3) {
            for h in [f.mul(&g), f.inv(), f.pow(z), f.map(lump)] {
                prop_assert!(h.iter().all(|(_, e)| e != 0));
            }
        }

        #[test]
        fn factors_rebuild(f in arb_em()) {
            let rebuilt = f
                .factors()
                .into_iter()
                .fold(Em::new(), |acc, (x, z)| acc.mul(&Em::delta(x).pow(z)));
            prop_assert_eq!(rebuilt, f);
        }

        #[test]
        fn group_pow_default_matches(f in arb_em(), z in -5i64..=5) {
            struct Plain;
            impl Group<Em> for Plain {
                fn neutral(&self) -> Em { Em::new() }
                fn combine(&self, a: &Em, b: &Em) -> Em { a.mul(b) }
                fn invert(&self, a: &Em) -> Em { a.inv() }
            }
            prop_assert_eq!(Plain.pow(&f, z), f.pow(z));
        }
    }
}
