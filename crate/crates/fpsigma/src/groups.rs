//! Finite group tables, free products and word arithmetic.
//!
//! A free product `F = G_1 * ... * G_m` is described by a list of factor
//! groups. A factor is either a finite group given by its full multiplication
//! table (element 0 is always the identity) or, for the two-factor reduction
//! of many-factor products, an inner free product whose elements are
//! normalized words. Elements of `F` are [`Word`]s: alternating sequences of
//! nontrivial letters, each letter living in one factor.

use std::fmt;

use num::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::lp::Rational;

/// Errors from group table validation and word handling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication table must be {order}x{order}, row {row} has length {len}")]
    BadShape { order: usize, row: usize, len: usize },
    #[error("table entry mul[{row}][{col}] = {value} is out of range")]
    EntryOutOfRange { row: usize, col: usize, value: u32 },
    #[error("element 0 is not a two-sided identity: mul[{a}][{b}] != {expect}")]
    BadIdentity { a: usize, b: usize, expect: usize },
    #[error("associativity fails at ({a}, {b}, {c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("element {a} has no two-sided inverse")]
    NoInverse { a: usize },
    #[error("a free product needs at least two factors, got {count}")]
    TooFewFactors { count: usize },
    #[error("factor {factor} is trivial; free product factors must be nontrivial")]
    TrivialFactor { factor: usize },
    #[error("letter refers to factor {factor}, but the product has {count} factors")]
    BadFactor { factor: usize, count: usize },
    #[error("element is not valid for factor {factor}: {reason}")]
    BadElement { factor: usize, reason: String },
    #[error("cannot enumerate elements: a direct factor is an inner free product")]
    NestedEnumeration,
    #[error("requested {requested} elements, but the group has only {order}")]
    NotEnoughElements { requested: usize, order: usize },
}

/// A finite group presented by its multiplication table.
///
/// Element `0` is the identity; `mul[a][b]` is the product `a * b`. The table
/// is validated at construction, so every value of this type is a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupTable {
    order: usize,
    mul: Vec<Vec<u32>>,
    #[serde(skip)]
    inv: Vec<u32>,
}

impl GroupTable {
    /// Validate a raw multiplication table and build the group.
    pub fn new(mul: Vec<Vec<u32>>) -> Result<Self, GroupError> {
        let order = mul.len();
        for (row, r) in mul.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::BadShape { order, row, len: r.len() });
            }
            for (col, &v) in r.iter().enumerate() {
                if v as usize >= order {
                    return Err(GroupError::EntryOutOfRange { row, col, value: v });
                }
            }
        }
        for a in 0..order {
            if mul[a][0] as usize != a {
                return Err(GroupError::BadIdentity { a, b: 0, expect: a });
            }
            if mul[0][a] as usize != a {
                return Err(GroupError::BadIdentity { a: 0, b: a, expect: a });
            }
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    let ab_c = mul[mul[a][b] as usize][c];
                    let a_bc = mul[a][mul[b][c] as usize];
                    if ab_c != a_bc {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            match (0..order).find(|&b| mul[a][b] == 0 && mul[b][a] == 0) {
                Some(b) => inv[a] = b as u32,
                None => return Err(GroupError::NoInverse { a }),
            }
        }
        Ok(Self { order, mul, inv })
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let mul = (0..n)
            .map(|a| (0..n).map(|b| ((a + b) % n) as u32).collect())
            .collect();
        Self::new(mul).expect("cyclic table is a group")
    }

    /// The Klein four-group (xor on two bits).
    pub fn klein_four() -> Self {
        let mul = (0..4).map(|a| (0..4).map(|b| (a ^ b) as u32).collect()).collect();
        Self::new(mul).expect("klein table is a group")
    }

    /// The symmetric group on three points, elements ordered
    /// `id, (12), (13), (23), (123), (132)`.
    pub fn symmetric3() -> Self {
        // Permutations as images of (0,1,2).
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let index = |r: [usize; 3]| perms.iter().position(|p| *p == r).unwrap() as u32;
        let mul = perms
            .iter()
            .map(|a| perms.iter().map(|b| index(compose(a, b))).collect())
            .collect();
        Self::new(mul).expect("S3 table is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul_idx(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize][b as usize]
    }

    pub fn inv_idx(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }
}

impl<'de> Deserialize<'de> for GroupTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            order: usize,
            mul: Vec<Vec<u32>>,
        }
        let raw = Raw::deserialize(de)?;
        if raw.mul.len() != raw.order {
            return Err(D::Error::custom(format!(
                "declared order {} but table has {} rows",
                raw.order,
                raw.mul.len()
            )));
        }
        GroupTable::new(raw.mul).map_err(D::Error::custom)
    }
}

/// One factor of a free product: a finite table group, or an inner free
/// product treated as a single (infinite) factor whose elements are words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorGroup {
    Table(GroupTable),
    Product(FreeProduct),
}

impl FactorGroup {
    /// Group order; `None` for an inner free product (always infinite, since
    /// factors are nontrivial).
    pub fn order(&self) -> Option<usize> {
        match self {
            FactorGroup::Table(t) => Some(t.order()),
            FactorGroup::Product(_) => None,
        }
    }

    pub fn identity(&self) -> GroupElem {
        match self {
            FactorGroup::Table(_) => GroupElem::Idx(0),
            FactorGroup::Product(_) => GroupElem::Word(Word::identity()),
        }
    }

    pub fn is_identity(&self, a: &GroupElem) -> bool {
        match a {
            GroupElem::Idx(i) => *i == 0,
            GroupElem::Word(w) => w.0.is_empty(),
        }
    }

    /// Product of two elements. Both must be valid for this factor; the
    /// constructors and parsers guarantee that for all library-made elements.
    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        match (self, a, b) {
            (FactorGroup::Table(t), GroupElem::Idx(x), GroupElem::Idx(y)) => {
                GroupElem::Idx(t.mul_idx(*x, *y))
            }
            (FactorGroup::Product(p), GroupElem::Word(u), GroupElem::Word(v)) => {
                GroupElem::Word(p.mul(u, v))
            }
            _ => panic!("element kind does not match factor kind"),
        }
    }

    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        match (self, a) {
            (FactorGroup::Table(t), GroupElem::Idx(x)) => GroupElem::Idx(t.inv_idx(*x)),
            (FactorGroup::Product(p), GroupElem::Word(w)) => GroupElem::Word(p.inv(w)),
            _ => panic!("element kind does not match factor kind"),
        }
    }

    pub fn validate_elem(&self, factor: usize, a: &GroupElem) -> Result<(), GroupError> {
        match (self, a) {
            (FactorGroup::Table(t), GroupElem::Idx(x)) => {
                if (*x as usize) < t.order() {
                    Ok(())
                } else {
                    Err(GroupError::BadElement {
                        factor,
                        reason: format!("index {x} >= order {}", t.order()),
                    })
                }
            }
            (FactorGroup::Product(p), GroupElem::Word(w)) => {
                p.validate_word(w)?;
                if p.normalize(w) == *w {
                    Ok(())
                } else {
                    Err(GroupError::BadElement {
                        factor,
                        reason: "inner word is not normalized".into(),
                    })
                }
            }
            _ => Err(GroupError::BadElement {
                factor,
                reason: "element kind does not match factor kind".into(),
            }),
        }
    }

    /// The first `n` elements of the group in canonical order: table groups by
    /// index, inner free products by word length then lexicographic letters.
    pub fn elements(&self, n: usize) -> Result<Vec<GroupElem>, GroupError> {
        match self {
            FactorGroup::Table(t) => {
                if n > t.order() {
                    return Err(GroupError::NotEnoughElements { requested: n, order: t.order() });
                }
                Ok((0..n as u32).map(GroupElem::Idx).collect())
            }
            FactorGroup::Product(p) => Ok(p.elements(n)?.into_iter().map(GroupElem::Word).collect()),
        }
    }

    fn q_star(&self) -> QStar {
        match self {
            FactorGroup::Table(t) => q_star_of_order(t.order() as u64),
            // Finite subgroups of a free product are conjugate into its
            // factors, so the minimum passes through.
            FactorGroup::Product(p) => p.q_star(),
        }
    }
}

/// An element of one factor: an index into a table group, or a normalized
/// word of an inner free product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElem {
    Idx(u32),
    Word(Word),
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElem::Idx(i) => write!(f, "{i}"),
            GroupElem::Word(w) => write!(f, "{w}"),
        }
    }
}

impl Serialize for GroupElem {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupElem::Idx(i) => ser.serialize_u32(*i),
            GroupElem::Word(w) => w.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for GroupElem {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Idx(u32),
            Word(Word),
        }
        Ok(match Raw::deserialize(de)? {
            Raw::Idx(i) => GroupElem::Idx(i),
            Raw::Word(w) => GroupElem::Word(w),
        })
    }
}

/// A letter of a word: an element of one factor. `factor` is 0-based in code;
/// the JSON form is `[factor + 1, elem]` to match the 1-based factor indexing
/// of the input format.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub factor: usize,
    pub elem: GroupElem,
}

impl Letter {
    pub fn new(factor: usize, elem: GroupElem) -> Self {
        Self { factor, elem }
    }

    /// Letter in a table factor, by element index.
    pub fn idx(factor: usize, elem: u32) -> Self {
        Self { factor, elem: GroupElem::Idx(elem) }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        (self.factor + 1, &self.elem).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (factor_1based, elem) = <(usize, GroupElem)>::deserialize(de)?;
        if factor_1based == 0 {
            return Err(D::Error::custom("factor indices in words are 1-based"));
        }
        Ok(Letter { factor: factor_1based - 1, elem })
    }
}

/// A word over a free product: a sequence of letters. Normal form is an
/// alternating sequence (adjacent letters in distinct factors) of nontrivial
/// letters; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// Syllable length of the (not necessarily normalized) word.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// A normalized word is cyclically reduced if its first and last letters
    /// lie in distinct factors (or it has at most one letter).
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(a), Some(b)) => self.0.len() == 1 || a.factor != b.factor,
            _ => true,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "g{}[{}]", l.factor + 1, l.elem)?;
        }
        Ok(())
    }
}

/// The minimum order greater than two of a finite subgroup of any factor;
/// infinite when no factor has such a subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QStar {
    Finite(u64),
    Infinite,
}

impl QStar {
    /// The coefficient `q*/(q* - 2)`, taken to be 1 when `q*` is infinite.
    pub fn ratio(self) -> Rational {
        match self {
            QStar::Finite(q) => BigRational::new((q as i64).into(), (q as i64 - 2).into()),
            QStar::Infinite => BigRational::from_integer(1.into()),
        }
    }
}

/// Smallest subgroup order greater than 2 of a group of order `n`: subgroup
/// orders divide `n`, an order-p subgroup exists for every prime p dividing
/// `n`, and an order-4 subgroup exists exactly when 4 divides `n`.
fn q_star_of_order(n: u64) -> QStar {
    let mut best: Option<u64> = None;
    let mut m = n;
    while m % 2 == 0 {
        m /= 2;
    }
    let mut p = 3;
    while p * p <= m {
        if m % p == 0 {
            best = Some(p);
            break;
        }
        p += 2;
    }
    if best.is_none() && m > 1 {
        best = Some(m);
    }
    if n % 4 == 0 {
        best = Some(best.map_or(4, |b| b.min(4)));
    }
    match best {
        Some(q) => QStar::Finite(q),
        None => QStar::Infinite,
    }
}

/// A free product of nontrivial groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeProduct {
    factors: Vec<FactorGroup>,
}

impl FreeProduct {
    pub fn new(factors: Vec<FactorGroup>) -> Result<Self, GroupError> {
        if factors.len() < 2 {
            return Err(GroupError::TooFewFactors { count: factors.len() });
        }
        for (i, f) in factors.iter().enumerate() {
            if f.order() == Some(1) {
                return Err(GroupError::TrivialFactor { factor: i });
            }
        }
        Ok(Self { factors })
    }

    /// Free product of finite table groups.
    pub fn of_tables(tables: Vec<GroupTable>) -> Result<Self, GroupError> {
        Self::new(tables.into_iter().map(FactorGroup::Table).collect())
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &FactorGroup {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FactorGroup] {
        &self.factors
    }

    pub fn validate_word(&self, w: &Word) -> Result<(), GroupError> {
        for l in &w.0 {
            if l.factor >= self.factors.len() {
                return Err(GroupError::BadFactor { factor: l.factor, count: self.factors.len() });
            }
            self.factors[l.factor].validate_elem(l.factor, &l.elem)?;
        }
        Ok(())
    }

    /// Normal form: merge adjacent letters of the same factor, drop identity
    /// letters, repeat until the word alternates.
    pub fn normalize(&self, w: &Word) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(w.0.len());
        for l in &w.0 {
            let g = &self.factors[l.factor];
            if out.last().map(|t| t.factor) == Some(l.factor) {
                let top = out.pop().unwrap();
                let merged = g.mul(&top.elem, &l.elem);
                if !g.is_identity(&merged) {
                    out.push(Letter::new(l.factor, merged));
                }
            } else if !g.is_identity(&l.elem) {
                out.push(l.clone());
            }
        }
        Word(out)
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        let mut letters = a.0.clone();
        letters.extend(b.0.iter().cloned());
        self.normalize(&Word(letters))
    }

    pub fn inv(&self, w: &Word) -> Word {
        Word(
            w.0.iter()
                .rev()
                .map(|l| Letter::new(l.factor, self.factors[l.factor].inv(&l.elem)))
                .collect(),
        )
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        self.normalize(w).is_empty()
    }

    /// `u^-1 w u`, normalized.
    pub fn conjugate(&self, w: &Word, u: &Word) -> Word {
        self.mul(&self.mul(&self.inv(u), w), u)
    }

    /// The cyclically reduced core of a normalized word.
    pub fn cyclic_reduction(&self, w: &Word) -> Word {
        let mut w = self.normalize(w);
        loop {
            if w.is_cyclically_reduced() {
                return w;
            }
            // First and last letters share a factor: rotate the last letter
            // to the front and renormalize (a conjugation); the length
            // strictly drops because the two letters merge.
            let old_len = w.len();
            let last = w.0.pop().unwrap();
            let mut letters = vec![last];
            letters.extend(w.0);
            let merged = self.normalize(&Word(letters));
            assert!(merged.len() < old_len);
            w = merged;
        }
    }

    /// First `n` elements in word-length-then-lexicographic order. Requires
    /// all direct factors to be finite tables.
    pub fn elements(&self, n: usize) -> Result<Vec<Word>, GroupError> {
        let mut alphabet: Vec<Vec<Letter>> = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            match f {
                FactorGroup::Table(t) => {
                    alphabet.push((1..t.order() as u32).map(|e| Letter::idx(i, e)).collect())
                }
                FactorGroup::Product(_) => return Err(GroupError::NestedEnumeration),
            }
        }
        let mut out = vec![Word::identity()];
        let mut layer = vec![Word::identity()];
        while out.len() < n {
            let mut next = Vec::new();
            for w in &layer {
                let skip = w.0.last().map(|l| l.factor);
                for (i, letters) in alphabet.iter().enumerate() {
                    if Some(i) == skip {
                        continue;
                    }
                    for l in letters {
                        let mut v = w.0.clone();
                        v.push(l.clone());
                        next.push(Word(v));
                    }
                }
            }
            next.sort();
            if next.is_empty() {
                return Err(GroupError::NotEnoughElements { requested: n, order: out.len() });
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out.truncate(n);
        Ok(out)
    }

    /// Minimum over all factors of the smallest subgroup order above 2.
    pub fn q_star(&self) -> QStar {
        let mut best = QStar::Infinite;
        for f in &self.factors {
            if let QStar::Finite(q) = f.q_star() {
                best = match best {
                    QStar::Finite(b) => QStar::Finite(b.min(q)),
                    QStar::Infinite => QStar::Finite(q),
                };
            }
        }
        best
    }

    /// The universal upper bound `2 q*/(q* - 2)` for the coefficients
    /// computed by this crate (2 when `q*` is infinite).
    pub fn sigma_upper_bound(&self) -> Rational {
        self.q_star().ratio() * BigRational::from_integer(2.into())
    }

    /// Default degree bound `max(m, max finite factor order)`; inner free
    /// product factors contribute only through their own finite factors'
    /// count, which is already reflected in callers that build them.
    pub fn default_degree_bound(&self) -> usize {
        let mut d = self.factors.len();
        for f in &self.factors {
            if let Some(o) = f.order() {
                d = d.max(o);
            }
        }
        d
    }
}

impl<'de> Deserialize<'de> for FreeProduct {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            factors: Vec<FactorGroup>,
        }
        let raw = Raw::deserialize(de)?;
        FreeProduct::new(raw.factors).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> GroupTable {
        GroupTable::cyclic(n)
    }

    #[test]
    fn accepts_standard_tables() {
        for t in [c(2), c(3), c(4), GroupTable::klein_four(), GroupTable::symmetric3()] {
            assert!(GroupTable::new(t.mul.clone()).is_ok());
        }
    }

    #[test]
    fn rejects_non_associative_magma() {
        // A latin square with identity that is not associative.
        let mul = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        match GroupTable::new(mul) {
            Err(GroupError::NotAssociative { a, b, c }) => {
                assert!(a < 5 && b < 5 && c < 5);
            }
            other => panic!("expected NotAssociative, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_identity_and_range() {
        assert!(matches!(
            GroupTable::new(vec![vec![1, 0], vec![0, 1]]),
            Err(GroupError::BadIdentity { .. })
        ));
        assert!(matches!(
            GroupTable::new(vec![vec![0, 1], vec![1, 7]]),
            Err(GroupError::EntryOutOfRange { .. })
        ));
    }

    /// Brute-force the set of subgroup orders of a table group by closing
    /// every subset seed under multiplication and inverse.
    fn subgroup_orders(t: &GroupTable) -> Vec<u64> {
        let n = t.order();
        let mut orders = std::collections::BTreeSet::new();
        for seed in 0..(1u32 << n) {
            let mut set: Vec<u32> = (0..n as u32).filter(|i| seed >> i & 1 == 1).collect();
            if !set.contains(&0) {
                set.push(0);
            }
            loop {
                let mut grew = false;
                let cur = set.clone();
                for &a in &cur {
                    for &b in &cur {
                        let p = t.mul_idx(a, b);
                        if !set.contains(&p) {
                            set.push(p);
                            grew = true;
                        }
                    }
                    let i = t.inv_idx(a);
                    if !set.contains(&i) {
                        set.push(i);
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            orders.insert(set.len() as u64);
        }
        orders.into_iter().collect()
    }

    /// q* computed from actual subgroup orders, as an oracle for the
    /// number-theoretic shortcut.
    fn q_star_oracle(tables: &[GroupTable]) -> QStar {
        let mut best = QStar::Infinite;
        for t in tables {
            for o in subgroup_orders(t) {
                if o > 2 {
                    best = match best {
                        QStar::Finite(b) => QStar::Finite(b.min(o)),
                        QStar::Infinite => QStar::Finite(o),
                    };
                }
            }
        }
        best
    }

    #[test]
    fn q_star_matches_subgroup_enumeration() {
        let cases: Vec<Vec<GroupTable>> = vec![
            vec![c(3), c(3)],
            vec![c(2), c(3)],
            vec![c(2), c(4)],
            vec![c(2), c(2)],
            vec![c(2), c(13)],
            vec![GroupTable::klein_four(), c(2)],
            vec![GroupTable::symmetric3(), c(2)],
            vec![c(5), c(6)],
        ];
        for tables in cases {
            let expect = q_star_oracle(&tables);
            let spec = FreeProduct::of_tables(tables).unwrap();
            assert_eq!(spec.q_star(), expect);
        }
    }

    #[test]
    fn q_star_values() {
        let spec33 = FreeProduct::of_tables(vec![c(3), c(3)]).unwrap();
        assert_eq!(spec33.q_star(), QStar::Finite(3));
        let spec24 = FreeProduct::of_tables(vec![c(2), c(4)]).unwrap();
        assert_eq!(spec24.q_star(), QStar::Finite(4));
        let spec23 = FreeProduct::of_tables(vec![c(2), c(3)]).unwrap();
        assert_eq!(spec23.q_star(), QStar::Finite(3));
        let spec22 = FreeProduct::of_tables(vec![c(2), c(2)]).unwrap();
        assert_eq!(spec22.q_star(), QStar::Infinite);
        assert_eq!(spec22.q_star().ratio(), BigRational::from_integer(1.into()));
        assert_eq!(
            spec33.sigma_upper_bound(),
            BigRational::from_integer(6.into())
        );
        assert_eq!(
            spec24.sigma_upper_bound(),
            BigRational::from_integer(4.into())
        );
    }

    #[test]
    fn normalize_merges_and_cancels() {
        let spec = FreeProduct::of_tables(vec![c(3), c(3)]).unwrap();
        // a * a = a^2 within one factor.
        let w = Word(vec![Letter::idx(0, 1), Letter::idx(0, 1)]);
        assert_eq!(spec.normalize(&w), Word(vec![Letter::idx(0, 2)]));
        // a b b^2 a^2 collapses to the identity.
        let w = Word(vec![
            Letter::idx(0, 1),
            Letter::idx(1, 1),
            Letter::idx(1, 2),
            Letter::idx(0, 2),
        ]);
        assert!(spec.is_identity(&w));
        // Identity letters are dropped.
        let w = Word(vec![Letter::idx(0, 0), Letter::idx(1, 1), Letter::idx(0, 0)]);
        assert_eq!(spec.normalize(&w).len(), 1);
    }

    #[test]
    fn word_algebra_roundtrips() {
        let spec = FreeProduct::of_tables(vec![c(2), c(3)]).unwrap();
        let w = spec.normalize(&Word(vec![
            Letter::idx(0, 1),
            Letter::idx(1, 2),
            Letter::idx(0, 1),
            Letter::idx(1, 1),
        ]));
        assert!(spec.is_identity(&spec.mul(&w, &spec.inv(&w))));
        assert!(spec.is_identity(&spec.mul(&spec.inv(&w), &w)));
        // Cyclic reduction of a conjugate is a rotation of the original.
        let cyc = spec.cyclic_reduction(&spec.conjugate(&w, &Word(vec![Letter::idx(1, 1)])));
        assert!(cyc.is_cyclically_reduced());
        assert_eq!(cyc.len(), w.len());
        let rotations = (0..w.len()).map(|r| {
            let mut l = w.0[r..].to_vec();
            l.extend_from_slice(&w.0[..r]);
            Word(l)
        });
        assert!(rotations.into_iter().any(|r| r == cyc));
    }

    #[test]
    fn product_elements_ordered_by_length_then_lex() {
        let inner = FreeProduct::of_tables(vec![c(2), c(2)]).unwrap();
        let els = inner.elements(7).unwrap();
        assert_eq!(els[0], Word::identity());
        assert_eq!(els[1], Word(vec![Letter::idx(0, 1)]));
        assert_eq!(els[2], Word(vec![Letter::idx(1, 1)]));
        assert_eq!(els[3], Word(vec![Letter::idx(0, 1), Letter::idx(1, 1)]));
        assert_eq!(els[4], Word(vec![Letter::idx(1, 1), Letter::idx(0, 1)]));
        assert_eq!(els[5].len(), 3);
        assert_eq!(els.len(), 7);
        // All distinct and all normalized.
        let set: std::collections::BTreeSet<_> = els.iter().cloned().collect();
        assert_eq!(set.len(), els.len());
        for w in &els {
            assert_eq!(inner.normalize(w), *w);
        }
    }

    #[test]
    fn finite_group_runs_out_of_elements() {
        let spec = FactorGroup::Table(c(3));
        assert!(spec.elements(3).is_ok());
        assert!(matches!(
            spec.elements(4),
            Err(GroupError::NotEnoughElements { .. })
        ));
    }

    #[test]
    fn json_roundtrip() {
        let spec = FreeProduct::of_tables(vec![c(2), c(3)]).unwrap();
        let s = serde_json::to_string(&spec).unwrap();
        let back: FreeProduct = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        let w = Word(vec![Letter::idx(0, 1), Letter::idx(1, 2)]);
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, "[[1,1],[2,2]]");
        let back: Word = serde_json::from_str(&js).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn nested_product_spec() {
        let inner = FreeProduct::of_tables(vec![c(2), c(2)]).unwrap();
        let spec = FreeProduct::new(vec![
            FactorGroup::Table(c(2)),
            FactorGroup::Product(inner),
        ])
        .unwrap();
        assert_eq!(spec.q_star(), QStar::Infinite);
        let g = spec.factor(1);
        let a = g.elements(4).unwrap();
        let p = g.mul(&a[1], &a[2]);
        assert_eq!(p, a[3]);
        assert!(g.is_identity(&g.mul(&p, &g.inv(&p))));
    }
}
