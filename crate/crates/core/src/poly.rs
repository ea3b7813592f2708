//! Polynomials in trace variables `χ_w` (one per necklace) and the
//! word-valued extension used for matrix expressions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};
use crate::word::{necklace_of, Necklace, Word};

/// Product of trace variables with positive multiplicities. Never contains
/// the identity necklace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TraceMonomial {
    factors: BTreeMap<Necklace, u32>,
}

impl TraceMonomial {
    pub fn one() -> Self {
        TraceMonomial::default()
    }

    /// `None` for the identity necklace, whose trace is a constant.
    pub fn var(necklace: Necklace) -> Option<Self> {
        if necklace.is_identity() {
            return None;
        }
        let mut factors = BTreeMap::new();
        factors.insert(necklace, 1);
        Some(TraceMonomial { factors })
    }

    pub fn from_factors<I: IntoIterator<Item = (Necklace, u32)>>(factors: I) -> Self {
        let mut m = TraceMonomial::one();
        for (k, e) in factors {
            if e > 0 && !k.is_identity() {
                *m.factors.entry(k).or_insert(0) += e;
            }
        }
        m
    }

    pub fn factors(&self) -> &BTreeMap<Necklace, u32> {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.values().sum()
    }

    pub fn mul(&self, other: &TraceMonomial) -> TraceMonomial {
        let mut out = self.clone();
        for (k, e) in &other.factors {
            *out.factors.entry(k.clone()).or_insert(0) += e;
        }
        out
    }
}

impl fmt::Display for TraceMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (k, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "tr({k})")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TracePolynomial {
    n: usize,
    field: Field,
    terms: BTreeMap<TraceMonomial, Scalar>,
}

impl TracePolynomial {
    pub fn zero(n: usize, field: Field) -> Self {
        TracePolynomial {
            n,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut p = TracePolynomial::zero(n, c.field());
        p.add_term(TraceMonomial::one(), c);
        p
    }

    pub fn from_i64(n: usize, field: Field, c: i64) -> Self {
        TracePolynomial::constant(n, field.from_i64(c))
    }

    pub fn one(n: usize, field: Field) -> Self {
        TracePolynomial::from_i64(n, field, 1)
    }

    /// `χ` of a necklace; the identity class is the constant `n`.
    pub fn var(n: usize, field: Field, necklace: Necklace) -> Self {
        match TraceMonomial::var(necklace) {
            Some(m) => TracePolynomial::monomial(n, field, m, field.one()),
            None => TracePolynomial::from_i64(n, field, n as i64),
        }
    }

    /// `χ_w`, canonicalized to the necklace of `w`.
    pub fn chi(n: usize, field: Field, w: &Word) -> Self {
        TracePolynomial::var(n, field, necklace_of(w))
    }

    pub fn monomial(n: usize, field: Field, m: TraceMonomial, c: Scalar) -> Self {
        let mut p = TracePolynomial::zero(n, field);
        p.add_term(m, c);
        p
    }

    /// Product of `χ` over the given necklaces, with identity classes folded to `n`.
    pub fn product_of_loops<'a, I>(n: usize, field: Field, loops: I) -> Self
    where
        I: IntoIterator<Item = &'a Necklace>,
    {
        let mut coeff = field.one();
        let mut factors = Vec::new();
        for l in loops {
            if l.is_identity() {
                coeff = coeff.scale_i64(n as i64);
            } else {
                factors.push((l.clone(), 1));
            }
        }
        TracePolynomial::monomial(n, field, TraceMonomial::from_factors(factors), coeff)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<TraceMonomial, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant coefficient if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(self.field.zero()),
            1 => self.terms.get(&TraceMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn necklaces(&self) -> impl Iterator<Item = &Necklace> {
        self.terms.keys().flat_map(|m| m.factors.keys())
    }

    fn add_term(&mut self, m: TraceMonomial, c: Scalar) {
        debug_assert_eq!(c.field(), self.field);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn compatible(&self, other: &TracePolynomial) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        if self.n != other.n {
            return Err(Error::AmbientMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &TracePolynomial) -> Result<TracePolynomial> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &TracePolynomial) -> Result<TracePolynomial> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &TracePolynomial) -> Result<TracePolynomial> {
        self.compatible(other)?;
        let mut out = TracePolynomial::zero(self.n, self.field);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Result<TracePolynomial> {
        if c.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: c.field(),
            });
        }
        let mut out = TracePolynomial::zero(self.n, self.field);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        Ok(out)
    }

    pub fn scale_i64(&self, k: i64) -> TracePolynomial {
        self.scale(&self.field.from_i64(k)).expect("same field")
    }

    fn neg_ref(&self) -> TracePolynomial {
        TracePolynomial {
            n: self.n,
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> TracePolynomial {
        let mut acc = TracePolynomial::one(self.n, self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

pub fn poly_add(a: &TracePolynomial, b: &TracePolynomial) -> Result<TracePolynomial> {
    a.checked_add(b)
}

pub fn poly_mul(a: &TracePolynomial, b: &TracePolynomial) -> Result<TracePolynomial> {
    a.checked_mul(b)
}

pub fn poly_scale(a: &TracePolynomial, c: &Scalar) -> Result<TracePolynomial> {
    a.scale(c)
}

impl Add for &TracePolynomial {
    type Output = TracePolynomial;
    fn add(self, rhs: &TracePolynomial) -> TracePolynomial {
        self.checked_add(rhs).expect("incompatible polynomials")
    }
}

impl Sub for &TracePolynomial {
    type Output = TracePolynomial;
    fn sub(self, rhs: &TracePolynomial) -> TracePolynomial {
        self.checked_sub(rhs).expect("incompatible polynomials")
    }
}

impl Mul for &TracePolynomial {
    type Output = TracePolynomial;
    fn mul(self, rhs: &TracePolynomial) -> TracePolynomial {
        self.checked_mul(rhs).expect("incompatible polynomials")
    }
}

impl Neg for &TracePolynomial {
    type Output = TracePolynomial;
    fn neg(self) -> TracePolynomial {
        self.neg_ref()
    }
}

impl fmt::Display for TracePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                f.write_str(&mag)?;
            } else if mag == "1" {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Sum of `coefficient · word` terms with trace-polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixExpression {
    n: usize,
    field: Field,
    terms: BTreeMap<Word, TracePolynomial>,
}

impl MatrixExpression {
    pub fn zero(n: usize, field: Field) -> Self {
        MatrixExpression {
            n,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(coeff: TracePolynomial, word: Word) -> Self {
        let mut m = MatrixExpression::zero(coeff.ambient(), coeff.field());
        m.add_term(word, coeff);
        m
    }

    /// The bare word with coefficient 1.
    pub fn word(n: usize, field: Field, word: Word) -> Self {
        MatrixExpression::term(TracePolynomial::one(n, field), word)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<Word, TracePolynomial> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, word: Word, coeff: TracePolynomial) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                let sum = &*existing + &coeff;
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    fn compatible(&self, other: &MatrixExpression) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        if self.n != other.n {
            return Err(Error::AmbientMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &MatrixExpression) -> Result<MatrixExpression> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MatrixExpression) -> Result<MatrixExpression> {
        self.checked_add(&other.scale_poly(&TracePolynomial::from_i64(other.n, other.field, -1))?)
    }

    /// Word-concatenating product; coefficients commute with words.
    pub fn checked_mul(&self, other: &MatrixExpression) -> Result<MatrixExpression> {
        self.compatible(other)?;
        let mut out = MatrixExpression::zero(self.n, self.field);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.multiply(w2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale_poly(&self, c: &TracePolynomial) -> Result<MatrixExpression> {
        let mut out = MatrixExpression::zero(self.n, self.field);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.checked_mul(c)?);
        }
        Ok(out)
    }

    /// The trace map: `(c, w) ↦ c·χ_w`, with `χ_e = n`.
    pub fn trace(&self) -> TracePolynomial {
        let mut out = TracePolynomial::zero(self.n, self.field);
        for (w, c) in &self.terms {
            out = &out + &(c * &TracePolynomial::chi(self.n, self.field, w));
        }
        out
    }
}

pub fn mexp_trace(m: &MatrixExpression) -> TracePolynomial {
    m.trace()
}

pub fn mexp_mul(a: &MatrixExpression, b: &MatrixExpression) -> Result<MatrixExpression> {
    a.checked_mul(b)
}

impl fmt::Display for MatrixExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let word = if w.is_identity() {
                "e".to_string()
            } else {
                w.to_string()
            };
            write!(f, "({c})·[{word}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const Q: Field = Field::Rational;

    fn chi(n: usize, s: &str) -> TracePolynomial {
        TracePolynomial::chi(n, Q, &s.parse().unwrap())
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn ring_examples() {
        let a = chi(3, "g1");
        assert!((&a + &a.scale_i64(-1)).is_zero());
        let b = chi(3, "g2");
        let ab = &a * &b;
        assert_eq!(ab.len(), 1);
        let (m, c) = ab.terms().iter().next().unwrap();
        assert!(c.is_one());
        assert_eq!(m.factors().len(), 2);
        let two = TracePolynomial::from_i64(3, Q, 2);
        let lhs = &(&a + &two) * &(&a - &two);
        let rhs = &a.pow(2) - &TracePolynomial::from_i64(3, Q, 4);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn chi_is_cyclic_and_folds_identity() {
        assert_eq!(chi(3, "g1 g2"), chi(3, "g2 g1"));
        assert_eq!(chi(3, ""), TracePolynomial::from_i64(3, Q, 3));
        assert_ne!(chi(3, "g1"), chi(3, "g1^-1"));
        assert_ne!(chi(2, "g1"), chi(2, "g1^-1"));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = chi(2, "g1");
        let b = chi(3, "g1");
        assert!(matches!(
            a.checked_add(&b),
            Err(Error::AmbientMismatch { .. })
        ));
        let c = TracePolynomial::chi(2, Field::Prime(7), &w("g1"));
        assert!(matches!(
            a.checked_mul(&c),
            Err(Error::FieldMismatch { .. })
        ));
    }

    #[test]
    fn trace_examples() {
        let m = MatrixExpression::word(3, Q, w("g1 g2"));
        assert_eq!(m.trace(), chi(3, "g1 g2"));
        let id = MatrixExpression::word(3, Q, Word::identity());
        assert_eq!(id.trace(), TracePolynomial::from_i64(3, Q, 3));
        let m = MatrixExpression::term(chi(3, "g3"), w("g2 g1"));
        assert_eq!(m.trace(), &chi(3, "g3") * &chi(3, "g1 g2"));
    }

    #[test]
    fn mexp_mul_examples() {
        let g1 = MatrixExpression::word(3, Q, w("g1"));
        let g2 = MatrixExpression::word(3, Q, w("g2"));
        assert_eq!(
            mexp_mul(&g1, &g2).unwrap(),
            MatrixExpression::word(3, Q, w("g1 g2"))
        );
        let g1inv = MatrixExpression::word(3, Q, w("g1^-1"));
        assert_eq!(
            mexp_mul(&g1, &g1inv).unwrap(),
            MatrixExpression::word(3, Q, Word::identity())
        );
        let a = MatrixExpression::term(chi(3, "g3"), w("g1"));
        let b = MatrixExpression::term(chi(3, "g4"), w("g1"));
        assert_eq!(
            mexp_mul(&a, &b).unwrap(),
            MatrixExpression::term(&chi(3, "g3") * &chi(3, "g4"), w("g1^2"))
        );
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        prop::collection::vec((1u32..=3, prop_oneof![Just(-1i32), Just(1)]), 0..5)
            .prop_map(|v| Word::from_pairs(&v))
    }

    fn poly_strategy() -> impl Strategy<Value = TracePolynomial> {
        prop::collection::vec((word_strategy(), -3i64..=3), 0..4).prop_map(|terms| {
            terms
                .iter()
                .fold(TracePolynomial::zero(3, Q), |acc, (w, c)| {
                    &acc + &TracePolynomial::chi(3, Q, w).scale_i64(*c)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn trace_is_cyclic(u in word_strategy(), v in word_strategy(), cu in poly_strategy(), cv in poly_strategy()) {
            let a = MatrixExpression::term(cu, u);
            let b = MatrixExpression::term(cv, v);
            prop_assert_eq!(mexp_mul(&a, &b).unwrap().trace(), mexp_mul(&b, &a).unwrap().trace());
        }
    }
}
