//! Free-group words over generators `g1..gk` and their conjugacy classes.
//!
//! Words are stored run-length encoded as `(generator, exponent)` letters.
//! Cyclic comparisons work on the unit-letter expansion, where each letter
//! `g_i^e` becomes `|e|` copies of `g_i` or `g_i^-1`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u32,
    pub exponent: i32,
}

impl Letter {
    pub fn new(generator: u32, exponent: i32) -> Self {
        debug_assert!(generator >= 1, "generators are 1-based");
        Letter {
            generator,
            exponent,
        }
    }
}

/// A unit letter of the expansion. Ordered by generator, then `+1 < -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitLetter {
    pub generator: u32,
    pub inverse: bool,
}

impl UnitLetter {
    fn inv(self) -> Self {
        UnitLetter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A freely reduced word. The empty word is the identity `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Freely reduces a raw letter sequence.
pub fn reduce<I>(raw: I) -> Word
where
    I: IntoIterator<Item = Letter>,
{
    let mut out: Vec<Letter> = Vec::new();
    for letter in raw {
        if letter.exponent == 0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.generator == letter.generator => {
                last.exponent += letter.exponent;
                if last.exponent == 0 {
                    out.pop();
                }
            }
            _ => out.push(letter),
        }
    }
    Word { letters: out }
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(index: u32) -> Self {
        Word::power(index, 1)
    }

    pub fn power(index: u32, exponent: i32) -> Self {
        reduce([Letter::new(index, exponent)])
    }

    pub fn from_pairs(pairs: &[(u32, i32)]) -> Self {
        reduce(pairs.iter().map(|&(g, e)| Letter::new(g, e)))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of unit letters.
    pub fn len(&self) -> usize {
        self.letters
            .iter()
            .map(|l| l.exponent.unsigned_abs() as usize)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn max_generator(&self) -> u32 {
        self.letters.iter().map(|l| l.generator).max().unwrap_or(0)
    }

    /// Sum of exponents of `generator`.
    pub fn exponent_sum(&self, generator: u32) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == generator)
            .map(|l| l.exponent as i64)
            .sum()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn invert(&self) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter::new(l.generator, -l.exponent))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Word {
        reduce(std::iter::repeat_n(self.letters.iter().copied(), k as usize).flatten())
    }

    pub fn expand(&self) -> Vec<UnitLetter> {
        let mut out = Vec::with_capacity(self.len());
        for l in &self.letters {
            let unit = UnitLetter {
                generator: l.generator,
                inverse: l.exponent < 0,
            };
            out.extend(std::iter::repeat_n(
                unit,
                l.exponent.unsigned_abs() as usize,
            ));
        }
        out
    }

    fn from_units(units: &[UnitLetter]) -> Word {
        reduce(
            units
                .iter()
                .map(|u| Letter::new(u.generator, if u.inverse { -1 } else { 1 })),
        )
    }
}

pub fn multiply(a: &Word, b: &Word) -> Word {
    a.multiply(b)
}

pub fn invert(w: &Word) -> Word {
    w.invert()
}

/// Reduced word from `0..=max_len` random unit letters over `g1..g_generators`.
pub fn random_word<R: rand::Rng>(rng: &mut R, generators: u32, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    reduce((0..len).map(|_| {
        let g = rng.gen_range(1..=generators);
        Letter::new(g, if rng.gen_bool(0.5) { 1 } else { -1 })
    }))
}

/// Product of a sequence of words, left to right.
pub fn product<'a, I>(words: I) -> Word
where
    I: IntoIterator<Item = &'a Word>,
{
    reduce(words.into_iter().flat_map(|w| w.letters.iter().copied()))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if l.exponent == 1 {
                write!(f, "g{}", l.generator)?;
            } else {
                write!(f, "g{}^{}", l.generator, l.exponent)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let body = token
                .strip_prefix('g')
                .ok_or_else(|| Error::Parse(format!("word token `{token}` must start with `g`")))?;
            let (gen, exp) = match body.split_once('^') {
                Some((g, e)) => (g, Some(e)),
                None => (body, None),
            };
            let generator: u32 = gen
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in `{token}`")))?;
            if generator == 0 {
                return Err(Error::Parse(format!(
                    "generator index must be positive in `{token}`"
                )));
            }
            let exponent: i32 = match exp {
                Some(e) => e
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{token}`")))?,
                None => 1,
            };
            if exponent == 0 {
                return Err(Error::Parse(format!(
                    "exponent must be nonzero in `{token}`"
                )));
            }
            letters.push(Letter::new(generator, exponent));
        }
        Ok(reduce(letters))
    }
}

/// Canonical representative of a conjugacy class: cyclically reduced and
/// least among the rotations of its expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Necklace {
    rep: Word,
}

impl Necklace {
    pub fn identity() -> Self {
        Necklace {
            rep: Word::identity(),
        }
    }

    pub fn representative(&self) -> &Word {
        &self.rep
    }

    pub fn is_identity(&self) -> bool {
        self.rep.is_identity()
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_identity()
    }
}

// Shorter necklaces first, then by expansion order.
impl Ord for Necklace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.rep.expand().cmp(&other.rep.expand()))
    }
}

impl PartialOrd for Necklace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

impl FromStr for Necklace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(necklace_of(&s.parse()?))
    }
}

fn least_rotation(units: &[UnitLetter]) -> Vec<UnitLetter> {
    let len = units.len();
    (0..len)
        .map(|start| {
            units[start..]
                .iter()
                .chain(units[..start].iter())
                .copied()
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap_or_default()
}

/// Conjugacy-class canonical form.
pub fn necklace_of(w: &Word) -> Necklace {
    let units = w.expand();
    let (mut lo, mut hi) = (0usize, units.len());
    while hi - lo >= 2 && units[lo] == units[hi - 1].inv() {
        lo += 1;
        hi -= 1;
    }
    let rotated = least_rotation(&units[lo..hi]);
    Necklace {
        rep: Word::from_units(&rotated),
    }
}

/// Necklaces of all nonempty positive words in `g1..gk` of length at most
/// `max_len`.
pub fn enumerate_positive_necklaces(alphabet: u32, max_len: usize) -> BTreeSet<Necklace> {
    let mut out = BTreeSet::new();
    if alphabet == 0 {
        return out;
    }
    for len in 1..=max_len {
        let total = (alphabet as u64).pow(len as u32);
        for code in 0..total {
            let mut c = code;
            let letters = (0..len).map(|_| {
                let g = (c % alphabet as u64) as u32 + 1;
                c /= alphabet as u64;
                Letter::new(g, 1)
            });
            out.insert(necklace_of(&reduce(letters.collect::<Vec<_>>())));
        }
    }
    out
}
