//! Permutations of `{1..m}`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest degree `enumerate` will produce.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // images[j - 1] = σ(j)
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation {
            images: (1..=m).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i == 0 || i > m || seen[i - 1] {
                return Err(Error::Invalid(format!(
                    "{images:?} is not a permutation of 1..={m}"
                )));
            }
            seen[i - 1] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation of `{1..m}` from disjoint cycles (1-based).
    pub fn from_cycles(m: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (1..=m).collect();
        for cycle in cycles {
            for (k, &i) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                if i == 0 || i > m {
                    return Err(Error::IndexOutOfRange { index: i, max: m });
                }
                images[i - 1] = next;
            }
        }
        Self::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// σ(j), 1-based.
    pub fn apply(&self, j: usize) -> usize {
        self.images[j - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `(self ∘ other)(j) = self(other(j))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other.images.iter().map(|&j| self.apply(j)).collect(),
        }
    }

    pub fn sign(&self) -> i32 {
        let m = self.degree();
        if (m - self.cycle_count()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles_from(1).len()
    }

    /// Disjoint cycles in orbit order. The first cycle starts at `start`;
    /// the rest start at their smallest element, in increasing order.
    pub fn cycles_from(&self, start: usize) -> Vec<Vec<usize>> {
        let m = self.degree();
        if m == 0 {
            return Vec::new();
        }
        let mut visited = vec![false; m];
        let mut out = Vec::new();
        let starts = std::iter::once(start).chain(1..=m);
        for s in starts {
            if visited[s - 1] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = s;
            while !visited[i - 1] {
                visited[i - 1] = true;
                cycle.push(i);
                i = self.apply(i);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths, in the order of `cycles_from(1)`.
    pub fn cycle_type(&self) -> Vec<usize> {
        self.cycles_from(1).iter().map(Vec::len).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("()");
        }
        for c in self.cycles_from(1) {
            let parts: Vec<String> = c.iter().map(ToString::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// All `m!` permutations of `{1..m}` in lexicographic order of images.
pub fn enumerate(m: usize) -> Result<Vec<Permutation>> {
    if m > MAX_DEGREE {
        return Err(Error::SizeGuard {
            what: "permutation degree",
            got: m,
            limit: MAX_DEGREE,
        });
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=m).collect();
    loop {
        out.push(Permutation {
            images: current.clone(),
        });
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn sign(sigma: &Permutation) -> i32 {
    sigma.sign()
}

pub fn cycles_from(sigma: &Permutation, start: usize) -> Result<Vec<Vec<usize>>> {
    if start == 0 || start > sigma.degree() {
        return Err(Error::IndexOutOfRange {
            index: start,
            max: sigma.degree(),
        });
    }
    Ok(sigma.cycles_from(start))
}

pub fn cycle_count(sigma: &Permutation) -> usize {
    sigma.cycle_count()
}

pub fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate(1).unwrap(), vec![Permutation::identity(1)]);
        assert_eq!(enumerate(3).unwrap().len(), 6);
        let s4 = enumerate(4).unwrap();
        assert_eq!(s4.len(), 24);
        assert_eq!(s4.iter().collect::<BTreeSet<_>>().len(), 24);
        assert_eq!(enumerate(0).unwrap().len(), 1);
        assert!(matches!(enumerate(9), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(Permutation::identity(3).sign(), 1);
        assert_eq!(Permutation::from_cycles(2, &[&[1, 2]]).unwrap().sign(), -1);
        assert_eq!(
            Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap().sign(),
            1
        );
    }

    #[test]
    fn cycles_from_examples() {
        let id = Permutation::identity(3);
        assert_eq!(
            cycles_from(&id, 2).unwrap(),
            vec![vec![2], vec![1], vec![3]]
        );
        let c3 = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(cycles_from(&c3, 2).unwrap(), vec![vec![2, 3, 1]]);
        let t = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        assert_eq!(cycles_from(&t, 3).unwrap(), vec![vec![3], vec![1, 2]]);
        assert!(cycles_from(&t, 4).is_err());
    }

    #[test]
    fn cycle_count_examples() {
        assert_eq!(Permutation::identity(3).cycle_count(), 3);
        assert_eq!(
            Permutation::from_cycles(3, &[&[1, 2]])
                .unwrap()
                .cycle_count(),
            2
        );
        assert_eq!(
            Permutation::from_cycles(4, &[&[1, 2, 3, 4]])
                .unwrap()
                .cycle_count(),
            1
        );
    }

    #[test]
    fn sign_sums() {
        for n in 2..=6 {
            let total: i32 = enumerate(n).unwrap().iter().map(Permutation::sign).sum();
            assert_eq!(total, 0);
        }
        for n in 1..=5usize {
            let total: i64 = enumerate(n)
                .unwrap()
                .iter()
                .map(|s| s.sign() as i64 * (n as i64).pow(s.cycle_count() as u32))
                .sum();
            assert_eq!(total, factorial(n) as i64);
        }
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..=7).prop_flat_map(|m| {
            Just((1..=m).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_images(v).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn cycles_partition(sigma in perm_strategy(), start_seed in 0usize..100) {
            let m = sigma.degree();
            let start = start_seed % m + 1;
            let cycles = sigma.cycles_from(start);
            prop_assert_eq!(cycles[0][0], start);
            let mut all: Vec<usize> = cycles.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (1..=m).collect::<Vec<_>>());
            for c in &cycles {
                for k in 0..c.len() {
                    prop_assert_eq!(sigma.apply(c[k]), c[(k + 1) % c.len()]);
                }
            }
        }

        #[test]
        fn sign_is_multiplicative(
            (a, b) in (1usize..=6).prop_flat_map(|m| {
                let p = Just((1..=m).collect::<Vec<_>>()).prop_shuffle();
                (p.clone(), p)
            })
        ) {
            let a = Permutation::from_images(a).unwrap();
            let b = Permutation::from_images(b).unwrap();
            prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
        }
    }
}
