//! Exact square matrices and sampled SL(n) representations of free groups.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm;
use crate::scalar::{Field, Scalar};
use crate::word::Word;

/// Shear entries are `num/den` with `1 <= |num|, den <= SHEAR_BOUND`.
pub const SHEAR_BOUND: i64 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    n: usize,
    field: Field,
    entries: Vec<Scalar>,
}

impl ExactMatrix {
    pub fn zero(n: usize, field: Field) -> Self {
        ExactMatrix {
            n,
            field,
            entries: vec![field.zero(); n * n],
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut m = ExactMatrix::zero(n, field);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    pub fn scalar(n: usize, c: &Scalar) -> Self {
        let mut m = ExactMatrix::zero(n, c.field());
        for i in 0..n {
            m.entries[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("matrix must have at least one row".into()));
        }
        let field = rows[0]
            .first()
            .map(Scalar::field)
            .ok_or_else(|| Error::Invalid("empty matrix row".into()))?;
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for x in row {
                if x.field() != field {
                    return Err(Error::FieldMismatch {
                        left: field,
                        right: x.field(),
                    });
                }
                entries.push(x);
            }
        }
        Ok(ExactMatrix { n, field, entries })
    }

    pub fn from_i64_rows(field: Field, rows: &[&[i64]]) -> Result<Self> {
        ExactMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| field.from_i64(x)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// 0-based entry access.
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        self.entries
            .chunks(self.n)
            .map(<[Scalar]>::to_vec)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    fn compatible(&self, other: &ExactMatrix) -> Result<()> {
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

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        self.compatible(other)?;
        let n = self.n;
        let mut out = ExactMatrix::zero(n, self.field);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let idx = i * n + j;
                    out.entries[idx] = &out.entries[idx] + &(a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        self.compatible(other)?;
        Ok(ExactMatrix {
            n: self.n,
            field: self.field,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        self.add(&other.scale(&self.field.from_i64(-1))?)
    }

    pub fn scale(&self, c: &Scalar) -> Result<ExactMatrix> {
        if c.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: c.field(),
            });
        }
        Ok(ExactMatrix {
            n: self.n,
            field: self.field,
            entries: self.entries.iter().map(|a| a * c).collect(),
        })
    }

    pub fn trace(&self) -> Scalar {
        (0..self.n).fold(self.field.zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn pow(&self, e: u32) -> ExactMatrix {
        let mut acc = ExactMatrix::identity(self.n, self.field);
        for _ in 0..e {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// Laplace expansion along the first row.
    pub fn det_cofactor(&self) -> Scalar {
        fn minor_det(m: &ExactMatrix, rows: &[usize], cols: &[usize]) -> Scalar {
            if rows.is_empty() {
                return m.field.one();
            }
            let r = rows[0];
            let mut acc = m.field.zero();
            for (k, &c) in cols.iter().enumerate() {
                let a = m.get(r, c);
                if a.is_zero() {
                    continue;
                }
                let rest_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = a * &minor_det(m, &rows[1..], &rest_cols);
                acc = if k % 2 == 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            acc
        }
        let idx: Vec<usize> = (0..self.n).collect();
        minor_det(self, &idx, &idx)
    }

    /// Leibniz formula over all permutations.
    pub fn det_leibniz(&self) -> Result<Scalar> {
        let mut acc = self.field.zero();
        for sigma in perm::enumerate(self.n)? {
            let mut term = self.field.from_i64(sigma.sign() as i64);
            for i in 0..self.n {
                term = &term * self.get(i, sigma.apply(i + 1) - 1);
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<ExactMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = ExactMatrix::identity(n, self.field);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(Error::DivisionByZero)?;
            if pivot != col {
                for j in 0..n {
                    a.entries.swap(pivot * n + j, col * n + j);
                    inv.entries.swap(pivot * n + j, col * n + j);
                }
            }
            let p_inv = a.get(col, col).inv()?;
            for j in 0..n {
                a.entries[col * n + j] = &a.entries[col * n + j] * &p_inv;
                inv.entries[col * n + j] = &inv.entries[col * n + j] * &p_inv;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    a.entries[r * n + j] =
                        &a.entries[r * n + j] - &(&factor * &a.entries[col * n + j]);
                    inv.entries[r * n + j] =
                        &inv.entries[r * n + j] - &(&factor * &inv.entries[col * n + j]);
                }
            }
        }
        Ok(inv)
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

fn random_shear_entry<R: Rng>(rng: &mut R, field: Field) -> Scalar {
    match field {
        Field::Rational => {
            let mut num = rng.gen_range(1..=SHEAR_BOUND);
            if rng.gen_bool(0.5) {
                num = -num;
            }
            let den = rng.gen_range(1..=SHEAR_BOUND);
            field.from_ratio(num, den).expect("nonzero denominator")
        }
        Field::Prime(p) => Scalar::Mod {
            value: rng.gen_range(1..p),
            modulus: p,
        },
    }
}

/// Product of `n²` random elementary shears `I + c·E_ij` (`i ≠ j`).
pub fn random_sl_matrix_with<R: Rng>(rng: &mut R, n: usize, field: Field) -> ExactMatrix {
    let mut m = ExactMatrix::identity(n, field);
    if n < 2 {
        return m;
    }
    for _ in 0..n * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = random_shear_entry(rng, field);
        // left-multiplying by I + c·E_ij adds c·(row j) to row i
        for col in 0..n {
            let add = &c * m.get(j, col);
            let v = m.get(i, col) + &add;
            m.set(i, col, v);
        }
    }
    m
}

pub fn random_sl_matrix(n: usize, seed: u64, field: Field) -> ExactMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_sl_matrix_with(&mut rng, n, field)
}

/// Images of generators `g1..gk` in SL(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    n: usize,
    field: Field,
    images: BTreeMap<u32, ExactMatrix>,
    inverses: BTreeMap<u32, ExactMatrix>,
}

impl Representation {
    /// Requires every image to have determinant exactly 1.
    pub fn new(n: usize, images: BTreeMap<u32, ExactMatrix>) -> Result<Self> {
        for (g, m) in &images {
            if !m.det_cofactor().is_one() {
                return Err(Error::Invalid(format!(
                    "image of g{g} does not have determinant 1"
                )));
            }
        }
        Self::with_any_determinant(n, images)
    }

    /// Skips the determinant check; used for negative controls.
    pub fn with_any_determinant(n: usize, images: BTreeMap<u32, ExactMatrix>) -> Result<Self> {
        let field = images
            .values()
            .next()
            .map(ExactMatrix::field)
            .unwrap_or(Field::Rational);
        let mut inverses = BTreeMap::new();
        for (g, m) in &images {
            if *g == 0 {
                return Err(Error::Invalid("generator indices are 1-based".into()));
            }
            if m.dim() != n {
                return Err(Error::AmbientMismatch {
                    left: n,
                    right: m.dim(),
                });
            }
            if m.field() != field {
                return Err(Error::FieldMismatch {
                    left: field,
                    right: m.field(),
                });
            }
            inverses.insert(*g, m.inverse()?);
        }
        Ok(Representation {
            n,
            field,
            images,
            inverses,
        })
    }

    pub fn identity(n: usize, generators: u32, field: Field) -> Self {
        let images = (1..=generators)
            .map(|g| (g, ExactMatrix::identity(n, field)))
            .collect();
        Representation::new(n, images).expect("identity images")
    }

    pub fn random_with<R: Rng>(rng: &mut R, n: usize, generators: u32, field: Field) -> Self {
        let images = (1..=generators)
            .map(|g| (g, random_sl_matrix_with(rng, n, field)))
            .collect();
        Representation::with_any_determinant(n, images).expect("sampled images are invertible")
    }

    pub fn random(n: usize, generators: u32, seed: u64, field: Field) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Representation::random_with(&mut rng, n, generators, field)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn images(&self) -> &BTreeMap<u32, ExactMatrix> {
        &self.images
    }

    pub fn rho(&self, w: &Word) -> Result<ExactMatrix> {
        let mut acc = ExactMatrix::identity(self.n, self.field);
        for l in w.letters() {
            let base = if l.exponent > 0 {
                self.images.get(&l.generator)
            } else {
                self.inverses.get(&l.generator)
            }
            .ok_or(Error::UnknownGenerator(l.generator))?;
            for _ in 0..l.exponent.unsigned_abs() {
                acc = acc.mul(base)?;
            }
        }
        Ok(acc)
    }
}

pub fn rho(r: &Representation, w: &Word) -> Result<ExactMatrix> {
    r.rho(w)
}
