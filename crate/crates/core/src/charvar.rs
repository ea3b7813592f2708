//! Expressing the 57 length-≤7 trace functions on `SL(3)`-representations
//! of the free group `⟨g1, g2⟩` as polynomials in nine of them.
//!
//! Expressions are found by exact linear solving over sampled points in
//! prime fields near `2^61`, validated on held-out points, lifted to ℚ by
//! Chinese remaindering and rational reconstruction, and re-checked on
//! fresh points in every witness field and over ℚ. The result is validated
//! evidence, not a proof that the nine functions generate.
//!
//! Only monomials in the target's `Z/3 × Z/3` grading class are used:
//! scaling `ρ(g1)` or `ρ(g2)` by a cube root of unity (the centre of
//! `SL(3)`) multiplies `χ_w` by `ω^{e1(w)}` resp. `ω^{e2(w)}`, so any
//! polynomial expression for `χ_w` can be projected onto that class.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Representation;
use crate::scalar::{crt, inv_mod, prev_prime, rational_reconstruct, Field, Scalar};
use crate::tensor::TraceCache;
use crate::word::{enumerate_positive_necklaces, necklace_of, Necklace, Word};

/// Number of generators the targets are expressed in.
pub const GENERATOR_COUNT: usize = 9;
/// Longest word among the targets.
pub const TARGET_MAX_LEN: usize = 7;
/// Default total-degree bound for `fit_all`.
pub const DEFAULT_DEGREE_BOUND: usize = 6;
/// Fresh points per witness field used to re-check a lifted expression.
pub const CROSS_CHECK_SAMPLES: usize = 50;
/// Points over ℚ used to spot-check a lifted expression.
pub const RATIONAL_SPOT_CHECKS: usize = 2;

/// Exponent vector of a monomial in `G1..G9`.
pub type Exponents = [u8; GENERATOR_COUNT];

/// The 57 necklaces of positive words of length ≤ 7 in `g1, g2`.
pub fn procesi_generators() -> Vec<Necklace> {
    enumerate_positive_necklaces(2, TARGET_MAX_LEN)
        .into_iter()
        .collect()
}

/// `g1, g2, g1², g2², g1g2, g1²g2, g1g2², g1²g2², g1²g2²g1g2`, in that order.
pub fn nine_generators() -> Vec<Necklace> {
    [
        "g1",
        "g2",
        "g1^2",
        "g2^2",
        "g1 g2",
        "g1^2 g2",
        "g1 g2^2",
        "g1^2 g2^2",
        "g1^2 g2^2 g1 g2",
    ]
    .iter()
    .map(|s| necklace_of(&s.parse::<Word>().expect("valid word")))
    .collect()
}

/// `(e1 mod 3, e2 mod 3)` for the exponent sums of `g1` and `g2`.
pub fn grading(w: &Necklace) -> (u8, u8) {
    let r = w.representative();
    (
        r.exponent_sum(1).rem_euclid(3) as u8,
        r.exponent_sum(2).rem_euclid(3) as u8,
    )
}

fn monomial_grading(m: &Exponents, gens: &[(u8, u8)]) -> (u8, u8) {
    let mut a = 0u32;
    let mut b = 0u32;
    for (e, g) in m.iter().zip(gens) {
        a += *e as u32 * g.0 as u32;
        b += *e as u32 * g.1 as u32;
    }
    ((a % 3) as u8, (b % 3) as u8)
}

/// `C(9 + d, d)`, the number of monomials of degree ≤ d in nine variables.
pub fn monomial_count(d: usize) -> u64 {
    let k = GENERATOR_COUNT as u64;
    (1..=d as u64).fold(1u64, |acc, i| acc * (k + i) / i)
}

/// All monomials of total degree ≤ d, by degree, then with higher powers
/// of earlier generators first.
pub fn monomials(d: usize) -> Vec<Exponents> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut current = [0u8; GENERATOR_COUNT];
        fill(&mut current, 0, deg, &mut out);
    }
    out
}

fn fill(current: &mut Exponents, pos: usize, remaining: usize, out: &mut Vec<Exponents>) {
    if pos == GENERATOR_COUNT - 1 {
        current[pos] = remaining as u8;
        out.push(*current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// Monomials of degree ≤ d in the grading class of `target`.
pub fn graded_basis(d: usize, target: &Necklace) -> Vec<Exponents> {
    let class = grading(target);
    let gens: Vec<(u8, u8)> = nine_generators().iter().map(grading).collect();
    monomials(d)
        .into_iter()
        .filter(|m| monomial_grading(m, &gens) == class)
        .collect()
}

fn degree(m: &Exponents) -> usize {
    m.iter().map(|e| *e as usize).sum()
}

/// Values at one sampled `SL(3)` representation of `⟨g1, g2⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePoint {
    /// Values of `G1..G9`.
    pub generators: Vec<Scalar>,
    /// Values of every target.
    pub values: BTreeMap<Necklace, Scalar>,
}

pub fn sample_point(seed: u64, field: Field) -> SamplePoint {
    sample_point_at(&Representation::random(3, 2, seed, field)).expect("two generators present")
}

pub fn sample_point_at(r: &Representation) -> Result<SamplePoint> {
    let mut cache = TraceCache::new(r);
    let generators = nine_generators()
        .iter()
        .map(|g| cache.trace(g))
        .collect::<Result<_>>()?;
    let values = procesi_generators()
        .into_iter()
        .map(|t| cache.trace(&t).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    Ok(SamplePoint { generators, values })
}

/// Polynomial in `G1..G9` with coefficients in one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    field: Field,
    terms: BTreeMap<Exponents, Scalar>,
}

impl Expression {
    pub fn new(field: Field, terms: BTreeMap<Exponents, Scalar>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Expression { field, terms }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Scalar> {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(degree).max().unwrap_or(0)
    }

    /// Value at the given generator values; rational coefficients are
    /// reduced into the values' field.
    pub fn eval(&self, generators: &[Scalar]) -> Result<Scalar> {
        let field = generators.first().map_or(self.field, Scalar::field);
        let mut total = field.zero();
        for (m, c) in &self.terms {
            let mut term = match c {
                Scalar::Rational(q) if field != Field::Rational => field.from_rational(q)?,
                _ => c.clone(),
            };
            for (g, e) in generators.iter().zip(m) {
                if *e > 0 {
                    term = term.checked_mul(&g.pow(*e as u32))?;
                }
            }
            total = total.checked_add(&term)?;
        }
        Ok(total)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut ordered: Vec<(&Exponents, &Scalar)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| degree(b.0).cmp(&degree(a.0)).then(b.0.cmp(a.0)));
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if i == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(k, e)| {
                    if *e == 1 {
                        format!("G{}", k + 1)
                    } else {
                        format!("G{}^{}", k + 1, e)
                    }
                })
                .collect();
            match (magnitude == "1", vars.is_empty()) {
                (_, true) => f.write_str(&magnitude)?,
                (true, false) => f.write_str(&vars.join("*"))?,
                (false, false) => write!(f, "{}*{}", magnitude, vars.join("*"))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitResult {
    pub target: Necklace,
    pub expression: Expression,
    pub degree_used: usize,
    pub sample_count: usize,
    pub validated: bool,
    pub field_witnesses: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitOutcome {
    Fit(FitResult),
    NoFitAtDegree { target: Necklace, degree: usize },
}

/// Held-out validation size for a system with `n` sample rows.
pub fn validation_size(n: usize) -> usize {
    (n / 2).max(50)
}

fn required_samples(basis: usize) -> usize {
    (2 * basis).max(2)
}

// ---- Montgomery arithmetic for the elimination kernel ----

#[derive(Debug, Clone, Copy)]
struct Mont {
    p: u64,
    neg_inv: u64,
    r2: u64,
}

impl Mont {
    fn new(p: u64) -> Self {
        debug_assert!(p % 2 == 1 && p < 1 << 63);
        let mut inv = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Mont {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn enter(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    fn leave(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    fn inv(&self, a: u64) -> u64 {
        self.enter(inv_mod(self.leave(a), self.p))
    }
}

/// Gauss–Jordan over the first `ncols` columns of `rows` (Montgomery
/// form). Returns the pivot columns in row order.
fn rref_mont(rows: &mut [Vec<u64>], ncols: usize, mont: &Mont) -> Vec<usize> {
    let mut pivots = Vec::new();
    let width = rows.first().map_or(0, Vec::len);
    for c in 0..ncols {
        let rank = pivots.len();
        let Some(found) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, found);
        let inv = mont.inv(rows[rank][c]);
        for v in rows[rank][c..width].iter_mut() {
            *v = mont.mul(*v, inv);
        }
        let (head, tail) = rows.split_at_mut(rank);
        let (pivot_row, tail) = tail.split_first_mut().expect("pivot row");
        for row in head.iter_mut().chain(tail.iter_mut()) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..width {
                row[j] = mont.sub(row[j], mont.mul(f, pivot_row[j]));
            }
        }
        pivots.push(c);
    }
    pivots
}

/// Gauss–Jordan over exact scalars; same contract as `rref_mont`.
fn rref_exact(rows: &mut [Vec<Scalar>], ncols: usize) -> Result<Vec<usize>> {
    let mut pivots = Vec::new();
    let width = rows.first().map_or(0, Vec::len);
    for c in 0..ncols {
        let rank = pivots.len();
        let Some(found) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, found);
        let inv = rows[rank][c].inv()?;
        for v in rows[rank][c..width].iter_mut() {
            *v = v.checked_mul(&inv)?;
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in c..width {
                row[j] = row[j].checked_sub(&f.checked_mul(&pivot_row[j])?)?;
            }
        }
        pivots.push(c);
    }
    Ok(pivots)
}

/// Solutions (free variables zero) of `rows[.., ..ncols]·x = rows[.., ncols + k]`
/// for every right-hand side `k`; `None` when inconsistent.
fn extract_solutions<T: Clone>(
    rows: &[Vec<T>],
    ncols: usize,
    pivots: &[usize],
    rhs_count: usize,
    is_zero: impl Fn(&T) -> bool,
    zero: T,
) -> Vec<Option<Vec<T>>> {
    (0..rhs_count)
        .map(|k| {
            let col = ncols + k;
            if rows[pivots.len()..].iter().any(|r| !is_zero(&r[col])) {
                return None;
            }
            let mut x = vec![zero.clone(); ncols];
            for (r, &c) in pivots.iter().enumerate() {
                x[c] = rows[r][col].clone();
            }
            Some(x)
        })
        .collect()
}

fn monomial_row(gens: &[Scalar], basis: &[Exponents], d: usize) -> Vec<Scalar> {
    let field = gens[0].field();
    let powers: Vec<Vec<Scalar>> = gens
        .iter()
        .map(|g| {
            let mut p = vec![field.one()];
            for k in 1..=d {
                p.push(&p[k - 1] * g);
            }
            p
        })
        .collect();
    basis
        .iter()
        .map(|m| {
            let mut v = field.one();
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    v = &v * &powers[i][*e as usize];
                }
            }
            v
        })
        .collect()
}

fn residue(s: &Scalar) -> u64 {
    match s {
        Scalar::Mod { value, .. } => *value,
        Scalar::Rational(_) => unreachable!("prime-field sample"),
    }
}

/// Draws `count` points and returns their generator values and target values.
fn draw_points(
    rng: &mut ChaCha8Rng,
    count: usize,
    field: Field,
    targets: &[Necklace],
) -> Result<Vec<(Vec<Scalar>, Vec<Scalar>)>> {
    let gens = nine_generators();
    (0..count)
        .map(|_| {
            let r = Representation::random_with(rng, 3, 2, field);
            let mut cache = TraceCache::new(&r);
            let g = gens
                .iter()
                .map(|n| cache.trace(n))
                .collect::<Result<Vec<_>>>()?;
            let t = targets
                .iter()
                .map(|n| cache.trace(n))
                .collect::<Result<Vec<_>>>()?;
            Ok((g, t))
        })
        .collect()
}

/// Fits every target (all in one grading class) over `field` at degree
/// `d` with `n_samples` rows, then checks each solution on held-out points.
/// Returns per target the coefficient vector over `basis`, or `None`.
fn solve_class(
    targets: &[Necklace],
    basis: &[Exponents],
    d: usize,
    n_samples: usize,
    field: Field,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Option<Vec<Scalar>>>> {
    let ncols = basis.len();
    let points = draw_points(rng, n_samples, field, targets)?;
    let solutions: Vec<Option<Vec<Scalar>>> = match field {
        Field::Prime(p) => {
            let mont = Mont::new(p);
            let mut rows: Vec<Vec<u64>> = points
                .iter()
                .map(|(g, t)| {
                    monomial_row(g, basis, d)
                        .iter()
                        .chain(t.iter())
                        .map(|s| mont.enter(residue(s)))
                        .collect()
                })
                .collect();
            let pivots = rref_mont(&mut rows, ncols, &mont);
            extract_solutions(&rows, ncols, &pivots, targets.len(), |v| *v == 0, 0)
                .into_iter()
                .map(|sol| {
                    sol.map(|x| {
                        x.into_iter()
                            .map(|v| Scalar::Mod {
                                value: mont.leave(v),
                                modulus: p,
                            })
                            .collect()
                    })
                })
                .collect()
        }
        Field::Rational => {
            let mut rows: Vec<Vec<Scalar>> = points
                .iter()
                .map(|(g, t)| {
                    let mut row = monomial_row(g, basis, d);
                    row.extend(t.iter().cloned());
                    row
                })
                .collect();
            let pivots = rref_exact(&mut rows, ncols)?;
            extract_solutions(
                &rows,
                ncols,
                &pivots,
                targets.len(),
                Scalar::is_zero,
                field.zero(),
            )
        }
    };

    let held_out = draw_points(rng, validation_size(n_samples), field, targets)?;
    let held_rows: Vec<Vec<Scalar>> = held_out
        .iter()
        .map(|(g, _)| monomial_row(g, basis, d))
        .collect();
    Ok(solutions
        .into_iter()
        .enumerate()
        .map(|(k, sol)| {
            let x = sol?;
            let ok = held_rows.iter().zip(&held_out).all(|(row, (_, t))| {
                let mut v = field.zero();
                for (a, b) in row.iter().zip(&x) {
                    if !b.is_zero() {
                        v = &v + &(a * b);
                    }
                }
                v == t[k]
            });
            ok.then_some(x)
        })
        .collect())
}

fn expression_from(basis: &[Exponents], coeffs: Vec<Scalar>, field: Field) -> Expression {
    Expression::new(field, basis.iter().copied().zip(coeffs).collect())
}

/// Fits `target` with monomials of degree ≤ `degree` in its grading class,
/// using `n_samples` sampled points in `field`, and validates on
/// `validation_size(n_samples)` fresh points.
pub fn fit_in_generators(
    target: &Necklace,
    degree: usize,
    n_samples: usize,
    field: Field,
    seed: u64,
) -> Result<FitOutcome> {
    let basis = graded_basis(degree, target);
    let required = required_samples(basis.len());
    if n_samples < required {
        return Err(Error::Underdetermined {
            samples: n_samples,
            required,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sols = solve_class(
        std::slice::from_ref(target),
        &basis,
        degree,
        n_samples,
        field,
        &mut rng,
    )?;
    Ok(match sols.pop().flatten() {
        Some(x) => FitOutcome::Fit(FitResult {
            target: target.clone(),
            expression: expression_from(&basis, x, field),
            degree_used: degree,
            sample_count: n_samples,
            validated: true,
            field_witnesses: match field {
                Field::Prime(p) => vec![p],
                Field::Rational => Vec::new(),
            },
        }),
        None => FitOutcome::NoFitAtDegree {
            target: target.clone(),
            degree,
        },
    })
}

/// `count` distinct primes just below `2^61`, offset by `seed`.
pub fn witness_primes(count: usize, seed: u64) -> Vec<u64> {
    let offset = splitmix(seed) % (1 << 32);
    let mut p = (1u64 << 61) - 1 - offset;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        p = prev_prime(p);
        out.push(p);
        p -= 2;
    }
    out
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn stream_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(seed), |acc, p| splitmix(acc ^ splitmix(*p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    /// Rational expression agreeing with the target on every held-out and
    /// cross-check point in every witness field and over ℚ.
    Validated,
    /// Validated in every witness field, but the coefficients could not be
    /// lifted to ℚ with the available modulus.
    ValidatedModP,
    /// No expression of degree ≤ the bound was found.
    NoFitAtDegree,
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStatus::Validated => "validated",
            FitStatus::ValidatedModP => "validated-mod-p",
            FitStatus::NoFitAtDegree => "no-fit-at-degree",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub target: String,
    pub length: usize,
    pub status: FitStatus,
    pub degree: Option<usize>,
    pub term_count: Option<usize>,
    pub expression: Option<String>,
    pub sample_count: Option<usize>,
    pub held_out_per_prime: Option<usize>,
    pub cross_checks_per_prime: Option<usize>,
    pub rational_spot_checks: Option<usize>,
    pub witness_primes: Vec<u64>,
    #[serde(skip)]
    pub lifted: Option<Expression>,
}

pub const REPORT_HEADER: &str =
    "Validated evidence, not proof: each expression was found by exact \
linear solving over sampled SL(3) points and agrees with its target on every held-out point in \
every witness prime field and on rational spot checks. This does not certify that the nine \
generators generate the coordinate ring.";

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub header: String,
    pub degree_bound: usize,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub generators: Vec<String>,
    pub targets: Vec<TargetReport>,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn count(&self, status: FitStatus) -> usize {
        self.targets.iter().filter(|t| t.status == status).count()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.header));
        out.push_str(&format!(
            "# degree bound {}, seed {}, witness primes {:?}\n",
            self.degree_bound, self.seed, self.primes
        ));
        for (i, g) in self.generators.iter().enumerate() {
            out.push_str(&format!("# G{} = tr({})\n", i + 1, g));
        }
        out.push_str(&format!(
            "{:<28} {:>3} {:<18} {:>6} {:>6}  {}\n",
            "target", "len", "status", "degree", "terms", "expression"
        ));
        for t in &self.targets {
            out.push_str(&format!(
                "{:<28} {:>3} {:<18} {:>6} {:>6}  {}\n",
                t.target,
                t.length,
                t.status.to_string(),
                t.degree.map_or("-".into(), |d| d.to_string()),
                t.term_count.map_or("-".into(), |d| d.to_string()),
                t.expression.as_deref().unwrap_or("")
            ));
        }
        out.push_str(&format!(
            "# {} validated, {} validated mod p only, {} without fit at degree <= {}\n",
            self.count(FitStatus::Validated),
            self.count(FitStatus::ValidatedModP),
            self.count(FitStatus::NoFitAtDegree),
            self.degree_bound
        ));
        out
    }
}

#[derive(Debug, Clone)]
pub struct FitAllConfig {
    pub degree_bound: usize,
    pub primes: Vec<u64>,
    pub seed: u64,
    /// Only fit these targets (all 57 when empty).
    pub targets: Vec<Necklace>,
}

impl FitAllConfig {
    pub fn new(degree_bound: usize, seed: u64) -> Self {
        FitAllConfig {
            degree_bound,
            primes: witness_primes(2, seed),
            seed,
            targets: Vec::new(),
        }
    }
}

fn necklace_text(n: &Necklace) -> String {
    if n.is_identity() {
        "e".into()
    } else {
        n.representative().to_string()
    }
}

/// Lifts per-prime coefficient vectors to ℚ.
fn lift(per_prime: &[Vec<Scalar>], primes: &[u64]) -> Option<Vec<BigRational>> {
    let ncols = per_prime[0].len();
    (0..ncols)
        .map(|c| {
            let residues: Vec<(u64, u64)> = per_prime
                .iter()
                .zip(primes)
                .map(|(x, p)| (residue(&x[c]), *p))
                .collect();
            let (a, m) = crt(&residues);
            rational_reconstruct(&a, &m)
        })
        .collect()
}

fn check_expression(
    expr: &Expression,
    target: &Necklace,
    field: Field,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    for (g, t) in draw_points(rng, count, field, std::slice::from_ref(target))? {
        if expr.eval(&g)? != t[0] {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Pending {
    target: Necklace,
}

/// Fits every target at increasing degree up to the bound, in every witness
/// prime, lifting and re-checking as described in the module docs.
pub fn fit_all(config: &FitAllConfig) -> Result<FitReport> {
    if config.primes.is_empty() {
        return Err(Error::Invalid(
            "at least one witness prime is required".into(),
        ));
    }
    for p in &config.primes {
        Field::prime(*p)?;
    }
    let targets = if config.targets.is_empty() {
        procesi_generators()
    } else {
        config.targets.clone()
    };
    let mut reports: BTreeMap<Necklace, TargetReport> = BTreeMap::new();
    let mut pending: BTreeMap<(u8, u8), Vec<Pending>> = BTreeMap::new();
    for t in &targets {
        pending
            .entry(grading(t))
            .or_default()
            .push(Pending { target: t.clone() });
    }

    for d in 0..=config.degree_bound {
        let classes: Vec<((u8, u8), Vec<Necklace>)> = pending
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(c, v)| (*c, v.iter().map(|p| p.target.clone()).collect()))
            .collect();
        let outcomes: Vec<Result<ClassOutcome>> = classes
            .par_iter()
            .map(|(class, members)| fit_class(config, *class, members, d))
            .collect();
        for outcome in outcomes {
            let outcome = outcome?;
            for (target, report) in outcome.fitted {
                if let Some(list) = pending.get_mut(&outcome.class) {
                    list.retain(|p| p.target != target);
                }
                reports.insert(target, report);
            }
        }
    }
    for list in pending.values() {
        for p in list {
            reports.insert(
                p.target.clone(),
                TargetReport {
                    target: necklace_text(&p.target),
                    length: p.target.len(),
                    status: FitStatus::NoFitAtDegree,
                    degree: None,
                    term_count: None,
                    expression: None,
                    sample_count: None,
                    held_out_per_prime: None,
                    cross_checks_per_prime: None,
                    rational_spot_checks: None,
                    witness_primes: config.primes.clone(),
                    lifted: None,
                },
            );
        }
    }
    Ok(FitReport {
        header: REPORT_HEADER.into(),
        degree_bound: config.degree_bound,
        seed: config.seed,
        primes: config.primes.clone(),
        generators: nine_generators().iter().map(necklace_text).collect(),
        targets: reports.into_values().collect(),
    })
}

struct ClassOutcome {
    class: (u8, u8),
    fitted: Vec<(Necklace, TargetReport)>,
}

fn fit_class(
    config: &FitAllConfig,
    class: (u8, u8),
    members: &[Necklace],
    d: usize,
) -> Result<ClassOutcome> {
    let basis = graded_basis(d, &members[0]);
    let mut fitted = Vec::new();
    if basis.is_empty() {
        return Ok(ClassOutcome { class, fitted });
    }
    let n_samples = required_samples(basis.len());
    let tag = [class.0 as u64, class.1 as u64, d as u64];

    let mut per_prime: Vec<Vec<Option<Vec<Scalar>>>> = Vec::new();
    for (i, p) in config.primes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
            config.seed,
            &[&tag[..], &[i as u64, 0]].concat(),
        ));
        per_prime.push(solve_class(
            members,
            &basis,
            d,
            n_samples,
            Field::Prime(*p),
            &mut rng,
        )?);
    }

    for (k, target) in members.iter().enumerate() {
        let sols: Option<Vec<Vec<Scalar>>> = per_prime.iter().map(|s| s[k].clone()).collect();
        let Some(sols) = sols else { continue };
        let held_out = validation_size(n_samples);
        let base = TargetReport {
            target: necklace_text(target),
            length: target.len(),
            status: FitStatus::ValidatedModP,
            degree: Some(d),
            term_count: Some(sols[0].iter().filter(|c| !c.is_zero()).count()),
            expression: None,
            sample_count: Some(n_samples),
            held_out_per_prime: Some(held_out),
            cross_checks_per_prime: None,
            rational_spot_checks: None,
            witness_primes: config.primes.clone(),
            lifted: None,
        };
        let Some(coeffs) = lift(&sols, &config.primes) else {
            fitted.push((target.clone(), base));
            continue;
        };
        let expr = expression_from(
            &basis,
            coeffs.into_iter().map(Scalar::Rational).collect(),
            Field::Rational,
        );
        // Every lifted expression is re-checked on fresh points in every
        // witness field and over ℚ; a failure means the lift was wrong.
        let mut ok = true;
        for (i, p) in config.primes.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
                config.seed,
                &[&tag[..], &[i as u64, 1, k as u64]].concat(),
            ));
            ok &= check_expression(
                &expr,
                target,
                Field::Prime(*p),
                CROSS_CHECK_SAMPLES,
                &mut rng,
            )?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
            config.seed,
            &[&tag[..], &[99, 2, k as u64]].concat(),
        ));
        ok &= check_expression(
            &expr,
            target,
            Field::Rational,
            RATIONAL_SPOT_CHECKS,
            &mut rng,
        )?;
        if !ok {
            fitted.push((target.clone(), base));
            continue;
        }
        fitted.push((
            target.clone(),
            TargetReport {
                status: FitStatus::Validated,
                term_count: Some(expr.term_count()),
                expression: Some(expr.to_string()),
                cross_checks_per_prime: Some(CROSS_CHECK_SAMPLES),
                rational_spot_checks: Some(RATIONAL_SPOT_CHECKS),
                lifted: Some(expr),
                ..base
            },
        ));
    }
    Ok(ClassOutcome { class, fitted })
}

/// Exact evaluation of a lifted expression against its target at a
/// representation; used by callers that want their own spot checks.
pub fn expression_matches_at(
    expr: &Expression,
    target: &Necklace,
    r: &Representation,
) -> Result<bool> {
    let point = sample_point_at(r)?;
    let value = TraceCache::new(r).trace(target)?;
    Ok(expr.eval(&point.generators)? == value)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    fn nk(s: &str) -> Necklace {
        necklace_of(&s.parse::<Word>().unwrap())
    }

    const P: u64 = 2_305_843_009_213_693_951;

    #[test]
    fn generator_lists() {
        let all = procesi_generators();
        assert_eq!(all.len(), 57);
        assert!(all.contains(&nk("g1")));
        assert!(all.contains(&nk("g1^2 g2^2 g1 g2")));
        let nine = nine_generators();
        assert_eq!(nine.len(), 9);
        assert_eq!(nine[0], nk("g1"));
        assert_eq!(nine[8], nk("g1^2 g2^2 g1 g2"));
        assert!(nine.iter().all(|g| all.contains(g)));
        assert!(all
            .iter()
            .all(|n| n.representative().letters().iter().all(|l| l.exponent > 0)));
    }

    #[test]
    fn monomial_counts() {
        for d in 0..=6 {
            let ms = monomials(d);
            assert_eq!(ms.len() as u64, monomial_count(d));
            assert_eq!(ms.iter().collect::<BTreeSet<_>>().len(), ms.len());
        }
        assert_eq!(monomial_count(6), 5005);
        let total: usize = (0..3u8)
            .flat_map(|a| (0..3u8).map(move |b| (a, b)))
            .map(|c| {
                let gens: Vec<(u8, u8)> = nine_generators().iter().map(grading).collect();
                monomials(4)
                    .iter()
                    .filter(|m| monomial_grading(m, &gens) == c)
                    .count()
            })
            .sum();
        assert_eq!(total as u64, monomial_count(4));
    }

    #[test]
    fn sample_points() {
        let id = Representation::identity(3, 2, Field::Rational);
        let pt = sample_point_at(&id).unwrap();
        assert!(pt
            .generators
            .iter()
            .all(|v| *v == Field::Rational.from_i64(3)));
        assert!(pt
            .values
            .values()
            .all(|v| *v == Field::Rational.from_i64(3)));
        assert_eq!(pt.values.len(), 57);

        let field = Field::prime(P).unwrap();
        let r = Representation::random(3, 2, 5, field);
        let pt = sample_point_at(&r).unwrap();
        let direct = r.rho(&"g2 g1".parse().unwrap()).unwrap().trace();
        assert_eq!(pt.values[&nk("g1 g2")], direct);
        assert_ne!(sample_point(1, field), sample_point(2, field));
    }

    #[test]
    fn montgomery_matches_plain() {
        let m = Mont::new(P);
        for (a, b) in [(3u64, 5u64), (P - 1, P - 2), (1 << 60, 12345)] {
            let prod = m.leave(m.mul(m.enter(a), m.enter(b)));
            assert_eq!(prod, crate::scalar::mul_mod(a, b, P));
        }
        let x = m.enter(7);
        assert_eq!(m.leave(m.mul(x, m.inv(x))), 1);
    }

    #[test]
    fn generator_fits_itself() {
        let field = Field::prime(P).unwrap();
        let target = nk("g1");
        let n = 2 * graded_basis(1, &target).len();
        match fit_in_generators(&target, 1, n, field, 1).unwrap() {
            FitOutcome::Fit(f) => {
                assert_eq!(f.expression.to_string(), "G1");
                assert!(f.validated);
                assert_eq!(f.field_witnesses, vec![P]);
            }
            other => panic!("{other:?}"),
        }
        let ninth = nk("g1^2 g2^2 g1 g2");
        assert!(matches!(
            fit_in_generators(&ninth, 0, 10, field, 1).unwrap(),
            FitOutcome::NoFitAtDegree { degree: 0, .. }
        ));
        assert!(matches!(
            fit_in_generators(&target, 2, 3, field, 1),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn cube_fit_over_rationals_and_prime() {
        // Cayley–Hamilton: tr(A³) = tr(A)tr(A²) − s₂·tr(A) + 3 with s₂ = (tr(A)² − tr(A²))/2
        let target = nk("g1^3");
        let basis = graded_basis(3, &target);
        let n = required_samples(basis.len());
        let q = fit_in_generators(&target, 3, n, Field::Rational, 4).unwrap();
        let FitOutcome::Fit(fq) = q else {
            panic!("no rational fit")
        };
        assert_eq!(fq.expression.to_string(), "-1/2*G1^3 + 3/2*G1*G3 + 3");
        let FitOutcome::Fit(fp) =
            fit_in_generators(&target, 3, n, Field::prime(P).unwrap(), 4).unwrap()
        else {
            panic!("no modular fit")
        };
        assert_eq!(fp.expression.term_count(), 3);
    }

    #[test]
    fn fit_all_small() {
        let mut config = FitAllConfig::new(4, 11);
        config.targets = vec![
            nk("g1"),
            nk("g1^3"),
            nk("g1 g2 g1 g2"),
            nk("g1^2 g2^2 g1 g2"),
        ];
        let report = fit_all(&config).unwrap();
        assert_eq!(report.targets.len(), 4);
        for t in &report.targets {
            assert_eq!(t.status, FitStatus::Validated, "{}", t.target);
            assert!(t.degree.unwrap() <= 4);
        }
        let g1 = report.targets.iter().find(|t| t.target == "g1").unwrap();
        assert_eq!(g1.expression.as_deref(), Some("G1"));
        assert_eq!(g1.degree, Some(1));
        assert!(report
            .to_table()
            .starts_with("# Validated evidence, not proof"));
        let again = fit_all(&config).unwrap();
        assert_eq!(again.to_json(), report.to_json());
    }
}
