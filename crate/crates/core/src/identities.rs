//! Trace identities: the alternating sums `F` and `G`, the determinant as a
//! trace polynomial, the Fricke–Klein identity and the 12-term SL(3)
//! identity together with its derivation by sliding a graph vertex.

use crate::error::{Error, Result};
use crate::graph::{normalize, parallel_graph, slide_vertex, Strategy, VertexId};
use crate::matrix::{ExactMatrix, Representation};
use crate::perm::{self, factorial, Permutation};
use crate::poly::{MatrixExpression, TracePolynomial};
use crate::scalar::{Field, Scalar};
use crate::tensor::{eval_mexp, eval_poly};
use crate::word::{product, Word};

const Q: Field = Field::Rational;

/// Largest `n` accepted by the determinant formulas.
pub const MAX_DET_DEGREE: usize = 5;

fn check_len(words: &[Word], expected: usize) -> Result<()> {
    if words.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: words.len(),
        });
    }
    Ok(())
}

fn cycle_word(cycle: &[usize], words: &[Word]) -> Word {
    product(cycle.iter().map(|&i| &words[i - 1]))
}

/// `Π_cycles χ_{w_{i₀}···w_{i_s}}`, with ambient dimension `n`.
pub fn phi_sigma(sigma: &Permutation, words: &[Word], n: usize) -> Result<TracePolynomial> {
    check_len(words, sigma.degree())?;
    let mut out = TracePolynomial::one(n, Q);
    for cycle in sigma.cycles_from(1) {
        out = &out * &TracePolynomial::chi(n, Q, &cycle_word(&cycle, words));
    }
    Ok(out)
}

/// Like `phi_sigma`, but the cycle through `i0` stays a bare word.
pub fn phi_sigma_i(
    sigma: &Permutation,
    i0: usize,
    words: &[Word],
    n: usize,
) -> Result<MatrixExpression> {
    check_len(words, sigma.degree())?;
    let cycles = perm::cycles_from(sigma, i0)?;
    let mut coeff = TracePolynomial::one(n, Q);
    for cycle in &cycles[1..] {
        coeff = &coeff * &TracePolynomial::chi(n, Q, &cycle_word(cycle, words));
    }
    Ok(MatrixExpression::term(coeff, cycle_word(&cycles[0], words)))
}

/// `Σ_{σ ∈ S_m} ε(σ)Φ_σ` for `m = words.len()`, in ambient dimension `n`.
pub fn alternating_trace_sum(words: &[Word], n: usize) -> Result<TracePolynomial> {
    let mut out = TracePolynomial::zero(n, Q);
    for sigma in perm::enumerate(words.len())? {
        let term = phi_sigma(&sigma, words, n)?.scale_i64(sigma.sign() as i64);
        out = &out + &term;
    }
    Ok(out)
}

/// The fundamental trace identity of `n × n` matrices (`n + 1` words).
pub fn fundamental_f(words: &[Word], n: usize) -> Result<TracePolynomial> {
    check_len(words, n + 1)?;
    alternating_trace_sum(words, n)
}

/// `Σ_σ ε(σ)Φ_σ·e − Σ_{i,σ} ε(σ)Φ_{σ,i}` for `m = words.len()`, in
/// ambient dimension `n`.
pub fn alternating_matrix_sum(words: &[Word], n: usize) -> Result<MatrixExpression> {
    let m = words.len();
    let mut out = MatrixExpression::term(alternating_trace_sum(words, n)?, Word::identity());
    for sigma in perm::enumerate(m)? {
        let sign = TracePolynomial::from_i64(n, Q, sigma.sign() as i64);
        for i in 1..=m {
            out = out.checked_sub(&phi_sigma_i(&sigma, i, words, n)?.scale_poly(&sign)?)?;
        }
    }
    Ok(out)
}

/// The matrix-valued identity `G` with `Tr(G(X₁..Xₙ)·X_{n+1}) = F`.
pub fn fundamental_g(words: &[Word], n: usize) -> Result<MatrixExpression> {
    check_len(words, n)?;
    alternating_matrix_sum(words, n)
}

/// `(1/n!)·Σ_σ ε(σ)·Π_j χ_{w^{c_j}}` over the cycle lengths `c_j` of `σ`.
pub fn det_via_traces(w: &Word, n: usize) -> Result<TracePolynomial> {
    det_via_traces_in(w, n, Q)
}

pub fn det_via_traces_in(w: &Word, n: usize, field: Field) -> Result<TracePolynomial> {
    let norm = det_normalizer(n, field)?;
    let mut out = TracePolynomial::zero(n, field);
    for sigma in perm::enumerate(n)? {
        let mut term = TracePolynomial::from_i64(n, field, sigma.sign() as i64);
        for c in sigma.cycle_type() {
            term = &term * &TracePolynomial::chi(n, field, &w.pow(c as u32));
        }
        out = &out + &term;
    }
    out.scale(&norm)
}

fn det_normalizer(n: usize, field: Field) -> Result<Scalar> {
    if n > MAX_DET_DEGREE {
        return Err(Error::SizeGuard {
            what: "determinant degree",
            got: n,
            limit: MAX_DET_DEGREE,
        });
    }
    let nf = factorial(n);
    if let Field::Prime(p) = field {
        if p <= nf {
            return Err(Error::PrimeTooSmall {
                p,
                divisor: format!("{n}! = {nf}"),
            });
        }
    }
    field.from_i64(nf as i64).inv()
}

/// The same formula with `Tr(M^{c_j})` in place of the trace variables.
pub fn det_via_traces_matrix(m: &ExactMatrix) -> Result<Scalar> {
    let n = m.dim();
    let field = m.field();
    let norm = det_normalizer(n, field)?;
    let power_traces: Vec<Scalar> = (0..=n).map(|k| m.pow(k as u32).trace()).collect();
    let mut total = field.zero();
    for sigma in perm::enumerate(n)? {
        let mut term = field.from_i64(sigma.sign() as i64);
        for c in sigma.cycle_type() {
            term = &term * &power_traces[c];
        }
        total = &total + &term;
    }
    Ok(&total * &norm)
}

/// `Σ_{σ ∈ S_n} ε(σ)·n^{c(σ)}`, which equals `n!`.
pub fn antisymmetrizer_sum(n: usize) -> Result<i128> {
    Ok(perm::enumerate(n)?
        .iter()
        .map(|s| s.sign() as i128 * (n as i128).pow(s.cycle_count() as u32))
        .sum())
}

/// `χ_aχ_b − χ_{ab} − χ_{ab⁻¹}` in ambient dimension 2.
pub fn fricke_klein(a: &Word, b: &Word) -> TracePolynomial {
    fricke_klein_at(a, b, 2)
}

/// The Fricke–Klein residual read in ambient dimension `n`; vanishes only
/// for `n = 2`.
pub fn fricke_klein_at(a: &Word, b: &Word, n: usize) -> TracePolynomial {
    let chi = |w: &Word| TracePolynomial::chi(n, Q, w);
    &(&(&chi(a) * &chi(b)) - &chi(&a.multiply(b))) - &chi(&a.multiply(&b.invert()))
}

/// The 12-term SL(3) trace identity in `γ₀..γ₃`.
pub fn sl3_identity18(g0: &Word, g1: &Word, g2: &Word, g3: &Word) -> TracePolynomial {
    sl3_identity18_at(g0, g1, g2, g3, 3)
}

/// The same 12 terms read in ambient dimension `n`.
pub fn sl3_identity18_at(g0: &Word, g1: &Word, g2: &Word, g3: &Word, n: usize) -> TracePolynomial {
    let chi = |ws: &[&Word]| TracePolynomial::chi(n, Q, &product(ws.iter().copied()));
    let (a, b, c) = (g1.multiply(g0), g2.multiply(g0), g3.multiply(g0));
    let positive = [
        &(&chi(&[g1]) * &chi(&[g2])) * &chi(&[g3]),
        chi(&[g1, g2, g3]),
        chi(&[g1, g3, g2]),
        &chi(&[&a]) * &chi(&[&b, &c]),
        &chi(&[&b]) * &chi(&[&a, &c]),
        &chi(&[&c]) * &chi(&[&a, &b]),
    ];
    let negative = [
        &chi(&[g1]) * &chi(&[g2, g3]),
        &chi(&[g2]) * &chi(&[g1, g3]),
        &chi(&[g3]) * &chi(&[g1, g2]),
        &(&chi(&[&a]) * &chi(&[&b])) * &chi(&[&c]),
        chi(&[&a, &b, &c]),
        chi(&[&a, &c, &b]),
    ];
    let mut out = TracePolynomial::zero(n, Q);
    for p in &positive {
        out = &out + p;
    }
    for p in &negative {
        out = &out - p;
    }
    out
}

/// `normalize(Γ) − normalize(Γ′)`, where `Γ` has one 3-valent source and
/// one 3-valent sink joined by strands `γ₁, γ₂, γ₃`, and `Γ′` is `Γ` with
/// its source slid along `γ₀`.
pub fn derive_identity18_from_graphs(
    g0: &Word,
    g1: &Word,
    g2: &Word,
    g3: &Word,
) -> Result<TracePolynomial> {
    let gamma = parallel_graph(&[g1.clone(), g2.clone(), g3.clone()])?;
    let source = gamma.sources().next().expect("one source");
    let gamma_slid = slide_vertex(&gamma, source, g0)?;
    let s = Strategy::LowestFirst;
    Ok(&normalize(&gamma, &s)? - &normalize(&gamma_slid, &s)?)
}

/// `+1` or `−1` if the graph derivation equals `±sl3_identity18` term for
/// term, `None` if neither.
pub fn identity18_sign(g0: &Word, g1: &Word, g2: &Word, g3: &Word) -> Result<Option<i32>> {
    let derived = derive_identity18_from_graphs(g0, g1, g2, g3)?;
    let stated = sl3_identity18(g0, g1, g2, g3);
    Ok(if derived == stated {
        Some(1)
    } else if derived == stated.scale_i64(-1) {
        Some(-1)
    } else {
        None
    })
}

/// Evaluates `G(words)` built for the representation's own dimension.
pub fn eval_g_vanishing(words: &[Word], r: &Representation) -> Result<ExactMatrix> {
    eval_mexp(&fundamental_g(words, r.dim())?, r)
}

/// `det ρ(g)` computed through traces; exactly 1 for an SL(n) sample.
pub fn det_skein_unit_check(g: &Word, r: &Representation) -> Result<Scalar> {
    eval_poly(&det_via_traces_in(g, r.dim(), Q)?, r)
}

/// Vertex id of the source in `parallel_graph`; exposed for callers that
/// rebuild the identity derivation by hand.
pub const PARALLEL_SOURCE: VertexId = VertexId(1);

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::matrix::random_sl_matrix;
    use crate::word::random_word;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn chi(n: usize, s: &str) -> TracePolynomial {
        TracePolynomial::chi(n, Q, &w(s))
    }

    fn cyc(m: usize, cycles: &[&[usize]]) -> Permutation {
        Permutation::from_cycles(m, cycles).unwrap()
    }

    #[test]
    fn phi_examples() {
        let ab = [w("g1"), w("g2")];
        assert_eq!(
            phi_sigma(&Permutation::identity(2), &ab, 3).unwrap(),
            &chi(3, "g1") * &chi(3, "g2")
        );
        assert_eq!(
            phi_sigma(&cyc(2, &[&[1, 2]]), &ab, 3).unwrap(),
            chi(3, "g1 g2")
        );
        let abc = [w("g1"), w("g2"), w("g3")];
        assert_eq!(
            phi_sigma(&cyc(3, &[&[1, 2, 3]]), &abc, 3).unwrap(),
            chi(3, "g1 g2 g3")
        );
        assert!(matches!(
            phi_sigma(&Permutation::identity(3), &ab, 3),
            Err(Error::LengthMismatch { .. })
        ));

        assert_eq!(
            phi_sigma_i(&Permutation::identity(2), 1, &ab, 3).unwrap(),
            MatrixExpression::term(chi(3, "g2"), w("g1"))
        );
        assert_eq!(
            phi_sigma_i(&cyc(2, &[&[1, 2]]), 1, &ab, 3).unwrap(),
            MatrixExpression::word(3, Q, w("g1 g2"))
        );
        assert_eq!(
            phi_sigma_i(&cyc(3, &[&[2, 3]]), 2, &abc, 3).unwrap(),
            MatrixExpression::term(chi(3, "g1"), w("g2 g3"))
        );
    }

    #[test]
    fn fundamental_f_examples() {
        assert_eq!(
            fundamental_f(&[w("g1"), w("g2")], 1).unwrap(),
            &(&chi(1, "g1") * &chi(1, "g2")) - &chi(1, "g1 g2")
        );
        let f = fundamental_f(&[w("g1"), w("g2"), w("g3")], 2).unwrap();
        let c = |s| chi(2, s);
        let expected = &(&(&(&(&(&(&c("g1") * &c("g2")) * &c("g3")) - &(&c("g1") * &c("g2 g3")))
            - &(&c("g2") * &c("g1 g3")))
            - &(&c("g3") * &c("g1 g2")))
            + &c("g1 g2 g3"))
            + &c("g1 g3 g2");
        assert_eq!(f, expected);
        let inv = fundamental_f(&[w("g1"), w("g1^-1")], 1).unwrap();
        assert_eq!(
            inv,
            &(&chi(1, "g1") * &chi(1, "g1^-1")) - &TracePolynomial::from_i64(1, Q, 1)
        );
        assert!(fundamental_f(&[w("g1")], 1).is_err());
    }

    #[test]
    fn fundamental_g_examples() {
        let g1 = fundamental_g(&[w("g1")], 1).unwrap();
        let expected1 = MatrixExpression::term(chi(1, "g1"), Word::identity())
            .checked_sub(&MatrixExpression::word(1, Q, w("g1")))
            .unwrap();
        assert_eq!(g1, expected1);

        let g2 = fundamental_g(&[w("g1"), w("g2")], 2).unwrap();
        let one = |s: &str| MatrixExpression::word(2, Q, w(s));
        let expected2 = MatrixExpression::term(
            &(&chi(2, "g1") * &chi(2, "g2")) - &chi(2, "g1 g2"),
            Word::identity(),
        )
        .checked_sub(&MatrixExpression::term(chi(2, "g2"), w("g1")))
        .unwrap()
        .checked_sub(&MatrixExpression::term(chi(2, "g1"), w("g2")))
        .unwrap()
        .checked_add(&one("g1 g2"))
        .unwrap()
        .checked_add(&one("g2 g1"))
        .unwrap();
        assert_eq!(g2, expected2);
    }

    #[test]
    fn trace_of_g_times_x_is_f() {
        let fresh = |n: usize| Word::generator(n as u32 + 1);
        for n in 1..=3usize {
            let words: Vec<Word> = (1..=n as u32).map(Word::generator).collect();
            let g = fundamental_g(&words, n).unwrap();
            let x = MatrixExpression::word(n, Q, fresh(n));
            let lhs = g.checked_mul(&x).unwrap().trace();
            let mut all = words.clone();
            all.push(fresh(n));
            assert_eq!(lhs, fundamental_f(&all, n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(
            det_via_traces_matrix(&ExactMatrix::identity(2, Q)).unwrap(),
            Q.from_i64(1)
        );
        let half = Q.from_ratio(1, 2).unwrap();
        let mut d = ExactMatrix::identity(2, Q);
        d.set(0, 0, Q.from_i64(2));
        d.set(1, 1, half);
        assert_eq!(det_via_traces_matrix(&d).unwrap(), Q.from_i64(1));
        let m = ExactMatrix::from_i64_rows(Q, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]).unwrap();
        assert_eq!(det_via_traces_matrix(&m).unwrap(), m.det_cofactor());
        let small = Field::prime(5).unwrap();
        assert!(matches!(
            det_via_traces_matrix(&ExactMatrix::identity(3, small)),
            Err(Error::PrimeTooSmall { .. })
        ));
        assert!(det_via_traces_in(&w("g1"), 3, small).is_err());
        assert!(matches!(
            det_via_traces(&w("g1"), 6),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn antisymmetrizer_examples() {
        assert_eq!(antisymmetrizer_sum(1).unwrap(), 1);
        assert_eq!(antisymmetrizer_sum(2).unwrap(), 2);
        assert_eq!(antisymmetrizer_sum(3).unwrap(), 6);
        for n in 1..=5 {
            assert_eq!(antisymmetrizer_sum(n).unwrap(), factorial(n) as i128);
        }
    }

    #[test]
    fn fricke_klein_examples() {
        let e = Word::identity();
        assert!(fricke_klein(&e, &e).is_zero());
        let (a, b) = (w("g1"), w("g2"));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r2 = Representation::random_with(&mut rng, 2, 2, Q);
        assert!(eval_poly(&fricke_klein(&a, &b), &r2).unwrap().is_zero());
        let r3 = Representation::random_with(&mut rng, 3, 2, Q);
        assert!(!eval_poly(&fricke_klein_at(&a, &b, 3), &r3)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn identity18_examples() {
        let (g1, g2, g3) = (w("g2"), w("g3"), w("g4"));
        assert!(sl3_identity18(&Word::identity(), &g1, &g2, &g3).is_zero());
        assert!(
            derive_identity18_from_graphs(&Word::identity(), &g1, &g2, &g3)
                .unwrap()
                .is_zero()
        );
        let g0 = w("g1");
        assert_eq!(identity18_sign(&g0, &g1, &g2, &g3).unwrap(), Some(1));
        let stated = sl3_identity18(&g0, &g1, &g2, &g3);
        assert_eq!(stated.len(), 12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r3 = Representation::random_with(&mut rng, 3, 4, Q);
        assert!(eval_poly(&stated, &r3).unwrap().is_zero());
        // each half is the S3 alternating sum, which vanishes on all 2×2
        // matrices, so the controls use 4×4 samples and det ≠ 1 in 3×3
        let r2 = Representation::random_with(&mut rng, 2, 4, Q);
        let at2 = sl3_identity18_at(&g0, &g1, &g2, &g3, 2);
        assert!(eval_poly(&at2, &r2).unwrap().is_zero());
        let r4 = Representation::random_with(&mut rng, 4, 4, Q);
        let at4 = sl3_identity18_at(&g0, &g1, &g2, &g3, 4);
        assert!(!eval_poly(&at4, &r4).unwrap().is_zero());
        let mut images = r3.images().clone();
        images.insert(1, images[&1].scale(&Q.from_i64(2)).unwrap());
        let gl3 = Representation::with_any_determinant(3, images).unwrap();
        assert!(!eval_poly(&stated, &gl3).unwrap().is_zero());
    }

    #[test]
    fn g_vanishing_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r2 = Representation::random_with(&mut rng, 2, 2, Q);
        assert!(eval_g_vanishing(&[w("g1"), w("g2")], &r2)
            .unwrap()
            .is_zero());
        let r1 = Representation::random_with(&mut rng, 1, 1, Q);
        assert!(eval_g_vanishing(&[w("g1")], &r1).unwrap().is_zero());
        let r3 = Representation::random_with(&mut rng, 3, 2, Q);
        let wrong = alternating_matrix_sum(&[w("g1"), w("g2")], 3).unwrap();
        assert!(!eval_mexp(&wrong, &r3).unwrap().is_zero());
        assert!(eval_g_vanishing(&[w("g1")], &r2).is_err());
    }

    #[test]
    fn det_unit_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=3 {
            let r = Representation::random_with(&mut rng, n, 2, Q);
            assert!(det_skein_unit_check(&Word::identity(), &r)
                .unwrap()
                .is_one());
            let g = random_word(&mut rng, 2, 4);
            assert!(det_skein_unit_check(&g, &r).unwrap().is_one());
        }
        let m = random_sl_matrix(3, 9, Q);
        assert!(det_via_traces_matrix(&m).unwrap().is_one());
    }
}
