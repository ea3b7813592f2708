//! Direct tensor contraction of labeled graphs at a representation, and
//! evaluation of trace polynomials. This is the independent check on
//! everything the resolution calculus produces.
//!
//! A source contributes `ε` of the indices on its ports, a sink likewise;
//! an edge labeled `w` from a source port carrying index `i` to a sink port
//! carrying index `j` contributes `ρ(w)[j][i]`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{SkeinGraph, VertexId, VertexKind};
use crate::matrix::{ExactMatrix, Representation};
use crate::perm::{self, Permutation};
use crate::poly::{MatrixExpression, TracePolynomial};
use crate::scalar::{Field, Scalar};
use crate::word::{Necklace, Word};

/// Memoizes `Tr ρ(w)` per necklace for one representation.
pub struct TraceCache<'a> {
    rep: &'a Representation,
    traces: HashMap<Necklace, Scalar>,
}

impl<'a> TraceCache<'a> {
    pub fn new(rep: &'a Representation) -> Self {
        TraceCache {
            rep,
            traces: HashMap::new(),
        }
    }

    pub fn representation(&self) -> &Representation {
        self.rep
    }

    pub fn trace(&mut self, necklace: &Necklace) -> Result<Scalar> {
        if let Some(t) = self.traces.get(necklace) {
            return Ok(t.clone());
        }
        let t = self.rep.rho(necklace.representative())?.trace();
        self.traces.insert(necklace.clone(), t.clone());
        Ok(t)
    }

    /// Evaluates `p` with `χ_w ↦ Tr ρ(w)`. Rational coefficients are reduced
    /// when the representation lives over `F_p`.
    pub fn eval_poly(&mut self, p: &TracePolynomial) -> Result<Scalar> {
        check_ambient(p.ambient(), self.rep.dim())?;
        let field = self.rep.field();
        let mut total = field.zero();
        for (m, c) in p.terms() {
            let mut term = coerce(c, field)?;
            for (nk, e) in m.factors() {
                term = &term * &self.trace(nk)?.pow(*e);
            }
            total = &total + &term;
        }
        Ok(total)
    }
}

fn check_ambient(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::AmbientMismatch { left, right });
    }
    Ok(())
}

fn coerce(c: &Scalar, field: Field) -> Result<Scalar> {
    if c.field() == field {
        return Ok(c.clone());
    }
    match c {
        Scalar::Rational(q) => field.from_rational(q),
        _ => Err(Error::FieldMismatch {
            left: c.field(),
            right: field,
        }),
    }
}

pub fn eval_poly(p: &TracePolynomial, r: &Representation) -> Result<Scalar> {
    TraceCache::new(r).eval_poly(p)
}

/// `Σ eval_poly(coeff)·ρ(word)`.
pub fn eval_mexp(m: &MatrixExpression, r: &Representation) -> Result<ExactMatrix> {
    check_ambient(m.ambient(), r.dim())?;
    let mut cache = TraceCache::new(r);
    let mut total = ExactMatrix::zero(r.dim(), r.field());
    for (w, c) in m.terms() {
        let coeff = cache.eval_poly(c)?;
        total = total.add(&r.rho(w)?.scale(&coeff)?)?;
    }
    Ok(total)
}

/// Full contraction of an absolute graph.
pub fn theta_contract(d: &SkeinGraph, r: &Representation) -> Result<Scalar> {
    if d.is_relative() {
        return Err(Error::NotAbsolute);
    }
    check_ambient(d.ambient(), r.dim())?;
    let n = d.ambient();
    let field = r.field();

    let mut loops = field.one();
    let mut cache = TraceCache::new(r);
    for l in d.loops() {
        let t = if l.is_identity() {
            field.from_i64(n as i64)
        } else {
            cache.trace(l)?
        };
        loops = &loops * &t;
    }

    let sources: Vec<VertexId> = d.sources().collect();
    let sinks: Vec<VertexId> = d.sinks().collect();
    let source_slot: HashMap<VertexId, usize> =
        sources.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    // For every sink and port: (edge matrix, source slot, source port).
    let mut sink_edges: Vec<Vec<(ExactMatrix, usize, usize)>> = Vec::with_capacity(sinks.len());
    for t in &sinks {
        let mut ports: Vec<Option<(ExactMatrix, usize, usize)>> = vec![None; n];
        for e in d.edges().iter().filter(|e| e.to.vertex == *t) {
            ports[e.to.port - 1] =
                Some((r.rho(&e.label)?, source_slot[&e.from.vertex], e.from.port));
        }
        sink_edges.push(
            ports
                .into_iter()
                .map(|p| p.expect("validated graph"))
                .collect(),
        );
    }

    let perms = perm::enumerate(n)?;
    let signs: Vec<Scalar> = perms
        .iter()
        .map(|s| field.from_i64(s.sign() as i64))
        .collect();

    // Each source's index pattern must be a permutation (ε vanishes
    // otherwise); once they are fixed the sink sums factor.
    let mut total = field.zero();
    let mut choice = vec![0usize; sources.len()];
    loop {
        let mut term = field.one();
        for s in &choice {
            term = &term * &signs[*s];
        }
        for ports in &sink_edges {
            if term.is_zero() {
                break;
            }
            term = &term * &sink_sum(ports, &choice, &perms, &signs, field);
        }
        total = &total + &term;
        if !advance(&mut choice, perms.len()) {
            break;
        }
    }
    Ok(&total * &loops)
}

/// `Σ_b ε(b) Π_k M_k[b(k)][a(k)]` for one sink, where `a(k)` is the index
/// on the source port feeding sink port `k`.
fn sink_sum(
    ports: &[(ExactMatrix, usize, usize)],
    choice: &[usize],
    perms: &[Permutation],
    signs: &[Scalar],
    field: Field,
) -> Scalar {
    let mut sum = field.zero();
    for (b, sign) in perms.iter().zip(signs) {
        let mut prod = sign.clone();
        for (k, (m, slot, port)) in ports.iter().enumerate() {
            let a = perms[choice[*slot]].apply(*port) - 1;
            prod = &prod * m.get(b.apply(k + 1) - 1, a);
            if prod.is_zero() {
                break;
            }
        }
        sum = &sum + &prod;
    }
    sum
}

fn advance(choice: &mut [usize], base: usize) -> bool {
    for c in choice.iter_mut() {
        *c += 1;
        if *c < base {
            return true;
        }
        *c = 0;
    }
    false
}

/// Contraction of a relative graph, leaving the through-strand's indices
/// free: `θ(closed part)·ρ(through word)`.
pub fn theta_rel_contract(d: &SkeinGraph, r: &Representation) -> Result<ExactMatrix> {
    let through: &Word = d.through_label().ok_or(Error::NotRelative)?;
    let closed = theta_contract(&d.absolute_part(), r)?;
    r.rho(through)?.scale(&closed)
}

/// Brute-force contraction over every index assignment to every edge end,
/// without pruning. Exponential; only for cross-checking small graphs.
pub fn theta_contract_naive(d: &SkeinGraph, r: &Representation) -> Result<Scalar> {
    if d.is_relative() {
        return Err(Error::NotAbsolute);
    }
    check_ambient(d.ambient(), r.dim())?;
    let n = d.ambient();
    let field = r.field();
    let edges = d.edges();
    let mats: Vec<ExactMatrix> = edges
        .iter()
        .map(|e| r.rho(&e.label))
        .collect::<Result<_>>()?;
    let mut total = field.zero();
    let mut idx = vec![0usize; 2 * edges.len()];
    loop {
        let mut term = field.one();
        for (v, kind) in d.vertices() {
            let mut pattern = vec![0usize; n];
            for (i, e) in edges.iter().enumerate() {
                match kind {
                    VertexKind::Source if e.from.vertex == *v => {
                        pattern[e.from.port - 1] = idx[2 * i] + 1
                    }
                    VertexKind::Sink if e.to.vertex == *v => {
                        pattern[e.to.port - 1] = idx[2 * i + 1] + 1
                    }
                    _ => {}
                }
            }
            match Permutation::from_images(pattern) {
                Ok(p) => term = term.scale_i64(p.sign() as i64),
                Err(_) => term = field.zero(),
            }
        }
        if !term.is_zero() {
            for (i, m) in mats.iter().enumerate() {
                term = &term * m.get(idx[2 * i + 1], idx[2 * i]);
            }
            total = &total + &term;
        }
        if !advance(&mut idx, n) {
            break;
        }
    }
    let mut cache = TraceCache::new(r);
    for l in d.loops() {
        let t = if l.is_identity() {
            field.from_i64(n as i64)
        } else {
            cache.trace(l)?
        };
        total = &total * &t;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::{edge_graph, edge_loop_graph, loop_graph, theta_graph};
    use crate::word::necklace_of;

    const Q: Field = Field::Rational;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn contraction_examples() {
        let r3 = Representation::random(3, 2, 7, Q);
        let g1 = w("g1");
        assert_eq!(
            theta_contract(&loop_graph(necklace_of(&g1), 3), &r3).unwrap(),
            r3.rho(&g1).unwrap().trace()
        );
        assert_eq!(
            theta_contract(&loop_graph(Necklace::identity(), 3), &r3).unwrap(),
            Q.from_i64(3)
        );
        let r2 = Representation::random(2, 2, 11, Q);
        let a = r2.rho(&w("g1")).unwrap();
        let b = r2.rho(&w("g2")).unwrap();
        let expected = &(&a.trace() * &b.trace()) - &a.mul(&b).unwrap().trace();
        let theta = theta_graph(w("g1"), w("g2"));
        assert_eq!(theta_contract(&theta, &r2).unwrap(), expected);
        assert_eq!(theta_contract_naive(&theta, &r2).unwrap(), expected);
    }

    #[test]
    fn relative_examples() {
        let r = Representation::random(3, 2, 5, Q);
        assert_eq!(
            theta_rel_contract(&edge_graph(w("g1"), 3), &r).unwrap(),
            r.rho(&w("g1")).unwrap()
        );
        let t = r.rho(&w("g2")).unwrap().trace();
        assert_eq!(
            theta_rel_contract(&edge_loop_graph(&w("g2"), 3), &r).unwrap(),
            ExactMatrix::scalar(3, &t)
        );
        assert_eq!(
            theta_rel_contract(&edge_graph(Word::identity(), 3), &r).unwrap(),
            ExactMatrix::identity(3, Q)
        );
        assert!(matches!(
            theta_contract(&edge_graph(w("g1"), 3), &r),
            Err(Error::NotAbsolute)
        ));
        assert!(matches!(
            theta_contract(&loop_graph(necklace_of(&w("g1")), 2), &r),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let r = Representation::identity(3, 2, Q);
        assert_eq!(
            eval_poly(&TracePolynomial::from_i64(3, Q, 3), &r).unwrap(),
            Q.from_i64(3)
        );
        assert_eq!(
            eval_poly(&TracePolynomial::chi(3, Q, &w("g1")), &r).unwrap(),
            Q.from_i64(3)
        );
        let s = Representation::random(3, 2, 9, Q);
        let ab = s.rho(&w("g1 g2")).unwrap().trace();
        let ba = s.rho(&w("g2 g1")).unwrap().trace();
        assert_eq!(ab, ba);
        assert_eq!(
            eval_poly(&TracePolynomial::chi(3, Q, &w("g2 g1")), &s).unwrap(),
            ab
        );

        let m = MatrixExpression::word(3, Q, w("g1"));
        assert_eq!(eval_mexp(&m, &s).unwrap(), s.rho(&w("g1")).unwrap());
        let m2 = MatrixExpression::term(TracePolynomial::chi(3, Q, &w("g2")), Word::identity());
        let t = s.rho(&w("g2")).unwrap().trace();
        assert_eq!(eval_mexp(&m2, &s).unwrap(), ExactMatrix::scalar(3, &t));
        let sum = m.checked_add(&m2).unwrap();
        assert_eq!(
            eval_mexp(&sum, &s).unwrap().trace(),
            eval_poly(&sum.trace(), &s).unwrap()
        );
    }

    #[test]
    fn eval_over_prime_field_reduces_coefficients() {
        let p = Field::prime(1_000_003).unwrap();
        let r = Representation::identity(2, 1, p);
        let half = TracePolynomial::constant(2, Q.from_ratio(1, 2).unwrap());
        assert_eq!(eval_poly(&half, &r).unwrap(), p.from_ratio(1, 2).unwrap());
    }

    #[test]
    fn naive_and_pruned_contraction_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for pairs in 1..=2 {
                let d = crate::graph::random_graph(&mut rng, n, pairs, 2, 2);
                let r = Representation::random_with(&mut rng, n, 2, Q);
                assert_eq!(
                    theta_contract(&d, &r).unwrap(),
                    theta_contract_naive(&d, &r).unwrap(),
                    "{d}"
                );
            }
        }
    }

    #[test]
    fn non_unimodular_images_are_detected_by_contraction() {
        let images: BTreeMap<u32, ExactMatrix> = [(
            1,
            ExactMatrix::from_i64_rows(Q, &[&[2, 0], &[0, 1]]).unwrap(),
        )]
        .into_iter()
        .collect();
        let r = Representation::with_any_determinant(2, images).unwrap();
        let d = theta_graph(Word::identity(), Word::identity());
        let slid = crate::graph::slide_vertex(&d, VertexId(1), &w("g1")).unwrap();
        assert_ne!(
            theta_contract(&slid, &r).unwrap(),
            theta_contract(&d, &r).unwrap()
        );
    }
}
