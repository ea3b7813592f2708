//! Group-labeled graphs with n-valent sources and sinks, and their
//! resolution into trace polynomials.
//!
//! An edge runs from a source port to a sink port and carries a word. The
//! word composes like a matrix acting from the source end to the sink end:
//! when strands are joined at a resolved source/sink pair, the strand
//! leaving the source is written first and the strand entering the sink
//! second. Loops carry necklaces.
//!
//! A relative graph additionally has a vertex-free through-strand from its
//! 1-valent source to its 1-valent sink.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::perm;
use crate::poly::{MatrixExpression, TracePolynomial};
use crate::scalar::{Field, Scalar};
use crate::word::{necklace_of, product, random_word, Necklace, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Source,
    Sink,
}

/// A port of a vertex; ports are numbered `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub vertex: VertexId,
    pub port: usize,
}

impl PortRef {
    pub fn new(vertex: u32, port: usize) -> Self {
        PortRef {
            vertex: VertexId(vertex),
            port,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
    pub label: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkeinGraph {
    n: usize,
    vertices: BTreeMap<VertexId, VertexKind>,
    // sorted by source port, which is unique per edge
    edges: Vec<Edge>,
    // sorted multiset
    loops: Vec<Necklace>,
    relative: Option<Word>,
}

impl SkeinGraph {
    pub fn new(
        n: usize,
        vertices: BTreeMap<VertexId, VertexKind>,
        mut edges: Vec<Edge>,
        mut loops: Vec<Necklace>,
        relative: Option<Word>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("n must be positive".into()));
        }
        let mut used: BTreeSet<PortRef> = BTreeSet::new();
        for (i, e) in edges.iter().enumerate() {
            for (end, port, want) in [
                ("from", e.from, VertexKind::Source),
                ("to", e.to, VertexKind::Sink),
            ] {
                match vertices.get(&port.vertex) {
                    None => {
                        return Err(Error::InvalidGraph(format!(
                            "edges[{i}].{end}: unknown vertex {}",
                            port.vertex
                        )))
                    }
                    Some(kind) if *kind != want => {
                        return Err(Error::InvalidGraph(format!(
                            "edges[{i}].{end}: vertex {} is not a {}",
                            port.vertex,
                            if want == VertexKind::Source {
                                "source"
                            } else {
                                "sink"
                            }
                        )))
                    }
                    _ => {}
                }
                if port.port == 0 || port.port > n {
                    return Err(Error::InvalidGraph(format!(
                        "edges[{i}].{end}: port {} outside 1..={n}",
                        port.port
                    )));
                }
                if !used.insert(port) {
                    return Err(Error::InvalidGraph(format!(
                        "edges[{i}].{end}: port {} of {} used twice",
                        port.port, port.vertex
                    )));
                }
            }
        }
        let sources = vertices
            .values()
            .filter(|k| **k == VertexKind::Source)
            .count();
        let sinks = vertices.len() - sources;
        if sources != sinks {
            return Err(Error::InvalidGraph(format!(
                "{sources} sources but {sinks} sinks"
            )));
        }
        if used.len() != 2 * n * sources {
            return Err(Error::InvalidGraph(
                "every source and sink port must carry exactly one edge".into(),
            ));
        }
        edges.sort();
        loops.sort();
        Ok(SkeinGraph {
            n,
            vertices,
            edges,
            loops,
            relative,
        })
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &BTreeMap<VertexId, VertexKind> {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn loops(&self) -> &[Necklace] {
        &self.loops
    }

    pub fn through_label(&self) -> Option<&Word> {
        self.relative.as_ref()
    }

    pub fn is_relative(&self) -> bool {
        self.relative.is_some()
    }

    pub fn has_vertices(&self) -> bool {
        !self.vertices.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .filter(|(_, k)| **k == VertexKind::Source)
            .map(|(v, _)| *v)
    }

    pub fn sinks(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .filter(|(_, k)| **k == VertexKind::Sink)
            .map(|(v, _)| *v)
    }

    fn max_vertex_id(&self) -> u32 {
        self.vertices.keys().last().map_or(0, |v| v.0)
    }

    /// The closed part of a relative graph, as an absolute graph.
    pub fn absolute_part(&self) -> SkeinGraph {
        SkeinGraph {
            relative: None,
            ..self.clone()
        }
    }

    /// Disjoint union. At most one operand may be relative.
    pub fn disjoint_union(&self, other: &SkeinGraph) -> Result<SkeinGraph> {
        if self.n != other.n {
            return Err(Error::AmbientMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let relative = match (&self.relative, &other.relative) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidGraph(
                    "disjoint union of two relative graphs; use rel_mul".into(),
                ))
            }
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let offset = self.max_vertex_id();
        let shift = |p: PortRef| PortRef {
            vertex: VertexId(p.vertex.0 + offset),
            port: p.port,
        };
        let mut vertices = self.vertices.clone();
        vertices.extend(
            other
                .vertices
                .iter()
                .map(|(v, k)| (VertexId(v.0 + offset), *k)),
        );
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            from: shift(e.from),
            to: shift(e.to),
            label: e.label.clone(),
        }));
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        SkeinGraph::new(self.n, vertices, edges, loops, relative)
    }

    /// Port `p` and port `q` of vertex `v` exchange their edges.
    pub fn swap_ports(&self, v: VertexId, p: usize, q: usize) -> Result<SkeinGraph> {
        let kind = *self
            .vertices
            .get(&v)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
        for port in [p, q] {
            if port == 0 || port > self.n {
                return Err(Error::IndexOutOfRange {
                    index: port,
                    max: self.n,
                });
            }
        }
        let swap = |r: PortRef| {
            if r.vertex != v {
                r
            } else if r.port == p {
                PortRef { port: q, ..r }
            } else if r.port == q {
                PortRef { port: p, ..r }
            } else {
                r
            }
        };
        let edges = self
            .edges
            .iter()
            .map(|e| match kind {
                VertexKind::Source => Edge {
                    from: swap(e.from),
                    ..e.clone()
                },
                VertexKind::Sink => Edge {
                    to: swap(e.to),
                    ..e.clone()
                },
            })
            .collect();
        SkeinGraph::new(
            self.n,
            self.vertices.clone(),
            edges,
            self.loops.clone(),
            self.relative.clone(),
        )
    }
}

impl fmt::Display for SkeinGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &Word| {
            if w.is_identity() {
                "e".to_string()
            } else {
                w.to_string()
            }
        };
        write!(f, "n={}", self.n)?;
        if let Some(t) = &self.relative {
            write!(f, " through[{}]", show(t))?;
        }
        for e in &self.edges {
            write!(
                f,
                " {}.{}->{}.{}[{}]",
                e.from.vertex,
                e.from.port,
                e.to.vertex,
                e.to.port,
                show(&e.label)
            )?;
        }
        for l in &self.loops {
            write!(f, " loop[{}]", show(l.representative()))?;
        }
        Ok(())
    }
}

/// Vertex-free graph with a single loop.
pub fn loop_graph(w: Necklace, n: usize) -> SkeinGraph {
    SkeinGraph {
        n,
        vertices: BTreeMap::new(),
        edges: Vec::new(),
        loops: vec![w],
        relative: None,
    }
}

/// The empty absolute graph (unit of disjoint union).
pub fn empty_graph(n: usize) -> SkeinGraph {
    SkeinGraph {
        n,
        vertices: BTreeMap::new(),
        edges: Vec::new(),
        loops: Vec::new(),
        relative: None,
    }
}

/// Relative graph consisting of a through-strand labeled `w`.
pub fn edge_graph(w: Word, n: usize) -> SkeinGraph {
    SkeinGraph {
        relative: Some(w),
        ..empty_graph(n)
    }
}

/// Through-strand labeled `e` plus a loop labeled by the class of `w`.
pub fn edge_loop_graph(w: &Word, n: usize) -> SkeinGraph {
    SkeinGraph {
        loops: vec![necklace_of(w)],
        ..edge_graph(Word::identity(), n)
    }
}

/// One source `v1` and one sink `v2` joined by `labels.len()` parallel
/// edges, edge `i` running from port `i` to port `i`.
pub fn parallel_graph(labels: &[Word]) -> Result<SkeinGraph> {
    let n = labels.len();
    let vertices = [
        (VertexId(1), VertexKind::Source),
        (VertexId(2), VertexKind::Sink),
    ]
    .into_iter()
    .collect();
    let edges = labels
        .iter()
        .enumerate()
        .map(|(i, w)| Edge {
            from: PortRef::new(1, i + 1),
            to: PortRef::new(2, i + 1),
            label: w.clone(),
        })
        .collect();
    SkeinGraph::new(n, vertices, edges, Vec::new(), None)
}

/// The n = 2 theta graph with edges labeled `a` and `b`.
pub fn theta_graph(a: Word, b: Word) -> SkeinGraph {
    parallel_graph(&[a, b]).expect("two parallel edges form a valid graph")
}

/// Stacks `a` on top of `b`: through-strands multiply, everything else is
/// a disjoint union.
pub fn rel_mul(a: &SkeinGraph, b: &SkeinGraph) -> Result<SkeinGraph> {
    let (ta, tb) = match (&a.relative, &b.relative) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::NotRelative),
    };
    let through = ta.multiply(tb);
    let mut union = a.absolute_part().disjoint_union(&b.absolute_part())?;
    union.relative = Some(through);
    Ok(union)
}

/// Identifies the endpoints of the through-strand.
pub fn close_up(d: &SkeinGraph) -> Result<SkeinGraph> {
    let through = d.relative.as_ref().ok_or(Error::NotRelative)?;
    let mut loops = d.loops.clone();
    loops.push(necklace_of(through));
    loops.sort();
    Ok(SkeinGraph {
        loops,
        ..d.absolute_part()
    })
}

/// Moves vertex `v` along `h`: edges at a source become `g·h`, edges at a
/// sink become `h·g`.
pub fn slide_vertex(d: &SkeinGraph, v: VertexId, h: &Word) -> Result<SkeinGraph> {
    let kind = *d
        .vertices
        .get(&v)
        .ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
    let edges = d
        .edges
        .iter()
        .map(|e| {
            let label = match kind {
                VertexKind::Source if e.from.vertex == v => e.label.multiply(h),
                VertexKind::Sink if e.to.vertex == v => h.multiply(&e.label),
                _ => e.label.clone(),
            };
            Edge { label, ..e.clone() }
        })
        .collect();
    Ok(SkeinGraph { edges, ..d.clone() })
}

/// Random absolute graph with `pairs` sources and sinks (ids `1..=pairs`
/// and `pairs+1..=2·pairs`), ports wired by a random bijection, labels of
/// length `≤ max_label_len` and up to two extra loops.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    pairs: usize,
    generators: u32,
    max_label_len: usize,
) -> SkeinGraph {
    let k = pairs as u32;
    let mut vertices = BTreeMap::new();
    for v in 1..=k {
        vertices.insert(VertexId(v), VertexKind::Source);
        vertices.insert(VertexId(k + v), VertexKind::Sink);
    }
    let mut sink_ports: Vec<PortRef> = (1..=k)
        .flat_map(|v| (1..=n).map(move |p| PortRef::new(k + v, p)))
        .collect();
    sink_ports.shuffle(rng);
    let edges = (1..=k)
        .flat_map(|v| (1..=n).map(move |p| PortRef::new(v, p)))
        .zip(sink_ports)
        .map(|(from, to)| Edge {
            from,
            to,
            label: random_word(rng, generators, max_label_len),
        })
        .collect();
    let loops = (0..rng.gen_range(0..=2))
        .map(|_| necklace_of(&random_word(rng, generators, max_label_len)))
        .collect();
    SkeinGraph::new(n, vertices, edges, loops, None).expect("random wiring is a valid graph")
}

/// Random relative graph: a random closed part plus a random through-strand.
pub fn random_relative_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    pairs: usize,
    generators: u32,
    max_label_len: usize,
) -> SkeinGraph {
    let closed = random_graph(rng, n, pairs, generators, max_label_len);
    SkeinGraph {
        relative: Some(random_word(rng, generators, max_label_len)),
        ..closed
    }
}

/// Formal linear combination of graphs sharing `n` and relativity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCombination {
    n: usize,
    field: Field,
    terms: BTreeMap<SkeinGraph, Scalar>,
}

impl GraphCombination {
    pub fn zero(n: usize, field: Field) -> Self {
        GraphCombination {
            n,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(d: SkeinGraph, field: Field) -> Self {
        let mut c = GraphCombination::zero(d.n, field);
        c.add(d, field.one());
        c
    }

    pub fn terms(&self) -> &BTreeMap<SkeinGraph, Scalar> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, d: SkeinGraph, c: Scalar) {
        debug_assert_eq!(d.n, self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&d) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&d);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(d, c);
            }
        }
    }
}

/// Replaces `source` and `sink` by `Σ_σ ε(σ)·D_σ`, where `D_σ` joins the
/// edge leaving source port `j` to the edge entering sink port `σ(j)`.
pub fn resolve_pair(
    d: &SkeinGraph,
    source: VertexId,
    sink: VertexId,
    field: Field,
) -> Result<GraphCombination> {
    match d.vertices.get(&source) {
        Some(VertexKind::Source) => {}
        Some(_) => return Err(Error::WrongVertexKind(source.to_string())),
        None => return Err(Error::UnknownVertex(source.to_string())),
    }
    match d.vertices.get(&sink) {
        Some(VertexKind::Sink) => {}
        Some(_) => return Err(Error::WrongVertexKind(sink.to_string())),
        None => return Err(Error::UnknownVertex(sink.to_string())),
    }
    let n = d.n;
    let mut out_at = vec![usize::MAX; n + 1];
    let mut in_at = vec![usize::MAX; n + 1];
    for (i, e) in d.edges.iter().enumerate() {
        if e.from.vertex == source {
            out_at[e.from.port] = i;
        }
        if e.to.vertex == sink {
            in_at[e.to.port] = i;
        }
    }
    let mut vertices = d.vertices.clone();
    vertices.remove(&source);
    vertices.remove(&sink);

    let mut combo = GraphCombination::zero(n, field);
    let mut next = vec![usize::MAX; d.edges.len()];
    for sigma in perm::enumerate(n)? {
        for j in 1..=n {
            next[in_at[sigma.apply(j)]] = out_at[j];
        }
        let mut visited = vec![false; d.edges.len()];
        let mut edges = Vec::new();
        let mut loops = d.loops.clone();
        let mut trivial_loops = 0u32;
        let chain_label = |chain: &[usize]| product(chain.iter().rev().map(|&i| &d.edges[i].label));

        for (start, e) in d.edges.iter().enumerate() {
            if e.from.vertex == source {
                continue;
            }
            let mut chain = vec![start];
            let mut cur = start;
            while d.edges[cur].to.vertex == sink {
                cur = next[cur];
                chain.push(cur);
            }
            for &i in &chain {
                visited[i] = true;
            }
            edges.push(Edge {
                from: e.from,
                to: d.edges[cur].to,
                label: chain_label(&chain),
            });
        }
        for start in 0..d.edges.len() {
            if visited[start] {
                continue;
            }
            let mut chain = Vec::new();
            let mut cur = start;
            loop {
                visited[cur] = true;
                chain.push(cur);
                cur = next[cur];
                if cur == start {
                    break;
                }
            }
            let class = necklace_of(&chain_label(&chain));
            if class.is_identity() {
                trivial_loops += 1;
            } else {
                loops.push(class);
            }
        }
        edges.sort();
        loops.sort();
        let graph = SkeinGraph {
            n,
            vertices: vertices.clone(),
            edges,
            loops,
            relative: d.relative.clone(),
        };
        let coeff = field
            .from_i64(sigma.sign() as i64)
            .scale_i64((n as i64).pow(trivial_loops));
        combo.add(graph, coeff);
    }
    Ok(combo)
}

/// Order in which source/sink pairs are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Lowest-id source with lowest-id sink.
    LowestFirst,
    /// Highest-id source with highest-id sink.
    HighestFirst,
    /// The first listed pair still present; falls back to `LowestFirst`.
    Sequence(Vec<(VertexId, VertexId)>),
}

impl Strategy {
    fn pick(&self, d: &SkeinGraph) -> (VertexId, VertexId) {
        let lowest = || {
            (
                d.sources().next().expect("graph has a source"),
                d.sinks().next().expect("graph has a sink"),
            )
        };
        match self {
            Strategy::LowestFirst => lowest(),
            Strategy::HighestFirst => (
                d.sources().last().expect("graph has a source"),
                d.sinks().last().expect("graph has a sink"),
            ),
            Strategy::Sequence(pairs) => pairs
                .iter()
                .copied()
                .find(|(s, t)| d.vertices.contains_key(s) && d.vertices.contains_key(t))
                .unwrap_or_else(lowest),
        }
    }
}

/// The source/sink pairs a strategy resolves, in resolution order.
pub fn pairing(d: &SkeinGraph, strategy: &Strategy) -> Vec<(VertexId, VertexId)> {
    let mut g = d.absolute_part();
    let mut out = Vec::new();
    while g.has_vertices() {
        let (s, t) = strategy.pick(&g);
        g.vertices.remove(&s);
        g.vertices.remove(&t);
        out.push((s, t));
    }
    out
}

/// Every resolution order: all pairings of sources with sinks, in every
/// order (`(k!)²` sequences for `k` pairs).
pub fn all_orderings(d: &SkeinGraph) -> Vec<Strategy> {
    let sources: Vec<VertexId> = d.sources().collect();
    let sinks: Vec<VertexId> = d.sinks().collect();
    let k = sources.len();
    let perms = perm::enumerate(k).expect("small graph");
    let mut out = Vec::new();
    for ps in &perms {
        for pt in &perms {
            let seq = (1..=k)
                .map(|i| (sources[ps.apply(i) - 1], sinks[pt.apply(i) - 1]))
                .collect();
            out.push(Strategy::Sequence(seq));
        }
    }
    out
}

fn loops_monomial(d: &SkeinGraph, field: Field) -> TracePolynomial {
    TracePolynomial::product_of_loops(d.n, field, d.loops.iter())
}

fn resolve_fully(d: &SkeinGraph, strategy: &Strategy, field: Field) -> Result<TracePolynomial> {
    let mut result = TracePolynomial::zero(d.n, field);
    let mut pending = GraphCombination::single(d.clone(), field);
    while !pending.is_empty() {
        let mut next = GraphCombination::zero(d.n, field);
        for (g, c) in pending.terms {
            if !g.has_vertices() {
                result = &result + &loops_monomial(&g, field).scale(&c)?;
                continue;
            }
            let (s, t) = strategy.pick(&g);
            for (h, c2) in resolve_pair(&g, s, t, field)?.terms {
                next.add(h, &c * &c2);
            }
        }
        pending = next;
    }
    Ok(result)
}

/// Resolves every source/sink pair and reads off loops as trace variables.
pub fn normalize(d: &SkeinGraph, strategy: &Strategy) -> Result<TracePolynomial> {
    normalize_in(d, strategy, Field::Rational)
}

pub fn normalize_in(d: &SkeinGraph, strategy: &Strategy, field: Field) -> Result<TracePolynomial> {
    if d.is_relative() {
        return Err(Error::NotAbsolute);
    }
    resolve_fully(d, strategy, field)
}

/// Normal form of a relative graph: `(χ of the closed part, through word)`.
pub fn normalize_relative(d: &SkeinGraph, strategy: &Strategy) -> Result<MatrixExpression> {
    normalize_relative_in(d, strategy, Field::Rational)
}

pub fn normalize_relative_in(
    d: &SkeinGraph,
    strategy: &Strategy,
    field: Field,
) -> Result<MatrixExpression> {
    let through = d.relative.clone().ok_or(Error::NotRelative)?;
    let closed = resolve_fully(&d.absolute_part(), strategy, field)?;
    Ok(MatrixExpression::term(closed, through))
}
