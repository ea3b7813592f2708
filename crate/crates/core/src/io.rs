//! JSON forms of polynomials, matrix expressions, graphs and
//! representations. Parse errors name the offending field by path.
//!
//! * polynomial: `{"n":3,"field":"Q"|{"p":P},"terms":[{"coeff":"a/b","monomial":[["g1 g2",2]]}]}`
//! * matrix expression: `{"n":3,"field":..,"terms":[{"word":"g1","coeff":[<polynomial terms>]}]}`
//! * graph: `{"n":3,"relative":false|{"in_label":"g1"},"vertices":[{"id":"v1","kind":"source"}],
//!   "edges":[{"from":["v1",1],"to":["v2",2],"label":"g1 g2^-1"}],"loops":["g1 g2"]}`
//! * representation: `{"n":2,"field":"Q","images":{"1":[["1","1"],["0","1"]]}}`
//!
//! Words use the `g1 g2^-1` text syntax; the empty string is the identity.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::graph::{Edge, PortRef, SkeinGraph, VertexId, VertexKind};
use crate::matrix::{ExactMatrix, Representation};
use crate::poly::{MatrixExpression, TraceMonomial, TracePolynomial};
use crate::scalar::{Field, Scalar};
use crate::word::{necklace_of, Necklace, Word};

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn field_of<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(&format!("{path}.{key}"), "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn unsigned(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn word(v: &Value, path: &str) -> Result<Word> {
    string(v, path)?.parse().map_err(|e| err(path, e))
}

fn dimension(obj: &Map<String, Value>, path: &str) -> Result<usize> {
    let n = unsigned(field_of(obj, "n", path)?, &format!("{path}.n"))? as usize;
    if n == 0 {
        return Err(err(&format!("{path}.n"), "must be positive"));
    }
    Ok(n)
}

pub fn field_to_json(field: Field) -> Value {
    match field {
        Field::Rational => json!("Q"),
        Field::Prime(p) => json!({ "p": p }),
    }
}

pub fn field_from_json(v: &Value, path: &str) -> Result<Field> {
    match v {
        Value::String(s) if s == "Q" => Ok(Field::Rational),
        Value::Object(o) => {
            let p = unsigned(field_of(o, "p", path)?, &format!("{path}.p"))?;
            Field::prime(p).map_err(|e| err(&format!("{path}.p"), e))
        }
        _ => Err(err(path, "expected \"Q\" or {\"p\": <prime>}")),
    }
}

fn word_text(w: &Word) -> String {
    w.to_string()
}

fn terms_to_json(p: &TracePolynomial) -> Value {
    Value::Array(
        p.terms()
            .iter()
            .map(|(m, c)| {
                let monomial: Vec<Value> = m
                    .factors()
                    .iter()
                    .map(|(nk, e)| json!([word_text(nk.representative()), e]))
                    .collect();
                json!({ "coeff": c.to_string(), "monomial": monomial })
            })
            .collect(),
    )
}

fn terms_from_json(v: &Value, n: usize, field: Field, path: &str) -> Result<TracePolynomial> {
    let mut out = TracePolynomial::zero(n, field);
    for (i, t) in array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let obj = object(t, &tp)?;
        let cp = format!("{tp}.coeff");
        let coeff = field
            .parse_scalar(string(field_of(obj, "coeff", &tp)?, &cp)?)
            .map_err(|e| err(&cp, e))?;
        let mp = format!("{tp}.monomial");
        let mut factors: Vec<(Necklace, u32)> = Vec::new();
        let mut scale = field.one();
        for (j, f) in array(field_of(obj, "monomial", &tp)?, &mp)?
            .iter()
            .enumerate()
        {
            let fp = format!("{mp}[{j}]");
            let pair = array(f, &fp)?;
            if pair.len() != 2 {
                return Err(err(&fp, "expected [word, exponent]"));
            }
            let nk = necklace_of(&word(&pair[0], &format!("{fp}[0]"))?);
            let e = unsigned(&pair[1], &format!("{fp}[1]"))? as u32;
            if nk.is_identity() {
                scale = &scale * &field.from_i64(n as i64).pow(e);
            } else {
                factors.push((nk, e));
            }
        }
        let term = TracePolynomial::monomial(
            n,
            field,
            TraceMonomial::from_factors(factors),
            &coeff * &scale,
        );
        out = &out + &term;
    }
    Ok(out)
}

pub fn poly_to_json(p: &TracePolynomial) -> Value {
    json!({
        "n": p.ambient(),
        "field": field_to_json(p.field()),
        "terms": terms_to_json(p),
    })
}

pub fn poly_from_json(v: &Value) -> Result<TracePolynomial> {
    let obj = object(v, "$")?;
    let n = dimension(obj, "$")?;
    let field = field_from_json(field_of(obj, "field", "$")?, "$.field")?;
    terms_from_json(field_of(obj, "terms", "$")?, n, field, "$.terms")
}

pub fn mexp_to_json(m: &MatrixExpression) -> Value {
    let terms: Vec<Value> = m
        .terms()
        .iter()
        .map(|(w, c)| json!({ "word": word_text(w), "coeff": terms_to_json(c) }))
        .collect();
    json!({
        "n": m.ambient(),
        "field": field_to_json(m.field()),
        "terms": terms,
    })
}

pub fn mexp_from_json(v: &Value) -> Result<MatrixExpression> {
    let obj = object(v, "$")?;
    let n = dimension(obj, "$")?;
    let field = field_from_json(field_of(obj, "field", "$")?, "$.field")?;
    let mut out = MatrixExpression::zero(n, field);
    for (i, t) in array(field_of(obj, "terms", "$")?, "$.terms")?
        .iter()
        .enumerate()
    {
        let tp = format!("$.terms[{i}]");
        let o = object(t, &tp)?;
        let w = word(field_of(o, "word", &tp)?, &format!("{tp}.word"))?;
        let c = terms_from_json(field_of(o, "coeff", &tp)?, n, field, &format!("{tp}.coeff"))?;
        out = out.checked_add(&MatrixExpression::term(c, w))?;
    }
    Ok(out)
}

pub fn graph_to_json(d: &SkeinGraph) -> Value {
    let vertices: Vec<Value> = d
        .vertices()
        .iter()
        .map(|(v, k)| {
            json!({
                "id": v.to_string(),
                "kind": match k { VertexKind::Source => "source", VertexKind::Sink => "sink" },
            })
        })
        .collect();
    let edges: Vec<Value> = d
        .edges()
        .iter()
        .map(|e| {
            json!({
                "from": [e.from.vertex.to_string(), e.from.port],
                "to": [e.to.vertex.to_string(), e.to.port],
                "label": word_text(&e.label),
            })
        })
        .collect();
    let loops: Vec<Value> = d
        .loops()
        .iter()
        .map(|l| json!(word_text(l.representative())))
        .collect();
    let relative = match d.through_label() {
        Some(w) => json!({ "in_label": word_text(w) }),
        None => json!(false),
    };
    json!({
        "n": d.ambient(),
        "relative": relative,
        "vertices": vertices,
        "edges": edges,
        "loops": loops,
    })
}

/// Vertex ids are arbitrary strings; they are numbered in order of
/// appearance.
pub fn graph_from_json(v: &Value) -> Result<SkeinGraph> {
    let obj = object(v, "$")?;
    let n = dimension(obj, "$")?;
    let relative = match obj.get("relative") {
        None | Some(Value::Bool(false)) | Some(Value::Null) => None,
        Some(Value::Object(o)) => Some(word(
            field_of(o, "in_label", "$.relative")?,
            "$.relative.in_label",
        )?),
        Some(_) => {
            return Err(err(
                "$.relative",
                "expected false or {\"in_label\": <word>}",
            ))
        }
    };
    let mut ids: BTreeMap<String, VertexId> = BTreeMap::new();
    let mut vertices = BTreeMap::new();
    let vlist = match obj.get("vertices") {
        Some(v) => array(v, "$.vertices")?.as_slice(),
        None => &[],
    };
    for (i, vv) in vlist.iter().enumerate() {
        let vp = format!("$.vertices[{i}]");
        let o = object(vv, &vp)?;
        let id = string(field_of(o, "id", &vp)?, &format!("{vp}.id"))?.to_string();
        let kind = match string(field_of(o, "kind", &vp)?, &format!("{vp}.kind"))? {
            "source" => VertexKind::Source,
            "sink" => VertexKind::Sink,
            other => {
                return Err(err(
                    &format!("{vp}.kind"),
                    format!("expected \"source\" or \"sink\", got \"{other}\""),
                ))
            }
        };
        let vid = VertexId(ids.len() as u32 + 1);
        if ids.insert(id.clone(), vid).is_some() {
            return Err(err(
                &format!("{vp}.id"),
                format!("duplicate vertex id \"{id}\""),
            ));
        }
        vertices.insert(vid, kind);
    }
    let port = |v: &Value, path: &str| -> Result<PortRef> {
        let pair = array(v, path)?;
        if pair.len() != 2 {
            return Err(err(path, "expected [vertex id, port]"));
        }
        let id = string(&pair[0], &format!("{path}[0]"))?;
        let vertex = *ids
            .get(id)
            .ok_or_else(|| err(&format!("{path}[0]"), format!("unknown vertex \"{id}\"")))?;
        let p = unsigned(&pair[1], &format!("{path}[1]"))? as usize;
        if p == 0 || p > n {
            return Err(err(
                &format!("{path}[1]"),
                format!("port must be in 1..={n}"),
            ));
        }
        Ok(PortRef { vertex, port: p })
    };
    let mut edges = Vec::new();
    let elist = match obj.get("edges") {
        Some(v) => array(v, "$.edges")?.as_slice(),
        None => &[],
    };
    for (i, ev) in elist.iter().enumerate() {
        let ep = format!("$.edges[{i}]");
        let o = object(ev, &ep)?;
        edges.push(Edge {
            from: port(field_of(o, "from", &ep)?, &format!("{ep}.from"))?,
            to: port(field_of(o, "to", &ep)?, &format!("{ep}.to"))?,
            label: match o.get("label") {
                Some(l) => word(l, &format!("{ep}.label"))?,
                None => Word::identity(),
            },
        });
    }
    let mut loops = Vec::new();
    if let Some(l) = obj.get("loops") {
        for (i, lv) in array(l, "$.loops")?.iter().enumerate() {
            loops.push(necklace_of(&word(lv, &format!("$.loops[{i}]"))?));
        }
    }
    SkeinGraph::new(n, vertices, edges, loops, relative).map_err(|e| err("$", e))
}

pub fn representation_to_json(r: &Representation) -> Value {
    let images: Map<String, Value> = r
        .images()
        .iter()
        .map(|(g, m)| {
            let rows: Vec<Value> = m
                .rows()
                .iter()
                .map(|row| Value::Array(row.iter().map(|s| json!(s.to_string())).collect()))
                .collect();
            (g.to_string(), Value::Array(rows))
        })
        .collect();
    json!({
        "n": r.dim(),
        "field": field_to_json(r.field()),
        "images": images,
    })
}

/// Parses a representation; every image must have determinant 1 unless
/// `allow_any_determinant` is set.
pub fn representation_from_json(v: &Value, allow_any_determinant: bool) -> Result<Representation> {
    let obj = object(v, "$")?;
    let n = dimension(obj, "$")?;
    let field = field_from_json(field_of(obj, "field", "$")?, "$.field")?;
    let mut images = BTreeMap::new();
    for (key, mv) in object(field_of(obj, "images", "$")?, "$.images")? {
        let mp = format!("$.images.{key}");
        let g: u32 = key
            .parse()
            .ok()
            .filter(|g| *g > 0)
            .ok_or_else(|| err(&mp, "generator keys must be positive integers"))?;
        let rows = array(mv, &mp)?;
        if rows.len() != n {
            return Err(err(&mp, format!("expected {n} rows")));
        }
        let mut parsed = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            let rp = format!("{mp}[{i}]");
            let entries = array(row, &rp)?;
            if entries.len() != n {
                return Err(err(&rp, format!("expected {n} entries")));
            }
            let mut out = Vec::with_capacity(n);
            for (j, e) in entries.iter().enumerate() {
                let ep = format!("{rp}[{j}]");
                out.push(
                    field
                        .parse_scalar(string(e, &ep)?)
                        .map_err(|x| err(&ep, x))?,
                );
            }
            parsed.push(out);
        }
        let m = ExactMatrix::from_rows(parsed).map_err(|e| err(&mp, e))?;
        if !allow_any_determinant && !m.det_cofactor().is_one() {
            return Err(err(&mp, "determinant is not 1"));
        }
        images.insert(g, m);
    }
    Representation::with_any_determinant(n, images).map_err(|e| err("$.images", e))
}

/// Serializes a scalar as its exact string.
pub fn scalar_to_json(s: &Scalar) -> Value {
    json!(s.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{edge_graph, normalize, theta_graph, Strategy};

    const Q: Field = Field::Rational;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn polynomial_round_trip() {
        let p = &(&TracePolynomial::chi(3, Q, &w("g1 g2")).pow(2)
            * &TracePolynomial::chi(3, Q, &w("g1")))
            - &TracePolynomial::constant(3, Q.from_ratio(3, 2).unwrap());
        let v = poly_to_json(&p);
        assert_eq!(poly_from_json(&v).unwrap(), p);
        let text = v.to_string();
        assert!(text.contains("\"field\":\"Q\""));
        assert!(text.contains("[\"g1 g2\",2]"));
        assert!(text.contains("\"-3/2\""));

        let fp = Field::prime(101).unwrap();
        let q = TracePolynomial::chi(2, fp, &w("g1")).scale_i64(5);
        let v = poly_to_json(&q);
        assert_eq!(v["field"], json!({"p": 101}));
        assert_eq!(poly_from_json(&v).unwrap(), q);
    }

    #[test]
    fn identity_loops_fold_on_input() {
        let v = json!({"n": 3, "field": "Q", "terms": [{"coeff": "1", "monomial": [["", 2]]}]});
        assert_eq!(
            poly_from_json(&v).unwrap(),
            TracePolynomial::from_i64(3, Q, 9)
        );
    }

    #[test]
    fn matrix_expression_round_trip() {
        let m = MatrixExpression::term(TracePolynomial::chi(3, Q, &w("g2")), Word::identity())
            .checked_add(&MatrixExpression::word(3, Q, w("g1")))
            .unwrap();
        assert_eq!(mexp_from_json(&mexp_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn graph_round_trip_and_parse() {
        let d = theta_graph(w("g1"), w("g2^-1"));
        assert_eq!(graph_from_json(&graph_to_json(&d)).unwrap(), d);
        let rel = edge_graph(w("g1"), 3);
        assert_eq!(graph_from_json(&graph_to_json(&rel)).unwrap(), rel);

        let v = json!({
            "n": 2, "relative": false,
            "vertices": [{"id": "w", "kind": "source"}, {"id": "v", "kind": "sink"}],
            "edges": [
                {"from": ["w", 1], "to": ["v", 1], "label": "g1"},
                {"from": ["w", 2], "to": ["v", 2], "label": "g2"}
            ],
            "loops": []
        });
        let parsed = graph_from_json(&v).unwrap();
        assert_eq!(
            normalize(&parsed, &Strategy::LowestFirst).unwrap(),
            normalize(&theta_graph(w("g1"), w("g2")), &Strategy::LowestFirst).unwrap()
        );
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad_port = json!({
            "n": 2, "vertices": [{"id": "a", "kind": "source"}, {"id": "b", "kind": "sink"}],
            "edges": [{"from": ["a", 3], "to": ["b", 1], "label": "g1"}]
        });
        let e = graph_from_json(&bad_port).unwrap_err().to_string();
        assert!(e.contains("$.edges[0].from[1]"), "{e}");

        let bad_kind = json!({"n": 2, "vertices": [{"id": "a", "kind": "middle"}]});
        assert!(graph_from_json(&bad_kind)
            .unwrap_err()
            .to_string()
            .contains("$.vertices[0].kind"));

        let bad_label = json!({
            "n": 1, "vertices": [{"id": "a", "kind": "source"}, {"id": "b", "kind": "sink"}],
            "edges": [{"from": ["a", 1], "to": ["b", 1], "label": "x7"}]
        });
        assert!(graph_from_json(&bad_label)
            .unwrap_err()
            .to_string()
            .contains("$.edges[0].label"));

        let missing_n = json!({"field": "Q", "terms": []});
        assert!(poly_from_json(&missing_n)
            .unwrap_err()
            .to_string()
            .contains("$.n"));

        let bad_coeff = json!({"n": 2, "field": "Q", "terms": [{"coeff": "1/0", "monomial": []}]});
        assert!(poly_from_json(&bad_coeff)
            .unwrap_err()
            .to_string()
            .contains("$.terms[0].coeff"));
    }

    #[test]
    fn representation_round_trip() {
        let v = json!({"n": 2, "field": "Q", "images": {"1": [["1","1"],["0","1"]], "2": [["1","0"],["1","1"]]}});
        let r = representation_from_json(&v, false).unwrap();
        assert_eq!(representation_to_json(&r), v);
        let bad = json!({"n": 2, "field": "Q", "images": {"1": [["2","0"],["0","1"]]}});
        assert!(representation_from_json(&bad, false)
            .unwrap_err()
            .to_string()
            .contains("$.images.1"));
        assert!(representation_from_json(&bad, true).is_ok());
    }
}
