//! Seeded batch verification of the trace identities and of the
//! resolution calculus, with counterexamples reported verbatim.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{normalize_in, random_graph, slide_vertex, Strategy, VertexId};
use crate::identities::{
    alternating_matrix_sum, alternating_trace_sum, antisymmetrizer_sum, det_skein_unit_check,
    det_via_traces_matrix, fricke_klein_at, sl3_identity18_at,
};
use crate::io::{graph_to_json, representation_to_json};
use crate::matrix::{ExactMatrix, Representation};
use crate::perm::factorial;
use crate::scalar::{Field, Scalar};
use crate::tensor::{eval_mexp, eval_poly, theta_contract};
use crate::word::{random_word, Word};

/// Names accepted by `run_check`.
pub const CHECK_NAMES: &[&str] = &[
    "fricke-klein",
    "sl3-18",
    "fundamental-F",
    "fundamental-G",
    "det-traces",
    "det-unit",
    "cor45",
    "oracle-equivalence",
    "slide",
];

const WORD_GENERATORS: u32 = 2;
const MAX_WORD_LEN: usize = 3;

#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Size parameter of the identity (matrix size it is stated for).
    pub n: usize,
    /// Dimension of the sampled representations; defaults to `n`.
    pub dim: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub field: Field,
    /// Scale every sampled image by 2, breaking `det = 1`.
    pub non_unimodular: bool,
}

impl CheckConfig {
    pub fn new(n: usize, samples: usize, seed: u64) -> Self {
        CheckConfig {
            n,
            dim: None,
            samples,
            seed,
            field: Field::Rational,
            non_unimodular: false,
        }
    }

    fn dim(&self) -> usize {
        self.dim.unwrap_or(self.n)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub sample: usize,
    pub inputs: Vec<Value>,
    pub representation: Option<Value>,
    pub value: String,
    pub expected: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub n: usize,
    pub dim: usize,
    pub field: String,
    pub seed: u64,
    pub samples: usize,
    pub non_unimodular: bool,
    pub passed_samples: usize,
    pub failed_samples: usize,
    pub pass: bool,
    pub counterexamples: Vec<Counterexample>,
}

fn words(rng: &mut ChaCha8Rng, count: usize) -> Vec<Word> {
    (0..count)
        .map(|_| loop {
            let w = random_word(rng, WORD_GENERATORS, MAX_WORD_LEN);
            if !w.is_identity() {
                break w;
            }
        })
        .collect()
}

fn word_values(ws: &[Word]) -> Vec<Value> {
    ws.iter().map(|w| Value::String(w.to_string())).collect()
}

fn representation(
    rng: &mut ChaCha8Rng,
    cfg: &CheckConfig,
    generators: u32,
) -> Result<Representation> {
    let r = Representation::random_with(rng, cfg.dim(), generators, cfg.field);
    if !cfg.non_unimodular {
        return Ok(r);
    }
    let two = cfg.field.from_i64(2);
    let images = r
        .images()
        .iter()
        .map(|(g, m)| Ok((*g, m.scale(&two)?)))
        .collect::<Result<_>>()?;
    Representation::with_any_determinant(cfg.dim(), images)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, field: Field) -> Result<ExactMatrix> {
    let rows = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match field {
                    Field::Rational => {
                        field.from_ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))
                    }
                    Field::Prime(p) => Ok(Scalar::Mod {
                        value: rng.gen_range(0..p),
                        modulus: p,
                    }),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_rows(rows)
}

struct Outcome {
    ok: bool,
    inputs: Vec<Value>,
    representation: Option<Value>,
    value: String,
    expected: String,
}

fn zero_outcome(value: Scalar, inputs: Vec<Value>, r: &Representation) -> Outcome {
    Outcome {
        ok: value.is_zero(),
        inputs,
        representation: Some(representation_to_json(r)),
        value: value.to_string(),
        expected: "0".into(),
    }
}

fn sample(name: &str, cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = cfg.n;
    let dim = cfg.dim();
    Ok(match name {
        "fricke-klein" => {
            let ws = words(rng, 2);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let v = eval_poly(&fricke_klein_at(&ws[0], &ws[1], dim), &r)?;
            zero_outcome(v, word_values(&ws), &r)
        }
        "sl3-18" => {
            let ws = words(rng, 4);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let v = eval_poly(&sl3_identity18_at(&ws[0], &ws[1], &ws[2], &ws[3], dim), &r)?;
            zero_outcome(v, word_values(&ws), &r)
        }
        "fundamental-F" => {
            let ws = words(rng, n + 1);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let v = eval_poly(&alternating_trace_sum(&ws, dim)?, &r)?;
            zero_outcome(v, word_values(&ws), &r)
        }
        "fundamental-G" => {
            let ws = words(rng, n);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let m = eval_mexp(&alternating_matrix_sum(&ws, dim)?, &r)?;
            Outcome {
                ok: m.is_zero(),
                inputs: word_values(&ws),
                representation: Some(representation_to_json(&r)),
                value: m.to_string(),
                expected: "zero matrix".into(),
            }
        }
        "det-traces" => {
            let m = random_matrix(rng, dim, cfg.field)?;
            let via = det_via_traces_matrix(&m)?;
            let direct = m.det_cofactor();
            Outcome {
                ok: via == direct,
                inputs: vec![Value::String(m.to_string())],
                representation: None,
                value: via.to_string(),
                expected: direct.to_string(),
            }
        }
        "det-unit" => {
            let ws = words(rng, 1);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let v = det_skein_unit_check(&ws[0], &r)?;
            Outcome {
                ok: v.is_one(),
                inputs: word_values(&ws),
                representation: Some(representation_to_json(&r)),
                value: v.to_string(),
                expected: "1".into(),
            }
        }
        "cor45" => {
            let s = antisymmetrizer_sum(n)?;
            let f = factorial(n) as i128;
            Outcome {
                ok: s == f,
                inputs: vec![Value::from(n)],
                representation: None,
                value: s.to_string(),
                expected: f.to_string(),
            }
        }
        "oracle-equivalence" => {
            let pairs = rng.gen_range(1..=3);
            let d = random_graph(rng, dim, pairs, WORD_GENERATORS, MAX_WORD_LEN);
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let p = normalize_in(&d, &Strategy::LowestFirst, Field::Rational)?;
            let via = eval_poly(&p, &r)?;
            let direct = theta_contract(&d, &r)?;
            Outcome {
                ok: via == direct,
                inputs: vec![graph_to_json(&d)],
                representation: Some(representation_to_json(&r)),
                value: via.to_string(),
                expected: direct.to_string(),
            }
        }
        "slide" => {
            let pairs = rng.gen_range(1..=3);
            let d = random_graph(rng, dim, pairs, WORD_GENERATORS, MAX_WORD_LEN);
            let v = VertexId(rng.gen_range(1..=2 * pairs as u32));
            let h = words(rng, 1).pop().expect("one word");
            let slid = slide_vertex(&d, v, &h)?;
            let r = representation(rng, cfg, WORD_GENERATORS)?;
            let before = theta_contract(&d, &r)?;
            let after = theta_contract(&slid, &r)?;
            Outcome {
                ok: before == after,
                inputs: vec![
                    graph_to_json(&d),
                    Value::String(v.to_string()),
                    Value::String(h.to_string()),
                ],
                representation: Some(representation_to_json(&r)),
                value: after.to_string(),
                expected: before.to_string(),
            }
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown check `{other}`; expected one of {}",
                CHECK_NAMES.join(", ")
            )))
        }
    })
}

/// Runs `name` on `cfg.samples` seeded samples (`cor45` is a single
/// deterministic computation).
pub fn run_check(name: &str, cfg: &CheckConfig) -> Result<CheckReport> {
    if !CHECK_NAMES.contains(&name) {
        return Err(Error::Invalid(format!(
            "unknown check `{name}`; expected one of {}",
            CHECK_NAMES.join(", ")
        )));
    }
    if cfg.n == 0 || cfg.dim() == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let samples = if name == "cor45" { 1 } else { cfg.samples };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut passed = 0;
    let mut counterexamples = Vec::new();
    for i in 0..samples {
        let o = sample(name, cfg, &mut rng)?;
        if o.ok {
            passed += 1;
        } else {
            counterexamples.push(Counterexample {
                sample: i,
                inputs: o.inputs,
                representation: o.representation,
                value: o.value,
                expected: o.expected,
            });
        }
    }
    Ok(CheckReport {
        check: name.into(),
        n: cfg.n,
        dim: cfg.dim(),
        field: cfg.field.to_string(),
        seed: cfg.seed,
        samples,
        non_unimodular: cfg.non_unimodular,
        passed_samples: passed,
        failed_samples: samples - passed,
        pass: passed == samples,
        counterexamples,
    })
}
