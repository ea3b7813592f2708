use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use skein_core::charvar::{fit_all, FitAllConfig, FitStatus};
use skein_core::checks::{run_check, CheckConfig};
use skein_core::graph::{normalize_in, normalize_relative_in, SkeinGraph, Strategy};
use skein_core::io::{
    graph_from_json, mexp_from_json, mexp_to_json, poly_from_json, poly_to_json,
    representation_from_json, representation_to_json, scalar_to_json,
};
use skein_core::matrix::Representation;
use skein_core::tensor::{eval_mexp, eval_poly, theta_contract, theta_rel_contract};
use skein_core::word::enumerate_positive_necklaces;
use skein_core::{Field, MatrixExpression, Necklace, TracePolynomial};

#[derive(Parser)]
#[command(
    name = "skein",
    version,
    about = "Exact SL(n) skein calculus over free groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a graph into a trace polynomial (or a matrix expression for
    /// relative graphs).
    Resolve {
        graph: PathBuf,
        /// Coefficient field: `Q` or `Fp:<p>`.
        #[arg(long, default_value = "Q")]
        field: Field,
        /// Resolve pairs highest-numbered first instead of lowest first.
        #[arg(long)]
        highest_first: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named identity check on seeded samples.
    Check {
        /// One of: fricke-klein, sl3-18, fundamental-F, fundamental-G,
        /// det-traces, det-unit, cor45, oracle-equivalence, slide.
        name: String,
        /// Ambient dimension (defaults to the size the identity is stated for).
        #[arg(long)]
        n: Option<usize>,
        /// Dimension of the sampled representations, when it should differ
        /// from `--n`.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "Q")]
        field: Field,
        /// Scale every sampled generator image by 2, so that det ≠ 1.
        #[arg(long)]
        non_unimodular: bool,
        /// Succeed only if the identity fails on some sample.
        #[arg(long)]
        expect_fail: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List necklaces of nonempty positive words in g1..gk.
    Necklaces {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        max_len: usize,
        /// Print only the number of necklaces.
        #[arg(long)]
        count: bool,
    },
    /// Fit one trace function as a polynomial in the nine generators.
    Fit {
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Single witness field `Fp:<p>` instead of the two default primes.
        #[arg(long)]
        field: Option<Field>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit all 57 trace functions of positive words of length ≤ 7.
    FitAll {
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a polynomial, matrix expression or graph at a representation.
    Eval {
        input: PathBuf,
        /// Representation JSON; a seeded random SL(n) one is drawn otherwise.
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "Q")]
        field: Field,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Input or usage problem; reported with exit code 2.
struct Failure(String);

impl From<skein_core::Error> for Failure {
    fn from(e: skein_core::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure(format!("{}: invalid JSON: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, out: Option<&Path>) -> Result<(), Failure> {
    emit(
        &serde_json::to_string_pretty(v).expect("JSON serializes"),
        out,
    )
}

fn default_n(check: &str) -> usize {
    match check {
        "fricke-klein" | "fundamental-F" | "fundamental-G" | "oracle-equivalence" | "slide" => 2,
        _ => 3,
    }
}

fn resolve(graph: &Path, field: Field, highest_first: bool, out: Option<&Path>) -> Outcome {
    let d = graph_from_json(&read_json(graph)?)?;
    let strategy = if highest_first {
        Strategy::HighestFirst
    } else {
        Strategy::LowestFirst
    };
    let v = if d.is_relative() {
        mexp_to_json(&normalize_relative_in(&d, &strategy, field)?)
    } else {
        poly_to_json(&normalize_in(&d, &strategy, field)?)
    };
    emit_json(&v, out)?;
    Ok(ExitCode::SUCCESS)
}

fn check(name: &str, cfg: &CheckConfig, expect_fail: bool, out: Option<&Path>) -> Outcome {
    let report = run_check(name, cfg)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["expect_fail"] = json!(expect_fail);
    let ok = report.pass != expect_fail;
    v["outcome"] = json!(if ok { "pass" } else { "fail" });
    emit_json(&v, out)?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn necklaces(k: u32, max_len: usize, count: bool) -> Outcome {
    let all = enumerate_positive_necklaces(k, max_len);
    if count {
        emit(&all.len().to_string(), None)?;
    } else {
        let lines: Vec<String> = all.iter().map(|n| n.representative().to_string()).collect();
        emit(&lines.join("\n"), None)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn fit(
    target: &str,
    degree: usize,
    seed: u64,
    field: Option<Field>,
    out: Option<&Path>,
) -> Outcome {
    let target: Necklace = target
        .parse()
        .map_err(|e| Failure(format!("--target: {e}")))?;
    if target.is_identity() {
        return Err(Failure("--target: the identity is the constant 3".into()));
    }
    let mut config = FitAllConfig::new(degree, seed);
    match field {
        Some(Field::Prime(p)) => config.primes = vec![p],
        Some(Field::Rational) => {
            return Err(Failure(
                "--field: fitting needs a prime field `Fp:<p>`".into(),
            ))
        }
        None => {}
    }
    config.targets = vec![target];
    let report = fit_all(&config)?;
    let validated = report
        .targets
        .iter()
        .all(|t| t.status != FitStatus::NoFitAtDegree);
    emit(&report.to_json(), out)?;
    Ok(if validated {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn fit_all_cmd(degree: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let report = fit_all(&FitAllConfig::new(degree, seed))?;
    if let Some(p) = out {
        emit(&report.to_json(), Some(p))?;
    }
    emit(&report.to_table(), None)?;
    Ok(ExitCode::SUCCESS)
}

enum Evaluable {
    Poly(TracePolynomial),
    Mexp(MatrixExpression),
    Graph(SkeinGraph),
}

impl Evaluable {
    fn parse(v: &Value) -> Result<Self, Failure> {
        let is_graph =
            v.get("vertices").is_some() || v.get("edges").is_some() || v.get("loops").is_some();
        let is_mexp = v
            .get("terms")
            .and_then(Value::as_array)
            .is_some_and(|ts| ts.iter().any(|t| t.get("word").is_some()));
        Ok(if is_graph {
            Evaluable::Graph(graph_from_json(v)?)
        } else if is_mexp {
            Evaluable::Mexp(mexp_from_json(v)?)
        } else {
            Evaluable::Poly(poly_from_json(v)?)
        })
    }

    fn ambient(&self) -> usize {
        match self {
            Evaluable::Poly(p) => p.ambient(),
            Evaluable::Mexp(m) => m.ambient(),
            Evaluable::Graph(d) => d.ambient(),
        }
    }

    fn generators(&self) -> u32 {
        let poly_max = |p: &TracePolynomial| {
            p.necklaces()
                .map(|n| n.representative().max_generator())
                .max()
                .unwrap_or(0)
        };
        match self {
            Evaluable::Poly(p) => poly_max(p),
            Evaluable::Mexp(m) => m
                .terms()
                .iter()
                .map(|(w, c)| w.max_generator().max(poly_max(c)))
                .max()
                .unwrap_or(0),
            Evaluable::Graph(d) => d
                .edges()
                .iter()
                .map(|e| e.label.max_generator())
                .chain(d.loops().iter().map(|n| n.representative().max_generator()))
                .chain(d.through_label().map(|w| w.max_generator()))
                .max()
                .unwrap_or(0),
        }
        .max(1)
    }

    fn value(&self, r: &Representation) -> Result<Value, Failure> {
        Ok(match self {
            Evaluable::Poly(p) => scalar_to_json(&eval_poly(p, r)?),
            Evaluable::Mexp(m) => matrix_json(&eval_mexp(m, r)?),
            Evaluable::Graph(d) if d.is_relative() => matrix_json(&theta_rel_contract(d, r)?),
            Evaluable::Graph(d) => scalar_to_json(&theta_contract(d, r)?),
        })
    }
}

fn matrix_json(m: &skein_core::matrix::ExactMatrix) -> Value {
    Value::Array(
        m.rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(scalar_to_json).collect()))
            .collect(),
    )
}

fn eval(input: &Path, rep: Option<&Path>, seed: u64, field: Field, out: Option<&Path>) -> Outcome {
    let item = Evaluable::parse(&read_json(input)?)?;
    let r = match rep {
        Some(p) => representation_from_json(&read_json(p)?, false)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Representation::random_with(&mut rng, item.ambient(), item.generators(), field)
        }
    };
    if r.dim() != item.ambient() {
        return Err(Failure(format!(
            "$.n: representation has dimension {}, input has n={}",
            r.dim(),
            item.ambient()
        )));
    }
    let v = json!({
        "seed": seed,
        "representation": representation_to_json(&r),
        "value": item.value(&r)?,
    });
    emit_json(&v, out)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Resolve {
            graph,
            field,
            highest_first,
            out,
        } => resolve(&graph, field, highest_first, out.as_deref()),
        Command::Check {
            name,
            n,
            dim,
            samples,
            seed,
            field,
            non_unimodular,
            expect_fail,
            out,
        } => {
            let cfg = CheckConfig {
                n: n.unwrap_or_else(|| default_n(&name)),
                dim,
                samples,
                seed,
                field,
                non_unimodular,
            };
            check(&name, &cfg, expect_fail, out.as_deref())
        }
        Command::Necklaces { k, max_len, count } => necklaces(k, max_len, count),
        Command::Fit {
            target,
            degree,
            seed,
            field,
            out,
        } => fit(&target, degree, seed, field, out.as_deref()),
        Command::FitAll { degree, seed, out } => fit_all_cmd(degree, seed, out.as_deref()),
        Command::Eval {
            input,
            rep,
            seed,
            field,
            out,
        } => eval(&input, rep.as_deref(), seed, field, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
