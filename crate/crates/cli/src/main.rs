//! commlen: generate, factor and verify commutator certificates over quaternion algebras.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commlen::budget::{kappa_p, s_of};
use commlen::certify::{
    corollary1_bound, corollary2_constant, factor_commutators_e, factor_commutators_gl,
    lower_extract, make_instance, random_cert, stable_single_commutator, theorem1_bound,
    upper_bounds,
};
use commlen::error::Error;
use commlen::json::{
    algebra_from_arg, algebra_from_json, algebra_to_json, cert_from_json, cert_to_json,
    form_from_json, form_to_json, instance_from_json, instance_to_json, object, pairs_from_json,
    with_report, JsonElem,
};
use commlen::{Algebra, BasedInstance, MatCert, MatD, Quat, QuatCert};

mod selftest;

#[derive(Parser)]
#[command(
    name = "commlen",
    version,
    about = "Commutator certificates in GL(n, D) over rational quaternion algebras",
    after_help = "EXAMPLES:\n\
                  \n  commlen gen --n 3 --c 3 --seed 7 --out inst.json\
                  \n  commlen factor inst.json --mode gl\
                  \n  commlen decompose inst.json\
                  \n  commlen bounds --n 4 --c 8 --d 1\
                  \n  commlen selftest --verify cert.json"
)]
struct Cli {
    /// Algebra parameters "a,b" for (a, b | Q)
    #[arg(
        long,
        global = true,
        default_value = "-1,-1",
        allow_hyphen_values = true
    )]
    algebra: String,
    /// Matrix size
    #[arg(long, global = true, default_value_t = 3)]
    n: usize,
    /// Seed for every randomized step
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the property suite at n = 2, 3, 4, or re-verify an emitted file
    Selftest {
        /// Re-verify every JSON line of this file instead
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Cases per relation and size
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
    /// Write a matrix as head * u1 * v * u2 and check the reassembly
    Decompose { path: PathBuf },
    /// Extract a certificate for tau from commutators multiplying to diag(1, ..., 1, tau)
    CertifyLower { path: PathBuf },
    /// Factor an instance into few commutators
    Factor {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Gl)]
        mode: Mode,
    },
    /// Print the bound table for n, c and d
    Bounds {
        #[arg(long, default_value_t = 1)]
        c: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Generate a seeded instance with c commutators in delta
    Gen {
        #[arg(long, default_value_t = 1)]
        c: usize,
        /// Use identity triangular parts and gamma
        #[arg(long)]
        diagonal: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gl,
    E,
    Stable,
}

/// Command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    pub fn verification(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Failure {
            code: 3,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Verification(_) => 2,
            Error::Internal(_) | Error::SearchExhausted(_) => 4,
            _ => 3,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn read_json(path: &Path) -> CmdResult<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))?;
    let text = text.trim();
    serde_json::from_str(text)
        .or_else(|_| {
            serde_json::from_str(text.lines().find(|l| !l.trim().is_empty()).unwrap_or(""))
        })
        .map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))
}

/// Algebra from the document, else from `--algebra`.
fn algebra_of(doc: &Value, fallback: &str) -> CmdResult<Arc<Algebra>> {
    Ok(match doc.get("algebra") {
        Some(a) => algebra_from_json(a)?,
        None => algebra_from_arg(fallback)?,
    })
}

fn field<'a>(doc: &'a Value, key: &str) -> CmdResult<&'a Value> {
    doc.get(key)
        .ok_or_else(|| Failure::precondition(format!("missing field \"{key}\"")))
}

fn cmd_gen(cli: &Cli, c: usize, diagonal: bool) -> CmdResult<Value> {
    let alg = algebra_from_arg(&cli.algebra)?;
    let inst = if diagonal {
        BasedInstance::diagonal(
            cli.n,
            random_cert(&mut commlen::random::seeded(cli.seed), &alg, c),
        )?
    } else {
        make_instance(&alg, cli.seed, cli.n, c)?.1
    };
    let mut doc = instance_to_json(&inst);
    doc["kind"] = json!("instance");
    doc["seed"] = json!(cli.seed);
    doc["element"] = inst.element()?.to_json();
    Ok(doc)
}

fn cmd_decompose(cli: &Cli, path: &Path) -> CmdResult<Value> {
    let doc = read_json(path)?;
    let alg = algebra_of(&doc, &cli.algebra)?;
    let m = doc
        .get("matrix")
        .or_else(|| doc.get("element"))
        .ok_or_else(|| Failure::precondition("missing field \"matrix\""))?;
    let g = MatD::from_json(&alg, m)?;
    let (head, form) = commlen::normalform::decompose_huvu(&g)?;
    let back = MatD::diag(&alg, &head).try_mul(&form.eval()?)?;
    if back != g {
        return Err(Failure::from(Error::Internal(
            "decomposition does not reassemble".into(),
        )));
    }
    Ok(object(vec![
        ("kind", json!("uvu_form")),
        ("algebra", algebra_to_json(&alg)),
        ("matrix", g.to_json()),
        (
            "head",
            json!(head.iter().map(JsonElem::to_json).collect::<Vec<_>>()),
        ),
        ("form", form_to_json(&form)),
        ("verified", json!(true)),
    ]))
}

fn cmd_certify_lower(cli: &Cli, path: &Path) -> CmdResult<Value> {
    let doc = read_json(path)?;
    let alg = algebra_of(&doc, &cli.algebra)?;
    let pairs: Vec<(MatD, MatD)> = pairs_from_json(&alg, field(&doc, "pairs")?)?;
    let tau = match doc.get("tau") {
        Some(t) => Quat::from_json(&alg, t)?,
        None => {
            let target = MatD::from_json(&alg, field(&doc, "target")?)?;
            target.get(target.n() - 1, target.n() - 1).clone()
        }
    };
    let report = lower_extract(&pairs, &tau)?;
    let mut out = cert_to_json(&report.cert);
    out["kind"] = json!("quaternion_cert");
    out["algebra"] = algebra_to_json(&alg);
    out["hfactors"] = commlen::json::hfactors_to_json(&report.hfactors);
    Ok(with_report(out, report.bound, report.cert.len() as u64))
}

fn cmd_factor(path: &Path, mode: Mode) -> CmdResult<Value> {
    let doc = read_json(path)?;
    let inst: BasedInstance = instance_from_json(&doc)?;
    let (n, c) = (inst.n as u64, inst.c() as u64);
    let (cert, n_out, bound, name) = match mode {
        Mode::Gl => (
            factor_commutators_gl(&inst)?,
            n,
            upper_bounds(n, c.max(1))?.0,
            "gl",
        ),
        Mode::E => {
            let bound = upper_bounds(n, c.max(1))?
                .1
                .ok_or_else(|| Failure::precondition("E-mode needs n >= 3"))?;
            (factor_commutators_e(&inst)?, n, bound, "e")
        }
        Mode::Stable => {
            let r = stable_single_commutator(&inst)?;
            (
                MatCert::new(vec![(r.p, r.q)], r.target),
                r.n as u64,
                1,
                "stable",
            )
        }
    };
    let mut out = cert_to_json(&cert);
    out["kind"] = json!("matrix_cert");
    out["mode"] = json!(name);
    out["algebra"] = algebra_to_json(inst.algebra());
    out["n"] = json!(n_out);
    Ok(with_report(out, bound, cert.len() as u64))
}

fn cmd_bounds(n: u64, c: u64, d: u64) -> CmdResult<Value> {
    if n < 2 || c == 0 || d == 0 {
        return Err(Failure::precondition(
            "bounds need n >= 2, c >= 1 and d >= 1",
        ));
    }
    let (gl, e) = upper_bounds(n, c)?;
    Ok(object(vec![
        ("kind", json!("bounds")),
        ("n", json!(n)),
        ("c", json!(c)),
        ("d", json!(d)),
        ("theorem1_bound", json!(theorem1_bound(n, d))),
        (
            "computed_lower_budget",
            json!(s_of(&kappa_p(d, n as usize))),
        ),
        (
            "corollary1_bound",
            json!(corollary1_bound(n, c)?.to_string()),
        ),
        ("gl_upper", json!(gl)),
        ("e_upper", json!(e)),
        ("corollary2_constant", json!(corollary2_constant(n))),
    ]))
}

/// Re-verifies one emitted document and checks that it re-encodes to the same bytes.
pub fn verify_document(line: &str) -> CmdResult<()> {
    let doc: Value =
        serde_json::from_str(line).map_err(|e| Failure::precondition(e.to_string()))?;
    let kind = field(&doc, "kind")?.as_str().unwrap_or_default();
    let alg = algebra_of(&doc, "-1,-1")?;
    let rebuilt = match kind {
        "instance" => {
            let inst: BasedInstance = instance_from_json(&doc)?;
            let mut v = instance_to_json(&inst);
            v["kind"] = doc["kind"].clone();
            v["seed"] = doc.get("seed").cloned().unwrap_or(Value::Null);
            v["element"] = inst.element()?.to_json();
            v
        }
        "uvu_form" => {
            let g = MatD::from_json(&alg, field(&doc, "matrix")?)?;
            let head = field(&doc, "head")?
                .as_array()
                .ok_or_else(|| Failure::precondition("\"head\" must be an array"))?
                .iter()
                .map(|q| Quat::from_json(&alg, q))
                .collect::<Result<Vec<_>, _>>()?;
            let form = form_from_json(&alg, field(&doc, "form")?)?;
            if MatD::diag(&alg, &head).try_mul(&form.eval()?)? != g {
                return Err(Failure::verification("form does not reassemble the matrix"));
            }
            let mut v = doc.clone();
            v["form"] = form_to_json(&form);
            v
        }
        "quaternion_cert" => {
            let cert: QuatCert = cert_from_json(&alg, &doc)?;
            check_cert(&cert, &doc)?;
            let mut v = with_report(cert_to_json(&cert), bound_of(&doc)?, cert.len() as u64);
            for k in ["kind", "algebra", "hfactors"] {
                v[k] = doc[k].clone();
            }
            v
        }
        "matrix_cert" => {
            let cert: MatCert = cert_from_json(&alg, &doc)?;
            check_cert(&cert, &doc)?;
            if doc["mode"] != json!("gl") {
                for (p, q) in &cert.pairs {
                    if !p.is_elementary()? || !q.is_elementary()? {
                        return Err(Failure::verification("witness is not elementary"));
                    }
                }
            }
            let mut v = with_report(cert_to_json(&cert), bound_of(&doc)?, cert.len() as u64);
            for k in ["kind", "mode", "algebra", "n"] {
                v[k] = doc[k].clone();
            }
            v
        }
        "bounds" => {
            let get = |k: &str| {
                doc.get(k)
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Failure::precondition(format!("bad \"{k}\"")))
            };
            cmd_bounds(get("n")?, get("c")?, get("d")?)?
        }
        other => {
            return Err(Failure::precondition(format!(
                "unknown document kind {other:?}"
            )))
        }
    };
    if serde_json::to_string(&rebuilt).expect("serializable") != line.trim() {
        return Err(Failure::verification(
            "document does not re-encode byte for byte",
        ));
    }
    Ok(())
}

fn bound_of(doc: &Value) -> CmdResult<u64> {
    doc.get("bound")
        .and_then(Value::as_u64)
        .ok_or_else(|| Failure::precondition("missing \"bound\""))
}

fn check_cert<G: JsonElem>(
    cert: &commlen::wordcalc::CommutatorCert<G>,
    doc: &Value,
) -> CmdResult<()> {
    if !cert.verify() {
        return Err(Failure::verification(
            "certificate does not evaluate to its target",
        ));
    }
    if cert.len() as u64 > bound_of(doc)? {
        return Err(Failure::verification("certificate exceeds its bound"));
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, lines: &[Value]) -> CmdResult<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&serde_json::to_string(l).expect("serializable"));
        text.push('\n');
    }
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::precondition(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure {
                code: 4,
                msg: e.to_string(),
            }),
    }
}

fn run(cli: &Cli) -> CmdResult<()> {
    let lines = match &cli.command {
        Command::Selftest {
            verify: Some(path), ..
        } => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::precondition(format!("{}: {e}", path.display())))?;
            let mut n = 0;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                verify_document(line)?;
                n += 1;
            }
            if n == 0 {
                return Err(Failure::precondition("nothing to verify"));
            }
            vec![json!({ "kind": "verify", "documents": n, "verified": true })]
        }
        Command::Selftest {
            verify: None,
            cases,
        } => {
            let (lines, ok) = selftest::run(&algebra_from_arg(&cli.algebra)?, cli.seed, *cases);
            emit(&cli.out, &lines)?;
            return if ok {
                Ok(())
            } else {
                Err(Failure::verification("selftest failed"))
            };
        }
        Command::Decompose { path } => vec![cmd_decompose(cli, path)?],
        Command::CertifyLower { path } => vec![cmd_certify_lower(cli, path)?],
        Command::Factor { path, mode } => vec![cmd_factor(path, *mode)?],
        Command::Bounds { c, d } => vec![cmd_bounds(cli.n as u64, *c, *d)?],
        Command::Gen { c, diagonal } => vec![cmd_gen(cli, *c, *diagonal)?],
    };
    emit(&cli.out, &lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("commlen: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
