//! Command-line front end.

use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::acycle::{average_acycle, hollimit_via_forests, ordered_acycle};
use crate::checks::{run_suite, CheckConfig, SUITES};
use crate::coeff::CoeffPoly;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::forests::{enumerate_forests, forest_to_permutation};
use crate::parse::parse_with_arity;
use crate::regint::{reg_all, reg_via_chains, reg_via_forests, reg_via_hae};

#[derive(Parser, Debug)]
#[command(name = "regint", version, about = "Exact regularized and A-cycle integrals on elliptic configuration spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Upper end of every Laurent expansion window (overrides REGINT_EXPANSION_ORDER).
    #[arg(long, global = true)]
    pub expansion_order: Option<i32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Iterated,
    Forests,
    Chains,
    Hae,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LimitEngine {
    Iterated,
    Average,
    Forests,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regularized integral over all points.
    Regint {
        expr: String,
        #[arg(long, value_enum, default_value_t = Engine::Iterated)]
        engine: Engine,
        /// Integration order for the iterated engine, e.g. 2,1,3.
        #[arg(long)]
        order: Option<String>,
        /// Number of points (defaults to the largest index in the expression).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Ordered A-cycle integral; the first listed point is integrated first.
    Acycle {
        expr: String,
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Average of the ordered A-cycle integrals over all orders.
    AcycleAverage {
        expr: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Holomorphic limit of the regularized integral.
    Limit {
        expr: String,
        #[arg(long, value_enum, default_value_t = LimitEngine::Iterated)]
        engine: LimitEngine,
        #[arg(long)]
        n: Option<usize>,
    },
    /// List the forests on n vertices with their permutations.
    Forests {
        #[arg(long)]
        n: usize,
    },
    /// Run a verification suite.
    Check {
        /// One of fubini, hae, averaging, commutators, qoracle, forest-limit, elliptic-anomaly, weights, all.
        suite: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
        #[arg(long, default_value_t = 8)]
        qorder: u32,
    },
}

/// Output text and whether the command succeeded.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

fn parse_order(s: &str) -> Result<Vec<Var>> {
    s.split(',')
        .map(|t| t.trim().parse::<Var>().map_err(|_| Error::UnsupportedInput(format!("bad order entry `{t}`"))))
        .collect()
}

fn value_json(c: &CoeffPoly) -> serde_json::Value {
    let monos: Vec<serde_json::Value> = c
        .terms()
        .map(|(m, r)| {
            json!({"coeff": r.to_string(), "I": m.iota, "E2": m.e2, "E4": m.e4, "E6": m.e6, "Y": m.y})
        })
        .collect();
    monos.into()
}

fn weight_json(c: &CoeffPoly) -> serde_json::Value {
    match c.weights().as_slice() {
        [] => serde_json::Value::Null,
        [w] => json!(w),
        ws => json!(ws),
    }
}

fn emit(format: Format, c: &CoeffPoly, engine: &str, started: Instant) -> String {
    match format {
        Format::Text => c.render(),
        Format::Json => json!({
            "value": value_json(c),
            "rendered": c.render(),
            "weight": weight_json(c),
            "engine": engine,
            "timings": {"total_ms": started.elapsed().as_secs_f64() * 1e3},
        })
        .to_string(),
    }
}

fn input(expr: &str, n: Option<usize>) -> Result<Expr> {
    parse_with_arity(expr, n)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(k) = cli.expansion_order {
        std::env::set_var("REGINT_EXPANSION_ORDER", k.to_string());
    }
    let started = Instant::now();
    let f = cli.format;
    let ok = |text| Ok(Outcome { text, ok: true });
    match &cli.command {
        Command::Regint { expr, engine, order, n } => {
            let e = input(expr, *n)?;
            let v = match engine {
                Engine::Iterated => {
                    let ord = match order {
                        Some(s) => parse_order(s)?,
                        None => e.live().to_vec(),
                    };
                    reg_all(&e, &ord)?
                }
                Engine::Forests => reg_via_forests(&e)?,
                Engine::Chains => reg_via_chains(&e)?,
                Engine::Hae => reg_via_hae(&e)?,
            };
            ok(emit(f, &v, &format!("{engine:?}").to_lowercase(), started))
        }
        Command::Acycle { expr, order, n } => {
            let e = input(expr, *n)?;
            let ord = match order {
                Some(s) => parse_order(s)?,
                None => e.live().to_vec(),
            };
            ok(emit(f, &ordered_acycle(&e, &ord)?, "acycle", started))
        }
        Command::AcycleAverage { expr, n } => {
            let e = input(expr, *n)?;
            ok(emit(f, &average_acycle(&e)?, "acycle-average", started))
        }
        Command::Limit { expr, engine, n } => {
            let e = input(expr, *n)?;
            let v = match engine {
                LimitEngine::Iterated => crate::regint::reg_default(&e)?.holomorphic_limit(),
                LimitEngine::Average => average_acycle(&e)?,
                LimitEngine::Forests => hollimit_via_forests(&e)?,
            };
            ok(emit(f, &v, &format!("{engine:?}").to_lowercase(), started))
        }
        Command::Forests { n } => {
            let fs = enumerate_forests(*n)?;
            let rows: Vec<(Vec<usize>, Vec<usize>)> = fs.iter().map(|x| (x.r.clone(), forest_to_permutation(x))).collect();
            let text = match f {
                Format::Text => rows
                    .iter()
                    .map(|(r, p)| format!("r={r:?} sigma={p:?}"))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Json => {
                    let v: Vec<serde_json::Value> = rows.iter().map(|(r, p)| json!({"r": r, "permutation": p})).collect();
                    json!({"n": n, "count": rows.len(), "forests": v}).to_string()
                }
            };
            ok(text)
        }
        Command::Check { suite, n, samples, seed, max_degree, qorder } => {
            let cfg = CheckConfig { n: *n, samples: *samples, seed: *seed, max_degree: *max_degree, qorder: *qorder };
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut reports = Vec::new();
            for s in names {
                let r = run_suite(s, &cfg)
                    .ok_or_else(|| Error::UnsupportedInput(format!("unknown suite `{s}`; expected one of {SUITES:?}")))?;
                reports.push(r);
            }
            let all = reports.iter().all(|r| r.passed);
            let text = match f {
                Format::Text => {
                    let mut lines = Vec::new();
                    for r in &reports {
                        let bad = r.cases.iter().filter(|c| !c.passed).count();
                        lines.push(format!(
                            "{}: {} ({} cases, {} failed)",
                            r.suite,
                            if r.passed { "pass" } else { "FAIL" },
                            r.cases.len(),
                            bad
                        ));
                        for c in r.cases.iter().filter(|c| !c.passed) {
                            lines.push(format!("  {}: {}", c.name, c.detail));
                        }
                    }
                    lines.join("\n")
                }
                Format::Json => serde_json::to_string(&reports).expect("reports serialize"),
            };
            Ok(Outcome { text, ok: all })
        }
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.text);
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error[{}]: {e}", e.code()),
                Format::Json => println!("{}", json!({"error": e.code(), "message": e.to_string()})),
            }
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Outcome> {
        let mut v = vec!["regint"];
        v.extend_from_slice(args);
        run(&Cli::try_parse_from(v).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(run_args(&["regint", "wp(1,2)", "--engine", "hae"]).unwrap().text, "I^2*E2/12 - Y");
        assert_eq!(run_args(&["acycle", "Z(1,2)", "--order", "1,2"]).unwrap().text, "-I/2");
        assert!(run_args(&["check", "fubini", "--n", "3", "--samples", "2", "--seed", "7"]).unwrap().ok);
        let e = run_args(&["regint", "Z(1,2)", "--engine", "forests"]).err().unwrap();
        assert_eq!(e.code(), "reg_integral::NotElliptic");
    }

    #[test]
    fn json_shape() {
        let out = run_args(&["regint", "wp(1,2)", "--format", "json"]).unwrap().text;
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["engine"], "iterated");
        assert_eq!(v["weight"], 2);
        assert_eq!(v["value"].as_array().unwrap().len(), 2);
        assert!(v["timings"]["total_ms"].is_number());
        let out = run_args(&["forests", "--n", "3", "--format", "json"]).unwrap().text;
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["count"], 2);
    }
}
