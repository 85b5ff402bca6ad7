//! Verification suites run by `regint check` and the acceptance tests.

use serde::Serialize;

use crate::acycle::{average_acycle, hollimit_via_forests, ordered_acycle};
use crate::error::Result;
use crate::expr::{Expr, Var, Weight};
use crate::qseries::compare;
use crate::regint::{
    elliptic_anomaly_check, hae_residual, permutations, reg_all, reg_default, reg_via_chains, reg_via_forests,
    reg_via_hae,
};
use crate::residue::{check_commutators, CommutatorMode};
use crate::samples::{samples, SampleKind, SampleSpec};

pub const SUITES: &[&str] =
    &["fubini", "hae", "averaging", "commutators", "qoracle", "forest-limit", "elliptic-anomaly", "weights"];

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub cases: Vec<CaseResult>,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_degree: u32,
    pub qorder: u32,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { n: 3, samples: 5, seed: 7, max_degree: 3, qorder: 8 }
    }
}

impl CheckConfig {
    fn draw(&self, kind: SampleKind) -> Vec<Expr> {
        samples(&SampleSpec { kind, n: self.n, max_degree: self.max_degree }, self.samples, self.seed)
    }
}

fn case(name: String, r: Result<(bool, String)>) -> CaseResult {
    match r {
        Ok((passed, detail)) => CaseResult { name, passed, detail },
        Err(e) => CaseResult { name, passed: false, detail: format!("{}: {e}", e.code()) },
    }
}

/// All orderings of [`reg_all`] agree.
pub fn fubini_case(e: &Expr) -> Result<(bool, String)> {
    let perms = permutations(&e.live().to_vec());
    let first = reg_all(e, &perms[0])?;
    for p in &perms[1..] {
        let v = reg_all(e, p)?;
        if v != first {
            return Ok((false, format!("order {p:?}: {} vs {}", v.render(), first.render())));
        }
    }
    Ok((true, first.render()))
}

/// The iterated, forest, chain and anomaly engines agree.
pub fn engine_agreement_case(e: &Expr) -> Result<(bool, String)> {
    let base = reg_default(e)?;
    for (name, v) in [("forests", reg_via_forests(e)?), ("chains", reg_via_chains(e)?), ("hae", reg_via_hae(e)?)] {
        if v != base {
            return Ok((false, format!("{name}: {} vs {}", v.render(), base.render())));
        }
    }
    Ok((true, base.render()))
}

pub fn hae_case(e: &Expr) -> Result<(bool, String)> {
    let r = hae_residual(e)?;
    Ok((r.is_zero(), r.render()))
}

pub fn averaging_case(e: &Expr) -> Result<(bool, String)> {
    let lim = reg_default(e)?.holomorphic_limit();
    let avg = average_acycle(e)?;
    Ok((lim == avg, format!("{} vs {}", lim.render(), avg.render())))
}

pub fn forest_limit_case(e: &Expr) -> Result<(bool, String)> {
    let lim = reg_default(e)?.holomorphic_limit();
    let f = hollimit_via_forests(e)?;
    Ok((lim == f, format!("{} vs {}", lim.render(), f.render())))
}

pub fn anomaly_case(e: &Expr) -> Result<(bool, String)> {
    let n = e.live().largest().unwrap_or(0);
    let vars = e.live().to_vec();
    for &a in &vars {
        for &b in &vars {
            if a == b || a == n || b == n {
                continue;
            }
            let r = elliptic_anomaly_check(e, a, b)?;
            if !r.equal {
                return Ok((false, format!("(a,b)=({a},{b}): {} vs {}", r.lhs.render(), r.rhs.render())));
            }
        }
    }
    Ok((true, String::new()))
}

/// Weight-homogeneous in, weight-homogeneous and almost-holomorphic out.
pub fn pure_weight_case(e: &Expr) -> Result<(bool, String)> {
    let Weight::Pure(w) = e.weight() else {
        return Ok((false, "input is not weight-homogeneous".into()));
    };
    let v = reg_default(e)?;
    let ws = v.weights();
    if ws.len() > 1 || ws.first().is_some_and(|&x| x != w) {
        return Ok((false, format!("weights {ws:?} for input weight {w}")));
    }
    match v.to_almost_holomorphic() {
        Ok(h) => Ok((true, h.render_with("E2hat"))),
        Err(err) => Ok((false, err.to_string())),
    }
}

/// Every monomial of every ordered A-cycle value has weight at most the input weight.
pub fn mixed_weight_case(e: &Expr) -> Result<(bool, String)> {
    let Some(w) = e.weight().max() else {
        return Ok((true, "zero".into()));
    };
    for s in permutations(&e.live().to_vec()) {
        let v = ordered_acycle(e, &s)?;
        if let Some(&top) = v.weights().last() {
            if top > w {
                return Ok((false, format!("order {s:?}: weight {top} > {w}")));
            }
        }
    }
    Ok((true, String::new()))
}

pub fn qoracle_case(e: &Expr, sigma: &[Var], order: u32) -> Result<(bool, String)> {
    let sym = ordered_acycle(e, sigma)?;
    let r = compare(&sym, sigma, e, order)?;
    let detail = match &r.first_mismatch {
        None => sym.render(),
        Some(m) => format!("I^{} q^{}: {} vs {}", m.iota, m.q_power, m.symbolic, m.oracle),
    };
    Ok((r.matches, detail))
}

fn per_sample(prefix: &str, xs: &[Expr], f: impl Fn(&Expr) -> Result<(bool, String)>) -> Vec<CaseResult> {
    xs.iter().enumerate().map(|(i, e)| case(format!("{prefix}#{i} {}", e.render()), f(e))).collect()
}

pub fn run_suite(suite: &str, cfg: &CheckConfig) -> Option<SuiteReport> {
    let cases = match suite {
        "fubini" => {
            let mut c = per_sample("elliptic", &cfg.draw(SampleKind::Elliptic), fubini_case);
            c.extend(per_sample("almost", &cfg.draw(SampleKind::AlmostElliptic), fubini_case));
            c
        }
        "hae" => {
            let mut c = per_sample("elliptic", &cfg.draw(SampleKind::Elliptic), hae_case);
            c.extend(per_sample("almost", &cfg.draw(SampleKind::AlmostElliptic), hae_case));
            c
        }
        "averaging" => per_sample("elliptic", &cfg.draw(SampleKind::Elliptic), averaging_case),
        "forest-limit" => {
            let xs = cfg.draw(SampleKind::Elliptic);
            let mut c = per_sample("limit", &xs, forest_limit_case);
            c.extend(per_sample("engines", &xs, engine_agreement_case));
            c
        }
        "elliptic-anomaly" => per_sample("elliptic", &cfg.draw(SampleKind::Elliptic), anomaly_case),
        "weights" => {
            let mut c = per_sample("pure", &cfg.draw(SampleKind::Elliptic), pure_weight_case);
            c.extend(per_sample("mixed", &cfg.draw(SampleKind::QuasiElliptic), mixed_weight_case));
            c
        }
        "qoracle" => {
            let xs = cfg.draw(SampleKind::QuasiElliptic);
            let mut c = Vec::new();
            for (i, e) in xs.iter().enumerate() {
                let vars = e.live().to_vec();
                let mut rev = vars.clone();
                rev.reverse();
                for s in [vars, rev] {
                    c.push(case(format!("quasi#{i} {s:?} {}", e.render()), qoracle_case(e, &s, cfg.qorder)));
                }
            }
            c
        }
        "commutators" => {
            let mut c = Vec::new();
            for (mode, kind) in [
                (CommutatorMode::Basic, SampleKind::AlmostElliptic),
                (CommutatorMode::WithAcycle, SampleKind::QuasiElliptic),
                (CommutatorMode::Arnold, SampleKind::AlmostElliptic),
                (CommutatorMode::WithRegint, SampleKind::AlmostElliptic),
            ] {
                let r = check_commutators(&cfg.draw(kind), mode, cfg.seed);
                let detail = match r.failures.first() {
                    None => format!("{} identities, {} skipped", r.checked, r.skipped),
                    Some(f) => format!("sample {} {}: {} vs {}", f.sample, f.identity, f.lhs, f.rhs),
                };
                c.push(CaseResult { name: format!("{mode:?}"), passed: r.passed(), detail });
            }
            c
        }
        _ => return None,
    };
    let passed = cases.iter().all(|c| c.passed);
    Some(SuiteReport { suite: suite.to_string(), passed, cases })
}
