//! Residue operators `R^(a)_b` and contact-term operators `S^(a)_b`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::CoeffPoly;
use crate::error::Result;
use crate::expr::{expr_equal, recommended_order, Expr, Var};
use crate::laurent::coefficient;

fn extract(e: &Expr, a: Var, b: Var, power: i32) -> Expr {
    let rest = e.live().without(a);
    if a == b {
        return Expr::zero(rest);
    }
    coefficient(e, a, b, power).canonical()
}

/// `R^(a)_b = Res_{z_a = z_b}`; the result no longer depends on `z_a`.
pub fn residue(e: &Expr, a: Var, b: Var) -> Expr {
    extract(e, a, b, -1)
}

/// `S^(a)_b = Res_{z_a = z_b} (z_a - z_b) ·`.
pub fn s_op(e: &Expr, a: Var, b: Var) -> Expr {
    extract(e, a, b, -2)
}

/// `Σ_{r != a} S^(a)_r`, grouped by the removed variable `a`.
pub fn total_s(e: &Expr) -> BTreeMap<Var, Expr> {
    let mut out = BTreeMap::new();
    for a in e.live().iter() {
        let mut acc = Expr::zero(e.live().without(a));
        for r in e.live().iter().filter(|&r| r != a) {
            acc += &s_op(e, a, r);
        }
        if !acc.is_zero() {
            out.insert(a, acc);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorMode {
    /// Residue commutators, including disjoint-index commutation.
    Basic,
    /// The same identities with `R^(a)_0 = ∫_A dz_a` (quasi-elliptic samples).
    WithAcycle,
    /// `R^b_c R^a_b + R^c_a R^b_c + R^a_b R^c_a = 0`.
    Arnold,
    /// `R^(a)_b ⨍_{E_i} = ⨍_{E_i} R^(a)_b`.
    WithRegint,
}

impl std::str::FromStr for CommutatorMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "basic" => Ok(Self::Basic),
            "with_acycle" | "with-acycle" => Ok(Self::WithAcycle),
            "arnold" => Ok(Self::Arnold),
            "with_regint" | "with-regint" => Ok(Self::WithRegint),
            _ => Err(format!("unknown commutator mode `{s}`")),
        }
    }
}

/// An operator acting on expressions; `Op::A(a)` is `R^(a)_0`.
#[derive(Clone, Copy, Debug)]
pub enum Op {
    R(Var, Var),
    A(Var),
    Reg(Var),
}

impl Op {
    fn apply(&self, e: &Expr) -> Result<Expr> {
        match *self {
            Op::R(a, b) => Ok(residue(e, a, b)),
            Op::A(a) => crate::acycle::acycle_once(e, a),
            Op::Reg(a) => crate::regint::reg_once(e, a, None),
        }
    }

    fn label(&self) -> String {
        match self {
            Op::R(a, b) => format!("R{a}_{b}"),
            Op::A(a) => format!("R{a}_0"),
            Op::Reg(a) => format!("Reg{a}"),
        }
    }
}

/// Apply a composition, rightmost operator first.
pub fn compose(ops: &[Op], e: &Expr) -> Result<Expr> {
    let mut cur = e.clone();
    for op in ops.iter().rev() {
        cur = op.apply(&cur)?;
    }
    Ok(cur)
}

/// A signed sum of compositions; the third entry is a power of `I`.
type Side = Vec<(i64, Vec<Op>, i32)>;

fn eval_side(side: &Side, e: &Expr) -> Result<Option<Expr>> {
    let mut acc: Option<Expr> = None;
    for (c, ops, k) in side {
        let v = compose(ops, e)?.scale(&CoeffPoly::iota_pow(*k).scale(&crate::coeff::int(*c)));
        acc = Some(match acc {
            None => v,
            Some(a) if a.live() == v.live() => &a + &v,
            Some(a) if v.is_zero() => a,
            Some(a) if a.is_zero() => v,
            Some(_) => return Ok(None),
        });
    }
    Ok(acc)
}

fn side_label(side: &Side) -> String {
    if side.is_empty() {
        return "0".into();
    }
    side.iter()
        .enumerate()
        .map(|(i, (c, ops, k))| {
            let mut body: Vec<String> = ops.iter().map(Op::label).collect();
            if *k != 0 {
                body.insert(0, format!("I^{k}"));
            }
            let sign = match (i, *c < 0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            format!("{sign}{}", body.join("∘").replacen("∘", "*", (*k != 0) as usize))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorFailure {
    pub sample: usize,
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CommutatorReport {
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<CommutatorFailure>,
}

impl CommutatorReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

/// Compare `Σ lhs` with `Σ rhs` on `e`; `None` when both sides vanish structurally.
pub fn identity_holds(lhs: &Side, rhs: &Side, e: &Expr) -> Result<(bool, String, String)> {
    let (l, r) = (eval_side(lhs, e)?, eval_side(rhs, e)?);
    let (l, r) = match (l, r) {
        (Some(l), Some(r)) if l.live() == r.live() => (l, r),
        (Some(l), None) => {
            let z = Expr::zero(l.live());
            (l, z)
        }
        (None, Some(r)) => {
            let z = Expr::zero(r.live());
            (z, r)
        }
        (None, None) => return Ok((true, "0".into(), "0".into())),
        (Some(l), Some(r)) => {
            let ok = l.is_zero() && r.is_zero();
            return Ok((ok, l.render(), r.render()));
        }
    };
    let ok = expr_equal(&l, &r, recommended_order(&l, &r))?;
    Ok((ok, l.render(), r.render()))
}

fn identities(mode: CommutatorMode, vars: &[Var]) -> Vec<(Side, Side)> {
    use Op::*;
    let mut out = Vec::new();
    let distinct = |xs: &[Var]| xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x));
    for &a in vars {
        for &b in vars {
            if !distinct(&[a, b]) {
                continue;
            }
            if mode == CommutatorMode::WithAcycle {
                out.push((vec![(1, vec![A(a), A(b)], 0), (-1, vec![A(b), A(a)], 0)], vec![(1, vec![A(b), R(a, b)], 1)]));
                out.push((vec![(1, vec![A(b), R(a, b)], 0)], vec![(-1, vec![A(a), R(b, a)], 0)]));
                for &i in vars {
                    if distinct(&[a, b, i]) {
                        out.push((vec![(1, vec![A(i), R(a, b)], 0)], vec![(1, vec![R(a, b), A(i)], 0)]));
                    }
                }
            }
            for &c in vars {
                if !distinct(&[a, b, c]) {
                    continue;
                }
                match mode {
                    CommutatorMode::Basic => {
                        out.push((
                            vec![(1, vec![R(a, c), R(b, c)], 0), (-1, vec![R(b, c), R(a, c)], 0)],
                            vec![(1, vec![R(b, c), R(a, b)], 0)],
                        ));
                        out.push((vec![(1, vec![R(b, c), R(a, b)], 0)], vec![(-1, vec![R(a, c), R(b, a)], 0)]));
                        for &d in vars {
                            if distinct(&[a, b, c, d]) {
                                out.push((vec![(1, vec![R(d, c), R(a, b)], 0)], vec![(1, vec![R(a, b), R(d, c)], 0)]));
                            }
                        }
                    }
                    CommutatorMode::Arnold if a < b && a < c => {
                        out.push((
                            vec![(1, vec![R(b, c), R(a, b)], 0), (1, vec![R(c, a), R(b, c)], 0), (1, vec![R(a, b), R(c, a)], 0)],
                            vec![],
                        ));
                    }
                    CommutatorMode::WithRegint => {
                        out.push((vec![(1, vec![R(a, b), Reg(c)], 0)], vec![(1, vec![Reg(c), R(a, b)], 0)]));
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

fn in_class(mode: CommutatorMode, e: &Expr) -> bool {
    match mode {
        CommutatorMode::Basic => true,
        CommutatorMode::WithAcycle => e.is_quasi_elliptic(),
        CommutatorMode::Arnold => e.is_quasi_elliptic() || e.almost_elliptic_check(),
        CommutatorMode::WithRegint => e.almost_elliptic_check(),
    }
}

const MAX_IDENTITIES_PER_SAMPLE: usize = 12;

/// Evaluate both sides of every identity of `mode` on every sample. Samples
/// outside the supported class are counted as skipped; when a sample admits
/// more identities than the per-sample cap, `seed` picks the subset.
pub fn check_commutators(samples: &[Expr], mode: CommutatorMode, seed: u64) -> CommutatorReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CommutatorReport::default();
    for (i, e) in samples.iter().enumerate() {
        if !in_class(mode, e) {
            report.skipped += 1;
            continue;
        }
        let vars = e.live().to_vec();
        // R^(a)_a = 0.
        if mode == CommutatorMode::Basic {
            for &a in &vars {
                report.checked += 1;
                let r = residue(e, a, a);
                if !r.is_zero() {
                    report.failures.push(CommutatorFailure {
                        sample: i,
                        identity: format!("R{a}_{a} = 0"),
                        lhs: r.render(),
                        rhs: "0".into(),
                    });
                }
            }
        }
        let mut ids = identities(mode, &vars);
        if ids.len() > MAX_IDENTITIES_PER_SAMPLE {
            ids.shuffle(&mut rng);
            ids.truncate(MAX_IDENTITIES_PER_SAMPLE);
        }
        for (lhs, rhs) in ids {
            report.checked += 1;
            let identity = format!("{} = {}", side_label(&lhs), side_label(&rhs));
            match identity_holds(&lhs, &rhs, e) {
                Ok((true, _, _)) => {}
                Ok((false, l, r)) => report.failures.push(CommutatorFailure { sample: i, identity, lhs: l, rhs: r }),
                Err(err) => report.failures.push(CommutatorFailure {
                    sample: i,
                    identity,
                    lhs: format!("error: {}", err.code()),
                    rhs: err.to_string(),
                }),
            }
        }
    }
    report
}

/// `R^(b)_c ∘ R^(a)_b = [R^(a)_c, R^(b)_c]`.
pub fn nested_commutator_check(e: &Expr, a: Var, b: Var, c: Var) -> Result<bool> {
    use Op::R;
    let lhs = vec![(1, vec![R(b, c), R(a, b)], 0)];
    let rhs = vec![(1, vec![R(a, c), R(b, c)], 0), (-1, vec![R(b, c), R(a, c)], 0)];
    Ok(identity_holds(&lhs, &rhs, e)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, CoeffPoly};
    use crate::expr::VarSet;

    fn l(n: usize) -> VarSet {
        VarSet::range(n)
    }

    #[test]
    fn residue_examples() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert!(residue(&w, 1, 2).is_zero());
        let zw = &Expr::z(l(2), 1, 2).unwrap() * &w;
        assert_eq!(residue(&zw, 1, 2).render(), "I^2*E2/12");
        let e = &Expr::wp(l(3), 1, 3, 0).unwrap() * &Expr::wp(l(3), 1, 2, 1).unwrap();
        let l23 = VarSet::from_vars(&[2, 3]);
        assert_eq!(residue(&e, 1, 2), -&Expr::wp(l23, 2, 3, 2).unwrap());
    }

    #[test]
    fn s_examples() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert_eq!(s_op(&w, 1, 2).as_constant().unwrap(), CoeffPoly::one());
        assert!(s_op(&(&w * &w), 1, 2).is_zero());
        assert!(s_op(&Expr::wp(l(3), 1, 2, 0).unwrap(), 1, 3).is_zero());
        let t = total_s(&w);
        assert_eq!(t.len(), 2);
        assert!(t.values().all(|v| v.as_constant() == Some(CoeffPoly::one())));
        assert!(total_s(&Expr::constant(l(2), CoeffPoly::constant(rat(3, 1)))).is_empty());
        assert!(total_s(&(&w * &w)).is_empty());
    }

    #[test]
    fn self_residue_is_zero() {
        let w = Expr::z(l(2), 1, 2).unwrap();
        assert!(residue(&w, 1, 1).is_zero());
    }

    #[test]
    fn global_residue_theorem() {
        // ℘12 ℘'13 Z23 is elliptic in z1: its residues in z1 sum to zero.
        let e = &(&Expr::wp(l(3), 1, 2, 0).unwrap() * &Expr::wp(l(3), 1, 3, 1).unwrap()) * &Expr::z(l(3), 2, 3).unwrap();
        let s = &residue(&e, 1, 2) + &residue(&e, 1, 3);
        assert!(crate::expr::expr_equal(&s, &Expr::zero(s.live()), 12).unwrap());
    }

    #[test]
    fn commutator_examples() {
        let w = |a, b| Expr::wp(l(3), a, b, 0).unwrap();
        let e = &(&w(1, 3) * &w(2, 3)) * &Expr::z(l(3), 1, 2).unwrap();
        let r = check_commutators(std::slice::from_ref(&e), CommutatorMode::Basic, 1);
        assert!(r.passed(), "{r:?}");
        let e = &(&w(1, 2) * &w(2, 3)) * &w(1, 3);
        let r = check_commutators(std::slice::from_ref(&e), CommutatorMode::Arnold, 1);
        assert!(r.passed(), "{r:?}");
        assert!(nested_commutator_check(&e, 1, 2, 3).unwrap());
    }

    #[test]
    fn commutators_with_integrals() {
        let w = |a, b| Expr::wp(l(3), a, b, 0).unwrap();
        let z = |a, b| Expr::z(l(3), a, b).unwrap();
        let samples = vec![&(&w(1, 2) * &z(2, 3)) * &w(1, 3), &z(1, 2) * &w(2, 3), &w(1, 2) * &w(2, 3)];
        let r = check_commutators(&samples, CommutatorMode::WithAcycle, 3);
        assert!(r.passed(), "{r:?}");
        let samples = vec![&w(1, 2) * &w(2, 3), &Expr::zhat(l(3), 1, 2).unwrap() * &w(1, 3)];
        let r = check_commutators(&samples, CommutatorMode::WithRegint, 3);
        assert!(r.passed(), "{r:?}");
    }
}
