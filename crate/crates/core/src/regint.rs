//! Regularized integrals: iterated residues, forest and chain formulas, and
//! the holomorphic anomaly expansion.

use std::collections::BTreeMap;

use crate::acycle::average_acycle;
use crate::coeff::{int, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{expr_equal, recommended_order, Expr, Gen, Var, VarSet};
use crate::forests::{enumerate_forests, f_r_on};
use crate::residue::{residue, s_op};

fn ensure_live(e: &Expr, a: Var) -> Result<()> {
    if !e.live().contains(a) {
        return Err(Error::UnsupportedInput(format!("z{a} is not a live variable")));
    }
    Ok(())
}

fn check_elliptic(e: &Expr) -> Result<()> {
    if e.has_zg() || e.has_ag() || e.has_y() {
        return Err(Error::NotElliptic(e.render()));
    }
    Ok(())
}

/// Final value of an integration that consumed all but one variable.
fn finish(e: Expr) -> Result<CoeffPoly> {
    e.as_constant().ok_or_else(|| Error::NonConstantRemainder(e.render()))
}

/// `⨍_{E_a}`: one regularized integration, by residues of an antiderivative
/// in `Zhat_{a,pivot}`.
pub fn reg_once(e: &Expr, a: Var, pivot: Option<Var>) -> Result<Expr> {
    ensure_live(e, a)?;
    let rest = e.live().without(a);
    let Some(largest) = rest.largest() else {
        return crate::acycle::lone_variable(e);
    };
    let p = pivot.unwrap_or(largest);
    if p == a || !rest.contains(p) {
        return Err(Error::UnsupportedInput(format!("pivot z{p} is not a remaining variable")));
    }
    if !e.almost_elliptic_check() {
        return Err(Error::NotAlmostElliptic);
    }
    Ok(reg_once_unchecked(e, a, p))
}

pub(crate) fn reg_once_unchecked(e: &Expr, a: Var, p: Var) -> Expr {
    let live = e.live();
    let rest = live.without(a);
    let e = if e.anchor() == a { e.reanchor(rest.largest().unwrap()) } else { e.clone() };
    let anchor = e.anchor();
    // G(s) = ∫_0^s (e as a polynomial in Ag(a)); F = G(Ag(a)) - G(Ag(p) - Z(z_a - z_p)).
    let ga = Gen::Ag(a);
    let mut g = Expr::constant_in(live, anchor, CoeffPoly::zero());
    for (m, c) in e.terms() {
        let k = m.exponent(&ga);
        g.add_term(m.with_exponent(ga, k + 1), c.scale(&Rational::new(1.into(), (k as i64 + 1).into())));
    }
    let base = &Expr::gen_raw(live, anchor, Gen::Ag(p)) - &Expr::z_unchecked(live, anchor, a, p);
    let g0 = g.substitute(live, anchor, |h| (h == ga).then(|| base.clone()));
    let f = &g - &g0;
    let mut out = Expr::zero(rest);
    for b in rest.iter() {
        out += &residue(&f, a, b);
    }
    out
}

fn check_order(e: &Expr, order: &[Var]) -> Result<()> {
    let set = VarSet::from_vars(order);
    if set != e.live() || order.len() != e.live().len() {
        return Err(Error::UnsupportedInput(format!("{order:?} is not an ordering of the live variables")));
    }
    Ok(())
}

/// `⨍_{E_[n]}` integrating in the given order.
pub fn reg_all(e: &Expr, order: &[Var]) -> Result<CoeffPoly> {
    check_order(e, order)?;
    if !e.almost_elliptic_check() {
        return Err(Error::NotAlmostElliptic);
    }
    let mut cur = e.clone();
    for &a in order.iter().take(order.len().saturating_sub(1)) {
        let p = cur.live().without(a).largest().unwrap();
        cur = reg_once_unchecked(&cur, a, p);
    }
    finish(cur)
}

/// [`reg_all`] in increasing variable order.
pub fn reg_default(e: &Expr) -> Result<CoeffPoly> {
    reg_all(e, &e.live().to_vec())
}

/// Sum over forests of nested residues of `Φ F_r`.
pub fn reg_via_forests(e: &Expr) -> Result<CoeffPoly> {
    check_elliptic(e)?;
    let vars = e.live().to_vec();
    if vars.len() < 2 {
        return finish(e.clone());
    }
    let n = vars.len();
    let mut total = CoeffPoly::zero();
    for f in enumerate_forests(n)? {
        let mut cur = e * &f_r_on(&f, &vars);
        for k in 1..n {
            if cur.is_zero() {
                break;
            }
            cur = residue(&cur, vars[k - 1], vars[f.parent(k) - 1]);
        }
        total += &finish(cur)?;
    }
    Ok(total)
}

/// Chains `(i_1 = first, i_2, ...)` of distinct variables avoiding the last.
fn chains(vars: &[Var]) -> Vec<Vec<Var>> {
    let first = vars[0];
    let pool: Vec<Var> = vars[1..vars.len() - 1].to_vec();
    let mut out = Vec::new();
    fn rec(cur: &mut Vec<Var>, pool: &[Var], out: &mut Vec<Vec<Var>>) {
        out.push(cur.clone());
        for &v in pool {
            if !cur.contains(&v) {
                cur.push(v);
                rec(cur, pool, out);
                cur.pop();
            }
        }
    }
    rec(&mut vec![first], &pool, &mut out);
    out
}

/// Recursive chain formula: `Σ_I ⨍_{rest} R^I(Φ Zhat_{i_1}^m / m!)`.
pub fn reg_via_chains(e: &Expr) -> Result<CoeffPoly> {
    check_elliptic(e)?;
    chains_rec(&e.canonical())
}

fn chains_rec(e: &Expr) -> Result<CoeffPoly> {
    let vars = e.live().to_vec();
    if vars.len() < 2 {
        return finish(e.clone());
    }
    let live = e.live();
    let last = *vars.last().unwrap();
    let first = vars[0];
    let zhat = &Expr::z_unchecked(live, last, first, last) + &Expr::gen_raw(live, last, Gen::Ag(first));
    let mut total = CoeffPoly::zero();
    for chain in chains(&vars) {
        let m = chain.len() as u32;
        let mut fact = Rational::from_integer(1.into());
        for i in 1..=m {
            fact *= int(i as i64);
        }
        let mut cur = (e * &zhat.pow(m)).scale_rat(&(Rational::from_integer(1.into()) / fact));
        for (i, &v) in chain.iter().enumerate() {
            if cur.is_zero() {
                break;
            }
            let target = chain.get(i + 1).copied().unwrap_or(last);
            cur = residue(&cur, v, target);
        }
        if !cur.is_zero() {
            total += &chains_rec(&cur)?;
        }
    }
    Ok(total)
}

/// `Σ_{k>=1} -(1/2)^k / k! Y^k ⨍ S^k + (1/n!) Σ_σ ∫_{A_σ}`.
pub fn reg_via_hae(e: &Expr) -> Result<CoeffPoly> {
    check_elliptic(e)?;
    hae_rec(e)
}

fn hae_rec(e: &Expr) -> Result<CoeffPoly> {
    if e.live().len() < 2 {
        return finish(e.clone());
    }
    let mut total = average_acycle(e)?;
    let mut level: BTreeMap<VarSet, Expr> = BTreeMap::from([(e.live(), e.clone())]);
    let mut k = 0u32;
    let mut weight = Rational::from_integer(1.into());
    while !level.is_empty() {
        k += 1;
        weight = weight * Rational::new(1.into(), 2.into()) / int(k as i64);
        let mut next: BTreeMap<VarSet, Expr> = BTreeMap::new();
        for x in level.values() {
            for a in x.live().iter() {
                for b in x.live().iter().filter(|&b| b != a) {
                    let s = s_op(x, a, b);
                    if s.is_zero() {
                        continue;
                    }
                    match next.get_mut(&s.live()) {
                        Some(acc) => *acc += &s,
                        None => {
                            next.insert(s.live(), s);
                        }
                    }
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        let coeff = CoeffPoly::y().pow(k).scale(&-weight.clone());
        for x in next.values() {
            total += &(&hae_rec(x)? * &coeff);
        }
        level = next;
    }
    Ok(total)
}

/// `∂_Y ⨍Ψ - ⨍∂_YΨ + Σ_{a<b} ⨍ S^(a)_b Ψ`; zero when the anomaly equation holds.
pub fn hae_residual(e: &Expr) -> Result<CoeffPoly> {
    let lhs = reg_default(e)?.partial_y();
    let mut rhs = reg_default(&e.d_y())?;
    for a in e.live().iter() {
        for b in e.live().iter().filter(|&b| b > a) {
            let s = s_op(e, a, b);
            if !s.is_zero() {
                rhs -= &reg_default(&s)?;
            }
        }
    }
    Ok(&lhs - &rhs)
}

#[derive(Clone, Debug)]
pub struct AnomalyReport {
    pub lhs: Expr,
    pub rhs: Expr,
    pub equal: bool,
}

/// Compares `∂_{A_b} ⨍_{E_a} e` with `R^(a)_b e`, where `A_b = A(z_b - z_n)`.
pub fn elliptic_anomaly_check(e: &Expr, a: Var, b: Var) -> Result<AnomalyReport> {
    check_elliptic(e)?;
    let n = e.live().largest().ok_or(Error::ArityTooSmall(0))?;
    if a == b || b == n || a == n || !e.live().contains(a) || !e.live().contains(b) {
        return Err(Error::UnsupportedInput(format!("invalid indices a={a}, b={b} for anchor z{n}")));
    }
    let lhs = reg_once(e, a, Some(n))?.d_a(b);
    let rhs = residue(e, a, b);
    let equal = expr_equal(&lhs, &rhs, recommended_order(&lhs, &rhs))?;
    Ok(AnomalyReport { lhs, rhs, equal })
}

/// All permutations of `vars` in lexicographic order.
pub fn permutations(vars: &[Var]) -> Vec<Vec<Var>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(vars.len());
    let mut used = vec![false; vars.len()];
    fn rec(vars: &[Var], used: &mut [bool], cur: &mut Vec<Var>, out: &mut Vec<Vec<Var>>) {
        if cur.len() == vars.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..vars.len() {
            if !used[i] {
                used[i] = true;
                cur.push(vars[i]);
                rec(vars, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(vars, &mut used, &mut cur, &mut out);
    out
}
