//! Ordered A-cycle integrals through Bernoulli primitives of the difference
//! operator `δ f = (f(z - τ) - f(z)) / I`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::coeff::{int, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{Expr, Gen, GenMono, Var, VarSet};
use crate::forests::tree_factorial;
use crate::mpoly::{bernoulli_numbers, binom, XPoly};
use crate::regint::permutations;
use crate::residue::residue;

fn check_quasi(e: &Expr, a: Var) -> Result<()> {
    if e.has_ag() || e.has_y() {
        return Err(Error::NotQuasiElliptic(a));
    }
    if !e.live().contains(a) {
        return Err(Error::UnsupportedInput(format!("z{a} is not a live variable")));
    }
    Ok(())
}

/// `(e|_{Z(z_a - z_c) -> Z + I} - e) / I`.
pub fn delta(e: &Expr, a: Var) -> Result<Expr> {
    check_quasi(e, a)?;
    let (live, anchor) = (e.live(), e.anchor());
    let iota = Expr::constant_in(live, anchor, CoeffPoly::iota());
    let shifted = e.substitute(live, anchor, |g| match g {
        Gen::Zg { a: x, .. } if x == a => Some(&Expr::gen_raw(live, anchor, g) + &iota),
        Gen::Zg { b: y, .. } if y == a => Some(&Expr::gen_raw(live, anchor, g) - &iota),
        _ => None,
    });
    Ok((&shifted - e).scale(&CoeffPoly::iota_pow(-1)))
}

/// `δ^{-1}(U^j) = I^{j+1} B_{j+1}(U / I) / (j + 1)` as a polynomial in `U` (variable `u`).
fn bernoulli_primitive(j: u32, nv: usize, u: usize, bern: &[Rational]) -> XPoly {
    let n = j as usize + 1;
    let mut p = XPoly::zero(nv);
    for (k, b) in bern.iter().enumerate().take(n + 1) {
        let c = b * binom(n, k) / int(n as i64);
        if c.is_zero() {
            continue;
        }
        let mut e = vec![0; nv];
        e[u] = (n - k) as u32;
        p.add_term(e, CoeffPoly::iota_pow(k as i32).scale(&c));
    }
    p
}

/// A primitive `g` with `δ_a g = e`, built in `U = Z(z_a - z_pivot)` and the
/// shift-invariant `V_c = Z(z_a - z_c) - U`.
pub fn delta_primitive(e: &Expr, a: Var, pivot: Var) -> Result<Expr> {
    check_quasi(e, a)?;
    let (live, anchor) = (e.live(), e.anchor());
    if pivot == a || !live.contains(pivot) {
        return Err(Error::UnsupportedInput(format!("pivot z{pivot} is not a remaining variable")));
    }
    let others: Vec<Var> = live.iter().filter(|&c| c != a).collect();
    // Variable slots: U at 0, V_c at 1.. (one per other variable; V_pivot unused).
    let nv = others.len() + 1;
    let slot = |c: Var| 1 + others.iter().position(|&x| x == c).unwrap();

    let mut groups: BTreeMap<GenMono, Expr> = BTreeMap::new();
    for (m, c) in e.terms() {
        let (zpart, rest) = m.split(|g| matches!(g, Gen::Zg { .. }) && g.involves(a));
        groups
            .entry(zpart)
            .or_insert_with(|| Expr::constant_in(live, anchor, CoeffPoly::zero()))
            .add_term(rest, c.clone());
    }

    let maxdeg = groups.keys().map(|m| m.degree()).max().unwrap_or(0) as usize;
    let bern = bernoulli_numbers(maxdeg + 1);
    let u = XPoly::var(nv, 0);
    let w = |c: Var| if c == pivot { u.clone() } else { XPoly::var(nv, slot(c)).add(&u) };

    let mut vals = vec![Expr::z_unchecked(live, anchor, a, pivot); nv];
    for &c in &others {
        if c != pivot {
            vals[slot(c)] = &Expr::z_unchecked(live, anchor, a, c) - &vals[0];
        }
    }

    let mut out = Expr::constant_in(live, anchor, CoeffPoly::zero());
    for (zpart, rest) in groups {
        // Monomial in oriented W_c = Z(z_a - z_c).
        let mut poly = XPoly::one(nv);
        for &(g, k) in zpart.factors() {
            let Gen::Zg { a: x, b: y } = g else { unreachable!() };
            let (c, sign) = if x == a { (y, 1) } else { (x, -1) };
            let mut f = w(c).pow(k);
            if sign < 0 && k % 2 == 1 {
                f = f.scale(&CoeffPoly::from_int(-1));
            }
            poly = poly.mul(&f);
        }
        let prim = poly.map_powers(0, |j| bernoulli_primitive(j, nv, 0, &bern));
        out += &(&prim.eval(live, anchor, &vals) * &rest);
    }
    Ok(out)
}

/// `∫_{A} dz_a`: residues of a δ-primitive over the remaining variables.
pub fn acycle_once(e: &Expr, a: Var) -> Result<Expr> {
    check_quasi(e, a)?;
    let rest = e.live().without(a);
    let Some(p) = rest.largest() else {
        return lone_variable(e);
    };
    let g = delta_primitive(e, a, p)?;
    let mut out = Expr::zero(rest);
    for b in rest.iter() {
        out += &residue(&g, a, b);
    }
    Ok(out)
}

/// A function of a single point is constant; integrating it is the identity.
pub(crate) fn lone_variable(e: &Expr) -> Result<Expr> {
    match e.as_constant() {
        Some(c) => Ok(Expr::constant(VarSet::empty(), c)),
        None => Err(Error::NonConstantRemainder(e.render())),
    }
}

fn finish(e: Expr) -> Result<CoeffPoly> {
    e.as_constant().ok_or_else(|| Error::NonConstantRemainder(e.render()))
}

/// `∫_{A_σ(n)} ... ∫_{A_σ(1)}`, integrating `σ(1)` first.
pub fn ordered_acycle(e: &Expr, sigma: &[Var]) -> Result<CoeffPoly> {
    if VarSet::from_vars(sigma) != e.live() || sigma.len() != e.live().len() {
        return Err(Error::UnsupportedInput(format!("{sigma:?} is not an ordering of the live variables")));
    }
    let mut cur = e.clone();
    for &a in sigma.iter().take(sigma.len().saturating_sub(1)) {
        cur = acycle_once(&cur, a)?;
    }
    finish(cur)
}

/// `(1/n!) Σ_σ ∫_{A_σ}`.
pub fn average_acycle(e: &Expr) -> Result<CoeffPoly> {
    let perms = permutations(&e.live().to_vec());
    let count = perms.len() as i64;
    let mut total = CoeffPoly::zero();
    for s in perms {
        total += &ordered_acycle(e, &s)?;
    }
    Ok(total.scale(&Rational::new(1.into(), count.into())))
}

/// Holomorphic limit of `⨍` by the forest expansion into interleaved
/// A-cycle integrals and residues weighted by order-polytope volumes.
pub fn hollimit_via_forests(e: &Expr) -> Result<CoeffPoly> {
    if e.has_zg() || e.has_ag() || e.has_y() {
        return Err(Error::NotElliptic(e.render()));
    }
    let vars = e.live().to_vec();
    let n = vars.len();
    if n < 2 {
        return finish(e.clone());
    }
    // r[k] = 0 (A-cycle) or a position > k (residue target).
    let mut maps: Vec<Vec<usize>> = vec![vec![]];
    for k in 1..=n {
        let mut next = Vec::new();
        for m in &maps {
            let mut m0 = m.clone();
            m0.push(0);
            next.push(m0);
            for t in k + 1..=n {
                let mut mt = m.clone();
                mt.push(t);
                next.push(mt);
            }
        }
        maps = next;
    }
    let mut total = CoeffPoly::zero();
    for r in maps {
        let j: Vec<usize> = (1..=n).filter(|&k| r[k - 1] != 0).collect();
        let rj: Vec<usize> = j.iter().map(|&k| r[k - 1]).collect();
        let weight = if j.is_empty() {
            CoeffPoly::one()
        } else {
            CoeffPoly::iota_pow(j.len() as i32).scale(&tree_factorial(&j, &rj)?)
        };
        let mut cur = e.clone();
        for k in 1..=n {
            if cur.is_zero() {
                break;
            }
            if cur.live().len() == 1 {
                break;
            }
            cur = match r[k - 1] {
                0 => acycle_once(&cur, vars[k - 1])?,
                t => residue(&cur, vars[k - 1], vars[t - 1]),
            };
        }
        if cur.is_zero() {
            continue;
        }
        total += &(&finish(cur)? * &weight);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    fn l(n: usize) -> VarSet {
        VarSet::range(n)
    }

    #[test]
    fn delta_examples() {
        let z = Expr::z(l(2), 1, 2).unwrap();
        assert_eq!(delta(&z, 1).unwrap().as_constant().unwrap(), CoeffPoly::one());
        assert!(delta(&Expr::wp(l(2), 1, 2, 0).unwrap(), 1).unwrap().is_zero());
        assert_eq!(delta(&(&z * &z), 1).unwrap().render(), "2*Z(1,2) + I");
        assert!(matches!(delta(&Expr::zhat(l(2), 1, 2).unwrap(), 1), Err(Error::NotQuasiElliptic(1))));
    }

    #[test]
    fn primitive_examples() {
        let one = Expr::one(l(2));
        assert_eq!(delta_primitive(&one, 1, 2).unwrap().render(), "Z(1,2) - I/2");
        let z = Expr::z(l(2), 1, 2).unwrap();
        assert_eq!(delta_primitive(&z, 1, 2).unwrap().render(), "Z(1,2)^2/2 - I*Z(1,2)/2 + I^2/12");
    }

    #[test]
    fn primitive_inverts_delta_multivariable() {
        let z = |a, b| Expr::z(l(3), a, b).unwrap();
        let e = &(&z(1, 2) * &z(1, 3)) * &(&z(3, 1) + &Expr::wp(l(3), 2, 3, 0).unwrap());
        for p in [2, 3] {
            let g = delta_primitive(&e, 1, p).unwrap();
            assert_eq!(delta(&g, 1).unwrap(), e);
        }
    }

    #[test]
    fn acycle_examples() {
        let z = Expr::z(l(2), 1, 2).unwrap();
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert_eq!(ordered_acycle(&z, &[1, 2]).unwrap().render(), "-I/2");
        assert_eq!(ordered_acycle(&w, &[1, 2]).unwrap().render(), "I^2*E2/12");
        assert_eq!(ordered_acycle(&(&w * &w), &[1, 2]).unwrap().render(), "I^4*E4/144");
        assert_eq!(ordered_acycle(&(&z * &z), &[1, 2]).unwrap().render(), "I^2*E2/12 + I^2/6");
        assert_eq!(ordered_acycle(&w, &[2, 1]).unwrap(), ordered_acycle(&w, &[1, 2]).unwrap());
        assert_eq!(average_acycle(&w).unwrap().render(), "I^2*E2/12");
    }

    #[test]
    fn averaging_n3() {
        let e = &Expr::wp(l(3), 1, 2, 0).unwrap() * &Expr::wp(l(3), 2, 3, 0).unwrap();
        let lim = crate::regint::reg_default(&e).unwrap().holomorphic_limit();
        assert_eq!(average_acycle(&e).unwrap(), lim);
        assert_eq!(hollimit_via_forests(&e).unwrap(), lim);
    }

    #[test]
    fn hollimit_examples() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert_eq!(hollimit_via_forests(&w).unwrap().render(), "I^2*E2/12");
        assert_eq!(hollimit_via_forests(&(&w * &w)).unwrap().render(), "I^4*E4/144");
        let _ = rat(1, 2);
    }
}
