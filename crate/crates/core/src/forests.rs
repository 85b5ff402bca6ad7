//! Maps `r: [n-1] -> [n]` with `j < r(j)`, read as planar rooted forests.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::coeff::{CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var, VarSet};
use crate::mpoly::XPoly;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Forest {
    pub n: usize,
    /// `r[j - 1] = r(j)` for `j = 1..n-1`.
    pub r: Vec<usize>,
}

impl Forest {
    pub fn new(n: usize, r: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::ArityTooSmall(n));
        }
        if r.len() != n - 1 || r.iter().enumerate().any(|(i, &p)| p <= i + 1 || p > n) {
            return Err(Error::InvalidChain(format!("{r:?} is not a forest map on [{n}]")));
        }
        Ok(Forest { n, r })
    }

    pub fn parent(&self, j: usize) -> usize {
        self.r[j - 1]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (1..self.n).filter(|&j| self.parent(j) == v).collect()
    }
}

/// All `(n-1)!` forests in lexicographic order of `r`.
pub fn enumerate_forests(n: usize) -> Result<Vec<Forest>> {
    if n < 2 {
        return Err(Error::ArityTooSmall(n));
    }
    let mut out = Vec::new();
    let mut r = vec![0; n - 1];
    fn rec(j: usize, n: usize, r: &mut Vec<usize>, out: &mut Vec<Forest>) {
        if j == n {
            out.push(Forest { n, r: r.clone() });
            return;
        }
        for p in j + 1..=n {
            r[j - 1] = p;
            rec(j + 1, n, r, out);
        }
    }
    rec(1, n, &mut r, &mut out);
    Ok(out)
}

/// Preorder from the root `n`, visiting children in increasing order.
pub fn forest_to_permutation(f: &Forest) -> Vec<usize> {
    let mut out = Vec::with_capacity(f.n - 1);
    let mut stack: Vec<usize> = f.children(f.n).into_iter().rev().collect();
    while let Some(v) = stack.pop() {
        out.push(v);
        stack.extend(f.children(v).into_iter().rev());
    }
    out
}

/// Left-to-right maxima become roots; every other entry hangs below the
/// rightmost larger entry preceding it.
pub fn permutation_to_forest(sigma: &[usize]) -> Result<Forest> {
    let n = sigma.len() + 1;
    let mut seen = vec![false; n];
    for &s in sigma {
        if s == 0 || s >= n || seen[s] {
            return Err(Error::InvalidChain(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    let mut r = vec![0; n - 1];
    for (i, &s) in sigma.iter().enumerate() {
        r[s - 1] = sigma[..i].iter().rev().find(|&&p| p > s).copied().unwrap_or(n);
    }
    Forest::new(n, r)
}

/// Connected components of `j ~ r(j)` inside `[n-1]`, ordered by least element.
pub fn trees(f: &Forest) -> Vec<BTreeSet<usize>> {
    let m = f.n - 1;
    let mut comp: Vec<usize> = (0..=m).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while c[x] != x {
            c[x] = c[c[x]];
            x = c[x];
        }
        x
    }
    for j in 1..=m {
        let p = f.parent(j);
        if p <= m {
            let (a, b) = (find(&mut comp, j), find(&mut comp, p));
            comp[a.max(b)] = a.min(b);
        }
    }
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for j in 1..=m {
        let root = find(&mut comp, j);
        match roots.iter().position(|&x| x == root) {
            Some(i) => {
                out[i].insert(j);
            }
            None => {
                roots.push(root);
                out.push(BTreeSet::from([j]));
            }
        }
    }
    out
}

/// Volume of `{0 <= x_j <= x_{r_j}, j in J}` with unbound parents in `[0, 1]`.
pub fn tree_factorial(j: &[usize], rj: &[usize]) -> Result<Rational> {
    if j.len() != rj.len() {
        return Err(Error::InvalidChain("index and parent lists differ in length".into()));
    }
    if j.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidChain(format!("{j:?} is not strictly increasing")));
    }
    if j.iter().zip(rj).any(|(a, b)| a >= b) || j.contains(&0) {
        return Err(Error::InvalidChain(format!("parents {rj:?} must exceed their children {j:?}")));
    }
    let nv = rj.iter().chain(j).copied().max().unwrap_or(0) + 1;
    let mut f = XPoly::one(nv);
    for (&c, &p) in j.iter().zip(rj) {
        f = f.integrate(c, &XPoly::var(nv, p));
    }
    let one = XPoly::constant(nv, CoeffPoly::one());
    let roots: BTreeSet<usize> = rj.iter().copied().filter(|p| !j.contains(p)).collect();
    for p in roots {
        f = f.integrate(p, &one);
    }
    let c = f.as_constant().expect("all variables integrated");
    Ok(c.as_constant().unwrap_or_else(Rational::zero))
}

/// `F_r` as a polynomial in `U_k = Zhat_{k, r_k}` (variable `k - 1`).
pub(crate) fn f_r_upoly(f: &Forest) -> XPoly {
    // Variables: U_1..U_{n-1} at 0..n-2, x_1..x_{n-1} at n-1..2n-3.
    let n = f.n;
    let nv = 2 * (n - 1);
    let x = |k: usize| n - 2 + k;
    let mut p = XPoly::one(nv);
    for k in 1..n {
        let mut upper = XPoly::var(nv, k - 1);
        let r = f.parent(k);
        if r < n {
            upper = upper.add(&XPoly::var(nv, x(r)));
        }
        p = p.integrate(x(k), &upper);
    }
    // Drop the (now absent) x-variables.
    let mut q = XPoly::zero(n - 1);
    for (e, c) in p.terms() {
        debug_assert!(e[n - 1..].iter().all(|&v| v == 0));
        q.add_term(e[..n - 1].to_vec(), c.clone());
    }
    q
}

/// `Zhat_{k, r}` on the variables `vars` (positions are 1-based), anchored at the last.
pub(crate) fn zhat_rel(vars: &[Var], live: VarSet, k: usize, r: usize) -> Expr {
    let n = vars.len();
    let anchor = vars[n - 1];
    let zhat = |i: usize| -> Expr {
        if i == n {
            Expr::constant_in(live, anchor, CoeffPoly::zero())
        } else {
            &Expr::z_unchecked(live, anchor, vars[i - 1], anchor)
                + &Expr::gen_raw(live, anchor, crate::expr::Gen::Ag(vars[i - 1]))
        }
    };
    &zhat(k) - &zhat(r)
}

/// `F_r` expanded into `Z` and `A` generators on variables `1..=n`.
pub fn f_r_polynomial(f: &Forest) -> Expr {
    let vars: Vec<Var> = (1..=f.n as Var).collect();
    f_r_on(f, &vars)
}

pub(crate) fn f_r_on(f: &Forest, vars: &[Var]) -> Expr {
    let live = VarSet::from_vars(vars);
    let anchor = *vars.last().unwrap();
    let u: Vec<Expr> = (1..f.n).map(|k| zhat_rel(vars, live, k, f.parent(k))).collect();
    f_r_upoly(f).eval(live, anchor, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    #[test]
    fn enumeration() {
        assert_eq!(enumerate_forests(2).unwrap(), vec![Forest { n: 2, r: vec![2] }]);
        let f3: Vec<Vec<usize>> = enumerate_forests(3).unwrap().into_iter().map(|f| f.r).collect();
        assert_eq!(f3, vec![vec![2, 3], vec![3, 3]]);
        assert_eq!(enumerate_forests(5).unwrap().len(), 24);
        assert!(matches!(enumerate_forests(1), Err(Error::ArityTooSmall(1))));
    }

    #[test]
    fn bijection_examples() {
        assert_eq!(permutation_to_forest(&[2, 1]).unwrap().r, vec![2, 3]);
        assert_eq!(permutation_to_forest(&[1, 2]).unwrap().r, vec![3, 3]);
        for f in enumerate_forests(6).unwrap() {
            assert_eq!(permutation_to_forest(&forest_to_permutation(&f)).unwrap(), f);
        }
    }

    #[test]
    fn tree_decomposition() {
        let t = |n, r: Vec<usize>| trees(&Forest::new(n, r).unwrap());
        assert_eq!(t(3, vec![3, 3]), vec![BTreeSet::from([1]), BTreeSet::from([2])]);
        assert_eq!(t(3, vec![2, 3]), vec![BTreeSet::from([1, 2])]);
        assert_eq!(t(4, vec![3, 3, 4]), vec![BTreeSet::from([1, 2, 3])]);
    }

    #[test]
    fn tree_factorials() {
        assert_eq!(tree_factorial(&[1], &[2]).unwrap(), rat(1, 2));
        assert_eq!(tree_factorial(&[1, 2], &[2, 3]).unwrap(), rat(1, 6));
        assert_eq!(tree_factorial(&[1, 2], &[3, 3]).unwrap(), rat(1, 3));
        assert!(tree_factorial(&[2], &[1]).is_err());
    }

    #[test]
    fn f_r_examples() {
        let l2 = VarSet::range(2);
        let f = f_r_polynomial(&Forest::new(2, vec![2]).unwrap());
        assert_eq!(f, Expr::zhat(l2, 1, 2).unwrap());
        let l3 = VarSet::range(3);
        let zh = |a| Expr::zhat(l3, a, 3).unwrap();
        let f = f_r_polynomial(&Forest::new(3, vec![3, 3]).unwrap());
        assert_eq!(f, &zh(1) * &zh(2));
        let f = f_r_polynomial(&Forest::new(3, vec![2, 3]).unwrap());
        let z12 = &zh(1) - &zh(2);
        let expect = &(&z12 * &zh(2)) + &(&zh(2) * &zh(2)).scale_rat(&rat(1, 2));
        assert_eq!(f, expect);
    }
}
