//! Small multivariate polynomials over [`CoeffPoly`] in formal variables,
//! used for iterated integrals and Bernoulli primitives before they are
//! evaluated on expressions.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::coeff::{int, CoeffPoly, Rational};
use crate::expr::{Expr, Var, VarSet};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, CoeffPoly>,
}

impl XPoly {
    pub fn zero(nvars: usize) -> Self {
        XPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: CoeffPoly) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, CoeffPoly::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, CoeffPoly::one());
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: CoeffPoly) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CoeffPoly)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &XPoly) -> XPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, c: &CoeffPoly) -> XPoly {
        let mut r = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            r.add_term(e.clone(), v * c);
        }
        r
    }

    pub fn mul(&self, o: &XPoly) -> XPoly {
        let mut r = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> XPoly {
        let mut r = Self::one(self.nvars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Replace variable `i` by the polynomial `p`.
    pub fn subst(&self, i: usize, p: &XPoly) -> XPoly {
        let mut pows = vec![Self::one(self.nvars)];
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            while pows.len() <= k {
                let next = pows.last().unwrap().mul(p);
                pows.push(next);
            }
            let mut rest = e.clone();
            rest[i] = 0;
            let mut mono = Self::zero(self.nvars);
            mono.add_term(rest, c.clone());
            r = r.add(&mono.mul(&pows[k]));
        }
        r
    }

    /// `∫_0^upper (self) dx_i`; `upper` must not involve `x_i`.
    pub fn integrate(&self, i: usize, upper: &XPoly) -> XPoly {
        let mut anti = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] += 1;
            anti.add_term(e2, c.scale(&Rational::new(1.into(), (e[i] as i64 + 1).into())));
        }
        anti.subst(i, upper)
    }

    /// Map every power `x_i^j` through `f(j)`, a polynomial in the same variables.
    pub fn map_powers(&self, i: usize, f: impl Fn(u32) -> XPoly) -> XPoly {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[i] = 0;
            let mut mono = Self::zero(self.nvars);
            mono.add_term(rest, c.clone());
            r = r.add(&mono.mul(&f(e[i])));
        }
        r
    }

    /// The constant value if no variable occurs.
    pub fn as_constant(&self) -> Option<CoeffPoly> {
        if self.terms.is_empty() {
            return Some(CoeffPoly::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|x| x.is_zero()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Evaluate on expressions (`vals[i]` for `x_i`).
    pub fn eval(&self, live: VarSet, anchor: Var, vals: &[Expr]) -> Expr {
        assert_eq!(vals.len(), self.nvars);
        let mut pows: Vec<Vec<Expr>> =
            vals.iter().map(|v| vec![Expr::constant_in(live, anchor, CoeffPoly::one()), v.clone()]).collect();
        let mut out = Expr::constant_in(live, anchor, CoeffPoly::zero());
        for (e, c) in &self.terms {
            let mut acc = Expr::constant_in(live, anchor, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while pows[i].len() <= k as usize {
                    let next = pows[i].last().unwrap() * &pows[i][1];
                    pows[i].push(next);
                }
                acc = &acc * &pows[i][k as usize];
            }
            out += &acc;
        }
        out
    }
}

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(int(1));
            continue;
        }
        // Σ_{k=0}^{m} C(m+1, k) B_k = 0
        let mut s = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += bk * binom(m + 1, k);
        }
        b.push(-s / binom(m + 1, m));
    }
    b
}

pub fn binom(n: usize, k: usize) -> Rational {
    let mut r = int(1);
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    #[test]
    fn bernoulli() {
        let b = bernoulli_numbers(6);
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rat(0, 1));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
    }

    #[test]
    fn iterated_integral() {
        // ∫_0^1 dx2 ∫_0^{x2} dx1 1 = 1/2
        let one = XPoly::one(2);
        let inner = one.integrate(0, &XPoly::var(2, 1));
        let outer = inner.integrate(1, &XPoly::constant(2, CoeffPoly::one()));
        assert_eq!(outer.as_constant().unwrap(), CoeffPoly::constant(rat(1, 2)));
    }
}
