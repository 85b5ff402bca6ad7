//! Exact polynomials in the output symbols `I` (= 2πi), `E2`, `E4`, `E6`, `Y`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exponent vector. `iota` may go negative: `E2hat` needs `I^-2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct CoeffMono {
    pub iota: i32,
    pub e2: u32,
    pub e4: u32,
    pub e6: u32,
    pub y: u32,
}

impl CoeffMono {
    pub const ONE: CoeffMono = CoeffMono { iota: 0, e2: 0, e4: 0, e6: 0, y: 0 };

    pub fn iota(k: i32) -> Self {
        CoeffMono { iota: k, ..Self::ONE }
    }

    pub fn mul(&self, o: &CoeffMono) -> CoeffMono {
        CoeffMono {
            iota: self.iota + o.iota,
            e2: self.e2 + o.e2,
            e4: self.e4 + o.e4,
            e6: self.e6 + o.e6,
            y: self.y + o.y,
        }
    }

    pub fn weight(&self) -> i64 {
        2 * self.e2 as i64 + 4 * self.e4 as i64 + 6 * self.e6 as i64 + 2 * self.y as i64
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }

    fn factors(&self, e2_name: &str) -> Vec<String> {
        self.factor_strings(e2_name)
    }
}

/// Y ascending, then E2, E4, E6, I descending.
pub(crate) fn render_order(s: &CoeffMono, o: &CoeffMono) -> Ordering {
    s.y.cmp(&o.y)
        .then(o.e2.cmp(&s.e2))
        .then(o.e4.cmp(&s.e4))
        .then(o.e6.cmp(&s.e6))
        .then(o.iota.cmp(&s.iota))
}

impl CoeffMono {
    pub(crate) fn factor_strings(&self, e2_name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |name: &str, k: i64| match k {
            0 => {}
            1 => out.push(name.to_string()),
            k => out.push(format!("{name}^{k}")),
        };
        push("I", self.iota as i64);
        push(e2_name, self.e2 as i64);
        push("E4", self.e4 as i64);
        push("E6", self.e6 as i64);
        push("Y", self.y as i64);
        out
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct CoeffPoly {
    terms: BTreeMap<CoeffMono, Rational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(CoeffMono::ONE, c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn term(m: CoeffMono, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn iota() -> Self {
        Self::term(CoeffMono::iota(1), Rational::one())
    }
    pub fn iota_pow(k: i32) -> Self {
        Self::term(CoeffMono::iota(k), Rational::one())
    }
    pub fn e2() -> Self {
        Self::term(CoeffMono { e2: 1, ..CoeffMono::ONE }, Rational::one())
    }
    pub fn e4() -> Self {
        Self::term(CoeffMono { e4: 1, ..CoeffMono::ONE }, Rational::one())
    }
    pub fn e6() -> Self {
        Self::term(CoeffMono { e6: 1, ..CoeffMono::ONE }, Rational::one())
    }
    pub fn y() -> Self {
        Self::term(CoeffMono { y: 1, ..CoeffMono::ONE }, Rational::one())
    }

    /// `E2hat = E2 - 12 Y / I^2`.
    pub fn e2hat() -> Self {
        Self::e2() - Self::term(CoeffMono { iota: -2, y: 1, ..CoeffMono::ONE }, int(12))
    }

    pub fn add_term(&mut self, m: CoeffMono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&CoeffMono::ONE).is_some_and(|c| c.is_one())
    }

    /// The rational value if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&CoeffMono::ONE).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffMono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        CoeffPoly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    pub fn mul_mono(&self, m: &CoeffMono) -> Self {
        CoeffPoly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn map_terms(&self, mut f: impl FnMut(&CoeffMono, &Rational) -> CoeffPoly) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out += &f(m, c);
        }
        out
    }

    pub fn partial_y(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.y > 0 {
                out.add_term(CoeffMono { y: m.y - 1, ..*m }, c * int(m.y as i64));
            }
        }
        out
    }

    pub fn partial_e2(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.e2 > 0 {
                out.add_term(CoeffMono { e2: m.e2 - 1, ..*m }, c * int(m.e2 as i64));
            }
        }
        out
    }

    /// Y-degree-0 part.
    pub fn holomorphic_limit(&self) -> Self {
        CoeffPoly {
            terms: self.terms.iter().filter(|(m, _)| m.y == 0).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Coefficient of `Y^k`, as a Y-free polynomial.
    pub fn y_coefficient(&self, k: u32) -> Self {
        CoeffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.y == k)
                .map(|(m, c)| (CoeffMono { y: 0, ..*m }, c.clone()))
                .collect(),
        }
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|m| m.y).max().unwrap_or(0)
    }

    pub fn has_y(&self) -> bool {
        self.terms.keys().any(|m| m.y > 0)
    }

    pub fn has_e2(&self) -> bool {
        self.terms.keys().any(|m| m.e2 > 0)
    }

    pub fn min_iota(&self) -> i32 {
        self.terms.keys().map(|m| m.iota).min().unwrap_or(0)
    }

    /// Distinct weights of the monomials, ascending.
    pub fn weights(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.terms.keys().map(|m| m.weight()).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    /// Rewrite in the basis `{I, E2hat, E4, E6}` via `E2 = E2hat + 12 Y / I^2`.
    ///
    /// The returned polynomial stores `E2hat` in the `e2` slot and has no `Y`.
    /// Fails with the surviving Y-part when the input is not of that form.
    pub fn to_almost_holomorphic(&self) -> Result<CoeffPoly> {
        // Work in the ring with an extra symbol H = E2hat carried in `e2`,
        // and a separate Y exponent for what remains.
        let shift = CoeffPoly::e2() + CoeffPoly::term(CoeffMono { iota: -2, y: 1, ..CoeffMono::ONE }, int(12));
        let mut out = CoeffPoly::zero();
        for (m, c) in &self.terms {
            let base = CoeffPoly::term(CoeffMono { e2: 0, ..*m }, c.clone());
            out += &(&base * &shift.pow(m.e2));
        }
        let residual = CoeffPoly {
            terms: out.terms.iter().filter(|(m, _)| m.y > 0).map(|(m, c)| (*m, c.clone())).collect(),
        };
        if residual.is_zero() {
            Ok(out)
        } else {
            Err(Error::ResidualY(residual.render_with("E2hat")))
        }
    }

    /// Inverse of [`to_almost_holomorphic`]: read `e2` as `E2hat` and expand.
    pub fn from_almost_holomorphic(&self) -> CoeffPoly {
        let hat = CoeffPoly::e2hat();
        let mut out = CoeffPoly::zero();
        for (m, c) in &self.terms {
            let base = CoeffPoly::term(CoeffMono { e2: 0, ..*m }, c.clone());
            out += &(&base * &hat.pow(m.e2));
        }
        out
    }

    pub fn render(&self) -> String {
        self.render_with("E2")
    }

    pub fn render_with(&self, e2_name: &str) -> String {
        let mut items: Vec<(&CoeffMono, &Rational)> = self.terms.iter().collect();
        items.sort_by(|a, b| render_order(a.0, b.0));
        let parts: Vec<(bool, String)> = items
            .into_iter()
            .map(|(m, c)| render_term(c, &m.factors(e2_name), &[]))
            .collect();
        join_signed(parts)
    }
}

/// Renders `c * f1 * f2 ... * g1 * g2` as `[num*]f1*...*g1...[/den]`; returns (negative, body).
pub(crate) fn render_term(c: &Rational, sym: &[String], gens: &[String]) -> (bool, String) {
    let neg = c.is_negative();
    let num = c.numer().abs();
    let den = c.denom();
    let mut factors: Vec<String> = Vec::new();
    let has_body = !sym.is_empty() || !gens.is_empty();
    if !num.is_one() || !has_body {
        factors.push(num.to_string());
    }
    factors.extend(sym.iter().cloned());
    factors.extend(gens.iter().cloned());
    let mut s = factors.join("*");
    if !den.is_one() {
        s.push('/');
        s.push_str(&den.to_string());
    }
    (neg, s)
}

pub(crate) fn join_signed(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (neg, body)) in parts.into_iter().enumerate() {
        match (i, neg) {
            (0, false) => {}
            (0, true) => s.push('-'),
            (_, false) => s.push_str(" + "),
            (_, true) => s.push_str(" - "),
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<Rational> for CoeffPoly {
    fn from(c: Rational) -> Self {
        CoeffPoly::constant(c)
    }
}

impl AddAssign<&CoeffPoly> for CoeffPoly {
    fn add_assign(&mut self, o: &CoeffPoly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&CoeffPoly> for CoeffPoly {
    fn sub_assign(&mut self, o: &CoeffPoly) {
        for (m, c) in &o.terms {
            self.add_term(*m, -c);
        }
    }
}

impl Add<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl Sub<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = self.clone();
        r -= o;
        r
    }
}

impl Add for CoeffPoly {
    type Output = CoeffPoly;
    fn add(mut self, o: CoeffPoly) -> CoeffPoly {
        self += &o;
        self
    }
}

impl Sub for CoeffPoly {
    type Output = CoeffPoly;
    fn sub(mut self, o: CoeffPoly) -> CoeffPoly {
        self -= &o;
        self
    }
}

impl Mul<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }
}

impl Mul for CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, o: CoeffPoly) -> CoeffPoly {
        &self * &o
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        CoeffPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl Neg for CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target() -> CoeffPoly {
        CoeffPoly::iota_pow(2).scale(&rat(1, 12)) * CoeffPoly::e2() - CoeffPoly::y()
    }

    #[test]
    fn arithmetic_examples() {
        assert!((CoeffPoly::e2() - CoeffPoly::e2()).is_zero());
        assert_eq!(target().render(), "I^2*E2/12 - Y");
        assert_eq!(CoeffPoly::iota() * CoeffPoly::iota(), CoeffPoly::iota_pow(2));
    }

    #[test]
    fn almost_holomorphic_rewrite() {
        let h = target().to_almost_holomorphic().unwrap();
        assert_eq!(h.render_with("E2hat"), "I^2*E2hat/12");
        let e4 = CoeffPoly::iota_pow(4).scale(&rat(1, 144)) * CoeffPoly::e4();
        assert_eq!(e4.to_almost_holomorphic().unwrap(), e4);
        assert!(matches!((CoeffPoly::e2() - CoeffPoly::y()).to_almost_holomorphic(), Err(Error::ResidualY(_))));
    }

    #[test]
    fn y_operations() {
        assert_eq!(target().partial_y(), CoeffPoly::from_int(-1));
        assert_eq!(target().holomorphic_limit().render(), "I^2*E2/12");
        assert!((CoeffPoly::y().pow(2) * CoeffPoly::e4()).holomorphic_limit().is_zero());
    }

    #[test]
    fn rendering() {
        assert_eq!(CoeffPoly::iota().scale(&rat(-1, 2)).render(), "-I/2");
        assert_eq!(CoeffPoly::zero().render(), "0");
        assert_eq!(CoeffPoly::constant(rat(-3, 7)).render(), "-3/7");
        let p = CoeffPoly::iota_pow(8).scale(&rat(3, 7)) * CoeffPoly::e4().pow(2);
        assert_eq!(p.render(), "3*I^8*E4^2/7");
    }
}
