//! Independent q-expansion oracle for ordered A-cycle integrals.
//!
//! Each generator is expanded in the Fourier variables `x_i = e^{I z_i}` and
//! `q = e^{I τ}` inside the chamber fixed by the contour heights; the A-cycle
//! integral is then the constant term in every `x_i`. Values are graded by
//! the power of `I`, which equals the generator weight of a monomial.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::coeff::{int, rat, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{Expr, Gen, Var};
use crate::laurent::{wp_model, z_model};
use crate::mpoly::bernoulli_numbers;

/// Power series in `q` (up to `q^order`) with Laurent monomials in `x_1..x_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    pub order: u32,
    pub nvars: usize,
    terms: HashMap<(u32, Vec<i32>), Rational>,
}

impl QSeries {
    pub fn zero(order: u32, nvars: usize) -> Self {
        QSeries { order, nvars, terms: HashMap::new() }
    }

    pub fn add_term(&mut self, k: u32, a: Vec<i32>, c: Rational) {
        if c.is_zero() || k > self.order {
            return;
        }
        let key = (k, a);
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, Vec<i32>), &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficients of `q^0..=q^order` of the `x`-constant term.
    pub fn constant_term(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.order as usize + 1];
        for ((k, a), c) in &self.terms {
            if a.iter().all(|&e| e == 0) {
                out[*k as usize] += c;
            }
        }
        out
    }

    fn scale(&self, c: &Rational) -> QSeries {
        let mut r = QSeries::zero(self.order, self.nvars);
        for ((k, a), v) in &self.terms {
            r.add_term(*k, a.clone(), v * c);
        }
        r
    }

    /// Product, keeping only monomials that can still reach the constant
    /// term at `q^order` (see [`admissible`]).
    fn mul(&self, o: &QSeries) -> Result<QSeries> {
        let mut r = QSeries::zero(self.order, self.nvars);
        for ((k1, a1), c1) in &self.terms {
            for ((k2, a2), c2) in &o.terms {
                let k = k1 + k2;
                if k > self.order {
                    continue;
                }
                let a: Vec<i32> = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
                if admissible(k, &a, self.order)? {
                    r.add_term(k, a, c1 * c2);
                }
            }
        }
        Ok(r)
    }
}

/// With positions ordered from the highest contour down and heights
/// `1 > ε_1 > ... > ε_m > 0`, the exponent `k + Σ a_i ε_i` of a monomial is
/// positive for every factor in the chamber. A monomial can contribute to the
/// constant term at `q^order` only if this exponent stays `<= order` over the
/// whole chamber; the extremes are the prefix sums of `a`.
fn admissible(k: u32, a: &[i32], order: u32) -> Result<bool> {
    let (mut s, mut hi, mut lo) = (0i64, 0i64, 0i64);
    for &e in a {
        s += e as i64;
        hi = hi.max(s);
        lo = lo.min(s);
    }
    if k as i64 + lo < 0 {
        return Err(Error::TruncationOverflow(format!("monomial q^{k} x^{a:?} lies outside the chamber")));
    }
    if a.iter().any(|e| e.unsigned_abs() > order) && k as i64 + hi <= order as i64 {
        return Err(Error::TruncationOverflow(format!("x-support of q^{k} x^{a:?} exceeds {order}")));
    }
    Ok(k as i64 + hi <= order as i64)
}

/// A q-series for each power of `I`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GradedQ(pub BTreeMap<i32, Vec<Rational>>);

impl GradedQ {
    fn add_series(&mut self, iota: i32, s: &[Rational]) {
        let slot = self.0.entry(iota).or_insert_with(|| vec![Rational::zero(); s.len()]);
        for (x, y) in slot.iter_mut().zip(s) {
            *x += y;
        }
        if slot.iter().all(|c| c.is_zero()) {
            self.0.remove(&iota);
        }
    }

    /// `{"<power of I>": ["c0", "c1", ...]}` with exact rational strings.
    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> = self
            .0
            .iter()
            .map(|(k, s)| (k.to_string(), s.iter().map(|c| c.to_string()).collect::<Vec<_>>().into()))
            .collect();
        m.into()
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, s)| {
                let body = render_q(s);
                match k {
                    0 => body,
                    1 => format!("I*({body})"),
                    _ => format!("I^{k}*({body})"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// `c0 + c1*q + c2*q^2 + ...`, zero coefficients omitted.
pub fn render_q(s: &[Rational]) -> String {
    let mut out = String::new();
    for (i, c) in s.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let body = match (i, mag.is_one()) {
            (0, _) => format!("{mag}"),
            (1, true) => "q".into(),
            (1, false) => format!("{mag}*q"),
            (_, true) => format!("q^{i}"),
            (_, false) => format!("{mag}*q^{i}"),
        };
        if out.is_empty() {
            out = if c.is_negative() { format!("-{body}") } else { body };
        } else {
            out += if c.is_negative() { " - " } else { " + " };
            out += &body;
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn sigma(k: u32, m: u32) -> Rational {
    let mut s = Rational::zero();
    for d in 1..=m {
        if m.is_multiple_of(d) {
            s += Rational::from_integer(num_bigint::BigInt::from(d).pow(k));
        }
    }
    s
}

/// `E_k` for `k in {2, 4, 6}` through `q^order`.
pub fn eisenstein_q(k: u32, order: u32) -> Result<Vec<Rational>> {
    let c = match k {
        2 => -24,
        4 => 240,
        6 => -504,
        _ => return Err(Error::InvalidIndex(format!("E{k} is not one of E2, E4, E6"))),
    };
    let mut out = vec![Rational::zero(); order as usize + 1];
    out[0] = int(1);
    for m in 1..=order {
        out[m as usize] = sigma(k - 1, m) * int(c);
    }
    Ok(out)
}

fn qmul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len();
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Substitute the q-expansions of `E2, E4, E6` into a Y-free coefficient.
pub fn coeff_to_q(c: &CoeffPoly, order: u32) -> Result<GradedQ> {
    if c.has_y() {
        return Err(Error::UnsupportedGenerator("Y".into()));
    }
    let (e2, e4, e6) = (eisenstein_q(2, order)?, eisenstein_q(4, order)?, eisenstein_q(6, order)?);
    let mut out = GradedQ::default();
    for (m, v) in c.terms() {
        let mut s = vec![Rational::zero(); order as usize + 1];
        s[0] = v.clone();
        for (base, e) in [(&e2, m.e2), (&e4, m.e4), (&e6, m.e6)] {
            for _ in 0..e {
                s = qmul(&s, base);
            }
        }
        out.add_series(m.iota, &s);
    }
    Ok(out)
}

/// Fourier expansion of a generator in the chamber whose contour heights
/// decrease along `heights`; returns the power of `I` factored out and the
/// remaining rational series.
pub fn fourier_gen(g: Gen, heights: &[Var], order: u32) -> Result<(i32, QSeries)> {
    let (w, mut s) = fourier_raw(g, heights, order)?;
    s.terms.retain(|(k, a), _| admissible(*k, a, order).unwrap_or(false));
    Ok((w, s))
}

/// [`fourier_gen`] before pruning to the monomials that can reach a constant term.
fn fourier_raw(g: Gen, heights: &[Var], order: u32) -> Result<(i32, QSeries)> {
    let pos = |v: Var| {
        heights
            .iter()
            .position(|&h| h == v)
            .ok_or_else(|| Error::UnsupportedInput(format!("z{v} has no contour height")))
    };
    let (a, b) = match g {
        Gen::Wp { a, b, .. } | Gen::Zg { a, b } => (a, b),
        Gen::Ag(_) => return Err(Error::UnsupportedGenerator(g.render(0))),
    };
    let (pa, pb) = (pos(a)?, pos(b)?);
    // y = x_hi / x_lo; a generator in z_lo - z_hi picks up the parity sign.
    let (hi, lo, flipped) = if pa < pb { (pa, pb, false) } else { (pb, pa, true) };
    let n = heights.len();
    let mono = |d: i32| {
        let mut e = vec![0; n];
        e[hi] = d;
        e[lo] = -d;
        e
    };
    let mut s = QSeries::zero(order, n);
    let top = order as i32;
    let (iota, sign) = match g {
        Gen::Wp { k, .. } => {
            let pw = |d: i32| int(d as i64).pow(k as i32) * int(d.abs() as i64);
            if k == 0 {
                s.add_term(0, mono(0), rat(1, 12));
            }
            for d in 1..=top {
                s.add_term(0, mono(d), pw(d));
            }
            for m in 1..=top {
                for d in 1..=top / m {
                    let q = (m * d) as u32;
                    s.add_term(q, mono(d), pw(d));
                    s.add_term(q, mono(-d), pw(-d));
                    if k == 0 {
                        s.add_term(q, mono(0), int(-2 * d as i64));
                    }
                }
            }
            (k as i32 + 2, if flipped && k % 2 == 1 { -1 } else { 1 })
        }
        Gen::Zg { .. } => {
            s.add_term(0, mono(0), rat(-1, 2));
            for d in 1..=top {
                s.add_term(0, mono(d), int(-1));
            }
            for m in 1..=top {
                for d in 1..=top / m {
                    let q = (m * d) as u32;
                    s.add_term(q, mono(d), int(-1));
                    s.add_term(q, mono(-d), int(1));
                }
            }
            (1, if flipped { -1 } else { 1 })
        }
        Gen::Ag(_) => unreachable!(),
    };
    Ok((iota, if sign < 0 { s.scale(&int(-1)) } else { s }))
}

/// `∫_{A_σ(n)} ... ∫_{A_σ(1)} e` as q-series, graded by powers of `I`.
/// The contour of `σ(1)` is the highest.
pub fn acycle_by_constant_term(e: &Expr, sigma: &[Var], order: u32) -> Result<GradedQ> {
    if crate::expr::VarSet::from_vars(sigma) != e.live() || sigma.len() != e.live().len() {
        return Err(Error::UnsupportedInput(format!("{sigma:?} is not an ordering of the live variables")));
    }
    if e.has_ag() {
        return Err(Error::UnsupportedGenerator("A".into()));
    }
    let n = sigma.len();
    let mut cache: HashMap<Gen, (i32, QSeries)> = HashMap::new();
    let mut out = GradedQ::default();
    for (m, c) in e.terms() {
        let mut prod = QSeries::zero(order, n);
        prod.add_term(0, vec![0; n], int(1));
        let mut iota = 0;
        for &(g, k) in m.factors() {
            if let std::collections::hash_map::Entry::Vacant(v) = cache.entry(g) {
                v.insert(fourier_gen(g, sigma, order)?);
            }
            let (w, s) = &cache[&g];
            for _ in 0..k {
                prod = prod.mul(s)?;
                iota += w;
            }
        }
        let ct = prod.constant_term();
        for (ci, cs) in coeff_to_q(c, order)?.0 {
            out.add_series(iota + ci, &qmul(&ct, &cs));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct QMismatch {
    pub iota: i32,
    pub q_power: usize,
    pub symbolic: String,
    pub oracle: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct QCompareReport {
    pub order: u32,
    pub matches: bool,
    pub first_mismatch: Option<QMismatch>,
}

/// Diff a symbolic (Y-free) value against the constant-term oracle through `q^order`.
pub fn compare(symbolic: &CoeffPoly, sigma: &[Var], e: &Expr, order: u32) -> Result<QCompareReport> {
    let lhs = coeff_to_q(symbolic, order)?;
    let rhs = acycle_by_constant_term(e, sigma, order)?;
    Ok(diff_graded(&lhs, &rhs, order))
}

fn diff_graded(lhs: &GradedQ, rhs: &GradedQ, order: u32) -> QCompareReport {
    let zero = vec![Rational::zero(); order as usize + 1];
    let keys: std::collections::BTreeSet<i32> = lhs.0.keys().chain(rhs.0.keys()).copied().collect();
    let mut best: Option<QMismatch> = None;
    for k in keys {
        let (l, r) = (lhs.0.get(&k).unwrap_or(&zero), rhs.0.get(&k).unwrap_or(&zero));
        if let Some(i) = (0..=order as usize).find(|&i| l[i] != r[i]) {
            if best.as_ref().is_none_or(|b| i < b.q_power) {
                best = Some(QMismatch { iota: k, q_power: i, symbolic: l[i].to_string(), oracle: r[i].to_string() });
            }
        }
    }
    QCompareReport { order, matches: best.is_none(), first_mismatch: best }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub generator: String,
    pub t_power: i32,
    pub report: QCompareReport,
}

/// Laurent coefficients in `t = z_a - z_b` of the q-zero part, from closed
/// forms in `u = I t`: `-1/(1-y) = Σ B_n u^(n-1)/n!` and
/// `y/(1-y)^2 = 1/u^2 - Σ_{n>=2} (n-1) B_n u^(n-2)/n!`.
fn q0_laurent(g: Gen, hi: i32) -> BTreeMap<i32, Rational> {
    let bern = bernoulli_numbers((hi + 6).max(2) as usize);
    let mut fact = vec![Rational::one()];
    for i in 1..bern.len() {
        let f = &fact[i - 1] * int(i as i64);
        fact.push(f);
    }
    let mut out = BTreeMap::new();
    match g {
        Gen::Zg { .. } => {
            // 1/2 - 1/(1-y)
            for (n, b) in bern.iter().enumerate() {
                *out.entry(n as i32 - 1).or_insert_with(Rational::zero) += b / &fact[n];
            }
            *out.entry(0).or_insert_with(Rational::zero) += rat(1, 2);
        }
        Gen::Wp { k, .. } => {
            let mut base: BTreeMap<i32, Rational> = BTreeMap::new();
            base.insert(-2, int(1));
            for (n, b) in bern.iter().enumerate().skip(2) {
                *base.entry(n as i32 - 2).or_insert_with(Rational::zero) -= b * int(n as i64 - 1) / &fact[n];
            }
            *base.entry(0).or_insert_with(Rational::zero) += rat(1, 12);
            // d/du, k times.
            for _ in 0..k {
                base = base.into_iter().filter(|(p, _)| *p != 0).map(|(p, c)| (p - 1, c * int(p as i64))).collect();
            }
            out = base;
        }
        Gen::Ag(_) => {}
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Validate [`fourier_gen`] against the Laurent model of `Z` and `℘^(k)`,
/// `k <= 2`, for powers `t^p`, `p <= t_order`, through `q^order`.
pub fn fourier_cross_validate(t_order: i32, order: u32) -> Result<Vec<CrossCheck>> {
    let mut out = Vec::new();
    let gens = [Gen::Zg { a: 1, b: 2 }, Gen::Wp { a: 1, b: 2, k: 0 }, Gen::Wp { a: 1, b: 2, k: 1 }, Gen::Wp { a: 1, b: 2, k: 2 }];
    for g in gens {
        let (model, lo) = match g {
            Gen::Zg { .. } => (z_model(t_order), -1),
            Gen::Wp { k, .. } => (wp_model(k, t_order), -2 - k as i32),
            Gen::Ag(_) => unreachable!(),
        };
        let (w, s) = fourier_raw(g, &[1, 2], order)?;
        let q0 = q0_laurent(g, t_order);
        for p in lo..=t_order {
            let lhs = coeff_to_q(&model[(p - lo) as usize], order)?;
            // Fourier side: c y^d q^m contributes c (I d)^p / p! to t^p for m >= 1;
            // the q^0 part comes from the closed form.
            let mut series = vec![Rational::zero(); order as usize + 1];
            series[0] = q0.get(&p).cloned().unwrap_or_else(Rational::zero);
            if p >= 0 {
                let pf: Rational = (1..=p).map(|i| int(i as i64)).product();
                for ((k, a), c) in s.terms() {
                    if *k == 0 {
                        continue;
                    }
                    series[*k as usize] += c * int(a[0] as i64).pow(p) / &pf;
                }
            }
            let mut rhs = GradedQ::default();
            rhs.add_series(w + p, &series);
            out.push(CrossCheck { generator: g.render(2), t_power: p, report: diff_graded(&lhs, &rhs, order) });
        }
    }
    Ok(out)
}
