//! Expansion of expressions in `t = z_a - z_b`.
//!
//! The antiholomorphic part of `A(t)` is dropped: only `-Y t` survives. Every
//! consumer extracts coefficients of holomorphic powers of `t`, where the
//! dropped part cannot contribute.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::One;

use crate::coeff::{int, rat, CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{e2_const, Expr, Gen, GenMono, Var, VarSet};

fn g_cache() -> &'static Mutex<Vec<CoeffPoly>> {
    static CACHE: OnceLock<Mutex<Vec<CoeffPoly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// `G_{2k}` in `Q[I][E4, E6]`, for `2k >= 4`.
pub fn eisenstein_g(two_k: u32) -> Result<CoeffPoly> {
    if two_k < 4 || two_k % 2 == 1 {
        return Err(Error::InvalidIndex(format!("G_{two_k} is defined for even indices >= 4")));
    }
    Ok(g_upto(two_k / 2)[(two_k / 2) as usize].clone())
}

/// Table indexed by `k` holding `G_{2k}`; entries 0 and 1 are zero.
fn g_upto(kmax: u32) -> Vec<CoeffPoly> {
    let mut tab = g_cache().lock().unwrap();
    if tab.is_empty() {
        tab.push(CoeffPoly::zero());
        tab.push(CoeffPoly::zero());
        tab.push(CoeffPoly::iota_pow(4).scale(&rat(1, 720)) * CoeffPoly::e4());
        tab.push(CoeffPoly::iota_pow(6).scale(&rat(-1, 30240)) * CoeffPoly::e6());
    }
    while tab.len() <= kmax as usize {
        let k = tab.len() as i64;
        let mut s = CoeffPoly::zero();
        for j in 2..=k - 2 {
            let c = int((2 * j - 1) * (2 * k - 2 * j - 1));
            s += &(&tab[j as usize] * &tab[(k - j) as usize]).scale(&c);
        }
        let f = rat(3, (2 * k + 1) * (k - 3) * (2 * k - 1));
        tab.push(s.scale(&f));
    }
    tab[..=kmax as usize].to_vec()
}

/// Coefficient of `t^q` in `℘(t)`.
fn wp_coeff(q: i32, g: &[CoeffPoly]) -> CoeffPoly {
    match q {
        -2 => CoeffPoly::one(),
        q if q >= 2 && q % 2 == 0 => {
            let k = (q / 2 + 1) as usize;
            g[k].scale(&int(2 * k as i64 - 1))
        }
        _ => CoeffPoly::zero(),
    }
}

/// Coefficient of `t^q` in `Z(t)`.
fn z_coeff(q: i32, g: &[CoeffPoly]) -> CoeffPoly {
    match q {
        -1 => CoeffPoly::one(),
        1 => -e2_const(),
        q if q >= 3 && q % 2 == 1 => -&g[((q + 1) / 2) as usize],
        _ => CoeffPoly::zero(),
    }
}

fn falling(top: i32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k as i32 {
        r *= int((top - i) as i64);
    }
    r
}

/// Coefficients of `℘^(k)(t)` for powers `-2-k ..= hi`.
pub fn wp_model(k: u32, hi: i32) -> Vec<CoeffPoly> {
    let lo = -2 - k as i32;
    let g = g_upto(((hi + k as i32) / 2 + 2).max(3) as u32);
    (lo..=hi).map(|p| wp_coeff(p + k as i32, &g).scale(&falling(p + k as i32, k))).collect()
}

/// Coefficients of `Z(t)` for powers `-1 ..= hi`.
pub fn z_model(hi: i32) -> Vec<CoeffPoly> {
    let g = g_upto(((hi + 1) / 2 + 1).max(3) as u32);
    (-1..=hi).map(|p| z_coeff(p, &g)).collect()
}

/// Truncated Laurent series with coefficient `c[i]` at `t^(lo + i)`.
#[derive(Clone, Debug)]
struct TSeries {
    lo: i32,
    c: Vec<Expr>,
}

impl TSeries {
    fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    fn mul(&self, o: &TSeries, hi: i32, zero: &Expr) -> TSeries {
        let lo = self.lo + o.lo;
        let len = (hi - lo + 1).max(0) as usize;
        let mut c = vec![zero.clone(); len];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.c.iter().enumerate() {
                let k = i + j;
                if k >= len {
                    break;
                }
                if !y.is_zero() {
                    c[k] += &(x * y);
                }
            }
        }
        TSeries { lo, c }
    }
}

#[derive(Clone, Debug)]
pub struct LaurentSeries {
    pub a: Var,
    pub b: Var,
    pub lo: i32,
    pub hi: i32,
    pub coeffs: Vec<Expr>,
}

impl LaurentSeries {
    /// Coefficient of `t^p` (zero outside the window).
    pub fn coeff(&self, p: i32) -> Option<&Expr> {
        if p < self.lo || p > self.hi {
            None
        } else {
            self.coeffs.get((p - self.lo) as usize)
        }
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = self.lo + i as i32;
            parts.push(format!("({})*t^{}", c.render(), p));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Default window `[-P, P + D + 4]`; `REGINT_EXPANSION_ORDER` overrides the upper end.
pub fn default_window(e: &Expr, a: Var, b: Var) -> (i32, i32) {
    let p = e.pole_order(a, b) as i32;
    let hi = std::env::var("REGINT_EXPANSION_ORDER")
        .ok()
        .and_then(|s| s.trim().parse::<i32>().ok())
        .unwrap_or(p + e.max_degree() as i32 + 4);
    (-p, hi)
}

/// Expands `e` with `z_a = z_b + t` over powers `lo..=hi`.
pub fn expand(e: &Expr, a: Var, b: Var, lo: i32, hi: i32) -> Result<LaurentSeries> {
    if a == b {
        return Err(Error::InvalidIndex(format!("cannot expand z{a} about itself")));
    }
    if lo > hi {
        return Err(Error::InvalidIndex(format!("empty window [{lo}, {hi}]")));
    }
    let coeffs = expand_core(e, a, b, lo, hi, true)?;
    Ok(LaurentSeries { a, b, lo, hi, coeffs })
}

/// Coefficient of `t^p` in the expansion of `e` in `z_a` about `z_b`.
pub fn coefficient(e: &Expr, a: Var, b: Var, p: i32) -> Expr {
    let mut v = expand_core(e, a, b, p, p, false).expect("non-strict expansion cannot fail");
    v.pop().unwrap()
}

fn expand_core(e: &Expr, a: Var, b: Var, lo: i32, hi: i32, strict: bool) -> Result<Vec<Expr>> {
    let live = e.live();
    assert!(live.contains(a) && live.contains(b), "expansion variables must be live");
    let e = if e.anchor() == a { e.reanchor(live.without(a).largest().unwrap()) } else { e.clone() };
    let live2 = live.without(a);
    let anchor2 = e.anchor();
    let zero = Expr::constant_in(live2, anchor2, CoeffPoly::zero());
    let mut out = vec![zero.clone(); (hi - lo + 1) as usize];

    // Group by the factors involving z_a.
    let mut groups: BTreeMap<GenMono, Expr> = BTreeMap::new();
    for (m, c) in e.terms() {
        let (ap, rest) = m.split(|g| g.involves(a));
        let slot = groups.entry(ap).or_insert_with(|| zero.clone());
        slot.add_term(rest, c.clone());
    }

    let ctx = Ctx { a, b, live2, anchor2 };
    let mut memo: HashMap<Gen, TSeries> = HashMap::new();
    for (ap, rest) in groups {
        if rest.is_zero() {
            continue;
        }
        let mtot = -(ap.pole_order(a, b) as i32);
        if strict && lo > mtot {
            return Err(Error::WindowTooSmall { lo, need: mtot });
        }
        if hi < mtot {
            continue;
        }
        let mut acc = TSeries { lo: 0, c: vec![Expr::constant_in(live2, anchor2, CoeffPoly::one())] };
        for &(g, ex) in ap.factors() {
            let mg = -(g.pole_order(a, b) as i32);
            // Powers needed from this factor's ex-th power.
            let need = hi - (mtot - mg * ex as i32);
            let base_hi = need - (ex as i32 - 1) * mg;
            let base = match memo.get(&g) {
                Some(s) if s.hi() >= base_hi => s.clone(),
                _ => {
                    let s = ctx.factor(g, base_hi);
                    memo.insert(g, s.clone());
                    s
                }
            };
            let mut p = TSeries { lo: 0, c: vec![Expr::constant_in(live2, anchor2, CoeffPoly::one())] };
            for i in 1..=ex {
                p = p.mul(&base, need - (ex - i) as i32 * mg, &zero);
            }
            let rem = mtot - acc.lo - p.lo;
            acc = acc.mul(&p, hi - rem, &zero);
        }
        for k in lo.max(mtot)..=hi {
            let i = (k - acc.lo) as usize;
            if let Some(c) = acc.c.get(i) {
                if !c.is_zero() {
                    out[(k - lo) as usize] += &(c * &rest);
                }
            }
        }
    }
    Ok(out)
}

struct Ctx {
    a: Var,
    b: Var,
    live2: VarSet,
    anchor2: Var,
}

impl Ctx {
    fn konst(&self, c: CoeffPoly) -> Expr {
        Expr::constant_in(self.live2, self.anchor2, c)
    }

    /// Series of one generator involving `z_a`, through power `hi`.
    fn factor(&self, g: Gen, hi: i32) -> TSeries {
        let (a, b) = (self.a, self.b);
        match g {
            Gen::Wp { a: x, b: y, k } if (x == a && y == b) || (x == b && y == a) => {
                let sign = if x == a || k % 2 == 0 { 1 } else { -1 };
                let c = wp_model(k, hi).into_iter().map(|p| self.konst(p.scale(&int(sign)))).collect();
                TSeries { lo: -2 - k as i32, c }
            }
            Gen::Zg { a: x, b: y } if (x == a && y == b) || (x == b && y == a) => {
                let sign = if x == a { 1 } else { -1 };
                let c = z_model(hi).into_iter().map(|p| self.konst(p.scale(&int(sign)))).collect();
                TSeries { lo: -1, c }
            }
            Gen::Wp { a: x, b: y, k } => {
                // ℘^(k)(z_x - z_y) with one of x, y equal to a.
                let (p, q, s) = if x == a { (b, y, 1) } else { (x, b, -1) };
                let c = (0..=hi.max(-1))
                    .map(|j| {
                        let d = Expr::wp_unchecked(self.live2, self.anchor2, p, q, k + j as u32);
                        d.scale(&CoeffPoly::constant(taylor_factor(j, s)))
                    })
                    .collect();
                TSeries { lo: 0, c }
            }
            Gen::Zg { a: x, b: y } => {
                let (p, q, s) = if x == a { (b, y, 1) } else { (x, b, -1) };
                let c = (0..=hi.max(-1))
                    .map(|j| {
                        let d = match j {
                            0 => Expr::z_unchecked(self.live2, self.anchor2, p, q),
                            1 => &(-&Expr::wp_unchecked(self.live2, self.anchor2, p, q, 0)) - &self.konst(e2_const()),
                            _ => -&Expr::wp_unchecked(self.live2, self.anchor2, p, q, j as u32 - 1),
                        };
                        d.scale(&CoeffPoly::constant(taylor_factor(j, s)))
                    })
                    .collect();
                TSeries { lo: 0, c }
            }
            Gen::Ag(_) => {
                let mut c = vec![Expr::gen_raw(self.live2, self.anchor2, Gen::Ag(b))];
                if hi >= 1 {
                    c.push(self.konst(-CoeffPoly::y()));
                }
                TSeries { lo: 0, c }
            }
        }
    }
}

/// `s^j / j!`.
fn taylor_factor(j: i32, s: i64) -> Rational {
    let mut f = Rational::one();
    for i in 1..=j {
        f /= int(i as i64);
    }
    if s < 0 && j % 2 == 1 {
        -f
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::expr_equal;

    fn l(n: usize) -> VarSet {
        VarSet::range(n)
    }

    #[test]
    fn eisenstein_values() {
        assert_eq!(eisenstein_g(4).unwrap().render(), "I^4*E4/720");
        assert_eq!(eisenstein_g(6).unwrap().render(), "-I^6*E6/30240");
        assert_eq!(eisenstein_g(8).unwrap().render(), "I^8*E4^2/1209600");
        assert!(eisenstein_g(5).is_err());
        assert!(eisenstein_g(2).is_err());
    }

    #[test]
    fn eisenstein_g8_matches_e8() {
        // G_8 = 2 ζ(8) E_8 with E_8 = E_4^2; 2ζ(8) = π^8/4725, π^8 = I^8/256.
        let expect = CoeffPoly::iota_pow(8).scale(&rat(1, 4725 * 256)) * CoeffPoly::e4().pow(2);
        assert_eq!(eisenstein_g(8).unwrap(), expect);
        // G_10 = 2ζ(10) E_10, E_10 = E_4 E_6, 2ζ(10) = 2π^10/93555, π^10 = -I^10/1024.
        let expect = CoeffPoly::iota_pow(10).scale(&rat(-2, 93555 * 1024)) * CoeffPoly::e4() * CoeffPoly::e6();
        assert_eq!(eisenstein_g(10).unwrap(), expect);
    }

    #[test]
    fn model_series_examples() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        let s = expand(&w, 1, 2, -2, 2).unwrap();
        assert_eq!(s.render(), "(1)*t^-2 + (I^4*E4/240)*t^2");
        let z = Expr::z(l(2), 1, 2).unwrap();
        let s = expand(&z, 1, 2, -1, 3).unwrap();
        assert_eq!(s.render(), "(1)*t^-1 + (I^2*E2/12)*t^1 + (-I^4*E4/720)*t^3");
    }

    #[test]
    fn taylor_shift() {
        let w = Expr::wp(l(3), 1, 3, 0).unwrap();
        let s = expand(&w, 1, 2, 0, 2).unwrap();
        let l2 = VarSet::from_vars(&[2, 3]);
        assert_eq!(s.coeffs[0], Expr::wp(l2, 2, 3, 0).unwrap());
        assert_eq!(s.coeffs[1], Expr::wp(l2, 2, 3, 1).unwrap());
        assert_eq!(s.coeffs[2], Expr::wp(l2, 2, 3, 2).unwrap().scale_rat(&rat(1, 2)));
    }

    #[test]
    fn window_too_small() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert!(matches!(expand(&w, 1, 2, -1, 2), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn z_derivative_is_minus_wp_minus_e2() {
        let z = z_model(12);
        let w = wp_model(0, 11);
        // d/dt of t^p coefficient c_p gives p c_p at t^{p-1}.
        for (i, c) in z.iter().enumerate() {
            let p = i as i32 - 1;
            let lhs = c.scale(&int(p as i64));
            let q = p - 1;
            let mut rhs = -&w[(q + 2) as usize];
            if q == 0 {
                rhs -= &e2_const();
            }
            assert_eq!(lhs, rhs, "power {q}");
        }
    }

    #[test]
    fn parity() {
        for (i, c) in z_model(15).iter().enumerate() {
            if (i as i32 - 1) % 2 == 0 {
                assert!(c.is_zero());
            }
        }
        for (i, c) in wp_model(0, 15).iter().enumerate() {
            if (i as i32 - 2) % 2 != 0 {
                assert!(c.is_zero());
            }
        }
    }

    #[test]
    fn weierstrass_ode_holds_on_model_series() {
        type S = BTreeMap<i32, CoeffPoly>;
        let n = 14;
        let to_map = |v: Vec<CoeffPoly>, lo: i32| -> S { v.into_iter().enumerate().map(|(i, c)| (lo + i as i32, c)).collect() };
        let mul = |x: &S, y: &S| -> S {
            let mut m = S::new();
            for (i, a) in x {
                for (j, b) in y {
                    *m.entry(i + j).or_default() += &(a * b);
                }
            }
            m
        };
        let w = to_map(wp_model(0, n + 8), -2);
        let dw = to_map(wp_model(1, n + 8), -3);
        let lhs = mul(&dw, &dw);
        let w3 = mul(&mul(&w, &w), &w);
        for p in -6..=n {
            let mut r = lhs.get(&p).cloned().unwrap_or_default();
            r -= &w3.get(&p).cloned().unwrap_or_default().scale(&int(4));
            r += &(&crate::expr::g2() * &w.get(&p).cloned().unwrap_or_default());
            if p == 0 {
                r += &crate::expr::g3();
            }
            assert!(r.is_zero(), "power {p}: {r}");
        }
    }

    #[test]
    fn composition_coherence() {
        // Expanding ℘13 ℘23 in z1 about z2, then the t^0 coefficient in z2 about z3,
        // agrees with expanding the product directly at coinciding points.
        let e = &Expr::wp(l(3), 1, 3, 0).unwrap() * &Expr::z(l(3), 2, 3).unwrap();
        let s = expand(&e, 1, 2, 0, 4).unwrap();
        let direct = &Expr::wp(VarSet::from_vars(&[2, 3]), 2, 3, 0).unwrap()
            * &Expr::z(VarSet::from_vars(&[2, 3]), 2, 3).unwrap();
        assert!(expr_equal(&s.coeffs[0], &direct, 10).unwrap());
    }
}
