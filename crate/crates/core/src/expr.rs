//! Polynomials in `℘^(k)(z_a - z_b)`, `Z(z_a - z_b)` and `A(z_b - z_anchor)`
//! with [`CoeffPoly`] coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};



use crate::coeff::{int, join_signed, rat, render_term, CoeffMono, CoeffPoly, Rational};
use crate::error::{Error, Result};

pub type Var = u8;

/// Set of variable indices `1..=31`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct VarSet(u32);

impl VarSet {
    pub fn empty() -> Self {
        VarSet(0)
    }

    /// `{1, ..., n}`.
    pub fn range(n: usize) -> Self {
        assert!(n < 32, "at most 31 variables");
        VarSet(((1u32 << n) - 1) << 1)
    }

    pub fn from_vars(vs: &[Var]) -> Self {
        let mut s = VarSet(0);
        for &v in vs {
            s = s.with(v);
        }
        s
    }

    pub fn contains(&self, v: Var) -> bool {
        v < 32 && self.0 & (1 << v) != 0
    }

    pub fn with(&self, v: Var) -> Self {
        assert!((1..32).contains(&v), "variable index out of range");
        VarSet(self.0 | (1 << v))
    }

    pub fn without(&self, v: Var) -> Self {
        VarSet(self.0 & !(1u32 << v))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn largest(&self) -> Option<Var> {
        (self.0 != 0).then(|| (31 - self.0.leading_zeros()) as Var)
    }

    pub fn smallest(&self) -> Option<Var> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Var)
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        let bits = self.0;
        (1..32u8).filter(move |v| bits & (1 << v) != 0)
    }

    pub fn to_vec(&self) -> Vec<Var> {
        self.iter().collect()
    }
}

/// A generator of the function ring.
///
/// `Wp { a, b, k }` is `℘^(k)(z_a - z_b)`, `Zg { a, b }` is `Z(z_a - z_b)`,
/// `Ag(b)` is `A(z_b - z_anchor)` where the anchor is carried by the [`Expr`].
/// Normalized generators have `a < b` and `k <= 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Gen {
    Wp { a: Var, b: Var, k: u32 },
    Zg { a: Var, b: Var },
    Ag(Var),
}

impl Gen {
    pub fn involves(&self, v: Var) -> bool {
        match *self {
            Gen::Wp { a, b, .. } | Gen::Zg { a, b } => a == v || b == v,
            Gen::Ag(b) => b == v,
        }
    }

    pub fn weight(&self) -> i64 {
        match *self {
            Gen::Wp { k, .. } => 2 + k as i64,
            Gen::Zg { .. } | Gen::Ag(_) => 1,
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, Gen::Wp { .. })
    }

    /// Order of the pole along `z_a = z_b`.
    pub fn pole_order(&self, a: Var, b: Var) -> u32 {
        match *self {
            Gen::Wp { a: x, b: y, k } if (x, y) == (a.min(b), a.max(b)) => 2 + k,
            Gen::Zg { a: x, b: y } if (x, y) == (a.min(b), a.max(b)) => 1,
            _ => 0,
        }
    }

    pub fn render(&self, anchor: Var) -> String {
        match *self {
            Gen::Wp { a, b, k: 0 } => format!("wp({a},{b})"),
            Gen::Wp { a, b, k: 1 } => format!("wp'({a},{b})"),
            Gen::Wp { a, b, k } => format!("wp({a},{b};{k})"),
            Gen::Zg { a, b } => format!("Z({a},{b})"),
            Gen::Ag(b) => format!("A({b},{anchor})"),
        }
    }
}

/// Sorted list of `(generator, exponent)` with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct GenMono(Vec<(Gen, u32)>);

impl GenMono {
    pub fn one() -> Self {
        GenMono(Vec::new())
    }

    pub fn single(g: Gen, e: u32) -> Self {
        if e == 0 {
            GenMono::one()
        } else {
            GenMono(vec![(g, e)])
        }
    }

    pub fn from_pairs(mut v: Vec<(Gen, u32)>) -> Self {
        v.retain(|(_, e)| *e > 0);
        v.sort();
        let mut out: Vec<(Gen, u32)> = Vec::with_capacity(v.len());
        for (g, e) in v {
            match out.last_mut() {
                Some((h, f)) if *h == g => *f += e,
                _ => out.push((g, e)),
            }
        }
        GenMono(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Gen, u32)] {
        &self.0
    }

    pub fn exponent(&self, g: &Gen) -> u32 {
        self.0.iter().find(|(h, _)| h == g).map_or(0, |(_, e)| *e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn weight(&self) -> i64 {
        self.0.iter().map(|(g, e)| g.weight() * *e as i64).sum()
    }

    pub fn mul(&self, o: &GenMono) -> GenMono {
        let mut v = self.0.clone();
        v.extend(o.0.iter().cloned());
        GenMono::from_pairs(v)
    }

    /// Replace the exponent of `g` (removing it when zero).
    pub fn with_exponent(&self, g: Gen, e: u32) -> GenMono {
        let mut v: Vec<(Gen, u32)> = self.0.iter().filter(|(h, _)| *h != g).cloned().collect();
        v.push((g, e));
        GenMono::from_pairs(v)
    }

    /// Split into the factors satisfying `pred` and the rest.
    pub fn split(&self, pred: impl Fn(&Gen) -> bool) -> (GenMono, GenMono) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(g, _)| pred(g));
        (GenMono(a), GenMono(b))
    }

    pub fn pole_order(&self, a: Var, b: Var) -> u32 {
        self.0.iter().map(|(g, e)| g.pole_order(a, b) * e).sum()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Weight {
    Zero,
    Pure(i64),
    Mixed(Vec<i64>),
}

impl Weight {
    fn from_list(mut ws: Vec<i64>) -> Weight {
        ws.sort_unstable();
        ws.dedup();
        match ws.len() {
            0 => Weight::Zero,
            1 => Weight::Pure(ws[0]),
            _ => Weight::Mixed(ws),
        }
    }

    pub fn max(&self) -> Option<i64> {
        match self {
            Weight::Zero => None,
            Weight::Pure(w) => Some(*w),
            Weight::Mixed(ws) => ws.last().copied(),
        }
    }
}

/// `g2 = I^4 E4 / 12`.
pub fn g2() -> CoeffPoly {
    CoeffPoly::iota_pow(4).scale(&rat(1, 12)) * CoeffPoly::e4()
}

/// `g3 = -I^6 E6 / 216`.
pub fn g3() -> CoeffPoly {
    CoeffPoly::iota_pow(6).scale(&rat(-1, 216)) * CoeffPoly::e6()
}

/// `e2 = -I^2 E2 / 12`, so that `Z' = -℘ - e2`.
pub fn e2_const() -> CoeffPoly {
    CoeffPoly::iota_pow(2).scale(&rat(-1, 12)) * CoeffPoly::e2()
}

/// `℘^(k)` as `Σ c[(i, j)] ℘^i ℘'^j` with `j <= 1`.
type WpTable = BTreeMap<(u32, u32), CoeffPoly>;

fn wp_derivative_table(k: u32) -> WpTable {
    static CACHE: OnceLock<Mutex<Vec<WpTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut base = WpTable::new();
        base.insert((1, 0), CoeffPoly::one());
        Mutex::new(vec![base])
    });
    let mut tabs = cache.lock().unwrap();
    while tabs.len() <= k as usize {
        let next = differentiate_table(tabs.last().unwrap());
        tabs.push(next);
    }
    tabs[k as usize].clone()
}

fn differentiate_table(t: &WpTable) -> WpTable {
    let mut out = WpTable::new();
    let mut add = |key: (u32, u32), c: CoeffPoly| {
        let slot = out.entry(key).or_default();
        *slot += &c;
    };
    let (g2, g3) = (g2(), g3());
    for (&(i, j), c) in t {
        if i > 0 {
            let ci = c.scale(&int(i as i64));
            if j == 0 {
                add((i - 1, 1), ci);
            } else {
                // i ℘^{i-1} ℘'^2 = i ℘^{i-1} (4℘^3 - g2 ℘ - g3)
                add((i + 2, 0), ci.scale(&int(4)));
                add((i, 0), -(&ci * &g2));
                add((i - 1, 0), -(&ci * &g3));
            }
        }
        if j == 1 {
            // ℘^i ℘'' = ℘^i (6℘^2 - g2/2)
            add((i + 2, 0), c.scale(&int(6)));
            add((i, 0), -(&(c * &g2).scale(&rat(1, 2))));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Expr {
    live: VarSet,
    anchor: Var,
    terms: BTreeMap<GenMono, CoeffPoly>,
}

impl Expr {
    pub fn zero(live: VarSet) -> Self {
        Expr { live, anchor: live.largest().unwrap_or(0), terms: BTreeMap::new() }
    }

    pub fn constant(live: VarSet, c: CoeffPoly) -> Self {
        let mut e = Expr::zero(live);
        e.add_term(GenMono::one(), c);
        e
    }

    pub fn one(live: VarSet) -> Self {
        Expr::constant(live, CoeffPoly::one())
    }

    fn zero_like(&self) -> Self {
        Expr { live: self.live, anchor: self.anchor, terms: BTreeMap::new() }
    }

    fn with_terms(live: VarSet, anchor: Var, terms: BTreeMap<GenMono, CoeffPoly>) -> Self {
        Expr { live, anchor, terms }
    }

    /// A single normalized generator (no reduction performed).
    pub(crate) fn gen_raw(live: VarSet, anchor: Var, g: Gen) -> Self {
        let mut e = Expr { live, anchor, terms: BTreeMap::new() };
        if g != Gen::Ag(anchor) {
            e.terms.insert(GenMono::single(g, 1), CoeffPoly::one());
        }
        e
    }

    pub fn live(&self) -> VarSet {
        self.live
    }

    pub fn anchor(&self) -> Var {
        self.anchor
    }

    pub fn arity(&self) -> usize {
        self.live.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GenMono, &CoeffPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient if no generator is present.
    pub fn as_constant(&self) -> Option<CoeffPoly> {
        match self.terms.len() {
            0 => Some(CoeffPoly::zero()),
            1 => self.terms.get(&GenMono::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: GenMono, c: CoeffPoly) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_compatible(&self, o: &Expr) {
        assert_eq!(self.live, o.live, "expressions live on different variable sets");
        assert_eq!(self.anchor, o.anchor, "expressions use different A-anchors");
    }

    // ----- constructors for (possibly unnormalized) atoms -----

    fn check_pair(live: VarSet, a: Var, b: Var) -> Result<()> {
        if a == b {
            return Err(Error::IndexError(format!("generator with equal indices ({a},{a})")));
        }
        for v in [a, b] {
            if !live.contains(v) {
                return Err(Error::IndexError(format!("index {v} outside the variable set")));
            }
        }
        Ok(())
    }

    /// `℘^(k)(z_a - z_b)`, reduced to `℘` and `℘'`.
    pub fn wp(live: VarSet, a: Var, b: Var, k: u32) -> Result<Self> {
        Self::check_pair(live, a, b)?;
        Ok(Self::wp_unchecked(live, live.largest().unwrap(), a, b, k))
    }

    pub(crate) fn wp_unchecked(live: VarSet, anchor: Var, a: Var, b: Var, k: u32) -> Self {
        let (x, y) = (a.min(b), a.max(b));
        let sign = if a > b && k % 2 == 1 { -1 } else { 1 };
        let mut e = Expr { live, anchor, terms: BTreeMap::new() };
        let p = Gen::Wp { a: x, b: y, k: 0 };
        let dp = Gen::Wp { a: x, b: y, k: 1 };
        for ((i, j), c) in wp_derivative_table(k) {
            let m = GenMono::from_pairs(vec![(p, i), (dp, j)]);
            e.add_term(m, c.scale(&int(sign)));
        }
        e
    }

    /// `Z(z_a - z_b)`.
    pub fn z(live: VarSet, a: Var, b: Var) -> Result<Self> {
        Self::check_pair(live, a, b)?;
        Ok(Self::z_unchecked(live, live.largest().unwrap(), a, b))
    }

    pub(crate) fn z_unchecked(live: VarSet, anchor: Var, a: Var, b: Var) -> Self {
        let g = Gen::Zg { a: a.min(b), b: a.max(b) };
        let e = Self::gen_raw(live, anchor, g);
        if a < b {
            e
        } else {
            -&e
        }
    }

    /// `A(z_a - z_b) = Ag(a) - Ag(b)`.
    pub fn a(live: VarSet, a: Var, b: Var) -> Result<Self> {
        Self::check_pair(live, a, b)?;
        let anchor = live.largest().unwrap();
        Ok(Self::a_unchecked(live, anchor, a, b))
    }

    pub(crate) fn a_unchecked(live: VarSet, anchor: Var, a: Var, b: Var) -> Self {
        &Self::gen_raw(live, anchor, Gen::Ag(a)) - &Self::gen_raw(live, anchor, Gen::Ag(b))
    }

    /// `Zhat(z_a - z_b) = Z(z_a - z_b) + A(z_a - z_b)`.
    pub fn zhat(live: VarSet, a: Var, b: Var) -> Result<Self> {
        Ok(&Self::z(live, a, b)? + &Self::a(live, a, b)?)
    }

    /// Expression for a (possibly unnormalized) generator in this expression's basis.
    fn atom(&self, g: Gen) -> Expr {
        match g {
            Gen::Wp { a, b, k } => Self::wp_unchecked(self.live, self.anchor, a, b, k),
            Gen::Zg { a, b } => Self::z_unchecked(self.live, self.anchor, a, b),
            Gen::Ag(b) => Self::gen_raw(self.live, self.anchor, Gen::Ag(b)),
        }
    }

    /// Re-derives the canonical form of every monomial.
    pub fn normalize(&self) -> Expr {
        self.substitute(self.live, self.anchor, |_| None)
    }

    /// Replace generators by expressions. `f` returns `None` to keep a generator
    /// (which is then renormalized in the target basis).
    pub fn substitute(&self, live: VarSet, anchor: Var, f: impl Fn(Gen) -> Option<Expr>) -> Expr {
        let target = Expr { live, anchor, terms: BTreeMap::new() };
        let mut memo: HashMap<Gen, Vec<Expr>> = HashMap::new();
        let mut out = target.clone();
        for (m, c) in &self.terms {
            let mut acc = Expr::constant_in(live, anchor, c.clone());
            for &(g, e) in m.factors() {
                let pows = memo.entry(g).or_insert_with(|| {
                    let base = f(g).unwrap_or_else(|| target.atom(g));
                    vec![Expr::constant_in(live, anchor, CoeffPoly::one()), base]
                });
                while pows.len() <= e as usize {
                    let next = &pows[pows.len() - 1] * &pows[1];
                    pows.push(next);
                }
                acc = &acc * &pows[e as usize];
                if acc.is_zero() {
                    break;
                }
            }
            out += &acc;
        }
        out
    }

    pub(crate) fn constant_in(live: VarSet, anchor: Var, c: CoeffPoly) -> Expr {
        let mut e = Expr { live, anchor, terms: BTreeMap::new() };
        e.add_term(GenMono::one(), c);
        e
    }

    /// Reduces `℘'^2` and drops `Ag(anchor)` while inserting.
    fn insert_reduced(&mut self, m: GenMono, c: CoeffPoly) {
        if m.exponent(&Gen::Ag(self.anchor)) > 0 {
            return;
        }
        let needs = m.factors().iter().any(|(g, e)| matches!(g, Gen::Wp { k: 1, .. }) && *e >= 2);
        if !needs {
            self.add_term(m, c);
            return;
        }
        let mut keep = Vec::new();
        let mut extra = Expr::constant_in(self.live, self.anchor, c);
        for &(g, e) in m.factors() {
            match g {
                Gen::Wp { a, b, k: 1 } if e >= 2 => {
                    let p = Self::gen_raw(self.live, self.anchor, Gen::Wp { a, b, k: 0 });
                    let p3 = &(&p * &p) * &p;
                    let cubic = &(&p3.scale(&CoeffPoly::from_int(4)) - &p.scale(&g2()))
                        - &Expr::constant_in(self.live, self.anchor, g3());
                    extra = &extra * &cubic.pow(e / 2);
                    if e % 2 == 1 {
                        keep.push((g, 1));
                    }
                }
                _ => keep.push((g, e)),
            }
        }
        let keep = GenMono::from_pairs(keep);
        for (m2, c2) in extra.terms {
            self.insert_reduced(m2.mul(&keep), c2);
        }
    }

    pub fn scale(&self, c: &CoeffPoly) -> Expr {
        let mut out = self.zero_like();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &Rational) -> Expr {
        self.scale(&CoeffPoly::constant(c.clone()))
    }

    pub fn pow(&self, k: u32) -> Expr {
        let mut acc = Expr::constant_in(self.live, self.anchor, CoeffPoly::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    // ----- basis changes -----

    /// Same function, expressed with `A`-generators anchored at `m`.
    pub fn reanchor(&self, m: Var) -> Expr {
        if m == self.anchor || self.live.len() < 2 {
            return Expr { anchor: if self.live.contains(m) { m } else { self.anchor }, ..self.clone() };
        }
        assert!(self.live.contains(m), "new anchor must be live");
        let old = self.anchor;
        let live = self.live;
        let has_ag = self.terms.keys().any(|k| k.factors().iter().any(|(g, _)| matches!(g, Gen::Ag(_))));
        if !has_ag {
            return Expr { anchor: m, ..self.clone() };
        }
        let ag_old = Self::gen_raw(live, m, Gen::Ag(old));
        self.substitute(live, m, |g| match g {
            Gen::Ag(c) => Some(&Self::gen_raw(live, m, Gen::Ag(c)) - &ag_old),
            _ => None,
        })
    }

    /// Anchored at the largest live variable.
    pub fn canonical(&self) -> Expr {
        match self.live.largest() {
            Some(m) if m != self.anchor => self.reanchor(m),
            _ => self.clone(),
        }
    }

    /// The same expression regarded on a smaller variable set that still
    /// contains every variable it mentions.
    pub(crate) fn restrict(&self, live: VarSet) -> Expr {
        debug_assert!(live.contains(self.anchor) || live.is_empty() || !self.has_ag());
        let anchor = if live.contains(self.anchor) { self.anchor } else { live.largest().unwrap_or(0) };
        Expr { live, anchor, terms: self.terms.clone() }
    }

    /// Regard the expression on a larger variable set (spectator variables).
    pub fn extend(&self, live: VarSet) -> Expr {
        let e = Expr { live, anchor: self.anchor, terms: self.terms.clone() };
        e.canonical()
    }

    // ----- predicates -----

    pub fn has_ag(&self) -> bool {
        self.terms.keys().any(|k| k.factors().iter().any(|(g, _)| matches!(g, Gen::Ag(_))))
    }

    pub fn has_zg(&self) -> bool {
        self.terms.keys().any(|k| k.factors().iter().any(|(g, _)| matches!(g, Gen::Zg { .. })))
    }

    pub fn has_y(&self) -> bool {
        self.terms.values().any(|c| c.has_y())
    }

    pub fn has_e2(&self) -> bool {
        self.terms.values().any(|c| c.has_e2())
    }

    pub fn has_generators(&self) -> bool {
        self.terms.keys().any(|k| !k.is_one())
    }

    /// Elliptic: no `Z`, no `A`, no `Y`.
    pub fn is_elliptic(&self) -> bool {
        !self.has_zg() && !self.has_ag() && !self.has_y()
    }

    /// Quasi-elliptic: no `A`, no `Y`.
    pub fn is_quasi_elliptic(&self) -> bool {
        !self.has_ag() && !self.has_y()
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.terms.keys().any(|k| k.factors().iter().any(|(g, _)| g.involves(v)))
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    pub fn pole_order(&self, a: Var, b: Var) -> u32 {
        self.terms.keys().map(|k| k.pole_order(a, b)).max().unwrap_or(0)
    }

    pub fn weight(&self) -> Weight {
        let mut ws = Vec::new();
        for (m, c) in &self.terms {
            let gw = m.weight();
            for (cm, _) in c.terms() {
                ws.push(gw + cm.weight());
            }
        }
        Weight::from_list(ws)
    }

    // ----- derivations -----

    /// Derivation applied generator-wise with the Leibniz rule.
    fn derive(&self, d: impl Fn(&Expr, Gen) -> Expr, dc: impl Fn(&CoeffPoly) -> CoeffPoly) -> Expr {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            let dcoef = dc(c);
            if !dcoef.is_zero() {
                out.insert_reduced(m.clone(), dcoef);
            }
            for &(g, e) in m.factors() {
                let dg = d(self, g);
                if dg.is_zero() {
                    continue;
                }
                let rest = m.with_exponent(g, e - 1);
                let coef = c.scale(&int(e as i64));
                for (m2, c2) in &dg.terms {
                    out.insert_reduced(rest.mul(m2), &coef * c2);
                }
            }
        }
        out
    }

    /// Holomorphic derivative in `z_a`.
    pub fn d_z(&self, v: Var) -> Expr {
        let anchor = self.anchor;
        self.derive(
            |e, g| match g {
                Gen::Wp { a, b, k } if a == v || b == v => {
                    let d = Self::wp_unchecked(e.live, e.anchor, a, b, k + 1);
                    if a == v {
                        d
                    } else {
                        -&d
                    }
                }
                Gen::Zg { a, b } if a == v || b == v => {
                    let d = &(-&Self::gen_raw(e.live, e.anchor, Gen::Wp { a, b, k: 0 }))
                        - &Expr::constant_in(e.live, e.anchor, e2_const());
                    if a == v {
                        d
                    } else {
                        -&d
                    }
                }
                Gen::Ag(b) if b == v => Expr::constant_in(e.live, e.anchor, -CoeffPoly::y()),
                Gen::Ag(_) if v == anchor => Expr::constant_in(e.live, e.anchor, CoeffPoly::y()),
                _ => e.zero_like(),
            },
            |_| CoeffPoly::zero(),
        )
    }

    /// Partial derivative in the symbol `Y`, generators fixed.
    pub fn d_y(&self) -> Expr {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.partial_y());
        }
        out
    }

    /// Partial derivative in the symbol `E2`, generators fixed.
    pub fn d_e2(&self) -> Expr {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.partial_e2());
        }
        out
    }

    /// Partial derivative in the generator `g`.
    pub fn d_gen(&self, g: Gen) -> Expr {
        let mut out = self.zero_like();
        for (m, c) in &self.terms {
            let e = m.exponent(&g);
            if e > 0 {
                out.add_term(m.with_exponent(g, e - 1), c.scale(&int(e as i64)));
            }
        }
        out
    }

    /// Partial derivative in `A(z_b - z_anchor)`.
    pub fn d_a(&self, b: Var) -> Expr {
        self.d_gen(Gen::Ag(b))
    }

    /// True iff the expression is a polynomial in `Zhat` and `E2hat` over
    /// elliptic functions: it must be annihilated by the infinitesimal shifts
    /// `Z(z_i - z_j) -> Z + s_i - s_j`, `A(z_i - z_anchor) -> A - s_i` and
    /// `E2 -> E2 + u`, `Y -> Y + I^2 u / 12`.
    pub fn almost_elliptic_check(&self) -> bool {
        for i in self.live.iter().filter(|&i| i != self.anchor) {
            let mut acc = -&self.d_a(i);
            for j in self.live.iter().filter(|&j| j != i) {
                let g = Gen::Zg { a: i.min(j), b: i.max(j) };
                let d = self.d_gen(g);
                if i < j {
                    acc += &d;
                } else {
                    acc -= &d;
                }
            }
            if !acc.is_zero() {
                return false;
            }
        }
        let du = &self.d_e2() + &self.d_y().scale(&CoeffPoly::iota_pow(2).scale(&rat(1, 12)));
        du.is_zero()
    }

    /// Groups terms by their `A`-monomial.
    pub fn split_ag(&self) -> BTreeMap<GenMono, Expr> {
        let mut out: BTreeMap<GenMono, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (ag, rest) = m.split(|g| matches!(g, Gen::Ag(_)));
            out.entry(ag).or_insert_with(|| self.zero_like()).add_term(rest, c.clone());
        }
        out
    }

    /// Terms ordered by generator degree (highest first), then canonically.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        let mut order: Vec<(&GenMono, &CoeffPoly)> = self.terms.iter().collect();
        order.sort_by(|x, y| y.0.degree().cmp(&x.0.degree()).then(x.0.cmp(y.0)));
        for (m, c) in order {
            let gens: Vec<String> = m
                .factors()
                .iter()
                .map(|(g, e)| {
                    let s = g.render(self.anchor);
                    if *e == 1 {
                        s
                    } else {
                        format!("{s}^{e}")
                    }
                })
                .collect();
            let mut cterms: Vec<(&CoeffMono, &Rational)> = c.terms().collect();
            cterms.sort_by(|a, b| crate::coeff::render_order(a.0, b.0));
            for (cm, r) in cterms {
                parts.push(render_term(r, &cm.factor_strings("E2"), &gens));
            }
        }
        join_signed(parts)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::ops::AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, o: &Expr) {
        self.check_compatible(o);
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl std::ops::SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, o: &Expr) {
        self.check_compatible(o);
        for (m, c) in &o.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl std::ops::Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl std::ops::Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        let mut r = self.clone();
        r -= o;
        r
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::with_terms(self.live, self.anchor, self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
}

impl std::ops::Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        self.check_compatible(o);
        let mut out = self.zero_like();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_reduced(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

/// Semantic equality: `e1 - e2` must vanish as an iterated Laurent series,
/// eliminating the live variables in increasing order, with `A`-monomials
/// treated as independent.
pub fn expr_equal(e1: &Expr, e2: &Expr, order: i32) -> Result<bool> {
    assert_eq!(e1.live, e2.live, "expr_equal needs a common variable set");
    if e1 == e2 {
        return Ok(true);
    }
    let e2 = e2.reanchor(e1.anchor);
    let d = e1 - &e2;
    if d.is_zero() {
        return Ok(true);
    }
    let vars = d.live.to_vec();
    if vars.len() >= 2 {
        let (p, deg) = (d.pole_order(vars[0], vars[1]) as i32, d.max_degree() as i32);
        let recommended = p + deg + 4;
        if order < recommended {
            return Err(Error::TruncationInconclusive { order, recommended });
        }
    }
    for (_, c) in d.split_ag() {
        if !vanishes(&c, order)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Recommended truncation order for comparing `e1` and `e2` with [`expr_equal`].
pub fn recommended_order(e1: &Expr, e2: &Expr) -> i32 {
    let vars = e1.live.to_vec();
    if vars.len() < 2 {
        return 4;
    }
    let p = e1.pole_order(vars[0], vars[1]).max(e2.pole_order(vars[0], vars[1])) as i32;
    let d = e1.max_degree().max(e2.max_degree()) as i32;
    p + d + 4
}

fn vanishes(c: &Expr, order: i32) -> Result<bool> {
    if c.is_zero() {
        return Ok(true);
    }
    if !c.has_generators() {
        return Ok(false);
    }
    let vars = c.live.to_vec();
    let (a, b) = (vars[0], vars[1]);
    if !c.mentions(a) {
        return vanishes(&c.restrict(c.live.without(a)), order);
    }
    let p = c.pole_order(a, b) as i32;
    let s = crate::laurent::expand(c, a, b, -p, order)?;
    for coeff in &s.coeffs {
        if !vanishes(coeff, order)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: usize) -> VarSet {
        VarSet::range(n)
    }

    #[test]
    fn varset_basics() {
        let s = l(3);
        assert_eq!(s.to_vec(), vec![1, 2, 3]);
        assert_eq!(s.largest(), Some(3));
        assert_eq!(s.without(3).largest(), Some(2));
        assert_eq!(s.smallest(), Some(1));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(Expr::z(l(2), 2, 1).unwrap(), -&Expr::z(l(2), 1, 2).unwrap());
        let w2 = Expr::wp(l(2), 1, 2, 2).unwrap();
        assert_eq!(w2.render(), "6*wp(1,2)^2 - I^4*E4/24");
        let a = Expr::a(l(3), 1, 2).unwrap();
        assert_eq!(a.render(), "A(1,3) - A(2,3)");
        assert_eq!(w2.normalize(), w2);
    }

    #[test]
    fn wp_prime_squared_reduces() {
        let p = Expr::wp(l(2), 1, 2, 1).unwrap();
        let sq = &p * &p;
        assert_eq!(sq.render(), "4*wp(1,2)^3 - I^4*E4*wp(1,2)/12 + I^6*E6/216");
    }

    #[test]
    fn weights() {
        let e = &Expr::wp(l(3), 1, 2, 0).unwrap() * &Expr::wp(l(3), 2, 3, 1).unwrap();
        assert_eq!(e.weight(), Weight::Pure(5));
        let e = &Expr::z(l(2), 1, 2).unwrap() + &Expr::constant(l(2), CoeffPoly::iota());
        assert_eq!(e.weight(), Weight::Mixed(vec![0, 1]));
        let e = Expr::a(l(2), 1, 2).unwrap().scale(&CoeffPoly::y());
        assert_eq!(e.weight(), Weight::Pure(3));
    }

    #[test]
    fn derivatives() {
        let zh = Expr::zhat(l(2), 1, 2).unwrap();
        assert_eq!(zh.d_z(1).render(), "-wp(1,2) + I^2*E2/12 - Y");
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert_eq!(w.d_z(2), -&Expr::wp(l(2), 1, 2, 1).unwrap());
        assert!(Expr::constant(l(2), CoeffPoly::e4()).d_z(1).is_zero());
        assert!(zh.d_y().is_zero());
        let a = Expr::a(l(2), 1, 2).unwrap();
        assert_eq!((&a * &a).d_a(1), a.scale(&CoeffPoly::from_int(2)));
        assert_eq!(w.scale(&CoeffPoly::y()).d_y(), w);
    }

    #[test]
    fn almost_elliptic_examples() {
        assert!(Expr::zhat(l(3), 1, 2).unwrap().almost_elliptic_check());
        assert!(!Expr::z(l(3), 1, 2).unwrap().almost_elliptic_check());
        let c = CoeffPoly::iota_pow(2).scale(&rat(1, 12)) * CoeffPoly::e2() - CoeffPoly::y();
        assert!(Expr::constant(l(2), c).almost_elliptic_check());
        assert!(!Expr::constant(l(2), CoeffPoly::e2()).almost_elliptic_check());
        // Z12 - Z13 + Z23 is elliptic.
        let c = &(&Expr::z(l(3), 1, 2).unwrap() - &Expr::z(l(3), 1, 3).unwrap()) + &Expr::z(l(3), 2, 3).unwrap();
        assert!(c.almost_elliptic_check());
    }

    #[test]
    fn reanchor_roundtrip() {
        let e = &Expr::zhat(l(3), 1, 2).unwrap() * &Expr::a(l(3), 2, 3).unwrap();
        let r = e.reanchor(1);
        assert_eq!(r.anchor(), 1);
        assert_eq!(r.reanchor(3), e);
    }

    #[test]
    fn semantic_equality() {
        let w = Expr::wp(l(2), 1, 2, 0).unwrap();
        assert!(expr_equal(&w, &w, 8).unwrap());
        let p = Gen::Wp { a: 1, b: 2, k: 0 };
        let raw = Expr::gen_raw(l(2), 2, p);
        let lhs = Expr::wp(l(2), 1, 2, 2).unwrap();
        let rhs = &(&raw * &raw).scale(&CoeffPoly::from_int(6))
            - &Expr::constant(l(2), CoeffPoly::iota_pow(4).scale(&rat(1, 24)) * CoeffPoly::e4());
        assert!(expr_equal(&lhs, &rhs, 8).unwrap());
        assert!(!expr_equal(&w, &Expr::zero(l(2)), 8).unwrap());
        assert!(matches!(expr_equal(&w, &Expr::zero(l(2)), 2), Err(Error::TruncationInconclusive { .. })));
    }

    #[test]
    fn addition_formula_smoke() {
        // Z13 = Z12 + Z23 + C with C := Z13 - Z12 - Z23.
        let z = |a, b| Expr::z(l(3), a, b).unwrap();
        let c = &(&z(1, 3) - &z(1, 2)) - &z(2, 3);
        let rhs = &(&z(1, 2) + &z(2, 3)) + &c;
        assert!(expr_equal(&z(1, 3), &rhs, 8).unwrap());
    }

    #[test]
    fn cross_diagonal_identity() {
        // (Z12 + Z23 - Z13)^2 = ℘12 + ℘23 + ℘13, the classical addition identity.
        let l3 = l(3);
        let z = |a, b| Expr::z(l3, a, b).unwrap();
        let w = |a, b| Expr::wp(l3, a, b, 0).unwrap();
        let s = &(&z(1, 2) + &z(2, 3)) - &z(1, 3);
        let lhs = &s * &s;
        let rhs = &(&w(1, 2) + &w(2, 3)) + &w(1, 3);
        assert!(expr_equal(&lhs, &rhs, 10).unwrap());
        assert!(!expr_equal(&lhs, &w(1, 2), 10).unwrap());
    }
}
