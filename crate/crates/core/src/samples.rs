//! Seeded random inputs for the verification suites.
//!
//! A sample is a sum of one to three monomials sharing one weight. Each
//! monomial multiplies one to `max_degree` generators on uniformly chosen
//! pairs of `1..=n`, with a nonzero integer coefficient in `[-3, 3]`:
//!
//! * elliptic: `℘` and `℘'`, weights 2 and 3;
//! * quasi-elliptic: additionally `Z` (weight 1) and a factor `I^2 E2`;
//! * almost-elliptic: `℘`, `℘'`, `Zhat` and a factor `I^2 E2hat`.
//!
//! The same `(kind, n, seed, index)` always yields the same expression.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{int, CoeffPoly};
use crate::expr::{Expr, Var, VarSet};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SampleKind {
    Elliptic,
    QuasiElliptic,
    AlmostElliptic,
}

#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    pub kind: SampleKind,
    pub n: usize,
    pub max_degree: u32,
}

fn pair(rng: &mut ChaCha8Rng, n: usize) -> (Var, Var) {
    let a = rng.gen_range(1..=n as Var);
    let mut b = rng.gen_range(1..n as Var);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Generator choices: (weight, constructor tag).
fn palette(kind: SampleKind) -> &'static [(u32, u8)] {
    match kind {
        SampleKind::Elliptic => &[(2, 0), (3, 1)],
        SampleKind::QuasiElliptic => &[(2, 0), (3, 1), (1, 2), (2, 4)],
        SampleKind::AlmostElliptic => &[(2, 0), (3, 1), (1, 3), (2, 5)],
    }
}

fn atom(tag: u8, live: VarSet, rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let (a, b) = pair(rng, n);
    match tag {
        0 => Expr::wp(live, a, b, 0).unwrap(),
        1 => Expr::wp(live, a, b, 1).unwrap(),
        2 => Expr::z(live, a, b).unwrap(),
        3 => Expr::zhat(live, a, b).unwrap(),
        4 => Expr::constant(live, CoeffPoly::iota_pow(2) * CoeffPoly::e2()),
        _ => Expr::constant(live, CoeffPoly::iota_pow(2) * CoeffPoly::e2hat()),
    }
}

/// A monomial of exactly weight `w` built from the palette, or `None` if the
/// random walk overshoots.
fn monomial(spec: &SampleSpec, w: u32, rng: &mut ChaCha8Rng) -> Option<Expr> {
    let live = VarSet::range(spec.n);
    let pal = palette(spec.kind);
    let mut e = Expr::one(live);
    let (mut left, mut deg) = (w, 0);
    while left > 0 {
        let fits: Vec<&(u32, u8)> = pal.iter().filter(|(pw, _)| *pw <= left).collect();
        if fits.is_empty() || deg == spec.max_degree {
            return None;
        }
        let &(pw, tag) = fits[rng.gen_range(0..fits.len())];
        e = &e * &atom(tag, live, rng, spec.n);
        left -= pw;
        deg += 1;
    }
    let mut c = 0;
    while c == 0 {
        c = rng.gen_range(-3..=3);
    }
    Some(e.scale_rat(&int(c)))
}

/// One sample; non-constant unless every attempt cancels.
pub fn sample(spec: &SampleSpec, rng: &mut ChaCha8Rng) -> Expr {
    let live = VarSet::range(spec.n);
    let wmax = 2 * spec.max_degree;
    loop {
        let w = rng.gen_range(2..=wmax.max(2));
        let terms = rng.gen_range(1..=3);
        let mut e = Expr::zero(live);
        for _ in 0..terms {
            for _ in 0..8 {
                if let Some(m) = monomial(spec, w, rng) {
                    e += &m;
                    break;
                }
            }
        }
        if e.has_generators() {
            return e;
        }
    }
}

/// `count` samples from the seeded stream.
pub fn samples(spec: &SampleSpec, count: usize, seed: u64) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample(spec, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Weight;

    #[test]
    fn deterministic_and_in_class() {
        for kind in [SampleKind::Elliptic, SampleKind::QuasiElliptic, SampleKind::AlmostElliptic] {
            let spec = SampleSpec { kind, n: 3, max_degree: 4 };
            let a = samples(&spec, 10, 7);
            assert_eq!(a, samples(&spec, 10, 7));
            for e in &a {
                assert!(matches!(e.weight(), Weight::Pure(_)), "{}", e.render());
                match kind {
                    SampleKind::Elliptic => assert!(e.is_elliptic()),
                    SampleKind::QuasiElliptic => assert!(e.is_quasi_elliptic()),
                    SampleKind::AlmostElliptic => assert!(e.almost_elliptic_check()),
                }
            }
        }
    }
}
