//! Text syntax for expressions; accepts everything [`Expr::render`] prints.
//!
//! ```text
//! expr   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := atom ("^" ["-"] nat)?
//! atom   := nat | "I" | "Y" | "E2" | "E4" | "E6" | "E2hat"
//!         | "wp(" i "," j (";" k)? ")" | "wp'(" i "," j ")"
//!         | "Z(" i "," j ")" | "Zhat(" i "," j ")" | "A(" i "," j ")"
//!         | "(" expr ")"
//! ```
//!
//! Divisors must be nonzero rational constants; negative exponents are
//! allowed on monomials in `I` alone.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::coeff::{CoeffPoly, Rational};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    Wp(u32),
    Z,
    Zhat,
    A,
}

#[derive(Clone, Debug)]
enum Node {
    Num(BigInt),
    Sym(CoeffPoly),
    Gen { kind: GenKind, a: u32, b: u32, pos: usize },
    Sum(Vec<(bool, Node)>),
    Prod(Vec<(bool, Node, usize)>),
    Pow(Box<Node>, i64, usize),
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.i, format!("expected `{}`", c as char)))
        }
    }

    fn nat(&mut self) -> Result<BigInt> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(syntax(start, "expected a number"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().unwrap())
    }

    fn small(&mut self) -> Result<u32> {
        let pos = self.i;
        let n = self.nat()?;
        u32::try_from(n).map_err(|_| syntax(pos, "number too large"))
    }

    fn ident(&mut self) -> String {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'\'') {
            self.i += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.i]).into_owned()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut terms = Vec::new();
        let mut neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        loop {
            terms.push((neg, self.term()?));
            if self.eat(b'+') {
                neg = false;
            } else if self.eat(b'-') {
                neg = true;
            } else {
                break;
            }
        }
        Ok(Node::Sum(terms))
    }

    fn term(&mut self) -> Result<Node> {
        let pos = self.i;
        let mut fs = vec![(false, self.factor()?, pos)];
        loop {
            let pos = self.i;
            if self.eat(b'*') {
                fs.push((false, self.factor()?, pos));
            } else if self.eat(b'/') {
                fs.push((true, self.factor()?, pos));
            } else {
                break;
            }
        }
        Ok(Node::Prod(fs))
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.atom()?;
        let pos = self.i;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let p = self.nat()?;
            let p = i64::try_from(p).map_err(|_| syntax(pos, "exponent too large"))?;
            return Ok(Node::Pow(Box::new(base), if neg { -p } else { p }, pos));
        }
        Ok(base)
    }

    fn pair(&mut self, kind: GenKind, pos: usize) -> Result<Node> {
        self.expect(b'(')?;
        let a = self.small()?;
        self.expect(b',')?;
        let b = self.small()?;
        let kind = match kind {
            GenKind::Wp(0) if self.eat(b';') => GenKind::Wp(self.small()?),
            k => k,
        };
        self.expect(b')')?;
        Ok(Node::Gen { kind, a, b, pos })
    }

    fn atom(&mut self) -> Result<Node> {
        let pos = match self.peek() {
            None => return Err(syntax(self.i, "unexpected end of input")),
            Some(_) => self.i,
        };
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if self.s[pos].is_ascii_digit() {
            return Ok(Node::Num(self.nat()?));
        }
        let id = self.ident();
        match id.as_str() {
            "I" => Ok(Node::Sym(CoeffPoly::iota())),
            "Y" => Ok(Node::Sym(CoeffPoly::y())),
            "E2" => Ok(Node::Sym(CoeffPoly::e2())),
            "E4" => Ok(Node::Sym(CoeffPoly::e4())),
            "E6" => Ok(Node::Sym(CoeffPoly::e6())),
            "E2hat" => Ok(Node::Sym(CoeffPoly::e2hat())),
            "wp" => self.pair(GenKind::Wp(0), pos),
            "wp'" => self.pair(GenKind::Wp(1), pos),
            "Z" => self.pair(GenKind::Z, pos),
            "Zhat" => self.pair(GenKind::Zhat, pos),
            "A" => self.pair(GenKind::A, pos),
            "" => Err(syntax(pos, format!("unexpected `{}`", self.s[pos] as char))),
            other => Err(syntax(pos, format!("unknown symbol `{other}`"))),
        }
    }
}

fn max_index(n: &Node) -> u32 {
    match n {
        Node::Num(_) | Node::Sym(_) => 0,
        Node::Gen { a, b, .. } => (*a).max(*b),
        Node::Sum(v) => v.iter().map(|(_, x)| max_index(x)).max().unwrap_or(0),
        Node::Prod(v) => v.iter().map(|(_, x, _)| max_index(x)).max().unwrap_or(0),
        Node::Pow(b, _, _) => max_index(b),
    }
}

fn eval(n: &Node, live: VarSet) -> Result<Expr> {
    Ok(match n {
        Node::Num(v) => Expr::constant(live, CoeffPoly::constant(Rational::from_integer(v.clone()))),
        Node::Sym(c) => Expr::constant(live, c.clone()),
        Node::Gen { kind, a, b, pos } => {
            if a == b || *a == 0 || *b == 0 {
                return Err(Error::IndexError(format!("invalid pair ({a},{b}) at {pos}")));
            }
            let (a, b) = (*a as Var, *b as Var);
            match kind {
                GenKind::Wp(k) => Expr::wp(live, a, b, *k)?,
                GenKind::Z => Expr::z(live, a, b)?,
                GenKind::Zhat => Expr::zhat(live, a, b)?,
                GenKind::A => Expr::a(live, a, b)?,
            }
        }
        Node::Sum(v) => {
            let mut acc = Expr::zero(live);
            for (neg, x) in v {
                let t = eval(x, live)?;
                if *neg {
                    acc -= &t;
                } else {
                    acc += &t;
                }
            }
            acc
        }
        Node::Prod(v) => {
            let mut acc = Expr::one(live);
            for (div, x, pos) in v {
                let t = eval(x, live)?;
                if *div {
                    let d = t
                        .as_constant()
                        .and_then(|c| c.as_constant())
                        .filter(|r| !r.is_zero())
                        .ok_or_else(|| syntax(*pos, "divisor must be a nonzero rational"))?;
                    acc = acc.scale_rat(&(Rational::from_integer(1.into()) / d));
                } else {
                    acc = &acc * &t;
                }
            }
            acc
        }
        Node::Pow(b, p, pos) => {
            let base = eval(b, live)?;
            if *p >= 0 {
                let p = u32::try_from(*p).map_err(|_| syntax(*pos, "exponent too large"))?;
                base.pow(p)
            } else {
                let c = base.as_constant().ok_or_else(|| syntax(*pos, "negative exponent on a non-constant"))?;
                let mut it = c.terms();
                let (m, r) = match (it.next(), it.next()) {
                    (Some(t), None) => t,
                    _ => return Err(syntax(*pos, "negative exponent needs a single monomial")),
                };
                if m.e2 + m.e4 + m.e6 + m.y > 0 {
                    return Err(syntax(*pos, "negative exponents apply to I only"));
                }
                let k = i32::try_from(-*p).map_err(|_| syntax(*pos, "exponent too large"))?;
                let inv = Rational::from_integer(1.into()) / r;
                let coef = num_traits::pow::Pow::pow(&inv, k as u32);
                Expr::constant(live, CoeffPoly::iota_pow(-m.iota * k).scale(&coef))
            }
        }
    })
}

/// Parse with arity equal to the largest index mentioned (at least 1).
pub fn parse(text: &str) -> Result<Expr> {
    parse_with_arity(text, None)
}

/// Parse on variables `1..=n`; `n` defaults to the largest index mentioned.
pub fn parse_with_arity(text: &str, n: Option<usize>) -> Result<Expr> {
    let mut p = Parser { s: text.as_bytes(), i: 0 };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return Err(syntax(p.i, format!("unexpected `{}`", p.s[p.i] as char)));
    }
    let m = max_index(&ast) as usize;
    let n = match n {
        Some(n) if n < m => return Err(Error::IndexError(format!("index {m} exceeds arity {n}"))),
        Some(n) => n,
        None => m.max(1),
    };
    if n > 30 {
        return Err(Error::IndexError(format!("arity {n} exceeds 30")));
    }
    eval(&ast, VarSet::range(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    #[test]
    fn examples() {
        let l3 = VarSet::range(3);
        let e = parse("wp(1,2)*wp(2,3)").unwrap();
        assert_eq!(e, &Expr::wp(l3, 1, 2, 0).unwrap() * &Expr::wp(l3, 2, 3, 0).unwrap());
        let l2 = VarSet::range(2);
        let zh = Expr::zhat(l2, 1, 2).unwrap();
        assert_eq!(parse("Zhat(1,2)^2").unwrap(), &zh * &zh);
        assert!(parse("wp'(1,2) - wp(1,2;1)").unwrap().is_zero());
        assert_eq!(parse("-I/2").unwrap().as_constant().unwrap(), CoeffPoly::iota().scale(&rat(-1, 2)));
        assert_eq!(parse("I^-2*I^2").unwrap().as_constant().unwrap(), CoeffPoly::one());
        let h = parse("I^2*E2hat").unwrap().as_constant().unwrap();
        assert_eq!(h.render(), "I^2*E2 - 12*Y");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("wp(1,1)"), Err(Error::IndexError(_))));
        assert!(matches!(parse("wp(1,2"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("2 * foo"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse("wp(1,2)/Z(1,2)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("wp(1,2)/0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_with_arity("wp(1,3)", Some(2)), Err(Error::IndexError(_))));
        assert!(matches!(parse("1 +"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn round_trip() {
        for s in [
            "6*wp(1,2)^2 - I^4*E4/24",
            "wp(1,2)*Z(2,3)^2 + 3*A(1,3)*wp'(1,2)/7 - Y",
            "Zhat(1,3)*Zhat(2,3) + I^2*E2hat",
            "wp(1,3;4) - I^-2*Y",
        ] {
            let e = parse(s).unwrap();
            let back = parse_with_arity(&e.render(), Some(e.arity())).unwrap();
            assert_eq!(back, e, "{s} -> {}", e.render());
        }
    }
}
