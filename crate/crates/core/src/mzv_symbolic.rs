//! Exact constants: Gaussian-rational combinations of monomials in π, log 2 and ζ(k).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cdisc::{CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::mpl::{alternating_mzv, MzvIndex};
use crate::omega::omega_to_mzv;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Sqrt2,
    Pi,
    Log2,
    Zeta(u32),
}

impl Symbol {
    pub fn weight(self) -> i32 {
        match self {
            Symbol::Sqrt2 => 0,
            Symbol::Pi | Symbol::Log2 => 1,
            Symbol::Zeta(k) => k as i32,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Sqrt2 => write!(f, "sqrt(2)"),
            Symbol::Pi => write!(f, "pi"),
            Symbol::Log2 => write!(f, "log(2)"),
            Symbol::Zeta(k) => write!(f, "zeta({k})"),
        }
    }
}

/// Formal product of symbols with integer exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(BTreeMap<Symbol, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }
    pub fn of(s: Symbol, e: i32) -> Self {
        let mut m = BTreeMap::new();
        if e != 0 {
            m.insert(s, e);
        }
        Monomial(m)
    }
    pub fn weight(&self) -> i32 {
        self.0.iter().map(|(s, e)| s.weight() * e).sum()
    }
    pub fn exponent(&self, s: Symbol) -> i32 {
        self.0.get(&s).copied().unwrap_or(0)
    }
    /// Product, with `√2²` folded into the returned rational factor.
    fn times(&self, o: &Monomial) -> (Monomial, BigRational) {
        let mut m = self.0.clone();
        for (s, e) in &o.0 {
            let v = m.entry(*s).or_insert(0);
            *v += e;
            if *v == 0 {
                m.remove(s);
            }
        }
        let mut f = BigRational::one();
        if let Some(e) = m.get(&Symbol::Sqrt2).copied() {
            let (q2, r) = (e.div_euclid(2), e.rem_euclid(2));
            f = BigRational::from_integer(BigInt::from(2)).pow(q2);
            if r == 0 {
                m.remove(&Symbol::Sqrt2);
            } else {
                m.insert(Symbol::Sqrt2, r);
            }
        }
        (Monomial(m), f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| if *e == 1 { s.to_string() } else { format!("{s}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Exact `a + b·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussQ {
    pub fn real(q: BigRational) -> Self {
        GaussQ { re: q, im: BigRational::zero() }
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn mul(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn add(&self, o: &GaussQ) -> GaussQ {
        GaussQ { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact linear combination of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstExpr {
    terms: BTreeMap<Monomial, GaussQ>,
}

impl ConstExpr {
    pub fn zero() -> Self {
        ConstExpr::default()
    }
    pub fn rational(c: BigRational) -> Self {
        ConstExpr::term(GaussQ::real(c), Monomial::one())
    }
    pub fn int(n: i64) -> Self {
        ConstExpr::rational(q(n, 1))
    }
    pub fn i() -> Self {
        ConstExpr::term(GaussQ { re: BigRational::zero(), im: BigRational::one() }, Monomial::one())
    }
    pub fn symbol(s: Symbol) -> Self {
        ConstExpr::term(GaussQ::real(BigRational::one()), Monomial::of(s, 1))
    }
    pub fn pi() -> Self {
        Self::symbol(Symbol::Pi)
    }
    pub fn sqrt2() -> Self {
        Self::symbol(Symbol::Sqrt2)
    }
    pub fn log2() -> Self {
        Self::symbol(Symbol::Log2)
    }
    pub fn zeta(k: u32) -> Self {
        Self::symbol(Symbol::Zeta(k))
    }
    pub fn term(c: GaussQ, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ConstExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussQ)> {
        self.terms.iter()
    }
    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, m: &Monomial) -> GaussQ {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Common weight of all monomials, `None` when mixed; zero has weight 0.
    pub fn weight(&self) -> Option<i32> {
        let mut w = None;
        for m in self.terms.keys() {
            match w {
                None => w = Some(m.weight()),
                Some(x) if x != m.weight() => return None,
                _ => {}
            }
        }
        Some(w.unwrap_or(0))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let g = GaussQ::real(c.clone());
        self * &ConstExpr::term(g, Monomial::one())
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut r = ConstExpr::int(1);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// Complex conjugate (all symbols are real).
    pub fn conj(&self) -> Self {
        ConstExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), GaussQ { re: c.re.clone(), im: -&c.im }))
                .collect(),
        }
    }

    /// Multiply by `π^e`.
    pub fn times_pi_pow(&self, e: i32) -> Self {
        self * &ConstExpr::term(GaussQ::real(BigRational::one()), Monomial::of(Symbol::Pi, e))
    }

    /// Certified numeric image.
    pub fn numeric(&self, ctx: &Ctx) -> Result<CertifiedComplex> {
        let mut acc = ctx.zero();
        for (m, c) in &self.terms {
            let mut v = ctx.one();
            for (s, e) in &m.0 {
                let base = match s {
                    Symbol::Sqrt2 => ctx.int(2).sqrt()?,
                    Symbol::Pi => ctx.pi(),
                    Symbol::Log2 => ctx.ln2(),
                    Symbol::Zeta(k) => alternating_mzv(&MzvIndex::new(vec![(*k, 1)])?, ctx)?,
                };
                let p = base.powi(e.unsigned_abs());
                v = if *e < 0 { v.try_div(&p)? } else { &v * &p };
            }
            let coef = &rat(ctx, &c.re) + &rat(ctx, &c.im).mul_i();
            acc = &acc + &(&v * &coef);
        }
        Ok(acc)
    }
}

fn rat(ctx: &Ctx, r: &BigRational) -> CertifiedComplex {
    let n = ctx.parse_real(&r.numer().to_string()).expect("integer literal");
    let d = ctx.parse_real(&r.denom().to_string()).expect("integer literal");
    n.try_div(&d).expect("nonzero denominator")
}

pub fn numeric(e: &ConstExpr, ctx: &Ctx) -> Result<CertifiedComplex> {
    e.numeric(ctx)
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let coef = match (c.re.is_zero(), c.im.is_zero()) {
                (false, true) => c.re.to_string(),
                (true, false) => format!("{}*i", c.im),
                _ => format!("({} + {}*i)", c.re, c.im),
            };
            let body = if m.0.is_empty() { coef } else { format!("{coef}*{m}") };
            if first {
                write!(f, "{body}")?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl<'a> Add<&'a ConstExpr> for &'a ConstExpr {
    type Output = ConstExpr;
    fn add(self, o: &ConstExpr) -> ConstExpr {
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            let v = terms.get(m).map(|x| x.add(c)).unwrap_or_else(|| c.clone());
            if v.is_zero() {
                terms.remove(m);
            } else {
                terms.insert(m.clone(), v);
            }
        }
        ConstExpr { terms }
    }
}

impl Neg for &ConstExpr {
    type Output = ConstExpr;
    fn neg(self) -> ConstExpr {
        ConstExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), GaussQ { re: -&c.re, im: -&c.im }))
                .collect(),
        }
    }
}

impl<'a> Sub<&'a ConstExpr> for &'a ConstExpr {
    type Output = ConstExpr;
    fn sub(self, o: &ConstExpr) -> ConstExpr {
        self + &(-o)
    }
}

impl<'a> Mul<&'a ConstExpr> for &'a ConstExpr {
    type Output = ConstExpr;
    fn mul(self, o: &ConstExpr) -> ConstExpr {
        let mut acc = ConstExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let (m, f) = m1.times(m2);
                let c = c1.mul(c2);
                acc = &acc + &ConstExpr::term(GaussQ { re: &c.re * &f, im: &c.im * &f }, m);
            }
        }
        acc
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr<ConstExpr> for ConstExpr {
            type Output = ConstExpr;
            fn $f(self, o: ConstExpr) -> ConstExpr {
                (&self).$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for ConstExpr {
    type Output = ConstExpr;
    fn neg(self) -> ConstExpr {
        -&self
    }
}

/// `c·π^a·log2^b·ζ(3)^z` shorthand.
pub fn mono(n: i64, d: i64, pi: i32, log2: i32, z3: i32) -> ConstExpr {
    let m = [(Symbol::Pi, pi), (Symbol::Log2, log2), (Symbol::Zeta(3), z3)]
        .into_iter()
        .filter(|(_, e)| *e != 0)
        .collect();
    ConstExpr::term(GaussQ::real(q(n, d)), Monomial(m))
}

/// Closed forms of the alternating MZVs of weight ≤ 3 that are derived by
/// stuffle, shuffle and distribution relations.
pub fn closed_form(idx: &MzvIndex) -> Result<ConstExpr> {
    let key = idx.to_string();
    Ok(match key.as_str() {
        "" => ConstExpr::int(1),
        "-1" => mono(-1, 1, 0, 1, 0),
        "2" => mono(1, 6, 2, 0, 0),
        "-2" => mono(-1, 12, 2, 0, 0),
        "3" => mono(1, 1, 0, 0, 1),
        "-3" => mono(-3, 4, 0, 0, 1),
        "-1,-1" => mono(1, 2, 0, 2, 0) - mono(1, 12, 2, 0, 0),
        "-1,-1,-1" => mono(-1, 6, 0, 3, 0) + mono(1, 12, 2, 1, 0) - mono(1, 4, 0, 0, 1),
        "-1,2" => mono(-1, 4, 2, 1, 0) + mono(1, 1, 0, 0, 1),
        "2,-1" => mono(1, 12, 2, 1, 0) - mono(1, 4, 0, 0, 1),
        "1,-2" => mono(1, 8, 0, 0, 1),
        "1,2" => mono(1, 1, 0, 0, 1),
        "-1,-2" => mono(1, 4, 2, 1, 0) - mono(13, 8, 0, 0, 1),
        "-2,-1" => mono(-1, 6, 2, 1, 0) + mono(5, 8, 0, 0, 1),
        _ => return Err(Error::UnknownIndex(key)),
    })
}

/// Indices with a stored closed form.
pub fn table_indices() -> Vec<MzvIndex> {
    ["-1", "2", "-2", "3", "-3", "-1,-1", "-1,-1,-1", "-1,2", "2,-1", "1,-2", "1,2", "-1,-2", "-2,-1"]
        .iter()
        .map(|s| s.parse().expect("table literal"))
        .collect()
}

/// Exact Ω-value at φ = π/4, endpoint 1, through its MZV and the closed-form table.
pub fn omega_closed_form(word: &[u8]) -> Result<ConstExpr> {
    let (sign, idx) = omega_to_mzv(word)?;
    let v = (&ConstExpr::i() * &ConstExpr::pi()) * closed_form(&idx)?;
    Ok(if sign < 0 { -v } else { v })
}

/// The order-3 area coefficient from its Ω-value formula, in exact arithmetic.
pub fn alpha3_exact() -> Result<ConstExpr> {
    let o = |w: &[u8]| omega_closed_form(w);
    let i = ConstExpr::i();
    let o21 = o(&[2, 1])?;
    let t1 = (&(-&i) * &o21.powi(3)).times_pi_pow(-3);
    let inner = &(&(&o(&[2, 2, 3])? - &o(&[3, 1, 1])?.scale(&q(6, 1))) - &o(&[3, 3, 3])?.scale(&q(3, 1))) * &o21;
    let t2 = inner.scale(&q(1, 2)).times_pi_pow(-2);
    let s4 = &(&(&(&o(&[2, 1, 1, 1])?.scale(&q(6, 1)) + &o(&[2, 2, 2, 1])?) - &o(&[3, 1, 2, 3])?) + &o(&[2, 1, 3, 3])?)
        + &o(&[3, 3, 2, 1])?;
    let t3 = (&i * &s4).scale(&q(1, 2)).times_pi_pow(-1);
    Ok(&(&t1 + &t2) + &t3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha3_is_nine_quarters_zeta3() {
        assert_eq!(alpha3_exact().unwrap(), mono(9, 4, 0, 0, 1));
    }

    #[test]
    fn stuffle_cube() {
        let z = |s: &str| closed_form(&s.parse().unwrap()).unwrap();
        let lhs = z("-1").powi(3);
        let rhs = &(&z("-1,-1,-1").scale(&q(6, 1)) + &(&z("-1,2") + &z("2,-1")).scale(&q(3, 1))) + &z("-3");
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weights_are_homogeneous() {
        for idx in table_indices() {
            assert_eq!(closed_form(&idx).unwrap().weight(), Some(idx.weight() as i32));
        }
    }
}
