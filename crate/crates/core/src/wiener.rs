//! Laurent polynomials in λ with disc coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::cdisc::{up, CertifiedComplex, Ctx};
use crate::error::{Error, Result};

/// Degree classes selected by [`LaurentPoly::project`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    Even,
    Odd,
    /// Degrees `≥ 0`.
    Pos,
    /// Degrees `> 0`.
    StrictPos,
    /// Degrees `< 0`.
    Neg,
    /// Degree `0`.
    Const,
}

impl Projection {
    fn keeps(self, k: i32) -> bool {
        match self {
            Projection::Even => k.rem_euclid(2) == 0,
            Projection::Odd => k.rem_euclid(2) == 1,
            Projection::Pos => k >= 0,
            Projection::StrictPos => k > 0,
            Projection::Neg => k < 0,
            Projection::Const => k == 0,
        }
    }
}

/// Dense storage over `[min_deg, min_deg + coeffs.len())`.
#[derive(Clone)]
pub struct LaurentPoly {
    ctx: Ctx,
    min_deg: i32,
    coeffs: Vec<CertifiedComplex>,
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}·λ^{}", c, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl LaurentPoly {
    pub fn zero(ctx: &Ctx) -> Self {
        LaurentPoly { ctx: *ctx, min_deg: 0, coeffs: Vec::new() }
    }

    pub fn constant(ctx: &Ctx, c: CertifiedComplex) -> Self {
        Self::monomial(ctx, c, 0)
    }

    pub fn monomial(ctx: &Ctx, c: CertifiedComplex, k: i32) -> Self {
        LaurentPoly { ctx: *ctx, min_deg: k, coeffs: vec![c] }.trimmed()
    }

    /// Coefficients listed from degree `min_deg` upwards.
    pub fn from_coeffs(ctx: &Ctx, min_deg: i32, coeffs: Vec<CertifiedComplex>) -> Self {
        LaurentPoly { ctx: *ctx, min_deg, coeffs }.trimmed()
    }

    /// Build from `(degree, coefficient)` pairs; repeated degrees are summed.
    pub fn from_terms<I: IntoIterator<Item = (i32, CertifiedComplex)>>(ctx: &Ctx, terms: I) -> Self {
        let mut p = Self::zero(ctx);
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p.trimmed()
    }

    /// Drop exact-zero coefficients at both ends.
    pub fn pruned(self) -> Self {
        self.trimmed()
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_disc())
    }

    /// Lowest stored degree (0 for the zero polynomial).
    pub fn min_deg(&self) -> i32 {
        if self.coeffs.is_empty() {
            0
        } else {
            self.min_deg
        }
    }

    /// Highest stored degree (0 for the zero polynomial).
    pub fn max_deg(&self) -> i32 {
        if self.coeffs.is_empty() {
            0
        } else {
            self.min_deg + self.coeffs.len() as i32 - 1
        }
    }

    pub fn coeff(&self, k: i32) -> CertifiedComplex {
        let i = k - self.min_deg;
        if i >= 0 && (i as usize) < self.coeffs.len() {
            self.coeffs[i as usize].clone()
        } else {
            self.ctx.zero()
        }
    }

    /// Non-zero terms as `(degree, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &CertifiedComplex)> {
        let m = self.min_deg;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero_disc())
            .map(move |(i, c)| (m + i as i32, c))
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero_disc()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero_disc()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_deg += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.min_deg = 0;
        }
        self
    }

    fn ensure_range(&mut self, lo: i32, hi: i32) {
        if self.coeffs.is_empty() {
            self.min_deg = lo;
            self.coeffs = vec![self.ctx.zero(); (hi - lo + 1) as usize];
            return;
        }
        if lo < self.min_deg {
            let extra = (self.min_deg - lo) as usize;
            let mut v = vec![self.ctx.zero(); extra];
            v.append(&mut self.coeffs);
            self.coeffs = v;
            self.min_deg = lo;
        }
        let top = self.max_deg();
        if hi > top {
            let extra = (hi - top) as usize;
            self.coeffs.extend(std::iter::repeat_n(self.ctx.zero(), extra));
        }
    }

    /// In-place `self += c·λ^k`.
    pub fn add_term(&mut self, k: i32, c: &CertifiedComplex) {
        if c.is_zero_disc() {
            return;
        }
        self.ensure_range(k, k);
        let i = (k - self.min_deg) as usize;
        self.coeffs[i] = &self.coeffs[i] + c;
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &LaurentPoly) {
        if other.coeffs.is_empty() {
            return;
        }
        self.ensure_range(other.min_deg, other.max_deg());
        for (i, c) in other.coeffs.iter().enumerate() {
            if c.is_zero_disc() {
                continue;
            }
            let j = (other.min_deg + i as i32 - self.min_deg) as usize;
            self.coeffs[j] = &self.coeffs[j] + c;
        }
    }

    /// In-place `self += c·other`.
    pub fn add_scaled(&mut self, other: &LaurentPoly, c: &CertifiedComplex) {
        if other.coeffs.is_empty() || c.is_zero_disc() {
            return;
        }
        self.ensure_range(other.min_deg, other.max_deg());
        for (i, a) in other.coeffs.iter().enumerate() {
            if a.is_zero_disc() {
                continue;
            }
            let j = (other.min_deg + i as i32 - self.min_deg) as usize;
            self.coeffs[j] = &self.coeffs[j] + &(a * c);
        }
    }

    pub fn map<F: Fn(i32, &CertifiedComplex) -> CertifiedComplex>(&self, f: F) -> Self {
        let m = self.min_deg;
        LaurentPoly {
            ctx: self.ctx,
            min_deg: m,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| f(m + i as i32, c)).collect(),
        }
        .trimmed()
    }

    pub fn scale(&self, c: &CertifiedComplex) -> Self {
        self.map(|_, a| a * c)
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.map(|_, a| a.mul_int(k))
    }

    pub fn div_int(&self, k: i64) -> Self {
        self.map(|_, a| a.div_int(k))
    }

    /// Multiply by `λ^k`.
    pub fn shift(&self, k: i32) -> Self {
        let mut p = self.clone();
        if !p.coeffs.is_empty() {
            p.min_deg += k;
        }
        p
    }

    /// Complexified star: `λ^k ↦ λ^{-k}`, coefficients unchanged.
    pub fn star(&self) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut c = self.coeffs.clone();
        c.reverse();
        LaurentPoly { ctx: self.ctx, min_deg: -self.max_deg(), coeffs: c }
    }

    pub fn project(&self, which: Projection) -> Self {
        self.map(|k, c| if which.keeps(k) { c.clone() } else { self.ctx.zero() })
    }

    pub fn even(&self) -> Self {
        self.project(Projection::Even)
    }
    pub fn odd(&self) -> Self {
        self.project(Projection::Odd)
    }
    /// `u⁺`: strictly positive degrees.
    pub fn plus(&self) -> Self {
        self.project(Projection::StrictPos)
    }
    /// `u⁻`: strictly negative degrees.
    pub fn minus(&self) -> Self {
        self.project(Projection::Neg)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &CertifiedComplex) -> Result<CertifiedComplex> {
        if self.coeffs.is_empty() {
            return Ok(self.ctx.zero());
        }
        let mut acc = self.ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        // acc = Σ c_k x^(k − min_deg)
        if self.min_deg >= 0 {
            Ok(&acc * &x.powi(self.min_deg as u32))
        } else {
            if x.contains_zero() {
                return Err(Error::PoleAtZero);
            }
            let inv = x.recip()?.powi((-self.min_deg) as u32);
            Ok(&acc * &inv)
        }
    }

    /// Exact evaluation at `λ = i`.
    pub fn eval_i(&self) -> CertifiedComplex {
        let mut acc = self.ctx.zero();
        for (k, c) in self.terms() {
            acc = &acc + &c.mul_i_pow(k as i64);
        }
        acc
    }

    /// Exact evaluation at `λ = 1`.
    pub fn eval_one(&self) -> CertifiedComplex {
        let mut acc = self.ctx.zero();
        for (_, c) in self.terms() {
            acc = &acc + c;
        }
        acc
    }

    /// Exact evaluation at `λ = −1`.
    pub fn eval_minus_one(&self) -> CertifiedComplex {
        let mut acc = self.ctx.zero();
        for (k, c) in self.terms() {
            if k.rem_euclid(2) == 0 {
                acc = &acc + c;
            } else {
                acc = &acc - c;
            }
        }
        acc
    }

    /// Division by `Π(λ − μ_i)`, one root at a time, via
    /// `q(λ) = (u(λ) − u(μ)) / (λ − μ)`.
    pub fn divide_by_roots(&self, roots: &[CertifiedComplex]) -> Result<(LaurentPoly, LaurentPoly)> {
        if !self.coeffs.is_empty() && self.min_deg < 0 {
            return Err(Error::NegativeDegreeInput);
        }
        let mut q = self.clone();
        let mut rems: Vec<CertifiedComplex> = Vec::with_capacity(roots.len());
        for mu in roots {
            let (q1, r1) = q.divide_linear(mu);
            q = q1;
            rems.push(r1);
        }
        // r = Σ_j r_j Π_{i<j} (λ − μ_i)
        let mut r = LaurentPoly::zero(&self.ctx);
        let mut basis = LaurentPoly::constant(&self.ctx, self.ctx.one());
        for (j, rj) in rems.iter().enumerate() {
            r.add_scaled(&basis, rj);
            let lin = LaurentPoly::from_terms(&self.ctx, [(1, self.ctx.one()), (0, -&roots[j])]);
            basis = &basis * &lin;
        }
        Ok((q, r.trimmed()))
    }

    fn divide_linear(&self, mu: &CertifiedComplex) -> (LaurentPoly, CertifiedComplex) {
        if self.coeffs.is_empty() {
            return (self.clone(), self.ctx.zero());
        }
        let n = self.max_deg();
        if n == 0 {
            return (LaurentPoly::zero(&self.ctx), self.coeff(0));
        }
        let mut q = vec![self.ctx.zero(); n as usize];
        let mut b = self.coeff(n);
        q[(n - 1) as usize] = b.clone();
        for k in (1..n).rev() {
            b = &self.coeff(k) + &(mu * &b);
            q[(k - 1) as usize] = b.clone();
        }
        let r = &self.coeff(0) + &(mu * &b);
        (LaurentPoly::from_coeffs(&self.ctx, 0, q), r)
    }

    /// Enclosure of `Σ |u_k| ρ^{|k|}`.
    pub fn rho_norm(&self, rho: f64) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for (k, c) in self.terms() {
            let (a, b) = c.disc_abs_interval();
            let e = k.unsigned_abs() as i32;
            lo = (lo + up::mul_down(a, up::powi_down(rho, e))).next_down().max(0.0);
            hi = up::add(hi, up::mul(b, up::powi(rho, e)));
        }
        (lo, hi)
    }

    /// Upper bound of the ρ-norm.
    pub fn norm_up(&self, rho: f64) -> f64 {
        self.rho_norm(rho).1
    }

    /// Largest coefficient radius.
    pub fn max_radius(&self) -> f64 {
        self.coeffs.iter().map(|c| c.radius()).fold(0.0, f64::max)
    }

    /// Coefficient records `(degree, re, im, radius)` with `digits` significant digits.
    pub fn records(&self, digits: usize) -> Vec<(i32, String, String, f64)> {
        self.terms()
            .map(|(k, c)| {
                let (re, im) = c.to_decimal(digits);
                (k, re, im, c.radius())
            })
            .collect()
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, b: &LaurentPoly) -> LaurentPoly {
        let mut r = self.clone();
        r.add_assign(b);
        r.trimmed()
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, b: &LaurentPoly) -> LaurentPoly {
        let mut r = self.clone();
        r.add_assign(&-b);
        r.trimmed()
    }
}

impl<'a> Neg for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.map(|_, c| -c)
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, b: &LaurentPoly) -> LaurentPoly {
        if self.coeffs.is_empty() || b.coeffs.is_empty() {
            return LaurentPoly::zero(&self.ctx);
        }
        let n = self.coeffs.len() + b.coeffs.len() - 1;
        let mut out: Vec<Option<CertifiedComplex>> = vec![None; n];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero_disc() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero_disc() {
                    continue;
                }
                let t = x * y;
                out[i + j] = Some(match out[i + j].take() {
                    None => t,
                    Some(s) => &s + &t,
                });
            }
        }
        LaurentPoly {
            ctx: self.ctx,
            min_deg: self.min_deg + b.min_deg,
            coeffs: out.into_iter().map(|c| c.unwrap_or_else(|| self.ctx.zero())).collect(),
        }
        .trimmed()
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, b: LaurentPoly) -> LaurentPoly {
                (&self).$m(&b)
            }
        }
        impl<'a> $tr<&'a LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, b: &LaurentPoly) -> LaurentPoly {
                (&self).$m(b)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::new(30).unwrap()
    }

    fn p(c: &Ctx, terms: &[(i32, f64)]) -> LaurentPoly {
        LaurentPoly::from_terms(c, terms.iter().map(|&(k, v)| (k, c.real_f64(v))))
    }

    #[test]
    fn star_example() {
        let c = ctx();
        let s = p(&c, &[(2, 1.0), (0, 3.0)]).star();
        assert_eq!(s.coeff(-2).re_f64(), 1.0);
        assert_eq!(s.coeff(0).re_f64(), 3.0);
        assert_eq!(s.max_deg(), 0);
    }

    #[test]
    fn projections() {
        let c = ctx();
        let e = p(&c, &[(1, 1.0), (2, 1.0), (0, 1.0)]).even();
        assert_eq!(e.coeff(2).re_f64(), 1.0);
        assert_eq!(e.coeff(0).re_f64(), 1.0);
        assert!(e.coeff(1).is_zero_disc());
        let q = p(&c, &[(-2, 1.0), (2, -1.0)]).plus();
        assert_eq!(q.coeff(2).re_f64(), -1.0);
        assert!(q.coeff(-2).is_zero_disc());
    }

    #[test]
    fn evaluation_examples() {
        let c = ctx();
        let v = p(&c, &[(2, 1.0), (0, 1.0)]).eval(&c.i()).unwrap();
        assert!(v.contains_zero());
        let x1 = p(&c, &[(-1, 1.0), (1, 1.0)]);
        assert!(x1.eval(&c.i()).unwrap().contains_zero());
        assert!(x1.eval(&c.real_with_radius(0.0, 0.1)).is_err());
    }

    #[test]
    fn division_examples() {
        let c = ctx();
        let roots = [c.one(), c.real_f64(-1.0)];
        let (q, r) = p(&c, &[(2, 1.0), (0, -1.0)]).divide_by_roots(&roots).unwrap();
        assert!(q.coeff(0).overlaps(&c.one()) && q.max_deg() == 0);
        assert!(r.is_zero());
        let (q, r) = p(&c, &[(3, 1.0)]).divide_by_roots(&roots).unwrap();
        assert!(q.coeff(1).overlaps(&c.one()) && q.max_deg() == 1 && q.min_deg() == 1);
        assert!(r.coeff(1).overlaps(&c.one()) && r.max_deg() == 1 && r.min_deg() == 1);
        assert!(p(&c, &[(-1, 1.0)]).divide_by_roots(&roots).is_err());
    }

    #[test]
    fn norms() {
        let c = ctx();
        let (lo, hi) = p(&c, &[(2, 1.0), (0, 1.0)]).rho_norm(1.5);
        assert!(lo <= 3.25 && hi >= 3.25 && hi - lo < 1e-12);
        let (lo, hi) = LaurentPoly::zero(&c).rho_norm(2.0);
        assert_eq!((lo, hi), (0.0, 0.0));
    }
}
