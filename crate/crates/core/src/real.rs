//! Real scalars shared by the geometric and the norm-estimate code: plain doubles for
//! searches, discs for the certified pass.

use std::f64::consts::PI;

use rug::float::Round;

use crate::cdisc::{up, CertifiedComplex};
use crate::error::{Error, Result};

type CC = CertifiedComplex;

pub trait Real: Clone + Sized {
    /// Constant in the same scalar type (and precision) as `self`.
    fn lit(&self, v: f64) -> Self;
    fn pi(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn acos(&self) -> Result<Self>;
    fn atan(&self) -> Result<Self>;
    fn ln(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn cos(&self) -> Self;
    fn sin(&self) -> Self;
    /// Upper bound of the value.
    fn hi(&self) -> f64;
    /// Lower bound of the value.
    fn lo(&self) -> f64;

    fn powi(&self, k: u32) -> Self {
        let mut r = self.lit(1.0);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }
    fn max(&self, o: &Self) -> Self {
        if self.lo() >= o.hi() {
            self.clone()
        } else if o.lo() >= self.hi() {
            o.clone()
        } else {
            // overlapping: the larger upper end dominates both
            let h = self.hi().max(o.hi());
            self.lit(h)
        }
    }
}

impl Real for f64 {
    fn lit(&self, v: f64) -> Self {
        v
    }
    fn pi(&self) -> Self {
        PI
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::DivisorContainsZero);
        }
        Ok(self / o)
    }
    fn sqrt(&self) -> Result<Self> {
        Ok(f64::max(*self, 0.0).sqrt())
    }
    fn acos(&self) -> Result<Self> {
        Ok(self.clamp(-1.0, 1.0).acos())
    }
    fn atan(&self) -> Result<Self> {
        Ok(f64::atan(*self))
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(Error::DomainError("log of a non-positive number".into()));
        }
        Ok(f64::ln(*self))
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn hi(&self) -> f64 {
        *self
    }
    fn lo(&self) -> f64 {
        *self
    }
}

impl Real for CC {
    fn lit(&self, v: f64) -> Self {
        self.one_like().mul_f64(v)
    }
    fn pi(&self) -> Self {
        self.one_like().atan().expect("atan(1)").mul_int(4)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        self.try_div(o)
    }
    fn sqrt(&self) -> Result<Self> {
        CC::sqrt(self)
    }
    fn acos(&self) -> Result<Self> {
        CC::acos(self)
    }
    fn atan(&self) -> Result<Self> {
        CC::atan(self)
    }
    fn ln(&self) -> Result<Self> {
        CC::ln(self)
    }
    fn exp(&self) -> Self {
        CC::exp(self)
    }
    fn cos(&self) -> Self {
        CC::cos(self)
    }
    fn sin(&self) -> Self {
        CC::sin(self)
    }
    fn hi(&self) -> f64 {
        up::add(self.re().to_f64_round(Round::Up), self.radius())
    }
    fn lo(&self) -> f64 {
        up::sub_down(self.re().to_f64_round(Round::Down), self.radius())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdisc::Ctx;

    #[test]
    fn disc_bounds_bracket_double() {
        let c = Ctx::new(30).unwrap().one();
        let x = c.lit(0.3).atan().unwrap().exp().ln().unwrap();
        assert!(x.lo() <= 0.3f64.atan() && 0.3f64.atan() <= x.hi());
        let m = c.lit(2.0).max(&c.lit(3.0));
        assert_eq!(m.hi(), 3.0);
    }
}
