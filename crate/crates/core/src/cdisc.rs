//! Complex disc arithmetic over MPFR centers.
//!
//! A [`CertifiedComplex`] is a center `re + i·im` with an absolute error
//! radius. Radii live in `f64` and are always rounded away from zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::CompleteRound;
use rug::Float;

use crate::error::{Error, Result};

pub const DEFAULT_DIGITS: u32 = 60;
pub const GUARD_BITS: u32 = 64;
pub const MAX_DIGITS: u32 = 280;

/// Radius helpers. Every result is an upper bound of the exact real value.
pub mod up {
    #[inline]
    pub fn add(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            b
        } else if b == 0.0 {
            a
        } else {
            (a + b).next_up()
        }
    }
    #[inline]
    pub fn mul(a: f64, b: f64) -> f64 {
        if a == 0.0 || b == 0.0 {
            0.0
        } else if a == 1.0 {
            b
        } else if b == 1.0 {
            a
        } else {
            (a * b).next_up()
        }
    }
    #[inline]
    pub fn div(a: f64, b: f64) -> f64 {
        (a / b).next_up()
    }
    /// Lower bound of `a - b`.
    #[inline]
    pub fn sub_down(a: f64, b: f64) -> f64 {
        (a - b).next_down()
    }
    #[inline]
    pub fn mul_down(a: f64, b: f64) -> f64 {
        (a * b).next_down()
    }
    #[inline]
    pub fn div_down(a: f64, b: f64) -> f64 {
        (a / b).next_down()
    }
    /// libm functions are trusted to 1 ulp; two steps cover it.
    #[inline]
    pub fn lib(x: f64) -> f64 {
        x.next_up().next_up()
    }
    #[inline]
    pub fn lib_down(x: f64) -> f64 {
        x.next_down().next_down()
    }
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt().next_up()
    }
    pub fn sqrt_down(x: f64) -> f64 {
        x.max(0.0).sqrt().next_down().max(0.0)
    }
    pub fn exp(x: f64) -> f64 {
        lib(x.exp())
    }
    pub fn powi(x: f64, k: i32) -> f64 {
        let mut r = 1.0;
        for _ in 0..k {
            r = mul(r, x);
        }
        r
    }
    pub fn powi_down(x: f64, k: i32) -> f64 {
        let mut r = 1.0;
        for _ in 0..k {
            r = mul_down(r, x);
        }
        r
    }
}

fn bits_for(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

/// Precision context, passed explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    digits: u32,
    bits: u32,
    certified: bool,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx::new(DEFAULT_DIGITS).expect("default digits are valid")
    }
}

impl Ctx {
    pub fn new(digits: u32) -> Result<Self> {
        if digits == 0 || digits > MAX_DIGITS {
            return Err(Error::DomainError(format!(
                "digits must be in 1..={MAX_DIGITS}, got {digits}"
            )));
        }
        Ok(Ctx { digits, bits: bits_for(digits), certified: true })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
    pub fn bits(&self) -> u32 {
        self.bits
    }
    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Same precision with radius tracking switched off.
    pub fn uncertified(self) -> Self {
        Ctx { certified: false, ..self }
    }

    /// Same context with `extra` more digits.
    pub fn wider(self, extra: u32) -> Self {
        let digits = (self.digits + extra).min(MAX_DIGITS);
        Ctx { digits, bits: bits_for(digits), ..self }
    }

    fn float(&self, v: f64) -> Float {
        Float::with_val(self.bits, v)
    }

    pub fn zero(&self) -> CertifiedComplex {
        CertifiedComplex::exact(self.float(0.0), self.float(0.0), self.certified)
    }
    pub fn one(&self) -> CertifiedComplex {
        self.real_f64(1.0)
    }
    pub fn i(&self) -> CertifiedComplex {
        CertifiedComplex::exact(self.float(0.0), self.float(1.0), self.certified)
    }
    /// Exact embedding of a double.
    pub fn real_f64(&self, v: f64) -> CertifiedComplex {
        CertifiedComplex::exact(self.float(v), self.float(0.0), self.certified)
    }
    pub fn complex_f64(&self, re: f64, im: f64) -> CertifiedComplex {
        CertifiedComplex::exact(self.float(re), self.float(im), self.certified)
    }
    pub fn int(&self, v: i64) -> CertifiedComplex {
        let (re, e) = rnd(self.bits, v);
        let mut z = CertifiedComplex::exact(re, self.float(0.0), self.certified);
        if self.certified {
            z.rad = e;
        }
        z
    }
    /// `p/q` rounded to the working precision.
    pub fn ratio(&self, p: i64, q: i64) -> CertifiedComplex {
        let (re, e) = rnd(self.bits, Float::with_val(self.bits, p) / q);
        let rad = if self.certified { e } else { 0.0 };
        CertifiedComplex { re, im: self.float(0.0), rad, certified: self.certified }
    }
    pub fn pi(&self) -> CertifiedComplex {
        self.constant(Constant::Pi)
    }
    pub fn ln2(&self) -> CertifiedComplex {
        self.constant(Constant::Log2)
    }
    fn constant(&self, c: Constant) -> CertifiedComplex {
        let re = Float::with_val(self.bits, c);
        let rad = if self.certified { ulp_err(&re) } else { 0.0 };
        CertifiedComplex { re, im: self.float(0.0), rad, certified: self.certified }
    }
    /// Decimal literal rounded to the working precision.
    pub fn parse_real(&self, s: &str) -> Result<CertifiedComplex> {
        let p = Float::parse(s.trim()).map_err(|e| Error::DomainError(e.to_string()))?;
        let re = p.complete(self.bits);
        let rad = if self.certified { ulp_err(&re) } else { 0.0 };
        Ok(CertifiedComplex { re, im: self.float(0.0), rad, certified: self.certified })
    }
    /// A real disc with explicit radius.
    pub fn real_with_radius(&self, v: f64, rad: f64) -> CertifiedComplex {
        let mut z = self.real_f64(v);
        z.rad = rad;
        z
    }
    pub fn from_floats(&self, re: Float, im: Float, rad: f64) -> CertifiedComplex {
        CertifiedComplex { re, im, rad, certified: self.certified }
    }
}

/// Upper bound of one unit in the last place of `x` (relative `2^(1-p)`).
pub(crate) fn ulp_err(x: &Float) -> f64 {
    if x.is_zero() || !x.is_finite() {
        return 0.0;
    }
    let m = abs_up(x);
    let e = (1 - x.prec() as i32).max(-1070);
    up::mul(m, 2f64.powi(e))
}

fn pair<Src>(p: u32, src: Src) -> (Float, Float)
where
    for<'a> (&'a mut Float, &'a mut Float): rug::Assign<Src>,
{
    let mut a = Float::new(p);
    let mut b = Float::new(p);
    rug::Assign::assign(&mut (&mut a, &mut b), src);
    (a, b)
}

/// Evaluate at precision `p`; the second value bounds the rounding error.
fn rnd<Src>(p: u32, src: Src) -> (Float, f64)
where
    Float: rug::ops::AssignRound<Src, Round = Round, Ordering = Ordering>,
{
    let (f, o) = Float::with_val_round(p, src, Round::Nearest);
    let e = if o == Ordering::Equal { 0.0 } else { ulp_err(&f) };
    (f, e)
}

fn slop(k: u32, x: &Float) -> f64 {
    up::mul(k as f64, ulp_err(x))
}

fn abs_up(x: &Float) -> f64 {
    if x.is_sign_negative() {
        -(x.to_f64_round(Round::Down))
    } else {
        x.to_f64_round(Round::Up)
    }
}

fn abs_down(x: &Float) -> f64 {
    if x.is_sign_negative() {
        -(x.to_f64_round(Round::Up))
    } else {
        x.to_f64_round(Round::Down)
    }
}

/// Branch selection for the logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBranch {
    /// Principal value, cut along the closed negative real axis.
    Principal,
    /// Argument in `(0, 2π)`, cut along the closed positive real axis.
    PositiveCut,
}

#[derive(Clone)]
pub struct CertifiedComplex {
    re: Float,
    im: Float,
    rad: f64,
    certified: bool,
}

impl fmt::Debug for CertifiedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CertifiedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = Some(((self.prec().saturating_sub(GUARD_BITS)) as f64 / std::f64::consts::LOG2_10) as usize + 1);
        write!(
            f,
            "({} + {}i ± {:.3e})",
            self.re.to_string_radix(10, d),
            self.im.to_string_radix(10, d),
            self.rad
        )
    }
}

impl CertifiedComplex {
    fn exact(re: Float, im: Float, certified: bool) -> Self {
        CertifiedComplex { re, im, rad: 0.0, certified }
    }

    /// Exact `1` at the precision and certification mode of `self`.
    pub fn one_like(&self) -> Self {
        let p = self.prec();
        CertifiedComplex::exact(Float::with_val(p, 1), Float::with_val(p, 0), self.certified)
    }
    pub fn zero_like(&self) -> Self {
        let p = self.prec();
        CertifiedComplex::exact(Float::with_val(p, 0), Float::with_val(p, 0), self.certified)
    }

    pub fn re(&self) -> &Float {
        &self.re
    }
    pub fn im(&self) -> &Float {
        &self.im
    }
    pub fn radius(&self) -> f64 {
        self.rad
    }
    pub fn is_certified(&self) -> bool {
        self.certified
    }
    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }
    pub fn ctx_bits(&self) -> u32 {
        self.prec()
    }

    pub fn re_f64(&self) -> f64 {
        self.re.to_f64()
    }
    pub fn im_f64(&self) -> f64 {
        self.im.to_f64()
    }

    /// Real part as a real disc.
    pub fn real_part(&self) -> Self {
        let p = self.prec();
        CertifiedComplex {
            re: self.re.clone(),
            im: Float::with_val(p, 0),
            rad: self.rad,
            certified: self.certified,
        }
    }
    /// Imaginary part as a real disc.
    pub fn imag_part(&self) -> Self {
        let p = self.prec();
        CertifiedComplex {
            re: self.im.clone(),
            im: Float::with_val(p, 0),
            rad: self.rad,
            certified: self.certified,
        }
    }

    /// Enlarge the radius by `extra` (rounded up).
    pub fn inflate(mut self, extra: f64) -> Self {
        if self.certified {
            self.rad = up::add(self.rad, extra);
        }
        self
    }

    /// Upper bound of `|center|`.
    pub fn center_abs_up(&self) -> f64 {
        up::lib(abs_up(&self.re).hypot(abs_up(&self.im)))
    }
    /// Lower bound of `|center|`.
    pub fn center_abs_down(&self) -> f64 {
        up::lib_down(abs_down(&self.re).hypot(abs_down(&self.im))).max(0.0)
    }
    /// Upper bound of `|z|` over the disc.
    pub fn mag(&self) -> f64 {
        up::add(self.center_abs_up(), self.rad)
    }

    /// `(max(0, |c| − r), |c| + r)`, outward rounded.
    pub fn disc_abs_interval(&self) -> (f64, f64) {
        let lo = up::sub_down(self.center_abs_down(), self.rad).max(0.0);
        (lo, self.mag())
    }

    pub fn is_zero_disc(&self) -> bool {
        self.re.is_zero() && self.im.is_zero() && self.rad == 0.0
    }

    /// True when `0` lies in the disc.
    pub fn contains_zero(&self) -> bool {
        self.center_abs_down() <= self.rad
    }

    /// True when the two discs intersect.
    pub fn overlaps(&self, other: &Self) -> bool {
        let d = self - other;
        d.center_abs_down() <= up::add(self.rad, other.rad)
    }

    /// Upper bound of `|a − b|` over both discs.
    pub fn dist_up(&self, other: &Self) -> f64 {
        (self - other).mag()
    }

    /// Whether every point of both discs is within `tol`: `|c − c'| + r + r' ≤ tol`.
    pub fn within(&self, other: &Self, tol: f64) -> bool {
        (self - other).mag() <= tol
    }

    pub fn conj(&self) -> Self {
        CertifiedComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
            rad: self.rad,
            certified: self.certified,
        }
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        CertifiedComplex {
            re: Float::with_val(self.im.prec(), -&self.im),
            im: self.re.clone(),
            rad: self.rad,
            certified: self.certified,
        }
    }

    /// Multiply by `i^k`.
    pub fn mul_i_pow(&self, k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => self.clone(),
            1 => self.mul_i(),
            2 => -self,
            _ => -&self.mul_i(),
        }
    }

    /// Exact scaling by `2^k`.
    pub fn scale_pow2(&self, k: i32) -> Self {
        let re = Float::with_val(self.re.prec(), &self.re << k);
        let im = Float::with_val(self.im.prec(), &self.im << k);
        let rad = if self.certified { up::mul(self.rad, 2f64.powi(k)) } else { 0.0 };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let p = self.prec();
        let (re, er) = rnd(p, &self.re * k);
        let (im, ei) = rnd(p, &self.im * k);
        let rad = if self.certified {
            up::add(up::mul(self.rad, k.unsigned_abs() as f64), up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero integer");
        let p = self.prec();
        let (re, er) = rnd(p, &self.re / k);
        let (im, ei) = rnd(p, &self.im / k);
        let rad = if self.certified {
            up::add(up::div(self.rad, k.unsigned_abs() as f64), up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    /// Multiply by a real double (treated as exact).
    pub fn mul_f64(&self, k: f64) -> Self {
        let p = self.prec();
        let (re, er) = rnd(p, &self.re * k);
        let (im, ei) = rnd(p, &self.im * k);
        let rad = if self.certified {
            up::add(up::mul(self.rad, k.abs()), up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc.unwrap_or_else(|| {
            let p = self.prec();
            CertifiedComplex::exact(Float::with_val(p, 1), Float::with_val(p, 0), self.certified)
        })
    }

    /// Disc division; fails when the divisor disc contains zero.
    pub fn try_div(&self, b: &Self) -> Result<Self> {
        let bmag_lo = b.center_abs_down();
        if !(bmag_lo > b.rad) {
            return Err(Error::DivisorContainsZero);
        }
        let p = self.prec().max(b.prec());
        let den = Float::with_val(p, b.re.mul_add_mul_ref(&b.re, &b.im, &b.im));
        let nre = Float::with_val(p, self.re.mul_add_mul_ref(&b.re, &self.im, &b.im));
        let nim = Float::with_val(p, self.im.mul_sub_mul_ref(&b.re, &self.re, &b.im));
        let re = nre / &den;
        let im = nim / &den;
        let certified = self.certified && b.certified;
        let rad = if certified {
            let amag = self.center_abs_up();
            let bmag_hi = b.center_abs_up();
            let num = up::add(up::mul(self.rad, bmag_hi), up::mul(amag, b.rad));
            let den = up::mul_down(bmag_lo, up::sub_down(bmag_lo, b.rad));
            up::add(up::div(num, den), up::add(slop(4, &re), slop(4, &im)))
        } else {
            0.0
        };
        Ok(CertifiedComplex { re, im, rad, certified })
    }

    pub fn recip(&self) -> Result<Self> {
        let p = self.prec();
        let one = CertifiedComplex::exact(Float::with_val(p, 1), Float::with_val(p, 0), self.certified);
        one.try_div(self)
    }

    fn unary(&self, re: Float, im: Float, lip: f64, round: f64) -> Self {
        let rad = if self.certified { up::add(up::mul(self.rad, lip), round) } else { 0.0 };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let e = Float::with_val(p, self.re.exp_ref());
        let (s, c) = pair(p, self.im.sin_cos_ref());
        let re = Float::with_val(p, &e * &c);
        let im = Float::with_val(p, &e * &s);
        let lip = up::exp(up::add(self.re.to_f64_round(Round::Up), self.rad));
        let round = up::add(slop(3, &re), slop(3, &im));
        self.unary(re, im, lip, round)
    }

    /// Logarithm on the chosen branch.
    pub fn ln_branch(&self, branch: LogBranch) -> Result<Self> {
        let x_nonneg = !self.re.is_sign_negative() || self.re.is_zero();
        let x_nonpos = self.re.is_sign_negative() || self.re.is_zero();
        let dist = match branch {
            LogBranch::Principal => {
                if x_nonneg && !self.re.is_zero() {
                    self.center_abs_down()
                } else {
                    abs_down(&self.im)
                }
            }
            LogBranch::PositiveCut => {
                if x_nonpos && !self.re.is_zero() {
                    self.center_abs_down()
                } else {
                    abs_down(&self.im)
                }
            }
        };
        if !(dist > self.rad) {
            return Err(Error::BranchCutViolation("log"));
        }
        let p = self.prec();
        let h = Float::with_val(p, self.re.hypot_ref(&self.im));
        let re = h.ln();
        let mut im = Float::with_val(p, self.im.atan2_ref(&self.re));
        if branch == LogBranch::PositiveCut && im.is_sign_negative() {
            let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
            im += two_pi;
        }
        let lo = up::sub_down(self.center_abs_down(), self.rad);
        let lip = up::div(1.0, lo);
        let round = up::add(up::add(slop(1, &re), slop(4, &im)), 2f64.powi(2 - p as i32));
        Ok(self.unary(re, im, lip, round))
    }

    pub fn ln(&self) -> Result<Self> {
        self.ln_branch(LogBranch::Principal)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Result<Self> {
        let p = self.prec();
        let zero_in = self.contains_zero();
        let cut = !self.re.is_zero() && self.re.is_sign_negative() && abs_down(&self.im) <= self.rad;
        if zero_in || cut {
            return Err(Error::BranchCutViolation("sqrt"));
        }
        let h = Float::with_val(p, self.re.hypot_ref(&self.im));
        let ax = Float::with_val(p, self.re.abs_ref());
        let t = Float::with_val(p, (h + ax) >> 1u32).sqrt();
        let two_t = Float::with_val(p, &t << 1u32);
        let (re, im) = if !self.re.is_sign_negative() {
            let im = Float::with_val(p, &self.im / &two_t);
            (t, im)
        } else {
            let re = Float::with_val(p, self.im.abs_ref()) / &two_t;
            let im = if self.im.is_sign_negative() { -t } else { t };
            (re, im)
        };
        let lo = up::sub_down(self.center_abs_down(), self.rad);
        let lip = up::div(0.5, up::sqrt_down(lo));
        let round = up::add(slop(6, &re), slop(6, &im));
        Ok(self.unary(re, im, lip, round))
    }

    fn sin_cos_parts(&self) -> (Float, Float, Float, Float) {
        let p = self.prec();
        let (s, c) = pair(p, self.re.sin_cos_ref());
        let (sh, ch) = pair(p, self.im.sinh_cosh_ref());
        (s, c, sh, ch)
    }

    fn trig_lip(&self) -> f64 {
        let y = up::add(abs_up(&self.im), self.rad);
        up::lib(y.cosh())
    }

    pub fn cos(&self) -> Self {
        let p = self.prec();
        let (s, c, sh, ch) = self.sin_cos_parts();
        let re = Float::with_val(p, &c * &ch);
        let im = -Float::with_val(p, &s * &sh);
        let round = up::add(slop(3, &re), slop(3, &im));
        let lip = self.trig_lip();
        self.unary(re, im, lip, round)
    }

    pub fn sin(&self) -> Self {
        let p = self.prec();
        let (s, c, sh, ch) = self.sin_cos_parts();
        let re = Float::with_val(p, &s * &ch);
        let im = Float::with_val(p, &c * &sh);
        let round = up::add(slop(3, &re), slop(3, &im));
        let lip = self.trig_lip();
        self.unary(re, im, lip, round)
    }

    fn require_real_center(&self, name: &str) -> Result<()> {
        if !self.im.is_zero() {
            return Err(Error::DomainError(format!("{name} needs a real center")));
        }
        Ok(())
    }

    /// Arc cosine for discs centered on `(−1, 1)`.
    pub fn acos(&self) -> Result<Self> {
        self.require_real_center("acos")?;
        let reach = up::add(abs_up(&self.re), self.rad);
        if !(reach < 1.0) {
            return Err(Error::DomainError("acos disc reaches |x| >= 1".into()));
        }
        let p = self.prec();
        let re = Float::with_val(p, self.re.acos_ref());
        let im = Float::with_val(p, 0);
        let lip = up::div(1.0, up::sqrt_down(up::sub_down(1.0, up::mul(reach, reach))));
        let round = slop(1, &re);
        Ok(self.unary(re, im, lip, round))
    }

    /// Arc tangent for discs with a real center.
    pub fn atan(&self) -> Result<Self> {
        self.require_real_center("atan")?;
        let x = abs_up(&self.re);
        let xl = abs_down(&self.re);
        let denom = up::sub_down(up::add(1.0, up::mul_down(xl, xl)), up::add(up::mul(2.0, up::mul(x, self.rad)), up::mul(self.rad, self.rad)));
        if !(denom > 0.0) {
            return Err(Error::DomainError("atan disc reaches a pole".into()));
        }
        let p = self.prec();
        let re = Float::with_val(p, self.re.atan_ref());
        let im = Float::with_val(p, 0);
        let lip = up::div(1.0, denom);
        let round = slop(1, &re);
        Ok(self.unary(re, im, lip, round))
    }

    /// `|z|` as a real disc.
    pub fn abs(&self) -> Self {
        let p = self.prec();
        let re = Float::with_val(p, self.re.hypot_ref(&self.im));
        let im = Float::with_val(p, 0);
        let round = slop(1, &re);
        self.unary(re, im, 1.0, round)
    }

    /// Principal power `z^e = exp(e·log z)`.
    pub fn pow_real(&self, e: &CertifiedComplex) -> Result<Self> {
        Ok((&self.ln()? * e).exp())
    }

    /// Compare real centers.
    pub fn cmp_re(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }

    /// Round the center to `bits` (radius grows by the rounding).
    pub fn with_prec(&self, bits: u32) -> Self {
        let re = Float::with_val(bits, &self.re);
        let im = Float::with_val(bits, &self.im);
        let rad = if self.certified {
            if bits < self.prec() {
                up::add(self.rad, up::add(ulp_err(&re), ulp_err(&im)))
            } else {
                self.rad
            }
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified: self.certified }
    }

    /// Decimal rendering of the real and imaginary centers with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (
            self.re.to_string_radix(10, Some(digits)),
            self.im.to_string_radix(10, Some(digits)),
        )
    }

    /// Raw access for serialisation (hex mantissa strings).
    pub fn to_hex(&self) -> (String, String) {
        (self.re.to_string_radix(16, None), self.im.to_string_radix(16, None))
    }

    pub fn from_hex(bits: u32, re: &str, im: &str, rad: f64) -> Result<Self> {
        let pr = Float::parse_radix(re, 16).map_err(|e| Error::DomainError(e.to_string()))?;
        let pi = Float::parse_radix(im, 16).map_err(|e| Error::DomainError(e.to_string()))?;
        Ok(CertifiedComplex {
            re: Float::with_val(bits, pr),
            im: Float::with_val(bits, pi),
            rad,
            certified: true,
        })
    }
}

impl<'a> Add<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn add(self, b: &CertifiedComplex) -> CertifiedComplex {
        let p = self.prec().max(b.prec());
        let (re, er) = rnd(p, &self.re + &b.re);
        let (im, ei) = rnd(p, &self.im + &b.im);
        let certified = self.certified && b.certified;
        let rad = if certified {
            up::add(up::add(self.rad, b.rad), up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified }
    }
}

impl<'a> Sub<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn sub(self, b: &CertifiedComplex) -> CertifiedComplex {
        let p = self.prec().max(b.prec());
        let (re, er) = rnd(p, &self.re - &b.re);
        let (im, ei) = rnd(p, &self.im - &b.im);
        let certified = self.certified && b.certified;
        let rad = if certified {
            up::add(up::add(self.rad, b.rad), up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified }
    }
}

impl<'a> Mul<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn mul(self, b: &CertifiedComplex) -> CertifiedComplex {
        let p = self.prec().max(b.prec());
        let certified = self.certified && b.certified;
        let ((re, er), (im, ei)) = if self.im.is_zero() && b.im.is_zero() {
            (rnd(p, &self.re * &b.re), (Float::with_val(p, 0), 0.0))
        } else {
            (
                rnd(p, self.re.mul_sub_mul_ref(&b.re, &self.im, &b.im)),
                rnd(p, self.re.mul_add_mul_ref(&b.im, &self.im, &b.re)),
            )
        };
        let rad = if certified {
            let am = self.center_abs_up();
            let bm = b.center_abs_up();
            let prop = up::add(
                up::add(up::mul(am, b.rad), up::mul(bm, self.rad)),
                up::mul(self.rad, b.rad),
            );
            up::add(prop, up::add(er, ei))
        } else {
            0.0
        };
        CertifiedComplex { re, im, rad, certified }
    }
}

impl<'a> Neg for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn neg(self) -> CertifiedComplex {
        CertifiedComplex {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
            rad: self.rad,
            certified: self.certified,
        }
    }
}

impl Neg for CertifiedComplex {
    type Output = CertifiedComplex;
    fn neg(self) -> CertifiedComplex {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<CertifiedComplex> for CertifiedComplex {
            type Output = CertifiedComplex;
            fn $m(self, b: CertifiedComplex) -> CertifiedComplex {
                (&self).$m(&b)
            }
        }
        impl<'a> $tr<&'a CertifiedComplex> for CertifiedComplex {
            type Output = CertifiedComplex;
            fn $m(self, b: &CertifiedComplex) -> CertifiedComplex {
                (&self).$m(b)
            }
        }
        impl<'a> $tr<CertifiedComplex> for &'a CertifiedComplex {
            type Output = CertifiedComplex;
            fn $m(self, b: CertifiedComplex) -> CertifiedComplex {
                self.$m(&b)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

/// Sum of a sequence of discs (zero for an empty sequence).
pub fn sum<'a, I: IntoIterator<Item = &'a CertifiedComplex>>(ctx: &Ctx, it: I) -> CertifiedComplex {
    let mut acc = ctx.zero();
    for z in it {
        acc = &acc + z;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_exact_integers() {
        let c = Ctx::new(30).unwrap();
        let z = &c.real_f64(1.0) * &c.real_f64(2.0);
        assert_eq!(z.re_f64(), 2.0);
        assert!(z.radius() <= 2f64.powi(2 - c.bits() as i32));
    }

    #[test]
    fn additive_identity() {
        let c = Ctx::new(30).unwrap();
        let z = c.complex_f64(0.25, -3.5);
        let s = &c.zero() + &z;
        assert_eq!(s.re_f64(), 0.25);
        assert_eq!(s.im_f64(), -3.5);
        assert_eq!(s.radius(), 0.0);
    }

    #[test]
    fn divisor_with_zero_rejected() {
        let c = Ctx::new(30).unwrap();
        let a = c.real_with_radius(1.0, 0.1);
        let b = c.real_with_radius(1.0, 0.6);
        assert!(a.try_div(&b).is_ok());
        let b = c.real_with_radius(1.0, 1.0);
        assert_eq!(a.try_div(&b).unwrap_err(), Error::DivisorContainsZero);
    }

    #[test]
    fn log_exp_abs() {
        let c = Ctx::new(40).unwrap();
        let l = c.one().ln().unwrap();
        assert!(l.contains_zero());
        let ipi = c.pi().mul_i();
        let e = ipi.exp();
        assert!(e.overlaps(&c.real_f64(-1.0)));
        let a = c.complex_f64(3.0, 4.0).abs();
        assert!(a.overlaps(&c.real_f64(5.0)));
        assert!(c.real_f64(-2.0).ln().is_err());
        let pc = c.real_f64(-2.0).ln_branch(LogBranch::PositiveCut).unwrap();
        assert!(pc.imag_part().overlaps(&c.pi()));
    }

    #[test]
    fn abs_interval_examples() {
        let c = Ctx::new(30).unwrap();
        let (lo, hi) = c.real_with_radius(0.0, 0.5).disc_abs_interval();
        assert_eq!(lo, 0.0);
        assert!(hi >= 0.5 && hi < 0.5 + 1e-12);
        let (lo, hi) = c.real_with_radius(3.0, 1.0).disc_abs_interval();
        assert!(lo <= 2.0 && lo > 2.0 - 1e-12);
        assert!(hi >= 4.0 && hi < 4.0 + 1e-12);
        let (lo, hi) = c.i().disc_abs_interval();
        assert!(lo <= 1.0 && hi >= 1.0 && hi - lo < 1e-12);
    }

    #[test]
    fn sqrt_and_trig() {
        let c = Ctx::new(40).unwrap();
        let s = c.real_f64(-4.0).sqrt();
        assert!(s.is_err());
        let s = c.complex_f64(-4.0, 1e-30).sqrt().unwrap();
        assert!(s.overlaps(&c.complex_f64(0.0, 2.0).inflate(1e-29)));
        let x = c.complex_f64(0.3, 0.7);
        let one = &x.sin().square() + &x.cos().square();
        assert!(one.overlaps(&c.one()));
        let a = c.real_f64(0.5).acos().unwrap();
        assert!(a.overlaps(&c.pi().div_int(3)));
        let t = c.one().atan().unwrap();
        assert!(t.overlaps(&c.pi().div_int(4)));
    }
}
