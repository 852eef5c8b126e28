//! Taylor coefficients in t of the potential parameters, and derived series.

use std::sync::Arc;

use serde::Serialize;

use crate::cdisc::{CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::omega::{graph_step, matrix_entry, Endpoint, OmegaEngine, Phi};
use crate::mzv_symbolic::{omega_closed_form, q, ConstExpr};
use crate::wiener::LaurentPoly;

type CC = CertifiedComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    General,
    Minimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    T,
    S,
}

/// Truncated power series `Σ c_k v^k`.
#[derive(Clone, Debug)]
pub struct ScalarSeries {
    pub var: Var,
    pub c: Vec<CC>,
}

impl ScalarSeries {
    pub fn new(var: Var, c: Vec<CC>) -> Self {
        ScalarSeries { var, c }
    }
    pub fn zeros(ctx: &Ctx, var: Var, order: usize) -> Self {
        ScalarSeries { var, c: vec![ctx.zero(); order + 1] }
    }
    /// Highest stored power.
    pub fn order(&self) -> usize {
        self.c.len().saturating_sub(1)
    }
    pub fn coeff(&self, k: usize) -> Option<&CC> {
        self.c.get(k)
    }

    fn zip(&self, o: &Self, f: impl Fn(&CC, &CC) -> CC) -> Self {
        let n = self.c.len().min(o.c.len());
        ScalarSeries { var: self.var, c: (0..n).map(|k| f(&self.c[k], &o.c[k])).collect() }
    }
    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
    pub fn scale(&self, s: &CC) -> Self {
        ScalarSeries { var: self.var, c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        let c = (0..n)
            .map(|k| {
                let mut acc = self.c[0].zero_like();
                for j in 0..=k {
                    acc = &acc + &(&self.c[j] * &o.c[k - j]);
                }
                acc
            })
            .collect();
        ScalarSeries { var: self.var, c }
    }

    /// `1/f` for `f₀ ≠ 0`.
    pub fn recip(&self) -> Result<Self> {
        let n = self.c.len();
        let inv0 = self.c[0].recip()?;
        let mut r: Vec<CC> = vec![inv0.clone()];
        for k in 1..n {
            let mut acc = self.c[0].zero_like();
            for j in 1..=k {
                acc = &acc + &(&self.c[j] * &r[k - j]);
            }
            r.push(-&(&acc * &inv0));
        }
        Ok(ScalarSeries { var: self.var, c: r })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    /// `exp(f)` through `e' = f' e`.
    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e: Vec<CC> = vec![self.c[0].exp()];
        for k in 1..n {
            let mut acc = self.c[0].zero_like();
            for j in 1..=k {
                acc = &acc + &(&self.c[j] * &e[k - j]).mul_int(j as i64);
            }
            e.push(acc.div_int(k as i64));
        }
        ScalarSeries { var: self.var, c: e }
    }

    /// `f^p` for `f₀ ≠ 0`, principal branch at the constant term.
    pub fn pow(&self, p: &CC) -> Result<Self> {
        let n = self.c.len();
        let f0 = &self.c[0];
        let inv0 = f0.recip()?;
        let mut g: Vec<CC> = vec![f0.pow_real(p)?];
        for k in 1..n {
            let mut acc = f0.zero_like();
            for j in 1..=k {
                let w = &p.mul_int(j as i64) - &f0.one_like().mul_int((k - j) as i64);
                acc = &acc + &(&(&self.c[j] * &g[k - j]) * &w);
            }
            g.push(&acc.div_int(k as i64) * &inv0);
        }
        Ok(ScalarSeries { var: self.var, c: g })
    }

    /// `(sin f, cos f)` for real `f`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let ep = self.scale(&self.c[0].one_like().mul_i()).exp();
        let em = self.scale(&-&self.c[0].one_like().mul_i()).exp();
        let sin = ep.sub(&em).scale(&self.c[0].one_like().mul_i().div_int(-2));
        let cos = ep.add(&em).scale(&self.c[0].one_like().div_int(2));
        (sin, cos)
    }

    /// `self(inner)` for `inner₀ = 0`; result carries `inner`'s variable.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.c[0].contains_zero() {
            return Err(Error::DomainError("inner series must vanish at 0".into()));
        }
        let n = self.c.len().min(inner.c.len());
        let mut inner = inner.clone();
        inner.c.truncate(n);
        inner.c[0] = inner.c[0].zero_like();
        let mut acc = ScalarSeries { var: inner.var, c: vec![self.c[0].zero_like(); n] };
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.c[0] = &acc.c[0] + &self.c[k];
        }
        Ok(acc)
    }

    /// Compositional inverse of `f = f₁v + f₂v² + …`, order by order.
    pub fn revert(&self, var: Var) -> Result<Self> {
        let n = self.c.len();
        let f1inv = self.c[1].recip()?;
        let zero = self.c[0].zero_like();
        let mut b = ScalarSeries { var, c: vec![zero.clone(); n] };
        if n > 1 {
            b.c[1] = f1inv.clone();
        }
        for k in 2..n {
            let mut f = self.clone();
            f.c[0] = zero.clone();
            let mut part = b.clone();
            part.c.truncate(k + 1);
            f.c.truncate(k + 1);
            let comp = f.compose(&part)?;
            b.c[k] = -&(&comp.c[k] * &f1inv);
        }
        Ok(b)
    }
}

/// Re-express a series in t through `s = t·√𝒦(t)`.
pub fn reparametrize(series_in_t: &ScalarSeries, k: &ScalarSeries) -> Result<ScalarSeries> {
    let n = series_in_t.c.len().min(k.c.len());
    let one = k.c[0].one_like();
    if !k.c[0].overlaps(&one) {
        return Err(Error::DomainError("K₀ must be 1".into()));
    }
    let mut kk = k.clone();
    kk.c.truncate(n);
    let sq = kk.pow(&one.div_int(2))?;
    let mut psi = ScalarSeries { var: Var::T, c: vec![one.zero_like(); n] };
    for j in 1..n {
        psi.c[j] = sq.c[j - 1].clone();
    }
    let tinv = psi.revert(Var::S)?;
    let mut f = series_in_t.clone();
    f.c.truncate(n);
    f.compose(&tinv)
}

/// Parameters `x_{j,n}`, `θ_n`, `𝒦_n` filled order by order.
#[derive(Clone)]
pub struct ParamSeries {
    ctx: Ctx,
    phi: Phi,
    mode: Mode,
    x: [Vec<LaurentPoly>; 3],
    theta: Vec<CC>,
    k: Vec<CC>,
    p_lower: Vec<LaurentPoly>,
    q_lower: Vec<LaurentPoly>,
    engine: Arc<OmegaEngine>,
}

impl ParamSeries {
    /// Central values at t = 0.
    pub fn new(ctx: &Ctx, phi: &Phi, mode: Mode) -> Result<Self> {
        if mode == Mode::Minimal && !phi.is_quarter() {
            return Err(Error::DomainError("minimal mode needs φ = π/4".into()));
        }
        let half = ctx.ratio(1, 2);
        let (s, c) = (phi.sin(), phi.cos());
        let x1 = LaurentPoly::from_terms(ctx, [(-1, half.mul_i()), (1, -&half.mul_i())]);
        let x2 = LaurentPoly::from_terms(ctx, [(-1, -&(&s * &half)), (1, -&(&s * &half))]);
        let x3 = LaurentPoly::from_terms(ctx, [(-1, -&(&c * &half)), (1, -&(&c * &half))]);
        let zero = LaurentPoly::zero(ctx);
        Ok(ParamSeries {
            ctx: *ctx,
            phi: phi.clone(),
            mode,
            x: [vec![x1], vec![x2], vec![x3]],
            theta: vec![ctx.pi().div_int(2)],
            k: vec![ctx.one()],
            p_lower: vec![zero.clone()],
            q_lower: vec![zero],
            engine: OmegaEngine::shared(ctx, phi),
        })
    }

    /// New state filled to order `n`.
    pub fn compute(ctx: &Ctx, phi: &Phi, mode: Mode, n: usize) -> Result<Self> {
        let mut s = Self::new(ctx, phi, mode)?;
        s.fill(n)?;
        Ok(s)
    }

    pub fn fill(&mut self, n: usize) -> Result<()> {
        while self.order() < n {
            self.step(self.order() + 1)?;
        }
        Ok(())
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn phi(&self) -> &Phi {
        &self.phi
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn order(&self) -> usize {
        self.theta.len() - 1
    }
    /// `x_{j,n}` for `j ∈ {1,2,3}`.
    pub fn x(&self, j: usize, n: usize) -> &LaurentPoly {
        &self.x[j - 1][n]
    }
    pub fn theta(&self, n: usize) -> &CC {
        &self.theta[n]
    }
    pub fn k(&self, n: usize) -> &CC {
        &self.k[n]
    }
    pub fn theta_series(&self) -> ScalarSeries {
        ScalarSeries::new(Var::T, self.theta.clone())
    }
    pub fn k_series(&self) -> ScalarSeries {
        ScalarSeries::new(Var::T, self.k.clone())
    }

    /// Coefficient of t^n in the part of 𝔭̂ (endpoint 1) or 𝔮̂ (endpoint i)
    /// that only involves orders below n.
    pub fn phat_lower(&self, n: usize, endpoint: Endpoint) -> Result<LaurentPoly> {
        if n == 0 || self.order() + 1 < n {
            return Err(Error::MissingLowerOrder(n));
        }
        let mut acc = LaurentPoly::zero(&self.ctx);
        let mut word = Vec::with_capacity(n + 1);
        for k in 1..=n {
            let m = n - k;
            let mut unit = vec![LaurentPoly::zero(&self.ctx); m + 1];
            unit[0] = LaurentPoly::constant(&self.ctx, self.ctx.one());
            self.dfs(3, &mut word, &unit, k + 1, m, endpoint, &mut acc)?;
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        v: u8,
        word: &mut Vec<u8>,
        prefix: &[LaurentPoly],
        len: usize,
        m: usize,
        endpoint: Endpoint,
        acc: &mut LaurentPoly,
    ) -> Result<()> {
        let (target, col) = match endpoint {
            Endpoint::One => (1u8, 1usize),
            Endpoint::I => (2u8, 2usize),
        };
        let rest = len - word.len();
        if rest == 0 {
            if v != target || prefix[m].is_zero() {
                return Ok(());
            }
            let e = matrix_entry(word, 3, col);
            let om = self.engine.eval(word, endpoint)?;
            let coef = om.mul_int(e).scale_pow2(len as i32).mul_i_pow(len as i64);
            acc.add_scaled(&prefix[m], &coef);
            return Ok(());
        }
        if rest == 1 && v == target {
            return Ok(());
        }
        for l in 1..=3u8 {
            if let Some(v2) = graph_step(v, l) {
                let xs = &self.x[(l - 1) as usize];
                let next: Vec<LaurentPoly> = (0..=m)
                    .map(|i| {
                        let mut s = LaurentPoly::zero(&self.ctx);
                        for a in 0..=i {
                            if !prefix[a].is_zero() && !xs[i - a].is_zero() {
                                s.add_assign(&(&prefix[a] * &xs[i - a]));
                            }
                        }
                        s
                    })
                    .collect();
                word.push(l);
                self.dfs(v2, word, &next, len, m, endpoint, acc)?;
                word.pop();
            }
        }
        Ok(())
    }

    /// Evaluate `Σ_m F_m t^m` at λ = e^{iθ(t)} with θ truncated to order n − 1.
    fn eval_on_theta(&self, f: &[(usize, &LaurentPoly)], n: usize) -> CC {
        let ctx = &self.ctx;
        let mut delta = ScalarSeries::zeros(ctx, Var::T, n);
        for k in 1..n.min(self.theta.len()) {
            delta.c[k] = self.theta[k].clone();
        }
        let ep = delta.scale(&ctx.i()).exp();
        let em = delta.scale(&-&ctx.i()).exp();
        let mut acc = ctx.zero();
        for (shift, p) in f {
            if *shift > n {
                continue;
            }
            let need = n - shift;
            for (j, c) in p.terms() {
                let base = if j >= 0 { &ep } else { &em };
                let mut pw = ScalarSeries::zeros(ctx, Var::T, need);
                pw.c[0] = ctx.one();
                let mut b = base.clone();
                b.c.truncate(need + 1);
                for _ in 0..j.unsigned_abs() {
                    pw = pw.mul(&b);
                }
                acc = &acc + &(&c.mul_i_pow(j as i64) * &pw.c[need]);
            }
        }
        acc
    }

    fn h_lower(&self, n: usize, j: usize, plus: &LaurentPoly, lower: &[LaurentPoly], trig: &CC) -> CC {
        let ctx = &self.ctx;
        let two_pi = ctx.pi().mul_int(2);
        let mut delta = ScalarSeries::zeros(ctx, Var::T, n);
        for k in 1..n {
            delta.c[k] = self.theta[k].clone();
        }
        let (sin_d, _) = delta.sin_cos();
        let mut acc = &(&two_pi * trig) * &sin_d.c[n];
        let mut terms: Vec<(usize, LaurentPoly)> = Vec::new();
        for k in 1..n {
            terms.push((k, self.x[j - 1][k].scale(&two_pi)));
            terms.push((k, lower[k].clone()));
        }
        let refs: Vec<(usize, &LaurentPoly)> = terms.iter().map(|(k, p)| (*k, p)).collect();
        acc = &acc + &self.eval_on_theta(&refs, n);
        acc = &acc + &lower[n].eval_i();
        &acc + &(&two_pi * &plus.eval_i())
    }

    /// Order-n update from the lower orders.
    pub fn step(&mut self, n: usize) -> Result<()> {
        if self.order() + 1 != n {
            return Err(Error::MissingLowerOrder(n));
        }
        let ctx = self.ctx;
        let two_pi = ctx.pi().mul_int(2);
        let inv_two_pi = two_pi.recip()?;
        let (s, c) = (self.phi.sin(), self.phi.cos());
        let p = self.phat_lower(n, Endpoint::One)?;
        let x3p = p.sub_star_plus().scale(&-&inv_two_pi);
        self.p_lower.push(p);
        let even = n % 2 == 0;

        let (x2p, h1, h2) = match self.mode {
            Mode::General => {
                let q = self.phat_lower(n, Endpoint::I)?;
                let x2p = q.sub_star_plus().scale(&-&inv_two_pi);
                self.q_lower.push(q);
                let h1 = self.h_lower(n, 3, &x3p, &self.p_lower, &c);
                let h2 = self.h_lower(n, 2, &x2p, &self.q_lower, &s);
                (x2p, h1, h2)
            }
            Mode::Minimal => {
                self.q_lower.push(LaurentPoly::zero(&ctx));
                let x2p = if even { x3p.clone() } else { -&x3p };
                let h1 = &(&two_pi * &x3p.eval_i()) + &self.p_lower[n].eval_i();
                (x2p, h1, ctx.zero())
            }
        };

        // λ𝒦_lower,n and its division by (λ² − 1)
        let mut kl = &(&(self.x[1][0].mul_int(2)) * &x2p) + &(&(self.x[2][0].mul_int(2)) * &x3p);
        for j in 0..3 {
            for k in 1..n {
                kl.add_assign(&(&self.x[j][k] * &self.x[j][n - k]));
            }
        }
        let kl = restrict(kl.shift(1), |k| k >= 0, "λ𝒦_lower")?;
        let (qn, rn) = kl.divide_by_roots(&[ctx.one(), -&ctx.one()])?;
        let r0 = rn.coeff(0);
        let kn = rn.coeff(1);

        let theta_n = match self.mode {
            Mode::General => {
                let t = &(&(&(&s * &h2) + &(&c * &h1)) * &-&inv_two_pi) - &r0.div_int(2);
                real_checked(t, "θ_n")?
            }
            Mode::Minimal => ctx.zero(),
        };
        let theta_n = if even { zero_checked(theta_n, "θ_n at even order")? } else { theta_n };
        let x30 = &(&h1 + &(&(&two_pi * &c) * &theta_n)) * &-&inv_two_pi;
        let x20 = match self.mode {
            Mode::General => &(&h2 + &(&(&two_pi * &s) * &theta_n)) * &-&inv_two_pi,
            Mode::Minimal => {
                if even {
                    x30.clone()
                } else {
                    -&x30
                }
            }
        };
        let x1 = if self.mode == Mode::Minimal && !even {
            LaurentPoly::zero(&ctx)
        } else {
            &LaurentPoly::constant(&ctx, r0.mul_i().div_int(2)) - &qn.scale(&ctx.i())
        };
        let mut x3 = x3p;
        x3.add_term(0, &x30);
        let mut x2 = x2p;
        x2.add_term(0, &x20);
        let x1 = clean(x1, n, "x₁")?;
        let x2 = clean(x2, n, "x₂")?;
        let x3 = clean(x3, n, "x₃")?;
        self.x[0].push(x1);
        self.x[1].push(x2);
        self.x[2].push(x3);
        self.theta.push(theta_n);
        self.k.push(real_checked(kn, "𝒦_n")?);
        Ok(())
    }

    /// `x_j⁰(t)` as a series.
    pub fn x0_series(&self, j: usize) -> ScalarSeries {
        ScalarSeries::new(Var::T, self.x[j - 1].iter().map(|p| p.coeff(0)).collect())
    }

    /// `𝒦^{-1/2}(cos φ · x₂⁰ − sin φ · x₃⁰)` in t; the Willmore energy is 8π(1 − this).
    fn willmore_defect_t(&self) -> Result<ScalarSeries> {
        let w = self.x0_series(2).scale(&self.phi.cos()).sub(&self.x0_series(3).scale(&self.phi.sin()));
        let kinv = self.k_series().pow(&self.ctx.ratio(-1, 2))?;
        Ok(w.mul(&kinv))
    }

    /// α_k with Area = 8π(1 − Σ α_k s^k), for k ≤ min(N, order).
    pub fn area_coefficients(&self, n: usize) -> Result<ScalarSeries> {
        if n > self.order() {
            return Err(Error::MissingLowerOrder(n));
        }
        let mut f = reparametrize(&self.willmore_defect_t()?, &self.k_series())?;
        f.c.truncate(n + 1);
        Ok(f)
    }

    /// (𝒲_k, H_k) as series in s, with 𝒲 = 8π(1 − Σ 𝒲_k s^k) and H = cot θ = Σ H_k s^k.
    pub fn willmore_mean_curvature_coefficients(&self, n: usize) -> Result<(ScalarSeries, ScalarSeries)> {
        let w = self.area_coefficients(n)?;
        let mut delta = self.theta_series();
        delta.c[0] = self.ctx.zero();
        let (sn, cs) = delta.sin_cos();
        let h_t = sn.div(&cs)?.scale(&-&self.ctx.one());
        let mut h = reparametrize(&h_t, &self.k_series())?;
        h.c.truncate(n + 1);
        Ok((w, h))
    }

    pub fn report(&self, n: usize, digits: usize) -> Result<SeriesReport> {
        let (w, h) = self.willmore_mean_curvature_coefficients(n)?;
        let vals = |v: &[CC]| v.iter().map(|c| Value::of(c, digits)).collect::<Vec<_>>();
        Ok(SeriesReport {
            phi: self.phi.label().to_string(),
            mode: self.mode,
            n,
            alpha: vals(&w.c),
            w: vals(&w.c),
            h: vals(&h.c),
            k: vals(&self.k[..=n]),
            theta: vals(&self.theta[..=n]),
            x: (0..3)
                .map(|j| {
                    self.x[j][..=n]
                        .iter()
                        .map(|p| {
                            p.records(digits)
                                .into_iter()
                                .map(|(deg, re, im, r)| Term { deg, re, im, radius: fmt_radius(r) })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        })
    }
}

/// Disc value for serialization.
#[derive(Clone, Debug, Serialize)]
pub struct Value {
    pub re: String,
    pub im: String,
    pub radius: String,
}

impl Value {
    pub fn of(c: &CC, digits: usize) -> Self {
        let (re, im) = c.to_decimal(digits);
        Value { re, im, radius: fmt_radius(c.radius()) }
    }
}

pub fn fmt_radius(r: f64) -> String {
    format!("{:.2e}", r)
}

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub deg: i32,
    pub re: String,
    pub im: String,
    pub radius: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub phi: String,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: Vec<Value>,
    #[serde(rename = "W")]
    pub w: Vec<Value>,
    #[serde(rename = "H")]
    pub h: Vec<Value>,
    #[serde(rename = "K")]
    pub k: Vec<Value>,
    pub theta: Vec<Value>,
    pub x: Vec<Vec<Vec<Term>>>,
}

trait StarPlus {
    fn sub_star_plus(&self) -> LaurentPoly;
}

impl StarPlus for LaurentPoly {
    /// `(u − u*)⁺` with `u*(λ) = conj(u(1/conj λ))`.
    fn sub_star_plus(&self) -> LaurentPoly {
        let st = self.star().map(|_, c| c.conj());
        (self - &st).plus()
    }
}

fn real_checked(v: CC, what: &str) -> Result<CC> {
    if !v.imag_part().contains_zero() {
        return Err(Error::PrecisionLoss(format!("{what} has a non-real part {:e}", v.im_f64())));
    }
    Ok(v.real_part())
}

fn zero_checked(v: CC, what: &str) -> Result<CC> {
    if !v.contains_zero() {
        return Err(Error::PrecisionLoss(format!("{what} should vanish, got {:e}", v.mag())));
    }
    Ok(v.zero_like())
}

/// Drop coefficients outside degrees `0..=n+1` or of the wrong parity.
fn clean(p: LaurentPoly, n: usize, what: &str) -> Result<LaurentPoly> {
    let hi = n as i32 + 1;
    restrict(p, |k| (0..=hi).contains(&k) && (k - hi).rem_euclid(2) == 0, what)
}

/// Zero the coefficients rejected by `keep`, after checking that each of them
/// is compatible with zero.
fn restrict(p: LaurentPoly, keep: impl Fn(i32) -> bool, what: &str) -> Result<LaurentPoly> {
    for (k, c) in p.terms() {
        if !keep(k) && !c.contains_zero() {
            return Err(Error::PrecisionLoss(format!("{what} has a spurious coefficient at λ^{k}")));
        }
    }
    let ctx = *p.ctx();
    Ok(p.map(|k, c| if keep(k) { c.clone() } else { ctx.zero() }))
}

/// Exact Laurent polynomial: degree ↦ coefficient.
pub type ExactPoly = std::collections::BTreeMap<i32, ConstExpr>;

/// Exact minimal-case coefficients for orders ≤ 3.
#[derive(Clone, Debug)]
pub struct ExactMinimal {
    /// `x[j-1][n]`.
    pub x: [Vec<ExactPoly>; 3],
    pub k: Vec<ConstExpr>,
    /// α_n for n ≤ order.
    pub alpha: Vec<ConstExpr>,
}

fn ep_add(a: &ExactPoly, b: &ExactPoly) -> ExactPoly {
    let mut r = a.clone();
    for (k, c) in b {
        let v = r.get(k).map(|x| x + c).unwrap_or_else(|| c.clone());
        if v.is_zero() {
            r.remove(k);
        } else {
            r.insert(*k, v);
        }
    }
    r
}

fn ep_mul(a: &ExactPoly, b: &ExactPoly) -> ExactPoly {
    let mut r = ExactPoly::new();
    for (i, x) in a {
        for (j, y) in b {
            r = ep_add(&r, &ExactPoly::from([(i + j, x * y)]));
        }
    }
    r
}

fn ep_scale(a: &ExactPoly, c: &ConstExpr) -> ExactPoly {
    a.iter().map(|(k, x)| (*k, x * c)).filter(|(_, x)| !x.is_zero()).collect()
}

fn ep_eval_i(a: &ExactPoly) -> ConstExpr {
    let i = ConstExpr::i();
    let mut acc = ConstExpr::zero();
    for (k, c) in a {
        acc = &acc + &(c * &i.powi(k.rem_euclid(4) as u32));
    }
    acc
}

/// Exact counterpart of the order-n minimal-case step, for n ≤ 3.
pub fn minimal_exact(order: usize) -> Result<ExactMinimal> {
    if order > 3 {
        return Err(Error::DomainError("exact mode is limited to order 3".into()));
    }
    let half_i = ConstExpr::i().scale(&q(1, 2));
    let r2q = ConstExpr::sqrt2().scale(&q(-1, 4));
    let x1 = ExactPoly::from([(-1, half_i.clone()), (1, -&half_i)]);
    let x23 = ExactPoly::from([(-1, r2q.clone()), (1, r2q)]);
    let mut x: [Vec<ExactPoly>; 3] = [vec![x1], vec![x23.clone()], vec![x23]];
    let mut kv = vec![ConstExpr::int(1)];
    let inv_two_pi = ConstExpr::int(1).scale(&q(1, 2)).times_pi_pow(-1);
    let two_pi = ConstExpr::pi().scale(&q(2, 1));
    for n in 1..=order {
        let mut p = ExactPoly::new();
        for k in 1..=n {
            let mut unit = vec![ExactPoly::new(); n - k + 1];
            unit[0] = ExactPoly::from([(0, ConstExpr::int(1))]);
            exact_dfs(&x, 3, &mut Vec::new(), &unit, k + 1, n - k, &mut p)?;
        }
        let st: ExactPoly = p.iter().map(|(k, c)| (-k, c.conj())).collect();
        let diff = ep_add(&p, &ep_scale(&st, &ConstExpr::int(-1)));
        let x3p: ExactPoly = ep_scale(&diff, &-&inv_two_pi).into_iter().filter(|(k, _)| *k > 0).collect();
        let h1 = &(&two_pi * &ep_eval_i(&x3p)) + &ep_eval_i(&p);
        let x30 = -&(&h1 * &inv_two_pi);
        let sign = if n % 2 == 0 { ConstExpr::int(1) } else { ConstExpr::int(-1) };
        let x2p = ep_scale(&x3p, &sign);
        let mut kl = ep_add(&ep_mul(&ep_scale(&x[1][0], &ConstExpr::int(2)), &x2p), &ep_mul(&ep_scale(&x[2][0], &ConstExpr::int(2)), &x3p));
        for xs in &x {
            for k in 1..n {
                kl = ep_add(&kl, &ep_mul(&xs[k], &xs[n - k]));
            }
        }
        // λ𝒦_lower divided by (λ² − 1)
        let mut a: ExactPoly = kl.into_iter().map(|(k, c)| (k + 1, c)).collect();
        if a.keys().any(|&k| k < 0) {
            return Err(Error::NegativeDegreeInput);
        }
        let mut qn = ExactPoly::new();
        let top = a.keys().next_back().copied().unwrap_or(0);
        for d in (2..=top).rev() {
            if let Some(c) = a.remove(&d) {
                qn.insert(d - 2, c.clone());
                a = ep_add(&a, &ExactPoly::from([(d - 2, c)]));
            }
        }
        let r0 = a.get(&0).cloned().unwrap_or_default();
        let kn = a.get(&1).cloned().unwrap_or_default();
        let x1n = if n % 2 == 1 {
            ExactPoly::new()
        } else {
            ep_add(&ExactPoly::from([(0, &r0 * &half_i)]), &ep_scale(&qn, &-&ConstExpr::i()))
        };
        let x3 = ep_add(&x3p, &ExactPoly::from([(0, x30)]));
        let x2 = ep_scale(&x3, &sign);
        x[0].push(x1n.into_iter().filter(|(_, c)| !c.is_zero()).collect());
        x[1].push(x2);
        x[2].push(x3);
        kv.push(kn);
    }
    if kv[1..].iter().any(|k| !k.is_zero()) {
        return Err(Error::DomainError("𝒦 is not constant to order 3".into()));
    }
    let half_r2 = ConstExpr::sqrt2().scale(&q(1, 2));
    let zero = ConstExpr::zero();
    let alpha = (0..=order)
        .map(|n| {
            let x20 = x[1][n].get(&0).unwrap_or(&zero);
            let x30 = x[2][n].get(&0).unwrap_or(&zero);
            &half_r2 * &(x20 - x30)
        })
        .collect();
    Ok(ExactMinimal { x, k: kv, alpha })
}

fn exact_dfs(
    x: &[Vec<ExactPoly>; 3],
    v: u8,
    word: &mut Vec<u8>,
    prefix: &[ExactPoly],
    len: usize,
    m: usize,
    acc: &mut ExactPoly,
) -> Result<()> {
    let rest = len - word.len();
    if rest == 0 {
        if v != 1 || prefix[m].is_empty() {
            return Ok(());
        }
        let e = matrix_entry(word, 3, 1);
        let coef = (&ConstExpr::i().scale(&q(2, 1))).powi(len as u32).scale(&q(e, 1)) * omega_closed_form(word)?;
        *acc = ep_add(acc, &ep_scale(&prefix[m], &coef));
        return Ok(());
    }
    if rest == 1 && v == 1 {
        return Ok(());
    }
    for l in 1..=3u8 {
        if let Some(v2) = graph_step(v, l) {
            let xs = &x[(l - 1) as usize];
            let next: Vec<ExactPoly> = (0..=m)
                .map(|i| {
                    let mut s = ExactPoly::new();
                    for a in 0..=i {
                        s = ep_add(&s, &ep_mul(&prefix[a], &xs[i - a]));
                    }
                    s
                })
                .collect();
            word.push(l);
            exact_dfs(x, v2, word, &next, len, m, acc)?;
            word.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mzv_symbolic::mono;

    #[test]
    fn exact_minimal_order3() {
        let e = minimal_exact(3).unwrap();
        assert_eq!(e.alpha[1], mono(1, 1, 0, 1, 0));
        assert_eq!(e.alpha[3], mono(9, 4, 0, 0, 1));
        assert!(e.alpha[2].is_zero());
        assert!(e.x[0][2].is_empty());
        // x_{3,1} = −log2/√2 (λ² + 1)
        let c = &ConstExpr::sqrt2() * &mono(-1, 2, 0, 1, 0);
        assert_eq!(e.x[2][1], ExactPoly::from([(0, c.clone()), (2, c)]));
    }

    #[test]
    fn series_reversion_round_trip() {
        let ctx = Ctx::new(30).unwrap();
        let f = ScalarSeries::new(Var::T, vec![ctx.zero(), ctx.one(), ctx.ratio(1, 3), ctx.ratio(-2, 7), ctx.int(5)]);
        let g = f.revert(Var::S).unwrap();
        let id = f.compose(&g).unwrap();
        assert!(id.c[1].overlaps(&ctx.one()));
        for k in [0, 2, 3, 4] {
            assert!(id.c[k].contains_zero());
        }
    }
}
