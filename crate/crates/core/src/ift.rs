//! Quantitative implicit function theorem at φ = π/4: coefficient tables in the
//! u-parametrization, norm and Lipschitz bounds for the fixed-point map 𝒢, Gronwall
//! remainder constants, the convergence genus and its optimisation.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::area::TailConfig;
use crate::cdisc::{CertifiedComplex, Ctx};
use crate::error::{Error, Result};
use crate::omega::{graph_step, matrix_entry, Endpoint, OmegaEngine, Phi};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::real::Real;
use crate::series::{Mode, ParamSeries};
use crate::wiener::LaurentPoly;

type CC = CertifiedComplex;

/// Multi-index `(α₁, α₂, α₃)` of `u^α`.
pub type Alpha = [u8; 3];
/// `(k, α)` labels the monomial `t^k u^α`.
pub type Key = (u32, Alpha);

const ZERO: Alpha = [0, 0, 0];
pub const DEFAULT_KAPPA: f64 = 0.99999;
/// Relative widening of κ for the certified pass.
pub const KAPPA_SLACK: f64 = 1e-5;
const WORK_DIGITS: u32 = 40;

fn degree(a: &Alpha) -> u32 {
    a.iter().map(|&x| x as u32).sum()
}

/// Polynomial in `t` and `u` with Laurent-polynomial coefficients.
#[derive(Clone)]
pub struct TuPoly {
    ctx: Ctx,
    terms: BTreeMap<Key, LaurentPoly>,
}

impl TuPoly {
    pub fn zero(ctx: &Ctx) -> Self {
        TuPoly { ctx: *ctx, terms: BTreeMap::new() }
    }
    pub fn term(ctx: &Ctx, k: u32, a: Alpha, p: LaurentPoly) -> Self {
        let mut r = TuPoly::zero(ctx);
        r.add_term(k, a, &p);
        r
    }
    pub fn add_term(&mut self, k: u32, a: Alpha, p: &LaurentPoly) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&(k, a)) {
            Some(q) => q.add_assign(p),
            None => {
                self.terms.insert((k, a), p.clone());
            }
        }
    }
    pub fn add_assign(&mut self, o: &TuPoly) {
        for ((k, a), p) in &o.terms {
            self.add_term(*k, *a, p);
        }
    }
    pub fn mul(&self, o: &TuPoly) -> TuPoly {
        let mut r = TuPoly::zero(&self.ctx);
        for ((k1, a1), p1) in &self.terms {
            for ((k2, a2), p2) in &o.terms {
                let a = [a1[0] + a2[0], a1[1] + a2[1], a1[2] + a2[2]];
                r.add_term(k1 + k2, a, &(p1 * p2));
            }
        }
        r
    }
    pub fn scale(&self, c: &CC) -> TuPoly {
        TuPoly { ctx: self.ctx, terms: self.terms.iter().map(|(k, p)| (*k, p.scale(c))).collect() }
    }
    pub fn shift_t(&self, j: u32) -> TuPoly {
        TuPoly { ctx: self.ctx, terms: self.terms.iter().map(|((k, a), p)| ((k + j, *a), p.clone())).collect() }
    }
    pub fn coeff(&self, k: u32, a: Alpha) -> LaurentPoly {
        self.terms.get(&(k, a)).cloned().unwrap_or_else(|| LaurentPoly::zero(&self.ctx))
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Key, &LaurentPoly)> {
        self.terms.iter()
    }
    /// Value at `λ = 1` for the given `t` and `u`.
    pub fn eval_one(&self, t: &CC, u: &[CC; 3]) -> CC {
        let mut acc = self.ctx.zero();
        for ((k, a), p) in &self.terms {
            let mut m = &p.eval_one() * &t.powi(*k);
            for i in 0..3 {
                m = &m * &u[i].powi(a[i] as u32);
            }
            acc = &acc + &m;
        }
        acc
    }

    /// Norm profiles of all coefficients.
    fn profiles(&self) -> Vec<(Key, Profile)> {
        self.terms.iter().map(|(k, p)| (*k, Profile::of(p))).filter(|(_, p)| !p.is_zero()).collect()
    }
}

/// Upper bounds `(|j|, |c_j|)` of a Laurent polynomial; evaluates `Σ |c_j| ρ^{|j|}` for any ρ.
#[derive(Clone, Debug, Default)]
pub struct Profile(Vec<(u32, f64)>);

impl Profile {
    pub fn of(p: &LaurentPoly) -> Self {
        let mut m: BTreeMap<u32, f64> = BTreeMap::new();
        for (k, c) in p.terms() {
            let a = c.disc_abs_interval().1;
            if a > 0.0 {
                let e = m.entry(k.unsigned_abs()).or_insert(0.0);
                *e = crate::cdisc::up::add(*e, a);
            }
        }
        Profile(m.into_iter().collect())
    }
    pub fn scalar(v: &CC) -> Self {
        let a = v.disc_abs_interval().1;
        Profile(if a > 0.0 { vec![(0, a)] } else { vec![] })
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn eval<R: Real>(&self, rho: &R) -> R {
        let mut acc = rho.lit(0.0);
        for (e, c) in &self.0 {
            acc = acc.add(&rho.powi(*e).mul(&rho.lit(*c)));
        }
        acc
    }
}

/// Per-monomial data for the estimates of 𝒢₁, 𝒢₂, 𝒢₃.
#[derive(Clone, Debug)]
enum TermKind {
    /// α ≠ 0: cancellation-aware operator bounds.
    General {
        /// `b + (√2/2π)(λ⁻¹+λ) a⁺_odd`
        g1_plus: Profile,
        a_odd_minus: Profile,
        a_even: Profile,
        a_even_minus: Profile,
        a_odd: Profile,
        b: Profile,
        a_odd_plus: Profile,
    },
    /// α = 0: the three components evaluated exactly.
    Explicit { g1: Profile, g2: Profile, g3: Profile },
}

#[derive(Clone, Debug)]
struct GTerm {
    k: u32,
    alpha: Alpha,
    kind: TermKind,
}

/// Search and verification parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IftParams {
    pub n: usize,
    pub derivs: usize,
    pub quadratic: bool,
    pub t: f64,
    pub r: [f64; 3],
    pub varrho: [f64; 3],
    pub rho: f64,
    pub kappa: f64,
}

impl IftParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if self.n == 0 || self.derivs >= self.n.max(1) && self.derivs > 0 {
            return Err(Error::DomainError(format!("need n ≥ 1 and N < n, got n={}, N={}", self.n, self.derivs)));
        }
        if !pos(self.t) || !self.r.iter().all(|&v| pos(v)) || !self.varrho.iter().all(|&v| pos(v)) {
            return Err(Error::DomainError("T, R and ϱ must be positive".into()));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) || !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::DomainError("need ρ > 1 and 0 < κ < 1".into()));
        }
        Ok(())
    }
}

/// All bounds at one parameter point (upper bounds; genus is an upper bound too).
#[derive(Clone, Debug, Serialize)]
pub struct IftConstants {
    pub c_g: [f64; 3],
    pub c_lip: [f64; 3],
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_k: f64,
    pub t_prime: f64,
    pub genus: f64,
    /// `C_G_i ≤ κ R_i` and `C_Lip_i ≤ κ ϱ_i` for every i.
    pub feasible: bool,
    pub certified: bool,
}

/// Norms at a fixed ρ: per-monomial 𝒢 bounds, x-norm polynomials, the merged remainder
/// polynomial and the constants `C_i^ℛ`.
struct Reduced<R> {
    g: Vec<(Key, [R; 3])>,
    x: [Vec<(Key, R)>; 3],
    remainder: Vec<(Key, R)>,
    cr: [R; 3],
}

struct Estimates<R> {
    c_g: [R; 3],
    c_lip: [R; 3],
    c0: R,
    c1: R,
    c2: R,
    c3: R,
    c_k: R,
}

/// Coefficient tables and norm data for one choice of `(n, N, quadratic)`.
pub struct IftSetup {
    pub n: usize,
    pub derivs: usize,
    pub quadratic: bool,
    ctx: Ctx,
    x: [TuPoly; 3],
    a: TuPoly,
    b: TuPoly,
    terms: Vec<GTerm>,
    x_prof: [Vec<(Key, Profile)>; 3],
    /// Remainder groups: `(Σ_w 2^{n+1}|e₃M_w| |Ω_w(1)|, profiles of Π x_{i_l})`.
    groups: Vec<(f64, Vec<(Key, Profile)>)>,
    k_terms: Vec<(Key, f64)>,
    series: Option<ParamSeries>,
}

impl IftSetup {
    pub fn new(n: usize, derivs: usize, quadratic: bool) -> Result<Self> {
        if n == 0 || (derivs > 0 && derivs >= n) {
            return Err(Error::DomainError(format!("need n ≥ 1 and N < n, got n={n}, N={derivs}")));
        }
        let ctx = Ctx::new(WORK_DIGITS)?;
        let phi = Phi::quarter(&ctx);
        let engine = OmegaEngine::shared(&ctx, &phi);
        let series = if derivs > 0 { Some(ParamSeries::compute(&ctx, &phi, Mode::Minimal, derivs)?) } else { None };
        let x = parametrization(&ctx, derivs, quadratic, series.as_ref())?;
        let a = phat_expansion(&ctx, &engine, &x, n)?;
        let b = x[0].mul(&x[0]);
        let mut b = b;
        b.add_assign(&x[1].mul(&x[1]));
        b.add_assign(&x[2].mul(&x[2]));
        let terms = g_terms(&ctx, &a, &b)?;
        let x_prof = [x[0].profiles(), x[1].profiles(), x[2].profiles()];
        let groups = remainder_groups(&ctx, &engine, &x, n)?;
        let k_terms = b
            .terms()
            .filter(|((k, al), _)| !(*k == 0 && *al == ZERO))
            .map(|(key, p)| (*key, p.eval_one().disc_abs_interval().1))
            .filter(|(_, v)| *v > 0.0)
            .collect();
        Ok(IftSetup { n, derivs, quadratic, ctx, x, a, b, terms, x_prof, groups, k_terms, series })
    }

    /// Shared setup per `(n, N, quadratic)`.
    pub fn shared(n: usize, derivs: usize, quadratic: bool) -> Result<Arc<IftSetup>> {
        use std::sync::{Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<BTreeMap<(usize, usize, bool), Arc<IftSetup>>>> = OnceLock::new();
        let map = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
        if let Some(s) = map.lock().expect("cache lock").get(&(n, derivs, quadratic)) {
            return Ok(s.clone());
        }
        let s = Arc::new(IftSetup::new(n, derivs, quadratic)?);
        map.lock().expect("cache lock").insert((n, derivs, quadratic), s.clone());
        Ok(s)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    /// `x_j(t, u)`.
    pub fn x(&self, j: usize) -> &TuPoly {
        &self.x[j - 1]
    }
    /// Coefficients `a_{k,α}` of the truncated 𝔭̂(t, u).
    pub fn a(&self) -> &TuPoly {
        &self.a
    }
    /// Coefficients `b_{k,α}` of 𝒦(t, u).
    pub fn b(&self) -> &TuPoly {
        &self.b
    }
    pub fn series(&self) -> Option<&ParamSeries> {
        self.series.as_ref()
    }

    /// Evaluates every Laurent-coefficient norm at ρ, leaving polynomials in `(T, R)`.
    fn reduce<R: Real>(&self, rho_v: f64, unit: &R) -> Result<Reduced<R>> {
        self.reduce_with(rho_v, unit, false)
    }

    /// `naive` bounds `b` and the `a⁺_odd` term of 𝒢₁ separately instead of jointly.
    fn reduce_with<R: Real>(&self, rho_v: f64, unit: &R, naive: bool) -> Result<Reduced<R>> {
        let l = |v: f64| unit.lit(v);
        let rho = l(rho_v);
        let two_pi = unit.pi().mul(&l(2.0));
        let sqrt2 = l(2.0).sqrt()?;
        let one = l(1.0);
        let rho2m1 = rho.mul(&rho).sub(&one);
        let rho_inv = one.div(&rho)?;
        let c_d = sqrt2.div(&two_pi)?;

        let mut g = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let v = match &term.kind {
                TermKind::General { g1_plus, a_odd_minus, a_even, a_even_minus, a_odd, b, a_odd_plus } => {
                    let lam = rho_inv.add(&rho);
                    let first = if naive {
                        b.eval(&rho).add(&c_d.mul(&lam).mul(&a_odd_plus.eval(&rho)))
                    } else {
                        g1_plus.eval(&rho)
                    };
                    let g1 = first.add(&c_d.mul(&lam).mul(&a_odd_minus.eval(&rho))).div(&rho2m1)?;
                    let g2 = a_even.eval(&rho).add(&l(2.0).mul(&rho_inv.mul(&rho_inv)).mul(&a_even_minus.eval(&rho))).div(&two_pi)?;
                    let g3 = a_odd.eval(&rho).div(&two_pi.mul(&rho))?;
                    [g1, g2, g3]
                }
                TermKind::Explicit { g1, g2, g3 } => {
                    [g1.eval(&rho), g2.eval(&rho).div(&two_pi)?, g3.eval(&rho).div(&two_pi.mul(&rho))?]
                }
            };
            g.push(((term.k, term.alpha), v));
        }
        let at_rho = |prof: &[(Key, Profile)]| -> Vec<(Key, R)> { prof.iter().map(|(k, pr)| (*k, pr.eval(&rho))).collect() };
        let x = [at_rho(&self.x_prof[0]), at_rho(&self.x_prof[1]), at_rho(&self.x_prof[2])];
        let mut merged: BTreeMap<Key, R> = BTreeMap::new();
        for (wgt, prof) in &self.groups {
            for (key, pr) in prof {
                let v = l(*wgt).mul(&pr.eval(&rho));
                let e = merged.entry(*key).or_insert_with(|| l(0.0));
                *e = e.add(&v);
            }
        }
        let cr = [
            sqrt2.mul(&rho_inv.add(&rho)).div(&two_pi.mul(&rho2m1))?,
            one.add(&l(2.0).mul(&rho_inv.mul(&rho_inv))).div(&two_pi)?,
            one.div(&two_pi.mul(&rho))?,
        ];
        Ok(Reduced { g, x, remainder: merged.into_iter().collect(), cr })
    }

    fn estimates<R: Real>(&self, p: &IftParams, unit: &R) -> Result<Estimates<R>> {
        let red = self.reduce(p.rho, unit)?;
        self.estimates_reduced(&red, p, unit)
    }

    fn estimates_reduced<R: Real>(&self, red: &Reduced<R>, p: &IftParams, unit: &R) -> Result<Estimates<R>> {
        let l = |v: f64| unit.lit(v);
        let t = l(p.t);
        let r = [l(p.r[0]), l(p.r[1]), l(p.r[2])];
        let w = [l(p.varrho[0]), l(p.varrho[1]), l(p.varrho[2])];
        let keys = || {
            red.g
                .iter()
                .map(|(key, _)| key)
                .chain(red.remainder.iter().map(|(key, _)| key))
                .chain(red.x.iter().flatten().map(|(key, _)| key))
                .chain(self.k_terms.iter().map(|(key, _)| key))
        };
        let top = keys().map(|(k, _)| *k).max().unwrap_or(0);
        let deg = keys().flat_map(|(_, a)| a.iter().copied()).max().unwrap_or(0) as u32;
        let powers = |b: &R, m: u32| -> Vec<R> {
            let mut v = vec![l(1.0)];
            for _ in 0..m.max(self.n as u32 + 1) {
                let next = v.last().expect("nonempty").mul(b);
                v.push(next);
            }
            v
        };
        let tp = powers(&t, top);
        let rp = [powers(&r[0], deg), powers(&r[1], deg), powers(&r[2], deg)];
        let mono = |k: u32, a: &Alpha| -> R {
            let mut v = tp[k as usize].clone();
            for i in 0..3 {
                v = v.mul(&rp[i][a[i] as usize]);
            }
            v
        };
        // d(R^α)·ϱ
        let dmono = |k: u32, a: &Alpha| -> R {
            let mut acc = l(0.0);
            for i in 0..3 {
                if a[i] == 0 {
                    continue;
                }
                let mut e = *a;
                e[i] -= 1;
                acc = acc.add(&mono(k, &e).mul(&l(a[i] as f64)).mul(&w[i]));
            }
            acc
        };

        let mut c_g = [l(0.0), l(0.0), l(0.0)];
        let mut c_lip = [l(0.0), l(0.0), l(0.0)];
        for ((k, a), g) in &red.g {
            let (m, dm) = (mono(*k, a), dmono(*k, a));
            for i in 0..3 {
                c_g[i] = c_g[i].add(&g[i].mul(&m));
                c_lip[i] = c_lip[i].add(&g[i].mul(&dm));
            }
        }

        // ‖x_j‖ ≤ c_j and ‖∂x_j/∂u_i‖ ≤ d_{i,j}
        let norm = |poly: &[(Key, R)]| -> R {
            let mut acc = l(0.0);
            for ((k, a), v) in poly {
                acc = acc.add(&v.mul(&mono(*k, a)));
            }
            acc
        };
        let dnorm = |poly: &[(Key, R)], i: usize| -> R {
            let mut acc = l(0.0);
            for ((k, a), v) in poly {
                if a[i] == 0 {
                    continue;
                }
                let mut e = *a;
                e[i] -= 1;
                acc = acc.add(&v.mul(&l(a[i] as f64)).mul(&mono(*k, &e)));
            }
            acc
        };
        let c = [norm(&red.x[0]), norm(&red.x[1]), norm(&red.x[2])];
        let c0 = omega_norm_integral(&c[0], &c[1], &c[2])?;
        let c1 = norm(&red.remainder);
        let mut c2 = l(0.0);
        let mut c3 = l(0.0);
        for i in 0..3 {
            c2 = c2.add(&w[i].mul(&dnorm(&red.remainder, i)));
            let d = [dnorm(&red.x[0], i), dnorm(&red.x[1], i), dnorm(&red.x[2], i)];
            c3 = c3.add(&w[i].mul(&omega_norm_integral(&d[0], &d[1], &d[2])?));
        }

        let n = self.n;
        let e1 = c0.mul(&t).exp();
        let rem = e1.mul(&c1).mul(&tp[n]);
        let rem_lip = e1.mul(&c2).mul(&tp[n]).add(&e1.mul(&e1).mul(&c1).mul(&c3).mul(&tp[n + 1]));
        for i in 0..3 {
            c_g[i] = c_g[i].add(&red.cr[i].mul(&rem));
            c_lip[i] = c_lip[i].add(&red.cr[i].mul(&rem_lip));
        }

        let mut c_k = l(0.0);
        for ((k, a), v) in &self.k_terms {
            c_k = c_k.add(&l(*v).mul(&mono(*k, a)));
        }
        Ok(Estimates { c_g, c_lip, c0, c1, c2, c3, c_k })
    }

    /// Bounds on `‖𝒢_i‖_ρ` over `|t| ≤ T`, `u ∈ B_R`.
    pub fn estimate_g(&self, p: &IftParams) -> Result<[f64; 3]> {
        let e = self.estimates(p, &self.unit())?;
        Ok(e.c_g.map(|v| v.hi()))
    }

    /// Bounds on `Lip(𝒢_i)` for the weighted norm.
    pub fn estimate_lip(&self, p: &IftParams) -> Result<[f64; 3]> {
        let e = self.estimates(p, &self.unit())?;
        Ok(e.c_lip.map(|v| v.hi()))
    }

    /// `(C₀, C₁, C₂, C₃)`.
    pub fn gronwall_constants(&self, p: &IftParams) -> Result<[f64; 4]> {
        let e = self.estimates(p, &self.unit())?;
        Ok([e.c0.hi(), e.c1.hi(), e.c2.hi(), e.c3.hi()])
    }

    /// [`Self::estimate_g`] without combining `b` with the odd part of `a` before taking norms.
    pub fn estimate_g_naive(&self, p: &IftParams) -> Result<[f64; 3]> {
        let unit = self.unit();
        let red = self.reduce_with(p.rho, &unit, true)?;
        Ok(self.estimates_reduced(&red, p, &unit)?.c_g.map(|v| v.hi()))
    }

    /// Upper bounds `c_j` on `‖x_j(t, u)‖_ρ` over `|t| ≤ T`, `u ∈ B_R`.
    pub fn x_norms(&self, p: &IftParams) -> Result<[f64; 3]> {
        let unit = self.unit();
        let red = self.reduce(p.rho, &unit)?;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = unit.lit(0.0);
            for ((k, a), v) in &red.x[j] {
                let mut m = unit.lit(p.t).powi(*k);
                for i in 0..3 {
                    m = m.mul(&unit.lit(p.r[i]).powi(a[i] as u32));
                }
                acc = acc.add(&v.mul(&m));
            }
            *o = acc.hi();
        }
        Ok(out)
    }

    fn unit(&self) -> CC {
        self.ctx.wider(0).one()
    }

    fn constants_with<R: Real>(&self, p: &IftParams, unit: &R, kappa: f64, certified: bool) -> Result<IftConstants> {
        let e = self.estimates(p, unit)?;
        let c_k = e.c_k.hi();
        if !(c_k < 1.0) {
            return Err(Error::CKTooLarge(c_k));
        }
        let t = unit.lit(p.t);
        let root = unit.lit(1.0).sub(&e.c_k).sqrt()?;
        let tp = t.mul(&root);
        let genus = unit.lit(1.0).div(&unit.lit(2.0).mul(&tp))?.sub(&unit.lit(1.0));
        let c_g = e.c_g.map(|v| v.hi());
        let c_lip = e.c_lip.map(|v| v.hi());
        let feasible = (0..3).all(|i| c_g[i] <= kappa * p.r[i] && c_lip[i] <= kappa * p.varrho[i]);
        Ok(IftConstants {
            c_g,
            c_lip,
            c0: e.c0.hi(),
            c1: e.c1.hi(),
            c2: e.c2.hi(),
            c3: e.c3.hi(),
            c_k,
            t_prime: tp.lo(),
            genus: genus.hi(),
            feasible,
            certified,
        })
    }

    /// Certified constants (disc arithmetic) with the constraint test at κ(1 + 10⁻⁵).
    pub fn genus_bound(&self, p: &IftParams) -> Result<IftConstants> {
        p.validate()?;
        let kappa = (p.kappa * (1.0 + KAPPA_SLACK)).min(1.0 - f64::EPSILON);
        self.constants_with(p, &self.unit(), kappa, true)
    }

    /// Floating-point constants, for searches.
    pub fn genus_bound_fast(&self, p: &IftParams) -> Result<IftConstants> {
        self.constants_with(p, &1.0f64, p.kappa, false)
    }

    fn slack(&self, red: &Reduced<f64>, p: &IftParams) -> Option<f64> {
        let e = self.estimates_reduced(red, p, &1.0f64).ok()?;
        if !(e.c_k < 1.0) {
            return None;
        }
        let mut worst = f64::NEG_INFINITY;
        for i in 0..3 {
            worst = worst.max(e.c_g[i] / (p.kappa * p.r[i]) - 1.0);
            worst = worst.max(e.c_lip[i] / (p.kappa * p.varrho[i]) - 1.0);
        }
        Some(worst)
    }

    /// Largest `T` (by bisection) keeping the constraints at the other parameters.
    fn max_feasible_t(&self, base: &IftParams) -> Option<(f64, f64)> {
        let red = self.reduce(base.rho, &1.0f64).ok()?;
        let at = |t: f64| self.slack(&red, &IftParams { t, ..*base });
        let mut lo = 0.0;
        let mut hi = base.t.max(1e-12);
        if at(hi).is_some_and(|s| s <= 0.0) {
            while at(hi * 2.0).is_some_and(|s| s <= 0.0) && hi < 1e3 {
                hi *= 2.0;
            }
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if at(mid).is_some_and(|s| s <= 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        if !(lo > 0.0) {
            return None;
        }
        let e = self.estimates_reduced(&red, &IftParams { t: lo, ..*base }, &1.0f64).ok()?;
        if !(e.c_k < 1.0) {
            return None;
        }
        Some((lo, 1.0 / (2.0 * lo * (1.0 - e.c_k).sqrt()) - 1.0))
    }

    /// Minimises the genus under the box and contraction constraints, then re-verifies in
    /// disc arithmetic.
    pub fn optimize_genus(&self, opts: &IftOptions) -> Result<(IftParams, IftConstants)> {
        let base = IftParams {
            n: self.n,
            derivs: self.derivs,
            quadratic: self.quadratic,
            t: 1e-3,
            r: [1e-3; 3],
            varrho: [1.0; 3],
            rho: 2.0,
            kappa: opts.kappa,
        };
        // free variables: ln R₁, ln R₂, ln R₃, ln ϱ₂, ln ϱ₃, ln(ρ − 1); T is maximised inside
        let decode = |v: &[f64]| IftParams {
            r: [v[0].exp(), v[1].exp(), v[2].exp()],
            varrho: [1.0, v[3].exp(), v[4].exp()],
            rho: 1.0 + v[5].exp(),
            ..base
        };
        let objective = |v: &[f64]| -> f64 {
            let p = decode(v);
            self.max_feasible_t(&p).map_or(f64::INFINITY, |(_, genus)| genus)
        };
        let run = |start: &[f64; 6]| -> Option<(Vec<f64>, f64)> {
            let mut x = start.to_vec();
            let mut fx = objective(&x);
            let mut step = opts.initial_step;
            for _ in 0..opts.restarts.max(1) {
                let so = SimplexOptions { initial_step: step, max_evals: opts.max_evals, tol: 1e-12 };
                let (y, fy, _) = nelder_mead(objective, &x, &so);
                if fy < fx {
                    x = y;
                    fx = fy;
                }
                step *= 0.5;
            }
            fx.is_finite().then_some((x, fx))
        };
        let jobs = opts.jobs.clamp(1, opts.starts.len().max(1));
        let found: Vec<Option<(Vec<f64>, f64)>> = if jobs == 1 {
            opts.starts.iter().map(run).collect()
        } else {
            let chunk = opts.starts.len().div_ceil(jobs);
            std::thread::scope(|sc| {
                let handles: Vec<_> =
                    opts.starts.chunks(chunk).map(|c| sc.spawn(move || c.iter().map(run).collect::<Vec<_>>())).collect();
                handles.into_iter().flat_map(|h| h.join().expect("optimizer worker")).collect()
            })
        };
        // first best wins, so the result does not depend on the worker count
        let mut best: Option<(Vec<f64>, f64)> = None;
        for (x, fx) in found.into_iter().flatten() {
            if best.as_ref().is_none_or(|(_, b)| fx < *b) {
                best = Some((x, fx));
            }
        }
        let (x, _) = best.ok_or(Error::NoFeasiblePoint)?;
        let p = decode(&x);
        let (t, _) = self.max_feasible_t(&p).ok_or(Error::NoFeasiblePoint)?;
        let p = IftParams { t, ..p };
        let c = self.genus_bound(&p)?;
        if !c.feasible {
            return Err(Error::NoFeasiblePoint);
        }
        Ok((p, c))
    }

    /// `(C_A, T')` for the area tail at feasible parameters.
    pub fn cauchy_config(&self, p: &IftParams, c: &IftConstants) -> Result<TailConfig> {
        let ctx = self.ctx;
        let l = |v: f64| ctx.real_f64(v);
        let (t, ck) = (l(p.t), l(c.c_k));
        let one = ctx.one();
        let mut s = l(p.r[1]);
        if self.quadratic {
            let ln2 = ctx.ln2();
            let sqrt2 = ctx.int(2).sqrt()?;
            s = &s + &(&(&ln2.try_div(&sqrt2)? * &t) * &l(p.r[0]));
            s = &s + &(&(&ln2 * &t) * &l(p.r[2]));
        }
        if let Some(series) = &self.series {
            for k in 1..=self.derivs {
                let x20 = series.x(2, k).coeff(0).disc_abs_interval().1;
                let grow = (&one + &ck).pow_real(&ctx.ratio(k as i64 + 1, 2))?;
                let f = &grow - &one;
                s = &s + &(&l(x20) * &(&t.powi(k as u32) * &f));
            }
        }
        let c_a = &ctx.int(2).sqrt()?.try_div(&(&one - &ck).sqrt()?)? * &s;
        TailConfig::new(c_a.hi(), c.t_prime, self.derivs)
    }
}

/// Tables `(a_{k,α}, b_{k,α})` of 𝔭̂ and 𝒦.
pub fn coefficients_ab(n: usize, derivs: usize, quadratic: bool) -> Result<(TuPoly, TuPoly)> {
    let s = IftSetup::shared(n, derivs, quadratic)?;
    Ok((s.a().clone(), s.b().clone()))
}

/// `∫₀¹ 2 max(c₁|ω₁|, c₂|ω₂|) + 2 c₃|ω₃|` in closed form.
pub fn omega_norm_integral<R: Real>(c1: &R, c2: &R, c3: &R) -> Result<R> {
    let l = |v: f64| c1.lit(v);
    let pi = c1.pi();
    let c3 = c3.max(c2);
    let tail = l(2.0).mul(&pi).mul(&c3);
    if !(c2.hi() > 0.0) {
        return Ok(c1.mul(&pi).add(&tail));
    }
    let sqrt2 = l(2.0).sqrt()?;
    let z0 = c1.mul(c1).add(&l(2.0).mul(&c2.mul(c2))).sqrt()?.sub(c1).div(&sqrt2.mul(c2))?;
    let z2 = z0.mul(&z0);
    let num = z2.add(&sqrt2.mul(&z0)).add(&l(1.0));
    let den = z2.sub(&sqrt2.mul(&z0)).add(&l(1.0));
    let log = num.div(&den)?.ln()?;
    let arc = pi.sub(&l(4.0).mul(&z2.atan()?));
    Ok(l(2.0).mul(c2).mul(&log).add(&c1.mul(&arc)).add(&tail))
}

/// `x₁ = x̄₁ + iλu₁ + Σ x_{1,k}t^k`, `x_{2,3} = x̄ ∓ U + λu₃ + Σ x_{j,k}t^k` with
/// `U = u₂ (+ log2/√2 (λ²+1) t u₁ + log2 (λ²−1) t u₃)`.
fn parametrization(ctx: &Ctx, derivs: usize, quadratic: bool, series: Option<&ParamSeries>) -> Result<[TuPoly; 3]> {
    let half = ctx.ratio(1, 2);
    let s2 = ctx.int(2).sqrt()?;
    let inv = half.try_div(&s2)?;
    let bar1 = LaurentPoly::from_terms(ctx, [(-1, half.mul_i()), (1, -&half.mul_i())]);
    let bar23 = LaurentPoly::from_terms(ctx, [(-1, -&inv), (1, -&inv)]);
    let mono = |c: CC, k: i32| LaurentPoly::monomial(ctx, c, k);
    let mut x1 = TuPoly::term(ctx, 0, ZERO, bar1);
    x1.add_term(0, [1, 0, 0], &mono(ctx.i(), 1));
    let mut u = TuPoly::term(ctx, 0, [0, 1, 0], mono(ctx.one(), 0));
    if quadratic {
        let ln2 = ctx.ln2();
        let q1 = ln2.try_div(&s2)?;
        u.add_term(1, [1, 0, 0], &LaurentPoly::from_terms(ctx, [(0, q1.clone()), (2, q1)]));
        u.add_term(1, [0, 0, 1], &LaurentPoly::from_terms(ctx, [(0, -&ln2), (2, ln2)]));
    }
    let lam_u3 = TuPoly::term(ctx, 0, [0, 0, 1], mono(ctx.one(), 1));
    let mut x2 = TuPoly::term(ctx, 0, ZERO, bar23.clone());
    x2.add_assign(&u.scale(&-&ctx.one()));
    x2.add_assign(&lam_u3);
    let mut x3 = TuPoly::term(ctx, 0, ZERO, bar23);
    x3.add_assign(&u);
    x3.add_assign(&lam_u3);
    let mut x = [x1, x2, x3];
    if derivs > 0 {
        let s = series.ok_or(Error::MissingLowerOrder(derivs))?;
        for k in 1..=derivs {
            for (j, xj) in x.iter_mut().enumerate() {
                xj.add_term(k as u32, ZERO, s.x(j + 1, k));
            }
        }
    }
    Ok(x)
}

/// `Σ_{k<n} t^k Σ_w (2i)^{k+1} (M_w/(2i)^{k+1})_{31} Ω_w(1) Π x_{w_l}(t, u)` over walks from e₃ to e₁.
fn phat_expansion(ctx: &Ctx, engine: &OmegaEngine, x: &[TuPoly; 3], n: usize) -> Result<TuPoly> {
    let mut acc = TuPoly::zero(ctx);
    let one = TuPoly::term(ctx, 0, ZERO, LaurentPoly::constant(ctx, ctx.one()));
    let mut word = Vec::new();
    for k in 0..n {
        walk_products(3, &mut word, &one, k + 1, x, &mut |w, prod, v| {
            if v != 1 {
                return Ok(());
            }
            let e = matrix_entry(w, 3, 1);
            let om = engine.eval(w, Endpoint::One)?;
            let len = w.len();
            let coef = om.mul_int(e).scale_pow2(len as i32).mul_i_pow(len as i64);
            acc.add_assign(&prod.scale(&coef).shift_t(k as u32));
            Ok(())
        })?;
    }
    Ok(acc)
}

/// Depth-first enumeration of walks of length `len` from `v`, with prefix products of the x's.
fn walk_products<F>(v: u8, word: &mut Vec<u8>, prefix: &TuPoly, len: usize, x: &[TuPoly; 3], f: &mut F) -> Result<()>
where
    F: FnMut(&[u8], &TuPoly, u8) -> Result<()>,
{
    if word.len() == len {
        return f(word, prefix, v);
    }
    for l in 1..=3u8 {
        if let Some(v2) = graph_step(v, l) {
            let next = prefix.mul(&x[(l - 1) as usize]);
            word.push(l);
            walk_products(v2, word, &next, len, x, f)?;
            word.pop();
        }
    }
    Ok(())
}

/// Walks of length n+1 from e₃, grouped by letter counts.
fn remainder_groups(ctx: &Ctx, engine: &OmegaEngine, x: &[TuPoly; 3], n: usize) -> Result<Vec<(f64, Vec<(Key, Profile)>)>> {
    let mut weights: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    let mut word = Vec::new();
    let unit = TuPoly::term(ctx, 0, ZERO, LaurentPoly::constant(ctx, ctx.one()));
    let trivial = [TuPoly::zero(ctx), TuPoly::zero(ctx), TuPoly::zero(ctx)];
    let _ = &trivial;
    let mut words: Vec<Vec<u8>> = Vec::new();
    collect_walks(3, &mut word, n + 1, &mut words);
    for w in &words {
        let entry = (1..=3).map(|c| matrix_entry(w, 3, c).unsigned_abs()).max().unwrap_or(0);
        if entry == 0 {
            continue;
        }
        let (_, hi) = engine.abs(w)?;
        let scale = crate::cdisc::up::mul(entry as f64, 2f64.powi(w.len() as i32));
        let mut counts = [0usize; 3];
        for &l in w {
            counts[(l - 1) as usize] += 1;
        }
        let e = weights.entry(counts).or_insert(0.0);
        *e = crate::cdisc::up::add(*e, crate::cdisc::up::mul(scale, hi));
    }
    let mut out = Vec::new();
    for (counts, wgt) in weights {
        let mut p = unit.clone();
        for (j, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                p = p.mul(&x[j]);
            }
        }
        out.push((wgt, p.profiles()));
    }
    Ok(out)
}

fn collect_walks(v: u8, word: &mut Vec<u8>, len: usize, out: &mut Vec<Vec<u8>>) {
    if word.len() == len {
        out.push(word.clone());
        return;
    }
    for l in 1..=3u8 {
        if let Some(v2) = graph_step(v, l) {
            word.push(l);
            collect_walks(v2, word, len, out);
            word.pop();
        }
    }
}

/// All walks of length `len` from e₃, ending anywhere.
pub fn walks_from_e3(len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    collect_walks(3, &mut Vec::new(), len, &mut out);
    out
}

/// `D(f) = (f − f(1))/(λ² − 1)` for even `f` with nonnegative degrees.
pub fn divided_difference(f: &LaurentPoly) -> Result<LaurentPoly> {
    let ctx = *f.ctx();
    let mut coeffs: BTreeMap<i32, CC> = BTreeMap::new();
    for (k, c) in f.terms() {
        if k < 0 || k % 2 != 0 {
            if c.contains_zero() {
                continue;
            }
            return Err(Error::DomainError(format!("D needs an even polynomial, found degree {k}")));
        }
        coeffs.insert(k, c.clone());
    }
    let top = coeffs.keys().next_back().copied().unwrap_or(0);
    let mut out = LaurentPoly::zero(&ctx);
    let mut tail = ctx.zero();
    let mut j = top;
    while j >= 2 {
        if let Some(c) = coeffs.get(&j) {
            tail = &tail + c;
        }
        out.add_term(j - 2, &tail);
        j -= 2;
    }
    Ok(out)
}

fn g_terms(ctx: &Ctx, a: &TuPoly, b: &TuPoly) -> Result<Vec<GTerm>> {
    let two_pi = ctx.pi().mul_int(2);
    let c_d = ctx.int(2).sqrt()?.try_div(&two_pi)?;
    let lam = LaurentPoly::from_terms(ctx, [(-1, ctx.one()), (1, ctx.one())]);
    let mut keys: Vec<Key> = a.terms().map(|(k, _)| *k).collect();
    keys.extend(b.terms().map(|(k, _)| *k));
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    for (k, alpha) in keys {
        if k == 0 && degree(&alpha) == 1 {
            continue;
        }
        let (ak, bk) = (a.coeff(k, alpha), b.coeff(k, alpha));
        let kind = if alpha == ZERO {
            let d = &ak - &ak.star();
            let dp = d.plus();
            let (dpo, dpe) = (dp.odd(), dp.even());
            let g1 = divided_difference(&(&bk + &(&lam * &dpo).scale(&c_d)))?;
            let mut g2 = dpe.clone();
            g2.add_term(0, &(&ak.even().eval_i() - &dpe.eval_i()));
            TermKind::Explicit { g1: Profile::of(&g1), g2: Profile::of(&g2), g3: Profile::of(&dpo) }
        } else {
            let (ao, ae) = (ak.odd(), ak.even());
            let g1p = &bk + &(&lam * &ao.plus()).scale(&c_d);
            TermKind::General {
                g1_plus: Profile::of(&g1p),
                a_odd_minus: Profile::of(&ao.minus()),
                a_even: Profile::of(&ae),
                a_even_minus: Profile::of(&ae.minus()),
                a_odd: Profile::of(&ao),
                b: Profile::of(&bk),
                a_odd_plus: Profile::of(&ao.plus()),
            }
        };
        out.push(GTerm { k, alpha, kind });
    }
    Ok(out)
}

/// Search options for [`IftSetup::optimize_genus`].
#[derive(Clone, Debug)]
pub struct IftOptions {
    pub kappa: f64,
    /// Starting points in the free variables `(ln R₁, ln R₂, ln R₃, ln ϱ₂, ln ϱ₃, ln(ρ−1))`.
    pub starts: Vec<[f64; 6]>,
    pub restarts: usize,
    pub max_evals: usize,
    pub initial_step: f64,
    /// Worker threads for independent starts.
    pub jobs: usize,
}

impl Default for IftOptions {
    fn default() -> Self {
        IftOptions {
            kappa: DEFAULT_KAPPA,
            starts: vec![[-5.0, -5.0, -5.0, 0.0, 0.0, 0.0], [-3.0, -4.0, -4.0, 1.0, 1.0, 1.0]],
            restarts: 4,
            max_evals: 3000,
            initial_step: 0.5,
            jobs: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_has_the_documented_linear_and_quadratic_terms() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let b = s.b();
        let ctx = *s.ctx();
        let near = |p: &LaurentPoly, terms: &[(i32, f64)]| {
            let want = LaurentPoly::from_terms(&ctx, terms.iter().map(|(k, v)| (*k, ctx.real_f64(*v))));
            (p - &want).terms().all(|(_, c)| c.mag() < 1e-30)
        };
        let s2 = 2f64.sqrt();
        assert!(near(&b.coeff(0, ZERO), &[(0, 1.0)]));
        assert!(near(&b.coeff(0, [1, 0, 0]), &[(0, -1.0), (2, 1.0)]));
        assert!(b.coeff(0, [0, 1, 0]).terms().all(|(_, c)| c.contains_zero()));
        let u3 = b.coeff(0, [0, 0, 1]);
        assert!((u3.coeff(0).re_f64() + s2).abs() < 1e-14 && (u3.coeff(2).re_f64() + s2).abs() < 1e-14);
        assert!(near(&b.coeff(0, [2, 0, 0]), &[(2, -1.0)]));
        assert!(near(&b.coeff(0, [0, 2, 0]), &[(0, 2.0)]));
        assert!(near(&b.coeff(0, [0, 0, 2]), &[(2, 2.0)]));
    }

    #[test]
    fn order_zero_potential_is_two_pi_x3() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let ctx = *s.ctx();
        let two_pi = ctx.pi().mul_int(2);
        for (key, p) in s.x(3).terms() {
            let d = &s.a().coeff(key.0, key.1) - &p.scale(&two_pi);
            assert!(d.terms().all(|(_, c)| c.contains_zero()), "{key:?}");
        }
    }

    #[test]
    fn closed_form_c3_entries() {
        let rho = 1.7f64;
        let c31 = omega_norm_integral(&rho, &0.0, &0.0).unwrap();
        assert!((c31 - std::f64::consts::PI * rho).abs() < 1e-12);
        let c32 = omega_norm_integral(&0.0, &1.0, &1.0).unwrap();
        let want = 2.0 * std::f64::consts::PI + 4.0 * (2f64.sqrt() + 1.0).ln();
        assert!((c32 - want).abs() < 1e-12);
    }

    fn base(n: usize, derivs: usize) -> IftParams {
        IftParams { n, derivs, quadratic: false, t: 2e-3, r: [0.1, 0.08, 0.03], varrho: [1.0, 0.4, 0.2], rho: 1.8, kappa: DEFAULT_KAPPA }
    }

    #[test]
    fn vanishing_box_gives_zero_map() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let p = IftParams { t: 0.0, r: [0.0; 3], ..base(1, 0) };
        for v in s.estimate_g(&p).unwrap() {
            assert!(v < 1e-30, "{v}");
        }
    }

    #[test]
    fn x_norms_at_the_origin() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let rho = 1.5f64;
        let p = IftParams { t: 0.0, r: [0.0; 3], rho, ..base(1, 0) };
        let c = s.x_norms(&p).unwrap();
        assert!((c[0] - rho).abs() < 1e-14, "{c:?}");
        assert!((c[1] - rho / 2f64.sqrt()).abs() < 1e-14 && (c[2] - c[1]).abs() < 1e-15);
    }

    #[test]
    fn grouped_bound_never_exceeds_naive() {
        for (n, d) in [(1, 0), (2, 1), (3, 0)] {
            let s = IftSetup::new(n, d, false).unwrap();
            let p = base(n, d);
            let (g, naive) = (s.estimate_g(&p).unwrap(), s.estimate_g_naive(&p).unwrap());
            for i in 0..3 {
                assert!(g[i] <= naive[i] * (1.0 + 1e-12), "{n} {d} {i}: {} > {}", g[i], naive[i]);
            }
        }
    }

    #[test]
    fn lipschitz_bound_is_linear_in_weights() {
        let s = IftSetup::new(2, 0, false).unwrap();
        let p = base(2, 0);
        let q = IftParams { varrho: p.varrho.map(|v| 3.0 * v), ..p };
        let (a, b) = (s.estimate_lip(&p).unwrap(), s.estimate_lip(&q).unwrap());
        for i in 0..3 {
            assert!((b[i] - 3.0 * a[i]).abs() <= 1e-12 * b[i], "{i}");
        }
    }

    #[test]
    fn derivative_corrections_remove_low_order_terms() {
        let p = IftParams { t: 1e-3, r: [1e-40; 3], ..base(3, 0) };
        let plain = IftSetup::new(3, 0, false).unwrap().estimate_g(&p).unwrap();
        let corrected = IftSetup::new(3, 2, false).unwrap().estimate_g(&IftParams { derivs: 2, ..p }).unwrap();
        // O(T) without corrections, O(T³) with two
        assert!(plain[1] > 1e-4, "{plain:?}");
        for i in 0..3 {
            assert!(corrected[i] < 1e-6, "{i}: {}", corrected[i]);
        }
    }

    #[test]
    fn genus_grows_as_t_shrinks() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let g = |t: f64| s.genus_bound(&IftParams { t, ..base(1, 0) }).unwrap().genus;
        assert!(g(1e-5) > g(1e-4) && g(1e-4) > g(1e-3) && g(1e-7) > 1e6);
    }

    #[test]
    fn remainder_walks_of_length_two() {
        let all: Vec<Vec<u8>> = (1..=3u8).flat_map(|a| (1..=3u8).map(move |b| vec![a, b])).collect();
        let valid: Vec<_> = all.into_iter().filter(|w| crate::omega::walk(w).0).collect();
        assert_eq!(walks_from_e3(2), valid);
        assert_eq!(valid.len(), 4);
    }

    #[test]
    fn tail_constant_without_corrections() {
        let s = IftSetup::new(1, 0, false).unwrap();
        let p = base(1, 0);
        let mut c = s.genus_bound(&p).unwrap();
        c.c_k = 0.0;
        c.t_prime = p.t;
        let cfg = s.cauchy_config(&p, &c).unwrap();
        assert!((cfg.c_a - 2f64.sqrt() * p.r[1]).abs() < 1e-15);
    }

    #[test]
    fn divided_difference_inverts_multiplication() {
        let ctx = Ctx::new(30).unwrap();
        let u = LaurentPoly::from_terms(&ctx, [(0, ctx.real_f64(0.5)), (2, ctx.real_f64(-1.25)), (4, ctx.real_f64(3.0))]);
        let f = &LaurentPoly::from_terms(&ctx, [(0, -&ctx.one()), (2, ctx.one())]) * &u;
        let d = divided_difference(&f).unwrap();
        assert!((&d - &u).terms().all(|(_, c)| c.contains_zero()));
    }
}
